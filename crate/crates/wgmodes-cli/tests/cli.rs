//! End-to-end tests of the command-line interface: exit codes, file outputs
//! and determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wgmodes"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("wgmodes_cli_tests").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_rect_mesh_file(dir: &Path, nx: usize, ny: usize) -> PathBuf {
    let mesh = wgmodes::mesh::generate_rect_mesh(1.0, 0.5, nx, ny).unwrap();
    let path = dir.join(format!("rect_{nx}x{ny}.msh"));
    std::fs::write(&path, mesh.serialize()).unwrap();
    path
}

#[test]
fn solve_writes_a_mode_table_with_three_propagating_modes() {
    let dir = tmpdir("solve");
    let mesh = write_rect_mesh_file(&dir, 16, 8);
    std::fs::write(dir.join("mat.txt"), "0 1.0 1.0\n").unwrap();
    let out = dir.join("modes.csv");
    let status = bin()
        .args(["solve", "--mesh"])
        .arg(&mesh)
        .args(["--materials"])
        .arg(dir.join("mat.txt"))
        .args(["--omega", "6.5", "--num-modes", "12", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let prop = csv.lines().filter(|l| l.contains(",propagating,")).count();
    assert_eq!(prop, 3);
    assert_eq!(csv.lines().count(), 13, "header plus 12 modes");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tmpdir("determinism");
    let mesh = write_rect_mesh_file(&dir, 8, 4);
    let run = |out: &Path, dtn: &Path| {
        let status = bin()
            .args(["dtn", "--mesh"])
            .arg(&mesh)
            .args(["--omega", "6.5", "--num-modes", "8", "--dtn-out"])
            .arg(dtn)
            .args(["--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let (o1, d1) = (dir.join("a.csv"), dir.join("a.dtn"));
    let (o2, d2) = (dir.join("b.csv"), dir.join("b.dtn"));
    run(&o1, &d1);
    run(&o2, &d2);
    assert_eq!(std::fs::read(&d1).unwrap(), std::fs::read(&d2).unwrap());
    // solve artifacts too
    let s1 = bin()
        .args(["solve", "--mesh"])
        .arg(&mesh)
        .args(["--omega", "6.5", "--num-modes", "8"])
        .output()
        .unwrap();
    let s2 = bin()
        .args(["solve", "--mesh"])
        .arg(&mesh)
        .args(["--omega", "6.5", "--num-modes", "8"])
        .output()
        .unwrap();
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn dtn_file_round_trips_through_the_library() {
    let dir = tmpdir("dtn_roundtrip");
    let mesh_path = write_rect_mesh_file(&dir, 8, 4);
    let dtn_path = dir.join("rect.dtn");
    let status = bin()
        .args(["dtn", "--mesh"])
        .arg(&mesh_path)
        .args(["--omega", "6.5", "--num-modes", "6", "--dtn-out"])
        .arg(&dtn_path)
        .status()
        .unwrap();
    assert!(status.success());
    let mesh_text = std::fs::read_to_string(&mesh_path).unwrap();
    let mesh = wgmodes::mesh::parse_mesh(&mesh_text).unwrap();
    let dtn = wgmodes::dtn::import_dtn(&dtn_path, Some(&mesh)).unwrap();
    assert_eq!(dtn.betas.len(), 6);
    assert_eq!(dtn.omega, 6.5);
    // re-export is byte-identical to the file the CLI wrote
    assert_eq!(dtn.to_wgdtn1(), std::fs::read_to_string(&dtn_path).unwrap());
}

#[test]
fn cutoff_frequency_is_rejected_with_exit_code_2() {
    // drive omega^2 exactly onto the discrete TM11 Dirichlet eigenvalue
    let mesh = wgmodes::mesh::generate_rect_mesh(1.0, 0.5, 16, 8).unwrap();
    let dm = wgmodes::fem::build_dofmap(
        &mesh,
        &std::collections::BTreeSet::from(["pec".to_string()]),
    )
    .unwrap();
    let blocks = wgmodes::fem::assemble_blocks(
        &mesh,
        &dm,
        &wgmodes::materials::MaterialMap::uniform(1.0, 1.0),
    )
    .unwrap();
    let mut opts = wgmodes::eigen::ShiftInvertOpts::new(
        num_complex::Complex64::new(5.0 * std::f64::consts::PI.powi(2), 0.0),
        1,
    );
    opts.krylov_dim = 30;
    let pairs = wgmodes::eigen::shift_invert_arnoldi(&blocks.kv, &blocks.mv, &opts).unwrap();
    let omega_cut = pairs[0].lambda.re.sqrt();

    let dir = tmpdir("cutoff");
    let mesh_path = write_rect_mesh_file(&dir, 16, 8);
    let output = bin()
        .args(["solve", "--mesh"])
        .arg(&mesh_path)
        .args(["--omega", &format!("{omega_cut:.17e}"), "--num-modes", "4"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "cutoff exit code");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("error[cutoff]:"), "{stderr}");
}

#[test]
fn missing_and_inconsistent_inputs_map_to_distinct_exit_codes() {
    let dir = tmpdir("errors");
    let mesh = write_rect_mesh_file(&dir, 4, 2);

    // missing materials file -> io (5)
    let output = bin()
        .args(["solve", "--mesh"])
        .arg(&mesh)
        .args(["--materials", "/nonexistent/mat.txt", "--omega", "6.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&output.stderr).contains("error[io]:"));

    // material map without the mesh region -> validation (4), naming the tag
    std::fs::write(dir.join("wrong.txt"), "42 1.0 1.0\n").unwrap();
    let output = bin()
        .args(["solve", "--mesh"])
        .arg(&mesh)
        .args(["--materials"])
        .arg(dir.join("wrong.txt"))
        .args(["--omega", "6.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("error[validation]:") && stderr.contains("'0'"),
        "{stderr}"
    );

    // no omega -> validation
    let output = bin().args(["solve", "--mesh"]).arg(&mesh).output().unwrap();
    assert_eq!(output.status.code(), Some(4));

    // convergence with too few levels -> validation
    let output = bin()
        .args([
            "convergence",
            "--rect",
            "1,0.5,4,2",
            "--omega",
            "6.5",
            "--levels",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));

    // convergence without a rectangle -> validation (no analytic reference)
    let output = bin()
        .args(["convergence", "--mesh"])
        .arg(&mesh)
        .args(["--omega", "6.5", "--levels", "3"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&output.stderr).contains("rect"));
}

#[test]
fn tem_geometry_triggers_the_automatic_shift_retry() {
    // a shielded strip supports a TEM mode with beta^2 = omega^2 exactly,
    // so the default shift sits on the spectrum and the first factorization
    // fails; the solve must recover by perturbing the shift
    let n = 8usize;
    let base = wgmodes::mesh::generate_rect_mesh(1.0, 1.0, n, n).unwrap();
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = base.nodes.clone();
    let mut dup = std::collections::BTreeMap::new();
    for i in (n / 4 + 1)..(3 * n / 4) {
        let orig = id(i, n / 2);
        dup.insert(orig, nodes.len());
        nodes.push(nodes[orig]);
    }
    let mut triangles = base.triangles.clone();
    for t in triangles.iter_mut() {
        let cy = (base.nodes[t.v[0]][1] + base.nodes[t.v[1]][1] + base.nodes[t.v[2]][1]) / 3.0;
        if cy > 0.5 {
            for v in t.v.iter_mut() {
                if let Some(&d) = dup.get(v) {
                    *v = d;
                }
            }
        }
    }
    let mut boundary = base.boundary_edges.clone();
    for i in (n / 4)..(3 * n / 4) {
        let (a, b) = (id(i, n / 2), id(i + 1, n / 2));
        let (ad, bd) = (
            dup.get(&a).copied().unwrap_or(a),
            dup.get(&b).copied().unwrap_or(b),
        );
        boundary.push(wgmodes::mesh::BoundaryEdge { v: [a, b], tag: "pec".into() });
        boundary.push(wgmodes::mesh::BoundaryEdge { v: [ad, bd], tag: "pec".into() });
    }
    let mesh = wgmodes::mesh::Mesh::new(nodes, triangles, boundary).unwrap();

    let dir = tmpdir("tem");
    let path = dir.join("strip.msh");
    std::fs::write(&path, mesh.serialize()).unwrap();
    let output = bin()
        .args(["solve", "--mesh"])
        .arg(&path)
        .args(["--omega", "5.0", "--num-modes", "4"])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("shift perturbed"), "{stderr}");
    // the TEM row: beta^2 = 25 to solver precision, classified propagating
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.lines().any(|l| {
            l.split(',')
                .nth(1)
                .and_then(|v| v.parse::<f64>().ok())
                .is_some_and(|v| (v - 25.0).abs() < 1e-6)
                && l.contains("propagating")
        }),
        "{stdout}"
    );
}

#[test]
fn verify_reports_all_passes_on_the_baseline() {
    let output = bin()
        .args([
            "verify",
            "--rect",
            "1,0.5,8,4",
            "--omega",
            "6.5",
            "--num-modes",
            "8",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let passes = stdout.lines().filter(|l| l.starts_with("PASS")).count();
    let fails = stdout.lines().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(fails, 0, "{stdout}");
    assert_eq!(passes, 6, "{stdout}");
}

#[test]
fn verify_runs_to_completion_on_a_degenerate_tiny_mesh() {
    // 2-triangle mesh: one free edge, no free vertices
    let output = bin()
        .args([
            "verify",
            "--rect",
            "1,0.5,1,1",
            "--omega",
            "6.5",
            "--num-modes",
            "4",
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn convergence_reports_second_order() {
    let output = bin()
        .args([
            "convergence",
            "--rect",
            "1,0.5,8,4",
            "--omega",
            "6.5",
            "--levels",
            "3",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let orders: Vec<f64> = stdout
        .lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next())
        .filter_map(|t| t.parse().ok())
        .collect();
    assert_eq!(orders.len(), 2);
    assert!(orders.iter().all(|&o| o >= 1.8), "orders {orders:?}");
    // errors decrease monotonically
    let errs: Vec<f64> = stdout
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(3))
        .filter_map(|t| t.parse().ok())
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "errors {errs:?}");
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = tmpdir("config");
    let mesh = write_rect_mesh_file(&dir, 8, 4);
    std::fs::write(
        dir.join("run.cfg"),
        format!(
            "# baseline run\nmesh = {}\nomega = 6.5\nnum_modes = 5\n",
            mesh.file_name().unwrap().to_str().unwrap()
        ),
    )
    .unwrap();
    let output = bin()
        .args(["solve", "--config"])
        .arg(dir.join("run.cfg"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let rows = String::from_utf8_lossy(&output.stdout).lines().count();
    assert_eq!(rows, 6, "header plus num_modes from config");

    // the flag wins over the config entry
    let output = bin()
        .args(["solve", "--config"])
        .arg(dir.join("run.cfg"))
        .args(["--num-modes", "3"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let rows = String::from_utf8_lossy(&output.stdout).lines().count();
    assert_eq!(rows, 4);
}

#[test]
fn fields_export_writes_a_vtk_file() {
    let dir = tmpdir("fields");
    let vtk = dir.join("fields.vtk");
    let status = bin()
        .args([
            "solve",
            "--rect",
            "1,0.5,8,4",
            "--omega",
            "6.5",
            "--num-modes",
            "3",
        ])
        .args(["--out"])
        .arg(dir.join("m.csv"))
        .args(["--fields-out"])
        .arg(&vtk)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&vtk).unwrap();
    assert!(text.starts_with("# vtk DataFile Version 3.0"));
    assert!(text.contains("VECTORS mode00_E_re double"));
    assert!(text.contains("SCALARS mode00_E3_re double 1"));
}
