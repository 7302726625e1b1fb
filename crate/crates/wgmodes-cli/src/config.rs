//! Run configuration: flat `key = value` config files with command-line
//! overrides.

use std::path::{Path, PathBuf};

/// Everything a run needs. Flags override config-file entries; defaults fill
/// the rest.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh: Option<PathBuf>,
    /// Built-in rectangle geometry `(a, b, nx, ny)` as a mesh source.
    pub rect: Option<(f64, f64, usize, usize)>,
    pub materials: Option<PathBuf>,
    pub omega: Option<f64>,
    pub num_modes: usize,
    pub shift: Option<(f64, f64)>,
    pub out: Option<PathBuf>,
    pub dtn_out: Option<PathBuf>,
    pub fields_out: Option<PathBuf>,
    pub levels: usize,
    pub tol_real: f64,
    pub tol_cluster: f64,
    pub tol_orth: f64,
    pub tol_solver: f64,
    pub tol_cutoff: f64,
    pub pec_tags: Vec<String>,
    pub threads: usize,
    pub timestamp: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: None,
            rect: None,
            materials: None,
            omega: None,
            num_modes: 12,
            shift: None,
            out: None,
            dtn_out: None,
            fields_out: None,
            levels: 3,
            tol_real: 1e-8,
            tol_cluster: 1e-6,
            tol_orth: 1e-8,
            tol_solver: 1e-10,
            tol_cutoff: 1e-6,
            pec_tags: vec!["pec".to_string()],
            threads: 1,
            timestamp: false,
        }
    }
}

pub fn parse_rect(text: &str) -> Result<(f64, f64, usize, usize), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected 'a,b,nx,ny', found '{text}'"));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad rectangle width '{}'", parts[0]))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad rectangle height '{}'", parts[1]))?;
    let nx: usize = parts[2]
        .parse()
        .map_err(|_| format!("bad cell count '{}'", parts[2]))?;
    let ny: usize = parts[3]
        .parse()
        .map_err(|_| format!("bad cell count '{}'", parts[3]))?;
    Ok((a, b, nx, ny))
}

pub fn parse_shift(text: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.len() {
        1 => Ok((
            parts[0]
                .parse()
                .map_err(|_| format!("bad shift '{text}'"))?,
            0.0,
        )),
        2 => Ok((
            parts[0]
                .parse()
                .map_err(|_| format!("bad shift '{text}'"))?,
            parts[1]
                .parse()
                .map_err(|_| format!("bad shift '{text}'"))?,
        )),
        _ => Err(format!("expected 're' or 're,im', found '{text}'")),
    }
}

impl RunConfig {
    /// Apply one `key = value` line from a config file.
    pub fn apply(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let f64v = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("bad number '{v}' for {key}"))
        };
        let usizev = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| format!("bad integer '{v}' for {key}"))
        };
        match key {
            "mesh" => self.mesh = Some(path(value)),
            "rect" => self.rect = Some(parse_rect(value)?),
            "materials" => self.materials = Some(path(value)),
            "omega" => self.omega = Some(f64v(value)?),
            "num_modes" => self.num_modes = usizev(value)?,
            "shift" => self.shift = Some(parse_shift(value)?),
            "out" => self.out = Some(path(value)),
            "dtn_out" => self.dtn_out = Some(path(value)),
            "fields_out" => self.fields_out = Some(path(value)),
            "levels" => self.levels = usizev(value)?,
            "tol_real" => self.tol_real = f64v(value)?,
            "tol_cluster" => self.tol_cluster = f64v(value)?,
            "tol_orth" => self.tol_orth = f64v(value)?,
            "tol_solver" => self.tol_solver = f64v(value)?,
            "tol_cutoff" => self.tol_cutoff = f64v(value)?,
            "pec_tags" => self.pec_tags = value.split(',').map(|s| s.trim().to_string()).collect(),
            "threads" => self.threads = usizev(value)?,
            "timestamp" => {
                self.timestamp = value
                    .parse::<bool>()
                    .map_err(|_| format!("bad boolean '{value}' for timestamp"))?
            }
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }

    /// Load a config file (flat `key = value` lines, `#` comments).
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let mut cfg = RunConfig::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    ln + 1
                ));
            };
            cfg.apply(key.trim(), value.trim(), &base)
                .map_err(|e| format!("{}:{}: {e}", path.display(), ln + 1))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.omega {
            Some(w) if w > 0.0 => {}
            Some(w) => return Err(format!("omega must be positive, got {w}")),
            None => return Err("omega is required (flag --omega or config key)".into()),
        }
        if self.num_modes == 0 {
            return Err("num_modes must be at least 1".into());
        }
        if self.mesh.is_none() && self.rect.is_none() {
            return Err("a mesh source is required: --mesh FILE or --rect a,b,nx,ny".into());
        }
        if self.mesh.is_some() && self.rect.is_some() {
            return Err("--mesh and --rect are mutually exclusive".into());
        }
        if self.threads == 0 {
            return Err("threads must be at least 1".into());
        }
        Ok(())
    }
}
