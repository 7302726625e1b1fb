//! Reverse Cuthill-McKee ordering for bandwidth reduction.

use super::Csr;
use num_complex::Complex64;

/// Compute an RCM ordering of the symmetrized pattern of `m`.
///
/// Returns `perm` with `perm[new] = old`. Disconnected components are ordered
/// one after another, each started from a minimum-degree node, so the result
/// is a full permutation even for block-diagonal patterns.
pub fn rcm_order(m: &Csr<Complex64>) -> Vec<usize> {
    let n = m.nrows();
    // symmetrized adjacency, self-loops dropped
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c, _) in m.iter() {
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();

    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    loop {
        // next start: unvisited node of minimum degree
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i));
        let Some(start) = start else { break };
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| (degree[u], u));
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Half bandwidth of a matrix (max |i - j| over stored entries).
pub fn bandwidth(m: &Csr<Complex64>) -> usize {
    m.iter().map(|(r, c, _)| r.abs_diff(c)).max().unwrap_or(0)
}
