//! Mean-field theory of the classical Ising model on a D-dimensional
//! hypercubic lattice (coordination number 2D).
//!
//! Self-consistency equation: m = tanh(2 beta D J m). For 2bDJ <= 1 the only
//! fixed point is m = 0; past that a symmetric pair ±m0 appears and carries
//! the lower free energy F_mf = n b D J m^2 - n ln(2 cosh(2 b D J m)).
//! Spontaneous magnetization therefore sets in at T_c = 2DJ (k_B = 1).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MeanFieldSolution {
    pub beta: f64,
    pub d: u32,
    pub j: f64,
    pub n: usize,
    /// (m, F_mf) for every fixed point of the self-consistency equation.
    pub candidates: Vec<(f64, f64)>,
    /// The fixed point minimizing F_mf.
    pub physical_m: f64,
    pub t_c: f64,
}

fn validate(beta: f64, d: u32, j: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::InvalidInput("beta must be > 0".into()));
    }
    if d < 1 {
        return Err(Error::InvalidInput("D must be >= 1".into()));
    }
    if !(j > 0.0) {
        return Err(Error::InvalidInput("J must be > 0".into()));
    }
    Ok(())
}

/// All real fixed points of m = tanh(2 beta D J m), to 1e-10.
///
/// g(m) = m - tanh(k m) with k = 2 beta D J: g(0) = 0 always; for k > 1,
/// g is negative just right of 0 and positive at m = 1, with a single sign
/// change on (0, 1], so bisection on (1e-12, 1] finds m0. The boundary
/// k = 1 is a tangency and returns {0} only.
pub fn solve_mf(beta: f64, d: u32, j: f64) -> Result<Vec<f64>> {
    validate(beta, d, j)?;
    let k = 2.0 * beta * d as f64 * j;
    let mut roots = vec![0.0];
    if k > 1.0 {
        let g = |m: f64| m - (k * m).tanh();
        let mut lo = 1e-12;
        let mut hi = 1.0;
        debug_assert!(g(lo) < 0.0 && g(hi) >= 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let m0 = 0.5 * (lo + hi);
        roots.push(m0);
        roots.push(-m0);
    }
    Ok(roots)
}

/// F_mf = n beta D J m^2 - n ln(2 cosh(2 beta D J m)).
pub fn mf_free_energy(m: f64, beta: f64, d: u32, j: f64, n: usize) -> f64 {
    let bdj = beta * d as f64 * j;
    let nf = n as f64;
    nf * bdj * m * m - nf * (2.0 * (2.0 * bdj * m).cosh()).ln()
}

/// T_c = 2DJ.
pub fn critical_temperature(d: u32, j: f64) -> f64 {
    2.0 * d as f64 * j
}

pub fn solve_full(beta: f64, d: u32, j: f64, n: usize) -> Result<MeanFieldSolution> {
    let roots = solve_mf(beta, d, j)?;
    let candidates: Vec<(f64, f64)> = roots
        .iter()
        .map(|&m| (m, mf_free_energy(m, beta, d, j, n)))
        .collect();
    let &(physical_m, _) = candidates
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .unwrap();
    Ok(MeanFieldSolution {
        beta,
        d,
        j,
        n,
        candidates,
        physical_m,
        t_c: critical_temperature(d, j),
    })
}

/// (T, physical m, F_mf per site) over a temperature grid.
pub fn mf_magnetization_vs_t(d: u32, j: f64, t_grid: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInput("temperatures must be positive".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("T grid must be ascending".into()));
    }
    t_grid
        .iter()
        .map(|&t| {
            let sol = solve_full(1.0 / t, d, j, 1)?;
            // report the non-negative physical magnetization
            let m = sol.physical_m.abs();
            Ok((t, m, mf_free_energy(m, 1.0 / t, d, j, 1)))
        })
        .collect()
}
