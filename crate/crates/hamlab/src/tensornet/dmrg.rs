//! Single-site DMRG for 1D nearest-neighbor Hamiltonians.
//!
//! The MPS is kept in mixed-canonical form around the active site; the
//! effective Hamiltonian there is assembled densely from cached left/right
//! energy environments plus the operator-Schmidt factors of the two
//! crossing bond terms, and its smallest eigenpair replaces the site
//! tensor. Because the Krylov solve is seeded with the current tensor, the
//! energy after every local step is bounded by the energy before it, so
//! the trace is monotone non-increasing. Sweep order: sites 0..n-1 then
//! n-2..0. No MPO formalism; bond terms enter through their operator
//! Schmidt decompositions M = sum_k X_k (x) Y_k.

use ndarray::{Array1, Array2, Array3};

use crate::error::{Error, Result};
use crate::ham::LocalHamiltonian;
use crate::linalg::{self, cr, dagger, identity, kron, CMat, CVec, C64, ZERO};

use super::mps::{Canonical, Mps};

#[derive(Debug, Clone)]
pub struct DmrgResult {
    pub energy: f64,
    pub mps: Mps,
    /// Energy after every local optimization step.
    pub trace: Vec<f64>,
    /// Energy at the end of each sweep.
    pub sweep_energies: Vec<f64>,
    pub converged: bool,
    pub sweeps_used: usize,
}

/// M (d^2 x d^2 on a site pair) = sum_k X_k (x) Y_k via the reshuffle
/// K[(j1 j1'),(j2 j2')] = M[(j1 j2),(j1' j2')] and an SVD of K.
fn operator_schmidt(m: &CMat, d: usize) -> Result<Vec<(CMat, CMat)>> {
    let mut k = Array2::from_elem((d * d, d * d), ZERO);
    for j1 in 0..d {
        for j2 in 0..d {
            for j1p in 0..d {
                for j2p in 0..d {
                    k[[j1 * d + j1p, j2 * d + j2p]] = m[[j1 * d + j2, j1p * d + j2p]];
                }
            }
        }
    }
    let (u, sv, vt) = linalg::svd_full(&k)?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let mut out = Vec::new();
    for (r, &s) in sv.iter().enumerate() {
        if s <= 1e-12 * smax.max(1.0) {
            continue;
        }
        let w = s.sqrt();
        let mut x = Array2::from_elem((d, d), ZERO);
        let mut y = Array2::from_elem((d, d), ZERO);
        for a in 0..d {
            for b in 0..d {
                x[[a, b]] = u[[a * d + b, r]] * cr(w);
                y[[a, b]] = vt[[r, a * d + b]] * cr(w);
            }
        }
        out.push((x, y));
    }
    Ok(out)
}

fn site_matrix(t: &Array3<C64>, j: usize) -> CMat {
    let (dl, _, dr) = t.dim();
    Array2::from_shape_fn((dl, dr), |(a, b)| t[[a, j, b]])
}

/// Left transfer with an on-site operator: env' = sum_{j j'} O[j,j'] A^{j dag} env A^{j'}.
fn transfer_left(t: &Array3<C64>, env: &CMat, op: Option<&CMat>) -> CMat {
    let (_, d, dr) = t.dim();
    let mut out = Array2::from_elem((dr, dr), ZERO);
    match op {
        None => {
            for j in 0..d {
                let m = site_matrix(t, j);
                out = out + dagger(&m).dot(env).dot(&m);
            }
        }
        Some(o) => {
            for j in 0..d {
                for jp in 0..d {
                    if o[[j, jp]] == ZERO {
                        continue;
                    }
                    let mb = site_matrix(t, j);
                    let mk = site_matrix(t, jp);
                    out = out + dagger(&mb).dot(env).dot(&mk).mapv(|z| z * o[[j, jp]]);
                }
            }
        }
    }
    out
}

/// Right transfer: env' = sum_{j j'} O[j,j'] conj(B^j) env (B^{j'})^T.
fn transfer_right(t: &Array3<C64>, env: &CMat, op: Option<&CMat>) -> CMat {
    let (dl, d, _) = t.dim();
    let mut out = Array2::from_elem((dl, dl), ZERO);
    match op {
        None => {
            for j in 0..d {
                let m = site_matrix(t, j);
                out = out + m.mapv(|z| z.conj()).dot(env).dot(&m.t());
            }
        }
        Some(o) => {
            for j in 0..d {
                for jp in 0..d {
                    if o[[j, jp]] == ZERO {
                        continue;
                    }
                    let mb = site_matrix(t, j).mapv(|z| z.conj());
                    let mk = site_matrix(t, jp);
                    out = out + mb.dot(env).dot(&mk.t()).mapv(|z| z * o[[j, jp]]);
                }
            }
        }
    }
    out
}

/// Smallest eigenpair of a dense Hermitian matrix, seeded with `start` so
/// the Ritz value never exceeds the start vector's Rayleigh quotient.
fn lowest_pair(h: &CMat, start: &CVec) -> Result<(f64, CVec)> {
    let dim = h.nrows();
    if dim <= 64 {
        let (vals, vecs) = linalg::eigh(h)?;
        return Ok((vals[0], vecs.column(0).to_owned()));
    }
    let mut v = linalg::normalize(start)?;
    let mut best: Option<(f64, CVec)> = None;
    for _restart in 0..8 {
        let block = 60.min(dim);
        let mut basis: Vec<CVec> = vec![v.clone()];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        for j in 0..block {
            let mut w = h.dot(&basis[j]);
            alphas.push(linalg::inner(&basis[j], &w).re);
            for _ in 0..2 {
                for b in &basis {
                    let ov = linalg::inner(b, &w);
                    w = &w - &b.mapv(|z| z * ov);
                }
            }
            let beta = linalg::norm(&w);
            if beta < 1e-13 || j + 1 == block {
                break;
            }
            betas.push(beta);
            basis.push(w.mapv(|z| z / cr(beta)));
        }
        let k = alphas.len();
        let mut t = Array2::from_elem((k, k), ZERO);
        for i in 0..k {
            t[[i, i]] = cr(alphas[i]);
            if i + 1 < k {
                t[[i, i + 1]] = cr(betas[i]);
                t[[i + 1, i]] = cr(betas[i]);
            }
        }
        let (vals, vecs) = linalg::eigh(&t)?;
        let theta = vals[0];
        let mut u = Array1::from_elem(dim, ZERO);
        for (j, b) in basis.iter().enumerate() {
            let coef = vecs[[j, 0]];
            u = &u + &b.mapv(|z| z * coef);
        }
        let u = linalg::normalize(&u)?;
        let resid = linalg::norm(&(&h.dot(&u) - &u.mapv(|z| z * cr(theta))));
        best = Some((theta, u.clone()));
        if resid < 1e-11 * theta.abs().max(1.0) {
            break;
        }
        v = u;
    }
    Ok(best.unwrap())
}

struct Model {
    d: usize,
    onsite: Vec<CMat>,
    /// bond[b] = operator-Schmidt factors of the (b, b+1) term.
    bonds: Vec<Vec<(CMat, CMat)>>,
}

fn ingest(h: &LocalHamiltonian) -> Result<Model> {
    if h.n < 2 {
        return Err(Error::InvalidInput("DMRG needs n >= 2".into()));
    }
    if !h.is_nearest_neighbor() {
        return Err(Error::InvalidInput("DMRG needs 1D nearest-neighbor terms".into()));
    }
    let d = h.dims[0];
    if h.dims.iter().any(|&x| x != d) {
        return Err(Error::InvalidInput("DMRG needs uniform site dimension".into()));
    }
    let mut onsite = vec![Array2::from_elem((d, d), ZERO); h.n];
    let mut bond_sums: Vec<Option<CMat>> = vec![None; h.n - 1];
    for term in &h.terms {
        match term.support.as_slice() {
            [i] => onsite[*i] = &onsite[*i] + &term.matrix,
            [i, j] if *j == *i + 1 => {
                let acc = bond_sums[*i].get_or_insert_with(|| Array2::from_elem((d * d, d * d), ZERO));
                *acc = &*acc + &term.matrix;
            }
            _ => return Err(Error::InvalidInput("non-1D term support".into())),
        }
    }
    let mut bonds = Vec::with_capacity(h.n - 1);
    for b in bond_sums {
        bonds.push(match b {
            Some(m) => operator_schmidt(&m, d)?,
            None => Vec::new(),
        });
    }
    Ok(Model { d, onsite, bonds })
}

fn random_mps(n: usize, d: usize, dmax: usize, seed: u64) -> Mps {
    let mut rng = linalg::seeded_rng(seed);
    let bond = |i: usize| -> usize {
        // min(D, d^{i}, d^{n-i}) at cut i, avoiding overflow
        let mut cap = 1usize;
        for _ in 0..i.min(n - i) {
            cap = cap.saturating_mul(d);
            if cap >= dmax {
                return dmax;
            }
        }
        cap.min(dmax)
    };
    let tensors = (0..n)
        .map(|i| {
            let dl = bond(i);
            let dr = bond(i + 1);
            let flat = linalg::random_cmat(dl * d * dr, 1, &mut rng);
            Array3::from_shape_vec((dl, d, dr), flat.column(0).to_vec()).expect("reshape")
        })
        .collect();
    Mps {
        n,
        d,
        tensors,
        canonical: Canonical::None,
    }
}

/// Dense effective Hamiltonian on (left bond, physical, right bond) at the
/// active site.
#[allow(clippy::too_many_arguments)]
fn effective_h(
    model: &Model,
    i: usize,
    n: usize,
    dl: usize,
    dr: usize,
    hl: &CMat,
    cl: &[CMat],
    hr: &CMat,
    cross_r: &[CMat],
) -> CMat {
    let d = model.d;
    let idl = identity(dl);
    let idd = identity(d);
    let idr = identity(dr);
    let mut heff = kron(hl, &kron(&idd, &idr));
    if i > 0 {
        for (k, (_x, y)) in model.bonds[i - 1].iter().enumerate() {
            heff = heff + kron(&cl[k], &kron(y, &idr));
        }
    }
    heff = heff + kron(&idl, &kron(&model.onsite[i], &idr));
    if i < n - 1 {
        for (k, (x, _y)) in model.bonds[i].iter().enumerate() {
            heff = heff + kron(&idl, &kron(x, &cross_r[k]));
        }
    }
    heff + kron(&idl, &kron(&idd, hr))
}

/// Variational single-site ground-state search. Stops when the energy
/// change over a full sweep drops below `tol` or `sweeps` are exhausted.
pub fn dmrg_run(
    h: &LocalHamiltonian,
    dmax: usize,
    sweeps: usize,
    tol: f64,
    seed: u64,
) -> Result<DmrgResult> {
    if dmax < 1 {
        return Err(Error::InvalidInput("D must be >= 1".into()));
    }
    let model = ingest(h)?;
    let n = h.n;
    let d = model.d;
    let mut mps = random_mps(n, d, dmax, seed);
    mps.canonicalize(0)?;
    // normalize: all norm sits in the center tensor
    let nrm = mps.tensors[0].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    mps.tensors[0] = mps.tensors[0].mapv(|z| z / cr(nrm));

    // environments: hl[i]/hr[i] cover sites < i / >= i; cl[b]/cr_env[b] are
    // the per-factor envs of bond (b, b+1) seen from the left / right.
    let mut hl: Vec<CMat> = vec![Array2::from_elem((1, 1), ZERO); n + 1];
    let mut hr: Vec<CMat> = vec![Array2::from_elem((1, 1), ZERO); n + 1];
    let mut cl: Vec<Vec<CMat>> = vec![Vec::new(); n.saturating_sub(1)];
    let mut cr_env: Vec<Vec<CMat>> = vec![Vec::new(); n.saturating_sub(1)];

    let build_hr_at = |mps: &Mps, i: usize, hr: &CMat, cr_b: &[CMat]| -> CMat {
        // hr', cr' after absorbing right-canonical site i
        let t = &mps.tensors[i];
        let mut out = transfer_right(t, hr, None) + transfer_right(t, &identity(t.dim().2), Some(&model.onsite[i]));
        if i < n - 1 {
            for (k, (x, _y)) in model.bonds[i].iter().enumerate() {
                out = out + transfer_right(t, &cr_b[k], Some(x));
            }
        }
        out
    };
    let build_cr_at = |mps: &Mps, i: usize| -> Vec<CMat> {
        // bond (i-1, i): E_{Y_k} from right-canonical site i
        let t = &mps.tensors[i];
        let idr = identity(t.dim().2);
        model.bonds[i - 1]
            .iter()
            .map(|(_x, y)| transfer_right(t, &idr, Some(y)))
            .collect()
    };

    for i in (1..n).rev() {
        let cr_b = if i < n - 1 { cr_env[i].as_slice() } else { &[] };
        hr[i] = build_hr_at(&mps, i, &hr[i + 1], cr_b);
        cr_env[i - 1] = build_cr_at(&mps, i);
    }

    let mut trace: Vec<f64> = Vec::new();
    let mut sweep_energies: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut sweeps_used = 0usize;

    let solve_site = |mps: &mut Mps,
                      i: usize,
                      hl: &CMat,
                      cl_b: &[CMat],
                      hr: &CMat,
                      cr_b: &[CMat]|
     -> Result<f64> {
        let (dl, _, dr) = mps.tensors[i].dim();
        let heff = effective_h(&model, i, n, dl, dr, hl, cl_b, hr, cr_b);
        let start: CVec = Array1::from_iter(mps.tensors[i].iter().cloned());
        let (theta, u) = lowest_pair(&heff, &start)?;
        mps.tensors[i] =
            Array3::from_shape_vec((dl, mps.d, dr), u.to_vec()).expect("reshape");
        Ok(theta)
    };

    let empty: Vec<CMat> = Vec::new();
    for _sweep in 0..sweeps {
        // forward: sites 0 .. n-1
        for i in 0..n {
            let cl_b = if i > 0 { &cl[i - 1] } else { &empty };
            let cr_b = if i < n - 1 { &cr_env[i] } else { &empty };
            let theta = solve_site(&mut mps, i, &hl[i], cl_b, &hr[i + 1], cr_b)?;
            trace.push(theta);
            if i < n - 1 {
                mps.left_normalize_site(i)?;
                let t = &mps.tensors[i];
                let mut new_hl = transfer_left(t, &hl[i], None)
                    + transfer_left(t, &identity(t.dim().0), Some(&model.onsite[i]));
                if i > 0 {
                    for (k, (_x, y)) in model.bonds[i - 1].iter().enumerate() {
                        new_hl = new_hl + transfer_left(t, &cl[i - 1][k], Some(y));
                    }
                }
                hl[i + 1] = new_hl;
                let idl = identity(t.dim().0);
                cl[i] = model.bonds[i]
                    .iter()
                    .map(|(x, _y)| transfer_left(t, &idl, Some(x)))
                    .collect();
            }
        }
        // backward: sites n-2 .. 0
        for i in (0..n - 1).rev() {
            mps.right_normalize_site(i + 1)?;
            let cr_b = if i + 1 < n - 1 { cr_env[i + 1].as_slice() } else { &[] };
            hr[i + 1] = build_hr_at(&mps, i + 1, &hr[i + 2], cr_b);
            cr_env[i] = build_cr_at(&mps, i + 1);
            let cl_b = if i > 0 { &cl[i - 1] } else { &empty };
            let theta = solve_site(&mut mps, i, &hl[i], cl_b, &hr[i + 1], &cr_env[i])?;
            trace.push(theta);
        }
        sweeps_used += 1;
        let e = *trace.last().unwrap();
        if let Some(&prev) = sweep_energies.last() {
            if (prev - e).abs() < tol {
                sweep_energies.push(e);
                converged = true;
                break;
            }
        }
        sweep_energies.push(e);
    }

    mps.canonical = Canonical::Mixed(0);
    let energy = *trace.last().unwrap();
    Ok(DmrgResult {
        energy,
        mps,
        trace,
        sweep_energies,
        converged,
        sweeps_used,
    })
}
