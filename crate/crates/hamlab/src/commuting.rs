//! Bravyi-Vyalyi structure lemma for a commuting pair A on X(x)Y, B on
//! Y(x)Z.
//!
//! A induces the algebra A~ on Y generated by the slices A_ij =
//! (<i|_X (x) I) A (|j>_X (x) I); likewise B~ from B_kl. When [A (x) I_Z,
//! I_X (x) B] = 0 the two induced algebras commute elementwise, so Y
//! splits as a direct sum of tensor products Y = (+)_i Y_i1 (x) Y_i2 with
//! A acting only on X (x) Y_i1 and B only on Y_i2 (x) Z inside each block.
//! The central projections come from spectral clustering of a generic
//! Hermitian center element; inside a block the factor algebra L(Y_i1)
//! (x) I is untangled by matching eigenvector clusters of a generic
//! element through polar decomposition of an off-diagonal slice.
//!
//! Everything is computed at floating point with Frobenius orthonormal
//! operator bases; dim(Y) is capped at 16 (closure beyond that wants
//! exact arithmetic).

use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, cr, dagger, frobenius_norm, identity, kron, seeded_rng, C64, CMat, ZERO,
};

pub const SPAN_TOL: f64 = 1e-9;
pub const CLUSTER_TOL: f64 = 1e-7;
pub const RESIDUAL_TOL: f64 = 1e-7;
pub const MAX_DIM_Y: usize = 16;

/// Which tensor factor of the operator is the shared space Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Operator on Y (x) Z: Y is the first factor.
    First,
    /// Operator on X (x) Y: Y is the second factor.
    Second,
}

#[derive(Debug, Clone)]
pub struct InducedAlgebra {
    pub dim_y: usize,
    /// The nonzero slices A_ij.
    pub generators: Vec<CMat>,
    /// Frobenius-orthonormal basis of the generated unital algebra.
    pub basis: Vec<CMat>,
}

#[derive(Debug, Clone)]
pub struct AlgebraBlock {
    /// dy x (d1*d2) isometry; column (k, mu) -> k*d2 + mu.
    pub isometry: CMat,
    /// A-side factor dimension dim(Y_i1).
    pub d1: usize,
    /// B-side factor dimension dim(Y_i2).
    pub d2: usize,
}

#[derive(Debug, Clone)]
pub struct AlgebraDecomposition {
    pub dim_y: usize,
    pub blocks: Vec<AlgebraBlock>,
}

fn mat_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Project `cand` against the orthonormal `basis`; append the normalized
/// residual when it exceeds the span tolerance. Returns true if added.
fn orthonormal_extend(basis: &mut Vec<CMat>, cand: &CMat, scale: f64) -> bool {
    let mut r = cand.clone();
    // two rounds of modified Gram-Schmidt for numerical safety
    for _ in 0..2 {
        for b in basis.iter() {
            let ov = mat_inner(b, &r);
            r = &r - &b.mapv(|x| x * ov);
        }
    }
    let nrm = frobenius_norm(&r);
    if nrm > SPAN_TOL * scale.max(1.0) {
        basis.push(r.mapv(|x| x / cr(nrm)));
        true
    } else {
        false
    }
}

/// Extract the slices of `a` along the non-Y factor and close them (plus
/// identity) under products. Generators of a Hermitian operator are
/// adjoint-closed, so product closure yields a *-algebra.
pub fn induced_algebra(a: &CMat, dim_y: usize, side: Side) -> Result<InducedAlgebra> {
    let total = a.nrows();
    if dim_y == 0 || total % dim_y != 0 {
        return Err(Error::InvalidInput("dim_y does not divide operator dimension".into()));
    }
    if dim_y > MAX_DIM_Y {
        return Err(Error::InvalidInput(format!(
            "dim(Y) = {dim_y} exceeds cap {MAX_DIM_Y}: closure needs exact arithmetic"
        )));
    }
    if linalg::hermiticity_defect(a) > 1e-9 {
        return Err(Error::InvalidInput("operator is not Hermitian".into()));
    }
    let other = total / dim_y;
    let scale = frobenius_norm(a);
    let mut generators = Vec::new();
    for i in 0..other {
        for j in 0..other {
            let mut g = Array2::from_elem((dim_y, dim_y), ZERO);
            for y in 0..dim_y {
                for yp in 0..dim_y {
                    g[[y, yp]] = match side {
                        Side::Second => a[[i * dim_y + y, j * dim_y + yp]],
                        Side::First => a[[y * other + i, yp * other + j]],
                    };
                }
            }
            if frobenius_norm(&g) > SPAN_TOL * scale.max(1.0) {
                generators.push(g);
            }
        }
    }
    let mut basis: Vec<CMat> = Vec::new();
    let eye = identity(dim_y);
    orthonormal_extend(&mut basis, &eye, 1.0);
    for g in &generators {
        orthonormal_extend(&mut basis, g, 1.0);
    }
    loop {
        let frozen = basis.clone();
        let mut grew = false;
        for p in &frozen {
            for q in &frozen {
                let prod = p.dot(q);
                grew |= orthonormal_extend(&mut basis, &prod, 1.0);
            }
        }
        if !grew {
            break;
        }
    }
    Ok(InducedAlgebra {
        dim_y,
        generators,
        basis,
    })
}

/// Max commutator norm over basis pairs below tolerance.
pub fn pairwise_commutation_check(alg_a: &InducedAlgebra, alg_b: &InducedAlgebra) -> bool {
    if alg_a.dim_y != alg_b.dim_y {
        return false;
    }
    for p in &alg_a.basis {
        for q in &alg_b.basis {
            let comm = &p.dot(q) - &q.dot(p);
            if frobenius_norm(&comm) > 1e-9 {
                return false;
            }
        }
    }
    true
}

/// Orthonormal basis of the center of the algebra spanned by `basis`
/// (elements commuting with every basis element), as Hermitian matrices.
fn center_basis(basis: &[CMat], dim_y: usize) -> Result<Vec<CMat>> {
    let n = basis.len();
    // x = sum_i c_i b_i is central iff c is in the null space of
    // K = sum_g M_g^dag M_g with M_g columns vec([b_i, g])
    let mut k = Array2::from_elem((n, n), ZERO);
    for g in basis {
        let mut m = Array2::from_elem((dim_y * dim_y, n), ZERO);
        for (i, b) in basis.iter().enumerate() {
            let comm = &b.dot(g) - &g.dot(b);
            for (r, v) in comm.iter().enumerate() {
                m[[r, i]] = *v;
            }
        }
        k = &k + &dagger(&m).dot(&m);
    }
    let coeffs = linalg::hermitian_null_basis(&k, 1e-9)?;
    let mut herm: Vec<CMat> = Vec::new();
    for col in coeffs.columns() {
        let mut x = Array2::from_elem((dim_y, dim_y), ZERO);
        for (i, b) in basis.iter().enumerate() {
            x = &x + &b.mapv(|v| v * col[i]);
        }
        let re = (&x + &dagger(&x)).mapv(|v| v * cr(0.5));
        let im = (&x - &dagger(&x)).mapv(|v| v * c(0.0, -0.5));
        orthonormal_extend(&mut herm, &re, 1.0);
        orthonormal_extend(&mut herm, &im, 1.0);
    }
    if herm.is_empty() {
        return Err(Error::Degenerate("center is empty (identity missing)".into()));
    }
    Ok(herm)
}

/// Group sorted eigenvalues into clusters separated by more than the
/// clustering tolerance; returns (start, len) per cluster.
fn cluster_eigenvalues(vals: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[i - 1] > tol {
            out.push((start, i - start));
            start = i;
        }
    }
    out
}

/// Random real Hermitian combination of a Hermitian operator basis.
fn generic_hermitian(basis: &[CMat], rng: &mut impl Rng) -> CMat {
    let mut g = Array2::from_elem(basis[0].dim(), ZERO);
    for b in basis {
        let r: f64 = rng.gen_range(0.0f64..1.0) - 0.5;
        g = &g + &b.mapv(|v| v * cr(r));
    }
    g
}

/// Factor one central block: the restricted algebra is a full matrix
/// algebra L(d1) (x) I_{d2}; reorder the block basis so it reads as such.
fn factor_block(
    v_block: &CMat,
    basis_a: &[CMat],
    rng: &mut impl Rng,
) -> Result<(CMat, usize, usize)> {
    let m = v_block.ncols();
    let vdag = dagger(v_block);
    // restricted algebra basis on the block
    let mut restricted: Vec<CMat> = Vec::new();
    for b in basis_a {
        let rb = vdag.dot(&b.dot(v_block));
        orthonormal_extend(&mut restricted, &rb, 1.0);
    }
    let da = restricted.len();
    let d1 = (da as f64).sqrt().round() as usize;
    if d1 * d1 != da || m % d1 != 0 {
        return Err(Error::Degenerate(format!(
            "block algebra dimension {da} is not a perfect square dividing {m}"
        )));
    }
    let d2 = m / d1;
    if d1 == 1 {
        return Ok((v_block.clone(), 1, d2));
    }
    // Hermitian spanning set of the restricted algebra
    let mut herm: Vec<CMat> = Vec::new();
    for r in &restricted {
        let re = (r + &dagger(r)).mapv(|v| v * cr(0.5));
        let im = (r - &dagger(r)).mapv(|v| v * c(0.0, -0.5));
        orthonormal_extend(&mut herm, &re, 1.0);
        orthonormal_extend(&mut herm, &im, 1.0);
    }
    for _attempt in 0..8 {
        let g = generic_hermitian(&herm, rng);
        let (vals, vecs) = linalg::eigh(&g)?;
        
        let spread = (vals[vals.len() - 1] - vals[0]).max(1.0);
        let clusters = cluster_eigenvalues(vals.as_slice().unwrap(), CLUSTER_TOL * spread);
        if clusters.len() != d1 || clusters.iter().any(|&(_, l)| l != d2) {
            continue;
        }
        // cluster k spans |k> (x) C^{d2}; align the hidden d2 bases by
        // polar-decomposing a generic element's (k, 0) slice
        let e_bases: Vec<CMat> = clusters
            .iter()
            .map(|&(s, l)| vecs.slice(ndarray::s![.., s..s + l]).to_owned())
            .collect();
        let mut f_bases: Vec<CMat> = vec![e_bases[0].clone()];
        let u = {
            let mut acc = Array2::from_elem((m, m), ZERO);
            for r in &restricted {
                let re: f64 = rng.gen_range(0.0f64..1.0) - 0.5;
                let im: f64 = rng.gen_range(0.0f64..1.0) - 0.5;
                acc = &acc + &r.mapv(|v| v * c(re, im));
            }
            acc
        };
        let mut ok = true;
        for k in 1..d1 {
            let slice = dagger(&e_bases[k]).dot(&u.dot(&e_bases[0]));
            let (uu, sv, vt) = linalg::svd_full(&slice)?;
            // slice must be proportional to a unitary
            if sv[sv.len() - 1] < 1e-6 * sv[0].max(1e-12) {
                ok = false;
                break;
            }
            let omega = uu
                .slice(ndarray::s![.., ..d2])
                .dot(&vt.slice(ndarray::s![..d2, ..]));
            f_bases.push(e_bases[k].dot(&omega));
        }
        if !ok {
            continue;
        }
        let mut w = Array2::from_elem((m, m), ZERO);
        for (k, f) in f_bases.iter().enumerate() {
            for mu in 0..d2 {
                for r in 0..m {
                    w[[r, k * d2 + mu]] = f[[r, mu]];
                }
            }
        }
        let iso = v_block.dot(&w);
        // verify every restricted A-element reads as x (x) I_{d2}
        let mut max_resid = 0.0f64;
        let isod = dagger(&iso);
        for b in basis_a {
            let blk = isod.dot(&b.dot(&iso));
            let x = ptrace_second(&blk, d1, d2).mapv(|v| v / cr(d2 as f64));
            let resid = frobenius_norm(&(&blk - &kron(&x, &identity(d2))));
            max_resid = max_resid.max(resid);
        }
        if max_resid < RESIDUAL_TOL {
            return Ok((iso, d1, d2));
        }
    }
    Err(Error::Degenerate(
        "block factorization did not converge (numerical degeneracy)".into(),
    ))
}

/// Partial trace over the second factor of a (d1*d2) x (d1*d2) matrix.
pub fn ptrace_second(m: &CMat, d1: usize, d2: usize) -> CMat {
    let mut out = Array2::from_elem((d1, d1), ZERO);
    for k in 0..d1 {
        for kp in 0..d1 {
            for mu in 0..d2 {
                out[[k, kp]] += m[[k * d2 + mu, kp * d2 + mu]];
            }
        }
    }
    out
}

/// Partial trace over the first factor of a (d1*d2) x (d1*d2) matrix.
pub fn ptrace_first(m: &CMat, d1: usize, d2: usize) -> CMat {
    let mut out = Array2::from_elem((d2, d2), ZERO);
    for mu in 0..d2 {
        for mup in 0..d2 {
            for k in 0..d1 {
                out[[mu, mup]] += m[[k * d2 + mu, k * d2 + mup]];
            }
        }
    }
    out
}

/// Decompose Y = (+)_i Y_i1 (x) Y_i2 decoupling A on X(x)Y from B on
/// Y(x)Z. `dims` = (dim X, dim Y, dim Z).
pub fn structure_decompose(
    a: &CMat,
    b: &CMat,
    dims: (usize, usize, usize),
) -> Result<AlgebraDecomposition> {
    let (dx, dy, dz) = dims;
    if a.nrows() != dx * dy || b.nrows() != dy * dz {
        return Err(Error::ShapeMismatch("operator dimensions disagree with (dx, dy, dz)".into()));
    }
    let a_full = kron(a, &identity(dz));
    let b_full = kron(&identity(dx), b);
    let comm = &a_full.dot(&b_full) - &b_full.dot(&a_full);
    if frobenius_norm(&comm) > 1e-9 * frobenius_norm(&a_full).max(1.0) * frobenius_norm(&b_full).max(1.0).max(1.0) {
        return Err(Error::InvalidInput("operators do not commute".into()));
    }
    let alg_a = induced_algebra(a, dy, Side::Second)?;
    let alg_b = induced_algebra(b, dy, Side::First)?;
    if !pairwise_commutation_check(&alg_a, &alg_b) {
        return Err(Error::InvalidInput("induced algebras do not commute".into()));
    }
    let center = center_basis(&alg_a.basis, dy)?;
    let mut rng = seeded_rng(0x5cab1e);
    for _attempt in 0..8 {
        let g = generic_hermitian(&center, &mut rng);
        let (vals, vecs) = linalg::eigh(&g)?;
        
        let spread = (vals[vals.len() - 1] - vals[0]).max(1.0);
        let clusters = cluster_eigenvalues(vals.as_slice().unwrap(), CLUSTER_TOL * spread);
        if clusters.len() != center.len() {
            // a generic element separates all central projections
            continue;
        }
        let mut blocks = Vec::new();
        let mut failed = false;
        for &(s, l) in &clusters {
            let v_block = vecs.slice(ndarray::s![.., s..s + l]).to_owned();
            match factor_block(&v_block, &alg_a.basis, &mut rng) {
                Ok((iso, d1, d2)) => blocks.push(AlgebraBlock { isometry: iso, d1, d2 }),
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            continue;
        }
        let dec = AlgebraDecomposition { dim_y: dy, blocks };
        if decomposition_residual(a, b, dims, &dec)? < RESIDUAL_TOL {
            return Ok(dec);
        }
    }
    Err(Error::Degenerate(
        "structure decomposition did not converge (numerical degeneracy)".into(),
    ))
}

/// Max over blocks of the deviation of conjugated A from (op)(x)I and of
/// conjugated B from I(x)(op) — the literal structure-lemma postcondition.
pub fn decomposition_residual(
    a: &CMat,
    b: &CMat,
    dims: (usize, usize, usize),
    dec: &AlgebraDecomposition,
) -> Result<f64> {
    let (dx, _dy, dz) = dims;
    let mut worst = 0.0f64;
    for blk in &dec.blocks {
        let (d1, d2) = (blk.d1, blk.d2);
        let wa = kron(&identity(dx), &blk.isometry);
        let blk_a = dagger(&wa).dot(&a.dot(&wa));
        let a_i = ptrace_second(&blk_a, dx * d1, d2).mapv(|v| v / cr(d2 as f64));
        worst = worst.max(frobenius_norm(&(&blk_a - &kron(&a_i, &identity(d2)))));
        let wb = kron(&blk.isometry, &identity(dz));
        let blk_b = dagger(&wb).dot(&b.dot(&wb));
        // reorder (k, mu, z): trace out k (outermost factor)
        let b_i = ptrace_first(&blk_b, d1, d2 * dz).mapv(|v| v / cr(d1 as f64));
        worst = worst.max(frobenius_norm(&(&blk_b - &kron(&identity(d1), &b_i))));
    }
    Ok(worst)
}

/// min over blocks of lambda_min(A on X(x)Y_i1) + lambda_min(B on
/// Y_i2(x)Z); equals the ground energy of A(x)I + I(x)B.
pub fn decoupled_ground_energy(
    a: &CMat,
    b: &CMat,
    dims: (usize, usize, usize),
    dec: &AlgebraDecomposition,
) -> Result<f64> {
    let (dx, _dy, dz) = dims;
    let mut best = f64::INFINITY;
    for blk in &dec.blocks {
        let (d1, d2) = (blk.d1, blk.d2);
        let wa = kron(&identity(dx), &blk.isometry);
        let blk_a = dagger(&wa).dot(&a.dot(&wa));
        let a_i = ptrace_second(&blk_a, dx * d1, d2).mapv(|v| v / cr(d2 as f64));
        let wb = kron(&blk.isometry, &identity(dz));
        let blk_b = dagger(&wb).dot(&b.dot(&wb));
        let b_i = ptrace_first(&blk_b, d1, d2 * dz).mapv(|v| v / cr(d1 as f64));
        let ea = linalg::eigvalsh(&a_i)?[0];
        let eb = linalg::eigvalsh(&b_i)?[0];
        best = best.min(ea + eb);
    }
    Ok(best)
}

/// Build a commuting pair with planted block structure: Y = (+)(d1, d2),
/// scrambled by a random unitary on Y. Returns (A, B).
pub fn planted_pair(
    dx: usize,
    dz: usize,
    blocks: &[(usize, usize)],
    seed: u64,
) -> Result<(CMat, CMat)> {
    let dy: usize = blocks.iter().map(|&(d1, d2)| d1 * d2).sum();
    if dy > MAX_DIM_Y {
        return Err(Error::InvalidInput("planted dim(Y) exceeds cap".into()));
    }
    let mut rng = seeded_rng(seed);
    let u = linalg::random_unitary(dy, &mut rng);
    let mut a = Array2::from_elem((dx * dy, dx * dy), ZERO);
    let mut b = Array2::from_elem((dy * dz, dy * dz), ZERO);
    let mut offset = 0;
    for &(d1, d2) in blocks {
        let m = d1 * d2;
        let w = u.slice(ndarray::s![.., offset..offset + m]).to_owned();
        let a_fac = linalg::random_hermitian(dx * d1, &mut rng);
        let wa = kron(&identity(dx), &w);
        a = &a + &wa.dot(&kron(&a_fac, &identity(d2)).dot(&dagger(&wa)));
        let b_fac = linalg::random_hermitian(d2 * dz, &mut rng);
        let wb = kron(&w, &identity(dz));
        b = &b + &wb.dot(&kron(&identity(d1), &b_fac).dot(&dagger(&wb)));
        offset += m;
    }
    Ok((a, b))
}
