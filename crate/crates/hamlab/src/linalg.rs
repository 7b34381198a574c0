//! Dense complex linear algebra helpers shared by every module.
//!
//! Everything is `Complex64` ndarray matrices. Hermitian eigendecompositions
//! go through LAPACK; a real-symmetric fast path is used when a matrix has
//! no imaginary part (common: Ising/TFIM/AKLT/clock/gadget matrices are all
//! real), which is several times faster at large dimensions.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMat {
    Array2::from_diag(&Array1::from_elem(dim, ONE))
}

pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

/// Max absolute entry of `m - m†`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let (r, c_) = m.dim();
    if r != c_ {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            let d = (m[[i, j]] - m[[j, i]].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    hermiticity_defect(m) < tol
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), ZERO);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            let mut block = out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
            block.assign(&b.mapv(|x| x * aij));
        }
    }
    out
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm of a Hermitian matrix (max |eigenvalue|).
pub fn hermitian_norm(m: &CMat) -> Result<f64> {
    let vals = eigvalsh(m)?;
    Ok(vals.iter().fold(0.0f64, |a, &v| a.max(v.abs())))
}

fn max_imag(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.im.abs()))
}

/// Hermitian eigendecomposition: ascending eigenvalues plus eigenvector
/// columns. Real-symmetric inputs are routed to the real LAPACK driver.
pub fn eigh(m: &CMat) -> Result<(Array1<f64>, CMat)> {
    if max_imag(m) < 1e-14 {
        let re: Array2<f64> = m.mapv(|z| z.re);
        let (vals, vecs) = re.eigh(UPLO::Lower)?;
        Ok((vals, vecs.mapv(|x| cr(x))))
    } else {
        let (vals, vecs) = m.eigh(UPLO::Lower)?;
        // The complex LAPACK path diagonalizes the transpose (= conjugate)
        // of a Hermitian input, so the returned eigenvectors can come back
        // conjugated. Pick whichever orientation satisfies M V = V diag
        // with the smaller total residual.
        let residual = |v: &CMat| -> f64 {
            let mv = m.dot(v);
            let mut r = 0.0;
            for (k, col) in mv.columns().into_iter().enumerate() {
                for (i, z) in col.iter().enumerate() {
                    r += (z - v[[i, k]] * cr(vals[k])).norm_sqr();
                }
            }
            r
        };
        let conj = vecs.mapv(|z| z.conj());
        if residual(&conj) < residual(&vecs) {
            Ok((vals, conj))
        } else {
            Ok((vals, vecs))
        }
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMat) -> Result<Array1<f64>> {
    // `eigh` rather than `eigvalsh`: with this LAPACK build the
    // divide-and-conquer driver behind `eigh` is the faster of the two.
    Ok(eigh(m)?.0)
}

/// f(M) for Hermitian M, evaluated through the eigendecomposition.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> C64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    let dim = vals.len();
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.columns_mut().into_iter().enumerate() {
        let fv = f(vals[k]);
        col.mapv_inplace(|z| z * fv);
    }
    let vdag = dagger(&vecs);
    let mut out = Array2::from_elem((dim, dim), ZERO);
    ndarray::linalg::general_mat_mul(ONE, &scaled, &vdag, ZERO, &mut out);
    Ok(out)
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a.dot(b)
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Result<Array1<f64>> {
    let (_, s, _) = m.svd(false, false)?;
    Ok(s)
}

/// Full SVD: (U, s, V†).
pub fn svd_full(m: &CMat) -> Result<(CMat, Array1<f64>, CMat)> {
    let (u, s, vt) = m.svd(true, true)?;
    Ok((u.unwrap(), s, vt.unwrap()))
}

/// Numerical rank by singular-value threshold relative to the largest value.
pub fn rank(m: &CMat, rel_tol: f64) -> Result<usize> {
    let s = singular_values(m)?;
    let top = s.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * top).count())
}

/// Orthonormal basis (columns) for the null space of a Hermitian PSD-ish
/// matrix, i.e. eigenvectors with |eigenvalue| < tol.
pub fn hermitian_null_basis(m: &CMat, tol: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    let idx: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].abs() < tol).collect();
    let dim = vecs.nrows();
    let mut out = Array2::from_elem((dim, idx.len()), ZERO);
    for (col, &k) in idx.iter().enumerate() {
        out.column_mut(col).assign(&vecs.column(k));
    }
    Ok(out)
}

/// Projector onto the column span of an isometry (columns orthonormal).
pub fn projector_from_isometry(v: &CMat) -> CMat {
    v.dot(&dagger(v))
}

/// Modified Gram–Schmidt with a second orthogonalization pass; columns with
/// residual norm below `tol` (relative to their input norm, or absolutely if
/// the input is tiny) are dropped. Returns the orthonormal columns kept.
pub fn orthonormal_columns(cols: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in cols {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let overlap: C64 = b.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
                w = &w - &b.mapv(|z| z * overlap);
            }
        }
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > tol {
            basis.push(w.mapv(|z| z / cr(nrm)));
        }
    }
    basis
}

pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &CVec) -> Result<CVec> {
    let n = norm(v);
    if n < 1e-300 {
        return Err(Error::Degenerate("cannot normalize a zero vector".into()));
    }
    Ok(v.mapv(|z| z / cr(n)))
}

/// Matrix inverse (general complex).
pub fn inverse(m: &CMat) -> Result<CMat> {
    use ndarray_linalg::Inverse;
    Ok(m.inv()?)
}

/// Seeded standard-normal complex matrix.
pub fn random_cmat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    Array2::from_shape_fn((rows, cols), |_| {
        c(gauss(rng), gauss(rng))
    })
}

/// Seeded random Hermitian matrix with O(1) entries.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_cmat(dim, dim, rng);
    let h = &g + &dagger(&g);
    h.mapv(|z| z * cr(0.5))
}

/// Haar-ish random unitary: QR of a complex Gaussian with phase fixing.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = random_cmat(dim, dim, rng);
    let cols: Vec<CVec> = (0..dim).map(|j| g.column(j).to_owned()).collect();
    let basis = orthonormal_columns(&cols, 1e-12);
    assert_eq!(basis.len(), dim, "random matrix was numerically singular");
    let mut u = Array2::from_elem((dim, dim), ZERO);
    for (j, b) in basis.iter().enumerate() {
        u.column_mut(j).assign(b);
    }
    u
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; good enough here and keeps the rand_distr dependency out.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
