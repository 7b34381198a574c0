//! Matrix product states.
//!
//! |psi> = sum_j A_1^{j_1} A_2^{j_2} ... A_n^{j_n} |j_1 ... j_n> with site
//! tensors of shape (D_{i-1}, d, D_i), boundary bond dims 1, site 0 most
//! significant in the dense index (matches the basis convention everywhere
//! else in this crate). Left-canonical site: sum_j A^{j dagger} A^j = I over
//! the right bond.

use ndarray::{s, Array1, Array2, Array3};

use crate::error::{Error, Result};
use crate::ham::LocalHamiltonian;
use crate::linalg::{self, cr, CMat, CVec, C64, ONE, ZERO};

/// Schmidt coefficients below this (on a normalized state) are treated as
/// exact zeros when sizing bonds.
const SCHMIDT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    None,
    Left,
    Right,
    Mixed(usize),
}

#[derive(Debug, Clone)]
pub struct Mps {
    pub n: usize,
    pub d: usize,
    /// Site tensors A_i of shape (D_{i-1}, d, D_i); D_0 = D_n = 1.
    pub tensors: Vec<Array3<C64>>,
    pub canonical: Canonical,
}

/// Thin SVD: U is m x k, s length k, Vt is k x n with k = min(m, n).
fn thin_svd(m: &CMat) -> Result<(CMat, Array1<f64>, CMat)> {
    let (u, sv, vt) = linalg::svd_full(m)?;
    let k = sv.len();
    Ok((
        u.slice(s![.., ..k]).to_owned(),
        sv,
        vt.slice(s![..k, ..]).to_owned(),
    ))
}

fn site_matrix(a: &Array3<C64>, j: usize) -> CMat {
    let (dl, _, dr) = a.dim();
    let mut m = Array2::from_elem((dl, dr), ZERO);
    for x in 0..dl {
        for y in 0..dr {
            m[[x, y]] = a[[x, j, y]];
        }
    }
    m
}

impl Mps {
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.tensors.iter().map(|t| t.dim().0).collect();
        out.push(1);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.tensors.len() != self.n {
            return Err(Error::ShapeMismatch("tensor count != n".into()));
        }
        let mut prev = 1usize;
        for (i, t) in self.tensors.iter().enumerate() {
            let (dl, d, dr) = t.dim();
            if dl != prev || d != self.d {
                return Err(Error::ShapeMismatch(format!("site {i} shape mismatch")));
            }
            if i == self.n - 1 && dr != 1 {
                return Err(Error::ShapeMismatch("last bond dim != 1".into()));
            }
            prev = dr;
        }
        Ok(())
    }

    /// Dense reconstruction (site 0 most significant).
    pub fn to_state(&self) -> Result<CVec> {
        self.validate()?;
        // partial[p, a] over assigned physical prefix p and current bond a
        let mut partial = Array2::from_elem((1, 1), ONE);
        for t in &self.tensors {
            let (dl, d, dr) = t.dim();
            let p = partial.nrows();
            let mut next = Array2::from_elem((p * d, dr), ZERO);
            for row in 0..p {
                for j in 0..d {
                    for b in 0..dr {
                        let mut acc = ZERO;
                        for a in 0..dl {
                            acc += partial[[row, a]] * t[[a, j, b]];
                        }
                        next[[row * d + j, b]] = acc;
                    }
                }
            }
            partial = next;
        }
        Ok(partial.column(0).to_owned())
    }

    /// Bring sites left of `center` to left-canonical and sites right of it
    /// to right-canonical form; the state (including norm) is preserved.
    pub fn canonicalize(&mut self, center: usize) -> Result<()> {
        self.validate()?;
        if center >= self.n {
            return Err(Error::InvalidInput("center out of range".into()));
        }
        for i in 0..center {
            self.left_normalize_site(i)?;
        }
        for i in (center + 1..self.n).rev() {
            self.right_normalize_site(i)?;
        }
        self.canonical = Canonical::Mixed(center);
        Ok(())
    }

    /// QR-like step via SVD: A_i = Q R with Q left-orthonormal; R is
    /// absorbed into site i+1.
    pub fn left_normalize_site(&mut self, i: usize) -> Result<()> {
        let (dl, d, dr) = self.tensors[i].dim();
        let m = Array2::from_shape_vec((dl * d, dr), self.tensors[i].iter().cloned().collect())
            .expect("reshape");
        let (u, sv, vt) = thin_svd(&m)?;
        let k = sv.len();
        self.tensors[i] =
            Array3::from_shape_vec((dl, d, k), u.iter().cloned().collect()).expect("reshape");
        let mut r = Array2::from_elem((k, dr), ZERO);
        for a in 0..k {
            for b in 0..dr {
                r[[a, b]] = cr(sv[a]) * vt[[a, b]];
            }
        }
        if i + 1 < self.n {
            let (_, d2, dr2) = self.tensors[i + 1].dim();
            let nxt = Array2::from_shape_vec(
                (dr, d2 * dr2),
                self.tensors[i + 1].iter().cloned().collect(),
            )
            .expect("reshape");
            let merged = r.dot(&nxt);
            self.tensors[i + 1] =
                Array3::from_shape_vec((k, d2, dr2), merged.iter().cloned().collect())
                    .expect("reshape");
        } else {
            // boundary: R is 1x1 (norm * phase); keep it in the last tensor
            self.tensors[i] = self.tensors[i].mapv(|z| z * r[[0, 0]]);
        }
        Ok(())
    }

    /// Mirror step: A_i = L B with B right-orthonormal; L absorbed into
    /// site i-1.
    pub fn right_normalize_site(&mut self, i: usize) -> Result<()> {
        let (dl, d, dr) = self.tensors[i].dim();
        let m = Array2::from_shape_vec((dl, d * dr), self.tensors[i].iter().cloned().collect())
            .expect("reshape");
        let (u, sv, vt) = thin_svd(&m)?;
        let k = sv.len();
        self.tensors[i] =
            Array3::from_shape_vec((k, d, dr), vt.iter().cloned().collect()).expect("reshape");
        let mut l = Array2::from_elem((dl, k), ZERO);
        for a in 0..dl {
            for b in 0..k {
                l[[a, b]] = u[[a, b]] * cr(sv[b]);
            }
        }
        if i > 0 {
            let (dl0, d0, _) = self.tensors[i - 1].dim();
            let prv = Array2::from_shape_vec(
                (dl0 * d0, dl),
                self.tensors[i - 1].iter().cloned().collect(),
            )
            .expect("reshape");
            let merged = prv.dot(&l);
            self.tensors[i - 1] =
                Array3::from_shape_vec((dl0, d0, k), merged.iter().cloned().collect())
                    .expect("reshape");
        } else {
            self.tensors[i] = self.tensors[i].mapv(|z| z * l[[0, 0]]);
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let tensors: Vec<serde_json::Value> = self
            .tensors
            .iter()
            .map(|t| {
                let re: Vec<f64> = t.iter().map(|z| z.re).collect();
                let im: Vec<f64> = t.iter().map(|z| z.im).collect();
                serde_json::json!({ "re": re, "im": im })
            })
            .collect();
        serde_json::json!({
            "n": self.n,
            "d": self.d,
            "bond_dims": self.bond_dims(),
            "tensors": tensors,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Mps> {
        let n = v["n"].as_u64().ok_or_else(|| Error::Serde("missing n".into()))? as usize;
        let d = v["d"].as_u64().ok_or_else(|| Error::Serde("missing d".into()))? as usize;
        let bonds: Vec<usize> = serde_json::from_value(v["bond_dims"].clone())?;
        if bonds.len() != n + 1 || bonds[0] != 1 || bonds[n] != 1 {
            return Err(Error::Serde("bad bond_dims".into()));
        }
        let arr = v["tensors"]
            .as_array()
            .ok_or_else(|| Error::Serde("missing tensors".into()))?;
        if arr.len() != n {
            return Err(Error::Serde("tensor count != n".into()));
        }
        let mut tensors = Vec::with_capacity(n);
        for (i, tv) in arr.iter().enumerate() {
            let re: Vec<f64> = serde_json::from_value(tv["re"].clone())?;
            let im: Vec<f64> = serde_json::from_value(tv["im"].clone())?;
            if re.len() != im.len() || re.len() != bonds[i] * d * bonds[i + 1] {
                return Err(Error::Serde(format!("site {i} data length mismatch")));
            }
            let data: Vec<C64> = re
                .iter()
                .zip(im.iter())
                .map(|(&r, &m)| C64::new(r, m))
                .collect();
            tensors.push(
                Array3::from_shape_vec((bonds[i], d, bonds[i + 1]), data).expect("reshape"),
            );
        }
        let mps = Mps {
            n,
            d,
            tensors,
            canonical: Canonical::None,
        };
        mps.validate()?;
        Ok(mps)
    }
}

/// Successive Schmidt decompositions left to right. Exact when Dmax is at
/// least the maximal Schmidt rank; otherwise the largest coefficients are
/// kept and the state is renormalized at each cut. The result is
/// left-canonical.
pub fn mps_from_state(psi: &CVec, d: usize, dmax: usize) -> Result<Mps> {
    if dmax < 1 {
        return Err(Error::InvalidInput("Dmax must be >= 1".into()));
    }
    if d < 2 {
        return Err(Error::InvalidInput("physical dimension must be >= 2".into()));
    }
    let dim = psi.len();
    let mut n = 0usize;
    let mut acc = 1usize;
    while acc < dim {
        acc *= d;
        n += 1;
    }
    if acc != dim || n == 0 {
        return Err(Error::ShapeMismatch(format!(
            "state length {dim} is not a positive power of d = {d}"
        )));
    }
    if (linalg::norm(psi) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("state must be normalized".into()));
    }

    let mut tensors = Vec::with_capacity(n);
    // carry: (D_{i-1}, d^{n-i}) matrix of remaining amplitudes
    let mut carry =
        Array2::from_shape_vec((1, dim), psi.iter().cloned().collect()).expect("reshape");
    for i in 0..n - 1 {
        let dl = carry.nrows();
        let rest = carry.ncols() / d;
        let m = Array2::from_shape_vec((dl * d, rest), carry.iter().cloned().collect())
            .expect("reshape");
        let (u, sv, vt) = thin_svd(&m)?;
        let keep = sv
            .iter()
            .filter(|&&x| x > SCHMIDT_TOL)
            .count()
            .clamp(1, dmax);
        let weight: f64 = sv.iter().take(keep).map(|x| x * x).sum::<f64>().sqrt();
        let a = u.slice(s![.., ..keep]).to_owned();
        tensors.push(
            Array3::from_shape_vec((dl, d, keep), a.iter().cloned().collect()).expect("reshape"),
        );
        let mut next = Array2::from_elem((keep, rest), ZERO);
        for r in 0..keep {
            for c in 0..rest {
                next[[r, c]] = cr(sv[r] / weight) * vt[[r, c]];
            }
        }
        carry = next;
        let _ = i;
    }
    let dl = carry.nrows();
    tensors.push(
        Array3::from_shape_vec((dl, d, 1), carry.iter().cloned().collect()).expect("reshape"),
    );
    Ok(Mps {
        n,
        d,
        tensors,
        canonical: Canonical::Left,
    })
}

/// <a|b> by left-to-right transfer contraction, O(n d D^3).
pub fn mps_inner(a: &Mps, b: &Mps) -> Result<C64> {
    if a.n != b.n || a.d != b.d {
        return Err(Error::ShapeMismatch("MPS shapes differ".into()));
    }
    a.validate()?;
    b.validate()?;
    // env[x, y]: bra bond x, ket bond y
    let mut env = Array2::from_elem((1, 1), ONE);
    for (ta, tb) in a.tensors.iter().zip(b.tensors.iter()) {
        let (_, d, dra) = ta.dim();
        let drb = tb.dim().2;
        let mut next = Array2::from_elem((dra, drb), ZERO);
        for j in 0..d {
            let ma = site_matrix(ta, j).mapv(|z| z.conj());
            let mb = site_matrix(tb, j);
            next = next + ma.t().dot(&env).dot(&mb);
        }
        env = next;
    }
    Ok(env[[0, 0]])
}

/// Window operator over sites [first, first + w) with the term embedded and
/// identity on the window's non-support sites.
fn window_operator(term_support: &[usize], term_matrix: &CMat, first: usize, w: usize, d: usize) -> CMat {
    let wdim = d.pow(w as u32);
    let sup_dim = term_matrix.nrows();
    // strides of support sites within the window index
    let strides: Vec<usize> = term_support
        .iter()
        .map(|&s| d.pow((w - 1 - (s - first)) as u32))
        .collect();
    let mut op = Array2::from_elem((wdim, wdim), ZERO);
    // rest = window index with support digits zeroed
    let mut rest_indices = Vec::new();
    {
        let mut idx = 0usize;
        'fill: loop {
            // check support digits are zero
            let mut ok = true;
            for (si, &s) in term_support.iter().enumerate() {
                let pos = s - first;
                let digit = idx / d.pow((w - 1 - pos) as u32) % d;
                if digit != 0 {
                    ok = false;
                }
                let _ = si;
            }
            if ok {
                rest_indices.push(idx);
            }
            idx += 1;
            if idx == wdim {
                break 'fill;
            }
        }
    }
    let sup_offset = |mut k: usize| -> usize {
        let mut off = 0usize;
        for (si, &_s) in term_support.iter().enumerate().rev() {
            let dim_s = d; // uniform physical dimension in MPS context
            off += (k % dim_s) * strides[si];
            k /= dim_s;
        }
        off
    };
    let offsets: Vec<usize> = (0..sup_dim).map(sup_offset).collect();
    for &rest in &rest_indices {
        for r in 0..sup_dim {
            for c in 0..sup_dim {
                op[[rest + offsets[r], rest + offsets[c]]] = term_matrix[[r, c]];
            }
        }
    }
    op
}

/// <psi|H|psi> / <psi|psi> term by term with cached left/right transfer
/// environments. Each term is embedded into the contiguous window spanning
/// its support.
pub fn mps_expectation(a: &Mps, h: &LocalHamiltonian) -> Result<f64> {
    a.validate()?;
    if h.n != a.n || h.dims.iter().any(|&x| x != a.d) {
        return Err(Error::ShapeMismatch("Hamiltonian does not match MPS".into()));
    }
    let n = a.n;
    let d = a.d;
    // plain transfer environments: left[i] covers sites < i, right[i] covers
    // sites >= i
    let mut left = vec![Array2::from_elem((1, 1), ONE)];
    for t in &a.tensors {
        let (_, _, dr) = t.dim();
        let env = left.last().unwrap();
        let mut next = Array2::from_elem((dr, dr), ZERO);
        for j in 0..d {
            let m = site_matrix(t, j);
            next = next + m.mapv(|z| z.conj()).t().dot(env).dot(&m);
        }
        left.push(next);
    }
    let mut right = vec![Array2::from_elem((1, 1), ONE); n + 1];
    for i in (0..n).rev() {
        let t = &a.tensors[i];
        let mut next = Array2::from_elem((t.dim().0, t.dim().0), ZERO);
        for j in 0..d {
            let m = site_matrix(t, j);
            next = next + m.mapv(|z| z.conj()).dot(&right[i + 1]).dot(&m.t());
        }
        right[i] = next;
    }
    let norm_sq = left[n][[0, 0]].re;
    if norm_sq <= 0.0 {
        return Err(Error::InvalidInput("zero-norm MPS".into()));
    }

    let mut energy = ZERO;
    for term in &h.terms {
        let first = term.support[0];
        let last = *term.support.last().unwrap();
        let w = last - first + 1;
        let op = window_operator(&term.support, &term.matrix, first, w, d);
        let wdim = op.nrows();
        // bra/ket window products per physical multi-index
        let window_product = |jmulti: usize| -> CMat {
            let mut k = jmulti;
            let mut digits = vec![0usize; w];
            for p in (0..w).rev() {
                digits[p] = k % d;
                k /= d;
            }
            let mut m = site_matrix(&a.tensors[first], digits[0]);
            for (p, &dg) in digits.iter().enumerate().skip(1) {
                m = m.dot(&site_matrix(&a.tensors[first + p], dg));
            }
            m
        };
        let products: Vec<CMat> = (0..wdim).map(window_product).collect();
        let mut val = ZERO;
        for jr in 0..wdim {
            for jc in 0..wdim {
                let coeff = op[[jr, jc]];
                if coeff == ZERO {
                    continue;
                }
                let bra = products[jr].mapv(|z| z.conj());
                // sum_{a,b,a',b'} L[a,b] bra[a,a'] ket[b,b'] R[a',b']
                let e = bra.t().dot(&left[first]).dot(&products[jc]);
                let mut s = ZERO;
                for x in 0..e.nrows() {
                    for y in 0..e.ncols() {
                        s += e[[x, y]] * right[last + 1][[x, y]];
                    }
                }
                val += coeff * s;
            }
        }
        energy += val;
    }
    Ok(energy.re / norm_sq)
}
