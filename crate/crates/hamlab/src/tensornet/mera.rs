//! Binary 1D MERA on a periodic ring of n = 2^L sites.
//!
//! Each layer coarse-grains M sites to M/2: disentanglers U_i (d^2 x d^2,
//! unitary) act on the offset pairs (1,2),(3,4),...,(M-1,0); isometries V_s
//! (d x d^2, V V† = I) then merge the aligned pairs (2s,2s+1). The encoded
//! state is generated downward from |0> on the single top site by applying
//! the adjoints layer by layer. Reduced densities are computed by ascending
//! a site operator through its causal cone — a contiguous (mod M) window
//! that never exceeds 4 sites — touching only O(log n) tensors.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::ham::apply_embedded;
use crate::linalg::{self, dagger, frobenius_norm, identity, CMat, CVec, C64, ONE, ZERO};
use crate::spectra::DensityMatrix;

#[derive(Debug, Clone)]
pub struct MeraLayer {
    /// U_i on input pair (2i+1, (2i+2) mod M); M/2 of them, d^2 x d^2.
    pub disentanglers: Vec<CMat>,
    /// V_s merging input pair (2s, 2s+1) into output site s; M/2, d x d^2.
    pub isometries: Vec<CMat>,
}

#[derive(Debug, Clone)]
pub struct MeraNetwork {
    pub n: usize,
    pub d: usize,
    /// layers[0] acts on the n physical sites; each layer halves the count.
    pub layers: Vec<MeraLayer>,
}

impl MeraNetwork {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(Error::InvalidInput("n must be a power of two >= 2".into()));
        }
        let d = self.d;
        let levels = self.n.trailing_zeros() as usize;
        if self.layers.len() != levels {
            return Err(Error::ShapeMismatch(format!(
                "expected {levels} layers, got {}",
                self.layers.len()
            )));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let m = self.n >> l;
            if layer.disentanglers.len() != m / 2 || layer.isometries.len() != m / 2 {
                return Err(Error::ShapeMismatch(format!("layer {l} tensor counts")));
            }
            for u in &layer.disentanglers {
                if u.dim() != (d * d, d * d) {
                    return Err(Error::ShapeMismatch("disentangler shape".into()));
                }
                let defect = frobenius_norm(&(&dagger(u).dot(u) - &identity(d * d)));
                if defect > 1e-10 {
                    return Err(Error::InvalidInput(format!(
                        "disentangler not unitary (defect {defect:.2e})"
                    )));
                }
            }
            for v in &layer.isometries {
                if v.dim() != (d, d * d) {
                    return Err(Error::ShapeMismatch("isometry shape".into()));
                }
                let defect = frobenius_norm(&(&v.dot(&dagger(v)) - &identity(d)));
                if defect > 1e-10 {
                    return Err(Error::InvalidInput(format!(
                        "isometry violates V V† = I (defect {defect:.2e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dense reconstruction by downward generation from |0> (oracle-scale
    /// only).
    pub fn to_state(&self) -> Result<CVec> {
        self.validate()?;
        let d = self.d;
        let mut psi = Array1::from_elem(d, ZERO);
        psi[0] = ONE;
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let m_out = self.n >> (l + 1); // sites before expanding this layer
            let m = m_out * 2;
            // isometry adjoints: site s -> pair (2s, 2s+1)
            for s in 0..m_out {
                let pre = d.pow(2 * s as u32);
                let post = d.pow((m_out - s - 1) as u32);
                let vdag = dagger(&layer.isometries[s]);
                let mut next = Array1::from_elem(pre * d * d * post, ZERO);
                for p in 0..pre {
                    for k in 0..d {
                        for q in 0..post {
                            let amp = psi[(p * d + k) * post + q];
                            if amp == ZERO {
                                continue;
                            }
                            for jj in 0..d * d {
                                next[(p * d * d + jj) * post + q] += vdag[[jj, k]] * amp;
                            }
                        }
                    }
                }
                psi = next;
            }
            // disentangler adjoints on pairs (2i+1, (2i+2) mod m)
            let dims = vec![d; m];
            for i in 0..m / 2 {
                let x = 2 * i + 1;
                let y = (2 * i + 2) % m;
                let udag = dagger(&layer.disentanglers[i]);
                let (support, op) = if y == x + 1 {
                    (vec![x, y], udag)
                } else {
                    // wrap pair: operator reordered for ascending support (y, x)
                    (vec![y, x], swap_two_site(&udag, d))
                };
                let mut out = Array1::from_elem(psi.len(), ZERO);
                apply_embedded(&dims, &support, &op, &psi, &mut out);
                psi = out;
            }
        }
        Ok(psi)
    }
}

/// Reorder a two-site operator's factors: out[(b a),(b' a')] = op[(a b),(a' b')].
fn swap_two_site(op: &CMat, d: usize) -> CMat {
    Array2::from_shape_fn((d * d, d * d), |(r, c)| {
        let (b, a) = (r / d, r % d);
        let (bp, ap) = (c / d, c % d);
        op[[a * d + b, ap * d + bp]]
    })
}

/// Embed a two-site operator acting on relative sites r and (r+1) mod w of
/// a w-site window (handles the wrap case r = w-1).
fn embed_two_site(op: &CMat, w: usize, r: usize, d: usize) -> CMat {
    let dim = d.pow(w as u32);
    let r2 = (r + 1) % w;
    let digit = |idx: usize, pos: usize| idx / d.pow((w - 1 - pos) as u32) % d;
    Array2::from_shape_fn((dim, dim), |(row, col)| {
        for p in 0..w {
            if p != r && p != r2 && digit(row, p) != digit(col, p) {
                return ZERO;
            }
        }
        op[[
            digit(row, r) * d + digit(row, r2),
            digit(col, r) * d + digit(col, r2),
        ]]
    })
}

/// Pad a window operator with identity: the old w-site window sits at
/// relative offset `off` inside the new `w_new`-site window.
fn embed_window(op: &CMat, w_old: usize, off: usize, w_new: usize, d: usize) -> CMat {
    let dim = d.pow(w_new as u32);
    let digit = |idx: usize, pos: usize| idx / d.pow((w_new - 1 - pos) as u32) % d;
    let sub = |idx: usize| -> usize {
        let mut s = 0;
        for p in 0..w_old {
            s = s * d + digit(idx, off + p);
        }
        s
    };
    debug_assert!(off + w_old <= w_new);
    Array2::from_shape_fn((dim, dim), |(row, col)| {
        for p in 0..w_new {
            if (p < off || p >= off + w_old) && digit(row, p) != digit(col, p) {
                return ZERO;
            }
        }
        op[[sub(row), sub(col)]]
    })
}

/// Cyclically shift a window operator one site: relative position q + 1 of
/// the result holds what relative position q held (mod w). Used when a
/// full-ring window re-anchors one site to the left.
fn rotate_window_left_anchor(op: &CMat, w: usize, d: usize) -> CMat {
    let dim = d.pow(w as u32);
    let digit = |idx: usize, pos: usize| idx / d.pow((w - 1 - pos) as u32) % d;
    let remap = |idx: usize| -> usize {
        let mut digits = vec![0usize; w];
        for q in 0..w {
            digits[(q + 1) % w] = digit(idx, q);
        }
        digits.iter().fold(0, |acc, &g| acc * d + g)
    };
    let mut out = Array2::from_elem((dim, dim), ZERO);
    for row in 0..dim {
        for col in 0..dim {
            out[[remap(row), remap(col)]] = op[[row, col]];
        }
    }
    out
}

/// Ascend a single-site operator through the causal cone; returns the
/// top-level expectation <0|O_top|0> and the number of tensors touched.
///
/// The window (pos, w) is a contiguous mod-M arc. Before the disentangler
/// stage it is grown (by at most one site per side) until it starts on an
/// odd site and ends on an even one, so every disentangler pair it meets
/// lies fully inside; disentanglers acting entirely on the identity-padded
/// fringe conjugate to a no-op. The isometry stage then re-anchors one site
/// left to an even start, pads the right edge, and halves the window.
fn ascend(net: &MeraNetwork, site: usize, op0: &CMat) -> (C64, usize) {
    let d = net.d;
    let mut op = op0.clone();
    let mut pos = site;
    let mut w = 1usize;
    let mut touched = 0usize;
    for (l, layer) in net.layers.iter().enumerate() {
        let m = net.n >> l;
        // --- disentangler stage: align window to pair boundaries ---
        if w == m {
            if pos % 2 == 0 {
                op = rotate_window_left_anchor(&op, m, d);
                pos = (pos + m - 1) % m;
            }
        } else {
            let mut new_pos = pos;
            let mut new_w = w;
            if new_pos % 2 == 0 {
                new_pos = (new_pos + m - 1) % m;
                new_w += 1;
            }
            if (new_pos + new_w - 1) % 2 == 1 {
                new_w += 1;
            }
            debug_assert!(new_w <= m);
            op = embed_window(&op, w, (pos + m - new_pos) % m, new_w, d);
            pos = new_pos;
            w = new_w;
        }
        // conjugate by every pair inside the window (relative (r, r+1),
        // r even; absolute odd start => these are exactly the U pairs)
        for r in (0..w).step_by(2) {
            let x = (pos + r) % m; // odd
            let i = (x - 1) / 2;
            let u_emb = embed_two_site(&layer.disentanglers[i], w, r, d);
            op = u_emb.dot(&op).dot(&dagger(&u_emb));
            touched += 1;
        }
        // --- isometry stage: shift to even alignment, then contract pairs ---
        if w == m {
            op = rotate_window_left_anchor(&op, m, d);
            pos = (pos + m - 1) % m;
        } else {
            let p2 = (pos + m - 1) % m; // even
            let w2 = w + 2;
            debug_assert!(w2 <= m);
            op = embed_window(&op, w, 1, w2, d);
            pos = p2;
            w = w2;
        }
        let mut vprod = Array2::from_elem((1, 1), ONE);
        for t in 0..w / 2 {
            let s = ((pos + 2 * t) % m) / 2;
            vprod = linalg::kron(&vprod, &layer.isometries[s]);
            touched += 1;
        }
        op = vprod.dot(&op).dot(&dagger(&vprod));
        pos /= 2;
        w /= 2;
    }
    debug_assert_eq!(w, 1);
    (op[[0, 0]], touched)
}

/// Reduced density on one site via causal-cone ascension; also reports how
/// many network tensors the contraction touched.
pub fn mera_causal_rdm(net: &MeraNetwork, site: usize) -> Result<(DensityMatrix, usize)> {
    net.validate()?;
    if site >= net.n {
        return Err(Error::InvalidInput("site out of range".into()));
    }
    let d = net.d;
    let mut rho = Array2::from_elem((d, d), ZERO);
    let mut touched = 0usize;
    for a in 0..d {
        for b in 0..d {
            // rho[a,b] = <psi| |b><a| |psi>
            let mut e = Array2::from_elem((d, d), ZERO);
            e[[b, a]] = ONE;
            let (val, count) = ascend(net, site, &e);
            rho[[a, b]] = val;
            touched = count; // identical for every basis operator
        }
    }
    Ok((DensityMatrix::new(rho, vec![d])?, touched))
}

/// Tr[rho_site obs] for a Hermitian single-site observable.
pub fn mera_local_expectation(net: &MeraNetwork, obs: &CMat, site: usize) -> Result<f64> {
    if obs.dim() != (net.d, net.d) {
        return Err(Error::ShapeMismatch("observable must be d x d".into()));
    }
    if !linalg::is_hermitian(obs, 1e-10) {
        return Err(Error::InvalidInput("observable must be Hermitian".into()));
    }
    let (rho, _) = mera_causal_rdm(net, site)?;
    let d = net.d;
    let mut tr = ZERO;
    for a in 0..d {
        for b in 0..d {
            tr += rho.matrix[[a, b]] * obs[[b, a]];
        }
    }
    Ok(tr.re)
}

/// Haar-ish random MERA: random unitary disentanglers; isometries are the
/// first d rows of random d^2 x d^2 unitaries.
pub fn mera_build_random(n: usize, d: usize, seed: u64) -> Result<MeraNetwork> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidInput("n must be a power of two >= 2".into()));
    }
    if d < 2 {
        return Err(Error::InvalidInput("d must be >= 2".into()));
    }
    let mut rng = linalg::seeded_rng(seed);
    let levels = n.trailing_zeros() as usize;
    let mut layers = Vec::with_capacity(levels);
    for l in 0..levels {
        let m = n >> l;
        let disentanglers = (0..m / 2)
            .map(|_| linalg::random_unitary(d * d, &mut rng))
            .collect();
        let isometries = (0..m / 2)
            .map(|_| {
                let u = linalg::random_unitary(d * d, &mut rng);
                let mut v = Array2::from_elem((d, d * d), ZERO);
                for r in 0..d {
                    v.row_mut(r).assign(&u.row(r));
                }
                v
            })
            .collect();
        layers.push(MeraLayer {
            disentanglers,
            isometries,
        });
    }
    let net = MeraNetwork { n, d, layers };
    net.validate()?;
    Ok(net)
}
