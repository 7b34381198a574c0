//! Kempe-Kitaev-Regev 3-local -> 2-local perturbation gadget.
//!
//! Step 1 rewrites a 3-local qubit Hamiltonian as H = Y - 6 sum_t
//! B_{t1} (x) B_{t2} (x) B_{t3} with Y 2-local and every B PSD: each
//! 3-local Pauli component c sigma1 sigma2 sigma3 uses B_i = b(I + s_i
//! sigma_i) with s1 = s2 = +1, s3 = -sign(c), b = (|c|/6)^{1/3}, and the
//! lower-locality cross terms are folded back into Y. Step 2 appends one
//! mediator qubit triple per gadget: Q = -(1/(4 delta^3)) I (x)
//! (sum sigma^z sigma^z - 3I) has spectrum {0, Delta = 1/delta^3} with
//! null space C = span{|000>,|111>} per triple (a logical qubit), and
//! P = (Y + (1/delta) sum B_i^2) (x) I - (1/delta^2) sum B_i (x) sigma^x_i.
//! H_eff = Y (x) I_C - 6 B1 (x) B2 (x) B3 (x) sigma^x_C shares the ground
//! energy of H, and the exact self-energy Sigma_-(z) = z I_- -
//! R_-^{-1}(z, H~) reproduces it to O(delta).
//!
//! Mediator qubits are appended after the system qubits, triple t at sites
//! n+3t..n+3t+2; L_- columns are ordered (system index, logical bits with
//! |000> -> 0 and |111> -> 1, triple 0 most significant).

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::ham::{LocalHamiltonian, Metadata};
use crate::linalg::{self, c, cr, kron, CMat, ONE, ZERO};

const COEFF_TOL: f64 = 1e-12;

pub fn pauli(k: usize) -> CMat {
    match k {
        0 => linalg::identity(2),
        1 => ndarray::array![[ZERO, ONE], [ONE, ZERO]],
        2 => ndarray::array![[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]],
        3 => ndarray::array![[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("pauli index out of range"),
    }
}

#[derive(Debug, Clone)]
pub struct Triple {
    /// System qubits the three PSD factors act on (ascending).
    pub support: [usize; 3],
    pub b: [CMat; 3],
}

#[derive(Debug, Clone)]
pub struct ThreeLocalDecomposition {
    pub n: usize,
    /// 2-local remainder.
    pub y: LocalHamiltonian,
    pub triples: Vec<Triple>,
    /// Recorded proportionality constant: input H * scale = Y - 6 sum BBB.
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub struct GadgetHamiltonian {
    pub h_tilde: LocalHamiltonian,
    pub q: LocalHamiltonian,
    pub p: LocalHamiltonian,
    pub delta: f64,
    pub n_system: usize,
    pub n_triples: usize,
}

fn meta(model: &str) -> Metadata {
    Metadata {
        model: model.into(),
        params: BTreeMap::new(),
    }
}

/// Pauli coefficients of an 8x8 Hermitian matrix: m = sum c_{abc}
/// sigma_a (x) sigma_b (x) sigma_c with c = Tr[(sigma (x) sigma (x)
/// sigma) m] / 8, all real.
fn pauli3_coefficients(m: &CMat) -> Result<[[[f64; 4]; 4]; 4]> {
    let mut out = [[[0.0f64; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                let basis = kron(&kron(&pauli(a), &pauli(b)), &pauli(cc));
                let tr: crate::linalg::C64 = (0..8).map(|r| basis.row(r).dot(&m.column(r))).sum();
                if tr.im.abs() > 1e-10 {
                    return Err(Error::InvalidInput(
                        "matrix is not Hermitian: complex Pauli coefficient".into(),
                    ));
                }
                out[a][b][cc] = tr.re / 8.0;
            }
        }
    }
    Ok(out)
}

/// Rewrite a <= 3-local qubit Hamiltonian as Y - 6 sum B (x) B (x) B.
pub fn decompose_3local(h: &LocalHamiltonian) -> Result<ThreeLocalDecomposition> {
    if h.dims.iter().any(|&d| d != 2) {
        return Err(Error::InvalidInput("gadget decomposition needs qubit sites".into()));
    }
    let mut y = LocalHamiltonian::qubits(h.n, meta("gadget-y"));
    let mut triples = Vec::new();
    for term in &h.terms {
        match term.support.len() {
            1 | 2 => y.add_term(term.support.clone(), term.matrix.clone())?,
            3 => {
                let coeffs = pauli3_coefficients(&term.matrix)?;
                // residual = term + 6 sum BBB: the 3-local Pauli components
                // cancel exactly, leaving the <= 2-local corrections
                let mut residual = term.matrix.clone();
                for a in 1..4 {
                    for b in 1..4 {
                        for cc in 1..4 {
                            let coeff = coeffs[a][b][cc];
                            if coeff.abs() < COEFF_TOL {
                                continue;
                            }
                            let amp = (coeff.abs() / 6.0).cbrt();
                            let s3 = -coeff.signum();
                            let b1 = (&linalg::identity(2) + &pauli(a)).mapv(|z| z * cr(amp));
                            let b2 = (&linalg::identity(2) + &pauli(b)).mapv(|z| z * cr(amp));
                            let b3 = (&linalg::identity(2) + &pauli(cc).mapv(|z| z * cr(s3)))
                                .mapv(|z| z * cr(amp));
                            let bbb = kron(&kron(&b1, &b2), &b3);
                            residual = &residual + &bbb.mapv(|z| z * cr(6.0));
                            triples.push(Triple {
                                support: [term.support[0], term.support[1], term.support[2]],
                                b: [b1, b2, b3],
                            });
                        }
                    }
                }
                // fold the residual into Y as <= 2-local Pauli pieces
                let rc = pauli3_coefficients(&residual)?;
                for a in 0..4 {
                    for b in 0..4 {
                        for cc in 0..4 {
                            let coeff = rc[a][b][cc];
                            if coeff.abs() < COEFF_TOL {
                                continue;
                            }
                            let idx: Vec<usize> = [a, b, cc]
                                .iter()
                                .enumerate()
                                .filter(|(_, &p)| p != 0)
                                .map(|(i, _)| i)
                                .collect();
                            if idx.len() == 3 {
                                return Err(Error::InvalidInput(
                                    "3-local residual did not cancel".into(),
                                ));
                            }
                            let (sup, op): (Vec<usize>, CMat) = match idx.len() {
                                0 => (vec![term.support[0]], linalg::identity(2)),
                                1 => (vec![term.support[idx[0]]], pauli([a, b, cc][idx[0]])),
                                _ => (
                                    vec![term.support[idx[0]], term.support[idx[1]]],
                                    kron(&pauli([a, b, cc][idx[0]]), &pauli([a, b, cc][idx[1]])),
                                ),
                            };
                            y.add_term(sup, op.mapv(|z| z * cr(coeff)))?;
                        }
                    }
                }
            }
            _ => return Err(Error::InvalidInput("terms must be at most 3-local".into())),
        }
    }
    Ok(ThreeLocalDecomposition {
        n: h.n,
        y,
        triples,
        scale: 1.0,
    })
}

impl ThreeLocalDecomposition {
    /// Dense reassembly Y - 6 sum B (x) B (x) B on the system qubits.
    pub fn reassemble(&self) -> Result<CMat> {
        let mut m = self.y.assemble()?;
        let dims = vec![2usize; self.n];
        for t in &self.triples {
            let op = kron(&kron(&t.b[0], &t.b[1]), &t.b[2]).mapv(|z| z * cr(-6.0));
            let term = crate::ham::LocalTerm::new(t.support.to_vec(), op, &dims)?;
            // embed by applying to basis columns
            let dim = 1usize << self.n;
            for col in 0..dim {
                let mut e = Array1::from_elem(dim, ZERO);
                e[col] = ONE;
                let mut out = Array1::from_elem(dim, ZERO);
                crate::ham::apply_embedded(&dims, &term.support, &term.matrix, &e, &mut out);
                for row in 0..dim {
                    m[[row, col]] += out[row];
                }
            }
        }
        Ok(m)
    }
}

/// H_eff = Y (x) I_C - 6 sum_t B1 (x) B2 (x) B3 (x) sigma^x_{C_t} on the n
/// system qubits plus one logical qubit per triple (triple t at site n+t),
/// matching the ordering of `minus_isometry` columns. The ground energy
/// equals that of the original H: the all-minus sigma^x sector reproduces
/// Y - 6 sum BBB and every other sector dominates it (BBB is PSD).
pub fn effective_hamiltonian(dec: &ThreeLocalDecomposition) -> Result<LocalHamiltonian> {
    let mut h = LocalHamiltonian::qubits(dec.n + dec.triples.len(), meta("gadget-heff"));
    for t in &dec.y.terms {
        h.add_term(t.support.clone(), t.matrix.clone())?;
    }
    for (idx, t) in dec.triples.iter().enumerate() {
        let op = kron(&kron(&kron(&t.b[0], &t.b[1]), &t.b[2]), &pauli(1)).mapv(|z| z * cr(-6.0));
        let mut sup = t.support.to_vec();
        sup.push(dec.n + idx);
        h.add_term(sup, op)?;
    }
    Ok(h)
}

pub fn build_gadget(dec: &ThreeLocalDecomposition, delta: f64) -> Result<GadgetHamiltonian> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidInput("delta must be in (0, 1)".into()));
    }
    let n = dec.n;
    let m = dec.triples.len();
    let total = n + 3 * m;
    let mut q = LocalHamiltonian::qubits(total, meta("gadget-q"));
    let mut p = LocalHamiltonian::qubits(total, meta("gadget-p"));
    let quarter = 1.0 / (4.0 * delta.powi(3));
    let zz = kron(&pauli(3), &pauli(3));
    let pair_penalty = (&linalg::identity(4) - &zz).mapv(|z| z * cr(quarter));
    for (t, triple) in dec.triples.iter().enumerate() {
        let w = n + 3 * t;
        // Q: (1/(4 delta^3)) (3I - sum sigma^z sigma^z) = sum over pairs
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            q.add_term(vec![w + i, w + j], pair_penalty.clone())?;
        }
        // P: (1/delta) B_i^2 on the system qubit, -(1/delta^2) B_i (x)
        // sigma^x on (system, mediator)
        for i in 0..3 {
            let bsq = triple.b[i].dot(&triple.b[i]).mapv(|z| z / cr(delta));
            p.add_term(vec![triple.support[i]], bsq)?;
            let coupling =
                kron(&triple.b[i], &pauli(1)).mapv(|z| z * cr(-1.0 / (delta * delta)));
            p.add_term(vec![triple.support[i], w + i], coupling)?;
        }
    }
    for t in &dec.y.terms {
        p.add_term(t.support.clone(), t.matrix.clone())?;
    }
    let mut h_tilde = LocalHamiltonian::qubits(total, meta("gadget-htilde"));
    for t in q.terms.iter().chain(p.terms.iter()) {
        h_tilde.terms.push(t.clone());
    }
    Ok(GadgetHamiltonian {
        h_tilde,
        q,
        p,
        delta,
        n_system: n,
        n_triples: m,
    })
}

impl GadgetHamiltonian {
    pub fn delta_gap(&self) -> f64 {
        1.0 / self.delta.powi(3)
    }

    /// Isometry from L_- = system (x) span{|000>,|111>}^M into the full
    /// space; column order (system index, logical bits).
    pub fn minus_isometry(&self) -> CMat {
        let (n, m) = (self.n_system, self.n_triples);
        let full = 1usize << (n + 3 * m);
        let small = 1usize << (n + m);
        let mut v = Array2::from_elem((full, small), ZERO);
        for x in 0..1usize << n {
            for cbits in 0..1usize << m {
                let mut med = 0usize;
                for t in 0..m {
                    if (cbits >> (m - 1 - t)) & 1 == 1 {
                        med += 7usize << (3 * (m - 1 - t));
                    }
                }
                v[[x * (1 << (3 * m)) + med, x * (1 << m) + cbits]] = ONE;
            }
        }
        v
    }
}

/// Exact self-energy Sigma_-(z) = z I_- - (Pi_- R(z, H~) Pi_-)^{-1} on L_-,
/// computed by dense inversion. `lambda_star` selects Q's low eigenspace;
/// for this gadget any cutoff in (0, Delta) yields L_- as above.
pub fn self_energy(g: &GadgetHamiltonian, z: f64, lambda_star: f64) -> Result<CMat> {
    if !(0.0 < lambda_star && lambda_star < g.delta_gap()) {
        return Err(Error::InvalidInput(
            "cutoff must split Q's spectrum {0, Delta}".into(),
        ));
    }
    let h = g.h_tilde.assemble()?;
    let dim = h.nrows();
    let mut zh = h.mapv(|x| -x);
    for i in 0..dim {
        zh[[i, i]] += cr(z);
    }
    let resolvent = linalg::inverse(&zh)
        .map_err(|_| Error::Degenerate("z is an eigenvalue of H~".into()))?;
    let v = g.minus_isometry();
    let r_minus = v.t().mapv(|x| x.conj()).dot(&resolvent).dot(&v);
    let r_inv = linalg::inverse(&r_minus)
        .map_err(|_| Error::Degenerate("compressed resolvent is singular".into()))?;
    let mut sigma = r_inv.mapv(|x| -x);
    for i in 0..sigma.nrows() {
        sigma[[i, i]] += cr(z);
    }
    Ok(sigma)
}

#[derive(Debug, Clone)]
pub struct SelfEnergyReport {
    pub z_grid: Vec<f64>,
    pub lambda_star: f64,
    /// ||Sigma_-(z) - H_eff|| per grid point.
    pub deviations: Vec<f64>,
    pub deviation: f64,
}

/// Sweep Sigma_-(z) over 21 z points spanning [-||H_eff||-eps0,
/// ||H_eff||+eps0] with eps0 = 0.1 ||H_eff|| and lambda_star = Delta/2.
pub fn self_energy_report(
    g: &GadgetHamiltonian,
    dec: &ThreeLocalDecomposition,
) -> Result<SelfEnergyReport> {
    let heff = effective_hamiltonian(dec)?.assemble()?;
    let norm = linalg::hermitian_norm(&heff)?;
    let eps0 = 0.1 * norm.max(1.0);
    let (lo, hi) = (-norm - eps0, norm + eps0);
    let lambda_star = g.delta_gap() / 2.0;
    let mut z_grid = Vec::new();
    let mut deviations = Vec::new();
    for k in 0..21 {
        let z = lo + (hi - lo) * k as f64 / 20.0;
        let sigma = self_energy(g, z, lambda_star)?;
        deviations.push(linalg::hermitian_norm(&(&sigma - &heff))?);
        z_grid.push(z);
    }
    let deviation = deviations.iter().cloned().fold(0.0f64, f64::max);
    Ok(SelfEnergyReport {
        z_grid,
        lambda_star,
        deviations,
        deviation,
    })
}

#[derive(Debug, Clone)]
pub struct ClosenessRow {
    pub delta: f64,
    /// max_j |lambda_j(Pi~_- H~ Pi~_-) - lambda_j(H_eff)| over the low band.
    pub epsilon: f64,
    pub lambda_min_htilde: f64,
    pub lambda_min_heff: f64,
    /// Number of H~ eigenvalues below lambda_star vs dim(H_eff).
    pub low_count: usize,
    pub heff_dim: usize,
}

/// Theorem-3 closeness check over a delta grid with lambda_star = Delta/2.
pub fn validate_gadget(
    dec: &ThreeLocalDecomposition,
    delta_grid: &[f64],
) -> Result<Vec<ClosenessRow>> {
    let heff = effective_hamiltonian(dec)?.assemble()?;
    let heff_vals = linalg::eigvalsh(&heff)?;
    let mut rows = Vec::new();
    for &delta in delta_grid {
        let g = build_gadget(dec, delta)?;
        let lambda_star = g.delta_gap() / 2.0;
        let vals = linalg::eigvalsh(&g.h_tilde.assemble()?)?;
        let low: Vec<f64> = vals.iter().cloned().filter(|&x| x < lambda_star).collect();
        let mut epsilon = 0.0f64;
        for (j, &hv) in heff_vals.iter().enumerate() {
            if j < low.len() {
                epsilon = epsilon.max((low[j] - hv).abs());
            }
        }
        rows.push(ClosenessRow {
            delta,
            epsilon,
            lambda_min_htilde: vals[0],
            lambda_min_heff: heff_vals[0],
            low_count: low.len(),
            heff_dim: heff_vals.len(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, frobenius_norm, identity, seeded_rng};

    fn sigma_zzz() -> LocalHamiltonian {
        let mut h = LocalHamiltonian::qubits(3, meta("zzz"));
        h.add_term(vec![0, 1, 2], kron(&kron(&pauli(3), &pauli(3)), &pauli(3)))
            .unwrap();
        h
    }

    fn random_3local(seed: u64) -> LocalHamiltonian {
        let mut rng = seeded_rng(seed);
        let mut h = LocalHamiltonian::qubits(3, meta("rand3"));
        h.add_term(vec![0, 1, 2], linalg::random_hermitian(8, &mut rng))
            .unwrap();
        h
    }

    /// Manual decomposition with explicit B factors (for B = 0 edge cases).
    fn zero_b_decomposition(n: usize, y: LocalHamiltonian) -> ThreeLocalDecomposition {
        let z = Array2::from_elem((2, 2), ZERO);
        ThreeLocalDecomposition {
            n,
            y,
            triples: vec![Triple {
                support: [0, 1, 2],
                b: [z.clone(), z.clone(), z],
            }],
            scale: 1.0,
        }
    }

    #[test]
    fn two_local_input_passes_through() {
        let mut h = LocalHamiltonian::qubits(2, meta("t"));
        h.add_term(vec![0, 1], kron(&pauli(1), &pauli(1))).unwrap();
        h.add_term(vec![0], pauli(3)).unwrap();
        let dec = decompose_3local(&h).unwrap();
        assert!(dec.triples.is_empty());
        let diff = &dec.y.assemble().unwrap() - &h.assemble().unwrap();
        assert!(frobenius_norm(&diff) < 1e-14);
    }

    #[test]
    fn zzz_decomposition_reassembles_exactly() {
        let h = sigma_zzz();
        let dec = decompose_3local(&h).unwrap();
        assert_eq!(dec.triples.len(), 1);
        for b in &dec.triples[0].b {
            let vals = linalg::eigvalsh(b).unwrap();
            assert!(vals[0] > -1e-10, "B not PSD");
        }
        let diff = &dec.reassemble().unwrap() - &h.assemble().unwrap();
        assert!(frobenius_norm(&diff) < 1e-12);
    }

    #[test]
    fn random_3local_reassembles() {
        for seed in 0..100 {
            let h = random_3local(seed);
            let dec = decompose_3local(&h).unwrap();
            let diff = &dec.reassemble().unwrap() - &h.assemble().unwrap();
            assert!(
                frobenius_norm(&diff) < 1e-9,
                "seed {seed}: {}",
                frobenius_norm(&diff)
            );
        }
    }

    #[test]
    fn q_spectrum_and_null_space() {
        let dec = decompose_3local(&sigma_zzz()).unwrap();
        let g = build_gadget(&dec, 0.1).unwrap();
        let delta_gap = g.delta_gap();
        let qd = g.q.diagonal().expect("Q is diagonal");
        for idx in 0..qd.len() {
            let med = idx % 8;
            if med == 0 || med == 7 {
                assert!(qd[idx].abs() < 1e-9, "mediator {med:b}: {}", qd[idx]);
            } else {
                assert!((qd[idx] - delta_gap).abs() < 1e-9 * delta_gap);
            }
        }
    }

    #[test]
    fn zero_b_gadget_doubles_the_spectrum() {
        // B = 0 decouples the mediators: the low band of H~ = Q + Y (x) I
        // is spec(Y) with multiplicity doubled by the logical qubit
        let mut rng = seeded_rng(5);
        let mut y = LocalHamiltonian::qubits(3, meta("y"));
        y.add_term(vec![0, 1], linalg::random_hermitian(4, &mut rng))
            .unwrap();
        y.add_term(vec![1, 2], linalg::random_hermitian(4, &mut rng))
            .unwrap();
        let dec = zero_b_decomposition(3, y.clone());
        let g = build_gadget(&dec, 0.1).unwrap();
        let vals = linalg::eigvalsh(&g.h_tilde.assemble().unwrap()).unwrap();
        let mut yvals: Vec<f64> = linalg::eigvalsh(&y.assemble().unwrap())
            .unwrap()
            .iter()
            .flat_map(|&v| [v, v])
            .collect();
        yvals.sort_by(f64::total_cmp);
        for (k, &expect) in yvals.iter().enumerate() {
            assert!((vals[k] - expect).abs() < 1e-9, "{} vs {expect}", vals[k]);
        }
    }

    #[test]
    fn effective_hamiltonian_ground_energy() {
        // lambda_min(H_eff) = lambda_min(H) exactly: sigma^x_C sectors give
        // Y -/+ 6 BBB and the + sector dominates (BBB PSD)
        let mut sparse = LocalHamiltonian::qubits(3, meta("sparse"));
        let xyz = kron(&kron(&pauli(1), &pauli(2)), &pauli(3)).mapv(|z| z * cr(0.9));
        sparse.add_term(vec![0, 1, 2], xyz).unwrap();
        sparse.add_term(vec![1], pauli(1)).unwrap();
        for h in [sigma_zzz(), sparse] {
            let dec = decompose_3local(&h).unwrap();
            let heff = effective_hamiltonian(&dec).unwrap().assemble().unwrap();
            let lh = linalg::eigvalsh(&h.assemble().unwrap()).unwrap()[0];
            let le = linalg::eigvalsh(&heff).unwrap()[0];
            assert!((lh - le).abs() < 1e-9, "{lh} vs {le}");
        }
        // B = 0: H_eff = Y (x) I
        let mut y = LocalHamiltonian::qubits(3, meta("y"));
        y.add_term(vec![0], pauli(3)).unwrap();
        let dec = zero_b_decomposition(3, y.clone());
        let heff = effective_hamiltonian(&dec).unwrap().assemble().unwrap();
        let expect = kron(&y.assemble().unwrap(), &identity(2));
        assert!(frobenius_norm(&(&heff - &expect)) < 1e-12);
    }

    #[test]
    fn self_energy_trivial_cases() {
        // P = 0 (zero Y, zero B): Sigma_-(z) = 0 on L_-
        let y = LocalHamiltonian::qubits(3, meta("y"));
        let dec = zero_b_decomposition(3, y);
        let g = build_gadget(&dec, 0.1).unwrap();
        let z = 0.3;
        let sigma = self_energy(&g, z, g.delta_gap() / 2.0).unwrap();
        assert!(frobenius_norm(&sigma) < 1e-8);
        // R_+ of the pure-Q system = (z - Delta)^{-1} I on L_+
        let h = g.h_tilde.assemble().unwrap();
        let dim = h.nrows();
        let mut zh = h.mapv(|x| -x);
        for i in 0..dim {
            zh[[i, i]] += cr(z);
        }
        let resolvent = linalg::inverse(&zh).unwrap();
        let v = g.minus_isometry();
        let pi_minus = v.dot(&dagger(&v));
        let pi_plus = &identity(dim) - &pi_minus;
        let r_plus = pi_plus.dot(&resolvent).dot(&pi_plus);
        let expect = pi_plus.mapv(|x| x * cr(1.0 / (z - g.delta_gap())));
        assert!(frobenius_norm(&(&r_plus - &expect)) < 1e-9);
    }

    #[test]
    fn self_energy_deviation_scales_linearly_in_delta() {
        let dec = decompose_3local(&sigma_zzz()).unwrap();
        let mut devs = Vec::new();
        for &delta in &[0.1, 0.05, 0.025] {
            let g = build_gadget(&dec, delta).unwrap();
            devs.push(self_energy_report(&g, &dec).unwrap().deviation);
        }
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
        // ~linear: halving delta roughly halves the deviation
        for w in devs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.4 && ratio < 4.0, "ratio {ratio}");
        }
    }

    #[test]
    fn series_terms_match_printed_forms() {
        // P_- = X (x) I_C and P_-+ P_+- = delta^-4 (sum B^2) (x) I_C, and
        // the exact Sigma_- minus the series through third order is O(delta)
        // smaller than the third-order term
        let dec = decompose_3local(&sigma_zzz()).unwrap();
        let mut ratios = Vec::new();
        for &delta in &[0.1, 0.05, 0.025] {
            let g = build_gadget(&dec, delta).unwrap();
            let p = g.p.assemble().unwrap();
            let v = g.minus_isometry();
            let dim = p.nrows();
            let pi_minus = v.dot(&dagger(&v));
            let pi_plus = &identity(dim) - &pi_minus;
            let p_minus = dagger(&v).dot(&p).dot(&v);
            // X = Y + (1/delta) sum B^2 on the system
            let mut x = dec.y.assemble().unwrap();
            let dims = vec![2usize; 3];
            for (i, b) in dec.triples[0].b.iter().enumerate() {
                let bsq = b.dot(b).mapv(|z| z / cr(delta));
                let term = crate::ham::LocalTerm::new(vec![i], bsq, &dims).unwrap();
                for col in 0..8 {
                    let mut e = Array1::from_elem(8, ZERO);
                    e[col] = ONE;
                    let mut out = Array1::from_elem(8, ZERO);
                    crate::ham::apply_embedded(&dims, &term.support, &term.matrix, &e, &mut out);
                    for row in 0..8 {
                        x[[row, col]] += out[row];
                    }
                }
            }
            let expect_pm = kron(&x, &identity(2));
            assert!(frobenius_norm(&(&p_minus - &expect_pm)) < 1e-9);
            let pmp = dagger(&v).dot(&p).dot(&pi_plus);
            let ppm = pi_plus.dot(&p).dot(&v);
            let order2 = pmp.dot(&ppm);
            let mut bsq_sum = Array2::from_elem((2, 2), ZERO);
            let mut expect2 = Array2::from_elem((16, 16), ZERO);
            for (i, b) in dec.triples[0].b.iter().enumerate() {
                bsq_sum = &bsq_sum + &b.dot(b);
                let mut factors = vec![identity(2); 3];
                factors[i] = b.dot(b);
                let emb = kron(&kron(&factors[0], &factors[1]), &factors[2]);
                expect2 = &expect2 + &kron(&emb, &identity(2));
            }
            let expect2 = expect2.mapv(|z| z / cr(delta.powi(4)));
            assert!(
                frobenius_norm(&(&order2 - &expect2)) < 1e-7 * delta.powi(-4),
                "second-order mismatch"
            );
            // truncation residual vs third-order magnitude at z = 0
            let z = 0.0;
            let rfac = 1.0 / (z - g.delta_gap());
            let sigma = self_energy(&g, z, g.delta_gap() / 2.0).unwrap();
            let order3 = pmp.dot(&pi_plus.dot(&p).dot(&pi_plus)).dot(&ppm);
            let series3 = &(&p_minus + &order2.mapv(|v2| v2 * cr(rfac)))
                + &order3.mapv(|v3| v3 * cr(rfac * rfac));
            let resid = linalg::hermitian_norm(&(&sigma - &series3)).unwrap();
            let third = linalg::hermitian_norm(&order3.mapv(|v3| v3 * cr(rfac * rfac))).unwrap();
            ratios.push(resid / third);
            // (z - Delta)^{-1} = -delta^3 + O(delta^6)
            assert!((rfac + delta.powi(3)).abs() < 2.0 * delta.powi(6));
        }
        assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{ratios:?}");
        assert!(ratios[2] < 0.1, "residual not small: {ratios:?}");
    }

    #[test]
    fn theorem3_closeness_decreases_with_delta() {
        let dec = decompose_3local(&sigma_zzz()).unwrap();
        let rows = validate_gadget(&dec, &[0.1, 0.05, 0.025]).unwrap();
        assert!(rows[0].epsilon > rows[1].epsilon && rows[1].epsilon > rows[2].epsilon);
        for r in &rows {
            assert_eq!(r.low_count, r.heff_dim, "delta {}: band mismatch", r.delta);
            assert!((r.lambda_min_htilde - r.lambda_min_heff).abs() <= r.epsilon + 1e-12);
        }
        // B = 0: epsilon exactly 0 (decoupled)
        let mut y = LocalHamiltonian::qubits(3, meta("y"));
        y.add_term(vec![0], pauli(3)).unwrap();
        let dec0 = zero_b_decomposition(3, y);
        let rows0 = validate_gadget(&dec0, &[0.1]).unwrap();
        assert!(rows0[0].epsilon < 1e-9);
    }

    #[test]
    fn two_triple_ground_energy_within_epsilon() {
        // two 3-local Pauli components -> two mediator triples (9 qubits)
        let mut h = LocalHamiltonian::qubits(3, meta("two"));
        let xzz = kron(&kron(&pauli(1), &pauli(3)), &pauli(3)).mapv(|z| z * cr(0.7));
        let zyx = kron(&kron(&pauli(3), &pauli(2)), &pauli(1)).mapv(|z| z * cr(-0.4));
        h.add_term(vec![0, 1, 2], &xzz + &zyx).unwrap();
        let mut rng = seeded_rng(23);
        h.add_term(vec![0, 1], linalg::random_hermitian(4, &mut rng))
            .unwrap();
        let dec = decompose_3local(&h).unwrap();
        assert_eq!(dec.triples.len(), 2);
        let diff = &dec.reassemble().unwrap() - &h.assemble().unwrap();
        assert!(frobenius_norm(&diff) < 1e-10);
        let rows = validate_gadget(&dec, &[0.02]).unwrap();
        let r = &rows[0];
        assert!(
            (r.lambda_min_htilde - r.lambda_min_heff).abs() <= r.epsilon + 1e-12,
            "ground energies differ beyond epsilon"
        );
        assert!(r.epsilon < 1.0, "epsilon unexpectedly large: {}", r.epsilon);
    }
}
