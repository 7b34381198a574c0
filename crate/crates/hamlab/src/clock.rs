//! Feynman-Kitaev circuit-to-Hamiltonian compiler.
//!
//! A circuit V = V_L ... V_1 on N qubits (the first m carry the proof, the
//! rest are ancillas initialized to |0>) compiles to H = H_in + H_prop +
//! H_out (+ H_stab in the unary encoding):
//!   H_in   penalizes ancillas outside |0> at time 0,
//!   H_j    = 1/2(|j><j| + |j-1><j-1|) (x) I - 1/2 V_j (x) |j><j-1| - h.c.,
//!   H_out  penalizes output qubit 0 in |0> at time L,
//!   H_stab = sum_j |0><0|_j (x) |1><1|_{j+1} penalizes invalid unary strings.
//! The direct encoding uses one (L+1)-dimensional clock site appended after
//! the system qubits; the unary encoding uses L clock qubits with
//! |j> -> |1^j 0^{L-j}> and every term at most 5-local. Acceptance means
//! measuring |1> on qubit 0 at time L; epsilon is measured from the circuit
//! by maximizing the acceptance POVM element over proofs.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::ham::{self, apply_embedded, LocalHamiltonian, Metadata};
use crate::linalg::{self, cr, dagger, kron, CMat, CVec, ONE, ZERO};

#[derive(Debug, Clone)]
pub struct Gate {
    /// Target sites; targets[0] is the most significant factor of `matrix`.
    pub targets: Vec<usize>,
    pub matrix: CMat,
}

#[derive(Debug, Clone)]
pub struct QuantumCircuit {
    /// Total qubits.
    pub n: usize,
    /// Proof qubits (the first m); the rest are |0>-initialized ancillas.
    pub m: usize,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Direct,
    Unary,
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub proof: Vec<usize>,
    pub ancilla: Vec<usize>,
    pub clock: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ClockHamiltonian {
    pub h_in: LocalHamiltonian,
    pub h_prop: LocalHamiltonian,
    pub h_out: LocalHamiltonian,
    pub h_stab: Option<LocalHamiltonian>,
    pub encoding: Encoding,
    pub layout: Layout,
}

impl QuantumCircuit {
    pub fn new(n: usize, m: usize, gates: Vec<Gate>) -> Result<Self> {
        let circ = QuantumCircuit { n, m, gates };
        circ.validate()?;
        Ok(circ)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m > self.n {
            return Err(Error::InvalidInput("need 0 <= m <= n, n >= 1".into()));
        }
        if self.gates.is_empty() {
            return Err(Error::InvalidInput("circuit needs at least one gate".into()));
        }
        for (k, g) in self.gates.iter().enumerate() {
            if g.targets.is_empty() || g.targets.len() > 2 {
                return Err(Error::InvalidInput(format!("gate {k}: 1 or 2 targets required")));
            }
            if g.targets.iter().any(|&t| t >= self.n)
                || (g.targets.len() == 2 && g.targets[0] == g.targets[1])
            {
                return Err(Error::InvalidInput(format!("gate {k}: bad targets")));
            }
            let dim = 1usize << g.targets.len();
            if g.matrix.dim() != (dim, dim) {
                return Err(Error::ShapeMismatch(format!("gate {k}: matrix dim")));
            }
            let defect =
                linalg::frobenius_norm(&(&dagger(&g.matrix).dot(&g.matrix) - &linalg::identity(dim)));
            if defect > 1e-10 {
                return Err(Error::InvalidInput(format!("gate {k}: not unitary ({defect:.2e})")));
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.gates.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "m": self.m,
            "gates": self.gates.iter().map(|g| serde_json::json!({
                "targets": g.targets,
                "matrix": ham::matrix_to_json(&g.matrix),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let n = v["N"].as_u64().ok_or_else(|| Error::Serde("missing N".into()))? as usize;
        let m = v["m"].as_u64().ok_or_else(|| Error::Serde("missing m".into()))? as usize;
        let gates = v["gates"]
            .as_array()
            .ok_or_else(|| Error::Serde("missing gates".into()))?
            .iter()
            .map(|gv| {
                let targets: Vec<usize> = gv["targets"]
                    .as_array()
                    .ok_or_else(|| Error::Serde("missing targets".into()))?
                    .iter()
                    .map(|t| t.as_u64().map(|x| x as usize))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::Serde("bad targets".into()))?;
                Ok(Gate {
                    targets,
                    matrix: ham::matrix_from_json(&gv["matrix"])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        QuantumCircuit::new(n, m, gates)
    }
}

/// Gate with its targets sorted ascending, reordering the matrix to match.
fn sorted_gate(g: &Gate) -> (Vec<usize>, CMat) {
    if g.targets.len() == 1 || g.targets[0] < g.targets[1] {
        return (g.targets.clone(), g.matrix.clone());
    }
    let swapped = Array2::from_shape_fn((4, 4), |(r, c)| {
        let (b, a) = (r / 2, r % 2);
        let (bp, ap) = (c / 2, c % 2);
        g.matrix[[a * 2 + b, ap * 2 + bp]]
    });
    (vec![g.targets[1], g.targets[0]], swapped)
}

/// |a><b| in dimension d.
fn ketbra(d: usize, a: usize, b: usize) -> CMat {
    let mut m = Array2::from_elem((d, d), ZERO);
    m[[a, b]] = ONE;
    m
}

fn proj(d: usize, a: usize) -> CMat {
    ketbra(d, a, a)
}

fn meta(model: &str, circ: &QuantumCircuit) -> Metadata {
    let mut params = BTreeMap::new();
    params.insert("N".into(), circ.n.to_string());
    params.insert("m".into(), circ.m.to_string());
    params.insert("L".into(), circ.depth().to_string());
    Metadata {
        model: model.into(),
        params,
    }
}

/// Unary-encoding clock operators: |j><j| and |j><j-1| as (support, matrix)
/// over clock qubit sites base..base+l-1 (clock qubit t <=> site base+t-1).
fn unary_proj(base: usize, l: usize, j: usize) -> (Vec<usize>, CMat) {
    if j == 0 {
        (vec![base], proj(2, 0))
    } else if j == l {
        (vec![base + l - 1], proj(2, 1))
    } else {
        (vec![base + j - 1, base + j], kron(&proj(2, 1), &proj(2, 0)))
    }
}

fn unary_hop(base: usize, l: usize, j: usize) -> (Vec<usize>, CMat) {
    // |j><j-1| on valid strings: clock qubit j flips 0 -> 1 with qubit j-1
    // pinned to 1 and qubit j+1 pinned to 0
    let raise = ketbra(2, 1, 0);
    if l == 1 {
        (vec![base], raise)
    } else if j == 1 {
        (vec![base, base + 1], kron(&raise, &proj(2, 0)))
    } else if j == l {
        (vec![base + l - 2, base + l - 1], kron(&proj(2, 1), &raise))
    } else {
        (
            vec![base + j - 2, base + j - 1, base + j],
            kron(&kron(&proj(2, 1), &raise), &proj(2, 0)),
        )
    }
}

pub fn compile(circ: &QuantumCircuit, encoding: Encoding) -> Result<ClockHamiltonian> {
    circ.validate()?;
    let (n, l) = (circ.n, circ.depth());
    let layout = match encoding {
        Encoding::Direct => Layout {
            proof: (0..circ.m).collect(),
            ancilla: (circ.m..n).collect(),
            clock: vec![n],
        },
        Encoding::Unary => Layout {
            proof: (0..circ.m).collect(),
            ancilla: (circ.m..n).collect(),
            clock: (n..n + l).collect(),
        },
    };
    let dims: Vec<usize> = match encoding {
        Encoding::Direct => {
            let mut d = vec![2; n];
            d.push(l + 1);
            d
        }
        Encoding::Unary => vec![2; n + l],
    };
    let mut h_in = LocalHamiltonian::new(dims.clone(), meta("clock-in", circ));
    let mut h_prop = LocalHamiltonian::new(dims.clone(), meta("clock-prop", circ));
    let mut h_out = LocalHamiltonian::new(dims.clone(), meta("clock-out", circ));

    // time-0 and time-L clock projectors shared by H_in / H_out
    let (t0_sup, t0_op) = match encoding {
        Encoding::Direct => (vec![n], proj(l + 1, 0)),
        Encoding::Unary => unary_proj(n, l, 0),
    };
    let (tl_sup, tl_op) = match encoding {
        Encoding::Direct => (vec![n], proj(l + 1, l)),
        Encoding::Unary => unary_proj(n, l, l),
    };

    // H_in: ancilla a in |1> at time 0 (one 2-local term per ancilla)
    for a in circ.m..n {
        let mut sup = vec![a];
        sup.extend_from_slice(&t0_sup);
        h_in.add_term(sup, kron(&proj(2, 1), &t0_op))?;
    }
    // H_out: output qubit 0 in |0> at time L
    {
        let mut sup = vec![0];
        sup.extend_from_slice(&tl_sup);
        h_out.add_term(sup, kron(&proj(2, 0), &tl_op))?;
    }
    // H_prop = sum_j H_j
    for (k, g) in circ.gates.iter().enumerate() {
        let j = k + 1;
        let (gsup, gmat) = sorted_gate(g);
        match encoding {
            Encoding::Direct => {
                let d = l + 1;
                let clock_diag = &proj(d, j) + &proj(d, j - 1);
                let gdim = gmat.nrows();
                let mut sup = gsup.clone();
                sup.push(n);
                let mut term = kron(&linalg::identity(gdim), &clock_diag).mapv(|z| z * cr(0.5));
                term = &term - &kron(&gmat, &ketbra(d, j, j - 1)).mapv(|z| z * cr(0.5));
                term = &term - &kron(&dagger(&gmat), &ketbra(d, j - 1, j)).mapv(|z| z * cr(0.5));
                h_prop.add_term(sup, term)?;
            }
            Encoding::Unary => {
                // diagonal clock pieces carry no gate factor
                for jj in [j, j - 1] {
                    let (sup, op) = unary_proj(n, l, jj);
                    h_prop.add_term(sup, op.mapv(|z| z * cr(0.5)))?;
                }
                let (csup, cop) = unary_hop(n, l, j);
                let mut sup = gsup.clone();
                sup.extend_from_slice(&csup);
                let hop = kron(&gmat, &cop).mapv(|z| z * cr(-0.5));
                let herm = &hop + &dagger(&hop);
                h_prop.add_term(sup, herm)?;
            }
        }
    }
    let h_stab = match encoding {
        Encoding::Direct => None,
        Encoding::Unary => {
            let mut hs = LocalHamiltonian::new(dims, meta("clock-stab", circ));
            for j in 1..l {
                hs.add_term(
                    vec![n + j - 1, n + j],
                    kron(&proj(2, 0), &proj(2, 1)),
                )?;
            }
            Some(hs)
        }
    };
    Ok(ClockHamiltonian {
        h_in,
        h_prop,
        h_out,
        h_stab,
        encoding,
        layout,
    })
}

impl ClockHamiltonian {
    /// All parts merged into one LocalHamiltonian.
    pub fn total(&self) -> LocalHamiltonian {
        let mut h = self.h_in.clone();
        h.metadata.model = "clock-total".into();
        for part in [&self.h_prop, &self.h_out] {
            for t in &part.terms {
                h.terms.push(t.clone());
            }
        }
        if let Some(hs) = &self.h_stab {
            for t in &hs.terms {
                h.terms.push(t.clone());
            }
        }
        h
    }
}

/// Unary basis index of the clock string |1^j 0^{l-j}> (clock qubit 1 most
/// significant).
fn unary_clock_index(l: usize, j: usize) -> usize {
    (0..j).map(|t| 1usize << (l - 1 - t)).sum()
}

/// History state (1/sqrt(L+1)) sum_j (V_j...V_1 |proof, 0...0>) (x) |j>.
pub fn history_state(circ: &QuantumCircuit, proof: &CVec, encoding: Encoding) -> Result<CVec> {
    circ.validate()?;
    let (n, m, l) = (circ.n, circ.m, circ.depth());
    if proof.len() != 1 << m {
        return Err(Error::ShapeMismatch("proof dimension != 2^m".into()));
    }
    if (linalg::norm(proof) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("proof must be normalized".into()));
    }
    let sys_dims = vec![2usize; n];
    let sys_dim = 1usize << n;
    // |proof> (x) |0...0>_ancilla: proof bits are the most significant
    let mut psi = Array1::from_elem(sys_dim, ZERO);
    for p in 0..1usize << m {
        psi[p << (n - m)] = proof[p];
    }
    let mut snapshots = vec![psi.clone()];
    for g in &circ.gates {
        let (gsup, gmat) = sorted_gate(g);
        let mut next = Array1::from_elem(sys_dim, ZERO);
        apply_embedded(&sys_dims, &gsup, &gmat, &psi, &mut next);
        psi = next;
        snapshots.push(psi.clone());
    }
    let w = cr(1.0 / ((l + 1) as f64).sqrt());
    let eta = match encoding {
        Encoding::Direct => {
            let mut eta = Array1::from_elem(sys_dim * (l + 1), ZERO);
            for (j, s) in snapshots.iter().enumerate() {
                for x in 0..sys_dim {
                    eta[x * (l + 1) + j] = s[x] * w;
                }
            }
            eta
        }
        Encoding::Unary => {
            let cdim = 1usize << l;
            let mut eta = Array1::from_elem(sys_dim * cdim, ZERO);
            for (j, s) in snapshots.iter().enumerate() {
                let cj = unary_clock_index(l, j);
                for x in 0..sys_dim {
                    eta[x * cdim + cj] = s[x] * w;
                }
            }
            eta
        }
    };
    Ok(eta)
}

/// Dense unitary of the whole circuit on 2^n.
pub fn circuit_unitary(circ: &QuantumCircuit) -> Result<CMat> {
    circ.validate()?;
    let n = circ.n;
    let dim = 1usize << n;
    let dims = vec![2usize; n];
    let mut u = linalg::identity(dim);
    for g in &circ.gates {
        let (gsup, gmat) = sorted_gate(g);
        let mut next = Array2::from_elem((dim, dim), ZERO);
        for col in 0..dim {
            let x = u.column(col).to_owned();
            let mut y = Array1::from_elem(dim, ZERO);
            apply_embedded(&dims, &gsup, &gmat, &x, &mut y);
            next.column_mut(col).assign(&y);
        }
        u = next;
    }
    Ok(u)
}

/// Acceptance POVM element on the proof space: M = (I_m (x) <0|_a) V†
/// |1><1|_{q0} V (I_m (x) |0>_a); acceptance of proof p is <p|M|p>.
pub fn acceptance_operator(circ: &QuantumCircuit) -> Result<CMat> {
    let (n, m) = (circ.n, circ.m);
    let u = circuit_unitary(circ)?;
    let pdim = 1usize << m;
    let mut out = Array2::from_elem((pdim, pdim), ZERO);
    for p in 0..pdim {
        for q in 0..pdim {
            let (ip, iq) = (p << (n - m), q << (n - m));
            let mut acc = ZERO;
            for y in 0..1usize << n {
                if (y >> (n - 1)) & 1 == 1 {
                    // output qubit 0 (most significant) reads |1>
                    acc += u[[y, ip]].conj() * u[[y, iq]];
                }
            }
            out[[p, q]] = acc;
        }
    }
    Ok(out)
}

/// Maximum acceptance probability over proofs and the maximizing proof.
pub fn max_acceptance(circ: &QuantumCircuit) -> Result<(f64, CVec)> {
    let m = acceptance_operator(circ)?;
    let (vals, vecs) = linalg::eigh(&m)?;
    let k = vals.len() - 1;
    Ok((vals[k].clamp(0.0, 1.0), vecs.column(k).to_owned()))
}

/// QMA verifier success probability 1 - (1/r) <psi|H|psi> for a Hamiltonian
/// with r PSD terms of norm <= 1 (rescaled on ingestion if needed).
pub fn qma_verify_probability(h: &LocalHamiltonian, psi: &CVec) -> Result<f64> {
    if h.terms.is_empty() {
        return Err(Error::InvalidInput("verifier needs at least one term".into()));
    }
    let mut max_norm = 0.0f64;
    for t in &h.terms {
        let vals = linalg::eigvalsh(&t.matrix)?;
        if vals[0] < -1e-9 {
            return Err(Error::InvalidInput(format!(
                "term not PSD (lambda_min = {:.2e})",
                vals[0]
            )));
        }
        max_norm = max_norm.max(vals[vals.len() - 1]);
    }
    let scale = if max_norm > 1.0 { max_norm } else { 1.0 };
    let mut hv = Array1::from_elem(psi.len(), ZERO);
    h.apply(psi, &mut hv);
    let energy = linalg::inner(psi, &hv).re / scale;
    let r = h.terms.len() as f64;
    Ok(1.0 - energy / r)
}

#[derive(Debug, Clone)]
pub struct GeometricBound {
    /// Smallest nonzero eigenvalue over both operators.
    pub v: f64,
    /// Principal angle between the null spaces.
    pub angle: f64,
    /// 2 v sin^2(angle/2).
    pub bound: f64,
    pub lambda_min: f64,
}

/// Geometric Lemma: A1 + A2 >= 2 v sin^2(alpha/2) I for PSD A1, A2 with
/// trivially intersecting null spaces; cos(alpha) = sigma_max(Pi1 Pi2).
pub fn geometric_bound(a1: &CMat, a2: &CMat) -> Result<GeometricBound> {
    let mut v = f64::INFINITY;
    let mut projs = Vec::new();
    for a in [a1, a2] {
        let (vals, vecs) = linalg::eigh(a)?;
        let top = vals.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let tol = 1e-9 * top.max(1.0);
        if vals[0] < -tol {
            return Err(Error::InvalidInput("operators must be PSD".into()));
        }
        let mut p = Array2::from_elem(a.dim(), ZERO);
        let mut smallest_nonzero = f64::INFINITY;
        for (k, &val) in vals.iter().enumerate() {
            if val.abs() < tol {
                let col = vecs.column(k);
                for r in 0..p.nrows() {
                    for c in 0..p.ncols() {
                        p[[r, c]] += col[r] * col[c].conj();
                    }
                }
            } else {
                smallest_nonzero = smallest_nonzero.min(val);
            }
        }
        if smallest_nonzero.is_infinite() {
            return Err(Error::InvalidInput("operator is zero".into()));
        }
        v = v.min(smallest_nonzero);
        projs.push(p);
    }
    let sv = linalg::singular_values(&projs[0].dot(&projs[1]))?;
    let sigma = sv.iter().fold(0.0f64, |m, &x| m.max(x));
    if sigma >= 1.0 - 1e-10 {
        return Err(Error::Degenerate("null spaces intersect".into()));
    }
    let angle = sigma.clamp(0.0, 1.0).acos();
    let bound = 2.0 * v * (angle / 2.0).sin().powi(2);
    let lambda_min = linalg::eigvalsh(&(a1 + a2))?[0];
    if lambda_min < bound - 1e-9 {
        return Err(Error::InvalidInput(format!(
            "geometric bound violated: lambda_min {lambda_min} < bound {bound}"
        )));
    }
    Ok(GeometricBound {
        v,
        angle,
        bound,
        lambda_min,
    })
}
