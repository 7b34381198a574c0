//! hamlab command-line front end.
//!
//! Exit codes: 0 success (including UNSAT verdicts — those are answers,
//! not failures), 1 domain/runtime error, 2 usage error. All output is
//! deterministic for a fixed (subcommand, flags, seed): CSV floats are
//! printed with 17 significant digits, complex numbers as {re, im}.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use serde_json::{json, Value};

use hamlab::ham::{
    build_aklt, build_classical_ising, build_heisenberg, build_tfim, matrix_from_json,
    matrix_to_json, BoundaryCondition, LocalHamiltonian, Spin,
};
use hamlab::linalg::{self, CVec, ZERO};
use hamlab::{agsp, clock, commuting, gadgets, qsat2, spectra, tensornet};

fn fmt(x: f64) -> String {
    // normalize -0.0 so equal values always print identically
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.16e}", x)
}

#[derive(Parser)]
#[command(name = "hamlab", version = hamlab::SCHEMA_VERSION, about = "quantum Hamiltonian workbench")]
struct Cli {
    /// Write the primary artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    Open,
    Periodic,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::Open => BoundaryCondition::Open,
            Bc::Periodic => BoundaryCondition::Periodic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Tfim,
    Ising,
    Heisenberg,
    Aklt,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Read a Hamiltonian JSON file instead of building a model.
    #[arg(long, conflicts_with = "model")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long = "J", default_value_t = 1.0)]
    j: f64,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    /// Heisenberg couplings (Jx, Jy, Jz) and field hz.
    #[arg(long, default_value_t = 1.0)]
    jx: f64,
    #[arg(long, default_value_t = 1.0)]
    jy: f64,
    #[arg(long, default_value_t = 1.0)]
    jz: f64,
    #[arg(long, default_value_t = 0.0)]
    hz: f64,
    #[arg(long, value_enum, default_value = "open")]
    bc: Bc,
}

impl ModelArgs {
    fn load(&self) -> anyhow::Result<LocalHamiltonian> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path)?;
            let v: Value = serde_json::from_str(&text)?;
            return Ok(LocalHamiltonian::from_json(&v)?);
        }
        let h = match self.model {
            Some(Model::Tfim) => build_tfim(self.n, self.j, self.g, self.bc.into())?,
            Some(Model::Ising) => {
                let mut edges = Vec::new();
                for i in 0..self.n - 1 {
                    edges.push((i, i + 1, self.j));
                }
                if matches!(self.bc, Bc::Periodic) {
                    edges.push((self.n - 1, 0, self.j));
                }
                build_classical_ising(&edges, &vec![self.g; self.n], 1.0)?
            }
            Some(Model::Heisenberg) => {
                build_heisenberg(self.n, self.jx, self.jy, self.jz, self.hz, self.bc.into())?
            }
            Some(Model::Aklt) => build_aklt(self.n, self.bc.into())?,
            None => anyhow::bail!("either --model or --input is required"),
        };
        Ok(h)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Direct,
    Unary,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a model Hamiltonian and emit it as JSON.
    Build(ModelArgs),
    /// Full dense spectrum as CSV, ascending.
    Spectrum(ModelArgs),
    /// Gibbs-state thermal expectations at inverse temperature beta.
    Gibbs {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        beta: f64,
    },
    /// Ground-state two-point correlation between two sites.
    Correlate {
        #[command(flatten)]
        model: ModelArgs,
        /// Observable on both sites: sx, sy, or sz.
        #[arg(long, default_value = "sz")]
        op: String,
        #[arg(long)]
        site_m: usize,
        #[arg(long)]
        site_n: usize,
    },
    /// Ground-state entanglement entropy across a cut.
    Entropy {
        #[command(flatten)]
        model: ModelArgs,
        /// Cut position (default: middle of the chain).
        #[arg(long)]
        cut: Option<usize>,
    },
    /// Mean-field Ising magnetization over a temperature grid (CSV).
    Meanfield {
        #[arg(long = "D")]
        d: u32,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        #[arg(long = "T-min")]
        t_min: f64,
        #[arg(long = "T-max")]
        t_max: f64,
        #[arg(long = "T-steps")]
        t_steps: usize,
    },
    /// DMRG ground-state search.
    Dmrg {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 16)]
        dmax: usize,
        #[arg(long, default_value_t = 20)]
        sweeps: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Random MERA network: causal-cone reduced density matrix stats.
    Mera {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        site: usize,
    },
    /// Solve a quantum 2-SAT instance.
    Qsat2 {
        #[arg(long)]
        input: PathBuf,
        /// Re-check the assignment against every clause (and the dense
        /// oracle when the instance is small enough).
        #[arg(long)]
        verify: bool,
    },
    /// Compile a verifier circuit into a clock Hamiltonian.
    CompileKitaev {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "direct")]
        encoding: EncodingArg,
        /// Also write the assembled local Hamiltonian JSON here.
        #[arg(long)]
        emit_hamiltonian: Option<PathBuf>,
        /// Report the history-state energy for the zero proof.
        #[arg(long)]
        history_energy: bool,
    },
    /// 3-local -> 2-local gadget closeness sweep (CSV).
    Gadget {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated perturbation parameters.
        #[arg(long, default_value = "0.1,0.05,0.025")]
        delta_grid: String,
    },
    /// Structure-lemma decomposition of a commuting pair.
    Commuting {
        /// JSON file with fields dims = [dx, dy, dz], a, b (matrices).
        #[arg(long)]
        input: PathBuf,
    },
    /// Chebyshev AGSP certificate, optional truncation, or entropy scan.
    Agsp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        cut: Option<usize>,
        #[arg(long, default_value_t = 4)]
        ell: usize,
        /// Spectral lower cutoff (default: 0.9 * measured gap).
        #[arg(long)]
        eps: Option<f64>,
        /// Truncation window size (with --t).
        #[arg(long)]
        s: Option<usize>,
        /// Truncation level (with --s).
        #[arg(long)]
        t: Option<f64>,
        /// Emit the (n, g, mid-cut entropy) scan CSV instead.
        #[arg(long)]
        scan: bool,
        #[arg(long, value_delimiter = ',', default_value = "1.0,2.0")]
        g_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "6,8,10")]
        n_values: Vec<usize>,
    },
}

fn complex_json(z: hamlab::linalg::C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn ground_state(h: &LocalHamiltonian) -> anyhow::Result<CVec> {
    Ok(spectra::lanczos_ground(h, 1e-12, 2000, 7)?.1)
}

fn site_operator(h: &LocalHamiltonian, name: &str) -> anyhow::Result<hamlab::linalg::CMat> {
    let spin = match h.dims[0] {
        2 => Spin::Half,
        3 => Spin::One,
        d => anyhow::bail!("no named operators for local dimension {d}"),
    };
    let ops = hamlab::ham::spin_operators(spin);
    Ok(match name {
        "sx" => ops.sx,
        "sy" => ops.sy,
        "sz" => ops.sz,
        other => anyhow::bail!("unknown observable {other} (use sx, sy, sz)"),
    })
}

fn run(cli: Cli) -> anyhow::Result<String> {
    match cli.cmd {
        Cmd::Build(args) => {
            let h = args.load()?;
            Ok(serde_json::to_string_pretty(&h.to_json())? + "\n")
        }
        Cmd::Spectrum(args) => {
            let h = args.load()?;
            let spec = spectra::dense_spectrum(&h, false)?;
            let mut out = String::from("index,eigenvalue\n");
            for (i, v) in spec.eigenvalues.iter().enumerate() {
                writeln!(out, "{i},{}", fmt(*v))?;
            }
            Ok(out)
        }
        Cmd::Gibbs { model, beta } => {
            let h = model.load()?;
            let z = spectra::partition_function(&h, beta)?;
            let rho = spectra::gibbs_state(&h, beta)?;
            let hm = h.assemble()?;
            let prod = rho.matrix.dot(&hm);
            let energy: f64 = (0..prod.nrows()).map(|k| prod[[k, k]].re).sum();
            Ok(serde_json::to_string_pretty(&json!({
                "beta": beta,
                "partition_function": z,
                "energy": energy,
            }))? + "\n")
        }
        Cmd::Correlate {
            model,
            op,
            site_m,
            site_n,
        } => {
            let h = model.load()?;
            let o = site_operator(&h, &op)?;
            let psi = ground_state(&h)?;
            let v = spectra::two_point_correlation(
                &spectra::State::Pure(&psi),
                &h.dims,
                &o,
                &o,
                site_m,
                site_n,
            )?;
            Ok(serde_json::to_string_pretty(&json!({
                "op": op,
                "site_m": site_m,
                "site_n": site_n,
                "value": complex_json(v),
            }))? + "\n")
        }
        Cmd::Entropy { model, cut } => {
            let h = model.load()?;
            let cut = cut.unwrap_or(h.n / 2);
            let psi = ground_state(&h)?;
            let schmidt = spectra::schmidt_coefficients(&psi, &h.dims, cut)?;
            let entropy = spectra::entropy_from_schmidt(&schmidt);
            Ok(serde_json::to_string_pretty(&json!({
                "cut": cut,
                "entropy_bits": entropy,
                "schmidt": schmidt,
            }))? + "\n")
        }
        Cmd::Meanfield {
            d,
            j,
            t_min,
            t_max,
            t_steps,
        } => {
            let grid: Vec<f64> = (0..t_steps)
                .map(|k| t_min + (t_max - t_min) * k as f64 / (t_steps.max(2) - 1) as f64)
                .collect();
            let rows = hamlab::meanfield::mf_magnetization_vs_t(d, j, &grid)?;
            let mut out = String::from("T,m,free_energy\n");
            for (t, m, f) in rows {
                writeln!(out, "{},{},{}", fmt(t), fmt(m), fmt(f))?;
            }
            Ok(out)
        }
        Cmd::Dmrg {
            model,
            dmax,
            sweeps,
            tol,
            seed,
        } => {
            let h = model.load()?;
            let res = tensornet::dmrg_run(&h, dmax, sweeps, tol, seed)?;
            Ok(serde_json::to_string_pretty(&json!({
                "energy": res.energy,
                "converged": res.converged,
                "sweeps_used": res.sweeps_used,
                "sweep_energies": res.sweep_energies,
                "bond_dims": res.mps.bond_dims(),
            }))? + "\n")
        }
        Cmd::Mera { n, d, seed, site } => {
            let net = tensornet::mera_build_random(n, d, seed)?;
            let (rdm, touched) = tensornet::mera_causal_rdm(&net, site)?;
            let sz = tensornet::mera_local_expectation(&net, &gadgets::pauli(3), site)?;
            let purity: f64 = {
                let sq = rdm.matrix.dot(&rdm.matrix);
                (0..sq.nrows()).map(|k| sq[[k, k]].re).sum()
            };
            Ok(serde_json::to_string_pretty(&json!({
                "n": n,
                "site": site,
                "tensors_touched": touched,
                "sz_expectation": sz,
                "rdm_purity": purity,
            }))? + "\n")
        }
        Cmd::Qsat2 { input, verify } => {
            let text = std::fs::read_to_string(&input)?;
            let v: Value = serde_json::from_str(&text)?;
            let inst = qsat2::QsatInstance::from_json(&v)?;
            let n = inst.n;
            let clauses: Vec<((usize, usize), hamlab::linalg::CMat)> = inst
                .clauses
                .iter()
                .map(|(k, m)| (*k, m.clone()))
                .collect();
            let res = qsat2::solve(inst)?;
            let mut payload = json!({
                "verdict": match res.verdict {
                    qsat2::Verdict::Sat => "SAT",
                    qsat2::Verdict::Unsat => "UNSAT",
                },
            });
            if let Some(w) = &res.witness {
                payload["witness"] = json!(w);
            }
            if matches!(res.verdict, qsat2::Verdict::Sat) {
                let blocks: Vec<Value> = res
                    .assignment
                    .iter()
                    .map(|(qs, state)| {
                        json!({
                            "qubits": qs,
                            "state": state.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                payload["assignment"] = json!(blocks);
                if verify {
                    let psi = res.dense_state(n)?;
                    let mut max_resid = 0.0f64;
                    let dims = vec![2usize; n];
                    for ((i, j), pi) in &clauses {
                        let mut out = Array1::from_elem(psi.len(), ZERO);
                        hamlab::ham::apply_embedded(&dims, &[*i, *j], pi, &psi, &mut out);
                        let overlap: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        max_resid = max_resid.max(overlap);
                    }
                    payload["max_clause_residual"] = json!(max_resid);
                    payload["verified"] = json!(max_resid < 1e-8);
                }
            } else if verify {
                // UNSAT: dense oracle where feasible
                let mut h = LocalHamiltonian::qubits(
                    n,
                    hamlab::ham::Metadata {
                        model: "qsat2".into(),
                        params: Default::default(),
                    },
                );
                for ((i, j), pi) in &clauses {
                    h.add_term(vec![*i, *j], pi.clone())?;
                }
                let spec = spectra::dense_spectrum(&h, false)?;
                payload["oracle_lambda_min"] = json!(spec.ground_energy);
                payload["verified"] = json!(spec.ground_energy > 1e-8);
            }
            Ok(serde_json::to_string_pretty(&payload)? + "\n")
        }
        Cmd::CompileKitaev {
            input,
            encoding,
            emit_hamiltonian,
            history_energy,
        } => {
            let text = std::fs::read_to_string(&input)?;
            let v: Value = serde_json::from_str(&text)?;
            let circ = clock::QuantumCircuit::from_json(&v)?;
            let enc = match encoding {
                EncodingArg::Direct => clock::Encoding::Direct,
                EncodingArg::Unary => clock::Encoding::Unary,
            };
            let compiled = clock::compile(&circ, enc)?;
            let total = compiled.total();
            let mut payload = json!({
                "encoding": match enc {
                    clock::Encoding::Direct => "direct",
                    clock::Encoding::Unary => "unary",
                },
                "gates": circ.gates.len(),
                "sites": total.n,
                "dims": total.dims,
                "terms": total.terms.len(),
            });
            if history_energy {
                let proof = {
                    let mut p = Array1::from_elem(1usize << circ.m, ZERO);
                    p[0] = linalg::ONE;
                    p
                };
                let eta = clock::history_state(&circ, &proof, enc)?;
                let mut out = Array1::from_elem(eta.len(), ZERO);
                total.apply(&eta, &mut out);
                let energy: f64 = eta
                    .iter()
                    .zip(out.iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum();
                payload["history_energy"] = json!(energy);
            }
            if let Some(path) = emit_hamiltonian {
                std::fs::write(&path, serde_json::to_string_pretty(&total.to_json())?)?;
            }
            Ok(serde_json::to_string_pretty(&payload)? + "\n")
        }
        Cmd::Gadget { input, delta_grid } => {
            let text = std::fs::read_to_string(&input)?;
            let v: Value = serde_json::from_str(&text)?;
            let h = LocalHamiltonian::from_json(&v)?;
            let grid: Vec<f64> = delta_grid
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()?;
            let dec = gadgets::decompose_3local(&h)?;
            let rows = gadgets::validate_gadget(&dec, &grid)?;
            let mut out =
                String::from("delta,max_j_deviation,lambda_min_htilde,lambda_min_heff\n");
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt(r.delta),
                    fmt(r.epsilon),
                    fmt(r.lambda_min_htilde),
                    fmt(r.lambda_min_heff)
                )?;
            }
            Ok(out)
        }
        Cmd::Commuting { input } => {
            let text = std::fs::read_to_string(&input)?;
            let v: Value = serde_json::from_str(&text)?;
            let dims_v = v
                .get("dims")
                .and_then(|d| d.as_array())
                .ok_or_else(|| anyhow::anyhow!("missing dims = [dx, dy, dz]"))?;
            if dims_v.len() != 3 {
                anyhow::bail!("dims must have exactly three entries");
            }
            let dx = dims_v[0].as_u64().unwrap_or(0) as usize;
            let dy = dims_v[1].as_u64().unwrap_or(0) as usize;
            let dz = dims_v[2].as_u64().unwrap_or(0) as usize;
            let a = matrix_from_json(v.get("a").ok_or_else(|| anyhow::anyhow!("missing a"))?)?;
            let b = matrix_from_json(v.get("b").ok_or_else(|| anyhow::anyhow!("missing b"))?)?;
            let dec = commuting::structure_decompose(&a, &b, (dx, dy, dz))?;
            let resid = commuting::decomposition_residual(&a, &b, (dx, dy, dz), &dec)?;
            let energy = commuting::decoupled_ground_energy(&a, &b, (dx, dy, dz), &dec)?;
            let blocks: Vec<Value> = dec
                .blocks
                .iter()
                .map(|blk| {
                    json!({
                        "d1": blk.d1,
                        "d2": blk.d2,
                        "isometry": matrix_to_json(&blk.isometry),
                    })
                })
                .collect();
            Ok(serde_json::to_string_pretty(&json!({
                "dim_y": dec.dim_y,
                "blocks": blocks,
                "conjugation_residual": resid,
                "decoupled_ground_energy": energy,
            }))? + "\n")
        }
        Cmd::Agsp {
            model,
            cut,
            ell,
            eps,
            s,
            t,
            scan,
            g_values,
            n_values,
        } => {
            if scan {
                let rows = agsp::area_law_scan(&g_values, &n_values)?;
                let mut out = String::from("n,g,entropy_bits\n");
                for r in rows {
                    writeln!(out, "{},{},{}", r.n, fmt(r.g), fmt(r.entropy))?;
                }
                return Ok(out);
            }
            let h = model.load()?;
            let cut = cut.unwrap_or(h.n / 2);
            let spec = spectra::dense_spectrum(&h, false)?;
            let eps = eps.unwrap_or(spec.gap * 0.9);
            let cert = agsp::build_agsp(&h, ell, eps, cut)?;
            let mut payload = json!({
                "cut": cert.cut,
                "ell": cert.ell,
                "eps": eps,
                "delta_bound": cert.delta_bound,
                "delta_measured": cert.delta_measured,
                "d_measured": cert.d_measured,
                "invariance_error": cert.invariance_error,
            });
            if let (Some(s), Some(t)) = (s, t) {
                let tr = agsp::truncate_hamiltonian(&h, cut, s, t)?;
                let norm = linalg::hermitian_norm(&tr.h_prime)?;
                payload["truncation"] = json!({
                    "s": tr.s,
                    "t": tr.t,
                    "window_start": tr.window_start,
                    "norm_bound": tr.norm_bound,
                    "norm_measured": norm,
                });
            }
            Ok(serde_json::to_string_pretty(&payload)? + "\n")
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok(text) => {
            if let Some(path) = output {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
