use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use spinet::collapse::{collapse_network, expand_chain, verify_perfect_transport, BranchingPlan};
use spinet::conditions::{check_perfect_transport_dense, hamiltonian_support_check, Support};
use spinet::fermion::FermionTransport;
use spinet::hilbert::{dense_cap_from_env, DenseTransport};
use spinet::network::{hamiltonian, library, parse_network, CouplingSpec, HamiltonianKind, Partition, SpinNetwork};
use spinet::trace::{default_t_max, FidelityTrace};
use spinet::walk::{skeleton, table1_check, walk_operators};
use thiserror::Error;

use crate::{Backend, Command};

#[derive(Debug, Error)]
pub enum Failure {
    #[error(transparent)]
    Lib(#[from] spinet::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    /// 1 for input errors, 2 for failed collapse or synthesis, 3 for capacity.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(spinet::Error::Capacity { .. }) => 3,
            Failure::Lib(spinet::Error::Collapse { .. } | spinet::Error::Synthesis(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success = 0,
    CheckFailed = 2,
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Failure::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Failure::Io {
        path: path.to_owned(),
        source,
    })
}

fn load(path: &Path) -> Result<SpinNetwork> {
    parse_network(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(",")
}

/// Samples the trace with the chosen backend; `auto` uses fermions for MXY.
fn trace(
    net: &SpinNetwork,
    kind: HamiltonianKind,
    backend: Backend,
    t_max: f64,
    samples: usize,
) -> Result<(FidelityTrace, &'static str)> {
    let use_fermion = match backend {
        Backend::Fermion if kind != HamiltonianKind::Mxy => {
            return Err(Failure::Usage(format!(
                "the fermion backend only represents the mxy kind, not {kind}; use --backend dense"
            )))
        }
        Backend::Fermion => true,
        Backend::Dense => false,
        Backend::Auto => kind == HamiltonianKind::Mxy,
    };
    if use_fermion {
        Ok((FermionTransport::new(net).trace(t_max, samples)?, "fermion"))
    } else {
        let dense = DenseTransport::with_cap(net, kind, dense_cap_from_env())?;
        Ok((dense.trace(t_max, samples)?, "dense"))
    }
}

fn csv_with_header(net: &SpinNetwork, kind: HamiltonianKind, tr: &FidelityTrace) -> String {
    format!("# kind {kind}\n# alpha_ref {}\n{}", net.reference_coupling(), tr.to_csv())
}

fn peak_lines(out: &mut String, net: &SpinNetwork, tr: &FidelityTrace) {
    let a = net.reference_coupling();
    writeln!(out, "alpha_ref: {a:.9}").unwrap();
    writeln!(out, "peak_time: {:.9}", tr.peak.time).unwrap();
    writeln!(out, "peak_scaled_time: {:.9}", a * tr.peak.time).unwrap();
    writeln!(out, "peak_fidelity: {:.9}", tr.peak.fidelity).unwrap();
}

pub fn run(command: Command) -> Result<Outcome> {
    let mut out = String::new();
    let outcome = match command {
        Command::Simulate {
            network,
            kind,
            backend,
            tmax,
            samples,
            out: csv,
        } => {
            let net = load(&network)?;
            let kind = kind.into();
            let t_max = tmax.unwrap_or_else(|| default_t_max(net.reference_coupling()));
            let (tr, used) = trace(&net, kind, backend, t_max, samples)?;
            writeln!(out, "kind: {kind}").unwrap();
            writeln!(out, "backend: {used}").unwrap();
            writeln!(out, "nodes: {}", net.n()).unwrap();
            writeln!(out, "t_max: {t_max:.9}").unwrap();
            writeln!(out, "samples: {samples}").unwrap();
            peak_lines(&mut out, &net, &tr);
            if let Some(path) = csv {
                write(&path, &csv_with_header(&net, kind, &tr))?;
            }
            Outcome::Success
        }
        Command::CheckUnitary { network, kind, time } => {
            let net = load(&network)?;
            let dense = DenseTransport::with_cap(&net, kind.into(), dense_cap_from_env())?;
            let report = check_perfect_transport_dense(&dense.propagator(time), net.ends())?;
            out += &report.render();
            if !out.ends_with('\n') {
                out.push('\n');
            }
            if report.verdict {
                Outcome::Success
            } else {
                Outcome::CheckFailed
            }
        }
        Command::CheckHamiltonian { network, kind } => {
            let net = load(&network)?;
            let h = hamiltonian(&net, kind.into())?;
            let r = hamiltonian_support_check(&h, net.ends())?;
            let support = match r.support {
                Support::G => "G",
                Support::GTilde => "Gt",
                Support::Mixed => "mixed",
                Support::Empty => "empty",
            };
            let opt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
            writeln!(out, "support: {support}").unwrap();
            writeln!(out, "anti_eigen: {}", r.anti_eigen.map_or("n/a".into(), |b| b.to_string())).unwrap();
            writeln!(out, "square_residual: {}", opt(r.square_residual)).unwrap();
            writeln!(out, "fourth_residual: {}", opt(r.fourth_residual)).unwrap();
            writeln!(out, "conditions: {}", r.holds()).unwrap();
            Outcome::Success
        }
        Command::Walk {
            network,
            kind,
            orders,
            skeleton_only,
        } => {
            let net = load(&network)?;
            let h = hamiltonian(&net, kind.into())?;
            for w in walk_operators(&h, net.ends().source, orders)? {
                if w.expr.is_empty() {
                    continue;
                }
                if skeleton_only {
                    writeln!(out, "order {}: {}", w.order, skeleton(&w)).unwrap();
                } else {
                    writeln!(out, "order {}", w.order).unwrap();
                    writeln!(out, "{}", w.expr.render()).unwrap();
                }
            }
            Outcome::Success
        }
        Command::Collapse { network, partition } => {
            let net = load(&network)?;
            let partition = match partition {
                Some(text) => Partition::parse_compact(&text)?,
                None => net
                    .partition()
                    .cloned()
                    .ok_or_else(|| Failure::Usage("no partition given and none in the network file".into()))?,
            };
            partition.validate(net.n(), net.ends())?;
            let chain = collapse_network(&net, &partition)?;
            for (k, (c, w)) in chain.classes.iter().zip(&chain.weights).enumerate() {
                let nodes: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                writeln!(out, "class {k}: {} weights {}", nodes.join(","), join(w)).unwrap();
            }
            writeln!(out, "chain: {}", join(&chain.couplings)).unwrap();
            writeln!(out, "pst: {}", chain.spec()?.is_pst(1e-9)).unwrap();
            Outcome::Success
        }
        Command::Synth { chain, plan, out: dest } => {
            let spec = CouplingSpec::parse(&chain)?;
            let plan = BranchingPlan::parse(&read(&plan)?)?;
            let e = expand_chain(&spec, &plan)?;
            write(&dest, &e.to_file())?;
            let check = verify_perfect_transport(&e.network, None, 2001)?;
            writeln!(out, "nodes: {}", e.network.n()).unwrap();
            writeln!(out, "edges: {}", e.network.edges().len()).unwrap();
            writeln!(out, "chain: {}", join(spec.couplings())).unwrap();
            writeln!(out, "mxy_peak_time: {:.9}", check.mxy.time).unwrap();
            writeln!(out, "mxy_peak_fidelity: {:.9}", check.mxy.fidelity).unwrap();
            if let Some(xy) = check.xy {
                writeln!(out, "xy_peak_fidelity: {:.9}", xy.fidelity).unwrap();
            }
            Outcome::Success
        }
        Command::Demo { out: dir, samples } => {
            fs::create_dir_all(&dir).map_err(|source| Failure::Io {
                path: dir.clone(),
                source,
            })?;
            let nets = [("fig3", library::fig3()), ("fig7c", library::fig7b(0.8, 0.5)?)];
            for (name, net) in &nets {
                for kind in [HamiltonianKind::Xy, HamiltonianKind::Mxy] {
                    let t_max = default_t_max(net.reference_coupling());
                    let (tr, _) = trace(net, kind, Backend::Auto, t_max, samples)?;
                    let file = format!("{name}_{kind}.csv");
                    write(&dir.join(&file), &csv_with_header(net, kind, &tr))?;
                    writeln!(out, "{file}: peak_fidelity {:.9} at t {:.9}", tr.peak.fidelity, tr.peak.time).unwrap();
                }
            }
            let mut table = String::new();
            for kind in [HamiltonianKind::Xy, HamiltonianKind::Mxy] {
                for row in table1_check(&library::fig5(), kind)? {
                    let scale = row.scale.map_or("none".into(), |s| s.to_string());
                    writeln!(table, "{kind} order {} scale {scale} match {}", row.order, row.matches()).unwrap();
                    for d in &row.diff {
                        writeln!(table, "  {d}").unwrap();
                    }
                }
            }
            write(&dir.join("table1.txt"), &table)?;
            out += &table;
            Outcome::Success
        }
    };
    print!("{out}");
    Ok(outcome)
}
