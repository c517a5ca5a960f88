//! Collapsing equivalent nodes into an effective chain, and the inverse:
//! growing weighted networks from a chain.
//!
//! For ordered classes `C_0 = {s}, .., C_m = {t}` with coupling blocks `B_i`
//! between consecutive classes, the single-particle Krylov space of the
//! source is spanned by unit class vectors `u^(i)` whenever
//! `α_{i+1} u^(i+1) = B_i^T u^(i)` and `B_i u^(i+1) = α_{i+1} u^(i)`. The
//! network then transports exactly like the chain `α_1 .. α_m`.

mod plan;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::FermionTransport;
use crate::hilbert::{DenseTransport, DEFAULT_DENSE_CAP};
use crate::network::{CouplingSpec, HamiltonianKind, Partition, SpinNetwork};
use crate::pauli::{modified_flip_flop, OperatorExpr, Sign};
use crate::trace::{default_t_max, Peak};

pub use plan::{expand_chain, BranchingPlan, EngineeredNetwork, LayerSpec};

/// Residual allowed in the back-condition.
pub const COLLAPSE_TOL: f64 = 1e-10;

/// `Σ_ab γ_ab T~_ab^± / sqrt(Σ γ_ab²)` over `a ∈ I`, `b ∈ J`; `weights` is
/// row-major `|I| × |J|`.
pub fn collapsed_op(
    n: usize,
    from: &[usize],
    to: &[usize],
    weights: &[f64],
    sign: Sign,
) -> Result<OperatorExpr> {
    if from.iter().any(|a| to.contains(a)) {
        return Err(Error::Index("collapsed classes must be disjoint".into()));
    }
    if weights.len() != from.len() * to.len() {
        return Err(Error::Parameter(format!(
            "expected {} weights for a {}x{} block, got {}",
            from.len() * to.len(),
            from.len(),
            to.len(),
            weights.len()
        )));
    }
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Degenerate("collapsed operator with all-zero weights".into()));
    }
    let mut out = OperatorExpr::zero(n);
    for (k, &a) in from.iter().enumerate() {
        for (l, &b) in to.iter().enumerate() {
            let w = weights[k * to.len() + l];
            if w != 0.0 {
                out = &out + &(&modified_flip_flop(n, a, b, sign)? * (w / norm));
            }
        }
    }
    Ok(out)
}

/// Result of a successful collapse.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassChain {
    pub classes: Vec<Vec<usize>>,
    /// Unit class vectors `u^(i)`, ordered like `classes[i]`.
    pub weights: Vec<Vec<f64>>,
    /// Effective chain couplings `α_1 .. α_m`.
    pub couplings: Vec<f64>,
}

impl ClassChain {
    pub fn spec(&self) -> Result<CouplingSpec> {
        CouplingSpec::new(self.couplings.clone())
    }

    pub fn to_network(&self) -> Result<SpinNetwork> {
        self.spec()?.to_network()
    }
}

fn coupling_block(net: &SpinNetwork, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| net.coupling(rows[r], cols[c]))
}

/// Reduces `net` to its effective chain along `partition`.
pub fn collapse_network(net: &SpinNetwork, partition: &Partition) -> Result<ClassChain> {
    partition.validate(net.n(), net.ends())?;
    let classes: Vec<Vec<usize>> = partition.classes().iter().map(|c| c.nodes.clone()).collect();
    let mut class_of = vec![0usize; net.n() + 1];
    for (k, c) in classes.iter().enumerate() {
        for &v in c {
            class_of[v] = k;
        }
    }
    for e in net.edges() {
        let (a, b) = (class_of[e.i], class_of[e.j]);
        if a.abs_diff(b) != 1 {
            return Err(Error::Network(format!(
                "edge ({},{}) joins classes {a} and {b}; only consecutive classes may be coupled",
                e.i, e.j
            )));
        }
    }

    let mut weights = vec![vec![1.0]];
    let mut couplings = Vec::with_capacity(classes.len() - 1);
    for i in 0..classes.len() - 1 {
        let b = coupling_block(net, &classes[i], &classes[i + 1]);
        let u = DVector::from_column_slice(&weights[i]);
        let v = b.transpose() * &u;
        let alpha = v.norm();
        if alpha < 1e-14 {
            return Err(Error::Degenerate(format!(
                "class {} receives no amplitude from class {i}",
                i + 1
            )));
        }
        let next = v / alpha;
        let residual = (&b * &next - &u * alpha).norm();
        if residual > COLLAPSE_TOL * alpha.max(1.0) {
            return Err(Error::Collapse {
                from: i,
                to: i + 1,
                residual,
            });
        }
        couplings.push(alpha);
        weights.push(next.iter().copied().collect());
    }
    Ok(ClassChain {
        classes,
        weights,
        couplings,
    })
}

/// Refined MXY peak and, for small networks, the XY peak for contrast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportCheck {
    pub mxy: Peak,
    pub xy: Option<Peak>,
}

/// Peak fidelities over `[0, t_max]` (default `4π / α_ref`).
pub fn verify_perfect_transport(
    net: &SpinNetwork,
    t_max: Option<f64>,
    samples: usize,
) -> Result<TransportCheck> {
    let t_max = t_max.unwrap_or_else(|| default_t_max(net.reference_coupling()));
    let mxy = FermionTransport::new(net).trace(t_max, samples)?.peak;
    let xy = if net.n() <= DEFAULT_DENSE_CAP {
        Some(DenseTransport::new(net, HamiltonianKind::Xy)?.trace(t_max, samples)?.peak)
    } else {
        None
    };
    Ok(TransportCheck { mxy, xy })
}

/// Largest `|F_net(t) - F_chain(t)|` on a uniform grid of `[0, t_max]`.
pub fn quotient_deviation(net: &SpinNetwork, chain: &ClassChain, t_max: f64, points: usize) -> Result<f64> {
    let a = FermionTransport::new(net);
    let b = FermionTransport::new(&chain.to_network()?);
    let step = t_max / (points.max(2) - 1) as f64;
    Ok((0..points.max(2))
        .map(|k| {
            let t = k as f64 * step;
            (a.fidelity(t) - b.fidelity(t)).abs()
        })
        .fold(0.0, f64::max))
}

/// Amplitude that leaks, at time `t`, into directions of each class orthogonal to `u^(i)`.
pub fn complement_leakage(net: &SpinNetwork, chain: &ClassChain, t: f64) -> f64 {
    let u = crate::fermion::HoppingMatrix::from_network(net).propagator(t);
    let s = net.ends().source - 1;
    let psi: Vec<Complex64> = (0..net.n()).map(|r| u[(r, s)]).collect();
    let mut worst: f64 = 0.0;
    for (class, w) in chain.classes.iter().zip(&chain.weights) {
        let overlap: Complex64 = class.iter().zip(w).map(|(&v, &x)| psi[v - 1] * x).sum();
        let rest: f64 = class
            .iter()
            .zip(w)
            .map(|(&v, &x)| (psi[v - 1] - overlap * x).norm_sqr())
            .sum();
        worst = worst.max(rest.sqrt());
    }
    worst
}
