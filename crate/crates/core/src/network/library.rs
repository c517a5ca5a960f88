//! Bundled example networks.

use super::{CouplingSpec, Ends, Partition, SpinNetwork};
use crate::collapse::{expand_chain, BranchingPlan, EngineeredNetwork};
use crate::error::{Error, Result};

/// Three-spin chain with couplings `1/√2`; transfers perfectly at `t = π`.
pub fn lambda3() -> SpinNetwork {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    SpinNetwork::new(3, Ends::new(1, 3), [(1, 2, a), (2, 3, a)], None).expect("static network")
}

/// Two spins joined by one unit bond.
pub fn two_spin() -> SpinNetwork {
    SpinNetwork::new(2, Ends::new(1, 2), [(1, 2, 1.0)], None).expect("static network")
}

/// Source fanning out to three middle nodes that all meet at the target.
pub fn fig3() -> SpinNetwork {
    SpinNetwork::new(
        5,
        Ends::new(1, 5),
        [(1, 2, 1.0), (1, 3, 1.0), (1, 4, 1.0), (2, 5, 1.0), (3, 5, 1.0), (4, 5, 1.0)],
        Some(Partition::from_lists(&[vec![1], vec![2, 3, 4], vec![5]])),
    )
    .expect("static network")
}

/// Two unit-coupled paths `1-2-3-6` and `1-4-5-6`.
pub fn fig5() -> SpinNetwork {
    SpinNetwork::new(
        6,
        Ends::new(1, 6),
        [(1, 2, 1.0), (1, 4, 1.0), (2, 3, 1.0), (3, 6, 1.0), (4, 5, 1.0), (5, 6, 1.0)],
        Some(Partition::from_lists(&[vec![1], vec![2, 4], vec![3, 5], vec![6]])),
    )
    .expect("static network")
}

fn open_unit(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(Error::Parameter(format!("{name} = {x} must lie in (0, 1)")))
    }
}

fn complement(x: f64) -> f64 {
    (1.0 - x * x).sqrt()
}

/// Two disjoint paths with branch weights `(γ, √(1-γ²))`.
pub fn fig7a_plan(gamma: f64) -> Result<BranchingPlan> {
    let g = open_unit("gamma", gamma)?;
    let mut plan = BranchingPlan::new(vec![vec![1], vec![2, 4], vec![3, 5], vec![6]])?;
    plan.link(1, 2, Some(g))?.link(1, 4, Some(complement(g)))?;
    plan.link(2, 3, None)?.link(4, 5, None)?;
    plan.link(3, 6, None)?.link(5, 6, None)?;
    Ok(plan)
}

/// Path `1-5-6-7` plus a branch at node 2 into nodes 3 and 4.
pub fn fig7b_plan(gamma1: f64, gamma2: f64) -> Result<BranchingPlan> {
    let (g1, g2) = (open_unit("gamma1", gamma1)?, open_unit("gamma2", gamma2)?);
    let mut plan = BranchingPlan::new(vec![vec![1], vec![2, 5], vec![3, 4, 6], vec![7]])?;
    plan.link(1, 2, Some(g1))?.link(1, 5, Some(complement(g1)))?;
    plan.link(2, 3, Some(g2))?.link(2, 4, Some(complement(g2)))?.link(5, 6, None)?;
    plan.link(3, 7, None)?.link(4, 7, None)?.link(6, 7, None)?;
    Ok(plan)
}

/// Three paths through four inner layers, with a complete bipartite block
/// between the second and third inner layers.
pub fn fig8_plan(weights: [f64; 3]) -> Result<BranchingPlan> {
    for w in weights {
        open_unit("path weight", w)?;
    }
    let layers = vec![
        vec![1],
        vec![2, 3, 4],
        vec![5, 6, 7],
        vec![8, 9, 10],
        vec![11, 12, 13],
        vec![14],
    ];
    let mut plan = BranchingPlan::new(layers)?;
    for (k, &w) in weights.iter().enumerate() {
        plan.link(1, 2 + k, Some(w))?;
        plan.link(2 + k, 5 + k, None)?;
        plan.link(8 + k, 11 + k, None)?;
        plan.link(11 + k, 14, None)?;
    }
    plan.complete_layer(2, Some(weights.to_vec()))?;
    Ok(plan)
}

/// Mirror-symmetric four-node chain spec `(√3, 2, √3)`.
fn pst4() -> CouplingSpec {
    CouplingSpec::pst(4, 1.0).expect("static spec")
}

/// Two-path family; at `γ = 1` the second path vanishes and the plain
/// four-node chain is returned.
pub fn fig7a(gamma: f64) -> Result<SpinNetwork> {
    if gamma == 1.0 {
        return pst4().to_network();
    }
    Ok(expand_chain(&pst4(), &fig7a_plan(gamma)?)?.network)
}

pub fn fig7b(gamma1: f64, gamma2: f64) -> Result<SpinNetwork> {
    Ok(expand_chain(&pst4(), &fig7b_plan(gamma1, gamma2)?)?.network)
}

/// Fourteen-node network collapsing onto the six-node mirror chain.
pub fn fig8(weights: [f64; 3]) -> Result<EngineeredNetwork> {
    expand_chain(&CouplingSpec::pst(6, 1.0)?, &fig8_plan(weights)?)
}
