//! Branching plans and chain expansion.
//!
//! Plan file format (one directive per line, `#` starts a comment):
//!
//! ```text
//! layer <node> [<node> ...]     # consecutive layers, first = source, last = target
//! link <parent> <child> [w]     # bond between consecutive layers, w in (0,1]
//! complete <k> [w ...]          # full bipartite bonds from layer k to k+1
//! ```
//!
//! Between two layers the links must form either a split (every child has
//! one parent) or a merge (every parent has one child). Split weights are
//! relative within siblings; merges carry no weights. `complete` takes
//! optional child weights for layer `k + 1` (uniform by default).

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;

use super::{collapse_network, quotient_deviation};
use crate::error::{Error, Result};
use crate::network::{serialize_network, CouplingSpec, Ends, Partition, SpinNetwork};
use crate::trace::default_t_max;

/// Bonds between one layer and the next.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    /// `(parent, child, weight)` links.
    Links(Vec<(usize, usize, Option<f64>)>),
    /// Rank-1 complete bipartite bonds with optional child weights.
    Complete(Option<Vec<f64>>),
}

/// Ordered node layers plus the bond pattern between consecutive layers.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingPlan {
    layers: Vec<Vec<usize>>,
    bonds: Vec<LayerSpec>,
}

fn synth(msg: impl Into<String>) -> Error {
    Error::Synthesis(msg.into())
}

fn check_weight(w: f64) -> Result<f64> {
    if w.is_finite() && w > 0.0 && w <= 1.0 {
        Ok(w)
    } else {
        Err(Error::Parameter(format!("plan weight {w} must lie in (0, 1]")))
    }
}

impl BranchingPlan {
    /// Plan with the given layers and no bonds yet.
    pub fn new(layers: Vec<Vec<usize>>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(synth("a plan needs at least two layers"));
        }
        if layers.iter().any(Vec::is_empty) {
            return Err(synth("plan layers must be non-empty"));
        }
        let n = layers.iter().map(Vec::len).sum();
        let ends = Ends::new(layers[0][0], layers[layers.len() - 1][0]);
        Partition::from_lists(&layers).validate(n, ends)?;
        let bonds = vec![LayerSpec::Links(Vec::new()); layers.len() - 1];
        Ok(BranchingPlan { layers, bonds })
    }

    /// Straight chain of `m` nodes.
    pub fn chain(m: usize) -> Result<Self> {
        let mut plan = BranchingPlan::new((1..=m).map(|v| vec![v]).collect())?;
        for v in 1..m {
            plan.link(v, v + 1, None)?;
        }
        Ok(plan)
    }

    /// Layers of the given sizes (numbered consecutively), fully bonded.
    pub fn complete(sizes: &[usize]) -> Result<Self> {
        let mut next = 1;
        let layers = sizes
            .iter()
            .map(|&s| {
                let l: Vec<usize> = (next..next + s).collect();
                next += s;
                l
            })
            .collect();
        let mut plan = BranchingPlan::new(layers)?;
        for k in 0..sizes.len() - 1 {
            plan.complete_layer(k, None)?;
        }
        Ok(plan)
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn bonds(&self) -> &[LayerSpec] {
        &self.bonds
    }

    pub fn n(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn partition(&self) -> Partition {
        Partition::from_lists(&self.layers)
    }

    fn layer_of(&self, v: usize) -> Option<usize> {
        self.layers.iter().position(|l| l.contains(&v))
    }

    /// Adds a bond `parent -> child` between consecutive layers.
    pub fn link(&mut self, parent: usize, child: usize, weight: Option<f64>) -> Result<&mut Self> {
        let k = self
            .layer_of(parent)
            .ok_or_else(|| synth(format!("node {parent} is in no layer")))?;
        if self.layer_of(child) != Some(k + 1) {
            return Err(synth(format!(
                "link {parent} -> {child} must join layer {k} to layer {}",
                k + 1
            )));
        }
        let weight = weight.map(check_weight).transpose()?;
        match &mut self.bonds[k] {
            LayerSpec::Links(links) => {
                if links.iter().any(|&(p, c, _)| p == parent && c == child) {
                    return Err(synth(format!("repeated link {parent} -> {child}")));
                }
                links.push((parent, child, weight));
            }
            LayerSpec::Complete(_) => {
                return Err(synth(format!("layer {k} is already complete")));
            }
        }
        Ok(self)
    }

    /// Bonds every node of layer `k` to every node of layer `k + 1`.
    pub fn complete_layer(&mut self, k: usize, weights: Option<Vec<f64>>) -> Result<&mut Self> {
        if k + 1 >= self.layers.len() {
            return Err(synth(format!("no layer after layer {k}")));
        }
        if let Some(w) = &weights {
            if w.len() != self.layers[k + 1].len() {
                return Err(synth(format!(
                    "layer {} has {} nodes but {} weights were given",
                    k + 1,
                    self.layers[k + 1].len(),
                    w.len()
                )));
            }
            for &x in w {
                check_weight(x)?;
            }
        }
        if matches!(&self.bonds[k], LayerSpec::Links(l) if !l.is_empty()) {
            return Err(synth(format!("layer {k} already has explicit links")));
        }
        self.bonds[k] = LayerSpec::Complete(weights);
        Ok(self)
    }

    /// Parses the plan file format.
    pub fn parse(text: &str) -> Result<Self> {
        let perr = |line, msg: String| Error::Parse { line, msg };
        let mut layers = Vec::new();
        let mut directives = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let nums = |ts: &[&str]| -> Result<Vec<f64>> {
                ts.iter()
                    .map(|t| t.parse::<f64>().map_err(|_| perr(line, format!("bad number `{t}`"))))
                    .collect()
            };
            let idx_of = |t: &str| -> Result<usize> {
                t.parse::<usize>()
                    .map_err(|_| perr(line, format!("expected a node or layer index, found `{t}`")))
            };
            match toks[0] {
                "layer" => {
                    if toks.len() < 2 {
                        return Err(perr(line, "usage: layer <node> [<node> ...]".into()));
                    }
                    let nodes: Result<Vec<usize>> = toks[1..].iter().map(|t| idx_of(t)).collect();
                    layers.push(nodes?);
                }
                "link" => {
                    if !(3..=4).contains(&toks.len()) {
                        return Err(perr(line, "usage: link <parent> <child> [weight]".into()));
                    }
                    let w = nums(&toks[3..])?.first().copied();
                    directives.push((line, Directive::Link(idx_of(toks[1])?, idx_of(toks[2])?, w)));
                }
                "complete" => {
                    if toks.len() < 2 {
                        return Err(perr(line, "usage: complete <layer> [weights ...]".into()));
                    }
                    let w = nums(&toks[2..])?;
                    let w = if w.is_empty() { None } else { Some(w) };
                    directives.push((line, Directive::Complete(idx_of(toks[1])?, w)));
                }
                other => return Err(perr(line, format!("unknown directive `{other}`"))),
            }
        }
        let mut plan = BranchingPlan::new(layers)?;
        for (line, d) in directives {
            let r = match d {
                Directive::Link(p, c, w) => plan.link(p, c, w).map(|_| ()),
                Directive::Complete(k, w) => plan.complete_layer(k, w).map(|_| ()),
            };
            r.map_err(|e| perr(line, e.to_string()))?;
        }
        Ok(plan)
    }
}

enum Directive {
    Link(usize, usize, Option<f64>),
    Complete(usize, Option<Vec<f64>>),
}

impl fmt::Display for BranchingPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        for l in &self.layers {
            writeln!(f, "layer {}", join(l))?;
        }
        for (k, b) in self.bonds.iter().enumerate() {
            match b {
                LayerSpec::Links(links) => {
                    for (p, c, w) in links {
                        match w {
                            Some(w) => writeln!(f, "link {p} {c} {w}")?,
                            None => writeln!(f, "link {p} {c}")?,
                        }
                    }
                }
                LayerSpec::Complete(None) => writeln!(f, "complete {k}")?,
                LayerSpec::Complete(Some(w)) => {
                    let ws: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                    writeln!(f, "complete {k} {}", ws.join(" "))?
                }
            }
        }
        Ok(())
    }
}

/// A synthesized network together with how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineeredNetwork {
    pub network: SpinNetwork,
    pub spec: CouplingSpec,
    pub plan: BranchingPlan,
    /// Unit class vectors `u^(i)` realized by the plan.
    pub weights: Vec<Vec<f64>>,
}

impl EngineeredNetwork {
    /// Network file with a leading provenance comment block.
    pub fn to_file(&self) -> String {
        let fmt_list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut out = String::from("# engineered network\n");
        out += &format!("# chain: {}\n", fmt_list(self.spec.couplings()));
        for line in self.plan.to_string().lines() {
            out += &format!("# plan: {line}\n");
        }
        for (k, w) in self.weights.iter().enumerate() {
            out += &format!("# weights C{k}: {}\n", fmt_list(w));
        }
        out + &serialize_network(&self.network)
    }
}

/// Largest deviation of collapsed couplings from the requested chain.
const SPEC_TOL: f64 = 1e-12;
/// Allowed trace gap between the network and its chain.
const TRACE_TOL: f64 = 1e-9;
const TRACE_POINTS: usize = 200;

/// Builds the network realizing `spec` on `plan` and verifies it collapses back.
pub fn expand_chain(spec: &CouplingSpec, plan: &BranchingPlan) -> Result<EngineeredNetwork> {
    let alphas = spec.couplings();
    if alphas.len() + 1 != plan.layers.len() {
        return Err(synth(format!(
            "chain has {} nodes but the plan has {} layers",
            alphas.len() + 1,
            plan.layers.len()
        )));
    }
    let mut u: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::from([(plan.layers[0][0], 1.0)])];
    let mut edges = Vec::new();
    for (k, bond) in plan.bonds.iter().enumerate() {
        let (parents, children) = (&plan.layers[k], &plan.layers[k + 1]);
        let alpha = alphas[k];
        let up = &u[k];
        let mut next = BTreeMap::new();
        match bond {
            LayerSpec::Complete(w) => {
                let w = w.clone().unwrap_or_else(|| vec![1.0; children.len()]);
                let norm = DVector::from_column_slice(&w).norm();
                for (&c, x) in children.iter().zip(&w) {
                    next.insert(c, x / norm);
                }
                for &p in parents {
                    for &c in children {
                        edges.push((p, c, alpha * up[&p] * next[&c]));
                    }
                }
            }
            LayerSpec::Links(links) => {
                let count = |pick: fn(&(usize, usize, Option<f64>)) -> usize, v: usize| {
                    links.iter().filter(|l| pick(l) == v).count()
                };
                let parent_of = |l: &(usize, usize, Option<f64>)| l.0;
                let child_of = |l: &(usize, usize, Option<f64>)| l.1;
                if let Some(&p) = parents.iter().find(|&&p| count(parent_of, p) == 0) {
                    return Err(synth(format!("node {p} in layer {k} has no outgoing link")));
                }
                if let Some(&c) = children.iter().find(|&&c| count(child_of, c) == 0) {
                    return Err(synth(format!("node {c} in layer {} has no incoming link", k + 1)));
                }
                if children.iter().all(|&c| count(child_of, c) == 1) {
                    for &p in parents {
                        let sib: Vec<_> = links.iter().filter(|l| l.0 == p).collect();
                        let norm = sib.iter().map(|l| l.2.unwrap_or(1.0).powi(2)).sum::<f64>().sqrt();
                        for l in sib {
                            let w = l.2.unwrap_or(1.0) / norm;
                            next.insert(l.1, up[&p] * w);
                            edges.push((p, l.1, alpha * w));
                        }
                    }
                } else if parents.iter().all(|&p| count(parent_of, p) == 1) {
                    if links.iter().any(|l| l.2.is_some()) {
                        return Err(synth(format!(
                            "merge links between layers {k} and {} cannot carry weights",
                            k + 1
                        )));
                    }
                    for &c in children {
                        let uc = links
                            .iter()
                            .filter(|l| l.1 == c)
                            .map(|l| up[&l.0].powi(2))
                            .sum::<f64>()
                            .sqrt();
                        next.insert(c, uc);
                    }
                    for l in links {
                        edges.push((l.0, l.1, alpha * up[&l.0] / next[&l.1]));
                    }
                } else {
                    return Err(synth(format!(
                        "links between layers {k} and {} are neither a split nor a merge; \
                         use `complete` for general bipartite bonds",
                        k + 1
                    )));
                }
            }
        }
        u.push(next);
    }

    let n = plan.n();
    let ends = Ends::new(plan.layers[0][0], plan.layers[plan.layers.len() - 1][0]);
    let network = SpinNetwork::new(n, ends, edges, Some(plan.partition()))?;
    let chain = collapse_network(&network, &plan.partition())
        .map_err(|e| synth(format!("engineered network failed to collapse: {e}")))?;
    let worst = chain
        .couplings
        .iter()
        .zip(alphas)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    if worst > SPEC_TOL {
        return Err(synth(format!("collapsed chain deviates from the requested couplings by {worst:e}")));
    }
    let t_max = default_t_max(network.reference_coupling());
    let gap = quotient_deviation(&network, &chain, t_max, TRACE_POINTS)?;
    if gap > TRACE_TOL {
        return Err(synth(format!("network and chain traces differ by {gap:e}")));
    }
    let weights = plan
        .layers
        .iter()
        .zip(&u)
        .map(|(l, m)| l.iter().map(|v| m[v]).collect())
        .collect();
    Ok(EngineeredNetwork {
        network,
        spec: spec.clone(),
        plan: plan.clone(),
        weights,
    })
}
