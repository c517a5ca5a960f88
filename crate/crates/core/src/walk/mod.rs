//! Nested-commutator ("quantum walk") expansion of the transport fidelity.
//!
//! With `S(X) = Z_s X Z_t` the fidelity is `F(t) = Σ (it)^n/n! <C_n>` where
//! `C_n = [H, C_{n-1}]`, `C_0 = S`. Each `C_n` is stored as its left
//! multiplier `M_n` (`C_n(X) = M_n Z_s X Z_t`), and the walk operators
//! `C_n^A = [H, C_{n-1}^A]` start from `A = [H, Z_s] Z_s`.

mod table1;

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::Ends;
use crate::pauli::{Letter, OperatorExpr, PauliString, Sign};

pub use table1::{table1_check, table1_expected, Table1Row};

/// Default bound on the number of Pauli terms in any walk operator.
pub const DEFAULT_TERM_BOUND: usize = 2_000_000;
/// Orders up to which the binomial reconstruction is cross-checked.
pub const BINOMIAL_CHECK_ORDER: usize = 8;

/// `A = [H, Z_s] Z_s = H - Z_s H Z_s`: the part of `H` anticommuting with `Z_s`, doubled.
pub fn extract_a(h: &OperatorExpr, source: usize) -> Result<OperatorExpr> {
    let z = PauliString::from_letters(h.n_sites(), &[(source, Letter::Z)])?;
    let conj = h.left_mul_string(&z)?.right_mul_string(&z)?;
    let mut a = h - &conj;
    a.prune_relative(1e-14);
    Ok(a)
}

/// `C_n^A` together with its order.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOperator {
    pub order: usize,
    pub expr: OperatorExpr,
}

fn check_bound(e: &OperatorExpr, bound: usize, order: usize) -> Result<()> {
    if e.len() > bound {
        return Err(Error::Capacity {
            what: format!("walk operator of order {order} with {} terms", e.len()),
            limit: bound,
            hint: "; lower the order",
        });
    }
    Ok(())
}

/// `C_0^A .. C_{n_max}^A` under the default term bound.
pub fn walk_operators(h: &OperatorExpr, source: usize, n_max: usize) -> Result<Vec<WalkOperator>> {
    walk_operators_bounded(h, source, n_max, DEFAULT_TERM_BOUND)
}

pub fn walk_operators_bounded(
    h: &OperatorExpr,
    source: usize,
    n_max: usize,
    bound: usize,
) -> Result<Vec<WalkOperator>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = extract_a(h, source)?;
    check_bound(&cur, bound, 0)?;
    out.push(WalkOperator { order: 0, expr: cur.clone() });
    for order in 1..=n_max {
        cur = h.commutator(&cur)?;
        cur.prune_relative(1e-13);
        check_bound(&cur, bound, order)?;
        out.push(WalkOperator { order, expr: cur.clone() });
    }
    Ok(out)
}

/// Flip-flop markers `(i, j, sign)` with `i < j`; `+` for `XX`/`YY` letter
/// pairs and `-` for `XY`/`YX`, ignoring `Z` prefactors and weights.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSkeleton {
    pub edges: BTreeSet<(usize, usize, Sign)>,
}

impl EdgeSkeleton {
    pub fn contains(&self, i: usize, j: usize, sign: Sign) -> bool {
        self.edges.contains(&(i.min(j), i.max(j), sign))
    }

    /// Node pairs regardless of sign.
    pub fn pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(i, j, _)| (i, j)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl fmt::Display for EdgeSkeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .edges
            .iter()
            .map(|(i, j, s)| format!("{i}-{j}{}", s.symbol()))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Flip sites and marker sign of a single Pauli string, if it is a two-site flip-flop term.
pub fn flip_flop_marker(s: &PauliString) -> Option<(usize, usize, Sign)> {
    let flips = s.flip_sites();
    if flips.len() != 2 {
        return None;
    }
    let (i, j) = (flips[0], flips[1]);
    let sign = if s.letter(i) == s.letter(j) { Sign::Plus } else { Sign::Minus };
    Some((i, j, sign))
}

pub fn skeleton(w: &WalkOperator) -> EdgeSkeleton {
    EdgeSkeleton {
        edges: w.expr.terms().filter_map(|(s, _)| flip_flop_marker(s)).collect(),
    }
}

/// Moments `<C_n> = Tr(M_n Z_s Z_t) / 2^N` and the multipliers `M_n`.
#[derive(Debug, Clone)]
pub struct MomentSeries {
    pub moments: Vec<Complex64>,
    pub multipliers: Vec<OperatorExpr>,
}

impl MomentSeries {
    /// Truncated series `Σ_{n ≤ n_max} (it)^n / n! <C_n>`.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::default();
        let mut factor = Complex64::new(1.0, 0.0);
        for (n, m) in self.moments.iter().enumerate() {
            if n > 0 {
                factor *= Complex64::new(0.0, t) / n as f64;
            }
            acc += factor * m;
        }
        acc
    }

    /// Lowest order with a moment above `tol`.
    pub fn first_nonzero(&self, tol: f64) -> Option<usize> {
        self.moments.iter().position(|m| m.norm() > tol)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Moments through `n_max` via `M_n = H M_{n-1} - M_{n-1} (Z_s H Z_s)`.
/// Up to [`BINOMIAL_CHECK_ORDER`] each `M_n` is rebuilt from the walk
/// operators as `Σ_k C(n-1, k) C_{n-1-k}^A M_k` and the two must agree.
pub fn moments(h: &OperatorExpr, ends: Ends, n_max: usize) -> Result<MomentSeries> {
    let n = h.n_sites();
    let zs = PauliString::from_letters(n, &[(ends.source, Letter::Z)])?;
    let pair = PauliString::from_letters(n, &[(ends.source, Letter::Z), (ends.target, Letter::Z)])?;
    let h_conj = h.left_mul_string(&zs)?.right_mul_string(&zs)?;
    let check_to = n_max.min(BINOMIAL_CHECK_ORDER);
    let walk = walk_operators(h, ends.source, check_to.saturating_sub(1))?;

    let mut multipliers = vec![OperatorExpr::identity(n)?];
    for order in 1..=n_max {
        let prev = &multipliers[order - 1];
        let mut next = &h.product(prev)? - &prev.product(&h_conj)?;
        next.prune_relative(1e-13);
        check_bound(&next, DEFAULT_TERM_BOUND, order)?;
        if order <= check_to {
            let mut alt = OperatorExpr::zero(n);
            for k in 0..order {
                let term = walk[order - 1 - k].expr.product(&multipliers[k])?;
                alt = &alt + &(&term * binomial(order - 1, k));
            }
            let scale = next.max_amplitude().max(1.0);
            let diff = alt.max_abs_diff(&next)?;
            if diff > 1e-9 * scale {
                return Err(Error::Contract(format!(
                    "binomial reconstruction differs at order {order} by {diff:.3e}"
                )));
            }
        }
        multipliers.push(next);
    }
    let moments = multipliers.iter().map(|m| m.coefficient(&pair)).collect();
    Ok(MomentSeries { moments, multipliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{dense, DenseTransport};
    use crate::network::{hamiltonian, HamiltonianKind, SpinNetwork};
    use crate::pauli::{flip_flop, modified_flip_flop};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig5() -> SpinNetwork {
        SpinNetwork::new(
            6,
            Ends::outer(6),
            [(1, 2, 1.0), (2, 3, 1.0), (3, 6, 1.0), (1, 4, 1.0), (4, 5, 1.0), (5, 6, 1.0)],
            None,
        )
        .unwrap()
    }

    fn random_expr(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> OperatorExpr {
        let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
        let mut e = OperatorExpr::zero(n);
        for _ in 0..terms {
            let l: Vec<_> = (1..=n).map(|s| (s, letters[rng.gen_range(0..4)])).collect();
            e.add_term(
                PauliString::from_letters(n, &l).unwrap(),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
        e
    }

    #[test]
    fn a_reproduces_commutator_with_s() {
        let net = fig5();
        let h = hamiltonian(&net, HamiltonianKind::Xy).unwrap();
        let a = extract_a(&h, 1).unwrap();
        let z1 = PauliString::parse(6, "Z1").unwrap();
        let z6 = PauliString::parse(6, "Z6").unwrap();
        let s = |x: &OperatorExpr| x.left_mul_string(&z1).unwrap().right_mul_string(&z6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = random_expr(&mut rng, 6, 4);
            let lhs = a.product(&s(&x)).unwrap();
            let rhs = &h.product(&s(&x)).unwrap() - &s(&h.product(&x).unwrap());
            assert!(lhs.approx_eq(&rhs, 1e-12));
        }
        let expect = &(&flip_flop(6, 1, 2, Sign::Plus).unwrap() + &flip_flop(6, 1, 4, Sign::Plus).unwrap()) * 2.0;
        assert!(a.approx_eq(&expect, 1e-14));
        let hm = hamiltonian(&net, HamiltonianKind::Mxy).unwrap();
        let am = extract_a(&hm, 1).unwrap();
        let expect = &(&modified_flip_flop(6, 1, 2, Sign::Plus).unwrap()
            + &modified_flip_flop(6, 1, 4, Sign::Plus).unwrap())
            * 2.0;
        assert!(am.approx_eq(&expect, 1e-14));
    }

    #[test]
    fn no_edge_at_source_gives_empty_a() {
        let net = SpinNetwork::new(4, Ends::outer(4), [(2, 3, 1.0), (3, 4, 1.0)], None).unwrap();
        let h = hamiltonian(&net, HamiltonianKind::Xy).unwrap();
        assert!(extract_a(&h, 1).unwrap().is_empty());
        let w = walk_operators(&h, 1, 3).unwrap();
        assert!(w.iter().all(|op| skeleton(op).is_empty()));
    }

    #[test]
    fn single_edge_alternates_sign() {
        let net = SpinNetwork::new(2, Ends::outer(2), [(1, 2, 1.0)], None).unwrap();
        let h = hamiltonian(&net, HamiltonianKind::Xy).unwrap();
        let w = walk_operators(&h, 1, 4).unwrap();
        // the flip-flop commutes with itself, so the walk stops at order 0
        assert!(skeleton(&w[0]).contains(1, 2, Sign::Plus));
        assert!(w[1].expr.is_empty());
        // a three-site chain alternates + and - at every order
        let chain = SpinNetwork::new(3, Ends::outer(3), [(1, 2, 1.0), (2, 3, 1.0)], None).unwrap();
        let h = hamiltonian(&chain, HamiltonianKind::Xy).unwrap();
        for op in walk_operators(&h, 1, 6).unwrap() {
            let want = if op.order % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let sk = skeleton(&op);
            assert!(!sk.is_empty());
            assert!(sk.edges.iter().all(|e| e.2 == want), "order {}: {sk}", op.order);
        }
    }

    #[test]
    fn term_bound_is_enforced() {
        let h = hamiltonian(&fig5(), HamiltonianKind::Xy).unwrap();
        let err = walk_operators_bounded(&h, 1, 6, 10).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn skeleton_growth_and_parity() {
        let nets = [
            fig5(),
            SpinNetwork::new(
                4,
                Ends::outer(4),
                [(1, 2, 1.0), (1, 3, 1.0), (2, 4, 1.0), (3, 4, 1.0), (2, 3, 1.0)],
                None,
            )
            .unwrap(),
        ];
        for net in nets {
            let dist = net.distances_from(1);
            for kind in [HamiltonianKind::Xy, HamiltonianKind::Mxy] {
                let h = hamiltonian(&net, kind).unwrap();
                for op in walk_operators(&h, 1, 6).unwrap() {
                    let want = if op.order % 2 == 0 { Sign::Plus } else { Sign::Minus };
                    for &(i, j, s) in &skeleton(&op).edges {
                        assert!(dist[i].unwrap() <= op.order + 1 && dist[j].unwrap() <= op.order + 1);
                        assert_eq!(s, want);
                    }
                }
            }
        }
    }

    #[test]
    fn modified_walk_skeleton_has_period_two() {
        let h = hamiltonian(&fig5(), HamiltonianKind::Mxy).unwrap();
        let w = walk_operators(&h, 1, 8).unwrap();
        let sk: Vec<_> = w.iter().map(skeleton).collect();
        assert!(sk[2].contains(1, 6, Sign::Plus));
        for n in 5..=8 {
            assert_eq!(sk[n], sk[n - 2], "order {n}");
        }
    }

    #[test]
    fn path_interference_witness() {
        let prefactors = |kind| -> BTreeSet<PauliString> {
            let h = hamiltonian(&fig5(), kind).unwrap();
            let w = walk_operators(&h, 1, 2).unwrap();
            w[2].expr
                .terms()
                .filter(|(s, _)| flip_flop_marker(s) == Some((1, 6, Sign::Plus)))
                .map(|(s, _)| {
                    let zs: Vec<_> = s.letters().filter(|(_, l)| *l == Letter::Z).collect();
                    PauliString::from_letters(6, &zs).unwrap()
                })
                .collect()
        };
        let xy = prefactors(HamiltonianKind::Xy);
        assert_eq!(
            xy,
            [PauliString::parse(6, "Z2 Z3").unwrap(), PauliString::parse(6, "Z4 Z5").unwrap()].into()
        );
        assert_eq!(prefactors(HamiltonianKind::Mxy).len(), 1);
    }

    #[test]
    fn low_moments_vanish() {
        let h = hamiltonian(&fig5(), HamiltonianKind::Xy).unwrap();
        let m = moments(&h, Ends::outer(6), 3).unwrap();
        assert_eq!(m.moments[0], Complex64::default());
        assert!(m.moments[1].norm() < 1e-15);
    }

    #[test]
    fn series_matches_dense_for_lambda() {
        let a = 1.0 / 2f64.sqrt();
        let net = SpinNetwork::new(3, Ends::outer(3), [(1, 2, a), (2, 3, a)], None).unwrap();
        let h = hamiltonian(&net, HamiltonianKind::Xy).unwrap();
        let m = moments(&h, net.ends(), 12).unwrap();
        let tr = DenseTransport::new(&net, HamiltonianKind::Xy).unwrap();
        for k in 0..=10 {
            let t = 0.05 * k as f64;
            let v = m.evaluate(t);
            assert!(v.im.abs() < 1e-12);
            assert!((v.re - tr.fidelity(t)).abs() < 1e-6, "t={t}");
        }
        for (n, mo) in m.moments.iter().enumerate() {
            let term = Complex64::new(0.0, 1.0).powu(n as u32) * mo;
            assert!(term.im.abs() < 1e-12);
        }
    }

    #[test]
    fn moments_agree_with_dense_traces() {
        // <C_n> = Tr(ad_H^n(Z_s) Z_t) / 2^N computed with dense matrices
        let net = fig5();
        let h = hamiltonian(&net, HamiltonianKind::Xy).unwrap();
        let m = moments(&h, net.ends(), 8).unwrap();
        let hd = dense(&h).unwrap();
        let mut cur = dense(&OperatorExpr::parse_string(6, "Z1").unwrap()).unwrap();
        let z6 = dense(&OperatorExpr::parse_string(6, "Z6").unwrap()).unwrap();
        for n in 0..=8 {
            let v = cur.mul(&z6).unwrap().trace() / 64.0;
            assert!((v - m.moments[n]).norm() < 1e-9, "order {n}");
            cur = hd.mul(&cur).unwrap().add(&cur.mul(&hd).unwrap().scale(Complex64::new(-1.0, 0.0))).unwrap();
        }
    }

    #[test]
    fn first_moment_for_modified_fig5() {
        let h = hamiltonian(&fig5(), HamiltonianKind::Mxy).unwrap();
        let m = moments(&h, Ends::outer(6), 8).unwrap();
        let w = walk_operators(&h, 1, 4).unwrap();
        let first_cover = w.iter().position(|op| skeleton(op).contains(1, 6, Sign::Plus)).unwrap();
        assert_eq!(first_cover, 2);
        // the first product carrying an even power of T_1N is C_2^A C_2^A, inside M_6
        assert_eq!(m.first_nonzero(1e-9), Some(2 * (first_cover + 1)));
    }
}
