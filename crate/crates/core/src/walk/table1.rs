//! Reference walk operators of the six-node two-path network, in both the
//! XY and the modified XY form, for orders 0 to 4.

use super::walk_operators;
use crate::error::{Error, Result};
use crate::network::{hamiltonian, HamiltonianKind, SpinNetwork};
use crate::pauli::{flip_flop, modified_flip_flop, Letter, OperatorExpr, PauliString, Sign};

const N: usize = 6;
const EDGES: [(usize, usize); 6] = [(1, 2), (1, 4), (2, 3), (3, 6), (4, 5), (5, 6)];

/// `coef · (Σ_k c_k Z-prefactor_k) · T_ij^±` written as a prefactor list.
struct Term {
    prefactors: &'static [(f64, &'static [usize])],
    i: usize,
    j: usize,
    sign: Sign,
}

const ONE: &[(f64, &[usize])] = &[(1.0, &[])];

fn t(prefactors: &'static [(f64, &'static [usize])], i: usize, j: usize, sign: Sign) -> Term {
    Term { prefactors, i, j, sign }
}

use Sign::{Minus as M, Plus as P};

fn xy_rows(order: usize) -> Vec<Term> {
    match order {
        0 => vec![t(ONE, 1, 2, P), t(ONE, 1, 4, P)],
        1 => vec![t(&[(1.0, &[2])], 1, 3, M), t(&[(1.0, &[4])], 1, 5, M)],
        2 => vec![
            t(ONE, 1, 2, P),
            t(&[(-1.0, &[])], 2, 3, P),
            t(&[(-1.0, &[1, 2])], 3, 4, P),
            t(&[(1.0, &[2, 3])], 1, 6, P),
            t(ONE, 1, 4, P),
            t(&[(-1.0, &[])], 4, 5, P),
            t(&[(-1.0, &[1, 4])], 2, 5, P),
            t(&[(1.0, &[4, 5])], 1, 6, P),
        ],
        3 => vec![
            t(&[(1.0, &[4, 5, 6]), (4.0, &[2])], 1, 3, M),
            t(&[(1.0, &[2, 3, 6]), (4.0, &[4])], 1, 5, M),
            t(&[(-2.0, &[1, 4, 5]), (-2.0, &[3])], 2, 6, M),
            t(&[(-2.0, &[1, 2, 3]), (-2.0, &[5])], 4, 6, M),
        ],
        4 => vec![
            t(&[(4.0, &[]), (1.0, &[3, 4, 5, 6])], 1, 2, P),
            t(&[(4.0, &[]), (1.0, &[2, 3, 5, 6])], 1, 4, P),
            t(&[(9.0, &[2, 3]), (9.0, &[4, 5])], 1, 6, P),
            t(&[(-6.0, &[]), (-3.0, &[1, 4, 5, 6])], 2, 3, P),
            t(&[(-6.0, &[1, 4]), (-3.0, &[3, 6])], 2, 5, P),
            t(&[(-6.0, &[1, 2]), (-3.0, &[5, 6])], 3, 4, P),
            t(&[(2.0, &[]), (2.0, &[1, 2, 4, 5])], 3, 6, P),
            t(&[(-6.0, &[]), (-3.0, &[1, 2, 3, 6])], 4, 5, P),
            t(&[(2.0, &[]), (2.0, &[1, 2, 3, 4])], 5, 6, P),
        ],
        _ => vec![],
    }
}

fn mxy_rows(order: usize) -> Vec<(f64, usize, usize, Sign)> {
    match order {
        0 => vec![(1.0, 1, 2, P), (1.0, 1, 4, P)],
        1 => vec![(1.0, 1, 3, M), (1.0, 1, 5, M)],
        2 => vec![
            (1.0, 1, 2, P),
            (-1.0, 2, 3, P),
            (-1.0, 3, 4, P),
            (1.0, 1, 6, P),
            (1.0, 1, 4, P),
            (-1.0, 4, 5, P),
            (-1.0, 2, 5, P),
            (1.0, 1, 6, P),
        ],
        3 => vec![(5.0, 1, 3, M), (-4.0, 2, 6, M), (5.0, 1, 5, M), (-4.0, 4, 6, M)],
        4 => vec![
            (5.0, 1, 2, P),
            (5.0, 1, 4, P),
            (18.0, 1, 6, P),
            (-9.0, 2, 3, P),
            (-9.0, 2, 5, P),
            (-9.0, 3, 4, P),
            (4.0, 3, 6, P),
            (-9.0, 4, 5, P),
            (4.0, 5, 6, P),
        ],
        _ => vec![],
    }
}

fn z_product(sites: &[usize]) -> Result<PauliString> {
    let letters: Vec<_> = sites.iter().map(|&s| (s, Letter::Z)).collect();
    PauliString::from_letters(N, &letters)
}

/// Tabulated `C_order^A` for the XY or modified-XY column.
pub fn table1_expected(kind: HamiltonianKind, order: usize) -> Result<OperatorExpr> {
    if order > 4 {
        return Err(Error::Parameter(format!("tabulated orders are 0..=4, got {order}")));
    }
    let mut out = OperatorExpr::zero(N);
    match kind {
        HamiltonianKind::Xy => {
            for term in xy_rows(order) {
                let ff = flip_flop(N, term.i, term.j, term.sign)?;
                for &(c, zs) in term.prefactors {
                    let part = ff.left_mul_string(&z_product(zs)?)?;
                    out = &out + &(&part * c);
                }
            }
        }
        HamiltonianKind::Mxy => {
            for (c, i, j, sign) in mxy_rows(order) {
                out = &out + &(&modified_flip_flop(N, i, j, sign)? * c);
            }
        }
        HamiltonianKind::Dq => {
            return Err(Error::Parameter("no tabulated double-quantum column".into()));
        }
    }
    Ok(out)
}

/// Comparison of one computed order against its tabulated form.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub kind: HamiltonianKind,
    pub order: usize,
    /// Real factor `s` with `computed ≈ s · tabulated`.
    pub scale: Option<f64>,
    pub term_set_equal: bool,
    pub relative_equal: bool,
    /// One line per mismatching Pauli string.
    pub diff: Vec<String>,
}

impl Table1Row {
    pub fn matches(&self) -> bool {
        self.term_set_equal && self.relative_equal
    }
}

fn compare(kind: HamiltonianKind, order: usize, computed: &OperatorExpr, expected: &OperatorExpr) -> Table1Row {
    let keys = |e: &OperatorExpr| e.terms().map(|(s, _)| *s).collect::<std::collections::BTreeSet<_>>();
    let term_set_equal = keys(computed) == keys(expected);
    let scale = expected
        .terms()
        .find(|(s, _)| computed.coefficient(s).norm() > 0.0)
        .map(|(s, e)| computed.coefficient(s) / e)
        .filter(|r| r.im.abs() <= 1e-12 * r.norm())
        .map(|r| r.re);
    let mut diff = Vec::new();
    let mut relative_equal = scale.is_some();
    if let Some(sc) = scale {
        let scaled = expected * sc;
        let tol = 1e-9 * computed.max_amplitude().max(1.0);
        for s in keys(computed).union(&keys(expected)) {
            let (c, e) = (computed.coefficient(s), scaled.coefficient(s));
            if (c - e).norm() > tol {
                relative_equal = false;
                diff.push(format!("{s}: computed {c}, expected {e}"));
            }
        }
    } else {
        diff.push("no common term with a real ratio".into());
    }
    Table1Row {
        kind,
        order,
        scale,
        term_set_equal,
        relative_equal,
        diff,
    }
}

/// Computes `C_0^A .. C_4^A` on `net` (which must be the unit-coupled
/// two-path network) and compares each against the tabulated expression.
pub fn table1_check(net: &SpinNetwork, kind: HamiltonianKind) -> Result<Vec<Table1Row>> {
    let shape_ok = net.n() == N
        && net.edges().len() == EDGES.len()
        && net
            .edges()
            .iter()
            .zip(EDGES)
            .all(|(e, (i, j))| e.i == i && e.j == j && e.alpha == 1.0);
    if !shape_ok {
        return Err(Error::Network(
            "table comparison needs the unit-coupled six-node two-path network".into(),
        ));
    }
    let h = hamiltonian(net, kind)?;
    let walk = walk_operators(&h, net.ends().source, 4)?;
    walk.iter()
        .map(|w| Ok(compare(kind, w.order, &w.expr, &table1_expected(kind, w.order)?)))
        .collect()
}
