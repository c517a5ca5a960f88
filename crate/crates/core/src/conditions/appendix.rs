//! Explicit propagator families that transport `Z_1` to `Z_N`.
//!
//! Each family is `U = W ⊗ a/2 + W' ⊗ b/2`, where `W`, `W'` act on the bulk
//! sites `2..N-1` and `a`, `b` are two-letter patterns on sites 1 and `N`.
//! The `±` inside a family is a single joint choice.

use num_complex::Complex64;

use super::{fidelity_hs_dense, INVARIANCE_TOL};
use crate::error::{Error, Result};
use crate::hilbert::{dense_capped, CMatrix, DenseOperator};
use crate::network::Ends;
use crate::pauli::{Letter, OperatorExpr, PauliString, Sign};

pub const FORM_COUNT: usize = 8;

/// A pattern `e1 + c e2`, written as `(site-1 letter, site-N letter, coefficient)`.
pub type Pattern = [(Letter, Letter, Complex64); 2];

/// The two end patterns `(a, b)` of `form` under the joint sign `sign`.
pub fn end_patterns(form: usize, sign: Sign) -> Result<(Pattern, Pattern)> {
    use Letter::*;
    let s = sign.value();
    let one = Complex64::new(1.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let p = |l1, ln, c| [(l1, ln, one), c];
    Ok(match form {
        1 => (p(I, I, (Z, Z, re(s))), p(X, X, (Y, Y, re(s)))),
        2 => (p(I, I, (Z, Z, re(s))), p(X, Y, (Y, X, re(-s)))),
        3 => (p(Z, I, (I, Z, re(s))), p(X, X, (Y, Y, re(s)))),
        4 => (p(Z, I, (I, Z, re(s))), p(X, Y, (Y, X, re(-s)))),
        5 => (p(X, I, (Y, Z, im(s))), p(I, X, (Z, Y, im(-s)))),
        6 => (p(X, I, (Y, Z, im(s))), p(I, Y, (Z, X, im(s)))),
        7 => (p(Y, I, (X, Z, im(s))), p(I, X, (Z, Y, im(s)))),
        8 => (p(Y, I, (X, Z, im(s))), p(I, Y, (Z, X, im(-s)))),
        _ => return Err(Error::Parameter(format!("form must be 1..=8, got {form}"))),
    })
}

/// The joint sign for which `form` gives `F = +1`; the other sign gives `F = -1`.
pub fn transport_sign(form: usize) -> Result<Sign> {
    match form {
        1..=6 => Ok(Sign::Plus),
        7 | 8 => Ok(Sign::Minus),
        _ => Err(Error::Parameter(format!("form must be 1..=8, got {form}"))),
    }
}

fn pattern_matrix(p: &Pattern) -> CMatrix {
    let mut e = OperatorExpr::zero(2);
    for (l1, ln, c) in p {
        let s = PauliString::from_letters(2, &[(1, *l1), (2, *ln)]).expect("two sites");
        e.add_term(s, *c);
    }
    dense_capped(&e, 2).expect("two sites").into_matrix()
}

fn full_index(nb: usize, end: usize, bulk: usize) -> usize {
    ((end >> 1) << (nb + 1)) | (bulk << 1) | (end & 1)
}

/// `W ⊗ E` with `E` on sites 1 and `N` and `W` on the sites in between.
fn bulk_end_product(nb: usize, w: &CMatrix, e: &CMatrix) -> CMatrix {
    let db = 1usize << nb;
    let dim = 4 * db;
    let mut out = CMatrix::zeros(dim, dim);
    for a in 0..4 {
        for c in 0..4 {
            let ec = e[(a, c)];
            if ec.norm() == 0.0 {
                continue;
            }
            for b in 0..db {
                for d in 0..db {
                    out[(full_index(nb, a, b), full_index(nb, c, d))] = w[(b, d)] * ec;
                }
            }
        }
    }
    out
}

/// Bulk coefficient `Tr_ends((E^dag ⊗ Id) U) / 4` of the end operator `E`.
fn bulk_component(nb: usize, u: &CMatrix, e: &CMatrix) -> CMatrix {
    let db = 1usize << nb;
    let mut out = CMatrix::zeros(db, db);
    for a in 0..4 {
        for c in 0..4 {
            let w = e[(c, a)].conj();
            if w.norm() == 0.0 {
                continue;
            }
            for b in 0..db {
                for d in 0..db {
                    out[(b, d)] += w * u[(full_index(nb, c, b), full_index(nb, a, d))];
                }
            }
        }
    }
    out / Complex64::new(4.0, 0.0)
}

/// Builds family member `form` with bulk operators `W/2` and `W'/2`.
pub fn appendix_unitary(
    form: usize,
    w: &DenseOperator,
    w_prime: &DenseOperator,
    sign: Sign,
) -> Result<DenseOperator> {
    if w.n_sites() != w_prime.n_sites() {
        return Err(Error::Dimension {
            left: w.n_sites(),
            right: w_prime.n_sites(),
        });
    }
    for (name, op) in [("W", w), ("W'", w_prime)] {
        let r = op.unitarity_residual();
        if r > INVARIANCE_TOL {
            return Err(Error::Contract(format!("bulk operator {name} is not unitary (residual {r:.3e})")));
        }
    }
    let nb = w.n_sites();
    let (a, b) = end_patterns(form, sign)?;
    let m = (bulk_end_product(nb, w.matrix(), &pattern_matrix(&a))
        + bulk_end_product(nb, w_prime.matrix(), &pattern_matrix(&b)))
        * Complex64::new(0.5, 0.0);
    let u = DenseOperator::from_matrix(nb + 2, m)?;
    let r = u.unitarity_residual();
    if r > INVARIANCE_TOL {
        return Err(Error::Contract(format!("form {form} is not unitary (residual {r:.3e})")));
    }
    Ok(u)
}

/// A propagator recognized as a family member, with its recovered bulk operators.
#[derive(Debug, Clone, PartialEq)]
pub struct FormMatch {
    pub form: usize,
    pub sign: Sign,
    pub bulk: DenseOperator,
    pub bulk_prime: DenseOperator,
}

fn single_end(l1: Letter, ln: Letter) -> CMatrix {
    pattern_matrix(&[(l1, ln, Complex64::new(1.0, 0.0)), (Letter::I, Letter::I, Complex64::default())])
}

/// Projects `U` onto the end-pattern decomposition and returns the first
/// family whose shape matches within `tol` with unitary bulk operators.
pub fn classify_appendix_form(u: &DenseOperator, tol: f64) -> Result<Option<FormMatch>> {
    let n = u.n_sites();
    if n < 2 {
        return Err(Error::Index("need at least two sites".into()));
    }
    let nb = n - 2;
    let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let mut comps = Vec::with_capacity(16);
    for &l1 in &letters {
        for &ln in &letters {
            comps.push(((l1, ln), bulk_component(nb, u.matrix(), &single_end(l1, ln))));
        }
    }
    let comp = |l1: Letter, ln: Letter| &comps.iter().find(|(k, _)| *k == (l1, ln)).unwrap().1;
    for form in 1..=FORM_COUNT {
        for sign in [Sign::Plus, Sign::Minus] {
            let (a, b) = end_patterns(form, sign)?;
            let used = [(a[0].0, a[0].1), (a[1].0, a[1].1), (b[0].0, b[0].1), (b[1].0, b[1].1)];
            let others_vanish = comps
                .iter()
                .filter(|(k, _)| !used.contains(k))
                .all(|(_, m)| m.camax() < tol);
            if !others_vanish {
                continue;
            }
            let fits = |p: &Pattern| -> Option<DenseOperator> {
                let base = comp(p[0].0, p[0].1);
                let partner = comp(p[1].0, p[1].1);
                if (partner - base * p[1].2).camax() >= tol {
                    return None;
                }
                let w = DenseOperator::from_matrix(nb, base * Complex64::new(2.0, 0.0)).ok()?;
                (w.unitarity_residual() < tol).then_some(w)
            };
            if let (Some(bulk), Some(bulk_prime)) = (fits(&a), fits(&b)) {
                return Ok(Some(FormMatch {
                    form,
                    sign,
                    bulk,
                    bulk_prime,
                }));
            }
        }
    }
    Ok(None)
}

/// Constraint values for `U = Σ λ_k P_k` over the normalized two-spin patterns
/// `(1 ± Z1Z2)/√2`, `(X1X2 ± Y1Y2)/√2`, `(X1Y2 ∓ Y1X2)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaReport {
    /// `|λ1|² + |λ2|² + |λ3|² - 1`.
    pub normalization: f64,
    /// `|λ1|² - |λ2|² - |λ3|²`.
    pub balance: f64,
    /// `Im(λ2* λ3)`.
    pub phase: f64,
    pub constraints_hold: bool,
    pub unitarity_residual: f64,
    pub fidelity: f64,
    /// Constraints hold, `U` is unitary and `F = 1`.
    pub perfect: bool,
}

pub fn solve_lambda_combination(lambda: [Complex64; 3], sign: Sign) -> Result<LambdaReport> {
    let [l1, l2, l3] = lambda;
    let normalization = l1.norm_sqr() + l2.norm_sqr() + l3.norm_sqr() - 1.0;
    let balance = l1.norm_sqr() - l2.norm_sqr() - l3.norm_sqr();
    let phase = (l2.conj() * l3).im;
    let constraints_hold = [normalization, balance, phase]
        .iter()
        .all(|v| v.abs() < INVARIANCE_TOL);

    let s = sign.value();
    let scale = 1.0 / 2f64.sqrt();
    let mut e = OperatorExpr::zero(2);
    let mut add = |text: &str, c: Complex64| {
        e.add_term(PauliString::parse(2, text).expect("valid"), c * scale);
    };
    add("ID", l1);
    add("Z1 Z2", l1 * s);
    add("X1 X2", l2);
    add("Y1 Y2", l2 * s);
    add("X1 Y2", l3);
    add("Y1 X2", l3 * -s);
    let u = dense_capped(&e, 2)?;
    let unitarity_residual = u.unitarity_residual();
    let fidelity = fidelity_hs_dense(&u, Ends::outer(2))?;
    Ok(LambdaReport {
        normalization,
        balance,
        phase,
        constraints_hold,
        unitarity_residual,
        fidelity,
        perfect: constraints_hold
            && unitarity_residual < INVARIANCE_TOL
            && (fidelity - 1.0).abs() < INVARIANCE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{dense, propagator, random_unitary};
    use crate::network::{hamiltonian, HamiltonianKind, SpinNetwork};
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn first_form_on_two_spins() {
        let id = DenseOperator::identity(0);
        let u = appendix_unitary(1, &id, &id, Sign::Plus).unwrap();
        assert!((fidelity_hs_dense(&u, Ends::outer(2)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn every_form_transports_with_random_bulk() {
        for form in 1..=FORM_COUNT {
            let good = transport_sign(form).unwrap();
            for seed in 0..3u64 {
                let w = random_unitary(2, seed * 17 + form as u64);
                let wp = random_unitary(2, seed * 31 + 1000 + form as u64);
                let u = appendix_unitary(form, &w, &wp, good).unwrap();
                let f = fidelity_hs_dense(&u, Ends::outer(4)).unwrap();
                assert!((f - 1.0).abs() < 1e-9, "form {form}: {f}");
                let flipped = appendix_unitary(form, &w, &wp, good.flip()).unwrap();
                let f = fidelity_hs_dense(&flipped, Ends::outer(4)).unwrap();
                assert!((f + 1.0).abs() < 1e-9, "form {form} flipped: {f}");
            }
        }
    }

    #[test]
    fn rejects_non_unitary_bulk() {
        let id = DenseOperator::identity(1);
        let bad = id.scale(c(2.0));
        assert!(matches!(appendix_unitary(1, &bad, &id, Sign::Plus), Err(Error::Contract(_))));
        assert!(appendix_unitary(9, &id, &id, Sign::Plus).is_err());
    }

    #[test]
    fn lambda_network_at_pi_is_form_three() {
        let a = 1.0 / 2f64.sqrt();
        let net = SpinNetwork::new(3, Ends::outer(3), [(1, 2, a), (2, 3, a)], None).unwrap();
        let u = propagator(&dense(&hamiltonian(&net, HamiltonianKind::Xy).unwrap()).unwrap(), PI).unwrap();
        let z2 = dense(&OperatorExpr::parse_string(1, "Z1").unwrap()).unwrap();
        let minus = DenseOperator::identity(1).scale(c(-1.0));
        let form3 = appendix_unitary(3, &z2, &minus, Sign::Plus).unwrap();
        assert!(u.max_abs_diff(&form3).unwrap() < 1e-12);
        let m = classify_appendix_form(&u, 1e-10).unwrap().unwrap();
        assert_eq!((m.form, m.sign), (3, Sign::Plus));
        assert!(m.bulk.max_abs_diff(&z2).unwrap() < 1e-12);
    }

    #[test]
    fn classification_round_trip_and_invariance_closure() {
        for form in 1..=FORM_COUNT {
            let w = random_unitary(1, 7 + form as u64);
            let wp = random_unitary(1, 70 + form as u64);
            let sign = transport_sign(form).unwrap();
            let u = appendix_unitary(form, &w, &wp, sign).unwrap();
            let m = classify_appendix_form(&u, 1e-10).unwrap().unwrap();
            let rebuilt = appendix_unitary(m.form, &m.bulk, &m.bulk_prime, m.sign).unwrap();
            assert!(rebuilt.max_abs_diff(&u).unwrap() < 1e-10);
            // compliant V commute with Z_1: the product stays in the family
            for v in ["Z1", "X2", "Z1 Y2", "X3"] {
                let vd = dense(&OperatorExpr::parse_string(3, v).unwrap()).unwrap();
                let vu = vd.mul(&u).unwrap();
                assert!(classify_appendix_form(&vu, 1e-10).unwrap().is_some(), "form {form}, V = {v}");
            }
        }
        assert!(classify_appendix_form(&random_unitary(3, 1), 1e-10).unwrap().is_none());
    }

    #[test]
    fn lambda_constraints() {
        let r = solve_lambda_combination([c(1.0 / 2f64.sqrt()), c(0.5), c(0.5)], Sign::Plus).unwrap();
        assert!(r.constraints_hold && r.perfect, "{r:?}");

        let r = solve_lambda_combination([c(1.0), c(0.0), c(0.0)], Sign::Plus).unwrap();
        assert!(r.normalization.abs() < 1e-15);
        assert!((r.balance - 1.0).abs() < 1e-15);
        assert!(!r.constraints_hold && !r.perfect);
        assert!(r.unitarity_residual > 0.5);

        for k in 0..24 {
            let th = k as f64 * PI / 12.0;
            let h = 1.0 / 2f64.sqrt();
            let r = solve_lambda_combination([c(h), c(h * th.cos()), c(h * th.sin())], Sign::Plus).unwrap();
            assert!(r.perfect, "theta={th}: {r:?}");
        }
        let r = solve_lambda_combination(
            [c(1.0 / 2f64.sqrt()), c(0.5), Complex64::new(0.0, 0.5)],
            Sign::Plus,
        )
        .unwrap();
        assert!((r.phase - 0.25).abs() < 1e-15 && !r.perfect);
    }
}
