//! Hilbert-Schmidt geometry of Z-to-Z transport.
//!
//! A propagator `U` is read as a unit vector of Pauli coefficients. The
//! target site splits that space into `G` (strings with `I`/`Z` at the
//! target, commuting with `Z_t`) and `G~` (strings with `X`/`Y` there).
//! The fidelity is `<U| S |U>` with `S(A) = Z_s A Z_t`.

pub mod appendix;

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{dense_capped, general_fidelity_of, CMatrix, DenseOperator};
use crate::network::Ends;
use crate::pauli::{Letter, OperatorExpr, PauliString, ZERO_THRESHOLD};

pub use appendix::{
    appendix_unitary, classify_appendix_form, end_patterns, solve_lambda_combination,
    transport_sign, FormMatch, LambdaReport, FORM_COUNT,
};

/// Tolerance for floating-point verdicts.
pub const VERDICT_TOL: f64 = 1e-8;
/// Tolerance for invariance residuals and fidelity changes.
pub const INVARIANCE_TOL: f64 = 1e-10;

fn check_ends(n: usize, ends: Ends) -> Result<()> {
    for s in [ends.source, ends.target] {
        if s == 0 || s > n {
            return Err(Error::Index(format!("end site {s} outside 1..={n}")));
        }
    }
    if ends.source == ends.target {
        return Err(Error::Index("end sites must differ".into()));
    }
    Ok(())
}

fn z_string(n: usize, site: usize) -> Result<PauliString> {
    PauliString::from_letters(n, &[(site, Letter::Z)])
}

fn z_pair(n: usize, ends: Ends) -> Result<PauliString> {
    PauliString::from_letters(n, &[(ends.source, Letter::Z), (ends.target, Letter::Z)])
}

/// `Z_s Z_t · A`.
pub fn apply_z_pair(a: &OperatorExpr, ends: Ends) -> Result<OperatorExpr> {
    check_ends(a.n_sites(), ends)?;
    a.left_mul_string(&z_pair(a.n_sites(), ends)?)
}

/// Reflection about `G`: `+1` on `G` terms, `-1` on `G~` terms.
pub fn reflect(a: &OperatorExpr, ends: Ends) -> Result<OperatorExpr> {
    check_ends(a.n_sites(), ends)?;
    let (g, gt) = a.split_end_subspaces(ends.target)?;
    Ok(&g - &gt)
}

/// `S(A) = Z_s A Z_t`.
pub fn apply_s(a: &OperatorExpr, ends: Ends) -> Result<OperatorExpr> {
    check_ends(a.n_sites(), ends)?;
    let n = a.n_sites();
    a.left_mul_string(&z_string(n, ends.source)?)?
        .right_mul_string(&z_string(n, ends.target)?)
}

/// `<U|S|U> = Tr(U^dag Z_s U Z_t) / 2^N`.
pub fn fidelity_hs(u: &OperatorExpr, ends: Ends) -> Result<f64> {
    Ok(u.hs_inner(&apply_s(u, ends)?)?.re)
}

fn z_diag(n: usize, site: usize) -> Vec<f64> {
    let bit = 1usize << (n - site);
    (0..1usize << n)
        .map(|b| if b & bit == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Dense counterpart of [`fidelity_hs`]: `Σ_ab |U_ab|^2 z_s(a) z_t(b) / 2^N`.
pub fn fidelity_hs_dense(u: &DenseOperator, ends: Ends) -> Result<f64> {
    let n = u.n_sites();
    check_ends(n, ends)?;
    let (zs, zt) = (z_diag(n, ends.source), z_diag(n, ends.target));
    let m = u.matrix();
    let mut acc = 0.0;
    for b in 0..m.ncols() {
        for a in 0..m.nrows() {
            acc += m[(a, b)].norm_sqr() * zs[a] * zt[b];
        }
    }
    Ok(acc / u.dim() as f64)
}

/// Outcome of the equal-projection and eigenvector tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub norm_g: f64,
    pub norm_gt: f64,
    pub eig_residual_g: f64,
    pub eig_residual_gt: f64,
    pub fidelity_hs: f64,
    pub verdict: bool,
}

impl ConditionReport {
    fn assemble(norm_g: f64, norm_gt: f64, res_g: f64, res_gt: f64, fidelity: f64) -> Self {
        let verdict = (norm_g - 0.5).abs() < VERDICT_TOL
            && (norm_gt - 0.5).abs() < VERDICT_TOL
            && res_g < VERDICT_TOL
            && res_gt < VERDICT_TOL;
        ConditionReport {
            norm_g,
            norm_gt,
            eig_residual_g: res_g,
            eig_residual_gt: res_gt,
            fidelity_hs: fidelity,
            verdict,
        }
    }

    /// Fixed-order `key: value` lines.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "norm_G: {:.12}", self.norm_g)?;
        writeln!(f, "norm_Gt: {:.12}", self.norm_gt)?;
        writeln!(f, "eig_residual_G: {:.3e}", self.eig_residual_g)?;
        writeln!(f, "eig_residual_Gt: {:.3e}", self.eig_residual_gt)?;
        writeln!(f, "fidelity: {:.12}", self.fidelity_hs)?;
        write!(f, "verdict: {}", if self.verdict { "pass" } else { "fail" })
    }
}

fn require_unit_norm(norm: f64) -> Result<()> {
    if (norm - 1.0).abs() > VERDICT_TOL {
        return Err(Error::Contract(format!(
            "propagator must have unit HS norm, got {norm:.12}"
        )));
    }
    Ok(())
}

/// Tests `|U^G|^2 = |U^G~|^2 = 1/2` and `Z_s Z_t U^G = U^G`, `Z_s Z_t U^G~ = -U^G~`.
pub fn check_perfect_transport(u: &OperatorExpr, ends: Ends) -> Result<ConditionReport> {
    check_ends(u.n_sites(), ends)?;
    require_unit_norm(u.hs_norm_sq())?;
    let (g, gt) = u.split_end_subspaces(ends.target)?;
    let res_g = (&apply_z_pair(&g, ends)? - &g).hs_norm_sq().sqrt();
    let res_gt = (&apply_z_pair(&gt, ends)? + &gt).hs_norm_sq().sqrt();
    Ok(ConditionReport::assemble(
        g.hs_norm_sq(),
        gt.hs_norm_sq(),
        res_g,
        res_gt,
        fidelity_hs(u, ends)?,
    ))
}

/// Dense version of [`check_perfect_transport`]; the subspace projections are
/// `(U ± Z_t U Z_t) / 2`, applied entrywise.
pub fn check_perfect_transport_dense(u: &DenseOperator, ends: Ends) -> Result<ConditionReport> {
    let n = u.n_sites();
    check_ends(n, ends)?;
    let d = u.dim() as f64;
    let m = u.matrix();
    let (zs, zt) = (z_diag(n, ends.source), z_diag(n, ends.target));
    let (mut norm, mut norm_g, mut norm_gt, mut res_g, mut res_gt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for b in 0..m.ncols() {
        for a in 0..m.nrows() {
            let x = m[(a, b)];
            let conj = x * (zt[a] * zt[b]);
            let (g, gt) = ((x + conj) * 0.5, (x - conj) * 0.5);
            let pair = zs[a] * zt[a];
            norm += x.norm_sqr();
            norm_g += g.norm_sqr();
            norm_gt += gt.norm_sqr();
            res_g += (g * pair - g).norm_sqr();
            res_gt += (gt * pair + gt).norm_sqr();
        }
    }
    require_unit_norm(norm / d)?;
    Ok(ConditionReport::assemble(
        norm_g / d,
        norm_gt / d,
        (res_g / d).sqrt(),
        (res_gt / d).sqrt(),
        fidelity_hs_dense(u, ends)?,
    ))
}

/// Residual of `[V, S]` on sampled basis strings and the fidelity change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    pub residual: f64,
    pub fidelity_before: f64,
    pub fidelity_after: f64,
    pub invariant: bool,
}

const INVARIANCE_SAMPLES: usize = 48;
const INVARIANCE_SEED: u64 = 0x5eed;

fn sample_strings(n: usize) -> Vec<PauliString> {
    let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let total = 1u64.checked_shl(2 * n as u32).unwrap_or(u64::MAX);
    if total <= INVARIANCE_SAMPLES as u64 {
        return (0..total)
            .map(|code| {
                let l: Vec<_> = (1..=n)
                    .map(|s| (s, letters[((code >> (2 * (s - 1))) & 3) as usize]))
                    .collect();
                PauliString::from_letters(n, &l).expect("sites in range")
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(INVARIANCE_SEED);
    (0..INVARIANCE_SAMPLES)
        .map(|_| {
            let l: Vec<_> = (1..=n).map(|s| (s, letters[rng.gen_range(0..4)])).collect();
            PauliString::from_letters(n, &l).expect("sites in range")
        })
        .collect()
}

fn scale_rows(m: &CMatrix, diag: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (r, mut row) in out.row_iter_mut().enumerate() {
        row *= Complex64::new(diag[r], 0.0);
    }
    out
}

fn scale_cols(m: &CMatrix, diag: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (c, mut col) in out.column_iter_mut().enumerate() {
        col *= Complex64::new(diag[c], 0.0);
    }
    out
}

/// Checks that left multiplication by `V` commutes with `S`, i.e.
/// `V Z_s A Z_t = Z_s V A Z_t` on a seeded sample of basis strings `A`, and
/// that `F(VU) = F(U)`.
pub fn check_invariance(v: &DenseOperator, u: &DenseOperator, ends: Ends) -> Result<InvarianceReport> {
    let n = v.n_sites();
    if u.n_sites() != n {
        return Err(Error::Dimension {
            left: n,
            right: u.n_sites(),
        });
    }
    check_ends(n, ends)?;
    let unit = v.unitarity_residual();
    if unit > VERDICT_TOL {
        return Err(Error::Contract(format!("V is not unitary (residual {unit:.3e})")));
    }
    let (zs, zt) = (z_diag(n, ends.source), z_diag(n, ends.target));
    let vm = v.matrix();
    let mut residual: f64 = 0.0;
    for s in sample_strings(n) {
        let a = dense_capped(&OperatorExpr::from_string(s), n)?;
        let az = scale_cols(a.matrix(), &zt);
        let lhs = vm * scale_rows(&az, &zs);
        let rhs = scale_rows(&(vm * &az), &zs);
        residual = residual.max((lhs - rhs).camax());
    }
    let before = fidelity_hs_dense(u, ends)?;
    let after = fidelity_hs_dense(&v.mul(u)?, ends)?;
    Ok(InvarianceReport {
        residual,
        fidelity_before: before,
        fidelity_after: after,
        invariant: residual < INVARIANCE_TOL && (after - before).abs() < INVARIANCE_TOL,
    })
}

/// Where a Hamiltonian's terms live relative to the target site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Only `I`/`Z` at the target.
    G,
    /// Only `X`/`Y` at the target.
    GTilde,
    Mixed,
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportReport {
    pub support: Support,
    /// `Z_s Z_t H = -H`, checked exactly on coefficients.
    pub anti_eigen: Option<bool>,
    /// `max |H^2 - (Id - Z_s Z_t)/2|`.
    pub square_residual: Option<f64>,
    /// `max |H^4 - H^2|`.
    pub fourth_residual: Option<f64>,
}

impl SupportReport {
    /// Whether the pure-`G~` conditions apply and hold.
    pub fn holds(&self) -> bool {
        self.anti_eigen == Some(true)
            && self.square_residual.is_some_and(|r| r < INVARIANCE_TOL)
            && self.fourth_residual.is_some_and(|r| r < INVARIANCE_TOL)
    }
}

/// Classifies `H` by support and, for purely `G~` Hamiltonians, checks the
/// eigen-condition and the projector identities `H^2 = (Id - Z_s Z_t)/2 = H^4`.
pub fn hamiltonian_support_check(h: &OperatorExpr, ends: Ends) -> Result<SupportReport> {
    let n = h.n_sites();
    check_ends(n, ends)?;
    if !h.is_hermitian(ZERO_THRESHOLD) {
        return Err(Error::Contract("Hamiltonian must be Hermitian".into()));
    }
    let (g, gt) = h.split_end_subspaces(ends.target)?;
    let support = match (g.is_empty(), gt.is_empty()) {
        (true, true) => Support::Empty,
        (false, true) => Support::G,
        (true, false) => Support::GTilde,
        (false, false) => Support::Mixed,
    };
    if support != Support::GTilde {
        return Ok(SupportReport {
            support,
            anti_eigen: None,
            square_residual: None,
            fourth_residual: None,
        });
    }
    let anti = apply_z_pair(h, ends)?.approx_eq(&-h, ZERO_THRESHOLD);
    let mut half = OperatorExpr::identity(n)?;
    half.add_term(z_pair(n, ends)?, Complex64::new(-1.0, 0.0));
    let half = &half * 0.5;
    let h2 = h.product(h)?;
    let h4 = h2.product(&h2)?;
    Ok(SupportReport {
        support,
        anti_eigen: Some(anti),
        square_residual: Some(h2.max_abs_diff(&half)?),
        fourth_residual: Some(h4.max_abs_diff(&h2)?),
    })
}

/// Simultaneous `Z`, `X` and `Y` transport fidelities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapReport {
    pub z: f64,
    pub x: f64,
    pub y: f64,
    pub swap: bool,
}

/// Demands `F = 1` for `Z_s -> Z_t`, `X_s -> X_t` and `Y_s -> Y_t` jointly.
pub fn swap_transport_check(u: &DenseOperator, ends: Ends) -> Result<SwapReport> {
    let n = u.n_sites();
    check_ends(n, ends)?;
    let f = |l: Letter| -> Result<f64> {
        let a = PauliString::from_letters(n, &[(ends.source, l)])?;
        let b = PauliString::from_letters(n, &[(ends.target, l)])?;
        general_fidelity_of(u, &a, &b)
    };
    let (z, x, y) = (f(Letter::Z)?, f(Letter::X)?, f(Letter::Y)?);
    Ok(SwapReport {
        z,
        x,
        y,
        swap: [z, x, y].iter().all(|v| (v - 1.0).abs() < VERDICT_TOL),
    })
}
