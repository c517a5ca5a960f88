use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{i_power, Letter, PauliString, ScaledString};
use crate::error::{Error, Result};

/// Amplitudes below this magnitude are treated as symbolic zeros.
pub const ZERO_THRESHOLD: f64 = 1e-14;

/// A complex-weighted sum of Pauli strings, kept in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorExpr {
    n_sites: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl OperatorExpr {
    pub fn zero(n_sites: usize) -> Self {
        OperatorExpr {
            n_sites,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_sites: usize) -> Result<Self> {
        Ok(OperatorExpr::from_string(PauliString::identity(n_sites)?))
    }

    pub fn from_string(s: PauliString) -> Self {
        let mut e = OperatorExpr::zero(s.n_sites());
        e.terms.insert(s, Complex64::new(1.0, 0.0));
        e
    }

    pub fn from_scaled(s: ScaledString) -> Self {
        let mut e = OperatorExpr::zero(s.string.n_sites());
        e.add_term(s.string, s.phase);
        e
    }

    /// Single-letter operator, e.g. `Z_j`.
    pub fn single(n_sites: usize, site: usize, letter: Letter) -> Result<Self> {
        Ok(OperatorExpr::from_string(PauliString::from_letters(
            n_sites,
            &[(site, letter)],
        )?))
    }

    /// Parses the compact `X1 Z2 Y4` / `ID` form.
    pub fn parse_string(n_sites: usize, text: &str) -> Result<Self> {
        Ok(OperatorExpr::from_string(PauliString::parse(n_sites, text)?))
    }

    pub fn from_terms<I>(n_sites: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut e = OperatorExpr::zero(n_sites);
        for (s, a) in terms {
            e.check(s.n_sites())?;
            e.add_term(s, a);
        }
        Ok(e)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    /// Largest amplitude magnitude, 0 for the empty expression.
    pub fn max_amplitude(&self) -> f64 {
        self.terms.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    fn check(&self, other: usize) -> Result<()> {
        if self.n_sites != other {
            return Err(Error::Dimension {
                left: self.n_sites,
                right: other,
            });
        }
        Ok(())
    }

    pub fn add_term(&mut self, s: PauliString, amp: Complex64) {
        debug_assert_eq!(s.n_sites(), self.n_sites);
        let slot = self.terms.entry(s).or_default();
        *slot += amp;
        if slot.norm() < ZERO_THRESHOLD {
            self.terms.remove(&s);
        }
    }

    /// Drops every term whose magnitude is below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, a| a.norm() >= tol);
    }

    /// Drops terms smaller than `rel` times the largest amplitude.
    pub fn prune_relative(&mut self, rel: f64) {
        let cut = rel * self.max_amplitude();
        self.prune(cut.max(ZERO_THRESHOLD));
    }

    pub fn scale(&self, c: Complex64) -> OperatorExpr {
        let mut out = OperatorExpr::zero(self.n_sites);
        for (s, a) in &self.terms {
            out.add_term(*s, a * c);
        }
        out
    }

    pub fn try_add(&self, other: &OperatorExpr) -> Result<OperatorExpr> {
        self.check(other.n_sites)?;
        let mut out = self.clone();
        for (s, a) in &other.terms {
            out.add_term(*s, *a);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &OperatorExpr) -> Result<OperatorExpr> {
        self.check(other.n_sites)?;
        let mut out = self.clone();
        for (s, a) in &other.terms {
            out.add_term(*s, -*a);
        }
        Ok(out)
    }

    /// Operator product `self * other`.
    pub fn product(&self, other: &OperatorExpr) -> Result<OperatorExpr> {
        self.check(other.n_sites)?;
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (sa, a) in &self.terms {
            for (sb, b) in &other.terms {
                let (k, s) = sa.mul_raw(sb);
                *acc.entry(s).or_default() += a * b * i_power(k);
            }
        }
        acc.retain(|_, a| a.norm() >= ZERO_THRESHOLD);
        Ok(OperatorExpr {
            n_sites: self.n_sites,
            terms: acc,
        })
    }

    /// `[self, other] = self*other - other*self`, computed term pairwise so
    /// that commuting pairs never enter the sum.
    pub fn commutator(&self, other: &OperatorExpr) -> Result<OperatorExpr> {
        self.check(other.n_sites)?;
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (sa, a) in &self.terms {
            for (sb, b) in &other.terms {
                if sa.commutes_with(sb) {
                    continue;
                }
                // anticommuting strings: ab - ba = 2ab
                let (k, s) = sa.mul_raw(sb);
                *acc.entry(s).or_default() += a * b * i_power(k) * 2.0;
            }
        }
        acc.retain(|_, a| a.norm() >= ZERO_THRESHOLD);
        Ok(OperatorExpr {
            n_sites: self.n_sites,
            terms: acc,
        })
    }

    pub fn left_mul_string(&self, p: &PauliString) -> Result<OperatorExpr> {
        self.check(p.n_sites())?;
        let mut out = OperatorExpr::zero(self.n_sites);
        for (s, a) in &self.terms {
            let (k, r) = p.mul_raw(s);
            out.add_term(r, a * i_power(k));
        }
        Ok(out)
    }

    pub fn right_mul_string(&self, p: &PauliString) -> Result<OperatorExpr> {
        self.check(p.n_sites())?;
        let mut out = OperatorExpr::zero(self.n_sites);
        for (s, a) in &self.terms {
            let (k, r) = s.mul_raw(p);
            out.add_term(r, a * i_power(k));
        }
        Ok(out)
    }

    /// Hermitian adjoint; strings are Hermitian so only amplitudes conjugate.
    pub fn adjoint(&self) -> OperatorExpr {
        OperatorExpr {
            n_sites: self.n_sites,
            terms: self.terms.iter().map(|(s, a)| (*s, a.conj())).collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|a| a.im.abs() <= tol)
    }

    /// Normalized Hilbert-Schmidt inner product `Tr(A^dag B) / 2^N`.
    pub fn hs_inner(&self, other: &OperatorExpr) -> Result<Complex64> {
        self.check(other.n_sites)?;
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::default();
        for (s, a) in &small.terms {
            if let Some(b) = large.terms.get(s) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    pub fn hs_norm_sq(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, a| acc + a.norm_sqr())
    }

    /// Splits into the part commuting with `Z_site` (letters I/Z there) and
    /// the part anticommuting with it (letters X/Y).
    pub fn split_end_subspaces(&self, site: usize) -> Result<(OperatorExpr, OperatorExpr)> {
        if site == 0 || site > self.n_sites {
            return Err(Error::Index(format!(
                "end site {site} outside 1..={}",
                self.n_sites
            )));
        }
        let mut g = OperatorExpr::zero(self.n_sites);
        let mut gt = OperatorExpr::zero(self.n_sites);
        for (s, a) in &self.terms {
            if s.letter(site).is_flip() {
                gt.terms.insert(*s, *a);
            } else {
                g.terms.insert(*s, *a);
            }
        }
        Ok((g, gt))
    }

    /// Largest coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &OperatorExpr) -> Result<f64> {
        Ok(self.try_sub(other)?.max_amplitude())
    }

    pub fn approx_eq(&self, other: &OperatorExpr, tol: f64) -> bool {
        self.n_sites == other.n_sites
            && self
                .max_abs_diff(other)
                .map(|d| d <= tol)
                .unwrap_or(false)
    }

    /// Canonical rendering, one `(re,im) STRING` line per term.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, a) in &self.terms {
            if !first {
                writeln!(f)?;
            }
            write!(f, "({},{}) {}", fmt_real(a.re), fmt_real(a.im), s)?;
            first = false;
        }
        Ok(())
    }
}

impl Add for &OperatorExpr {
    type Output = OperatorExpr;
    fn add(self, rhs: &OperatorExpr) -> OperatorExpr {
        self.try_add(rhs).expect("operator sizes must match")
    }
}

impl Sub for &OperatorExpr {
    type Output = OperatorExpr;
    fn sub(self, rhs: &OperatorExpr) -> OperatorExpr {
        self.try_sub(rhs).expect("operator sizes must match")
    }
}

impl Neg for &OperatorExpr {
    type Output = OperatorExpr;
    fn neg(self) -> OperatorExpr {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<f64> for &OperatorExpr {
    type Output = OperatorExpr;
    fn mul(self, rhs: f64) -> OperatorExpr {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Mul<Complex64> for &OperatorExpr {
    type Output = OperatorExpr;
    fn mul(self, rhs: Complex64) -> OperatorExpr {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::builders::{flip_flop, modified_flip_flop, s_plus, Sign};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(n: usize, j: usize) -> OperatorExpr {
        OperatorExpr::single(n, j, Letter::Z).unwrap()
    }

    fn random_expr(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> OperatorExpr {
        let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
        let mut e = OperatorExpr::zero(n);
        for _ in 0..terms {
            let l: Vec<(usize, Letter)> = (1..=n).map(|s| (s, letters[rng.gen_range(0..4)])).collect();
            let s = PauliString::from_letters(n, &l).unwrap();
            e.add_term(s, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        e
    }

    #[test]
    fn z_times_s_plus() {
        let n = 3;
        let sp = s_plus(n, 1).unwrap();
        assert!(z(n, 1).product(&sp).unwrap().approx_eq(&sp, 0.0));
    }

    #[test]
    fn hs_inner_basics() {
        let id = OperatorExpr::identity(3).unwrap();
        assert_eq!(id.hs_inner(&id).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(z(3, 1).hs_inner(&z(3, 2)).unwrap(), Complex64::default());
        assert!(id.hs_inner(&OperatorExpr::identity(2).unwrap()).is_err());
    }

    #[test]
    fn disjoint_flip_flops_commute() {
        let a = flip_flop(4, 1, 2, Sign::Plus).unwrap();
        let b = flip_flop(4, 3, 4, Sign::Plus).unwrap();
        assert!(a.commutator(&b).unwrap().is_empty());
    }

    #[test]
    fn split_reconstructs() {
        let n = 4;
        let e = &z(n, 1) + &OperatorExpr::single(n, n, Letter::X).unwrap();
        let (g, gt) = e.split_end_subspaces(n).unwrap();
        assert_eq!(g, z(n, 1));
        assert_eq!(gt, OperatorExpr::single(n, n, Letter::X).unwrap());
        assert!(e.split_end_subspaces(5).is_err());
    }

    #[test]
    fn split_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let e = random_expr(&mut rng, 5, 12);
            let (g, gt) = e.split_end_subspaces(5).unwrap();
            let lhs = g.hs_inner(&g).unwrap().re + gt.hs_inner(&gt).unwrap().re;
            let rhs = e.hs_inner(&e).unwrap().re;
            assert!((lhs - rhs).abs() < 1e-12);
            assert!((&g + &gt).approx_eq(&e, 0.0));
        }
    }

    #[test]
    fn render_format() {
        let t = flip_flop(2, 1, 2, Sign::Plus).unwrap();
        assert_eq!(t.render(), "(0.5,0) X1 X2\n(0.5,0) Y1 Y2");
        assert_eq!(OperatorExpr::zero(2).render(), "");
        let tt = modified_flip_flop(3, 1, 3, Sign::Plus).unwrap();
        assert_eq!(tt.render(), "(0.5,0) X1 Z2 X3\n(0.5,0) Y1 Z2 Y3");
    }

    #[test]
    fn zero_threshold_drops_dust() {
        let s = PauliString::parse(2, "X1").unwrap();
        let mut e = OperatorExpr::zero(2);
        e.add_term(s, Complex64::new(1.0, 0.0));
        e.add_term(s, Complex64::new(-1.0 + 1e-15, 0.0));
        assert!(e.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn commutator_antisymmetry_and_jacobi(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_expr(&mut rng, 4, 3);
            let b = random_expr(&mut rng, 4, 3);
            let c = random_expr(&mut rng, 4, 3);
            let ab = a.commutator(&b).unwrap();
            let ba = b.commutator(&a).unwrap();
            prop_assert!((&ab + &ba).max_amplitude() < 1e-12);
            let j1 = a.commutator(&b.commutator(&c).unwrap()).unwrap();
            let j2 = b.commutator(&c.commutator(&a).unwrap()).unwrap();
            let j3 = c.commutator(&a.commutator(&b).unwrap()).unwrap();
            prop_assert!((&(&j1 + &j2) + &j3).max_amplitude() < 1e-12);
            // commutator agrees with the plain product route
            let direct = &a.product(&b).unwrap() - &b.product(&a).unwrap();
            prop_assert!(direct.approx_eq(&ab, 1e-12));
        }
    }
}
