//! Symbolic algebra over N-site Pauli strings.
//!
//! A [`PauliString`] packs two bits per site into a `u128` (bit `2k` is the X
//! component of site `k + 1`, bit `2k + 1` the Z component), so strings of up
//! to [`MAX_SITES`] sites are plain `Copy` values and the packed integer is the
//! canonical ordering key. Letters are defined as `P(x, z) = i^{xz} X^x Z^z`,
//! which makes every letter Hermitian and `Y = iXZ`.

mod builders;
mod expr;

pub use builders::{
    build_coupling, double_quantum, e_minus, e_plus, flip_flop, l_op, modified_flip_flop,
    s_minus, s_plus, HamiltonianKind, Sign,
};
pub use expr::{OperatorExpr, ZERO_THRESHOLD};

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of sites a packed string can hold.
pub const MAX_SITES: usize = 64;

const EVEN_BITS: u128 = 0x5555_5555_5555_5555_5555_5555_5555_5555;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn code(self) -> u128 {
        match self {
            Letter::I => 0,
            Letter::X => 1,
            Letter::Z => 2,
            Letter::Y => 3,
        }
    }

    fn from_code(code: u128) -> Self {
        match code & 3 {
            0 => Letter::I,
            1 => Letter::X,
            2 => Letter::Z,
            _ => Letter::Y,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    /// True for the letters that anticommute with Z.
    pub fn is_flip(self) -> bool {
        matches!(self, Letter::X | Letter::Y)
    }
}

/// A tensor product of single-site Pauli letters on `n_sites` sites.
///
/// Field order matters: the derived `Ord` compares the packed code first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    code: u128,
    n_sites: u8,
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::Capacity {
                what: format!("Pauli string on {n_sites} sites"),
                limit: MAX_SITES,
                hint: "",
            });
        }
        Ok(PauliString {
            code: 0,
            n_sites: n_sites as u8,
        })
    }

    /// Builds a string from `(site, letter)` pairs with 1-based sites.
    /// Repeated sites overwrite earlier letters.
    pub fn from_letters(n_sites: usize, letters: &[(usize, Letter)]) -> Result<Self> {
        let mut s = PauliString::identity(n_sites)?;
        for &(site, letter) in letters {
            s = s.with_letter(site, letter)?;
        }
        Ok(s)
    }

    /// Parses the compact `X1 Z2 Y4` form (or `ID`).
    pub fn parse(n_sites: usize, text: &str) -> Result<Self> {
        let mut s = PauliString::identity(n_sites)?;
        let text = text.trim();
        if text == "ID" || text.is_empty() {
            return Ok(s);
        }
        for tok in text.split_whitespace() {
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('X') => Letter::X,
                Some('Y') => Letter::Y,
                Some('Z') => Letter::Z,
                Some('I') => Letter::I,
                _ => return Err(Error::Index(format!("bad Pauli token `{tok}`"))),
            };
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Index(format!("bad site in token `{tok}`")))?;
            s = s.with_letter(site, letter)?;
        }
        Ok(s)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites as usize
    }

    /// The packed two-bits-per-site encoding.
    pub fn packed(&self) -> u128 {
        self.code
    }

    pub fn is_identity(&self) -> bool {
        self.code == 0
    }

    fn check_site(&self, site: usize) -> Result<usize> {
        if site == 0 || site > self.n_sites() {
            return Err(Error::Index(format!(
                "site {site} outside 1..={}",
                self.n_sites
            )));
        }
        Ok(site - 1)
    }

    pub fn with_letter(mut self, site: usize, letter: Letter) -> Result<Self> {
        let k = self.check_site(site)?;
        self.code &= !(3u128 << (2 * k));
        self.code |= letter.code() << (2 * k);
        Ok(self)
    }

    /// Letter at a 1-based site. Panics on an out-of-range site.
    pub fn letter(&self, site: usize) -> Letter {
        let k = self.check_site(site).expect("site in range");
        Letter::from_code(self.code >> (2 * k))
    }

    pub fn letters(&self) -> impl Iterator<Item = (usize, Letter)> + '_ {
        (1..=self.n_sites()).map(move |s| (s, self.letter(s)))
    }

    /// Sites (1-based) carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters()
            .filter(|(_, l)| *l != Letter::I)
            .map(|(s, _)| s)
            .collect()
    }

    /// Sites carrying X or Y.
    pub fn flip_sites(&self) -> Vec<usize> {
        self.letters()
            .filter(|(_, l)| l.is_flip())
            .map(|(s, _)| s)
            .collect()
    }

    pub(crate) fn x_mask(&self) -> u128 {
        self.code & EVEN_BITS
    }

    pub(crate) fn z_mask(&self) -> u128 {
        (self.code >> 1) & EVEN_BITS
    }

    /// Per-site bit masks in the dense basis-index layout, where site 1 is
    /// the most significant bit.
    pub fn dense_masks(&self) -> (usize, usize, u32) {
        let n = self.n_sites();
        let (mut xm, mut zm) = (0usize, 0usize);
        for k in 0..n {
            let bit = 1usize << (n - 1 - k);
            if (self.code >> (2 * k)) & 1 == 1 {
                xm |= bit;
            }
            if (self.code >> (2 * k + 1)) & 1 == 1 {
                zm |= bit;
            }
        }
        let y_count = (self.x_mask() & self.z_mask()).count_ones();
        (xm, zm, y_count)
    }

    /// True when the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (self.x_mask() & other.z_mask()).count_ones()
            + (self.z_mask() & other.x_mask()).count_ones();
        anti.is_multiple_of(2)
    }

    /// Product `self * other` as a phase `i^k` (k returned mod 4) and a string.
    pub fn mul_raw(&self, other: &PauliString) -> (u32, PauliString) {
        let (x1, z1) = (self.x_mask(), self.z_mask());
        let (x2, z2) = (other.x_mask(), other.z_mask());
        let code = self.code ^ other.code;
        let out = PauliString {
            code,
            n_sites: self.n_sites,
        };
        let (x3, z3) = (out.x_mask(), out.z_mask());
        let e = (x1 & z1).count_ones() + (x2 & z2).count_ones() + 2 * (z1 & x2).count_ones();
        let k = (e + 4 * 64 - (x3 & z3).count_ones()) % 4;
        (k, out)
    }
}

pub fn i_power(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "ID");
        }
        let mut first = true;
        for (site, letter) in self.letters() {
            if letter == Letter::I {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", letter.symbol(), site)?;
            first = false;
        }
        Ok(())
    }
}

/// A Pauli string with a complex prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledString {
    pub phase: Complex64,
    pub string: PauliString,
}

impl ScaledString {
    pub fn new(phase: Complex64, string: PauliString) -> Self {
        ScaledString { phase, string }
    }

    pub fn unit(string: PauliString) -> Self {
        ScaledString::new(Complex64::new(1.0, 0.0), string)
    }
}

/// Operator product of two scaled strings.
pub fn mul(a: &ScaledString, b: &ScaledString) -> Result<ScaledString> {
    if a.string.n_sites != b.string.n_sites {
        return Err(Error::Dimension {
            left: a.string.n_sites(),
            right: b.string.n_sites(),
        });
    }
    let (k, s) = a.string.mul_raw(&b.string);
    Ok(ScaledString::new(a.phase * b.phase * i_power(k), s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn s(n: usize, text: &str) -> PauliString {
        PauliString::parse(n, text).unwrap()
    }

    #[test]
    fn squares_and_xy() {
        let x = ScaledString::unit(s(2, "X1"));
        let y = ScaledString::unit(s(2, "Y1"));
        assert_eq!(mul(&x, &x).unwrap(), ScaledString::unit(s(2, "ID")));
        assert_eq!(mul(&x, &y).unwrap(), ScaledString::new(c(0., 1.), s(2, "Z1")));
        assert_eq!(mul(&y, &x).unwrap(), ScaledString::new(c(0., -1.), s(2, "Z1")));
    }

    #[test]
    fn dimension_mismatch() {
        let a = ScaledString::unit(s(2, "X1"));
        let b = ScaledString::unit(s(3, "X1"));
        assert!(matches!(mul(&a, &b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn render_and_parse() {
        let p = s(5, "X1 Z2 Y4");
        assert_eq!(p.to_string(), "X1 Z2 Y4");
        assert_eq!(s(3, "ID").to_string(), "ID");
        assert!(PauliString::parse(3, "X4").is_err());
        assert!(PauliString::parse(3, "Q1").is_err());
        assert!(PauliString::identity(65).is_err());
    }

    #[test]
    fn single_site_table() {
        // Oracle: 2x2 matrix products.
        let m = |l: Letter| -> [[Complex64; 2]; 2] {
            match l {
                Letter::I => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
                Letter::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
                Letter::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
                Letter::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
            }
        };
        let prod = |a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]| {
            let mut r = [[c(0., 0.); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        r[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            r
        };
        let all = [Letter::I, Letter::X, Letter::Y, Letter::Z];
        for &a in &all {
            for &b in &all {
                let got = mul(
                    &ScaledString::unit(PauliString::from_letters(1, &[(1, a)]).unwrap()),
                    &ScaledString::unit(PauliString::from_letters(1, &[(1, b)]).unwrap()),
                )
                .unwrap();
                let lhs = prod(m(a), m(b));
                let rm = m(got.string.letter(1));
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((lhs[i][j] - got.phase * rm[i][j]).norm() < 1e-15);
                    }
                }
            }
        }
    }

    fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0u8..4, n).prop_map(move |v| {
            let letters: Vec<(usize, Letter)> = v
                .iter()
                .enumerate()
                .map(|(k, &l)| (k + 1, [Letter::I, Letter::X, Letter::Y, Letter::Z][l as usize]))
                .collect();
            PauliString::from_letters(n, &letters).unwrap()
        })
    }

    proptest! {
        #[test]
        fn product_is_associative(a in arb_string(7), b in arb_string(7), cc in arb_string(7)) {
            let (a, b, cc) = (ScaledString::unit(a), ScaledString::unit(b), ScaledString::unit(cc));
            let left = mul(&mul(&a, &b).unwrap(), &cc).unwrap();
            let right = mul(&a, &mul(&b, &cc).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn strings_square_to_identity(a in arb_string(9)) {
            let sq = mul(&ScaledString::unit(a), &ScaledString::unit(a)).unwrap();
            prop_assert_eq!(sq, ScaledString::unit(PauliString::identity(9).unwrap()));
        }

        #[test]
        fn product_phases_are_quarter_turns(a in arb_string(5), b in arb_string(5)) {
            let p = mul(&ScaledString::unit(a), &ScaledString::unit(b)).unwrap().phase;
            prop_assert!([c(1.,0.), c(-1.,0.), c(0.,1.), c(0.,-1.)].contains(&p));
            // commuting strings give a real phase
            prop_assert_eq!(a.commutes_with(&b), p.im == 0.0);
        }
    }
}
