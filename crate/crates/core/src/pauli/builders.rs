//! Raising/lowering, projector and coupling operators as Pauli expansions.
//!
//! Conventions: `S^± = (X ± iY)/2`, `E^± = (Id ± Z)/2`,
//! `T_ij^± = S_i^+ S_j^- ± S_i^- S_j^+`, `D_ij^± = S_i^+ S_j^+ ± S_i^- S_j^-`,
//! and the modified flip-flop `T̃_ij^±` carries a Z on every site strictly
//! between `i` and `j` in label order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{Letter, OperatorExpr, PauliString};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Two-body interaction type of a network Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HamiltonianKind {
    /// Flip-flop `T_ij^+`.
    Xy,
    /// Double-quantum `D_ij^+`.
    Dq,
    /// Jordan-Wigner modified flip-flop `T̃_ij^+`.
    Mxy,
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HamiltonianKind::Xy => "xy",
            HamiltonianKind::Dq => "dq",
            HamiltonianKind::Mxy => "mxy",
        })
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xy" => Ok(HamiltonianKind::Xy),
            "dq" => Ok(HamiltonianKind::Dq),
            "mxy" => Ok(HamiltonianKind::Mxy),
            other => Err(Error::Parameter(format!("unknown Hamiltonian kind `{other}`"))),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn letter_op(n: usize, site: usize, letter: Letter) -> Result<OperatorExpr> {
    OperatorExpr::single(n, site, letter)
}

pub fn s_plus(n: usize, j: usize) -> Result<OperatorExpr> {
    Ok(&(&letter_op(n, j, Letter::X)? * 0.5) + &(&letter_op(n, j, Letter::Y)? * c(0.0, 0.5)))
}

pub fn s_minus(n: usize, j: usize) -> Result<OperatorExpr> {
    Ok(&(&letter_op(n, j, Letter::X)? * 0.5) + &(&letter_op(n, j, Letter::Y)? * c(0.0, -0.5)))
}

pub fn e_plus(n: usize, j: usize) -> Result<OperatorExpr> {
    Ok(&(&OperatorExpr::identity(n)? * 0.5) + &(&letter_op(n, j, Letter::Z)? * 0.5))
}

pub fn e_minus(n: usize, j: usize) -> Result<OperatorExpr> {
    Ok(&(&OperatorExpr::identity(n)? * 0.5) - &(&letter_op(n, j, Letter::Z)? * 0.5))
}

fn distinct(i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::Index(format!("coupling needs two distinct sites, got {i}")));
    }
    Ok(())
}

fn pair(a: OperatorExpr, b: OperatorExpr, sign: Sign) -> OperatorExpr {
    match sign {
        Sign::Plus => &a + &b,
        Sign::Minus => &a - &b,
    }
}

/// `T_ij^± = S_i^+ S_j^- ± S_i^- S_j^+`. Defined for any distinct pair;
/// `T_ji^± = ±T_ij^±`.
pub fn flip_flop(n: usize, i: usize, j: usize, sign: Sign) -> Result<OperatorExpr> {
    distinct(i, j)?;
    let a = s_plus(n, i)?.product(&s_minus(n, j)?)?;
    let b = s_minus(n, i)?.product(&s_plus(n, j)?)?;
    Ok(pair(a, b, sign))
}

/// `L_ij^± = E_i^+ E_j^- ± E_i^- E_j^+`.
pub fn l_op(n: usize, i: usize, j: usize, sign: Sign) -> Result<OperatorExpr> {
    distinct(i, j)?;
    let a = e_plus(n, i)?.product(&e_minus(n, j)?)?;
    let b = e_minus(n, i)?.product(&e_plus(n, j)?)?;
    Ok(pair(a, b, sign))
}

/// `D_ij^± = S_i^+ S_j^+ ± S_i^- S_j^-`.
pub fn double_quantum(n: usize, i: usize, j: usize, sign: Sign) -> Result<OperatorExpr> {
    distinct(i, j)?;
    let a = s_plus(n, i)?.product(&s_plus(n, j)?)?;
    let b = s_minus(n, i)?.product(&s_minus(n, j)?)?;
    Ok(pair(a, b, sign))
}

/// Z on every site strictly between `i` and `j`.
pub(crate) fn z_string(n: usize, i: usize, j: usize) -> Result<PauliString> {
    let (lo, hi) = (i.min(j), i.max(j));
    let letters: Vec<(usize, Letter)> = ((lo + 1)..hi).map(|u| (u, Letter::Z)).collect();
    PauliString::from_letters(n, &letters)
}

/// `T̃_ij^± = T_ij^± Π_{min(i,j)<u<max(i,j)} Z_u`.
pub fn modified_flip_flop(n: usize, i: usize, j: usize, sign: Sign) -> Result<OperatorExpr> {
    let t = flip_flop(n, i, j, sign)?;
    t.right_mul_string(&z_string(n, i, j)?)
}

/// Coupling operator of the given kind on a canonical pair `i < j`.
pub fn build_coupling(
    kind: HamiltonianKind,
    i: usize,
    j: usize,
    sign: Sign,
    n: usize,
) -> Result<OperatorExpr> {
    if i >= j {
        return Err(Error::Index(format!(
            "coupling ({i},{j}) must satisfy i < j; use T_ji = ±T_ij to canonicalize"
        )));
    }
    if j > n {
        return Err(Error::Index(format!("site {j} outside 1..={n}")));
    }
    match kind {
        HamiltonianKind::Xy => flip_flop(n, i, j, sign),
        HamiltonianKind::Dq => double_quantum(n, i, j, sign),
        HamiltonianKind::Mxy => modified_flip_flop(n, i, j, sign),
    }
}
