//! Exact dense evolution in the full `2^N` Hilbert space.
//!
//! Basis index bit `N - k` (counting from the least significant bit as 1)
//! holds the state of site `k`, so site 1 is the most significant qubit and
//! matrices follow the Kronecker order `site 1 ⊗ site 2 ⊗ ...`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::network::{hamiltonian, Ends, HamiltonianKind, SpinNetwork};
use crate::pauli::{i_power, OperatorExpr, PauliString};
use crate::trace::FidelityTrace;

pub type CMatrix = DMatrix<Complex64>;

/// Default largest site count for dense matrices.
pub const DEFAULT_DENSE_CAP: usize = 12;
/// Environment variable overriding [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "SPINET_DENSE_CAP";
/// Largest site count accepted by [`pauli_decompose`].
pub const DECOMPOSE_CAP: usize = 10;

const HERMITIAN_TOL: f64 = 1e-10;

/// Dense cap from [`DENSE_CAP_ENV`], falling back to the default.
pub fn dense_cap_from_env() -> usize {
    std::env::var(DENSE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}

/// A `2^N × 2^N` complex matrix tagged with its site count.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_sites: usize,
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn from_matrix(n_sites: usize, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << n_sites;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Contract(format!(
                "matrix is {}x{}, expected {dim}x{dim} for {n_sites} sites",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DenseOperator { n_sites, matrix })
    }

    pub fn identity(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        DenseOperator {
            n_sites,
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            n_sites: self.n_sites,
            matrix: self.matrix.adjoint(),
        }
    }

    fn check(&self, other: &DenseOperator) -> Result<()> {
        if self.n_sites != other.n_sites {
            return Err(Error::Dimension {
                left: self.n_sites,
                right: other.n_sites,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check(other)?;
        Ok(DenseOperator {
            n_sites: self.n_sites,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check(other)?;
        Ok(DenseOperator {
            n_sites: self.n_sites,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, c: Complex64) -> DenseOperator {
        DenseOperator {
            n_sites: self.n_sites,
            matrix: &self.matrix * c,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Normalized inner product `Tr(A^dag B) / 2^N`.
    pub fn hs_inner(&self, other: &DenseOperator) -> Result<Complex64> {
        self.check(other)?;
        let mut acc = Complex64::default();
        for (a, b) in self.matrix.iter().zip(other.matrix.iter()) {
            acc += a.conj() * b;
        }
        Ok(acc / self.dim() as f64)
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.check(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |U^dag U - Id|`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((prod[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// `max |H - H^dag|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `Id_{2^before} ⊗ self ⊗ Id_{2^after}`.
    pub fn embed(&self, before: usize, after: usize) -> DenseOperator {
        let left = CMatrix::identity(1 << before, 1 << before);
        let right = CMatrix::identity(1 << after, 1 << after);
        DenseOperator {
            n_sites: before + self.n_sites + after,
            matrix: left.kronecker(&self.matrix).kronecker(&right),
        }
    }
}

/// Haar-like random unitary `e^{-iK}` for a seeded random Hermitian `K`.
pub fn random_unitary(n_sites: usize, seed: u64) -> DenseOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n_sites;
    let mut k = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        k[(r, r)] = Complex64::new(rng.gen_range(-PI..PI), 0.0);
        for c in r + 1..dim {
            let z = Complex64::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            k[(r, c)] = z;
            k[(c, r)] = z.conj();
        }
    }
    let h = DenseOperator { n_sites, matrix: k };
    Evolution::new(&h).expect("hermitian by construction").propagator(1.0)
}

/// Dense matrix of a Pauli expression under the default cap.
pub fn dense(expr: &OperatorExpr) -> Result<DenseOperator> {
    dense_capped(expr, DEFAULT_DENSE_CAP)
}

/// Each Pauli string is a phased permutation: `P|b> = i^y (-1)^{z·b} |b ⊕ x>`.
pub fn dense_capped(expr: &OperatorExpr, cap: usize) -> Result<DenseOperator> {
    let n = expr.n_sites();
    if n > cap {
        return Err(Error::dense_capacity(n, cap));
    }
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for (s, amp) in expr.terms() {
        let (xm, zm, y) = s.dense_masks();
        let base = amp * i_power(y);
        for col in 0..dim {
            let sign = if (zm & col).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(col ^ xm, col)] += base * sign;
        }
    }
    Ok(DenseOperator {
        n_sites: n,
        matrix: m,
    })
}

fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for start in (0..v.len()).step_by(2 * h) {
            for k in start..start + h {
                let (a, b) = (v[k], v[k + h]);
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn string_from_dense_masks(n: usize, xm: usize, zm: usize) -> PauliString {
    use crate::pauli::Letter;
    let letters: Vec<(usize, Letter)> = (1..=n)
        .filter_map(|site| {
            let bit = 1usize << (n - site);
            match (xm & bit != 0, zm & bit != 0) {
                (false, false) => None,
                (true, false) => Some((site, Letter::X)),
                (false, true) => Some((site, Letter::Z)),
                (true, true) => Some((site, Letter::Y)),
            }
        })
        .collect();
    PauliString::from_letters(n, &letters).expect("sites in range")
}

/// Coefficients `c_B = Tr(B U) / 2^N` over the full Pauli basis.
///
/// For each X-mask the Z-dependence is a Walsh-Hadamard transform, so the
/// cost is `O(4^N N)` rather than `O(8^N)`.
pub fn pauli_decompose(op: &DenseOperator) -> Result<OperatorExpr> {
    let n = op.n_sites();
    if n > DECOMPOSE_CAP {
        return Err(Error::Capacity {
            what: format!("Pauli decomposition of {n} sites"),
            limit: DECOMPOSE_CAP,
            hint: "",
        });
    }
    let dim = op.dim();
    let m = op.matrix();
    let mut out = OperatorExpr::zero(n);
    let mut v = vec![Complex64::default(); dim];
    for xm in 0..dim {
        for (c, slot) in v.iter_mut().enumerate() {
            *slot = m[(c, c ^ xm)];
        }
        walsh_hadamard(&mut v);
        for (zm, total) in v.iter().enumerate() {
            if total.norm() == 0.0 {
                continue;
            }
            let y = (xm & zm).count_ones();
            let coef = i_power(y) * total / dim as f64;
            out.add_term(string_from_dense_masks(n, xm, zm), coef);
        }
    }
    Ok(out)
}

/// Eigendecomposition `H = V Λ V^dag` shared by every time sample.
#[derive(Debug, Clone)]
pub struct Evolution {
    n_sites: usize,
    energies: DVector<f64>,
    vectors: CMatrix,
}

impl Evolution {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let res = h.hermiticity_residual();
        if res > HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "Hamiltonian is not Hermitian (residual {res:.3e})"
            )));
        }
        let eig = SymmetricEigen::new(h.matrix().clone());
        Ok(Evolution {
            n_sites: h.n_sites(),
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect()
    }

    /// `U(t) = V e^{-iΛt} V^dag`.
    pub fn propagator(&self, t: f64) -> DenseOperator {
        let phases = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        DenseOperator {
            n_sites: self.n_sites,
            matrix: scaled * self.vectors.adjoint(),
        }
    }

    /// `V^dag D V` for a diagonal `D`.
    fn rotate_diagonal(&self, diag: &[f64]) -> CMatrix {
        let mut dv = self.vectors.clone();
        for (r, mut row) in dv.row_iter_mut().enumerate() {
            row *= Complex64::new(diag[r], 0.0);
        }
        self.vectors.adjoint() * dv
    }
}

fn z_diagonal(n: usize, site: usize) -> Vec<f64> {
    let bit = 1usize << (n - site);
    (0..(1usize << n))
        .map(|b| if b & bit == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Z-to-Z transport kernel: `F(t) = Re Σ_ab e^{-i(λ_a - λ_b)t} A_ab B_ba / 2^N`
/// with `A = V^dag Z_s V`, `B = V^dag Z_t V`.
#[derive(Debug, Clone)]
pub struct DenseTransport {
    evolution: Evolution,
    weights: CMatrix,
}

impl DenseTransport {
    pub fn new(net: &SpinNetwork, kind: HamiltonianKind) -> Result<Self> {
        DenseTransport::with_cap(net, kind, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(net: &SpinNetwork, kind: HamiltonianKind, cap: usize) -> Result<Self> {
        if net.n() > cap {
            return Err(Error::dense_capacity(net.n(), cap));
        }
        let h = dense_capped(&hamiltonian(net, kind)?, cap)?;
        DenseTransport::from_hamiltonian(&h, net.ends())
    }

    pub fn from_hamiltonian(h: &DenseOperator, ends: Ends) -> Result<Self> {
        let n = h.n_sites();
        for s in [ends.source, ends.target] {
            if s == 0 || s > n {
                return Err(Error::Index(format!("end site {s} outside 1..={n}")));
            }
        }
        let evolution = Evolution::new(h)?;
        let a = evolution.rotate_diagonal(&z_diagonal(n, ends.source));
        let b = evolution.rotate_diagonal(&z_diagonal(n, ends.target));
        let weights = a.component_mul(&b.transpose());
        Ok(DenseTransport { evolution, weights })
    }

    pub fn evolution(&self) -> &Evolution {
        &self.evolution
    }

    pub fn fidelity(&self, t: f64) -> f64 {
        let p = self.evolution.phases(t);
        let dim = p.len();
        let mut acc = Complex64::default();
        for a in 0..dim {
            let mut row = Complex64::default();
            for (b, pb) in p.iter().enumerate() {
                row += self.weights[(a, b)] * pb.conj();
            }
            acc += p[a] * row;
        }
        acc.re / dim as f64
    }

    pub fn propagator(&self, t: f64) -> DenseOperator {
        self.evolution.propagator(t)
    }

    pub fn trace(&self, t_max: f64, samples: usize) -> Result<FidelityTrace> {
        FidelityTrace::sample(t_max, samples, |t| self.fidelity(t))
    }
}

/// `U = e^{-iHt}` from the eigendecomposition of `H`.
pub fn propagator(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    Ok(Evolution::new(h)?.propagator(t))
}

/// `Tr(U Z_s U^dag Z_t) / 2^N` for the network Hamiltonian of `kind`.
pub fn transport_fidelity(net: &SpinNetwork, kind: HamiltonianKind, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Parameter(format!("time must be finite, got {t}")));
    }
    Ok(DenseTransport::new(net, kind)?.fidelity(t))
}

pub fn fidelity_trace(
    net: &SpinNetwork,
    kind: HamiltonianKind,
    t_max: f64,
    samples: usize,
) -> Result<FidelityTrace> {
    DenseTransport::new(net, kind)?.trace(t_max, samples)
}

/// `Tr(U P_init U^dag P_final) / 2^N` for an explicit propagator.
pub fn general_fidelity_of(
    u: &DenseOperator,
    p_init: &PauliString,
    p_final: &PauliString,
) -> Result<f64> {
    if p_init.is_identity() || p_final.is_identity() {
        return Err(Error::Contract("transport endpoints must be non-identity strings".into()));
    }
    for p in [p_init, p_final] {
        if p.n_sites() != u.n_sites() {
            return Err(Error::Dimension {
                left: u.n_sites(),
                right: p.n_sites(),
            });
        }
    }
    let pi = dense_capped(&OperatorExpr::from_string(*p_init), u.n_sites())?;
    let pf = dense_capped(&OperatorExpr::from_string(*p_final), u.n_sites())?;
    let evolved = u.matrix() * pi.matrix() * u.matrix().adjoint();
    let value = (evolved * pf.matrix()).trace() / u.dim() as f64;
    if value.im.abs() > 1e-10 {
        return Err(Error::Contract(format!(
            "transport fidelity has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Transport fidelity between two arbitrary non-identity Pauli strings.
pub fn general_fidelity(
    net: &SpinNetwork,
    kind: HamiltonianKind,
    t: f64,
    p_init: &PauliString,
    p_final: &PauliString,
) -> Result<f64> {
    let h = dense(&hamiltonian(net, kind)?)?;
    let u = propagator(&h, t)?;
    general_fidelity_of(&u, p_init, p_final)
}
