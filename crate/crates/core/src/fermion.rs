//! Single-particle evolution for modified-XY networks.
//!
//! The Jordan-Wigner map turns the modified-XY Hamiltonian into free fermions
//! hopping on the weighted adjacency matrix `A`, and the Z-to-Z fidelity
//! reduces to `|(e^{-iAt})_{target, source}|^2`. Cost is polynomial in `N`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::SpinNetwork;
use crate::trace::FidelityTrace;

/// Real symmetric single-particle hopping matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingMatrix {
    matrix: DMatrix<f64>,
}

impl HoppingMatrix {
    pub fn from_network(net: &SpinNetwork) -> Self {
        let n = net.n();
        let mut matrix = DMatrix::zeros(n, n);
        for e in net.edges() {
            matrix[(e.i - 1, e.j - 1)] = e.alpha;
            matrix[(e.j - 1, e.i - 1)] = e.alpha;
        }
        HoppingMatrix { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `e^{-iAt}` built from the eigendecomposition.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        }
        scaled * v.transpose()
    }
}

/// Precomputed transport amplitude `G(t) = Σ_k V_tk V_sk e^{-iλ_k t}`.
#[derive(Debug, Clone)]
pub struct FermionTransport {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl FermionTransport {
    pub fn new(net: &SpinNetwork) -> Self {
        let hop = HoppingMatrix::from_network(net);
        let eig = SymmetricEigen::new(hop.matrix);
        let (s, t) = (net.ends().source - 1, net.ends().target - 1);
        let weights = (0..net.n())
            .map(|k| eig.eigenvectors[(t, k)] * eig.eigenvectors[(s, k)])
            .collect();
        FermionTransport {
            energies: eig.eigenvalues.iter().copied().collect(),
            weights,
        }
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| Complex64::from_polar(w, -e * t))
            .sum()
    }

    pub fn fidelity(&self, t: f64) -> f64 {
        self.amplitude(t).norm_sqr()
    }

    pub fn trace(&self, t_max: f64, samples: usize) -> Result<FidelityTrace> {
        FidelityTrace::sample(t_max, samples, |t| self.fidelity(t))
    }
}

/// Z-to-Z fidelity of the modified-XY Hamiltonian at time `t`.
pub fn fermion_fidelity(net: &SpinNetwork, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Parameter(format!("time must be finite, got {t}")));
    }
    Ok(FermionTransport::new(net).fidelity(t))
}

pub fn fermion_trace(net: &SpinNetwork, t_max: f64, samples: usize) -> Result<FidelityTrace> {
    FermionTransport::new(net).trace(t_max, samples)
}
