//! Sampled fidelity curves with refined peaks.

use std::fmt::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub fidelity: f64,
}

/// `F(t)` on a uniform grid over `[0, t_max]` plus its refined maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub peak: Peak,
}

/// Golden-section tolerance on the peak time.
pub const PEAK_TIME_TOL: f64 = 1e-10;
/// Local maxima this close to the best sample are refined as peak candidates.
const PEAK_CANDIDATE_GAP: f64 = 1e-3;
const MAX_PEAK_CANDIDATES: usize = 64;
/// Refined candidates within this of the best count as ties; the earliest wins.
const PEAK_TIE_TOL: f64 = 1e-9;

impl FidelityTrace {
    /// Samples `f` on `samples` uniform points and refines near-maximal samples by
    /// golden-section search inside their neighbouring grid cells, keeping the
    /// earliest of tied peaks.
    pub fn sample<F>(t_max: f64, samples: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        if samples < 2 {
            return Err(Error::Parameter(format!("need at least 2 samples, got {samples}")));
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Parameter(format!("t_max must be positive, got {t_max}")));
        }
        let step = t_max / (samples - 1) as f64;
        let grid: Vec<f64> = (0..samples).map(|k| k as f64 * step).collect();
        let values: Vec<f64> = grid.par_iter().map(|&t| f(t)).collect();
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let refine = |k: usize| {
            let lo = grid[k.saturating_sub(1)];
            let hi = grid[(k + 1).min(samples - 1)];
            let refined = golden_max(&f, lo, hi, PEAK_TIME_TOL);
            if refined.fidelity >= values[k] {
                refined
            } else {
                Peak {
                    time: grid[k],
                    fidelity: values[k],
                }
            }
        };
        // Refine every near-maximal local maximum, then report the earliest
        // one that ties the best refined value.
        let mut picks: Vec<usize> = (0..samples)
            .filter(|&k| {
                values[k] >= top - PEAK_CANDIDATE_GAP
                    && (k == 0 || values[k] >= values[k - 1])
                    && (k + 1 == samples || values[k] >= values[k + 1])
            })
            .collect();
        picks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        picks.truncate(MAX_PEAK_CANDIDATES);
        picks.sort_unstable();
        let candidates: Vec<Peak> = picks.into_iter().map(refine).collect();
        let best = candidates.iter().map(|p| p.fidelity).fold(f64::NEG_INFINITY, f64::max);
        let peak = *candidates
            .iter()
            .find(|p| p.fidelity >= best - PEAK_TIE_TOL)
            .expect("the global sample maximum is always a candidate");
        Ok(FidelityTrace { grid, values, peak })
    }

    pub fn max_sample(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `t,fidelity` CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,fidelity\n");
        for (t, f) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{t:.16e},{f:.16e}").unwrap();
        }
        out
    }
}

/// Default simulation horizon `4π / α_ref`.
pub fn default_t_max(alpha_ref: f64) -> f64 {
    4.0 * std::f64::consts::PI / alpha_ref
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> Peak {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        }
    }
    let time = 0.5 * (lo + hi);
    Peak {
        time,
        fidelity: f(time),
    }
}
