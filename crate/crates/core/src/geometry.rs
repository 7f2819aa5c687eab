//! Bottleneck diagnostics on the dividing surface `I = 0`: maximal bath
//! actions `J_k^max(E)`, the candidate width `2π min_k J_k^max(E)`, the
//! admissible action-space volume `V(E)` and the directional flux
//! `φ(E) = (2π)^{n−1} V(E)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::{CnfModel, QuadraticSaddleModel};
use crate::roots::{smallest_positive_root, BracketFailure, Tolerance};

/// Upper limit for bracket expansion in [`j_max_cnf`].
pub const ROOT_BRACKET_CAP: f64 = 1e12;
/// Monte Carlo samples per random substream.
pub const MC_BATCH: usize = 1 << 14;

/// Per-mode maximal actions and the candidate width at one energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub energy: f64,
    /// `J_k^max(E)` for `k = 2, …, n`.
    pub j_max: Vec<f64>,
    pub c_cand: f64,
    /// Mode number `k ≥ 2` of the smallest maximal action (lowest on ties).
    pub limiting_mode: usize,
}

/// Action-space volume and directional flux at one energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub energy: f64,
    pub volume: f64,
    pub flux: f64,
    /// Zero for analytic results.
    pub mc_samples: u64,
    /// Standard error of `volume` (scale by `flux / volume` for the flux).
    pub std_error: f64,
    pub seed: Option<u64>,
}

/// Normal forms whose dividing-surface restriction can be queried for
/// maximal bath actions.
pub trait BottleneckModel {
    fn saddle_energy(&self) -> f64;
    fn bath_count(&self) -> usize;
    /// `J_k^max(E)` for bath mode `bath` (0-based, i.e. `k = bath + 2`).
    fn j_max(&self, energy: f64, bath: usize) -> Result<f64>;
}

impl BottleneckModel for QuadraticSaddleModel {
    fn saddle_energy(&self) -> f64 {
        self.e0
    }
    fn bath_count(&self) -> usize {
        self.omegas.len()
    }
    fn j_max(&self, energy: f64, bath: usize) -> Result<f64> {
        j_max_quadratic(self, energy, bath)
    }
}

impl BottleneckModel for CnfModel {
    fn saddle_energy(&self) -> f64 {
        self.e0()
    }
    fn bath_count(&self) -> usize {
        CnfModel::bath_count(self)
    }
    fn j_max(&self, energy: f64, bath: usize) -> Result<f64> {
        j_max_cnf(self, energy, bath)
    }
}

fn check_above_saddle(energy: f64, e0: f64) -> Result<()> {
    if !(energy > e0) {
        return Err(Error::BelowSaddle { energy, e0 });
    }
    Ok(())
}

fn check_bath(bath: usize, count: usize) -> Result<()> {
    if bath >= count {
        return Err(Error::InvalidInput(format!(
            "bath mode index {bath} out of range (model has {count} bath modes)"
        )));
    }
    Ok(())
}

/// `J_k^max(E) = (E − E_0)/ω_k` for the quadratic normal form.
pub fn j_max_quadratic(model: &QuadraticSaddleModel, energy: f64, bath: usize) -> Result<f64> {
    check_bath(bath, model.omegas.len())?;
    check_above_saddle(energy, model.e0)?;
    Ok((energy - model.e0) / model.omegas[bath])
}

/// Smallest positive root of `K(0, …, J_k, …, 0) = E`.
pub fn j_max_cnf(model: &CnfModel, energy: f64, bath: usize) -> Result<f64> {
    check_bath(bath, model.bath_count())?;
    check_above_saddle(energy, model.e0())?;
    let omega = model.omegas()[bath];
    let mut j = vec![0.0; model.bath_count()];
    let f = |x: f64| {
        j[bath] = x;
        model.eval_on_ds(&j).expect("arity checked") - energy
    };
    smallest_positive_root(f, (energy - model.e0()) / omega, ROOT_BRACKET_CAP, Tolerance::default()).map_err(
        |e| match e {
            BracketFailure::NoSignChange { cap } => Error::NoPositiveRoot {
                mode: bath + 2,
                bound: cap,
            },
            BracketFailure::NotNegativeAtZero => Error::BelowSaddle { energy, e0: model.e0() },
        },
    )
}

/// Positive root of `ω J + α J² = ΔE`, written without cancellation so the
/// `α → 0` limit `ΔE/ω` is reached smoothly.
pub fn quadratic_action_root(omega: f64, alpha: f64, excess: f64) -> f64 {
    2.0 * excess / (omega + (omega * omega + 4.0 * alpha * excess).sqrt())
}

/// Candidate width `2π min_k J_k^max(E)` with the per-mode maxima.
pub fn candidate_width<M: BottleneckModel + ?Sized>(model: &M, energy: f64) -> Result<WidthReport> {
    let j_max = (0..model.bath_count())
        .map(|b| model.j_max(energy, b))
        .collect::<Result<Vec<_>>>()?;
    let (arg, min) = j_max.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(ai, am), (i, &v)| if v < am { (i, v) } else { (ai, am) },
    );
    Ok(WidthReport {
        energy,
        c_cand: 2.0 * PI * min,
        limiting_mode: arg + 2,
        j_max,
    })
}

fn empty_flux(energy: f64, samples: u64, seed: Option<u64>) -> FluxReport {
    FluxReport {
        energy,
        volume: 0.0,
        flux: 0.0,
        mc_samples: samples,
        std_error: 0.0,
        seed,
    }
}

/// Monte Carlo estimate of `V(E) = |{J ≥ 0 : K(0, J) ≤ E}|` on the bounding
/// box `Π_k [0, J_k^max(E)]`.
pub fn action_volume_mc(model: &CnfModel, energy: f64, samples: u64, seed: u64) -> Result<FluxReport> {
    action_volume_mc_with(model, energy, samples, seed, Exec::default())
}

/// [`action_volume_mc`] with an explicit execution policy. Substream `b`
/// covers samples `b·MC_BATCH ..`, so the estimate does not depend on `exec`.
pub fn action_volume_mc_with(model: &CnfModel, energy: f64, samples: u64, seed: u64, exec: Exec) -> Result<FluxReport> {
    if samples == 0 {
        return Err(Error::InvalidInput(
            "at least one Monte Carlo sample is required".into(),
        ));
    }
    let e0 = model.e0();
    if energy == e0 {
        return Ok(empty_flux(energy, samples, Some(seed)));
    }
    check_above_saddle(energy, e0)?;

    let m = model.bath_count();
    let bounds = (0..m)
        .map(|b| j_max_cnf(model, energy, b))
        .collect::<Result<Vec<_>>>()?;
    let box_volume: f64 = bounds.iter().product();

    let batch = MC_BATCH as u64;
    let n_batches = samples.div_ceil(batch) as usize;
    let hits: u64 = exec
        .map_range(n_batches, |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = batch.min(samples - b as u64 * batch);
            let mut j = vec![0.0; m];
            let mut hits = 0u64;
            for _ in 0..count {
                for (x, hi) in j.iter_mut().zip(&bounds) {
                    *x = rng.random::<f64>() * hi;
                }
                if model.eval_on_ds(&j).expect("arity fixed") <= energy {
                    hits += 1;
                }
            }
            hits
        })
        .into_iter()
        .sum();

    let p = hits as f64 / samples as f64;
    let volume = box_volume * p;
    let std_error = box_volume * (p * (1.0 - p) / samples as f64).sqrt();
    let phase = (2.0 * PI).powi(m as i32);
    Ok(FluxReport {
        energy,
        volume,
        flux: phase * volume,
        mc_samples: samples,
        std_error,
        seed: Some(seed),
    })
}

/// Exact simplex volume `V = (E − E_0)^{n−1} / ((n−1)! Π ω_k)` of the
/// quadratic model and its flux.
pub fn flux_quadratic_exact(model: &QuadraticSaddleModel, energy: f64) -> Result<FluxReport> {
    if energy == model.e0 {
        return Ok(empty_flux(energy, 0, None));
    }
    check_above_saddle(energy, model.e0)?;
    let m = model.omegas.len();
    let excess = energy - model.e0;
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    let volume = excess.powi(m as i32) / (factorial * model.omegas.iter().product::<f64>());
    Ok(FluxReport {
        energy,
        volume,
        flux: (2.0 * PI).powi(m as i32) * volume,
        mc_samples: 0,
        std_error: 0.0,
        seed: None,
    })
}

/// Width and flux rows over an energy grid.
pub fn scan_energies(
    model: &CnfModel,
    energies: &[f64],
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<Vec<(WidthReport, FluxReport)>> {
    energies
        .iter()
        .map(|&e| {
            let width = candidate_width(model, e)?;
            let flux = action_volume_mc_with(model, e, samples, seed, exec)?;
            Ok((width, flux))
        })
        .collect()
}
