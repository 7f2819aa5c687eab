//! Reactive ensembles near a central energy and their finite-time
//! transmission under the normal-form flow
//! `Q_1(t) = Q_1 cosh(Λt) + P_1 sinh(Λt)`, `Λ = ∂K/∂I`.
//!
//! Sampling law for one initial condition:
//!
//! 1. `E'` uniform in `[E − ΔE, E + ΔE]`;
//! 2. `J_2` uniform in `[0, J_2^max(E')]` (ensemble A) or
//!    `[ξ J_2^max(E'), J_2^max(E')]` (ensemble B);
//! 3. bath angle uniform in `[0, 2π)`;
//! 4. reaction integral `I'` from `K(I', J_2) = E'`; negative values redraw `J_2`;
//! 5. `Q_1` uniform in `[−q1_range, −δ]`, `P_1 = √(Q_1² + 2I')`.
//!
//! Initial condition `i` draws from its own ChaCha substream `i`, so the
//! ensemble is independent of scheduling.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::j_max_cnf;
use crate::models::CnfModel;

/// Ensemble size used for the transmission scans.
pub const DEFAULT_N_TRAJ: usize = 5000;
/// Default sampling half-width for `Q_1`.
pub const DEFAULT_Q1_RANGE: f64 = 1.0;
/// Default half-width of the energy window as a fraction of `E − E_0`.
pub const DEFAULT_DELTA_E_FRACTION: f64 = 0.01;
/// Default central energy.
pub const DEFAULT_CENTRAL_ENERGY: f64 = 0.0;
/// Gap keeping sampled `Q_1` strictly negative.
pub const Q1_GAP: f64 = 1e-9;
/// Draws allowed per initial condition before sampling is declared failed
/// (a rejection rate above 99%).
pub const MAX_DRAWS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleKind {
    /// Unbiased action-space sampling.
    A,
    /// Bath-localised sampling in `[ξ J_2^max, J_2^max]`.
    B,
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnsembleKind::A => "A",
            EnsembleKind::B => "B",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_traj: usize,
    pub e_center: f64,
    pub delta_e: f64,
    pub xi: f64,
    pub q1_range: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    /// Defaults at central energy `e_center`: `N = 5000`,
    /// `ΔE = 0.01 (E − E_0)`, `q1_range = 1`, `ξ = 0`.
    pub fn with_defaults(model: &CnfModel, e_center: f64, seed: u64) -> Self {
        EnsembleSpec {
            n_traj: DEFAULT_N_TRAJ,
            e_center,
            delta_e: DEFAULT_DELTA_E_FRACTION * (e_center - model.e0()),
            xi: 0.0,
            q1_range: DEFAULT_Q1_RANGE,
            seed,
        }
    }

    pub fn validate(&self, model: &CnfModel) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::InvalidInput("ensemble needs at least one trajectory".into()));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::InvalidInput(format!("xi = {} must lie in [0, 1]", self.xi)));
        }
        if !(self.delta_e >= 0.0 && self.delta_e.is_finite()) {
            return Err(Error::InvalidInput(format!("delta_e = {} must be >= 0", self.delta_e)));
        }
        if !(self.q1_range > Q1_GAP && self.q1_range.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "q1_range = {} must exceed {Q1_GAP:e}",
                self.q1_range
            )));
        }
        if !(self.e_center - self.delta_e > model.e0()) {
            return Err(Error::BelowSaddle {
                energy: self.e_center - self.delta_e,
                e0: model.e0(),
            });
        }
        if model.bath_count() != 1 {
            return Err(Error::Arity {
                expected: 1,
                got: model.bath_count(),
            });
        }
        Ok(())
    }
}

/// A point in rotated normal-form coordinates with its bath actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub q1: f64,
    pub p1: f64,
    pub j: Vec<f64>,
    pub phases: Vec<f64>,
    /// Target energy `E'` of this point.
    pub energy: f64,
    /// Reaction integral `I' = (P_1² − Q_1²)/2`.
    pub i_action: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionResult {
    pub kind: EnsembleKind,
    /// `None` for ensemble A.
    pub xi: Option<f64>,
    pub fraction: f64,
    pub n_transmitted: usize,
    pub n_total: usize,
    pub t_max: f64,
    pub seed: u64,
}

impl TransmissionResult {
    /// Binomial standard error `√(f(1 − f)/N)`.
    pub fn std_error(&self) -> f64 {
        (self.fraction * (1.0 - self.fraction) / self.n_total as f64).sqrt()
    }
}

/// Observation time `5/λ`.
pub fn default_t_max(model: &CnfModel) -> f64 {
    5.0 / model.lambda()
}

fn sample_one(model: &CnfModel, spec: &EnsembleSpec, kind: EnsembleKind, index: usize) -> Result<InitialCondition> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let u: f64 = rng.random();
    let energy = if spec.delta_e == 0.0 {
        spec.e_center
    } else {
        spec.e_center - spec.delta_e + 2.0 * spec.delta_e * u
    };
    let j_max = j_max_cnf(model, energy, 0)?;
    let lower = match kind {
        EnsembleKind::A => 0.0,
        EnsembleKind::B => spec.xi * j_max,
    };
    // Rounding in K(0, J_max) leaves I' a few ulps off zero at the upper
    // edge of the action range; such points sit on the shell I' = 0.
    let snap = 1e-12 * (1.0 + energy.abs());

    for _ in 0..MAX_DRAWS {
        let j2 = lower + rng.random::<f64>() * (j_max - lower);
        let phase = 2.0 * PI * rng.random::<f64>();
        let q1 = -Q1_GAP - rng.random::<f64>() * (spec.q1_range - Q1_GAP);
        let mut i_action = model.solve_reaction_integral(energy, &[j2])?;
        if i_action.abs() <= snap / model.effective_lyapunov(&[j2])? {
            i_action = 0.0;
        } else if i_action < 0.0 {
            continue;
        }
        let p1 = (q1 * q1 + 2.0 * i_action).sqrt();
        return Ok(InitialCondition {
            q1,
            p1,
            j: vec![j2],
            phases: vec![phase],
            energy,
            i_action,
        });
    }
    Err(Error::SamplingFailure(format!(
        "initial condition {index}: more than 99% of {MAX_DRAWS} draws rejected"
    )))
}

pub fn sample_ensemble(model: &CnfModel, spec: &EnsembleSpec, kind: EnsembleKind) -> Result<Vec<InitialCondition>> {
    sample_ensemble_with(model, spec, kind, Exec::default())
}

pub fn sample_ensemble_with(
    model: &CnfModel,
    spec: &EnsembleSpec,
    kind: EnsembleKind,
    exec: Exec,
) -> Result<Vec<InitialCondition>> {
    spec.validate(model)?;
    exec.try_map_range(spec.n_traj, |i| sample_one(model, spec, kind, i))
}

/// `Q_1(t_max) > 0` under the normal-form flow with rate `Λ(J)`.
pub fn transmit(model: &CnfModel, ic: &InitialCondition, t_max: f64) -> Result<bool> {
    let rate = model.effective_lyapunov(&ic.j)?;
    let x = rate * t_max;
    Ok(ic.q1 * x.cosh() + ic.p1 * x.sinh() > 0.0)
}

pub fn transmission_fraction(model: &CnfModel, ics: &[InitialCondition], t_max: f64, exec: Exec) -> Result<usize> {
    let hits = exec.try_map_range(ics.len(), |i| transmit(model, &ics[i], t_max))?;
    Ok(hits.into_iter().filter(|&h| h).count())
}

/// Samples one ensemble and measures its transmission fraction.
pub fn run_ensemble(
    model: &CnfModel,
    spec: &EnsembleSpec,
    kind: EnsembleKind,
    t_max: f64,
    exec: Exec,
) -> Result<TransmissionResult> {
    let ics = sample_ensemble_with(model, spec, kind, exec)?;
    let n_transmitted = transmission_fraction(model, &ics, t_max, exec)?;
    Ok(TransmissionResult {
        kind,
        xi: (kind == EnsembleKind::B).then_some(spec.xi),
        fraction: n_transmitted as f64 / ics.len() as f64,
        n_transmitted,
        n_total: ics.len(),
        t_max,
        seed: spec.seed,
    })
}

/// Ensemble-A baseline followed by one ensemble-B row per `ξ`.
pub fn transmission_scan(
    model: &CnfModel,
    spec_base: &EnsembleSpec,
    xis: &[f64],
    t_max: f64,
    exec: Exec,
) -> Result<Vec<TransmissionResult>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidInput(format!("t_max = {t_max} must be positive")));
    }
    let mut out = Vec::with_capacity(xis.len() + 1);
    out.push(run_ensemble(model, spec_base, EnsembleKind::A, t_max, exec)?);
    for &xi in xis {
        let spec = EnsembleSpec {
            xi,
            ..spec_base.clone()
        };
        out.push(run_ensemble(model, &spec, EnsembleKind::B, t_max, exec)?);
    }
    Ok(out)
}
