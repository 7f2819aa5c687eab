//! Störmer–Verlet integration of separable Hamiltonians `H = T(p) + V(q)`
//! with energy-drift and time-map symplecticity monitors.
//!
//! States are flat slices `(q_1, …, q_n, p_1, …, p_n)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::symplecticity_error;
use crate::models::EckartMorseParams;

/// `H(q, p) = T(p) + V(q)`.
pub trait SeparableHamiltonian: Sync {
    fn dof(&self) -> usize;
    fn kinetic(&self, p: &[f64]) -> f64;
    /// `∂T/∂p`.
    fn velocity(&self, p: &[f64], out: &mut [f64]);
    fn potential(&self, q: &[f64]) -> f64;
    /// `∂V/∂q`.
    fn gradient(&self, q: &[f64], out: &mut [f64]);

    fn energy(&self, state: &[f64]) -> f64 {
        let (q, p) = state.split_at(self.dof());
        self.kinetic(p) + self.potential(q)
    }
}

/// The Eckart–Morse(–Morse) Hamiltonian with `dof` degrees of freedom.
#[derive(Clone, Debug, PartialEq)]
pub struct EckartMorseSystem {
    params: EckartMorseParams,
    dof: usize,
}

impl EckartMorseSystem {
    pub fn new(params: EckartMorseParams, dof: usize) -> Result<Self> {
        params.validate()?;
        if dof == 0 || dof > params.max_dof() {
            return Err(Error::Arity {
                expected: params.max_dof(),
                got: dof,
            });
        }
        Ok(EckartMorseSystem { params, dof })
    }

    pub fn params(&self) -> &EckartMorseParams {
        &self.params
    }
}

impl SeparableHamiltonian for EckartMorseSystem {
    fn dof(&self) -> usize {
        self.dof
    }

    fn kinetic(&self, p: &[f64]) -> f64 {
        self.params.kinetic(p)
    }

    fn velocity(&self, p: &[f64], out: &mut [f64]) {
        // (1/m) I + ε (ones − I)
        let total: f64 = p.iter().sum();
        let eps = self.params.eps;
        for (o, &pi) in out.iter_mut().zip(p) {
            *o = pi / self.params.m + eps * (total - pi);
        }
    }

    fn potential(&self, q: &[f64]) -> f64 {
        self.params.potential(q)
    }

    fn gradient(&self, q: &[f64], out: &mut [f64]) {
        out[0] = self.params.eckart_gradient(q[0]);
        for (k, (o, &y)) in out[1..].iter_mut().zip(&q[1..]).enumerate() {
            *o = self.params.morse_gradient(k, y);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub h: f64,
    pub t_final: f64,
    pub monitor_stride: usize,
    /// Displacement for the central-difference Jacobian of the time map.
    pub fd_epsilon: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            h: 1e-3,
            t_final: 10.0,
            monitor_stride: 10,
            fd_epsilon: 1e-6,
        }
    }
}

impl IntegratorConfig {
    /// Validates the configuration and returns the number of steps.
    pub fn steps(&self) -> Result<usize> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidInput(format!("step h = {} must be positive", self.h)));
        }
        if !(self.fd_epsilon > 0.0 && self.fd_epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "fd_epsilon = {} must be positive",
                self.fd_epsilon
            )));
        }
        if self.monitor_stride == 0 {
            return Err(Error::InvalidInput("monitor_stride must be at least 1".into()));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("t_final = {} must be >= 0", self.t_final)));
        }
        let steps = (self.t_final / self.h).round();
        if (steps * self.h - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "t_final = {} is not a whole number of steps h = {}",
                self.t_final, self.h
            )));
        }
        Ok(steps as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
    /// `max |H(z(t)) − H(z(0))|` over the monitored times.
    pub energy_drift: f64,
    /// `max |MᵀJM − J|` for the finite-difference Jacobian `M` of the
    /// time-`t_final` map.
    pub symplecticity_error: f64,
}

/// Summary written next to trajectory output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub energy_drift: f64,
    pub symplecticity_error: f64,
    pub initial_energy: f64,
    pub final_time: f64,
}

impl TrajectoryRecord {
    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            energy_drift: self.energy_drift,
            symplecticity_error: self.symplecticity_error,
            initial_energy: self.energies[0],
            final_time: *self.times.last().expect("record is never empty"),
        }
    }
}

fn check_state<H: SeparableHamiltonian + ?Sized>(sys: &H, state: &[f64]) -> Result<()> {
    if state.len() != 2 * sys.dof() {
        return Err(Error::Arity {
            expected: 2 * sys.dof(),
            got: state.len(),
        });
    }
    Ok(())
}

fn step_in_place<H: SeparableHamiltonian + ?Sized>(sys: &H, z: &mut [f64], h: f64, buf: &mut [f64]) {
    let n = sys.dof();
    let (q, p) = z.split_at_mut(n);
    sys.gradient(q, buf);
    for (pi, g) in p.iter_mut().zip(buf.iter()) {
        *pi -= 0.5 * h * g;
    }
    sys.velocity(p, buf);
    for (qi, v) in q.iter_mut().zip(buf.iter()) {
        *qi += h * v;
    }
    sys.gradient(q, buf);
    for (pi, g) in p.iter_mut().zip(buf.iter()) {
        *pi -= 0.5 * h * g;
    }
}

/// One kick–drift–kick step of size `h` (negative `h` steps backward).
pub fn verlet_step<H: SeparableHamiltonian + ?Sized>(sys: &H, state: &[f64], h: f64) -> Result<Vec<f64>> {
    check_state(sys, state)?;
    let mut z = state.to_vec();
    let mut buf = vec![0.0; sys.dof()];
    step_in_place(sys, &mut z, h, &mut buf);
    Ok(z)
}

/// Final state after `steps` steps of size `h`.
pub fn flow_map<H: SeparableHamiltonian + ?Sized>(sys: &H, state: &[f64], h: f64, steps: usize) -> Result<Vec<f64>> {
    check_state(sys, state)?;
    let mut z = state.to_vec();
    let mut buf = vec![0.0; sys.dof()];
    for s in 0..steps {
        step_in_place(sys, &mut z, h, &mut buf);
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence {
                time: (s + 1) as f64 * h,
            });
        }
    }
    Ok(z)
}

/// Central-difference Jacobian of the time-`steps·h` map at `state`.
pub fn flow_jacobian<H: SeparableHamiltonian + ?Sized>(
    sys: &H,
    state: &[f64],
    h: f64,
    steps: usize,
    fd_epsilon: f64,
    exec: Exec,
) -> Result<DMatrix<f64>> {
    check_state(sys, state)?;
    let dim = state.len();
    let columns = exec.try_map_range(dim, |c| {
        let mut plus = state.to_vec();
        let mut minus = state.to_vec();
        plus[c] += fd_epsilon;
        minus[c] -= fd_epsilon;
        let fp = flow_map(sys, &plus, h, steps)?;
        let fm = flow_map(sys, &minus, h, steps)?;
        Ok::<_, Error>(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * fd_epsilon))
                .collect::<Vec<_>>(),
        )
    })?;
    Ok(DMatrix::from_fn(dim, dim, |r, c| columns[c][r]))
}

pub fn integrate<H: SeparableHamiltonian + ?Sized>(
    sys: &H,
    state0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord> {
    integrate_with(sys, state0, cfg, Exec::default())
}

/// Fixed-step integration to `t_final`, recording every `monitor_stride`
/// steps (and the final step).
pub fn integrate_with<H: SeparableHamiltonian + ?Sized>(
    sys: &H,
    state0: &[f64],
    cfg: &IntegratorConfig,
    exec: Exec,
) -> Result<TrajectoryRecord> {
    let steps = cfg.steps()?;
    check_state(sys, state0)?;
    if state0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence { time: 0.0 });
    }

    let e_init = sys.energy(state0);
    let mut times = vec![0.0];
    let mut states = vec![state0.to_vec()];
    let mut energies = vec![e_init];
    let mut drift = 0.0f64;

    let mut z = state0.to_vec();
    let mut buf = vec![0.0; sys.dof()];
    for s in 1..=steps {
        step_in_place(sys, &mut z, cfg.h, &mut buf);
        let t = s as f64 * cfg.h;
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        if s % cfg.monitor_stride == 0 || s == steps {
            let e = sys.energy(&z);
            if !e.is_finite() {
                return Err(Error::Divergence { time: t });
            }
            drift = drift.max((e - e_init).abs());
            times.push(t);
            states.push(z.clone());
            energies.push(e);
        }
    }

    let jac = flow_jacobian(sys, state0, cfg.h, steps, cfg.fd_epsilon, exec)?;
    Ok(TrajectoryRecord {
        times,
        states,
        energies,
        energy_drift: drift,
        symplecticity_error: symplecticity_error(&jac)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub time: f64,
    pub direction: CrossingDirection,
}

/// Linearly interpolated times at which the reaction coordinate `x = q_1`
/// crosses `x_star`, labelled by the sign of the interpolated `p_x`.
pub fn ds_crossing_times(record: &TrajectoryRecord, x_star: f64) -> Vec<Crossing> {
    let Some(first) = record.states.first() else {
        return Vec::new();
    };
    let n = first.len() / 2;
    let mut out = Vec::new();
    for (w, t) in record.states.windows(2).zip(record.times.windows(2)) {
        let (a, b) = (w[0][0] - x_star, w[1][0] - x_star);
        // count touching from one side only so a sample exactly at x_star
        // is not reported twice
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            let frac = a / (a - b);
            let px = w[0][n] + frac * (w[1][n] - w[0][n]);
            out.push(Crossing {
                time: t[0] + frac * (t[1] - t[0]),
                direction: if px > 0.0 {
                    CrossingDirection::Forward
                } else {
                    CrossingDirection::Backward
                },
            });
        }
    }
    out
}
