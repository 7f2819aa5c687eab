//! Exact linear flows of the quadratic normal form and ordinary projection
//! areas of evolved phase-space ellipsoids.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::candidate_width;
use crate::linalg::{ellipsoid_capacity, is_symplectic, random_symplectic, SquareMatrix, SymmetricPd};
use crate::models::QuadraticSaddleModel;

/// Symplecticity tolerance required of a mixing matrix.
pub const MIXER_TOL: f64 = 1e-10;
/// Default number of points in the backward-time grid.
pub const DEFAULT_TAU_POINTS: usize = 600;
/// Default grid length in hyperbolic e-folding times `1/λ`.
pub const DEFAULT_TAU_EFOLDINGS: f64 = 3.0;
/// Default entry scale of the random Hamiltonian generator of the mixer.
pub const DEFAULT_MIXER_SIGMA: f64 = 0.5;

/// Canonical plane onto which ellipsoids are projected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionPlane {
    /// `(Q_1, P_1)`.
    #[default]
    Saddle,
    /// `(q_k, p_k)` of bath mode `k = bath + 2`.
    Bath(usize),
}

impl ProjectionPlane {
    fn coordinate(self, dof: usize) -> Result<usize> {
        match self {
            ProjectionPlane::Saddle => Ok(0),
            ProjectionPlane::Bath(b) if b + 1 < dof => Ok(b + 1),
            ProjectionPlane::Bath(b) => Err(Error::InvalidInput(format!(
                "bath plane {b} out of range for {dof} degrees of freedom"
            ))),
        }
    }
}

/// How the mixing matrix `S_mix` is generated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixerSpec {
    pub seed: u64,
    /// Zero gives the identity (an unmixed ball).
    pub sigma: f64,
}

impl MixerSpec {
    pub fn build(&self, dof: usize) -> SquareMatrix {
        random_symplectic(dof, self.sigma, self.seed)
    }
}

/// Projection area `A(τ)` sampled on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionAreaCurve {
    pub radius: f64,
    pub taus: Vec<f64>,
    pub areas: Vec<f64>,
    pub min_area: f64,
    /// Ball capacity `πr²`.
    pub gromov_scale: f64,
}

/// One row of the radius scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusScanRow {
    pub radius: f64,
    pub min_area: f64,
    pub pi_r2: f64,
    pub c_cand_ref: f64,
}

/// State-transition matrix `Φ(t)` of the quadratic normal form in the
/// ordering `(Q_1, q_2, …, q_n, P_1, p_2, …, p_n)`.
pub fn stm(model: &QuadraticSaddleModel, t: f64) -> SquareMatrix {
    let n = model.dof();
    let mut phi = DMatrix::zeros(2 * n, 2 * n);
    // Q̇ = λP, Ṗ = λQ
    let (c, s) = ((model.lambda * t).cosh(), (model.lambda * t).sinh());
    phi[(0, 0)] = c;
    phi[(0, n)] = s;
    phi[(n, 0)] = s;
    phi[(n, n)] = c;
    // q̇ = ωp, ṗ = −ωq
    for (k, w) in model.omegas.iter().enumerate() {
        let i = k + 1;
        let (sn, cs) = (w * t).sin_cos();
        phi[(i, i)] = cs;
        phi[(i, n + i)] = sn;
        phi[(n + i, i)] = -sn;
        phi[(n + i, n + i)] = cs;
    }
    SquareMatrix::new(phi).expect("state-transition matrix is finite and even")
}

fn check_mixer(model: &QuadraticSaddleModel, s_mix: &DMatrix<f64>) -> Result<()> {
    let dim = 2 * model.dof();
    if s_mix.nrows() != dim || s_mix.ncols() != dim {
        return Err(Error::Dimension(format!(
            "mixer is {}x{}, model phase space has dimension {dim}",
            s_mix.nrows(),
            s_mix.ncols()
        )));
    }
    if !is_symplectic(s_mix, MIXER_TOL)? {
        return Err(Error::Precondition(format!(
            "mixing matrix is not symplectic at tolerance {MIXER_TOL:e}"
        )));
    }
    Ok(())
}

fn area_unchecked(
    model: &QuadraticSaddleModel,
    r: f64,
    s_mix: &DMatrix<f64>,
    tau: f64,
    plane: ProjectionPlane,
) -> Result<f64> {
    let n = model.dof();
    let c = plane.coordinate(n)?;
    let image = &*stm(model, -tau) * s_mix;
    // P selects rows u = (c), v = (n + c). det of their Gram matrix by
    // Cauchy–Binet, Σ_{i<k} (u_i v_k − u_k v_i)², avoids the cancellation in
    // |u|²|v|² − (u·v)² once the saddle block has grown.
    let (u, v) = (image.row(c), image.row(n + c));
    let dim = u.len();
    let mut det = 0.0;
    for i in 0..dim {
        for k in i + 1..dim {
            let minor = Matrix2::new(u[i], u[k], v[i], v[k]).determinant();
            det += minor * minor;
        }
    }
    if det < -1e-12 {
        return Err(Error::Precondition(format!(
            "projected shape matrix has negative determinant {det:e}"
        )));
    }
    Ok(PI * r * r * det.max(0.0).sqrt())
}

/// `A(τ) = πr² √det(P Φ(−τ) S Sᵀ Φ(−τ)ᵀ Pᵀ)` for the ball of radius `r`
/// mixed by `s_mix` and evolved backward for time `τ`.
pub fn projection_area(
    model: &QuadraticSaddleModel,
    r: f64,
    s_mix: &DMatrix<f64>,
    tau: f64,
    plane: ProjectionPlane,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("radius {r} must be positive")));
    }
    check_mixer(model, s_mix)?;
    area_unchecked(model, r, s_mix, tau, plane)
}

/// `τ_i = i · τ_end / (points − 1)` with `τ_end = 3/λ`.
pub fn default_tau_grid(model: &QuadraticSaddleModel) -> Vec<f64> {
    uniform_grid(0.0, DEFAULT_TAU_EFOLDINGS / model.lambda, DEFAULT_TAU_POINTS)
}

pub fn uniform_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (end - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Evaluates `A(τ)` on `taus` and records the minimum.
pub fn min_projection_area(
    model: &QuadraticSaddleModel,
    r: f64,
    s_mix: &DMatrix<f64>,
    taus: &[f64],
    plane: ProjectionPlane,
    exec: Exec,
) -> Result<ProjectionAreaCurve> {
    if taus.is_empty() {
        return Err(Error::InvalidInput("time grid is empty".into()));
    }
    if taus.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidInput("time grid must be sorted".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("radius {r} must be positive")));
    }
    check_mixer(model, s_mix)?;
    let areas = exec.try_map_range(taus.len(), |i| area_unchecked(model, r, s_mix, taus[i], plane))?;
    let min_area = areas.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ProjectionAreaCurve {
        radius: r,
        taus: taus.to_vec(),
        areas,
        min_area,
        gromov_scale: PI * r * r,
    })
}

/// Capacity of the evolved ellipsoid `Φ(−τ) S_mix B(r)`.
pub fn evolved_capacity(model: &QuadraticSaddleModel, r: f64, s_mix: &DMatrix<f64>, tau: f64) -> Result<f64> {
    let map = &*stm(model, -tau) * s_mix;
    ellipsoid_capacity(&SymmetricPd::image_of_ball(&map, r)?)
}

/// Minimum saddle-plane projection area for each radius, with the candidate
/// width of the model at `energy` as the reference level.
pub fn radius_scan(
    model: &QuadraticSaddleModel,
    radii: &[f64],
    mixer: MixerSpec,
    taus: &[f64],
    energy: f64,
    exec: Exec,
) -> Result<(Vec<RadiusScanRow>, Vec<ProjectionAreaCurve>)> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("at least one radius is required".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::InvalidInput(format!("radius {r} must be positive")));
    }
    let c_cand_ref = candidate_width(model, energy)?.c_cand;
    let s_mix = mixer.build(model.dof());
    let curves = radii
        .iter()
        .map(|&r| min_projection_area(model, r, &s_mix, taus, ProjectionPlane::Saddle, exec))
        .collect::<Result<Vec<_>>>()?;
    let rows = curves
        .iter()
        .map(|c| RadiusScanRow {
            radius: c.radius,
            min_area: c.min_area,
            pi_r2: c.gromov_scale,
            c_cand_ref,
        })
        .collect();
    Ok((rows, curves))
}
