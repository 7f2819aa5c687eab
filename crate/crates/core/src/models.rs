//! Model definitions: quadratic saddle–center normal forms, truncated
//! classical normal-form (CNF) polynomials in the actions `(I, J_2, …, J_n)`,
//! and the physical Eckart–Morse(–Morse) Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{brent, Tolerance};

/// Saddle energy of the built-in Eckart–Morse normal form.
pub const EM_E0: f64 = -0.9875;
/// Linear Lyapunov exponent `λ` (coefficient of `I`).
pub const EM_LAMBDA: f64 = 0.7350;
/// Harmonic bath frequency `ω_2` (coefficient of `J_2`).
pub const EM_OMEGA2: f64 = 1.8225;
/// Leading reaction–bath cross coupling `b_2` (coefficient of `I J_2`).
pub const EM_B2: f64 = -0.0123;
/// Second bath frequency `ω_3` of the Eckart–Morse–Morse normal form.
pub const EMM_OMEGA3: f64 = 1.267;

/// Quadratic normal form
/// `H_2 = E_0 + λ/2 (P_1² − Q_1²) + Σ_k ω_k/2 (p_k² + q_k²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSaddleModel {
    pub lambda: f64,
    pub omegas: Vec<f64>,
    #[serde(default)]
    pub e0: f64,
}

impl QuadraticSaddleModel {
    pub fn new(lambda: f64, omegas: Vec<f64>, e0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda = {lambda} must be positive")));
        }
        if omegas.is_empty() {
            return Err(Error::InvalidInput("at least one bath frequency is required".into()));
        }
        if let Some(w) = omegas.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("bath frequency {w} must be positive")));
        }
        if !e0.is_finite() {
            return Err(Error::InvalidInput("e0 must be finite".into()));
        }
        Ok(QuadraticSaddleModel { lambda, omegas, e0 })
    }

    /// Degrees of freedom `n` (one saddle plus `n − 1` bath modes).
    pub fn dof(&self) -> usize {
        self.omegas.len() + 1
    }

    pub fn bath_count(&self) -> usize {
        self.omegas.len()
    }

    /// Quadratic (linear-in-actions) part of a CNF polynomial.
    pub fn from_cnf(model: &CnfModel) -> Self {
        QuadraticSaddleModel {
            lambda: model.lambda(),
            omegas: model.omegas(),
            e0: model.e0(),
        }
    }

    /// The same model written as `E_0 + λ I + Σ ω_k J_k`.
    pub fn to_cnf(&self) -> CnfModel {
        let m = self.bath_count();
        let mut terms = vec![CnfTerm {
            i: 1,
            j: vec![0; m],
            c: self.lambda,
        }];
        for (k, w) in self.omegas.iter().enumerate() {
            let mut j = vec![0; m];
            j[k] = 1;
            terms.push(CnfTerm { i: 0, j, c: *w });
        }
        CnfModel::new(self.e0, terms).expect("validated quadratic model is a valid CNF model")
    }
}

/// One monomial `c · I^i · Π_k J_k^{j_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnfTerm {
    pub i: u32,
    pub j: Vec<u32>,
    pub c: f64,
}

impl CnfTerm {
    fn is_constant(&self) -> bool {
        self.i == 0 && self.j.iter().all(|&e| e == 0)
    }

    fn is_unit(&self, i: u32, bath: Option<usize>) -> bool {
        self.i == i && self.j.iter().enumerate().all(|(k, &e)| e == u32::from(Some(k) == bath))
    }
}

/// Truncated classical normal form `K(I, J_2, …, J_n) = E_0 + Σ terms`.
///
/// Stored sparsely. The constant term lives in `e0`; a constant monomial in
/// the input must agree with it and is folded away.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CnfFile", into = "CnfFile")]
pub struct CnfModel {
    e0: f64,
    bath_count: usize,
    terms: Vec<CnfTerm>,
}

/// On-disk layout of a CNF coefficient table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CnfFile {
    pub e0: f64,
    pub terms: Vec<CnfTerm>,
}

impl TryFrom<CnfFile> for CnfModel {
    type Error = Error;
    fn try_from(f: CnfFile) -> Result<Self> {
        CnfModel::new(f.e0, f.terms)
    }
}

impl From<CnfModel> for CnfFile {
    fn from(m: CnfModel) -> Self {
        CnfFile {
            e0: m.e0,
            terms: m.terms,
        }
    }
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|t| f64::from(n - t)).product()
}

impl CnfModel {
    pub fn new(e0: f64, terms: Vec<CnfTerm>) -> Result<Self> {
        if !e0.is_finite() {
            return Err(Error::InvalidInput("e0 must be finite".into()));
        }
        let bath_count = terms.first().map_or(0, |t| t.j.len());
        if bath_count == 0 {
            return Err(Error::InvalidInput("CNF model needs at least one bath action".into()));
        }
        let mut kept: Vec<CnfTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.j.len() != bath_count {
                return Err(Error::Arity {
                    expected: bath_count,
                    got: t.j.len(),
                });
            }
            if !t.c.is_finite() {
                return Err(Error::InvalidInput(format!("coefficient {} is not finite", t.c)));
            }
            if kept.iter().any(|k| k.i == t.i && k.j == t.j) {
                return Err(Error::InvalidInput(format!("duplicate monomial I^{} J^{:?}", t.i, t.j)));
            }
            if t.is_constant() {
                if t.c != e0 {
                    return Err(Error::InvalidInput(format!(
                        "constant term {} disagrees with e0 = {e0}",
                        t.c
                    )));
                }
                continue;
            }
            kept.push(t);
        }
        let model = CnfModel {
            e0,
            bath_count,
            terms: kept,
        };
        if !(model.lambda() > 0.0) {
            return Err(Error::InvalidInput(
                "CNF model needs a positive linear I coefficient".into(),
            ));
        }
        if let Some((k, w)) = model.omegas().iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "linear J_{} coefficient {w} must be positive",
                k + 2
            )));
        }
        Ok(model)
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn bath_count(&self) -> usize {
        self.bath_count
    }

    pub fn dof(&self) -> usize {
        self.bath_count + 1
    }

    /// Non-constant monomials.
    pub fn terms(&self) -> &[CnfTerm] {
        &self.terms
    }

    fn unit_coeff(&self, i: u32, bath: Option<usize>) -> f64 {
        self.terms.iter().find(|t| t.is_unit(i, bath)).map_or(0.0, |t| t.c)
    }

    /// Coefficient of the linear `I` term.
    pub fn lambda(&self) -> f64 {
        self.unit_coeff(1, None)
    }

    /// Coefficients of the linear `J_k` terms.
    pub fn omegas(&self) -> Vec<f64> {
        (0..self.bath_count).map(|k| self.unit_coeff(0, Some(k))).collect()
    }

    /// Highest power of `I` appearing in the polynomial.
    pub fn i_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.i).max().unwrap_or(0)
    }

    /// True when every nonlinear coefficient is zero.
    pub fn is_quadratic(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.c == 0.0 || t.i + t.j.iter().sum::<u32>() <= 1)
    }

    fn check_arity(&self, j: &[f64]) -> Result<()> {
        if j.len() != self.bath_count {
            return Err(Error::Arity {
                expected: self.bath_count,
                got: j.len(),
            });
        }
        Ok(())
    }

    /// `K(I, J)`.
    pub fn eval(&self, i: f64, j: &[f64]) -> Result<f64> {
        self.check_arity(j)?;
        Ok(self.e0 + self.sum_terms(0, &vec![0; self.bath_count], i, j))
    }

    /// Mixed partial derivative `∂^{di} ∂^{dj} K / ∂I^{di} ∂J^{dj}` at `(I, J)`.
    pub fn derivative(&self, di: u32, dj: &[u32], i: f64, j: &[f64]) -> Result<f64> {
        self.check_arity(j)?;
        if dj.len() != self.bath_count {
            return Err(Error::Arity {
                expected: self.bath_count,
                got: dj.len(),
            });
        }
        let constant = if di == 0 && dj.iter().all(|&d| d == 0) {
            self.e0
        } else {
            0.0
        };
        Ok(constant + self.sum_terms(di, dj, i, j))
    }

    fn sum_terms(&self, di: u32, dj: &[u32], i: f64, j: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.i >= di && t.j.iter().zip(dj).all(|(e, d)| e >= d))
            .map(|t| {
                let mut v = t.c * falling(t.i, di) * i.powi((t.i - di) as i32);
                for ((&e, &d), &x) in t.j.iter().zip(dj).zip(j) {
                    v *= falling(e, d) * x.powi((e - d) as i32);
                }
                v
            })
            .sum()
    }

    /// `K(0, J)`, the polynomial restricted to the dividing surface.
    pub fn eval_on_ds(&self, j: &[f64]) -> Result<f64> {
        self.eval(0.0, j)
    }

    /// Effective hyperbolic rate `Λ(J) = ∂K/∂I` at `I = 0`.
    pub fn effective_lyapunov(&self, j: &[f64]) -> Result<f64> {
        let rate = self.derivative(1, &vec![0; self.bath_count], 0.0, j)?;
        if !(rate > 0.0) {
            return Err(Error::NonPositiveRate(rate));
        }
        Ok(rate)
    }

    /// Solves `K(I, J) = energy` for the reaction integral `I` at fixed `J`.
    ///
    /// Exact for models linear in `I`; otherwise the root nearest zero on the
    /// side indicated by the sign of `energy − K(0, J)` is found by bracketing.
    pub fn solve_reaction_integral(&self, energy: f64, j: &[f64]) -> Result<f64> {
        let k0 = self.eval_on_ds(j)?;
        let rate = self.effective_lyapunov(j)?;
        if self.i_degree() <= 1 {
            return Ok((energy - k0) / rate);
        }
        let g = |i: f64| self.eval(i, j).map(|v| v - energy).unwrap_or(f64::NAN);
        let guess = (energy - k0) / rate;
        if guess == 0.0 {
            return Ok(0.0);
        }
        let mut far = guess;
        for _ in 0..60 {
            if g(far).signum() != g(0.0).signum() {
                return brent(g, 0.0, far, Tolerance::default())
                    .ok_or_else(|| Error::Precondition("reaction integral root refinement failed".into()));
            }
            far *= 2.0;
        }
        Err(Error::Precondition(format!(
            "K(I, J) = {energy} has no solution in I near the dividing surface"
        )))
    }
}

/// `K = E_0 + λI + ω_2 J_2 + b_2 I J_2`, the printed truncation of the
/// two-degree-of-freedom Eckart–Morse normal form.
pub fn builtin_eckart_morse_2dof() -> CnfModel {
    CnfModel::new(
        EM_E0,
        vec![
            CnfTerm {
                i: 1,
                j: vec![0],
                c: EM_LAMBDA,
            },
            CnfTerm {
                i: 0,
                j: vec![1],
                c: EM_OMEGA2,
            },
            CnfTerm {
                i: 1,
                j: vec![1],
                c: EM_B2,
            },
        ],
    )
    .expect("built-in model is valid")
}

/// Three-degree-of-freedom Eckart–Morse–Morse truncation: the two-mode terms
/// plus `ω_3 J_3`. Couplings of the third mode are not tabulated and are zero.
pub fn builtin_eckart_morse_morse_3dof() -> CnfModel {
    CnfModel::new(
        EM_E0,
        vec![
            CnfTerm {
                i: 1,
                j: vec![0, 0],
                c: EM_LAMBDA,
            },
            CnfTerm {
                i: 0,
                j: vec![1, 0],
                c: EM_OMEGA2,
            },
            CnfTerm {
                i: 0,
                j: vec![0, 1],
                c: EMM_OMEGA3,
            },
            CnfTerm {
                i: 1,
                j: vec![1, 0],
                c: EM_B2,
            },
        ],
    )
    .expect("built-in model is valid")
}

/// Parameters of the physical Eckart–Morse(–Morse) Hamiltonian
///
/// `H = |p|²/2m + V_E(x) + Σ_k V_{M,k}(y_k) + ε Σ_{i<j} p_i p_j`.
///
/// Only `m = 1` and `ε = 0.3` are tied to the literature model; the barrier
/// and well constants in [`Default`] are artifact defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EckartMorseFile", into = "EckartMorseFile")]
pub struct EckartMorseParams {
    pub m: f64,
    pub eps: f64,
    /// Eckart asymmetry `A` (product-side asymptote).
    pub asym: f64,
    /// Eckart barrier scale `B`.
    pub barrier: f64,
    /// Eckart width `a`.
    pub width: f64,
    /// Eckart shift `x_0`.
    pub x0: f64,
    /// Morse depths `D_e`, one per bath mode.
    pub de: Vec<f64>,
    /// Morse range parameters `a_M`, one per bath mode.
    pub a_m: Vec<f64>,
}

/// JSON layout of [`EckartMorseParams`]. A missing `x0` selects the
/// barrier-centred shift.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EckartMorseFile {
    pub m: f64,
    pub eps: f64,
    #[serde(rename = "A")]
    pub asym: f64,
    #[serde(rename = "B")]
    pub barrier: f64,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(rename = "De")]
    pub de: Vec<f64>,
    #[serde(rename = "aM")]
    pub a_m: Vec<f64>,
}

impl TryFrom<EckartMorseFile> for EckartMorseParams {
    type Error = Error;
    fn try_from(f: EckartMorseFile) -> Result<Self> {
        let mut p = EckartMorseParams {
            m: f.m,
            eps: f.eps,
            asym: f.asym,
            barrier: f.barrier,
            width: f.a,
            x0: f.x0.unwrap_or(0.0),
            de: f.de,
            a_m: f.a_m,
        };
        p.validate()?;
        if f.x0.is_none() {
            p.x0 = p.barrier_centered_x0()?;
        }
        Ok(p)
    }
}

impl From<EckartMorseParams> for EckartMorseFile {
    fn from(p: EckartMorseParams) -> Self {
        EckartMorseFile {
            m: p.m,
            eps: p.eps,
            asym: p.asym,
            barrier: p.barrier,
            a: p.width,
            x0: Some(p.x0),
            de: p.de,
            a_m: p.a_m,
        }
    }
}

impl Default for EckartMorseParams {
    fn default() -> Self {
        let mut p = EckartMorseParams {
            m: 1.0,
            eps: 0.3,
            asym: -0.5,
            barrier: 2.0,
            width: 1.0,
            x0: 0.0,
            de: vec![1.0, 1.0],
            a_m: vec![1.0, 1.0],
        };
        p.x0 = p.barrier_centered_x0().expect("default Eckart barrier has a maximum");
        p
    }
}

/// Numerically stable `(s, 1 − s)` for the logistic `s = e^u / (1 + e^u)`.
fn logistic_pair(u: f64) -> (f64, f64) {
    if u >= 0.0 {
        let e = (-u).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = u.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

impl EckartMorseParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("m", self.m), ("B", self.barrier), ("a", self.width)];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("{name} = {v} must be positive")));
        }
        if !self.eps.is_finite() || !self.asym.is_finite() || !self.x0.is_finite() {
            return Err(Error::InvalidInput("eps, A and x0 must be finite".into()));
        }
        if self.de.len() != self.a_m.len() {
            return Err(Error::Arity {
                expected: self.de.len(),
                got: self.a_m.len(),
            });
        }
        if let Some(v) = self.de.iter().chain(&self.a_m).find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("Morse parameter {v} must be positive")));
        }
        Ok(())
    }

    /// Highest supported number of degrees of freedom (reaction + Morse modes).
    pub fn max_dof(&self) -> usize {
        1 + self.de.len()
    }

    /// Shift `x_0` placing the Eckart maximum at `x = 0`, from `dV_E/dx = 0`.
    pub fn barrier_centered_x0(&self) -> Result<f64> {
        // In u = (x + x0)/a the stationarity condition is A + B(1 − 2s(u)) = 0,
        // monotone in u; a maximum exists iff |A| < B.
        let (asym, barrier) = (self.asym, self.barrier);
        let g = |u: f64| {
            let (s, c) = logistic_pair(u);
            asym + barrier * (c - s)
        };
        let u = brent(
            g,
            -700.0,
            700.0,
            Tolerance {
                abs: 1e-15,
                ..Tolerance::default()
            },
        )
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "Eckart potential with A = {asym}, B = {barrier} has no barrier maximum"
            ))
        })?;
        Ok(self.width * u)
    }

    /// Eckart barrier `V_E(x)`, evaluated in logistic form.
    pub fn eckart_potential(&self, x: f64) -> f64 {
        let (s, c) = logistic_pair((x + self.x0) / self.width);
        self.asym * s + self.barrier * s * c
    }

    /// `dV_E/dx`.
    pub fn eckart_gradient(&self, x: f64) -> f64 {
        let (s, c) = logistic_pair((x + self.x0) / self.width);
        s * c * (self.asym + self.barrier * (c - s)) / self.width
    }

    /// Morse well `V_{M,k}(q) = D_e (e^{−2 a_M q} − 2 e^{−a_M q})` of bath mode `k` (0-based).
    pub fn morse_potential(&self, k: usize, q: f64) -> f64 {
        let e = (-self.a_m[k] * q).exp();
        self.de[k] * (e * e - 2.0 * e)
    }

    pub fn morse_gradient(&self, k: usize, q: f64) -> f64 {
        let e = (-self.a_m[k] * q).exp();
        2.0 * self.a_m[k] * self.de[k] * (e - e * e)
    }

    fn dof_of_state(&self, state: &[f64]) -> Result<usize> {
        if state.is_empty() || !state.len().is_multiple_of(2) || state.len() / 2 > self.max_dof() {
            return Err(Error::Arity {
                expected: 2 * self.max_dof(),
                got: state.len(),
            });
        }
        Ok(state.len() / 2)
    }

    /// Kinetic energy `|p|²/2m + ε Σ_{i<j} p_i p_j`.
    pub fn kinetic(&self, p: &[f64]) -> f64 {
        let sq: f64 = p.iter().map(|x| x * x).sum();
        let total: f64 = p.iter().sum();
        // Σ_{i<j} p_i p_j = ((Σp)² − Σp²)/2
        sq / (2.0 * self.m) + self.eps * 0.5 * (total * total - sq)
    }

    /// Potential energy at configuration `(x, y, z, …)`.
    pub fn potential(&self, q: &[f64]) -> f64 {
        self.eckart_potential(q[0])
            + q[1..]
                .iter()
                .enumerate()
                .map(|(k, &y)| self.morse_potential(k, y))
                .sum::<f64>()
    }

    /// Total energy of `state = (x, y[, z], p_x, p_y[, p_z])`. Two-degree-of-freedom
    /// states drop the `z` terms.
    pub fn full_hamiltonian(&self, state: &[f64]) -> Result<f64> {
        let n = self.dof_of_state(state)?;
        let (q, p) = state.split_at(n);
        Ok(self.kinetic(p) + self.potential(q))
    }
}
