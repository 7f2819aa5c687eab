//! Linear symplectic algebra.
//!
//! All matrices use the coordinate ordering `(q_1, …, q_n, p_1, …, p_n)`, so
//! the standard form is `J = [[0, I], [-I, 0]]`.

use std::f64::consts::PI;
use std::ops::Deref;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for pairing `±iλ` eigenvalues of the skew form.
pub const PAIRING_TOL: f64 = 1e-8;
/// Positive-definiteness threshold relative to the largest eigenvalue.
pub const PD_TOL: f64 = 1e-12;
/// Relative symmetry tolerance accepted by [`SymmetricPd::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn check_even_square(m: &DMatrix<f64>) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let dim = m.nrows();
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "phase-space dimension {dim} is not a positive even number"
        )));
    }
    Ok(dim)
}

/// A dense `2n × 2n` real matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_even_square(&m)?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(SquareMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SquareMatrix::new(matrix_from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        SquareMatrix::new(DMatrix::identity(dim, dim))
    }

    /// Degrees of freedom `n` (half the dimension).
    pub fn dof(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.0)
    }
}

impl Deref for SquareMatrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::InvalidInput(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Symmetric positive-definite `2n × 2n` matrix `M`, the shape matrix of the
/// ellipsoid `{z : zᵀ M z ≤ 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPd(DMatrix<f64>);

impl SymmetricPd {
    /// Validates symmetry and definiteness. The stored matrix is the exact
    /// symmetrisation `(M + Mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected non-empty square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let asym = max_abs(&(&m - m.transpose()));
        if asym > SYMMETRY_TOL * max_abs(&m) {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric (max |M - Mᵀ| = {asym:e})"
            )));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if !(max > 0.0) || min <= PD_TOL * max {
            return Err(Error::NotPositiveDefinite { min, max });
        }
        Ok(SymmetricPd(sym))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SymmetricPd::new(matrix_from_rows(rows)?)
    }

    /// Shape matrix of the round ball of radius `r` in dimension `dim`.
    pub fn ball(dim: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("ball radius {r} must be positive")));
        }
        SymmetricPd::new(DMatrix::identity(dim, dim) / (r * r))
    }

    /// Shape matrix of `L(B(r))`, the image of the radius-`r` ball under an
    /// invertible linear map `L`: `M = L⁻ᵀ L⁻¹ / r²`.
    pub fn image_of_ball(map: &DMatrix<f64>, r: f64) -> Result<Self> {
        let inv = map
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("linear map is singular".into()))?;
        SymmetricPd::new(inv.transpose() * inv / (r * r))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `c · M`, for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        SymmetricPd::new(&self.0 * c)
    }

    /// `Sᵀ M S`, the shape matrix of `S⁻¹(Ω_M)`.
    pub fn congruence(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.nrows() != self.dim() || s.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "congruence by {}x{} matrix on dimension {}",
                s.nrows(),
                s.ncols(),
                self.dim()
            )));
        }
        SymmetricPd::new(s.transpose() * &self.0 * s)
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

impl Deref for SymmetricPd {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Symplectic eigenvalues `λ_1 ≥ … ≥ λ_n > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymplecticSpectrum(Vec<f64>);

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0[0]
    }

    pub fn min(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest relative deviation between two spectra of equal length.
    pub fn max_rel_diff(&self, other: &SymplecticSpectrum) -> f64 {
        assert_eq!(self.len(), other.len(), "spectra of different length");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }
}

/// The standard symplectic form on `R^{2n}`.
pub fn standard_j(n: usize) -> SquareMatrix {
    assert!(n >= 1, "standard_j needs n >= 1");
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    SquareMatrix(j)
}

/// `max |SᵀJS − J|` over all entries.
pub fn symplecticity_error(s: &DMatrix<f64>) -> Result<f64> {
    let dim = check_even_square(s)?;
    let j = standard_j(dim / 2);
    Ok(max_abs(&(s.transpose() * &*j * s - &*j)))
}

/// True iff `max |SᵀJS − J| ≤ tol`.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplecticity_error(s)? <= tol)
}

/// Symmetric positive-definite square root via the symmetric eigendecomposition.
pub fn symmetric_sqrt(m: &SymmetricPd) -> SymmetricPd {
    let eig = m.0.clone().symmetric_eigen();
    let root = eig.eigenvalues.map(f64::sqrt);
    let v = &eig.eigenvectors;
    let r = v * DMatrix::from_diagonal(&root) * v.transpose();
    // Symmetrise away rounding; definiteness is inherited from M.
    SymmetricPd((&r + r.transpose()) * 0.5)
}

/// The real skew-symmetric matrix `W = M^{1/2} J M^{1/2}`, similar to `J M`.
pub fn skew_form(m: &SymmetricPd) -> Result<DMatrix<f64>> {
    let dim = check_even_square(&m.0)?;
    let root = symmetric_sqrt(m);
    let j = standard_j(dim / 2);
    Ok(&root.0 * &*j * &root.0)
}

/// Symplectic eigenvalues of `M` from the eigenvalues `±iλ_j` of the skew
/// form `W = M^{1/2} J M^{1/2}`.
pub fn symplectic_spectrum(m: &SymmetricPd) -> Result<SymplecticSpectrum> {
    let w = skew_form(m)?;
    let eig = w.complex_eigenvalues();

    let lambda_max = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if !(lambda_max > 0.0) {
        return Err(Error::Spectrum("skew form has no imaginary spectrum".into()));
    }
    if let Some(z) = eig.iter().find(|z| z.re.abs() > PAIRING_TOL * lambda_max) {
        return Err(Error::Spectrum(format!(
            "eigenvalue {} + {}i of W has a non-negligible real part",
            z.re, z.im
        )));
    }

    let mut mags: Vec<f64> = eig.iter().map(|z| z.im.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let values = mags
        .chunks_exact(2)
        .map(|pair| {
            if (pair[0] - pair[1]).abs() > PAIRING_TOL * lambda_max {
                Err(Error::Spectrum(format!(
                    "unpaired imaginary parts {} and {}",
                    pair[0], pair[1]
                )))
            } else {
                Ok(0.5 * (pair[0] + pair[1]))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymplecticSpectrum(values))
}

/// Symplectic spectrum of `diag(A, B)` as square roots of the eigenvalues of `AB`.
pub fn symplectic_spectrum_blockdiag(a: &SymmetricPd, b: &SymmetricPd) -> Result<SymplecticSpectrum> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "block sizes differ: A is {}x{}, B is {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let ab = &a.0 * &b.0;
    let eig = ab.complex_eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut values = eig
        .iter()
        .map(|z| {
            if z.im.abs() > PAIRING_TOL * scale || !(z.re > 0.0) {
                Err(Error::Spectrum(format!("AB has eigenvalue {} + {}i", z.re, z.im)))
            } else {
                Ok(z.re.sqrt())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(SymplecticSpectrum(values))
}

/// Symplectic capacity `π / λ_max` of the ellipsoid `{z : zᵀ M z ≤ 1}`.
pub fn ellipsoid_capacity(m: &SymmetricPd) -> Result<f64> {
    Ok(PI / symplectic_spectrum(m)?.max())
}

/// Seeded random symplectic matrix `exp(J A)` with `A` symmetric and entries
/// uniform in `[-sigma, sigma]`.
pub fn random_symplectic(n: usize, sigma: f64, seed: u64) -> SquareMatrix {
    assert!(n >= 1, "random_symplectic needs n >= 1");
    assert!(
        sigma >= 0.0 && sigma.is_finite(),
        "sigma must be finite and non-negative"
    );
    let dim = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for k in i..dim {
            let x = if sigma > 0.0 {
                rng.random_range(-sigma..=sigma)
            } else {
                0.0
            };
            a[(i, k)] = x;
            a[(k, i)] = x;
        }
    }
    let hamiltonian = &*standard_j(n) * a;
    SquareMatrix(hamiltonian.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn standard_j_small_cases() {
        let j1 = standard_j(1);
        assert_eq!(j1.to_rows(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let j2 = standard_j(2);
        assert_eq!(j2[(0, 2)], 1.0);
        assert_eq!(j2[(1, 3)], 1.0);
        assert_eq!(j2[(2, 0)], -1.0);
        assert_eq!(j2[(3, 1)], -1.0);
        assert_eq!(j2.iter().filter(|x| **x != 0.0).count(), 4);
    }

    #[test]
    fn standard_j_identities() {
        let j = standard_j(3);
        assert_eq!(j.transpose(), -(*j).clone());
        assert_eq!(&*j * &*j, -DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn symplecticity_checks() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert!(is_symplectic(&id, 1e-12).unwrap());
        assert!(!is_symplectic(&(id * 2.0), 1e-12).unwrap());
        assert!(matches!(
            is_symplectic(&DMatrix::<f64>::identity(3, 3), 1e-12),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn plane_rotations_are_symplectic() {
        // rotation by θ_k in each (q_k, p_k) plane
        let n = 3;
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        for (k, theta) in [0.3f64, -1.1, 2.5].into_iter().enumerate() {
            let (sn, cs) = theta.sin_cos();
            s[(k, k)] = cs;
            s[(k, n + k)] = sn;
            s[(n + k, k)] = -sn;
            s[(n + k, n + k)] = cs;
        }
        assert!(is_symplectic(&s, 1e-12).unwrap());
    }

    #[test]
    fn sqrt_of_diagonal_and_identity() {
        let r = symmetric_sqrt(&SymmetricPd::new(diag(&[4.0, 9.0])).unwrap());
        assert_relative_eq!(r[(0, 0)], 2.0, epsilon = 1e-14);
        assert_relative_eq!(r[(1, 1)], 3.0, epsilon = 1e-14);
        assert!(r[(0, 1)].abs() < 1e-14);
        let r = symmetric_sqrt(&SymmetricPd::new(DMatrix::identity(4, 4)).unwrap());
        assert!(max_abs(&(&*r - DMatrix::<f64>::identity(4, 4))) < 1e-14);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let m = diag(&[1.0, -1.0]);
        assert!(matches!(SymmetricPd::new(m), Err(Error::NotPositiveDefinite { .. })));
        let m = diag(&[1.0, 1e-14]);
        assert!(matches!(SymmetricPd::new(m), Err(Error::NotPositiveDefinite { .. })));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(SymmetricPd::new(m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spectrum_of_identity_and_ball() {
        let s = symplectic_spectrum(&SymmetricPd::new(DMatrix::identity(4, 4)).unwrap()).unwrap();
        assert_eq!(s.len(), 2);
        for v in s.values() {
            assert_relative_eq!(*v, 1.0, max_relative = 1e-12);
        }
        let r = 0.7;
        let s = symplectic_spectrum(&SymmetricPd::ball(6, r).unwrap()).unwrap();
        for v in s.values() {
            assert_relative_eq!(*v, 1.0 / (r * r), max_relative = 1e-12);
        }
    }

    #[test]
    fn spectrum_of_block_example() {
        // A = diag(1, 9) on (q1, q2), B = I on (p1, p2)
        let m = SymmetricPd::new(diag(&[1.0, 9.0, 1.0, 1.0])).unwrap();
        let s = symplectic_spectrum(&m).unwrap();
        assert_relative_eq!(s.values()[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(s.values()[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(ellipsoid_capacity(&m).unwrap(), PI / 3.0, max_relative = 1e-12);

        let a = SymmetricPd::new(diag(&[1.0, 9.0])).unwrap();
        let b = SymmetricPd::new(DMatrix::identity(2, 2)).unwrap();
        let s2 = symplectic_spectrum_blockdiag(&a, &b).unwrap();
        assert_eq!(s2.values().len(), 2);
        assert_relative_eq!(s2.values()[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(s2.values()[1], 1.0, max_relative = 1e-12);
        let s3 = symplectic_spectrum_blockdiag(&b, &b).unwrap();
        assert!(s3.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn blockdiag_dimension_mismatch() {
        let a = SymmetricPd::new(DMatrix::identity(2, 2)).unwrap();
        let b = SymmetricPd::new(DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            symplectic_spectrum_blockdiag(&a, &b),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn capacity_of_ball_and_identity() {
        assert_relative_eq!(
            ellipsoid_capacity(&SymmetricPd::new(DMatrix::identity(4, 4)).unwrap()).unwrap(),
            PI,
            max_relative = 1e-12
        );
        let r = 2.0;
        assert_relative_eq!(
            ellipsoid_capacity(&SymmetricPd::ball(4, r).unwrap()).unwrap(),
            PI * r * r,
            max_relative = 1e-12
        );
    }

    #[test]
    fn random_symplectic_properties() {
        let a = random_symplectic(2, 0.5, 42);
        let b = random_symplectic(2, 0.5, 42);
        assert_eq!(a, b);
        assert_ne!(a, random_symplectic(2, 0.5, 43));
        for seed in 0..20 {
            let s = random_symplectic(3, 0.5, seed);
            assert!(is_symplectic(&s, 1e-10).unwrap(), "seed {seed}");
        }
        let tiny = random_symplectic(2, 1e-14, 7);
        assert!(max_abs(&(&*tiny - DMatrix::<f64>::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn skew_form_is_skew() {
        let s = random_symplectic(2, 0.4, 3);
        let m = SymmetricPd::new(s.transpose() * &*s).unwrap();
        let w = skew_form(&m).unwrap();
        assert!(max_abs(&(&w + w.transpose())) <= 1e-10 * max_abs(&w));
    }
}
