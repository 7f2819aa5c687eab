//! Bracketing univariate root finding.

/// Convergence controls for [`brent`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-300,
            rel: 1e-12,
            max_iter: 200,
        }
    }
}

/// Brent's method on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite
/// sign (or one of them zero). Returns `None` when the bracket is invalid.
///
/// Combines inverse quadratic interpolation, secant steps and bisection; the
/// bracket shrinks on every iteration so convergence is guaranteed.
pub fn brent<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if !fa.is_finite() || !fb.is_finite() || fa.signum() == fb.signum() {
        return None;
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let delta = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.abs + tol.rel * b.abs());
        let half = 0.5 * (c - b);
        if half.abs() <= delta || fb == 0.0 {
            return Some(b);
        }

        if e.abs() >= delta && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * half * q - (delta * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }

        a = b;
        fa = fb;
        b += if d.abs() > delta { d } else { delta.copysign(half) };
        fb = f(b);
        if !fb.is_finite() {
            return None;
        }
    }
    Some(b)
}

/// Outcome of [`smallest_positive_root`] when no root is found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BracketFailure {
    /// The function never changed sign on `(0, cap]`.
    NoSignChange { cap: f64 },
    /// `f(0)` is not strictly negative.
    NotNegativeAtZero,
}

/// Smallest positive root of `f` given `f(0) < 0`.
///
/// The upper end starts at `initial_upper` and doubles until the sign
/// changes, stopping at `cap`. Each expansion interval is scanned on a
/// uniform sub-grid so that the first sign change (not just any) is refined.
pub fn smallest_positive_root<F>(mut f: F, initial_upper: f64, cap: f64, tol: Tolerance) -> Result<f64, BracketFailure>
where
    F: FnMut(f64) -> f64,
{
    const SUBDIVISIONS: usize = 32;

    let f0 = f(0.0);
    if !(f0 < 0.0) {
        return Err(BracketFailure::NotNegativeAtZero);
    }

    let mut lo = 0.0;
    let mut hi = if initial_upper > 0.0 && initial_upper.is_finite() {
        initial_upper.min(cap)
    } else {
        1.0f64.min(cap)
    };
    loop {
        // The endpoint itself is evaluated first so that exact roots on the
        // initial guess (linear models) are returned without refinement.
        let fhi = f(hi);
        if fhi >= 0.0 {
            let step = (hi - lo) / SUBDIVISIONS as f64;
            let mut left = lo;
            for s in 1..=SUBDIVISIONS {
                let right = if s == SUBDIVISIONS { hi } else { lo + step * s as f64 };
                let fr = if s == SUBDIVISIONS { fhi } else { f(right) };
                if fr == 0.0 {
                    return Ok(right);
                }
                if fr > 0.0 {
                    return brent(&mut f, left, right, tol).ok_or(BracketFailure::NoSignChange { cap });
                }
                left = right;
            }
        }
        if hi >= cap {
            return Err(BracketFailure::NoSignChange { cap });
        }
        lo = hi;
        hi = (2.0 * hi).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12 * 2f64.sqrt());
    }

    #[test]
    fn brent_rejects_same_sign() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, Tolerance::default()).is_none());
    }

    #[test]
    fn brent_handles_endpoint_root() {
        assert_eq!(brent(|x| x - 1.0, 1.0, 3.0, Tolerance::default()), Some(1.0));
    }

    #[test]
    fn brent_on_steep_cubic() {
        let r = brent(|x| (x - 0.3).powi(3), -5.0, 7.0, Tolerance::default()).unwrap();
        assert!((r - 0.3).abs() < 1e-4);
    }

    #[test]
    fn smallest_root_picks_first_crossing() {
        // roots at 1, 2, 3; f(0) = -6
        let f = |x: f64| (x - 1.0) * (x - 2.0) * (x - 3.0);
        let r = smallest_positive_root(f, 10.0, 1e12, Tolerance::default()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smallest_root_expands_bracket() {
        let r = smallest_positive_root(|x| x - 1000.0, 1.0, 1e12, Tolerance::default()).unwrap();
        assert!((r - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn smallest_root_reports_missing_root() {
        let e = smallest_positive_root(|_| -1.0, 1.0, 1e6, Tolerance::default()).unwrap_err();
        assert_eq!(e, BracketFailure::NoSignChange { cap: 1e6 });
        let e = smallest_positive_root(|x| x + 1.0, 1.0, 1e6, Tolerance::default()).unwrap_err();
        assert_eq!(e, BracketFailure::NotNegativeAtZero);
    }
}
