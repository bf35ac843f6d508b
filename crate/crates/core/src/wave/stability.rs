use num_complex::Complex64;
use serde::Serialize;

use crate::lti::{FreqGrid, RationalTf};

/// Root tolerance for the closed right half-plane tests.
pub const ROOT_TOL: f64 = 1e-8;

/// Result of the wave-transfer-function stability test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub proper: bool,
    pub crhp_zeros: usize,
    pub crhp_poles_nonorigin: usize,
    pub nyquist_clear: bool,
    /// Frequency where `1 + 4M(jw)` was found on the non-positive real axis.
    pub crossing_omega: Option<f64>,
    pub verdict: bool,
}

fn crhp_count(roots: &[Complex64]) -> usize {
    roots.iter().filter(|r| r.re >= -ROOT_TOL).count()
}

/// Checks that `M` is proper, has no closed-RHP zeros, no closed-RHP poles
/// other than at the origin, and that `1 + 4M(jw)` stays off the
/// non-positive real axis on the grid and between neighbouring grid points.
pub fn check_wtf_stability(m: &RationalTf, grid: &FreqGrid) -> StabilityReport {
    let proper = m.is_proper();
    let crhp_zeros = if m.is_zero() {
        0
    } else {
        crhp_count(&m.num().roots())
    };
    let den = m.den();
    let crhp_poles_nonorigin = crhp_count(&den.deflate_origin(den.origin_multiplicity()).roots());
    let crossing_omega = nyquist_crossing(m, grid);
    let nyquist_clear = crossing_omega.is_none();
    StabilityReport {
        proper,
        crhp_zeros,
        crhp_poles_nonorigin,
        nyquist_clear,
        crossing_omega,
        verdict: proper && crhp_zeros == 0 && crhp_poles_nonorigin == 0 && nyquist_clear,
    }
}

fn curve(m: &RationalTf, w: f64) -> Complex64 {
    1.0 + 4.0 * m.eval_unchecked(Complex64::new(0.0, w))
}

fn on_negative_axis(v: Complex64) -> bool {
    v.re <= 0.0 && v.im.abs() <= 1e-9 * (1.0 + v.norm())
}

fn nyquist_crossing(m: &RationalTf, grid: &FreqGrid) -> Option<f64> {
    let w = grid.omegas();
    let vals: Vec<Complex64> = w.iter().map(|&x| curve(m, x)).collect();
    for (k, v) in vals.iter().enumerate() {
        if !v.is_finite() || on_negative_axis(*v) {
            return Some(w[k]);
        }
    }
    for k in 0..w.len() - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        if a.im.signum() == b.im.signum() {
            continue;
        }
        // bisect the imaginary-axis crossing in log-frequency
        let (mut lo, mut hi) = (w[k].ln(), w[k + 1].ln());
        let s_lo = a.im.signum();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if curve(m, mid.exp()).im.signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let wc = (0.5 * (lo + hi)).exp();
        if curve(m, wc).re <= 0.0 {
            return Some(wc);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1() -> RationalTf {
        RationalTf::from_coeffs(&[4.0, 4.0], &[0.0, 0.0, 4.0, 1.0]).unwrap()
    }

    #[test]
    fn m1_passes() {
        let r = check_wtf_stability(&m1(), &FreqGrid::default_grid());
        assert!(r.verdict, "{r:?}");
    }

    #[test]
    fn m2_passes() {
        let m2 = RationalTf::from_coeffs(&[1.0, 1.0], &[0.0, 0.0, 3.0, 1.0]).unwrap();
        assert!(check_wtf_stability(&m2, &FreqGrid::default_grid()).verdict);
    }

    #[test]
    fn constant_minus_quarter_fails() {
        let r = check_wtf_stability(&RationalTf::constant(-0.25), &FreqGrid::default_grid());
        assert!(!r.nyquist_clear && !r.verdict);
    }

    #[test]
    fn crossing_between_grid_points_found() {
        // 1 + 4M(j) = -3 at w = 1, which is not a grid point here
        let m = RationalTf::from_coeffs(&[2.0], &[0.0, 1.0, 2.0, 1.0]).unwrap();
        let grid = FreqGrid::log_spaced(0.013, 97.0, 20).unwrap();
        let r = check_wtf_stability(&m, &grid);
        assert!(!r.verdict);
        assert!((r.crossing_omega.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rhp_zero_and_pole_counted() {
        let m = RationalTf::from_coeffs(&[-1.0, 1.0], &[0.0, -2.0, 1.0]).unwrap();
        let r = check_wtf_stability(&m, &FreqGrid::default_grid());
        assert_eq!(r.crhp_zeros, 1);
        assert_eq!(r.crhp_poles_nonorigin, 1);
        assert!(!r.verdict);
    }

    #[test]
    fn improper_fails() {
        let m = RationalTf::from_coeffs(&[1.0, 1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(!check_wtf_stability(&m, &FreqGrid::default_grid()).proper);
    }
}
