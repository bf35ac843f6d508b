use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lti::RationalTf;
use crate::{Error, Result};

/// Distance of `alpha` from `+-2` below which a point is reported as a branch point.
pub const BRANCH_TOL: f64 = 1e-10;

/// `alpha(s) = 2 + 1/M(s)`.
pub fn alpha_of(m: &RationalTf, s: Complex64) -> Result<Complex64> {
    let num = m.num().eval(s);
    if num.norm() == 0.0 || m.is_zero() {
        return Err(Error::ZeroOfM { s });
    }
    Ok(2.0 + m.den().eval(s) / num)
}

/// Value of a wave transfer function together with `1 - G`, which is
/// computed without cancellation near DC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePoint {
    pub g: Complex64,
    pub one_minus_g: Complex64,
    pub branch_point: bool,
}

/// The wave transfer function `G`, the root of `G^2 - alpha G + 1 = 0` with
/// `|G| <= 1`, defined by an open loop `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTf {
    m: RationalTf,
}

impl WaveTf {
    pub fn new(m: RationalTf) -> Self {
        Self { m }
    }

    pub fn m(&self) -> &RationalTf {
        &self.m
    }

    pub fn alpha(&self, s: Complex64) -> Result<Complex64> {
        alpha_of(&self.m, s)
    }

    /// Both roots written as `1/big` and `big`; returns `(g, 1-g, other_root_inverse)`.
    fn roots(&self, s: Complex64) -> (WavePoint, Option<WavePoint>) {
        let num = self.m.num().eval(s);
        let den = self.m.den().eval(s);
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if num.norm() == 0.0 {
            return (
                WavePoint {
                    g: zero,
                    one_minus_g: one,
                    branch_point: false,
                },
                None,
            );
        }
        if den.norm() == 0.0 {
            return (
                WavePoint {
                    g: one,
                    one_minus_g: zero,
                    branch_point: true,
                },
                None,
            );
        }
        let eps = den / num;
        let q = (eps * (eps + 4.0)).sqrt();
        let alpha = eps + 2.0;
        let branch_point = (alpha - 2.0).norm() < BRANCH_TOL || (alpha + 2.0).norm() < BRANCH_TOL;
        let plus = 0.5 * (alpha + q);
        let minus = 0.5 * (alpha - q);
        let point = |big: Complex64, sign: f64| WavePoint {
            g: 1.0 / big,
            one_minus_g: 0.5 * (eps + sign * q) / big,
            branch_point,
        };
        let (p, m) = (point(plus, 1.0), point(minus, -1.0));
        if plus.norm() >= minus.norm() {
            (p, Some(m))
        } else {
            (m, Some(p))
        }
    }

    /// `G(s)` and `1 - G(s)` with the `|G| <= 1` branch.
    pub fn eval_point(&self, s: Complex64) -> WavePoint {
        self.roots(s).0
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.eval_point(s).g
    }

    /// `1/G(s)`.
    pub fn eval_inv(&self, s: Complex64) -> Complex64 {
        1.0 / self.eval(s)
    }

    /// Evaluation along an ordered path. Where both roots have magnitudes
    /// within 1e-9 of each other, the one closer to the previous value wins.
    pub fn eval_path(&self, path: &[Complex64]) -> Vec<WavePoint> {
        let mut out: Vec<WavePoint> = Vec::with_capacity(path.len());
        for &s in path {
            let (best, other) = self.roots(s);
            let pick = match (other, out.last()) {
                (Some(o), Some(prev)) if (best.g.norm() - o.g.norm()).abs() <= 1e-9 => {
                    if (o.g - prev.g).norm() < (best.g - prev.g).norm() {
                        o
                    } else {
                        best
                    }
                }
                _ => best,
            };
            out.push(pick);
        }
        out
    }

    /// Zero-frequency value: 1 with an integrator in `M`, else the smaller
    /// root at `alpha = 2 + 1/M(0)`.
    pub fn dc_gain(&self) -> f64 {
        if self.m.count_integrators() >= 1 {
            return 1.0;
        }
        self.eval(Complex64::new(1e-8, 0.0)).re
    }
}

/// Free-function form of [`WaveTf::eval`].
pub fn wtf_eval(w: &WaveTf, s: Complex64) -> Complex64 {
    w.eval(s)
}

pub fn wtf_dc_gain(w: &WaveTf) -> f64 {
    w.dc_gain()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m1() -> RationalTf {
        RationalTf::from_coeffs(&[4.0, 4.0], &[0.0, 0.0, 4.0, 1.0]).unwrap()
    }

    fn m2() -> RationalTf {
        RationalTf::from_coeffs(&[1.0, 1.0], &[0.0, 0.0, 3.0, 1.0]).unwrap()
    }

    #[test]
    fn alpha_of_constant_one() {
        let m = RationalTf::constant(1.0);
        assert_eq!(alpha_of(&m, c(0.3, 2.0)).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn alpha_of_m1_at_j() {
        // 1/M_1(j) = j^2 (j + 4) / (4j + 4) = (-j - 4)/(4 + 4j)
        let s = c(0.0, 1.0);
        let want = c(2.0, 0.0) + (c(-4.0, -1.0)) / c(4.0, 4.0);
        assert!((alpha_of(&m1(), s).unwrap() - want).norm() < 1e-15);
        assert!((want - c(1.375, 0.375)).norm() < 1e-15);
    }

    #[test]
    fn alpha_tends_to_two_at_origin() {
        let a = alpha_of(&m1(), c(1e-6, 0.0)).unwrap();
        assert!((a - 2.0).norm() < 1e-11);
    }

    #[test]
    fn zero_of_m_reported() {
        assert!(matches!(
            alpha_of(&m1(), c(-1.0, 0.0)),
            Err(Error::ZeroOfM { .. })
        ));
    }

    #[test]
    fn limits_of_g() {
        let w = WaveTf::new(m1());
        let p = w.eval_point(c(0.0, 0.0));
        assert_eq!(p.g, c(1.0, 0.0));
        assert!(p.branch_point);
        assert!((w.eval(c(1e-9, 0.0)) - 1.0).norm() < 1e-8);
        // M -> 0 at high frequency
        assert!(w.eval(c(0.0, 1e6)).norm() < 1e-11);
        assert_eq!(w.eval(c(-1.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn defining_identity_on_imaginary_axis() {
        let w = WaveTf::new(m1());
        for k in 0..100 {
            let om = 10f64.powf(-3.0 + 6.0 * k as f64 / 99.0);
            let s = c(0.0, om);
            let g = w.eval(s);
            let a = w.alpha(s).unwrap();
            assert!(
                (g + 1.0 / g - a).norm() <= 1e-9 * (1.0 + a.norm()),
                "omega {om}"
            );
            assert!(g.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn one_minus_g_accurate_near_dc() {
        let w = WaveTf::new(m1());
        // G ~ 1 - s sqrt(d0/n0) = 1 - s for M_1
        let p = w.eval_point(c(1e-9, 0.0));
        assert!((p.one_minus_g.re - 1e-9).abs() < 1e-16);
        let w2 = WaveTf::new(m2());
        let p = w2.eval_point(c(1e-9, 0.0));
        assert!((p.one_minus_g.re / 1e-9 - 3f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn dc_gains() {
        assert_eq!(WaveTf::new(m1()).dc_gain(), 1.0);
        assert_eq!(WaveTf::new(m2()).dc_gain(), 1.0);
        let g = WaveTf::new(RationalTf::constant(1.0)).dc_gain();
        assert!((g - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn branch_point_at_minus_two() {
        let w = WaveTf::new(RationalTf::constant(-0.25));
        let p = w.eval_point(c(0.0, 1.0));
        assert!(p.branch_point);
        assert!((p.g + 1.0).norm() < 1e-12);
    }

    #[test]
    fn path_keeps_continuity_on_unit_circle() {
        // constant M = -1: alpha = 1, both roots on the unit circle
        let w = WaveTf::new(RationalTf::constant(-1.0));
        let path: Vec<_> = (0..5).map(|k| c(0.0, k as f64)).collect();
        let pts = w.eval_path(&path);
        for p in pts.windows(2) {
            assert!((p[0].g - p[1].g).norm() < 1e-12);
        }
    }
}
