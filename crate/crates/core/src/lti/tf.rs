use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::{Error, Result};

/// Coefficient tolerance used when deciding whether two transfer functions
/// are the same model.
pub const TF_EQ_TOL: f64 = 1e-9;

/// Relative size of `|den(s)|` below which evaluation reports a pole hit.
const POLE_TOL: f64 = 1e-300;

/// Real-coefficient rational transfer function `num(s)/den(s)`.
///
/// Stored normalised: the denominator is monic and common factors of `s`
/// are cancelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTf", into = "RawTf")]
pub struct RationalTf {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TryFrom<RawTf> for RationalTf {
    type Error = Error;

    fn try_from(raw: RawTf) -> Result<Self> {
        RationalTf::new(Polynomial::new(raw.num)?, Polynomial::new(raw.den)?)
    }
}

impl From<RationalTf> for RawTf {
    fn from(tf: RationalTf) -> Self {
        RawTf {
            num: tf.num.into(),
            den: tf.den.into(),
        }
    }
}

impl RationalTf {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let common = if num.is_zero() {
            den.origin_multiplicity()
        } else {
            num.origin_multiplicity().min(den.origin_multiplicity())
        };
        let num = num.deflate_origin(common);
        let den = den.deflate_origin(common);
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    /// Builds from ascending coefficient slices.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(
            Polynomial::new(num.to_vec())?,
            Polynomial::new(den.to_vec())?,
        )
    }

    pub fn constant(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `1/s`
    pub fn integrator() -> Self {
        Self {
            num: Polynomial::one(),
            den: Polynomial::monomial(1),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn ensure_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::ImproperTf {
                num: self.num.degree(),
                den: self.den.degree(),
            })
        }
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval(s);
        let scale = self.den.max_abs_coeff() * (1.0 + s.norm()).powi(self.den.degree() as i32);
        if d.norm() <= POLE_TOL * scale {
            return Err(Error::PoleHit {
                s,
                magnitude: d.norm(),
            });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Evaluation without the pole check; returns inf/NaN at poles.
    pub fn eval_unchecked(&self, s: Complex64) -> Complex64 {
        self.num.eval(s) / self.den.eval(s)
    }

    /// Number of integrators: multiplicity of the pole at the origin.
    pub fn count_integrators(&self) -> usize {
        let num_k = if self.num.is_zero() {
            0
        } else {
            self.num.origin_multiplicity()
        };
        self.den.origin_multiplicity().saturating_sub(num_k)
    }

    /// `lim s->0 s^nu M(s)` where `nu` is the integrator count.
    pub fn integrator_gain(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        self.num.lowest_nonzero() / self.den.lowest_nonzero()
    }

    pub fn dc_gain(&self) -> f64 {
        if self.count_integrators() > 0 {
            f64::INFINITY
        } else if self.num.origin_multiplicity() > 0 {
            0.0
        } else {
            self.num.coeffs()[0] / self.den.coeffs()[0]
        }
    }

    /// `lim s->inf G(s)` for proper transfer functions.
    pub fn feedthrough(&self) -> f64 {
        if self.num.is_zero() || self.num.degree() < self.den.degree() {
            0.0
        } else {
            self.num.leading() / self.den.leading()
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, &self.den * &other.den).expect("nonzero denominators")
    }

    pub fn add(&self, other: &Self) -> Self {
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        Self::new(num, &self.den * &other.den).expect("nonzero denominators")
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.num.scale(k), self.den.clone()).expect("nonzero denominator")
    }

    /// Unity negative feedback `G/(1+G)`.
    pub fn feedback(&self) -> Self {
        Self::new(self.num.clone(), &self.den + &self.num).expect("1+G has nonzero denominator")
    }

    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        self.num.approx_eq(&other.num, rel_tol) && self.den.approx_eq(&other.den, rel_tol)
    }

    /// Same model up to [`TF_EQ_TOL`].
    pub fn same_model(&self, other: &Self) -> bool {
        self.approx_eq(other, TF_EQ_TOL)
    }
}

/// `num(s)/den(s)` with a pole check.
pub fn tf_eval(g: &RationalTf, s: Complex64) -> Result<Complex64> {
    g.eval(s)
}

/// Integrator count of an open loop.
pub fn count_integrators(g: &RationalTf) -> usize {
    g.count_integrators()
}

impl fmt::Display for RationalTf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}
