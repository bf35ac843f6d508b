use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::wtf::WaveTf;
use crate::lti::RationalTf;

type Eval = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// A causal linear block known only through its Laplace-domain values,
/// e.g. `G(G-H)/(1-G^2)`. `feedthrough` is `lim s->inf F(s)`.
#[derive(Clone)]
pub struct IrrationalBlock {
    f: Eval,
    feedthrough: f64,
    label: String,
}

impl fmt::Debug for IrrationalBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IrrationalBlock")
            .field("label", &self.label)
            .field("feedthrough", &self.feedthrough)
            .finish()
    }
}

impl IrrationalBlock {
    pub fn new(
        label: impl Into<String>,
        feedthrough: f64,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            feedthrough,
            label: label.into(),
        }
    }

    pub fn from_rational(g: &RationalTf) -> Self {
        let g2 = g.clone();
        Self::new(g.to_string(), g.feedthrough(), move |s| {
            g2.eval_unchecked(s)
        })
    }

    /// The wave transfer function itself.
    pub fn from_wave(w: &WaveTf) -> Self {
        let w2 = w.clone();
        Self::new("G", 0.0, move |s| w2.eval(s))
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        (self.f)(s)
    }

    pub fn feedthrough(&self) -> f64 {
        self.feedthrough
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Zero-frequency limit along the positive real axis. Richardson
    /// extrapolation in `sqrt(s)` from `s = 1e-8` and `s = 1e-7` removes a
    /// leading `sqrt(s)` term; a linear approach leaves an error near 1e-7.
    pub fn dc_limit(&self) -> f64 {
        let (s1, s2): (f64, f64) = (1e-8, 1e-7);
        let r = (s2 / s1).sqrt();
        let f1 = self.eval(Complex64::new(s1, 0.0)).re;
        let f2 = self.eval(Complex64::new(s2, 0.0)).re;
        (r * f1 - f2) / (r - 1.0)
    }

    pub fn scaled(&self, k: f64) -> Self {
        let f = self.f.clone();
        Self::new(
            format!("{k}*({})", self.label),
            k * self.feedthrough,
            move |s| k * f(s),
        )
    }

    pub fn product(&self, other: &Self) -> Self {
        let (f, g) = (self.f.clone(), other.f.clone());
        Self::new(
            format!("({})*({})", self.label, other.label),
            self.feedthrough * other.feedthrough,
            move |s| f(s) * g(s),
        )
    }
}
