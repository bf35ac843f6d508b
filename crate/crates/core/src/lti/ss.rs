use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::signal::TimeSignal;
use super::tf::RationalTf;
use crate::{Error, Result};

/// Continuous-time state-space system `x' = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}",
                n,
                a.ncols()
            )));
        }
        if b.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows and C has {} columns for {n} states",
                b.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Static gain with no state.
    pub fn gain(k: f64) -> Self {
        Self {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, 1),
            c: DMatrix::zeros(1, 0),
            d: DMatrix::from_element(1, 1, k),
        }
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Transfer matrix `C (sI - A)^-1 B + D` at a complex point.
    pub fn eval(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let n = self.n_states();
        let d = self.d.map(|v| Complex64::new(v, 0.0));
        if n == 0 {
            return Ok(d);
        }
        let mut m = self.a.map(|v| Complex64::new(-v, 0.0));
        for i in 0..n {
            m[(i, i)] += s;
        }
        let bc = self.b.map(|v| Complex64::new(v, 0.0));
        let x = m
            .lu()
            .solve(&bc)
            .ok_or(Error::PoleHit { s, magnitude: 0.0 })?;
        Ok(self.c.map(|v| Complex64::new(v, 0.0)) * x + d)
    }

    /// Scalar transfer from input `j` to output `i`.
    pub fn eval_siso(&self, s: Complex64, i: usize, j: usize) -> Result<Complex64> {
        Ok(self.eval(s)?[(i, j)])
    }

    /// Exact zero-order-hold discretisation of the selected input columns.
    pub fn discretize(&self, dt: f64, inputs: &[usize]) -> DiscreteSystem {
        let n = self.n_states();
        let m = inputs.len();
        let mut aug = DMatrix::<f64>::zeros(n + m, n + m);
        aug.view_mut((0, 0), (n, n)).copy_from(&(&self.a * dt));
        for (k, &j) in inputs.iter().enumerate() {
            for i in 0..n {
                aug[(i, n + k)] = self.b[(i, j)] * dt;
            }
        }
        let e = if n + m == 0 { aug } else { aug.exp() };
        let ad = e.view((0, 0), (n, n)).into_owned();
        let bd = e.view((0, n), (n, m)).into_owned();
        let mut d = DMatrix::zeros(self.n_outputs(), m);
        for (k, &j) in inputs.iter().enumerate() {
            d.set_column(k, &self.d.column(j));
        }
        DiscreteSystem {
            dt,
            ad,
            bd,
            c: self.c.clone(),
            d,
        }
    }

    /// Zero-initial-condition response to a sampled input held constant over
    /// each sample period.
    pub fn simulate(&self, u: &TimeSignal) -> Result<TimeSignal> {
        if u.dim() != self.n_inputs() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} channels, system has {} inputs",
                u.dim(),
                self.n_inputs()
            )));
        }
        let all: Vec<usize> = (0..self.n_inputs()).collect();
        let sys = self.discretize(u.dt, &all);
        let mut x = DVector::zeros(self.n_states());
        let mut out = Vec::with_capacity(u.len());
        for (k, uk) in u.samples.iter().enumerate() {
            let uk = DVector::from_column_slice(uk);
            let y = sys.output(&x, &uk);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { t: u.time(k) });
            }
            out.push(y.iter().copied().collect());
            x = sys.step(&x, &uk);
        }
        TimeSignal::new(u.t0, u.dt, out)
    }
}

/// Discrete-time system produced by zero-order-hold discretisation.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub dt: f64,
    pub ad: DMatrix<f64>,
    pub bd: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl DiscreteSystem {
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.ad * x + &self.bd * u
    }

    pub fn output(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.c * x + &self.d * u
    }
}

/// Controllable-canonical realisation of a proper transfer function.
pub fn tf_to_statespace(g: &RationalTf) -> Result<StateSpace> {
    g.ensure_proper()?;
    let den = g.den().coeffs();
    let n = den.len() - 1;
    let lead = den[n];
    let d = g.feedthrough();
    if n == 0 {
        return Ok(StateSpace::gain(d));
    }
    // strictly proper remainder num - d*den
    let num = g.num().coeffs();
    let rem: Vec<f64> = (0..n)
        .map(|k| num.get(k).copied().unwrap_or(0.0) - d * den[k] / lead)
        .collect();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for k in 0..n {
        a[(n - 1, k)] = -den[k] / lead;
    }
    let mut b = DMatrix::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    let c = DMatrix::from_row_slice(1, n, &rem.iter().map(|r| r / lead).collect::<Vec<_>>());
    StateSpace::new(a, b, c, DMatrix::from_element(1, 1, d))
}

/// Interconnection of SISO/MIMO blocks: block inputs `e = K y + L w`,
/// system outputs `z = S y + R w`, where `y` stacks all block outputs and `w`
/// is the external input vector.
pub struct Interconnection {
    pub blocks: Vec<StateSpace>,
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl Interconnection {
    pub fn close(&self) -> Result<StateSpace> {
        let n: usize = self.blocks.iter().map(StateSpace::n_states).sum();
        let ne: usize = self.blocks.iter().map(StateSpace::n_inputs).sum();
        let ny: usize = self.blocks.iter().map(StateSpace::n_outputs).sum();
        let nw = self.l.ncols();
        if self.k.shape() != (ne, ny)
            || self.l.nrows() != ne
            || self.s.ncols() != ny
            || self.r.ncols() != nw
        {
            return Err(Error::DimensionMismatch("interconnection matrices".into()));
        }
        let (mut ab, mut bb) = (DMatrix::zeros(n, n), DMatrix::zeros(n, ne));
        let (mut cb, mut db) = (DMatrix::zeros(ny, n), DMatrix::zeros(ny, ne));
        let (mut xo, mut eo, mut yo) = (0, 0, 0);
        for blk in &self.blocks {
            let (bn, be, by) = (blk.n_states(), blk.n_inputs(), blk.n_outputs());
            ab.view_mut((xo, xo), (bn, bn)).copy_from(&blk.a);
            bb.view_mut((xo, eo), (bn, be)).copy_from(&blk.b);
            cb.view_mut((yo, xo), (by, bn)).copy_from(&blk.c);
            db.view_mut((yo, eo), (by, be)).copy_from(&blk.d);
            xo += bn;
            eo += be;
            yo += by;
        }
        // y = (I - Db K)^-1 (Cb x + Db L w)
        let loop_m = DMatrix::identity(ny, ny) - &db * &self.k;
        let lu = loop_m.lu();
        let yx = lu
            .solve(&cb)
            .ok_or_else(|| Error::DimensionMismatch("algebraic loop is singular".into()))?;
        let yw = lu.solve(&(&db * &self.l)).unwrap();
        let a = &ab + &bb * &self.k * &yx;
        let b = &bb * &self.k * &yw + &bb * &self.l;
        let c = &self.s * &yx;
        let d = &self.s * &yw + &self.r;
        StateSpace::new(a, b, c, d)
    }
}

/// Zero-initial-condition simulation of a state-space system.
pub fn ss_simulate(ss: &StateSpace, u: &TimeSignal) -> Result<TimeSignal> {
    ss.simulate(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn integrator_realisation() {
        let ss = tf_to_statespace(&RationalTf::integrator()).unwrap();
        assert_eq!(ss.a, DMatrix::from_element(1, 1, 0.0));
        assert_eq!(ss.b, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(ss.c, DMatrix::from_element(1, 1, 1.0));
        assert_eq!(ss.d, DMatrix::from_element(1, 1, 0.0));
    }

    #[test]
    fn constant_has_no_state() {
        let ss = tf_to_statespace(&RationalTf::constant(3.5)).unwrap();
        assert_eq!(ss.n_states(), 0);
        assert_eq!(ss.d[(0, 0)], 3.5);
        assert_eq!(ss.eval(c(0.0, 1.0)).unwrap()[(0, 0)], c(3.5, 0.0));
    }

    #[test]
    fn m1_realisation_matches_tf() {
        let m1 = RationalTf::from_coeffs(&[4.0, 4.0], &[0.0, 0.0, 4.0, 1.0]).unwrap();
        let ss = tf_to_statespace(&m1).unwrap();
        assert_eq!(ss.n_states(), 3);
        for w in [0.1, 1.0, 10.0] {
            let s = c(0.0, w);
            let a = ss.eval(s).unwrap()[(0, 0)];
            let b = m1.eval(s).unwrap();
            assert!((a - b).norm() / b.norm() < 1e-9);
        }
    }

    #[test]
    fn biproper_feedthrough() {
        let g = RationalTf::from_coeffs(&[1.0, 2.0], &[3.0, 1.0]).unwrap();
        let ss = tf_to_statespace(&g).unwrap();
        assert_eq!(ss.d[(0, 0)], 2.0);
        let s = c(0.3, 2.0);
        assert!((ss.eval(s).unwrap()[(0, 0)] - g.eval(s).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn improper_rejected() {
        let g = RationalTf::from_coeffs(&[0.0, 0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            tf_to_statespace(&g),
            Err(Error::ImproperTf { .. })
        ));
    }

    #[test]
    fn integrator_step_gives_ramp() {
        let ss = tf_to_statespace(&RationalTf::integrator()).unwrap();
        let u = TimeSignal::from_fn(0.01, 101, |_| 1.0).unwrap();
        let y = ss.simulate(&u).unwrap();
        assert!((y.samples[100][0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unity_feedback_interconnection() {
        // e = w - y, y = G e  ->  G/(1+G)
        let g = RationalTf::from_coeffs(&[2.0], &[1.0, 1.0]).unwrap();
        let ic = Interconnection {
            blocks: vec![tf_to_statespace(&g).unwrap()],
            k: DMatrix::from_element(1, 1, -1.0),
            l: DMatrix::from_element(1, 1, 1.0),
            s: DMatrix::from_element(1, 1, 1.0),
            r: DMatrix::zeros(1, 1),
        };
        let cl = ic.close().unwrap();
        let s = c(0.0, 0.7);
        let want = g.feedback().eval(s).unwrap();
        assert!((cl.eval(s).unwrap()[(0, 0)] - want).norm() < 1e-12);
    }

    #[test]
    fn algebraic_loop_resolved() {
        // static gain 0.5 in unity feedback -> 1/3
        let ic = Interconnection {
            blocks: vec![StateSpace::gain(0.5)],
            k: DMatrix::from_element(1, 1, -1.0),
            l: DMatrix::from_element(1, 1, 1.0),
            s: DMatrix::from_element(1, 1, 1.0),
            r: DMatrix::zeros(1, 1),
        };
        let cl = ic.close().unwrap();
        assert!((cl.d[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
    }
}
