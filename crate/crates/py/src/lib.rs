//! Python bindings: transfer functions, wave transfer functions, boundary
//! gains, chains and scenarios.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pathwave::absorber::synthesize;
use pathwave::boundary::{soft_btfs, soft_dc_gains};
use pathwave::chain::{
    chain_response_at, local_plateau_estimate, simulate, wave_decompose, Absorber, AgentSpec,
    ChainSpec, HardSign, Reference, SimOptions,
};
use pathwave::lti::{FreqGrid, RationalTf};
use pathwave::scenario::{parse_config, preset_text, report_text, run_scenario, RunMode};
use pathwave::wave::{check_wtf_stability, WaveTf};
use pathwave::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Divergence { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Rational transfer function with coefficients in ascending powers of `s`.
#[pyclass(name = "RationalTf", module = "pathwave_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyRationalTf {
    inner: RationalTf,
}

#[pymethods]
impl PyRationalTf {
    #[new]
    fn new(num: Vec<f64>, den: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: RationalTf::from_coeffs(&num, &den).map_err(py_err)?,
        })
    }

    fn __call__(&self, s: Complex64) -> PyResult<Complex64> {
        self.inner.eval(s).map_err(py_err)
    }

    #[getter]
    fn num(&self) -> Vec<f64> {
        self.inner.num().clone().into()
    }

    #[getter]
    fn den(&self) -> Vec<f64> {
        self.inner.den().clone().into()
    }

    fn count_integrators(&self) -> usize {
        self.inner.count_integrators()
    }

    /// `lim s^nu M(s)` for `nu` integrators.
    fn integrator_gain(&self) -> f64 {
        self.inner.integrator_gain()
    }

    /// Wave transfer function `G(s)` of this open loop.
    fn wtf(&self, s: Complex64) -> Complex64 {
        WaveTf::new(self.inner.clone()).eval(s)
    }

    /// Stability verdict of the wave transfer function on a log grid.
    #[pyo3(signature = (omega_min = 1e-3, omega_max = 1e3, points = 1024))]
    fn wtf_stable(&self, omega_min: f64, omega_max: f64, points: usize) -> PyResult<bool> {
        let grid = FreqGrid::log_spaced(omega_min, omega_max, points).map_err(py_err)?;
        Ok(check_wtf_stability(&self.inner, &grid).verdict)
    }

    fn __repr__(&self) -> String {
        format!("RationalTf({})", self.inner)
    }
}

/// Soft-boundary DC gains `(kaa, kab, kba, kbb)` for `M_r` left of the
/// boundary and `M_f` right of it.
#[pyfunction]
fn soft_dc(mr: &PyRationalTf, mf: &PyRationalTf) -> PyResult<(f64, f64, f64, f64)> {
    let r = soft_dc_gains(&mr.inner, &mf.inner).map_err(py_err)?;
    Ok((r.kaa, r.kab, r.kba, r.kbb))
}

/// Soft-boundary responses `(aa, ab, ba, bb)` at the given frequencies.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn soft_boundary_response(
    mr: &PyRationalTf,
    mf: &PyRationalTf,
    omegas: Vec<f64>,
) -> PyResult<(
    Vec<Complex64>,
    Vec<Complex64>,
    Vec<Complex64>,
    Vec<Complex64>,
)> {
    let grid = FreqGrid::new(omegas).map_err(py_err)?;
    let set = soft_btfs(
        &WaveTf::new(mr.inner.clone()),
        &WaveTf::new(mf.inner.clone()),
        &grid,
    )
    .map_err(py_err)?;
    Ok((set.aa, set.ab, set.ba, set.bb))
}

/// Chain of agents with absorber placements.
#[pyclass(name = "Chain", module = "pathwave_py", frozen)]
struct PyChain {
    inner: ChainSpec,
}

/// Time traces of a run, one list per agent.
#[pyclass(name = "Simulation", module = "pathwave_py", frozen, get_all)]
struct PySimulation {
    t: Vec<f64>,
    x: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    trusted_len: usize,
}

#[pymethods]
impl PyChain {
    /// `segments` is a list of `(count, model)` pairs of symmetric agents;
    /// `absorbers` uses the `leader`, `rear`, `soft:S`, `hard:E` forms.
    #[new]
    #[pyo3(signature = (segments, absorbers = Vec::new(), step = 1.0))]
    fn new(
        segments: Vec<(usize, PyRationalTf)>,
        absorbers: Vec<String>,
        step: f64,
    ) -> PyResult<Self> {
        let mut agents = Vec::new();
        for (count, m) in segments {
            agents.extend(std::iter::repeat_n(AgentSpec::symmetric(m.inner), count));
        }
        let mut abs = Vec::new();
        for a in &absorbers {
            abs.extend(Absorber::parse_list(a).map_err(py_err)?);
        }
        let chain = ChainSpec::new(agents, abs).map_err(py_err)?;
        Ok(Self {
            inner: chain.with_reference(Reference::Step { amplitude: step }),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(kind, index)` of every detected boundary.
    fn boundaries(&self) -> Vec<(String, usize)> {
        self.inner
            .boundaries()
            .iter()
            .map(|b| (format!("{:?}", b.kind).to_lowercase(), b.index))
            .collect()
    }

    /// `X_i/X_ref` for every agent at each frequency.
    fn response(&self, omegas: Vec<f64>) -> PyResult<Vec<Vec<Complex64>>> {
        let laws = synthesize(&self.inner).map_err(py_err)?;
        omegas
            .iter()
            .map(|&w| {
                chain_response_at(
                    &self.inner,
                    &laws,
                    Complex64::new(0.0, w),
                    HardSign::Consistent,
                )
            })
            .collect::<Result<_, _>>()
            .map_err(py_err)
    }

    fn plateau_estimate(&self, agent: usize) -> PyResult<f64> {
        local_plateau_estimate(&self.inner, agent).map_err(py_err)
    }

    /// Step response with absorbers realised as FIR kernels, decomposed
    /// into travelling waves.
    #[pyo3(signature = (t_final, dt = 0.01))]
    fn simulate(&self, py: Python<'_>, t_final: f64, dt: f64) -> PyResult<PySimulation> {
        let chain = self.inner.clone();
        let (sim, dec) = py
            .detach(move || {
                let sim = simulate(&chain, &SimOptions::new(t_final, dt))?;
                let dec = wave_decompose(&chain, &sim)?;
                Ok::<_, Error>((sim, dec))
            })
            .map_err(py_err)?;
        Ok(PySimulation {
            t: sim.t,
            x: sim.x,
            u: sim.u,
            a: dec.agents.iter().map(|w| w.a.clone()).collect(),
            b: dec.agents.iter().map(|w| w.b.clone()).collect(),
            residuals: dec.agents.iter().map(|w| w.residual).collect(),
            trusted_len: dec.trusted_len,
        })
    }
}

/// Source text of a built-in scenario.
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    preset_text(name).map_err(py_err)
}

/// Runs a scenario given as TOML text and returns `(run, report_toml)` pairs.
#[pyfunction]
#[pyo3(signature = (text, analyze_only = false))]
fn run_config(py: Python<'_>, text: &str, analyze_only: bool) -> PyResult<Vec<(String, String)>> {
    let cfg = parse_config(text).map_err(py_err)?;
    let mode = if analyze_only {
        RunMode::AnalyzeOnly
    } else {
        RunMode::Full
    };
    let out = py.detach(|| run_scenario(&cfg, mode)).map_err(py_err)?;
    out.runs
        .iter()
        .map(|r| {
            Ok((
                r.report.run.clone(),
                report_text(&r.report).map_err(py_err)?,
            ))
        })
        .collect()
}

#[pymodule]
fn pathwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRationalTf>()?;
    m.add_class::<PyChain>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(soft_dc, m)?)?;
    m.add_function(wrap_pyfunction!(soft_boundary_response, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
