//! Python bindings for `glab`.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use glab::davie_reeds as dr;
use glab::discretized;
use glab::game;
use glab::search;
use glab::strip;

fn py_err(e: glab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "SignFunction1D", module = "glab", frozen, from_py_object)]
#[derive(Clone)]
struct PySignFunction(strip::SignFunction1D);

#[pymethods]
impl PySignFunction {
    #[new]
    fn new(leading_sign: i8, breakpoints: Vec<f64>) -> PyResult<Self> {
        strip::SignFunction1D::new(leading_sign, breakpoints).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn sign() -> Self {
        Self(strip::SignFunction1D::sign())
    }

    #[getter]
    fn leading_sign(&self) -> i8 {
        self.0.leading_sign()
    }

    #[getter]
    fn breakpoints(&self) -> Vec<f64> {
        use strip::Piecewise;
        self.0.breakpoints().to_vec()
    }

    fn __call__(&self, x: f64) -> f64 {
        use strip::Piecewise;
        self.0.value_at(x)
    }

    fn negate(&self) -> Self {
        Self(self.0.negate())
    }

    fn reflect(&self) -> Self {
        Self(self.0.reflect())
    }

    fn moment(&self, k: usize) -> PyResult<f64> {
        strip::moment(&self.0, k).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        use strip::Piecewise;
        format!("SignFunction1D({}, {:?})", self.0.leading_sign(), self.0.breakpoints())
    }
}

#[pyclass(name = "Game", module = "glab", frozen, from_py_object)]
#[derive(Clone)]
struct PyGame(game::GameCoefficients);

#[pymethods]
impl PyGame {
    #[new]
    #[pyo3(signature = (explicit, identity_weight = 0.0))]
    fn new(explicit: BTreeMap<usize, f64>, identity_weight: f64) -> PyResult<Self> {
        game::GameCoefficients::new(explicit, identity_weight).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn davie_reeds() -> Self {
        Self(game::dr_game())
    }

    #[staticmethod]
    fn perturbed(eps: f64) -> PyResult<Self> {
        game::perturbed_game(eps).map(Self).map_err(py_err)
    }

    fn coefficient(&self, k: usize) -> f64 {
        self.0.coefficient(k)
    }

    #[getter]
    fn identity_weight(&self) -> f64 {
        self.0.identity_weight()
    }

    #[getter]
    fn explicit(&self) -> BTreeMap<usize, f64> {
        self.0.explicit().clone()
    }

    /// `(value, degree)` of the vector-valued optimum.
    fn sdp_value(&self) -> (f64, usize) {
        let s = game::sdp_value(&self.0);
        (s.value, s.degree)
    }

    #[pyo3(signature = (f, g, degree_cap = 40))]
    fn val_1d(&self, f: &PySignFunction, g: &PySignFunction, degree_cap: usize) -> PyResult<f64> {
        game::val_1d(&self.0, &f.0, &g.0, degree_cap).map_err(py_err)
    }
}

/// `{name: value}` for C*, λ*, C₊, the game value and K_DR.
#[pyfunction]
fn constants() -> BTreeMap<&'static str, f64> {
    let k = dr::constants();
    BTreeMap::from([
        ("c_star", k.c_star),
        ("lambda_star", k.lambda_star),
        ("c_plus", k.c_plus),
        ("val_dr", k.val_dr),
        ("k_dr", k.k_dr),
    ])
}

#[pyfunction]
fn phi(x: f64) -> f64 {
    glab::special::phi(x)
}

#[pyfunction(name = "Phi")]
#[allow(non_snake_case)]
fn big_phi(x: f64) -> f64 {
    glab::special::Phi(x)
}

#[pyfunction]
fn hermite(k: usize, x: f64) -> PyResult<f64> {
    glab::special::hermite_he(k, x).map_err(py_err)
}

#[pyfunction]
fn pi3_gap(f: &PySignFunction, g: &PySignFunction) -> PyResult<f64> {
    strip::pi3_gap(&f.0, &g.0, dr::constants().c_star).map_err(py_err)
}

/// Strip pair built from a step function given by its breakpoints and cell
/// values in {-1, 0, 1}; it must vanish outside `[-c, c]`.
#[pyfunction]
#[pyo3(signature = (breakpoints, values, c = None))]
fn build_strip_pair(breakpoints: Vec<f64>, values: Vec<f64>, c: Option<f64>) -> PyResult<(PySignFunction, PySignFunction)> {
    let c = c.unwrap_or(dr::constants().c_star);
    let h = strip::StepFunction1D::from_cells(&breakpoints, &values).map_err(py_err)?;
    let (f, g) = strip::build_strip_pair(&h, c).map_err(py_err)?;
    Ok((PySignFunction(f), PySignFunction(g)))
}

/// Breakpoint `b` balancing the pattern `-c, -b, 0, b, c` with inner sign `s`.
#[pyfunction]
#[pyo3(signature = (s = -1.0, c = None))]
fn solve_symmetric_breakpoint(s: f64, c: Option<f64>) -> PyResult<f64> {
    let c = c.unwrap_or(dr::constants().c_star);
    let p = strip::BalancedPattern::symmetric_three_flip(c, s).map_err(py_err)?;
    strip::solve_balanced_breakpoint(&p).map_err(py_err)
}

#[pyfunction]
fn bound_chain(eps: f64) -> PyResult<BTreeMap<&'static str, f64>> {
    let r = game::bound_chain(eps).map_err(py_err)?;
    Ok(BTreeMap::from([
        ("epsilon", r.epsilon),
        ("val_dr", r.val_dr),
        ("gap_term", r.gap_term),
        ("val_eps_upper", r.val_eps_upper),
        ("kg_lower", r.kg_lower),
        ("improvement", r.improvement),
    ]))
}

/// Returns `(best_val, best_f, best_g)`.
#[pyfunction]
#[pyo3(signature = (game, restarts = 40, seed = 1, max_breakpoints = 6))]
fn optimize(py: Python<'_>, game: &PyGame, restarts: usize, seed: u64, max_breakpoints: usize) -> PyResult<(f64, PySignFunction, PySignFunction)> {
    let cfg = search::SearchConfig { max_breakpoints_per_function: max_breakpoints, restarts, seed, ..Default::default() };
    let g = game.0.clone();
    let r = py.detach(move || search::optimize(&g, &cfg)).map_err(py_err)?;
    Ok((r.best_val, PySignFunction(r.best_f), PySignFunction(r.best_g)))
}

#[pyfunction]
#[pyo3(signature = (n, k, game, samples = 100_000, seed = 1))]
fn witness_mc(py: Python<'_>, n: usize, k: usize, game: &PyGame, samples: usize, seed: u64) -> PyResult<BTreeMap<&'static str, f64>> {
    let g = game.0.clone();
    let w = py.detach(move || discretized::witness_mc(n, k, &g, samples, seed)).map_err(py_err)?;
    Ok(BTreeMap::from([
        ("coefficient", w.coefficient),
        ("value_mean", w.value_mean),
        ("value_stderr", w.value_stderr),
        ("feasible_mean", w.feasible_mean),
        ("feasible_stderr", w.feasible_stderr),
        ("norm_variance", w.norm_variance),
    ]))
}

/// Rows `(C, F, F')` on a uniform grid.
#[pyfunction]
fn landscape(c_min: f64, c_max: f64, steps: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    let rows = dr::landscape(c_min, c_max, steps).map_err(py_err)?;
    Ok(rows.into_iter().map(|r| (r.c, r.f, r.f_prime)).collect())
}

#[pymodule]
#[pyo3(name = "glab")]
fn glab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignFunction>()?;
    m.add_class::<PyGame>()?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(big_phi, m)?)?;
    m.add_function(wrap_pyfunction!(hermite, m)?)?;
    m.add_function(wrap_pyfunction!(pi3_gap, m)?)?;
    m.add_function(wrap_pyfunction!(build_strip_pair, m)?)?;
    m.add_function(wrap_pyfunction!(solve_symmetric_breakpoint, m)?)?;
    m.add_function(wrap_pyfunction!(bound_chain, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(witness_mc, m)?)?;
    m.add_function(wrap_pyfunction!(landscape, m)?)?;
    Ok(())
}
