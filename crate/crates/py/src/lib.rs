//! Python bindings: density matrices and POVM elements, distance measures,
//! the Bloch game, circuit models, adversarial training, the convex
//! iterations and the experiment runner.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qgan_core::blochgame::{self, BlochGameConfig, BlochRule, BlochState, Vec3};
use qgan_core::circuits::{DiscriminatorModel, GeneratorModel};
use qgan_core::convexqgan::{self, UpdateVariant, VariantKind};
use qgan_core::gradients;
use qgan_core::harness::{self, ExperimentConfig, ExperimentName};
use qgan_core::optim::{self, OptimizerKind, QganGame, TrainSchedule, TurnRecord};
use qgan_core::qcore::{self, ComplexMatrix, C64};
use qgan_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for qgan_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_rows(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn from_rows(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square and non-empty"));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

#[pyclass(name = "DensityMatrix", frozen, module = "qgan")]
struct PyDensityMatrix {
    inner: qcore::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Validates a square complex matrix (nested lists) as a state.
    #[new]
    fn new(matrix: Vec<Vec<C64>>) -> PyResult<Self> {
        let inner = qcore::DensityMatrix::new(from_rows(matrix)?).py()?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_bloch(r: [f64; 3]) -> PyResult<Self> {
        Ok(Self {
            inner: qcore::DensityMatrix::from_bloch(r).py()?,
        })
    }

    #[staticmethod]
    fn maximally_mixed(n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: qcore::DensityMatrix::maximally_mixed(n_qubits).py()?,
        })
    }

    /// Single-qubit target of purity `p`.
    #[staticmethod]
    fn target(p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: qcore::target_state_purity(p).py()?,
        })
    }

    #[staticmethod]
    fn random(n_qubits: usize, rank: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: qcore::random_density_matrix(n_qubits, rank, seed).py()?,
        })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        to_rows(self.inner.mat())
    }

    fn bloch_vector(&self) -> Option<[f64; 3]> {
        self.inner.bloch_vector()
    }

    fn purity(&self) -> f64 {
        qcore::purity(&self.inner)
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: qcore::partial_trace(&self.inner, &keep).py()?,
        })
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(n_qubits={})", self.inner.n_qubits())
    }
}

#[pyclass(name = "PovmElement", frozen, module = "qgan")]
struct PyPovmElement {
    inner: qcore::PovmElement,
}

#[pymethods]
impl PyPovmElement {
    #[new]
    fn new(matrix: Vec<Vec<C64>>) -> PyResult<Self> {
        let inner = qcore::PovmElement::new(from_rows(matrix)?).py()?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_bloch(d0: f64, d: [f64; 3]) -> PyResult<Self> {
        Ok(Self {
            inner: qcore::PovmElement::from_bloch(d0, d).py()?,
        })
    }

    /// Optimal element for telling `rho_r` from `rho_g`.
    #[staticmethod]
    fn helstrom(rho_r: &PyDensityMatrix, rho_g: &PyDensityMatrix) -> PyResult<Self> {
        Ok(Self {
            inner: qcore::helstrom_measurement(&rho_r.inner, &rho_g.inner).py()?,
        })
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        to_rows(self.inner.mat())
    }

    fn spectrum(&self) -> Vec<f64> {
        self.inner.spectrum()
    }

    fn __repr__(&self) -> String {
        format!("PovmElement(n_qubits={})", self.inner.n_qubits())
    }
}

#[pyfunction]
fn trace_distance(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<f64> {
    qcore::trace_distance(&a.inner, &b.inner).py()
}

#[pyfunction]
fn fidelity(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<f64> {
    qcore::fidelity(&a.inner, &b.inner).py()
}

/// `Tr[pi (rho_r - rho_g)]`
#[pyfunction]
fn score(pi: &PyPovmElement, rho_g: &PyDensityMatrix, rho_r: &PyDensityMatrix) -> PyResult<f64> {
    qcore::score(&pi.inner, &rho_g.inner, &rho_r.inner).py()
}

#[pyfunction]
fn random_pure_state(n_qubits: usize, seed: u64) -> PyResult<Vec<C64>> {
    let s = qcore::random_pure_state(n_qubits, seed).py()?;
    Ok(s.amplitudes().iter().copied().collect())
}

#[pyclass(name = "Generator", frozen, module = "qgan")]
struct PyGenerator {
    inner: GeneratorModel,
}

#[pymethods]
impl PyGenerator {
    #[staticmethod]
    fn minimal() -> Self {
        Self {
            inner: GeneratorModel::minimal(),
        }
    }

    /// Layered circuit on `2 n` qubits, second half traced out.
    #[staticmethod]
    fn mixed(n_system: usize, layers: usize) -> PyResult<Self> {
        Ok(Self {
            inner: GeneratorModel::mixed(n_system, layers).py()?,
        })
    }

    #[staticmethod]
    fn pure(n_system: usize, layers: usize) -> PyResult<Self> {
        Ok(Self {
            inner: GeneratorModel::pure(n_system, layers).py()?,
        })
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    #[getter]
    fn n_system(&self) -> usize {
        self.inner.n_system()
    }

    fn state(&self, params: Vec<f64>) -> PyResult<PyDensityMatrix> {
        Ok(PyDensityMatrix {
            inner: self.inner.generator_state(&params).py()?,
        })
    }
}

#[pyclass(name = "Discriminator", frozen, module = "qgan")]
struct PyDiscriminator {
    inner: DiscriminatorModel,
}

#[pymethods]
impl PyDiscriminator {
    #[staticmethod]
    fn minimal() -> Self {
        Self {
            inner: DiscriminatorModel::minimal(),
        }
    }

    /// Layered circuit on the system plus one ancilla.
    #[staticmethod]
    fn layered(n_system: usize, layers: usize) -> PyResult<Self> {
        Ok(Self {
            inner: DiscriminatorModel::layered(n_system, layers).py()?,
        })
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    #[getter]
    fn n_system(&self) -> usize {
        self.inner.n_system()
    }

    fn povm(&self, params: Vec<f64>) -> PyResult<PyPovmElement> {
        Ok(PyPovmElement {
            inner: self.inner.povm(&params).py()?,
        })
    }
}

fn python_objective<'a, 'py>(
    f: &'a Bound<'py, PyAny>,
) -> impl Fn(&[f64]) -> qgan_core::Result<f64> + 'a {
    move |theta: &[f64]| {
        f.call1((theta.to_vec(),))
            .and_then(|v| v.extract::<f64>())
            .map_err(|e| Error::Argument(format!("objective failed: {e}")))
    }
}

/// Parameter-shift gradient of a Python callable `f(list[float]) -> float`.
#[pyfunction]
fn parameter_shift_gradient(f: &Bound<'_, PyAny>, theta: Vec<f64>) -> PyResult<Vec<f64>> {
    gradients::parameter_shift_gradient(&python_objective(f), &theta).py()
}

#[pyfunction]
#[pyo3(signature = (f, theta, h = 1e-5))]
fn finite_difference_gradient(f: &Bound<'_, PyAny>, theta: Vec<f64>, h: f64) -> PyResult<Vec<f64>> {
    gradients::finite_difference_gradient(&python_objective(f), &theta, h).py()
}

/// Bloch game against target `r`. `start` is a seed for a random start;
/// without it the run begins on the documented limit-cycle start. Returns
/// one dict per step.
#[pyfunction]
#[pyo3(signature = (r, turns, rule = "gda", eta = 0.1, d_steps = 5, g_steps = 1, start = None))]
#[allow(clippy::too_many_arguments)]
fn run_bloch_game<'py>(
    py: Python<'py>,
    r: [f64; 3],
    turns: usize,
    rule: &str,
    eta: f64,
    d_steps: usize,
    g_steps: usize,
    start: Option<u64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let r = vec3(r);
    let rule = match rule {
        "gda" => BlochRule::Gda,
        "omd" => BlochRule::Omd,
        other => return Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
    };
    let config = BlochGameConfig {
        eta_d: eta,
        eta_g: eta,
        d_steps_per_turn: d_steps,
        g_steps_per_turn: g_steps,
        ..BlochGameConfig::limit_cycle(r)
    };
    let initial = start.map_or_else(|| BlochState::limit_cycle_start(r), BlochState::random);
    let traj = blochgame::run_bloch_game(&config, initial, turns, rule).py()?;
    traj.records
        .iter()
        .map(|rec| {
            let d = PyDict::new(py);
            d.set_item("turn", rec.turn)?;
            d.set_item("g", [rec.g.x, rec.g.y, rec.g.z])?;
            d.set_item("d0", rec.d0)?;
            d.set_item("d", [rec.d.x, rec.d.y, rec.d.z])?;
            d.set_item("score", rec.score)?;
            d.set_item("delta", rec.delta)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn limit_cycle_predicate(distances: Vec<f64>, tol: f64) -> bool {
    blochgame::limit_cycle_predicate(&distances, tol)
}

fn turn_dicts<'py>(py: Python<'py>, rows: &[TurnRecord]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rows.iter()
        .map(|rec| {
            let d = PyDict::new(py);
            d.set_item("turn", rec.turn)?;
            d.set_item("score", rec.score)?;
            d.set_item("p_r_given_g", rec.p_r_given_g)?;
            d.set_item("trace_distance", rec.trace_distance)?;
            d.set_item("fidelity", rec.fidelity)?;
            Ok(d)
        })
        .collect()
}

/// Adversarial training from seeded random angles; one dict per turn.
#[pyfunction]
#[pyo3(signature = (generator, discriminator, target, optimizer = "gda", turns = 250, d_steps = 10, g_steps = 1, lr_d = 0.1, lr_g = 0.1, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn train_qgan<'py>(
    py: Python<'py>,
    generator: &PyGenerator,
    discriminator: &PyDiscriminator,
    target: &PyDensityMatrix,
    optimizer: &str,
    turns: usize,
    d_steps: usize,
    g_steps: usize,
    lr_d: f64,
    lr_g: f64,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kind: OptimizerKind = optimizer.parse().py()?;
    let game = QganGame::new(
        generator.inner.clone(),
        discriminator.inner.clone(),
        target.inner.clone(),
    )
    .py()?;
    let schedule = TrainSchedule::new(turns, d_steps, g_steps, lr_d, lr_g).py()?;
    let traj = py
        .detach(|| optim::train_qgan(&game, &schedule, kind, seed))
        .py()?;
    turn_dicts(py, &traj.records)
}

/// One of `frank_wolfe`, `helstrom_imaginary`, `helstrom_circuit` with its
/// default step law; one dict per iteration.
#[pyfunction]
fn run_convex_qgan<'py>(
    py: Python<'py>,
    target: &PyDensityMatrix,
    variant: &str,
    iterations: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kind: VariantKind = variant.parse().py()?;
    let v = UpdateVariant::default_for(kind);
    let rho = target.inner.clone();
    let traj = py
        .detach(|| convexqgan::run_convex_qgan(&rho, &v, iterations, seed))
        .py()?;
    turn_dicts(py, &traj.records)
}

/// Defaults of a named experiment as TOML.
#[pyfunction]
fn experiment_config(name: &str) -> PyResult<String> {
    let exp: ExperimentName = name.parse().py()?;
    Ok(ExperimentConfig::defaults_for(exp).canonical())
}

/// Runs an experiment described by TOML text. Returns a dict with the
/// per-turn `csv`, the `summary` CSV and the `config_hash`.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::from_toml_str(config).py()?;
    let records = py.detach(|| harness::run_experiment(&cfg)).py()?;
    let out = PyDict::new(py);
    out.set_item("csv", harness::csv_string(&records).py()?)?;
    out.set_item(
        "summary",
        harness::summary_csv(&harness::summarize(cfg.experiment, &records)),
    )?;
    out.set_item("config_hash", cfg.hash())?;
    Ok(out)
}

#[pymodule]
fn qgan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", qgan_core::VERSION)?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyPovmElement>()?;
    m.add_class::<PyGenerator>()?;
    m.add_class::<PyDiscriminator>()?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(random_pure_state, m)?)?;
    m.add_function(wrap_pyfunction!(parameter_shift_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(finite_difference_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(run_bloch_game, m)?)?;
    m.add_function(wrap_pyfunction!(limit_cycle_predicate, m)?)?;
    m.add_function(wrap_pyfunction!(train_qgan, m)?)?;
    m.add_function(wrap_pyfunction!(run_convex_qgan, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
