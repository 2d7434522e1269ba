//! Python bindings: codes, exRecs, malignancy analysis and threshold bounds.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bsft::circuits::{
    build_exrec, text, AncillaPolicy, CheckOrder, Criterion, EcMethod, ExRecOptions, GaugeEcConfig,
};
use bsft::code::{decode, decoded_logical_effect, syndrome_of};
use bsft::malignancy::RunOptions;
use bsft::threshold::{compute_threshold_with, mc_threshold_with, Tail, ThresholdResult};
use bsft::PauliOp;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(err)
}

/// The `[[n², 1, n]]` Bacon-Shor code.
#[pyclass(name = "BaconShorCode", module = "bsft_py", frozen)]
struct PyCode(bsft::BaconShorCode);

#[pymethods]
impl PyCode {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        bsft::build_code(n).map(PyCode).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    /// `(physical qubits, logical qubits, distance)`.
    fn parameters(&self) -> (usize, usize, usize) {
        self.0.parameters()
    }

    fn stabilizers(&self) -> Vec<String> {
        self.0
            .stabilizer_gens()
            .iter()
            .map(|p| p.to_string())
            .collect()
    }

    fn gauges(&self) -> Vec<String> {
        self.0.gauge_gens().iter().map(|p| p.to_string()).collect()
    }

    fn logical_x(&self) -> String {
        self.0.logical_x().to_string()
    }

    fn logical_z(&self) -> String {
        self.0.logical_z().to_string()
    }

    /// X-check and Z-check flips of a Pauli error.
    fn syndrome(&self, error: &str) -> PyResult<(Vec<bool>, Vec<bool>)> {
        let e = self.pauli(error)?;
        let s = syndrome_of(&self.0, &e).map_err(err)?;
        let bools = |b: &bsft::BitVec| (0..b.len()).map(|i| b.get(i)).collect();
        Ok((bools(&s.x_checks), bools(&s.z_checks)))
    }

    /// Correction chosen by the decoder for `error`.
    fn correction(&self, error: &str) -> PyResult<String> {
        let e = self.pauli(error)?;
        let s = syndrome_of(&self.0, &e).map_err(err)?;
        Ok(decode(&self.0, &s).map_err(err)?.to_string())
    }

    /// Logical effect left after decoding `error`: "I", "X", "Y" or "Z".
    fn decoded_effect(&self, error: &str) -> PyResult<String> {
        let e = self.pauli(error)?;
        Ok(decoded_logical_effect(&self.0, &e)
            .map_err(err)?
            .to_string())
    }

    fn __repr__(&self) -> String {
        let (q, k, d) = self.0.parameters();
        format!("BaconShorCode([[{q},{k},{d}]])")
    }
}

impl PyCode {
    fn pauli(&self, s: &str) -> PyResult<PauliOp> {
        let nq = self.0.num_qubits();
        if s.chars().any(|c| c.is_ascii_digit()) {
            return PauliOp::parse_sparse(nq, s).map_err(err);
        }
        let p: PauliOp = parse(s)?;
        if p.num_qubits() != nq {
            return Err(err(format!(
                "dense operator has {} qubits, code has {nq}",
                p.num_qubits()
            )));
        }
        Ok(p)
    }
}

/// A CNOT exRec with its fault-location count.
#[pyclass(name = "ExRec", module = "bsft_py", frozen)]
struct PyExRec(bsft::circuits::ExRec);

#[pymethods]
impl PyExRec {
    #[new]
    #[pyo3(signature = (n, ec, criterion = "rectangle", policy = "per-check", check_order = "x-first", rounds = None, agree = None))]
    fn new(
        n: usize,
        ec: &str,
        criterion: &str,
        policy: &str,
        check_order: &str,
        rounds: Option<usize>,
        agree: Option<usize>,
    ) -> PyResult<Self> {
        let opts = ExRecOptions {
            gauge: GaugeEcConfig {
                policy: parse::<AncillaPolicy>(policy)?,
                order: parse::<CheckOrder>(check_order)?,
                rounds,
                agree,
            },
            criterion: parse::<Criterion>(criterion)?,
        };
        let code = bsft::build_code(n).map_err(err)?;
        build_exrec(&code, parse::<EcMethod>(ec)?, &opts)
            .map(PyExRec)
            .map_err(err)
    }

    #[getter]
    fn descriptor(&self) -> String {
        self.0.descriptor()
    }

    #[getter]
    fn locations(&self) -> usize {
        self.0.circuit().num_locations()
    }

    /// Circuit in the text format.
    fn to_text(&self) -> String {
        text::dump(self.0.circuit())
    }

    fn __repr__(&self) -> String {
        format!(
            "ExRec({}, {} locations)",
            self.0.descriptor(),
            self.locations()
        )
    }
}

/// Malignancy estimate at one fault order.
#[pyclass(name = "MalignancyReport", module = "bsft_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyReport(bsft::malignancy::MalignancyReport);

#[pymethods]
impl PyReport {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        bsft::malignancy::MalignancyReport::from_json(s)
            .map(PyReport)
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn exrec(&self) -> String {
        self.0.exrec.clone()
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order
    }

    #[getter]
    fn locations(&self) -> usize {
        self.0.locations
    }

    #[getter]
    fn is_exact(&self) -> bool {
        self.0.is_exact()
    }

    #[getter]
    fn fraction(&self) -> f64 {
        self.0.fraction()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    /// Malignant set count, exact or estimated.
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    fn merge(&self, other: &PyReport) -> PyResult<PyReport> {
        self.0.merge(&other.0).map(PyReport).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MalignancyReport({}, k={}, alpha={:.6e})",
            self.0.exrec,
            self.0.order,
            self.0.alpha()
        )
    }
}

/// Compiled exRec for malignancy queries.
#[pyclass(name = "Analyzer", module = "bsft_py", frozen)]
struct PyAnalyzer(bsft::malignancy::Analyzer);

fn run_options(jobs: usize, checkpoint: Option<String>) -> RunOptions {
    RunOptions {
        jobs,
        checkpoint: checkpoint.map(Into::into),
        ..RunOptions::default()
    }
}

#[pymethods]
impl PyAnalyzer {
    #[new]
    fn new(exrec: &PyExRec) -> PyResult<Self> {
        bsft::malignancy::Analyzer::new(&exrec.0)
            .map(PyAnalyzer)
            .map_err(err)
    }

    #[getter]
    fn locations(&self) -> usize {
        self.0.num_locations()
    }

    fn is_malignant(&self, locations: Vec<usize>) -> PyResult<bool> {
        self.0.is_malignant(&locations).map_err(err)
    }

    /// A fault assignment on `locations` that breaks the exRec, if any.
    fn witness(&self, locations: Vec<usize>) -> PyResult<Option<String>> {
        Ok(self
            .0
            .witness(&locations)
            .map_err(err)?
            .map(|w| w.to_string()))
    }

    #[pyo3(signature = (k, jobs = 0, checkpoint = None))]
    fn enumerate_exact(
        &self,
        py: Python<'_>,
        k: usize,
        jobs: usize,
        checkpoint: Option<String>,
    ) -> PyResult<PyReport> {
        let opts = run_options(jobs, checkpoint);
        py.detach(|| self.0.enumerate_exact(k, &opts))
            .map(PyReport)
            .map_err(err)
    }

    #[pyo3(signature = (k, samples, seed = 1, jobs = 0, checkpoint = None))]
    fn sample_mc(
        &self,
        py: Python<'_>,
        k: usize,
        samples: u64,
        seed: u64,
        jobs: usize,
        checkpoint: Option<String>,
    ) -> PyResult<PyReport> {
        let opts = run_options(jobs, checkpoint);
        py.detach(|| self.0.sample_mc(k, samples, seed, &opts))
            .map(PyReport)
            .map_err(err)
    }
}

/// Threshold bound with its certificate.
#[pyclass(name = "ThresholdResult", module = "bsft_py", frozen)]
struct PyThreshold(ThresholdResult);

#[pymethods]
impl PyThreshold {
    #[getter]
    fn epsilon_0(&self) -> f64 {
        self.0.epsilon_0
    }

    #[getter]
    fn one_sigma_interval(&self) -> Option<(f64, f64)> {
        self.0.one_sigma_interval.map(|[a, b]| (a, b))
    }

    #[getter]
    fn certified(&self) -> bool {
        self.0.certificate.holds()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn __repr__(&self) -> String {
        format!("ThresholdResult(epsilon_0={:.6e})", self.0.epsilon_0)
    }
}

/// Solves for ε₀; sampled reports give a one-sigma interval as well.
#[pyfunction]
#[pyo3(signature = (reports, t, tail = "binomial"))]
fn threshold(reports: Vec<PyReport>, t: usize, tail: &str) -> PyResult<PyThreshold> {
    let tail: Tail = parse(tail)?;
    let reports: Vec<_> = reports.into_iter().map(|r| r.0).collect();
    let l = reports.first().ok_or_else(|| err("no reports"))?.locations;
    let res = if reports.iter().all(|r| r.is_exact()) {
        compute_threshold_with(&reports, l, t, tail)
    } else {
        mc_threshold_with(&reports, l, t, tail)
    };
    res.map(PyThreshold).map_err(err)
}

#[pymodule]
fn bsft_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCode>()?;
    m.add_class::<PyExRec>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyAnalyzer>()?;
    m.add_class::<PyThreshold>()?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
