//! Python bindings. Reports, lotteries and game solutions cross the
//! boundary as plain dicts decoded from their JSON form.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use stable_committee::generators::{self, ModelKind, RandomParams};
use stable_committee::lottery::{self, FractionalVector, MwuParams};
use stable_committee::rounding::{self, MwuProvider, RoundingParams};
use stable_committee::{small_k, stability, Committee, EnumerationBound, Lottery};

create_exception!(stable_committee_py, StabilityError, PyException);

fn err(e: stable_committee::Error) -> PyErr {
    StabilityError::new_err(e.to_string())
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| StabilityError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn bound(l: Option<usize>) -> EnumerationBound {
    l.map_or(EnumerationBound::AllCommittees, EnumerationBound::UpToSize)
}

fn committee(members: Vec<u32>) -> Committee {
    Committee::new(members)
}

/// An election: candidates with weights, voters with preferences, budget K.
#[pyclass(frozen, module = "stable_committee_py")]
struct Instance {
    inner: stable_committee::Instance,
}

#[pymethods]
impl Instance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Instance { inner: stable_committee::Instance::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter(K)]
    fn k(&self) -> f64 {
        self.inner.k()
    }

    fn with_k(&self, k: f64) -> PyResult<Self> {
        Ok(Instance { inner: self.inner.with_k(k).map_err(err)? })
    }

    fn weight(&self, members: Vec<u32>) -> PyResult<f64> {
        stable_committee::committee_weight(&self.inner, &committee(members)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(m={}, n={}, K={}, preference={})",
            self.inner.m(),
            self.inner.n(),
            self.inner.k(),
            self.inner.preference().kind()
        )
    }
}

#[pyfunction]
fn gen_cyclic(m: usize, eps: f64) -> PyResult<Instance> {
    Ok(Instance { inner: generators::gen_cyclic(m, eps).map_err(err)? })
}

#[pyfunction]
fn gen_ranking_grid(r: usize, ell: usize) -> PyResult<Instance> {
    Ok(Instance { inner: generators::gen_ranking_grid(r, ell).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (kind, m, n, k, density = 0.5, seed = 0))]
fn gen_random(kind: &str, m: usize, n: usize, k: f64, density: f64, seed: u64) -> PyResult<Instance> {
    let kind: ModelKind = kind.parse().map_err(err)?;
    Ok(Instance {
        inner: generators::gen_random(kind, m, n, k, RandomParams { density }, seed).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (inst, s, s_a, voters = None))]
fn pairwise_score(inst: &Instance, s: Vec<u32>, s_a: Vec<u32>, voters: Option<Vec<usize>>) -> PyResult<usize> {
    let voters = voters.unwrap_or_else(|| inst.inner.all_voters());
    stability::pairwise_score(&inst.inner, &voters, &committee(s), &committee(s_a)).map_err(err)
}

#[pyfunction]
fn blocking_ratio(inst: &Instance, s: Vec<u32>, s_a: Vec<u32>) -> PyResult<f64> {
    stability::blocking_ratio(&inst.inner, &committee(s), &committee(s_a)).map_err(err)
}

/// `L = None` checks every committee.
#[pyfunction]
#[pyo3(signature = (inst, members, c, L = None))]
#[allow(non_snake_case)]
fn verify_committee<'py>(
    py: Python<'py>,
    inst: &Instance,
    members: Vec<u32>,
    c: f64,
    L: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let report = stability::verify_committee(&inst.inner, &committee(members), c, bound(L)).map_err(err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (inst, lottery_json, c, L = None))]
#[allow(non_snake_case)]
fn verify_lottery<'py>(
    py: Python<'py>,
    inst: &Instance,
    lottery_json: &str,
    c: f64,
    L: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let lottery = Lottery::from_json(lottery_json).map_err(err)?;
    let report = stability::verify_lottery(&inst.inner, &lottery, c, bound(L)).map_err(err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (inst, L = None))]
#[allow(non_snake_case)]
fn min_deterministic_c(inst: &Instance, L: Option<usize>) -> PyResult<(f64, Vec<u32>)> {
    let (c, s) = stability::min_deterministic_c(&inst.inner, bound(L)).map_err(err)?;
    Ok((c, s.members().to_vec()))
}

#[pyfunction]
#[pyo3(signature = (values, weights, cap, seed = 0))]
fn dependent_round(values: Vec<f64>, weights: Vec<f64>, cap: f64, seed: u64) -> PyResult<Vec<f64>> {
    let p = FractionalVector::new(values, weights, cap).map_err(err)?;
    Ok(lottery::dependent_round(&p, &mut ChaCha8Rng::seed_from_u64(seed)))
}

#[pyfunction]
#[pyo3(signature = (inst, L = 1, eps = 0.1, seed = 0))]
#[allow(non_snake_case)]
fn mwu_lottery<'py>(py: Python<'py>, inst: &Instance, L: usize, eps: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let out = lottery::mwu_lottery(&inst.inner, &inst.inner.all_voters(), inst.inner.k(), &MwuParams::new(L, eps, seed))
        .map_err(err)?;
    to_dict(py, &out)
}

#[pyfunction]
#[pyo3(signature = (inst, c, L = None))]
#[allow(non_snake_case)]
fn exact_game<'py>(py: Python<'py>, inst: &Instance, c: f64, L: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let sol = lottery::exact_game(&inst.inner, inst.inner.k(), c, EnumerationBound::AllCommittees, bound(L))
        .map_err(err)?;
    to_dict(py, &sol)
}

#[pyfunction]
fn verify_exact_small_k<'py>(py: Python<'py>, inst: &Instance) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &small_k::verify_exact_small_k(&inst.inner).map_err(err)?)
}

/// Returns the rounded committee and the per-round trace.
#[pyfunction]
#[pyo3(signature = (inst, alpha = 0.5, beta = 0.25, eps = 0.1, seed = 0, L = 1))]
#[allow(non_snake_case)]
fn iterated_rounding<'py>(
    py: Python<'py>,
    inst: &Instance,
    alpha: f64,
    beta: f64,
    eps: f64,
    seed: u64,
    L: usize,
) -> PyResult<(Vec<u32>, Bound<'py, PyAny>)> {
    let params = RoundingParams { alpha, beta, epsilon: eps, seed };
    let mut provider = MwuProvider::new(MwuParams::new(L, eps, seed));
    let (t, trace) = rounding::iterated_rounding(&inst.inner, &params, &mut provider).map_err(err)?;
    Ok((t.members().to_vec(), to_dict(py, &trace)?))
}

#[pymodule]
fn stable_committee_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("StabilityError", m.py().get_type::<StabilityError>())?;
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(gen_cyclic, m)?)?;
    m.add_function(wrap_pyfunction!(gen_ranking_grid, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_score, m)?)?;
    m.add_function(wrap_pyfunction!(blocking_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(verify_committee, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lottery, m)?)?;
    m.add_function(wrap_pyfunction!(min_deterministic_c, m)?)?;
    m.add_function(wrap_pyfunction!(dependent_round, m)?)?;
    m.add_function(wrap_pyfunction!(mwu_lottery, m)?)?;
    m.add_function(wrap_pyfunction!(exact_game, m)?)?;
    m.add_function(wrap_pyfunction!(verify_exact_small_k, m)?)?;
    m.add_function(wrap_pyfunction!(iterated_rounding, m)?)?;
    Ok(())
}
