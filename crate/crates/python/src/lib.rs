//! Python bindings. Tensors live over a prime field `F_p` (default
//! `p = 2^31 - 1`); elements cross the boundary as integers in `[0, p)`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qmfcut_core::counting::necklace_count as core_necklace_count;
use qmfcut_core::line_kernel::{self, BitString, KernelVerifier};
use qmfcut_core::mps::{contract_cycle, SiteTensor, StateTensor};
use qmfcut_core::qflow::{imm_tensor, line_tensor, trial_rng};
use qmfcut_core::report::{self, Command, PartitionSpec, RunConfig};
use qmfcut_core::scalars::MERSENNE_31;
use qmfcut_core::{symmetry, Error, Field, PrimeField, ScalarRing};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field(p: u64) -> PyResult<PrimeField> {
    PrimeField::new(p).map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn partition_spec(s: &str) -> PyResult<PartitionSpec> {
    s.parse().map_err(err)
}

#[pyclass(name = "SiteTensor", module = "qmfcut")]
struct PySiteTensor {
    inner: SiteTensor<PrimeField>,
}

#[pymethods]
impl PySiteTensor {
    /// `slices[i][s][t]` is entry `(s, t)` of the `i`-th `n × n` slice.
    #[new]
    #[pyo3(signature = (slices, p = MERSENNE_31))]
    fn new(slices: Vec<Vec<Vec<i64>>>, p: u64) -> PyResult<Self> {
        let f = field(p)?;
        let big_n = slices.len();
        let n = slices.first().map_or(0, Vec::len);
        let mats = slices
            .iter()
            .map(|m| m.iter().flatten().map(|&v| f.from_i64(v)).collect())
            .collect();
        Ok(Self {
            inner: SiteTensor::new(f, big_n, n, mats).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (physical_dim, bond_dim, seed = 0, p = MERSENNE_31))]
    fn random(physical_dim: usize, bond_dim: usize, seed: u64, p: u64) -> PyResult<Self> {
        let mut rng = trial_rng(seed, 0);
        Ok(Self {
            inner: SiteTensor::random(field(p)?, physical_dim, bond_dim, &mut rng).map_err(err)?,
        })
    }

    /// Site tensor whose cycle contraction is iterated `k × k` matrix
    /// multiplication (up to the factor `k`).
    #[staticmethod]
    #[pyo3(signature = (k, p = MERSENNE_31))]
    fn imm(k: usize, p: u64) -> PyResult<Self> {
        Ok(Self {
            inner: imm_tensor(&field(p)?, k).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (mu, nu, p = MERSENNE_31))]
    fn line(mu: i64, nu: i64, p: u64) -> PyResult<Self> {
        let f = field(p)?;
        Ok(Self {
            inner: line_tensor(&f, &f.from_i64(mu), &f.from_i64(nu)).map_err(err)?,
        })
    }

    #[getter]
    fn physical_dim(&self) -> usize {
        self.inner.physical_dim()
    }

    #[getter]
    fn bond_dim(&self) -> usize {
        self.inner.bond_dim()
    }

    #[getter]
    fn modulus(&self) -> u64 {
        self.inner.field().modulus()
    }

    fn contract(&self, m: usize) -> PyResult<PyStateTensor> {
        Ok(PyStateTensor {
            inner: contract_cycle(&self.inner, m).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "SiteTensor(N={}, n={}, p={})",
            self.inner.physical_dim(),
            self.inner.bond_dim(),
            self.inner.field().modulus()
        )
    }
}

#[pyclass(name = "StateTensor", module = "qmfcut")]
struct PyStateTensor {
    inner: StateTensor<PrimeField>,
}

#[pymethods]
impl PyStateTensor {
    #[getter]
    fn sites(&self) -> usize {
        self.inner.sites()
    }

    #[getter]
    fn physical_dim(&self) -> usize {
        self.inner.physical_dim()
    }

    /// Entries in row-major order, site 1 most significant.
    fn entries(&self) -> Vec<u64> {
        self.inner.entries().to_vec()
    }

    /// Entry at a 0-based multi-index.
    fn get(&self, index: Vec<usize>) -> PyResult<u64> {
        if index.len() != self.inner.sites() || index.iter().any(|&i| i >= self.inner.physical_dim()) {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(*self.inner.get(&index))
    }

    fn cyclic_shift(&self, k: i64) -> Self {
        Self {
            inner: self.inner.cyclic_shift(k),
        }
    }

    fn is_invariant(&self) -> bool {
        self.inner.first_non_invariant_shift().is_none()
    }

    #[pyo3(signature = (partition = "odd-even"))]
    fn flattening_rank(&self, partition: &str) -> PyResult<usize> {
        let part = partition_spec(partition)?.resolve(self.inner.sites()).map_err(err)?;
        self.inner.flatten(&part).and_then(|f| f.rank()).map_err(err)
    }

    /// Eigenspace block analysis of the odd/even flattening. Needs a prime
    /// with `p ≡ 1 (mod sites/2)`.
    fn block_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = symmetry::block_structure_report(self.inner.field(), &self.inner).map_err(err)?;
        json_to_py(py, &serde_json::to_value(&r).expect("reports serialize"))
    }

    fn __repr__(&self) -> String {
        format!(
            "StateTensor(m={}, N={}, p={})",
            self.inner.sites(),
            self.inner.physical_dim(),
            self.inner.field().modulus()
        )
    }
}

/// Smallest prime above 10^6 with a primitive root of unity of `order`.
#[pyfunction]
fn prime_with_roots_of_unity(order: usize) -> u64 {
    PrimeField::with_roots_of_unity(order).modulus()
}

#[pyfunction]
#[pyo3(signature = (m, physical_dim, bond_dim = None, partition = "odd-even"))]
fn qmc(py: Python<'_>, m: usize, physical_dim: u64, bond_dim: Option<u64>, partition: &str) -> PyResult<Py<PyAny>> {
    let part = partition_spec(partition)?.resolve(m).map_err(err)?;
    let r = qmfcut_core::qcut::qmc(m, physical_dim, bond_dim.unwrap_or(physical_dim), &part).map_err(err)?;
    let int = py.import("builtins")?.getattr("int")?;
    Ok(int.call1((r.qmc.to_string(),))?.unbind())
}

#[allow(clippy::too_many_arguments)]
fn config(
    command: Command,
    m: Option<Vec<usize>>,
    d: Option<Vec<usize>>,
    physical: Option<Vec<usize>>,
    n: Option<Vec<usize>>,
    partition: &str,
    trials: usize,
    seed: u64,
    ring: &str,
) -> PyResult<RunConfig> {
    Ok(RunConfig {
        command,
        m,
        d,
        physical,
        n,
        partition: partition_spec(partition)?,
        trials,
        seed,
        ring: ring.parse::<ScalarRing>().map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (m, physical_dim, bond_dim = None, partition = "odd-even", trials = 16, seed = report::DEFAULT_SEED, ring = "prime"))]
#[allow(clippy::too_many_arguments)]
fn qmf_estimate<'py>(
    py: Python<'py>,
    m: usize,
    physical_dim: usize,
    bond_dim: Option<usize>,
    partition: &str,
    trials: usize,
    seed: u64,
    ring: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(
        Command::Qmf,
        Some(vec![m]),
        None,
        Some(vec![physical_dim]),
        bond_dim.map(|n| vec![n]),
        partition,
        trials,
        seed,
        ring,
    )?;
    let out = report::run(&cfg).map_err(err)?;
    json_to_py(py, &out.report)
}

/// Runs a report command (`"theorem1"`, `"table"`, …) and returns
/// `{"report": …, "failures": […], "passed": bool}`.
#[pyfunction]
#[pyo3(signature = (command, m = None, d = None, physical_dim = None, bond_dim = None, partition = "odd-even", trials = 16, seed = report::DEFAULT_SEED, ring = "prime"))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    command: &str,
    m: Option<Vec<usize>>,
    d: Option<Vec<usize>>,
    physical_dim: Option<Vec<usize>>,
    bond_dim: Option<Vec<usize>>,
    partition: &str,
    trials: usize,
    seed: u64,
    ring: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let command: Command = serde_json::from_value(serde_json::Value::String(command.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown command {command:?}")))?;
    let cfg = config(command, m, d, physical_dim, bond_dim, partition, trials, seed, ring)?;
    let out = report::run(&cfg).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("report", json_to_py(py, &out.report)?)?;
    dict.set_item(
        "failures",
        json_to_py(py, &serde_json::to_value(&out.failures).expect("failures serialize"))?,
    )?;
    dict.set_item("passed", out.passed())?;
    Ok(dict.into_any())
}

#[pyfunction]
fn necklace_count(m: usize, physical_dim: usize) -> PyResult<u128> {
    core_necklace_count(m, physical_dim).map_err(err)
}

#[pyfunction]
fn sign_multiplicity_character(d: usize, physical_dim: usize) -> PyResult<u128> {
    symmetry::sign_multiplicity_character(d, physical_dim).map_err(err)
}

#[pyfunction]
fn sign_multiplicity_formula(d: usize, physical_dim: usize) -> PyResult<u128> {
    symmetry::sign_multiplicity_formula(d, physical_dim).map_err(err)
}

#[pyfunction]
fn qmf_upper_bound_parity(d: usize, physical_dim: usize) -> PyResult<u128> {
    symmetry::qmf_upper_bound_parity(d, physical_dim).map_err(err)
}

/// Number of cyclic bit changes of a 0/1 sequence.
#[pyfunction]
fn coef(bits: Vec<u8>) -> PyResult<usize> {
    if bits.len() < 2 {
        return Err(PyValueError::new_err("need at least two bits"));
    }
    Ok(BitString::new(bits).map_err(err)?.coef())
}

/// Signed support of `K_S` as `{eta_index: ±1}`.
#[pyfunction]
fn kernel_vector(d: usize, s: Vec<usize>) -> PyResult<Vec<(usize, i8)>> {
    Ok(line_kernel::kernel_vector_ks(d, &s).map_err(err)?.coefficients)
}

#[pyfunction]
#[pyo3(signature = (d, mu, nu, s, p = MERSENNE_31))]
fn verify_kernel(d: usize, mu: i64, nu: i64, s: Vec<usize>, p: u64) -> PyResult<bool> {
    let f = field(p)?;
    let k = line_kernel::kernel_vector_ks(d, &s).map_err(err)?;
    KernelVerifier::new(&f, d, &f.from_i64(mu), &f.from_i64(nu))
        .and_then(|v| v.verify(&k))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d, p = MERSENNE_31))]
fn kernel_span_dimension(d: usize, p: u64) -> PyResult<usize> {
    Ok(line_kernel::kernel_span_dimension_t3(&field(p)?, d)
        .map_err(err)?
        .containing_first)
}

#[pymodule]
fn qmfcut(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySiteTensor>()?;
    m.add_class::<PyStateTensor>()?;
    m.add_function(wrap_pyfunction!(prime_with_roots_of_unity, m)?)?;
    m.add_function(wrap_pyfunction!(qmc, m)?)?;
    m.add_function(wrap_pyfunction!(qmf_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(necklace_count, m)?)?;
    m.add_function(wrap_pyfunction!(sign_multiplicity_character, m)?)?;
    m.add_function(wrap_pyfunction!(sign_multiplicity_formula, m)?)?;
    m.add_function(wrap_pyfunction!(qmf_upper_bound_parity, m)?)?;
    m.add_function(wrap_pyfunction!(coef, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_vector, m)?)?;
    m.add_function(wrap_pyfunction!(verify_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_span_dimension, m)?)?;
    m.add("MERSENNE_31", MERSENNE_31)?;
    Ok(())
}
