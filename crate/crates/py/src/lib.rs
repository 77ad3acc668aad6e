//! Python bindings: the main vector type plus one function per operation.
//!
//! Rationals cross the boundary as `"num/den"` strings (ints accepted where
//! a rational is expected), and structured reports come back as plain dicts
//! decoded from the same canonical JSON the CLI emits.

use banach_lab_core::ambient::ambient_norm;
use banach_lab_core::certify::{
    block_rep_search, check_eps_lp_type, equivalence_constants, CertifyBudget, PExponent,
};
use banach_lab_core::convolution::{self, ConvOptions, ZVector};
use banach_lab_core::dividing::{
    default_sop_samples, double_limit_table, independence_witness_search, sop_monotonicity_check,
    ConstantPhi, IndependenceConfig, IndependenceFamily, L2BasisPhi, MatrixFormula, SearchBudget,
    SummingBasisPhi,
};
use banach_lab_core::probe::{self, BallNet};
use banach_lab_core::report;
use banach_lab_core::tsirelson::{self, TsBudget};
use banach_lab_core::vector::{FiniteVector, IndexSet, NormSpace, Rat};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_rat(s: &str) -> PyResult<Rat> {
    s.parse::<Rat>()
        .map_err(|e| err(format!("bad rational `{s}`: {e}")))
}

fn parse_space(tag: &str) -> PyResult<NormSpace> {
    NormSpace::parse(tag).map_err(err)
}

fn parse_p(tag: &str) -> PyResult<PExponent> {
    PExponent::parse(tag).map_err(err)
}

/// Decode a canonical JSON report into native Python objects.
fn json_to_py(py: Python<'_>, value: &Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    let loads = py.import("json")?.getattr("loads")?;
    Ok(loads.call1((text,))?.unbind())
}

/// A finitely supported vector with exact rational entries.
#[pyclass(frozen, name = "FiniteVector", skip_from_py_object)]
#[derive(Clone)]
struct PyVector {
    inner: FiniteVector,
}

#[pymethods]
impl PyVector {
    /// Build from `(index, value)` pairs; values are rational strings or ints.
    #[new]
    fn new(entries: Vec<(u32, String)>) -> PyResult<Self> {
        let converted: Result<Vec<(u32, Rat)>, PyErr> = entries
            .into_iter()
            .map(|(i, v)| Ok((i, parse_rat(&v)?)))
            .collect();
        Ok(PyVector {
            inner: FiniteVector::new(converted?).map_err(err)?,
        })
    }

    /// The basis vector `e_k`.
    #[staticmethod]
    fn basis(k: u32) -> PyResult<Self> {
        if k == 0 {
            return Err(err("basis index must be positive"));
        }
        Ok(PyVector {
            inner: FiniteVector::basis(k),
        })
    }

    /// The summing-basis vector `s_n = e_1 + ... + e_n`.
    #[staticmethod]
    fn summing(n: u32) -> Self {
        PyVector {
            inner: FiniteVector::summing(n),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyVector {
            inner: FiniteVector::from_json_str(text).map_err(err)?,
        })
    }

    fn entries(&self) -> Vec<(u32, String)> {
        self.inner
            .entries()
            .iter()
            .map(|(i, v)| (*i, v.to_string()))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn support(&self) -> Vec<u32> {
        self.inner.support().items().to_vec()
    }

    fn add(&self, other: &PyVector) -> PyVector {
        PyVector {
            inner: self.inner.add(&other.inner),
        }
    }

    fn sub(&self, other: &PyVector) -> PyVector {
        PyVector {
            inner: self.inner.sub(&other.inner),
        }
    }

    fn scale(&self, c: &str) -> PyResult<PyVector> {
        Ok(PyVector {
            inner: self.inner.scale(&parse_rat(c)?),
        })
    }

    fn restrict(&self, indices: Vec<u32>) -> PyResult<PyVector> {
        let set = IndexSet::new(indices).map_err(err)?;
        Ok(PyVector {
            inner: self.inner.restrict(&set),
        })
    }

    /// Flip the sign of the entries at the given indices.
    fn apply_signs(&self, flip: Vec<u32>) -> PyResult<PyVector> {
        let set = IndexSet::new(flip).map_err(err)?;
        Ok(PyVector {
            inner: self.inner.apply_signs(&set),
        })
    }

    /// Norm in the given ambient space, as an enclosure `(lo, hi)`;
    /// exact norms have `lo == hi`.
    #[pyo3(signature = (space, tol = None))]
    fn norm(&self, space: &str, tol: Option<&str>) -> PyResult<(String, String)> {
        let space = parse_space(space)?;
        let tol = match tol {
            Some(t) => parse_rat(t)?,
            None => banach_lab_core::rat(1, 1 << 30),
        };
        let e = ambient_norm(&self.inner, &space, &tol, &TsBudget::default()).map_err(err)?;
        Ok((e.lo().to_string(), e.hi().to_string()))
    }

    fn __repr__(&self) -> String {
        format!("FiniteVector({})", self.inner)
    }

    fn __eq__(&self, other: &PyVector) -> bool {
        self.inner == other.inner
    }
}

/// Exact Tsirelson norm as a rational string.
#[pyfunction]
fn tsirelson_norm(x: &PyVector) -> PyResult<String> {
    Ok(tsirelson::tsirelson_norm(&x.inner).map_err(err)?.to_string())
}

/// Full norm report: value, fixed-point witness tree, memo statistics.
#[pyfunction]
fn tsirelson_norm_report(py: Python<'_>, x: &PyVector) -> PyResult<Py<PyAny>> {
    let comp = tsirelson::tsirelson_norm_with(&x.inner, &TsBudget::default()).map_err(err)?;
    json_to_py(py, &report::norm_computation_json(&comp))
}

/// The defining iterates `||x||_0 .. ||x||_steps`.
#[pyfunction]
fn tsirelson_iterates(x: &PyVector, steps: usize) -> PyResult<Vec<String>> {
    let its =
        tsirelson::tsirelson_iterates(&x.inner, steps, &TsBudget::default()).map_err(err)?;
    Ok(its.iter().map(|r| r.to_string()).collect())
}

/// Admissible interval families inside `[lo, hi]`, at most `limit` of them.
#[pyfunction]
#[pyo3(signature = (lo, hi, max_pieces, limit = 10_000))]
fn admissible_families(
    lo: u32,
    hi: u32,
    max_pieces: usize,
    limit: usize,
) -> PyResult<Vec<Vec<(u32, u32)>>> {
    let stream = tsirelson::admissible_families(lo, hi, max_pieces).map_err(err)?;
    Ok(stream
        .take(limit)
        .map(|f| f.intervals().to_vec())
        .collect())
}

fn unwrap_vectors(xs: Vec<PyRef<'_, PyVector>>) -> Vec<FiniteVector> {
    xs.iter().map(|x| x.inner.clone()).collect()
}

/// Certified two-sided equivalence constants against the `lp`/`c0` basis.
#[pyfunction]
#[pyo3(name = "equivalence_constants", signature = (vectors, p, ambient, max_evals = 200_000))]
fn equivalence_constants_py(
    py: Python<'_>,
    vectors: Vec<PyRef<'_, PyVector>>,
    p: &str,
    ambient: &str,
    max_evals: usize,
) -> PyResult<Py<PyAny>> {
    let budget = CertifyBudget {
        max_evals,
        ..CertifyBudget::default()
    };
    let cert = equivalence_constants(
        &unwrap_vectors(vectors),
        &parse_p(p)?,
        &parse_space(ambient)?,
        &budget,
    )
    .map_err(err)?;
    json_to_py(py, &report::certificate_json(&cert))
}

/// Epsilon-`lp`-type (or epsilon-`c0`-type) check.
#[pyfunction]
#[pyo3(signature = (vectors, p, eps, ambient, max_evals = 200_000))]
fn check_type(
    py: Python<'_>,
    vectors: Vec<PyRef<'_, PyVector>>,
    p: &str,
    eps: &str,
    ambient: &str,
    max_evals: usize,
) -> PyResult<Py<PyAny>> {
    let budget = CertifyBudget {
        max_evals,
        ..CertifyBudget::default()
    };
    let res = check_eps_lp_type(
        &unwrap_vectors(vectors),
        &parse_p(p)?,
        &parse_rat(eps)?,
        &parse_space(ambient)?,
        &budget,
    )
    .map_err(err)?;
    json_to_py(py, &report::type_check_json(&res))
}

/// Best-effort search for successive block vectors realizing the type.
#[pyfunction]
#[pyo3(signature = (ambient, p, eps, n, basis_range = 64))]
fn block_rep(
    py: Python<'_>,
    ambient: &str,
    p: &str,
    eps: &str,
    n: usize,
    basis_range: u32,
) -> PyResult<Py<PyAny>> {
    let res = block_rep_search(
        &parse_space(ambient)?,
        basis_range,
        &parse_p(p)?,
        &parse_rat(eps)?,
        n,
        &CertifyBudget::default(),
    )
    .map_err(err)?;
    json_to_py(py, &report::block_rep_json(&res))
}

/// `||e_m + s_n||` in `c0` (2 when `m <= n`, else 1).
#[pyfunction]
fn summing_basis_value(m: u32, n: u32) -> String {
    banach_lab_core::dividing::summing_basis_value(m, n).to_string()
}

/// Double-limit table for a bundled example: `c0-summing`, `l2-basis`, or
/// `const:<rational>`.
#[pyfunction]
#[pyo3(signature = (example, m, n, tol = "1/10"))]
fn double_limit(py: Python<'_>, example: &str, m: usize, n: usize, tol: &str) -> PyResult<Py<PyAny>> {
    let formula: Box<dyn MatrixFormula> = match example {
        "c0-summing" => Box::new(SummingBasisPhi),
        "l2-basis" => Box::new(L2BasisPhi::default()),
        other => {
            if let Some(c) = other.strip_prefix("const:") {
                Box::new(ConstantPhi(parse_rat(c)?))
            } else {
                return Err(err(format!("unknown example `{other}`")));
            }
        }
    };
    let rep = double_limit_table(formula.as_ref(), m, n, &parse_rat(tol)?).map_err(err)?;
    json_to_py(py, &report::double_limit_json(&rep, true))
}

/// Independence witness search over every disjoint `(P, M)` pair.
#[pyfunction]
#[pyo3(signature = (family, s, r, depth, seed = 0, full_pairs = false))]
fn independence_search(
    py: Python<'_>,
    family: &str,
    s: &str,
    r: &str,
    depth: usize,
    seed: u64,
    full_pairs: bool,
) -> PyResult<Py<PyAny>> {
    let fam = match family {
        "c0" => IndependenceFamily::c0_plus_basis(),
        "l2" => IndependenceFamily::l2_plus_basis(),
        other => return Err(err(format!("unknown family `{other}` (expected c0 or l2)"))),
    };
    let cfg = IndependenceConfig {
        below: parse_rat(s)?,
        above: parse_rat(r)?,
        depth,
        seed,
        budget: SearchBudget::default(),
    };
    if cfg.below >= cfg.above {
        return Err(err("need s < r"));
    }
    let rep = independence_witness_search(&fam, &cfg).map_err(err)?;
    json_to_py(py, &report::witness_report_json(&rep, full_pairs))
}

/// Monotone-plus-strict-chain check for `psi` on `c0`.
#[pyfunction]
#[pyo3(signature = (depth, max_index = 10))]
fn sop_check(py: Python<'_>, depth: usize, max_index: u32) -> PyResult<Py<PyAny>> {
    let samples = default_sop_samples(max_index);
    let rep = sop_monotonicity_check(depth, &samples);
    json_to_py(py, &report::sop_report_json(&rep))
}

fn zvector_from_entries(entries: Vec<(i64, String)>) -> PyResult<ZVector> {
    let converted: Result<Vec<(i64, Rat)>, PyErr> = entries
        .into_iter()
        .map(|(i, v)| Ok((i, parse_rat(&v)?)))
        .collect();
    ZVector::new(converted?).map_err(err)
}

/// Coefficients of `(cos t)^(2i)` as `(index, value)` pairs.
#[pyfunction]
fn binomial_kernel(i: u32) -> Vec<(i64, String)> {
    convolution::binomial_kernel(i)
        .entries()
        .iter()
        .map(|(k, v)| (*k, v.to_string()))
        .collect()
}

/// Certified enclosure of `min { ||x*z - y||_1 : ||z||_1 <= 1 }` with the
/// minimizer truncated to `[-2W, 2W]`.
#[pyfunction]
fn convolution_phi(
    py: Python<'_>,
    x: Vec<(i64, String)>,
    y: Vec<(i64, String)>,
    halfwidth: u32,
) -> PyResult<Py<PyAny>> {
    let rep = convolution::convolution_phi(
        &zvector_from_entries(x)?,
        &zvector_from_entries(y)?,
        halfwidth,
        &ConvOptions::default(),
    )
    .map_err(err)?;
    json_to_py(py, &report::conv_report_json(&rep))
}

fn build_net(ambient: &NormSpace, max_index: u32, step: u32) -> PyResult<BallNet> {
    BallNet::generate(ambient.clone(), max_index, step, 200_000).map_err(err)
}

/// Net-restricted lower bound on the d-metric between two trivial types.
#[pyfunction]
#[pyo3(signature = (a, b, ambient, net_max_index = 3, net_step = 4))]
fn d_metric_lower(
    a: &PyVector,
    b: &PyVector,
    ambient: &str,
    net_max_index: u32,
    net_step: u32,
) -> PyResult<(String, String)> {
    let ambient = parse_space(ambient)?;
    let net = build_net(&ambient, net_max_index, net_step)?;
    let d = probe::d_metric_lower(&a.inner, &b.inner, &net).map_err(err)?;
    Ok((d.lo().to_string(), d.hi().to_string()))
}

/// Greedy epsilon-packing statistics for a family of trivial types.
#[pyfunction]
#[pyo3(signature = (family, eps, ambient, net_max_index = 3, net_step = 4))]
fn packing_stats(
    py: Python<'_>,
    family: Vec<PyRef<'_, PyVector>>,
    eps: &str,
    ambient: &str,
    net_max_index: u32,
    net_step: u32,
) -> PyResult<Py<PyAny>> {
    let ambient = parse_space(ambient)?;
    let net = build_net(&ambient, net_max_index, net_step)?;
    let rep = probe::packing_stats(&unwrap_vectors(family), &parse_rat(eps)?, &net).map_err(err)?;
    json_to_py(py, &report::packing_json(&rep))
}

#[pymodule]
fn banach_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA_VERSION", report::SCHEMA_VERSION)?;
    m.add_class::<PyVector>()?;
    m.add_function(wrap_pyfunction!(tsirelson_norm, m)?)?;
    m.add_function(wrap_pyfunction!(tsirelson_norm_report, m)?)?;
    m.add_function(wrap_pyfunction!(tsirelson_iterates, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_families, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence_constants_py, m)?)?;
    m.add_function(wrap_pyfunction!(check_type, m)?)?;
    m.add_function(wrap_pyfunction!(block_rep, m)?)?;
    m.add_function(wrap_pyfunction!(summing_basis_value, m)?)?;
    m.add_function(wrap_pyfunction!(double_limit, m)?)?;
    m.add_function(wrap_pyfunction!(independence_search, m)?)?;
    m.add_function(wrap_pyfunction!(sop_check, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(convolution_phi, m)?)?;
    m.add_function(wrap_pyfunction!(d_metric_lower, m)?)?;
    m.add_function(wrap_pyfunction!(packing_stats, m)?)?;
    Ok(())
}
