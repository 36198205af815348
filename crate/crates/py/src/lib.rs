//! Python bindings: truncated series, étale (φ, Γ)-modules with degree-0
//! cohomology, the fixture corpus, and finite-level descent.

use num_bigint::BigInt;
use num_rational::BigRational;
use phigamma::complexes::series::{h0_exact, Window};
use phigamma::complexes::ComplexKind;
use phigamma::error::Error;
use phigamma::finite_level::{self as fl, FiniteDoc, FiniteObject};
use phigamma::phigamma::schema::ModuleDoc;
use phigamma::phigamma::{corpus as series_corpus, EtalePhiGammaModule};
use phigamma::series::{LaurentSeries, SeriesRing};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::sync::Arc;

create_exception!(phigamma, PhigammaError, PyValueError, "Raised for any library error.");

fn err(e: Error) -> PyErr {
    PhigammaError::new_err(e.to_string())
}

fn var_index(ring: &SeriesRing, label: &str) -> Result<usize, Error> {
    ring.labels()
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::InvalidInput(format!("no variable named {label:?}")))
}

/// Series ring over Z/p^m (or its perfect version with exponents in p^-k Z).
#[pyclass(name = "SeriesRing", frozen)]
struct PyRing {
    inner: Arc<SeriesRing>,
}

#[pymethods]
impl PyRing {
    #[new]
    #[pyo3(signature = (p, m, labels, perfect = None))]
    fn new(p: u64, m: u32, labels: Vec<String>, perfect: Option<u32>) -> PyResult<Self> {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let inner = match perfect {
            Some(k) => SeriesRing::perfect(p, k, &refs),
            None => SeriesRing::integral(p, m, &refs),
        }
        .map_err(err)?;
        Ok(PyRing { inner })
    }

    fn parse(&self, text: &str) -> PyResult<PySeries> {
        Ok(PySeries {
            inner: self.inner.parse(text).map_err(err)?,
        })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }
}

#[pyclass(name = "Series", frozen)]
struct PySeries {
    inner: LaurentSeries,
}

impl PySeries {
    fn wrap(inner: LaurentSeries) -> Self {
        PySeries { inner }
    }

    fn var(&self, label: &str) -> PyResult<usize> {
        var_index(self.inner.ring(), label).map_err(err)
    }
}

#[pymethods]
impl PySeries {
    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Series({:?})", self.inner.to_string())
    }

    fn __eq__(&self, other: PyRef<'_, Self>) -> bool {
        self.inner == other.inner
    }

    fn __add__(&self, other: PyRef<'_, Self>) -> PyResult<Self> {
        self.inner.add(&other.inner).map(Self::wrap).map_err(err)
    }

    fn __sub__(&self, other: PyRef<'_, Self>) -> PyResult<Self> {
        self.inner.sub(&other.inner).map(Self::wrap).map_err(err)
    }

    fn __mul__(&self, other: PyRef<'_, Self>) -> PyResult<Self> {
        self.inner.mul(&other.inner).map(Self::wrap).map_err(err)
    }

    /// Whether every coefficient is known (no truncation).
    #[getter]
    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn phi(&self, var: &str) -> PyResult<Self> {
        Ok(Self::wrap(self.inner.phi(self.var(var)?)))
    }

    fn psi(&self, var: &str) -> PyResult<Self> {
        self.inner.psi(self.var(var)?).map(Self::wrap).map_err(err)
    }

    fn gamma(&self, var: &str, c: BigInt) -> PyResult<Self> {
        self.inner.gamma(self.var(var)?, &c).map(Self::wrap).map_err(err)
    }

    /// Residue as coordinates in the coefficient ring's basis.
    fn res(&self) -> PyResult<Vec<u64>> {
        self.inner.res().map(|c| c.to_vec()).map_err(err)
    }

    /// −log_p of the Gauss norm at radius `r` (a rational, e.g. "1/2"),
    /// in one variable or, without `var`, the product norm.
    #[pyo3(signature = (r, var = None))]
    fn gauss_norm(&self, r: &str, var: Option<&str>) -> PyResult<String> {
        let r: BigRational = r
            .parse()
            .map_err(|_| err(Error::Parse(format!("{r:?} is not a rational number"))))?;
        Ok(match var {
            Some(v) => self.inner.gauss_norm_jr(self.var(v)?, &r).to_string(),
            None => self.inner.gauss_norm_r(&r).to_string(),
        })
    }

    fn perfectoid_norm(&self) -> PyResult<String> {
        self.inner.perfectoid_norm().map(|n| n.to_string()).map_err(err)
    }
}

/// An étale (φ, Γ)-module given by Frobenius and Γ matrices.
#[pyclass(name = "Module", frozen)]
struct PyPhiGammaModule {
    inner: EtalePhiGammaModule,
}

impl PyPhiGammaModule {
    fn wrap(inner: EtalePhiGammaModule) -> Self {
        PyPhiGammaModule { inner }
    }
}

#[pymethods]
impl PyPhiGammaModule {
    /// Parses a module document (JSON or TOML).
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let doc = ModuleDoc::from_text(text).map_err(err)?;
        doc.to_module().map(Self::wrap).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        Ok(ModuleDoc::from_module(&self.inner, None, Vec::new()).map_err(err)?.to_json())
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.ring().p()
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.ring().m()
    }

    /// Raises unless the module is étale and all its actions commute.
    fn validate(&self) -> PyResult<()> {
        self.inner.validate_etale().map_err(err)?;
        self.inner.validate_commutation().map_err(err)?;
        Ok(())
    }

    fn tate_twist(&self) -> Self {
        Self::wrap(self.inner.tate_twist())
    }

    fn dual(&self) -> PyResult<Self> {
        self.inner.dual().map(Self::wrap).map_err(err)
    }

    fn direct_sum(&self, other: PyRef<'_, Self>) -> PyResult<Self> {
        self.inner.direct_sum(&other.inner).map(Self::wrap).map_err(err)
    }

    fn tensor(&self, other: PyRef<'_, Self>) -> PyResult<Self> {
        self.inner.tensor(&other.inner).map(Self::wrap).map_err(err)
    }

    /// Degree-0 cohomology on the window lo:hi in every variable, checked
    /// against the doubled window. Returns (torsion exponents, free rank).
    #[pyo3(signature = (lo = -16, hi = 16, complex = "herr"))]
    fn h0(&self, lo: i64, hi: i64, complex: &str) -> PyResult<(Vec<u32>, usize)> {
        let kind = ComplexKind::parse(complex).map_err(err)?;
        let w = Window::uniform(self.inner.nvars(), lo, hi).map_err(err)?;
        let prof = h0_exact(&self.inner, kind, &w).map_err(err)?;
        let d = &prof.degrees[0];
        Ok((d.divisors.clone(), d.free_rank))
    }
}

/// The deterministic fixture corpus as (file name, document) pairs;
/// finite-level fixtures are prefixed with "finite/".
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn corpus(seed: u64) -> PyResult<Vec<(String, String)>> {
    let mut files = series_corpus::emit(seed).map_err(err)?;
    files.extend(fl::corpus::emit(seed).map_err(err)?.into_iter().map(|(n, s)| (format!("finite/{n}"), s)));
    Ok(files)
}

/// Finite-level descent: D(V) for a representation document, V(D) for a
/// φ-module document. Returns the resulting document as JSON.
#[pyfunction]
fn descend(text: &str) -> PyResult<String> {
    let obj = FiniteDoc::from_json(text).map_err(err)?.to_object().map_err(err)?;
    let out = match &obj {
        FiniteObject::Rep(v) => FiniteObject::Phi(fl::functor_d(v).map_err(err)?),
        FiniteObject::Phi(d) => {
            d.validate_etale().map_err(err)?;
            FiniteObject::Rep(fl::functor_v(d).map_err(err)?)
        }
    };
    Ok(FiniteDoc::from_object(&out, None, Vec::new()).to_json())
}

#[pymodule]
#[pyo3(name = "phigamma")]
fn phigamma_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRing>()?;
    m.add_class::<PySeries>()?;
    m.add_class::<PyPhiGammaModule>()?;
    m.add_function(wrap_pyfunction!(corpus, m)?)?;
    m.add_function(wrap_pyfunction!(descend, m)?)?;
    m.add("PhigammaError", m.py().get_type::<PhigammaError>())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variables_resolve_by_label() {
        let r = SeriesRing::integral(3, 2, &["a", "b"]).unwrap();
        assert_eq!(var_index(&r, "b").unwrap(), 1);
        assert!(var_index(&r, "c").is_err());
    }
}
