//! Python bindings: train or load a model bundle and explain instances.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString};

use rfexplain::benchmark::{run_benchmark, TABLE_ROWS};
use rfexplain::bundle::ModelBundle as CoreBundle;
use rfexplain::cluster::path_similarity as core_similarity;
use rfexplain::data::{load_csv, read_headers, DatasetMeta};
use rfexplain::forest::FeatureMeta;
use rfexplain::path::{Condition, Path, Relation};
use rfexplain::pipeline::PipelineConfig;
use rfexplain::train::{f1_score, TrainParams};
use rfexplain::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn load_meta(data: &PathBuf, meta: Option<PathBuf>) -> PyResult<DatasetMeta> {
    match meta {
        Some(p) => DatasetMeta::load(p).map_err(to_py),
        None => DatasetMeta::all_numeric(&read_headers(data).map_err(to_py)?).map_err(to_py),
    }
}

/// Trained forest with its scaler and column metadata.
#[pyclass(name = "ModelBundle", module = "pyrfexplain", frozen)]
struct ModelBundle {
    inner: CoreBundle,
}

impl ModelBundle {
    /// Accepts a dict of column values, a CSV row string or an encoded list.
    fn encode(&self, instance: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
        let meta = &self.inner.meta;
        if let Ok(d) = instance.cast::<PyDict>() {
            let pairs = d
                .iter()
                .map(|(k, v)| {
                    let value = match v.cast::<PyString>() {
                        Ok(s) => s.to_string(),
                        Err(_) => v.str()?.to_string(),
                    };
                    Ok((k.str()?.to_string(), value))
                })
                .collect::<PyResult<Vec<_>>>()?;
            meta.encode_pairs(&pairs).map_err(to_py)
        } else if let Ok(s) = instance.cast::<PyString>() {
            meta.encode_csv_row(&s.to_string()).map_err(to_py)
        } else {
            instance.extract::<Vec<f64>>()
        }
    }
}

#[pymethods]
impl ModelBundle {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(ModelBundle { inner: CoreBundle::load(path).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(ModelBundle { inner: CoreBundle::from_bytes(text.as_bytes()).map_err(to_py)? })
    }

    /// Trains on a CSV file. Without `meta`, every column but the last is numeric.
    #[staticmethod]
    #[pyo3(signature = (
        data, meta=None, *, n_estimators=100, max_depth=None, max_features="sqrt",
        min_samples_leaf=1, bootstrap=true, seed=0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        data: PathBuf,
        meta: Option<PathBuf>,
        n_estimators: usize,
        max_depth: Option<usize>,
        max_features: &str,
        min_samples_leaf: usize,
        bootstrap: bool,
        seed: u64,
    ) -> PyResult<Self> {
        let meta = load_meta(&data, meta)?;
        let dataset = load_csv(&data, &meta).map_err(to_py)?;
        let params = TrainParams {
            n_estimators,
            max_depth,
            max_features: max_features.parse().map_err(to_py)?,
            min_samples_leaf,
            bootstrap,
            seed,
        };
        Ok(ModelBundle { inner: CoreBundle::train(&dataset, meta, &params).map_err(to_py)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    fn to_json(&self) -> String {
        String::from_utf8(self.inner.to_bytes()).expect("json is utf-8")
    }

    #[getter]
    fn n_estimators(&self) -> usize {
        self.inner.forest.n_estimators()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.forest.features.iter().map(|f| f.name.clone()).collect()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.meta.class_names.to_vec()
    }

    /// Predicted class label.
    fn predict(&self, instance: &Bound<'_, PyAny>) -> PyResult<String> {
        let x = self.inner.prepare(&self.encode(instance)?).map_err(to_py)?;
        let p = self.inner.forest.predict(&x.values).map_err(to_py)?;
        Ok(self.inner.class_label(p.class).to_string())
    }

    /// Reduced rule for one instance as a dict; `rule` holds the rendered text.
    #[pyo3(signature = (
        instance, *, association_rules=true, clustering=true, random=true,
        min_support=0.1, n_medoids=None, min_path_fraction=None, seed=0, hide_last=0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn explain<'py>(
        &self,
        py: Python<'py>,
        instance: &Bound<'py, PyAny>,
        association_rules: bool,
        clustering: bool,
        random: bool,
        min_support: f64,
        n_medoids: Option<usize>,
        min_path_fraction: Option<f64>,
        seed: u64,
        hide_last: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let encoded = self.encode(instance)?;
        let config = PipelineConfig {
            min_support,
            n_medoids_override: n_medoids,
            min_path_fraction,
            seed,
            ..PipelineConfig::default().with_toggles(association_rules, clustering, random)
        };
        let inner = &self.inner;
        let explanation = py
            .detach(|| inner.explain(&encoded, &config, hide_last))
            .map_err(to_py)?;
        json_to_py(py, &explanation.to_json(inner))
    }

    /// Mean and standard deviation of feature and path reduction for every
    /// technique combination over the rows of a CSV file.
    #[pyo3(signature = (data, *, limit=None, workers=None, seed=0))]
    fn benchmark<'py>(
        &self,
        py: Python<'py>,
        data: PathBuf,
        limit: Option<usize>,
        workers: Option<usize>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let inner = &self.inner;
        let dataset = load_csv(&data, &inner.meta).map_err(to_py)?;
        let take = limit.unwrap_or(dataset.len()).min(dataset.len());
        let instances = dataset.rows[..take]
            .iter()
            .map(|r| inner.prepare(r).map(|i| i.values))
            .collect::<rfexplain::Result<Vec<_>>>()
            .map_err(to_py)?;
        let base = PipelineConfig { seed, ..Default::default() };
        let rows = py
            .detach(|| run_benchmark(&inner.forest, &instances, &base, &TABLE_ROWS, workers))
            .map_err(to_py)?;
        let value = serde_json::to_value(&rows).map_err(|e| PyValueError::new_err(e.to_string()))?;
        json_to_py(py, &value)
    }

    /// F1 score of the forest on a labelled CSV file.
    fn score(&self, data: PathBuf) -> PyResult<f64> {
        let dataset = load_csv(&data, &self.inner.meta).map_err(to_py)?;
        let predicted = dataset
            .rows
            .iter()
            .map(|r| {
                let x = self.inner.prepare(r)?;
                Ok(self.inner.forest.predict(&x.values)?.class)
            })
            .collect::<rfexplain::Result<Vec<_>>>()
            .map_err(to_py)?;
        Ok(f1_score(&dataset.labels, &predicted))
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelBundle(n_estimators={}, features={})",
            self.inner.forest.n_estimators(),
            self.inner.forest.n_features()
        )
    }
}

fn parse_path(conditions: Vec<(usize, String, f64)>, n_features: usize) -> PyResult<Path> {
    let conditions = conditions
        .into_iter()
        .map(|(feature, op, threshold)| {
            if feature >= n_features {
                return Err(PyValueError::new_err(format!("feature {feature} out of range")));
            }
            let relation = match op.as_str() {
                "<=" => Relation::Le,
                ">" => Relation::Gt,
                other => return Err(PyValueError::new_err(format!("relation must be '<=' or '>', got {other:?}"))),
            };
            Ok(Condition { feature, relation, threshold })
        })
        .collect::<PyResult<_>>()?;
    Ok(Path { tree_index: 0, conditions, voted_class: 1 })
}

/// Similarity of two paths given as `(feature, "<=" | ">", threshold)` lists
/// over features with the given `(min, max)` bounds.
#[pyfunction]
fn path_similarity(
    a: Vec<(usize, String, f64)>,
    b: Vec<(usize, String, f64)>,
    bounds: Vec<(f64, f64)>,
) -> PyResult<f64> {
    let features: Vec<FeatureMeta> = bounds
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| FeatureMeta::numeric(format!("f{i}"), lo, hi))
        .collect();
    let a = parse_path(a, features.len())?;
    let b = parse_path(b, features.len())?;
    Ok(core_similarity(&a, &b, &features))
}

/// Smallest number of trees that still forms a majority.
#[pyfunction]
fn quorum(n_estimators: usize) -> usize {
    rfexplain::quorum(n_estimators)
}

/// F1 score of the positive class.
#[pyfunction]
fn f1(truth: Vec<u8>, predicted: Vec<u8>) -> PyResult<f64> {
    if truth.len() != predicted.len() {
        return Err(PyValueError::new_err("truth and predicted differ in length"));
    }
    Ok(f1_score(&truth, &predicted))
}

#[pymodule]
fn pyrfexplain(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ModelBundle>()?;
    m.add_function(wrap_pyfunction!(path_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(quorum, m)?)?;
    m.add_function(wrap_pyfunction!(f1, m)?)?;
    let combos = PyList::new(m.py(), TABLE_ROWS.iter().map(|t| t.to_string()))?;
    m.add("TECHNIQUE_ROWS", combos)?;
    Ok(())
}
