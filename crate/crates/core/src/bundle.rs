//! A trained forest together with the scaling and column metadata needed to
//! explain raw rows.

use std::path::Path as FsPath;

use serde_json::{json, Value};

use crate::data::{ColumnKind, ColumnMeta, Dataset, DatasetMeta, Encoding};
use crate::error::{Error, Result};
use crate::format::{forest_from_value, forest_to_value};
use crate::forest::{FeatureKind, Forest, Instance};
use crate::interpret::{compose_rule, Rule};
use crate::pipeline::{reduce, PipelineConfig, Reduction};
use crate::scale::Scaler;
use crate::train::{train_forest, TrainParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub forest: Forest,
    pub scaler: Scaler,
    pub meta: DatasetMeta,
}

/// Result of explaining one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub reduction: Reduction,
    pub rule: Rule,
    /// Model features whose value was clamped into the training range.
    pub clamped: Vec<String>,
}

impl Explanation {
    pub fn to_json(&self, bundle: &ModelBundle) -> Value {
        let mut v = self.rule.to_json();
        let constraints: Vec<Value> = self
            .reduction
            .ranges
            .iter()
            .map(|r| {
                json!({
                    "feature": bundle.forest.features[r.feature].name,
                    "lower": r.lower,
                    "upper": r.upper,
                })
            })
            .collect();
        let obj = v.as_object_mut().expect("rule json is an object");
        obj.insert("rule".into(), Value::String(self.rule.render()));
        obj.insert("predicted_class".into(), json!(self.reduction.prediction.class));
        obj.insert("votes".into(), json!(self.reduction.prediction.votes_for_class));
        obj.insert("n_estimators".into(), json!(bundle.forest.n_estimators()));
        obj.insert("report".into(), json!(self.reduction.report));
        obj.insert("constraints".into(), Value::Array(constraints));
        obj.insert("clamped".into(), json!(self.clamped));
        v
    }
}

impl ModelBundle {
    pub fn new(forest: Forest, scaler: Scaler, meta: DatasetMeta) -> Result<Self> {
        let width = meta.encoded_width();
        if forest.n_features() != width || scaler.len() != width {
            return Err(Error::InvalidModel(format!(
                "forest has {} features, scaler {}, metadata encodes {width}",
                forest.n_features(),
                scaler.len()
            )));
        }
        Ok(ModelBundle { forest, scaler, meta })
    }

    /// Fits the scaler on `data` and trains a forest on the scaled rows.
    pub fn train(data: &Dataset, meta: DatasetMeta, params: &TrainParams) -> Result<Self> {
        let scaler = meta.fit_scaler(&data.rows)?;
        let rows = data.scaled(&scaler)?;
        let forest = train_forest(meta.model_features(), &rows, &data.labels, params)?;
        Self::new(forest, scaler, meta)
    }

    /// Wraps a bare forest: identity scaling, metadata read off the feature kinds.
    pub fn from_forest(forest: Forest) -> Self {
        let mut columns: Vec<ColumnMeta> = Vec::new();
        for f in &forest.features {
            match &f.kind {
                FeatureKind::Numeric => columns.push(ColumnMeta::numeric(&f.name)),
                FeatureKind::Ordinal { categories } => columns.push(ColumnMeta {
                    name: f.name.clone(),
                    kind: ColumnKind::Categorical,
                    encoding: Some(Encoding::Ordinal),
                    categories: categories.clone(),
                }),
                FeatureKind::OneHotMember { group, category } => match columns.last_mut() {
                    Some(last) if &last.name == group && last.encoding == Some(Encoding::Onehot) => {
                        last.categories.push(category.clone())
                    }
                    _ => columns.push(ColumnMeta {
                        name: group.clone(),
                        kind: ColumnKind::Categorical,
                        encoding: Some(Encoding::Onehot),
                        categories: vec![category.clone()],
                    }),
                },
            }
        }
        let scaler = Scaler::identity(forest.n_features());
        ModelBundle {
            meta: DatasetMeta {
                label: "class".into(),
                class_names: ["0".into(), "1".into()],
                features: columns,
            },
            scaler,
            forest,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "forest": forest_to_value(&self.forest),
            "scaler": self.scaler,
            "meta": self.meta,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.to_json()).expect("bundle serializes")
    }

    /// Accepts a bundle document or a bare forest document.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let value: Value =
            serde_json::from_slice(bytes).map_err(|e| Error::parse("$", e.to_string()))?;
        if value.get("trees").is_some() {
            return Ok(Self::from_forest(forest_from_value(&value, "$")?));
        }
        let forest_value = value
            .get("forest")
            .ok_or_else(|| Error::parse("$", "expected a bundle with \"forest\" or a forest with \"trees\""))?;
        let forest = forest_from_value(forest_value, "$.forest")?;
        let scaler: Scaler = match value.get("scaler") {
            Some(s) => serde_json::from_value(s.clone()).map_err(|e| Error::parse("$.scaler", e.to_string()))?,
            None => Scaler::identity(forest.n_features()),
        };
        let meta: DatasetMeta = serde_json::from_value(
            value.get("meta").cloned().ok_or_else(|| Error::parse("$", "missing field \"meta\""))?,
        )
        .map_err(|e| Error::parse("$.meta", e.to_string()))?;
        meta.validate().map_err(|e| Error::parse("$.meta", e.to_string()))?;
        Self::new(forest, scaler, meta)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let bytes = std::fs::read(path.as_ref())?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::ModelParse { path: at, message } => Error::ModelParse {
                path: format!("{}: {at}", path.as_ref().display()),
                message,
            },
            other => other,
        })
    }

    /// Scales an encoded row and clamps it into the model's feature bounds.
    pub fn prepare(&self, encoded: &[f64]) -> Result<Instance> {
        Instance::new(&self.forest.features, self.scaler.transform(encoded)?)
    }

    pub fn class_label(&self, class: u8) -> &str {
        &self.meta.class_names[class as usize]
    }

    /// Explains an already scaled instance.
    pub fn explain_scaled(
        &self,
        values: &[f64],
        config: &PipelineConfig,
        hide_last_n: usize,
    ) -> Result<Explanation> {
        let reduction = reduce(&self.forest, values, config)?;
        let class = reduction.prediction.class;
        let rule = compose_rule(
            &reduction.ranges,
            &self.forest,
            &self.scaler,
            class,
            self.class_label(class),
            hide_last_n,
        )?;
        Ok(Explanation {
            reduction,
            rule,
            clamped: Vec::new(),
        })
    }

    /// Explains an encoded (unscaled) row.
    pub fn explain(
        &self,
        encoded: &[f64],
        config: &PipelineConfig,
        hide_last_n: usize,
    ) -> Result<Explanation> {
        let instance = self.prepare(encoded)?;
        let mut out = self.explain_scaled(&instance.values, config, hide_last_n)?;
        out.clamped = instance
            .clamped
            .iter()
            .map(|&i| self.forest.features[i].name.clone())
            .collect();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_csv;
    use crate::format::serialize_forest;

    fn meta() -> DatasetMeta {
        DatasetMeta::from_json(
            r#"{"label": "y", "class_names": ["no", "yes"], "features": [
                {"name": "a", "type": "numeric"},
                {"name": "c", "type": "categorical", "encoding": "onehot", "categories": ["r", "g"]}
            ]}"#,
        )
        .unwrap()
    }

    fn data() -> Dataset {
        let mut text = String::from("a,c,y\n");
        for i in 0..40 {
            let c = if i % 3 == 0 { "r" } else { "g" };
            let y = if i >= 20 { "yes" } else { "no" };
            text.push_str(&format!("{i},{c},{y}\n"));
        }
        parse_csv(&text, &meta()).unwrap()
    }

    fn params() -> TrainParams {
        TrainParams {
            n_estimators: 15,
            seed: 4,
            ..Default::default()
        }
    }

    #[test]
    fn round_trip() {
        let b = ModelBundle::train(&data(), meta(), &params()).unwrap();
        let back = ModelBundle::from_bytes(&b.to_bytes()).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.to_bytes(), b.to_bytes());
    }

    #[test]
    fn explains_raw_rows() {
        let b = ModelBundle::train(&data(), meta(), &params()).unwrap();
        let e = b.explain(&[35.0, 0.0, 1.0], &PipelineConfig::default(), 0).unwrap();
        assert_eq!(e.rule.class_label, "yes");
        assert!(e.rule.render().contains(" a "), "{}", e.rule.render());
        let e = b.explain(&[100.0, 0.0, 1.0], &PipelineConfig::default(), 0).unwrap();
        assert_eq!(e.clamped, vec!["a"]);
        let v = e.to_json(&b);
        assert_eq!(v["class"], "yes");
        assert!(v["report"]["path_reduction"].is_number());
    }

    #[test]
    fn bare_forest_accepted() {
        let b = ModelBundle::train(&data(), meta(), &params()).unwrap();
        let bare = ModelBundle::from_bytes(&serialize_forest(&b.forest)).unwrap();
        assert_eq!(bare.forest, b.forest);
        assert_eq!(bare.meta.features.len(), 2);
        assert_eq!(bare.meta.features[1].categories, vec!["r", "g"]);
        assert_eq!(bare.scaler, Scaler::identity(3));
    }

    #[test]
    fn mismatched_parts_rejected() {
        let b = ModelBundle::train(&data(), meta(), &params()).unwrap();
        let mut v = b.to_json();
        v["scaler"] = json!([{"kind": "identity"}]);
        let err = ModelBundle::from_bytes(&serde_json::to_vec(&v).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
        let err = ModelBundle::from_bytes(b"{\"meta\": 1}").unwrap_err();
        assert!(matches!(err, Error::ModelParse { .. }));
    }
}
