//! Forest JSON interchange format.
//!
//! ```text
//! {"n_estimators": 2,
//!  "features": [{"name": "f1", "kind": "numeric", "min": -1.0, "max": 1.0}],
//!  "importances": [1.0],
//!  "trees": [{"feature": 0, "threshold": 0.5, "left": {"leaf": [3, 0]}, "right": {"leaf": [0, 4]}},
//!            {"leaf": [1, 2]}]}
//! ```
//!
//! Feature kinds are `numeric`, `onehot` (with `group` and `category`) and
//! `ordinal` (with `categories` in code order). Writing goes through serde;
//! reading walks a `serde_json::Value` so errors can name the offending node.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::forest::{FeatureKind, FeatureMeta, Forest, TreeNode};

#[derive(Serialize)]
struct ForestDoc<'a> {
    n_estimators: usize,
    features: Vec<FeatureDoc<'a>>,
    importances: &'a [f64],
    trees: Vec<NodeDoc>,
}

#[derive(Serialize)]
struct FeatureDoc<'a> {
    name: &'a str,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    category: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    categories: Option<&'a [String]>,
    min: f64,
    max: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum NodeDoc {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<NodeDoc>,
        right: Box<NodeDoc>,
    },
    Leaf {
        leaf: [u64; 2],
    },
}

impl From<&TreeNode> for NodeDoc {
    fn from(node: &TreeNode) -> Self {
        match node {
            TreeNode::Leaf { class_counts } => NodeDoc::Leaf {
                leaf: *class_counts,
            },
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => NodeDoc::Internal {
                feature: *feature,
                threshold: *threshold,
                left: Box::new(left.as_ref().into()),
                right: Box::new(right.as_ref().into()),
            },
        }
    }
}

fn feature_doc(f: &FeatureMeta) -> FeatureDoc<'_> {
    let mut doc = FeatureDoc {
        name: &f.name,
        kind: "numeric",
        group: None,
        category: None,
        categories: None,
        min: f.global_min,
        max: f.global_max,
    };
    match &f.kind {
        FeatureKind::Numeric => {}
        FeatureKind::OneHotMember { group, category } => {
            doc.kind = "onehot";
            doc.group = Some(group);
            doc.category = Some(category);
        }
        FeatureKind::Ordinal { categories } => {
            doc.kind = "ordinal";
            doc.categories = Some(categories);
        }
    }
    doc
}

/// Forest as a JSON value (used when embedding the forest in a larger document).
pub fn forest_to_value(forest: &Forest) -> Value {
    serde_json::to_value(doc(forest)).expect("forest documents always serialize")
}

fn doc(forest: &Forest) -> ForestDoc<'_> {
    ForestDoc {
        n_estimators: forest.n_estimators(),
        features: forest.features.iter().map(feature_doc).collect(),
        importances: &forest.importances,
        trees: forest.trees.iter().map(NodeDoc::from).collect(),
    }
}

/// Serializes to compact UTF-8 JSON. Floats use shortest round-trip notation.
pub fn serialize_forest(forest: &Forest) -> Vec<u8> {
    serde_json::to_vec(&doc(forest)).expect("forest documents always serialize")
}

pub fn deserialize_forest(bytes: &[u8]) -> Result<Forest> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::parse("$", e.to_string()))?;
    forest_from_value(&value, "$")
}

pub fn forest_from_value(value: &Value, at: &str) -> Result<Forest> {
    let obj = object(value, at)?;
    let n_estimators = uint(field(obj, "n_estimators", at)?, &format!("{at}.n_estimators"))?;

    let features = array(field(obj, "features", at)?, &format!("{at}.features"))?
        .iter()
        .enumerate()
        .map(|(i, f)| parse_feature(f, &format!("{at}.features[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let importances = array(field(obj, "importances", at)?, &format!("{at}.importances"))?
        .iter()
        .enumerate()
        .map(|(i, v)| real(v, &format!("{at}.importances[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let trees = array(field(obj, "trees", at)?, &format!("{at}.trees"))?
        .iter()
        .enumerate()
        .map(|(i, t)| parse_node(t, &format!("{at}.trees[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    if trees.len() as u64 != n_estimators {
        return Err(Error::parse(
            &format!("{at}.n_estimators"),
            format!("declares {n_estimators} trees but {} present", trees.len()),
        ));
    }
    Forest::new(trees, features, importances)
}

fn parse_feature(value: &Value, at: &str) -> Result<FeatureMeta> {
    let obj = object(value, at)?;
    let name = string(field(obj, "name", at)?, &format!("{at}.name"))?.to_string();
    let kind_name = string(field(obj, "kind", at)?, &format!("{at}.kind"))?;
    let kind = match kind_name {
        "numeric" => FeatureKind::Numeric,
        "onehot" => FeatureKind::OneHotMember {
            group: string(field(obj, "group", at)?, &format!("{at}.group"))?.to_string(),
            category: string(field(obj, "category", at)?, &format!("{at}.category"))?.to_string(),
        },
        "ordinal" => {
            let cats_at = format!("{at}.categories");
            let categories = array(field(obj, "categories", at)?, &cats_at)?
                .iter()
                .enumerate()
                .map(|(i, c)| string(c, &format!("{cats_at}[{i}]")).map(str::to_string))
                .collect::<Result<Vec<_>>>()?;
            FeatureKind::Ordinal { categories }
        }
        other => {
            return Err(Error::parse(
                &format!("{at}.kind"),
                format!("unknown feature kind {other:?}"),
            ))
        }
    };
    Ok(FeatureMeta {
        name,
        kind,
        global_min: real(field(obj, "min", at)?, &format!("{at}.min"))?,
        global_max: real(field(obj, "max", at)?, &format!("{at}.max"))?,
    })
}

fn parse_node(value: &Value, at: &str) -> Result<TreeNode> {
    let obj = object(value, at)?;
    if let Some(leaf) = obj.get("leaf") {
        let leaf_at = format!("{at}.leaf");
        let counts = array(leaf, &leaf_at)?;
        if counts.len() != 2 {
            return Err(Error::parse(&leaf_at, "expected two class counts"));
        }
        return Ok(TreeNode::leaf(
            uint(&counts[0], &format!("{leaf_at}[0]"))?,
            uint(&counts[1], &format!("{leaf_at}[1]"))?,
        ));
    }
    if !obj.contains_key("feature") && !obj.contains_key("threshold") {
        return Err(Error::parse(at, "node is neither a leaf nor a split"));
    }
    let feature = uint(field(obj, "feature", at)?, &format!("{at}.feature"))? as usize;
    let threshold = real(field(obj, "threshold", at)?, &format!("{at}.threshold"))?;
    let left = parse_node(field(obj, "left", at)?, &format!("{at}.left"))?;
    let right = parse_node(field(obj, "right", at)?, &format!("{at}.right"))?;
    Ok(TreeNode::split(feature, threshold, left, right))
}

pub(crate) fn field<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(at, format!("missing field {key:?}")))
}

pub(crate) fn object<'a>(value: &'a Value, at: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| Error::parse(at, "expected an object"))
}

pub(crate) fn array<'a>(value: &'a Value, at: &str) -> Result<&'a Vec<Value>> {
    value
        .as_array()
        .ok_or_else(|| Error::parse(at, "expected an array"))
}

pub(crate) fn string<'a>(value: &'a Value, at: &str) -> Result<&'a str> {
    value
        .as_str()
        .ok_or_else(|| Error::parse(at, "expected a string"))
}

pub(crate) fn real(value: &Value, at: &str) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| Error::parse(at, "expected a number"))
}

pub(crate) fn uint(value: &Value, at: &str) -> Result<u64> {
    value
        .as_u64()
        .ok_or_else(|| Error::parse(at, "expected a non-negative integer"))
}
