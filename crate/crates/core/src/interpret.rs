//! Turns feature ranges into a readable rule.
//!
//! Numeric ranges are mapped back to original units. One-hot member ranges
//! collapse into a single `name^c = category` clause, ordinal ranges into the
//! set of categories whose codes fall inside.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::forest::{FeatureKind, Forest};
use crate::path::FeatureRange;
use crate::scale::{FeatureScale, Scaler};

/// Slack used when snapping ordinal bounds to integer codes.
const ORDINAL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseKind {
    Numeric,
    Categorical,
    Ordinal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleClause {
    pub feature: String,
    pub kind: ClauseKind,
    /// Original units (code units for ordinal features).
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
    pub category: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    pub importance: f64,
    pub hidden: bool,
}

impl RuleClause {
    pub fn render(&self) -> String {
        match self.kind {
            ClauseKind::Numeric => format!(
                "{} \u{2264} {} \u{2264} {}",
                fmt_bound(self.lower),
                self.feature,
                fmt_bound(self.upper)
            ),
            ClauseKind::Categorical => format!(
                "{}^c = {}",
                self.feature,
                self.category.as_deref().unwrap_or_default()
            ),
            ClauseKind::Ordinal => match self.categories.as_slice() {
                [one] => format!("{}^c = {one}", self.feature),
                many => format!("{}^c = [{}]", self.feature, many.join(", ")),
            },
        }
    }
}

/// Other categories of a one-hot group whose asserted category is shown.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Alternatives {
    /// Categories the explained paths rule out; switching to them may change the outcome.
    pub may_affect: Vec<String>,
    /// Categories left unconstrained by the explained paths.
    pub preserves: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    /// Descending importance.
    pub clauses: Vec<RuleClause>,
    pub class: u8,
    pub class_label: String,
    /// Keyed by one-hot group name.
    pub alternatives: BTreeMap<String, Alternatives>,
}

impl Rule {
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .clauses
            .iter()
            .filter(|c| !c.hidden)
            .map(RuleClause::render)
            .collect();
        let hidden = self.clauses.iter().filter(|c| c.hidden).count();
        if hidden > 0 {
            parts.push(format!("[other {hidden} feature-ranges]"));
        }
        if parts.is_empty() {
            format!("if true then {}", self.class_label)
        } else {
            format!("if {} then {}", parts.join(" and "), self.class_label)
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "clauses": self.clauses,
            "class": self.class_label,
            "alternatives": self.alternatives,
        })
    }
}

/// Two decimals with trailing zeros dropped.
pub fn fmt_bound(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OneHotMapping {
    pub asserted: Option<String>,
    pub may_affect: Vec<String>,
    pub preserves: Vec<String>,
}

/// Classifies the members of one one-hot group. `members` pairs every
/// category with its range, `None` when no explained path tests it.
/// A range that excludes 0 asserts its category, one that excludes 1 rules
/// it out, anything else leaves it free.
pub fn map_onehot(group: &str, members: &[(String, Option<FeatureRange>)]) -> Result<OneHotMapping> {
    let mut out = OneHotMapping::default();
    for (category, range) in members {
        match range {
            Some(r) if !r.contains(0.0) && r.contains(1.0) => {
                if let Some(first) = &out.asserted {
                    return Err(Error::InconsistentOneHot {
                        group: group.to_string(),
                        first: first.clone(),
                        second: category.clone(),
                    });
                }
                out.asserted = Some(category.clone());
            }
            Some(r) if !r.contains(1.0) => out.may_affect.push(category.clone()),
            _ => out.preserves.push(category.clone()),
        }
    }
    Ok(out)
}

/// Categories whose integer codes lie in the scaled range `(lower, upper]`.
/// Bounds are snapped inward to whole codes.
pub fn map_ordinal(
    name: &str,
    range: &FeatureRange,
    categories: &[String],
    scale: &FeatureScale,
) -> Result<Vec<String>> {
    let lo = scale.inverse(range.lower);
    let hi = scale.inverse(range.upper);
    let first = (lo - ORDINAL_EPS).ceil().max(0.0);
    let last = (hi + ORDINAL_EPS).floor();
    let picked: Vec<String> = categories
        .iter()
        .enumerate()
        .filter(|&(code, _)| (code as f64) >= first && (code as f64) <= last)
        .map(|(_, c)| c.clone())
        .collect();
    if picked.is_empty() {
        return Err(Error::EmptyOrdinalRange {
            feature: name.to_string(),
            lower: lo,
            upper: hi,
        });
    }
    Ok(picked)
}

/// Builds the rule for `ranges` (sorted by feature, as produced by
/// `intersect_ranges`). The `hide_last_n` least important clauses are
/// collapsed in the rendered text; at least one clause always stays visible.
pub fn compose_rule(
    ranges: &[FeatureRange],
    forest: &Forest,
    scaler: &Scaler,
    class: u8,
    class_label: &str,
    hide_last_n: usize,
) -> Result<Rule> {
    if scaler.len() != forest.n_features() {
        return Err(Error::DimensionMismatch {
            expected: forest.n_features(),
            got: scaler.len(),
        });
    }
    // (first feature index, clause); the index breaks importance ties
    let mut clauses: Vec<(usize, RuleClause)> = Vec::new();
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();

    for r in ranges {
        let meta = &forest.features[r.feature];
        let scale = &scaler.scales[r.feature];
        match &meta.kind {
            FeatureKind::Numeric => clauses.push((
                r.feature,
                RuleClause {
                    feature: meta.name.clone(),
                    kind: ClauseKind::Numeric,
                    lower: scale.inverse(r.lower),
                    upper: scale.inverse(r.upper),
                    lower_open: r.lower > meta.global_min,
                    upper_open: false,
                    category: None,
                    categories: Vec::new(),
                    importance: forest.importances[r.feature],
                    hidden: false,
                },
            )),
            FeatureKind::Ordinal { categories } => clauses.push((
                r.feature,
                RuleClause {
                    feature: meta.name.clone(),
                    kind: ClauseKind::Ordinal,
                    lower: scale.inverse(r.lower),
                    upper: scale.inverse(r.upper),
                    lower_open: r.lower > meta.global_min,
                    upper_open: false,
                    category: None,
                    categories: map_ordinal(&meta.name, r, categories, scale)?,
                    importance: forest.importances[r.feature],
                    hidden: false,
                },
            )),
            FeatureKind::OneHotMember { group, .. } => {
                groups.entry(group.as_str()).or_insert(r.feature);
            }
        }
    }

    let mut alternatives = BTreeMap::new();
    for (&group, &first) in &groups {
        let mut importance = 0.0;
        let mut members = Vec::new();
        for (i, meta) in forest.features.iter().enumerate() {
            if let FeatureKind::OneHotMember { group: g, category } = &meta.kind {
                if g == group {
                    importance += forest.importances[i];
                    let range = ranges.iter().find(|r| r.feature == i).copied();
                    members.push((category.clone(), range));
                }
            }
        }
        let mapping = map_onehot(group, &members)?;
        if let Some(category) = mapping.asserted {
            let (_, r) = members.iter().find(|(c, _)| *c == category).unwrap();
            let r = r.expect("asserted member has a range");
            clauses.push((
                first,
                RuleClause {
                    feature: group.to_string(),
                    kind: ClauseKind::Categorical,
                    lower: r.lower,
                    upper: r.upper,
                    lower_open: true,
                    upper_open: false,
                    category: Some(category),
                    categories: Vec::new(),
                    importance,
                    hidden: false,
                },
            ));
            alternatives.insert(
                group.to_string(),
                Alternatives {
                    may_affect: mapping.may_affect,
                    preserves: mapping.preserves,
                },
            );
        }
    }

    clauses.sort_by(|a, b| b.1.importance.total_cmp(&a.1.importance).then(a.0.cmp(&b.0)));
    let mut clauses: Vec<RuleClause> = clauses.into_iter().map(|(_, c)| c).collect();
    let hide = hide_last_n.min(clauses.len().saturating_sub(1));
    let n = clauses.len();
    for c in &mut clauses[n - hide..] {
        c.hidden = true;
    }
    Ok(Rule {
        clauses,
        class,
        class_label: class_label.to_string(),
        alternatives,
    })
}
