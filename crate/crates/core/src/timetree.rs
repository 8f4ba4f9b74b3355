//! Time-tree induction.
//!
//! A sequence of valued items is grouped bottom-up, left to right: in each pass
//! adjacent items are joined whenever the selected strong/weak relation holds
//! between them, and the joined node inherits the strength of its strong
//! child. Passes repeat until nothing joins; leftover top-level items are
//! gathered under a single root.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::aems::{zscore, Spectrum};
use crate::annot::DurationSequence;
use crate::error::{degenerate, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// weak before strong
    Iambic,
    /// strong before weak
    Trochaic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    HigherIsStronger,
    LowerIsStronger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arity {
    Binary,
    Nary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub relation: Relation,
    pub polarity: Polarity,
    pub arity: Arity,
}

impl TreeParams {
    pub fn new(relation: Relation, polarity: Polarity) -> Self {
        Self {
            relation,
            polarity,
            arity: Arity::Binary,
        }
    }

    fn key(&self, strength: f64) -> f64 {
        match self.polarity {
            Polarity::HigherIsStronger => strength,
            Polarity::LowerIsStronger => -strength,
        }
    }

    /// Whether `left` and `right` (adjacent, in order) join under the relation.
    fn joins(&self, left: f64, right: f64) -> bool {
        let (l, r) = (self.key(left), self.key(right));
        match self.relation {
            Relation::Iambic => l < r,
            Relation::Trochaic => l > r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    #[serde(rename = "s")]
    Strong,
    #[serde(rename = "w")]
    Weak,
}

impl Mark {
    fn as_str(self) -> &'static str {
        match self {
            Mark::Strong => "s",
            Mark::Weak => "w",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeTree {
    Leaf { label: String, value: f64 },
    Node { children: Vec<(Mark, TimeTree)>, strength: f64 },
}

impl TimeTree {
    pub fn leaf(label: impl Into<String>, value: f64) -> Self {
        TimeTree::Leaf {
            label: label.into(),
            value,
        }
    }

    pub fn strength(&self) -> f64 {
        match self {
            TimeTree::Leaf { value, .. } => *value,
            TimeTree::Node { strength, .. } => *strength,
        }
    }

    /// Leaf labels in left-to-right order.
    pub fn fringe(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_fringe(&mut out);
        out
    }

    fn collect_fringe<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            TimeTree::Leaf { label, .. } => out.push(label),
            TimeTree::Node { children, .. } => {
                for (_, c) in children {
                    c.collect_fringe(out);
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TimeTree::Leaf { .. } => 0,
            TimeTree::Node { children, .. } => {
                1 + children.iter().map(|(_, c)| c.depth()).max().unwrap_or(0)
            }
        }
    }

    /// Every internal node has at least two children, exactly one marked strong,
    /// and carries that child's strength.
    pub fn is_well_formed(&self) -> bool {
        match self {
            TimeTree::Leaf { .. } => true,
            TimeTree::Node { children, strength } => {
                let strong: Vec<&TimeTree> = children
                    .iter()
                    .filter(|(m, _)| *m == Mark::Strong)
                    .map(|(_, c)| c)
                    .collect();
                children.len() >= 2
                    && strong.len() == 1
                    && strong[0].strength() == *strength
                    && children.iter().all(|(_, c)| c.is_well_formed())
            }
        }
    }

    /// Parenthesized form with `r`/`s`/`w` marks and leaf labels only.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        match self {
            TimeTree::Leaf { label, .. } => out.push_str(label),
            TimeTree::Node { children, .. } => {
                out.push_str("(r");
                for (m, c) in children {
                    out.push(' ');
                    c.write_marked(*m, &mut out);
                }
                out.push(')');
            }
        }
        out
    }

    fn write_marked(&self, mark: Mark, out: &mut String) {
        match self {
            TimeTree::Leaf { label, .. } => {
                let _ = write!(out, "({} {})", mark.as_str(), label);
            }
            TimeTree::Node { children, .. } => {
                out.push('(');
                out.push_str(mark.as_str());
                for (m, c) in children {
                    out.push(' ');
                    c.write_marked(*m, out);
                }
                out.push(')');
            }
        }
    }

    /// JSON-friendly view: `{mark, label?, value?, children?}`; the root is marked `r`.
    pub fn to_json_tree(&self) -> JsonTree {
        self.json_with_mark("r")
    }

    fn json_with_mark(&self, mark: &str) -> JsonTree {
        match self {
            TimeTree::Leaf { label, value } => JsonTree {
                mark: mark.to_string(),
                label: Some(label.clone()),
                value: Some(*value),
                children: None,
            },
            TimeTree::Node { children, strength } => JsonTree {
                mark: mark.to_string(),
                label: None,
                value: Some(*strength),
                children: Some(
                    children
                        .iter()
                        .map(|(m, c)| c.json_with_mark(m.as_str()))
                        .collect(),
                ),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonTree {
    pub mark: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<JsonTree>>,
}

/// Result of an induction run, with the number of passes performed.
#[derive(Debug, Clone, PartialEq)]
pub struct Induction {
    pub tree: TimeTree,
    pub passes: usize,
}

fn join(params: &TreeParams, run: Vec<TimeTree>) -> TimeTree {
    let strong = match params.relation {
        Relation::Iambic => run.len() - 1,
        Relation::Trochaic => 0,
    };
    let strength = run[strong].strength();
    TimeTree::Node {
        children: run
            .into_iter()
            .enumerate()
            .map(|(i, t)| (if i == strong { Mark::Strong } else { Mark::Weak }, t))
            .collect(),
        strength,
    }
}

fn pass(params: &TreeParams, items: Vec<TimeTree>) -> (Vec<TimeTree>, bool) {
    let mut out = Vec::with_capacity(items.len());
    let mut joined = false;
    let mut iter = items.into_iter().peekable();
    while let Some(first) = iter.next() {
        let mut run = vec![first];
        while let Some(next) = iter.peek() {
            let last = run.last().unwrap().strength();
            if !params.joins(last, next.strength()) {
                break;
            }
            run.push(iter.next().unwrap());
            if params.arity == Arity::Binary {
                break;
            }
        }
        if run.len() > 1 {
            joined = true;
            out.push(join(params, run));
        } else {
            out.extend(run);
        }
    }
    (out, joined)
}

/// Induce a tree over `(label, value)` items and report the pass count.
pub fn induce_items(items: &[(String, f64)], params: &TreeParams) -> Result<Induction> {
    if items.is_empty() {
        return Err(degenerate("time-tree induction needs at least one item"));
    }
    let mut level: Vec<TimeTree> = items
        .iter()
        .map(|(l, v)| TimeTree::leaf(l.clone(), *v))
        .collect();
    let mut passes = 0;
    while level.len() > 1 {
        let (next, joined) = pass(params, level);
        passes += 1;
        level = next;
        if !joined {
            break;
        }
    }
    let tree = if level.len() == 1 {
        level.pop().unwrap()
    } else {
        // strongest remaining item (first on ties) heads the root
        let strong = (0..level.len())
            .fold(0, |best, i| {
                if params.key(level[i].strength()) > params.key(level[best].strength()) {
                    i
                } else {
                    best
                }
            });
        let strength = level[strong].strength();
        TimeTree::Node {
            children: level
                .into_iter()
                .enumerate()
                .map(|(i, t)| (if i == strong { Mark::Strong } else { Mark::Weak }, t))
                .collect(),
            strength,
        }
    };
    Ok(Induction { tree, passes })
}

pub fn induce_time_tree(seq: &DurationSequence, params: &TreeParams) -> Result<TimeTree> {
    induce_items(&seq.items, params).map(|i| i.tree)
}

/// Compact frequency label: up to three decimals, trailing zeros dropped.
pub fn hz_label(hz: f64) -> String {
    let s = format!("{hz:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Hierarchy over spectral bins: leaves are bin frequencies valued by their
/// z-scored magnitudes, grouped with higher-is-stronger polarity.
pub fn induce_spectral_hierarchy(spec: &Spectrum, relation: Relation, arity: Arity) -> Result<TimeTree> {
    if spec.is_empty() {
        return Err(degenerate("empty spectrum"));
    }
    let z = zscore(&spec.magnitudes)?;
    let items: Vec<(String, f64)> = z
        .iter()
        .enumerate()
        .map(|(k, &v)| (hz_label(spec.freq(k)), v))
        .collect();
    let params = TreeParams {
        relation,
        polarity: Polarity::HigherIsStronger,
        arity,
    };
    induce_items(&items, &params).map(|i| i.tree)
}
