//! Gini CART trees stored as flat preorder arrays.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::flow::Label;

/// Splits must reduce weighted Gini impurity by more than this.
pub const MIN_GAIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// `x[feature] <= threshold` goes left (the next node); otherwise to `right`.
    Split {
        feature: usize,
        threshold: f64,
        right: usize,
    },
    /// Training class counts `[benign, malicious]` that reached this leaf.
    Leaf { counts: [usize; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// Serialized node; the right-child offset is implied by preorder layout.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRepr {
    Split { feature: usize, threshold: f64 },
    Leaf { leaf: [usize; 2] },
}

impl Serialize for DecisionTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<NodeRepr> = self
            .nodes
            .iter()
            .map(|n| match *n {
                Node::Split {
                    feature, threshold, ..
                } => NodeRepr::Split { feature, threshold },
                Node::Leaf { counts } => NodeRepr::Leaf { leaf: counts },
            })
            .collect();
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecisionTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = Vec::<NodeRepr>::deserialize(d)?;
        DecisionTree::from_preorder(repr).map_err(serde::de::Error::custom)
    }
}

impl DecisionTree {
    fn from_preorder(repr: Vec<NodeRepr>) -> Result<Self, String> {
        fn walk(
            repr: &[NodeRepr],
            at: usize,
            out: &mut Vec<Node>,
            depth: usize,
        ) -> Result<usize, String> {
            if depth > 4096 {
                return Err("tree too deep".into());
            }
            let node = repr.get(at).ok_or("truncated tree")?;
            match *node {
                NodeRepr::Leaf { leaf } => {
                    out.push(Node::Leaf { counts: leaf });
                    Ok(at + 1)
                }
                NodeRepr::Split { feature, threshold } => {
                    let slot = out.len();
                    out.push(Node::Leaf { counts: [0, 0] });
                    let right = walk(repr, at + 1, out, depth + 1)?;
                    let end = walk(repr, right, out, depth + 1)?;
                    out[slot] = Node::Split {
                        feature,
                        threshold,
                        right,
                    };
                    Ok(end)
                }
            }
        }
        let mut nodes = Vec::with_capacity(repr.len());
        let end = walk(&repr, 0, &mut nodes, 0)?;
        if end != repr.len() {
            return Err("trailing nodes after tree".into());
        }
        Ok(DecisionTree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> (usize, usize) {
            match nodes[at] {
                Node::Leaf { .. } => (0, at + 1),
                Node::Split { right, .. } => {
                    let (l, _) = go(nodes, at + 1);
                    let (r, end) = go(nodes, right);
                    (1 + l.max(r), end)
                }
            }
        }
        go(&self.nodes, 0).0
    }

    /// Leaf class counts for `x` and the number of nodes visited (root included).
    pub fn leaf(&self, x: &[f64]) -> ([usize; 2], usize) {
        let mut at = 0;
        let mut visited = 1;
        loop {
            match self.nodes[at] {
                Node::Leaf { counts } => return (counts, visited),
                Node::Split {
                    feature,
                    threshold,
                    right,
                } => {
                    at = if x[feature] <= threshold {
                        at + 1
                    } else {
                        right
                    };
                    visited += 1;
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        majority(self.leaf(x).0)
    }
}

/// Majority class; ties go to malicious.
pub fn majority(counts: [usize; 2]) -> Label {
    if counts[1] >= counts[0] {
        Label::Malicious
    } else {
        Label::Benign
    }
}

/// Training inputs in column-major layout.
pub struct TrainingView<'a> {
    pub columns: &'a [Vec<f64>],
    pub labels: &'a [u8],
}

#[derive(Clone, Copy, Debug)]
pub struct TreeParams {
    pub max_depth: usize,
    pub features_per_split: usize,
}

/// Grows a tree on `samples` (indices into the view, repeats allowed).
pub fn grow<R: Rng>(
    view: &TrainingView<'_>,
    samples: Vec<usize>,
    params: TreeParams,
    rng: &mut R,
) -> DecisionTree {
    let mut nodes = Vec::new();
    let mut scratch = Vec::with_capacity(samples.len());
    grow_node(view, samples, 0, params, rng, &mut nodes, &mut scratch);
    DecisionTree { nodes }
}

fn class_counts(view: &TrainingView<'_>, samples: &[usize]) -> [usize; 2] {
    let mut c = [0usize; 2];
    for &i in samples {
        c[view.labels[i] as usize] += 1;
    }
    c
}

/// `n * gini` for a node with these counts: `n - sum(c_k^2) / n`.
pub fn weighted_gini(counts: [usize; 2]) -> f64 {
    let n = counts[0] + counts[1];
    if n == 0 {
        return 0.0;
    }
    let sq = (counts[0] * counts[0] + counts[1] * counts[1]) as f64;
    n as f64 - sq / n as f64
}

/// Threshold halfway between two distinct sorted values that still separates them.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

#[derive(Clone, Copy)]
struct Best {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn grow_node<R: Rng>(
    view: &TrainingView<'_>,
    samples: Vec<usize>,
    depth: usize,
    params: TreeParams,
    rng: &mut R,
    nodes: &mut Vec<Node>,
    scratch: &mut Vec<(f64, u8)>,
) {
    let counts = class_counts(view, &samples);
    let n_features = view.columns.len();
    if depth >= params.max_depth || samples.len() < 2 || counts[0] == 0 || counts[1] == 0 {
        nodes.push(Node::Leaf { counts });
        return;
    }

    let m = params.features_per_split.clamp(1, n_features);
    let mut candidates = index::sample(rng, n_features, m).into_vec();
    candidates.sort_unstable();

    let parent = weighted_gini(counts);
    let mut best: Option<Best> = None;
    for &f in &candidates {
        let col = &view.columns[f];
        scratch.clear();
        scratch.extend(samples.iter().map(|&i| (col[i], view.labels[i])));
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0usize; 2];
        for k in 0..scratch.len() - 1 {
            left[scratch[k].1 as usize] += 1;
            let (lo, hi) = (scratch[k].0, scratch[k + 1].0);
            if lo == hi {
                continue;
            }
            let right = [counts[0] - left[0], counts[1] - left[1]];
            let impurity = weighted_gini(left) + weighted_gini(right);
            if best.is_none_or(|b| impurity < b.impurity) {
                best = Some(Best {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    impurity,
                });
            }
        }
    }

    let Some(best) = best.filter(|b| parent - b.impurity > MIN_GAIN) else {
        nodes.push(Node::Leaf { counts });
        return;
    };

    let col = &view.columns[best.feature];
    let (left, right): (Vec<usize>, Vec<usize>) =
        samples.into_iter().partition(|&i| col[i] <= best.threshold);
    let slot = nodes.len();
    nodes.push(Node::Leaf { counts });
    grow_node(view, left, depth + 1, params, rng, nodes, scratch);
    let right_at = nodes.len();
    grow_node(view, right, depth + 1, params, rng, nodes, scratch);
    nodes[slot] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        right: right_at,
    };
}
