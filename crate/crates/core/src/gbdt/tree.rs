//! Exact greedy regression trees on second-order statistics.
//!
//! Trees grow level by level. Every feature is sorted once up front and each
//! level is a single pass over those sorted row lists, so a level costs
//! `O(rows × features)` no matter how many nodes are open.

use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};

/// Splits must beat the parent score by this relative margin.
const MIN_RELATIVE_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        weight: f64,
    },
    Split {
        feature: usize,
        /// Rows with `value < threshold` go left.
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] < *threshold { left } else { right },
            }
        }
    }

    pub fn predict_at(&self, x: &FeatureMatrix, row: usize) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x.value(row, *feature) < *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        match self {
            TreeNode::Leaf { weight } => *weight *= factor,
            TreeNode::Split { left, right, .. } => {
                left.scale(factor);
                right.scale(factor);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub threshold: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub l2_lambda: f64,
}

pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    let w = -g / (h + lambda);
    if w.is_finite() {
        w
    } else {
        0.0
    }
}

pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> f64 {
    let g = gl + gr;
    let h = hl + hr;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda))
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m <= a {
        b
    } else {
        m
    }
}

fn gain_floor(g: f64, h: f64, lambda: f64) -> f64 {
    let parent = g * g / (h + lambda);
    MIN_RELATIVE_GAIN * (1.0 + if parent.is_finite() { parent } else { 0.0 })
}

/// Best threshold for a single feature by exhaustive scan over midpoints of
/// sorted distinct values.
pub fn best_split(
    feature_values: &[f64],
    gradients: &[f64],
    hessians: &[f64],
    min_child_weight: f64,
    l2_lambda: f64,
) -> Option<Split> {
    let n = feature_values.len();
    if n < 2 || gradients.len() != n || hessians.len() != n {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| feature_values[a].total_cmp(&feature_values[b]));
    let g_total: f64 = gradients.iter().sum();
    let h_total: f64 = hessians.iter().sum();
    let floor = gain_floor(g_total, h_total, l2_lambda);
    let (mut gl, mut hl) = (0.0, 0.0);
    let mut best: Option<Split> = None;
    for w in 0..n - 1 {
        let r = order[w];
        gl += gradients[r];
        hl += hessians[r];
        let (here, next) = (feature_values[r], feature_values[order[w + 1]]);
        if next <= here {
            continue;
        }
        let (gr, hr) = (g_total - gl, h_total - hl);
        if hl < min_child_weight || hr < min_child_weight {
            continue;
        }
        let gain = split_gain(gl, hl, gr, hr, l2_lambda);
        if gain > floor && best.is_none_or(|b| gain > b.gain) {
            best = Some(Split {
                threshold: midpoint(here, next),
                gain,
            });
        }
    }
    best
}

/// Per-feature row orderings, computed once per training matrix.
#[derive(Debug, Clone)]
pub struct Presorted {
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &FeatureMatrix) -> Self {
        let order = x
            .columns()
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        Self { order }
    }
}

struct BuildNode {
    g: f64,
    h: f64,
    split: Option<(usize, f64, usize, usize)>,
}

#[derive(Clone, Copy)]
struct ScanState {
    gl: f64,
    hl: f64,
    last: f64,
    started: bool,
    best_gain: f64,
    best_feature: usize,
    best_threshold: f64,
}

const NOT_IN_TREE: u32 = u32::MAX;

/// Grows one tree over `rows`, considering only features in `cols`.
pub fn fit_tree(
    x: &FeatureMatrix,
    gradients: &[f64],
    hessians: &[f64],
    params: &TreeParams,
    rows: &[usize],
    cols: &[usize],
) -> Result<TreeNode> {
    fit_tree_presorted(x, &Presorted::new(x), gradients, hessians, params, rows, cols)
}

pub fn fit_tree_presorted(
    x: &FeatureMatrix,
    presorted: &Presorted,
    gradients: &[f64],
    hessians: &[f64],
    params: &TreeParams,
    rows: &[usize],
    cols: &[usize],
) -> Result<TreeNode> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::InvalidArgument("row and column masks must be non-empty".into()));
    }
    let lambda = params.l2_lambda;
    let mut node_of = vec![NOT_IN_TREE; x.n_rows()];
    let (mut g0, mut h0) = (0.0, 0.0);
    for &r in rows {
        node_of[r] = 0;
        g0 += gradients[r];
        h0 += hessians[r];
    }
    let mut nodes = vec![BuildNode {
        g: g0,
        h: h0,
        split: None,
    }];
    let mut frontier: Vec<usize> = vec![0];
    // frontier position of each node, NOT_IN_TREE when closed
    let mut slot_of = vec![0u32];

    for _depth in 0..params.max_depth {
        if frontier.is_empty() {
            break;
        }
        let mut states: Vec<ScanState> = frontier
            .iter()
            .map(|&nid| ScanState {
                gl: 0.0,
                hl: 0.0,
                last: 0.0,
                started: false,
                best_gain: gain_floor(nodes[nid].g, nodes[nid].h, lambda),
                best_feature: usize::MAX,
                best_threshold: 0.0,
            })
            .collect();
        for &f in cols {
            let column = x.column(f);
            for s in states.iter_mut() {
                s.gl = 0.0;
                s.hl = 0.0;
                s.started = false;
            }
            for &r in &presorted.order[f] {
                let r = r as usize;
                let nid = node_of[r];
                if nid == NOT_IN_TREE {
                    continue;
                }
                let slot = slot_of[nid as usize];
                if slot == NOT_IN_TREE {
                    continue;
                }
                let s = &mut states[slot as usize];
                let v = column[r];
                if s.started && v > s.last {
                    let node = &nodes[frontier[slot as usize]];
                    let (gr, hr) = (node.g - s.gl, node.h - s.hl);
                    if s.hl >= params.min_child_weight && hr >= params.min_child_weight {
                        let gain = split_gain(s.gl, s.hl, gr, hr, lambda);
                        if gain > s.best_gain {
                            s.best_gain = gain;
                            s.best_feature = f;
                            s.best_threshold = midpoint(s.last, v);
                        }
                    }
                }
                s.gl += gradients[r];
                s.hl += hessians[r];
                s.last = v;
                s.started = true;
            }
        }

        let mut next = Vec::new();
        for (slot, &nid) in frontier.iter().enumerate() {
            let s = states[slot];
            if s.best_feature == usize::MAX {
                continue;
            }
            let left = nodes.len();
            nodes.push(BuildNode {
                g: 0.0,
                h: 0.0,
                split: None,
            });
            nodes.push(BuildNode {
                g: 0.0,
                h: 0.0,
                split: None,
            });
            nodes[nid].split = Some((s.best_feature, s.best_threshold, left, left + 1));
            next.push(left);
            next.push(left + 1);
        }
        for &nid in &frontier {
            slot_of[nid] = NOT_IN_TREE;
        }
        if next.is_empty() {
            break;
        }
        slot_of.resize(nodes.len(), NOT_IN_TREE);
        for &r in rows {
            let nid = node_of[r] as usize;
            if let Some((f, t, left, right)) = nodes[nid].split {
                let child = if x.value(r, f) < t { left } else { right };
                node_of[r] = child as u32;
                nodes[child].g += gradients[r];
                nodes[child].h += hessians[r];
            }
        }
        for (i, &nid) in next.iter().enumerate() {
            slot_of[nid] = i as u32;
        }
        frontier = next;
    }
    Ok(assemble(&nodes, 0, lambda))
}

fn assemble(nodes: &[BuildNode], id: usize, lambda: f64) -> TreeNode {
    let n = &nodes[id];
    match n.split {
        None => TreeNode::Leaf {
            weight: leaf_weight(n.g, n.h, lambda),
        },
        Some((feature, threshold, l, r)) => TreeNode::Split {
            feature,
            threshold,
            left: Box::new(assemble(nodes, l, lambda)),
            right: Box::new(assemble(nodes, r, lambda)),
        },
    }
}
