//! Depth-bounded decision trees grown greedily on Gini impurity.

use std::fs;
use std::path::Path;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::dataio::BinDataset;
use crate::error::{Error, Result};
use crate::formula::{DnfFormula, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    /// `left` is taken when the feature is 0, `right` when it is 1.
    Split {
        feature: usize,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub max_depth: usize,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub label_for_positive: String,
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

/// Σ over children of (p² + q²) / n as an exact fraction (numerator, denominator).
fn split_score(l: (u64, u64), r: (u64, u64)) -> (u128, u128) {
    let sq = |(p, q): (u64, u64)| (p as u128).pow(2) + (q as u128).pow(2);
    let (nl, nr) = ((l.0 + l.1) as u128, (r.0 + r.1) as u128);
    (sq(l) * nr + sq(r) * nl, nl * nr)
}

fn gt(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 > b.0 * a.1
}

struct Grower<'a> {
    ds: &'a BinDataset,
    max_depth: usize,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> (u64, u64) {
        let pos = idx.iter().filter(|&&i| self.ds.label(i)).count() as u64;
        (pos, idx.len() as u64 - pos)
    }

    fn grow(&mut self, idx: Vec<usize>, used: &mut FixedBitSet, depth: usize) -> usize {
        let (pos, neg) = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { leaf: pos > neg });
        if depth == self.max_depth || pos == 0 || neg == 0 {
            return id;
        }
        let n = (pos + neg) as u128;
        let mut best: (u128, u128) = ((pos as u128).pow(2) + (neg as u128).pow(2), n);
        let mut best_feature = None;
        for f in 0..self.ds.n_features() {
            if used.contains(f) {
                continue;
            }
            let (ones, zeros): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.ds.row(i).contains(f));
            if ones.is_empty() || zeros.is_empty() {
                continue;
            }
            let score = split_score(self.counts(&zeros), self.counts(&ones));
            if gt(score, best) {
                best = score;
                best_feature = Some(f);
            }
        }
        let Some(feature) = best_feature else {
            return id;
        };
        let (ones, zeros): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.ds.row(i).contains(feature));
        used.insert(feature);
        let left = self.grow(zeros, used, depth + 1);
        let right = self.grow(ones, used, depth + 1);
        used.set(feature, false);
        self.nodes[id] = Node::Split { feature, left, right };
        id
    }
}

/// Grows a tree of depth at most `max_depth`. Each node takes the split with
/// the lowest weighted Gini impurity (lowest feature index on ties) and stays
/// a leaf when no split lowers the impurity. Leaves predict the majority
/// class, class 0 on ties.
pub fn fit_tree(ds: &BinDataset, max_depth: usize) -> Result<DecisionTree> {
    if ds.n_examples() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut g = Grower { ds, max_depth, nodes: Vec::new() };
    let mut used = FixedBitSet::with_capacity(ds.n_features());
    g.grow((0..ds.n_examples()).collect(), &mut used, 0);
    Ok(DecisionTree {
        max_depth,
        n_features: ds.n_features(),
        feature_names: ds.feature_names().to_vec(),
        label_for_positive: ds.label_for_positive().to_string(),
        nodes: g.nodes,
    })
}

impl DecisionTree {
    pub fn predict(&self, row: &FixedBitSet) -> bool {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { leaf } => return leaf,
                Node::Split { feature, left, right } => id = if row.contains(feature) { right } else { left },
            }
        }
    }

    pub fn count_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &DecisionTree, id: usize) -> usize {
            match t.nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(t, left).max(rec(t, right)),
            }
        }
        rec(self, 0)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidModel("tree has no nodes".into()));
        }
        if self.feature_names.len() != self.n_features {
            return Err(Error::InvalidModel("feature name count differs from n_features".into()));
        }
        for (id, n) in self.nodes.iter().enumerate() {
            if let Node::Split { feature, left, right } = *n {
                if feature >= self.n_features
                    || left <= id
                    || right <= id
                    || left >= self.nodes.len()
                    || right >= self.nodes.len()
                {
                    return Err(Error::InvalidModel(format!("malformed split at node {id}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: DecisionTree = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// One term per root-to-leaf path, split into (positive leaves, negative leaves).
pub fn tree_to_dnfs(tree: &DecisionTree) -> (DnfFormula, DnfFormula) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut stack = vec![(0usize, Vec::<Literal>::new())];
    while let Some((id, path)) = stack.pop() {
        match tree.nodes[id] {
            Node::Leaf { leaf } => {
                let t = Term::new(path);
                if leaf {
                    pos.push(t)
                } else {
                    neg.push(t)
                }
            }
            Node::Split { feature, left, right } => {
                let mut l = path.clone();
                l.push(Literal::neg(feature));
                let mut r = path;
                r.push(Literal::pos(feature));
                stack.push((right, r));
                stack.push((left, l));
            }
        }
    }
    pos.sort();
    neg.sort();
    let build = |terms| DnfFormula::new(tree.n_features, terms).expect("split features are in range");
    (build(pos), build(neg))
}
