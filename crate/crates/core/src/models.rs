//! Name-addressed registry of the learners compared by the benchmark.

use std::collections::BTreeMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::dataio::BinDataset;
use crate::dtree::{fit_tree, DecisionTree};
use crate::error::{Error, Result};
use crate::learner::{train, LearnerConfig};
use crate::nested::NestedModel;

/// A fitted model over boolean feature rows.
pub trait Classifier: Send + Sync {
    fn predict(&self, row: &FixedBitSet) -> bool;
    /// Leaves for trees, expanded terms for DNF models.
    fn size(&self) -> usize;
    fn to_json(&self) -> Result<String>;
}

/// A training procedure parameterised by k.
pub trait Learner: Send + Sync {
    fn name(&self) -> &str;
    fn fit(&self, ds: &BinDataset, k: usize) -> Result<Box<dyn Classifier>>;
}

impl Classifier for DecisionTree {
    fn predict(&self, row: &FixedBitSet) -> bool {
        DecisionTree::predict(self, row)
    }

    fn size(&self) -> usize {
        self.count_leaves()
    }

    fn to_json(&self) -> Result<String> {
        DecisionTree::to_json(self)
    }
}

impl Classifier for NestedModel {
    fn predict(&self, row: &FixedBitSet) -> bool {
        self.predict_bits(row)
    }

    fn size(&self) -> usize {
        self.n_terms()
    }

    fn to_json(&self) -> Result<String> {
        NestedModel::to_json(self)
    }
}

pub struct TreeLearner;

impl Learner for TreeLearner {
    fn name(&self) -> &str {
        "dt"
    }

    fn fit(&self, ds: &BinDataset, k: usize) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(fit_tree(ds, k)?))
    }
}

pub struct NestedLearner {
    pub complement: bool,
}

impl Learner for NestedLearner {
    fn name(&self) -> &str {
        if self.complement {
            "dnf-complement"
        } else {
            "dnf"
        }
    }

    fn fit(&self, ds: &BinDataset, k: usize) -> Result<Box<dyn Classifier>> {
        let cfg = LearnerConfig::new(k).complement(self.complement);
        Ok(Box::new(train(ds, &cfg)?.model))
    }
}

#[derive(Clone, Default)]
pub struct LearnerRegistry {
    learners: BTreeMap<String, Arc<dyn Learner>>,
    order: Vec<String>,
}

impl LearnerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `dt`, `dnf` and `dnf-complement`.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(TreeLearner));
        r.register(Arc::new(NestedLearner { complement: false }));
        r.register(Arc::new(NestedLearner { complement: true }));
        r
    }

    /// Adds or replaces a learner under its own name.
    pub fn register(&mut self, learner: Arc<dyn Learner>) {
        let name = learner.name().to_string();
        if self.learners.insert(name.clone(), learner).is_none() {
            self.order.push(name);
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Learner>> {
        self.learners.get(name).cloned().ok_or_else(|| Error::UnknownLearner(name.to_string()))
    }

    /// Names in registration order.
    pub fn names(&self) -> &[String] {
        &self.order
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_lookup() {
        let r = LearnerRegistry::with_defaults();
        assert_eq!(r.names(), ["dt", "dnf", "dnf-complement"]);
        assert!(matches!(r.get("svm"), Err(Error::UnknownLearner(_))));
        let ds = BinDataset::from_truth_table(4, |x| (x & 3 == 3) || (x >> 2 & 3 == 3));
        let dnf = r.get("dnf").unwrap().fit(&ds, 2).unwrap();
        assert_eq!(dnf.size(), 2);
        assert_eq!(ds.accuracy(|row| dnf.predict(row)), 100.0);
        let dt = r.get("dt").unwrap().fit(&ds, 2).unwrap();
        assert!(ds.accuracy(|row| dt.predict(row)) < 100.0);
    }

    #[test]
    fn custom_learner_replaces_by_name() {
        struct Constant;
        struct Always;
        impl Classifier for Always {
            fn predict(&self, _: &FixedBitSet) -> bool {
                true
            }
            fn size(&self) -> usize {
                0
            }
            fn to_json(&self) -> Result<String> {
                Ok("true".into())
            }
        }
        impl Learner for Constant {
            fn name(&self) -> &str {
                "dt"
            }
            fn fit(&self, _: &BinDataset, _: usize) -> Result<Box<dyn Classifier>> {
                Ok(Box::new(Always))
            }
        }
        let mut r = LearnerRegistry::with_defaults();
        r.register(Arc::new(Constant));
        assert_eq!(r.names().len(), 3);
        let ds = BinDataset::from_truth_table(2, |x| x == 3);
        assert_eq!(r.get("dt").unwrap().fit(&ds, 1).unwrap().size(), 0);
    }
}
