//! Greedy learning of nested k-DNFs in three phases: fill the literal matrix
//! cell by cell, select row-prefix terms from largest to smallest, prune.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::dataio::BinDataset;
use crate::error::{Error, Result};
use crate::formula::{Literal, Term};
use crate::interpret::mim_certifies;
use crate::nested::{expand_model, expand_term, LiteralMatrix, NestedDnf, NestedModel, RowPrefix};

/// Which class-0 examples count towards Q when a term is considered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QSemantics {
    /// Only class-0 examples not yet covered by a selected term.
    #[default]
    Uncovered,
    /// Every class-0 example the term satisfies.
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub k: usize,
    #[serde(default)]
    pub target_complement: bool,
    /// Reserved; the pipeline is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub q_semantics: QSemantics,
}

impl LearnerConfig {
    pub fn new(k: usize) -> Self {
        LearnerConfig { k, target_complement: false, seed: 0, q_semantics: QSemantics::Uncovered }
    }

    pub fn complement(mut self, on: bool) -> Self {
        self.target_complement = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectRule {
    Gain,
    Pure,
}

/// Training trace, one JSON object per line on the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    MatrixCell { row: usize, col: usize, literal: String, gain: i64, limit: usize },
    Selected { r: Vec<usize>, term: String, p: usize, q: usize, rule: SelectRule },
    Pruned { r: Vec<usize>, term: String, p: usize, q: usize, kept: bool },
}

/// Per-literal example sets and the two class masks.
struct Coverage {
    ones: Vec<FixedBitSet>,
    zeros: Vec<FixedBitSet>,
    class1: FixedBitSet,
    class0: FixedBitSet,
    m: usize,
}

impl Coverage {
    fn new(ds: &BinDataset) -> Self {
        let m = ds.n_examples();
        let mut ones = vec![FixedBitSet::with_capacity(m); ds.n_features()];
        for (i, row) in ds.rows().iter().enumerate() {
            for f in row.ones() {
                ones[f].insert(i);
            }
        }
        let zeros = ones
            .iter()
            .map(|s| {
                let mut c = s.clone();
                c.toggle_range(..);
                c
            })
            .collect();
        let class1 = ds.labels().clone();
        let mut class0 = class1.clone();
        class0.toggle_range(..);
        Coverage { ones, zeros, class1, class0, m }
    }

    fn literal(&self, l: Literal) -> &FixedBitSet {
        if l.neg {
            &self.zeros[l.var]
        } else {
            &self.ones[l.var]
        }
    }

    fn term(&self, t: &Term) -> FixedBitSet {
        let mut cov = FixedBitSet::with_capacity(self.m);
        cov.insert_range(..);
        for &l in t.literals() {
            cov.intersect_with(self.literal(l));
        }
        cov
    }

    /// (#class-1, #class-0) examples in `cov`.
    fn counts(&self, cov: &FixedBitSet) -> (usize, usize) {
        (cov.intersection_count(&self.class1), cov.intersection_count(&self.class0))
    }
}

fn check_dataset(ds: &BinDataset, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidK { k, reason: "k must be at least 1".into() });
    }
    if ds.n_examples() == 0 {
        return Err(Error::EmptyDataset);
    }
    if k > ds.n_features() {
        return Err(Error::KExceedsFeatures { k, n_features: ds.n_features() });
    }
    let (neg, pos) = ds.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::DegenerateDataset(format!("{pos} positive and {neg} negative examples")));
    }
    Ok(())
}

/// Number of leftmost columns of earlier rows whose literals are barred.
fn exclusion_limit(n: usize, k: usize, i: usize, j: usize) -> usize {
    if i == 0 {
        0
    } else {
        (k - j).min((2 * (n - j)).div_ceil(i).saturating_sub(1))
    }
}

fn construct_matrix_logged(ds: &BinDataset, cfg: &LearnerConfig, log: &mut Vec<LogEvent>) -> Result<LiteralMatrix> {
    check_dataset(ds, cfg.k)?;
    let (n, k) = (ds.n_features(), cfg.k);
    let cov = Coverage::new(ds);
    let all_literals: Vec<Literal> = (0..n).flat_map(|v| [Literal::pos(v), Literal::neg(v)]).collect();
    let mut cells: Vec<Vec<Literal>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut row: Vec<Literal> = Vec::with_capacity(k);
        let mut prefix = FixedBitSet::with_capacity(cov.m);
        prefix.insert_range(..);
        for j in 0..k {
            let mut limit = exclusion_limit(n, k, i, j);
            let candidates = loop {
                let barred =
                    |l: &Literal| row.iter().any(|p| p.var == l.var) || cells.iter().any(|r| r[..limit].contains(l));
                let c: Vec<Literal> = all_literals.iter().copied().filter(|l| !barred(l)).collect();
                if !c.is_empty() || limit == 0 {
                    break c;
                }
                limit -= 1;
            };
            let (best, gain) = candidates
                .iter()
                .map(|&l| {
                    let mut c = prefix.clone();
                    c.intersect_with(cov.literal(l));
                    let (p, q) = cov.counts(&c);
                    (l, p as i64 - q as i64)
                })
                // first maximum in canonical literal order
                .fold(None, |best: Option<(Literal, i64)>, (l, g)| match best {
                    Some((_, bg)) if bg >= g => best,
                    _ => Some((l, g)),
                })
                .ok_or_else(|| Error::Invariant(format!("no candidate literal for cell ({i}, {j})")))?;
            log.push(LogEvent::MatrixCell { row: i, col: j, literal: best.to_string(), gain, limit });
            prefix.intersect_with(cov.literal(best));
            row.push(best);
        }
        cells.push(row);
    }
    LiteralMatrix::new(cells)
}

/// Fills the k×k matrix row by row, choosing for each cell the literal that
/// maximises (#class-1 − #class-0) examples satisfying the row prefix.
pub fn construct_matrix(ds: &BinDataset, cfg: &LearnerConfig) -> Result<LiteralMatrix> {
    construct_matrix_logged(ds, cfg, &mut Vec::new())
}

/// Vectors of `parts` non-negative entries summing to `total`, in descending
/// lexicographic order.
pub fn compositions_desc(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

fn select_terms_logged(
    ds: &BinDataset,
    matrix: &LiteralMatrix,
    cfg: &LearnerConfig,
    log: &mut Vec<LogEvent>,
) -> Result<NestedDnf> {
    let k = matrix.k();
    let cov = Coverage::new(ds);
    let mut covered1 = FixedBitSet::with_capacity(cov.m);
    let mut covered0 = FixedBitSet::with_capacity(cov.m);
    let mut evaluated: HashSet<Term> = HashSet::new();
    let mut selected = Vec::new();
    let all_covered = |c: &FixedBitSet| cov.class1.is_subset(c);
    'sizes: for size in (1..=k).rev() {
        for r in compositions_desc(size, k) {
            if all_covered(&covered1) {
                break 'sizes;
            }
            let r = RowPrefix::new(r, k)?;
            let t = expand_term(matrix, &r);
            if !t.is_consistent() || !evaluated.insert(t.clone()) {
                continue;
            }
            let c = cov.term(&t);
            let (p_all, q_all) = cov.counts(&c);
            let p = c.intersection(&cov.class1).filter(|&e| !covered1.contains(e)).count();
            let q = match cfg.q_semantics {
                QSemantics::Uncovered => c.intersection(&cov.class0).filter(|&e| !covered0.contains(e)).count(),
                QSemantics::All => q_all,
            };
            let rule = if p != 0 && q < p {
                SelectRule::Gain
            } else if p_all >= 1 && q_all == 0 {
                SelectRule::Pure
            } else {
                continue;
            };
            covered1.union_with(&c);
            covered1.intersect_with(&cov.class1);
            covered0.union_with(&c);
            covered0.intersect_with(&cov.class0);
            log.push(LogEvent::Selected { r: r.as_slice().to_vec(), term: t.to_string(), p, q, rule });
            selected.push(r);
        }
    }
    NestedDnf::new(matrix.clone(), selected, ds.n_features())
}

/// Scans row vectors by decreasing size and keeps a term when it covers more
/// new class-1 than class-0 examples, or is pure over the whole dataset.
pub fn select_terms(ds: &BinDataset, matrix: &LiteralMatrix, cfg: &LearnerConfig) -> Result<NestedDnf> {
    select_terms_logged(ds, matrix, cfg, &mut Vec::new())
}

fn prune_logged(ds: &BinDataset, model: &NestedDnf, log: &mut Vec<LogEvent>) -> Result<NestedDnf> {
    let cov = Coverage::new(ds);
    let terms: Vec<Term> = model.rows().iter().map(|r| expand_term(model.matrix(), r)).collect();
    let covers: Vec<FixedBitSet> =
        terms.iter().map(|t| if t.is_consistent() { cov.term(t) } else { FixedBitSet::with_capacity(cov.m) }).collect();
    // a repeated term adds nothing over its first copy
    let mut kept: Vec<bool> = (0..terms.len()).map(|i| !terms[..i].contains(&terms[i])).collect();
    for idx in 0..terms.len() {
        let r = model.rows()[idx].as_slice().to_vec();
        if !kept[idx] {
            log.push(LogEvent::Pruned { r, term: terms[idx].to_string(), p: 0, q: 0, kept: false });
            continue;
        }
        let mut others = FixedBitSet::with_capacity(cov.m);
        for (j, c) in covers.iter().enumerate() {
            if j != idx && kept[j] {
                others.union_with(c);
            }
        }
        let mut exclusive = covers[idx].clone();
        exclusive.difference_with(&others);
        let (p, q) = cov.counts(&exclusive);
        let keep = p != 0 && q < p;
        kept[idx] = keep;
        log.push(LogEvent::Pruned { r, term: terms[idx].to_string(), p, q, kept: keep });
    }
    let rows = model.rows().iter().zip(&kept).filter(|(_, &k)| k).map(|(r, _)| r.clone()).collect();
    NestedDnf::new(model.matrix().clone(), rows, model.n_vars())
}

/// One pass in selection order; a term goes when the examples only it covers
/// have P = 0 or Q ≥ P. Removals apply to the following terms immediately.
pub fn prune(ds: &BinDataset, model: &NestedDnf) -> Result<NestedDnf> {
    prune_logged(ds, model, &mut Vec::new())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: NestedModel,
    pub log: Vec<LogEvent>,
}

/// Runs the three phases (on swapped labels when `target_complement`) and
/// checks the induced-matching certificate of the result.
pub fn train(ds: &BinDataset, cfg: &LearnerConfig) -> Result<TrainOutcome> {
    check_dataset(ds, cfg.k)?;
    let working = if cfg.target_complement { ds.with_swapped_labels() } else { ds.clone() };
    let mut log = Vec::new();
    let matrix = construct_matrix_logged(&working, cfg, &mut log)?;
    let selected = select_terms_logged(&working, &matrix, cfg, &mut log)?;
    let nested = prune_logged(&working, &selected, &mut log)?;
    let expanded = expand_model(&nested);
    if !expanded.is_k_dnf(cfg.k) || !mim_certifies(&expanded, cfg.k)? {
        return Err(Error::Invariant("learned model fails the induced-matching certificate".into()));
    }
    let model = NestedModel::new(
        nested,
        ds.feature_names().to_vec(),
        ds.label_for_positive().to_string(),
        cfg.target_complement,
    )?;
    Ok(TrainOutcome { model, log })
}
