//! Complementation of DNF formulas by minimal-transversal enumeration, and
//! prime-implicant enumeration over truth tables.

use crate::error::{Error, Result};
use crate::formula::{DnfFormula, Literal, Term};
use crate::truth_table::TruthTable;

pub use crate::truth_table::dnf_to_truthtable;

/// Subset-minimal literal sets hitting every term of a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalSet {
    pub transversals: Vec<Term>,
}

impl TransversalSet {
    pub fn len(&self) -> usize {
        self.transversals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transversals.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.transversals.iter().map(Term::len).max().unwrap_or(0)
    }
}

fn hits(transversal: &Term, t: &Term) -> bool {
    !transversal.positive_mask().is_disjoint(t.positive_mask())
        || !transversal.negative_mask().is_disjoint(t.negative_mask())
}

fn keep_minimal(mut sets: Vec<Term>) -> Vec<Term> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut out: Vec<Term> = Vec::with_capacity(sets.len());
    for s in sets {
        if !out.iter().any(|m| m.is_subset_of(&s)) {
            out.push(s);
        }
    }
    out
}

/// Berge's sequential product: fold the terms in one at a time, extending
/// every partial transversal that misses the new term by each of its
/// literals, then discard non-minimal sets.
pub fn minimal_transversals(d: &DnfFormula) -> Result<TransversalSet> {
    if d.has_empty_term() {
        return Err(Error::ConstantTrueFormula);
    }
    let mut partial = vec![Term::empty()];
    for t in d.terms() {
        let mut next = Vec::with_capacity(partial.len() * t.len());
        for tr in partial {
            if hits(&tr, t) {
                next.push(tr);
            } else {
                for &l in t.literals() {
                    next.push(tr.union(&Term::new([l])));
                }
            }
        }
        partial = keep_minimal(next);
    }
    partial.sort();
    Ok(TransversalSet { transversals: partial })
}

/// The canonical DNF of the complement: one term per minimal transversal with
/// every literal negated. Inconsistent terms are kept only when `keep_inconsistent`.
pub fn canonical_complement(d: &DnfFormula, keep_inconsistent: bool) -> DnfFormula {
    if d.has_empty_term() {
        return DnfFormula::constant_false(d.n_vars());
    }
    if d.terms().is_empty() {
        return DnfFormula::constant_true(d.n_vars());
    }
    let transversals = minimal_transversals(d).expect("empty term handled above");
    let terms = transversals
        .transversals
        .iter()
        .map(|tr| tr.negated_literals().collect::<Term>())
        .filter(|t| keep_inconsistent || t.is_consistent())
        .collect();
    DnfFormula::new(d.n_vars(), terms).expect("negation keeps variable indices")
}

/// Calls `f` with each `size`-combination of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx);
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - size {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All prime implicants of `table` with at most `max_size` literals, ordered
/// by size and then canonically.
pub fn prime_implicants(table: &TruthTable, max_size: usize) -> DnfFormula {
    let n = table.n_vars();
    let max_size = max_size.min(n);
    let mut primes: Vec<Term> = Vec::new();
    for size in 0..=max_size {
        let mut found = Vec::new();
        for_each_combination(n, size, |vars| {
            for signs in 0u32..(1 << size) {
                let t: Term =
                    vars.iter().enumerate().map(|(j, &var)| Literal { var, neg: (signs >> j) & 1 == 1 }).collect();
                if primes.iter().any(|p| p.is_subset_of(&t)) {
                    continue;
                }
                if table.is_implicant(&t) {
                    found.push(t);
                }
            }
        });
        found.sort();
        primes.extend(found);
        if size == 0 && !primes.is_empty() {
            break;
        }
    }
    DnfFormula::new(n, primes).expect("terms built over the table's variables")
}
