//! Abductive and contrastive explanations, the k-AXp-interpretability test,
//! and the induced-matching certificate for k-DNFs.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::dualize::{for_each_combination, prime_implicants};
use crate::error::{Error, Result};
use crate::formula::{Assignment, DnfFormula, Literal, Term};
use crate::truth_table::{dnf_to_truthtable, for_each_in_subcube, TruthTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplanationKind {
    Abductive,
    Contrastive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub kind: ExplanationKind,
    pub features: Vec<usize>,
    #[serde(serialize_with = "serialize_assignment")]
    pub instance: Assignment,
    pub decision: bool,
}

fn serialize_assignment<S: serde::Serializer>(v: &Assignment, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl Explanation {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

fn mask_of(features: &[usize]) -> u64 {
    features.iter().fold(0, |m, &i| m | 1 << i)
}

fn features_of(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn check_instance(table: &TruthTable, v: &Assignment) -> Result<u64> {
    if v.len() != table.n_vars() {
        return Err(Error::LengthMismatch { expected: table.n_vars(), got: v.len() });
    }
    Ok(v.to_index())
}

/// Fixing the features in `fixed` to their values in `v` forces `table(v)`.
pub fn is_weak_axp(table: &TruthTable, v: u64, fixed: u64) -> bool {
    let all = table.n_rows() - 1;
    let decision = table.get(v);
    for_each_in_subcube(v & fixed, all & !fixed, |x| table.get(x) == decision)
}

/// Some reassignment of only the features in `free` changes `table(v)`.
pub fn is_weak_cxp(table: &TruthTable, v: u64, free: u64) -> bool {
    let decision = table.get(v);
    !for_each_in_subcube(v & !free, free, |x| table.get(x) == decision)
}

/// A subset-minimal AXp by greedy deletion in ascending feature order.
pub fn find_axp(table: &TruthTable, v: &Assignment) -> Result<Explanation> {
    let idx = check_instance(table, v)?;
    let mut fixed = table.n_rows() - 1;
    for i in 0..table.n_vars() {
        let candidate = fixed & !(1 << i);
        if is_weak_axp(table, idx, candidate) {
            fixed = candidate;
        }
    }
    Ok(Explanation {
        kind: ExplanationKind::Abductive,
        features: features_of(fixed, table.n_vars()),
        instance: v.clone(),
        decision: table.get(idx),
    })
}

fn smallest_set(n: usize, pred: impl Fn(u64) -> bool) -> Option<u64> {
    for size in 0..=n {
        let mut hit = None;
        for_each_combination(n, size, |c| {
            if hit.is_none() {
                let m = mask_of(c);
                if pred(m) {
                    hit = Some(m);
                }
            }
        });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// A minimum-cardinality AXp (first in lexicographic order among the smallest).
pub fn find_min_axp(table: &TruthTable, v: &Assignment) -> Result<Explanation> {
    let idx = check_instance(table, v)?;
    let fixed = smallest_set(table.n_vars(), |m| is_weak_axp(table, idx, m))
        .expect("the full feature set is always a weak AXp");
    Ok(Explanation {
        kind: ExplanationKind::Abductive,
        features: features_of(fixed, table.n_vars()),
        instance: v.clone(),
        decision: table.get(idx),
    })
}

/// A minimum-cardinality CXp, searched by size then lexicographically.
/// Constant functions get the empty explanation.
pub fn find_cxp(table: &TruthTable, v: &Assignment) -> Result<Explanation> {
    let idx = check_instance(table, v)?;
    let free = if table.constant_value().is_some() {
        0
    } else {
        smallest_set(table.n_vars(), |m| is_weak_cxp(table, idx, m)).expect("a non-constant function has a weak CXp")
    };
    Ok(Explanation {
        kind: ExplanationKind::Contrastive,
        features: features_of(free, table.n_vars()),
        instance: v.clone(),
        decision: table.get(idx),
    })
}

/// Size-bounded prime implicants of a function and of its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleDnf {
    pub pos: DnfFormula,
    pub neg: DnfFormula,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct Interpretability {
    pub interpretable: bool,
    pub pos_covers: bool,
    pub neg_covers: bool,
    pub double_dnf: DoubleDnf,
}

/// Builds the standard double-DNF at bound `k` and checks that each side
/// expresses its function exactly.
pub fn is_k_axp_interpretable(table: &TruthTable, k: usize) -> Interpretability {
    let complement = table.complement();
    let pos = prime_implicants(table, k);
    let neg = prime_implicants(&complement, k);
    let pos_covers = dnf_to_truthtable(&pos).expect("same variable count") == *table;
    let neg_covers = dnf_to_truthtable(&neg).expect("same variable count") == complement;
    Interpretability {
        interpretable: pos_covers && neg_covers,
        pos_covers,
        neg_covers,
        double_dnf: DoubleDnf { pos, neg, k },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub pos_terms: usize,
    pub neg_terms: usize,
    pub k_pow_k: u128,
    pub distinct_feature_sets: usize,
    pub two_k_pow_k: u128,
    pub pass: bool,
}

/// Checks the term-count bound k^k on both sides and the 2k^k bound on the
/// number of distinct explanation feature sets.
pub fn check_theorem_bound(dd: &DoubleDnf) -> BoundReport {
    let k_pow_k = (dd.k as u128).saturating_pow(dd.k as u32);
    let two_k_pow_k = k_pow_k.saturating_mul(2);
    let distinct: BTreeSet<Vec<usize>> = dd.pos.terms().iter().chain(dd.neg.terms()).map(Term::vars).collect();
    let pos_terms = dd.pos.size();
    let neg_terms = dd.neg.size();
    BoundReport {
        k: dd.k,
        pos_terms,
        neg_terms,
        k_pow_k,
        distinct_feature_sets: distinct.len(),
        two_k_pow_k,
        pass: pos_terms as u128 <= k_pow_k && neg_terms as u128 <= k_pow_k && distinct.len() as u128 <= two_k_pow_k,
    }
}

/// Literal/term incidence graph G_D of a DNF formula.
#[derive(Debug, Clone)]
pub struct BipartiteIncidence {
    pub literal_nodes: Vec<Literal>,
    pub term_nodes: Vec<Term>,
    /// `(literal index, term index)` pairs, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteIncidence {
    pub fn from_dnf(d: &DnfFormula) -> Self {
        let literal_nodes: Vec<Literal> = d.literal_set().into_iter().collect();
        let term_nodes: Vec<Term> = d.term_set().into_iter().collect();
        let mut edges = Vec::new();
        for (ti, t) in term_nodes.iter().enumerate() {
            for l in t.literals() {
                let li = literal_nodes.binary_search(l).expect("literal of a term is in L(D)");
                edges.push((li, ti));
            }
        }
        edges.sort_unstable();
        BipartiteIncidence { literal_nodes, term_nodes, edges }
    }

    pub fn has_edge(&self, li: usize, ti: usize) -> bool {
        self.term_nodes[ti].contains(self.literal_nodes[li])
    }

    /// Whether edges `a` and `b` may both belong to an induced matching.
    pub fn compatible(&self, a: usize, b: usize) -> bool {
        let (la, ta) = self.edges[a];
        let (lb, tb) = self.edges[b];
        la != lb && ta != tb && !self.has_edge(la, tb) && !self.has_edge(lb, ta)
    }
}

struct MatchingSearch<'a> {
    compat: Vec<FixedBitSet>,
    graph: &'a BipartiteIncidence,
    target: usize,
    best: usize,
}

impl MatchingSearch<'_> {
    fn bound(&self, cands: &FixedBitSet) -> usize {
        let mut terms = FixedBitSet::with_capacity(self.graph.term_nodes.len());
        let mut lits = FixedBitSet::with_capacity(self.graph.literal_nodes.len());
        for e in cands.ones() {
            let (l, t) = self.graph.edges[e];
            terms.insert(t);
            lits.insert(l);
        }
        terms.count_ones(..).min(lits.count_ones(..))
    }

    fn extend(&mut self, size: usize, cands: FixedBitSet) {
        if size > self.best {
            self.best = size;
        }
        if self.best >= self.target || size + self.bound(&cands) <= self.best {
            return;
        }
        let order: Vec<usize> = cands.ones().collect();
        for (pos, &e) in order.iter().enumerate() {
            if size + (order.len() - pos) <= self.best {
                return;
            }
            let mut next = cands.clone();
            next.intersect_with(&self.compat[e]);
            next.set_range(..e + 1, false);
            self.extend(size + 1, next);
            if self.best >= self.target {
                return;
            }
        }
    }
}

/// Branch-and-bound search for an induced matching, stopping as soon as one
/// of size `cutoff + 1` is found. Returns `min(mim(G), cutoff + 1)`.
pub fn max_induced_matching(g: &BipartiteIncidence, cutoff: usize) -> usize {
    let m = g.edges.len();
    let compat: Vec<FixedBitSet> = (0..m)
        .map(|a| {
            let mut row = FixedBitSet::with_capacity(m);
            for b in 0..m {
                if a != b && g.compatible(a, b) {
                    row.insert(b);
                }
            }
            row
        })
        .collect();
    let mut all = FixedBitSet::with_capacity(m);
    all.insert_range(..);
    let mut search = MatchingSearch { compat, graph: g, target: cutoff.saturating_add(1), best: 0 };
    search.extend(0, all);
    search.best.min(search.target)
}

/// Sufficient test for k-AXp-interpretability: a k-DNF whose incidence graph
/// has no induced matching of size k + 1.
pub fn mim_certifies(d: &DnfFormula, k: usize) -> Result<bool> {
    if !d.is_k_dnf(k) {
        return Err(Error::TermTooLarge { size: d.max_term_size(), k });
    }
    let g = BipartiteIncidence::from_dnf(d);
    Ok(max_induced_matching(&g, k) <= k)
}

/// Truth table of `d` over the variables it mentions; entry j of the returned
/// list is the original index of table variable j.
pub fn support_table(d: &DnfFormula) -> Result<(TruthTable, Vec<usize>)> {
    let support = d.support();
    let mut map = vec![0; d.n_vars()];
    for (j, &v) in support.iter().enumerate() {
        map[v] = j;
    }
    let projected = d.remap(&map, support.len())?;
    Ok((dnf_to_truthtable(&projected)?, support))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_projection() {
        let d = f("x3&!x40 | x7").with_n_vars(60).unwrap();
        let (t, support) = support_table(&d).unwrap();
        assert_eq!(support, [3, 7, 40]);
        assert_eq!(t.n_vars(), 3);
        for x in 0..8u64 {
            assert_eq!(t.get(x), (x & 1 == 1 && x & 4 == 0) || x & 2 == 2);
        }
    }

    fn f(s: &str) -> DnfFormula {
        s.parse().unwrap()
    }

    fn v(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn maj(n: usize) -> TruthTable {
        TruthTable::from_fn(n, |i| 2 * i.count_ones() as usize > n).unwrap()
    }

    fn parity(n: usize) -> TruthTable {
        TruthTable::from_fn(n, |i| i.count_ones() % 2 == 0).unwrap()
    }

    fn and2() -> TruthTable {
        TruthTable::from_fn(2, |i| i == 3).unwrap()
    }

    /// Every subset of features that is a weak AXp with no weak-AXp proper subset.
    fn brute_axps(table: &TruthTable, v: u64) -> Vec<u64> {
        let n = table.n_vars();
        (0u64..1 << n)
            .filter(|&m| is_weak_axp(table, v, m))
            .filter(|&m| (0..n).filter(|i| m >> i & 1 == 1).all(|i| !is_weak_axp(table, v, m & !(1 << i))))
            .collect()
    }

    #[test]
    fn axp_examples() {
        assert_eq!(find_axp(&and2(), &v("11")).unwrap().features, vec![0, 1]);
        assert_eq!(find_axp(&parity(3), &v("000")).unwrap().features, vec![0, 1, 2]);
        let e = find_axp(&maj(3), &v("110")).unwrap();
        assert_eq!(e.features, vec![0, 1]);
        assert!(e.decision);
        // {0,1} is the only AXp of maj3 at (1,1,0)
        assert_eq!(brute_axps(&maj(3), 0b011), vec![0b011]);
        let constant = TruthTable::constant(3, true).unwrap();
        assert!(find_axp(&constant, &v("010")).unwrap().is_empty());
    }

    #[test]
    fn axp_is_minimal_and_weak() {
        let table = TruthTable::from_fn(4, |i| (i & 3 == 3) || (i >> 2 & 3 == 3)).unwrap();
        for idx in 0..16u64 {
            let e = find_axp(&table, &Assignment::from_index(idx, 4)).unwrap();
            assert!(brute_axps(&table, idx).contains(&mask_of(&e.features)));
            let min = find_min_axp(&table, &Assignment::from_index(idx, 4)).unwrap();
            let smallest = brute_axps(&table, idx).iter().map(|m| m.count_ones()).min().unwrap();
            assert_eq!(min.len() as u32, smallest);
        }
    }

    #[test]
    fn cxp_examples() {
        for idx in 0..8 {
            assert_eq!(find_cxp(&parity(3), &Assignment::from_index(idx, 3)).unwrap().len(), 1);
        }
        assert_eq!(find_cxp(&and2(), &v("11")).unwrap().features, vec![0]);
        let e = find_cxp(&maj(3), &v("111")).unwrap();
        assert_eq!(e.len(), 2);
        // no single flip changes maj3 at all-ones
        assert!((0..3).all(|i| !is_weak_cxp(&maj(3), 0b111, 1 << i)));
        let constant = TruthTable::constant(2, false).unwrap();
        assert!(find_cxp(&constant, &v("01")).unwrap().is_empty());
    }

    #[test]
    fn explanation_length_mismatch() {
        assert!(matches!(find_axp(&and2(), &v("1")), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn interpretability_examples() {
        let r = is_k_axp_interpretable(&maj(5), 3);
        assert!(r.interpretable);
        assert_eq!(r.double_dnf.pos.size(), 10);

        let r = is_k_axp_interpretable(&parity(3), 2);
        assert!(!r.interpretable);
        assert_eq!(r.double_dnf.pos.size(), 0);

        let chain = dnf_to_truthtable(&f("x0&x1 | x1&x2 | x2&x3")).unwrap();
        assert!(is_k_axp_interpretable(&chain, 2).interpretable);
    }

    #[test]
    fn bound_examples() {
        let sharp = dnf_to_truthtable(&f("!x0&!x1 | !x2&!x3")).unwrap().complement();
        let r = is_k_axp_interpretable(&sharp, 2);
        assert!(r.interpretable);
        let report = check_theorem_bound(&r.double_dnf);
        assert_eq!(report.pos_terms, 4);
        assert_eq!(report.k_pow_k, 4);
        assert!(report.pass);

        let one = TruthTable::constant(2, true).unwrap();
        let report = check_theorem_bound(&is_k_axp_interpretable(&one, 1).double_dnf);
        assert_eq!((report.pos_terms, report.neg_terms, report.pass), (1, 0, true));

        let report = check_theorem_bound(&is_k_axp_interpretable(&maj(3), 2).double_dnf);
        assert_eq!(report.pos_terms, 3);
        assert!(report.pass);
    }

    /// Maximum induced matching by enumerating every edge subset.
    fn brute_mim(g: &BipartiteIncidence) -> usize {
        let m = g.edges.len();
        (0u32..1 << m)
            .filter(|&s| {
                (0..m).all(|a| (0..m).all(|b| a == b || s >> a & 1 == 0 || s >> b & 1 == 0 || g.compatible(a, b)))
            })
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn mim_examples() {
        let g = BipartiteIncidence::from_dnf(&f("x0 | x1"));
        assert_eq!(max_induced_matching(&g, 5), 2);

        let g = BipartiteIncidence::from_dnf(&f("x0&x1 | x0&x2 | x1&x2"));
        assert!(max_induced_matching(&g, 5) <= 2);
        assert_eq!(max_induced_matching(&g, 5), brute_mim(&g));

        let g = BipartiteIncidence::from_dnf(&f("x0&x1 | x1&x2 | x2&x3"));
        assert_eq!(g.edges.len(), 6);
        assert_eq!(brute_mim(&g), 2);
        assert_eq!(max_induced_matching(&g, 5), 2);

        let g = BipartiteIncidence::from_dnf(&f("x0 | x1 | x2 | x3"));
        assert_eq!(max_induced_matching(&g, 1), 2);
    }

    #[test]
    fn mim_matches_brute_force_on_small_graphs() {
        for s in ["x0&x1 | x2&x3 | !x0&x2", "x0&!x1 | x1&x2 | x3 | !x2&x0", "x0&x1&x2 | x1&x3 | x4", "1 | x0"] {
            let g = BipartiteIncidence::from_dnf(&f(s));
            assert_eq!(max_induced_matching(&g, 10), brute_mim(&g), "{s}");
        }
    }

    #[test]
    fn mim_certificate_examples() {
        assert!(mim_certifies(&f("x0&x1 | x0&x2 | x1&x2"), 2).unwrap());
        assert!(!mim_certifies(&f("x0 | x1 | x2"), 2).unwrap());
        assert!(matches!(mim_certifies(&f("x0&x1&x2"), 2), Err(Error::TermTooLarge { size: 3, k: 2 })));
    }
}
