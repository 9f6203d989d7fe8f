//! Literals, terms and DNF formulas over boolean variables `x0, x1, ...`.
//!
//! Terms are kept in canonical order (ascending variable, positive literal
//! before its negation) and carry a pair of variable masks so consistency
//! and subsumption tests are plain mask arithmetic.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub neg: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, neg: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, neg: true }
    }

    pub fn negation(self) -> Self {
        Literal { var: self.var, neg: !self.neg }
    }

    /// Value of the literal when its variable takes `value`.
    #[inline]
    pub fn holds(self, value: bool) -> bool {
        value != self.neg
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.neg {
            write!(f, "!x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

impl FromStr for Literal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (neg, rest) = match s.strip_prefix('!') {
            Some(rest) => (true, rest.trim_start()),
            None => (false, s),
        };
        let idx = rest
            .strip_prefix('x')
            .ok_or_else(|| Error::Parse(format!("expected literal `x<i>` or `!x<i>`, got `{s}`")))?;
        let var = idx.parse::<usize>().map_err(|_| Error::Parse(format!("bad variable index in `{s}`")))?;
        Ok(Literal { var, neg })
    }
}

/// A conjunction of literals. May be inconsistent (contain `x` and `!x`).
#[derive(Debug, Clone)]
pub struct Term {
    lits: Vec<Literal>,
    pos: FixedBitSet,
    neg: FixedBitSet,
}

impl Term {
    pub fn new<I: IntoIterator<Item = Literal>>(lits: I) -> Self {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        let width = lits.last().map_or(0, |l| l.var + 1);
        let mut pos = FixedBitSet::with_capacity(width);
        let mut neg = FixedBitSet::with_capacity(width);
        for l in &lits {
            if l.neg {
                neg.insert(l.var);
            } else {
                pos.insert(l.var);
            }
        }
        Term { lits, pos, neg }
    }

    pub fn empty() -> Self {
        Term::new(std::iter::empty())
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn positive_mask(&self) -> &FixedBitSet {
        &self.pos
    }

    pub fn negative_mask(&self) -> &FixedBitSet {
        &self.neg
    }

    pub fn is_consistent(&self) -> bool {
        self.pos.is_disjoint(&self.neg)
    }

    pub fn contains(&self, lit: Literal) -> bool {
        if lit.neg {
            self.neg.contains(lit.var)
        } else {
            self.pos.contains(lit.var)
        }
    }

    pub fn is_subset_of(&self, other: &Term) -> bool {
        self.pos.is_subset(&other.pos) && self.neg.is_subset(&other.neg)
    }

    /// Variables mentioned by the term, ascending and without repetition.
    pub fn vars(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.lits.iter().map(|l| l.var).collect();
        vars.dedup();
        vars
    }

    pub fn max_var(&self) -> Option<usize> {
        self.lits.last().map(|l| l.var)
    }

    pub fn negated_literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.lits.iter().map(|l| l.negation())
    }

    /// True iff the term shares a literal with the negation of `other`.
    pub fn clashes_with(&self, other: &Term) -> bool {
        !self.pos.is_disjoint(&other.neg) || !self.neg.is_disjoint(&other.pos)
    }

    pub fn union(&self, other: &Term) -> Term {
        Term::new(self.lits.iter().chain(other.lits.iter()).copied())
    }

    /// `self \ other` as literal sets.
    pub fn without(&self, other: &Term) -> Term {
        Term::new(self.lits.iter().copied().filter(|l| !other.contains(*l)))
    }

    pub fn eval(&self, v: &Assignment) -> Result<bool> {
        if let Some(var) = self.max_var() {
            if var >= v.len() {
                return Err(Error::VarOutOfRange { var, n_vars: v.len() });
            }
        }
        Ok(self.lits.iter().all(|l| l.holds(v.get(l.var))))
    }

    /// Evaluates against the assignment encoded by `index` (bit i = x_i).
    #[inline]
    pub fn eval_index(&self, index: u64) -> bool {
        self.lits.iter().all(|l| l.holds((index >> l.var) & 1 == 1))
    }

    /// Evaluates against a row of feature bits.
    #[inline]
    pub fn eval_bits(&self, row: &FixedBitSet) -> bool {
        self.pos.is_subset(row) && self.neg.is_disjoint(row)
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.lits == other.lits
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.lits.hash(state);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.lits.cmp(&other.lits)
    }
}

impl FromIterator<Literal> for Term {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        Term::new(iter)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                f.write_str("&")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Term::empty());
        }
        s.split('&').map(Literal::from_str).collect()
    }
}

/// Reorders and deduplicates the literals of `t`.
pub fn canonical_term(t: &Term) -> Term {
    Term::new(t.literals().iter().copied())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn from_index(index: u64, n_vars: usize) -> Self {
        Assignment { bits: (0..n_vars).map(|i| (index >> i) & 1 == 1).collect() }
    }

    pub fn to_index(&self) -> u64 {
        self.bits.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, var: usize) -> bool {
        self.bits[var]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl FromStr for Assignment {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; character i is x_i.
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bad assignment bit `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment::new)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A disjunction of terms over `n_vars` variables.
///
/// `fixed` lists the variables eliminated by [`DnfFormula::restrict`]; indices
/// are never renumbered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    n_vars: usize,
    terms: Vec<Term>,
    fixed: Vec<usize>,
}

impl DnfFormula {
    pub fn new(n_vars: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if let Some(var) = t.max_var() {
                if var >= n_vars {
                    return Err(Error::VarOutOfRange { var, n_vars });
                }
            }
        }
        Ok(DnfFormula { n_vars, terms, fixed: Vec::new() })
    }

    /// Builds a formula whose variable count is one past the largest index used.
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let n_vars = terms.iter().filter_map(Term::max_var).max().map_or(0, |v| v + 1);
        DnfFormula { n_vars, terms, fixed: Vec::new() }
    }

    pub fn constant_false(n_vars: usize) -> Self {
        DnfFormula { n_vars, terms: Vec::new(), fixed: Vec::new() }
    }

    pub fn constant_true(n_vars: usize) -> Self {
        DnfFormula { n_vars, terms: vec![Term::empty()], fixed: Vec::new() }
    }

    pub fn with_n_vars(mut self, n_vars: usize) -> Result<Self> {
        if let Some(var) = self.terms.iter().filter_map(Term::max_var).max() {
            if var >= n_vars {
                return Err(Error::VarOutOfRange { var, n_vars });
            }
        }
        self.n_vars = n_vars;
        Ok(self)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn fixed_vars(&self) -> &[usize] {
        &self.fixed
    }

    /// Number of terms, |D|.
    pub fn size(&self) -> usize {
        self.terms.len()
    }

    /// Sum of term sizes, ||D||.
    pub fn length(&self) -> usize {
        self.terms.iter().map(Term::len).sum()
    }

    pub fn max_term_size(&self) -> usize {
        self.terms.iter().map(Term::len).max().unwrap_or(0)
    }

    pub fn is_k_dnf(&self, k: usize) -> bool {
        self.terms.iter().all(|t| t.len() <= k)
    }

    pub fn has_empty_term(&self) -> bool {
        self.terms.iter().any(Term::is_empty)
    }

    /// L(D): the literals occurring in the formula.
    pub fn literal_set(&self) -> BTreeSet<Literal> {
        self.terms.iter().flat_map(|t| t.literals().iter().copied()).collect()
    }

    /// T(D): the distinct terms, in canonical order.
    pub fn term_set(&self) -> BTreeSet<Term> {
        self.terms.iter().cloned().collect()
    }

    /// Variables that occur in some term, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.literal_set().into_iter().map(|l| l.var).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn eval(&self, v: &Assignment) -> Result<bool> {
        if v.len() != self.n_vars {
            return Err(Error::LengthMismatch { expected: self.n_vars, got: v.len() });
        }
        for t in &self.terms {
            if t.eval(v)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    #[inline]
    pub fn eval_index(&self, index: u64) -> bool {
        self.terms.iter().any(|t| t.eval_index(index))
    }

    #[inline]
    pub fn eval_bits(&self, row: &FixedBitSet) -> bool {
        self.terms.iter().any(|t| t.eval_bits(row))
    }

    pub fn push(&mut self, t: Term) -> Result<()> {
        if let Some(var) = t.max_var() {
            if var >= self.n_vars {
                return Err(Error::VarOutOfRange { var, n_vars: self.n_vars });
            }
        }
        self.terms.push(t);
        Ok(())
    }

    /// D[Q]: drops terms containing the negation of a literal of `q` and
    /// strips the literals of `q` from the surviving terms.
    pub fn restrict(&self, q: &Term) -> Result<DnfFormula> {
        if !q.is_consistent() {
            return Err(Error::InconsistentRestriction(q.to_string()));
        }
        let terms = self.terms.iter().filter(|t| !t.clashes_with(q)).map(|t| t.without(q)).collect();
        let fixed: BTreeSet<usize> = self.fixed.iter().copied().chain(q.vars()).collect();
        Ok(DnfFormula { n_vars: self.n_vars, terms, fixed: fixed.into_iter().collect() })
    }

    /// Removes duplicate terms and terms that strictly contain another term.
    /// Surviving terms keep their first-occurrence order.
    pub fn subsumption_reduced(&self) -> DnfFormula {
        let mut kept: Vec<Term> = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            let dominated =
                self.terms.iter().enumerate().any(|(j, s)| j != i && s.is_subset_of(t) && (s.len() < t.len() || j < i));
            if !dominated {
                kept.push(t.clone());
            }
        }
        DnfFormula { n_vars: self.n_vars, terms: kept, fixed: self.fixed.clone() }
    }

    /// Renames variables: variable `v` becomes `map[v]`.
    pub fn remap(&self, map: &[usize], n_vars: usize) -> Result<DnfFormula> {
        let terms = self
            .terms
            .iter()
            .map(|t| t.literals().iter().map(|l| Literal { var: map[l.var], neg: l.neg }).collect())
            .collect();
        DnfFormula::new(n_vars, terms)
    }
}

impl fmt::Display for DnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for DnfFormula {
    type Err = Error;

    /// Grammar: `x0&x1 | !x2&x3`; `0` is the empty formula and `1` the empty term.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty formula string".into()));
        }
        if s == "0" {
            return Ok(DnfFormula::constant_false(0));
        }
        let terms = s.split('|').map(Term::from_str).collect::<Result<Vec<_>>>()?;
        Ok(DnfFormula::from_terms(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> DnfFormula {
        s.parse().unwrap()
    }

    fn t(s: &str) -> Term {
        s.parse().unwrap()
    }

    fn v(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    #[test]
    fn eval_term_cases() {
        assert!(t("x0&!x1").eval(&v("10")).unwrap());
        assert!(Term::empty().eval(&v("01")).unwrap());
        let clash = t("x0&!x0");
        assert!(!clash.is_consistent());
        for idx in 0..2 {
            assert!(!clash.eval(&Assignment::from_index(idx, 1)).unwrap());
        }
    }

    #[test]
    fn eval_term_out_of_range() {
        assert!(matches!(t("x3").eval(&v("01")), Err(Error::VarOutOfRange { var: 3, .. })));
    }

    #[test]
    fn eval_dnf_cases() {
        let d = f("x0&x1 | x2&x3");
        assert!(d.eval(&v("0011")).unwrap());
        assert!(!d.eval(&v("1010")).unwrap());
        let empty = DnfFormula::constant_false(2);
        assert!(!empty.eval(&v("11")).unwrap());
        assert!(matches!(d.eval(&v("01")), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn restrict_cases() {
        let r = f("x0&x1 | !x0&x2").restrict(&t("x0")).unwrap();
        assert_eq!(r.terms(), &[t("x1")]);
        assert_eq!(r.fixed_vars(), &[0]);

        let r = f("x0&x1").restrict(&t("x0&x1")).unwrap();
        assert_eq!(r.terms(), &[Term::empty()]);

        let d = f("x0&x1 | x2&x3");
        let r = d.restrict(&t("!x0&!x2")).unwrap();
        assert!(r.terms().is_empty());
        // D & Q is unsatisfiable over all 16 assignments
        let q = t("!x0&!x2");
        assert!((0..16u64).all(|i| !(d.eval_index(i) && q.eval_index(i))));
    }

    #[test]
    fn restrict_inconsistent() {
        assert!(matches!(f("x0").restrict(&t("x1&!x1")), Err(Error::InconsistentRestriction(_))));
    }

    #[test]
    fn canonical_term_cases() {
        let raw = Term::new([Literal::neg(1), Literal::pos(0)]);
        assert_eq!(canonical_term(&raw).literals(), &[Literal::pos(0), Literal::neg(1)]);
        assert!(canonical_term(&Term::empty()).is_empty());
        let dup = Term::new([Literal::pos(2), Literal::pos(2)]);
        assert_eq!(canonical_term(&dup).literals(), &[Literal::pos(2)]);
        assert_eq!(canonical_term(&canonical_term(&raw)), canonical_term(&raw));
    }

    #[test]
    fn literal_order_positive_first() {
        assert!(Literal::pos(1) < Literal::neg(1));
        assert!(Literal::neg(0) < Literal::pos(1));
        assert_eq!(Literal::pos(3).negation().negation(), Literal::pos(3));
    }

    #[test]
    fn size_and_length() {
        let d = f("x0&x1 | x2 | !x3&x1&x0");
        assert_eq!(d.size(), 3);
        assert_eq!(d.length(), 6);
        assert!(d.is_k_dnf(3));
        assert!(!d.is_k_dnf(2));
        assert_eq!(d.literal_set().len(), 4);
    }

    #[test]
    fn print_parse_round_trip() {
        for s in ["x0&x1 | !x2&x3", "0", "1", "x0 | 1", "!x10&x3"] {
            let d = f(s);
            let printed = d.to_string();
            assert_eq!(f(&printed), d, "{s}");
        }
        assert_eq!(f(" !x2 & x3|x0&x1 ").to_string(), "!x2&x3 | x0&x1");
        assert!("x0 & y1".parse::<DnfFormula>().is_err());
        assert!("".parse::<DnfFormula>().is_err());
    }

    #[test]
    fn subsumption_reduction() {
        let d = f("x0&x1 | x0 | x0 | x1&x2&x3 | x1&x2");
        assert_eq!(d.subsumption_reduced().to_string(), "x0 | x1&x2");
    }

    #[test]
    fn masks_with_different_widths() {
        let small = t("x0");
        let wide = t("x0&x70");
        assert!(small.is_subset_of(&wide));
        assert!(!wide.is_subset_of(&small));
        let mut row = FixedBitSet::with_capacity(80);
        row.insert(0);
        assert!(small.eval_bits(&row));
        assert!(!wide.eval_bits(&row));
        row.insert(70);
        assert!(wide.eval_bits(&row));
        assert!(!t("!x70").eval_bits(&row));
        assert!(t("!x90").eval_bits(&row));
    }
}
