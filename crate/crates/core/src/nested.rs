//! Nested k-DNFs: a k×k literal matrix plus, per term, a vector of row
//! prefix lengths summing to at most k.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{DnfFormula, Literal, Term};
use crate::truth_table::TruthTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralMatrix {
    k: usize,
    cells: Vec<Vec<Literal>>,
}

impl LiteralMatrix {
    pub fn new(cells: Vec<Vec<Literal>>) -> Result<Self> {
        let k = cells.len();
        if k == 0 {
            return Err(Error::InvalidK { k, reason: "matrix must have at least one row".into() });
        }
        if let Some(row) = cells.iter().position(|r| r.len() != k) {
            return Err(Error::InvalidModel(format!("matrix row {row} does not have {k} cells")));
        }
        Ok(LiteralMatrix { k, cells })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cell(&self, row: usize, col: usize) -> Literal {
        self.cells[row][col]
    }

    pub fn rows(&self) -> &[Vec<Literal>] {
        &self.cells
    }

    pub fn max_var(&self) -> usize {
        self.cells.iter().flatten().map(|l| l.var).max().unwrap_or(0)
    }

    /// Flips the polarity of every cell on a variable in `vars`.
    pub fn flip_polarity(&self, vars: &[usize]) -> LiteralMatrix {
        let cells = self
            .cells
            .iter()
            .map(|row| row.iter().map(|&l| if vars.contains(&l.var) { l.negation() } else { l }).collect())
            .collect();
        LiteralMatrix { k: self.k, cells }
    }
}

impl fmt::Display for LiteralMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.cells {
            let cells: Vec<String> = row.iter().map(Literal::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// How many leftmost cells of each matrix row a term takes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowPrefix(Vec<usize>);

impl RowPrefix {
    pub fn new(r: Vec<usize>, k: usize) -> Result<Self> {
        if r.len() != k {
            return Err(Error::InvalidModel(format!("row vector {r:?} must have {k} entries")));
        }
        let total: usize = r.iter().sum();
        if total > k {
            return Err(Error::InvalidModel(format!("row vector {r:?} sums to {total} > k = {k}")));
        }
        Ok(RowPrefix(r))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Union of the `r[i]` leftmost literals of every row `i`. May be inconsistent.
pub fn expand_term(m: &LiteralMatrix, r: &RowPrefix) -> Term {
    r.as_slice().iter().enumerate().flat_map(|(i, &len)| m.cells[i][..len].iter().copied()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedDnf {
    matrix: LiteralMatrix,
    rows: Vec<RowPrefix>,
    n_vars: usize,
}

impl NestedDnf {
    pub fn new(matrix: LiteralMatrix, rows: Vec<RowPrefix>, n_vars: usize) -> Result<Self> {
        let k = matrix.k();
        if matrix.max_var() >= n_vars {
            return Err(Error::VarOutOfRange { var: matrix.max_var(), n_vars });
        }
        for r in &rows {
            RowPrefix::new(r.0.clone(), k)?;
        }
        Ok(NestedDnf { matrix, rows, n_vars })
    }

    pub fn k(&self) -> usize {
        self.matrix.k()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn matrix(&self) -> &LiteralMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> &[RowPrefix] {
        &self.rows
    }
}

/// The DNF of a nested model: consistent expansions, first occurrence wins.
pub fn expand_model(n: &NestedDnf) -> DnfFormula {
    let mut seen = HashSet::new();
    let terms = n
        .rows
        .iter()
        .map(|r| expand_term(&n.matrix, r))
        .filter(|t| t.is_consistent() && seen.insert(t.clone()))
        .collect();
    DnfFormula::new(n.n_vars, terms).expect("matrix variables are checked on construction")
}

/// Row i is `x_i, !x_{i+1}, ..., !x_{i+k-1}` with indices taken mod k.
pub fn universal_matrix(k: usize) -> Result<LiteralMatrix> {
    if k == 0 {
        return Err(Error::InvalidK { k, reason: "k must be at least 1".into() });
    }
    let cells = (0..k)
        .map(|i| (0..k).map(|j| if j == 0 { Literal::pos(i) } else { Literal::neg((i + j) % k) }).collect())
        .collect();
    LiteralMatrix::new(cells)
}

/// A nested encoding of a k-variable function; `flipped` lists the variables
/// whose polarity was swapped so that the all-zero input maps to 0.
#[derive(Debug, Clone)]
pub struct KVarEncoding {
    pub model: NestedDnf,
    pub flipped: Vec<usize>,
}

/// Encodes any function of k variables as a nested k-DNF over the universal
/// matrix: one row vector per satisfying assignment.
pub fn encode_k_var_function(table: &TruthTable) -> Result<KVarEncoding> {
    let k = table.n_vars();
    let base = universal_matrix(k)?;
    if table.constant_value() == Some(true) {
        let model = NestedDnf::new(base, vec![RowPrefix(vec![0; k])], k)?;
        return Ok(KVarEncoding { model, flipped: Vec::new() });
    }
    // relabel so that the first falsifying input becomes all-zeros
    let zero = (0..table.n_rows()).find(|&x| !table.get(x)).expect("not constant 1");
    let flipped: Vec<usize> = (0..k).filter(|i| zero >> i & 1 == 1).collect();
    let mut rows = Vec::new();
    for x in table.ones() {
        let y = x ^ zero;
        let ones: Vec<usize> = (0..k).filter(|i| y >> i & 1 == 1).collect();
        let mut r = vec![0; k];
        for (j, &i) in ones.iter().enumerate() {
            r[i] = match ones.get(j + 1) {
                Some(&next) => next - i,
                None => k + ones[0] - i,
            };
        }
        rows.push(RowPrefix(r));
    }
    let model = NestedDnf::new(base.flip_polarity(&flipped), rows, k)?;
    Ok(KVarEncoding { model, flipped })
}

/// Places each of the at most k terms of `d` on its own matrix row.
pub fn embed_small_dnf(d: &DnfFormula, k: usize) -> Result<NestedDnf> {
    if k == 0 {
        return Err(Error::InvalidK { k, reason: "k must be at least 1".into() });
    }
    if d.size() > k {
        return Err(Error::TooManyTerms { terms: d.size(), k });
    }
    if !d.is_k_dnf(k) {
        return Err(Error::TermTooLarge { size: d.max_term_size(), k });
    }
    if d.has_empty_term() {
        return Err(Error::InvalidModel("terms must be non-empty".into()));
    }
    let filler = d.terms().first().map_or(Literal::pos(0), |t| t.literals()[0]);
    let mut cells = Vec::with_capacity(k);
    let mut rows = Vec::with_capacity(d.size());
    for (i, t) in d.terms().iter().enumerate() {
        let lits = t.literals();
        let last = *lits.last().expect("non-empty term");
        cells.push((0..k).map(|j| lits.get(j).copied().unwrap_or(last)).collect());
        let mut r = vec![0; k];
        r[i] = lits.len();
        rows.push(RowPrefix(r));
    }
    while cells.len() < k {
        cells.push(vec![filler; k]);
    }
    NestedDnf::new(LiteralMatrix::new(cells)?, rows, d.n_vars().max(filler.var + 1))
}

/// Number of row vectors with entries summing to exactly k: C(2k-1, k-1).
pub fn count_nested_terms(k: usize) -> Result<u64> {
    if !(1..=30).contains(&k) {
        return Err(Error::InvalidK { k, reason: "supported range is 1..=30".into() });
    }
    let (n, r) = (2 * k as u128 - 1, k as u128 - 1);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    Ok(acc as u64)
}

/// Upper bound n^(2^k - 1) * 2^(2^k) on the functions of depth-k trees.
pub fn dt_count_upper_bound(k: usize, n: usize) -> Result<BigUint> {
    if k > 5 {
        return Err(Error::InvalidK { k, reason: "supported range is 0..=5".into() });
    }
    if n > 1 << 20 {
        return Err(Error::InvalidModel(format!("n = {n} exceeds 2^20")));
    }
    let leaves = 1u32 << k;
    Ok(BigUint::from(n).pow(leaves - 1) << leaves as usize)
}

/// A trained nested model with the metadata needed to apply it to data.
#[derive(Debug, Clone)]
pub struct NestedModel {
    pub nested: NestedDnf,
    pub feature_names: Vec<String>,
    pub label_for_positive: String,
    pub trained_on_complement: bool,
    expanded: DnfFormula,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    k: usize,
    n_vars: usize,
    feature_names: Vec<String>,
    matrix: Vec<Vec<Literal>>,
    rows: Vec<RowPrefix>,
    label_for_positive: String,
    trained_on_complement: bool,
}

impl NestedModel {
    pub fn new(
        nested: NestedDnf,
        feature_names: Vec<String>,
        label_for_positive: String,
        trained_on_complement: bool,
    ) -> Result<Self> {
        if feature_names.len() != nested.n_vars() {
            return Err(Error::SchemaMismatch(format!(
                "{} feature names for {} variables",
                feature_names.len(),
                nested.n_vars()
            )));
        }
        let expanded = expand_model(&nested);
        Ok(NestedModel { nested, feature_names, label_for_positive, trained_on_complement, expanded })
    }

    /// The DNF evaluated by the model (before any complement flip).
    pub fn expanded(&self) -> &DnfFormula {
        &self.expanded
    }

    pub fn n_terms(&self) -> usize {
        self.expanded.size()
    }

    /// Prediction for one example; negated when trained on swapped labels.
    pub fn predict_bits(&self, row: &FixedBitSet) -> bool {
        self.expanded.eval_bits(row) != self.trained_on_complement
    }

    pub fn to_json(&self) -> Result<String> {
        let repr = ModelRepr {
            k: self.nested.k(),
            n_vars: self.nested.n_vars(),
            feature_names: self.feature_names.clone(),
            matrix: self.nested.matrix().rows().to_vec(),
            rows: self.nested.rows().to_vec(),
            label_for_positive: self.label_for_positive.clone(),
            trained_on_complement: self.trained_on_complement,
        };
        Ok(serde_json::to_string_pretty(&repr)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: ModelRepr = serde_json::from_str(s)?;
        let matrix = LiteralMatrix::new(repr.matrix)?;
        if matrix.k() != repr.k {
            return Err(Error::InvalidModel(format!("matrix is {}x{}, k = {}", matrix.k(), matrix.k(), repr.k)));
        }
        let nested = NestedDnf::new(matrix, repr.rows, repr.n_vars)?;
        NestedModel::new(nested, repr.feature_names, repr.label_for_positive, repr.trained_on_complement)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
