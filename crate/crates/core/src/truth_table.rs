use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::formula::{Assignment, DnfFormula, Term};

/// Largest variable count accepted by the exact oracle (2^24 bits = 2 MiB).
pub const MAX_ORACLE_VARS: usize = 24;

/// Extensional boolean function: bit `i` is the value on the assignment whose
/// bit `j` is `x_j` (little-endian).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n_vars: usize,
    bits: FixedBitSet,
}

fn check_vars(n_vars: usize) -> Result<()> {
    if n_vars > MAX_ORACLE_VARS {
        Err(Error::OracleTooLarge { n_vars, limit: MAX_ORACLE_VARS })
    } else {
        Ok(())
    }
}

/// Calls `f` on every `base | sub` where `sub` ranges over submasks of `free`.
#[inline]
pub(crate) fn for_each_in_subcube(base: u64, free: u64, mut f: impl FnMut(u64) -> bool) -> bool {
    let mut sub = free;
    loop {
        if !f(base | sub) {
            return false;
        }
        if sub == 0 {
            return true;
        }
        sub = (sub - 1) & free;
    }
}

/// Masks (`care`, `value`) of the cube selected by a consistent term.
pub(crate) fn term_cube(t: &Term) -> (u64, u64) {
    let mut care = 0u64;
    let mut value = 0u64;
    for l in t.literals() {
        care |= 1 << l.var;
        if !l.neg {
            value |= 1 << l.var;
        }
    }
    (care, value)
}

impl TruthTable {
    pub fn constant(n_vars: usize, value: bool) -> Result<Self> {
        check_vars(n_vars)?;
        let mut bits = FixedBitSet::with_capacity(1 << n_vars);
        if value {
            bits.insert_range(..);
        }
        Ok(TruthTable { n_vars, bits })
    }

    pub fn from_fn(n_vars: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        check_vars(n_vars)?;
        let mut bits = FixedBitSet::with_capacity(1 << n_vars);
        for i in 0..(1u64 << n_vars) {
            if f(i) {
                bits.insert(i as usize);
            }
        }
        Ok(TruthTable { n_vars, bits })
    }

    /// Builds a table from the bit string `b_0 b_1 ...` of length 2^n.
    pub fn from_bits(n_vars: usize, values: &[bool]) -> Result<Self> {
        check_vars(n_vars)?;
        if values.len() != 1 << n_vars {
            return Err(Error::LengthMismatch { expected: 1 << n_vars, got: values.len() });
        }
        Self::from_fn(n_vars, |i| values[i as usize])
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> u64 {
        1 << self.n_vars
    }

    #[inline]
    pub fn get(&self, index: u64) -> bool {
        self.bits.contains(index as usize)
    }

    pub fn eval(&self, v: &Assignment) -> Result<bool> {
        if v.len() != self.n_vars {
            return Err(Error::LengthMismatch { expected: self.n_vars, got: v.len() });
        }
        Ok(self.get(v.to_index()))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn complement(&self) -> TruthTable {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        TruthTable { n_vars: self.n_vars, bits }
    }

    /// `Some(value)` when the function is constant.
    pub fn constant_value(&self) -> Option<bool> {
        match self.count_ones() {
            0 => Some(false),
            c if c as u64 == self.n_rows() => Some(true),
            _ => None,
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.ones().map(|i| i as u64)
    }

    /// True iff every assignment satisfying the consistent term `t` maps to 1.
    pub fn is_implicant(&self, t: &Term) -> bool {
        if !t.is_consistent() || t.max_var().is_some_and(|v| v >= self.n_vars) {
            return false;
        }
        let (care, value) = term_cube(t);
        let free = (self.n_rows() - 1) & !care;
        for_each_in_subcube(value, free, |x| self.get(x))
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}; ", self.n_vars)?;
        for i in 0..self.n_rows().min(64) {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        if self.n_rows() > 64 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

/// Tabulates `d` over its `n_vars` variables.
pub fn dnf_to_truthtable(d: &DnfFormula) -> Result<TruthTable> {
    let n = d.n_vars();
    let mut table = TruthTable::constant(n, false)?;
    let all = table.n_rows() - 1;
    for t in d.terms().iter().filter(|t| t.is_consistent()) {
        let (care, value) = term_cube(t);
        for_each_in_subcube(value, all & !care, |x| {
            table.bits.insert(x as usize);
            true
        });
    }
    Ok(table)
}
