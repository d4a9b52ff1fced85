//! Einsum-style model strings and their contraction.
//!
//! Grammar (bit-exact, spaces stripped before parsing):
//!
//! ```text
//! model      := subscripts ("," subscripts)* "->" subscripts
//! subscripts := index*
//! index      := [a-zA-Z]          (one character per tensor axis)
//! ```
//!
//! Indices on the right of `->` are *observed* (kept in the output); indices
//! appearing only on the left are *contracted* (summed). An index may not
//! repeat within a single operand — diagonals and parameter tying are
//! unsupported. An index appearing in a single operand and not in the output
//! is summed out (plain marginalization).
//!
//! [`ModelString::swap`] exchanges the output subscript with one operand's
//! subscript. That transformed string evaluates the chain-rule sums of the
//! model's partial derivatives, which is how the solver builds its update
//! numerators and denominators. A swapped string may place an index in the
//! output that no operand carries (the operand it came from was the only
//! holder); contraction then broadcasts along that axis. `parse` rejects such
//! strings in user input, but the executors accept them.

mod exec;
mod oracle;

pub use exec::{contract, plan, ContractionPlan, PairStep};
pub use oracle::contract_oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{checked_len, DenseTensor};

/// A parsed einsum model specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelString {
    operands: Vec<Vec<char>>,
    output: Vec<char>,
}

impl ModelString {
    /// Parse and validate a model string such as `"ir,jr->ij"`.
    pub fn parse(text: &str) -> Result<Self> {
        let stripped: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parts = stripped.split("->");
        let lhs = parts.next().unwrap_or("");
        let rhs = match parts.next() {
            Some(r) => r,
            None => return Err(Error::Parse("missing '->' separator".into())),
        };
        if parts.next().is_some() {
            return Err(Error::Parse("multiple '->' separators".into()));
        }

        let mut operands = Vec::new();
        for (pos, sub) in lhs.split(',').enumerate() {
            if sub.is_empty() {
                return Err(Error::Parse(format!("empty operand subscript at position {}", pos + 1)));
            }
            let mut seen = BTreeSet::new();
            let mut chars = Vec::new();
            for c in sub.chars() {
                if !c.is_ascii_alphabetic() {
                    return Err(Error::Parse(format!("illegal character '{c}' in model string")));
                }
                if !seen.insert(c) {
                    return Err(Error::Parse(format!(
                        "repeated index '{c}' within operand {} (parameter tying unsupported)",
                        pos + 1
                    )));
                }
                chars.push(c);
            }
            operands.push(chars);
        }

        let mut output = Vec::new();
        let mut seen = BTreeSet::new();
        for c in rhs.chars() {
            if !c.is_ascii_alphabetic() {
                return Err(Error::Parse(format!("illegal character '{c}' in model string")));
            }
            if !seen.insert(c) {
                return Err(Error::Parse(format!("repeated index '{c}' in output")));
            }
            output.push(c);
        }

        for &c in &output {
            if !operands.iter().any(|op| op.contains(&c)) {
                return Err(Error::Parse(format!(
                    "output index '{c}' does not appear in any operand"
                )));
            }
        }

        Ok(ModelString { operands, output })
    }

    /// Assemble from parts without the output-coverage check. Used by `swap`
    /// and by internal strings whose output may broadcast.
    pub(crate) fn from_parts(operands: Vec<Vec<char>>, output: Vec<char>) -> Self {
        ModelString { operands, output }
    }

    pub fn operand_count(&self) -> usize {
        self.operands.len()
    }

    pub fn operands(&self) -> &[Vec<char>] {
        &self.operands
    }

    pub fn operand(&self, slot: usize) -> &[char] {
        &self.operands[slot]
    }

    pub fn output(&self) -> &[char] {
        &self.output
    }

    /// Indices shared with the data tensor (those in the output).
    pub fn observed_indices(&self) -> BTreeSet<char> {
        self.output.iter().copied().collect()
    }

    /// Indices summed over (appear in operands but not the output).
    pub fn contracted_indices(&self) -> BTreeSet<char> {
        let observed = self.observed_indices();
        let mut contracted = BTreeSet::new();
        for op in &self.operands {
            for &c in op {
                if !observed.contains(&c) {
                    contracted.insert(c);
                }
            }
        }
        contracted
    }

    /// All distinct indices.
    pub fn index_universe(&self) -> BTreeSet<char> {
        let mut u = self.observed_indices();
        u.extend(self.contracted_indices());
        u
    }

    /// Contracted indices belonging to one operand, in operand order.
    pub fn operand_contracted(&self, slot: usize) -> Vec<char> {
        let observed = self.observed_indices();
        self.operands[slot]
            .iter()
            .copied()
            .filter(|c| !observed.contains(c))
            .collect()
    }

    /// Exchange the output subscript with operand `slot`'s subscript,
    /// leaving every other operand unchanged.
    pub fn swap(&self, slot: usize) -> Result<ModelString> {
        if slot >= self.operands.len() {
            return Err(Error::InvalidArgument(format!(
                "operand slot {slot} out of range (model has {} operands)",
                self.operands.len()
            )));
        }
        let mut operands = self.operands.clone();
        let new_output = std::mem::replace(&mut operands[slot], self.output.clone());
        Ok(ModelString {
            operands,
            output: new_output,
        })
    }
}

impl fmt::Display for ModelString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, op) in self.operands.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            for c in op {
                write!(f, "{c}")?;
            }
        }
        f.write_str("->")?;
        for c in &self.output {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Map from index character to its dimension. The single source of truth for
/// axis sizes; operands and data must agree with it exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DimensionBinding {
    dims: BTreeMap<char, usize>,
}

impl DimensionBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (char, usize)>) -> Result<Self> {
        let mut binding = Self::new();
        for (c, d) in pairs {
            binding.bind(c, d)?;
        }
        Ok(binding)
    }

    /// Bind one index to a dimension; rebinding to a different size is an
    /// error.
    pub fn bind(&mut self, index: char, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "index '{index}' bound to zero dimension"
            )));
        }
        if let Some(&existing) = self.dims.get(&index) {
            if existing != dim {
                return Err(Error::ShapeMismatch(format!(
                    "index '{index}' bound to both {existing} and {dim}"
                )));
            }
        }
        self.dims.insert(index, dim);
        Ok(())
    }

    pub fn get(&self, index: char) -> Option<usize> {
        self.dims.get(&index).copied()
    }

    pub fn dim(&self, index: char) -> Result<usize> {
        self.get(index)
            .ok_or_else(|| Error::ShapeMismatch(format!("index '{index}' has no bound dimension")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, usize)> + '_ {
        self.dims.iter().map(|(&c, &d)| (c, d))
    }

    /// Check that every index of `ms` is bound.
    pub fn covers(&self, ms: &ModelString) -> Result<()> {
        for c in ms.index_universe() {
            self.dim(c)?;
        }
        Ok(())
    }

    pub fn operand_shape(&self, ms: &ModelString, slot: usize) -> Result<Vec<usize>> {
        ms.operand(slot).iter().map(|&c| self.dim(c)).collect()
    }

    pub fn output_shape(&self, ms: &ModelString) -> Result<Vec<usize>> {
        ms.output().iter().map(|&c| self.dim(c)).collect()
    }

    /// Validate a full operand list against the model and this binding.
    pub fn validate_operands(&self, ms: &ModelString, operands: &[&DenseTensor]) -> Result<()> {
        if operands.len() != ms.operand_count() {
            return Err(Error::ShapeMismatch(format!(
                "model has {} operands but {} tensors were supplied",
                ms.operand_count(),
                operands.len()
            )));
        }
        self.covers(ms)?;
        for (slot, t) in operands.iter().enumerate() {
            let expected = self.operand_shape(ms, slot)?;
            if t.shape() != expected.as_slice() {
                return Err(Error::ShapeMismatch(format!(
                    "operand {} has shape {:?}, binding implies {:?}",
                    slot + 1,
                    t.shape(),
                    expected
                )));
            }
        }
        // Refuse outputs that would not be addressable.
        checked_len(&self.output_shape(ms)?)?;
        Ok(())
    }
}

/// Odometer over a multi-dimensional index range.
pub(crate) struct IndexIter {
    shape: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl IndexIter {
    pub(crate) fn new(shape: &[usize]) -> Self {
        IndexIter {
            shape: shape.to_vec(),
            current: vec![0; shape.len()],
            done: shape.iter().any(|&d| d == 0),
        }
    }
}

impl Iterator for IndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let item = self.current.clone();
        let mut axis = self.shape.len();
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            self.current[axis] += 1;
            if self.current[axis] < self.shape[axis] {
                break;
            }
            self.current[axis] = 0;
        }
        Some(item)
    }
}
