//! Dense nonnegative tensors, split masks, and masked loss evaluation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::losses::LossSpec;

/// Checked product of dimensions; errors instead of wrapping.
pub(crate) fn checked_len(shape: &[usize]) -> Result<usize> {
    let mut n: usize = 1;
    for &d in shape {
        if d == 0 {
            return Err(Error::ShapeMismatch("zero dimension in shape".into()));
        }
        n = n
            .checked_mul(d)
            .ok_or_else(|| Error::DimensionOverflow(format!("shape {shape:?} overflows usize")))?;
    }
    Ok(n)
}

/// Summation with pairwise (tree) reduction. Keeps large loss totals accurate
/// enough that monotonicity checks remain meaningful.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    const BASE: usize = 64;
    if values.len() <= BASE {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        acc
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// An M-mode array of 64-bit floats in row-major order.
///
/// Construction checks that the flat data length matches the shape product and
/// that every entry is finite. The tensor is immutable once built; all
/// elementwise operations return a new tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n = checked_len(&shape)?;
        if n != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} implies {} entries but {} were supplied",
                shape,
                n,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry {} at flat index {}",
                data[bad], bad
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let n = checked_len(&shape)?;
        Ok(DenseTensor {
            shape,
            data: vec![0.0; n],
        })
    }

    pub fn from_elem(shape: Vec<usize>, value: f64) -> Result<Self> {
        let n = checked_len(&shape)?;
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite fill value {value}")));
        }
        Ok(DenseTensor {
            shape,
            data: vec![value; n],
        })
    }

    /// 0-mode tensor holding a single value.
    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![value])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.shape.len()];
        for axis in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.shape[axis + 1];
        }
        strides
    }

    /// Element access by multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        debug_assert_eq!(index.len(), self.shape.len());
        let strides = self.strides();
        let mut flat = 0usize;
        for (axis, &i) in index.iter().enumerate() {
            debug_assert!(i < self.shape[axis]);
            flat += i * strides[axis];
        }
        self.data[flat]
    }

    /// Apply `f` to every entry. Errors if `f` produces a NaN anywhere.
    pub fn elementwise_map(&self, f: impl Fn(f64) -> f64) -> Result<DenseTensor> {
        let mut data = Vec::with_capacity(self.data.len());
        for (i, &v) in self.data.iter().enumerate() {
            let mapped = f(v);
            if mapped.is_nan() {
                return Err(Error::InvalidArgument(format!(
                    "map produced NaN at flat index {i} (input {v})"
                )));
            }
            data.push(mapped);
        }
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data,
        })
    }

    /// Pointwise combination of two same-shaped tensors.
    pub fn zip_map(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "zip over shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for (i, (&a, &b)) in self.data.iter().zip(other.data.iter()).enumerate() {
            let v = f(a, b);
            if v.is_nan() {
                return Err(Error::InvalidArgument(format!(
                    "zip produced NaN at flat index {i} (inputs {a}, {b})"
                )));
            }
            data.push(v);
        }
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Which split a tensor entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum SplitLabel {
    Train = 0,
    Validation = 1,
    Heldout = 2,
}

/// Train/validation/heldout partition of a tensor's entries.
///
/// Stored as one label byte per entry; binary views are projections of the
/// label tensor so the three sets are disjoint by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    shape: Vec<usize>,
    labels: Vec<SplitLabel>,
}

impl Mask {
    pub fn from_labels(shape: Vec<usize>, labels: Vec<SplitLabel>) -> Result<Self> {
        let n = checked_len(&shape)?;
        if n != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "mask shape {:?} implies {} labels but {} were supplied",
                shape,
                n,
                labels.len()
            )));
        }
        Ok(Mask { shape, labels })
    }

    /// Every entry marked train.
    pub fn all_train(shape: Vec<usize>) -> Result<Self> {
        let n = checked_len(&shape)?;
        Ok(Mask {
            shape,
            labels: vec![SplitLabel::Train; n],
        })
    }

    /// Random split: each entry is independently heldout with probability
    /// `p_heldout`, otherwise validation with probability `p_validation`,
    /// otherwise train. Deterministic for a fixed seed.
    pub fn split(shape: Vec<usize>, p_heldout: f64, p_validation: f64, seed: u64) -> Result<Self> {
        for (name, p) in [("p_heldout", p_heldout), ("p_validation", p_validation)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [0, 1), got {p}"
                )));
            }
        }
        if p_heldout + (1.0 - p_heldout) * p_validation >= 1.0 {
            return Err(Error::InvalidArgument(
                "split probabilities leave no training mass".into(),
            ));
        }
        let n = checked_len(&shape)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Single uniform draw per entry; the validation band sits after the
        // heldout band so the marginal probabilities match the contract.
        let val_edge = p_heldout + (1.0 - p_heldout) * p_validation;
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            labels.push(if u < p_heldout {
                SplitLabel::Heldout
            } else if u < val_edge {
                SplitLabel::Validation
            } else {
                SplitLabel::Train
            });
        }
        Ok(Mask { shape, labels })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, flat: usize) -> SplitLabel {
        self.labels[flat]
    }

    /// Entry counts as [train, validation, heldout].
    pub fn counts(&self) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for l in &self.labels {
            counts[*l as usize] += 1;
        }
        counts
    }

    /// Binary projection selecting one label.
    pub fn view(&self, label: SplitLabel) -> MaskView<'_> {
        MaskView { mask: self, label }
    }
}

/// Binary view of a [`Mask`] selecting the entries with one label.
#[derive(Debug, Clone, Copy)]
pub struct MaskView<'a> {
    mask: &'a Mask,
    label: SplitLabel,
}

impl<'a> MaskView<'a> {
    pub fn shape(&self) -> &[usize] {
        self.mask.shape()
    }

    pub fn selected(&self, flat: usize) -> bool {
        self.mask.labels[flat] == self.label
    }

    pub fn count(&self) -> usize {
        self.mask.counts()[self.label as usize]
    }

    pub fn label(&self) -> SplitLabel {
        self.label
    }
}

/// Total loss over the selected entries of `mask_view`.
pub fn masked_total_loss(
    y: &DenseTensor,
    yhat: &DenseTensor,
    mask_view: MaskView<'_>,
    loss: &LossSpec,
) -> Result<f64> {
    if y.shape() != yhat.shape() || y.shape() != mask_view.shape() {
        return Err(Error::ShapeMismatch(format!(
            "masked loss over shapes {:?}, {:?}, mask {:?}",
            y.shape(),
            yhat.shape(),
            mask_view.shape()
        )));
    }
    let mut terms = Vec::new();
    for i in 0..y.len() {
        if mask_view.selected(i) {
            terms.push(loss.loss(y.data()[i], yhat.data()[i])?);
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Mean loss over the selected entries; errors when nothing is selected.
pub fn masked_mean_loss(
    y: &DenseTensor,
    yhat: &DenseTensor,
    mask_view: MaskView<'_>,
    loss: &LossSpec,
) -> Result<f64> {
    let count = mask_view.count();
    if count == 0 {
        return Err(Error::EmptyEvaluationSet);
    }
    Ok(masked_total_loss(y, yhat, mask_view, loss)? / count as f64)
}
