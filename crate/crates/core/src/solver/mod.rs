//! Multiplicative-update fitting.
//!
//! One sweep updates every factor in turn. For factor `slot` the update is
//!
//! ```text
//! theta <- max(eps, theta ⊙ g⁻¹(A / B))
//! ```
//!
//! where `A` and `B` are contractions of the swapped model string with the
//! slot's tensor replaced by the elementwise fields `a(Y, Ŷ)` and `b(Y, Ŷ)`
//! (zeroed outside the training mask). The prediction `Ŷ` is recomputed
//! before every factor update; the monotone-descent guarantee depends on it.
//!
//! Stopping mirrors the usual protocol: strictly increasing validation loss
//! for `val_patience` consecutive sweeps, a relative training-loss decrease
//! below `min_rel_decrease`, or `max_iters` sweeps.

pub mod surrogate;

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::einsum::{contract, DimensionBinding, ModelString};
use crate::error::{Error, Result};
use crate::losses::{GInverse, LossSpec};
use crate::tensor::{masked_total_loss, DenseTensor, Mask, MaskView, SplitLabel};

/// Entries below this in both the numerator and denominator are treated as a
/// dead coordinate: the multiplier is pinned to 1 and the parameter held.
const RATIO_DEAD_EPS: f64 = 1e-300;

/// The model's parameter tensors, one per operand, every entry >= epsilon.
#[derive(Debug, Clone)]
pub struct FactorSet {
    pub factors: Vec<DenseTensor>,
    pub epsilon: f64,
}

impl FactorSet {
    pub fn new(factors: Vec<DenseTensor>, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "factor epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(FactorSet { factors, epsilon })
    }

    /// Draw every factor entry i.i.d. uniform on [0, 1), clamped below by
    /// `epsilon`. Deterministic per seed.
    pub fn init_uniform(
        ms: &ModelString,
        binding: &DimensionBinding,
        seed: u64,
        epsilon: f64,
    ) -> Result<Self> {
        binding.covers(ms)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut factors = Vec::with_capacity(ms.operand_count());
        for slot in 0..ms.operand_count() {
            let shape = binding.operand_shape(ms, slot)?;
            let n = shape.iter().product();
            let data: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().max(epsilon)).collect();
            factors.push(DenseTensor::new(shape, data)?);
        }
        FactorSet::new(factors, epsilon)
    }

    pub fn refs(&self) -> Vec<&DenseTensor> {
        self.factors.iter().collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.factors
            .iter()
            .map(|t| t.min_entry())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_finite(&self) -> bool {
        self.factors.iter().all(|t| t.all_finite())
    }
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub loss: LossSpec,
    pub max_iters: usize,
    /// Relative training-loss decrease below which the run stops. Zero
    /// disables the plateau rule.
    pub min_rel_decrease: f64,
    pub val_patience: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl FitConfig {
    pub fn new(loss: LossSpec) -> Self {
        FitConfig {
            loss,
            max_iters: 5000,
            min_rel_decrease: 1e-6,
            val_patience: 5,
            seed: 0,
            epsilon: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.min_rel_decrease.is_finite() && self.min_rel_decrease >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "min_rel_decrease must be nonnegative, got {}",
                self.min_rel_decrease
            )));
        }
        if self.val_patience == 0 {
            return Err(Error::InvalidArgument("val_patience must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why a fit ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Patience,
    Plateau,
    MaxIters,
    Diverged,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Patience => "patience",
            StopReason::Plateau => "plateau",
            StopReason::MaxIters => "max_iters",
            StopReason::Diverged => "diverged",
        }
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fit outcome: loss traces and bookkeeping.
#[derive(Debug, Clone)]
pub struct FitReport {
    /// Total training loss after each sweep.
    pub train_loss_trace: Vec<f64>,
    /// Total validation loss after each sweep; NaN when the validation set is
    /// empty.
    pub val_loss_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub elapsed_seconds: f64,
}

/// Shared stopping rule; fed one observation per sweep.
#[derive(Debug, Clone)]
pub(crate) struct StopRule {
    min_rel_decrease: f64,
    patience: usize,
    prev_train: Option<f64>,
    prev_val: Option<f64>,
    val_increase_streak: usize,
}

impl StopRule {
    pub(crate) fn new(min_rel_decrease: f64, patience: usize) -> Self {
        StopRule {
            min_rel_decrease,
            patience,
            prev_train: None,
            prev_val: None,
            val_increase_streak: 0,
        }
    }

    pub(crate) fn observe(&mut self, train: f64, val: Option<f64>) -> Option<StopReason> {
        if !train.is_finite() || val.map_or(false, |v| !v.is_finite()) {
            return Some(StopReason::Diverged);
        }
        if let Some(v) = val {
            match self.prev_val {
                Some(prev) if v > prev => self.val_increase_streak += 1,
                _ => self.val_increase_streak = 0,
            }
            self.prev_val = Some(v);
            if self.val_increase_streak >= self.patience {
                return Some(StopReason::Patience);
            }
        }
        if let Some(prev) = self.prev_train {
            let decrease = (prev - train) / prev.abs().max(RATIO_DEAD_EPS);
            // Only a genuine-but-negligible decrease counts as a plateau; an
            // increase is left to the patience/divergence rules.
            if decrease >= 0.0 && decrease < self.min_rel_decrease {
                self.prev_train = Some(train);
                return Some(StopReason::Plateau);
            }
        }
        self.prev_train = Some(train);
        None
    }
}

/// Elementwise update fields a(Y, Ŷ) and b(Y, Ŷ), zeroed outside the
/// training mask. Entries outside the mask are never evaluated, so values
/// there cannot influence the fit or raise domain errors.
fn masked_ab(
    y: &DenseTensor,
    yhat: &DenseTensor,
    train: MaskView<'_>,
    loss: &LossSpec,
) -> Result<(DenseTensor, DenseTensor)> {
    let n = y.len();
    let mut a = vec![0.0f64; n];
    let mut b = vec![0.0f64; n];
    for i in 0..n {
        if train.selected(i) {
            let (ai, bi) = loss.ab(y.data()[i], yhat.data()[i])?;
            a[i] = ai;
            b[i] = bi;
        }
    }
    Ok((
        DenseTensor::new(y.shape().to_vec(), a)?,
        DenseTensor::new(y.shape().to_vec(), b)?,
    ))
}

/// Contract `ms` with the tensor at `slot` replaced.
pub(crate) fn contract_with_replaced(
    ms: &ModelString,
    binding: &DimensionBinding,
    factors: &FactorSet,
    slot: usize,
    replacement: &DenseTensor,
) -> Result<DenseTensor> {
    let mut ops: Vec<&DenseTensor> = factors.refs();
    ops[slot] = replacement;
    contract(ms, binding, &ops)
}

fn multiplier(ginv: GInverse, num: f64, den: f64, loss: &LossSpec) -> Result<f64> {
    if num.abs() < RATIO_DEAD_EPS && den.abs() < RATIO_DEAD_EPS {
        // 0/0: a dead coordinate stays where it is.
        return Ok(1.0);
    }
    let t = num / den;
    if !t.is_finite() {
        return Err(Error::LossDomain(format!(
            "update ratio {num}/{den} is not finite for loss {}",
            loss.name()
        )));
    }
    match ginv {
        GInverse::Identity => Ok(t),
        GInverse::Exp => Ok(t.exp()),
        GInverse::Power { exponent } => {
            if t < 0.0 {
                Err(Error::LossDomain("ratio outside Range(g)".into()))
            } else if t == 0.0 {
                if exponent > 0.0 {
                    Ok(0.0)
                } else {
                    // Ratio at the boundary of Range(g) with a decreasing
                    // link; hold the coordinate rather than diverge.
                    Ok(1.0)
                }
            } else {
                Ok(t.powf(exponent))
            }
        }
    }
}

/// One multiplicative update of the factor in `slot`, using only entries
/// selected by the training view. Returns the updated factor.
pub fn update_factor(
    y: &DenseTensor,
    train: MaskView<'_>,
    factors: &FactorSet,
    ms: &ModelString,
    binding: &DimensionBinding,
    slot: usize,
    loss: &LossSpec,
) -> Result<DenseTensor> {
    if slot >= ms.operand_count() {
        return Err(Error::InvalidArgument(format!(
            "operand slot {slot} out of range"
        )));
    }
    if !loss.supports_update() {
        return Err(Error::InvalidLoss(
            "no multiplicative update for α=0, β≠1".into(),
        ));
    }
    let yhat = contract(ms, binding, &factors.refs())?;
    let (a_field, b_field) = masked_ab(y, &yhat, train, loss)?;
    let swapped = ms.swap(slot)?;
    let numer = contract_with_replaced(&swapped, binding, factors, slot, &a_field)?;
    let denom = contract_with_replaced(&swapped, binding, factors, slot, &b_field)?;

    let ginv = loss.g_inverse_kind()?;
    let theta = &factors.factors[slot];
    let mut data = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let m = multiplier(ginv, numer.data()[i], denom.data()[i], loss)?;
        data.push((theta.data()[i] * m).max(factors.epsilon));
    }
    DenseTensor::new(theta.shape().to_vec(), data)
}

/// Fit the model to `y` by cyclic multiplicative updates.
pub fn fit(
    y: &DenseTensor,
    mask: &Mask,
    ms: &ModelString,
    binding: &DimensionBinding,
    config: &FitConfig,
) -> Result<(FactorSet, FitReport)> {
    config.validate()?;
    if !config.loss.supports_update() {
        return Err(Error::InvalidLoss(
            "no multiplicative update for α=0, β≠1".into(),
        ));
    }
    if y.shape() != mask.shape() {
        return Err(Error::ShapeMismatch(format!(
            "data shape {:?} does not match mask shape {:?}",
            y.shape(),
            mask.shape()
        )));
    }
    let expected = binding.output_shape(ms)?;
    if y.shape() != expected.as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "data shape {:?} does not match model output shape {:?}",
            y.shape(),
            expected
        )));
    }
    if y.data().iter().any(|&v| v < 0.0) {
        return Err(Error::LossDomain("data must be nonnegative".into()));
    }

    let start = Instant::now();
    let mut factors = FactorSet::init_uniform(ms, binding, config.seed, config.epsilon)?;
    let train = mask.view(SplitLabel::Train);
    let val = mask.view(SplitLabel::Validation);
    let has_val = val.count() > 0;

    let mut train_trace = Vec::new();
    let mut val_trace = Vec::new();
    let mut stop_reason = StopReason::MaxIters;
    let mut rule = StopRule::new(config.min_rel_decrease, config.val_patience);

    for _iter in 0..config.max_iters {
        for slot in 0..ms.operand_count() {
            factors.factors[slot] =
                update_factor(y, train, &factors, ms, binding, slot, &config.loss)?;
        }
        let yhat = contract(ms, binding, &factors.refs())?;
        let train_loss = masked_total_loss(y, &yhat, train, &config.loss)?;
        let val_loss = if has_val {
            masked_total_loss(y, &yhat, val, &config.loss)?
        } else {
            f64::NAN
        };
        train_trace.push(train_loss);
        val_trace.push(val_loss);
        if let Some(reason) = rule.observe(train_loss, has_val.then_some(val_loss)) {
            stop_reason = reason;
            break;
        }
    }

    let iterations = train_trace.len();
    Ok((
        factors,
        FitReport {
            train_loss_trace: train_trace,
            val_loss_trace: val_trace,
            stop_reason,
            iterations,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        },
    ))
}
