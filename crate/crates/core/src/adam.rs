//! Gradient-descent baseline: Adam on log-transformed parameters.
//!
//! Optimizing `w = ln(theta)` keeps every parameter strictly positive with no
//! clamping. Gradients are analytic: the masked elementwise `dL/dŷ` field is
//! contracted through the same swapped model strings the multiplicative
//! solver uses, and the chain rule to log-space is `theta ⊙ grad`. That makes
//! this module double as an independent check on the update machinery.

use std::time::Instant;

use crate::einsum::{contract, DimensionBinding, ModelString};
use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::solver::{contract_with_replaced, FactorSet, FitReport, StopReason, StopRule};
use crate::tensor::{masked_total_loss, DenseTensor, Mask, MaskView, SplitLabel};

/// Initial learning rates swept when comparing against the multiplicative
/// solver.
pub const LEARNING_RATE_GRID: [f64; 6] = [0.01, 0.05, 0.1, 0.3, 0.5, 1.0];

/// Adam settings; stopping fields mirror the solver's.
#[derive(Debug, Clone)]
pub struct AdamConfig {
    pub loss: LossSpec,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub stabilizer: f64,
    pub max_iters: usize,
    pub min_rel_decrease: f64,
    pub val_patience: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn new(loss: LossSpec, learning_rate: f64) -> Self {
        AdamConfig {
            loss,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            stabilizer: 1e-8,
            max_iters: 5000,
            min_rel_decrease: 1e-6,
            val_patience: 5,
            seed: 0,
            epsilon: 1e-12,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be nonnegative, got {}",
                self.learning_rate
            )));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1)")));
            }
        }
        if self.val_patience == 0 {
            return Err(Error::InvalidArgument("val_patience must be >= 1".into()));
        }
        Ok(())
    }
}

/// Masked elementwise dL/dŷ field.
fn masked_dloss(
    y: &DenseTensor,
    yhat: &DenseTensor,
    train: MaskView<'_>,
    loss: &LossSpec,
) -> Result<DenseTensor> {
    let mut data = vec![0.0f64; y.len()];
    for i in 0..y.len() {
        if train.selected(i) {
            data[i] = loss.dloss_dy(y.data()[i], yhat.data()[i])?;
        }
    }
    DenseTensor::new(y.shape().to_vec(), data)
}

/// Gradient of the masked total loss with respect to the factor in `slot`,
/// shaped like that factor.
pub fn loss_gradient(
    y: &DenseTensor,
    train: MaskView<'_>,
    factors: &FactorSet,
    ms: &ModelString,
    binding: &DimensionBinding,
    slot: usize,
    loss: &LossSpec,
) -> Result<DenseTensor> {
    let yhat = contract(ms, binding, &factors.refs())?;
    let field = masked_dloss(y, &yhat, train, loss)?;
    let swapped = ms.swap(slot)?;
    contract_with_replaced(&swapped, binding, factors, slot, &field)
}

/// Fit by Adam on `w = ln(theta)`. Initialization matches the multiplicative
/// solver's uniform draw for the same seed, so the two methods start from the
/// same loss.
pub fn fit_adam(
    y: &DenseTensor,
    mask: &Mask,
    ms: &ModelString,
    binding: &DimensionBinding,
    config: &AdamConfig,
) -> Result<(FactorSet, FitReport)> {
    config.validate()?;
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
    let init = FactorSet::init_uniform(ms, binding, config.seed, config.epsilon)?;
    let mut log_params: Vec<Vec<f64>> = init
        .factors
        .iter()
        .map(|t| t.data().iter().map(|v| v.ln()).collect())
        .collect();
    let mut m: Vec<Vec<f64>> = log_params.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut v: Vec<Vec<f64>> = log_params.iter().map(|w| vec![0.0; w.len()]).collect();

    let train = mask.view(SplitLabel::Train);
    let val = mask.view(SplitLabel::Validation);
    let has_val = val.count() > 0;

    let mut factors = init;
    let mut train_trace = Vec::new();
    let mut val_trace = Vec::new();
    let mut stop_reason = StopReason::MaxIters;
    let mut rule = StopRule::new(config.min_rel_decrease, config.val_patience);

    for step in 1..=config.max_iters {
        // Log-space gradients at the current parameters.
        let yhat = contract(ms, binding, &factors.refs())?;
        if !yhat.all_finite() {
            stop_reason = StopReason::Diverged;
            break;
        }
        let field = masked_dloss(y, &yhat, train, &config.loss)?;
        let mut grads = Vec::with_capacity(factors.factors.len());
        for slot in 0..factors.factors.len() {
            let swapped = ms.swap(slot)?;
            let g = contract_with_replaced(&swapped, binding, &factors, slot, &field)?;
            grads.push(g);
        }

        let bias1 = 1.0 - config.beta1.powi(step as i32);
        let bias2 = 1.0 - config.beta2.powi(step as i32);
        for slot in 0..factors.factors.len() {
            let theta = factors.factors[slot].data();
            let g = grads[slot].data();
            let w = &mut log_params[slot];
            let (ms_, vs_) = (&mut m[slot], &mut v[slot]);
            for i in 0..w.len() {
                let gw = theta[i] * g[i]; // chain rule into log space
                ms_[i] = config.beta1 * ms_[i] + (1.0 - config.beta1) * gw;
                vs_[i] = config.beta2 * vs_[i] + (1.0 - config.beta2) * gw * gw;
                let m_hat = ms_[i] / bias1;
                let v_hat = vs_[i] / bias2;
                w[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.stabilizer);
            }
        }
        for slot in 0..factors.factors.len() {
            let shape = factors.factors[slot].shape().to_vec();
            let data: Vec<f64> = log_params[slot].iter().map(|w| w.exp()).collect();
            if data.iter().any(|x| !x.is_finite()) {
                stop_reason = StopReason::Diverged;
                break;
            }
            factors.factors[slot] = DenseTensor::new(shape, data)?;
        }
        if stop_reason == StopReason::Diverged {
            break;
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
