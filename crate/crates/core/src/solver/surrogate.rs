//! Majorization surrogate, used as a test oracle.
//!
//! For a factor update the objective admits an upper bound Q built from a
//! convex-concave split of the pointwise loss: Jensen's inequality over the
//! slot's contracted indices bounds the convex part, a tangent line bounds
//! the concave part. Q touches the objective at the current iterate and the
//! multiplicative update minimizes it — the sandwich the test suite checks.
//!
//! Only the generic `(alpha, beta)` case (alpha, beta, alpha+beta all
//! nonzero) is supported. The split assigns each closed-form term to the
//! convex or concave side by the sign of its second derivative in `y`
//! (coefficient times `p(p-1)` for a `c·y^p` term); constants ride with the
//! concave side. The paper-facing symbols c(λ), L^vex, L^cave have no
//! runtime role anywhere else.

use crate::einsum::{contract, contract_oracle, DimensionBinding, IndexIter, ModelString};
use crate::error::{Error, Result};
use crate::losses::{LossKind, LossSpec};
use crate::solver::FactorSet;
use crate::tensor::DenseTensor;

/// The two y-dependent terms of the generic closed form, as (coefficient,
/// exponent) pairs, plus the constant-in-y term.
struct GenericTerms {
    terms: [(f64, f64); 2],
    constant: f64,
}

fn generic_params(loss: &LossSpec) -> Result<(f64, f64)> {
    match *loss.kind() {
        LossKind::AlphaBeta { alpha, beta }
            if alpha != 0.0 && beta != 0.0 && alpha + beta != 0.0 =>
        {
            Ok((alpha, beta))
        }
        _ => Err(Error::InvalidLoss(
            "surrogate oracle supports only the generic (alpha, beta) case".into(),
        )),
    }
}

fn terms_at(alpha: f64, beta: f64, x: f64) -> GenericTerms {
    let s = alpha + beta;
    GenericTerms {
        terms: [
            (1.0 / (alpha * s), s),                    // y^(alpha+beta) term
            (-x.powf(alpha) / (alpha * beta), beta),   // -x^alpha y^beta term
        ],
        constant: x.powf(s) / (beta * s),
    }
}

fn term_is_convex(coeff: f64, exponent: f64) -> bool {
    coeff * exponent * (exponent - 1.0) >= 0.0
}

/// Convex component of the pointwise loss.
pub fn vex(loss: &LossSpec, x: f64, y: f64) -> Result<f64> {
    let (alpha, beta) = generic_params(loss)?;
    let t = terms_at(alpha, beta, x);
    let mut v = 0.0;
    for (c, p) in t.terms {
        if term_is_convex(c, p) {
            v += c * y.powf(p);
        }
    }
    Ok(v)
}

/// Concave component; carries the constant-in-y term so vex + cave equals the
/// loss exactly.
pub fn cave(loss: &LossSpec, x: f64, y: f64) -> Result<f64> {
    let (alpha, beta) = generic_params(loss)?;
    let t = terms_at(alpha, beta, x);
    let mut v = t.constant;
    for (c, p) in t.terms {
        if !term_is_convex(c, p) {
            v += c * y.powf(p);
        }
    }
    Ok(v)
}

pub fn dvex_dy(loss: &LossSpec, x: f64, y: f64) -> Result<f64> {
    let (alpha, beta) = generic_params(loss)?;
    let t = terms_at(alpha, beta, x);
    let mut v = 0.0;
    for (c, p) in t.terms {
        if term_is_convex(c, p) {
            v += c * p * y.powf(p - 1.0);
        }
    }
    Ok(v)
}

pub fn dcave_dy(loss: &LossSpec, x: f64, y: f64) -> Result<f64> {
    let (alpha, beta) = generic_params(loss)?;
    let t = terms_at(alpha, beta, x);
    let mut v = 0.0;
    for (c, p) in t.terms {
        if !term_is_convex(c, p) {
            v += c * p * y.powf(p - 1.0);
        }
    }
    Ok(v)
}

/// Total (unmasked) loss of a candidate factor in `slot`.
pub fn total_loss_with_candidate(
    y: &DenseTensor,
    factors: &FactorSet,
    candidate: &DenseTensor,
    ms: &ModelString,
    binding: &DimensionBinding,
    slot: usize,
    loss: &LossSpec,
) -> Result<f64> {
    let mut ops = factors.refs();
    ops[slot] = candidate;
    let yhat = contract(ms, binding, &ops)?;
    let mut total = 0.0;
    for i in 0..y.len() {
        total += loss.loss(y.data()[i], yhat.data()[i])?;
    }
    Ok(total)
}

/// Surrogate value Q(candidate | current) for the factor in `slot`.
///
/// Uses brute-force contraction for the partial predictions, so keep the
/// instances small.
pub fn surrogate_q(
    y: &DenseTensor,
    factors: &FactorSet,
    candidate: &DenseTensor,
    ms: &ModelString,
    binding: &DimensionBinding,
    slot: usize,
    loss: &LossSpec,
) -> Result<f64> {
    generic_params(loss)?;
    let current = &factors.factors[slot];
    if candidate.shape() != current.shape() {
        return Err(Error::ShapeMismatch(format!(
            "candidate shape {:?} does not match factor shape {:?}",
            candidate.shape(),
            current.shape()
        )));
    }

    let refs = factors.refs();
    let y_tilde = contract(ms, binding, &refs)?;
    let mut ops = refs.clone();
    ops[slot] = candidate;
    let y_hat = contract(ms, binding, &ops)?;

    // Partial predictions: sum over every contracted index except those of
    // the chosen operand.
    let slot_contracted = ms.operand_contracted(slot);
    let mut ext_output = ms.output().to_vec();
    ext_output.extend(&slot_contracted);
    let ext = ModelString::from_parts(ms.operands().to_vec(), ext_output.clone());
    let y_partial = contract_oracle(&ext, binding, &refs)?;

    let out_len = ms.output().len();
    let ext_shape: Vec<usize> = ext_output
        .iter()
        .map(|&c| binding.dim(c))
        .collect::<Result<_>>()?;
    let out_strides = y_tilde.strides();
    let theta_strides = current.strides();
    // Where each axis of the slot's operand reads its index value from the
    // extended (output ++ slot-contracted) multi-index.
    let theta_sources: Vec<usize> = ms
        .operand(slot)
        .iter()
        .map(|c| ext_output.iter().position(|e| e == c).expect("covered"))
        .collect();

    let mut jensen = 0.0;
    for (pflat, eidx) in IndexIter::new(&ext_shape).enumerate() {
        let oflat: usize = eidx[..out_len]
            .iter()
            .zip(&out_strides)
            .map(|(i, s)| i * s)
            .sum();
        let theta_flat: usize = theta_sources
            .iter()
            .zip(&theta_strides)
            .map(|(&src, s)| eidx[src] * s)
            .sum();
        let weight = y_partial.data()[pflat] / y_tilde.data()[oflat];
        let scaled =
            y_tilde.data()[oflat] * candidate.data()[theta_flat] / current.data()[theta_flat];
        jensen += weight * vex(loss, y.data()[oflat], scaled)?;
    }

    let mut concave = 0.0;
    for i in 0..y.len() {
        let yt = y_tilde.data()[i];
        concave += cave(loss, y.data()[i], yt)?
            + dcave_dy(loss, y.data()[i], yt)? * (y_hat.data()[i] - yt);
    }
    Ok(jensen + concave)
}
