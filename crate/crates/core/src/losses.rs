//! Decomposable loss functions.
//!
//! Every loss here is a sum of per-entry terms `L(x, y)` (data `x`, prediction
//! `y > 0`) whose derivative structure factors into elementwise functions
//! `a(x, y)`, `b(x, y)` and a link `g` with invertible image. Those three
//! pieces are all the multiplicative-update solver needs; this module keeps
//! them together with the closed-form loss values and `∂L/∂y`.
//!
//! The two-parameter `(alpha, beta)` family covers squared Euclidean
//! (1, 1), generalized KL (1, 0), Itakura–Saito (1, -1), Hellinger
//! (0.5, 0.5), Pearson chi^2 (2, -1), Neyman chi^2 (-1, 2) and reverse KL
//! (0, 1). The case `alpha = 0, beta != 1` has no known update decomposition
//! and is rejected by the fit-capable constructor; an evaluation-only
//! constructor exists for computing heldout metrics at such parameters.
//!
//! Beyond that family: negative-binomial (dispersion `phi`), Bernoulli and
//! binomial negative log-likelihoods under an odds reparameterization, and
//! the Jensen-Shannon divergence.

use crate::error::{Error, Result};

/// Default lower clamp applied to predictions inside loss evaluation. Factor
/// entries stay above the solver epsilon, but long contractions can underflow
/// toward zero; the clamp keeps `y^(beta-1)` finite without visibly
/// perturbing results.
pub const DEFAULT_EPSILON_Y: f64 = 1e-30;

/// Loss family selector with its numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    AlphaBeta { alpha: f64, beta: f64 },
    NegBinomial { dispersion: f64 },
    BernoulliOdds,
    BinomialOdds { trials: f64 },
    JensenShannon,
}

/// Shape of the inverse link applied to the update ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum GInverse {
    /// `g(l) = l^(1/exponent)`, so `g^{-1}(t) = t^exponent`.
    Power { exponent: f64 },
    /// `g = log`, so `g^{-1} = exp`.
    Exp,
    /// `g = id`.
    Identity,
}

/// Case split of the `(alpha, beta)` closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AbCase {
    Generic,      // alpha, beta, alpha+beta != 0
    BetaZero,     // beta = 0, alpha != 0
    AlphaNegBeta, // alpha = -beta != 0
    AlphaZero,    // alpha = 0, beta != 0
    BothZero,     // alpha = beta = 0
}

fn ab_case(alpha: f64, beta: f64) -> AbCase {
    if alpha == 0.0 && beta == 0.0 {
        AbCase::BothZero
    } else if alpha == 0.0 {
        AbCase::AlphaZero
    } else if beta == 0.0 {
        AbCase::BetaZero
    } else if alpha + beta == 0.0 {
        AbCase::AlphaNegBeta
    } else {
        AbCase::Generic
    }
}

/// A selected divergence plus the prediction clamp used during evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    kind: LossKind,
    epsilon_y: f64,
    update_capable: bool,
}

impl LossSpec {
    /// `(alpha, beta)`-divergence usable for fitting. `alpha = 0` is only
    /// admissible with `beta = 1` (reverse KL); no update decomposition is
    /// known otherwise.
    pub fn alpha_beta(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidLoss(format!(
                "non-finite divergence parameters ({alpha}, {beta})"
            )));
        }
        if alpha == 0.0 && beta != 1.0 {
            return Err(Error::InvalidLoss(
                "no multiplicative update for α=0, β≠1".into(),
            ));
        }
        Ok(LossSpec {
            kind: LossKind::AlphaBeta { alpha, beta },
            epsilon_y: DEFAULT_EPSILON_Y,
            update_capable: true,
        })
    }

    /// `(alpha, beta)`-divergence for metric evaluation only. Accepts any
    /// finite parameters, including `alpha = 0, beta != 1`; such a spec
    /// cannot drive multiplicative updates.
    pub fn alpha_beta_eval_only(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidLoss(format!(
                "non-finite divergence parameters ({alpha}, {beta})"
            )));
        }
        let update_capable = !(alpha == 0.0 && beta != 1.0);
        Ok(LossSpec {
            kind: LossKind::AlphaBeta { alpha, beta },
            epsilon_y: DEFAULT_EPSILON_Y,
            update_capable,
        })
    }

    /// Negative-binomial negative log-likelihood with scalar dispersion.
    pub fn neg_binomial(dispersion: f64) -> Result<Self> {
        if !(dispersion.is_finite() && dispersion > 0.0) {
            return Err(Error::InvalidLoss(format!(
                "negative-binomial dispersion must be positive, got {dispersion}"
            )));
        }
        Ok(LossSpec {
            kind: LossKind::NegBinomial { dispersion },
            epsilon_y: DEFAULT_EPSILON_Y,
            update_capable: true,
        })
    }

    /// Bernoulli negative log-likelihood; the model predicts odds.
    pub fn bernoulli() -> Self {
        LossSpec {
            kind: LossKind::BernoulliOdds,
            epsilon_y: DEFAULT_EPSILON_Y,
            update_capable: true,
        }
    }

    /// Binomial negative log-likelihood with a scalar trial count; the model
    /// predicts odds.
    pub fn binomial(trials: f64) -> Result<Self> {
        if !(trials.is_finite() && trials > 0.0) {
            return Err(Error::InvalidLoss(format!(
                "binomial trial count must be positive, got {trials}"
            )));
        }
        Ok(LossSpec {
            kind: LossKind::BinomialOdds { trials },
            epsilon_y: DEFAULT_EPSILON_Y,
            update_capable: true,
        })
    }

    pub fn jensen_shannon() -> Self {
        LossSpec {
            kind: LossKind::JensenShannon,
            epsilon_y: DEFAULT_EPSILON_Y,
            update_capable: true,
        }
    }

    pub fn with_epsilon_y(mut self, epsilon_y: f64) -> Result<Self> {
        if !(epsilon_y.is_finite() && epsilon_y > 0.0) {
            return Err(Error::InvalidLoss(format!(
                "epsilon_y must be positive, got {epsilon_y}"
            )));
        }
        self.epsilon_y = epsilon_y;
        Ok(self)
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn epsilon_y(&self) -> f64 {
        self.epsilon_y
    }

    /// Whether this spec can drive multiplicative updates.
    pub fn supports_update(&self) -> bool {
        self.update_capable
    }

    /// Stable short name used by the CLI and manifests.
    pub fn name(&self) -> &'static str {
        match self.kind {
            LossKind::AlphaBeta { .. } => "ab",
            LossKind::NegBinomial { .. } => "negbin",
            LossKind::BernoulliOdds => "bernoulli",
            LossKind::BinomialOdds { .. } => "binomial",
            LossKind::JensenShannon => "js",
        }
    }

    fn clamp_y(&self, y: f64) -> f64 {
        y.max(self.epsilon_y)
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::LossDomain(format!(
                "data value {x} outside [0, ∞) for loss {}",
                self.name()
            )));
        }
        Ok(())
    }

    fn positive_data_error(&self, alpha: f64) -> Error {
        Error::LossDomain(format!(
            "loss requires positive data at x=0 (alpha={alpha})"
        ))
    }

    fn undefined_at_zero(&self) -> Error {
        Error::LossDomain("loss undefined at x=0".into())
    }

    /// Pointwise loss value.
    pub fn loss(&self, x: f64, y: f64) -> Result<f64> {
        self.check_x(x)?;
        let y = self.clamp_y(y);
        let v = match self.kind {
            LossKind::AlphaBeta { alpha, beta } => {
                if x == 0.0 && alpha < 0.0 {
                    return Err(self.positive_data_error(alpha));
                }
                match ab_case(alpha, beta) {
                    AbCase::Generic => {
                        let s = alpha + beta;
                        if x == 0.0 && s < 0.0 {
                            return Err(self.undefined_at_zero());
                        }
                        (alpha / s * x.powf(s) + beta / s * y.powf(s)
                            - x.powf(alpha) * y.powf(beta))
                            / (alpha * beta)
                    }
                    AbCase::BetaZero => {
                        if x == 0.0 {
                            // x^alpha log(x/y) -> 0 as x -> 0 for alpha > 0.
                            y.powf(alpha) / (alpha * alpha)
                        } else {
                            (y.powf(alpha) - x.powf(alpha)
                                + alpha * x.powf(alpha) * (x / y).ln())
                                / (alpha * alpha)
                        }
                    }
                    AbCase::AlphaNegBeta => {
                        if x == 0.0 {
                            return Err(self.undefined_at_zero());
                        }
                        ((x / y).powf(alpha) - 1.0 + alpha * (y / x).ln()) / (alpha * alpha)
                    }
                    AbCase::AlphaZero => {
                        if x == 0.0 {
                            return Err(self.undefined_at_zero());
                        }
                        (beta * y.powf(beta) * (y / x).ln() - y.powf(beta) + x.powf(beta))
                            / (beta * beta)
                    }
                    AbCase::BothZero => {
                        if x == 0.0 {
                            return Err(self.undefined_at_zero());
                        }
                        let d = x.ln() - y.ln();
                        0.5 * d * d
                    }
                }
            }
            LossKind::NegBinomial { dispersion } => {
                (dispersion + x) * (dispersion + y).ln() - x_ln(x, y)
            }
            LossKind::BernoulliOdds => (1.0 + y).ln() - x_ln(x, y),
            LossKind::BinomialOdds { trials } => trials * (1.0 + y).ln() - x_ln(x, y),
            LossKind::JensenShannon => {
                let mid = 0.5 * (x + y);
                0.5 * (x_ln_ratio(x, mid) + y * (y / mid).ln())
            }
        };
        if v.is_nan() {
            return Err(Error::LossDomain(format!(
                "loss {} evaluated to NaN at (x={x}, y={y})",
                self.name()
            )));
        }
        Ok(v)
    }

    /// The elementwise numerator/denominator pair of the multiplicative
    /// update.
    pub fn ab(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        self.check_x(x)?;
        let y = self.clamp_y(y);
        match self.kind {
            LossKind::AlphaBeta { alpha, beta } => {
                if alpha == 0.0 {
                    if beta != 1.0 {
                        return Err(Error::InvalidLoss(
                            "no multiplicative update for α=0, β≠1".into(),
                        ));
                    }
                    if x == 0.0 {
                        return Err(self.undefined_at_zero());
                    }
                    Ok(((x / y).ln(), 1.0))
                } else {
                    if x == 0.0 && alpha < 0.0 {
                        return Err(self.positive_data_error(alpha));
                    }
                    let a = x.powf(alpha) * y.powf(beta - 1.0);
                    let b = y.powf(alpha + beta - 1.0);
                    Ok((a, b))
                }
            }
            LossKind::NegBinomial { dispersion } => {
                Ok((x / y, (dispersion + x) / (dispersion + y)))
            }
            LossKind::BernoulliOdds => Ok((x / y, 1.0 / (1.0 + y))),
            LossKind::BinomialOdds { trials } => Ok((x / y, trials / (1.0 + y))),
            LossKind::JensenShannon => Ok((((x + y) / (2.0 * y)).ln(), 1.0)),
        }
    }

    pub(crate) fn g_inverse_kind(&self) -> Result<GInverse> {
        match self.kind {
            LossKind::AlphaBeta { alpha, beta } => {
                if alpha == 0.0 {
                    if beta == 1.0 {
                        Ok(GInverse::Exp)
                    } else {
                        Err(Error::InvalidLoss(
                            "no multiplicative update for α=0, β≠1".into(),
                        ))
                    }
                } else {
                    let u = (1.0 - beta) / alpha;
                    if u > 1.0 {
                        Ok(GInverse::Power {
                            exponent: 1.0 / (1.0 - beta),
                        })
                    } else if u < 0.0 {
                        Ok(GInverse::Power {
                            exponent: 1.0 / (alpha + beta - 1.0),
                        })
                    } else {
                        Ok(GInverse::Power {
                            exponent: 1.0 / alpha,
                        })
                    }
                }
            }
            LossKind::NegBinomial { .. }
            | LossKind::BernoulliOdds
            | LossKind::BinomialOdds { .. } => Ok(GInverse::Identity),
            LossKind::JensenShannon => Ok(GInverse::Exp),
        }
    }

    /// Inverse link applied to the update ratio. The argument must lie in the
    /// image of `g`: nonnegative reals for the power and identity links, any
    /// finite real for the log link.
    pub fn g_inverse(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::LossDomain(format!(
                "ratio {t} outside Range(g) for loss {}",
                self.name()
            )));
        }
        match self.g_inverse_kind()? {
            GInverse::Identity => {
                if t < 0.0 {
                    Err(Error::LossDomain("ratio outside Range(g)".into()))
                } else {
                    Ok(t)
                }
            }
            GInverse::Exp => Ok(t.exp()),
            GInverse::Power { exponent } => {
                if t < 0.0 || (t == 0.0 && exponent < 0.0) {
                    Err(Error::LossDomain("ratio outside Range(g)".into()))
                } else if t == 0.0 {
                    Ok(0.0)
                } else {
                    Ok(t.powf(exponent))
                }
            }
        }
    }

    /// Partial derivative of the loss in its second argument.
    pub fn dloss_dy(&self, x: f64, y: f64) -> Result<f64> {
        self.check_x(x)?;
        let y = self.clamp_y(y);
        match self.kind {
            LossKind::AlphaBeta { alpha, beta } => match ab_case(alpha, beta) {
                AbCase::AlphaZero => {
                    if x == 0.0 {
                        return Err(self.undefined_at_zero());
                    }
                    Ok(y.powf(beta - 1.0) * (y / x).ln())
                }
                AbCase::BothZero => {
                    if x == 0.0 {
                        return Err(self.undefined_at_zero());
                    }
                    Ok((y / x).ln() / y)
                }
                _ => {
                    // All alpha != 0 cases share dL/dy = (b - a) / alpha.
                    let (a, b) = self.ab(x, y)?;
                    Ok((b - a) / alpha)
                }
            },
            LossKind::NegBinomial { .. }
            | LossKind::BernoulliOdds
            | LossKind::BinomialOdds { .. } => {
                let (a, b) = self.ab(x, y)?;
                Ok(b - a)
            }
            LossKind::JensenShannon => Ok(0.5 * (2.0 * y / (x + y)).ln()),
        }
    }
}

/// `x * ln(y)` with the `x -> 0` limit taken as 0 regardless of `y`.
fn x_ln(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `x * ln(x / m)` with the `x -> 0` limit taken as 0.
fn x_ln_ratio(x: f64, m: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / m).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn central_diff(spec: &LossSpec, x: f64, y: f64) -> f64 {
        let h = 1e-5 * y;
        let up = spec.loss(x, y + h).unwrap();
        let down = spec.loss(x, y - h).unwrap();
        (up - down) / (2.0 * h)
    }

    #[test]
    fn least_squares_loss_value() {
        let spec = LossSpec::alpha_beta(1.0, 1.0).unwrap();
        assert!((spec.loss(3.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kl_identity_of_indiscernibles() {
        let spec = LossSpec::alpha_beta(1.0, 0.0).unwrap();
        for x in [0.5, 1.0, 7.0] {
            assert!(spec.loss(x, x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn kl_loss_value() {
        // (1/1)[1 - 2 + 2 ln 2] = 2 ln 2 - 1
        let spec = LossSpec::alpha_beta(1.0, 0.0).unwrap();
        let expected = 2.0 * (2.0f64).ln() - 1.0;
        assert!((spec.loss(2.0, 1.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn kl_at_zero_data_uses_limit() {
        let spec = LossSpec::alpha_beta(1.0, 0.0).unwrap();
        // 0*log0 term vanishes, leaving y^alpha / alpha^2 = y.
        assert!((spec.loss(0.0, 2.5).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn ab_pairs_match_closed_forms() {
        let ls = LossSpec::alpha_beta(1.0, 1.0).unwrap();
        assert_eq!(ls.ab(3.0, 5.0).unwrap(), (3.0, 5.0));
        let kl = LossSpec::alpha_beta(1.0, 0.0).unwrap();
        assert_eq!(kl.ab(6.0, 2.0).unwrap(), (3.0, 1.0));
        let nb = LossSpec::neg_binomial(1.0).unwrap();
        let (a, b) = nb.ab(0.0, 2.0).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn g_inverse_case_table() {
        // (1-beta)/alpha = 1 in [0,1]: identity power.
        let kl = LossSpec::alpha_beta(1.0, 0.0).unwrap();
        assert_eq!(kl.g_inverse(0.7).unwrap(), 0.7);
        // Pearson chi^2 (2,-1): exponent 1/alpha = 1/2.
        let pearson = LossSpec::alpha_beta(2.0, -1.0).unwrap();
        assert!((pearson.g_inverse(4.0).unwrap() - 2.0).abs() < 1e-15);
        // (1,-0.5): (1-beta)/alpha = 1.5 > 1, exponent 1/(1-beta) = 2/3.
        let sparse = LossSpec::alpha_beta(1.0, -0.5).unwrap();
        assert!((sparse.g_inverse(8.0).unwrap() - 4.0).abs() < 1e-12);
        // Jensen-Shannon is exp; zero maps to the fixed point 1.
        let js = LossSpec::jensen_shannon();
        assert_eq!(js.g_inverse(0.0).unwrap(), 1.0);
        // Reverse KL is exp as well, defined for any finite argument.
        let rkl = LossSpec::alpha_beta(0.0, 1.0).unwrap();
        assert!((rkl.g_inverse(-0.5).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn g_inverse_rejects_values_outside_range() {
        let kl = LossSpec::alpha_beta(1.0, 0.0).unwrap();
        assert!(kl.g_inverse(-1.0).is_err());
        // Neyman chi^2 has a negative exponent, so 0 lies outside Range(g).
        let neyman = LossSpec::alpha_beta(-1.0, 2.0).unwrap();
        assert!(neyman.g_inverse(0.0).is_err());
        assert!((neyman.g_inverse(2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_alpha_zero_beta_not_one() {
        assert!(LossSpec::alpha_beta(0.0, 0.5).is_err());
        assert!(LossSpec::alpha_beta(0.0, 0.0).is_err());
        assert!(LossSpec::alpha_beta(0.0, 1.0).is_ok());
        // Evaluation-only construction admits the full table.
        let eval = LossSpec::alpha_beta_eval_only(0.0, 0.5).unwrap();
        assert!(!eval.supports_update());
        assert!(eval.loss(2.0, 1.0).unwrap().is_finite());
        assert!(eval.ab(2.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LossSpec::neg_binomial(0.0).is_err());
        assert!(LossSpec::neg_binomial(-1.0).is_err());
        assert!(LossSpec::binomial(0.0).is_err());
        assert!(LossSpec::alpha_beta(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn dloss_examples() {
        let ls = LossSpec::alpha_beta(1.0, 1.0).unwrap();
        assert!((ls.dloss_dy(3.0, 1.0).unwrap() + 2.0).abs() < 1e-12);
        for spec in [
            LossSpec::alpha_beta(1.3, 0.0).unwrap(),
            LossSpec::alpha_beta(0.7, 0.5).unwrap(),
            LossSpec::jensen_shannon(),
        ] {
            for x in [0.4, 1.0, 3.3] {
                assert!(spec.dloss_dy(x, x).unwrap().abs() < 1e-12, "{spec:?} x={x}");
            }
        }
        let spec = LossSpec::alpha_beta(1.3, 0.0).unwrap();
        let fd = central_diff(&spec, 2.0, 0.7);
        assert!(rel_close(spec.dloss_dy(2.0, 0.7).unwrap(), fd, 1e-6));
    }

    #[test]
    fn dloss_matches_finite_differences_on_grid() {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for alpha in [0.7, 0.8, 1.0, 1.2, 1.3, 2.0] {
            for beta in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                pairs.push((alpha, beta));
            }
        }
        pairs.push((-1.0, 2.0));
        let points = [(0.3, 0.9), (2.0, 0.5), (5.0, 7.0), (0.11, 9.5)];
        for (alpha, beta) in pairs {
            let spec = LossSpec::alpha_beta(alpha, beta).unwrap();
            for (x, y) in points {
                let fd = central_diff(&spec, x, y);
                let got = spec.dloss_dy(x, y).unwrap();
                assert!(
                    rel_close(got, fd, 1e-6),
                    "({alpha},{beta}) at ({x},{y}): {got} vs {fd}"
                );
            }
        }
        for spec in [
            LossSpec::neg_binomial(1.0).unwrap(),
            LossSpec::bernoulli(),
            LossSpec::binomial(5.0).unwrap(),
            LossSpec::jensen_shannon(),
        ] {
            for (x, y) in points {
                let fd = central_diff(&spec, x, y);
                let got = spec.dloss_dy(x, y).unwrap();
                assert!(rel_close(got, fd, 1e-6), "{spec:?} at ({x},{y})");
            }
        }
    }

    #[test]
    fn update_fixed_point_iff_zero_gradient() {
        // g^{-1}(a/b) = 1 exactly where dL/dy = 0.
        let specs = [
            LossSpec::alpha_beta(1.0, 1.0).unwrap(),
            LossSpec::alpha_beta(1.3, -0.5).unwrap(),
            LossSpec::alpha_beta(0.7, 0.5).unwrap(),
            LossSpec::neg_binomial(2.0).unwrap(),
            LossSpec::jensen_shannon(),
        ];
        for spec in specs {
            for x in [0.5, 2.0, 6.0] {
                let mult = spec.g_inverse(spec.ab(x, x).unwrap().0 / spec.ab(x, x).unwrap().1);
                assert!((mult.unwrap() - 1.0).abs() < 1e-12, "{spec:?}");
                assert!(spec.dloss_dy(x, x).unwrap().abs() < 1e-12);
                // Away from the stationary point the multiplier moves.
                let y = 1.7 * x;
                let (a, b) = spec.ab(x, y).unwrap();
                assert!((spec.g_inverse(a / b).unwrap() - 1.0).abs() > 1e-6);
            }
        }
        // Bernoulli's stationary point is at the odds y = x/(1-x).
        let bern = LossSpec::bernoulli();
        let x = 0.3;
        let y_star = x / (1.0 - x);
        let (a, b) = bern.ab(x, y_star).unwrap();
        assert!((bern.g_inverse(a / b).unwrap() - 1.0).abs() < 1e-12);
        assert!(bern.dloss_dy(x, y_star).unwrap().abs() < 1e-12);
    }

    #[test]
    fn beta_zero_case_is_generic_limit() {
        let near = LossSpec::alpha_beta(1.0, 1e-9).unwrap();
        let exact = LossSpec::alpha_beta(1.0, 0.0).unwrap();
        for (x, y) in [(0.5, 2.0), (3.0, 0.4), (7.0, 7.5)] {
            let a = near.loss(x, y).unwrap();
            let b = exact.loss(x, y).unwrap();
            assert!(rel_close(a, b, 1e-6), "({x},{y}): {a} vs {b}");
        }
    }

    #[test]
    fn zero_data_domain_errors() {
        let neyman = LossSpec::alpha_beta(-1.0, 2.0).unwrap();
        assert!(matches!(neyman.loss(0.0, 1.0), Err(Error::LossDomain(_))));
        assert!(matches!(neyman.ab(0.0, 1.0), Err(Error::LossDomain(_))));
        let is = LossSpec::alpha_beta(1.0, -1.0).unwrap();
        assert!(matches!(is.loss(0.0, 1.0), Err(Error::LossDomain(_))));
        let rkl = LossSpec::alpha_beta(0.0, 1.0).unwrap();
        assert!(matches!(rkl.loss(0.0, 1.0), Err(Error::LossDomain(_))));
        // x = 0 is fine wherever the limit exists.
        assert!(LossSpec::jensen_shannon().loss(0.0, 1.0).is_ok());
        assert!(LossSpec::bernoulli().loss(0.0, 1.0).is_ok());
    }

    #[test]
    fn prediction_clamp_applies() {
        let spec = LossSpec::alpha_beta(1.0, 0.0).unwrap().with_epsilon_y(1e-6).unwrap();
        // y = 0 is clamped to epsilon_y rather than producing infinities.
        let v = spec.loss(1.0, 0.0).unwrap();
        let expected = spec.loss(1.0, 1e-6).unwrap();
        assert_eq!(v.to_bits(), expected.to_bits());
    }
}
