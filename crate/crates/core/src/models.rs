//! Model zoo: builders that emit a model string plus dimension binding for
//! the common factorization families, parameter accounting, and synthetic
//! data generation for planted-model tests.
//!
//! Observed modes use the letters `i j k l m n o p q s t u` in mode order;
//! contracted modes use `a b c d e f g h v w x y z`. Raw strings with a rank
//! map remain the primary interface; the zoo is convenience on top.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::einsum::{contract, DimensionBinding, ModelString};
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

const OBSERVED_LETTERS: [char; 12] = ['i', 'j', 'k', 'l', 'm', 'n', 'o', 'p', 'q', 's', 't', 'u'];
const CONTRACTED_LETTERS: [char; 13] =
    ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'v', 'w', 'x', 'y', 'z'];

/// Rank policy for the Tucker core modes.
#[derive(Debug, Clone, PartialEq)]
pub enum TuckerRanks {
    /// Explicit per-mode ranks.
    PerMode(Vec<usize>),
    /// `R_m = max(1, round(ratio * I_m))`.
    Proportional { ratio: f64 },
}

/// A member of the model zoo.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelRecipe {
    Cp { rank: usize },
    Tucker { ranks: TuckerRanks },
    TuckerCubic { rank: usize },
    LrTucker { ranks: TuckerRanks, coupling_rank: usize },
    LrTuckerCubic { rank: usize, coupling_rank: usize },
    /// Boundary-inclusive rank chain of length M+1 with both ends equal to 1;
    /// operand m has shape (I_m, R_m, R_{m+1}).
    TensorTrain { ranks: Vec<usize> },
    /// One matrix per pair of observed modes.
    ManyBody,
    /// Raw model string plus dimensions for its contracted indices.
    Custom { model: String, ranks: Vec<(char, usize)> },
}

fn observed_letter(mode: usize) -> char {
    OBSERVED_LETTERS[mode]
}

fn check_modes(shape: &[usize]) -> Result<usize> {
    let m = shape.len();
    if !(2..=OBSERVED_LETTERS.len()).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "data must have between 2 and {} modes, got {m}",
            OBSERVED_LETTERS.len()
        )));
    }
    Ok(m)
}

fn check_rank(rank: usize) -> Result<usize> {
    if rank == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    Ok(rank)
}

fn resolve_tucker_ranks(ranks: &TuckerRanks, shape: &[usize]) -> Result<Vec<usize>> {
    match ranks {
        TuckerRanks::PerMode(r) => {
            if r.len() != shape.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} per-mode ranks for {} modes",
                    r.len(),
                    shape.len()
                )));
            }
            for &x in r {
                check_rank(x)?;
            }
            Ok(r.clone())
        }
        TuckerRanks::Proportional { ratio } => {
            if !(ratio.is_finite() && *ratio > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "tucker ratio must be positive, got {ratio}"
                )));
            }
            Ok(shape
                .iter()
                .map(|&d| ((ratio * d as f64).round() as usize).max(1))
                .collect())
        }
    }
}

/// Emit the model string and dimension binding for a recipe over `shape`.
pub fn build(recipe: &ModelRecipe, shape: &[usize]) -> Result<(ModelString, DimensionBinding)> {
    let mut binding = DimensionBinding::new();
    let m = match recipe {
        ModelRecipe::Custom { .. } => shape.len(),
        _ => check_modes(shape)?,
    };
    if !matches!(recipe, ModelRecipe::Custom { .. }) {
        for (mode, &d) in shape.iter().enumerate() {
            binding.bind(observed_letter(mode), d)?;
        }
    }

    let text = match recipe {
        ModelRecipe::Cp { rank } => {
            check_rank(*rank)?;
            let r = CONTRACTED_LETTERS[0];
            binding.bind(r, *rank)?;
            let ops: Vec<String> = (0..m)
                .map(|mode| format!("{}{}", observed_letter(mode), r))
                .collect();
            format!("{}->{}", ops.join(","), observed_string(m))
        }
        ModelRecipe::Tucker { ranks } => {
            let rs = resolve_tucker_ranks(ranks, shape)?;
            tucker_string(m, &rs, &mut binding)?
        }
        ModelRecipe::TuckerCubic { rank } => {
            check_rank(*rank)?;
            tucker_string(m, &vec![*rank; m], &mut binding)?
        }
        ModelRecipe::LrTucker { ranks, coupling_rank } => {
            let rs = resolve_tucker_ranks(ranks, shape)?;
            lr_tucker_string(m, &rs, check_rank(*coupling_rank)?, &mut binding)?
        }
        ModelRecipe::LrTuckerCubic { rank, coupling_rank } => {
            check_rank(*rank)?;
            lr_tucker_string(m, &vec![*rank; m], check_rank(*coupling_rank)?, &mut binding)?
        }
        ModelRecipe::TensorTrain { ranks } => {
            if ranks.len() != m + 1 {
                return Err(Error::InvalidArgument(format!(
                    "tensor-train needs {} ranks for {} modes, got {}",
                    m + 1,
                    m,
                    ranks.len()
                )));
            }
            if ranks[0] != 1 || ranks[m] != 1 {
                return Err(Error::InvalidArgument(
                    "tensor-train boundary ranks must be 1".into(),
                ));
            }
            for &x in ranks {
                check_rank(x)?;
            }
            if m + 1 > CONTRACTED_LETTERS.len() {
                return Err(Error::InvalidArgument("tensor-train rank chain exceeds alphabet".into()));
            }
            for (pos, &x) in ranks.iter().enumerate() {
                binding.bind(CONTRACTED_LETTERS[pos], x)?;
            }
            let ops: Vec<String> = (0..m)
                .map(|mode| {
                    format!(
                        "{}{}{}",
                        observed_letter(mode),
                        CONTRACTED_LETTERS[mode],
                        CONTRACTED_LETTERS[mode + 1]
                    )
                })
                .collect();
            format!("{}->{}", ops.join(","), observed_string(m))
        }
        ModelRecipe::ManyBody => {
            let mut ops = Vec::new();
            for m1 in 0..m {
                for m2 in (m1 + 1)..m {
                    ops.push(format!("{}{}", observed_letter(m1), observed_letter(m2)));
                }
            }
            format!("{}->{}", ops.join(","), observed_string(m))
        }
        ModelRecipe::Custom { model, ranks } => {
            let ms = ModelString::parse(model)?;
            if ms.output().len() != shape.len() {
                return Err(Error::ShapeMismatch(format!(
                    "custom model has {} output modes but shape has {}",
                    ms.output().len(),
                    shape.len()
                )));
            }
            for (pos, &c) in ms.output().iter().enumerate() {
                binding.bind(c, shape[pos])?;
            }
            for &(c, d) in ranks {
                check_rank(d)?;
                if !ms.contracted_indices().contains(&c) {
                    return Err(Error::InvalidArgument(format!(
                        "rank given for index '{c}' which is not contracted in the model"
                    )));
                }
                binding.bind(c, d)?;
            }
            for c in ms.contracted_indices() {
                if binding.get(c).is_none() {
                    return Err(Error::InvalidArgument(format!(
                        "missing rank for contracted index '{c}'"
                    )));
                }
            }
            return Ok((ms, binding));
        }
    };

    let ms = ModelString::parse(&text)?;
    binding.covers(&ms)?;
    Ok((ms, binding))
}

fn observed_string(m: usize) -> String {
    (0..m).map(observed_letter).collect()
}

fn tucker_string(m: usize, ranks: &[usize], binding: &mut DimensionBinding) -> Result<String> {
    for (mode, &r) in ranks.iter().enumerate() {
        binding.bind(CONTRACTED_LETTERS[mode], r)?;
    }
    let mut ops: Vec<String> = (0..m)
        .map(|mode| format!("{}{}", observed_letter(mode), CONTRACTED_LETTERS[mode]))
        .collect();
    let core: String = (0..m).map(|mode| CONTRACTED_LETTERS[mode]).collect();
    ops.push(core);
    Ok(format!("{}->{}", ops.join(","), observed_string(m)))
}

fn lr_tucker_string(
    m: usize,
    ranks: &[usize],
    coupling_rank: usize,
    binding: &mut DimensionBinding,
) -> Result<String> {
    for (mode, &r) in ranks.iter().enumerate() {
        binding.bind(CONTRACTED_LETTERS[mode], r)?;
    }
    let coupling = CONTRACTED_LETTERS[m];
    binding.bind(coupling, coupling_rank)?;
    let mut ops: Vec<String> = (0..m)
        .map(|mode| format!("{}{}", observed_letter(mode), CONTRACTED_LETTERS[mode]))
        .collect();
    // The core factors into one (R_m, K) matrix per mode sharing the
    // coupling index.
    for mode in 0..m {
        ops.push(format!("{}{}", CONTRACTED_LETTERS[mode], coupling));
    }
    Ok(format!("{}->{}", ops.join(","), observed_string(m)))
}

/// Total number of parameters across all operands.
pub fn param_count(ms: &ModelString, binding: &DimensionBinding) -> Result<usize> {
    binding.covers(ms)?;
    let mut total = 0usize;
    for slot in 0..ms.operand_count() {
        let shape = binding.operand_shape(ms, slot)?;
        let n: usize = shape.iter().product();
        total = total
            .checked_add(n)
            .ok_or_else(|| Error::DimensionOverflow("parameter count overflows usize".into()))?;
    }
    Ok(total)
}

/// Observation noise applied to a synthetic ground-truth contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthNoise {
    Noiseless,
    /// Each entry sampled Poisson with the contraction as its mean (the count
    /// data regime).
    Poisson,
}

/// Contract the given factors and optionally sample observation noise.
pub fn synth_from_factors(
    ms: &ModelString,
    binding: &DimensionBinding,
    factors: &[&DenseTensor],
    noise: SynthNoise,
    seed: u64,
) -> Result<DenseTensor> {
    let mean = contract(ms, binding, factors)?;
    match noise {
        SynthNoise::Noiseless => Ok(mean),
        SynthNoise::Poisson => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut data = Vec::with_capacity(mean.len());
            for &mu in mean.data() {
                if mu <= 0.0 {
                    data.push(0.0);
                } else {
                    let pois = Poisson::new(mu).map_err(|_| {
                        Error::InvalidArgument(format!("invalid Poisson mean {mu}"))
                    })?;
                    data.push(pois.sample(&mut rng));
                }
            }
            DenseTensor::new(mean.shape().to_vec(), data)
        }
    }
}

/// Draw a planted factor set with entries uniform on [0.1, 1), contract it,
/// and optionally sample noise. Deterministic per seed.
pub fn synth(
    ms: &ModelString,
    binding: &DimensionBinding,
    seed: u64,
    noise: SynthNoise,
) -> Result<DenseTensor> {
    let factors = planted_factors(ms, binding, seed)?;
    let refs: Vec<&DenseTensor> = factors.iter().collect();
    synth_from_factors(ms, binding, &refs, noise, seed.wrapping_add(1))
}

/// The ground-truth factors `synth` draws for a given seed.
pub fn planted_factors(
    ms: &ModelString,
    binding: &DimensionBinding,
    seed: u64,
) -> Result<Vec<DenseTensor>> {
    binding.covers(ms)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::with_capacity(ms.operand_count());
    for slot in 0..ms.operand_count() {
        let shape = binding.operand_shape(ms, slot)?;
        let n: usize = shape.iter().product();
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        factors.push(DenseTensor::new(shape, data)?);
    }
    Ok(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::einsum::contract_oracle;
    use crate::tensor::checked_len;

    #[test]
    fn cp_build_example() {
        let (ms, binding) = build(&ModelRecipe::Cp { rank: 2 }, &[3, 4, 5]).unwrap();
        assert_eq!(ms.to_string(), "ia,ja,ka->ijk");
        assert_eq!(ms.contracted_indices().len(), 1);
        assert_eq!(param_count(&ms, &binding).unwrap(), 24);
    }

    #[test]
    fn tensor_train_operand_shapes() {
        let (ms, binding) =
            build(&ModelRecipe::TensorTrain { ranks: vec![1, 2, 2, 1] }, &[3, 4, 5]).unwrap();
        assert_eq!(binding.operand_shape(&ms, 0).unwrap(), vec![3, 1, 2]);
        assert_eq!(binding.operand_shape(&ms, 1).unwrap(), vec![4, 2, 2]);
        assert_eq!(binding.operand_shape(&ms, 2).unwrap(), vec![5, 2, 1]);
        assert!(build(&ModelRecipe::TensorTrain { ranks: vec![2, 2, 2, 1] }, &[3, 4, 5]).is_err());
    }

    #[test]
    fn lr_tucker_core_parameter_reduction() {
        let (ms, binding) = build(
            &ModelRecipe::LrTucker {
                ranks: TuckerRanks::PerMode(vec![2, 2, 2]),
                coupling_rank: 2,
            },
            &[3, 4, 5],
        )
        .unwrap();
        // Core becomes three (2, 2) matrices: 12 parameters versus the full
        // 2*2*2 = 8 core.
        let core_params: usize = (3..6)
            .map(|slot| binding.operand_shape(&ms, slot).unwrap().iter().product::<usize>())
            .sum();
        assert_eq!(core_params, 12);
        let full = build(
            &ModelRecipe::Tucker { ranks: TuckerRanks::PerMode(vec![2, 2, 2]) },
            &[3, 4, 5],
        )
        .unwrap();
        let full_core: usize = full
            .1
            .operand_shape(&full.0, 3)
            .unwrap()
            .iter()
            .product();
        assert_eq!(full_core, 8);
    }

    #[test]
    fn param_count_examples() {
        let ms = ModelString::parse("ir,jr->ij").unwrap();
        let binding = DimensionBinding::from_pairs([('i', 3), ('j', 4), ('r', 2)]).unwrap();
        assert_eq!(param_count(&ms, &binding).unwrap(), 14);

        let (tucker, tb) = build(
            &ModelRecipe::Tucker { ranks: TuckerRanks::PerMode(vec![2, 2, 2]) },
            &[3, 4, 5],
        )
        .unwrap();
        assert_eq!(param_count(&tucker, &tb).unwrap(), 32);
    }

    #[test]
    fn proportional_tucker_ranks() {
        let (ms, binding) = build(
            &ModelRecipe::Tucker { ranks: TuckerRanks::Proportional { ratio: 0.3 } },
            &[6, 7, 8],
        )
        .unwrap();
        assert_eq!(binding.get('a'), Some(2));
        assert_eq!(binding.get('b'), Some(2));
        assert_eq!(binding.get('c'), Some(2));
        assert!(binding.covers(&ms).is_ok());
    }

    #[test]
    fn every_recipe_round_trips_through_parse() {
        let shape = [3, 4, 5];
        let recipes = [
            ModelRecipe::Cp { rank: 2 },
            ModelRecipe::Tucker { ranks: TuckerRanks::PerMode(vec![2, 3, 2]) },
            ModelRecipe::TuckerCubic { rank: 2 },
            ModelRecipe::LrTucker {
                ranks: TuckerRanks::PerMode(vec![2, 2, 2]),
                coupling_rank: 2,
            },
            ModelRecipe::LrTuckerCubic { rank: 2, coupling_rank: 2 },
            ModelRecipe::TensorTrain { ranks: vec![1, 2, 3, 1] },
            ModelRecipe::ManyBody,
            ModelRecipe::Custom {
                model: "ir,jr,ak,kr,tr->ijat".into(),
                ranks: vec![('r', 3), ('k', 2)],
            },
        ];
        for recipe in recipes {
            let shape4 = [3usize, 4, 5, 6];
            let use_shape: &[usize] = if matches!(recipe, ModelRecipe::Custom { .. }) {
                &shape4
            } else {
                &shape
            };
            let (ms, binding) = build(&recipe, use_shape).unwrap();
            let reparsed = ModelString::parse(&ms.to_string()).unwrap();
            assert_eq!(reparsed, ms, "{recipe:?}");
            assert!(binding.covers(&ms).is_ok());
            assert!(checked_len(&binding.output_shape(&ms).unwrap()).is_ok());
        }
    }

    #[test]
    fn custom_rejects_missing_or_unknown_ranks() {
        let missing = build(
            &ModelRecipe::Custom { model: "ir,jr->ij".into(), ranks: vec![] },
            &[3, 4],
        );
        assert!(missing.unwrap_err().to_string().contains("'r'"));
        let unknown = build(
            &ModelRecipe::Custom { model: "ir,jr->ij".into(), ranks: vec![('r', 2), ('z', 2)] },
            &[3, 4],
        );
        assert!(unknown.is_err());
    }

    #[test]
    fn cp_equals_tucker_with_diagonal_core() {
        let shape = [3, 4, 5];
        let rank = 2;
        let (cp, cp_bind) = build(&ModelRecipe::Cp { rank }, &shape).unwrap();
        let cp_factors = planted_factors(&cp, &cp_bind, 12).unwrap();
        let (tk, tk_bind) = build(
            &ModelRecipe::Tucker { ranks: TuckerRanks::PerMode(vec![rank; 3]) },
            &shape,
        )
        .unwrap();
        // Same factor matrices; diagonal core links the per-mode ranks.
        let mut core = DenseTensor::zeros(vec![rank; 3]).unwrap();
        for r in 0..rank {
            let flat = r * rank * rank + r * rank + r;
            core.data_mut()[flat] = 1.0;
        }
        let tk_ops: Vec<&DenseTensor> = cp_factors.iter().chain(std::iter::once(&core)).collect();
        let cp_refs: Vec<&DenseTensor> = cp_factors.iter().collect();
        let a = contract(&cp, &cp_bind, &cp_refs).unwrap();
        let b = contract(&tk, &tk_bind, &tk_ops).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn lr_core_reproduces_full_core_on_two_modes() {
        // With coupling rank K = min(R1, R2) the factored core U V^T can
        // represent any full core exactly; U = I, V = C^T is one witness, and
        // a least-squares fit from random starts lands on (numerically) zero
        // residual.
        let (r1, r2) = (2usize, 3usize);
        let k = r1.min(r2);
        let core = DenseTensor::new(vec![r1, r2], vec![0.6, 1.4, 0.2, 0.9, 0.3, 1.1]).unwrap();
        let ident = {
            let mut t = DenseTensor::zeros(vec![r1, k]).unwrap();
            for d in 0..k.min(r1) {
                t.data_mut()[d * k + d] = 1.0;
            }
            t
        };
        let core_t = {
            let mut t = DenseTensor::zeros(vec![r2, k]).unwrap();
            for a in 0..r2 {
                for b in 0..k {
                    t.data_mut()[a * k + b] = core.data()[b * r2 + a];
                }
            }
            t
        };
        let ms = ModelString::parse("az,bz->ab").unwrap();
        let binding = DimensionBinding::from_pairs([('a', r1), ('b', r2), ('z', k)]).unwrap();
        let rebuilt = contract_oracle(&ms, &binding, &[&ident, &core_t]).unwrap();
        for (x, y) in rebuilt.data().iter().zip(core.data()) {
            assert!((x - y).abs() < 1e-14);
        }
        // Least-squares fit oracle: alternating exact solves on U and V.
        let (u, v) = als_fit(&core, r1, r2, k, 400);
        let mut max_err = 0.0f64;
        for a in 0..r1 {
            for b in 0..r2 {
                let mut acc = 0.0;
                for z in 0..k {
                    acc += u[a * k + z] * v[b * k + z];
                }
                max_err = max_err.max((acc - core.data()[a * r2 + b]).abs());
            }
        }
        assert!(max_err < 1e-8, "residual {max_err}");
    }

    fn als_fit(core: &DenseTensor, r1: usize, r2: usize, k: usize, iters: usize) -> (Vec<f64>, Vec<f64>) {
        let mut u: Vec<f64> = (0..r1 * k).map(|i| 0.3 + 0.1 * (i as f64)).collect();
        let mut v: Vec<f64> = (0..r2 * k).map(|i| 0.2 + 0.07 * (i as f64)).collect();
        for _ in 0..iters {
            solve_side(core.data(), &mut u, &v, r1, r2, k, true);
            solve_side(core.data(), &mut v, &u, r2, r1, k, false);
        }
        (u, v)
    }

    /// Exact least-squares solve for one side of C ~= U V^T via the normal
    /// equations (k x k Gaussian elimination).
    fn solve_side(c: &[f64], out: &mut [f64], other: &[f64], rows: usize, cols: usize, k: usize, row_major_c: bool) {
        let mut gram = vec![0.0f64; k * k];
        for col in 0..cols {
            for z1 in 0..k {
                for z2 in 0..k {
                    gram[z1 * k + z2] += other[col * k + z1] * other[col * k + z2];
                }
            }
        }
        for row in 0..rows {
            let mut rhs = vec![0.0f64; k];
            for col in 0..cols {
                let cij = if row_major_c { c[row * cols + col] } else { c[col * rows + row] };
                for z in 0..k {
                    rhs[z] += cij * other[col * k + z];
                }
            }
            let mut a = gram.clone();
            // Gaussian elimination with partial pivoting.
            let mut x = rhs;
            for p in 0..k {
                let mut pivot = p;
                for r in (p + 1)..k {
                    if a[r * k + p].abs() > a[pivot * k + p].abs() {
                        pivot = r;
                    }
                }
                for col in 0..k {
                    a.swap(p * k + col, pivot * k + col);
                }
                x.swap(p, pivot);
                let d = a[p * k + p];
                for r in (p + 1)..k {
                    let f = a[r * k + p] / d;
                    for col in p..k {
                        a[r * k + col] -= f * a[p * k + col];
                    }
                    x[r] -= f * x[p];
                }
            }
            for p in (0..k).rev() {
                let mut acc = x[p];
                for col in (p + 1)..k {
                    acc -= a[p * k + col] * x[col];
                }
                x[p] = acc / a[p * k + p];
            }
            out[row * k..(row + 1) * k].copy_from_slice(&x);
        }
    }

    #[test]
    fn synth_constant_factors_give_constant_tensor() {
        let ms = ModelString::parse("ia,ja,ka->ijk").unwrap();
        let binding =
            DimensionBinding::from_pairs([('i', 2), ('j', 2), ('k', 2), ('a', 1)]).unwrap();
        let ones: Vec<DenseTensor> = (0..3)
            .map(|_| DenseTensor::from_elem(vec![2, 1], 1.0).unwrap())
            .collect();
        let refs: Vec<&DenseTensor> = ones.iter().collect();
        let out = synth_from_factors(&ms, &binding, &refs, SynthNoise::Noiseless, 0).unwrap();
        assert!(out.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn synth_is_deterministic() {
        let (ms, binding) = build(&ModelRecipe::Cp { rank: 2 }, &[4, 5, 6]).unwrap();
        let a = synth(&ms, &binding, 3, SynthNoise::Poisson).unwrap();
        let b = synth(&ms, &binding, 3, SynthNoise::Poisson).unwrap();
        assert_eq!(a.data(), b.data());
        let c = synth(&ms, &binding, 4, SynthNoise::Poisson).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn poisson_sample_mean_concentrates() {
        let ms = ModelString::parse("ia,ja->ij").unwrap();
        let binding =
            DimensionBinding::from_pairs([('i', 400), ('j', 250), ('a', 2)]).unwrap();
        let factors = planted_factors(&ms, &binding, 8).unwrap();
        let refs: Vec<&DenseTensor> = factors.iter().collect();
        let mean = contract(&ms, &binding, &refs).unwrap();
        let sampled = synth_from_factors(&ms, &binding, &refs, SynthNoise::Poisson, 9).unwrap();
        let n = mean.len() as f64;
        let mu: f64 = mean.data().iter().sum::<f64>() / n;
        let got: f64 = sampled.data().iter().sum::<f64>() / n;
        // Var of the sample mean is sum(mu_i)/n^2 for Poisson noise.
        let sigma = (mean.data().iter().sum::<f64>()).sqrt() / n;
        assert!((got - mu).abs() < 3.0 * sigma, "{got} vs {mu}");
    }
}
