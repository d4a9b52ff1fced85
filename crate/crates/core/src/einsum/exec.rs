//! Greedy pairwise contraction planning and execution.
//!
//! The planner repeatedly contracts the pair of remaining operands whose
//! intermediate tensor is smallest, then finishes with a unary step that sums
//! leftover indices, reorders axes to the output subscript, and broadcasts
//! output indices no operand carries. Every plan's execution agrees with the
//! brute-force definition; the oracle test suite holds it to that.

use std::collections::BTreeSet;

use super::{DimensionBinding, IndexIter, ModelString};
use crate::error::Result;
use crate::tensor::{checked_len, DenseTensor};

/// One pairwise contraction: slots `lhs` and `rhs` combine into a tensor
/// over `result`, summing `summed`.
#[derive(Debug, Clone)]
pub struct PairStep {
    pub lhs: usize,
    pub rhs: usize,
    pub result: Vec<char>,
    pub summed: Vec<char>,
}

/// An ordered contraction schedule. Slot ids 0..L-1 are the operands; each
/// pair step appends a new slot.
#[derive(Debug, Clone)]
pub struct ContractionPlan {
    slot_subs: Vec<Vec<char>>,
    steps: Vec<PairStep>,
    step_elems: Vec<usize>,
    final_source: usize,
    output: Vec<char>,
}

impl ContractionPlan {
    pub fn steps(&self) -> &[PairStep] {
        &self.steps
    }

    /// Largest pairwise intermediate, in elements.
    pub fn max_intermediate_elems(&self) -> usize {
        self.step_elems.iter().copied().max().unwrap_or(0)
    }

    pub fn output(&self) -> &[char] {
        &self.output
    }
}

/// Build a greedy minimum-intermediate-size plan.
pub fn plan(ms: &ModelString, binding: &DimensionBinding) -> Result<ContractionPlan> {
    binding.covers(ms)?;
    checked_len(&binding.output_shape(ms)?)?;

    let output_set: BTreeSet<char> = ms.output().iter().copied().collect();
    let mut slot_subs: Vec<Vec<char>> = ms.operands().to_vec();
    let mut active: Vec<usize> = (0..slot_subs.len()).collect();
    let mut steps = Vec::new();
    let mut step_elems = Vec::new();

    while active.len() > 1 {
        let mut best: Option<(usize, usize, Vec<char>, usize)> = None;
        for ai in 0..active.len() {
            for aj in (ai + 1)..active.len() {
                let keep = kept_indices(
                    &slot_subs[active[ai]],
                    &slot_subs[active[aj]],
                    &active,
                    ai,
                    aj,
                    &slot_subs,
                    &output_set,
                );
                let dims: Vec<usize> = keep
                    .iter()
                    .map(|&c| binding.dim(c))
                    .collect::<Result<_>>()?;
                let elems = checked_len(&dims)?;
                if best.as_ref().map_or(true, |b| elems < b.3) {
                    best = Some((ai, aj, keep, elems));
                }
            }
        }
        let (ai, aj, keep, elems) = best.expect("at least one pair");
        let (lhs, rhs) = (active[ai], active[aj]);
        let union = subscript_union(&slot_subs[lhs], &slot_subs[rhs]);
        let summed: Vec<char> = union.iter().copied().filter(|c| !keep.contains(c)).collect();
        steps.push(PairStep {
            lhs,
            rhs,
            result: keep.clone(),
            summed,
        });
        step_elems.push(elems);
        active.remove(aj);
        active.remove(ai);
        let new_id = slot_subs.len();
        slot_subs.push(keep);
        active.push(new_id);
    }

    Ok(ContractionPlan {
        final_source: active[0],
        slot_subs,
        steps,
        step_elems,
        output: ms.output().to_vec(),
    })
}

/// Contract operands according to the model string. Output element `[i]` is
/// the sum over all contracted-index assignments of the product of operand
/// entries, exactly as the brute-force definition states.
pub fn contract(
    ms: &ModelString,
    binding: &DimensionBinding,
    operands: &[&DenseTensor],
) -> Result<DenseTensor> {
    binding.validate_operands(ms, operands)?;
    let schedule = plan(ms, binding)?;
    execute(&schedule, binding, operands)
}

fn execute(
    schedule: &ContractionPlan,
    binding: &DimensionBinding,
    operands: &[&DenseTensor],
) -> Result<DenseTensor> {
    let mut slots: Vec<Option<DenseTensor>> = Vec::with_capacity(schedule.slot_subs.len());
    for t in operands {
        slots.push(Some((*t).clone()));
    }
    slots.resize(schedule.slot_subs.len(), None);

    for step in &schedule.steps {
        let a = slots[step.lhs].take().expect("slot consumed once");
        let b = slots[step.rhs].take().expect("slot consumed once");
        let result = contract_pair(
            &a,
            &schedule.slot_subs[step.lhs],
            &b,
            &schedule.slot_subs[step.rhs],
            &step.result,
            binding,
        )?;
        let id = step_result_id(schedule, step);
        slots[id] = Some(result);
    }

    let last = slots[schedule.final_source].take().expect("final slot");
    unary_to_output(
        &last,
        &schedule.slot_subs[schedule.final_source],
        &schedule.output,
        binding,
    )
}

fn step_result_id(schedule: &ContractionPlan, step: &PairStep) -> usize {
    // Steps append slots in order right after the operands.
    let idx = schedule
        .steps
        .iter()
        .position(|s| std::ptr::eq(s, step))
        .expect("step belongs to plan");
    schedule.slot_subs.len() - schedule.steps.len() + idx
}

fn subscript_union(a: &[char], b: &[char]) -> Vec<char> {
    let mut union = a.to_vec();
    for &c in b {
        if !union.contains(&c) {
            union.push(c);
        }
    }
    union
}

fn kept_indices(
    sa: &[char],
    sb: &[char],
    active: &[usize],
    ai: usize,
    aj: usize,
    slot_subs: &[Vec<char>],
    output_set: &BTreeSet<char>,
) -> Vec<char> {
    let union = subscript_union(sa, sb);
    union
        .into_iter()
        .filter(|c| {
            if output_set.contains(c) {
                return true;
            }
            active.iter().enumerate().any(|(pos, &slot)| {
                pos != ai && pos != aj && slot_subs[slot].contains(c)
            })
        })
        .collect()
}

/// Materialized axis permutation; output axis `k` reads input axis `perm[k]`.
pub(crate) fn permute(t: &DenseTensor, perm: &[usize]) -> DenseTensor {
    debug_assert_eq!(perm.len(), t.ndim());
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return t.clone();
    }
    let in_strides = t.strides();
    let out_shape: Vec<usize> = perm.iter().map(|&p| t.shape()[p]).collect();
    let mut out = DenseTensor::zeros(out_shape.clone()).expect("permute preserves size");
    let src_strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
    for (oflat, oidx) in IndexIter::new(&out_shape).enumerate() {
        let src: usize = oidx.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
        out.data_mut()[oflat] = t.data()[src];
    }
    out
}

/// Sum over the given axes (sorted, deduplicated by caller), dropping them.
pub(crate) fn reduce_sum_axes(t: &DenseTensor, drop: &[usize]) -> DenseTensor {
    if drop.is_empty() {
        return t.clone();
    }
    let kept_shape: Vec<usize> = t
        .shape()
        .iter()
        .enumerate()
        .filter(|(axis, _)| !drop.contains(axis))
        .map(|(_, &d)| d)
        .collect();
    let mut out = DenseTensor::zeros(kept_shape.clone()).expect("reduced size fits");
    // Contribution stride of each input axis into the output flat index.
    let mut out_strides = vec![0usize; t.ndim()];
    let mut running = 1usize;
    for axis in (0..t.ndim()).rev() {
        if !drop.contains(&axis) {
            out_strides[axis] = running;
            running *= t.shape()[axis];
        }
    }
    for (iflat, iidx) in IndexIter::new(t.shape()).enumerate() {
        let oflat: usize = iidx.iter().zip(&out_strides).map(|(i, s)| i * s).sum();
        out.data_mut()[oflat] += t.data()[iflat];
    }
    out
}

/// Contract one pair of tensors, keeping exactly the `keep` indices.
fn contract_pair(
    a: &DenseTensor,
    subs_a: &[char],
    b: &DenseTensor,
    subs_b: &[char],
    keep: &[char],
    binding: &DimensionBinding,
) -> Result<DenseTensor> {
    let set_a: BTreeSet<char> = subs_a.iter().copied().collect();
    let set_b: BTreeSet<char> = subs_b.iter().copied().collect();
    let set_keep: BTreeSet<char> = keep.iter().copied().collect();

    // Keep-group order follows `keep` so the final permute is usually trivial.
    let batch: Vec<char> = keep
        .iter()
        .copied()
        .filter(|c| set_a.contains(c) && set_b.contains(c))
        .collect();
    let left: Vec<char> = keep
        .iter()
        .copied()
        .filter(|c| set_a.contains(c) && !set_b.contains(c))
        .collect();
    let right: Vec<char> = keep
        .iter()
        .copied()
        .filter(|c| set_b.contains(c) && !set_a.contains(c))
        .collect();
    let contracted: Vec<char> = subs_a
        .iter()
        .copied()
        .filter(|c| set_b.contains(c) && !set_keep.contains(c))
        .collect();

    // Marginalize indices private to one operand that are not kept.
    let a2 = drop_private(a, subs_a, &set_b, &set_keep);
    let b2 = drop_private(b, subs_b, &set_a, &set_keep);

    let a3 = arrange(&a2.0, &a2.1, &[&batch, &left, &contracted]);
    let b3 = arrange(&b2.0, &b2.1, &[&batch, &contracted, &right]);

    let dim = |cs: &[char]| -> Result<usize> {
        checked_len(&cs.iter().map(|&c| binding.dim(c)).collect::<Result<Vec<_>>>()?)
    };
    let (nb, nl, nc, nr) = (dim(&batch)?, dim(&left)?, dim(&contracted)?, dim(&right)?);
    let mut out_data = vec![0.0f64; nb * nl * nr];
    let (ad, bd) = (a3.data(), b3.data());
    for ib in 0..nb {
        let a_base = ib * nl * nc;
        let b_base = ib * nc * nr;
        let o_base = ib * nl * nr;
        for il in 0..nl {
            let a_row = a_base + il * nc;
            let o_row = o_base + il * nr;
            for ic in 0..nc {
                let av = ad[a_row + ic];
                if av != 0.0 {
                    let b_row = b_base + ic * nr;
                    for ir in 0..nr {
                        out_data[o_row + ir] += av * bd[b_row + ir];
                    }
                }
            }
        }
    }

    let mut grouped_subs: Vec<char> = Vec::with_capacity(keep.len());
    grouped_subs.extend(&batch);
    grouped_subs.extend(&left);
    grouped_subs.extend(&right);
    let grouped_shape: Vec<usize> = grouped_subs
        .iter()
        .map(|&c| binding.dim(c))
        .collect::<Result<_>>()?;
    let grouped = DenseTensor::new(grouped_shape, out_data)?;
    let perm: Vec<usize> = keep
        .iter()
        .map(|c| grouped_subs.iter().position(|g| g == c).expect("kept index present"))
        .collect();
    Ok(permute(&grouped, &perm))
}

/// Sum out axes private to this operand that are not kept; returns the tensor
/// and its remaining subscripts.
fn drop_private(
    t: &DenseTensor,
    subs: &[char],
    other: &BTreeSet<char>,
    keep: &BTreeSet<char>,
) -> (DenseTensor, Vec<char>) {
    let drop: Vec<usize> = subs
        .iter()
        .enumerate()
        .filter(|(_, c)| !other.contains(c) && !keep.contains(c))
        .map(|(axis, _)| axis)
        .collect();
    let remaining: Vec<char> = subs
        .iter()
        .enumerate()
        .filter(|(axis, _)| !drop.contains(axis))
        .map(|(_, &c)| c)
        .collect();
    (reduce_sum_axes(t, &drop), remaining)
}

/// Permute a tensor so its axes follow the concatenation of the given groups.
fn arrange(t: &DenseTensor, subs: &[char], groups: &[&[char]]) -> DenseTensor {
    let target: Vec<char> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    debug_assert_eq!(target.len(), subs.len());
    let perm: Vec<usize> = target
        .iter()
        .map(|c| subs.iter().position(|s| s == c).expect("axis present"))
        .collect();
    permute(t, &perm)
}

/// Finish a contraction: sum indices absent from the output, reorder, and
/// broadcast output indices the source does not carry.
pub(crate) fn unary_to_output(
    t: &DenseTensor,
    subs: &[char],
    output: &[char],
    binding: &DimensionBinding,
) -> Result<DenseTensor> {
    let out_set: BTreeSet<char> = output.iter().copied().collect();
    let drop: Vec<usize> = subs
        .iter()
        .enumerate()
        .filter(|(_, c)| !out_set.contains(c))
        .map(|(axis, _)| axis)
        .collect();
    let reduced = reduce_sum_axes(t, &drop);
    let kept: Vec<char> = subs
        .iter()
        .copied()
        .filter(|c| out_set.contains(c))
        .collect();
    if kept == output {
        return Ok(reduced);
    }

    let out_shape: Vec<usize> = output
        .iter()
        .map(|&c| binding.dim(c))
        .collect::<Result<_>>()?;
    let src_strides = reduced.strides();
    // Stride of each output axis into the source; broadcast axes contribute 0.
    let contrib: Vec<usize> = output
        .iter()
        .map(|c| {
            kept.iter()
                .position(|k| k == c)
                .map_or(0, |axis| src_strides[axis])
        })
        .collect();
    let mut out = DenseTensor::zeros(out_shape.clone())?;
    for (oflat, oidx) in IndexIter::new(&out_shape).enumerate() {
        let src: usize = oidx.iter().zip(&contrib).map(|(i, s)| i * s).sum();
        out.data_mut()[oflat] = reduced.data()[src];
    }
    Ok(out)
}
