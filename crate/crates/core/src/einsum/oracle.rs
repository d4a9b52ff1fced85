//! Brute-force contraction by literal nested loops.
//!
//! Walks every output index assignment and, inside it, every contracted index
//! assignment, multiplying one entry per operand. Quadratic-and-worse in all
//! the wrong ways, which is the point: it is the independent definition that
//! the planned executor is tested against. Intended for small instances only.

use super::{DimensionBinding, IndexIter, ModelString};
use crate::error::Result;
use crate::tensor::DenseTensor;

enum AxisSource {
    Output(usize),
    Contracted(usize),
}

pub fn contract_oracle(
    ms: &ModelString,
    binding: &DimensionBinding,
    operands: &[&DenseTensor],
) -> Result<DenseTensor> {
    binding.validate_operands(ms, operands)?;

    let out_shape = binding.output_shape(ms)?;
    let contracted: Vec<char> = ms.contracted_indices().into_iter().collect();
    let contracted_shape: Vec<usize> = contracted
        .iter()
        .map(|&c| binding.dim(c))
        .collect::<Result<_>>()?;

    // For each operand axis, where its index value comes from and the
    // operand's stride for that axis.
    let mut projections: Vec<Vec<(AxisSource, usize)>> = Vec::new();
    for (slot, t) in operands.iter().enumerate() {
        let strides = t.strides();
        let mut proj = Vec::new();
        for (axis, &c) in ms.operand(slot).iter().enumerate() {
            let source = if let Some(pos) = ms.output().iter().position(|&o| o == c) {
                AxisSource::Output(pos)
            } else {
                let pos = contracted
                    .iter()
                    .position(|&r| r == c)
                    .expect("index is observed or contracted");
                AxisSource::Contracted(pos)
            };
            proj.push((source, strides[axis]));
        }
        projections.push(proj);
    }

    let mut out = DenseTensor::zeros(out_shape.clone())?;
    for (oflat, oidx) in IndexIter::new(&out_shape).enumerate() {
        let mut acc = 0.0;
        for ridx in IndexIter::new(&contracted_shape) {
            let mut prod = 1.0;
            for (slot, t) in operands.iter().enumerate() {
                let mut flat = 0usize;
                for (source, stride) in &projections[slot] {
                    let value = match source {
                        AxisSource::Output(pos) => oidx[*pos],
                        AxisSource::Contracted(pos) => ridx[*pos],
                    };
                    flat += value * stride;
                }
                prod *= t.data()[flat];
            }
            acc += prod;
        }
        out.data_mut()[oflat] = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::einsum::contract;

    #[test]
    fn empty_contracted_set_is_broadcast_product() {
        let ms = ModelString::parse("ij,j->ij").unwrap();
        let binding = DimensionBinding::from_pairs([('i', 2), ('j', 2)]).unwrap();
        let a = DenseTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseTensor::new(vec![2], vec![10.0, 100.0]).unwrap();
        let out = contract_oracle(&ms, &binding, &[&a, &b]).unwrap();
        assert_eq!(out.data(), &[10.0, 200.0, 30.0, 400.0]);
    }

    #[test]
    fn identity_case() {
        let ms = ModelString::parse("ij->ij").unwrap();
        let binding = DimensionBinding::from_pairs([('i', 2), ('j', 2)]).unwrap();
        let t = DenseTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = contract_oracle(&ms, &binding, &[&t]).unwrap();
        assert_eq!(out.data(), t.data());
    }

    #[test]
    fn matches_planned_executor() {
        let ms = ModelString::parse("ia,ja,ka->ijk").unwrap();
        let binding =
            DimensionBinding::from_pairs([('i', 2), ('j', 3), ('k', 4), ('a', 2)]).unwrap();
        let mk = |shape: &[usize], seed: usize| {
            let n: usize = shape.iter().product();
            let data: Vec<f64> = (0..n).map(|i| ((i * 7 + seed) % 11) as f64 / 11.0).collect();
            DenseTensor::new(shape.to_vec(), data).unwrap()
        };
        let ops = [mk(&[2, 2], 1), mk(&[3, 2], 2), mk(&[4, 2], 3)];
        let refs: Vec<&DenseTensor> = ops.iter().collect();
        let slow = contract_oracle(&ms, &binding, &refs).unwrap();
        let fast = contract(&ms, &binding, &refs).unwrap();
        for (x, y) in fast.data().iter().zip(slow.data()) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }
}
