//! Seeded workloads shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regsparse_core::ablation::param_for_density;
use regsparse_core::{generate_pattern, DenseMatrix, Mask, PatternKind, PatternSpec};

pub struct Workload {
    pub spec: PatternSpec,
    pub mask: Mask,
    pub q: DenseMatrix<f32>,
    pub k: DenseMatrix<f32>,
    pub v: DenseMatrix<f32>,
}

/// Pattern nearest `density` at `seq_len` with uniform [-1, 1] inputs of width `dim`.
pub fn workload(
    kind: PatternKind,
    density: f64,
    seq_len: usize,
    dim: usize,
    seed: u64,
) -> Workload {
    let spec = param_for_density(kind, seq_len, density).expect("seq_len > 0");
    let mask = generate_pattern(&spec).expect("valid spec");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = || DenseMatrix::from_fn(seq_len, dim, |_, _| rng.random_range(-1.0f32..=1.0));
    let (q, k, v) = (next(), next(), next());
    Workload {
        spec,
        mask,
        q,
        k,
        v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_reproducible() {
        let a = workload(PatternKind::Windowed, 0.1, 32, 4, 9);
        let b = workload(PatternKind::Windowed, 0.1, 32, 4, 9);
        assert!(a.q.bit_identical(&b.q) && a.v.bit_identical(&b.v));
        assert_eq!(a.mask, b.mask);
        assert!(a.q.as_slice().iter().all(|x| (-1.0..=1.0).contains(x)));
    }
}
