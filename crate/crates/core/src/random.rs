//! Seeded generators for models and sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{Cq, Scalar, C64};

pub type ModelRng = ChaCha8Rng;

pub fn rng(seed: u64) -> ModelRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric `N×N×N` tensor with entries `p/den`, `|p| ≤ max_num`, flat in
/// `(i·N + j)·N + k`.
pub fn symmetric_couplings(rng: &mut impl Rng, n: usize, max_num: i64, den: i64) -> Vec<Cq> {
    let mut c = vec![Cq::from_i64(0); n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let v = Cq::from_ratio(rng.gen_range(-max_num..=max_num), den);
                for (a, b, d) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    c[(a * n + b) * n + d] = v.clone();
                }
            }
        }
    }
    c
}

/// Rational point whose coordinates have real and imaginary parts in
/// `[−bound, bound]` on a grid of step `1/den`.
pub fn rational_point(rng: &mut impl Rng, n: usize, bound: f64, den: i64) -> Vec<Cq> {
    let m = (bound * den as f64).floor() as i64;
    (0..n)
        .map(|_| {
            let re = Cq::from_ratio(rng.gen_range(-m..=m), den);
            let im = Cq::from_ratio(rng.gen_range(-m..=m), den);
            re + Cq::i() * im
        })
        .collect()
}

/// Point with `Σ|t_i|² ≤ radius²`, uniform in direction.
pub fn float_point(rng: &mut impl Rng, n: usize, radius: f64) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
    let r = radius * rng.gen_range(0.1f64..1.0).sqrt();
    v.into_iter().map(|z| z * (r / norm)).collect()
}
