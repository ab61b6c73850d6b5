use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// `count` Halton points in the box, randomized by a seeded
/// Cranley-Patterson rotation. Deterministic in `(domain, count, seed)`.
pub fn sample_points(domain: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(domain.len() <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = domain.iter().map(|_| rng.gen::<f64>()).collect();
    (0..count as u64)
        .map(|k| {
            domain
                .iter()
                .enumerate()
                .map(|(d, &(lo, hi))| {
                    let u = (radical_inverse(k + 1, PRIMES[d]) + shift[d]).fract();
                    lo + u * (hi - lo)
                })
                .collect()
        })
        .collect()
}
