use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CSum, Estimate, Integrand};

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    r
}

/// The `index`-th Halton point in `[0,1)^dim` (index 0 is skipped by callers).
pub fn halton_point(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton sequence supports at most {} dimensions", PRIMES.len());
    (0..dim).map(|a| radical_inverse(index, PRIMES[a])).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct QmcOptions {
    pub points_per_replicate: usize,
    pub replicates: usize,
    pub seed: u64,
}

/// Randomly shifted Halton rule; the error is the standard error across
/// independent shifts.
pub fn qmc<F: Integrand + ?Sized>(f: &F, lo: &[f64], hi: &[f64], opts: &QmcOptions) -> Estimate {
    let dim = lo.len();
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let reps = opts.replicates.max(2);
    let mut means = Vec::with_capacity(reps);
    for _ in 0..reps {
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        let mut acc = CSum::new();
        let mut x = vec![0.0; dim];
        for i in 1..=opts.points_per_replicate as u64 {
            let h = halton_point(i, dim);
            for a in 0..dim {
                let u = (h[a] + shift[a]).fract();
                x[a] = lo[a] + (hi[a] - lo[a]) * u;
            }
            acc.add(f.eval(&x));
        }
        means.push(acc.value() * (vol / opts.points_per_replicate as f64));
    }
    let mean = means.iter().copied().collect::<CSum>().value() / reps as f64;
    let var = means.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / (reps as f64 - 1.0);
    Estimate {
        value: mean,
        error: (var / reps as f64).sqrt(),
        evals: reps * opts.points_per_replicate,
        converged: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn halton_first_points() {
        assert_eq!(halton_point(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton_point(2, 2), vec![0.25, 2.0 / 3.0]);
    }

    #[test]
    fn qmc_smooth_integral() {
        let f = |x: &[f64]| Complex64::new(x[0] * x[1] + x[2], 0.0);
        let est = qmc(&f, &[0.0; 3], &[1.0; 3], &QmcOptions { points_per_replicate: 4096, replicates: 8, seed: 3 });
        assert!((est.value.re - 0.75).abs() < 1e-3);
        assert!(est.error < 1e-3);
    }
}
