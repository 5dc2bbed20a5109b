//! Bootstrap significance test for a difference in simplification gain.
//!
//! Each system's judgments are treated as a multiset of S/F/E/N/U labels.
//! A resample draws T labels with replacement, which is a multinomial draw;
//! only the S and F counts matter, so they are sampled directly as
//! `S* ~ Bin(T, pS)` and `F* ~ Bin(T - S*, pF / (1 - pS))`.
//!
//! The p-value is two-sided on the centred bootstrap distribution:
//! `(1 + #{|d* - d| >= |d|}) / (1 + iterations)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{simplification_gain, EvalCounts, EvalError};

pub const DEFAULT_SEED: u64 = 42;
pub const MIN_ITERATIONS: usize = 1000;

fn resample_sg(c: &EvalCounts, rng: &mut ChaCha8Rng) -> f64 {
    let total = c.total();
    let p_s = c.s as f64 / total as f64;
    let s = Binomial::new(total, p_s)
        .expect("valid probability")
        .sample(rng);
    let rest = total - s;
    let p_f = if c.s == total {
        0.0
    } else {
        (c.f as f64 / (total - c.s) as f64).min(1.0)
    };
    let f = if rest == 0 {
        0
    } else {
        Binomial::new(rest, p_f)
            .expect("valid probability")
            .sample(rng)
    };
    (s as f64 - f as f64) / total as f64
}

pub fn sg_significance(
    a: &EvalCounts,
    b: &EvalCounts,
    iterations: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    if iterations < MIN_ITERATIONS {
        return Err(EvalError::Invalid(format!(
            "at least {MIN_ITERATIONS} bootstrap iterations are required"
        )));
    }
    let observed = simplification_gain(a)? - simplification_gain(b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..iterations {
        let d = resample_sg(a, &mut rng) - resample_sg(b, &mut rng);
        if (d - observed).abs() >= observed.abs() {
            extreme += 1;
        }
    }
    Ok((extreme + 1) as f64 / (iterations + 1) as f64)
}
