//! Seeded random step-function corpora. One seed fully determines every
//! corpus, so identical runs produce identical reports.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::padic::{Ball, PadicPoint};
use crate::schwartz::StepFunction;

#[derive(Debug, Clone, Copy)]
pub struct CorpusSpec {
    pub prime: u32,
    pub dim: usize,
    pub support_exp: i32,
    pub scale: i32,
    /// Probability that a grid cell carries a nonzero value.
    pub density: f64,
    pub real: bool,
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One random step function on the full grid of the spec's support ball.
pub fn random_step_function(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> Result<StepFunction> {
    let ball = Ball::new(PadicPoint::zero(spec.prime, spec.dim), spec.support_exp);
    let grid = StepFunction::indicator_ball(&ball)?.refine_to(spec.support_exp, spec.scale)?;
    let view = grid.grid_view()?;
    let mut terms = Vec::new();
    for center in &view.centers {
        if rng.gen::<f64>() >= spec.density {
            continue;
        }
        let re = rng.gen_range(-1.0..1.0);
        let im = if spec.real { 0.0 } else { rng.gen_range(-1.0..1.0) };
        terms.push((
            crate::padic::Cell::new(center.clone(), -spec.scale),
            Complex64::new(re, im),
        ));
    }
    StepFunction::from_terms(spec.prime, spec.dim, &terms)
}

/// A seeded corpus of `count` functions sharing one spec.
pub fn corpus(seed: u64, spec: &CorpusSpec, count: usize) -> Result<Vec<StepFunction>> {
    let mut rng = rng_for(seed);
    (0..count).map(|_| random_step_function(&mut rng, spec)).collect()
}

/// Default spec used for operator-level corpora: a modest grid that keeps
/// the dual-route sweeps fast at every prime and dimension.
pub fn default_spec(prime: u32, dim: usize, real: bool) -> CorpusSpec {
    let (support_exp, scale) = match (prime, dim) {
        (2, 1) => (2, 3),
        (_, 1) => (1, 2),
        (2, 2) => (1, 2),
        _ => (0, 1),
    };
    CorpusSpec { prime, dim, support_exp, scale, density: 0.6, real }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_seed_deterministic() {
        let spec = default_spec(2, 1, false);
        let a = corpus(7, &spec, 5).unwrap();
        let b = corpus(7, &spec, 5).unwrap();
        for (f, g) in a.iter().zip(&b) {
            assert_eq!(f.max_abs_diff(g).unwrap(), 0.0);
        }
        let c = corpus(8, &spec, 5).unwrap();
        let same: Vec<bool> = a
            .iter()
            .zip(&c)
            .map(|(f, g)| f.max_abs_diff(g).unwrap() == 0.0)
            .collect();
        assert!(same.iter().any(|s| !s));
    }
}
