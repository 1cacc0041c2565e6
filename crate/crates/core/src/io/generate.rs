//! Seeded random instances.

use num_traits::{One, Signed, ToPrimitive};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UtilityKind {
    /// Independent integers in `lo..=hi`.
    UniformInt { lo: i64, hi: i64 },
    /// Each utility is 1 with probability `p`, else 0.
    ZeroOne { p: Rational },
    /// One profile shared by every agent. Periodic instances draw `n`
    /// distinct values from `lo..=hi` per period, in random order.
    IdenticalPrefs { lo: i64, hi: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Pooled { agents: usize, per_agent: usize },
    Periodic { agents: usize, periods: usize },
}

impl Shape {
    pub fn agents(&self) -> usize {
        match *self {
            Shape::Pooled { agents, .. } | Shape::Periodic { agents, .. } => agents,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

fn invalid(msg: impl Into<String>) -> GenerateError {
    GenerateError::InvalidParameters(msg.into())
}

/// Deterministic in `(kind, shape, seed)`.
pub fn generate_instance(kind: &UtilityKind, shape: Shape, seed: u64) -> Result<Instance, GenerateError> {
    let n = shape.agents();
    if n == 0 {
        return Err(invalid("at least one agent is required"));
    }
    match shape {
        Shape::Pooled { per_agent: 0, .. } => return Err(invalid("K must be positive")),
        Shape::Periodic { periods: 0, .. } => return Err(invalid("T must be positive")),
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw: Box<dyn FnMut(&mut ChaCha8Rng) -> i64> = match kind {
        UtilityKind::UniformInt { lo, hi } | UtilityKind::IdenticalPrefs { lo, hi } => {
            let (lo, hi) = (*lo, *hi);
            if lo > hi {
                return Err(invalid(format!("lo {lo} exceeds hi {hi}")));
            }
            if lo < 0 {
                return Err(invalid("utilities must be non-negative"));
            }
            Box::new(move |rng: &mut ChaCha8Rng| rng.random_range(lo..=hi))
        }
        UtilityKind::ZeroOne { p } => {
            if p.is_negative() || *p > Rational::one() {
                return Err(invalid(format!("p = {p} is outside [0, 1]")));
            }
            let (num, den) = (p.numer().to_u64(), p.denom().to_u64());
            let (Some(num), Some(den)) = (num, den) else {
                return Err(invalid("p has a numerator or denominator beyond 64 bits"));
            };
            Box::new(move |rng: &mut ChaCha8Rng| i64::from(rng.random_range(0..den) < num))
        }
    };

    let identical = matches!(kind, UtilityKind::IdenticalPrefs { .. });
    let built = match shape {
        Shape::Pooled { per_agent, .. } => {
            let m = n * per_agent;
            let rows: Vec<Vec<i64>> = if identical {
                let row: Vec<i64> = (0..m).map(|_| draw(&mut rng)).collect();
                vec![row; n]
            } else {
                (0..n).map(|_| (0..m).map(|_| draw(&mut rng)).collect()).collect()
            };
            Instance::pooled(rows)
        }
        Shape::Periodic { periods, .. } => {
            if let UtilityKind::IdenticalPrefs { lo, hi } = *kind {
                let span = (hi - lo + 1) as usize;
                if span < n {
                    return Err(invalid(format!("{n} distinct values do not fit in {lo}..={hi}")));
                }
                let profile: Vec<Vec<i64>> = (0..periods)
                    .map(|_| sample(&mut rng, span, n).into_iter().map(|k| lo + k as i64).collect())
                    .collect();
                Instance::periodic(vec![profile; n])
            } else {
                let rows = (0..n)
                    .map(|_| (0..periods).map(|_| (0..n).map(|_| draw(&mut rng)).collect()).collect())
                    .collect();
                Instance::periodic(rows)
            }
        }
    };
    built.map_err(|e| invalid(e.to_string()))
}

/// Seed under which the identical-preference generator yields the 2×2
/// periodic instance with per-period utilities `(1, 2)`.
pub const SUBMODULAR_TWO_BY_TWO_SEED: u64 = 2;
