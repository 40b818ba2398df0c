//! Seeded random instances of the two benchmark families.
//!
//! The random stream is `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.9.0).
//! Gaussian coefficients come from `rand_distr::StandardNormal` (0.5.1, a
//! ziggurat sampler); MAX-2-XOR edges from `Bernoulli(density)`. Both crates
//! are pinned exactly so a seed names the same instance across builds.
//! Pairs `(i, j)`, `i < j`, are visited in lexicographic order.

use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

use crate::cost::{ProblemInstance, Term};
use crate::error::{bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Every pair coupled with an i.i.d. `N(0, 1)` weight.
    Gaussian2Edge,
    /// Each pair coupled with weight 1 with probability `density`.
    Max2Xor,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian2Edge => "gaussian",
            Family::Max2Xor => "max2xor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    /// Edge density; present iff the family is [`Family::Max2Xor`].
    pub density: Option<f64>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn gaussian(n: usize, seed: u64) -> Self {
        GeneratorSpec { family: Family::Gaussian2Edge, n, density: None, seed }
    }

    pub fn max2xor(n: usize, density: f64, seed: u64) -> Self {
        GeneratorSpec { family: Family::Max2Xor, n, density: Some(density), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            bail!(Argument, "generators need n >= 2, got {}", self.n);
        }
        match (self.family, self.density) {
            (Family::Gaussian2Edge, None) => Ok(()),
            (Family::Gaussian2Edge, Some(_)) => {
                bail!(Argument, "density is only meaningful for MAX-2-XOR")
            }
            (Family::Max2Xor, Some(d)) if (0.0..=1.0).contains(&d) => Ok(()),
            (Family::Max2Xor, Some(d)) => bail!(Argument, "density {d} outside [0, 1]"),
            (Family::Max2Xor, None) => bail!(Argument, "MAX-2-XOR needs an edge density"),
        }
    }

    pub fn generate(&self) -> Result<ProblemInstance> {
        self.validate()?;
        match self.family {
            Family::Gaussian2Edge => gen_gaussian(self.n, self.seed),
            Family::Max2Xor => gen_max2xor(self.n, self.density.unwrap_or_default(), self.seed),
        }
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
}

pub fn gen_gaussian(n: usize, seed: u64) -> Result<ProblemInstance> {
    if n < 2 {
        bail!(Argument, "generators need n >= 2, got {n}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<Term> = pairs(n)
        .map(|(i, j)| Term::new(i, j, StandardNormal.sample(&mut rng)))
        .collect();
    ProblemInstance::new(n, terms)
}

pub fn gen_max2xor(n: usize, density: f64, seed: u64) -> Result<ProblemInstance> {
    if n < 2 {
        bail!(Argument, "generators need n >= 2, got {n}");
    }
    let edge = match Bernoulli::new(density) {
        Ok(b) => b,
        Err(_) => bail!(Argument, "density {density} outside [0, 1]"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<Term> = pairs(n)
        .filter(|_| edge.sample(&mut rng))
        .map(|(i, j)| Term::new(i, j, 1.0))
        .collect();
    ProblemInstance::new(n, terms)
}
