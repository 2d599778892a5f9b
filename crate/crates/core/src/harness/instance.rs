//! Instance files and generators.
//!
//! An instance is a JSON document with an objective block, a constraint
//! block, a noise block and a seed:
//!
//! ```json
//! {
//!   "objective": { "kind": "modular", "weights": [3.0, 1.0, 2.0] },
//!   "constraint": { "kind": "uniform", "rank": 2 },
//!   "noise": { "family": "uniform_band", "halfwidth": 0.1 },
//!   "seed": 7
//! }
//! ```

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::Constraint;
use crate::noise::NoiseDistribution;
use crate::objective::{Objective, SetFunction};
use crate::subset::Element;

/// Constraint block of an instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSpec {
    Uniform { rank: usize },
    Partition { blocks: Vec<Vec<Element>>, caps: Vec<usize> },
}

impl ConstraintSpec {
    pub fn build(&self, n: usize) -> Result<Constraint> {
        match self {
            ConstraintSpec::Uniform { rank } => Ok(Constraint::uniform(n, *rank)),
            ConstraintSpec::Partition { blocks, caps } => Constraint::partition(n, blocks, caps),
        }
    }

    /// `count` contiguous blocks of near-equal size, each with cap `cap`.
    pub fn contiguous_blocks(n: usize, count: usize, cap: usize) -> Self {
        let mut blocks = Vec::with_capacity(count);
        let mut start = 0;
        for b in 0..count {
            let len = n / count + usize::from(b < n % count);
            blocks.push((start..start + len).collect());
            start += len;
        }
        ConstraintSpec::Partition {
            blocks,
            caps: vec![cap; count],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub objective: Objective,
    pub constraint: ConstraintSpec,
    #[serde(default = "no_noise")]
    pub noise: NoiseDistribution,
    #[serde(default)]
    pub seed: u64,
}

fn no_noise() -> NoiseDistribution {
    NoiseDistribution::NoNoise
}

impl InstanceSpec {
    pub fn ground_size(&self) -> usize {
        self.objective.ground_size()
    }

    /// Validates every block and returns the constraint oracle.
    pub fn validate(&self) -> Result<Constraint> {
        self.objective.validate()?;
        self.noise.validate()?;
        let c = self.constraint.build(self.ground_size())?;
        c.check_singletons_feasible()?;
        if c.rank() == 0 {
            return Err(Error::Input("constraint has rank 0".into()));
        }
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: InstanceSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Shape of the generated constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintShape {
    Uniform { rank: usize },
    /// Contiguous near-equal blocks, each with the same cap.
    Blocks { count: usize, cap: usize },
}

impl ConstraintShape {
    fn spec(&self, n: usize) -> ConstraintSpec {
        match *self {
            ConstraintShape::Uniform { rank } => ConstraintSpec::Uniform { rank },
            ConstraintShape::Blocks { count, cap } => ConstraintSpec::contiguous_blocks(n, count, cap),
        }
    }
}

/// Instance generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Each element covers each item independently with probability
    /// `density`; item weights uniform in `[0.5, 1.5)`.
    RandomCoverage {
        n: usize,
        items: usize,
        density: f64,
        constraint: ConstraintShape,
    },
    /// Utilities uniform in `[0, 1)`.
    RandomFacility {
        n: usize,
        clients: usize,
        constraint: ConstraintShape,
    },
    /// `r - 1` singleton blocks of value zero and one block holding every
    /// other element, all with cap one. The last element has value `m`, the
    /// rest of its block value one; the noise returns `m` with probability
    /// `1 / (2(n - r))` and `1` otherwise, unnormalized.
    PartitionAdversary { n: usize, r: usize, m: f64 },
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

impl Generator {
    /// Deterministic in `(self, seed)`.
    pub fn generate(&self, seed: u64) -> Result<InstanceSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = match self {
            Generator::RandomCoverage {
                n,
                items,
                density,
                constraint,
            } => {
                check(*n >= 1 && *items >= 1, "coverage needs n >= 1 and items >= 1")?;
                check((0.0..=1.0).contains(density), "density must lie in [0, 1]")?;
                let item_weights = (0..*items).map(|_| rng.gen_range(0.5..1.5)).collect();
                let covers = (0..*n)
                    .map(|_| (0..*items).filter(|_| rng.gen_bool(*density)).collect())
                    .collect();
                InstanceSpec {
                    objective: Objective::WeightedCoverage { covers, item_weights },
                    constraint: constraint.spec(*n),
                    noise: NoiseDistribution::NoNoise,
                    seed,
                }
            }
            Generator::RandomFacility {
                n,
                clients,
                constraint,
            } => {
                check(*n >= 1 && *clients >= 1, "facility location needs n >= 1 and clients >= 1")?;
                let utility = (0..*clients)
                    .map(|_| (0..*n).map(|_| rng.gen::<f64>()).collect())
                    .collect();
                InstanceSpec {
                    objective: Objective::FacilityLocation { utility },
                    constraint: constraint.spec(*n),
                    noise: NoiseDistribution::NoNoise,
                    seed,
                }
            }
            Generator::PartitionAdversary { n, r, m } => {
                check(*r >= 2 && *n > *r, "adversary needs 2 <= r < n")?;
                check(*m >= 1.0 && m.is_finite(), "adversary needs a finite m >= 1")?;
                let mut weights = vec![0.0; *n];
                for w in &mut weights[r - 1..] {
                    *w = 1.0;
                }
                weights[n - 1] = *m;
                let mut blocks: Vec<Vec<Element>> = (0..r - 1).map(|i| vec![i]).collect();
                blocks.push((r - 1..*n).collect());
                InstanceSpec {
                    objective: Objective::Modular { weights },
                    constraint: ConstraintSpec::Partition {
                        blocks,
                        caps: vec![1; *r],
                    },
                    noise: NoiseDistribution::TwoPoint {
                        high: *m,
                        p_high: 1.0 / (2.0 * (n - r) as f64),
                        low: 1.0,
                        normalize: false,
                    },
                    seed,
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The distinguished element of the adversarial instance.
pub fn adversary_special(n: usize) -> Element {
    n - 1
}
