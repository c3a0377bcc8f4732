//! Node fitness, the unfitness transform, and fitness generators.
//!
//! Fitness is a dimensionless attraction measure; its reciprocal (unfitness)
//! is the quantity whose worst-case expected exposure the solvers minimise.
//! Every downstream formula divides by fitness sums, so invalid values are
//! rejected here, at construction, rather than at solve time.

use crate::error::Error;
use crate::rng::Sampler;

/// Smallest accepted fitness. Chosen so the reciprocal stays finite.
pub const FITNESS_MIN: f64 = 1e-300;
/// Largest accepted fitness. Caps values so small populations cannot
/// overflow the fitness sums the solvers divide by.
pub const FITNESS_MAX: f64 = 1e300;

/// Attribute counts above this switch the product to log space.
const LOG_SPACE_THRESHOLD: usize = 64;

fn validate_fitness(value: f64) -> Result<f64, Error> {
    if value.is_finite() && (FITNESS_MIN..=FITNESS_MAX).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidFitness { value })
    }
}

/// Reciprocal of a validated fitness value.
pub fn unfitness(fitness: f64) -> Result<f64, Error> {
    Ok(1.0 / validate_fitness(fitness)?)
}

/// A node with its fitness and derived unfitness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeRecord {
    id: u64,
    fitness: f64,
    unfitness: f64,
}

impl NodeRecord {
    pub fn new(id: u64, fitness: f64) -> Result<Self, Error> {
        Ok(NodeRecord {
            id,
            fitness: validate_fitness(fitness)?,
            unfitness: unfitness(fitness)?,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn fitness(&self) -> f64 {
        self.fitness
    }

    pub fn unfitness(&self) -> f64 {
        self.unfitness
    }
}

/// Builds records with ids `0..values.len()`.
pub fn nodes_from_fitness(values: &[f64]) -> Result<Vec<NodeRecord>, Error> {
    values
        .iter()
        .enumerate()
        .map(|(id, &fitness)| NodeRecord::new(id as u64, fitness))
        .collect()
}

/// Scale (`mu`) and shape (`sigma`) of a log-normal fitness distribution.
/// `sigma == 0` degenerates to the point mass at `exp(mu)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LognormalSpec {
    mu: f64,
    sigma: f64,
}

impl LognormalSpec {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, Error> {
        if !mu.is_finite() {
            return Err(Error::InvalidMu { mu });
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidSigma { sigma });
        }
        Ok(LognormalSpec { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Non-empty list of positive per-attribute factors.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributeVector {
    attributes: Vec<f64>,
}

impl AttributeVector {
    pub fn new(attributes: Vec<f64>) -> Result<Self, Error> {
        if attributes.is_empty() {
            return Err(Error::EmptyAttributes);
        }
        for &value in &attributes {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidAttribute { value });
            }
        }
        Ok(AttributeVector { attributes })
    }

    pub fn attributes(&self) -> &[f64] {
        &self.attributes
    }
}

/// Fitness as the product of a node's attribute factors.
///
/// Large attribute counts are multiplied in log space so intermediate
/// products cannot overflow when the final result is representable. The
/// result must land in the accepted fitness range.
pub fn fitness_from_attributes(attrs: &AttributeVector) -> Result<f64, Error> {
    let values = attrs.attributes();
    let product = if values.len() <= LOG_SPACE_THRESHOLD {
        values.iter().product::<f64>()
    } else {
        values.iter().map(|v| v.ln()).sum::<f64>().exp()
    };
    validate_fitness(product)
}

/// Where node fitness values come from.
#[derive(Clone, Debug, PartialEq)]
pub enum FitnessSource {
    Lognormal(LognormalSpec),
    /// Uniform on `[low, high]` with `0 < low <= high`.
    Uniform { low: f64, high: f64 },
    /// One value per node, in node order.
    Explicit(Vec<f64>),
    /// Per node, `attribute_count` factors drawn uniform on `[low, high]`
    /// and multiplied together.
    AttributeProduct {
        attribute_count: usize,
        low: f64,
        high: f64,
    },
}

impl FitnessSource {
    /// Draws `count` fitness values from the sampler's stream.
    pub fn realize(&self, count: usize, sampler: &mut Sampler) -> Result<Vec<f64>, Error> {
        match self {
            FitnessSource::Lognormal(spec) => (0..count)
                .map(|_| validate_fitness(sampler.lognormal(spec)))
                .collect(),
            FitnessSource::Uniform { low, high } => {
                validate_fitness(*low)?;
                validate_fitness(*high)?;
                if low > high {
                    return Err(Error::InvalidParams(format!(
                        "uniform fitness range is empty: [{low}, {high}]"
                    )));
                }
                (0..count)
                    .map(|_| validate_fitness(sampler.uniform_in(*low, *high)))
                    .collect()
            }
            FitnessSource::Explicit(values) => {
                if values.len() != count {
                    return Err(Error::InvalidParams(format!(
                        "explicit fitness list has {} values, need {count}",
                        values.len()
                    )));
                }
                values.iter().map(|&v| validate_fitness(v)).collect()
            }
            FitnessSource::AttributeProduct {
                attribute_count,
                low,
                high,
            } => {
                if *attribute_count == 0 {
                    return Err(Error::EmptyAttributes);
                }
                (0..count)
                    .map(|_| {
                        let attrs = AttributeVector::new(
                            (0..*attribute_count)
                                .map(|_| sampler.uniform_in(*low, *high))
                                .collect(),
                        )?;
                        fitness_from_attributes(&attrs)
                    })
                    .collect()
            }
        }
    }
}
