//! Minimax-unfitness attachment for tiered populations.
//!
//! A tiered population is an ordered sequence of node sets; a feasible path
//! selects exactly one node per tier. Minimising the summed per-tier worst
//! exposures decomposes into independent per-tier problems, so the closed
//! form applies tier-wise and the successive-averages solver finds each
//! iteration's best path per tier without enumerating the feasible set: the
//! path cost is separable, making the best path the per-tier argmin — the
//! shortest path through the layered graph.

use std::collections::HashSet;

use crate::error::Error;
use crate::fitness::NodeRecord;
use crate::homogeneous::{
    self, should_record, validate_msa_params, AttachmentDistribution, DualDistribution,
    FictitiousPlay, KktReport, MinmaxSolution, MsaTrace, ProbabilitySnapshot, Termination,
    TraceRecord,
};

/// Upper bound on the feasible-path count the brute-force oracle accepts.
pub const PATH_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Ordered tiers of nodes. Node ids are unique within a tier.
#[derive(Clone, Debug, PartialEq)]
pub struct TieredPopulation {
    tiers: Vec<Vec<NodeRecord>>,
}

impl TieredPopulation {
    pub fn new(tiers: Vec<Vec<NodeRecord>>) -> Result<Self, Error> {
        if tiers.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        for (index, tier) in tiers.iter().enumerate() {
            if tier.is_empty() {
                return Err(Error::EmptyTier { tier: index });
            }
            let mut seen = HashSet::with_capacity(tier.len());
            for node in tier {
                if !seen.insert(node.id()) {
                    return Err(Error::DuplicateNodeId { id: node.id() });
                }
            }
        }
        Ok(TieredPopulation { tiers })
    }

    pub fn tiers(&self) -> &[Vec<NodeRecord>] {
        &self.tiers
    }

    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.tiers.iter().map(Vec::len).sum()
    }

    /// Number of feasible paths: the product of tier sizes.
    pub fn path_count(&self) -> u128 {
        self.tiers
            .iter()
            .fold(1u128, |acc, tier| acc.saturating_mul(tier.len() as u128))
    }
}

/// One node id per tier, in tier order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathSelection {
    node_ids: Vec<u64>,
}

impl PathSelection {
    fn from_positions(pop: &TieredPopulation, positions: &[usize]) -> Self {
        PathSelection {
            node_ids: positions
                .iter()
                .zip(pop.tiers())
                .map(|(&pos, tier)| tier[pos].id())
                .collect(),
        }
    }

    pub fn node_ids(&self) -> &[u64] {
        &self.node_ids
    }

    pub fn tier_count(&self) -> usize {
        self.node_ids.len()
    }
}

/// Distinct best paths encountered by the solver, in discovery order.
#[derive(Clone, Debug, Default)]
pub struct DiscoveredPathSet {
    order: Vec<PathSelection>,
    seen: HashSet<PathSelection>,
}

impl DiscoveredPathSet {
    pub(crate) fn insert(&mut self, path: PathSelection) {
        if self.seen.insert(path.clone()) {
            self.order.push(path);
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, path: &PathSelection) -> bool {
        self.seen.contains(path)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PathSelection> {
        self.order.iter()
    }
}

/// Per-tier solution: distributions, tier values `V_k`, and duals `lambda_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TieredSolution {
    pub p: Vec<AttachmentDistribution>,
    pub q: Vec<DualDistribution>,
    pub values: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// Tier-wise closed form: within each tier, fitness-proportional attachment
/// with value `1 / sum(tier fitness)`.
pub fn closed_form_solution(pop: &TieredPopulation) -> Result<TieredSolution, Error> {
    let mut p = Vec::with_capacity(pop.tier_count());
    let mut q = Vec::with_capacity(pop.tier_count());
    let mut values = Vec::with_capacity(pop.tier_count());
    let mut lambdas = Vec::with_capacity(pop.tier_count());
    for tier in pop.tiers() {
        let solved = homogeneous::closed_form_solution(tier)?;
        p.push(solved.p);
        q.push(solved.q);
        values.push(solved.value);
        lambdas.push(solved.lambda);
    }
    Ok(TieredSolution {
        p,
        q,
        values,
        lambdas,
    })
}

fn validate_duals(pop: &TieredPopulation, duals: &[DualDistribution]) -> Result<(), Error> {
    if duals.len() != pop.tier_count() {
        return Err(Error::InvalidInput(format!(
            "{} dual distributions for {} tiers",
            duals.len(),
            pop.tier_count()
        )));
    }
    for (index, (tier, dual)) in pop.tiers().iter().zip(duals).enumerate() {
        if dual.len() != tier.len() {
            return Err(Error::InvalidInput(format!(
                "tier {index} has {} nodes but {} dual entries",
                tier.len(),
                dual.len()
            )));
        }
    }
    Ok(())
}

/// Minimum-cost path under node costs `U_jk * q_jk`.
///
/// The cost is separable across tiers, so the scan is per-tier and no path
/// enumeration happens. Ties resolve to the first node in tier order.
pub fn best_path(pop: &TieredPopulation, duals: &[DualDistribution]) -> Result<PathSelection, Error> {
    validate_duals(pop, duals)?;
    let positions: Vec<usize> = pop
        .tiers()
        .iter()
        .zip(duals)
        .map(|(tier, dual)| {
            let mut best = 0;
            let mut best_cost = tier[0].unfitness() * dual.duals()[0];
            for (pos, (node, &weight)) in tier.iter().zip(dual.duals()).enumerate().skip(1) {
                let cost = node.unfitness() * weight;
                if cost < best_cost {
                    best_cost = cost;
                    best = pos;
                }
            }
            best
        })
        .collect();
    Ok(PathSelection::from_positions(pop, &positions))
}

/// Exhaustive path oracle: enumerates every feasible path and returns the
/// minimum-cost one under the same cost and tie-break rule as [`best_path`].
/// Refuses populations with more than [`PATH_ENUMERATION_LIMIT`] paths.
pub fn brute_force_best_path(
    pop: &TieredPopulation,
    duals: &[DualDistribution],
) -> Result<PathSelection, Error> {
    validate_duals(pop, duals)?;
    let paths = pop.path_count();
    if paths > PATH_ENUMERATION_LIMIT {
        return Err(Error::PathEnumerationLimit {
            paths,
            limit: PATH_ENUMERATION_LIMIT,
        });
    }

    let tier_count = pop.tier_count();
    let mut positions = vec![0usize; tier_count];
    let mut best_positions = Vec::new();
    let mut best_cost = f64::INFINITY;
    loop {
        let cost: f64 = positions
            .iter()
            .zip(pop.tiers())
            .zip(duals)
            .map(|((&pos, tier), dual)| tier[pos].unfitness() * dual.duals()[pos])
            .sum();
        // Strict improvement keeps the lexicographically first minimiser,
        // matching the per-tier tie-break.
        if best_positions.is_empty() || cost < best_cost {
            best_cost = cost;
            best_positions = positions.clone();
        }
        // Advance the odometer, last tier fastest.
        let mut tier = tier_count;
        loop {
            if tier == 0 {
                return Ok(PathSelection::from_positions(pop, &best_positions));
            }
            tier -= 1;
            positions[tier] += 1;
            if positions[tier] < pop.tiers()[tier].len() {
                break;
            }
            positions[tier] = 0;
        }
    }
}

/// Result of a tiered successive-averages run.
#[derive(Clone, Debug)]
pub struct TieredMsaRun {
    pub solution: TieredSolution,
    pub traces: Vec<MsaTrace>,
    pub paths: DiscoveredPathSet,
    pub termination: Termination,
    pub iterations: u64,
    /// Final `(upper - lower) / upper` per tier.
    pub relative_gaps: Vec<f64>,
}

impl TieredMsaRun {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Method of successive averages on a tiered population.
///
/// Each iteration finds the minimum-cost path under the dual-weighted
/// unfitness (per-tier argmin), averages the chosen nodes into the per-tier
/// attachment probabilities, then loads each tier's most exposed node into
/// the duals. Distinct best paths are accumulated in discovery order unless
/// `collect_paths` is false. Terminates when every tier's relative gap
/// reaches `gap_tolerance`.
pub fn msa_solve(
    pop: &TieredPopulation,
    max_iterations: u64,
    gap_tolerance: f64,
    trace_stride: u64,
    collect_paths: bool,
) -> Result<TieredMsaRun, Error> {
    validate_msa_params(max_iterations, gap_tolerance)?;

    let tier_count = pop.tier_count();
    let mut states: Vec<FictitiousPlay> = pop
        .tiers()
        .iter()
        .map(|tier| FictitiousPlay::new(tier.iter().map(|n| n.unfitness()).collect()))
        .collect();
    let mut traces = vec![MsaTrace::default(); tier_count];
    let mut paths = DiscoveredPathSet::default();
    let mut picked = vec![0usize; tier_count];
    let mut relative_gaps = vec![f64::INFINITY; tier_count];
    let mut bounds = vec![(0.0f64, 0.0f64); tier_count];
    let mut iterations = 0;
    let termination;

    loop {
        iterations += 1;
        let m = iterations as f64;
        let mut converged = true;
        for (tier, state) in states.iter_mut().enumerate() {
            let outcome = state.step();
            picked[tier] = outcome.picked;
            let upper = outcome.ub_scaled / m;
            let lower = outcome.lb_scaled / m;
            bounds[tier] = (upper, lower);
            relative_gaps[tier] = (upper - lower) / upper;
            converged &= relative_gaps[tier] <= gap_tolerance;
        }
        if collect_paths {
            paths.insert(PathSelection::from_positions(pop, &picked));
        }
        let last = converged || iterations == max_iterations;
        if should_record(trace_stride, iterations, last) {
            for (tier, trace) in traces.iter_mut().enumerate() {
                let (upper, lower) = bounds[tier];
                trace.records.push(TraceRecord {
                    iteration: iterations,
                    upper,
                    lower,
                    gap: upper - lower,
                });
                if trace_stride > 0 {
                    trace.snapshots.push(ProbabilitySnapshot {
                        iteration: iterations,
                        p: states[tier].attachment_probabilities(iterations),
                        q: states[tier].dual_probabilities(iterations),
                    });
                }
            }
        }
        if last {
            termination = if converged {
                Termination::Converged
            } else {
                Termination::IterationLimit
            };
            break;
        }
    }

    let mut p = Vec::with_capacity(tier_count);
    let mut q = Vec::with_capacity(tier_count);
    let mut values = Vec::with_capacity(tier_count);
    for state in &states {
        let probs = state.attachment_probabilities(iterations);
        let value = probs
            .iter()
            .zip(state.unfit())
            .map(|(&prob, &unfit)| prob * unfit)
            .fold(f64::NEG_INFINITY, f64::max);
        p.push(AttachmentDistribution::new(probs)?);
        q.push(DualDistribution::new(state.dual_probabilities(iterations))?);
        values.push(value);
    }
    let solution = TieredSolution {
        p,
        q,
        lambdas: values.clone(),
        values,
    };

    Ok(TieredMsaRun {
        solution,
        traces,
        paths,
        termination,
        iterations,
        relative_gaps,
    })
}

/// Per-tier optimality reports.
#[derive(Clone, Debug, PartialEq)]
pub struct TieredKktReport {
    pub tiers: Vec<KktReport>,
}

impl TieredKktReport {
    pub fn all_passed(&self) -> bool {
        self.tiers.iter().all(KktReport::all_passed)
    }
}

/// Runs the homogeneous optimality checks independently on each tier.
pub fn verify_kkt(
    pop: &TieredPopulation,
    candidate: &TieredSolution,
    tolerance: f64,
) -> Result<TieredKktReport, Error> {
    let tier_count = pop.tier_count();
    if candidate.p.len() != tier_count
        || candidate.q.len() != tier_count
        || candidate.values.len() != tier_count
        || candidate.lambdas.len() != tier_count
    {
        return Err(Error::InvalidInput(format!(
            "candidate does not cover all {tier_count} tiers"
        )));
    }
    let mut tiers = Vec::with_capacity(tier_count);
    for (index, tier) in pop.tiers().iter().enumerate() {
        let tier_candidate = MinmaxSolution {
            p: candidate.p[index].clone(),
            q: candidate.q[index].clone(),
            value: candidate.values[index],
            lambda: candidate.lambdas[index],
        };
        tiers.push(homogeneous::verify_kkt(tier, &tier_candidate, tolerance)?);
    }
    Ok(TieredKktReport { tiers })
}
