//! Minimax-unfitness attachment for homogeneous populations.
//!
//! The problem: choose attachment probabilities `p` over the nodes that
//! minimise the largest expected unfitness exposure `max_j p_j * U_j`,
//! subject to `p` lying on the probability simplex. Its closed-form solution
//! is fitness-proportional attachment with optimal value `1 / sum(fitness)`.
//! The same optimum is reachable by successive averages of best responses in
//! the induced two-player zero-sum game, which [`msa_solve`] implements; the
//! dual iterate `q` tracks how often each node is the worst exposed.

use std::fmt;

use crate::error::Error;
use crate::fitness::NodeRecord;

/// Slack allowed when checking that distribution entries sum to one.
pub const DISTRIBUTION_SUM_TOLERANCE: f64 = 1e-9;

fn validate_simplex(values: &[f64]) -> Result<(), Error> {
    if values.is_empty() {
        return Err(Error::InvalidDistribution {
            reason: "distribution has no entries".into(),
        });
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidDistribution {
                reason: format!("entry {index} is {value}, must be finite and non-negative"),
            });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_SUM_TOLERANCE {
        return Err(Error::InvalidDistribution {
            reason: format!("entries sum to {sum}, must be 1"),
        });
    }
    Ok(())
}

/// Attachment probabilities `p_j`, indexed like the node sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct AttachmentDistribution {
    probs: Vec<f64>,
}

impl AttachmentDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, Error> {
        validate_simplex(&probs)?;
        Ok(AttachmentDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Dual incidence probabilities `q_j`: how often node `j` is worst exposed.
#[derive(Clone, Debug, PartialEq)]
pub struct DualDistribution {
    duals: Vec<f64>,
}

impl DualDistribution {
    pub fn new(duals: Vec<f64>) -> Result<Self, Error> {
        validate_simplex(&duals)?;
        Ok(DualDistribution { duals })
    }

    pub fn duals(&self) -> &[f64] {
        &self.duals
    }

    pub fn len(&self) -> usize {
        self.duals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.duals.is_empty()
    }
}

/// A solved minimax instance: primal and dual strategies, the optimal value
/// `V*`, and the normalisation dual `lambda`. At a closed-form optimum
/// `p == q` and `lambda == value`; the sign convention keeps `lambda >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinmaxSolution {
    pub p: AttachmentDistribution,
    pub q: DualDistribution,
    pub value: f64,
    pub lambda: f64,
}

fn fitness_total(nodes: &[NodeRecord]) -> Result<f64, Error> {
    if nodes.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let total: f64 = nodes.iter().map(|n| n.fitness()).sum();
    if !total.is_finite() {
        return Err(Error::InvalidInput(
            "total population fitness is not finite".into(),
        ));
    }
    Ok(total)
}

/// Attachment proportional to fitness: `p_i = fitness_i / sum(fitness)`.
pub fn proportional_attachment(nodes: &[NodeRecord]) -> Result<AttachmentDistribution, Error> {
    let total = fitness_total(nodes)?;
    AttachmentDistribution::new(nodes.iter().map(|n| n.fitness() / total).collect())
}

/// Closed-form minimax solution: fitness-proportional probabilities with
/// value `1 / sum(fitness)`, self-dual (`q == p`, `lambda == value`).
pub fn closed_form_solution(nodes: &[NodeRecord]) -> Result<MinmaxSolution, Error> {
    let total = fitness_total(nodes)?;
    let p = proportional_attachment(nodes)?;
    let q = DualDistribution::new(p.probs().to_vec())?;
    let value = 1.0 / total;
    Ok(MinmaxSolution {
        p,
        q,
        value,
        lambda: value,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (index, &value) in values.iter().enumerate().skip(1) {
        if value < values[best] {
            best = index;
        }
    }
    best
}

/// Fictitious-play state over one node set.
///
/// Successive averaging with 1/m weights makes each averaged probability an
/// exact best-response frequency, so the state keeps integer pick counts and
/// divides by the iteration number on demand. Ties in the best-response
/// scans resolve to the lowest node index.
pub(crate) struct FictitiousPlay {
    unfit: Vec<f64>,
    p_counts: Vec<u64>,
    q_counts: Vec<u64>,
    next_pick: usize,
}

pub(crate) struct StepOutcome {
    /// Node receiving this iteration's attachment best response.
    pub picked: usize,
    /// `max_j p_counts_j * U_j`; divide by the iteration count for the bound.
    pub ub_scaled: f64,
    /// `min_j q_counts_j * U_j`; divide by the iteration count for the bound.
    pub lb_scaled: f64,
}

impl FictitiousPlay {
    pub fn new(unfit: Vec<f64>) -> Self {
        // Under the uniform dual initialisation the first best response is
        // the least unfit node.
        let next_pick = argmin(&unfit);
        FictitiousPlay {
            p_counts: vec![0; unfit.len()],
            q_counts: vec![0; unfit.len()],
            unfit,
            next_pick,
        }
    }

    pub fn unfit(&self) -> &[f64] {
        &self.unfit
    }

    pub fn step(&mut self) -> StepOutcome {
        let picked = self.next_pick;
        self.p_counts[picked] += 1;

        // Most exposed node under the updated attachment history; the same
        // scan yields the scaled upper bound.
        let mut exposed = 0;
        let mut ub_scaled = self.p_counts[0] as f64 * self.unfit[0];
        for j in 1..self.unfit.len() {
            let weighted = self.p_counts[j] as f64 * self.unfit[j];
            if weighted > ub_scaled {
                ub_scaled = weighted;
                exposed = j;
            }
        }
        self.q_counts[exposed] += 1;

        // One scan of the updated dual history serves both the scaled lower
        // bound and the next iteration's best response.
        let mut pick = 0;
        let mut lb_scaled = self.q_counts[0] as f64 * self.unfit[0];
        for j in 1..self.unfit.len() {
            let weighted = self.q_counts[j] as f64 * self.unfit[j];
            if weighted < lb_scaled {
                lb_scaled = weighted;
                pick = j;
            }
        }
        self.next_pick = pick;

        StepOutcome {
            picked,
            ub_scaled,
            lb_scaled,
        }
    }

    pub fn attachment_probabilities(&self, iterations: u64) -> Vec<f64> {
        let m = iterations as f64;
        self.p_counts.iter().map(|&c| c as f64 / m).collect()
    }

    pub fn dual_probabilities(&self, iterations: u64) -> Vec<f64> {
        let m = iterations as f64;
        self.q_counts.iter().map(|&c| c as f64 / m).collect()
    }
}

/// Upper/lower bound pair recorded during a solver run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: u64,
    pub upper: f64,
    pub lower: f64,
    /// `upper - lower`.
    pub gap: f64,
}

/// Primal/dual iterates captured at a recorded iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilitySnapshot {
    pub iteration: u64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// Convergence trace of a solver run.
///
/// With `trace_stride == 0` only the final bounds are kept and no snapshots
/// are taken, so memory stays constant in the iteration count. A positive
/// stride records bounds and snapshots at iteration 1, every stride-th
/// iteration, and the final iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MsaTrace {
    pub records: Vec<TraceRecord>,
    pub snapshots: Vec<ProbabilitySnapshot>,
}

pub(crate) fn should_record(stride: u64, iteration: u64, last: bool) -> bool {
    if last {
        return true;
    }
    match stride {
        0 => false,
        s => iteration == 1 || iteration % s == 0,
    }
}

/// How a successive-averages run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Relative gap reached the requested tolerance.
    Converged,
    /// Iteration budget exhausted; the best iterate is still returned.
    IterationLimit,
}

/// Result of a successive-averages run.
#[derive(Clone, Debug)]
pub struct MsaRun {
    pub solution: MinmaxSolution,
    pub trace: MsaTrace,
    pub termination: Termination,
    pub iterations: u64,
    /// Final `(upper - lower) / upper`.
    pub relative_gap: f64,
}

impl MsaRun {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

pub(crate) fn validate_msa_params(max_iterations: u64, gap_tolerance: f64) -> Result<(), Error> {
    if max_iterations == 0 {
        return Err(Error::InvalidParams("max_iterations must be at least 1".into()));
    }
    if !gap_tolerance.is_finite() || gap_tolerance <= 0.0 {
        return Err(Error::InvalidParams(
            "gap_tolerance must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// Method of successive averages on one node set.
///
/// Each iteration attaches unit mass to the node with the lowest
/// dual-weighted unfitness, averages it into `p` with weight `1/m`, then
/// loads the dual of the node with the highest expected unfitness and
/// averages likewise. Terminates when the relative primal-dual gap reaches
/// `gap_tolerance`, which certifies the value to that accuracy without an
/// external oracle, or when the iteration budget runs out.
pub fn msa_solve(
    nodes: &[NodeRecord],
    max_iterations: u64,
    gap_tolerance: f64,
    trace_stride: u64,
) -> Result<MsaRun, Error> {
    if nodes.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    validate_msa_params(max_iterations, gap_tolerance)?;

    let unfit: Vec<f64> = nodes.iter().map(|n| n.unfitness()).collect();
    let mut state = FictitiousPlay::new(unfit);
    let mut trace = MsaTrace::default();
    let mut iterations = 0;
    let mut relative_gap = f64::INFINITY;
    let termination;

    loop {
        iterations += 1;
        let outcome = state.step();
        let m = iterations as f64;
        let upper = outcome.ub_scaled / m;
        let lower = outcome.lb_scaled / m;
        let gap = upper - lower;
        relative_gap = gap / upper;
        let converged = relative_gap <= gap_tolerance;
        let last = converged || iterations == max_iterations;
        if should_record(trace_stride, iterations, last) {
            trace.records.push(TraceRecord {
                iteration: iterations,
                upper,
                lower,
                gap,
            });
            if trace_stride > 0 {
                trace.snapshots.push(ProbabilitySnapshot {
                    iteration: iterations,
                    p: state.attachment_probabilities(iterations),
                    q: state.dual_probabilities(iterations),
                });
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

    let probs = state.attachment_probabilities(iterations);
    let value = probs
        .iter()
        .zip(state.unfit())
        .map(|(&p, &u)| p * u)
        .fold(f64::NEG_INFINITY, f64::max);
    let solution = MinmaxSolution {
        p: AttachmentDistribution::new(probs)?,
        q: DualDistribution::new(state.dual_probabilities(iterations))?,
        value,
        lambda: value,
    };

    Ok(MsaRun {
        solution,
        trace,
        termination,
        iterations,
        relative_gap,
    })
}

/// The optimality conditions checked by [`verify_kkt`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KktCondition {
    /// `value >= p_j * U_j` for every node.
    Feasibility,
    /// `q_j > tol` implies `p_j * U_j` is within `tol` of `value`.
    ComplementarySlackness,
    /// `p_j == q_j` within tolerance.
    PrimalDualEquality,
    /// `lambda == value` within tolerance.
    LambdaMatchesValue,
    /// Both distributions are non-negative and sum to one.
    SimplexConstraints,
}

impl KktCondition {
    pub const ALL: [KktCondition; 5] = [
        KktCondition::Feasibility,
        KktCondition::ComplementarySlackness,
        KktCondition::PrimalDualEquality,
        KktCondition::LambdaMatchesValue,
        KktCondition::SimplexConstraints,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            KktCondition::Feasibility => "feasibility",
            KktCondition::ComplementarySlackness => "complementary-slackness",
            KktCondition::PrimalDualEquality => "primal-dual-equality",
            KktCondition::LambdaMatchesValue => "lambda-value-equality",
            KktCondition::SimplexConstraints => "simplex-constraints",
        }
    }
}

impl fmt::Display for KktCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    pub condition: KktCondition,
    pub passed: bool,
    /// Largest violation observed; zero when the condition holds exactly.
    pub worst_violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KktReport {
    pub tolerance: f64,
    pub conditions: Vec<ConditionReport>,
}

impl KktReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, which: KktCondition) -> &ConditionReport {
        self.conditions
            .iter()
            .find(|c| c.condition == which)
            .expect("report covers every condition")
    }
}

/// Checks a candidate solution against the optimality conditions of the
/// minimax problem. Failing conditions become report entries, not errors.
pub fn verify_kkt(
    nodes: &[NodeRecord],
    candidate: &MinmaxSolution,
    tolerance: f64,
) -> Result<KktReport, Error> {
    if nodes.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::InvalidParams(
            "tolerance must be positive and finite".into(),
        ));
    }
    if candidate.p.len() != nodes.len() || candidate.q.len() != nodes.len() {
        return Err(Error::InvalidInput(format!(
            "candidate covers {} primal / {} dual entries for {} nodes",
            candidate.p.len(),
            candidate.q.len(),
            nodes.len()
        )));
    }

    let p = candidate.p.probs();
    let q = candidate.q.duals();
    let value = candidate.value;

    let mut feasibility = 0.0f64;
    let mut slackness = 0.0f64;
    let mut primal_dual = 0.0f64;
    for (j, node) in nodes.iter().enumerate() {
        let exposure = p[j] * node.unfitness();
        feasibility = feasibility.max(exposure - value);
        if q[j] > tolerance {
            slackness = slackness.max((exposure - value).abs());
        }
        primal_dual = primal_dual.max((p[j] - q[j]).abs());
    }
    let lambda_gap = (candidate.lambda - value).abs();
    let sum_p: f64 = p.iter().sum();
    let sum_q: f64 = q.iter().sum();
    let neg_p = p.iter().fold(0.0f64, |worst, &x| worst.max(-x));
    let neg_q = q.iter().fold(0.0f64, |worst, &x| worst.max(-x));
    let simplex = (sum_p - 1.0)
        .abs()
        .max((sum_q - 1.0).abs())
        .max(neg_p)
        .max(neg_q);

    let worst = [
        (KktCondition::Feasibility, feasibility.max(0.0)),
        (KktCondition::ComplementarySlackness, slackness),
        (KktCondition::PrimalDualEquality, primal_dual),
        (KktCondition::LambdaMatchesValue, lambda_gap),
        (KktCondition::SimplexConstraints, simplex),
    ];
    Ok(KktReport {
        tolerance,
        conditions: worst
            .into_iter()
            .map(|(condition, worst_violation)| ConditionReport {
                condition,
                passed: worst_violation <= tolerance,
                worst_violation,
            })
            .collect(),
    })
}
