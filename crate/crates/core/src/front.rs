//! Trade-off curve construction by weighted scalarization.
//!
//! The curve between maximum net benefit and minimum environmental shortfall
//! is traced in three moves:
//!
//! 1. anchor the two endpoints — the ideal benefit and the shortfall floor —
//!    each cleaned up by a second, anchored solve so the reported corner plan
//!    is not merely optimal in one goal but undominated (among benefit-optimal
//!    plans, the one wasting the least flow, and vice versa);
//! 2. sweep a uniform weight grid; at every weight solve both scalarized
//!    subproblems (benefit-led and flow-led) and score the resulting plans
//!    with the evaluator — never with the scalarized objective itself;
//! 3. pool every candidate and keep the exactly-nondominated ones.
//!
//! An infeasible subproblem (possible when the shortfall has a physical
//! floor) is recorded and skipped; a solver fault is counted separately.

use crate::eval::{self, AllocationPlan, EvalError, ObjectivePair};
use crate::lp::{solve_lp_with, LpError, LpSolution, LpStatus, SimplexOptions};
use crate::models::{
    build_max_benefit_at_efd, build_min_efd_at_benefit, build_model1, build_model2,
    build_subproblem, extract_plan, BuiltModel, ObjectiveShift, SubproblemKind,
};
pub use crate::models::WeightPair;
use crate::scenario::Scenario;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Two candidate plans from the same weight count as one efficient point when
/// both objectives agree within this absolute tolerance.
pub const PAIR_MATCH_TOL: f64 = 1e-6;

/// Slack ladder for anchored endpoint refinement, as fractions of the anchor
/// scale. The zero rung works in all but pathological cases: the anchor value
/// is a proven optimum, so the anchored row pinches rather than cuts.
const REFINE_LADDER: [f64; 4] = [0.0, 1e-12, 1e-9, 1e-6];

/// The uniform interior grid `w1 = i/(n+1)`, `i = 1..=n`; never 0 or 1, so
/// both goals keep a positive weight at every grid point.
///
/// # Panics
///
/// An empty grid is a caller error: `n` must be at least 1.
pub fn generate_weights(n: usize) -> Vec<WeightPair> {
    assert!(n >= 1, "the weight grid needs at least one point");
    let denom = (n + 1) as f64;
    (1..=n)
        .map(|i| {
            let w1 = i as f64 / denom;
            WeightPair { w1, w2: 1.0 - w1 }
        })
        .collect()
}

/// Where a recorded point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSource {
    /// Anchored single-goal optimum.
    Endpoint,
    /// Weighted subproblem chasing the benefit gap.
    BenefitLed,
    /// Weighted subproblem chasing the shortfall.
    FlowLed,
    /// Evolutionary baseline search.
    Evolutionary,
}

#[derive(Debug, Clone)]
pub struct ParetoPoint {
    pub plan: AllocationPlan,
    pub objectives: ObjectivePair,
    /// Weights of the subproblem that produced the point; `None` for
    /// endpoints and evolutionary points.
    pub weight: Option<WeightPair>,
    pub source: PointSource,
}

/// Exact dominance: at least as good in both goals, strictly better in one.
pub fn dominates(a: &ObjectivePair, b: &ObjectivePair) -> bool {
    a.net_benefit >= b.net_benefit
        && a.efd <= b.efd
        && (a.net_benefit > b.net_benefit || a.efd < b.efd)
}

/// Keep the nondominated points, collapsing exact duplicates onto their
/// first occurrence. Stable: survivors keep their input order.
pub fn filter_nondominated(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut kept: Vec<ParetoPoint> = Vec::new();
    'candidates: for p in points {
        for k in &kept {
            if k.objectives == p.objectives || dominates(&k.objectives, &p.objectives) {
                continue 'candidates;
            }
        }
        kept.retain(|k| !dominates(&p.objectives, &k.objectives));
        kept.push(p.clone());
    }
    kept
}

#[derive(Debug, Clone, Copy)]
pub struct FrontConfig {
    /// Number of interior weights to sweep.
    pub grid_points: usize,
    /// Worker threads for the sweep: 1 solves sequentially on the calling
    /// thread, 0 uses one worker per core, any other value that many workers.
    pub threads: usize,
    /// Feasibility/optimality tolerance handed to the solver.
    pub solver_tol: f64,
}

impl Default for FrontConfig {
    fn default() -> Self {
        FrontConfig {
            grid_points: 100,
            threads: 1,
            solver_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrontStats {
    pub grid_points: usize,
    /// Subproblem solve attempts (two per grid weight).
    pub subproblems_solved: usize,
    /// Subproblems that were genuinely infeasible and skipped.
    pub infeasible_subproblems: usize,
    /// Solver faults (iteration limits, numerical failures) skipped over.
    pub solver_failures: usize,
    /// Candidates dropped by the dominance filter (duplicates included).
    pub discarded_count: usize,
    /// Proven ideal net benefit (anchor of the benefit endpoint).
    pub nb_ideal: f64,
    /// Proven shortfall floor (anchor of the shortfall endpoint).
    pub efd_floor: f64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct FrontResult {
    /// Nondominated points, net benefit ascending.
    pub points: Vec<ParetoPoint>,
    pub stats: FrontStats,
}

#[derive(Debug, Error)]
pub enum FrontError {
    #[error("ideal-benefit model ended {status:?}; no trade-off to trace")]
    IdealNotOptimal { status: LpStatus },
    #[error("shortfall-floor model ended {status:?}; no trade-off to trace")]
    FloorNotOptimal { status: LpStatus },
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One anchored single-goal optimum.
#[derive(Debug, Clone)]
pub struct Endpoint {
    pub plan: AllocationPlan,
    pub objectives: ObjectivePair,
    /// The raw proven optimum the refinement was anchored to.
    pub anchor: f64,
}

/// Anchored refinement: try the ladder of ever-looser anchors; fall back to
/// the raw solution's plan if every rung fails.
fn refine_endpoint(
    s: &Scenario,
    opts: &SimplexOptions,
    raw_model: &BuiltModel,
    raw: &LpSolution,
    build: impl Fn(f64) -> BuiltModel,
    anchor: f64,
) -> Result<Endpoint, FrontError> {
    let scale = anchor.abs().max(1.0);
    for rung in REFINE_LADDER {
        let model = build(rung * scale);
        match solve_lp_with(&model.lp, opts) {
            Ok(sol) if sol.status == LpStatus::Optimal => {
                let plan = extract_plan(s, &model, &sol);
                let objectives = eval::objectives(s, &plan)?;
                return Ok(Endpoint {
                    plan,
                    objectives,
                    anchor,
                });
            }
            Ok(_) | Err(_) => continue,
        }
    }
    let plan = extract_plan(s, raw_model, raw);
    let objectives = eval::objectives(s, &plan)?;
    Ok(Endpoint {
        plan,
        objectives,
        anchor,
    })
}

/// The maximum-benefit corner: prove the ideal benefit, then return the
/// least-shortfall plan among the benefit-optimal ones.
pub fn benefit_endpoint(s: &Scenario, opts: &SimplexOptions) -> Result<Endpoint, FrontError> {
    let model = build_model1(s, false);
    let raw = solve_lp_with(&model.lp, opts)?;
    if raw.status != LpStatus::Optimal {
        return Err(FrontError::IdealNotOptimal { status: raw.status });
    }
    let nb_ideal = raw.objective_value;
    refine_endpoint(
        s,
        opts,
        &model,
        &raw,
        |slack| build_min_efd_at_benefit(s, nb_ideal - slack),
        nb_ideal,
    )
}

/// The minimum-shortfall corner: prove the shortfall floor, then return the
/// most profitable plan among the least-deficient ones.
pub fn shortfall_endpoint(s: &Scenario, opts: &SimplexOptions) -> Result<Endpoint, FrontError> {
    let model = build_model2(s);
    let raw = solve_lp_with(&model.lp, opts)?;
    if raw.status != LpStatus::Optimal {
        return Err(FrontError::FloorNotOptimal { status: raw.status });
    }
    let efd_floor = raw.objective_value;
    refine_endpoint(
        s,
        opts,
        &model,
        &raw,
        |slack| build_max_benefit_at_efd(s, efd_floor + slack),
        efd_floor,
    )
}

/// Outcome of the two solves at one weight.
struct WeightOutcome {
    points: Vec<ParetoPoint>,
    infeasible: usize,
    failures: usize,
}

fn solve_weight(
    s: &Scenario,
    w: WeightPair,
    shift: &ObjectiveShift,
    opts: &SimplexOptions,
) -> WeightOutcome {
    let mut candidates: Vec<ParetoPoint> = Vec::new();
    let mut infeasible = 0;
    let mut failures = 0;
    for (kind, source) in [
        (SubproblemKind::BenefitLed, PointSource::BenefitLed),
        (SubproblemKind::FlowLed, PointSource::FlowLed),
    ] {
        let model = build_subproblem(s, w, kind, shift);
        match solve_lp_with(&model.lp, opts) {
            Ok(sol) if sol.status == LpStatus::Optimal => {
                let plan = extract_plan(s, &model, &sol);
                match eval::objectives(s, &plan) {
                    Ok(objectives) => candidates.push(ParetoPoint {
                        plan,
                        objectives,
                        weight: Some(w),
                        source,
                    }),
                    Err(_) => failures += 1,
                }
            }
            Ok(sol) if sol.status == LpStatus::Infeasible => infeasible += 1,
            Ok(_) => failures += 1, // unbounded: impossible on a boxed region
            Err(_) => failures += 1,
        }
    }

    // The two solves usually land on the same efficient point; keep one copy
    // when they agree, the better one when one dominates, both otherwise.
    let points = match candidates.as_slice() {
        [a, b] => {
            let same = (a.objectives.net_benefit - b.objectives.net_benefit).abs()
                <= PAIR_MATCH_TOL
                && (a.objectives.efd - b.objectives.efd).abs() <= PAIR_MATCH_TOL;
            if same || dominates(&a.objectives, &b.objectives) {
                vec![a.clone()]
            } else if dominates(&b.objectives, &a.objectives) {
                vec![b.clone()]
            } else {
                vec![a.clone(), b.clone()]
            }
        }
        _ => candidates,
    };
    WeightOutcome {
        points,
        infeasible,
        failures,
    }
}

/// Trace the trade-off curve with the default configuration.
pub fn run_front(s: &Scenario) -> Result<FrontResult, FrontError> {
    run_front_with(s, &FrontConfig::default())
}

/// Trace the trade-off curve: anchored endpoints, a weight sweep, and an
/// exact dominance filter. Points come back sorted by net benefit ascending
/// (equivalently shortfall ascending — both are strict on a filtered front).
pub fn run_front_with(s: &Scenario, config: &FrontConfig) -> Result<FrontResult, FrontError> {
    let started = Instant::now();
    let opts = SimplexOptions {
        feasibility_tol: config.solver_tol,
        ..Default::default()
    };

    let best_benefit = benefit_endpoint(s, &opts)?;
    let least_shortfall = shortfall_endpoint(s, &opts)?;
    let shift = ObjectiveShift::new(best_benefit.anchor, s.total_target_flow());

    let weights = generate_weights(config.grid_points);
    let outcomes: Vec<WeightOutcome> = match config.threads {
        1 => weights
            .iter()
            .map(|&w| solve_weight(s, w, &shift, &opts))
            .collect(),
        n => {
            use rayon::prelude::*;
            let run = || {
                weights
                    .par_iter()
                    .map(|&w| solve_weight(s, w, &shift, &opts))
                    .collect()
            };
            if n == 0 {
                run()
            } else {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .expect("worker pool")
                    .install(run)
            }
        }
    };

    let mut candidates: Vec<ParetoPoint> = Vec::with_capacity(2 * weights.len() + 2);
    candidates.push(ParetoPoint {
        plan: best_benefit.plan.clone(),
        objectives: best_benefit.objectives,
        weight: None,
        source: PointSource::Endpoint,
    });
    candidates.push(ParetoPoint {
        plan: least_shortfall.plan.clone(),
        objectives: least_shortfall.objectives,
        weight: None,
        source: PointSource::Endpoint,
    });
    let mut infeasible_subproblems = 0;
    let mut solver_failures = 0;
    for outcome in outcomes {
        infeasible_subproblems += outcome.infeasible;
        solver_failures += outcome.failures;
        candidates.extend(outcome.points);
    }

    let total = candidates.len();
    let mut points = filter_nondominated(&candidates);
    let discarded_count = total - points.len();
    points.sort_by(|a, b| {
        a.objectives
            .net_benefit
            .partial_cmp(&b.objectives.net_benefit)
            .expect("finite objectives")
    });

    Ok(FrontResult {
        points,
        stats: FrontStats {
            grid_points: config.grid_points,
            subproblems_solved: 2 * weights.len(),
            infeasible_subproblems,
            solver_failures,
            discarded_count,
            nb_ideal: best_benefit.anchor,
            efd_floor: least_shortfall.anchor,
            wall_time: started.elapsed(),
        },
    })
}

#[derive(Debug, Error, PartialEq)]
pub enum HypervolumeError {
    #[error("point {index} ({net_benefit}, {efd}) does not dominate the reference point")]
    NotDominating {
        index: usize,
        net_benefit: f64,
        efd: f64,
    },
    #[error("point {index} has a non-finite objective")]
    NonFinite { index: usize },
}

/// Dominated area between a point set and a reference corner `(nb_ref,
/// efd_ref)`: the union of rectangles `[nb_ref, nb] x [efd, efd_ref]`.
/// Every point must dominate the reference; mutually dominated or duplicate
/// points within the set simply add nothing.
pub fn hypervolume(
    points: &[ObjectivePair],
    reference: &ObjectivePair,
) -> Result<f64, HypervolumeError> {
    for (index, p) in points.iter().enumerate() {
        if !p.net_benefit.is_finite() || !p.efd.is_finite() {
            return Err(HypervolumeError::NonFinite { index });
        }
        if !dominates(p, reference) {
            return Err(HypervolumeError::NotDominating {
                index,
                net_benefit: p.net_benefit,
                efd: p.efd,
            });
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[j]
            .net_benefit
            .partial_cmp(&points[i].net_benefit)
            .expect("finite")
            .then(points[i].efd.partial_cmp(&points[j].efd).expect("finite"))
    });
    let mut area = 0.0;
    let mut ceiling = reference.efd;
    for i in order {
        let p = &points[i];
        if p.efd < ceiling {
            area += (p.net_benefit - reference.net_benefit) * (ceiling - p.efd);
            ceiling = p.efd;
        }
    }
    Ok(area)
}
