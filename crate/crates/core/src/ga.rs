//! Evolutionary baseline for the benefit/shortfall trade-off.
//!
//! A genome is the raw decision vector — crop areas followed by monthly
//! release flows — evolved inside its box bounds with simulated binary
//! crossover and polynomial mutation. Selection is elitist nondominated
//! sorting with crowding distance, and comparisons put feasibility first:
//! a feasible plan always beats an infeasible one, infeasible plans compare
//! by how badly they overrun the shared land and pumping budgets, and only
//! feasible plans compare by dominance.
//!
//! Every feasible plan ever ranked first is folded into an uncapped elite
//! archive with exact dominance pruning. The archive's coverage can only
//! grow, so its hypervolume trace is nondecreasing — a useful convergence
//! diagnostic and the source of the returned front.
//!
//! This searcher shares nothing with the linear-programming route except
//! the evaluator, which is the point: it is an independent check on the
//! scalarization results, not a competitor to them.

use crate::eval::{self, AllocationPlan, ObjectivePair};
use crate::front::{dominates, filter_nondominated, hypervolume, ParetoPoint, PointSource};
use crate::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Plans whose normalized budget overruns stay below this are feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct GaConfig {
    /// Plans per generation; must be an even count of at least four.
    pub population_size: usize,
    pub generations: usize,
    /// Probability that a mating pair recombines at all; in `[0, 1]`.
    pub crossover_rate: f64,
    /// Per-gene mutation probability in `[0, 1]`; `None` uses one expected
    /// flip per genome.
    pub mutation_rate: Option<f64>,
    /// Distribution index for crossover; higher stays closer to the parents.
    pub crossover_index: f64,
    /// Distribution index for mutation; higher makes smaller moves.
    pub mutation_index: f64,
    /// Fraction of a variable's range a single mutation step may span,
    /// in `(0, 1]`; scales the polynomial step.
    pub mutation_scale: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            generations: 200,
            crossover_rate: 0.9,
            mutation_rate: None,
            crossover_index: 15.0,
            mutation_index: 20.0,
            mutation_scale: 1.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaResult {
    /// Nondominated feasible plans, net benefit ascending.
    pub points: Vec<ParetoPoint>,
    pub generations_run: usize,
    /// Plan evaluations performed.
    pub evaluations: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Error)]
pub enum GaError {
    #[error("population_size must be an even count of at least four, got {0}")]
    BadPopulationSize(usize),
    #[error("{name} must lie within the unit interval, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("no feasible plan found in {generations} generations")]
    NoFeasiblePlan { generations: usize },
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}

/// Box bounds for the genome: areas first, then monthly flows capped by both
/// the release ceiling and the month's inflow.
struct GeneBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl GeneBox {
    fn for_scenario(s: &Scenario) -> GeneBox {
        let nc = s.n_crops();
        let nm = s.n_months();
        let mut lo = Vec::with_capacity(nc + nm);
        let mut hi = Vec::with_capacity(nc + nm);
        for _ in 0..nc {
            lo.push(s.limits().area_min_per_crop);
            hi.push(s.limits().area_upper_per_crop);
        }
        for m in 0..nm {
            lo.push(0.0);
            hi.push(s.limits().env_flow_upper_per_month.min(s.months()[m].inflow));
        }
        GeneBox { lo, hi }
    }

    fn len(&self) -> usize {
        self.lo.len()
    }

    fn clip(&self, j: usize, x: f64) -> f64 {
        x.clamp(self.lo[j], self.hi[j])
    }
}

fn decode(s: &Scenario, genes: &[f64]) -> AllocationPlan {
    let nc = s.n_crops();
    AllocationPlan::new(genes[..nc].to_vec(), genes[nc..].to_vec())
}

#[derive(Debug, Clone)]
struct Individual {
    genes: Vec<f64>,
    objectives: ObjectivePair,
    /// Normalized overrun of the shared land and pumping budgets; zero means
    /// feasible.
    violation: f64,
}

impl Individual {
    fn feasible(&self) -> bool {
        self.violation <= FEASIBILITY_TOL
    }
}

fn appraise(s: &Scenario, genes: Vec<f64>) -> Result<Individual, GaError> {
    let plan = decode(s, &genes);
    let objectives = eval::objectives(s, &plan)?;
    let balance = eval::derive_water_balance(s, &plan)?;
    let area_used: f64 = plan.area_per_crop.iter().sum();
    let pumped: f64 = balance.pumping_per_month.iter().sum();
    let area_over = (area_used - s.limits().area_total).max(0.0) / s.limits().area_total;
    let pump_over =
        (pumped - s.limits().pump_cap_total).max(0.0) / s.limits().pump_cap_total.max(1.0);
    Ok(Individual {
        genes,
        objectives,
        violation: area_over + pump_over,
    })
}

/// Feasibility-first comparison between `(objectives, violation)` entries:
/// a feasible entry always beats an infeasible one, infeasible entries
/// compare by violation, feasible entries compare by exact dominance.
fn beats(a: &(ObjectivePair, f64), b: &(ObjectivePair, f64)) -> bool {
    match (a.1 <= FEASIBILITY_TOL, b.1 <= FEASIBILITY_TOL) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.1 < b.1,
        (true, true) => dominates(&a.0, &b.0),
    }
}

fn entries_of(pop: &[Individual]) -> Vec<(ObjectivePair, f64)> {
    pop.iter().map(|p| (p.objectives, p.violation)).collect()
}

/// Layer `(objectives, constraint-violation)` entries by dominance depth
/// under the feasibility-first relation, best layer first, each layer's
/// indices ascending. When every entry is feasible (violation zero), the
/// first layer is exactly the nondominated set.
pub fn nondominated_sort(entries: &[(ObjectivePair, f64)]) -> Vec<Vec<usize>> {
    let n = entries.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if beats(&entries[i], &entries[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if beats(&entries[j], &entries[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    fronts
}

/// Crowding distance within one front; boundary plans get infinity.
fn crowding(pop: &[Individual], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    let mut dist = vec![0.0f64; k];
    if k <= 2 {
        return vec![f64::INFINITY; k];
    }
    for objective in [
        |p: &Individual| p.objectives.net_benefit,
        |p: &Individual| p.objectives.efd,
    ] {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            objective(&pop[front[a]])
                .partial_cmp(&objective(&pop[front[b]]))
                .expect("finite objectives")
        });
        let lo = objective(&pop[front[order[0]]]);
        let hi = objective(&pop[front[order[k - 1]]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[k - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..k - 1 {
                let below = objective(&pop[front[order[w - 1]]]);
                let above = objective(&pop[front[order[w + 1]]]);
                dist[order[w]] += (above - below) / (hi - lo);
            }
        }
    }
    dist
}

/// Simulated binary crossover on one gene pair.
fn sbx_pair(p1: f64, p2: f64, eta: f64, u: f64) -> (f64, f64) {
    let beta = if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    };
    (
        0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
        0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2),
    )
}

/// Polynomial mutation of one gene inside `[lo, hi]`; `scale` caps the step
/// at that fraction of the range.
fn polynomial_step(x: f64, lo: f64, hi: f64, eta: f64, scale: f64, u: f64) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return x;
    }
    let delta = if u < 0.5 {
        let d = (x - lo) / span;
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d).powf(eta + 1.0);
        v.powf(1.0 / (eta + 1.0)) - 1.0
    } else {
        let d = (hi - x) / span;
        let v = 2.0 * (1.0 - u) + (2.0 * u - 1.0) * (1.0 - d).powf(eta + 1.0);
        1.0 - v.powf(1.0 / (eta + 1.0))
    };
    (x + scale * delta * span).clamp(lo, hi)
}

/// Uncapped elite store with exact dominance pruning. Coverage never
/// shrinks: a point is evicted only when a dominating one replaces it.
#[derive(Default)]
struct Archive {
    entries: Vec<(Vec<f64>, ObjectivePair)>,
}

impl Archive {
    fn offer(&mut self, genes: &[f64], objectives: ObjectivePair) {
        for (_, held) in &self.entries {
            if *held == objectives || dominates(held, &objectives) {
                return;
            }
        }
        self.entries
            .retain(|(_, held)| !dominates(&objectives, held));
        self.entries.push((genes.to_vec(), objectives));
    }
}

fn tournament<'a, R: Rng>(
    rng: &mut R,
    pop: &'a [Individual],
    rank: &[usize],
    crowd: &[f64],
) -> &'a Individual {
    let a = rng.gen_range(0..pop.len());
    let b = rng.gen_range(0..pop.len());
    let pick = match rank[a].cmp(&rank[b]) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if crowd[b] > crowd[a] {
                b
            } else {
                a
            }
        }
    };
    &pop[pick]
}

/// Run the evolutionary search with the given configuration.
pub fn run_ga(s: &Scenario, config: &GaConfig) -> Result<GaResult, GaError> {
    run_ga_traced(s, config).map(|(result, _)| result)
}

/// Like [`run_ga`], also returning the elite archive's hypervolume after
/// each generation (first entry: the initial population). The trace uses the
/// reference corner (0, total target flow) and skips archive points outside
/// that box, so it is nondecreasing but not a complete coverage measure when
/// plans with negative benefit appear.
pub fn run_ga_traced(
    s: &Scenario,
    config: &GaConfig,
) -> Result<(GaResult, Vec<f64>), GaError> {
    if config.population_size < 4 || config.population_size % 2 != 0 {
        return Err(GaError::BadPopulationSize(config.population_size));
    }
    for (name, value) in [
        ("crossover_rate", Some(config.crossover_rate)),
        ("mutation_rate", config.mutation_rate),
        ("mutation_scale", Some(config.mutation_scale)),
    ] {
        let Some(value) = value else { continue };
        let zero_allowed = name != "mutation_scale";
        if !(0.0..=1.0).contains(&value) || (value == 0.0 && !zero_allowed) {
            return Err(GaError::InvalidRate { name, value });
        }
    }
    let started = Instant::now();
    let bounds = GeneBox::for_scenario(s);
    let genome_len = bounds.len();
    let mutation_rate = config.mutation_rate.unwrap_or(1.0 / genome_len as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluations = 0usize;

    let appraise_counted = |genes: Vec<f64>, count: &mut usize| -> Result<Individual, GaError> {
        *count += 1;
        appraise(s, genes)
    };

    let mut population: Vec<Individual> = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let genes: Vec<f64> = (0..genome_len)
            .map(|j| {
                if bounds.hi[j] > bounds.lo[j] {
                    rng.gen_range(bounds.lo[j]..=bounds.hi[j])
                } else {
                    bounds.lo[j]
                }
            })
            .collect();
        population.push(appraise_counted(genes, &mut evaluations)?);
    }

    let mut archive = Archive::default();
    let reference = ObjectivePair {
        net_benefit: 0.0,
        efd: s.total_target_flow(),
    };
    let mut trace = Vec::with_capacity(config.generations + 1);

    let mut rank = vec![0usize; population.len()];
    let mut crowd = vec![0.0f64; population.len()];
    let refresh = |pop: &[Individual],
                       rank: &mut Vec<usize>,
                       crowd: &mut Vec<f64>,
                       archive: &mut Archive| {
        let fronts = nondominated_sort(&entries_of(pop));
        rank.resize(pop.len(), 0);
        crowd.resize(pop.len(), 0.0);
        for (r, front) in fronts.iter().enumerate() {
            let dist = crowding(pop, front);
            for (&i, &d) in front.iter().zip(&dist) {
                rank[i] = r;
                crowd[i] = d;
            }
        }
        for p in pop.iter().filter(|p| p.feasible()) {
            archive.offer(&p.genes, p.objectives);
        }
    };
    refresh(&population, &mut rank, &mut crowd, &mut archive);
    trace.push(archive_coverage(&archive, &reference));

    for _ in 0..config.generations {
        let mut offspring: Vec<Individual> = Vec::with_capacity(config.population_size);
        while offspring.len() < config.population_size {
            let mother = tournament(&mut rng, &population, &rank, &crowd).genes.clone();
            let father = tournament(&mut rng, &population, &rank, &crowd).genes.clone();
            let (mut c1, mut c2) = (mother.clone(), father.clone());
            if rng.gen_bool(config.crossover_rate) {
                for j in 0..genome_len {
                    if rng.gen_bool(0.5) && (mother[j] - father[j]).abs() > 1e-14 {
                        let (a, b) =
                            sbx_pair(mother[j], father[j], config.crossover_index, rng.gen());
                        c1[j] = bounds.clip(j, a);
                        c2[j] = bounds.clip(j, b);
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for j in 0..genome_len {
                    if rng.gen_bool(mutation_rate) {
                        child[j] = polynomial_step(
                            child[j],
                            bounds.lo[j],
                            bounds.hi[j],
                            config.mutation_index,
                            config.mutation_scale,
                            rng.gen(),
                        );
                    }
                }
            }
            offspring.push(appraise_counted(c1, &mut evaluations)?);
            if offspring.len() < config.population_size {
                offspring.push(appraise_counted(c2, &mut evaluations)?);
            }
        }

        let mut combined = std::mem::take(&mut population);
        combined.extend(offspring);
        let fronts = nondominated_sort(&entries_of(&combined));
        let mut survivors: Vec<Individual> = Vec::with_capacity(config.population_size);
        for front in fronts {
            let room = config.population_size - survivors.len();
            if room == 0 {
                break;
            }
            if front.len() <= room {
                survivors.extend(front.iter().map(|&i| combined[i].clone()));
            } else {
                let dist = crowding(&combined, &front);
                let mut order: Vec<usize> = (0..front.len()).collect();
                order.sort_by(|&a, &b| {
                    dist[b].partial_cmp(&dist[a]).expect("crowding is ordered")
                });
                survivors.extend(order[..room].iter().map(|&w| combined[front[w]].clone()));
            }
        }
        population = survivors;
        refresh(&population, &mut rank, &mut crowd, &mut archive);
        trace.push(archive_coverage(&archive, &reference));
    }

    if archive.entries.is_empty() {
        return Err(GaError::NoFeasiblePlan {
            generations: config.generations,
        });
    }

    let candidates: Vec<ParetoPoint> = archive
        .entries
        .iter()
        .map(|(genes, objectives)| ParetoPoint {
            plan: decode(s, genes),
            objectives: *objectives,
            weight: None,
            source: PointSource::Evolutionary,
        })
        .collect();
    let mut points = filter_nondominated(&candidates);
    points.sort_by(|a, b| {
        a.objectives
            .net_benefit
            .partial_cmp(&b.objectives.net_benefit)
            .expect("finite objectives")
    });

    Ok((
        GaResult {
            points,
            generations_run: config.generations,
            evaluations,
            wall_time: started.elapsed(),
        },
        trace,
    ))
}

/// Hypervolume of the archive against `reference`, ignoring points that do
/// not dominate the reference. The counted subset only grows, so this is
/// monotone.
fn archive_coverage(archive: &Archive, reference: &ObjectivePair) -> f64 {
    let counted: Vec<ObjectivePair> = archive
        .entries
        .iter()
        .map(|(_, o)| *o)
        .filter(|o| dominates(o, reference))
        .collect();
    hypervolume(&counted, reference).expect("every counted point dominates the reference")
}
