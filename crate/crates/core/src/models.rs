//! Builders that assemble the planning linear programs from a scenario.
//!
//! All programs share one variable layout, in order: crop areas `X` (ha),
//! monthly environmental flows `E` (GL), monthly surface deliveries `U` (GL),
//! monthly pumping `P` (GL), and — in shortfall formulations — monthly
//! environmental shortfalls `D` (GL). They also share the physical rows:
//!
//! ```text
//! balance[m]:  sum_c d[c][m] X_c - U_m - P_m <= 0    deliveries cover demand
//! supply[m]:   U_m + E_m <= inflow_m                 river budget
//! pump cap:    sum_m P_m <= pump_cap_total
//! land cap:    sum_c X_c <= area_total
//! ```
//!
//! On top of that base:
//!
//! * benefit model — maximize net benefit; optionally pin flows with hard
//!   rows `E_m >= target_m`;
//! * shortfall model — minimize total shortfall `sum_m D_m` with elastic
//!   targets `D_m + E_m >= target_m`;
//! * weighted subproblems — scalarize the two goals and chase one while the
//!   weighted other is held no worse, which traces the trade-off curve as
//!   the weight sweeps 0..1;
//! * anchored refinements — optimize one goal subject to the other staying
//!   at an already-proven value, used to clean up endpoint plans.

use crate::eval::AllocationPlan;
use crate::lp::{LinearProgram, LpSolution, Relation, Sense};
use crate::scenario::Scenario;
use std::ops::Range;

/// Where each variable group lives in the program's column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelVariables {
    pub areas: Range<usize>,
    pub env_flows: Range<usize>,
    pub surface: Range<usize>,
    pub pumping: Range<usize>,
    pub shortfalls: Option<Range<usize>>,
}

/// A ready-to-solve program plus the layout needed to read its solution.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub lp: LinearProgram,
    pub vars: ModelVariables,
}

/// One coordinate of the weight sweep: both goals keep a positive weight
/// and the weights sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPair {
    pub w1: f64,
    pub w2: f64,
}

/// Which goal a weighted subproblem chases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubproblemKind {
    /// Minimize the scaled benefit gap while the weighted shortfall is held
    /// no worse than the weighted gap.
    BenefitLed,
    /// Minimize the scaled shortfall while the weighted gap is held no worse
    /// than the weighted shortfall.
    FlowLed,
}

/// Normalization constants that put both goals on comparable scales: the
/// benefit gap is measured against the ideal benefit, the shortfall against
/// the total flow target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveShift {
    /// Best attainable net benefit (from the unconstrained benefit model).
    pub nb_ideal: f64,
    /// Scale for the benefit gap: `max(|nb_ideal|, 1)`.
    pub nb_scale: f64,
    /// Scale for the shortfall: `max(total target, 1)`.
    pub efd_scale: f64,
}

impl ObjectiveShift {
    pub fn new(nb_ideal: f64, total_target: f64) -> Self {
        ObjectiveShift {
            nb_ideal,
            nb_scale: nb_ideal.abs().max(1.0),
            efd_scale: total_target.max(1.0),
        }
    }
}

struct Layout {
    nc: usize,
    nm: usize,
    with_shortfalls: bool,
}

impl Layout {
    fn new(s: &Scenario, with_shortfalls: bool) -> Self {
        Layout {
            nc: s.n_crops(),
            nm: s.n_months(),
            with_shortfalls,
        }
    }

    fn width(&self) -> usize {
        self.nc + self.nm * if self.with_shortfalls { 4 } else { 3 }
    }

    fn area(&self, c: usize) -> usize {
        c
    }
    fn env(&self, m: usize) -> usize {
        self.nc + m
    }
    fn surf(&self, m: usize) -> usize {
        self.nc + self.nm + m
    }
    fn pump(&self, m: usize) -> usize {
        self.nc + 2 * self.nm + m
    }
    fn short(&self, m: usize) -> usize {
        debug_assert!(self.with_shortfalls);
        self.nc + 3 * self.nm + m
    }

    fn variables(&self) -> ModelVariables {
        ModelVariables {
            areas: 0..self.nc,
            env_flows: self.env(0)..self.env(0) + self.nm,
            surface: self.surf(0)..self.surf(0) + self.nm,
            pumping: self.pump(0)..self.pump(0) + self.nm,
            shortfalls: self
                .with_shortfalls
                .then(|| self.nc + 3 * self.nm..self.nc + 4 * self.nm),
        }
    }

    /// Net-benefit coefficients over the full layout: crop margins on areas,
    /// negated water costs on deliveries and pumping.
    fn benefit_coeffs(&self, s: &Scenario) -> Vec<f64> {
        let mut c = vec![0.0; self.width()];
        for (j, crop) in s.crops().iter().enumerate() {
            c[self.area(j)] = crop.gross_revenue_per_ha - crop.variable_cost_per_ha;
        }
        for m in 0..self.nm {
            c[self.surf(m)] = -s.limits().surface_cost_per_gl;
            c[self.pump(m)] = -s.limits().pump_cost_per_gl;
        }
        c
    }
}

/// Create the program shell: named variables, bounds, and the physical rows.
fn base_program(s: &Scenario, layout: &Layout, sense: Sense, objective: Vec<f64>) -> LinearProgram {
    let lim = s.limits();
    let mut lp = LinearProgram::new(sense, objective);

    for (c, crop) in s.crops().iter().enumerate() {
        lp.set_name(layout.area(c), format!("area[{}]", crop.name));
        lp.set_bounds(layout.area(c), lim.area_min_per_crop, lim.area_upper_per_crop);
    }
    for m in 0..layout.nm {
        lp.set_name(layout.env(m), format!("flow[m{:02}]", m + 1));
        lp.set_bounds(layout.env(m), 0.0, lim.env_flow_upper_per_month);
        lp.set_name(layout.surf(m), format!("surface[m{:02}]", m + 1));
        lp.set_name(layout.pump(m), format!("pump[m{:02}]", m + 1));
        if layout.with_shortfalls {
            lp.set_name(layout.short(m), format!("short[m{:02}]", m + 1));
        }
    }

    for m in 0..layout.nm {
        let mut row = vec![0.0; layout.width()];
        for c in 0..layout.nc {
            row[layout.area(c)] = s.crop_water_demand(c, m);
        }
        row[layout.surf(m)] = -1.0;
        row[layout.pump(m)] = -1.0;
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    for m in 0..layout.nm {
        let mut row = vec![0.0; layout.width()];
        row[layout.surf(m)] = 1.0;
        row[layout.env(m)] = 1.0;
        lp.add_constraint(row, Relation::Le, s.months()[m].inflow);
    }
    let mut pump_row = vec![0.0; layout.width()];
    for m in 0..layout.nm {
        pump_row[layout.pump(m)] = 1.0;
    }
    lp.add_constraint(pump_row, Relation::Le, lim.pump_cap_total);
    let mut land_row = vec![0.0; layout.width()];
    for c in 0..layout.nc {
        land_row[layout.area(c)] = 1.0;
    }
    lp.add_constraint(land_row, Relation::Le, lim.area_total);

    lp
}

/// Elastic flow targets: `D_m + E_m >= target_m`.
fn add_shortfall_target_rows(lp: &mut LinearProgram, s: &Scenario, layout: &Layout) {
    for m in 0..layout.nm {
        let mut row = vec![0.0; layout.width()];
        row[layout.short(m)] = 1.0;
        row[layout.env(m)] = 1.0;
        lp.add_constraint(row, Relation::Ge, s.months()[m].target_env_flow);
    }
}

/// The benefit model: maximize net benefit. With `with_target_flow` the
/// monthly flow targets become hard rows `E_m >= target_m` (kept as rows, not
/// bounds, so an unreachable target reads as an infeasible program).
pub fn build_model1(s: &Scenario, with_target_flow: bool) -> BuiltModel {
    let layout = Layout::new(s, false);
    let objective = layout.benefit_coeffs(s);
    let mut lp = base_program(s, &layout, Sense::Maximize, objective);
    if with_target_flow {
        for m in 0..layout.nm {
            let mut row = vec![0.0; layout.width()];
            row[layout.env(m)] = 1.0;
            lp.add_constraint(row, Relation::Ge, s.months()[m].target_env_flow);
        }
    }
    BuiltModel {
        lp,
        vars: layout.variables(),
    }
}

/// The shortfall model: minimize the total flow shortfall `sum_m D_m` with
/// elastic targets. Always feasible; its optimum is the smallest deficiency
/// the system can physically achieve.
pub fn build_model2(s: &Scenario) -> BuiltModel {
    let layout = Layout::new(s, true);
    let mut objective = vec![0.0; layout.width()];
    for m in 0..layout.nm {
        objective[layout.short(m)] = 1.0;
    }
    let mut lp = base_program(s, &layout, Sense::Minimize, objective);
    add_shortfall_target_rows(&mut lp, s, &layout);
    BuiltModel {
        lp,
        vars: layout.variables(),
    }
}

/// A weighted subproblem for weights `(w1, w2)`, `w1 + w2 = 1`. Writing
/// `gap = (nb_ideal - NB) / nb_scale` and `short = sum_m D_m / efd_scale`,
/// the benefit-led form is `min w1*gap subject to w2*short <= w1*gap` and the
/// flow-led form is `min w2*short subject to w1*gap <= w2*short`. Both pin
/// their optimum where the weighted goals balance, so sweeping the weight
/// walks along the trade-off curve.
pub fn build_subproblem(
    s: &Scenario,
    w: WeightPair,
    kind: SubproblemKind,
    shift: &ObjectiveShift,
) -> BuiltModel {
    assert!(
        w.w1 > 0.0 && w.w2 > 0.0 && (w.w1 + w.w2 - 1.0).abs() <= 1e-9,
        "weights must be positive and sum to one, got ({}, {})",
        w.w1,
        w.w2
    );
    let layout = Layout::new(s, true);
    let nb = layout.benefit_coeffs(s);
    let a1 = w.w1 / shift.nb_scale;
    let a2 = w.w2 / shift.efd_scale;

    // Shared row: w1*gap >= w2*short, written over the raw variables as
    //   a1*NB(x) + a2*sum_m D_m <= a1*nb_ideal.
    let mut balance_row = vec![0.0; layout.width()];
    for (j, c) in nb.iter().enumerate() {
        balance_row[j] = a1 * c;
    }
    for m in 0..layout.nm {
        balance_row[layout.short(m)] += a2;
    }
    let balance_rhs = a1 * shift.nb_ideal;

    let mut objective = vec![0.0; layout.width()];
    let mut constant = 0.0;
    let relation = match kind {
        SubproblemKind::BenefitLed => {
            // min w1*gap = min a1*(nb_ideal - NB)
            for (j, c) in nb.iter().enumerate() {
                objective[j] = -a1 * c;
            }
            constant = a1 * shift.nb_ideal;
            Relation::Le
        }
        SubproblemKind::FlowLed => {
            // min w2*short
            for m in 0..layout.nm {
                objective[layout.short(m)] = a2;
            }
            Relation::Ge
        }
    };

    let mut lp = base_program(s, &layout, Sense::Minimize, objective);
    lp.objective_constant = constant;
    add_shortfall_target_rows(&mut lp, s, &layout);
    lp.add_constraint(balance_row, relation, balance_rhs);
    BuiltModel {
        lp,
        vars: layout.variables(),
    }
}

/// Minimize the total shortfall among plans whose net benefit is at least
/// `nb_floor`. Used to clean up the maximum-benefit endpoint: with the floor
/// set to the proven optimum, the floor row pinches and the solve picks the
/// least-shortfall plan among the benefit-optimal ones.
pub fn build_min_efd_at_benefit(s: &Scenario, nb_floor: f64) -> BuiltModel {
    let layout = Layout::new(s, true);
    let nb = layout.benefit_coeffs(s);
    let mut objective = vec![0.0; layout.width()];
    for m in 0..layout.nm {
        objective[layout.short(m)] = 1.0;
    }
    let mut lp = base_program(s, &layout, Sense::Minimize, objective);
    add_shortfall_target_rows(&mut lp, s, &layout);
    lp.add_constraint(nb, Relation::Ge, nb_floor);
    BuiltModel {
        lp,
        vars: layout.variables(),
    }
}

/// Maximize net benefit among plans whose total shortfall stays within
/// `efd_cap`. Used to clean up the minimum-shortfall endpoint: with the cap
/// set to the proven optimum, the solve picks the most profitable plan among
/// the least-deficient ones.
pub fn build_max_benefit_at_efd(s: &Scenario, efd_cap: f64) -> BuiltModel {
    let layout = Layout::new(s, true);
    let objective = layout.benefit_coeffs(s);
    let mut lp = base_program(s, &layout, Sense::Maximize, objective);
    add_shortfall_target_rows(&mut lp, s, &layout);
    let mut cap_row = vec![0.0; layout.width()];
    for m in 0..layout.nm {
        cap_row[layout.short(m)] = 1.0;
    }
    lp.add_constraint(cap_row, Relation::Le, efd_cap);
    BuiltModel {
        lp,
        vars: layout.variables(),
    }
}

/// Read a plan out of an optimal solution, snapping solver fuzz back onto
/// the feasible box (areas into their bounds, flows into [0, min(upper,
/// inflow)]) so downstream evaluation never trips on 1e-12-scale noise.
pub fn extract_plan(s: &Scenario, model: &BuiltModel, sol: &LpSolution) -> AllocationPlan {
    let lim = s.limits();
    let areas = model.vars.areas.clone().map(|j| {
        sol.values[j]
            .max(lim.area_min_per_crop)
            .min(lim.area_upper_per_crop)
    });
    let flows = model.vars.env_flows.clone().enumerate().map(|(m, j)| {
        sol.values[j]
            .max(0.0)
            .min(lim.env_flow_upper_per_month)
            .min(s.months()[m].inflow)
    });
    AllocationPlan::new(areas.collect(), flows.collect())
}
