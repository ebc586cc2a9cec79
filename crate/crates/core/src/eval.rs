//! Plan evaluation: water balance, farm net benefit, and environmental flow
//! deficiency (EFD).
//!
//! Given a scenario and an allocation plan, this module derives the monthly
//! water accounts and the two objectives the planner trades off:
//!
//! * net benefit = revenue − surface-water cost − pumping cost − variable cost
//! * EFD = total shortfall of released environmental flows against targets
//!
//! Pumping is what demand exceeds the surface allocation by, clamped at zero:
//! surplus surface water is never "negative pumping".

use crate::scenario::Scenario;
use thiserror::Error;

/// A candidate decision: hectares per crop and environmental flow per month.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    pub area_per_crop: Vec<f64>,
    pub env_flow_per_month: Vec<f64>,
}

impl AllocationPlan {
    pub fn new(area_per_crop: Vec<f64>, env_flow_per_month: Vec<f64>) -> Self {
        AllocationPlan {
            area_per_crop,
            env_flow_per_month,
        }
    }
}

/// Monthly water accounts for a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterBalance {
    /// Aggregate crop irrigation demand (GL).
    pub demand_per_month: Vec<f64>,
    /// Surface water left for irrigation after environmental flows (GL).
    pub allocation_per_month: Vec<f64>,
    /// Groundwater pumped to cover demand beyond the allocation (GL), >= 0.
    pub pumping_per_month: Vec<f64>,
}

impl WaterBalance {
    /// Surface water actually delivered to crops (GL): demand minus pumping,
    /// never negative. A month where rainfall beats aggregate crop demand
    /// draws nothing — deliveries do not run backwards.
    pub fn surface_used_per_month(&self) -> Vec<f64> {
        self.demand_per_month
            .iter()
            .zip(&self.pumping_per_month)
            .map(|(d, p)| (d - p).max(0.0))
            .collect()
    }
}

/// Both planning objectives for one plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePair {
    /// Farm net benefit (currency); maximized.
    pub net_benefit: f64,
    /// Environmental flow deficiency (GL); minimized.
    pub efd: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{what}: expected {expected} entries, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what}[{index}] must be finite and nonnegative, got {value}")]
    PlanOutOfRange {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("month {month}: environmental flow {env_flow} GL exceeds inflow {inflow} GL")]
    InfeasibleAllocation {
        month: usize,
        env_flow: f64,
        inflow: f64,
    },
}

fn check_plan(s: &Scenario, plan: &AllocationPlan) -> Result<(), EvalError> {
    if plan.area_per_crop.len() != s.n_crops() {
        return Err(EvalError::DimensionMismatch {
            what: "area_per_crop",
            expected: s.n_crops(),
            got: plan.area_per_crop.len(),
        });
    }
    if plan.env_flow_per_month.len() != s.n_months() {
        return Err(EvalError::DimensionMismatch {
            what: "env_flow_per_month",
            expected: s.n_months(),
            got: plan.env_flow_per_month.len(),
        });
    }
    for (i, &x) in plan.area_per_crop.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(EvalError::PlanOutOfRange {
                what: "area_per_crop",
                index: i,
                value: x,
            });
        }
    }
    for (m, &e) in plan.env_flow_per_month.iter().enumerate() {
        if !e.is_finite() || e < 0.0 {
            return Err(EvalError::PlanOutOfRange {
                what: "env_flow_per_month",
                index: m,
                value: e,
            });
        }
    }
    Ok(())
}

/// Derive the monthly water accounts for a plan.
///
/// For each month: demand is the area-weighted sum of per-hectare crop needs,
/// the allocation is inflow minus the released environmental flow, and pumping
/// covers any demand beyond the allocation (never negative). Releasing more
/// than the month's inflow is an error.
pub fn derive_water_balance(s: &Scenario, plan: &AllocationPlan) -> Result<WaterBalance, EvalError> {
    check_plan(s, plan)?;
    let nm = s.n_months();
    let mut demand = vec![0.0; nm];
    let mut allocation = vec![0.0; nm];
    let mut pumping = vec![0.0; nm];
    for m in 0..nm {
        let month = &s.months()[m];
        let e = plan.env_flow_per_month[m];
        if e > month.inflow {
            return Err(EvalError::InfeasibleAllocation {
                month: m,
                env_flow: e,
                inflow: month.inflow,
            });
        }
        demand[m] = (0..s.n_crops())
            .map(|c| s.crop_water_demand(c, m) * plan.area_per_crop[c])
            .sum();
        allocation[m] = month.inflow - e;
        pumping[m] = (demand[m] - allocation[m]).max(0.0);
    }
    Ok(WaterBalance {
        demand_per_month: demand,
        allocation_per_month: allocation,
        pumping_per_month: pumping,
    })
}

/// Farm net benefit of a plan (currency):
/// crop revenue − surface water cost − pumping cost − variable growing cost.
pub fn net_benefit(s: &Scenario, plan: &AllocationPlan) -> Result<f64, EvalError> {
    let balance = derive_water_balance(s, plan)?;
    let lim = s.limits();
    let revenue: f64 = s
        .crops()
        .iter()
        .zip(&plan.area_per_crop)
        .map(|(c, &x)| (c.gross_revenue_per_ha - c.variable_cost_per_ha) * x)
        .sum();
    let surface_cost: f64 = balance
        .surface_used_per_month()
        .iter()
        .sum::<f64>()
        * lim.surface_cost_per_gl;
    let pump_cost: f64 =
        balance.pumping_per_month.iter().sum::<f64>() * lim.pump_cost_per_gl;
    Ok(revenue - surface_cost - pump_cost)
}

/// Environmental flow deficiency (GL): per-month shortfall of released flow
/// against the target, clamped at zero, summed over the horizon.
pub fn efd(s: &Scenario, plan: &AllocationPlan) -> Result<f64, EvalError> {
    check_plan(s, plan)?;
    Ok(s
        .months()
        .iter()
        .zip(&plan.env_flow_per_month)
        .map(|(m, &e)| (m.target_env_flow - e).max(0.0))
        .sum())
}

/// Both objectives at once.
pub fn objectives(s: &Scenario, plan: &AllocationPlan) -> Result<ObjectivePair, EvalError> {
    Ok(ObjectivePair {
        net_benefit: net_benefit(s, plan)?,
        efd: efd(s, plan)?,
    })
}
