//! Scenario data model: crops, months, crop-water coefficients, and system limits.
//!
//! A [`Scenario`] is immutable once built. The only way to obtain one is
//! [`Scenario::validated`], which checks every field and either returns the
//! sealed scenario or a [`ValidationReport`] listing *all* violations found,
//! each tagged with the path of the offending field (e.g. `months[3].inflow`).

use serde::{Deserialize, Serialize};
use std::fmt;

/// One cultivable crop: what a hectare earns and what it costs to grow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropSpec {
    pub name: String,
    /// Gross revenue per hectare (currency/ha).
    pub gross_revenue_per_ha: f64,
    /// Non-water variable cost per hectare (currency/ha).
    pub variable_cost_per_ha: f64,
}

/// One planning month of hydrology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonthSpec {
    /// Reference evapotranspiration (GL/ha).
    pub evapotranspiration: f64,
    /// Effective rainfall (GL/ha).
    pub rainfall: f64,
    /// River inflow available to the system (GL).
    pub inflow: f64,
    /// Environmental flow target for the river (GL).
    pub target_env_flow: f64,
}

/// Crop coefficient matrix, `values[crop][month]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientMatrix {
    pub values: Vec<Vec<f64>>,
}

/// System-wide capacities, bounds, and water prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemLimits {
    /// Total groundwater pumping capacity over the whole horizon (GL).
    pub pump_cap_total: f64,
    /// Total irrigable area (ha).
    pub area_total: f64,
    /// Minimum area each crop must receive (ha).
    pub area_min_per_crop: f64,
    /// Maximum area any single crop may receive (ha).
    pub area_upper_per_crop: f64,
    /// Cost of surface water delivery (currency/GL).
    pub surface_cost_per_gl: f64,
    /// Cost of groundwater pumping (currency/GL).
    pub pump_cost_per_gl: f64,
    /// Upper bound on the environmental flow decision in any month (GL).
    pub env_flow_upper_per_month: f64,
}

/// Unvalidated scenario as parsed from a file or assembled in code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub crops: Vec<CropSpec>,
    pub months: Vec<MonthSpec>,
    pub coefficients: CoefficientMatrix,
    pub limits: SystemLimits,
}

/// A single validation failure, tagged with the path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

/// Every violation found in a [`RawScenario`]; validation never stops at the
/// first problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    /// True if some violation is located at `path`.
    pub fn cites(&self, path: &str) -> bool {
        self.violations.iter().any(|v| v.path == path)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} validation violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Validated, immutable scenario. All consumers take `&Scenario`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    crops: Vec<CropSpec>,
    months: Vec<MonthSpec>,
    coefficients: CoefficientMatrix,
    limits: SystemLimits,
}

fn check_finite(report: &mut ValidationReport, path: String, value: f64) -> bool {
    if value.is_finite() {
        true
    } else {
        report.push(path, format!("must be a finite number, got {value}"));
        false
    }
}

fn check_nonnegative(report: &mut ValidationReport, path: String, value: f64) {
    if check_finite(report, path.clone(), value) && value < 0.0 {
        report.push(path, format!("must be nonnegative, got {value}"));
    }
}

impl Scenario {
    /// Validate a raw scenario. On failure the report lists every violation.
    pub fn validated(raw: RawScenario) -> Result<Scenario, ValidationReport> {
        let mut report = ValidationReport::default();

        if raw.crops.is_empty() {
            report.push("crops", "at least one crop is required");
        }
        if raw.months.is_empty() {
            report.push("months", "at least one month is required");
        }

        for (i, crop) in raw.crops.iter().enumerate() {
            if crop.name.trim().is_empty() {
                report.push(format!("crops[{i}].name"), "crop name must not be empty");
            }
            check_nonnegative(
                &mut report,
                format!("crops[{i}].gross_revenue_per_ha"),
                crop.gross_revenue_per_ha,
            );
            check_nonnegative(
                &mut report,
                format!("crops[{i}].variable_cost_per_ha"),
                crop.variable_cost_per_ha,
            );
        }
        for (i, crop) in raw.crops.iter().enumerate() {
            if raw.crops[..i].iter().any(|c| c.name == crop.name) {
                report.push(
                    format!("crops[{i}].name"),
                    format!("duplicate crop name {:?}", crop.name),
                );
            }
        }

        for (m, month) in raw.months.iter().enumerate() {
            check_nonnegative(
                &mut report,
                format!("months[{m}].evapotranspiration"),
                month.evapotranspiration,
            );
            check_nonnegative(&mut report, format!("months[{m}].rainfall"), month.rainfall);
            check_nonnegative(&mut report, format!("months[{m}].inflow"), month.inflow);
            check_nonnegative(
                &mut report,
                format!("months[{m}].target_env_flow"),
                month.target_env_flow,
            );
        }

        if raw.coefficients.values.len() != raw.crops.len() {
            report.push(
                "coefficients.values",
                format!(
                    "expected one row per crop ({}), got {}",
                    raw.crops.len(),
                    raw.coefficients.values.len()
                ),
            );
        }
        for (c, row) in raw.coefficients.values.iter().enumerate() {
            if row.len() != raw.months.len() {
                report.push(
                    format!("coefficients.values[{c}]"),
                    format!(
                        "expected one entry per month ({}), got {}",
                        raw.months.len(),
                        row.len()
                    ),
                );
            }
            for (m, &k) in row.iter().enumerate() {
                check_nonnegative(&mut report, format!("coefficients.values[{c}][{m}]"), k);
            }
        }

        let lim = &raw.limits;
        check_nonnegative(&mut report, "limits.pump_cap_total".into(), lim.pump_cap_total);
        check_nonnegative(&mut report, "limits.area_total".into(), lim.area_total);
        check_nonnegative(
            &mut report,
            "limits.area_min_per_crop".into(),
            lim.area_min_per_crop,
        );
        check_nonnegative(
            &mut report,
            "limits.area_upper_per_crop".into(),
            lim.area_upper_per_crop,
        );
        check_nonnegative(
            &mut report,
            "limits.surface_cost_per_gl".into(),
            lim.surface_cost_per_gl,
        );
        check_nonnegative(
            &mut report,
            "limits.pump_cost_per_gl".into(),
            lim.pump_cost_per_gl,
        );
        check_nonnegative(
            &mut report,
            "limits.env_flow_upper_per_month".into(),
            lim.env_flow_upper_per_month,
        );
        if lim.area_min_per_crop.is_finite()
            && lim.area_upper_per_crop.is_finite()
            && lim.area_min_per_crop > lim.area_upper_per_crop
        {
            report.push(
                "limits.area_min_per_crop",
                format!(
                    "minimum area {} exceeds per-crop maximum {}",
                    lim.area_min_per_crop, lim.area_upper_per_crop
                ),
            );
        }
        let committed = lim.area_min_per_crop * raw.crops.len() as f64;
        if committed.is_finite() && lim.area_total.is_finite() && committed > lim.area_total {
            report.push(
                "limits.area_min_per_crop",
                format!(
                    "minimum areas commit {committed} ha but only {} ha exist",
                    lim.area_total
                ),
            );
        }
        // Deliveries are accounted surface-first; that is only the cheapest
        // order (hence consistent with optimization) when pumping costs at
        // least as much per GL as surface delivery.
        if lim.pump_cost_per_gl.is_finite()
            && lim.surface_cost_per_gl.is_finite()
            && lim.pump_cost_per_gl < lim.surface_cost_per_gl
        {
            report.push(
                "limits.pump_cost_per_gl",
                format!(
                    "pumping at {} per GL undercuts surface delivery at {} per GL",
                    lim.pump_cost_per_gl, lim.surface_cost_per_gl
                ),
            );
        }

        if report.is_empty() {
            Ok(Scenario {
                crops: raw.crops,
                months: raw.months,
                coefficients: raw.coefficients,
                limits: raw.limits,
            })
        } else {
            Err(report)
        }
    }

    pub fn crops(&self) -> &[CropSpec] {
        &self.crops
    }

    pub fn months(&self) -> &[MonthSpec] {
        &self.months
    }

    pub fn limits(&self) -> &SystemLimits {
        &self.limits
    }

    pub fn n_crops(&self) -> usize {
        self.crops.len()
    }

    pub fn n_months(&self) -> usize {
        self.months.len()
    }

    /// Crop coefficient for `crop` in `month`.
    pub fn coefficient(&self, crop: usize, month: usize) -> f64 {
        self.coefficients.values[crop][month]
    }

    /// Net irrigation water demand per hectare of `crop` in `month` (GL/ha):
    /// crop coefficient times evapotranspiration, less effective rainfall.
    /// Negative values mean rainfall exceeds the crop's need that month.
    ///
    /// Panics if either index is out of range.
    pub fn crop_water_demand(&self, crop: usize, month: usize) -> f64 {
        assert!(crop < self.n_crops(), "crop index {crop} out of range");
        assert!(month < self.n_months(), "month index {month} out of range");
        let m = &self.months[month];
        self.coefficients.values[crop][month] * m.evapotranspiration - m.rainfall
    }

    /// Sum of environmental flow targets over the horizon (GL).
    pub fn total_target_flow(&self) -> f64 {
        self.months.iter().map(|m| m.target_env_flow).sum()
    }

    /// Recover the raw form, e.g. for serialization.
    pub fn to_raw(&self) -> RawScenario {
        RawScenario {
            crops: self.crops.clone(),
            months: self.months.clone(),
            coefficients: self.coefficients.clone(),
            limits: self.limits.clone(),
        }
    }
}
