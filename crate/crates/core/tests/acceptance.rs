//! Acceptance gate: the ten behavioral criteria the tool must meet, each
//! pinned as its own test at its stated tolerance. Every test prints one
//! `criterion N: PASS` line when it holds.
//!
//! The bundled `representative` dataset has synthetic hydrology sized so
//! demand outstrips supply in every month at profitable acreages; its key
//! optima below were frozen against an independent solver when the dataset
//! was designed. The `toy-linear` dataset has a closed-form trade-off
//! curve (net benefit 4 999 000 - 49 990 E, deficit 60 - E, E in [0, 60])
//! used for exactness checks.

use aquaplan::eval::{self, AllocationPlan, ObjectivePair};
use aquaplan::formats::{
    builtin_scenario, export_front, read_manifest, verify_front_file,
};
use aquaplan::front::{
    benefit_endpoint, hypervolume, run_front_with, shortfall_endpoint, FrontConfig,
};
use aquaplan::ga::{run_ga, GaConfig};
use aquaplan::lp::oracle::brute_force_vertex;
use aquaplan::lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense, SimplexOptions};
use aquaplan::models::{build_model1, extract_plan};
use aquaplan::scenario::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::time::Instant;

fn representative() -> Scenario {
    builtin_scenario("representative").expect("bundled dataset")
}

fn toy() -> Scenario {
    builtin_scenario("toy-linear").expect("bundled dataset")
}

const TOY_NB_MAX: f64 = 4_999_000.0;
const TOY_NB_MIN: f64 = 1_999_600.0;
const TOY_EFD_MAX: f64 = 60.0;
/// Area dominated by the toy's continuous curve against reference (0, 60).
const TOY_EXACT_AREA: f64 = TOY_NB_MIN * 60.0 + 49_990.0 * 1800.0;

#[test]
fn criterion_01_zero_release_plan_scores_the_full_deficit_exactly() {
    let s = representative();
    let zero_release = AllocationPlan::new(vec![1_000.0; 10], vec![0.0; 12]);
    let efd = eval::efd(&s, &zero_release).expect("valid plan");
    assert_eq!(efd, 1_200.0, "deficit must equal the target total exactly");

    // The deficit ignores acreage: only releases matter.
    let other_areas = AllocationPlan::new(vec![2_307.6; 10], vec![0.0; 12]);
    assert_eq!(eval::efd(&s, &other_areas).expect("valid plan"), 1_200.0);

    println!("criterion 1: PASS — zero releases score a deficit of exactly 1200");
}

#[test]
fn criterion_02_pinned_targets_cost_benefit_but_clear_the_deficit() {
    let s = representative();
    let model = build_model1(&s, true);
    let sol = solve_lp(&model.lp).expect("solver runs");
    assert_eq!(sol.status, LpStatus::Optimal);
    let plan = extract_plan(&s, &model, &sol);

    for (m, &flow) in plan.env_flow_per_month.iter().enumerate() {
        assert_eq!(flow, 100.0, "month {} release must sit exactly on target", m + 1);
    }
    let pair = eval::objectives(&s, &plan).expect("valid plan");
    assert!(pair.efd.abs() <= 1e-9, "deficit {} above 1e-9", pair.efd);

    let opts = SimplexOptions::default();
    let ideal = benefit_endpoint(&s, &opts).expect("ideal solves");
    assert!(
        pair.net_benefit < ideal.anchor,
        "meeting targets must cost benefit: {} vs ideal {}",
        pair.net_benefit,
        ideal.anchor
    );

    // Values frozen against an independent solver at design time.
    let nb_expected = 442_424_788.244_950_95;
    assert!(
        (pair.net_benefit - nb_expected).abs() <= 1e-9 * nb_expected,
        "pinned-target benefit {} drifted from {}",
        pair.net_benefit,
        nb_expected
    );
    let ideal_expected = 1_493_851_208.04;
    assert!(
        (ideal.anchor - ideal_expected).abs() <= 1e-9 * ideal_expected,
        "ideal benefit {} drifted from {}",
        ideal.anchor,
        ideal_expected
    );

    println!(
        "criterion 2: PASS — releases pinned to targets, deficit {:.1e}, benefit {:.6} < ideal {:.6}",
        pair.efd, pair.net_benefit, ideal.anchor
    );
}

#[test]
fn criterion_03_curve_extremes_match_the_standalone_solves() {
    let started = Instant::now();
    let opts = SimplexOptions::default();
    for (name, s) in [("toy-linear", toy()), ("representative", representative())] {
        let front = run_front_with(
            &s,
            &FrontConfig {
                grid_points: 500,
                ..Default::default()
            },
        )
        .expect("front runs");
        let best_benefit = benefit_endpoint(&s, &opts).expect("solves");
        let least_deficit = shortfall_endpoint(&s, &opts).expect("solves");

        let hi = front.points.last().expect("nonempty front").objectives;
        let lo = front.points.first().expect("nonempty front").objectives;
        let close = |a: ObjectivePair, b: ObjectivePair, tag: &str| {
            let nb_scale = b.net_benefit.abs().max(1.0);
            assert!(
                (a.net_benefit - b.net_benefit).abs() <= 1e-6 * nb_scale,
                "{name}/{tag}: benefit {} vs {}",
                a.net_benefit,
                b.net_benefit
            );
            assert!(
                (a.efd - b.efd).abs() <= 1e-6,
                "{name}/{tag}: deficit {} vs {}",
                a.efd,
                b.efd
            );
        };
        close(hi, best_benefit.objectives, "max-benefit end");
        close(lo, least_deficit.objectives, "min-deficit end");

        // The cleaned-up corner plan must not trade away its own goal.
        let nb_scale = best_benefit.anchor.abs().max(1.0);
        assert!(
            (best_benefit.objectives.net_benefit - best_benefit.anchor).abs() <= 1e-6 * nb_scale,
            "{name}: refined benefit {} vs proven optimum {}",
            best_benefit.objectives.net_benefit,
            best_benefit.anchor
        );
        assert!(
            (least_deficit.objectives.efd - least_deficit.anchor).abs() <= 1e-6,
            "{name}: refined deficit {} vs proven floor {}",
            least_deficit.objectives.efd,
            least_deficit.anchor
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "two 500-point sweeps took {elapsed:?}"
    );
    println!(
        "criterion 3: PASS — curve extremes equal standalone optima on both datasets ({:.2?})",
        elapsed
    );
}

#[test]
fn criterion_04_representative_curve_spans_the_whole_deficit_range() {
    let s = representative();
    let front = run_front_with(
        &s,
        &FrontConfig {
            grid_points: 60,
            ..Default::default()
        },
    )
    .expect("front runs");
    let lo = front.points.first().expect("nonempty").objectives.efd;
    let hi = front.points.last().expect("nonempty").objectives.efd;
    assert!(lo.abs() <= 1e-9, "deficit floor {lo} not reached");
    assert!(
        (hi - 1_200.0).abs() <= 1e-6,
        "deficit ceiling {hi} short of 1200"
    );
    println!(
        "criterion 4: PASS — deficit spans {lo:.1e} to {hi:.6} across {} points",
        front.points.len()
    );
}

#[test]
fn criterion_05_solver_agrees_with_brute_force_on_random_programs() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1_000_003);
    for case in 0..100 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=5);
        let sense = if rng.gen_bool(0.5) {
            Sense::Maximize
        } else {
            Sense::Minimize
        };
        let mut lp = LinearProgram::new(
            sense,
            (0..n).map(|_| rng.gen_range(-10..=10) as f64).collect(),
        );
        // Finite boxes keep every program bounded; nonnegative right-hand
        // sides keep the origin feasible.
        for j in 0..n {
            lp.set_bounds(j, 0.0, rng.gen_range(1..=10) as f64);
        }
        for _ in 0..m {
            let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10..=10) as f64).collect();
            if rng.gen_bool(0.8) {
                lp.add_constraint(coeffs, Relation::Le, rng.gen_range(0..=10) as f64);
            } else {
                lp.add_constraint(coeffs, Relation::Ge, -(rng.gen_range(0..=10) as f64));
            }
        }
        let fast = solve_lp(&lp).unwrap_or_else(|e| panic!("case {case}: {e}"));
        let slow = brute_force_vertex(&lp).unwrap_or_else(|e| panic!("case {case}: {e}"));
        assert_eq!(fast.status, LpStatus::Optimal, "case {case}");
        assert_eq!(slow.status, LpStatus::Optimal, "case {case}");
        let scale = slow.objective_value.abs().max(1.0);
        assert!(
            (fast.objective_value - slow.objective_value).abs() <= 1e-8 * scale,
            "case {case}: {} vs {}",
            fast.objective_value,
            slow.objective_value
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 5: PASS — 100 random programs match the vertex oracle within 1e-8 ({:.2?})",
        elapsed
    );
}

#[test]
fn criterion_06_toy_curve_is_within_enumeration_spacing_of_the_truth() {
    let started = Instant::now();
    let s = toy();
    let front = run_front_with(
        &s,
        &FrontConfig {
            grid_points: 15_000,
            ..Default::default()
        },
    )
    .expect("front runs");

    // Normalize both objectives onto [0, 1] over the curve's ranges.
    let norm = |p: (f64, f64)| {
        (
            (p.0 - TOY_NB_MIN) / (TOY_NB_MAX - TOY_NB_MIN),
            p.1 / TOY_EFD_MAX,
        )
    };
    let computed: Vec<(f64, f64)> = front
        .points
        .iter()
        .map(|p| norm((p.objectives.net_benefit, p.objectives.efd)))
        .collect();
    const ENUM: usize = 10_000;
    let enumerated: Vec<(f64, f64)> = (0..ENUM)
        .map(|k| {
            let e = TOY_EFD_MAX * k as f64 / (ENUM - 1) as f64;
            norm((TOY_NB_MAX - 49_990.0 * e, TOY_EFD_MAX - e))
        })
        .collect();

    // Directed distances via a sweep over the second coordinate. Both sets
    // are staircases, so sorting by deficit orders them along the curve.
    fn directed(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
        let mut sorted = to.to_vec();
        sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
        let mut worst = 0.0f64;
        for &(x, y) in from {
            let idx = sorted.partition_point(|q| q.1 < y);
            let lo = idx.saturating_sub(2);
            let hi = (idx + 2).min(sorted.len());
            let best = sorted[lo..hi]
                .iter()
                .map(|&(qx, qy)| ((qx - x).powi(2) + (qy - y).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        worst
    }
    let hausdorff = directed(&computed, &enumerated).max(directed(&enumerated, &computed));
    let spacing = std::f64::consts::SQRT_2 / (ENUM - 1) as f64;
    assert!(
        hausdorff <= spacing,
        "Hausdorff distance {hausdorff:.3e} above enumeration spacing {spacing:.3e}"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 6: PASS — Hausdorff {hausdorff:.3e} <= spacing {spacing:.3e} with {} points ({:.2?})",
        front.points.len(),
        elapsed
    );
}

#[test]
fn criterion_07_every_exported_curve_verifies_from_the_file_alone() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut checked = 0usize;
    let mut large_file_time = 0.0f64;

    // A large exact curve, a coarser one, and an evolutionary one.
    let toy_front = run_front_with(
        &toy(),
        &FrontConfig {
            grid_points: 1_050,
            ..Default::default()
        },
    )
    .expect("front runs");
    assert!(toy_front.points.len() >= 1_000, "{}", toy_front.points.len());
    let rep_front = run_front_with(
        &representative(),
        &FrontConfig {
            grid_points: 100,
            ..Default::default()
        },
    )
    .expect("front runs");
    let ga_front = run_ga(
        &toy(),
        &GaConfig {
            population_size: 40,
            generations: 40,
            seed: 3,
            ..Default::default()
        },
    )
    .expect("search runs");

    for (name, points) in [
        ("toy.csv", &toy_front.points),
        ("rep.csv", &rep_front.points),
        ("ga.csv", &ga_front.points),
    ] {
        let path = dir.path().join(name);
        let summary = export_front(&path, points).expect("export succeeds");
        let verify_started = Instant::now();
        let rows = verify_front_file(&path).expect("exported curve must verify");
        let dt = verify_started.elapsed().as_secs_f64();
        assert_eq!(rows, summary.written);
        if rows >= 1_000 {
            large_file_time = dt;
            assert!(dt < 5.0, "{name}: verification took {dt:.2}s");
        }
        checked += 1;
    }
    assert_eq!(checked, 3);
    println!(
        "criterion 7: PASS — 3 exported curves verified from file alone ({} rows in {:.3}s)",
        toy_front.points.len(),
        large_file_time
    );
}

#[test]
fn criterion_08_dense_sweep_finishes_inside_the_budget() {
    let started = Instant::now();
    let front = run_front_with(
        &representative(),
        &FrontConfig {
            grid_points: 500,
            ..Default::default()
        },
    )
    .expect("front runs");
    let elapsed = started.elapsed();
    assert_eq!(front.stats.subproblems_solved, 1_000);
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "1000 subproblems took {elapsed:?}"
    );
    assert_eq!(front.stats.solver_failures, 0);
    println!(
        "criterion 8: PASS — 1000 subproblems in {:.2?}, {} points on the curve",
        elapsed,
        front.points.len()
    );
}

#[test]
fn criterion_09_evolutionary_baseline_closes_on_the_exact_curve() {
    let s = toy();
    let reference = ObjectivePair {
        net_benefit: 0.0,
        efd: s.total_target_flow(),
    };
    let exact = run_front_with(
        &s,
        &FrontConfig {
            grid_points: 100,
            ..Default::default()
        },
    )
    .expect("front runs");
    let exact_objs: Vec<ObjectivePair> = exact.points.iter().map(|p| p.objectives).collect();
    let exact_hv = hypervolume(&exact_objs, &reference).expect("curve inside box");

    let ga = run_ga(
        &s,
        &GaConfig {
            population_size: 100,
            generations: 200,
            seed: 20_240_817,
            ..Default::default()
        },
    )
    .expect("search runs");
    let ga_objs: Vec<ObjectivePair> = ga.points.iter().map(|p| p.objectives).collect();
    let ga_hv = hypervolume(&ga_objs, &reference).expect("curve inside box");

    assert!(
        ga_hv >= 0.95 * exact_hv,
        "baseline coverage {ga_hv} below 95% of scalarization {exact_hv}"
    );
    assert!(
        ga_hv <= TOY_EXACT_AREA * (1.0 + 1e-3),
        "baseline coverage {ga_hv} impossibly above the true curve {TOY_EXACT_AREA}"
    );

    for p in &ga.points {
        let area: f64 = p.plan.area_per_crop.iter().sum();
        assert!(area <= s.limits().area_total * (1.0 + 1e-6));
        let balance = eval::derive_water_balance(&s, &p.plan).expect("valid plan");
        let pumped: f64 = balance.pumping_per_month.iter().sum();
        assert!(pumped <= s.limits().pump_cap_total + 1e-6);
        for (m, &e) in p.plan.env_flow_per_month.iter().enumerate() {
            assert!(e >= -1e-6 && e <= s.limits().env_flow_upper_per_month + 1e-6);
            assert!(e <= s.months()[m].inflow + 1e-6);
        }
    }
    println!(
        "criterion 9: PASS — baseline covers {:.2}% of the scalarized curve with {} feasible plans",
        100.0 * ga_hv / exact_hv,
        ga.points.len()
    );
}

#[test]
fn criterion_10_reruns_are_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = Command::new(env!("CARGO_BIN_EXE_aquaplan"))
            .args([
                "front",
                "representative",
                "--grid-points",
                "40",
                "--out",
                path.to_str().expect("utf-8 path"),
            ])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::thread::sleep(std::time::Duration::from_millis(5));
    }
    let bytes_a = std::fs::read(&a).expect("curve written");
    let bytes_b = std::fs::read(&b).expect("curve written");
    assert_eq!(bytes_a, bytes_b, "curve files differ between reruns");

    let ma = read_manifest(&a).expect("manifest written");
    let mb = read_manifest(&b).expect("manifest written");
    assert_eq!(
        ma.without_timestamp(),
        mb.without_timestamp(),
        "manifests differ beyond their timestamps"
    );
    println!(
        "criterion 10: PASS — {} identical bytes per rerun, manifests differ only in timestamps",
        bytes_a.len()
    );
}
