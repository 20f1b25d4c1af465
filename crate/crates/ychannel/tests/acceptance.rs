//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N PASS|FAIL` line to stderr (bypassing output capture) before
//! asserting.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::Value;

use ychannel::scan::scan_configs;
use ychannel_core::oracle::{
    self, achievability_scan, hull_consistency, lp_feasible, vertex_validate, ScanLimits, ScanReport,
};
use ychannel_core::rate::Rational;
use ychannel_core::scheme::{plan_with_extension, SchemeError};
use ychannel_core::simulator::{trial_rng, verify_plan, VerifyMode};
use ychannel_core::{ChannelConfig, RateTuple, Region};

const SEED: u64 = 0x5eed_2013;

fn report(n: u8, name: &str, ok: bool, detail: &str, elapsed: Duration, budget: Duration) {
    let within = elapsed <= budget;
    let verdict = if ok && within { "PASS" } else { "FAIL" };
    let line = format!("[acceptance] criterion {n} {verdict}: {name}; {detail}; {elapsed:.2?} (budget {budget:?})\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok && within, "{}", line.trim_end());
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_1_outer_bound_golden() {
    let start = Instant::now();
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/region_4_3_2.json");
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(golden_path).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ychannel"))
        .args(["region", "4", "3", "2"])
        .output()
        .unwrap();
    let emitted: Value = serde_json::from_slice(&out.stdout).unwrap();
    let count = emitted["inequalities"].as_array().map_or(0, Vec::len);
    let ok = out.status.success() && emitted == golden && count == 8;
    report(
        1,
        "outer bound of (4,3,2) equals golden file",
        ok,
        &format!("{count} inequalities"),
        start.elapsed(),
        secs(1),
    );
}

#[test]
fn criterion_2_redundant_cutset_bounds() {
    let start = Instant::now();
    let configs = ChannelConfig::all_up_to(8, 0);
    let problems: Vec<String> = configs
        .par_iter()
        .filter_map(|&c| {
            let outer = Region::outer_bound(c);
            let augmented = outer.intersect(&Region::cutset_bounds(c));
            let a: Vec<[i64; 6]> = outer.integer_points().unwrap().collect();
            let b: Vec<[i64; 6]> = augmented.integer_points().unwrap().collect();
            if a != b {
                return Some(format!("{c}: integer points {} vs {}", a.len(), b.len()));
            }
            let mut rng = trial_rng(SEED, u64::from(c.n1() * 100 + c.n2() * 10 + c.n3()));
            for k in 0..50 {
                use rand::Rng;
                let obj: [Rational; 6] = std::array::from_fn(|_| Rational::from_integer(rng.random_range(-5..=5)));
                let x = lp_feasible(outer.inequalities(), &obj);
                let y = lp_feasible(augmented.inequalities(), &obj);
                if x.value().is_none() || x.value() != y.value() {
                    return Some(format!("{c}: objective {k} optimum {:?} vs {:?}", x.value(), y.value()));
                }
            }
            None
        })
        .collect();
    report(
        2,
        "cut-set and single-rate bounds add nothing (n1 <= 8)",
        problems.is_empty(),
        &format!(
            "{} configs, 50 objectives each, {} mismatches {:?}",
            configs.len(),
            problems.len(),
            problems.first()
        ),
        start.elapsed(),
        secs(60),
    );
}

/// The criterion-3 scan, shared with criterion 8.
fn integer_scan() -> &'static (Vec<ScanReport>, Duration) {
    static SCAN: OnceLock<(Vec<ScanReport>, Duration)> = OnceLock::new();
    SCAN.get_or_init(|| {
        let start = Instant::now();
        let limits = ScanLimits {
            seed: SEED,
            probes: 0,
            sample_points: None,
        };
        let reports = scan_configs(&ChannelConfig::all_up_to(6, 1), limits);
        (reports, start.elapsed())
    })
}

#[test]
fn criterion_3_integer_achievability() {
    let (reports, elapsed) = integer_scan();
    let points: usize = reports.iter().map(|r| r.integer_points).sum();
    let trials: u64 = reports.iter().map(|r| r.simulated_trials).sum();
    let bad: Vec<&ScanReport> = reports
        .iter()
        .filter(|r| {
            r.points_checked != r.integer_points
                || r.plans_built != r.integer_points
                || r.plan_failure_count != 0
                || r.simulation_failures != 0
        })
        .collect();
    report(
        3,
        "every integer point of every (n1 <= 6, n3 >= 1) config is planned and decoded",
        bad.is_empty() && !reports.is_empty(),
        &format!(
            "{} configs, {points} points, {trials} simulated message sets, failing configs {:?}",
            reports.len(),
            bad.iter()
                .map(|r| (r.config, r.plan_failures.first()))
                .collect::<Vec<_>>()
        ),
        *elapsed,
        secs(600),
    );
}

#[test]
fn criterion_4_planner_soundness() {
    let start = Instant::now();
    let configs = ChannelConfig::all_up_to(6, 1);
    let reports: Vec<ScanReport> = configs
        .par_iter()
        .map(|&c| {
            achievability_scan(
                c,
                ScanLimits {
                    seed: SEED ^ u64::from(c.n1() * 100 + c.n2() * 10 + c.n3()),
                    probes: 1000,
                    sample_points: Some(0),
                },
            )
        })
        .collect();
    let probes: usize = reports.iter().map(|r| r.probes).sum();
    let bad: Vec<_> = reports
        .iter()
        .filter(|r| r.probes != 1000 || r.probes_rejected != r.probes)
        .map(|r| (r.config, r.probes, r.probes_rejected, r.probe_failures.first().copied()))
        .collect();
    report(
        4,
        "1000 probes one unit beyond a tight bound are rejected per config",
        bad.is_empty(),
        &format!("{} configs, {probes} probes, failing {bad:?}", configs.len()),
        start.elapsed(),
        secs(60),
    );
}

#[test]
fn criterion_5_corner_points_and_extension() {
    let start = Instant::now();
    let configs = ChannelConfig::all_up_to(4, 1);
    let outcomes: Vec<(usize, usize, Vec<String>)> = configs
        .par_iter()
        .map(|&c| {
            let region = Region::outer_bound(c);
            let points: Vec<RateTuple> = region.vertices().into_iter().map(|v| v.point).collect();
            let mut problems = Vec::new();
            for check in vertex_validate(&region, &points) {
                if !check.is_vertex() {
                    problems.push(format!("{c}: {} not a vertex (rank {})", check.point, check.tight_rank));
                }
            }
            let fractional: Vec<&RateTuple> = points.iter().filter(|p| !p.is_integral()).collect();
            for p in &fractional {
                match plan_with_extension(p, c) {
                    Ok((ext, plan)) => {
                        let sim = verify_plan(
                            &plan,
                            VerifyMode::Random {
                                seed: SEED,
                                trials: 256,
                            },
                        );
                        if ext.factor as i128 != p.denominator_lcm()
                            || !matches!(&sim, Ok(r) if r.passed() && r.trials == 256)
                        {
                            problems.push(format!("{c}: {p} failed on extension Q={}", ext.factor));
                        }
                    }
                    Err(e) => problems.push(format!("{c}: {p}: {e}")),
                }
            }
            (points.len(), fractional.len(), problems)
        })
        .collect();
    let vertices: usize = outcomes.iter().map(|o| o.0).sum();
    let fractional: usize = outcomes.iter().map(|o| o.1).sum();
    let mut problems: Vec<String> = outcomes.into_iter().flat_map(|o| o.2).collect();

    // the (2,2,2) symmetric point
    let c = ChannelConfig::new(2, 2, 2).unwrap();
    let region = Region::outer_bound(c);
    let sym = RateTuple::new([Rational::new(2, 3); 6]).unwrap();
    let check = &vertex_validate(&region, std::slice::from_ref(&sym))[0];
    let listed = region.vertices().iter().any(|v| v.point == sym);
    if !listed || !check.is_vertex() {
        problems.push(format!(
            "(2,2,2): (2/3,...,2/3) is feasible={} with tight rank {} and {} the vertex list",
            check.feasible,
            check.tight_rank,
            if listed { "in" } else { "absent from" }
        ));
    }
    match plan_with_extension(&sym, c) {
        Ok((ext, plan)) => {
            let sim = verify_plan(
                &plan,
                VerifyMode::Random {
                    seed: SEED,
                    trials: 256,
                },
            )
            .unwrap();
            if ext.factor != 3 || !sim.passed() {
                problems.push(format!(
                    "(2,2,2): symmetric point extension Q={} simulation {}",
                    ext.factor,
                    sim.passed()
                ));
            }
        }
        Err(e) => problems.push(format!("(2,2,2): symmetric point: {e}")),
    }

    report(
        5,
        "vertices validated, fractional ones achieved through symbol extension, (2/3,...,2/3) on (2,2,2) with Q = 3",
        problems.is_empty(),
        &format!(
            "{} configs, {vertices} vertices, {fractional} fractional, problems {problems:?}",
            configs.len()
        ),
        start.elapsed(),
        secs(300),
    );
}

#[test]
fn criterion_6_hull_consistency() {
    let start = Instant::now();
    let configs = ChannelConfig::all_up_to(6, 0);
    let reports: Vec<_> = configs
        .par_iter()
        .map(|&c| {
            let region = Region::outer_bound(c);
            let vertices: Vec<RateTuple> = region.vertices().into_iter().map(|v| v.point).collect();
            (c, hull_consistency(&region, &vertices, 1000, SEED))
        })
        .collect();
    let samples: usize = reports.iter().map(|r| r.1.samples).sum();
    let members: usize = reports.iter().map(|r| r.1.members).sum();
    let bad: Vec<_> = reports
        .iter()
        .filter(|r| !r.1.disagreements.is_empty())
        .map(|r| (r.0, r.1.disagreements.len()))
        .collect();
    report(
        6,
        "direct membership agrees with convex-hull membership (n1 <= 6)",
        bad.is_empty() && members > 0 && members < samples,
        &format!(
            "{} configs, {samples} samples, {members} members, disagreements {bad:?}",
            configs.len()
        ),
        start.elapsed(),
        secs(300),
    );
}

#[test]
fn criterion_7_asymmetry_witness() {
    let start = Instant::now();
    let c = ChannelConfig::new(4, 3, 2).unwrap();
    let region = Region::outer_bound(c);
    let a = RateTuple::from_integers([3, 0, 0, 0, 0, 0]);
    let b = RateTuple::from_integers([0, 3, 0, 0, 0, 0]);
    let member_a = region.is_member(&a);
    let member_b = region.is_member(&b);
    let brute = oracle::brute_force_integer_points(&region);
    let brute_a = brute.contains(&[3, 0, 0, 0, 0, 0]);
    let brute_b = brute.contains(&[0, 3, 0, 0, 0, 0]);
    let planner_b = matches!(plan_with_extension(&b, c), Err(SchemeError::NotInRegion(_)));
    report(
        7,
        "(3,0,0,0,0,0) is in the (4,3,2) region and (0,3,0,0,0,0) is not",
        member_a && !member_b && brute_a && !brute_b && planner_b,
        &format!(
            "member {member_a}/{member_b}, violated by the second: {:?}",
            region.violated(&b)
        ),
        start.elapsed(),
        secs(1),
    );
}

#[test]
fn criterion_8_rate_per_level_accounting() {
    let (reports, elapsed) = integer_scan();
    let violations: usize = reports.iter().map(|r| r.accounting_violations).sum();
    let mut totals = [(0u64, 0u64, 0u64); 3];
    for r in reports {
        for (t, s) in totals.iter_mut().zip(r.stages) {
            t.0 += s.assignments;
            t.1 += s.bits;
            t.2 += s.levels;
        }
    }
    let [bi, cy, uni] = totals;
    let ok = violations == 0
        && bi.1 == 2 * bi.2
        && 2 * cy.1 == 3 * cy.2
        && uni.1 == uni.2
        && bi.0 > 0
        && cy.0 > 0
        && uni.0 > 0;
    report(
        8,
        "2 bits/level bi-directional, 3 bits per 2 levels cyclic, 1 bit/level uni-directional",
        ok,
        &format!("{violations} violations; (assignments, bits, levels) bi {bi:?} cyclic {cy:?} uni {uni:?}"),
        *elapsed,
        secs(600),
    );
}
