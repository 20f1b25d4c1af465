//! Brute-force cross-checks.
//!
//! Nothing here calls back into the region queries it is meant to check:
//! membership is re-evaluated from raw coefficients, integer points come from
//! a full box scan, ranks use fraction-free elimination, and convex-hull
//! membership is an LP over the vertex list. The planner and simulator are
//! exercised only as the subjects of [`achievability_scan`].

pub mod lp;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::channel::ChannelConfig;
use crate::rate::{IntegerRates, RateTuple, Rational, Stream};
use crate::region::{BoundLabel, Inequality, Region};
use crate::scheme::{self, SchemeError, Stage, StreamKind};
use crate::simulator::{self, trial_rng, VerifyMode};
use lp::{Constraint, LinearProgram, LpOutcome, Relation};

const MAX_EXAMPLES: usize = 8;

fn rat(v: i64) -> Rational {
    Rational::from_integer(i128::from(v))
}

fn satisfies(ineq: &Inequality, r: &[Rational; 6]) -> bool {
    let lhs = ineq
        .coefficients
        .iter()
        .zip(r)
        .fold(Rational::zero(), |acc, (&c, v)| acc + v * i128::from(c));
    lhs <= rat(ineq.bound)
}

fn tight(ineq: &Inequality, r: &[Rational; 6]) -> bool {
    let lhs = ineq
        .coefficients
        .iter()
        .zip(r)
        .fold(Rational::zero(), |acc, (&c, v)| acc + v * i128::from(c));
    lhs == rat(ineq.bound)
}

/// Exact optimum of `objective . R` over `inequalities`, with the rates as
/// sign-unrestricted variables (each split into a positive and negative
/// part).
pub fn lp_feasible(inequalities: &[Inequality], objective: &[Rational; 6]) -> LpOutcome {
    let split = |v: &[Rational]| -> Vec<Rational> { v.iter().copied().chain(v.iter().map(|x| -x)).collect() };
    let lp = LinearProgram {
        num_vars: 12,
        objective: split(objective),
        constraints: inequalities
            .iter()
            .map(|i| Constraint {
                coefficients: split(&i.coefficients.map(rat)),
                relation: Relation::Le,
                rhs: rat(i.bound),
            })
            .collect(),
    };
    match lp::solve(&lp) {
        LpOutcome::Optimal { value, point } => {
            let point = (0..6).map(|k| point[k] - point[k + 6]).collect();
            LpOutcome::Optimal { value, point }
        }
        other => other,
    }
}

/// Rank of integer rows by fraction-free (Bareiss) elimination.
pub fn integer_rank(rows: &[[i64; 6]]) -> usize {
    let mut m: Vec<[i128; 6]> = rows.iter().map(|r| r.map(i128::from)).collect();
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..6 {
        let Some(p) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            for c in col + 1..6 {
                m[r][c] = (m[rank][col] * m[r][c] - m[r][col] * m[rank][c]) / prev;
            }
            m[r][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
    }
    rank
}

/// Every integer point of `region` by scanning the whole box
/// `[0, B]^6`, `B` the largest right-hand side.
pub fn brute_force_integer_points(region: &Region) -> Vec<[i64; 6]> {
    let bound = region.inequalities().iter().map(|i| i.bound).max().unwrap_or(0).max(0);
    let side = (bound + 1) as u64;
    let mut out = Vec::new();
    for code in 0..side.pow(6) {
        let mut p = [0i64; 6];
        let mut c = code;
        for v in p.iter_mut().rev() {
            *v = (c % side) as i64;
            c /= side;
        }
        if region.inequalities().iter().all(|i| i.holds_integer(&p)) {
            out.push(p);
        }
    }
    out
}

/// Whether `target` is a convex combination of `points`, by exact LP.
pub fn hull_contains(points: &[RateTuple], target: &RateTuple) -> bool {
    if points.is_empty() {
        return false;
    }
    let k = points.len();
    let mut constraints: Vec<Constraint> = (0..6)
        .map(|c| Constraint {
            coefficients: points.iter().map(|p| p.components()[c]).collect(),
            relation: Relation::Eq,
            rhs: target.components()[c],
        })
        .collect();
    constraints.push(Constraint {
        coefficients: vec![Rational::one(); k],
        relation: Relation::Eq,
        rhs: Rational::one(),
    });
    let lp = LinearProgram {
        num_vars: k,
        objective: vec![Rational::zero(); k],
        constraints,
    };
    matches!(lp::solve(&lp), LpOutcome::Optimal { .. })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCheck {
    pub point: RateTuple,
    pub feasible: bool,
    pub tight: Vec<BoundLabel>,
    pub tight_rank: usize,
}

impl VertexCheck {
    pub fn is_vertex(&self) -> bool {
        self.feasible && self.tight_rank == 6
    }
}

/// Feasibility and tight-set rank of each candidate corner point.
pub fn vertex_validate(region: &Region, points: &[RateTuple]) -> Vec<VertexCheck> {
    points
        .iter()
        .map(|p| {
            let r = p.components();
            let feasible = region.inequalities().iter().all(|i| satisfies(i, r));
            let tight_rows: Vec<&Inequality> = region.inequalities().iter().filter(|i| tight(i, r)).collect();
            let rows: Vec<[i64; 6]> = tight_rows.iter().map(|i| i.coefficients).collect();
            VertexCheck {
                point: p.clone(),
                feasible,
                tight: tight_rows.iter().map(|i| i.label).collect(),
                tight_rank: integer_rank(&rows),
            }
        })
        .collect()
}

/// A rational point near the polytope: a random convex combination of up
/// to three vertices, scaled by a factor in `[1/2, 4/3]`, or (one time in
/// four) a uniform point of a small box with denominators up to 6.
pub fn sample_rational_point<R: Rng>(vertices: &[RateTuple], box_side: i64, rng: &mut R) -> RateTuple {
    if rng.random_ratio(1, 4) || vertices.is_empty() {
        let den = rng.random_range(1..=6i128);
        let top = i128::from(box_side.max(1)) * den;
        let v = core::array::from_fn(|_| Rational::new(rng.random_range(0..=top), den));
        return RateTuple::new(v).expect("non-negative");
    }
    let picks = rng.random_range(1..=3usize);
    let mut acc = [Rational::zero(); 6];
    let mut total = 0i128;
    for _ in 0..picks {
        let v = vertices.choose(rng).expect("non-empty");
        let w = rng.random_range(1..=6i128);
        total += w;
        for (a, x) in acc.iter_mut().zip(v.components()) {
            *a += x * w;
        }
    }
    let scale = Rational::new(rng.random_range(3..=8i128), 6 * total);
    RateTuple::new(acc.map(|a| a * scale)).expect("non-negative")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullReport {
    pub samples: usize,
    pub members: usize,
    pub disagreements: Vec<RateTuple>,
}

/// Direct membership against convex-hull membership on seeded samples.
pub fn hull_consistency(region: &Region, vertices: &[RateTuple], samples: usize, seed: u64) -> HullReport {
    let side = i64::from(region.config().n1());
    let mut report = HullReport {
        samples,
        members: 0,
        disagreements: Vec::new(),
    };
    for i in 0..samples {
        let p = sample_rational_point(vertices, side, &mut trial_rng(seed, i as u64));
        let direct = region.inequalities().iter().all(|ineq| satisfies(ineq, p.components()));
        let hull = hull_contains(vertices, &p);
        if direct {
            report.members += 1;
        }
        if direct != hull {
            report.disagreements.push(p);
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanLimits {
    pub seed: u64,
    /// Out-of-bound probes per config.
    pub probes: usize,
    /// Check only this many seeded integer points instead of all of them.
    pub sample_points: Option<usize>,
}

impl Default for ScanLimits {
    fn default() -> Self {
        ScanLimits {
            seed: 0,
            probes: 1000,
            sample_points: None,
        }
    }
}

/// Bits and levels used by one stage across a scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageTally {
    pub assignments: u64,
    pub bits: u64,
    pub levels: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanReport {
    pub config: ChannelConfig,
    pub integer_points: usize,
    pub points_checked: usize,
    pub plans_built: usize,
    pub plan_failures: Vec<(IntegerRates, String)>,
    pub plan_failure_count: usize,
    pub simulated_trials: u64,
    pub simulation_failures: usize,
    pub accounting_violations: usize,
    pub probes: usize,
    pub probes_rejected: usize,
    pub probe_failures: Vec<IntegerRates>,
    /// Bi-directional, cyclic, uni-directional.
    pub stages: [StageTally; 3],
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.plan_failure_count == 0
            && self.plans_built == self.points_checked
            && self.simulation_failures == 0
            && self.accounting_violations == 0
            && self.probes_rejected == self.probes
    }
}

/// Bits per level each stage must achieve, as `(bits, levels)` ratios.
pub fn stage_rate(kind: &StreamKind) -> (usize, usize) {
    match kind {
        StreamKind::Bidirectional { .. } => (2, 1),
        StreamKind::Cyclic { .. } => (3, 2),
        StreamKind::Unidirectional { .. } => (1, 1),
    }
}

fn to_rates(p: &[i64; 6]) -> IntegerRates {
    IntegerRates(p.map(|v| v as u64))
}

/// Plans and simulates every integer point of the outer bound of `config`,
/// and checks that points one unit beyond a tight constraint are refused.
pub fn achievability_scan(config: ChannelConfig, limits: ScanLimits) -> ScanReport {
    let region = Region::outer_bound(config);
    let points = brute_force_integer_points(&region);
    let mut rng = trial_rng(limits.seed, u64::MAX);
    let checked: Vec<&[i64; 6]> = match limits.sample_points {
        Some(n) if n < points.len() => points.choose_multiple(&mut rng, n).collect(),
        _ => points.iter().collect(),
    };
    let mut report = ScanReport {
        config,
        integer_points: points.len(),
        points_checked: checked.len(),
        plans_built: 0,
        plan_failures: Vec::new(),
        plan_failure_count: 0,
        simulated_trials: 0,
        simulation_failures: 0,
        accounting_violations: 0,
        probes: 0,
        probes_rejected: 0,
        probe_failures: Vec::new(),
        stages: [StageTally::default(); 3],
    };
    let fail = |report: &mut ScanReport, rates: IntegerRates, why: String| {
        report.plan_failure_count += 1;
        if report.plan_failures.len() < MAX_EXAMPLES {
            report.plan_failures.push((rates, why));
        }
    };

    for (i, p) in checked.iter().enumerate() {
        let rates = to_rates(p);
        let plan = match scheme::build_plan(&rates.to_rates(), config) {
            Ok(plan) => plan,
            Err(e) => {
                fail(&mut report, rates, format!("{e}"));
                continue;
            }
        };
        report.plans_built += 1;
        if let Err(e) = plan.validate() {
            fail(&mut report, rates, format!("{e}"));
            continue;
        }
        for a in &plan.assignments {
            let (bits, levels) = a.accounting();
            let (rb, rl) = stage_rate(&a.kind);
            if bits * rl != levels * rb {
                report.accounting_violations += 1;
            }
            let slot = match a.kind.stage() {
                Stage::Bidirectional => 0,
                Stage::Cyclic => 1,
                Stage::Unidirectional => 2,
            };
            let tally = &mut report.stages[slot];
            tally.assignments += 1;
            tally.bits += bits as u64;
            tally.levels += levels as u64;
        }
        let seed = limits.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        match simulator::verify_plan(&plan, VerifyMode::Auto { seed }) {
            Ok(sim) => {
                report.simulated_trials += sim.trials;
                if !sim.passed() {
                    report.simulation_failures += 1;
                    fail(&mut report, rates, format!("{} decode failures", sim.failures));
                }
            }
            Err(e) => {
                report.simulation_failures += 1;
                fail(&mut report, rates, format!("{e}"));
            }
        }
    }

    // probes: one unit above a tight substantive inequality
    let substantive: Vec<&Inequality> = region.substantive().collect();
    let mut attempts = 0;
    while report.probes < limits.probes && attempts < limits.probes * 50 && !points.is_empty() {
        attempts += 1;
        let p = points.choose(&mut rng).expect("non-empty");
        let at = p.map(rat);
        let tight_rows: Vec<&&Inequality> = substantive.iter().filter(|i| tight(i, &at)).collect();
        let Some(row) = tight_rows.choose(&mut rng) else {
            continue;
        };
        let raisable: Vec<usize> = (0..6).filter(|&k| row.coefficients[k] > 0).collect();
        let Some(&k) = raisable.choose(&mut rng) else { continue };
        let mut probe = *p;
        probe[k] += 1;
        debug_assert!(!row.holds_integer(&probe));
        report.probes += 1;
        let rates = to_rates(&probe);
        match scheme::build_plan(&rates.to_rates(), config) {
            Err(SchemeError::NotInRegion(_)) => report.probes_rejected += 1,
            _ => {
                if report.probe_failures.len() < MAX_EXAMPLES {
                    report.probe_failures.push(rates);
                }
            }
        }
    }
    report
}

/// Reference names for the rate components, in tuple order.
pub fn rate_names() -> [String; 6] {
    Stream::ALL.map(|s| format!("{}", s.rate_name()))
}
