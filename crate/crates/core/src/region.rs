//! The outer-bound polytope over the six rates, its cut-set relatives, and
//! exact queries on it.
//!
//! All inequalities have integer coefficients and integer right-hand sides;
//! every query runs in exact rational arithmetic.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::channel::ChannelConfig;
use crate::oracle::lp::{self, Constraint, LinearProgram, LpOutcome, Relation};
use crate::rate::{RateTuple, Rational, Stream, User};

/// Identifies where an inequality comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundLabel {
    /// Triple-sum bounds, numbered 1 to 6.
    Trb(u8),
    /// `R31 + R32 <= n3`
    Cs3a,
    /// `R13 + R23 <= n3`
    Cs3b,
    /// `R12 + R13 <= n2`
    Cs1a,
    /// `R21 + R31 <= n2`
    Cs1b,
    /// `R21 + R23 <= n2`
    Cs2a,
    /// `R32 + R12 <= n2`
    Cs2b,
    /// `Rjk <= min(nj, nk)`
    Single(Stream),
    /// `-Rjk <= 0`
    NonNeg(Stream),
}

impl fmt::Display for BoundLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundLabel::Trb(i) => write!(f, "TRB{i}"),
            BoundLabel::Cs3a => f.write_str("CS3a"),
            BoundLabel::Cs3b => f.write_str("CS3b"),
            BoundLabel::Cs1a => f.write_str("CS1a"),
            BoundLabel::Cs1b => f.write_str("CS1b"),
            BoundLabel::Cs2a => f.write_str("CS2a"),
            BoundLabel::Cs2b => f.write_str("CS2b"),
            BoundLabel::Single(s) => write!(f, "SINGLE({},{})", s.from(), s.to()),
            BoundLabel::NonNeg(s) => write!(f, "NONNEG({},{})", s.from(), s.to()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown inequality label {0:?}")]
pub struct ParseLabelError(pub String);

impl FromStr for BoundLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseLabelError(s.to_string());
        let pair = |inner: &str| -> Option<Stream> {
            let (a, b) = inner.strip_suffix(')')?.split_once(',')?;
            let user = |t: &str| User::from_number(t.trim().parse().ok()?);
            Stream::new(user(a)?, user(b)?)
        };
        Ok(match s {
            "CS3a" => BoundLabel::Cs3a,
            "CS3b" => BoundLabel::Cs3b,
            "CS1a" => BoundLabel::Cs1a,
            "CS1b" => BoundLabel::Cs1b,
            "CS2a" => BoundLabel::Cs2a,
            "CS2b" => BoundLabel::Cs2b,
            _ => {
                if let Some(k) = s.strip_prefix("TRB") {
                    match k.parse::<u8>() {
                        Ok(k @ 1..=6) => BoundLabel::Trb(k),
                        _ => return Err(err()),
                    }
                } else if let Some(rest) = s.strip_prefix("SINGLE(") {
                    BoundLabel::Single(pair(rest).ok_or_else(err)?)
                } else if let Some(rest) = s.strip_prefix("NONNEG(") {
                    BoundLabel::NonNeg(pair(rest).ok_or_else(err)?)
                } else {
                    return Err(err());
                }
            }
        })
    }
}

/// `coefficients . R <= bound`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub coefficients: [i64; 6],
    pub bound: i64,
    pub label: BoundLabel,
}

impl Inequality {
    fn sum_of(streams: &[Stream], bound: u32, label: BoundLabel) -> Self {
        let mut coefficients = [0; 6];
        for s in streams {
            coefficients[s.index()] = 1;
        }
        Inequality {
            coefficients,
            bound: i64::from(bound),
            label,
        }
    }

    fn nonneg(stream: Stream) -> Self {
        let mut coefficients = [0; 6];
        coefficients[stream.index()] = -1;
        Inequality {
            coefficients,
            bound: 0,
            label: BoundLabel::NonNeg(stream),
        }
    }

    pub fn is_nonnegativity(&self) -> bool {
        matches!(self.label, BoundLabel::NonNeg(_))
    }

    pub fn evaluate(&self, r: &RateTuple) -> Rational {
        self.coefficients
            .iter()
            .zip(r.components())
            .filter(|(c, _)| **c != 0)
            .map(|(&c, v)| v * i128::from(c))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn holds(&self, r: &RateTuple) -> bool {
        self.evaluate(r) <= Rational::from_integer(i128::from(self.bound))
    }

    pub fn is_tight(&self, r: &RateTuple) -> bool {
        self.evaluate(r) == Rational::from_integer(i128::from(self.bound))
    }

    pub fn holds_integer(&self, r: &[i64; 6]) -> bool {
        self.coefficients.iter().zip(r).map(|(c, v)| c * v).sum::<i64>() <= self.bound
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, s) in self.coefficients.iter().zip(Stream::ALL) {
            if *c == 0 {
                continue;
            }
            let sign = match (first, *c < 0) {
                (true, false) => "",
                (true, true) => "-",
                (false, false) => " + ",
                (false, true) => " - ",
            };
            let mag = c.abs();
            if mag == 1 {
                write!(f, "{sign}{}", s.rate_name())?;
            } else {
                write!(f, "{sign}{mag}{}", s.rate_name())?;
            }
            first = false;
        }
        write!(f, " <= {}  [{}]", self.bound, self.label)
    }
}

/// A finite list of inequalities over the six rates for one channel.
/// Always contains the six non-negativity constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    config: ChannelConfig,
    inequalities: Vec<Inequality>,
}

fn s(from: u8, to: u8) -> Stream {
    Stream::new(User::from_number(from).unwrap(), User::from_number(to).unwrap()).unwrap()
}

impl Region {
    /// Builds a region, appending any missing non-negativity constraints.
    pub fn new(config: ChannelConfig, mut inequalities: Vec<Inequality>) -> Self {
        for stream in Stream::ALL {
            if !inequalities.iter().any(|i| i.label == BoundLabel::NonNeg(stream)) {
                inequalities.push(Inequality::nonneg(stream));
            }
        }
        Region { config, inequalities }
    }

    /// The outer bound: six triple-sum bounds, the two user-3 cut-set bounds,
    /// and non-negativity.
    pub fn outer_bound(config: ChannelConfig) -> Self {
        let [n1, n2, n3] = config.gains();
        let ineqs = alloc::vec![
            Inequality::sum_of(&[s(1, 2), s(3, 2), s(1, 3)], n2, BoundLabel::Trb(1)),
            Inequality::sum_of(&[s(1, 2), s(3, 2), s(3, 1)], n1, BoundLabel::Trb(2)),
            Inequality::sum_of(&[s(2, 1), s(3, 1), s(3, 2)], n2, BoundLabel::Trb(3)),
            Inequality::sum_of(&[s(2, 1), s(3, 1), s(2, 3)], n2, BoundLabel::Trb(4)),
            Inequality::sum_of(&[s(1, 3), s(2, 3), s(1, 2)], n2, BoundLabel::Trb(5)),
            Inequality::sum_of(&[s(1, 3), s(2, 3), s(2, 1)], n1, BoundLabel::Trb(6)),
            Inequality::sum_of(&[s(3, 1), s(3, 2)], n3, BoundLabel::Cs3a),
            Inequality::sum_of(&[s(1, 3), s(2, 3)], n3, BoundLabel::Cs3b),
        ];
        Region::new(config, ineqs)
    }

    /// Pairwise cut-set bounds (each user's outgoing and incoming pair) and
    /// single-rate bounds, plus non-negativity.
    pub fn cutset_bounds(config: ChannelConfig) -> Self {
        let gain = |u: User| config.gain(u);
        let mut ineqs = Vec::new();
        for (j, out_label, in_label) in [
            (User::One, BoundLabel::Cs1a, BoundLabel::Cs1b),
            (User::Two, BoundLabel::Cs2a, BoundLabel::Cs2b),
            (User::Three, BoundLabel::Cs3a, BoundLabel::Cs3b),
        ] {
            let others: Vec<User> = User::ALL.into_iter().filter(|&u| u != j).collect();
            let (k, l) = (others[0], others[1]);
            let bound = gain(j).min(gain(k).max(gain(l)));
            let outgoing = [Stream::new(j, k).unwrap(), Stream::new(j, l).unwrap()];
            let incoming = [Stream::new(k, j).unwrap(), Stream::new(l, j).unwrap()];
            ineqs.push(Inequality::sum_of(&outgoing, bound, out_label));
            ineqs.push(Inequality::sum_of(&incoming, bound, in_label));
        }
        for stream in Stream::ALL {
            let bound = gain(stream.from()).min(gain(stream.to()));
            ineqs.push(Inequality::sum_of(&[stream], bound, BoundLabel::Single(stream)));
        }
        Region::new(config, ineqs)
    }

    pub fn config(&self) -> ChannelConfig {
        self.config
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    /// Inequalities other than non-negativity.
    pub fn substantive(&self) -> impl Iterator<Item = &Inequality> {
        self.inequalities.iter().filter(|i| !i.is_nonnegativity())
    }

    /// The intersection with `other`; inequalities with equal coefficients
    /// and bound are kept once.
    pub fn intersect(&self, other: &Region) -> Region {
        let mut ineqs = self.inequalities.clone();
        for i in &other.inequalities {
            if !ineqs
                .iter()
                .any(|j| j.coefficients == i.coefficients && j.bound == i.bound)
            {
                ineqs.push(i.clone());
            }
        }
        Region::new(self.config, ineqs)
    }

    /// Drops the inequality carrying `label` (non-negativity is re-added).
    pub fn without(&self, label: BoundLabel) -> Region {
        let ineqs = self.inequalities.iter().filter(|i| i.label != label).cloned().collect();
        Region::new(self.config, ineqs)
    }

    pub fn is_member(&self, r: &RateTuple) -> bool {
        self.inequalities.iter().all(|i| i.holds(r))
    }

    pub fn violated(&self, r: &RateTuple) -> Vec<BoundLabel> {
        self.inequalities
            .iter()
            .filter(|i| !i.holds(r))
            .map(|i| i.label)
            .collect()
    }

    /// Exact maximum of `objective . R` over the region.
    pub fn maximize(&self, objective: &[Rational; 6]) -> LpOutcome {
        // variables are the six rates; non-negativity is carried by the rows
        // themselves, so the simplex's own x >= 0 is harmless
        let lp = LinearProgram {
            num_vars: 6,
            objective: objective.to_vec(),
            constraints: self
                .substantive()
                .map(|i| Constraint {
                    coefficients: i
                        .coefficients
                        .iter()
                        .map(|&c| Rational::from_integer(i128::from(c)))
                        .collect(),
                    relation: Relation::Le,
                    rhs: Rational::from_integer(i128::from(i.bound)),
                })
                .collect(),
        };
        lp::solve(&lp)
    }

    /// Every vertex, by exhaustive basis enumeration: each 6-subset of
    /// inequalities with a unique solution that satisfies all inequalities.
    /// Sorted by point, duplicate-free.
    pub fn vertices(&self) -> Vec<Vertex> {
        let rows = &self.inequalities;
        let mut points = BTreeSet::new();
        for subset in Combinations::new(rows.len(), 6) {
            let mut system = [[Rational::zero(); 7]; 6];
            for (r, &i) in subset.iter().enumerate() {
                for (cell, &coeff) in system[r].iter_mut().zip(&rows[i].coefficients) {
                    *cell = Rational::from_integer(i128::from(coeff));
                }
                system[r][6] = Rational::from_integer(i128::from(rows[i].bound));
            }
            let Some(x) = solve_square(system) else { continue };
            let Ok(point) = RateTuple::new(x) else { continue };
            if self.is_member(&point) {
                points.insert(point);
            }
        }
        points
            .into_iter()
            .map(|point| {
                let tight: Vec<BoundLabel> = rows.iter().filter(|i| i.is_tight(&point)).map(|i| i.label).collect();
                let tight_rows: Vec<[i64; 6]> = rows
                    .iter()
                    .filter(|i| i.is_tight(&point))
                    .map(|i| i.coefficients)
                    .collect();
                assert_eq!(rank(&tight_rows), 6, "vertex {point} lacks a full-rank tight set");
                Vertex { point, tight }
            })
            .collect()
    }

    /// Lazily enumerates every integer point in lexicographic order.
    ///
    /// Fails if some rate has no upper bound from a non-negative-coefficient
    /// inequality.
    pub fn integer_points(&self) -> Result<IntegerPoints, RegionError> {
        IntegerPoints::new(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error("rate {0} is unbounded in this region")]
    Unbounded(Stream),
}

/// A corner point with the labels of every inequality tight at it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub point: RateTuple,
    pub tight: Vec<BoundLabel>,
}

/// Gauss-Jordan on a 6x6 augmented system; `None` if singular.
fn solve_square(mut m: [[Rational; 7]; 6]) -> Option<[Rational; 6]> {
    for col in 0..6 {
        let pivot = (col..6).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        let prow = m[col];
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col];
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
            }
        }
    }
    Some(core::array::from_fn(|i| m[i][6]))
}

/// Rank of integer row vectors over the rationals.
fn rank(rows: &[[i64; 6]]) -> usize {
    let mut m: Vec<[Rational; 6]> = rows
        .iter()
        .map(|r| r.map(|v| Rational::from_integer(i128::from(v))))
        .collect();
    let mut rank = 0;
    for col in 0..6 {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let prow = m[rank];
        for row in m.iter_mut().skip(rank + 1) {
            if !row[col].is_zero() {
                let f = row[col] / prow[col];
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// k-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Lexicographic odometer over the integer points of a bounded region.
///
/// Inequalities with non-negative coefficients prune a prefix as soon as the
/// prefix (with the remaining rates at zero) violates them.
pub struct IntegerPoints {
    pruning: Vec<([i64; 6], i64)>,
    others: Vec<([i64; 6], i64)>,
    upper: [i64; 6],
    current: [i64; 6],
    started: bool,
    done: bool,
}

impl IntegerPoints {
    fn new(region: &Region) -> Result<Self, RegionError> {
        let mut pruning = Vec::new();
        let mut others = Vec::new();
        for i in &region.inequalities {
            if i.coefficients.iter().all(|&c| c >= 0) {
                pruning.push((i.coefficients, i.bound));
            } else {
                others.push((i.coefficients, i.bound));
            }
        }
        let mut upper = [0i64; 6];
        for (k, stream) in Stream::ALL.iter().enumerate() {
            upper[k] = pruning
                .iter()
                .filter(|(c, _)| c[k] > 0)
                .map(|(c, b)| b.div_euclid(c[k]))
                .min()
                .ok_or(RegionError::Unbounded(*stream))?;
        }
        Ok(IntegerPoints {
            pruning,
            others,
            upper,
            current: [0; 6],
            started: false,
            done: false,
        })
    }

    fn prefix_ok(&self) -> bool {
        self.pruning
            .iter()
            .all(|(c, b)| c.iter().zip(&self.current).map(|(a, v)| a * v).sum::<i64>() <= *b)
    }

    fn full_ok(&self) -> bool {
        self.prefix_ok()
            && self
                .others
                .iter()
                .all(|(c, b)| c.iter().zip(&self.current).map(|(a, v)| a * v).sum::<i64>() <= *b)
    }

    /// Moves to the next prefix-feasible point; `false` when exhausted.
    fn advance(&mut self) -> bool {
        let mut pos = 5;
        loop {
            self.current[pos] += 1;
            for v in self.current.iter_mut().skip(pos + 1) {
                *v = 0;
            }
            if self.current[pos] <= self.upper[pos] && self.prefix_ok() {
                return true;
            }
            self.current[pos] = 0;
            if pos == 0 {
                return false;
            }
            pos -= 1;
        }
    }
}

impl Iterator for IntegerPoints {
    type Item = [i64; 6];

    fn next(&mut self) -> Option<[i64; 6]> {
        loop {
            if self.done {
                return None;
            }
            if !self.started {
                self.started = true;
                // pruning rows are monotone, so an infeasible origin empties the region
                if self.upper.iter().any(|&u| u < 0) || !self.prefix_ok() {
                    self.done = true;
                    return None;
                }
            } else if !self.advance() {
                self.done = true;
                return None;
            }
            if self.full_ok() {
                return Some(self.current);
            }
        }
    }
}

/// Verdict for one cut-set or single-rate inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Redundancy {
    /// Implied by the outer bound.
    Redundant,
    /// Some outer-bound point violates it (or, for an inequality that is
    /// itself part of the outer bound, dropping it enlarges the region).
    Essential,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundancyEntry {
    pub inequality: Inequality,
    pub verdict: Redundancy,
    /// Maximum of the inequality's left-hand side over the reference region.
    pub max_value: Rational,
}

/// Classifies every cut-set and single-rate inequality against the outer
/// bound. An inequality that already belongs to the outer bound is judged
/// against the outer bound with that inequality removed.
pub fn redundancy_report(config: ChannelConfig) -> Vec<RedundancyEntry> {
    let outer = Region::outer_bound(config);
    Region::cutset_bounds(config)
        .substantive()
        .map(|candidate| {
            let reference = match outer.substantive().find(|i| i.coefficients == candidate.coefficients) {
                Some(own) => outer.without(own.label),
                None => outer.clone(),
            };
            let objective = candidate.coefficients.map(|c| Rational::from_integer(i128::from(c)));
            let max_value = match reference.maximize(&objective) {
                LpOutcome::Optimal { value, .. } => value,
                // the outer bound always contains the origin and every rate is bounded
                other => panic!("outer bound LP returned {other:?}"),
            };
            let verdict = if max_value > Rational::from_integer(i128::from(candidate.bound)) {
                Redundancy::Essential
            } else {
                Redundancy::Redundant
            };
            debug_assert!(!max_value.is_negative());
            RedundancyEntry {
                inequality: candidate.clone(),
                verdict,
                max_value,
            }
        })
        .collect()
}
