//! Relay level planner.
//!
//! An integer rate tuple inside the outer bound is served in three stages
//! over the relay levels:
//!
//! 1. bi-directional pairs `j <-> k` share a level, 2 bits per level;
//! 2. a directed 3-cycle is served by two XOR groups with one repeated
//!    stream, 3 bits per 2 levels;
//! 3. whatever is left is forwarded one bit per level.
//!
//! Each stage leaves a residual rate tuple and a reduced channel made of the
//! still-free physical levels. The reduced gains `(n1', n2', n3')` are the
//! numbers of free levels accessible to each user; they are recomputed from
//! the free-level list and must agree with the closed forms
//! `n1' = n1 - a - b - c`, `n2' = n2 - a - b - c`,
//! `n3' = min(n3 - b - c, n2')` (and the analogous cyclic-stage forms).
//!
//! Fractional tuples are served through a `Q`-fold symbol extension, which
//! turns DYC(n1, n2, n3) into DYC(Q n1, Q n2, Q n3).

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::channel::{ChannelConfig, ChannelError, LevelIndex};
use crate::rate::{IntegerRates, RateTuple, Stream, User};
use crate::region::Region;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("rate tuple {0} is not in the outer bound")]
    NotInRegion(Box<RateTuple>),
    #[error("rate tuple {0} is not integral; use a symbol extension")]
    NotIntegral(Box<RateTuple>),
    #[error("stage precondition violated: {0}")]
    PreconditionViolated(&'static str),
    #[error("{stage} stage ran out of levels: {detail}")]
    InternalInfeasible { stage: Stage, detail: &'static str },
    #[error("reduced gains {counted:?} disagree with closed form {formula:?} after {stage} stage")]
    ReducedGainMismatch {
        stage: Stage,
        counted: [u32; 3],
        formula: [u32; 3],
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("emitted plan is invalid: {0}")]
    InvalidPlan(#[from] PlanViolation),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Bidirectional,
    Cyclic,
    Unidirectional,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Bidirectional => "bi-directional",
            Stage::Cyclic => "cyclic",
            Stage::Unidirectional => "uni-directional",
        })
    }
}

/// Orientation of a 3-cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleDirection {
    /// 1 -> 2 -> 3 -> 1; user 2 repeats its stream.
    Forward,
    /// 1 -> 3 -> 2 -> 1; user 1 repeats its stream.
    Backward,
}

impl CycleDirection {
    pub fn streams(self) -> [Stream; 3] {
        let st = |a, b| Stream::new(a, b).unwrap();
        match self {
            CycleDirection::Forward => [
                st(User::One, User::Two),
                st(User::Two, User::Three),
                st(User::Three, User::One),
            ],
            CycleDirection::Backward => [
                st(User::One, User::Three),
                st(User::Three, User::Two),
                st(User::Two, User::One),
            ],
        }
    }

    /// The user whose stream appears in both XOR groups.
    pub fn repeater(self) -> User {
        match self {
            CycleDirection::Forward => User::Two,
            CycleDirection::Backward => User::One,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamKind {
    Bidirectional { pair: (User, User) },
    Cyclic { cycle: CycleDirection },
    Unidirectional { stream: Stream },
}

impl StreamKind {
    pub fn stage(&self) -> Stage {
        match self {
            StreamKind::Bidirectional { .. } => Stage::Bidirectional,
            StreamKind::Cyclic { .. } => Stage::Cyclic,
            StreamKind::Unidirectional { .. } => Stage::Unidirectional,
        }
    }
}

/// Bit `bit` of the message on `stream`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRef {
    pub stream: Stream,
    pub bit: usize,
}

/// One relay level as used by the plan: which bits are superposed on the
/// uplink level, the downlink level the relay re-emits it on, and which
/// users decode from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelUse {
    pub uplink: u32,
    pub downlink: u32,
    pub carries: Vec<BitRef>,
    pub readers: Vec<User>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamAssignment {
    pub kind: StreamKind,
    /// Bits per channel use of each participating stream.
    pub width: usize,
    pub levels: Vec<LevelUse>,
}

impl StreamAssignment {
    pub fn uplink_levels(&self) -> Vec<LevelIndex> {
        self.levels.iter().map(|l| LevelIndex::uplink(l.uplink)).collect()
    }

    pub fn downlink_levels(&self) -> Vec<LevelIndex> {
        self.levels.iter().map(|l| LevelIndex::downlink(l.downlink)).collect()
    }

    /// Streams whose bits this assignment carries.
    pub fn streams(&self) -> Vec<Stream> {
        let mut out: Vec<Stream> = self
            .levels
            .iter()
            .flat_map(|l| l.carries.iter().map(|b| b.stream))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `(distinct message bits delivered, relay levels consumed)`.
    pub fn accounting(&self) -> (usize, usize) {
        let mut bits: Vec<BitRef> = self.levels.iter().flat_map(|l| l.carries.iter().copied()).collect();
        bits.sort_unstable();
        bits.dedup();
        (bits.len(), self.levels.len())
    }
}

/// Snapshot between stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageState {
    pub config: ChannelConfig,
    /// Rates still to be delivered.
    pub residual: IntegerRates,
    /// Bits already assigned per stream; the next stage continues from here.
    pub delivered: IntegerRates,
    /// Reduced gains from the closed forms.
    pub reduced: [u32; 3],
    /// Unassigned physical levels, ascending.
    pub free_levels: Vec<u32>,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub e: u64,
}

impl StageState {
    /// Reduced gains counted from the free-level list.
    pub fn counted_gains(&self) -> [u32; 3] {
        self.config
            .gains()
            .map(|n| self.free_levels.iter().filter(|&&l| l <= n).count() as u32)
    }

    /// Physical level of 1-based reduced level `r`.
    fn physical(&self, r: u64) -> u32 {
        self.free_levels[(r - 1) as usize]
    }

    fn check_gains(&self, stage: Stage) -> Result<(), SchemeError> {
        let counted = self.counted_gains();
        if counted == self.reduced {
            Ok(())
        } else {
            Err(SchemeError::ReducedGainMismatch {
                stage,
                counted,
                formula: self.reduced,
            })
        }
    }
}

fn st(from: User, to: User) -> Stream {
    Stream::new(from, to).unwrap()
}

fn check_membership(r: &RateTuple, config: ChannelConfig) -> Result<IntegerRates, SchemeError> {
    if !Region::outer_bound(config).is_member(r) {
        return Err(SchemeError::NotInRegion(Box::new(r.clone())));
    }
    r.to_integers()
        .ok_or_else(|| SchemeError::NotIntegral(Box::new(r.clone())))
}

fn bidir_level(pair: (User, User), level: u32, width_index: u64, offset: &IntegerRates) -> LevelUse {
    let (j, k) = pair;
    let bit = |s: Stream| BitRef {
        stream: s,
        bit: (offset[s] + width_index) as usize,
    };
    LevelUse {
        uplink: level,
        downlink: level,
        carries: vec![bit(st(j, k)), bit(st(k, j))],
        readers: vec![j, k],
    }
}

/// Bi-directional stage: `a = min(R12, R21)` on levels `n2-a+1..=n2`,
/// `b = min(R13, R31)` on `1..=b`, `c = min(R23, R32)` on `b+1..=b+c`.
pub fn bidir_stage(r: &RateTuple, config: ChannelConfig) -> Result<(StageState, Vec<StreamAssignment>), SchemeError> {
    let rates = check_membership(r, config).map_err(|e| match e {
        SchemeError::NotInRegion(_) => SchemeError::PreconditionViolated("rate tuple outside the outer bound"),
        other => other,
    })?;
    let [n1, n2, n3] = config.gains().map(u64::from);
    let (u1, u2, u3) = (User::One, User::Two, User::Three);
    let a = rates[st(u1, u2)].min(rates[st(u2, u1)]);
    let b = rates[st(u1, u3)].min(rates[st(u3, u1)]);
    let c = rates[st(u2, u3)].min(rates[st(u3, u2)]);
    if b + c > n3 || a + b + c > n2 {
        return Err(SchemeError::InternalInfeasible {
            stage: Stage::Bidirectional,
            detail: "a+b+c > n2 or b+c > n3",
        });
    }

    let zero = IntegerRates::default();
    let mut assignments = Vec::new();
    let mut used = Vec::new();
    for (pair, width, first_level) in [((u1, u2), a, n2 + 1 - a), ((u1, u3), b, 1), ((u2, u3), c, b + 1)] {
        if width == 0 {
            continue;
        }
        let levels: Vec<LevelUse> = (0..width)
            .map(|i| bidir_level(pair, (first_level + i) as u32, i, &zero))
            .collect();
        used.extend(levels.iter().map(|l| l.uplink));
        assignments.push(StreamAssignment {
            kind: StreamKind::Bidirectional { pair },
            width: width as usize,
            levels,
        });
    }

    let mut residual = rates;
    let mut delivered = IntegerRates::default();
    for (pair, w) in [((u1, u2), a), ((u1, u3), b), ((u2, u3), c)] {
        for s in [st(pair.0, pair.1), st(pair.1, pair.0)] {
            residual[s] -= w;
            delivered[s] += w;
        }
    }
    let n1p = n1 - a - b - c;
    let n2p = n2 - a - b - c;
    let n3p = (n3 - b - c).min(n2p);
    let state = StageState {
        config,
        residual,
        delivered,
        reduced: [n1p as u32, n2p as u32, n3p as u32],
        free_levels: (1..=config.q()).filter(|l| !used.contains(l)).collect(),
        a,
        b,
        c,
        d: 0,
        e: 0,
    };
    state.check_gains(Stage::Bidirectional)?;
    Ok((state, assignments))
}

/// Cyclic stage over the reduced channel left by [`bidir_stage`].
///
/// For `d = min(R'12, R'23, R'31) > 0`, group A (`x12 ^ x23`) sits on reduced
/// levels `n2'-d+1..=n2'` and group B (`x23 ^ x31`) on `1..=d`. For
/// `e = min(R'13, R'32, R'21) > 0`, group A is `x13 ^ x21` and group B is
/// `x13 ^ x32`, on the same ranges.
pub fn cyclic_stage(state: &StageState) -> Result<(StageState, Vec<StreamAssignment>), SchemeError> {
    let res = &state.residual;
    for s in [Stream::ALL[0], Stream::ALL[1], Stream::ALL[3]] {
        if res[s] > 0 && res[s.reverse()] > 0 {
            return Err(SchemeError::PreconditionViolated(
                "residual still has a bi-directional pair",
            ));
        }
    }
    let min3 = |dir: CycleDirection| dir.streams().iter().map(|&s| res[s]).min().unwrap();
    let d = min3(CycleDirection::Forward);
    let e = min3(CycleDirection::Backward);
    if d > 0 && e > 0 {
        return Err(SchemeError::PreconditionViolated("both cycle orientations present"));
    }
    let mut next = state.clone();
    if d == 0 && e == 0 {
        return Ok((next, Vec::new()));
    }
    let (dir, w) = if d > 0 {
        (CycleDirection::Forward, d)
    } else {
        (CycleDirection::Backward, e)
    };
    let [_, n2p, n3p] = state.reduced.map(u64::from);
    if 2 * w > n2p || w > n3p {
        return Err(SchemeError::InternalInfeasible {
            stage: Stage::Cyclic,
            detail: "2w > n2' or w > n3'",
        });
    }

    let (u1, u2, u3) = (User::One, User::Two, User::Three);
    // (group A carries, group A readers, group B carries, group B readers)
    let (a_streams, a_readers, b_streams, b_readers) = match dir {
        CycleDirection::Forward => ([st(u1, u2), st(u2, u3)], [u1, u2], [st(u2, u3), st(u3, u1)], [u1, u3]),
        CycleDirection::Backward => ([st(u1, u3), st(u2, u1)], [u1, u2], [st(u1, u3), st(u3, u2)], [u2, u3]),
    };
    let bit = |s: Stream, i: u64| BitRef {
        stream: s,
        bit: (state.delivered[s] + i) as usize,
    };
    let mut levels = Vec::with_capacity(2 * w as usize);
    for i in 0..w {
        let phys = state.physical(n2p - w + 1 + i);
        levels.push(LevelUse {
            uplink: phys,
            downlink: phys,
            carries: a_streams.iter().map(|&s| bit(s, i)).collect(),
            readers: a_readers.to_vec(),
        });
    }
    for i in 0..w {
        let phys = state.physical(1 + i);
        levels.push(LevelUse {
            uplink: phys,
            downlink: phys,
            carries: b_streams.iter().map(|&s| bit(s, i)).collect(),
            readers: b_readers.to_vec(),
        });
    }
    let used: Vec<u32> = levels.iter().map(|l| l.uplink).collect();

    for s in dir.streams() {
        next.residual[s] -= w;
        next.delivered[s] += w;
    }
    let [n1p, n2p, n3p] = state.reduced;
    let w32 = w as u32;
    let n2pp = n2p - 2 * w32;
    next.reduced = [n1p - 2 * w32, n2pp, (n3p - w32).min(n2pp)];
    next.free_levels.retain(|l| !used.contains(l));
    next.d = d;
    next.e = e;
    next.check_gains(Stage::Cyclic)?;
    Ok((
        next,
        vec![StreamAssignment {
            kind: StreamKind::Cyclic { cycle: dir },
            width: w as usize,
            levels,
        }],
    ))
}

/// Uni-directional stage: one relay level per remaining bit.
///
/// Uplink: senders 3 and then 2 fill reduced levels from the bottom, user 1
/// fills from `n1''` downwards (`x12` on top, `x13` below). Downlink: streams
/// to user 3 fill from level 1 (`x13` then `x23`), streams to user 2 fill
/// downwards from `n2''` (`x12` on top), streams to user 1 take the highest
/// levels still free.
pub fn uni_stage(state: &StageState) -> Result<Vec<StreamAssignment>, SchemeError> {
    let res = &state.residual;
    for s in [Stream::ALL[0], Stream::ALL[1], Stream::ALL[3]] {
        if res[s] > 0 && res[s.reverse()] > 0 {
            return Err(SchemeError::PreconditionViolated(
                "residual still has a bi-directional pair",
            ));
        }
    }
    for dir in [CycleDirection::Forward, CycleDirection::Backward] {
        if dir.streams().iter().all(|&s| res[s] > 0) {
            return Err(SchemeError::PreconditionViolated(
                "residual still has a directed 3-cycle",
            ));
        }
    }
    let [n1r, n2r, n3r] = state.reduced.map(u64::from);
    let gain = |u: User| match u {
        User::One => n1r,
        User::Two => n2r,
        User::Three => n3r,
    };
    let infeasible = |detail| SchemeError::InternalInfeasible {
        stage: Stage::Unidirectional,
        detail,
    };
    let (u1, u2, u3) = (User::One, User::Two, User::Three);

    // uplink reduced levels per stream
    let mut uplink: BTreeMap<Stream, Vec<u64>> = BTreeMap::new();
    let mut low = 1u64;
    for s in [st(u3, u2), st(u3, u1), st(u2, u3), st(u2, u1)] {
        let w = res[s];
        if w == 0 {
            continue;
        }
        if low + w - 1 > gain(s.from()) {
            return Err(infeasible("uplink levels exhausted for a weak sender"));
        }
        uplink.insert(s, (low..low + w).collect());
        low += w;
    }
    let mut high = n1r;
    for s in [st(u1, u2), st(u1, u3)] {
        let w = res[s];
        if w == 0 {
            continue;
        }
        if high < w || high - w + 1 < low {
            return Err(infeasible("uplink levels exhausted for user 1"));
        }
        uplink.insert(s, (high - w + 1..=high).collect());
        high -= w;
    }

    // downlink reduced levels per stream
    let mut downlink: BTreeMap<Stream, Vec<u64>> = BTreeMap::new();
    let mut low = 1u64;
    for s in [st(u1, u3), st(u2, u3)] {
        let w = res[s];
        if w == 0 {
            continue;
        }
        if low + w - 1 > n3r {
            return Err(infeasible("downlink levels exhausted for user 3"));
        }
        downlink.insert(s, (low..low + w).collect());
        low += w;
    }
    let mut high = n2r;
    for s in [st(u1, u2), st(u3, u2)] {
        let w = res[s];
        if w == 0 {
            continue;
        }
        if high < w || high - w + 1 < low {
            return Err(infeasible("downlink levels exhausted for user 2"));
        }
        downlink.insert(s, (high - w + 1..=high).collect());
        high -= w;
    }
    let taken: Vec<u64> = downlink.values().flatten().copied().collect();
    let mut spare = (1..=n1r).rev().filter(|l| !taken.contains(l));
    for s in [st(u2, u1), st(u3, u1)] {
        let w = res[s];
        if w == 0 {
            continue;
        }
        let mut levels: Vec<u64> = spare.by_ref().take(w as usize).collect();
        if levels.len() as u64 != w {
            return Err(infeasible("downlink levels exhausted for user 1"));
        }
        levels.sort_unstable();
        downlink.insert(s, levels);
    }

    let mut out = Vec::new();
    for s in Stream::ALL {
        let Some(up) = uplink.get(&s) else { continue };
        let down = &downlink[&s];
        let levels = up
            .iter()
            .zip(down)
            .enumerate()
            .map(|(i, (&u, &d))| LevelUse {
                uplink: state.physical(u),
                downlink: state.physical(d),
                carries: vec![BitRef {
                    stream: s,
                    bit: (state.delivered[s] + i as u64) as usize,
                }],
                readers: vec![s.to()],
            })
            .collect();
        out.push(StreamAssignment {
            kind: StreamKind::Unidirectional { stream: s },
            width: up.len(),
            levels,
        });
    }
    Ok(out)
}

/// Stage-level bookkeeping recorded in a plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSummary {
    pub stage: Stage,
    pub bits: usize,
    pub levels: usize,
    /// Reduced gains after this stage.
    pub reduced_after: [u32; 3],
}

/// A complete relay level assignment for one integer rate tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelPlan {
    pub config: ChannelConfig,
    pub rates: IntegerRates,
    pub assignments: Vec<StreamAssignment>,
    /// Uplink level -> downlink level, for every used level.
    pub relay_map: BTreeMap<u32, u32>,
    pub stages: Vec<StageSummary>,
    /// Stage quantities `(a, b, c, d, e)`.
    pub quantities: [u64; 5],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanViolation {
    #[error("level {level} outside 1..={q}")]
    LevelOutOfRange { level: u32, q: u32 },
    #[error("uplink level {0} used twice")]
    UplinkReused(u32),
    #[error("downlink level {0} used twice")]
    DownlinkReused(u32),
    #[error("uplink level {level} superposes {senders} senders")]
    ArityExceeded { level: u32, senders: usize },
    #[error("user {user} cannot reach uplink level {level}")]
    SenderCannotReach { user: User, level: u32 },
    #[error("user {user} cannot read downlink level {level}")]
    ReaderCannotReach { user: User, level: u32 },
    #[error("{kind:?} assignment is not re-emitted on the same level ({uplink} -> {downlink})")]
    NotSameLevel {
        kind: StreamKind,
        uplink: u32,
        downlink: u32,
    },
    #[error("assignment width {width} does not match its {levels} levels")]
    WidthMismatch { width: usize, levels: usize },
    #[error("stream {stream} delivers {delivered} bits, rate is {rate}")]
    RateMismatch { stream: Stream, delivered: u64, rate: u64 },
    #[error("relay map disagrees with assignments at uplink level {0}")]
    RelayMapMismatch(u32),
    #[error("user {user} is listed as reader of a level carrying its own bit only or nothing it needs")]
    ReaderMismatch { user: User },
}

impl LevelPlan {
    pub fn new(
        config: ChannelConfig,
        rates: IntegerRates,
        assignments: Vec<StreamAssignment>,
        stages: Vec<StageSummary>,
        quantities: [u64; 5],
    ) -> Self {
        let relay_map = assignments
            .iter()
            .flat_map(|a| a.levels.iter().map(|l| (l.uplink, l.downlink)))
            .collect();
        LevelPlan {
            config,
            rates,
            assignments,
            relay_map,
            stages,
            quantities,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn levels(&self) -> impl Iterator<Item = &LevelUse> {
        self.assignments.iter().flat_map(|a| a.levels.iter())
    }

    /// Number of distinct bits delivered per stream.
    pub fn delivered(&self) -> IntegerRates {
        let mut bits: Vec<BitRef> = self.levels().flat_map(|l| l.carries.iter().copied()).collect();
        bits.sort_unstable();
        bits.dedup();
        let mut out = IntegerRates::default();
        for b in bits {
            out[b.stream] += 1;
        }
        out
    }

    /// Checks every structural invariant of the plan.
    pub fn validate(&self) -> Result<(), PlanViolation> {
        let q = self.config.q();
        let mut up_seen = Vec::new();
        let mut down_seen = Vec::new();
        for a in &self.assignments {
            let expected_levels = match a.kind {
                StreamKind::Cyclic { .. } => 2 * a.width,
                _ => a.width,
            };
            if expected_levels != a.levels.len() {
                return Err(PlanViolation::WidthMismatch {
                    width: a.width,
                    levels: a.levels.len(),
                });
            }
            for l in &a.levels {
                for level in [l.uplink, l.downlink] {
                    if level == 0 || level > q {
                        return Err(PlanViolation::LevelOutOfRange { level, q });
                    }
                }
                if up_seen.contains(&l.uplink) {
                    return Err(PlanViolation::UplinkReused(l.uplink));
                }
                up_seen.push(l.uplink);
                if down_seen.contains(&l.downlink) {
                    return Err(PlanViolation::DownlinkReused(l.downlink));
                }
                down_seen.push(l.downlink);
                if self.relay_map.get(&l.uplink) != Some(&l.downlink) {
                    return Err(PlanViolation::RelayMapMismatch(l.uplink));
                }

                let mut senders: Vec<User> = l.carries.iter().map(|b| b.stream.from()).collect();
                senders.sort_unstable();
                senders.dedup();
                if senders.len() > 2 || l.carries.len() > 2 {
                    return Err(PlanViolation::ArityExceeded {
                        level: l.uplink,
                        senders: senders.len().max(l.carries.len()),
                    });
                }
                for &u in &senders {
                    if l.uplink > self.config.gain(u) {
                        return Err(PlanViolation::SenderCannotReach {
                            user: u,
                            level: l.uplink,
                        });
                    }
                }
                for &u in &l.readers {
                    if l.downlink > self.config.gain(u) {
                        return Err(PlanViolation::ReaderCannotReach {
                            user: u,
                            level: l.downlink,
                        });
                    }
                }
                if !matches!(a.kind, StreamKind::Unidirectional { .. }) && l.uplink != l.downlink {
                    return Err(PlanViolation::NotSameLevel {
                        kind: a.kind,
                        uplink: l.uplink,
                        downlink: l.downlink,
                    });
                }
            }
        }
        if self.relay_map.len() != up_seen.len() {
            let stray = self
                .relay_map
                .keys()
                .find(|k| !up_seen.contains(k))
                .copied()
                .unwrap_or(0);
            return Err(PlanViolation::RelayMapMismatch(stray));
        }
        let delivered = self.delivered();
        for s in Stream::ALL {
            if delivered[s] != self.rates[s] {
                return Err(PlanViolation::RateMismatch {
                    stream: s,
                    delivered: delivered[s],
                    rate: self.rates[s],
                });
            }
        }
        // every bit must have a level its receiver reads
        for l in self.levels() {
            for b in &l.carries {
                let receiver = b.stream.to();
                let served = self
                    .levels()
                    .any(|m| m.readers.contains(&receiver) && m.carries.contains(b));
                if !served {
                    return Err(PlanViolation::ReaderMismatch { user: receiver });
                }
            }
        }
        Ok(())
    }
}

/// Plans an integer rate tuple of the outer bound through all three stages.
pub fn build_plan(r: &RateTuple, config: ChannelConfig) -> Result<LevelPlan, SchemeError> {
    let rates = check_membership(r, config)?;
    let (state_a, mut assignments) = bidir_stage(r, config)?;
    let bidir_summary = summarize(Stage::Bidirectional, &assignments, state_a.reduced);
    let (state_b, cyclic) = cyclic_stage(&state_a)?;
    let cyclic_summary = summarize(Stage::Cyclic, &cyclic, state_b.reduced);
    assignments.extend(cyclic);
    let uni = uni_stage(&state_b)?;
    let uni_summary = summarize(Stage::Unidirectional, &uni, state_b.reduced);
    assignments.extend(uni);

    let quantities = [state_a.a, state_a.b, state_a.c, state_b.d, state_b.e];
    let plan = LevelPlan::new(
        config,
        rates,
        assignments,
        vec![bidir_summary, cyclic_summary, uni_summary],
        quantities,
    );
    plan.validate()?;
    Ok(plan)
}

fn summarize(stage: Stage, assignments: &[StreamAssignment], reduced_after: [u32; 3]) -> StageSummary {
    let (bits, levels) = assignments
        .iter()
        .map(StreamAssignment::accounting)
        .fold((0, 0), |(b, l), (bb, ll)| (b + bb, l + ll));
    StageSummary {
        stage,
        bits,
        levels,
        reduced_after,
    }
}

/// A rate tuple lifted to `factor` channel uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolExtension {
    pub factor: u64,
    pub rates: RateTuple,
    pub config: ChannelConfig,
}

/// Smallest `Q` with `Q R` integral, and the scaled tuple and channel.
pub fn symbol_extension(r: &RateTuple, config: ChannelConfig) -> Result<SymbolExtension, SchemeError> {
    if !Region::outer_bound(config).is_member(r) {
        return Err(SchemeError::NotInRegion(Box::new(r.clone())));
    }
    let q = r.denominator_lcm();
    let factor = u64::try_from(q).map_err(|_| ChannelError::Overflow { factor: u64::MAX })?;
    let ext = SymbolExtension {
        factor,
        rates: r.scaled(q),
        config: config.scaled(factor)?,
    };
    debug_assert!(ext.rates.is_integral());
    Ok(ext)
}

/// Plans any member of the outer bound, extending fractional tuples first.
pub fn plan_with_extension(r: &RateTuple, config: ChannelConfig) -> Result<(SymbolExtension, LevelPlan), SchemeError> {
    let ext = symbol_extension(r, config)?;
    let plan = build_plan(&ext.rates, ext.config)?;
    Ok((ext, plan))
}
