//! End-to-end execution of a [`LevelPlan`] over the deterministic channel.
//!
//! One channel use per trial: users encode, the relay observes the GF(2)
//! superposition, re-emits mapped levels, and every user decodes the streams
//! addressed to it using only its own messages and its own observation.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::{self, ChannelError, Signal};
use crate::rate::{IntegerRates, Stream, User};
use crate::scheme::{BitRef, LevelPlan, PlanViolation};

/// Message sets with at most this many bits are verified exhaustively.
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 12;
/// Random trials used above the exhaustive threshold.
pub const DEFAULT_RANDOM_TRIALS: u64 = 256;
/// Hard cap for explicitly requested exhaustive runs.
pub const MAX_EXHAUSTIVE_BITS: u64 = 24;
const MAX_FAILURE_EXAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("message lengths {actual:?} do not match plan rates {expected:?}")]
    ShapeMismatch {
        expected: IntegerRates,
        actual: IntegerRates,
    },
    #[error("user {user} cannot resolve bit {bit} of stream {stream}")]
    UnresolvableChain { user: User, stream: Stream, bit: usize },
    #[error("user {user} would read downlink level {level} beyond its gain")]
    AccessViolation { user: User, level: u32 },
    #[error("exhaustive verification over {bits} bits exceeds the cap of {MAX_EXHAUSTIVE_BITS}")]
    ExhaustiveTooLarge { bits: u64 },
    #[error(transparent)]
    Plan(#[from] PlanViolation),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Message bits for every ordered pair, one channel use.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MessageSet {
    bits: [Vec<bool>; 6],
}

impl MessageSet {
    pub fn zeros(rates: &IntegerRates) -> Self {
        MessageSet {
            bits: core::array::from_fn(|i| vec![false; rates.0[i] as usize]),
        }
    }

    /// The `index`-th message set in the canonical enumeration: bits are
    /// taken from `index` LSB-first in stream order.
    pub fn from_index(rates: &IntegerRates, index: u64) -> Self {
        let mut m = MessageSet::zeros(rates);
        let mut k = 0;
        for v in m.bits.iter_mut() {
            for b in v.iter_mut() {
                *b = (index >> k) & 1 == 1;
                k += 1;
            }
        }
        m
    }

    pub fn random<R: Rng>(rates: &IntegerRates, rng: &mut R) -> Self {
        let mut m = MessageSet::zeros(rates);
        for v in m.bits.iter_mut() {
            for b in v.iter_mut() {
                *b = rng.random();
            }
        }
        m
    }

    pub fn rates(&self) -> IntegerRates {
        IntegerRates(core::array::from_fn(|i| self.bits[i].len() as u64))
    }

    pub fn stream(&self, s: Stream) -> &[bool] {
        &self.bits[s.index()]
    }

    pub fn stream_mut(&mut self, s: Stream) -> &mut Vec<bool> {
        &mut self.bits[s.index()]
    }

    pub fn get(&self, b: BitRef) -> bool {
        self.bits[b.stream.index()][b.bit]
    }

    pub fn xor(&self, other: &MessageSet) -> MessageSet {
        MessageSet {
            bits: core::array::from_fn(|i| self.bits[i].iter().zip(&other.bits[i]).map(|(a, b)| a ^ b).collect()),
        }
    }
}

/// What one user recovered: bits of the two streams addressed to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub user: User,
    pub streams: Vec<(Stream, Vec<bool>)>,
}

impl Decoded {
    pub fn stream(&self, s: Stream) -> Option<&[bool]> {
        self.streams.iter().find(|(t, _)| *t == s).map(|(_, v)| v.as_slice())
    }
}

fn check_shape(m: &MessageSet, plan: &LevelPlan) -> Result<(), SimError> {
    if m.rates() == plan.rates {
        Ok(())
    } else {
        Err(SimError::ShapeMismatch {
            expected: plan.rates,
            actual: m.rates(),
        })
    }
}

/// Transmit signals of the three users.
pub fn encode(m: &MessageSet, plan: &LevelPlan) -> Result<[Signal; 3], SimError> {
    check_shape(m, plan)?;
    let q = plan.config.q() as usize;
    let mut x = [Signal::zeros(q), Signal::zeros(q), Signal::zeros(q)];
    for level in plan.levels() {
        for &b in &level.carries {
            let sender = b.stream.from();
            let pos = channel::sender_position(level.uplink, sender, &plan.config).ok_or(
                PlanViolation::SenderCannotReach {
                    user: sender,
                    level: level.uplink,
                },
            )?;
            if m.get(b) {
                x[usize::from(sender.number() - 1)].flip(pos);
            }
        }
    }
    Ok(x)
}

/// Relay transmit signal: each mapped uplink level re-emitted on its
/// downlink level; everything else is zero.
pub fn relay_forward(y_r: &Signal, plan: &LevelPlan) -> Result<Signal, SimError> {
    let q = plan.config.q() as usize;
    if y_r.len() != q {
        return Err(ChannelError::LengthMismatch {
            expected: q,
            actual: y_r.len(),
        }
        .into());
    }
    let mut out = Signal::zeros(q);
    for (&up, &down) in &plan.relay_map {
        let from = channel::relay_received_position(up, &plan.config)
            .ok_or(PlanViolation::LevelOutOfRange { level: up, q: q as u32 })?;
        let to = channel::relay_transmit_position(down, &plan.config).ok_or(PlanViolation::LevelOutOfRange {
            level: down,
            q: q as u32,
        })?;
        out.set(to, y_r.get(from));
    }
    Ok(out)
}

/// Recovers the streams addressed to `user` from its observation `y_j`.
///
/// Only bits of streams sent by `user` are taken from `own`. Within each
/// assignment, levels that contain one of the user's own bits are read
/// first; every read level must then expose exactly one unknown bit.
pub fn decode(y_j: &Signal, user: User, own: &MessageSet, plan: &LevelPlan) -> Result<Decoded, SimError> {
    let mut known: Vec<(BitRef, bool)> = Vec::new();
    let lookup = |known: &[(BitRef, bool)], b: BitRef| -> Option<bool> {
        if b.stream.from() == user {
            Some(own.get(b))
        } else {
            known.iter().find(|(k, _)| *k == b).map(|(_, v)| *v)
        }
    };

    for assignment in &plan.assignments {
        let mut order: Vec<_> = assignment.levels.iter().filter(|l| l.readers.contains(&user)).collect();
        order.sort_by_key(|l| !l.carries.iter().any(|b| b.stream.from() == user));
        for level in order {
            let pos =
                channel::observed_position(level.downlink, user, &plan.config).ok_or(SimError::AccessViolation {
                    user,
                    level: level.downlink,
                })?;
            let mut value = y_j.get(pos);
            let mut unknown = None;
            for &b in &level.carries {
                match lookup(&known, b) {
                    Some(v) => value ^= v,
                    None if unknown.is_none() => unknown = Some(b),
                    None => {
                        return Err(SimError::UnresolvableChain {
                            user,
                            stream: b.stream,
                            bit: b.bit,
                        })
                    }
                }
            }
            if let Some(b) = unknown {
                known.push((b, value));
            }
        }
    }

    let mut streams = Vec::new();
    for s in Stream::ALL.into_iter().filter(|s| s.to() == user) {
        let bits = (0..plan.rates[s] as usize)
            .map(|bit| {
                let b = BitRef { stream: s, bit };
                lookup(&known, b).ok_or(SimError::UnresolvableChain { user, stream: s, bit })
            })
            .collect::<Result<Vec<bool>, _>>()?;
        streams.push((s, bits));
    }
    Ok(Decoded { user, streams })
}

/// Relay observation predicted from the plan alone: each used uplink level
/// holds the XOR of the bits it carries.
pub fn predicted_relay_signal(m: &MessageSet, plan: &LevelPlan) -> Signal {
    let q = plan.config.q() as usize;
    let mut y = Signal::zeros(q);
    for level in plan.levels() {
        let v = level.carries.iter().fold(false, |acc, &b| acc ^ m.get(b));
        if let Some(pos) = channel::relay_received_position(level.uplink, &plan.config) {
            y.set(pos, v);
        }
    }
    y
}

/// Everything one trial produced.
#[derive(Clone, Debug)]
pub struct Trial {
    pub relay_observed: Signal,
    pub relay_predicted: Signal,
    pub decoded: [Decoded; 3],
}

/// encode -> uplink -> relay -> downlink -> decode for one message set.
pub fn run_trial(m: &MessageSet, plan: &LevelPlan) -> Result<Trial, SimError> {
    let [x1, x2, x3] = encode(m, plan)?;
    let y_r = channel::uplink_receive(&x1, &x2, &x3, &plan.config)?;
    let x_r = relay_forward(&y_r, plan)?;
    let mut decoded = Vec::with_capacity(3);
    for u in User::ALL {
        let y = channel::downlink_receive(&x_r, u, &plan.config)?;
        decoded.push(decode(&y, u, m, plan)?);
    }
    let [d1, d2, d3]: [Decoded; 3] = decoded.try_into().expect("three users");
    Ok(Trial {
        relay_predicted: predicted_relay_signal(m, plan),
        relay_observed: y_r,
        decoded: [d1, d2, d3],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Exhaustive up to [`DEFAULT_EXHAUSTIVE_THRESHOLD`] bits, otherwise
    /// [`DEFAULT_RANDOM_TRIALS`] seeded random message sets.
    Auto {
        seed: u64,
    },
    Exhaustive,
    Random {
        seed: u64,
        trials: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportMode {
    Exhaustive,
    Random { seed: u64, count: u64 },
}

/// A stream on which some trial decoded the wrong bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureExample {
    pub messages: MessageSet,
    pub stream: Stream,
    pub expected: Vec<bool>,
    /// `None` when decoding itself errored.
    pub decoded: Option<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationReport {
    pub trials: u64,
    pub failures: u64,
    /// Trials where the relay observation differed from the plan's
    /// predicted superposition.
    pub relay_mismatches: u64,
    pub failure_examples: Vec<FailureExample>,
    pub mode: ReportMode,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.relay_mismatches == 0
    }
}

/// Runs the plan on every (or a seeded sample of) message set and counts
/// decoding failures. Invalid plans are rejected before any trial.
pub fn verify_plan(plan: &LevelPlan, mode: VerifyMode) -> Result<SimulationReport, SimError> {
    plan.validate()?;
    let bits = plan.rates.total();
    let mode = match mode {
        VerifyMode::Auto { seed } if bits > DEFAULT_EXHAUSTIVE_THRESHOLD => ReportMode::Random {
            seed,
            count: DEFAULT_RANDOM_TRIALS,
        },
        VerifyMode::Auto { .. } | VerifyMode::Exhaustive => {
            if bits > MAX_EXHAUSTIVE_BITS {
                return Err(SimError::ExhaustiveTooLarge { bits });
            }
            ReportMode::Exhaustive
        }
        VerifyMode::Random { seed, trials } => ReportMode::Random { seed, count: trials },
    };
    let mut report = SimulationReport {
        trials: 0,
        failures: 0,
        relay_mismatches: 0,
        failure_examples: Vec::new(),
        mode,
    };
    match mode {
        ReportMode::Exhaustive => {
            for index in 0..(1u64 << bits) {
                record(&mut report, &MessageSet::from_index(&plan.rates, index), plan)?;
            }
        }
        ReportMode::Random { seed, count } => {
            for trial in 0..count {
                record(
                    &mut report,
                    &MessageSet::random(&plan.rates, &mut trial_rng(seed, trial)),
                    plan,
                )?;
            }
        }
    }
    Ok(report)
}

/// Independent generator per trial, so results do not depend on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn record(report: &mut SimulationReport, m: &MessageSet, plan: &LevelPlan) -> Result<(), SimError> {
    report.trials += 1;
    let push = |report: &mut SimulationReport, stream: Stream, decoded: Option<Vec<bool>>| {
        report.failures += 1;
        if report.failure_examples.len() < MAX_FAILURE_EXAMPLES {
            report.failure_examples.push(FailureExample {
                messages: m.clone(),
                stream,
                expected: m.stream(stream).to_vec(),
                decoded,
            });
        }
    };
    match run_trial(m, plan) {
        Ok(trial) => {
            if trial.relay_observed != trial.relay_predicted {
                report.relay_mismatches += 1;
            }
            for d in &trial.decoded {
                for (s, bits) in &d.streams {
                    if bits.as_slice() != m.stream(*s) {
                        push(report, *s, Some(bits.clone()));
                    }
                }
            }
        }
        Err(SimError::UnresolvableChain { stream, .. }) => push(report, stream, None),
        Err(e) => return Err(e),
    }
    Ok(())
}
