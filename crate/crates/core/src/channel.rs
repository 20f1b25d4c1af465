//! Bit-exact linear shift deterministic Y-channel.
//!
//! Signals are length-`q` binary vectors, position 1 on top. A gain `n`
//! passes the top `n` positions of a transmitted vector and clips the rest,
//! arriving shifted down by `q - n`. The relay sees the GF(2) sum of the
//! three shifted user signals; user `j` sees the relay signal shifted by
//! `q - n_j`.
//!
//! Relay levels are numbered so that level `l` is accessible to user `j`
//! exactly when `l <= n_j`, in both directions:
//!
//! * uplink level `l` is relay received position `q - l + 1` (level 1 at the
//!   bottom); user `j` reaches it from its own position `n_j - l + 1`;
//! * downlink level `l` is relay transmit position `l` (level 1 on top);
//!   user `j` observes it at its own position `l + q - n_j`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::rate::User;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("channel gains must satisfy n1 >= n2 >= n3, got ({n1}, {n2}, {n3})")]
    Unordered { n1: u32, n2: u32, n3: u32 },
    #[error("scaling gains by {factor} overflows")]
    Overflow { factor: u64 },
    #[error("signal has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("gain {gain} exceeds q = {q}")]
    GainOutOfRange { gain: u32, q: u32 },
}

/// Gains `n1 >= n2 >= n3 >= 0` of a DYC(n1, n2, n3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelConfig {
    n1: u32,
    n2: u32,
    n3: u32,
}

impl ChannelConfig {
    /// Unordered gains are rejected, never sorted.
    pub fn new(n1: u32, n2: u32, n3: u32) -> Result<Self, ChannelError> {
        if n1 >= n2 && n2 >= n3 {
            Ok(ChannelConfig { n1, n2, n3 })
        } else {
            Err(ChannelError::Unordered { n1, n2, n3 })
        }
    }

    pub fn n1(&self) -> u32 {
        self.n1
    }

    pub fn n2(&self) -> u32 {
        self.n2
    }

    pub fn n3(&self) -> u32 {
        self.n3
    }

    pub fn gains(&self) -> [u32; 3] {
        [self.n1, self.n2, self.n3]
    }

    pub fn gain(&self, user: User) -> u32 {
        match user {
            User::One => self.n1,
            User::Two => self.n2,
            User::Three => self.n3,
        }
    }

    /// Signal dimension, `max_j n_j = n1`.
    pub fn q(&self) -> u32 {
        self.n1
    }

    /// The channel seen over `factor` channel uses.
    pub fn scaled(&self, factor: u64) -> Result<Self, ChannelError> {
        let scale = |n: u32| u32::try_from(u64::from(n) * factor).map_err(|_| ChannelError::Overflow { factor });
        Ok(ChannelConfig {
            n1: scale(self.n1)?,
            n2: scale(self.n2)?,
            n3: scale(self.n3)?,
        })
    }

    /// Every ordered config with `max_n1 >= n1 >= n2 >= n3 >= min_gain`.
    pub fn all_up_to(max_n1: u32, min_gain: u32) -> Vec<ChannelConfig> {
        let mut out = Vec::new();
        for n1 in min_gain..=max_n1 {
            for n2 in min_gain..=n1 {
                for n3 in min_gain..=n2 {
                    out.push(ChannelConfig { n1, n2, n3 });
                }
            }
        }
        out
    }
}

impl fmt::Display for ChannelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DYC({}, {}, {})", self.n1, self.n2, self.n3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Uplink,
    Downlink,
}

/// A relay level in one direction. Levels run from 1 to `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelIndex {
    pub direction: Direction,
    pub level: u32,
}

impl LevelIndex {
    pub fn uplink(level: u32) -> Self {
        LevelIndex {
            direction: Direction::Uplink,
            level,
        }
    }

    pub fn downlink(level: u32) -> Self {
        LevelIndex {
            direction: Direction::Downlink,
            level,
        }
    }
}

/// Binary vector over GF(2); position 1 is the top (most significant) level.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signal {
    bits: Vec<bool>,
}

impl Signal {
    pub fn zeros(len: usize) -> Self {
        Signal { bits: vec![false; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Signal { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Bit at 1-based `position`.
    pub fn get(&self, position: usize) -> bool {
        self.bits[position - 1]
    }

    pub fn set(&mut self, position: usize, value: bool) {
        self.bits[position - 1] = value;
    }

    pub fn flip(&mut self, position: usize) {
        self.bits[position - 1] ^= true;
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    pub fn xor(&self, other: &Signal) -> Result<Signal, ChannelError> {
        check_len(other, self.len())?;
        Ok(Signal {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }
}

fn check_len(x: &Signal, expected: usize) -> Result<(), ChannelError> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(ChannelError::LengthMismatch {
            expected,
            actual: x.len(),
        })
    }
}

/// Multiplies `x` by the shift matrix `S^(q - gain)`: the top `gain`
/// positions move down by `q - gain`, everything below is clipped.
pub fn shift_apply(x: &Signal, gain: u32, config: &ChannelConfig) -> Result<Signal, ChannelError> {
    let q = config.q();
    if gain > q {
        return Err(ChannelError::GainOutOfRange { gain, q });
    }
    check_len(x, q as usize)?;
    Ok(shift_by(x, (q - gain) as usize))
}

fn shift_by(x: &Signal, amount: usize) -> Signal {
    let len = x.len();
    let mut out = Signal::zeros(len);
    for p in (amount + 1)..=len {
        out.set(p, x.get(p - amount));
    }
    out
}

/// Relay observation `y_r = sum_j S^(q - n_j) x_j` over GF(2).
pub fn uplink_receive(x1: &Signal, x2: &Signal, x3: &Signal, config: &ChannelConfig) -> Result<Signal, ChannelError> {
    let mut y = shift_apply(x1, config.n1(), config)?;
    for (x, gain) in [(x2, config.n2()), (x3, config.n3())] {
        y = y.xor(&shift_apply(x, gain, config)?)?;
    }
    Ok(y)
}

/// Observation of `user`: `y_j = S^(q - n_j) x_r`.
pub fn downlink_receive(x_r: &Signal, user: User, config: &ChannelConfig) -> Result<Signal, ChannelError> {
    shift_apply(x_r, config.gain(user), config)
}

/// Level `l` is accessible to `user` iff `l <= n_j`, in either direction.
pub fn accessible(level: LevelIndex, user: User, config: &ChannelConfig) -> bool {
    level.level >= 1 && level.level <= config.gain(user)
}

/// Position in `user`'s transmit vector that lands on uplink `level`.
pub fn sender_position(level: u32, user: User, config: &ChannelConfig) -> Option<usize> {
    let gain = config.gain(user);
    (level >= 1 && level <= gain).then(|| (gain - level + 1) as usize)
}

/// Relay received position of uplink `level`.
pub fn relay_received_position(level: u32, config: &ChannelConfig) -> Option<usize> {
    let q = config.q();
    (level >= 1 && level <= q).then(|| (q - level + 1) as usize)
}

/// Relay transmit position of downlink `level`.
pub fn relay_transmit_position(level: u32, config: &ChannelConfig) -> Option<usize> {
    (level >= 1 && level <= config.q()).then_some(level as usize)
}

/// Position at which `user` observes downlink `level`.
pub fn observed_position(level: u32, user: User, config: &ChannelConfig) -> Option<usize> {
    let gain = config.gain(user);
    (level >= 1 && level <= gain).then(|| (level + config.q() - gain) as usize)
}
