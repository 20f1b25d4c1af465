//! Users, message streams, and rate tuples.

use core::fmt;
use core::ops::{Index, IndexMut};
use core::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Exact rational used for every rate and polytope coordinate.
pub type Rational = Ratio<i128>;

/// One of the three terminals of the Y-channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum User {
    One,
    Two,
    Three,
}

impl User {
    pub const ALL: [User; 3] = [User::One, User::Two, User::Three];

    /// 1-based user number.
    pub fn number(self) -> u8 {
        match self {
            User::One => 1,
            User::Two => 2,
            User::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<User> {
        match n {
            1 => Some(User::One),
            2 => Some(User::Two),
            3 => Some(User::Three),
            _ => None,
        }
    }
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A directed message stream `from -> to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stream {
    from: User,
    to: User,
}

impl Stream {
    /// All six streams in rate-tuple order `(R12, R13, R21, R23, R31, R32)`.
    pub const ALL: [Stream; 6] = [
        Stream {
            from: User::One,
            to: User::Two,
        },
        Stream {
            from: User::One,
            to: User::Three,
        },
        Stream {
            from: User::Two,
            to: User::One,
        },
        Stream {
            from: User::Two,
            to: User::Three,
        },
        Stream {
            from: User::Three,
            to: User::One,
        },
        Stream {
            from: User::Three,
            to: User::Two,
        },
    ];

    pub fn new(from: User, to: User) -> Option<Stream> {
        (from != to).then_some(Stream { from, to })
    }

    pub fn from(self) -> User {
        self.from
    }

    pub fn to(self) -> User {
        self.to
    }

    pub fn reverse(self) -> Stream {
        Stream {
            from: self.to,
            to: self.from,
        }
    }

    /// Position of this stream inside a rate tuple.
    pub fn index(self) -> usize {
        let (f, t) = (self.from.number(), self.to.number());
        usize::from((f - 1) * 2 + if t > f { t - 2 } else { t - 1 })
    }

    /// Short `Rjk` name.
    pub fn rate_name(self) -> RateName {
        RateName(self)
    }
}

impl fmt::Display for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// Displays a stream as `R12`, `R13`, ...
#[derive(Clone, Copy, Debug)]
pub struct RateName(Stream);

impl fmt::Display for RateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}{}", self.0.from, self.0.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RateError {
    #[error("rate {stream} is negative")]
    Negative { stream: Stream },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as an exact rational (expected \"p\" or \"p/q\")")]
pub struct ParseRationalError {
    pub input: alloc::string::String,
}

/// Parses `"p"` or `"p/q"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError { input: s.into() };
    let s = s.trim();
    match s.split_once('/') {
        None => i128::from_str(s).map(Rational::from_integer).map_err(|_| err()),
        Some((p, q)) => {
            let p = i128::from_str(p.trim()).map_err(|_| err())?;
            let q = i128::from_str(q.trim()).map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
    }
}

/// Six non-negative exact rates `(R12, R13, R21, R23, R31, R32)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RateTuple([Rational; 6]);

impl RateTuple {
    pub fn new(values: [Rational; 6]) -> Result<Self, RateError> {
        for (stream, v) in Stream::ALL.iter().zip(values.iter()) {
            if v.is_negative() {
                return Err(RateError::Negative { stream: *stream });
            }
        }
        Ok(RateTuple(values))
    }

    pub fn zero() -> Self {
        RateTuple([Rational::zero(); 6])
    }

    pub fn from_integers(values: [u64; 6]) -> Self {
        RateTuple(values.map(|v| Rational::from_integer(i128::from(v))))
    }

    pub fn get(&self, stream: Stream) -> Rational {
        self.0[stream.index()]
    }

    pub fn components(&self) -> &[Rational; 6] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|r| r.is_integer())
    }

    /// Integer view, if every component is integral.
    pub fn to_integers(&self) -> Option<IntegerRates> {
        let mut out = [0u64; 6];
        for (o, r) in out.iter_mut().zip(self.0.iter()) {
            if !r.is_integer() {
                return None;
            }
            *o = u64::try_from(r.to_integer()).ok()?;
        }
        Some(IntegerRates(out))
    }

    /// Least common multiple of the component denominators.
    pub fn denominator_lcm(&self) -> i128 {
        self.0.iter().fold(1i128, |acc, r| acc.lcm(r.denom()))
    }

    pub fn scaled(&self, factor: i128) -> RateTuple {
        RateTuple(self.0.map(|r| r * factor))
    }

    /// Component-wise `self <= other`.
    pub fn dominated_by(&self, other: &RateTuple) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for RateTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// Integer rates indexed by [`Stream`], used by the planner and simulator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerRates(pub [u64; 6]);

impl IntegerRates {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&r| r == 0)
    }

    pub fn to_rates(self) -> RateTuple {
        RateTuple::from_integers(self.0)
    }
}

impl Index<Stream> for IntegerRates {
    type Output = u64;

    fn index(&self, stream: Stream) -> &u64 {
        &self.0[stream.index()]
    }
}

impl IndexMut<Stream> for IntegerRates {
    fn index_mut(&mut self, stream: Stream) -> &mut u64 {
        &mut self.0[stream.index()]
    }
}
