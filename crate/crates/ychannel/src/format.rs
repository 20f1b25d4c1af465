//! JSON documents emitted by the command line.
//!
//! Every document carries a top-level `schema` field. Exact rationals are
//! written as `"p/q"` strings (or `"p"` when integral) and parse back to the
//! same value.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ychannel_core::oracle::{ScanReport, StageTally};
use ychannel_core::rate::parse_rational;
use ychannel_core::region::{Redundancy, RedundancyEntry};
use ychannel_core::scheme::{CycleDirection, LevelPlan, StreamKind, SymbolExtension};
use ychannel_core::simulator::{FailureExample, ReportMode};
use ychannel_core::{
    BoundLabel, ChannelConfig, ChannelError, Inequality, ParseLabelError, RateTuple, Rational, Region,
    SimulationReport, Stream, User, Vertex,
};

pub const REGION_SCHEMA: &str = "ychannel.region/1";
pub const CHECK_SCHEMA: &str = "ychannel.check/1";
pub const PLAN_SCHEMA: &str = "ychannel.plan/1";
pub const SIMULATION_SCHEMA: &str = "ychannel.simulation/1";
pub const SCAN_SCHEMA: &str = "ychannel.scan/1";
pub const ERROR_SCHEMA: &str = "ychannel.error/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Rational(#[from] ychannel_core::ParseRationalError),
    #[error(transparent)]
    Label(#[from] ParseLabelError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("unknown stream name {0:?} (expected R12, R13, R21, R23, R31 or R32)")]
    Stream(String),
    #[error("negative rate in {0:?}")]
    Negative(Box<[Rat; 6]>),
}

/// An exact rational serialized as a `"p/q"` string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Rat(pub Rational);

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<Rat> for String {
    fn from(r: Rat) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for Rat {
    type Error = ychannel_core::ParseRationalError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        parse_rational(&s).map(Rat)
    }
}

fn rats(r: &RateTuple) -> [Rat; 6] {
    r.components().map(Rat)
}

fn rate_tuple(r: &[Rat; 6]) -> Result<RateTuple, FormatError> {
    RateTuple::new(r.map(|x| x.0)).map_err(|_| FormatError::Negative(Box::new(*r)))
}

pub fn stream_name(s: Stream) -> String {
    s.rate_name().to_string()
}

pub fn parse_stream(name: &str) -> Result<Stream, FormatError> {
    Stream::ALL
        .into_iter()
        .find(|&s| stream_name(s) == name)
        .ok_or_else(|| FormatError::Stream(name.into()))
}

pub fn rate_order() -> Vec<String> {
    Stream::ALL.into_iter().map(stream_name).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
}

impl From<ChannelConfig> for ConfigDoc {
    fn from(c: ChannelConfig) -> Self {
        ConfigDoc {
            n1: c.n1(),
            n2: c.n2(),
            n3: c.n3(),
        }
    }
}

impl TryFrom<ConfigDoc> for ChannelConfig {
    type Error = ChannelError;

    fn try_from(c: ConfigDoc) -> Result<Self, Self::Error> {
        ChannelConfig::new(c.n1, c.n2, c.n3)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityDoc {
    pub label: String,
    pub coefficients: [i64; 6],
    pub bound: i64,
}

impl From<&Inequality> for InequalityDoc {
    fn from(i: &Inequality) -> Self {
        InequalityDoc {
            label: i.label.to_string(),
            coefficients: i.coefficients,
            bound: i.bound,
        }
    }
}

impl TryFrom<&InequalityDoc> for Inequality {
    type Error = FormatError;

    fn try_from(d: &InequalityDoc) -> Result<Self, Self::Error> {
        Ok(Inequality {
            coefficients: d.coefficients,
            bound: d.bound,
            label: d.label.parse()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub point: [Rat; 6],
    pub tight: Vec<String>,
}

impl From<&Vertex> for VertexDoc {
    fn from(v: &Vertex) -> Self {
        VertexDoc {
            point: rats(&v.point),
            tight: v.tight.iter().map(BoundLabel::to_string).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyDoc {
    pub label: String,
    pub coefficients: [i64; 6],
    pub bound: i64,
    pub verdict: String,
    pub max_value: Rat,
}

impl From<&RedundancyEntry> for RedundancyDoc {
    fn from(e: &RedundancyEntry) -> Self {
        RedundancyDoc {
            label: e.inequality.label.to_string(),
            coefficients: e.inequality.coefficients,
            bound: e.inequality.bound,
            verdict: match e.verdict {
                Redundancy::Redundant => "redundant",
                Redundancy::Essential => "essential",
            }
            .into(),
            max_value: Rat(e.max_value),
        }
    }
}

/// The H-representation of an outer bound (non-negativity implied).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionDoc {
    pub schema: String,
    pub config: ConfigDoc,
    pub rate_order: Vec<String>,
    pub inequalities: Vec<InequalityDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<VertexDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redundancy: Option<Vec<RedundancyDoc>>,
}

impl RegionDoc {
    pub fn new(region: &Region) -> Self {
        RegionDoc {
            schema: REGION_SCHEMA.into(),
            config: region.config().into(),
            rate_order: rate_order(),
            inequalities: region.substantive().map(InequalityDoc::from).collect(),
            vertices: None,
            redundancy: None,
        }
    }

    /// Rebuilds the region, adding the non-negativity constraints back.
    pub fn to_region(&self) -> Result<Region, FormatError> {
        let ineqs = self
            .inequalities
            .iter()
            .map(Inequality::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Region::new(self.config.try_into()?, ineqs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckDoc {
    pub schema: String,
    pub config: ConfigDoc,
    pub rates: [Rat; 6],
    pub member: bool,
    pub violated: Vec<String>,
}

impl CheckDoc {
    pub fn new(region: &Region, r: &RateTuple) -> Self {
        let violated: Vec<String> = region.violated(r).iter().map(BoundLabel::to_string).collect();
        CheckDoc {
            schema: CHECK_SCHEMA.into(),
            config: region.config().into(),
            rates: rats(r),
            member: violated.is_empty(),
            violated,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantitiesDoc {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub e: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDoc {
    pub stage: String,
    pub bits: usize,
    pub levels: usize,
    pub reduced_after: [u32; 3],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitDoc {
    pub stream: String,
    pub bit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDoc {
    pub uplink: u32,
    pub downlink: u32,
    pub carries: Vec<BitDoc>,
    pub readers: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[u8; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<String>,
    pub width: usize,
    pub levels: Vec<LevelDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionDoc {
    pub factor: u64,
    pub config: ConfigDoc,
    pub rates: [u64; 6],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub schema: String,
    pub config: ConfigDoc,
    pub rates: [Rat; 6],
    /// The channel and integer rates the plan actually runs on.
    pub extension: ExtensionDoc,
    pub quantities: QuantitiesDoc,
    pub stages: Vec<StageDoc>,
    pub assignments: Vec<AssignmentDoc>,
    pub relay_map: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationDoc>,
}

fn user_number(u: User) -> u8 {
    u.number()
}

impl PlanDoc {
    pub fn new(config: ChannelConfig, rates: &RateTuple, ext: &SymbolExtension, plan: &LevelPlan) -> Self {
        let [a, b, c, d, e] = plan.quantities;
        PlanDoc {
            schema: PLAN_SCHEMA.into(),
            config: config.into(),
            rates: rats(rates),
            extension: ExtensionDoc {
                factor: ext.factor,
                config: ext.config.into(),
                rates: plan.rates.0,
            },
            quantities: QuantitiesDoc { a, b, c, d, e },
            stages: plan
                .stages
                .iter()
                .map(|s| StageDoc {
                    stage: s.stage.to_string(),
                    bits: s.bits,
                    levels: s.levels,
                    reduced_after: s.reduced_after,
                })
                .collect(),
            assignments: plan
                .assignments
                .iter()
                .map(|a| {
                    let mut doc = AssignmentDoc {
                        kind: String::new(),
                        pair: None,
                        cycle: None,
                        stream: None,
                        width: a.width,
                        levels: a
                            .levels
                            .iter()
                            .map(|l| LevelDoc {
                                uplink: l.uplink,
                                downlink: l.downlink,
                                carries: l
                                    .carries
                                    .iter()
                                    .map(|b| BitDoc {
                                        stream: stream_name(b.stream),
                                        bit: b.bit,
                                    })
                                    .collect(),
                                readers: l.readers.iter().copied().map(user_number).collect(),
                            })
                            .collect(),
                    };
                    match a.kind {
                        StreamKind::Bidirectional { pair } => {
                            doc.kind = "bidirectional".into();
                            doc.pair = Some([pair.0.number(), pair.1.number()]);
                        }
                        StreamKind::Cyclic { cycle } => {
                            doc.kind = "cyclic".into();
                            doc.cycle = Some(
                                match cycle {
                                    CycleDirection::Forward => "1->2->3->1",
                                    CycleDirection::Backward => "1->3->2->1",
                                }
                                .into(),
                            );
                        }
                        StreamKind::Unidirectional { stream } => {
                            doc.kind = "unidirectional".into();
                            doc.stream = Some(stream_name(stream));
                        }
                    }
                    doc
                })
                .collect(),
            relay_map: plan.relay_map.iter().map(|(&u, &d)| [u, d]).collect(),
            simulation: None,
        }
    }

    pub fn original_rates(&self) -> Result<RateTuple, FormatError> {
        rate_tuple(&self.rates)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModeDoc {
    Exhaustive,
    Random { seed: u64, count: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureDoc {
    /// Message bits per stream as `0`/`1` strings.
    pub messages: BTreeMap<String, String>,
    pub stream: String,
    pub expected: String,
    pub decoded: Option<String>,
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl From<&FailureExample> for FailureDoc {
    fn from(f: &FailureExample) -> Self {
        FailureDoc {
            messages: Stream::ALL
                .into_iter()
                .map(|s| (stream_name(s), bit_string(f.messages.stream(s))))
                .collect(),
            stream: stream_name(f.stream),
            expected: bit_string(&f.expected),
            decoded: f.decoded.as_deref().map(bit_string),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationDoc {
    pub schema: String,
    pub verdict: String,
    pub trials: u64,
    pub failures: u64,
    pub relay_mismatches: u64,
    pub mode: ModeDoc,
    pub failure_examples: Vec<FailureDoc>,
}

pub fn verdict(passed: bool) -> String {
    if passed { "PASS" } else { "FAIL" }.into()
}

impl From<&SimulationReport> for SimulationDoc {
    fn from(r: &SimulationReport) -> Self {
        SimulationDoc {
            schema: SIMULATION_SCHEMA.into(),
            verdict: verdict(r.passed()),
            trials: r.trials,
            failures: r.failures,
            relay_mismatches: r.relay_mismatches,
            mode: match r.mode {
                ReportMode::Exhaustive => ModeDoc::Exhaustive,
                ReportMode::Random { seed, count } => ModeDoc::Random { seed, count },
            },
            failure_examples: r.failure_examples.iter().map(FailureDoc::from).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyDoc {
    pub assignments: u64,
    pub bits: u64,
    pub levels: u64,
}

impl From<StageTally> for TallyDoc {
    fn from(t: StageTally) -> Self {
        TallyDoc {
            assignments: t.assignments,
            bits: t.bits,
            levels: t.levels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFailureDoc {
    pub rates: [u64; 6],
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfigDoc {
    pub config: ConfigDoc,
    pub verdict: String,
    pub integer_points: usize,
    pub points_checked: usize,
    pub plans_built: usize,
    pub simulated_trials: u64,
    pub simulation_failures: usize,
    pub accounting_violations: usize,
    pub probes: usize,
    pub probes_rejected: usize,
    pub stages: BTreeMap<String, TallyDoc>,
    pub plan_failures: Vec<PlanFailureDoc>,
    pub probe_failures: Vec<[u64; 6]>,
}

impl From<&ScanReport> for ScanConfigDoc {
    fn from(r: &ScanReport) -> Self {
        let names = ["bidirectional", "cyclic", "unidirectional"];
        ScanConfigDoc {
            config: r.config.into(),
            verdict: verdict(r.passed()),
            integer_points: r.integer_points,
            points_checked: r.points_checked,
            plans_built: r.plans_built,
            simulated_trials: r.simulated_trials,
            simulation_failures: r.simulation_failures,
            accounting_violations: r.accounting_violations,
            probes: r.probes,
            probes_rejected: r.probes_rejected,
            stages: names
                .iter()
                .zip(r.stages)
                .map(|(n, t)| ((*n).into(), t.into()))
                .collect(),
            plan_failures: r
                .plan_failures
                .iter()
                .map(|(rates, reason)| PlanFailureDoc {
                    rates: rates.0,
                    reason: reason.clone(),
                })
                .collect(),
            probe_failures: r.probe_failures.iter().map(|p| p.0).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanDoc {
    pub schema: String,
    pub verdict: String,
    pub max_n1: u32,
    pub seed: u64,
    /// Integer points checked per config, when not exhaustive.
    pub sample_points: Option<usize>,
    pub probes_per_config: usize,
    pub configs: Vec<ScanConfigDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub schema: String,
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violated: Vec<String>,
}

impl ErrorDoc {
    pub fn new(error: &str, message: impl Into<String>) -> Self {
        ErrorDoc {
            schema: ERROR_SCHEMA.into(),
            error: error.into(),
            message: message.into(),
            violated: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_as_strings() {
        let r = Rat(Rational::new(4, 6));
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"2/3\"");
        assert_eq!(serde_json::to_string(&Rat(Rational::from_integer(3))).unwrap(), "\"3\"");
        assert_eq!(serde_json::from_str::<Rat>("\"6/9\"").unwrap(), r);
        assert!(serde_json::from_str::<Rat>("\"1/0\"").is_err());
        assert!(serde_json::from_str::<Rat>("0.5").is_err());
    }

    #[test]
    fn stream_names() {
        for s in Stream::ALL {
            assert_eq!(parse_stream(&stream_name(s)).unwrap(), s);
        }
        assert!(parse_stream("R11").is_err());
    }

    #[test]
    fn region_round_trip() {
        let region = Region::outer_bound(ChannelConfig::new(4, 3, 2).unwrap());
        let doc = RegionDoc::new(&region);
        assert_eq!(doc.inequalities.len(), 8);
        let back: RegionDoc = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back.to_region().unwrap(), region);
    }
}
