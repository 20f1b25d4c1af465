//! Achievability scans over many channel configurations, run in parallel.

use rayon::prelude::*;
use thiserror::Error;

use ychannel_core::oracle::{achievability_scan, ScanLimits, ScanReport};
use ychannel_core::ChannelConfig;

use crate::format::{verdict, ScanConfigDoc, ScanDoc, SCAN_SCHEMA};

/// Largest `n1` scanned over every integer point.
pub const EXHAUSTIVE_LIMIT: u32 = 6;
/// Largest `n1` scanned at all without `force`.
pub const SAMPLED_LIMIT: u32 = 8;
/// Integer points checked per config above [`EXHAUSTIVE_LIMIT`].
pub const SAMPLE_POINTS: usize = 200;
pub const DEFAULT_PROBES: usize = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScanError {
    #[error("--max-n1 {0} exceeds the limit of {SAMPLED_LIMIT}; pass --force to run anyway")]
    OutOfLimit(u32),
}

/// Per-config limits for a scan up to `max_n1`.
pub fn limits_for(max_n1: u32, seed: u64, force: bool) -> Result<ScanLimits, ScanError> {
    if max_n1 > SAMPLED_LIMIT && !force {
        return Err(ScanError::OutOfLimit(max_n1));
    }
    let sample_points = (max_n1 > EXHAUSTIVE_LIMIT).then_some(SAMPLE_POINTS);
    Ok(ScanLimits {
        seed,
        probes: DEFAULT_PROBES,
        sample_points,
    })
}

fn config_seed(seed: u64, c: ChannelConfig) -> u64 {
    let tag = (u64::from(c.n1()) << 32) | (u64::from(c.n2()) << 16) | u64::from(c.n3());
    seed ^ tag.wrapping_mul(0xd605_bbb5_8c8a_bd1b)
}

/// Scans every config in parallel; the result is in input order and does
/// not depend on scheduling.
pub fn scan_configs(configs: &[ChannelConfig], limits: ScanLimits) -> Vec<ScanReport> {
    configs
        .par_iter()
        .map(|&c| {
            achievability_scan(
                c,
                ScanLimits {
                    seed: config_seed(limits.seed, c),
                    ..limits
                },
            )
        })
        .collect()
}

/// Scans all ordered configs with `n1 <= max_n1`.
pub fn scan_document(max_n1: u32, limits: ScanLimits) -> ScanDoc {
    let reports = scan_configs(&ChannelConfig::all_up_to(max_n1, 0), limits);
    ScanDoc {
        schema: SCAN_SCHEMA.into(),
        verdict: verdict(reports.iter().all(ScanReport::passed)),
        max_n1,
        seed: limits.seed,
        sample_points: limits.sample_points,
        probes_per_config: limits.probes,
        configs: reports.iter().map(ScanConfigDoc::from).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        assert_eq!(limits_for(6, 1, false).unwrap().sample_points, None);
        assert_eq!(limits_for(8, 1, false).unwrap().sample_points, Some(SAMPLE_POINTS));
        assert_eq!(limits_for(9, 1, false), Err(ScanError::OutOfLimit(9)));
        assert!(limits_for(9, 1, true).is_ok());
    }

    #[test]
    fn deterministic_across_runs() {
        let limits = ScanLimits {
            seed: 4,
            probes: 20,
            sample_points: None,
        };
        let a = scan_document(2, limits);
        assert_eq!(a, scan_document(2, limits));
        assert_eq!(a.verdict, "PASS");
        assert_eq!(a.configs.len(), ChannelConfig::all_up_to(2, 0).len());
    }
}
