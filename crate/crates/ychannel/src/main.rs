use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ychannel::format::{CheckDoc, ErrorDoc, PlanDoc, RedundancyDoc, RegionDoc, SimulationDoc, VertexDoc};
use ychannel::scan::{limits_for, scan_document};
use ychannel_core::rate::parse_rational;
use ychannel_core::region::redundancy_report;
use ychannel_core::scheme::{plan_with_extension, SchemeError};
use ychannel_core::simulator::{verify_plan, VerifyMode};
use ychannel_core::{ChannelConfig, RateTuple, Region};

/// Capacity region and relay level plans for the linear shift deterministic
/// Y-channel.
#[derive(Parser)]
#[command(name = "ychannel", version)]
struct Cli {
    /// Write the JSON document to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Gains {
    n1: u32,
    n2: u32,
    n3: u32,
}

#[derive(Args)]
struct Rates {
    /// R12 R13 R21 R23 R31 R32 as integers or "p/q".
    #[arg(required = true, num_args = 6, value_names = ["R12", "R13", "R21", "R23", "R31", "R32"])]
    rates: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the outer bound as labelled inequalities.
    Region {
        #[command(flatten)]
        gains: Gains,
        /// Include the vertex list.
        #[arg(long)]
        vertices: bool,
        /// Include the cut-set and single-rate redundancy report.
        #[arg(long)]
        redundancy: bool,
    },
    /// Test whether a rate tuple lies in the outer bound.
    Check {
        #[command(flatten)]
        gains: Gains,
        #[command(flatten)]
        rates: Rates,
    },
    /// Build a relay level plan, optionally simulating it.
    Plan {
        #[command(flatten)]
        gains: Gains,
        #[command(flatten)]
        rates: Rates,
        #[arg(long)]
        simulate: bool,
        /// Try every message set.
        #[arg(long, conflicts_with = "trials")]
        exhaustive: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of random message sets.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Plan and simulate every integer point of every config up to --max-n1.
    Scan {
        #[arg(long)]
        max_n1: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow --max-n1 beyond the safety limit.
        #[arg(long)]
        force: bool,
    },
}

struct Failure {
    code: u8,
    doc: Option<Box<ErrorDoc>>,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Failure {
            code: 2,
            doc: None,
            message: message.to_string(),
        }
    }
}

fn config(g: &Gains) -> Result<ChannelConfig, Failure> {
    ChannelConfig::new(g.n1, g.n2, g.n3).map_err(Failure::invalid)
}

fn rates(r: &Rates) -> Result<RateTuple, Failure> {
    let mut v = [ychannel_core::Rational::default(); 6];
    for (slot, s) in v.iter_mut().zip(&r.rates) {
        *slot = parse_rational(s).map_err(Failure::invalid)?;
    }
    RateTuple::new(v).map_err(Failure::invalid)
}

fn emit<T: Serialize>(output: &Option<PathBuf>, doc: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(Failure::invalid),
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Region {
            gains,
            vertices,
            redundancy,
        } => {
            let region = Region::outer_bound(config(gains)?);
            let mut doc = RegionDoc::new(&region);
            if *vertices {
                doc.vertices = Some(region.vertices().iter().map(VertexDoc::from).collect());
            }
            if *redundancy {
                doc.redundancy = Some(
                    redundancy_report(region.config())
                        .iter()
                        .map(RedundancyDoc::from)
                        .collect(),
                );
            }
            emit(&cli.output, &doc)?;
            Ok(0)
        }
        Command::Check { gains, rates: r } => {
            let doc = CheckDoc::new(&Region::outer_bound(config(gains)?), &rates(r)?);
            emit(&cli.output, &doc)?;
            Ok(if doc.member { 0 } else { 1 })
        }
        Command::Plan {
            gains,
            rates: r,
            simulate,
            exhaustive,
            seed,
            trials,
        } => {
            let config = config(gains)?;
            let rates = rates(r)?;
            let (ext, plan) = match plan_with_extension(&rates, config) {
                Ok(p) => p,
                Err(SchemeError::NotInRegion(_)) => {
                    let region = Region::outer_bound(config);
                    let mut doc = ErrorDoc::new(
                        "NOT_IN_REGION",
                        format!("{rates} is outside the outer bound of {config}"),
                    );
                    doc.violated = region.violated(&rates).iter().map(ToString::to_string).collect();
                    return Err(Failure {
                        code: 1,
                        message: doc.message.clone(),
                        doc: Some(Box::new(doc)),
                    });
                }
                Err(e) => return Err(Failure::invalid(e)),
            };
            let mut doc = PlanDoc::new(config, &rates, &ext, &plan);
            if *simulate {
                let mode = match (exhaustive, seed, trials) {
                    (true, _, _) => VerifyMode::Exhaustive,
                    (false, seed, Some(trials)) => VerifyMode::Random {
                        seed: seed.unwrap_or(0),
                        trials: *trials,
                    },
                    (false, seed, None) => VerifyMode::Auto {
                        seed: seed.unwrap_or(0),
                    },
                };
                let report = verify_plan(&plan, mode).map_err(Failure::invalid)?;
                doc.simulation = Some(SimulationDoc::from(&report));
                emit(&cli.output, &doc)?;
                return Ok(if report.passed() { 0 } else { 1 });
            }
            emit(&cli.output, &doc)?;
            Ok(0)
        }
        Command::Scan { max_n1, seed, force } => {
            let limits = limits_for(*max_n1, *seed, *force).map_err(Failure::invalid)?;
            let doc = scan_document(*max_n1, limits);
            emit(&cli.output, &doc)?;
            Ok(if doc.verdict == "PASS" { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ychannel: {}", f.message);
            if let Some(doc) = &f.doc {
                if emit(&cli.output, doc).is_err() {
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(f.code)
        }
    }
}
