//! Command layer: parse a presentation file or flag set, run the requested
//! computation, and print one JSON report to stdout.
//!
//! Exit codes are part of the contract and never conflated:
//!   0  success
//!   1  a verification suite found a property violation (a finding)
//!   2  bad input: parse errors, invalid flags, cap overruns, failed
//!      consistency or involution checks, internal computation errors

pub mod format;
pub mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use propp_core::cohomology::{h2_compute, h2_eigensplit, h2_qpzp_dims, Dims, DEFAULT_BRUTE_CAP};
use propp_core::corpus::CorpusSpec;
use propp_core::fp_linalg::is_odd_prime;
use propp_core::involution::{validate_involution, InvolutionAction};
use propp_core::pc::GroupTable;
use propp_core::structure::{structure_report, StructureReport};
use propp_core::suites;
use propp_core::verdicts::{fm_verdict, FmInput};

use format::{parse_presentation, ParsedFile};
use report::{CohomologyBlock, Echo, JsonReport, MetaBlock, StructureBlock};

pub const TABLE_CAP_ENV: &str = "PROPP_MAX_TABLE";

#[derive(Parser, Debug)]
#[command(
    name = "propp",
    version,
    about = "finite p-group structure, involutions, and mod-p cohomology"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a presentation and report structure and signed generator ranks
    Classify {
        file: PathBuf,
        /// group order cap for the multiplication table (default p^7,
        /// overridden by PROPP_MAX_TABLE, overridden by this flag)
        #[arg(long)]
        max_table: Option<u64>,
        /// include wall-clock timings in the report (breaks byte-stability)
        #[arg(long)]
        timings: bool,
    },
    /// Brute-force H^2 over F_p, with the signed split when sigma is given
    Cohomology {
        file: PathBuf,
        /// largest group order fed to the cocycle elimination
        #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
        max_order: usize,
        #[arg(long)]
        max_table: Option<u64>,
        #[arg(long)]
        timings: bool,
    },
    /// Run a verification suite; exits 1 when a property violation is found
    Verify {
        suite: SuiteName,
        #[arg(long, default_value_t = 3)]
        p: u32,
        /// largest elementary abelian rank (kunneth)
        #[arg(long, default_value_t = 3)]
        max_rank: usize,
        /// corpus contains groups of order up to p^this (prop21, prop22, oracle)
        #[arg(long, default_value_t = 4)]
        max_order_exp: usize,
        /// random module count (herbrand)
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// random seed (herbrand)
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// worker threads for the suite fan-out (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        /// largest group order fed to the cocycle elimination
        #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
        brute_cap: usize,
        #[arg(long)]
        timings: bool,
    },
    /// Decide the finiteness verdict from signed ranks and arithmetic flags
    Verdict {
        #[arg(long)]
        d_plus: usize,
        #[arg(long, default_value_t = 0)]
        d_minus: usize,
        /// whether the p-th roots of unity lie in the base field
        #[arg(long, action = ArgAction::Set)]
        mu_p: bool,
        /// required exactly when d-plus = 1 and mu-p is true
        #[arg(long, action = ArgAction::Set)]
        first_layer_unramified: Option<bool>,
        #[arg(long, action = ArgAction::Set)]
        mu_invariant_zero: Option<bool>,
        /// the tower layer is past the stabilization point
        #[arg(long, action = ArgAction::Set)]
        n_large: Option<bool>,
        /// relax the ramification set instead of the field (reported only)
        #[arg(long)]
        s_variant: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteName {
    Kunneth,
    Prop21,
    Prop22,
    Oracle,
    Herbrand,
}

/// Everything that ends the process with exit code 2.
#[derive(Debug)]
pub struct CmdError(pub String);

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CmdError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, CmdError> {
    Err(CmdError(msg.into()))
}

macro_rules! from_error {
    ($ty:ty) => {
        impl From<$ty> for CmdError {
            fn from(e: $ty) -> Self {
                CmdError(e.to_string())
            }
        }
    };
}

from_error!(propp_core::pc::PcError);
from_error!(propp_core::structure::StructureError);
from_error!(propp_core::involution::InvolutionError);
from_error!(propp_core::cohomology::CohomologyError);
from_error!(propp_core::corpus::CorpusError);
from_error!(propp_core::suites::SuiteError);

struct Timer {
    enabled: bool,
    start: Instant,
    last: Instant,
    marks: BTreeMap<String, u64>,
}

impl Timer {
    fn new(enabled: bool) -> Self {
        let now = Instant::now();
        Timer { enabled, start: now, last: now, marks: BTreeMap::new() }
    }

    fn mark(&mut self, name: &str) {
        if self.enabled {
            let now = Instant::now();
            self.marks.insert(name.to_string(), (now - self.last).as_millis() as u64);
            self.last = now;
        }
    }

    fn finish(mut self) -> Option<BTreeMap<String, u64>> {
        if self.enabled {
            self.marks
                .insert("total".to_string(), (Instant::now() - self.start).as_millis() as u64);
            Some(self.marks)
        } else {
            None
        }
    }
}

fn table_cap(p: u32, flag: Option<u64>) -> Result<u128, CmdError> {
    if let Some(v) = flag {
        return Ok(v as u128);
    }
    match std::env::var(TABLE_CAP_ENV) {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(v) => Ok(v as u128),
            Err(_) => fail(format!("{} must be an integer, got '{}'", TABLE_CAP_ENV, s)),
        },
        Err(_) => Ok((p as u128).pow(7)),
    }
}

struct LoadedGroup {
    parsed: ParsedFile,
    table: GroupTable,
    structure: StructureReport,
    action: Option<InvolutionAction>,
    cap_used: u64,
}

fn load_group(
    file: &Path,
    max_table: Option<u64>,
    timer: &mut Timer,
) -> Result<LoadedGroup, CmdError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CmdError(format!("cannot read {}: {}", file.display(), e)))?;
    let parsed = parse_presentation(&text)
        .map_err(|e| CmdError(format!("{}: {}", file.display(), e)))?;
    timer.mark("parse");
    parsed
        .pres
        .consistency_check()
        .map_err(|e| CmdError(format!("{}: {}", file.display(), e)))?;
    let cap = table_cap(parsed.pres.p(), max_table)?;
    let table = parsed.pres.build_table(cap)?;
    timer.mark("table");
    let structure = structure_report(&table)?;
    timer.mark("structure");
    let action = match &parsed.sigma {
        Some(images) => {
            let act = validate_involution(&parsed.pres, images, &table)
                .map_err(|e| CmdError(format!("{}: invalid sigma: {}", file.display(), e)))?;
            timer.mark("involution");
            Some(act)
        }
        None => None,
    };
    Ok(LoadedGroup { parsed, table, structure, action, cap_used: cap as u64 })
}

fn echo_of(g: &LoadedGroup) -> Echo {
    Echo {
        presentation: suites::presentation_text(&g.parsed.pres),
        sigma: g.parsed.sigma.as_ref().map(|im| suites::sigma_text(im)),
    }
}

fn structure_block_of(g: &LoadedGroup) -> StructureBlock {
    StructureBlock {
        order: g.structure.order,
        d: g.structure.generator_rank,
        d_plus: g.action.as_ref().map(|a| a.d_plus),
        d_minus: g.action.as_ref().map(|a| a.d_minus),
        powerful: g.structure.powerful,
        layer_ranks: g.structure.layer_ranks.clone(),
        abelian: g.structure.abelian,
        exponent: g.structure.exponent,
        frattini_order: g.structure.frattini_order,
    }
}

pub struct Outcome {
    pub report: JsonReport,
    pub exit: i32,
}

pub fn execute(cli: Cli) -> Result<Outcome, CmdError> {
    match cli.command {
        Command::Classify { file, max_table, timings } => {
            let mut timer = Timer::new(timings);
            let g = load_group(&file, max_table, &mut timer)?;
            let meta = MetaBlock {
                p: Some(g.parsed.pres.p()),
                max_table: Some(g.cap_used),
                brute_cap: None,
                seed: None,
                timings_ms: timer.finish(),
            };
            let mut rep = JsonReport::new("classify", meta);
            rep.echo = Some(echo_of(&g));
            rep.structure = Some(structure_block_of(&g));
            Ok(Outcome { report: rep, exit: 0 })
        }
        Command::Cohomology { file, max_order, max_table, timings } => {
            let mut timer = Timer::new(timings);
            let g = load_group(&file, max_table, &mut timer)?;
            let comp = h2_compute(&g.table, max_order)?;
            let d = g.structure.generator_rank;
            if comp.h2 < d {
                return fail(format!(
                    "internal inconsistency: h2 = {} smaller than d = {}",
                    comp.h2, d
                ));
            }
            let split = match &g.action {
                Some(act) => {
                    let h2s = h2_eigensplit(&g.table, act, &comp)?;
                    let qp = h2_qpzp_dims(h2s, Dims::new(act.d_plus, act.d_minus))?;
                    Some((h2s, qp, act.d_plus, act.d_minus))
                }
                None => None,
            };
            timer.mark("cohomology");
            let block = CohomologyBlock {
                h1: d,
                h1_plus: split.map(|(_, _, dp, _)| dp),
                h1_minus: split.map(|(_, _, _, dm)| dm),
                h2: comp.h2,
                h2_plus: split.map(|(h, _, _, _)| h.plus),
                h2_minus: split.map(|(h, _, _, _)| h.minus),
                p_h2_qpzp: comp.h2 - d,
                p_h2_qpzp_plus: split.map(|(_, q, _, _)| q.plus),
                p_h2_qpzp_minus: split.map(|(_, q, _, _)| q.minus),
            };
            let meta = MetaBlock {
                p: Some(g.parsed.pres.p()),
                max_table: Some(g.cap_used),
                brute_cap: Some(max_order),
                seed: None,
                timings_ms: timer.finish(),
            };
            let mut rep = JsonReport::new("cohomology", meta);
            rep.echo = Some(echo_of(&g));
            rep.structure = Some(structure_block_of(&g));
            rep.cohomology = Some(block);
            Ok(Outcome { report: rep, exit: 0 })
        }
        Command::Verify {
            suite,
            p,
            max_rank,
            max_order_exp,
            samples,
            seed,
            jobs,
            brute_cap,
            timings,
        } => {
            if !is_odd_prime(p) {
                return fail(format!("p must be odd (and prime), got {}", p));
            }
            let mut timer = Timer::new(timings);
            let spec = CorpusSpec { p, max_order_exponent: max_order_exp, ..CorpusSpec::default() };
            let run_suite = || -> Result<suites::SuiteOutcome, suites::SuiteError> {
                match suite {
                    SuiteName::Kunneth => suites::run_kunneth(p, max_rank, brute_cap),
                    SuiteName::Prop21 => suites::run_prop21(&spec),
                    SuiteName::Prop22 => suites::run_prop22(&spec, brute_cap),
                    SuiteName::Oracle => suites::run_oracle(&spec),
                    SuiteName::Herbrand => suites::run_herbrand(samples, seed, p),
                }
            };
            let outcome = match jobs {
                Some(n) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(n.max(1))
                        .build()
                        .map_err(|e| CmdError(format!("cannot build thread pool: {}", e)))?;
                    pool.install(run_suite)?
                }
                None => run_suite()?,
            };
            timer.mark("suite");
            let exit = if outcome.passed { 0 } else { 1 };
            let meta = MetaBlock {
                p: Some(p),
                max_table: None,
                brute_cap: match suite {
                    SuiteName::Kunneth | SuiteName::Prop22 => Some(brute_cap),
                    _ => None,
                },
                seed: match suite {
                    SuiteName::Herbrand => Some(seed),
                    _ => None,
                },
                timings_ms: timer.finish(),
            };
            let mut rep = JsonReport::new("verify", meta);
            rep.suite = Some(outcome);
            Ok(Outcome { report: rep, exit })
        }
        Command::Verdict {
            d_plus,
            d_minus,
            mu_p,
            first_layer_unramified,
            mu_invariant_zero,
            n_large,
            s_variant,
        } => {
            let consulted = d_plus == 1 && mu_p;
            if consulted && first_layer_unramified.is_none() {
                return fail(
                    "--first-layer-unramified is required when --d-plus is 1 and --mu-p is true",
                );
            }
            let input = FmInput {
                d_plus,
                d_minus,
                mu_p_in_k: mu_p,
                first_layer_unramified: first_layer_unramified.unwrap_or(true),
                mu_invariant_zero,
                n_at_least_n0: n_large,
                s_variant,
            };
            let verdict = fm_verdict(&input);
            let meta = MetaBlock {
                p: None,
                max_table: None,
                brute_cap: None,
                seed: None,
                timings_ms: None,
            };
            let mut rep = JsonReport::new("verdict", meta);
            rep.verdict = Some(verdict);
            Ok(Outcome { report: rep, exit: 0 })
        }
    }
}

/// Print the report (stdout) or the diagnostic (stderr) and return the exit
/// code for the process.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(outcome) => {
            println!("{}", outcome.report.to_json());
            outcome.exit
        }
        Err(e) => {
            eprintln!("error: {}", e);
            2
        }
    }
}
