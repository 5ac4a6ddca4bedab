//! The `fisher-gadgets` command line.
//!
//! Exit codes: 0 success or pass, 1 verified failure (report still written),
//! 2 usage or I/O error, 3 precondition error. Errors are a single JSON
//! object on stderr. Files land in `--out DIR` via temp file and rename;
//! without `--out` the primary document goes to stdout.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::market::io::{
    allocation_from_json, allocation_to_json, exchange_to_json, market_from_json, market_to_json, prices_from_json,
    prices_to_json, DocError,
};
use crate::market::{to_exchange, verify_fisher, FisherMarket, MarketError, PriceVector};
use crate::purecircuit::{
    all_satisfied, assignment_from_json, assignment_to_json, check_assignment, parse_circuit, validate, Assignment,
    CircuitInstance,
};
use crate::rational::Rational;
use crate::reduction::{compile_selected, decode, describe, meta, Override, ReductionError};
use crate::solver::lab::{run_lab, DEFAULT_MESH};
use crate::solver::{canonical_demand, grid_search, lemma_suite, tatonnement, write_trace_csv, SolverConfig, SolverError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fisher-gadgets", version, about = "Compile Pure-Circuit instances to SPLC Fisher markets and check equilibria")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Exact rational; decimals are rejected.
fn rational_arg(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| format!("{e}; write ε and step sizes as p/q"))
}

#[derive(Debug, Clone, Copy, Args)]
pub struct OverrideArgs {
    /// Number of copies; voids the construction's guarantees.
    #[arg(long, requires = "override_d")]
    pub override_k: Option<u64>,
    /// Chain length (even); voids the construction's guarantees.
    #[arg(long, requires = "override_k")]
    pub override_d: Option<u64>,
}

impl OverrideArgs {
    fn get(self) -> Option<Override> {
        match (self.override_k, self.override_d) {
            (Some(k), Some(d)) => Some(Override { k, d }),
            _ => None,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// .pc circuit → market.json + meta.json
    Compile {
        circuit: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        eps: Rational,
        #[command(flatten)]
        over: OverrideArgs,
        /// Compile only these copies (comma separated, increasing).
        #[arg(long, value_delimiter = ',')]
        copies: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// market + prices + allocation → equilibrium report
    Verify {
        market: PathBuf,
        prices: PathBuf,
        allocation: PathBuf,
        #[arg(long, value_parser = rational_arg, default_value = "0")]
        eps: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// market → prices.json, allocation.json and trace.csv
    Solve {
        market: PathBuf,
        #[arg(long, value_parser = rational_arg, default_value = "1/12")]
        eps: Rational,
        #[arg(long, default_value_t = 1000)]
        max_iters: u64,
        #[arg(long, value_parser = rational_arg, default_value = "1/2")]
        lambda: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "1/1000000000")]
        floor: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        restarts: u32,
        #[arg(long, default_value_t = 64)]
        precision_bits: u32,
        /// Grid values; switches from tâtonnement to the grid oracle.
        #[arg(long, value_delimiter = ',', value_parser = rational_arg)]
        grid: Option<Vec<Rational>>,
        /// Goods searched by the grid oracle (all goods when there are at most 3).
        #[arg(long, value_delimiter = ',', requires = "grid")]
        free: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// meta + prices → decoded assignment
    Decode {
        meta: PathBuf,
        prices: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// meta + market + prices + allocation → lemma report
    Lemmas {
        meta: PathBuf,
        market: PathBuf,
        prices: PathBuf,
        allocation: PathBuf,
        /// Defaults to the ε recorded in the metadata.
        #[arg(long, value_parser = rational_arg)]
        eps: Option<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fisher market.json → exchange.json
    ToExchange {
        market: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// NOT and NAND truth tables and the PURIFY sweep on compiled fixtures
    GadgetLab {
        #[arg(long, value_parser = rational_arg, default_value = "1/12")]
        eps: Rational,
        #[command(flatten)]
        over: OverrideArgs,
        #[arg(long, default_value_t = DEFAULT_MESH)]
        mesh: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// .pc circuit + assignment → per-gate verdicts
    CircuitCheck {
        circuit: PathBuf,
        assignment: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn usage(kind: &'static str, message: impl ToString) -> Self {
        CliError { code: EXIT_USAGE, kind, message: message.to_string() }
    }

    fn precondition(message: impl ToString) -> Self {
        CliError { code: EXIT_PRECONDITION, kind: "precondition", message: message.to_string() }
    }
}

impl From<DocError> for CliError {
    fn from(e: DocError) -> Self {
        CliError::usage("input", e)
    }
}

impl From<MarketError> for CliError {
    fn from(e: MarketError) -> Self {
        CliError::usage("input", e)
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Meta(_) | ReductionError::PriceDimension { .. } | ReductionError::CopySelection => {
                CliError::usage("input", e)
            }
            _ => CliError::precondition(e),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Reduction(r) => r.into(),
            SolverError::Market(m) => m.into(),
            SolverError::Config(_) | SolverError::PriceDimension { .. } => CliError::usage("usage", e),
            _ => CliError::precondition(e),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage("io", format!("{}: {e}", path.display())))
}

/// Writes through a temp file in the target directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::usage("io", format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    // temp files are created 0600
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

struct Io<'a> {
    stdout: &'a mut dyn Write,
}

impl Io<'_> {
    /// The primary document: `DIR/name` with `--out`, stdout otherwise.
    fn emit(&mut self, out: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
        match out {
            Some(dir) => write_atomic(&dir.join(name), text.as_bytes()),
            None => self.print(text),
        }
    }

    fn print(&mut self, text: &str) -> Result<(), CliError> {
        self.stdout.write_all(text.as_bytes()).map_err(|e| CliError::usage("io", format!("stdout: {e}")))
    }
}

fn load_market(path: &Path) -> Result<FisherMarket, CliError> {
    Ok(market_from_json(&read(path)?)?)
}

fn load_circuit(path: &Path) -> Result<CircuitInstance, CliError> {
    parse_circuit(&read(path)?).map_err(|e| CliError::usage("input", format!("{}: {e}", path.display())))
}

fn buyer_ids(market: &FisherMarket) -> Vec<&str> {
    market.buyers().iter().map(|b| b.id()).collect()
}

fn verdict_code(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

/// Accepts a bare assignment object or a decode document holding one.
fn load_assignment(path: &Path) -> Result<Assignment, CliError> {
    let text = read(path)?;
    let bad = |e: String| CliError::usage("input", format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let inner = match value.get("assignment") {
        Some(a) => a.to_string(),
        None => text,
    };
    assignment_from_json(&inner).map_err(|e| bad(e.to_string()))
}

fn execute(cmd: Command, io: &mut Io<'_>) -> Result<i32, CliError> {
    match cmd {
        Command::Compile { circuit, eps, over, copies, out } => {
            let c = load_circuit(&circuit)?;
            let reduced = compile_selected(&c, &eps, over.get(), copies.as_deref())?;
            write_atomic(&out.join("market.json"), market_to_json(&reduced.market).as_bytes())?;
            write_atomic(&out.join("meta.json"), meta::meta_to_json(&reduced).as_bytes())?;
            io.print(&describe(&reduced).to_string())?;
            Ok(EXIT_OK)
        }
        Command::Verify { market, prices, allocation, eps, out } => {
            let m = load_market(&market)?;
            let p = prices_from_json(m.goods(), &read(&prices)?)?;
            let a = allocation_from_json(m.goods(), &buyer_ids(&m), &read(&allocation)?)?;
            let report = verify_fisher(&m, &p, &a, &eps)?;
            io.emit(out.as_deref(), "report.json", &json_text(&report))?;
            Ok(verdict_code(report.pass))
        }
        Command::Solve { market, eps, max_iters, lambda, floor, seed, restarts, precision_bits, grid, free, out } => {
            let m = load_market(&market)?;
            let ids = buyer_ids(&m);
            if let Some(grid) = grid {
                let free: Vec<usize> = match free {
                    Some(names) => names
                        .iter()
                        .map(|g| m.good_index(g).ok_or_else(|| CliError::usage("usage", format!("unknown good {g}"))))
                        .collect::<Result<_, _>>()?,
                    None if m.goods().len() <= 3 => (0..m.goods().len()).collect(),
                    None => return Err(CliError::usage("usage", "--free is required for markets with more than 3 goods")),
                };
                let pinned = PriceVector::uniform(m.goods().len(), Rational::one());
                let hit = grid_search(&m, &eps, &pinned, &free, &grid)?;
                let found = hit.is_some();
                if let Some(h) = &hit {
                    write_atomic(&out.join("prices.json"), prices_to_json(m.goods(), &h.prices).as_bytes())?;
                    write_atomic(&out.join("allocation.json"), allocation_to_json(m.goods(), &ids, &h.allocation).as_bytes())?;
                }
                io.print(&json_text(&json!({ "method": "grid", "found": found, "grid_points": grid.len(), "free_goods": free.len() })))?;
                return Ok(verdict_code(found));
            }
            let config = SolverConfig { lambda, max_iters, epsilon: eps, floor, seed, restarts, precision_bits };
            let result = tatonnement(&m, &config)?;
            let bundles = canonical_demand(&m, &result.prices)?.bundles;
            write_atomic(&out.join("prices.json"), prices_to_json(m.goods(), &result.prices).as_bytes())?;
            write_atomic(&out.join("allocation.json"), allocation_to_json(m.goods(), &ids, &bundles).as_bytes())?;
            let mut csv = Vec::new();
            write_trace_csv(&result.trace, restarts > 0, &mut csv).map_err(|e| CliError::usage("io", e))?;
            write_atomic(&out.join("trace.csv"), &csv)?;
            let last = result.trace.last().expect("trace has the starting point");
            io.print(&json_text(&json!({
                "method": "tatonnement",
                "converged": result.converged,
                "iterations": result.iterations,
                "final_max_abs_slack": last.max_abs_slack,
            })))?;
            Ok(verdict_code(result.converged))
        }
        Command::Decode { meta: meta_path, prices, out } => {
            let reduced = meta::from_meta(&read(&meta_path)?)?;
            let p = prices_from_json(reduced.market.goods(), &read(&prices)?)?;
            let d = decode(&reduced, &p)?;
            let assignment: serde_json::Value =
                serde_json::from_str(&assignment_to_json(&d.assignment)).expect("assignment is JSON");
            let doc = json!({ "copy": d.copy, "H": d.h, "L": d.l, "assignment": assignment });
            io.emit(out.as_deref(), "assignment.json", &json_text(&doc))?;
            Ok(EXIT_OK)
        }
        Command::Lemmas { meta: meta_path, market, prices, allocation, eps, out } => {
            let m = load_market(&market)?;
            let reduced = meta::from_parts(m, &read(&meta_path)?)?;
            let goods = reduced.market.goods();
            let p = prices_from_json(goods, &read(&prices)?)?;
            let a = allocation_from_json(goods, &buyer_ids(&reduced.market), &read(&allocation)?)?;
            let eps = eps.unwrap_or_else(|| reduced.params.epsilon.clone());
            let report = lemma_suite(&reduced, &p, &a, &eps)?;
            io.emit(out.as_deref(), "lemmas.json", &json_text(&report))?;
            Ok(verdict_code(report.pass))
        }
        Command::ToExchange { market, out } => {
            let m = load_market(&market)?;
            io.emit(out.as_deref(), "exchange.json", &exchange_to_json(&to_exchange(&m)))?;
            Ok(EXIT_OK)
        }
        Command::GadgetLab { eps, over, mesh, out } => {
            let summary = run_lab(&eps, over.get(), mesh)?;
            io.emit(out.as_deref(), "gadget-lab.json", &json_text(&summary))?;
            Ok(verdict_code(summary.pass))
        }
        Command::CircuitCheck { circuit, assignment, out } => {
            let c = load_circuit(&circuit)?;
            let a = load_assignment(&assignment)?;
            let verdicts = check_assignment(&c, &a).map_err(|e| CliError::usage("input", e))?;
            let satisfied = all_satisfied(&verdicts);
            let doc = json!({ "satisfied": satisfied, "verdicts": verdicts, "warnings": validate(&c) });
            io.emit(out.as_deref(), "verdicts.json", &json_text(&doc))?;
            Ok(verdict_code(satisfied))
        }
    }
}

/// Parses `args` (program name first) and runs one subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            report(stderr, &CliError::usage("usage", e.render().to_string().trim_end()));
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, &mut Io { stdout }) {
        Ok(code) => code,
        Err(e) => {
            report(stderr, &e);
            e.code
        }
    }
}

fn report(stderr: &mut dyn Write, e: &CliError) {
    let doc = json!({ "error": e.kind, "message": e.message, "exit_code": e.code });
    let _ = writeln!(stderr, "{doc}");
}
