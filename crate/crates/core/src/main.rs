use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use welltris::error::{Error, Result};
use welltris::estimator::{estimate_join_size, sample_join_rows, EstimatorConfig};
use welltris::gapbox::construct_gap_boxes;
use welltris::geom::Point;
use welltris::ingest::{build_encoding, encode_relation, DomainEncoding, RawTable};
use welltris::oracle::exact_join;
use welltris::trie::GapBoxIndex;

#[derive(Parser)]
#[command(name = "welltris", version, about = "Join-size estimation from gap-box indexes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a gap-box index from CSV tables.
    Preprocess {
        /// Input CSV files, one table each.
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Index output path; the value dictionary lands beside it with an
        /// extra .enc suffix.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the join size from an index; prints one JSON line.
    Estimate {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw uniform join rows from an index; prints CSV.
    Sample {
        #[arg(long)]
        index: PathBuf,
        /// Number of rows to draw.
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute the exact join size by brute force (small inputs only).
    Exact {
        /// Input CSV files, one table each.
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Print the join rows as CSV instead of the size.
        #[arg(long)]
        rows: bool,
    },
}

#[derive(Serialize)]
struct EstimateReport {
    estimate: u128,
    epsilon: f64,
    delta: f64,
    seed: u64,
    iterations: usize,
    #[serde(rename = "boxes_in_E")]
    boxes_in_e: usize,
    samples_drawn: usize,
    k_used: usize,
    wall_ms: u128,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.cmd) {
        eprintln!("error: {e}");
        let code = match e {
            Error::EmptyJoin => 3,
            Error::OracleGuard(_) => 4,
            _ => 2,
        };
        std::process::exit(code);
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Preprocess { csv, out } => cmd_preprocess(&csv, &out),
        Cmd::Estimate { index, epsilon, delta, seed } => cmd_estimate(&index, epsilon, delta, seed),
        Cmd::Sample { index, q, seed } => cmd_sample(&index, q, seed),
        Cmd::Exact { csv, rows } => cmd_exact(&csv, rows),
    }
}

fn encoding_path(index_path: &Path) -> PathBuf {
    let mut p = index_path.as_os_str().to_owned();
    p.push(".enc");
    PathBuf::from(p)
}

fn load_tables(paths: &[PathBuf]) -> Result<Vec<RawTable>> {
    paths.iter().map(|p| RawTable::from_path(p)).collect()
}

fn cmd_preprocess(csv: &[PathBuf], out: &Path) -> Result<()> {
    let tables = load_tables(csv)?;
    let (schema, enc) = build_encoding(&tables)?;
    let boxes: Vec<_> = tables
        .iter()
        .map(|t| Ok(construct_gap_boxes(&encode_relation(t, &schema, &enc)?)))
        .collect::<Result<Vec<_>>>()?;
    let index = GapBoxIndex::build(&schema, &boxes)?;
    fs::write(out, index.render())?;
    fs::write(encoding_path(out), enc.render())?;
    eprintln!(
        "indexed {} tables, {} boxes, d={} L={}",
        index.tables().len(),
        index.total_boxes(),
        index.arity(),
        index.bits()
    );
    Ok(())
}

fn cmd_estimate(index_path: &Path, epsilon: f64, delta: f64, seed: u64) -> Result<()> {
    let index = GapBoxIndex::parse(&fs::read_to_string(index_path)?)?;
    let cfg = EstimatorConfig::new(epsilon, delta, seed)?;
    let start = Instant::now();
    let est = estimate_join_size(&index, &cfg)?;
    let report = EstimateReport {
        estimate: est.value,
        epsilon: est.epsilon,
        delta: est.delta,
        seed: est.seed,
        iterations: est.iterations,
        boxes_in_e: est.boxes_in_e,
        samples_drawn: est.samples_drawn,
        k_used: est.k_used,
        wall_ms: start.elapsed().as_millis(),
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

fn cmd_sample(index_path: &Path, q: usize, seed: u64) -> Result<()> {
    let index = GapBoxIndex::parse(&fs::read_to_string(index_path)?)?;
    let enc = DomainEncoding::parse(&fs::read_to_string(encoding_path(index_path))?)?;
    if enc.attributes().len() != index.arity() {
        return Err(Error::Index(
            "index and value dictionary disagree on the attribute count".into(),
        ));
    }
    let cfg = EstimatorConfig::new(0.5, 0.1, seed)?;
    let rows = sample_join_rows(&index, q, &cfg)?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "{}", enc.attributes().join(","))?;
    for row in rows {
        writeln!(w, "{}", decode_row(&enc, &row)?)?;
    }
    Ok(())
}

fn cmd_exact(csv: &[PathBuf], rows: bool) -> Result<()> {
    let tables = load_tables(csv)?;
    let (schema, enc) = build_encoding(&tables)?;
    let relations = tables
        .iter()
        .map(|t| encode_relation(t, &schema, &enc))
        .collect::<Result<Vec<_>>>()?;
    let join = exact_join(&relations, &schema)?;
    if rows {
        let stdout = std::io::stdout();
        let mut w = stdout.lock();
        writeln!(w, "{}", enc.attributes().join(","))?;
        for row in &join {
            writeln!(w, "{}", decode_row(&enc, row)?)?;
        }
    } else {
        println!("{}", join.len());
    }
    Ok(())
}

fn decode_row(enc: &DomainEncoding, p: &Point) -> Result<String> {
    let fields = p
        .coords
        .iter()
        .enumerate()
        .map(|(attr, &code)| {
            enc.decode(attr, code).map(str::to_owned).ok_or_else(|| {
                Error::Index(format!(
                    "code {code} has no value for attribute {}; index and dictionary do not match",
                    attr
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fields.join(","))
}
