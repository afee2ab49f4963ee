//! Command-line front end: framework documents, SVG drawings and the `urigid`
//! subcommands.
//!
//! Exit codes are 0 on success, 1 when the mathematics says no (not
//! certified, too few shared vertices, degenerate input geometry) and 2 when
//! the input cannot be read or parsed.

pub mod document;
pub mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use urigid_core::{
    attach, certify_universal_rigidity, edge_reduced_stress, generate_lateration,
    reflection_counterexample, AttachmentSpec, Certificate, Edge, EdgeReduction, LaterationPlan,
    Tolerances,
};

use crate::document::{Document, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] urigid_core::Error),
    #[error("not certified: {0}")]
    NotCertified(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::NotCertified(_) | CliError::Failed(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "urigid",
    version,
    about = "Universal rigidity certificates for bar-joint frameworks"
)]
pub struct Cli {
    /// Relative threshold below which eigenvalues and singular values count as zero.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_zero: f64,
    /// Absolute tolerance for geometric residuals.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_geom: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a framework and its stress block for a universal rigidity certificate.
    Certify { input: PathBuf },
    /// Attach two certified frameworks and synthesize the stress of the result.
    Attach(AttachArgs),
    /// Generate a random lateration framework with a certified stress.
    Gen(GenArgs),
    /// Reflect one side of an attachment on at most d shared vertices.
    Counterexample(CounterexampleArgs),
    /// Draw a planar framework as SVG.
    Plot {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the dimension of the nontrivial infinitesimal flex space.
    Flex { input: PathBuf },
    /// Check whether the configuration is in general position.
    Genpos { input: PathBuf },
}

#[derive(Debug, Args)]
pub struct AttachArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Shared vertices as `a:b` label pairs, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, required = true)]
    pub share: Vec<(usize, usize)>,
    /// Edges `i-j` to remove, in the labels of the output (shared vertices keep A's labels).
    #[arg(long, value_delimiter = ',', value_parser = parse_edge)]
    pub reduce: Vec<(usize, usize)>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub v: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, required = true)]
    pub share: Vec<(usize, usize)>,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn parse_label(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(format!("`{s}` is not a vertex label")),
    }
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `a:b`, found `{s}`"))?;
    Ok((parse_label(a)?, parse_label(b)?))
}

fn parse_edge(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| format!("expected `i-j`, found `{s}`"))?;
    Ok((parse_label(a)?, parse_label(b)?))
}

pub fn read_document(path: &Path) -> Result<Document> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    document::parse(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_stress(doc: &Document, path: &Path) -> Result<urigid_core::StressMatrix> {
    doc.stress
        .clone()
        .ok_or_else(|| CliError::Usage(format!("{}: no [stress] block", path.display())))
}

/// Converts 1-based label pairs to 0-based indices, checking ranges.
fn spec_from_labels(pairs: &[(usize, usize)], va: usize, vb: usize) -> Result<AttachmentSpec> {
    for &(a, b) in pairs {
        if a > va || b > vb {
            return Err(CliError::Usage(format!(
                "shared pair {a}:{b} is out of range"
            )));
        }
    }
    AttachmentSpec::new(pairs.iter().map(|&(a, b)| (a - 1, b - 1)).collect())
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |x| format!("{x:.6e}"))
}

fn write_certificate(out: &mut dyn Write, cert: &Certificate, d: usize) -> std::io::Result<()> {
    let verdict = if cert.is_certified() {
        "certified"
    } else {
        "not certified"
    };
    writeln!(out, "verdict: {verdict}")?;
    writeln!(out, "min eigenvalue: {}", fmt_opt(cert.min_eigenvalue()))?;
    writeln!(out, "max eigenvalue: {}", fmt_opt(cert.max_eigenvalue()))?;
    writeln!(out, "nullity: {} (required {})", cert.nullity, d + 1)?;
    writeln!(
        out,
        "tolerances: zero_rel={:e} geom_abs={:e}",
        cert.tolerances.zero_rel(),
        cert.tolerances.geom_abs()
    )?;
    writeln!(out, "reasons: {}", cert.reasons_summary())
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let tol =
        Tolerances::new(cli.tol_zero, cli.tol_geom).map_err(|e| CliError::Usage(e.to_string()))?;
    match &cli.command {
        Command::Certify { input } => certify(input, &tol, out),
        Command::Attach(args) => attach_cmd(args, &tol, out),
        Command::Gen(args) => gen(args, &tol, out),
        Command::Counterexample(args) => counterexample(args, &tol, out),
        Command::Plot { input, output } => plot(input, output),
        Command::Flex { input } => {
            let doc = read_document(input)?;
            let flexes = doc.framework.nontrivial_flex_space(&tol)?;
            writeln!(out, "nontrivial flex dimension: {}", flexes.ncols()).map_err(stdout_err)
        }
        Command::Genpos { input } => {
            let doc = read_document(input)?;
            let ok = doc.framework.config().is_general_position(&tol);
            writeln!(out, "general position: {}", if ok { "yes" } else { "no" })
                .map_err(stdout_err)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Failed(
                    "configuration is not in general position".into(),
                ))
            }
        }
    }
}

fn certify(input: &Path, tol: &Tolerances, out: &mut dyn Write) -> Result<()> {
    let doc = read_document(input)?;
    let sm = require_stress(&doc, input)?;
    let cert = certify_universal_rigidity(&doc.framework, &sm, tol)?;
    write_certificate(out, &cert, doc.framework.dim()).map_err(stdout_err)?;
    if cert.is_certified() {
        Ok(())
    } else {
        Err(CliError::NotCertified(cert.reasons_summary()))
    }
}

fn attach_cmd(args: &AttachArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<()> {
    let doc_a = read_document(&args.a)?;
    let doc_b = read_document(&args.b)?;
    let sm_a = require_stress(&doc_a, &args.a)?;
    let sm_b = require_stress(&doc_b, &args.b)?;
    let spec = spec_from_labels(
        &args.share,
        doc_a.framework.vertex_count(),
        doc_b.framework.vertex_count(),
    )?;
    let att = attach(&doc_a.framework, &doc_b.framework, &spec, tol)?;
    let v = att.framework.vertex_count();
    let mut removed = Vec::with_capacity(args.reduce.len());
    for &(i, j) in &args.reduce {
        if i > v || j > v || i == j {
            return Err(CliError::Usage(format!(
                "edge {i}-{j} is not valid in the attachment"
            )));
        }
        removed.push(Edge::new(i - 1, j - 1));
    }
    let reduced = edge_reduced_stress(&att, &sm_a, &sm_b, &EdgeReduction::new(removed), tol)?;
    let cert = certify_universal_rigidity(&reduced.framework, &reduced.stress, tol)?;
    writeln!(out, "c: {:.6e}", reduced.c).map_err(stdout_err)?;
    writeln!(
        out,
        "vertices: {}  edges: {}",
        v,
        reduced.framework.graph().edge_count()
    )
    .map_err(stdout_err)?;
    writeln!(out, "nullity: {}", cert.nullity).map_err(stdout_err)?;
    writeln!(out, "min eigenvalue: {}", fmt_opt(cert.min_eigenvalue())).map_err(stdout_err)?;
    if !cert.is_certified() {
        return Err(CliError::NotCertified(cert.reasons_summary()));
    }
    let doc = Document::new(reduced.framework)
        .with_stress(reduced.stress)
        .with_shared(att.shared.clone());
    write_file(&args.output, &document::serialize(&doc))
}

fn gen(args: &GenArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<()> {
    if args.d == 0 || args.v < args.d + 1 {
        return Err(CliError::Usage(format!(
            "need d >= 1 and v >= d+1, got d={} v={}",
            args.d, args.v
        )));
    }
    let plan = LaterationPlan::random(args.d, args.v, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (fw, sm) = generate_lateration(&plan, tol)?;
    writeln!(
        out,
        "vertices: {}  edges: {}",
        fw.vertex_count(),
        fw.graph().edge_count()
    )
    .map_err(stdout_err)?;
    write_file(
        &args.output,
        &document::serialize(&Document::new(fw).with_stress(sm)),
    )
}

fn counterexample(args: &CounterexampleArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<()> {
    let doc_a = read_document(&args.a)?;
    let doc_b = read_document(&args.b)?;
    let spec = spec_from_labels(
        &args.share,
        doc_a.framework.vertex_count(),
        doc_b.framework.vertex_count(),
    )?;
    let att = attach(&doc_a.framework, &doc_b.framework, &spec, tol)?;
    let reflected = reflection_counterexample(&att, tol)?;
    let edge_gap = att.framework.edge_length_discrepancy(&reflected);
    let gap = att.framework.pairwise_distance_discrepancy(&reflected);
    writeln!(out, "max edge length discrepancy: {edge_gap:.6e}").map_err(stdout_err)?;
    writeln!(out, "max pairwise distance discrepancy: {gap:.6e}").map_err(stdout_err)?;
    if gap <= tol.geom_abs() {
        return Err(CliError::Failed(
            "reflection did not change any distance".into(),
        ));
    }
    let doc = Document::new(reflected).with_shared(att.shared.clone());
    write_file(&args.output, &document::serialize(&doc))
}

fn plot(input: &Path, output: &Path) -> Result<()> {
    let doc = read_document(input)?;
    let d = doc.framework.dim();
    if d != 2 {
        return Err(CliError::Failed(format!(
            "can only plot planar frameworks, got dimension {d}"
        )));
    }
    write_file(output, &svg::render(&doc.framework, &doc.shared))
}
