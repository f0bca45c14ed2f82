//! `citenv` command line: one subcommand per stage plus `pipeline`.
//!
//! Stages communicate only through files in the output directory, so a
//! `pipeline` run and the same stages run one by one write identical bytes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{ConfigError, PipelineConfig, Settings};
use crate::dedup::{
    corrected_counts, detect_double_citations, overrepresentation_pct, share_table,
};
use crate::environment::{
    apply_corrected_counts, build_matrix, citation_threshold, impact_shares, parse_environment,
    parse_matrix, seed_citers, select_environment, write_environment, write_matrix, CitationMatrix,
};
use crate::export::{
    glyphs_from_layout, parse_table2, render_svg, write_pajek, write_reports, write_table2,
    PipelineOutputs,
};
use crate::factor::{
    assign_factors, correlation_matrix, principal_components, varimax, write_loadings,
    FactorAssignment, FactorSolution, VarimaxOptions,
};
use crate::ingest::{parse_link_table, parse_metadata, parse_reference_records, JournalId};
use crate::layout::{distances, kamada_kawai, parse_positions, write_positions};
use crate::network::{build_graph, cosine_matrix, parse_graph, set_groups, SimilarityGraph};

pub const TABLE2_FILE: &str = "table2.csv";
pub const ENVIRONMENT_FILE: &str = "environment.csv";
pub const MATRIX_FILE: &str = "matrix.csv";
pub const SHARES_FILE: &str = "shares.csv";
pub const TABLE3_FILE: &str = "table3.csv";
pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const POSITIONS_FILE: &str = "positions.csv";
pub const SVG_FILE: &str = "graph.svg";
pub const PAJEK_FILE: &str = "graph.net";

#[derive(Debug, Parser)]
#[command(
    name = "citenv",
    version,
    about = "Local citation environment of a journal: dedup, selection, factors, maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect double-citations in reference records; writes table2.csv
    Dedup(StageArgs),
    /// Select journals above the 1% threshold; writes environment.csv
    Env(StageArgs),
    /// Build the citation matrix and shares; writes matrix.csv, shares.csv
    Matrix(StageArgs),
    /// PCA + varimax of cited patterns; writes table3.csv
    Factors(StageArgs),
    /// Cosine similarity graph; writes nodes.csv, edges.csv
    Graph(StageArgs),
    /// Kamada-Kawai layout; writes positions.csv
    Layout(StageArgs),
    /// Draw the map; writes graph.svg, graph.net
    Render(StageArgs),
    /// Re-emit every CSV report from the stage files
    Report(StageArgs),
    /// Run all stages in order
    Pipeline(StageArgs),
}

impl Command {
    fn args(&self) -> &StageArgs {
        match self {
            Command::Dedup(a)
            | Command::Env(a)
            | Command::Matrix(a)
            | Command::Factors(a)
            | Command::Graph(a)
            | Command::Layout(a)
            | Command::Render(a)
            | Command::Report(a)
            | Command::Pipeline(a) => a,
        }
    }
}

/// Every config key as a flag. Flags win over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct StageArgs {
    /// TOML file with pipeline settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: current directory)
    #[arg(long = "out")]
    pub out_dir: Option<PathBuf>,
    /// Link table CSV: citing,cited,count
    #[arg(long)]
    pub links: Option<PathBuf>,
    /// Reference records TSV
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Journal metadata CSV (categories colour the map)
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Seed journal
    #[arg(long = "seed")]
    pub seed_journal: Option<String>,
    /// Total citations received by the seed
    #[arg(long = "total")]
    pub total_cites: Option<u64>,
    /// Self-citations of the seed
    #[arg(long = "self")]
    pub self_cites: Option<u64>,
    /// Name of the international edition
    #[arg(long)]
    pub intl_name: Option<String>,
    /// Name of the German edition
    #[arg(long)]
    pub german_name: Option<String>,
    /// Minimum cosine for an edge (0.2)
    #[arg(long)]
    pub cosine_cutoff: Option<f64>,
    /// Loading above which a journal joins a factor (0.4)
    #[arg(long)]
    pub loading_cutoff: Option<f64>,
    /// Keep within-journal citations in correlations and cosines
    #[arg(long)]
    pub include_diagonal: Option<bool>,
    /// Ignore double-citation correction when building the matrix
    #[arg(long)]
    pub raw_counts: bool,
    /// Desired edge length
    #[arg(long)]
    pub layout_length: Option<f64>,
    /// Spring constant
    #[arg(long)]
    pub layout_strength: Option<f64>,
    /// Stop when the largest gradient norm drops below this
    #[arg(long)]
    pub layout_eps: Option<f64>,
    /// Cap on node moves
    #[arg(long)]
    pub layout_max_moves: Option<usize>,
    /// Seed for the initial circle perturbation
    #[arg(long)]
    pub layout_seed: Option<u64>,
    /// hops | cosine
    #[arg(long)]
    pub distance_mode: Option<String>,
    /// Write loadings with a decimal comma
    #[arg(long)]
    pub decimal_comma: bool,
    /// Put total share on the horizontal radius
    #[arg(long)]
    pub swap_axes: bool,
}

impl StageArgs {
    fn as_config(&self) -> PipelineConfig {
        let flag = |b: bool| b.then_some(true);
        PipelineConfig {
            seed_journal: self.seed_journal.clone(),
            total_cites: self.total_cites,
            self_cites: self.self_cites,
            intl_name: self.intl_name.clone(),
            german_name: self.german_name.clone(),
            cosine_cutoff: self.cosine_cutoff,
            loading_cutoff: self.loading_cutoff,
            include_diagonal: self.include_diagonal,
            raw_counts: flag(self.raw_counts),
            links: self.links.clone(),
            records: self.records.clone(),
            metadata: self.metadata.clone(),
            out_dir: self.out_dir.clone(),
            layout_length: self.layout_length,
            layout_strength: self.layout_strength,
            layout_eps: self.layout_eps,
            layout_max_moves: self.layout_max_moves,
            layout_seed: self.layout_seed,
            distance_mode: self.distance_mode.clone(),
            decimal_comma: flag(self.decimal_comma),
            swap_axes: flag(self.swap_axes),
        }
    }

    pub fn settings(&self) -> Result<Settings, CliError> {
        let base = match &self.config {
            Some(path) => {
                let text = read(path)?;
                let dir = path.parent().unwrap_or(Path::new("."));
                PipelineConfig::parse(&text)?.relative_to(dir)
            }
            None => PipelineConfig::default(),
        };
        Ok(base.overlay(self.as_config()).resolve()?)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

fn invalid(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(format!("{context}: {e}"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: dir.join(name),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join(name), content).map_err(io)
}

fn require<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::Invalid(format!("missing {what}")))
}

/// Reads a stage file, naming the stage that should have produced it.
fn stage_input(s: &Settings, name: &str, stage: &str) -> Result<String, CliError> {
    let path = s.out_dir.join(name);
    if !path.exists() {
        return Err(CliError::Invalid(format!(
            "missing stage: {stage} ({} not found)",
            path.display()
        )));
    }
    read(&path)
}

fn summary(out: &mut dyn Write, line: String) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

pub fn stage_dedup(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let path = require(&s.records, "--records")?;
    let records = parse_reference_records(&read(path)?).map_err(|e| invalid("records", e))?;
    let pairs = detect_double_citations(&records, &s.editions).map_err(|e| invalid("dedup", e))?;
    let mut counts = corrected_counts(&records, &pairs, &s.editions);
    counts.sort_by(|a, b| {
        b.corrected
            .cmp(&a.corrected)
            .then_with(|| a.journal.cmp(&b.journal))
    });
    let table = share_table(&counts);
    write(&s.out_dir, TABLE2_FILE, &write_table2(&table))?;
    let over = overrepresentation_pct(pairs.len() as u64, table.total.sum)
        .map(|p| format!("{p:.2}"))
        .unwrap_or_else(|_| "n/a".into());
    summary(
        out,
        format!(
            "records={} doubles={} corrected={} overrepresentation={over}",
            records.len(),
            pairs.len(),
            table.total.corrected
        ),
    )
}

pub fn stage_env(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let links =
        parse_link_table(&read(require(&s.links, "--links")?)?).map_err(|e| invalid("links", e))?;
    let seed = require(&s.seed, "--seed")?;
    let total = *require(&s.total_cites, "--total")?;
    let own = *require(&s.self_cites, "--self")?;
    let threshold = citation_threshold(total, own).map_err(|e| invalid("threshold", e))?;
    let selected = select_environment(&links, seed, threshold).map_err(|e| invalid("env", e))?;
    let counts: Vec<(JournalId, u64)> = seed_citers(&links, seed)
        .into_iter()
        .filter(|(j, _)| selected.contains(j))
        .collect();
    write(&s.out_dir, ENVIRONMENT_FILE, &write_environment(&counts))?;
    summary(
        out,
        format!("threshold={threshold} selected={}", selected.len()),
    )
}

pub fn stage_matrix(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let mut links =
        parse_link_table(&read(require(&s.links, "--links")?)?).map_err(|e| invalid("links", e))?;
    let seed = require(&s.seed, "--seed")?;
    let env = parse_environment(&stage_input(s, ENVIRONMENT_FILE, "env")?)
        .map_err(|e| invalid(ENVIRONMENT_FILE, e))?;
    let corrected = s.records.is_some() && !s.raw_counts;
    if corrected {
        let counts = parse_table2(&stage_input(s, TABLE2_FILE, "dedup")?)
            .map_err(|e| invalid(TABLE2_FILE, e))?;
        links = apply_corrected_counts(&links, seed, &counts);
    }
    let journals: Vec<JournalId> = env.into_iter().map(|(j, _)| j).collect();
    let m = build_matrix(&links, &journals).map_err(|e| invalid("matrix", e))?;
    let shares = impact_shares(&m).map_err(|e| invalid("shares", e))?;
    write(&s.out_dir, MATRIX_FILE, &write_matrix(&m))?;
    write(
        &s.out_dir,
        SHARES_FILE,
        &crate::environment::write_shares(&shares),
    )?;
    summary(
        out,
        format!(
            "journals={} total={} counts={}",
            m.len(),
            m.grand_total(),
            if corrected { "corrected" } else { "raw" }
        ),
    )
}

fn load_matrix(s: &Settings) -> Result<CitationMatrix, CliError> {
    parse_matrix(&stage_input(s, MATRIX_FILE, "matrix")?).map_err(|e| invalid(MATRIX_FILE, e))
}

fn factor_solution(
    s: &Settings,
    m: &CitationMatrix,
) -> Result<(FactorSolution, Vec<FactorAssignment>), CliError> {
    let r = correlation_matrix(m, s.include_diagonal).map_err(|e| invalid("factors", e))?;
    let pcs = principal_components(&r).map_err(|e| invalid("factors", e))?;
    let rotated = varimax(&pcs, &VarimaxOptions::default());
    let assigned = assign_factors(&rotated.journals, &rotated.loadings, s.loading_cutoff)
        .map_err(|e| invalid("factors", e))?;
    Ok((rotated, assigned))
}

pub fn stage_factors(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let m = load_matrix(s)?;
    let (sol, assigned) = factor_solution(s, &m)?;
    if !sol.converged {
        eprintln!("warning: varimax stopped before converging");
    }
    write(
        &s.out_dir,
        TABLE3_FILE,
        &write_loadings(&sol, &assigned, s.report.decimal_comma),
    )?;
    let unassigned = assigned.iter().filter(|a| a.factors.is_empty()).count();
    summary(
        out,
        format!(
            "components={} explained={:.1}% converged={} unassigned={unassigned}",
            sol.factors(),
            sol.total_explained() * 100.0,
            sol.converged
        ),
    )
}

fn groups(s: &Settings) -> Result<BTreeMap<JournalId, String>, CliError> {
    let Some(path) = &s.metadata else {
        return Ok(BTreeMap::new());
    };
    let metas = parse_metadata(&read(path)?).map_err(|e| invalid("metadata", e))?;
    Ok(metas
        .into_iter()
        .map(|(j, m)| (j, m.categories.into_iter().collect::<Vec<_>>().join(";")))
        .collect())
}

fn similarity_graph(s: &Settings, m: &CitationMatrix) -> Result<SimilarityGraph, CliError> {
    let cos = cosine_matrix(m, s.include_diagonal).map_err(|e| invalid("graph", e))?;
    let shares = impact_shares(m).map_err(|e| invalid("graph", e))?;
    let mut g = build_graph(&cos, &shares, s.cosine_cutoff).map_err(|e| invalid("graph", e))?;
    set_groups(&mut g, &groups(s)?);
    Ok(g)
}

pub fn stage_graph(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let g = similarity_graph(s, &load_matrix(s)?)?;
    write(&s.out_dir, NODES_FILE, &crate::network::write_nodes(&g))?;
    write(&s.out_dir, EDGES_FILE, &crate::network::write_edges(&g))?;
    summary(
        out,
        format!(
            "nodes={} edges={} components={}",
            g.len(),
            g.edges.len(),
            g.components().len()
        ),
    )
}

fn load_graph(s: &Settings) -> Result<SimilarityGraph, CliError> {
    parse_graph(
        &stage_input(s, NODES_FILE, "graph")?,
        &stage_input(s, EDGES_FILE, "graph")?,
    )
    .map_err(|e| invalid("graph files", e))
}

fn load_positions(s: &Settings, g: &SimilarityGraph) -> Result<Vec<[f64; 2]>, CliError> {
    let rows = parse_positions(&stage_input(s, POSITIONS_FILE, "layout")?)
        .map_err(|e| invalid(POSITIONS_FILE, e))?;
    if rows.len() != g.len() || rows.iter().zip(&g.nodes).any(|((j, _), n)| j != &n.journal) {
        return Err(CliError::Invalid(format!(
            "{POSITIONS_FILE} does not list the graph's journals in order"
        )));
    }
    Ok(rows.into_iter().map(|(_, p)| p).collect())
}

pub fn stage_layout(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let g = load_graph(s)?;
    let d = distances(&g, s.distance_mode);
    let res = kamada_kawai(&d, &s.layout).map_err(|e| invalid("layout", e))?;
    if !res.converged {
        eprintln!("warning: layout stopped after {} moves", res.iterations);
    }
    let journals: Vec<JournalId> = g.nodes.iter().map(|n| n.journal.clone()).collect();
    write(
        &s.out_dir,
        POSITIONS_FILE,
        &write_positions(&journals, &res.positions),
    )?;
    summary(
        out,
        format!(
            "nodes={} moves={} energy={:.6} converged={}",
            g.len(),
            res.iterations,
            res.final_energy,
            res.converged
        ),
    )
}

pub fn stage_render(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let g = load_graph(s)?;
    let pos = load_positions(s, &g)?;
    let glyphs = glyphs_from_layout(&g, &pos, &s.glyphs).map_err(|e| invalid("render", e))?;
    write(
        &s.out_dir,
        SVG_FILE,
        &render_svg(&glyphs, &g.edges, &s.glyphs),
    )?;
    write(
        &s.out_dir,
        PAJEK_FILE,
        &write_pajek(&g, &pos).map_err(|e| invalid("render", e))?,
    )?;
    summary(out, format!("svg={SVG_FILE} net={PAJEK_FILE}"))
}

pub fn stage_report(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let counts = parse_table2(&stage_input(s, TABLE2_FILE, "dedup")?)
        .map_err(|e| invalid(TABLE2_FILE, e))?;
    let m = load_matrix(s)?;
    stage_input(s, TABLE3_FILE, "factors")?;
    let g = load_graph(s)?;
    let pos = load_positions(s, &g)?;
    let outputs = PipelineOutputs {
        table2: Some(share_table(&counts)),
        factors: Some(factor_solution(s, &m)?),
        shares: Some(impact_shares(&m).map_err(|e| invalid("shares", e))?),
        graph: Some(g),
        positions: Some(pos),
    };
    let files = write_reports(&outputs, &s.report).map_err(|e| invalid("report", e))?;
    for (name, content) in &files {
        write(&s.out_dir, name, content)?;
    }
    summary(out, format!("reports={}", files.len()))
}

/// All stages in order. Without reference records the dedup and report
/// stages are skipped.
pub fn stage_pipeline(s: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let has_records = s.records.is_some();
    if has_records {
        stage_dedup(s, out)?;
    }
    stage_env(s, out)?;
    stage_matrix(s, out)?;
    stage_factors(s, out)?;
    stage_graph(s, out)?;
    stage_layout(s, out)?;
    stage_render(s, out)?;
    if has_records {
        stage_report(s, out)?;
    } else {
        eprintln!("note: no reference records; skipping dedup and report");
    }
    Ok(())
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    let s = cmd.args().settings()?;
    match cmd {
        Command::Dedup(_) => stage_dedup(&s, out),
        Command::Env(_) => stage_env(&s, out),
        Command::Matrix(_) => stage_matrix(&s, out),
        Command::Factors(_) => stage_factors(&s, out),
        Command::Graph(_) => stage_graph(&s, out),
        Command::Layout(_) => stage_layout(&s, out),
        Command::Render(_) => stage_render(&s, out),
        Command::Report(_) => stage_report(&s, out),
        Command::Pipeline(_) => stage_pipeline(&s, out),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn unknown_subcommand_exits_1_with_usage() {
        let (code, _, err) = run_capture(&["citenv", "frobnicate"]);
        assert_eq!(code, 1);
        assert!(err.contains("Usage"), "{err}");
    }

    #[test]
    fn help_and_version_exit_0() {
        let (code, out, _) = run_capture(&["citenv", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("pipeline"));
        let (code, out, _) = run_capture(&["citenv", "--version"]);
        assert_eq!(code, 0);
        assert!(out.contains(env!("CARGO_PKG_VERSION")));
    }

    #[test]
    fn missing_input_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let (code, _, err) = run_capture(&["citenv", "env", "--out", out]);
        assert_eq!(code, 1);
        assert!(err.contains("--links"), "{err}");
    }

    #[test]
    fn unreadable_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.csv");
        let (code, _, _) = run_capture(&[
            "citenv",
            "env",
            "--links",
            missing.to_str().unwrap(),
            "--seed",
            "A",
            "--total",
            "10",
            "--self",
            "1",
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn bad_cutoff_flag_exits_1() {
        let (code, _, err) = run_capture(&["citenv", "graph", "--cosine-cutoff", "1.5"]);
        assert_eq!(code, 1);
        assert!(err.contains("cosine_cutoff"), "{err}");
    }

    #[test]
    fn report_names_missing_stage() {
        let dir = tempfile::tempdir().unwrap();
        let (code, _, err) =
            run_capture(&["citenv", "report", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("missing stage: dedup"), "{err}");
    }
}
