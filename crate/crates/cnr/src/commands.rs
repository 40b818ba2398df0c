//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cnr_core::cost::{DEFAULT_GROUPING_TOL, MAX_ENUM_BITS};
use cnr_core::metrics::beta_from_energies;
use cnr_core::qpe::{aliased_delta, CnrConfig, PhaseFraction};
use cnr_core::recursion::distribution_at;
use cnr_core::sim::{exact_phase_scale, run_algorithm, t_marginal_levels};
use cnr_core::{EmulatorRun, EnergySpectrum, Family, GeneratorSpec, Mode, Pairing};

use crate::error::{AppError, Result};
use crate::files::{csv_bytes, csv_error, level_rows, load_spectrum, Artifacts};
use crate::instance::{generated_label, load_instance, InstanceFile, LoadedInstance};
use crate::manifest::RunManifest;
use crate::parallel::{par_emulate, par_table};
use crate::parse::{parse_count, parse_p_list, parse_scale, ScaleArg};
use crate::tables::*;

#[derive(Debug, Parser)]
#[command(name = "cnr", version, about = "Comparison-and-replacement tournament optimizer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random instance as JSON.
    Generate(GenerateArgs),
    /// Energy of every basis string in ascending order, plus the level table.
    Spectrum(SpectrumArgs),
    /// Exact level distribution after each p under ideal comparison.
    Recurse(RecurseArgs),
    /// Critical and bound lines, admissible beta and minimum p.
    Bounds(BoundsArgs),
    /// Exact statevector run of the full circuit.
    Simulate(SimulateArgs),
    /// Monte Carlo of the tournament with error bars.
    Emulate(EmulateArgs),
    /// Phase-estimation readout distribution for one phase.
    #[command(name = "qpe-dist")]
    QpeDist(QpeDistArgs),
    /// Table of cumulative probability, average relative error and
    /// worst-case share, optionally next to emulated values.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Max2xor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ideal,
    Qpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairingArg {
    Adjacent,
    Strided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PList(pub Vec<u32>);

fn p_list(s: &str) -> std::result::Result<PList, String> {
    parse_p_list(s).map(PList)
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Directory receiving the output files and manifest.json; without it
    /// the main table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Instance JSON.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Level table CSV (`level,energy,degeneracy`) as written by `spectrum`.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct BetaSel {
    /// Neighborhood index; U(1, beta) spans levels 1..=beta+1.
    #[arg(long)]
    pub beta: Option<usize>,
    /// Relative-error tolerance; beta becomes the largest with alpha_R <= eps.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct QpeArgs {
    /// Ancilla qubits per comparison.
    #[arg(long, default_value_t = 7)]
    pub t: u32,
    /// Scale factor M: a number, a fraction of pi like 45/2pi, or `exact`.
    #[arg(long = "M", default_value = "45/2pi", value_parser = parse_scale)]
    pub scale: ScaleArg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long)]
    pub n: usize,
    /// Edge density, MAX-2-XOR only.
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    /// Overrides the generated label.
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Energies within tol * max(1, range) share a level.
    #[arg(long, default_value_t = DEFAULT_GROUPING_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct RecurseArgs {
    #[command(flatten)]
    pub source: Source,
    /// Levels, e.g. `4..9` (inclusive), `4,6` or `5`.
    #[arg(long, value_parser = p_list)]
    pub p: PList,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub eps: f64,
    /// Target probability for the minimum-p estimate.
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub p: u32,
    #[command(flatten)]
    pub qpe: QpeArgs,
    /// Also report the total variation distance to the ideal recursion.
    #[arg(long)]
    pub exact_check: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct EmulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = p_list)]
    pub p: PList,
    /// Samples per p, e.g. `1e6`.
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Ideal)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub qpe: QpeArgs,
    #[command(flatten)]
    pub beta: BetaSel,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PairingArg::Adjacent)]
    pub pairing: PairingArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct QpeDistArgs {
    #[arg(long, default_value_t = 7)]
    pub t: u32,
    /// Phase fraction in [-1/2, 1/2).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["ct", "cs"], required_unless_present_all = ["ct", "cs"])]
    pub delta: Option<f64>,
    /// Target cost; with --cs and --M gives delta = (cs - ct) / (2 pi M).
    #[arg(long, allow_hyphen_values = true, requires = "cs")]
    pub ct: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "ct")]
    pub cs: Option<f64>,
    #[arg(long = "M", default_value = "45/2pi", value_parser = parse_scale)]
    pub scale: ScaleArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_parser = p_list)]
    pub p: PList,
    #[command(flatten)]
    pub beta: BetaSel,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Add emulated columns (needs --instance).
    #[arg(long)]
    pub emulate: bool,
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Ideal)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub qpe: QpeArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the table rounded to four decimals instead of CSV.
    #[arg(long)]
    pub display: bool,
    #[command(flatten)]
    pub out: OutArg,
}

pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a, argv),
        Command::Spectrum(a) => cmd_spectrum(a, argv),
        Command::Recurse(a) => cmd_recurse(a, argv),
        Command::Bounds(a) => cmd_bounds(a, argv),
        Command::Simulate(a) => cmd_simulate(a, argv),
        Command::Emulate(a) => cmd_emulate(a, argv),
        Command::QpeDist(a) => cmd_qpe_dist(a, argv),
        Command::Report(a) => cmd_report(a, argv),
    }
}

fn csv<T: serde::Serialize>(name: &str, rows: &[T]) -> Result<Vec<u8>> {
    csv_bytes(rows).map_err(|e| csv_error(name, e))
}

fn json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// A spectrum with, when it came from an instance file, the instance.
struct Loaded {
    spec: EnergySpectrum,
    instance: Option<LoadedInstance>,
    path: String,
    sha256: String,
}

fn load_source(src: &Source) -> Result<Loaded> {
    match (&src.instance, &src.spectrum) {
        (Some(p), _) => {
            let li = load_instance(p)?;
            let spec = EnergySpectrum::enumerate(&li.instance, DEFAULT_GROUPING_TOL)?;
            Ok(Loaded { spec, path: path_str(p), sha256: li.sha256.clone(), instance: Some(li) })
        }
        (None, Some(p)) => {
            let (spec, sha256) = load_spectrum(p)?;
            Ok(Loaded { spec, instance: None, path: path_str(p), sha256 })
        }
        (None, None) => Err(AppError::Usage("one of --instance or --spectrum is required".into())),
    }
}

fn resolve_beta(sel: &BetaSel, spec: &EnergySpectrum) -> Result<usize> {
    match (sel.beta, sel.eps) {
        (Some(b), _) if b < spec.num_levels() => Ok(b),
        (Some(b), _) => Err(cnr_core::Error::Argument(format!(
            "beta = {b} but the spectrum has {} levels",
            spec.num_levels()
        ))
        .into()),
        (None, Some(eps)) if eps > 0.0 && eps <= 1.0 => Ok(beta_from_energies(spec, eps)?),
        (None, Some(eps)) => Err(cnr_core::Error::Argument(format!("eps = {eps} outside (0, 1]")).into()),
        (None, None) => Err(AppError::Usage("one of --beta or --eps is required".into())),
    }
}

fn resolve_config(q: &QpeArgs, spec: Option<&EnergySpectrum>) -> Result<CnrConfig> {
    let scale = match (q.scale, spec) {
        (ScaleArg::Value(v), _) => v,
        (ScaleArg::Exact, Some(spec)) => exact_phase_scale(spec, q.t).ok_or_else(|| {
            cnr_core::Error::Config(format!("no exact-phase scale exists for this spectrum at t = {}", q.t))
        })?,
        (ScaleArg::Exact, None) => return Err(AppError::Usage("--M exact needs a spectrum".into())),
    };
    Ok(CnrConfig::with_scale(q.t, scale)?)
}

fn echo_config(m: &mut RunManifest, cfg: &CnrConfig) {
    m.set("t", cfg.t);
    m.set("M", cfg.scale);
    m.set("b", cfg.accuracy);
}

fn mode_of(m: ModeArg) -> Mode {
    match m {
        ModeArg::Ideal => Mode::IdealSign,
        ModeArg::Qpe => Mode::QpeSampled,
    }
}

fn mode_name(m: ModeArg) -> &'static str {
    match m {
        ModeArg::Ideal => "ideal",
        ModeArg::Qpe => "qpe",
    }
}

fn cmd_generate(a: GenerateArgs, argv: &[String]) -> Result<()> {
    let spec = match a.family {
        FamilyArg::Gaussian => GeneratorSpec { family: Family::Gaussian2Edge, n: a.n, density: a.density, seed: a.seed },
        FamilyArg::Max2xor => GeneratorSpec { family: Family::Max2Xor, n: a.n, density: a.density, seed: a.seed },
    };
    let inst = spec.generate()?;
    let label = a.label.unwrap_or_else(|| generated_label(&spec));
    let text = InstanceFile::from_instance(&inst, &label, Some(a.seed)).to_json();

    let mut art = Artifacts::new(a.out.out)?;
    art.primary("instance.json", INSTANCE_SCHEMA, text.as_bytes())?;
    let mut m = RunManifest::new("generate", argv);
    m.set("family", spec.family.name());
    m.set("n", a.n);
    m.set("density", a.density);
    m.set("seed", a.seed);
    art.finish(m)
}

fn cmd_spectrum(a: SpectrumArgs, argv: &[String]) -> Result<()> {
    let li = load_instance(&a.instance)?;
    let spec = EnergySpectrum::enumerate(&li.instance, a.tol)?;
    let mut art = Artifacts::new(a.out.out)?;
    art.primary("spectrum.csv", SCATTER_SCHEMA, &csv("spectrum.csv", &scatter_rows(&li.instance, &spec)?)?)?;
    art.secondary("levels.csv", LEVELS_SCHEMA, &csv("levels.csv", &level_rows(&spec))?)?;
    let mut m = RunManifest::new("spectrum", argv).with_input(&path_str(&a.instance), &li.sha256);
    m.set("tol", a.tol);
    m.set("levels", spec.num_levels());
    art.finish(m)
}

fn cmd_recurse(a: RecurseArgs, argv: &[String]) -> Result<()> {
    let src = load_source(&a.source)?;
    let rows = recurse_rows(&src.spec, &a.p.0)?;
    let mut art = Artifacts::new(a.out.out)?;
    art.primary("recurse.csv", RECURSE_SCHEMA, &csv("recurse.csv", &rows)?)?;
    let mut m = RunManifest::new("recurse", argv).with_input(&src.path, &src.sha256);
    m.set("p", &a.p.0);
    art.finish(m)
}

fn cmd_bounds(a: BoundsArgs, argv: &[String]) -> Result<()> {
    let src = load_source(&a.source)?;
    let (rows, summary) = bounds_tables(&src.spec, a.eps, a.eta)?;
    let mut art = Artifacts::new(a.out.out)?;
    art.primary("bounds.json", BOUNDS_SUMMARY_SCHEMA, &json(&summary))?;
    art.secondary("bounds.csv", BOUNDS_SCHEMA, &csv("bounds.csv", &rows)?)?;
    let mut m = RunManifest::new("bounds", argv).with_input(&src.path, &src.sha256);
    m.set("eps_r", a.eps);
    m.set("eta", a.eta);
    art.finish(m)
}

fn cmd_simulate(a: SimulateArgs, argv: &[String]) -> Result<()> {
    let li = load_instance(&a.instance)?;
    let inst = &li.instance;
    let spec = EnergySpectrum::enumerate(inst, DEFAULT_GROUPING_TOL)?;
    let cfg = resolve_config(&a.qpe, Some(&spec))?;
    cfg.validate_for(&spec)?;
    let dist = run_algorithm(inst, &cfg, a.p)?;

    let mut art = Artifacts::new(a.out.out)?;
    art.primary("simulate.csv", SIMULATE_SCHEMA, &csv("simulate.csv", &sim_rows(inst, &spec, &dist)?)?)?;
    let mut m = RunManifest::new("simulate", argv).with_input(&path_str(&a.instance), &li.sha256);
    m.set("p", a.p);
    echo_config(&mut m, &cfg);
    if a.exact_check {
        let tv = t_marginal_levels(&dist, &spec, inst)?.tv_distance(&distribution_at(&spec, a.p)?)?;
        eprintln!("tv_distance={tv:e}");
        art.secondary("check.json", "cnr.simulate.check/1", &json(&serde_json::json!({ "tv_distance": tv })))?;
        m.set("tv_distance", tv);
    }
    art.finish(m)
}

fn cmd_emulate(a: EmulateArgs, argv: &[String]) -> Result<()> {
    let li = load_instance(&a.instance)?;
    let inst = &li.instance;
    let spec = if inst.n() <= MAX_ENUM_BITS { Some(EnergySpectrum::enumerate(inst, DEFAULT_GROUPING_TOL)?) } else { None };
    let cfg = resolve_config(&a.qpe, spec.as_ref())?;
    let pairing = match a.pairing {
        PairingArg::Adjacent => Pairing::Adjacent,
        PairingArg::Strided => Pairing::Strided,
    };
    let run = EmulatorRun::new(inst, cfg, 0, a.samples, a.seed).with_mode(mode_of(a.mode)).with_pairing(pairing);
    let mut m = RunManifest::new("emulate", argv).with_input(&path_str(&a.instance), &li.sha256);
    m.set("p", &a.p.0);
    m.set("samples", a.samples);
    m.set("seed", a.seed);
    m.set("mode", mode_name(a.mode));
    echo_config(&mut m, &cfg);

    let mut art = Artifacts::new(a.out.out)?;
    match &spec {
        Some(spec) => {
            let beta = resolve_beta(&a.beta, spec)?;
            m.set("beta", beta);
            m.set("eps_r", a.beta.eps);
            let table = par_table(&run, spec, &a.p.0, beta)?;
            let rows: Vec<EmulateRow> = table.iter().map(EmulateRow::from).collect();
            art.primary("emulate.csv", EMULATE_SCHEMA, &csv("emulate.csv", &rows)?)?;
        }
        None => {
            let mut rows = Vec::new();
            for &p in &a.p.0 {
                let tally = par_emulate(&EmulatorRun { p, ..run })?;
                for (energy, count) in tally.energy_histogram(inst, DEFAULT_GROUPING_TOL) {
                    rows.push(HistogramRow { p, energy, count });
                }
            }
            art.primary("emulate.csv", HISTOGRAM_SCHEMA, &csv("emulate.csv", &rows)?)?;
        }
    }
    art.finish(m)
}

fn cmd_qpe_dist(a: QpeDistArgs, argv: &[String]) -> Result<()> {
    let mut m = RunManifest::new("qpe-dist", argv);
    let delta = match (a.delta, a.ct, a.cs) {
        (Some(d), _, _) => PhaseFraction::new(d)?,
        (None, Some(ct), Some(cs)) => {
            let ScaleArg::Value(scale) = a.scale else {
                return Err(AppError::Usage("--M exact is not available for a single comparison".into()));
            };
            let cfg = CnrConfig::with_scale(a.t, scale)?;
            cfg.validate_range(ct.min(cs), ct.max(cs))?;
            echo_config(&mut m, &cfg);
            m.set("ct", ct);
            m.set("cs", cs);
            aliased_delta(&cfg, ct, cs)
        }
        _ => return Err(AppError::Usage("give --delta, or --ct and --cs".into())),
    };
    let (rows, summary) = qpe_tables(delta, a.t)?;
    m.set("delta", delta.value());
    m.set("t", a.t);
    let mut art = Artifacts::new(a.out.out)?;
    art.primary("qpe_dist.csv", QPE_SCHEMA, &csv("qpe_dist.csv", &rows)?)?;
    art.secondary("qpe_summary.json", "cnr.qpe_dist.summary/1", &json(&summary))?;
    art.finish(m)
}

fn cmd_report(a: ReportArgs, argv: &[String]) -> Result<()> {
    let src = load_source(&a.source)?;
    let spec = &src.spec;
    let beta = resolve_beta(&a.beta, spec)?;
    let mut rows = report_rows(spec, &a.p.0, beta)?;
    let mut m = RunManifest::new("report", argv).with_input(&src.path, &src.sha256);
    m.set("p", &a.p.0);
    m.set("beta", beta);
    m.set("eps_r", a.beta.eps);
    m.set("eta", a.eta);

    if a.emulate {
        let Some(li) = &src.instance else {
            return Err(AppError::Usage("--emulate needs --instance".into()));
        };
        let cfg = resolve_config(&a.qpe, Some(spec))?;
        let run = EmulatorRun::new(&li.instance, cfg, 0, a.samples, a.seed).with_mode(mode_of(a.mode));
        attach_emulated(&mut rows, &par_table(&run, spec, &a.p.0, beta)?);
        m.set("samples", a.samples);
        m.set("seed", a.seed);
        m.set("mode", mode_name(a.mode));
        echo_config(&mut m, &cfg);
    }

    let min_p = match (a.eta, spec.n_bits()) {
        (Some(eta), Some(n)) => Some(cnr_core::metrics::min_p_for(eta, n as u32, spec.neighborhood_count(beta))?),
        _ => None,
    };
    let summary = serde_json::json!({
        "schema": REPORT_JSON_SCHEMA,
        "levels": spec.num_levels(),
        "total_states": spec.total_states(),
        "beta": beta,
        "a_beta": spec.neighborhood_count(beta),
        "eta": a.eta,
        "min_p": min_p,
        "rows": rows,
    });

    let mut art = Artifacts::new(a.out.out)?;
    let table = csv("report.csv", &rows)?;
    let text = display_table(&rows);
    if a.display && !art.has_dir() {
        art.primary("report.txt", "cnr.report.text/1", text.as_bytes())?;
    } else {
        art.primary("report.csv", REPORT_SCHEMA, &table)?;
        art.secondary("report.json", REPORT_JSON_SCHEMA, &json(&summary))?;
        art.secondary("report.txt", "cnr.report.text/1", text.as_bytes())?;
    }
    art.finish(m)
}
