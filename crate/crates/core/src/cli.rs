//! Configuration-driven experiment runner behind the `qfuca` binary.
//!
//! ```text
//! qfuca <layout|spectrum|capacity|sir|ber|complexity|search|figure3>
//!       [--config run.toml] [--output-dir DIR] [--seed N] [--set key=value]...
//! ```
//!
//! Exit status: 0 success, 1 other failure, 2 configuration error,
//! 3 infeasible geometry, 4 size guard.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{
    capacity_curve, eigen_spectrum, eigen_spectrum_dense, effective_rank, search_max_streams, stream_sir,
    ComplexityComparison, PowerPolicy, SearchSpace,
};
use crate::channel::{
    bccb_deviation, build_physical_channel, freespace_gain, idealize_bccb, lift_to_logical, LinkConfig,
    LogicalChannel, RANK_TOLERANCE,
};
use crate::detection::{run_ber, BerRun, BerScenario, ChannelKind, DetectionScheme};
use crate::error::{Error, Result};
use crate::geometry::{build_layout, transform_layout, validate_layout, LayoutCase, LayoutSpec, RigidTransform};
use crate::transceiver::{NoiseMode, DEFAULT_EQ_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Layout,
    Spectrum,
    Capacity,
    Sir,
    Ber,
    Complexity,
    Search,
    Figure3,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "qfuca", version, about = "QF-UCA LOS MIMO experiments")]
pub struct Cli {
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override one configuration key, e.g. `--set layout.cells=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    layout: Option<LayoutSpec>,
    link: Option<LinkConfig>,
    spectrum: Option<SpectrumSection>,
    capacity: Option<CapacitySection>,
    sir: Option<SirSection>,
    ber: Option<BerSection>,
    complexity: Option<ComplexitySection>,
    search: Option<SearchSpace>,
    figure3: Option<Figure3Section>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SpectrumChannel {
    /// FFT eigenvalues of the BCCB idealization.
    #[default]
    Idealized,
    /// Dense eigenvalues of the exact lifted channel.
    Exact,
}

fn yes() -> bool {
    true
}

fn rank_tolerance() -> f64 {
    RANK_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumSection {
    #[serde(default)]
    channel: SpectrumChannel,
    #[serde(default = "rank_tolerance")]
    rank_tolerance: f64,
    #[serde(default = "yes")]
    normalize_path_loss: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            channel: SpectrumChannel::default(),
            rank_tolerance: RANK_TOLERANCE,
            normalize_path_loss: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacitySection {
    snr_db: Vec<f64>,
    #[serde(default)]
    policy: PowerPolicy,
    #[serde(default = "yes")]
    normalize_path_loss: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SirSection {
    #[serde(default)]
    rx_transform: RigidTransform,
}

fn eq_tolerance() -> f64 {
    DEFAULT_EQ_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BerSection {
    alphabet: usize,
    snr_db: Vec<f64>,
    trials: u64,
    #[serde(default)]
    noise_mode: NoiseMode,
    #[serde(default)]
    scheme: DetectionScheme,
    #[serde(default)]
    channel: ChannelKind,
    #[serde(default = "yes")]
    normalize_path_loss: bool,
    #[serde(default)]
    rx_transform: RigidTransform,
    #[serde(default = "eq_tolerance")]
    eq_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexitySection {
    cells: usize,
    slots: usize,
    alphabet: usize,
}

/// Capacity comparison of single-loop UCAs and case-5 QF-UCAs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure3Section {
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    pub link_distance: f64,
    /// QF-UCA inter radius `R`, meters.
    pub inter_radius: f64,
    /// Single-loop UCA radius, meters; matches the QF-UCA outer extent `2R`.
    pub uca_radius: f64,
    pub snr_db: Vec<f64>,
    pub policy: PowerPolicy,
    pub normalize_path_loss: bool,
}

impl Default for Figure3Section {
    fn default() -> Self {
        Figure3Section {
            carrier_frequency: 3e9,
            bandwidth: 1e6,
            link_distance: 50.0,
            inter_radius: 1.0,
            uca_radius: 2.0,
            snr_db: (0..=15).map(|i| 2.0 * i as f64).collect(),
            policy: PowerPolicy::EqualPower,
            normalize_path_loss: true,
        }
    }
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
}

/// Process exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidSpec(_) | Error::Domain(_) => 2,
        Error::InfeasibleGeometry(_) => 3,
        Error::SizeGuard { .. } => 4,
        _ => 1,
    }
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn set_path(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("--set expects key=value, got `{assignment}`")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("--set {key}: `{part}` is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn has_path(table: &toml::Table, path: &str) -> bool {
    let mut node = table;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        match node.get(*part).and_then(|v| v.as_table()) {
            Some(t) => node = t,
            None => return false,
        }
    }
    node.contains_key(parts[parts.len() - 1])
}

fn required_keys(command: Command) -> Vec<&'static str> {
    let layout = ["layout.case", "layout.cells", "layout.slots", "layout.inter_radius"];
    let link = ["link.carrier_frequency", "link.link_distance"];
    let mut keys = Vec::new();
    match command {
        Command::Layout => keys.extend(layout),
        Command::Spectrum | Command::Sir => {
            keys.extend(layout);
            keys.extend(link);
        }
        Command::Capacity => {
            keys.extend(layout);
            keys.extend(link);
            keys.push("capacity.snr_db");
        }
        Command::Ber => {
            keys.extend(layout);
            keys.extend(link);
            keys.extend(["ber.alphabet", "ber.snr_db", "ber.trials"]);
        }
        Command::Complexity => keys.extend(["complexity.cells", "complexity.slots", "complexity.alphabet"]),
        Command::Search => keys.extend(["search.element_budget", "search.cases", "search.cells", "search.slots"]),
        Command::Figure3 => {}
    }
    keys
}

fn load_config(cli: &Cli) -> Result<FileConfig> {
    let mut table = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            toml::from_str::<toml::Table>(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => toml::Table::new(),
    };
    for assignment in &cli.overrides {
        set_path(&mut table, assignment)?;
    }
    let missing: Vec<&str> = required_keys(cli.command)
        .into_iter()
        .filter(|k| !has_path(&table, k))
        .collect();
    if !missing.is_empty() {
        return Err(config_err(format!("missing required keys: {}", missing.join(", "))));
    }
    toml::Value::Table(table).try_into().map_err(config_err)
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let w = self.create(name)?;
        serde_json::to_writer_pretty(w, value)?;
        Ok(())
    }
}

fn physical_pair(layout: &LayoutSpec, link: &LinkConfig, rx_transform: &RigidTransform, normalize: bool) -> Result<crate::channel::PhysicalChannel> {
    let tx = build_layout(layout)?;
    let rx = transform_layout(&tx, rx_transform);
    let phys = build_physical_channel(&tx, &rx, link)?;
    if normalize {
        let g = freespace_gain(link.link_distance, link.wavelength())?;
        Ok(phys.normalized(g.norm()))
    } else {
        Ok(phys)
    }
}

fn idealized(layout: &LayoutSpec, link: &LinkConfig, normalize: bool) -> Result<(LogicalChannel, LogicalChannel)> {
    let phys = physical_pair(layout, link, &RigidTransform::identity(), normalize)?;
    let exact = lift_to_logical(&phys)?;
    Ok((idealize_bccb(&exact), exact))
}

fn required<T: Clone>(section: &Option<T>, name: &str) -> Result<T> {
    section.clone().ok_or_else(|| config_err(format!("missing section [{name}]")))
}

/// Run one command and write its artifacts plus `manifest.json`.
pub fn execute(cli: &Cli) -> Result<RunSummary> {
    let cfg = load_config(cli)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let dir = cli
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("qfuca-output"));
    fs::create_dir_all(&dir)?;
    let mut out = Outputs { dir: dir.clone(), files: Vec::new() };
    let link = cfg.link.clone().unwrap_or_default();

    let resolved = match cli.command {
        Command::Layout => {
            let spec = required(&cfg.layout, "layout")?;
            let layout = build_layout(&spec)?;
            layout.write_json(out.create("layout.json")?)?;
            layout.write_csv(out.create("layout.csv")?)?;
            out.json("validation.json", &validate_layout(&layout))?;
            json!({ "layout": spec })
        }
        Command::Spectrum => {
            let spec = required(&cfg.layout, "layout")?;
            let section = cfg.spectrum.clone().unwrap_or_default();
            let (ideal, exact) = idealized(&spec, &link, section.normalize_path_loss)?;
            let spectrum = match section.channel {
                SpectrumChannel::Idealized => eigen_spectrum(&ideal)?,
                SpectrumChannel::Exact => eigen_spectrum_dense(&exact)?,
            };
            spectrum.write_csv(out.create("eigenvalues.csv")?)?;
            let summary = json!({
                "channel": section.channel,
                "streams": spec.streams(),
                "elements": build_layout(&spec)?.element_count(),
                "effective_rank": effective_rank(&spectrum, section.rank_tolerance)?,
                "rank_tolerance": section.rank_tolerance,
                "exact_lift_rank": exact.rank(section.rank_tolerance),
                "bccb_deviation": bccb_deviation(&exact)?,
                "max_magnitude": spectrum.max_magnitude(),
            });
            out.json("spectrum.json", &summary)?;
            json!({ "layout": spec, "link": link, "spectrum": section })
        }
        Command::Capacity => {
            let spec = required(&cfg.layout, "layout")?;
            let section = required(&cfg.capacity, "capacity")?;
            let (ideal, _) = idealized(&spec, &link, section.normalize_path_loss)?;
            let curve = capacity_curve(&eigen_spectrum(&ideal)?, &section.snr_db, section.policy, link.bandwidth);
            curve.write_csv(out.create("capacity.csv")?)?;
            out.json("capacity.json", &curve)?;
            json!({ "layout": spec, "link": link, "capacity": section })
        }
        Command::Sir => {
            let spec = required(&cfg.layout, "layout")?;
            let section = cfg.sir.clone().unwrap_or_default();
            let phys = physical_pair(&spec, &link, &section.rx_transform, false)?;
            let report = stream_sir(&lift_to_logical(&phys)?);
            report.write_csv(out.create("sir.csv")?)?;
            out.json("sir.json", &report)?;
            json!({ "layout": spec, "link": link, "sir": section })
        }
        Command::Ber => {
            let spec = required(&cfg.layout, "layout")?;
            let section = required(&cfg.ber, "ber")?;
            let scenario = BerScenario {
                layout: spec.clone(),
                link: link.clone(),
                channel: section.channel,
                normalize_path_loss: section.normalize_path_loss,
                rx_transform: section.rx_transform,
                eq_tolerance: section.eq_tolerance,
                run: BerRun {
                    alphabet: section.alphabet,
                    noise_mode: section.noise_mode,
                    snr_db: section.snr_db.clone(),
                    trials: section.trials,
                    seed,
                    scheme: section.scheme,
                },
            };
            let curve = run_ber(&scenario)?;
            curve.write_csv(out.create("ber.csv")?)?;
            out.json("ber.json", &curve)?;
            json!({ "seed": seed, "layout": spec, "link": link, "ber": section })
        }
        Command::Complexity => {
            let section = required(&cfg.complexity, "complexity")?;
            let report = ComplexityComparison::new(section.cells, section.slots, section.alphabet)?;
            for note in &report.notes {
                eprintln!("{note}");
            }
            out.json("complexity.json", &report)?;
            json!({ "complexity": section })
        }
        Command::Search => {
            let space = required(&cfg.search, "search")?;
            out.json("search.json", &search_max_streams(&space)?)?;
            json!({ "search": space })
        }
        Command::Figure3 => {
            let section = cfg.figure3.clone().unwrap_or_default();
            figure3(&section, &mut out)?;
            json!({ "figure3": section })
        }
    };

    let manifest = json!({
        "tool": "qfuca",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command,
        "config": resolved,
        "outputs": out.files,
    });
    let mut files = out.files.clone();
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("manifest.json"))?), &manifest)?;
    files.push("manifest.json".into());
    Ok(RunSummary { output_dir: dir, files })
}

fn figure3(section: &Figure3Section, out: &mut Outputs) -> Result<()> {
    let link = LinkConfig {
        carrier_frequency: section.carrier_frequency,
        link_distance: section.link_distance,
        bandwidth: section.bandwidth,
        ..LinkConfig::default()
    };
    let mut legends: Vec<(String, LayoutSpec)> = [9, 16, 25, 32]
        .iter()
        .map(|&u| (format!("uca_{u}.csv"), LayoutSpec::single_loop(u, section.uca_radius)))
        .collect();
    for (k, u) in [(4, 9), (8, 25)] {
        legends.push((
            format!("qfuca_{u}.csv"),
            LayoutSpec::new(LayoutCase::CenterShared, 4, k, section.inter_radius),
        ));
    }
    for (name, spec) in &legends {
        let (ideal, _) = idealized(spec, &link, section.normalize_path_loss)?;
        let curve = capacity_curve(&eigen_spectrum(&ideal)?, &section.snr_db, section.policy, section.bandwidth);
        curve.write_csv(out.create(name)?)?;
    }
    Ok(())
}

/// Parse arguments, run, print a diagnostic on failure and return the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", Path::new(&summary.output_dir).join(f).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
