//! Command-line front end for SER sweeps.
//!
//! Settings are resolved as built-in defaults, then an optional config file
//! of `key = value` lines, then command-line flags. Config keys use the flag
//! names without the leading dashes (`snr-db = 0:20:2`).
//!
//! Results are written as CSV (or TSV) preceded by a `#` comment header. The
//! header embeds the resolved configuration between `# --- config ---`
//! markers in config-file syntax, so [`extract_config`] can recover a file
//! that reproduces the run.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

use crate::detect::{Algorithm, DetectorSpec};
use crate::modem::Modulation;
use crate::sim::{estimate_ser, FrozenChannel, SerCurve, SimError, SimulationConfig};

pub const CONFIG_BEGIN: &str = "# --- config ---";
pub const CONFIG_END: &str = "# --- end config ---";
pub const COLUMNS: [&str; 7] = [
    "snr_db",
    "detector",
    "channel_uses",
    "symbol_errors",
    "ser",
    "ci95_lo",
    "ci95_hi",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{origin}unknown key '{key}'")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}malformed value for {key}: '{value}' ({reason})")]
    Malformed {
        origin: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Constraint(SimError),
    #[error("cannot read config file {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error("simulation failed: {0}")]
    Runtime(SimError),
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for failures after the run started.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Write { .. } | CliError::Runtime(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    fn separator(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSettings {
    /// `None` writes to standard output.
    pub out: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: SimulationConfig,
    pub output: OutputSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Run(Box<Invocation>),
    /// `--help` or `--version` text for standard output.
    Info(String),
}

#[derive(Parser, Debug)]
#[command(
    name = "mimo-sim",
    version,
    about = "Monte Carlo symbol error rate of MIMO detectors over Rayleigh fading"
)]
struct Flags {
    /// Transmit antennas
    #[arg(long)]
    nt: Option<String>,
    /// Receive antennas (must be >= nt)
    #[arg(long)]
    nr: Option<String>,
    /// Modulation: 4qam, qpsk, 16qam, 64qam
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// Comma list of zf, mmse, ml, sphere, vblast-zf, vblast-mmse
    #[arg(long)]
    detectors: Option<String>,
    /// SNR grid in dB: start:stop:step or a comma list
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Maximum channel uses per SNR point
    #[arg(long)]
    trials: Option<String>,
    /// Stop a point once every detector has this many errors (0 disables)
    #[arg(long = "min-errors")]
    min_errors: Option<String>,
    /// Exponential antenna correlation at both ends, 0 for i.i.d.
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Config file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (standard output if omitted)
    #[arg(long)]
    out: Option<String>,
    /// csv or tsv
    #[arg(long)]
    format: Option<String>,
    /// Freeze the channel: `identity` or `none`
    #[arg(long = "freeze-h")]
    freeze_h: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        [
            ("nt", &self.nt),
            ("nr", &self.nr),
            ("mod", &self.modulation),
            ("detectors", &self.detectors),
            ("snr-db", &self.snr_db),
            ("trials", &self.trials),
            ("min-errors", &self.min_errors),
            ("rho", &self.rho),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out", &self.out),
            ("format", &self.format),
            ("freeze-h", &self.freeze_h),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Default for Invocation {
    fn default() -> Self {
        Self {
            config: SimulationConfig {
                threads: default_threads(),
                ..SimulationConfig::default()
            },
            output: OutputSettings::default(),
        }
    }
}

/// Parses `start:stop:step` (stop included when hit exactly) or a comma list.
/// `inf` denotes the noiseless point.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| -> Result<f64, String> {
        let t = t.trim();
        t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err("expected start:stop:step".into());
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if ![start, stop, step].iter().all(|v| v.is_finite()) {
            return Err("range bounds must be finite".into());
        }
        if step <= 0.0 {
            return Err("step must be positive".into());
        }
        if stop < start {
            return Err("stop is below start".into());
        }
        let tol = 1e-9 * step;
        let count = ((stop - start + tol) / step).floor() as usize + 1;
        if count > 100_000 {
            return Err("grid has too many points".into());
        }
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    s.split(',').map(num).collect()
}

fn parse_detectors(s: &str) -> Result<Vec<DetectorSpec>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<Algorithm>().map(DetectorSpec::new).map_err(|e| e.to_string()))
        .collect()
}

fn parse_num<T: FromStr>(value: &str) -> Result<T, String> {
    value.trim().parse::<T>().map_err(|_| "not a valid number".to_string())
}

fn apply(inv: &mut Invocation, key: &str, value: &str, origin: &str) -> Result<(), CliError> {
    let canonical = key.trim().replace('_', "-");
    let malformed = |reason: String| CliError::Malformed {
        origin: origin.to_string(),
        key: canonical.clone(),
        value: value.to_string(),
        reason,
    };
    let cfg = &mut inv.config;
    match canonical.as_str() {
        "nt" => cfg.nt = parse_num(value).map_err(malformed)?,
        "nr" => cfg.nr = parse_num(value).map_err(malformed)?,
        "mod" => cfg.modulation = value.parse::<Modulation>().map_err(|e| malformed(e.to_string()))?,
        "detectors" => cfg.detectors = parse_detectors(value).map_err(malformed)?,
        "snr-db" => cfg.snr_grid_db = parse_snr_grid(value).map_err(malformed)?,
        "trials" => cfg.max_channel_uses = parse_num(value).map_err(malformed)?,
        "min-errors" => cfg.min_errors = parse_num(value).map_err(malformed)?,
        "rho" => {
            let rho: f64 = parse_num(value).map_err(malformed)?;
            if !rho.is_finite() {
                return Err(malformed("not finite".into()));
            }
            cfg.rho = rho;
        }
        "seed" => cfg.seed = parse_num(value).map_err(malformed)?,
        "threads" => cfg.threads = parse_num(value).map_err(malformed)?,
        "freeze-h" => {
            cfg.freeze_h = match value.trim() {
                "identity" => Some(FrozenChannel::Identity),
                "none" => None,
                _ => return Err(malformed("expected identity or none".into())),
            }
        }
        "out" => {
            let v = value.trim();
            inv.output.out = if v.is_empty() || v == "-" { None } else { Some(PathBuf::from(v)) };
        }
        "format" => {
            inv.output.format = match value.trim().to_ascii_lowercase().as_str() {
                "csv" => Format::Csv,
                "tsv" => Format::Tsv,
                _ => return Err(malformed("expected csv or tsv".into())),
            }
        }
        _ => {
            return Err(CliError::UnknownKey {
                origin: origin.to_string(),
                key: key.trim().to_string(),
            })
        }
    }
    Ok(())
}

/// Applies `key = value` lines; blank lines and `#` comments are skipped.
pub fn apply_config_text(inv: &mut Invocation, text: &str, source: &str) -> Result<(), CliError> {
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let origin = format!("{source}:{}: ", n + 1);
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Malformed {
                origin,
                key: line.to_string(),
                value: String::new(),
                reason: "expected key = value".into(),
            });
        };
        apply(inv, key, value.trim(), &origin)?;
    }
    Ok(())
}

/// Resolves defaults, config file and flags into a validated invocation.
///
/// `args` includes the program name, as with `std::env::args`.
pub fn parse_invocation<I, T>(args: I) -> Result<Parsed, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let flags = match Flags::try_parse_from(args) {
        Ok(f) => f,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(Parsed::Info(e.to_string()));
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let msg = first.trim_start_matches("error: ").trim();
            return Err(CliError::Usage(format!("{msg} (see --help)")));
        }
    };

    let mut inv = Invocation::default();
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.clone(),
            source,
        })?;
        apply_config_text(&mut inv, &text, &path.display().to_string())?;
    }
    for (key, value) in flags.pairs() {
        apply(&mut inv, key, value, "--")?;
    }
    inv.config.validate().map_err(CliError::Constraint)?;
    Ok(Parsed::Run(Box::new(inv)))
}

/// Config lines reproducing `cfg`, in config-file syntax.
pub fn config_lines(cfg: &SimulationConfig) -> Vec<String> {
    let detectors: Vec<&str> = cfg.detectors.iter().map(|d| d.algorithm.name()).collect();
    let grid: Vec<String> = cfg.snr_grid_db.iter().map(|v| v.to_string()).collect();
    vec![
        format!("nt = {}", cfg.nt),
        format!("nr = {}", cfg.nr),
        format!("mod = {}", cfg.modulation),
        format!("detectors = {}", detectors.join(",")),
        format!("snr-db = {}", grid.join(",")),
        format!("trials = {}", cfg.max_channel_uses),
        format!("min-errors = {}", cfg.min_errors),
        format!("rho = {}", cfg.rho),
        format!("seed = {}", cfg.seed),
        format!(
            "freeze-h = {}",
            match cfg.freeze_h {
                Some(FrozenChannel::Identity) => "identity",
                None => "none",
            }
        ),
    ]
}

/// Recovers the embedded config block from a results file.
pub fn extract_config(results: &str) -> Option<String> {
    let mut lines = results.lines().skip_while(|l| l.trim_end() != CONFIG_BEGIN);
    lines.next()?;
    let mut out = String::new();
    for line in lines {
        if line.trim_end() == CONFIG_END {
            return Some(out);
        }
        out.push_str(line.strip_prefix('#').unwrap_or(line).trim());
        out.push('\n');
    }
    None
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders the full results file.
pub fn render_results(curve: &SerCurve, format: Format) -> String {
    let cfg = &curve.config;
    let sep = format.separator();
    let mut out = String::new();
    out.push_str("# mimo-sim symbol error rate results\n");
    out.push_str("# snr_db: average received SNR per receive antenna, sigma2 = nt / 10^(snr_db/10), unit-energy symbols, CN(0,1) gains\n");
    out.push_str("# ser: symbol_errors / (nt * channel_uses), counted per scalar layer; ci95: Wilson score interval\n");
    out.push_str("# channel: flat Rayleigh fading, fresh H and noise each channel use, correlation rho^|i-j| at both ends\n");
    let _ = writeln!(out, "# resampled rank-deficient draws: {}", curve.resampled_draws);
    out.push_str(CONFIG_BEGIN);
    out.push('\n');
    for line in config_lines(cfg) {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(CONFIG_END);
    out.push('\n');
    out.push_str(&COLUMNS.join(&sep.to_string()));
    out.push('\n');
    for p in &curve.points {
        let fields = [
            sig17(p.snr_db),
            p.detector.name().to_string(),
            p.channel_uses.to_string(),
            p.symbol_errors.to_string(),
            sig17(p.ser),
            sig17(p.ci95_lo),
            sig17(p.ci95_hi),
        ];
        out.push_str(&fields.join(&sep.to_string()));
        out.push('\n');
    }
    out
}

pub fn write_results(curve: &SerCurve, settings: &OutputSettings) -> Result<(), CliError> {
    let text = render_results(curve, settings.format);
    match &settings.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Full program: parse, simulate, write. Returns the process exit status and
/// prints exactly one line to `stderr` on failure.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_invocation(args).and_then(|parsed| match parsed {
        Parsed::Info(text) => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            }),
        Parsed::Run(inv) => {
            let curve = estimate_ser(&inv.config).map_err(CliError::Runtime)?;
            match &inv.output.out {
                Some(_) => write_results(&curve, &inv.output),
                None => stdout
                    .write_all(render_results(&curve, inv.output.format).as_bytes())
                    .map_err(|source| CliError::Write {
                        path: "<stdout>".into(),
                        source,
                    }),
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "mimo-sim: {msg}");
            e.exit_code()
        }
    }
}

/// Reads a results file and returns its embedded config applied on top of defaults.
pub fn config_from_results(path: &Path) -> Result<SimulationConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    let block = extract_config(&text).ok_or_else(|| CliError::Usage(format!("{} has no config block", path.display())))?;
    let mut inv = Invocation::default();
    apply_config_text(&mut inv, &block, &path.display().to_string())?;
    inv.config.validate().map_err(CliError::Constraint)?;
    Ok(inv.config)
}
