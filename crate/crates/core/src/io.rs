//! Configuration files, run manifests and CSV output.
//!
//! Configurations are TOML. A manifest is the fully resolved configuration
//! plus a `[manifest]` table of metadata; it loads as a configuration again,
//! so any output can be regenerated from the manifest written next to it.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::chain::ChainConfig;
use crate::disorder::DisorderSpec;
use crate::ensemble::{ExperimentConfig, StatsRow, SweepGrid, DEFAULT_REALIZATIONS};
use crate::error::{Error, Result};
use crate::propagator::{PropagationSettings, Trajectory};
use crate::protocols::{CouplingSchedule, ProtocolKind, ProtocolSpec};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_TABLE: &str = "manifest";
/// Target number of rows in a trajectory table.
pub const TRAJECTORY_ROWS: usize = 500;

pub const CSV_HEADER: [&str; 10] = [
    "protocol",
    "N",
    "sigma_h",
    "sigma_j",
    "realizations",
    "mean_prob",
    "stderr_prob",
    "mean_fid",
    "stderr_fid",
    "seed",
];

/// Everything a run needs, as read from a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub realizations: usize,
    pub seed: u64,
    /// Worker threads; absent means the environment or machine default.
    pub threads: Option<usize>,
    /// Realization index drawn by the trajectory command.
    pub trajectory_realization: u64,
    pub chain: ChainConfig,
    pub protocol: ProtocolSpec,
    pub disorder: DisorderSpec,
    pub propagation: PropagationSettings,
    pub sweep: Option<SweepGrid>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            realizations: DEFAULT_REALIZATIONS,
            seed: 0,
            threads: None,
            trajectory_realization: 0,
            chain: ChainConfig::default(),
            protocol: ProtocolSpec::default(),
            disorder: DisorderSpec::default(),
            propagation: PropagationSettings::default(),
            sweep: None,
        }
    }
}

impl RunConfig {
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            chain: self.chain,
            protocol: self.protocol,
            disorder: self.disorder,
            realizations: self.realizations,
            seed: self.seed,
            settings: self.propagation,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        table.remove(MANIFEST_TABLE);
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_config(e))))
    }
}

fn strip_config(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestMeta {
    pub tool_version: String,
    pub command: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Resolved configuration plus provenance, written next to every output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub meta: ManifestMeta,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: RunConfig) -> Self {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            meta: ManifestMeta {
                tool_version: TOOL_VERSION.to_string(),
                command: command.to_string(),
                timestamp,
            },
            config,
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let mut table =
            toml::Table::try_from(&self.config).map_err(|e| Error::Config(e.to_string()))?;
        let meta = toml::Value::try_from(&self.meta).map_err(|e| Error::Config(e.to_string()))?;
        table.insert(MANIFEST_TABLE.to_string(), meta);
        toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let meta = table
            .remove(MANIFEST_TABLE)
            .ok_or_else(|| Error::Config("missing [manifest] table".into()))?;
        Ok(Self {
            meta: meta
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?,
            config: table
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

/// `results.csv` → `results.manifest.toml`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.toml")
}

/// Shortest-exact rendering: 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One line of the results table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub protocol: ProtocolKind,
    pub n_sites: usize,
    pub sigma_h: f64,
    pub sigma_j: f64,
    pub realizations: usize,
    pub mean_prob: f64,
    pub stderr_prob: f64,
    pub mean_fid: f64,
    pub stderr_fid: f64,
    pub seed: u64,
}

impl From<&StatsRow> for CsvRow {
    fn from(row: &StatsRow) -> Self {
        Self {
            protocol: row.protocol,
            n_sites: row.n_sites,
            sigma_h: row.sigma_h,
            sigma_j: row.sigma_j,
            realizations: row.realizations,
            mean_prob: row.stats.mean_probability,
            stderr_prob: row.stats.stderr_probability,
            mean_fid: row.stats.mean_fidelity,
            stderr_fid: row.stats.stderr_fidelity,
            seed: row.seed,
        }
    }
}

impl CsvRow {
    fn record(&self) -> [String; 10] {
        [
            self.protocol.to_string(),
            self.n_sites.to_string(),
            format_float(self.sigma_h),
            format_float(self.sigma_j),
            self.realizations.to_string(),
            format_float(self.mean_prob),
            format_float(self.stderr_prob),
            format_float(self.mean_fid),
            format_float(self.stderr_fid),
            self.seed.to_string(),
        ]
    }

    fn parse(record: &csv::StringRecord) -> Result<Self> {
        if record.len() != CSV_HEADER.len() {
            return Err(Error::input(format!(
                "expected {} columns, got {}",
                CSV_HEADER.len(),
                record.len()
            )));
        }
        fn num<T: std::str::FromStr>(field: &str, name: &str) -> Result<T> {
            field
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad {name} value '{field}'")))
        }
        Ok(Self {
            protocol: record[0].trim().parse()?,
            n_sites: num(&record[1], "N")?,
            sigma_h: num(&record[2], "sigma_h")?,
            sigma_j: num(&record[3], "sigma_j")?,
            realizations: num(&record[4], "realizations")?,
            mean_prob: num(&record[5], "mean_prob")?,
            stderr_prob: num(&record[6], "stderr_prob")?,
            mean_fid: num(&record[7], "mean_fid")?,
            stderr_fid: num(&record[8], "stderr_fid")?,
            seed: num(&record[9], "seed")?,
        })
    }
}

/// Header line, then one line per row.
pub fn write_csv<W: Write>(rows: &[StatsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(CsvRow::from(row).record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[StatsRow], path: &Path) -> Result<()> {
    write_csv(rows, fs::File::create(path)?)
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::input(format!("unexpected CSV header {header:?}")));
    }
    r.records().map(|rec| CsvRow::parse(&rec?)).collect()
}

/// Stride giving roughly [`TRAJECTORY_ROWS`] samples over the schedule.
pub fn trajectory_stride(schedule: &CouplingSchedule, settings: &PropagationSettings) -> usize {
    let samples: usize = match schedule.segments() {
        Some(segments) => segments
            .iter()
            .map(|s| settings.steps_for(s.duration))
            .sum(),
        None => settings.steps_for(schedule.t_out()),
    };
    samples.div_ceil(TRAJECTORY_ROWS).max(1)
}

/// Columns `t, P_1 … P_N`, plus the nominal `J_odd, J_even` for the
/// adiabatic schedule.
pub fn write_trajectory<W: Write>(
    schedule: &CouplingSchedule,
    trajectory: &Trajectory,
    writer: W,
) -> Result<()> {
    let n = schedule.n_sites();
    let ramps = schedule.kind() == ProtocolKind::Adiabatic && n >= 3;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("P{j}")));
    if ramps {
        header.extend(["J_odd".to_string(), "J_even".to_string()]);
    }
    w.write_record(&header)?;
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let mut rec = vec![format_float(*t)];
        rec.extend(state.populations().into_iter().map(format_float));
        if ramps {
            let j = schedule.couplings_at(*t);
            rec.extend([format_float(j[0]), format_float(j[1])]);
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
