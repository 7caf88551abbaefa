//! CSV and manifest writers. Every file of a run is staged in a temporary
//! file next to its destination and renamed into place only once all of
//! them have been written.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use super::PopulationMap;
use crate::error::Result;
use crate::lindblad::Trajectory;
use crate::ode::IntegratorStats;
use crate::spectrum::csv_error;
use crate::units::{angular_to_hz, s_to_ns};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Files to be written together into one directory.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: Vec<u8>) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Writes every file or none: on error, staged temporaries are removed
    /// and no destination is touched.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        if let Some((bad, _)) = self
            .files
            .iter()
            .find(|(n, _)| Path::new(n).file_name().and_then(|f| f.to_str()) != Some(n.as_str()))
        {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("output name `{bad}` is not a plain file name"),
            )
            .into());
        }
        std::fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in self.files {
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(&contents)?;
            tmp.as_file().sync_all()?;
            staged.push((dir.join(name), tmp));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (path, tmp) in staged {
            if let Err(e) = tmp.persist(&path) {
                for done in &written {
                    let _ = std::fs::remove_file(done);
                }
                return Err(e.error.into());
            }
            written.push(path);
        }
        Ok(written)
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Sample time in ns, rounded to the femtosecond so grid points print cleanly.
fn fmt_ns(t: f64) -> String {
    fmt((s_to_ns(t) * 1e6).round() / 1e6)
}

/// `qubit<i>_population.csv` body: header row of times (ns), first column M (GHz).
pub fn population_csv(map: &PopulationMap, qubit: usize) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["m_ghz".to_string()];
    header.extend(map.times.iter().map(|&t| fmt_ns(t)));
    w.write_record(&header).map_err(csv_error)?;
    for (k, &m) in map.frequencies.iter().enumerate() {
        let mut row = vec![fmt(angular_to_hz(m) / 1e9)];
        row.extend(map.row(qubit, k).iter().map(|&v| fmt(v)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn population_file_name(qubit: usize) -> String {
    format!("qubit{}_population.csv", qubit + 1)
}

/// Time series of one trajectory: time (ns), qubit populations, photon
/// number, trace, purity and smallest eigenvalue.
pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time_ns".to_string()];
    header.extend((0..traj.num_qubits()).map(|q| format!("qubit{}", q + 1)));
    if traj.cavity_population.is_some() {
        header.push("photons".into());
    }
    header.extend(["trace", "purity", "min_eigenvalue"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for (s, &t) in traj.times.iter().enumerate() {
        let mut row = vec![fmt_ns(t)];
        row.extend(traj.qubit_populations.iter().map(|p| fmt(p[s])));
        if let Some(c) = &traj.cavity_population {
            row.push(fmt(c[s]));
        }
        row.extend([traj.trace[s], traj.purity[s], traj.min_eigenvalue[s]].map(fmt));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub m_hz: f64,
    pub stats: IntegratorStats,
}

/// Provenance record written next to the outputs of every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub code_version: String,
    pub subcommand: String,
    /// The resolved run configuration; loadable as a config file.
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointStats>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value) -> Self {
        Self {
            code_version: CODE_VERSION.to_string(),
            subcommand: subcommand.to_string(),
            config,
            config_hash: None,
            outputs: Vec::new(),
            wall_clock_s: 0.0,
            integrator: None,
            points: Vec::new(),
        }
    }

    pub fn with_map(mut self, map: &PopulationMap) -> Self {
        self.config_hash = Some(map.config_hash.clone());
        self.integrator = Some(map.total_stats());
        self.points = map
            .frequencies
            .iter()
            .zip(&map.stats)
            .map(|(&m, s)| PointStats {
                m_hz: angular_to_hz(m),
                stats: *s,
            })
            .collect();
        self
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}

/// Population CSVs for every qubit of a map.
pub fn add_map(set: &mut OutputSet, map: &PopulationMap) -> Result<()> {
    for q in 0..map.num_qubits() {
        set.add(population_file_name(q), population_csv(map, q)?);
    }
    Ok(())
}
