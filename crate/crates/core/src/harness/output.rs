//! Run-directory files: `summary.csv`, `trajectories.csv`,
//! `network_<c>_<u>_<rep>.json` and `meta.json`.
//!
//! Numbers are written with Rust's shortest round-trip formatting and missing
//! values as `NA`, so identical runs produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CellSummary, Trajectory};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}, record {record}: {message}")]
    Format { path: PathBuf, record: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.to_owned(),
        source,
    }
}

pub fn format_number(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| x.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: u64,
    /// Trophic level; absent for nodes outside the solved component.
    pub level: Option<f64>,
    pub in_component: bool,
    /// Endorsements received as speaker.
    pub speaking_frequency: f64,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub layer: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub listener: u64,
    pub speaker: u64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub step: u64,
    pub incoherence: Option<f64>,
    pub survivors_only: bool,
    pub nodes: Vec<NetworkNode>,
    pub edges: Vec<NetworkEdge>,
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "c",
    "u",
    "replicate-count",
    "mean_final_TI",
    "median_final_TI",
    "iqr_final_TI",
    "regime",
    "onset_step",
    "extinct_count",
];

pub const TRAJECTORY_HEADER: [&str; 6] = ["c", "u", "replicate", "step", "TI", "population"];

/// Writes summary rows to any CSV sink.
pub fn write_summary_rows<W: Write>(w: &mut csv::Writer<W>, cells: &[CellSummary]) -> csv::Result<()> {
    w.write_record(SUMMARY_HEADER)?;
    for cell in cells {
        let s = cell.summary.as_ref();
        w.write_record([
            format_number(cell.c),
            format_number(cell.u),
            cell.replicate_count.to_string(),
            opt(s.map(|s| format_number(s.mean))),
            opt(s.map(|s| format_number(s.median))),
            opt(s.map(|s| format_number(s.iqr))),
            cell.regime.to_string(),
            opt(cell.onset_step),
            cell.extinct_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv` through a temporary file so a partial run never leaves one behind.
pub fn write_summary(dir: &Path, cells: &[CellSummary]) -> Result<PathBuf, OutputError> {
    let path = dir.join("summary.csv");
    let tmp = dir.join(".summary.csv.tmp");
    let mut w = csv::Writer::from_path(&tmp).map_err(csv_err(&tmp))?;
    write_summary_rows(&mut w, cells).map_err(csv_err(&tmp))?;
    drop(w);
    fs::rename(&tmp, &path).map_err(io_err(&path))?;
    Ok(path)
}

/// One trajectory as stored on disk, with its cell key.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredTrajectory {
    pub c: f64,
    pub u: f64,
    pub replicate: usize,
    pub trajectory: Trajectory,
}

pub fn write_trajectories<'a>(
    dir: &Path,
    rows: impl IntoIterator<Item = (f64, f64, usize, &'a Trajectory)>,
) -> Result<PathBuf, OutputError> {
    let path = dir.join("trajectories.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err(&path))?;
    for (c, u, rep, traj) in rows {
        for k in 0..traj.len() {
            w.write_record([
                format_number(c),
                format_number(u),
                rep.to_string(),
                traj.times[k].to_string(),
                opt(traj.ti[k].map(format_number)),
                traj.population[k].to_string(),
            ])
            .map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Reads `trajectories.csv`, grouping rows by `(c, u, replicate)` in order of first appearance.
pub fn read_trajectories(path: &Path) -> Result<Vec<StoredTrajectory>, OutputError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = r.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(OutputError::Format {
            path: path.to_owned(),
            record: 0,
            message: format!("expected header {}", TRAJECTORY_HEADER.join(",")),
        });
    }
    let mut out: Vec<StoredTrajectory> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |message: String| OutputError::Format {
            path: path.to_owned(),
            record: k + 1,
            message,
        };
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64, OutputError> {
            field(i)
                .parse::<f64>()
                .map_err(|e| bad(format!("column {}: {e}", TRAJECTORY_HEADER[i])))
        };
        let int = |i: usize| -> Result<u64, OutputError> {
            field(i)
                .parse::<u64>()
                .map_err(|e| bad(format!("column {}: {e}", TRAJECTORY_HEADER[i])))
        };
        let (c, u, rep, step) = (num(0)?, num(1)?, int(2)? as usize, int(3)?);
        let ti = match field(4) {
            "NA" => None,
            _ => Some(num(4)?),
        };
        let population = int(5)? as usize;
        let slot = match out.iter().position(|s| s.c == c && s.u == u && s.replicate == rep) {
            Some(i) => i,
            None => {
                out.push(StoredTrajectory {
                    c,
                    u,
                    replicate: rep,
                    trajectory: Trajectory::default(),
                });
                out.len() - 1
            }
        };
        let t = &mut out[slot].trajectory;
        if t.times.last().is_some_and(|&prev| step <= prev) {
            return Err(bad(format!("step {step} not increasing")));
        }
        t.times.push(step);
        t.ti.push(ti);
        t.population.push(population);
    }
    Ok(out)
}

pub fn network_file_name(c: f64, u: f64, replicate: usize) -> String {
    format!("network_{}_{}_{}.json", format_number(c), format_number(u), replicate)
}

pub fn write_network(
    dir: &Path,
    c: f64,
    u: f64,
    replicate: usize,
    net: &NetworkSnapshot,
) -> Result<PathBuf, OutputError> {
    let path = dir.join(network_file_name(c, u, replicate));
    write_json(&path, net)?;
    Ok(path)
}

pub fn write_meta(dir: &Path, meta: &serde_json::Value) -> Result<PathBuf, OutputError> {
    let path = dir.join("meta.json");
    write_json(&path, meta)?;
    Ok(path)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| OutputError::Json {
        path: path.to_owned(),
        source,
    })?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RegimeLabel;
    use crate::stats::Summary;

    fn sample() -> Trajectory {
        Trajectory {
            times: vec![100, 200, 300],
            ti: vec![None, Some(0.5), Some(0.25)],
            population: vec![10, 12, 0],
        }
    }

    #[test]
    fn trajectories_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        let other = Trajectory {
            times: vec![100],
            ti: vec![Some(0.1 + 0.2)],
            population: vec![3],
        };
        write_trajectories(dir.path(), [(0.05, 1.0, 0, &t), (0.05, 1.0, 1, &other)]).unwrap();
        let back = read_trajectories(&dir.path().join("trajectories.csv")).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].trajectory, t);
        assert_eq!(back[1].trajectory, other);
        assert_eq!((back[1].c, back[1].u, back[1].replicate), (0.05, 1.0, 1));
    }

    #[test]
    fn empty_trajectory_file_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let empty = Trajectory::default();
        let p = write_trajectories(dir.path(), [(0.05, 1.0, 0, &empty)]).unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "c,u,replicate,step,TI,population\n");
    }

    #[test]
    fn summary_row_format() {
        let dir = tempfile::tempdir().unwrap();
        let cell = CellSummary {
            c: 0.05,
            u: 1.0,
            replicate_count: 4,
            final_ti: vec![0.1, 0.2, 0.3, 0.4],
            summary: Some(Summary {
                mean: 0.25,
                median: 0.25,
                iqr: 0.15,
            }),
            regime: RegimeLabel::NoChange,
            onset_step: None,
            extinct_count: 0,
        };
        let p = write_summary(dir.path(), &[cell]).unwrap();
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(
            text,
            "c,u,replicate-count,mean_final_TI,median_final_TI,iqr_final_TI,regime,onset_step,extinct_count\n\
             0.05,1,4,0.25,0.25,0.15,NoChange,NA,0\n"
        );
        assert!(!dir.path().join(".summary.csv.tmp").exists());
    }

    #[test]
    fn rejects_wrong_header_and_bad_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_trajectories(&p), Err(OutputError::Format { record: 0, .. })));
        fs::write(&p, "c,u,replicate,step,TI,population\n0,0,0,200,NA,1\n0,0,0,100,NA,1\n").unwrap();
        assert!(matches!(read_trajectories(&p), Err(OutputError::Format { record: 2, .. })));
    }

    #[test]
    fn network_name() {
        assert_eq!(network_file_name(0.05, 1.0, 3), "network_0.05_1_3.json");
    }
}
