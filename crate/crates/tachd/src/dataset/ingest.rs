//! CSV readers for the accelerometer stream and the per-participant TAC
//! files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::dataset::{AccelRecord, TacRecord};
use crate::error::{Error, Result};

/// One participant's time-sorted accelerometer stream, stored columnar to
/// avoid a per-row pid allocation across the ~14M-row file.
#[derive(Clone, Debug)]
pub struct ParticipantStream {
    pub pid: String,
    /// Epoch milliseconds, strictly increasing after load-time cleanup.
    pub times: Vec<i64>,
    pub samples: Vec<[f32; 3]>,
}

/// Result of loading the accelerometer CSV.
#[derive(Clone, Debug)]
pub struct AccelLoad {
    /// Streams in order of first appearance in the file.
    pub streams: Vec<ParticipantStream>,
    pub rows: u64,
    pub malformed_rows: u64,
    /// Rows whose timestamp went backwards within their pid (sorted away).
    pub out_of_order_rows: u64,
    /// Rows sharing a timestamp with their predecessor (dropped).
    pub duplicate_times: u64,
}

/// Parses one accelerometer CSV row. Returns `None` for malformed rows.
pub fn parse_accel_row(line: &str) -> Option<AccelRecord> {
    let mut parts = line.split(',');
    let time = parts.next()?.trim().parse::<i64>().ok()?;
    let pid = parts.next()?.trim();
    if pid.is_empty() {
        return None;
    }
    let x = parts.next()?.trim().parse::<f32>().ok()?;
    let y = parts.next()?.trim().parse::<f32>().ok()?;
    let z = parts.next()?.trim().parse::<f32>().ok()?;
    if parts.next().is_some() || !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return None;
    }
    Some(AccelRecord { time, pid: pid.to_string(), x, y, z })
}

/// Loads `all_accelerometer_data_pids_13.csv`, grouping rows per participant.
///
/// Malformed rows are skipped and tallied. Each stream is then sorted by
/// time (out-of-order rows tallied) and consecutive duplicate timestamps are
/// dropped, so downstream windows always see strictly increasing times.
pub fn load_accel(path: &Path) -> Result<AccelLoad> {
    let file = File::open(path).map_err(|e| {
        Error::Ingest(format!("cannot open accelerometer file {}: {e}", path.display()))
    })?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::Ingest(format!("{} is empty", path.display()))),
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["time", "pid", "x", "y", "z"] {
        return Err(Error::Ingest(format!(
            "unexpected accelerometer header '{header}' (want time,pid,x,y,z)"
        )));
    }

    let mut order: Vec<String> = Vec::new();
    let mut by_pid: HashMap<String, (Vec<i64>, Vec<[f32; 3]>)> = HashMap::new();
    let mut rows = 0u64;
    let mut malformed = 0u64;
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        rows += 1;
        let Some(rec) = parse_accel_row(&line) else {
            malformed += 1;
            continue;
        };
        let entry = by_pid.entry(rec.pid.clone()).or_insert_with(|| {
            order.push(rec.pid.clone());
            (Vec::new(), Vec::new())
        });
        entry.0.push(rec.time);
        entry.1.push([rec.x, rec.y, rec.z]);
    }

    let mut out_of_order = 0u64;
    let mut duplicates = 0u64;
    let mut streams = Vec::with_capacity(order.len());
    for pid in order {
        let (times, samples) = by_pid.remove(&pid).unwrap();
        out_of_order += times.windows(2).filter(|w| w[1] < w[0]).count() as u64;
        let mut idx: Vec<usize> = (0..times.len()).collect();
        idx.sort_by_key(|&i| (times[i], i));
        let mut st = ParticipantStream {
            pid,
            times: Vec::with_capacity(times.len()),
            samples: Vec::with_capacity(samples.len()),
        };
        for i in idx {
            if st.times.last() == Some(&times[i]) {
                duplicates += 1;
                continue;
            }
            st.times.push(times[i]);
            st.samples.push(samples[i]);
        }
        streams.push(st);
    }

    Ok(AccelLoad {
        streams,
        rows,
        malformed_rows: malformed,
        out_of_order_rows: out_of_order,
        duplicate_times: duplicates,
    })
}

/// Loads `clean_tac/<PID>_clean_TAC.csv`, sorted by timestamp.
pub fn load_tac(dir: &Path, pid: &str) -> Result<Vec<TacRecord>> {
    let path = dir.join(format!("{pid}_clean_TAC.csv"));
    let file = File::open(&path)
        .map_err(|e| Error::Ingest(format!("cannot open TAC file {}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::Ingest(format!("{} is empty", path.display()))),
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["timestamp", "TAC_Reading"] {
        return Err(Error::Ingest(format!(
            "unexpected TAC header '{header}' in {} (want timestamp,TAC_Reading)",
            path.display()
        )));
    }
    let mut series = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (ts, tac) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => {
                (a.trim().parse::<f64>(), b.trim().parse::<f64>())
            }
            _ => {
                return Err(Error::Ingest(format!(
                    "{} line {}: expected two columns",
                    path.display(),
                    n + 2
                )))
            }
        };
        match (ts, tac) {
            (Ok(t), Ok(v)) if t.is_finite() && v.is_finite() => {
                series.push(TacRecord { timestamp: t, tac: v })
            }
            _ => {
                return Err(Error::Ingest(format!(
                    "{} line {}: non-numeric row",
                    path.display(),
                    n + 2
                )))
            }
        }
    }
    series.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parse_row_identity() {
        let rec = parse_accel_row("1493733882409,BK7610,0.01,-0.02,0.98").unwrap();
        assert_eq!(
            rec,
            AccelRecord {
                time: 1493733882409,
                pid: "BK7610".into(),
                x: 0.01,
                y: -0.02,
                z: 0.98
            }
        );
    }

    #[test]
    fn parse_rejects_bad_rows() {
        assert!(parse_accel_row("xyz,BK7610,0,0,0").is_none());
        assert!(parse_accel_row("1,BK7610,oops,0,0").is_none());
        assert!(parse_accel_row("1,,0,0,0").is_none());
        assert!(parse_accel_row("1,BK7610,0,0").is_none());
        assert!(parse_accel_row("1,BK7610,0,0,0,9").is_none());
        assert!(parse_accel_row("1,BK7610,NaN,0,0").is_none());
    }

    #[test]
    fn accel_load_groups_sorts_and_tallies() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("acc.csv");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "time,pid,x,y,z").unwrap();
        writeln!(f, "30,A,1,1,1").unwrap();
        writeln!(f, "10,A,0,0,0").unwrap();
        writeln!(f, "5,B,2,2,2").unwrap();
        writeln!(f, "bogus,A,0,0,0").unwrap();
        writeln!(f, "10,A,9,9,9").unwrap();
        drop(f);

        let load = load_accel(&path).unwrap();
        assert_eq!(load.rows, 5);
        assert_eq!(load.malformed_rows, 1);
        assert_eq!(load.out_of_order_rows, 1);
        assert_eq!(load.duplicate_times, 1);
        assert_eq!(load.streams.len(), 2);
        assert_eq!(load.streams[0].pid, "A");
        assert_eq!(load.streams[0].times, vec![10, 30]);
        // The first row at t=10 wins; the later duplicate is dropped.
        assert_eq!(load.streams[0].samples[0], [0.0, 0.0, 0.0]);
        assert_eq!(load.streams[1].pid, "B");
    }

    #[test]
    fn accel_load_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("acc.csv");
        std::fs::write(&path, "a,b,c\n").unwrap();
        assert!(load_accel(&path).is_err());
        assert!(load_accel(&dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn empty_file_after_header_is_empty_stream() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("acc.csv");
        std::fs::write(&path, "time,pid,x,y,z\n").unwrap();
        let load = load_accel(&path).unwrap();
        assert_eq!(load.rows, 0);
        assert!(load.streams.is_empty());
    }

    #[test]
    fn tac_load_sorts_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("P_clean_TAC.csv");
        std::fs::write(&path, "timestamp,TAC_Reading\n200,0.02\n100,0.01\n").unwrap();
        let series = load_tac(dir.path(), "P").unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series[0], TacRecord { timestamp: 100.0, tac: 0.01 });
        assert_eq!(series[1], TacRecord { timestamp: 200.0, tac: 0.02 });
        assert!(load_tac(dir.path(), "MISSING").is_err());
    }

    #[test]
    fn tac_single_row() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("Q_clean_TAC.csv"), "timestamp,TAC_Reading\n7,0.1\n")
            .unwrap();
        let series = load_tac(dir.path(), "Q").unwrap();
        assert_eq!(series, vec![TacRecord { timestamp: 7.0, tac: 0.1 }]);
    }
}
