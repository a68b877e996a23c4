//! Binary sample cache, so repeated runs skip CSV parsing and
//! featurization. Little-endian throughout; the header pins the window
//! length and a hash of the feature catalog, so stale caches are rejected
//! rather than silently misread.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dataset::{IngestStats, LabeledSample};
use crate::error::{Error, Result};
use crate::features::{catalog_ids, FeatureVector, RawWindow};
use crate::rng::fnv1a64;

const MAGIC: &[u8; 8] = b"TACHDSC1";
const VERSION: u32 = 1;

/// A fully ingested dataset: labeled samples plus the run's counters.
#[derive(Clone, Debug, PartialEq)]
pub struct CachedSet {
    pub threshold: f64,
    pub stats: IngestStats,
    pub samples: Vec<LabeledSample>,
}

fn catalog_hash() -> u64 {
    fnv1a64(catalog_ids().join("\n").as_bytes())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact(r)?))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact(r)?))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact(r)?))
}

/// Writes the sample set to `path`.
pub fn save_cache(path: &Path, set: &CachedSet) -> Result<()> {
    let window_len = match set.samples.first() {
        Some(s) => s.window.len(),
        None => return Err(Error::EmptyInput("refusing to cache an empty sample set".into())),
    };
    let catalog_len = catalog_ids().len();
    let mut pids: Vec<String> = Vec::new();
    let pid_idx: Vec<u32> = set
        .samples
        .iter()
        .map(|s| {
            match pids.iter().position(|p| p == s.pid()) {
                Some(i) => i as u32,
                None => {
                    pids.push(s.pid().to_string());
                    (pids.len() - 1) as u32
                }
            }
        })
        .collect();

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(window_len as u32).to_le_bytes())?;
    w.write_all(&(catalog_len as u32).to_le_bytes())?;
    w.write_all(&catalog_hash().to_le_bytes())?;
    w.write_all(&set.threshold.to_le_bytes())?;
    for word in set.stats.to_words() {
        w.write_all(&word.to_le_bytes())?;
    }
    w.write_all(&(pids.len() as u32).to_le_bytes())?;
    for pid in &pids {
        w.write_all(&(pid.len() as u32).to_le_bytes())?;
        w.write_all(pid.as_bytes())?;
    }
    w.write_all(&(set.samples.len() as u64).to_le_bytes())?;
    for (s, &pi) in set.samples.iter().zip(&pid_idx) {
        if s.window.len() != window_len {
            return Err(Error::DimMismatch { left: s.window.len(), right: window_len });
        }
        if s.features.len() != catalog_len {
            return Err(Error::DimMismatch { left: s.features.len(), right: catalog_len });
        }
        w.write_all(&pi.to_le_bytes())?;
        w.write_all(&[s.label])?;
        w.write_all(&s.tac.to_le_bytes())?;
        for &t in s.window.times() {
            w.write_all(&t.to_le_bytes())?;
        }
        for sample in s.window.samples() {
            for &v in sample {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        for &f in s.features.values() {
            w.write_all(&f.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a cache written by [`save_cache`], re-validating window and label
/// invariants.
pub fn load_cache(path: &Path) -> Result<CachedSet> {
    let mut r = BufReader::new(File::open(path)?);
    let magic: [u8; 8] = read_exact(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("{} is not a sample cache", path.display())));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported cache version {version}")));
    }
    let window_len = read_u32(&mut r)? as usize;
    let catalog_len = read_u32(&mut r)? as usize;
    let hash = read_u64(&mut r)?;
    if catalog_len != catalog_ids().len() || hash != catalog_hash() {
        return Err(Error::Format(
            "cache was built against a different feature catalog; re-run ingest".into(),
        ));
    }
    let threshold = read_f64(&mut r)?;
    let mut words = [0u64; 13];
    for word in &mut words {
        *word = read_u64(&mut r)?;
    }
    let stats = IngestStats::from_words(words);

    let n_pids = read_u32(&mut r)? as usize;
    let mut pids = Vec::with_capacity(n_pids);
    for _ in 0..n_pids {
        let len = read_u32(&mut r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        pids.push(String::from_utf8(buf).map_err(|_| {
            Error::Format("cache pid table is not valid UTF-8".into())
        })?);
    }

    let n_samples = read_u64(&mut r)? as usize;
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let pid_idx = read_u32(&mut r)? as usize;
        let pid = pids
            .get(pid_idx)
            .ok_or_else(|| Error::Format(format!("cache pid index {pid_idx} out of range")))?;
        let label = read_exact::<1>(&mut r)?[0];
        let tac = read_f64(&mut r)?;
        let mut times = Vec::with_capacity(window_len);
        for _ in 0..window_len {
            times.push(i64::from_le_bytes(read_exact(&mut r)?));
        }
        let mut sample_buf = vec![0u8; window_len * 12];
        r.read_exact(&mut sample_buf)?;
        let raw: Vec<[f32; 3]> = sample_buf
            .chunks_exact(12)
            .map(|c| {
                [
                    f32::from_le_bytes(c[0..4].try_into().unwrap()),
                    f32::from_le_bytes(c[4..8].try_into().unwrap()),
                    f32::from_le_bytes(c[8..12].try_into().unwrap()),
                ]
            })
            .collect();
        let mut features = Vec::with_capacity(catalog_len);
        for _ in 0..catalog_len {
            features.push(read_f64(&mut r)?);
        }
        if label != u8::from(tac >= threshold) {
            return Err(Error::Format(format!(
                "cache label {label} contradicts tac {tac} at threshold {threshold}"
            )));
        }
        samples.push(LabeledSample {
            window: RawWindow::new(pid.clone(), times, raw)?,
            features: FeatureVector::new(features)?,
            tac,
            label,
        });
    }
    Ok(CachedSet { threshold, stats, samples })
}
