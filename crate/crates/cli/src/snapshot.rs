//! Snapshot files: one little-endian `f64` payload per time level, plus a
//! run-wide `header.txt` and an `index.txt` of times and SHA-256 checksums.
//!
//! Payloads hold every species in turn, each laid out with `x` fastest.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rdspectral::postprocess::upsample_on_grid;
use rdspectral::{Axis, GridSpec};
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

pub const HEADER_FILE: &str = "header.txt";
pub const INDEX_FILE: &str = "index.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub model: String,
    pub scheme: String,
    /// Points per axis, `x` first.
    pub n: Vec<usize>,
    pub half_length: f64,
    pub species: usize,
    pub snap_every: Option<f64>,
}

impl Header {
    pub fn points(&self) -> usize {
        self.n.iter().product()
    }

    pub fn to_text(&self) -> String {
        let n: Vec<String> = self.n.iter().map(usize::to_string).collect();
        let mut s = format!(
            "format = f64-le species-major x-fastest\nmodel = {}\nscheme = {}\ndims = {}\nn = {}\nL = {}\nspecies = {}\n",
            self.model,
            self.scheme,
            self.n.len(),
            n.join(" "),
            self.half_length,
            self.species
        );
        if let Some(c) = self.snap_every {
            s.push_str(&format!("snap_every = {c}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let map = crate::config::ConfigMap::parse(text)?;
        let bad = |k: &str| CliError::Corrupt(format!("header field `{k}` missing or malformed"));
        let get = |k: &str| map.get(k).ok_or_else(|| bad(k));
        let n: Vec<usize> = get("n")?
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| bad("n")))
            .collect::<Result<_>>()?;
        let dims: usize = get("dims")?.parse().map_err(|_| bad("dims"))?;
        if n.len() != dims || !(1..=2).contains(&dims) {
            return Err(bad("n"));
        }
        Ok(Self {
            model: get("model")?.to_string(),
            scheme: get("scheme")?.to_string(),
            n,
            half_length: get("L")?.parse().map_err(|_| bad("L"))?,
            species: get("species")?.parse().map_err(|_| bad("species"))?,
            snap_every: map.get("snap_every").map(|v| v.parse().map_err(|_| bad("snap_every"))).transpose()?,
        })
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(HEADER_FILE);
        Self::parse(&fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub file: String,
    pub t: f64,
    pub sha256: String,
}

pub fn read_index(dir: &Path) -> Result<Vec<IndexEntry>> {
    let path = dir.join(INDEX_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            match parts.as_slice() {
                [file, t, sum] => Ok(IndexEntry {
                    file: file.to_string(),
                    t: t.parse().map_err(|_| CliError::Corrupt(format!("bad time in index line `{l}`")))?,
                    sha256: sum.to_string(),
                }),
                _ => Err(CliError::Corrupt(format!("bad index line `{l}`"))),
            }
        })
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode(fields: &[Vec<f64>]) -> Vec<u8> {
    fields.iter().flatten().flat_map(|v| v.to_le_bytes()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub fields: Vec<Vec<f64>>,
}

/// Appends snapshots to a run directory.
#[derive(Debug)]
pub struct SnapshotWriter {
    dir: PathBuf,
    header: Header,
    index: File,
    count: usize,
}

impl SnapshotWriter {
    pub fn create(dir: &Path, header: Header) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let hp = dir.join(HEADER_FILE);
        fs::write(&hp, header.to_text()).map_err(|e| CliError::io(&hp, e))?;
        let ip = dir.join(INDEX_FILE);
        let index = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(&ip)
            .map_err(|e| CliError::io(&ip, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
            index,
            count: 0,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn write(&mut self, t: f64, fields: &[Vec<f64>]) -> Result<PathBuf> {
        if fields.len() != self.header.species || fields.iter().any(|f| f.len() != self.header.points()) {
            return Err(CliError::Corrupt(format!(
                "snapshot at t = {t} does not match the run header ({} species of {} points)",
                self.header.species,
                self.header.points()
            )));
        }
        let name = format!("snap_{:05}.bin", self.count);
        let path = self.dir.join(&name);
        let bytes = encode(fields);
        fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        writeln!(self.index, "{name} {t} {}", sha256_hex(&bytes)).map_err(|e| CliError::io(&path, e))?;
        self.count += 1;
        Ok(path)
    }
}

pub fn read_entry(dir: &Path, header: &Header, entry: &IndexEntry) -> Result<Snapshot> {
    let path = dir.join(&entry.file);
    let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    if sha256_hex(&bytes) != entry.sha256 {
        return Err(CliError::Corrupt(format!("{}: checksum mismatch", path.display())));
    }
    let points = header.points();
    if bytes.len() != 8 * points * header.species {
        return Err(CliError::Corrupt(format!(
            "{}: {} bytes, expected {}",
            path.display(),
            bytes.len(),
            8 * points * header.species
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(Snapshot {
        t: entry.t,
        fields: values.chunks(points).map(<[f64]>::to_vec).collect(),
    })
}

/// Reads every snapshot of a run directory, in order.
pub fn read_run(dir: &Path) -> Result<(Header, Vec<Snapshot>)> {
    let header = Header::read(dir)?;
    let snaps = read_index(dir)?
        .iter()
        .map(|e| read_entry(dir, &header, e))
        .collect::<Result<_>>()?;
    Ok((header, snaps))
}

/// Reads one snapshot file, locating its header and checksum in the same
/// directory.
pub fn read_file(path: &Path) -> Result<(Header, Snapshot)> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Corrupt(format!("{} is not a snapshot file", path.display())))?;
    let header = Header::read(dir)?;
    let entry = read_index(dir)?
        .into_iter()
        .find(|e| e.file == name)
        .ok_or_else(|| CliError::Corrupt(format!("{name} is not listed in {INDEX_FILE}")))?;
    let snap = read_entry(dir, &header, &entry)?;
    Ok((header, snap))
}

/// Spectrally interpolates the snapshot at `path` onto `new_n` points per
/// axis and writes it as a one-snapshot run in a sibling subdirectory.
pub fn upsample_file(path: &Path, new_n: &[usize]) -> Result<PathBuf> {
    let (header, snap) = read_file(path)?;
    if new_n.len() != header.n.len() {
        return Err(CliError::Invalid(vec![format!(
            "upsample: snapshot is {}D but {} sizes were given",
            header.n.len(),
            new_n.len()
        )]));
    }
    if new_n.iter().zip(&header.n).any(|(new, old)| new < old) {
        return Err(CliError::Invalid(vec![format!(
            "upsample: target {new_n:?} is smaller than the source grid {:?}",
            header.n
        )]));
    }
    let axes: Vec<Axis> = header
        .n
        .iter()
        .map(|&n| Axis {
            n,
            half_length: header.half_length,
        })
        .collect();
    let grid = GridSpec::from_axes(&axes)?;
    let fields = snap
        .fields
        .iter()
        .map(|f| upsample_on_grid(&grid, f, new_n))
        .collect::<rdspectral::Result<Vec<_>>>()?;
    let dims: Vec<String> = new_n.iter().map(usize::to_string).collect();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("snap");
    let dir = path
        .parent()
        .unwrap_or(Path::new("."))
        .join(format!("upsampled_{stem}_{}", dims.join("x")));
    let mut w = SnapshotWriter::create(
        &dir,
        Header {
            n: new_n.to_vec(),
            ..header
        },
    )?;
    w.write(snap.t, &fields)
}
