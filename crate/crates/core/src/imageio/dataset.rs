use std::fs;
use std::path::{Path, PathBuf};

use super::{flatten, read_pnm, resize_bilinear, ImageError, Result};
use crate::exec::{map_range, Execution};
use crate::linalg::Vector;

/// File extensions picked up by [`scan_dataset`], compared case-insensitively.
pub const IMAGE_EXTENSIONS: [&str; 3] = ["pgm", "ppm", "pnm"];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub label: String,
    pub source_path: PathBuf,
    pub vector: Vector,
}

impl LabeledSample {
    pub fn new(label: impl Into<String>, source_path: impl Into<PathBuf>, vector: Vector) -> Self {
        LabeledSample { label: label.into(), source_path: source_path.into(), vector }
    }
}

/// Labeled image vectors of one common length, sorted by `(label, path)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    samples: Vec<LabeledSample>,
    side: Option<usize>,
}

impl DatasetManifest {
    /// Validates and sorts `samples`. When `side` is given every vector must
    /// have length `side²`.
    pub fn new(mut samples: Vec<LabeledSample>, side: Option<usize>) -> Result<Self> {
        let dim = samples
            .first()
            .map(|s| s.vector.len())
            .ok_or_else(|| ImageError::InvalidManifest("no samples".into()))?;
        if let Some(n) = side {
            if n * n != dim {
                return Err(ImageError::InvalidManifest(format!(
                    "side {n} implies {} pixels, samples have {dim}",
                    n * n
                )));
            }
        }
        for s in &samples {
            if s.label.is_empty() {
                return Err(ImageError::InvalidManifest(format!(
                    "empty label for {}",
                    s.source_path.display()
                )));
            }
            if s.vector.len() != dim {
                return Err(ImageError::InvalidManifest(format!(
                    "{} has {} pixels, expected {dim}",
                    s.source_path.display(),
                    s.vector.len()
                )));
            }
        }
        samples.sort_by(|a, b| (&a.label, &a.source_path).cmp(&(&b.label, &b.source_path)));
        Ok(DatasetManifest { samples, side })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length of every sample vector.
    pub fn dim(&self) -> usize {
        self.samples[0].vector.len()
    }

    pub fn side(&self) -> Option<usize> {
        self.side
    }

    /// Distinct labels in sorted order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.samples.iter().map(|s| s.label.as_str()).collect();
        out.dedup();
        out
    }
}

/// Reads one PNM file, resamples it to `n`×`n` and flattens it.
pub fn load_image_vector(path: &Path, n: usize) -> Result<Vector> {
    let bytes = fs::read(path).map_err(|source| ImageError::Io { path: path.to_owned(), source })?;
    let img = read_pnm(&bytes)
        .map_err(|e| ImageError::File { path: path.to_owned(), source: Box::new(e) })?;
    flatten(&resize_bilinear(&img, n))
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |source| ImageError::Io { path: dir.to_owned(), source };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        out.push(entry.map_err(io_err)?.path());
    }
    out.sort();
    Ok(out)
}

pub fn scan_dataset(root: &Path, n: usize) -> Result<DatasetManifest> {
    scan_dataset_with(root, n, Execution::default())
}

/// Loads `<root>/<label>/<frame>.{pgm,ppm,pnm}`. Files directly under `root`
/// and files with other extensions are ignored. Files are decoded under
/// `exec`; the first failing file in sorted order is reported.
pub fn scan_dataset_with(root: &Path, n: usize, exec: Execution) -> Result<DatasetManifest> {
    assert!(n >= 1, "side length must be positive");
    let mut entries: Vec<(String, PathBuf)> = Vec::new();
    for dir in read_dir_sorted(root)? {
        if !dir.is_dir() {
            continue;
        }
        let label = dir.file_name().expect("read_dir entry").to_string_lossy().into_owned();
        for file in read_dir_sorted(&dir)? {
            if file.is_file() && has_image_extension(&file) {
                entries.push((label.clone(), file));
            }
        }
    }
    if entries.is_empty() {
        return Err(ImageError::EmptyDataset(root.to_owned()));
    }
    entries.sort();

    let loaded = map_range(exec, entries.len(), |i| load_image_vector(&entries[i].1, n));
    let mut samples = Vec::with_capacity(entries.len());
    for ((label, path), vector) in entries.into_iter().zip(loaded) {
        samples.push(LabeledSample { label, source_path: path, vector: vector? });
    }
    DatasetManifest::new(samples, Some(n))
}
