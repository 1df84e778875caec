//! On-disk dataset layout:
//!
//! ```text
//! root/Images/<sequence>/00000.jpg ...
//! root/Annotations/<sequence>/00000.png ...   (indexed palette, index = id)
//! root/Splits/<name>.txt                      (one sequence per line)
//! root/Scribbles/<sequence>/<annotator>.json  (recorded scribble sets)
//! ```
//!
//! Frame files are five-digit, zero-based, contiguous. The manifest is
//! read once at startup and is immutable afterwards.

use scribbleval_core::raster::{palette::load_label_mask, LabelMask, RasterSize};
use scribbleval_core::robot::wire::{from_wire, WireScribbleSet};
use scribbleval_core::robot::{ScribbleKind, ScribbleSet};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset io on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no splits found under {0}")]
    NoSplits(PathBuf),
    #[error("split {split}: sequence {sequence} has no {kind} directory")]
    MissingSequenceDir {
        split: String,
        sequence: String,
        kind: &'static str,
    },
    #[error("sequence {sequence}: expected frame file {expected}, found {found:?}")]
    BadFrameFile {
        sequence: String,
        expected: String,
        found: String,
    },
    #[error("sequence {sequence}: {images} images but {annotations} annotations")]
    FrameCountMismatch {
        sequence: String,
        images: usize,
        annotations: usize,
    },
    #[error("sequence {sequence}: no frames")]
    EmptySequence { sequence: String },
    #[error("sequence {sequence} frame {frame}: size {got} differs from {want}")]
    SizeMismatch {
        sequence: String,
        frame: usize,
        want: RasterSize,
        got: RasterSize,
    },
    #[error("sequence {sequence}: {source}")]
    BadMask {
        sequence: String,
        #[source]
        source: scribbleval_core::raster::RasterError,
    },
    #[error("unknown sequence {0:?}")]
    UnknownSequence(String),
    #[error("scribble pool {path}: {message}")]
    BadPool { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceMeta {
    pub frames: usize,
    pub size: RasterSize,
    /// Non-zero ids seen anywhere in the sequence, ascending.
    pub objects: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub splits: BTreeMap<String, Vec<String>>,
    pub sequences: BTreeMap<String, SequenceMeta>,
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Directory entries named `00000.<ext>`, `00001.<ext>`, ... with no gaps.
fn frame_files(dir: &Path, ext: &str, sequence: &str) -> Result<Vec<PathBuf>, DatasetError> {
    let mut names: Vec<String> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        names.push(name);
    }
    names.sort();
    let mut out = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        let expected = format!("{i:05}.{ext}");
        if *name != expected {
            return Err(DatasetError::BadFrameFile {
                sequence: sequence.to_owned(),
                expected,
                found: name.clone(),
            });
        }
        out.push(dir.join(name));
    }
    Ok(out)
}

fn read_split_file(path: &Path) -> Result<Vec<String>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

/// Scan the layout and validate every listed sequence: images and
/// annotations must agree in count, all annotation frames must share one
/// size, and every mask must decode.
pub fn load_manifest(root: &Path) -> Result<DatasetManifest, DatasetError> {
    let splits_dir = root.join("Splits");
    let mut splits = BTreeMap::new();
    let entries = std::fs::read_dir(&splits_dir).map_err(|e| io_err(&splits_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| io_err(&splits_dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        splits.insert(name, read_split_file(&path)?);
    }
    if splits.is_empty() {
        return Err(DatasetError::NoSplits(splits_dir));
    }

    let mut sequences = BTreeMap::new();
    for (split, members) in &splits {
        for sequence in members {
            if sequences.contains_key(sequence) {
                continue;
            }
            let ann_dir = root.join("Annotations").join(sequence);
            let img_dir = root.join("Images").join(sequence);
            for (dir, kind) in [(&ann_dir, "Annotations"), (&img_dir, "Images")] {
                if !dir.is_dir() {
                    return Err(DatasetError::MissingSequenceDir {
                        split: split.clone(),
                        sequence: sequence.clone(),
                        kind,
                    });
                }
            }
            let annotations = frame_files(&ann_dir, "png", sequence)?;
            let images = frame_files(&img_dir, "jpg", sequence)?;
            if annotations.is_empty() {
                return Err(DatasetError::EmptySequence {
                    sequence: sequence.clone(),
                });
            }
            if images.len() != annotations.len() {
                return Err(DatasetError::FrameCountMismatch {
                    sequence: sequence.clone(),
                    images: images.len(),
                    annotations: annotations.len(),
                });
            }
            let mut size: Option<RasterSize> = None;
            let mut objects = std::collections::BTreeSet::new();
            for (frame, path) in annotations.iter().enumerate() {
                let mask = load_label_mask(path).map_err(|source| DatasetError::BadMask {
                    sequence: sequence.clone(),
                    source,
                })?;
                match size {
                    None => size = Some(mask.size()),
                    Some(want) if want != mask.size() => {
                        return Err(DatasetError::SizeMismatch {
                            sequence: sequence.clone(),
                            frame,
                            want,
                            got: mask.size(),
                        })
                    }
                    Some(_) => {}
                }
                objects.extend(mask.object_ids());
            }
            sequences.insert(
                sequence.clone(),
                SequenceMeta {
                    frames: annotations.len(),
                    size: size.expect("nonempty sequence has a size"),
                    objects: objects.into_iter().collect(),
                },
            );
        }
    }
    Ok(DatasetManifest { splits, sequences })
}

/// Read-only handle to a validated dataset.
#[derive(Debug, Clone)]
pub struct Repository {
    root: PathBuf,
    manifest: DatasetManifest,
}

impl Repository {
    pub fn open(root: &Path) -> Result<Repository, DatasetError> {
        Ok(Repository {
            root: root.to_path_buf(),
            manifest: load_manifest(root)?,
        })
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn meta(&self, sequence: &str) -> Result<&SequenceMeta, DatasetError> {
        self.manifest
            .sequences
            .get(sequence)
            .ok_or_else(|| DatasetError::UnknownSequence(sequence.to_owned()))
    }

    pub fn split(&self, name: &str) -> Option<&[String]> {
        self.manifest.splits.get(name).map(Vec::as_slice)
    }

    pub fn image_path(&self, sequence: &str, frame: usize) -> PathBuf {
        self.root
            .join("Images")
            .join(sequence)
            .join(format!("{frame:05}.jpg"))
    }

    /// Ground-truth label masks for the whole sequence; server-side only.
    pub fn load_ground_truth(&self, sequence: &str) -> Result<Vec<LabelMask>, DatasetError> {
        let meta = self.meta(sequence)?;
        let mut frames = Vec::with_capacity(meta.frames);
        for frame in 0..meta.frames {
            let path = self
                .root
                .join("Annotations")
                .join(sequence)
                .join(format!("{frame:05}.png"));
            frames.push(load_label_mask(&path).map_err(|source| DatasetError::BadMask {
                sequence: sequence.to_owned(),
                source,
            })?);
        }
        Ok(frames)
    }

    /// Recorded human scribbles for the sequence, if any. With several
    /// annotator files present the lexicographically first one is used, so
    /// every session on a sequence starts from the same strokes.
    pub fn load_scribble_pool(
        &self,
        sequence: &str,
    ) -> Result<Option<ScribbleSet>, DatasetError> {
        self.meta(sequence)?;
        let dir = self.root.join("Scribbles").join(sequence);
        if !dir.is_dir() {
            return Ok(None);
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| io_err(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
            .collect();
        files.sort();
        let Some(path) = files.into_iter().next() else {
            return Ok(None);
        };
        let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let wire: WireScribbleSet =
            serde_json::from_str(&text).map_err(|e| DatasetError::BadPool {
                path: path.clone(),
                message: e.to_string(),
            })?;
        let set = from_wire(&wire, ScribbleKind::Human).map_err(|e| DatasetError::BadPool {
            path,
            message: e.to_string(),
        })?;
        Ok(Some(set))
    }
}
