//! Per-pixel feature maps. The built-in extractor is 6-D (color + space +
//! time); arbitrary precomputed maps load from a flat binary file so richer
//! extractors can plug in without this crate knowing about them.

use crate::ClientError;
use scribbleval_core::raster::RasterSize;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct RgbFrame {
    size: RasterSize,
    pixels: Vec<[u8; 3]>,
}

impl RgbFrame {
    pub fn new(size: RasterSize, pixels: Vec<[u8; 3]>) -> Result<RgbFrame, ClientError> {
        if pixels.len() != size.pixel_count() {
            return Err(ClientError::BadParam(format!(
                "frame buffer holds {} pixels, size wants {}",
                pixels.len(),
                size.pixel_count()
            )));
        }
        Ok(RgbFrame { size, pixels })
    }

    pub fn size(&self) -> RasterSize {
        self.size
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[self.size.index(x, y)]
    }
}

pub fn load_rgb_jpeg(path: &Path) -> Result<RgbFrame, ClientError> {
    let io = |source| ClientError::Io {
        path: path.to_path_buf(),
        source,
    };
    let bytes = std::fs::read(path).map_err(io)?;
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Jpeg)
        .map_err(|e| ClientError::BadParam(format!("{}: {e}", path.display())))?
        .to_rgb8();
    let size = RasterSize::new(img.width(), img.height())
        .map_err(|e| ClientError::BadParam(format!("{}: {e}", path.display())))?;
    let pixels = img.pixels().map(|p| p.0).collect();
    RgbFrame::new(size, pixels)
}

/// Fixed-dimensional per-pixel features for a whole sequence, stored at a
/// possibly reduced spatial resolution. Layout: frame, then row, then
/// column, then channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    frames: usize,
    grid: RasterSize,
    dim: usize,
    factor: u32,
    data: Vec<f32>,
}

const FILE_MAGIC: u32 = 0x50414D46; // little-endian bytes "FMAP"
const FILE_VERSION: u32 = 1;

impl FeatureMap {
    pub fn new(
        frames: usize,
        grid: RasterSize,
        dim: usize,
        factor: u32,
        data: Vec<f32>,
    ) -> Result<FeatureMap, ClientError> {
        if frames == 0 || dim == 0 || factor == 0 {
            return Err(ClientError::BadParam(
                "feature map needs frames, dim, and factor all nonzero".into(),
            ));
        }
        let want = frames
            .checked_mul(grid.pixel_count())
            .and_then(|n| n.checked_mul(dim))
            .ok_or_else(|| ClientError::BadParam("feature map dimensions overflow".into()))?;
        if data.len() != want {
            return Err(ClientError::BadParam(format!(
                "feature buffer holds {} scalars, dimensions want {want}",
                data.len()
            )));
        }
        Ok(FeatureMap {
            frames,
            grid,
            dim,
            factor,
            data,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Spatial size of the feature grid (full resolution divided by factor).
    pub fn grid(&self) -> RasterSize {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor(&self) -> u32 {
        self.factor
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Feature vector at a feature-grid cell.
    pub fn at(&self, frame: usize, x: u32, y: u32) -> &[f32] {
        let i = (frame * self.grid.pixel_count() + self.grid.index(x, y)) * self.dim;
        &self.data[i..i + self.dim]
    }

    /// Feature-grid cell covering a full-resolution pixel.
    pub fn cell_of(&self, x: u32, y: u32) -> (u32, u32) {
        (
            (x / self.factor).min(self.grid.width() - 1),
            (y / self.factor).min(self.grid.height() - 1),
        )
    }

    pub fn write_file(&self, path: &Path) -> Result<(), ClientError> {
        let io = |source| ClientError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let header: [u32; 7] = [
            FILE_MAGIC,
            FILE_VERSION,
            self.frames as u32,
            self.grid.width(),
            self.grid.height(),
            self.dim as u32,
            self.factor,
        ];
        for word in header {
            out.write_all(&word.to_le_bytes()).map_err(io)?;
        }
        for value in &self.data {
            out.write_all(&value.to_le_bytes()).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read_file(path: &Path) -> Result<FeatureMap, ClientError> {
        let io = |source| ClientError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = std::io::BufReader::new(std::fs::File::open(path).map_err(io)?);
        let mut header = [0u8; 28];
        file.read_exact(&mut header)
            .map_err(|_| ClientError::BadFeatureFile("truncated header".into()))?;
        let word = |i: usize| u32::from_le_bytes(header[i * 4..i * 4 + 4].try_into().unwrap());
        if word(0) != FILE_MAGIC {
            return Err(ClientError::BadFeatureFile(format!(
                "bad magic {:#010x}",
                word(0)
            )));
        }
        if word(1) != FILE_VERSION {
            return Err(ClientError::BadFeatureFile(format!(
                "unsupported version {}",
                word(1)
            )));
        }
        let frames = word(2) as usize;
        let grid = RasterSize::new(word(3), word(4))
            .map_err(|e| ClientError::BadFeatureFile(e.to_string()))?;
        let dim = word(5) as usize;
        let factor = word(6);
        if frames == 0 || dim == 0 || factor == 0 {
            return Err(ClientError::BadFeatureFile(
                "frames, dim, and factor must be nonzero".into(),
            ));
        }
        let scalars = frames
            .checked_mul(grid.pixel_count())
            .and_then(|n| n.checked_mul(dim))
            .ok_or_else(|| ClientError::BadFeatureFile("dimensions overflow".into()))?;
        let mut body = vec![0u8; scalars * 4];
        file.read_exact(&mut body)
            .map_err(|_| ClientError::BadFeatureFile("truncated body".into()))?;
        let mut trailing = [0u8; 1];
        if file.read(&mut trailing).map_err(io)? != 0 {
            return Err(ClientError::BadFeatureFile("trailing bytes".into()));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        FeatureMap::new(frames, grid, dim, factor, data)
    }
}

fn axis(value: u32, extent: u32) -> f32 {
    // degenerate axes (a single frame, a one-pixel dimension) read 0
    if extent <= 1 {
        0.0
    } else {
        value as f32 / (extent - 1) as f32
    }
}

/// The built-in extractor: color in [0,1] plus normalized x, y, t. Full
/// resolution (factor 1), 6 channels, deterministic.
pub fn default_features(frames: &[RgbFrame]) -> Result<FeatureMap, ClientError> {
    let Some(first) = frames.first() else {
        return Err(ClientError::BadParam("no frames".into()));
    };
    let size = first.size();
    if frames.iter().any(|f| f.size() != size) {
        return Err(ClientError::SizeMismatch);
    }
    let mut data = Vec::with_capacity(frames.len() * size.pixel_count() * 6);
    for (t, frame) in frames.iter().enumerate() {
        let tf = axis(t as u32, frames.len() as u32);
        for y in 0..size.height() {
            for x in 0..size.width() {
                let [r, g, b] = frame.get(x, y);
                data.extend_from_slice(&[
                    r as f32 / 255.0,
                    g as f32 / 255.0,
                    b as f32 / 255.0,
                    axis(x, size.width()),
                    axis(y, size.height()),
                    tf,
                ]);
            }
        }
    }
    FeatureMap::new(frames.len(), size, 6, 1, data)
}
