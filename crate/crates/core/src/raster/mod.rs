//! Raster containers: validated sizes, bit masks, object-label maps,
//! structuring elements, and pixel paths.

pub mod components;
pub mod draw;
pub mod morph;
pub mod palette;
pub mod rle;

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Hard ceiling on pixels per raster; keeps every index and run-length sum
/// comfortably inside `u32`/`usize`.
pub const MAX_PIXELS: u64 = 1 << 31;

/// Largest usable object id. Palette index 255 is rejected on load so the
/// full `u8` range never silently aliases a real object.
pub const MAX_OBJECT_ID: u8 = 254;

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("invalid raster size {width}x{height}")]
    InvalidSize { width: u32, height: u32 },
    #[error("raster sizes differ: {a} vs {b}")]
    SizeMismatch { a: RasterSize, b: RasterSize },
    #[error("label {0} exceeds the object id ceiling of 254")]
    LabelTooLarge(u16),
    #[error("buffer holds {got} entries, raster needs {want}")]
    BadBufferLength { want: usize, got: usize },
    #[error("point ({x}, {y}) lies outside the unit square")]
    OutsideUnitSquare { x: f64, y: f64 },
    #[error("polyline needs at least one point")]
    EmptyPolyline,
    #[error("pixel path is empty")]
    EmptyPath,
    #[error("pixel path repeats or jumps at ({x}, {y})")]
    BrokenPath { x: u32, y: u32 },
    #[error("run lengths sum to {got}, raster holds {want} pixels")]
    RunSumMismatch { want: u64, got: u64 },
    #[error("{path}: not an indexed-color image")]
    NotIndexed { path: String },
    #[error("{path}: unsupported bit depth {depth}")]
    BadBitDepth { path: String, depth: u8 },
    #[error("{path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: png::DecodingError,
    },
    #[error("{path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: png::EncodingError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Serialize, Deserialize)]
struct RawSize {
    width: u32,
    height: u32,
}

/// Dimensions of one raster. Non-empty and below [`MAX_PIXELS`] by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSize", into = "RawSize")]
pub struct RasterSize {
    width: u32,
    height: u32,
}

impl RasterSize {
    pub fn new(width: u32, height: u32) -> Result<Self, RasterError> {
        if width == 0 || height == 0 || (width as u64) * (height as u64) > MAX_PIXELS {
            return Err(RasterError::InvalidSize { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn height(self) -> u32 {
        self.height
    }

    pub fn pixel_count(self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn diagonal(self) -> f64 {
        ((self.width as f64).powi(2) + (self.height as f64).powi(2)).sqrt()
    }

    pub fn contains_signed(self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    #[inline]
    pub fn index(self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y as usize * self.width as usize + x as usize
    }
}

impl fmt::Display for RasterSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl TryFrom<RawSize> for RasterSize {
    type Error = RasterError;

    fn try_from(raw: RawSize) -> Result<Self, RasterError> {
        RasterSize::new(raw.width, raw.height)
    }
}

impl From<RasterSize> for RawSize {
    fn from(s: RasterSize) -> RawSize {
        RawSize {
            width: s.width,
            height: s.height,
        }
    }
}

/// Row-major bit mask. Binary operations panic when sizes differ; public
/// entry points validate sizes and surface [`RasterError::SizeMismatch`]
/// before calling in here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    size: RasterSize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(size: RasterSize) -> Self {
        Self {
            size,
            bits: vec![false; size.pixel_count()],
        }
    }

    pub fn from_fn(size: RasterSize, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(size.pixel_count());
        for y in 0..size.height() {
            for x in 0..size.width() {
                bits.push(f(x, y));
            }
        }
        Self { size, bits }
    }

    pub fn size(&self) -> RasterSize {
        self.size
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.size.index(x, y)]
    }

    /// Out-of-frame coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        self.size.contains_signed(x, y) && self.bits[self.size.index(x as u32, y as u32)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.size.index(x, y);
        self.bits[i] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|b| *b)
    }

    /// Foreground pixels in row-major order.
    pub fn iter_ones(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.size.width();
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i as u32) % w, (i as u32) / w))
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        assert_eq!(self.size, other.size, "mask size mismatch");
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }

    pub fn subtract(&mut self, other: &BinaryMask) {
        assert_eq!(self.size, other.size, "mask size mismatch");
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !*b;
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        assert_eq!(self.size, other.size, "mask size mismatch");
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }
}

/// Row-major object-id map. 0 is background; object ids run 1..=254.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    size: RasterSize,
    labels: Vec<u8>,
}

impl LabelMask {
    pub fn new(size: RasterSize) -> Self {
        Self {
            size,
            labels: vec![0; size.pixel_count()],
        }
    }

    pub fn from_vec(size: RasterSize, labels: Vec<u8>) -> Result<Self, RasterError> {
        if labels.len() != size.pixel_count() {
            return Err(RasterError::BadBufferLength {
                want: size.pixel_count(),
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > MAX_OBJECT_ID) {
            return Err(RasterError::LabelTooLarge(bad as u16));
        }
        Ok(Self { size, labels })
    }

    pub fn size(&self) -> RasterSize {
        self.size
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[self.size.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, label: u8) {
        debug_assert!(label <= MAX_OBJECT_ID);
        let i = self.size.index(x, y);
        self.labels[i] = label;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.labels
    }

    /// Distinct nonzero labels, ascending.
    pub fn object_ids(&self) -> BTreeSet<u8> {
        self.labels.iter().copied().filter(|&l| l != 0).collect()
    }

    pub fn extract_object(&self, id: u8) -> BinaryMask {
        BinaryMask {
            size: self.size,
            bits: self.labels.iter().map(|&l| l == id).collect(),
        }
    }

    pub fn area(&self, id: u8) -> usize {
        self.labels.iter().filter(|&&l| l == id).count()
    }
}

/// Disk or square neighborhood used by dilation. Radius 0 is the identity
/// element (the single centre offset).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeShape {
    Disk,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuringElement {
    shape: SeShape,
    radius: u32,
}

impl StructuringElement {
    pub fn disk(radius: u32) -> Self {
        Self {
            shape: SeShape::Disk,
            radius,
        }
    }

    pub fn square(radius: u32) -> Self {
        Self {
            shape: SeShape::Square,
            radius,
        }
    }

    pub fn shape(self) -> SeShape {
        self.shape
    }

    pub fn radius(self) -> u32 {
        self.radius
    }

    /// Member offsets in row-major order; always contains (0, 0).
    pub fn offsets(self) -> Vec<(i32, i32)> {
        let r = self.radius as i64;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = match self.shape {
                    SeShape::Disk => dx * dx + dy * dy <= r * r,
                    SeShape::Square => true,
                };
                if inside {
                    out.push((dx as i32, dy as i32));
                }
            }
        }
        out
    }

    /// True when every offset of `other` is also an offset of `self`, i.e.
    /// dilation by `self` always contains dilation by `other`.
    pub fn covers(self, other: StructuringElement) -> bool {
        let mine: BTreeSet<(i32, i32)> = self.offsets().into_iter().collect();
        other.offsets().iter().all(|o| mine.contains(o))
    }
}

/// Ordered chain of in-frame pixels: consecutive entries are 8-adjacent and
/// no pixel appears twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelPath {
    points: Vec<(u32, u32)>,
}

impl PixelPath {
    pub fn new(points: Vec<(u32, u32)>) -> Result<Self, RasterError> {
        if points.is_empty() {
            return Err(RasterError::EmptyPath);
        }
        let mut seen = BTreeSet::new();
        for (i, &(x, y)) in points.iter().enumerate() {
            if !seen.insert((x, y)) {
                return Err(RasterError::BrokenPath { x, y });
            }
            if i > 0 {
                let (px, py) = points[i - 1];
                let dx = (x as i64 - px as i64).abs();
                let dy = (y as i64 - py as i64).abs();
                if dx.max(dy) != 1 {
                    return Err(RasterError::BrokenPath { x, y });
                }
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(u32, u32)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_rejects_degenerate_dimensions() {
        assert!(RasterSize::new(0, 5).is_err());
        assert!(RasterSize::new(5, 0).is_err());
        assert!(RasterSize::new(1 << 16, 1 << 16).is_err());
        assert!(RasterSize::new(1, 1).is_ok());
    }

    #[test]
    fn size_serde_revalidates() {
        let ok: RasterSize = serde_json::from_str(r#"{"width":4,"height":3}"#).unwrap();
        assert_eq!((ok.width(), ok.height()), (4, 3));
        assert!(serde_json::from_str::<RasterSize>(r#"{"width":0,"height":3}"#).is_err());
    }

    #[test]
    fn mask_get_set_roundtrip() {
        let size = RasterSize::new(4, 3).unwrap();
        let mut m = BinaryMask::new(size);
        assert!(!m.any());
        m.set(3, 2, true);
        assert!(m.get(3, 2));
        assert!(!m.get_signed(-1, 0));
        assert!(!m.get_signed(4, 2));
        assert_eq!(m.count_ones(), 1);
        assert_eq!(m.iter_ones().collect::<Vec<_>>(), vec![(3, 2)]);
    }

    #[test]
    fn label_mask_rejects_reserved_index() {
        let size = RasterSize::new(2, 1).unwrap();
        assert!(LabelMask::from_vec(size, vec![0, 255]).is_err());
        let m = LabelMask::from_vec(size, vec![0, 254]).unwrap();
        assert_eq!(m.object_ids().into_iter().collect::<Vec<_>>(), vec![254]);
    }

    #[test]
    fn extract_object_selects_only_that_id() {
        let size = RasterSize::new(3, 1).unwrap();
        let m = LabelMask::from_vec(size, vec![1, 2, 1]).unwrap();
        let one = m.extract_object(1);
        assert_eq!(one.iter_ones().collect::<Vec<_>>(), vec![(0, 0), (2, 0)]);
        assert_eq!(m.area(2), 1);
    }

    #[test]
    fn disk_offset_counts() {
        assert_eq!(StructuringElement::disk(0).offsets().len(), 1);
        assert_eq!(StructuringElement::disk(1).offsets().len(), 5);
        assert_eq!(StructuringElement::disk(3).offsets().len(), 29);
        assert_eq!(StructuringElement::square(1).offsets().len(), 9);
    }

    #[test]
    fn disk_is_covered_by_wider_disk_and_same_radius_square() {
        let d3 = StructuringElement::disk(3);
        assert!(StructuringElement::disk(9).covers(d3));
        assert!(StructuringElement::square(3).covers(d3));
        assert!(!d3.covers(StructuringElement::square(3)));
        assert!(!d3.covers(StructuringElement::disk(4)));
    }

    #[test]
    fn pixel_path_validates_adjacency_and_repeats() {
        assert!(PixelPath::new(vec![]).is_err());
        assert!(PixelPath::new(vec![(0, 0), (1, 1), (2, 1)]).is_ok());
        assert!(PixelPath::new(vec![(0, 0), (2, 0)]).is_err());
        assert!(PixelPath::new(vec![(0, 0), (1, 0), (0, 0)]).is_err());
        assert!(PixelPath::new(vec![(5, 5)]).is_ok());
    }
}
