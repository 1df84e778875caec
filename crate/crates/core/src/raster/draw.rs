//! Coordinate mapping between the unit square and pixel grids, plus
//! polyline rasterization.

use super::morph::dilate;
use super::{BinaryMask, RasterError, RasterSize, StructuringElement};

/// Map a unit-square coordinate onto a pixel index: round(v * (extent - 1)).
/// Callers validate v against [0, 1] first.
pub fn normalized_to_pixel(v: f64, extent: u32) -> u32 {
    debug_assert!((0.0..=1.0).contains(&v));
    (v * (extent.saturating_sub(1)) as f64).round() as u32
}

/// Inverse of [`normalized_to_pixel`] on exact pixel centres; a single-pixel
/// extent maps to 0 so the two functions stay inverse.
pub fn pixel_to_normalized(px: u32, extent: u32) -> f64 {
    if extent <= 1 {
        0.0
    } else {
        px as f64 / (extent - 1) as f64
    }
}

/// All pixels of the segment from `a` to `b`, inclusive, in traversal order.
pub fn bresenham(a: (u32, u32), b: (u32, u32)) -> Vec<(u32, u32)> {
    let (mut x0, mut y0) = (a.0 as i64, a.1 as i64);
    let (x1, y1) = (b.0 as i64, b.1 as i64);
    let dx = (x1 - x0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let dy = -(y1 - y0).abs();
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::new();
    loop {
        out.push((x0 as u32, y0 as u32));
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
    out
}

/// Draw a unit-square polyline onto a pixel grid: each point maps through
/// [`normalized_to_pixel`], consecutive points connect with Bresenham
/// segments, and the union is dilated by a disk of radius thickness - 1.
pub fn rasterize_polyline(
    points: &[(f64, f64)],
    size: RasterSize,
    thickness: u32,
) -> Result<BinaryMask, RasterError> {
    if points.is_empty() {
        return Err(RasterError::EmptyPolyline);
    }
    for &(x, y) in points {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) || !x.is_finite() || !y.is_finite()
        {
            return Err(RasterError::OutsideUnitSquare { x, y });
        }
    }
    let px: Vec<(u32, u32)> = points
        .iter()
        .map(|&(x, y)| {
            (
                normalized_to_pixel(x, size.width()),
                normalized_to_pixel(y, size.height()),
            )
        })
        .collect();
    let mut mask = BinaryMask::new(size);
    if px.len() == 1 {
        mask.set(px[0].0, px[0].1, true);
    } else {
        for pair in px.windows(2) {
            for (x, y) in bresenham(pair[0], pair[1]) {
                mask.set(x, y, true);
            }
        }
    }
    if thickness > 1 {
        mask = dilate(&mask, StructuringElement::disk(thickness - 1));
    }
    Ok(mask)
}
