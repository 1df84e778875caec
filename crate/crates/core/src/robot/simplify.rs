//! Polyline simplification for scribble paths.

use crate::raster::draw::bresenham;
use crate::raster::{BinaryMask, PixelPath};

fn to_f(p: (u32, u32)) -> (f64, f64) {
    (p.0 as f64, p.1 as f64)
}

/// Distance from `p` to the segment a-b (not the infinite line).
fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (px, py) = (p.0 - a.0, p.1 - a.1);
    let (bx, by) = (b.0 - a.0, b.1 - a.1);
    let len2 = bx * bx + by * by;
    if len2 == 0.0 {
        return (px * px + py * py).sqrt();
    }
    let t = ((px * bx + py * by) / len2).clamp(0.0, 1.0);
    let dx = px - t * bx;
    let dy = py - t * by;
    (dx * dx + dy * dy).sqrt()
}

/// Farthest interior point from the chord lo-hi; first index wins ties.
fn farthest(points: &[(u32, u32)], lo: usize, hi: usize) -> (usize, f64) {
    let a = to_f(points[lo]);
    let b = to_f(points[hi]);
    let mut best = lo;
    let mut best_d = -1.0;
    for (i, &p) in points.iter().enumerate().take(hi).skip(lo + 1) {
        let d = segment_distance(to_f(p), a, b);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    (best, best_d)
}

type SplitRule<'a> = &'a mut dyn FnMut(&[(u32, u32)], usize, usize) -> Option<usize>;

fn mark(points: &[(u32, u32)], lo: usize, hi: usize, keep_at: SplitRule, kept: &mut [bool]) {
    if hi <= lo + 1 {
        return;
    }
    if let Some(split) = keep_at(points, lo, hi) {
        kept[split] = true;
        mark(points, lo, split, keep_at, kept);
        mark(points, split, hi, keep_at, kept);
    }
}

fn collect(points: &[(u32, u32)], kept: &[bool]) -> Vec<(u32, u32)> {
    points
        .iter()
        .zip(kept)
        .filter(|(_, k)| **k)
        .map(|(p, _)| *p)
        .collect()
}

/// Ramer-Douglas-Peucker on pixel coordinates. Endpoints always survive; an
/// interior point survives only while some chord deviation is strictly
/// above `epsilon_px`. Epsilon <= 0 keeps every point.
pub fn simplify_path(path: &PixelPath, epsilon_px: f64) -> Vec<(u32, u32)> {
    let points = path.points();
    if epsilon_px <= 0.0 || points.len() <= 2 {
        return points.to_vec();
    }
    let mut kept = vec![false; points.len()];
    kept[0] = true;
    kept[points.len() - 1] = true;
    let mut rule = |pts: &[(u32, u32)], lo: usize, hi: usize| {
        let (split, d) = farthest(pts, lo, hi);
        (d > epsilon_px).then_some(split)
    };
    mark(points, 0, points.len() - 1, &mut rule, &mut kept);
    collect(points, kept.as_slice())
}

fn chord_inside(region: &BinaryMask, a: (u32, u32), b: (u32, u32)) -> bool {
    bresenham(a, b).into_iter().all(|(x, y)| region.get(x, y))
}

/// Like [`simplify_path`], but a chord whose raster would leave `region`
/// also forces a split, so the simplified polyline still rasterizes inside
/// the region the path came from. The original path must lie in `region`.
pub(super) fn simplify_contained(
    path: &PixelPath,
    epsilon_px: f64,
    region: &BinaryMask,
) -> Vec<(u32, u32)> {
    let points = path.points();
    if epsilon_px <= 0.0 || points.len() <= 2 {
        return points.to_vec();
    }
    debug_assert!(points.iter().all(|&(x, y)| region.get(x, y)));
    let mut kept = vec![false; points.len()];
    kept[0] = true;
    kept[points.len() - 1] = true;
    let mut rule = |pts: &[(u32, u32)], lo: usize, hi: usize| {
        let (split, d) = farthest(pts, lo, hi);
        (d > epsilon_px || !chord_inside(region, pts[lo], pts[hi])).then_some(split)
    };
    mark(points, 0, points.len() - 1, &mut rule, &mut kept);
    collect(points, kept.as_slice())
}
