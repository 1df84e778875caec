//! Connected-component labelling over bit masks.

use super::{BinaryMask, RasterSize};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

/// One connected region, carried as a full-size mask so downstream
/// morphology keeps frame coordinates.
#[derive(Debug, Clone)]
pub struct Component {
    pub mask: BinaryMask,
    pub area: usize,
    /// Row-major first foreground pixel; stable tie-break key.
    pub first_pixel: (u32, u32),
}

/// Components ordered by decreasing area, ties by row-major first pixel.
pub fn connected_components(mask: &BinaryMask, conn: Connectivity) -> Vec<Component> {
    let size: RasterSize = mask.size();
    let mut visited = vec![false; size.pixel_count()];
    let mut out = Vec::new();
    for y in 0..size.height() {
        for x in 0..size.width() {
            if !mask.get(x, y) || visited[size.index(x, y)] {
                continue;
            }
            let mut comp = BinaryMask::new(size);
            let mut area = 0usize;
            let mut queue = VecDeque::new();
            visited[size.index(x, y)] = true;
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                comp.set(cx, cy, true);
                area += 1;
                for &(dx, dy) in conn.offsets() {
                    let nx = cx as i64 + dx;
                    let ny = cy as i64 + dy;
                    if mask.get_signed(nx, ny) && !visited[size.index(nx as u32, ny as u32)] {
                        visited[size.index(nx as u32, ny as u32)] = true;
                        queue.push_back((nx as u32, ny as u32));
                    }
                }
            }
            out.push(Component {
                mask: comp,
                area,
                first_pixel: (x, y),
            });
        }
    }
    out.sort_by(|a, b| {
        b.area
            .cmp(&a.area)
            .then_with(|| (a.first_pixel.1, a.first_pixel.0).cmp(&(b.first_pixel.1, b.first_pixel.0)))
    });
    out
}
