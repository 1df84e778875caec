//! Dilation, boundary extraction, and sequential thinning.

use super::{BinaryMask, StructuringElement};
use std::collections::VecDeque;

/// Set union of the structuring element stamped on every foreground pixel,
/// clipped to the frame. Radius 0 copies the input.
pub fn dilate(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let size = mask.size();
    let offsets = se.offsets();
    let mut out = BinaryMask::new(size);
    for (x, y) in mask.iter_ones() {
        for &(dx, dy) in &offsets {
            let nx = x as i64 + dx as i64;
            let ny = y as i64 + dy as i64;
            if size.contains_signed(nx, ny) {
                out.set(nx as u32, ny as u32, true);
            }
        }
    }
    out
}

/// Foreground pixels with a 4-neighbor that is background; the frame border
/// counts as background, so a full mask is all boundary at its rim.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let size = mask.size();
    BinaryMask::from_fn(size, |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        let (x, y) = (x as i64, y as i64);
        !(mask.get_signed(x, y - 1)
            && mask.get_signed(x, y + 1)
            && mask.get_signed(x - 1, y)
            && mask.get_signed(x + 1, y))
    })
}

/// Circular 8-neighbor order starting north, clockwise.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn neighbor_count(m: &BinaryMask, x: u32, y: u32) -> u32 {
    RING.iter()
        .filter(|&&(dx, dy)| m.get_signed(x as i64 + dx, y as i64 + dy))
        .count() as u32
}

/// Background-to-foreground transitions walking the ring once. A value of 1
/// means deleting the pixel cannot split its neighborhood.
fn ring_transitions(m: &BinaryMask, x: u32, y: u32) -> u32 {
    let vals: Vec<bool> = RING
        .iter()
        .map(|&(dx, dy)| m.get_signed(x as i64 + dx, y as i64 + dy))
        .collect();
    (0..8).filter(|&i| !vals[i] && vals[(i + 1) % 8]).count() as u32
}

fn is_deletable(m: &BinaryMask, x: u32, y: u32) -> bool {
    neighbor_count(m, x, y) >= 2 && ring_transitions(m, x, y) == 1
}

/// Thin a mask to a unit-width skeleton.
///
/// Sequential border thinning: each pass peels at most one boundary layer
/// per compass direction, deleting in row-major order only pixels whose
/// live neighborhood stays connected (>= 2 neighbors, exactly one ring
/// transition). A post-pass removes remaining 2x2 blocks the same way and,
/// when every block member is locally unsafe, falls back to deleting the
/// first row-major non-cut pixel near the block.
///
/// Guarantees, all exercised by tests: output is a subset of the input, the
/// 8-connected component count is preserved, no 2x2 all-foreground block
/// survives, and the result is a pure function of the input.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut m = mask.clone();
    let dirs: [(i64, i64); 4] = [(0, -1), (0, 1), (1, 0), (-1, 0)];
    loop {
        let mut changed = false;
        for (dx, dy) in dirs {
            // snapshot this direction's border so one sub-pass eats one layer
            let border: Vec<(u32, u32)> = m
                .iter_ones()
                .filter(|&(x, y)| !m.get_signed(x as i64 + dx, y as i64 + dy))
                .collect();
            for (x, y) in border {
                if m.get(x, y) && is_deletable(&m, x, y) {
                    m.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    collapse_blocks(&mut m);
    m
}

fn first_block(m: &BinaryMask) -> Option<(u32, u32)> {
    let size = m.size();
    for y in 0..size.height().saturating_sub(1) {
        for x in 0..size.width().saturating_sub(1) {
            if m.get(x, y) && m.get(x + 1, y) && m.get(x, y + 1) && m.get(x + 1, y + 1) {
                return Some((x, y));
            }
        }
    }
    None
}

fn in_block(m: &BinaryMask, x: u32, y: u32) -> bool {
    for ox in [0i64, -1] {
        for oy in [0i64, -1] {
            let bx = x as i64 + ox;
            let by = y as i64 + oy;
            if m.get_signed(bx, by)
                && m.get_signed(bx + 1, by)
                && m.get_signed(bx, by + 1)
                && m.get_signed(bx + 1, by + 1)
            {
                return true;
            }
        }
    }
    false
}

fn component_of(m: &BinaryMask, sx: u32, sy: u32) -> Vec<(u32, u32)> {
    let size = m.size();
    let mut seen = vec![false; size.pixel_count()];
    let mut queue = VecDeque::from([(sx, sy)]);
    let mut out = Vec::new();
    seen[size.index(sx, sy)] = true;
    while let Some((x, y)) = queue.pop_front() {
        out.push((x, y));
        for &(dx, dy) in &RING {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if m.get_signed(nx, ny) && !seen[size.index(nx as u32, ny as u32)] {
                seen[size.index(nx as u32, ny as u32)] = true;
                queue.push_back((nx as u32, ny as u32));
            }
        }
    }
    out
}

/// True when removing (px, py) disconnects its component.
fn is_cut_pixel(m: &BinaryMask, comp: &[(u32, u32)], px: u32, py: u32) -> bool {
    let rest: Vec<(u32, u32)> = comp.iter().copied().filter(|&p| p != (px, py)).collect();
    if rest.is_empty() {
        return false;
    }
    let mut without = m.clone();
    without.set(px, py, false);
    let start = *rest
        .iter()
        .min_by_key(|&&(x, y)| (y, x))
        .expect("non-empty rest");
    let reach = component_of(&without, start.0, start.1);
    reach.len() != rest.len()
}

fn collapse_blocks(m: &mut BinaryMask) {
    while let Some((bx, by)) = first_block(m) {
        let mut progressed = false;
        let size = m.size();
        for y in 0..size.height() {
            for x in 0..size.width() {
                if m.get(x, y) && in_block(m, x, y) && is_deletable(m, x, y) {
                    m.set(x, y, false);
                    progressed = true;
                }
            }
        }
        if progressed {
            continue;
        }
        // every block member is locally unsafe (e.g. pinwheel shapes): drop
        // the first row-major non-cut pixel near the block, widening to the
        // whole component if needed
        let members = [(bx, by), (bx + 1, by), (bx, by + 1), (bx + 1, by + 1)];
        let comp = component_of(m, bx, by);
        let mut near: Vec<(u32, u32)> = Vec::new();
        for &(mx, my) in &members {
            near.push((mx, my));
            for &(dx, dy) in &RING {
                let nx = mx as i64 + dx;
                let ny = my as i64 + dy;
                if m.get_signed(nx, ny) {
                    near.push((nx as u32, ny as u32));
                }
            }
        }
        near.sort_by_key(|&(x, y)| (y, x));
        near.dedup();
        let mut whole = comp.clone();
        whole.sort_by_key(|&(x, y)| (y, x));
        let mut removed = false;
        for cand in [near, whole] {
            if let Some(&(px, py)) = cand.iter().find(|&&(px, py)| !is_cut_pixel(m, &comp, px, py)) {
                m.set(px, py, false);
                removed = true;
                break;
            }
        }
        assert!(removed, "2x2 block with only cut pixels");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::components::{connected_components, Connectivity};
    use crate::raster::RasterSize;

    fn size(w: u32, h: u32) -> RasterSize {
        RasterSize::new(w, h).unwrap()
    }

    #[test]
    fn dilate_radius_zero_is_identity() {
        let m = BinaryMask::from_fn(size(5, 5), |x, y| x == y);
        assert_eq!(dilate(&m, StructuringElement::disk(0)), m);
    }

    #[test]
    fn dilate_single_pixel_by_unit_disk_is_a_plus() {
        let mut m = BinaryMask::new(size(5, 5));
        m.set(2, 2, true);
        let d = dilate(&m, StructuringElement::disk(1));
        assert_eq!(
            d.iter_ones().collect::<Vec<_>>(),
            vec![(2, 1), (1, 2), (2, 2), (3, 2), (2, 3)]
        );
    }

    #[test]
    fn dilate_clips_at_frame_edge() {
        let mut m = BinaryMask::new(size(3, 3));
        m.set(0, 0, true);
        let d = dilate(&m, StructuringElement::square(1));
        assert_eq!(d.count_ones(), 4);
    }

    #[test]
    fn boundary_of_filled_square_is_its_rim() {
        let m = BinaryMask::from_fn(size(5, 5), |_, _| true);
        let b = boundary(&m);
        assert_eq!(b.count_ones(), 16);
        assert!(!b.get(2, 2));
        assert!(b.get(0, 0) && b.get(4, 4) && b.get(2, 0));
    }

    #[test]
    fn boundary_of_interior_square_excludes_interior() {
        let m = BinaryMask::from_fn(size(7, 7), |x, y| (1..=5).contains(&x) && (1..=5).contains(&y));
        let b = boundary(&m);
        assert!(b.get(1, 1) && b.get(5, 5) && b.get(3, 1));
        assert!(!b.get(3, 3));
        assert_eq!(b.count_ones(), 16);
    }

    #[test]
    fn skeleton_of_filled_square_is_its_centre_row() {
        let m = BinaryMask::from_fn(size(5, 5), |_, _| true);
        let s = skeletonize(&m);
        assert_eq!(
            s.iter_ones().collect::<Vec<_>>(),
            vec![(1, 2), (2, 2), (3, 2)]
        );
    }

    #[test]
    fn skeleton_of_thin_line_is_unchanged() {
        let m = BinaryMask::from_fn(size(9, 3), |x, y| y == 1 && (1..=7).contains(&x));
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn skeleton_preserves_single_pixel() {
        let mut m = BinaryMask::new(size(4, 4));
        m.set(1, 2, true);
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn skeleton_of_two_by_two_is_its_bottom_row() {
        // the northward pass eats the top row; the survivors are endpoints
        let m = BinaryMask::from_fn(size(4, 4), |x, y| (1..=2).contains(&x) && (1..=2).contains(&y));
        let s = skeletonize(&m);
        assert_eq!(s.iter_ones().collect::<Vec<_>>(), vec![(1, 2), (2, 2)]);
    }

    #[test]
    fn pinwheel_block_resolves_without_splitting() {
        // 2x2 core with four diagonal satellites: every member is a local
        // bridge, exercising the non-cut fallback
        let mut m = BinaryMask::new(size(6, 6));
        for (x, y) in [(2, 2), (3, 2), (2, 3), (3, 3), (1, 1), (4, 1), (1, 4), (4, 4)] {
            m.set(x, y, true);
        }
        let s = skeletonize(&m);
        assert!(first_block(&s).is_none());
        assert_eq!(connected_components(&s, Connectivity::Eight).len(), 1);
        assert!(s.is_subset_of(&m));
    }

    #[test]
    fn skeleton_invariants_on_procedural_masks() {
        for seed in 0..40u32 {
            let m = BinaryMask::from_fn(size(24, 24), |x, y| {
                let h = x
                    .wrapping_mul(2654435761)
                    .wrapping_add(y.wrapping_mul(40503))
                    .wrapping_add(seed.wrapping_mul(97));
                (h >> 7) % 4 != 0
            });
            let s = skeletonize(&m);
            assert!(s.is_subset_of(&m), "containment, seed {seed}");
            assert!(first_block(&s).is_none(), "unit width, seed {seed}");
            assert_eq!(
                connected_components(&m, Connectivity::Eight).len(),
                connected_components(&s, Connectivity::Eight).len(),
                "component count, seed {seed}"
            );
            assert_eq!(skeletonize(&m), s, "determinism, seed {seed}");
        }
    }
}
