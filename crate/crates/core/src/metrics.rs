//! Region overlap and boundary agreement between predicted and reference
//! masks, plus the per-sequence score table built from them.

use crate::raster::morph::{boundary, dilate};
use crate::raster::{BinaryMask, LabelMask, RasterSize, StructuringElement};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("mask sizes differ: {pred} vs {gt}")]
    SizeMismatch { pred: RasterSize, gt: RasterSize },
    #[error("prediction covers {preds} frames, reference has {gts}")]
    FrameCountMismatch { preds: usize, gts: usize },
    #[error("boundary tolerance {0} is outside (0, 1)")]
    BadTolerance(f64),
    #[error("object list is empty")]
    NoObjects,
    #[error("score table is empty")]
    EmptyTable,
    #[error("score table rows do not cover frames x objects exactly once")]
    IncompleteTable,
}

/// Intersection over union. Two empty masks agree perfectly.
pub fn jaccard(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64, MetricsError> {
    if pred.size() != gt.size() {
        return Err(MetricsError::SizeMismatch {
            pred: pred.size(),
            gt: gt.size(),
        });
    }
    let mut inter = 0u64;
    let mut union = 0u64;
    for (a, b) in pred.as_slice().iter().zip(gt.as_slice()) {
        inter += (*a && *b) as u64;
        union += (*a || *b) as u64;
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(inter as f64 / union as f64)
    }
}

/// Match distance for boundary agreement, as a fraction of the frame
/// diagonal. The pixel radius is the ceiling of fraction * diagonal, so it
/// is at least 1 on any frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BoundaryTolerance {
    fraction: f64,
}

impl BoundaryTolerance {
    pub fn new(fraction: f64) -> Result<Self, MetricsError> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(MetricsError::BadTolerance(fraction));
        }
        Ok(Self { fraction })
    }

    pub fn fraction(self) -> f64 {
        self.fraction
    }

    pub fn pixel_radius(self, size: RasterSize) -> u32 {
        (self.fraction * size.diagonal()).ceil() as u32
    }
}

impl Default for BoundaryTolerance {
    fn default() -> Self {
        Self { fraction: 0.008 }
    }
}

impl TryFrom<f64> for BoundaryTolerance {
    type Error = MetricsError;

    fn try_from(v: f64) -> Result<Self, MetricsError> {
        BoundaryTolerance::new(v)
    }
}

impl From<BoundaryTolerance> for f64 {
    fn from(t: BoundaryTolerance) -> f64 {
        t.fraction
    }
}

/// Boundary F-measure: precision and recall of the two boundary images,
/// where a boundary pixel matches when the other boundary passes within the
/// tolerance radius (realized by dilating each boundary with a disk and
/// intersecting). Both boundaries empty scores 1, exactly one empty scores
/// 0, and a zero precision-plus-recall sum scores 0.
pub fn boundary_f(
    pred: &BinaryMask,
    gt: &BinaryMask,
    tolerance: BoundaryTolerance,
) -> Result<f64, MetricsError> {
    if pred.size() != gt.size() {
        return Err(MetricsError::SizeMismatch {
            pred: pred.size(),
            gt: gt.size(),
        });
    }
    let pb = boundary(pred);
    let gb = boundary(gt);
    let np = pb.count_ones();
    let ng = gb.count_ones();
    if np == 0 && ng == 0 {
        return Ok(1.0);
    }
    if np == 0 || ng == 0 {
        return Ok(0.0);
    }
    let se = StructuringElement::disk(tolerance.pixel_radius(pred.size()));
    let gb_wide = dilate(&gb, se);
    let pb_wide = dilate(&pb, se);
    let matched_pred = pb
        .as_slice()
        .iter()
        .zip(gb_wide.as_slice())
        .filter(|(p, g)| **p && **g)
        .count();
    let matched_gt = gb
        .as_slice()
        .iter()
        .zip(pb_wide.as_slice())
        .filter(|(g, p)| **g && **p)
        .count();
    let precision = matched_pred as f64 / np as f64;
    let recall = matched_gt as f64 / ng as f64;
    if precision + recall == 0.0 {
        Ok(0.0)
    } else {
        Ok(2.0 * precision * recall / (precision + recall))
    }
}

/// Arithmetic mean of [`jaccard`] and [`boundary_f`].
pub fn jf(
    pred: &BinaryMask,
    gt: &BinaryMask,
    tolerance: BoundaryTolerance,
) -> Result<f64, MetricsError> {
    Ok((jaccard(pred, gt)? + boundary_f(pred, gt, tolerance)?) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameObjectScore {
    pub frame: usize,
    pub object: u8,
    pub j: f64,
    pub f: f64,
    pub jf: f64,
}

/// Scores for every (frame, object) pair of one sequence, frame-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceScoreTable {
    frames: usize,
    objects: Vec<u8>,
    rows: Vec<FrameObjectScore>,
}

impl SequenceScoreTable {
    /// Assemble a table from loose rows; they are reordered frame-major with
    /// objects in the given order and must cover frames x objects exactly.
    pub fn from_rows(
        frames: usize,
        objects: Vec<u8>,
        mut rows: Vec<FrameObjectScore>,
    ) -> Result<Self, MetricsError> {
        if objects.is_empty() {
            return Err(MetricsError::NoObjects);
        }
        if frames == 0 || rows.len() != frames * objects.len() {
            return Err(MetricsError::IncompleteTable);
        }
        let position = |object: u8| objects.iter().position(|&o| o == object);
        for row in &rows {
            if row.frame >= frames || position(row.object).is_none() {
                return Err(MetricsError::IncompleteTable);
            }
        }
        rows.sort_by_key(|r| (r.frame, position(r.object).expect("checked above")));
        let distinct: BTreeSet<(usize, u8)> = rows.iter().map(|r| (r.frame, r.object)).collect();
        if distinct.len() != rows.len() {
            return Err(MetricsError::IncompleteTable);
        }
        Ok(Self {
            frames,
            objects,
            rows,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn objects(&self) -> &[u8] {
        &self.objects
    }

    pub fn rows(&self) -> &[FrameObjectScore] {
        &self.rows
    }

    /// Mean combined score over this frame's objects.
    pub fn frame_mean(&self, frame: usize) -> f64 {
        let n = self.objects.len();
        let slice = &self.rows[frame * n..(frame + 1) * n];
        slice.iter().map(|r| r.jf).sum::<f64>() / n as f64
    }

    /// Mean combined score of one object over all frames.
    pub fn object_mean(&self, object: u8) -> Option<f64> {
        if !self.objects.contains(&object) {
            return None;
        }
        let scores: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.object == object)
            .map(|r| r.jf)
            .collect();
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    }

    /// Mean combined score over every row.
    pub fn overall_mean(&self) -> f64 {
        self.rows.iter().map(|r| r.jf).sum::<f64>() / self.rows.len() as f64
    }

    /// CSV with the frozen column set `frame,object,j,f,jf`, six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,object,j,f,jf\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                r.frame, r.object, r.j, r.f, r.jf
            )
            .expect("string write");
        }
        out
    }
}

/// Score every frame and object of a sequence.
pub fn evaluate_sequence(
    preds: &[LabelMask],
    gts: &[LabelMask],
    objects: &[u8],
    tolerance: BoundaryTolerance,
) -> Result<SequenceScoreTable, MetricsError> {
    if objects.is_empty() {
        return Err(MetricsError::NoObjects);
    }
    if preds.len() != gts.len() || preds.is_empty() {
        return Err(MetricsError::FrameCountMismatch {
            preds: preds.len(),
            gts: gts.len(),
        });
    }
    let mut rows = Vec::with_capacity(preds.len() * objects.len());
    for (frame, (pred, gt)) in preds.iter().zip(gts).enumerate() {
        if pred.size() != gt.size() {
            return Err(MetricsError::SizeMismatch {
                pred: pred.size(),
                gt: gt.size(),
            });
        }
        for &object in objects {
            let pm = pred.extract_object(object);
            let gm = gt.extract_object(object);
            let j = jaccard(&pm, &gm)?;
            let f = boundary_f(&pm, &gm, tolerance)?;
            rows.push(FrameObjectScore {
                frame,
                object,
                j,
                f,
                jf: (j + f) / 2.0,
            });
        }
    }
    SequenceScoreTable::from_rows(preds.len(), objects.to_vec(), rows)
}

/// Frame with the lowest mean score, skipping `excluded` frames; the lowest
/// index wins ties. When exclusion would empty the table the full table is
/// scanned instead, so there is always a frame to hand back.
pub fn worst_frame(
    table: &SequenceScoreTable,
    excluded: &BTreeSet<usize>,
) -> Result<usize, MetricsError> {
    if table.rows.is_empty() {
        return Err(MetricsError::EmptyTable);
    }
    let candidates: Vec<usize> = (0..table.frames)
        .filter(|f| !excluded.contains(f))
        .collect();
    let candidates = if candidates.is_empty() {
        (0..table.frames).collect()
    } else {
        candidates
    };
    let mut best = candidates[0];
    let mut best_mean = table.frame_mean(best);
    for &f in &candidates[1..] {
        let mean = table.frame_mean(f);
        if mean < best_mean {
            best = f;
            best_mean = mean;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::RasterSize;

    fn size(w: u32, h: u32) -> RasterSize {
        RasterSize::new(w, h).unwrap()
    }

    fn block(size: RasterSize, x0: u32, y0: u32, w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(size, |x, y| {
            x >= x0 && x < x0 + w && y >= y0 && y < y0 + h
        })
    }

    #[test]
    fn jaccard_of_offset_blocks() {
        let s = size(4, 4);
        // two 2x2 blocks overlapping in exactly one pixel: 1 / 7
        let a = block(s, 0, 0, 2, 2);
        let b = block(s, 1, 1, 2, 2);
        assert_eq!(jaccard(&a, &b).unwrap(), 1.0 / 7.0);
    }

    #[test]
    fn jaccard_empty_cases() {
        let s = size(3, 3);
        let empty = BinaryMask::new(s);
        let full = block(s, 0, 0, 2, 2);
        assert_eq!(jaccard(&empty, &empty).unwrap(), 1.0);
        assert_eq!(jaccard(&empty, &full).unwrap(), 0.0);
        assert_eq!(jaccard(&full, &empty).unwrap(), 0.0);
        assert_eq!(jaccard(&full, &full).unwrap(), 1.0);
    }

    #[test]
    fn jaccard_rejects_size_mismatch() {
        let a = BinaryMask::new(size(2, 2));
        let b = BinaryMask::new(size(3, 2));
        assert!(jaccard(&a, &b).is_err());
    }

    #[test]
    fn tolerance_radius_frozen_values() {
        let t = BoundaryTolerance::default();
        assert_eq!(t.pixel_radius(size(16, 16)), 1);
        assert_eq!(t.pixel_radius(size(64, 64)), 1);
        assert_eq!(t.pixel_radius(size(854, 480)), 8);
        assert_eq!(t.pixel_radius(size(1920, 1080)), 18);
    }

    #[test]
    fn tolerance_rejects_out_of_range() {
        assert!(BoundaryTolerance::new(0.0).is_err());
        assert!(BoundaryTolerance::new(1.0).is_err());
        assert!(BoundaryTolerance::new(-0.1).is_err());
        assert!(BoundaryTolerance::new(f64::NAN).is_err());
    }

    #[test]
    fn boundary_f_identical_masks_scores_one() {
        let m = block(size(16, 16), 3, 4, 6, 5);
        assert_eq!(boundary_f(&m, &m, BoundaryTolerance::default()).unwrap(), 1.0);
    }

    #[test]
    fn boundary_f_empty_cases() {
        let s = size(8, 8);
        let empty = BinaryMask::new(s);
        let m = block(s, 2, 2, 3, 3);
        let t = BoundaryTolerance::default();
        assert_eq!(boundary_f(&empty, &empty, t).unwrap(), 1.0);
        assert_eq!(boundary_f(&m, &empty, t).unwrap(), 0.0);
        assert_eq!(boundary_f(&empty, &m, t).unwrap(), 0.0);
    }

    #[test]
    fn boundary_f_one_pixel_shift_within_tolerance() {
        // radius 1 on a 16x16 frame, so a one-pixel shift still matches fully
        let s = size(16, 16);
        let a = block(s, 4, 4, 5, 5);
        let b = block(s, 5, 4, 5, 5);
        assert_eq!(boundary_f(&a, &b, BoundaryTolerance::default()).unwrap(), 1.0);
        let far = block(s, 10, 10, 5, 5);
        assert!(boundary_f(&a, &far, BoundaryTolerance::default()).unwrap() < 1.0);
    }

    #[test]
    fn jf_is_the_mean_of_both() {
        let s = size(16, 16);
        let a = block(s, 2, 2, 6, 6);
        let b = block(s, 4, 4, 6, 6);
        let t = BoundaryTolerance::default();
        let j = jaccard(&a, &b).unwrap();
        let f = boundary_f(&a, &b, t).unwrap();
        assert_eq!(jf(&a, &b, t).unwrap(), (j + f) / 2.0);
    }

    fn label(size: RasterSize, f: impl Fn(u32, u32) -> u8) -> LabelMask {
        let mut m = LabelMask::new(size);
        for y in 0..size.height() {
            for x in 0..size.width() {
                m.set(x, y, f(x, y));
            }
        }
        m
    }

    #[test]
    fn evaluate_sequence_rows_are_frame_major() {
        let s = size(8, 8);
        let gt = label(s, |x, _| if x < 2 { 1 } else if x < 4 { 2 } else { 0 });
        let pred = gt.clone();
        let table =
            evaluate_sequence(&[pred.clone(), pred], &[gt.clone(), gt], &[1, 2], BoundaryTolerance::default())
                .unwrap();
        let keys: Vec<(usize, u8)> = table.rows().iter().map(|r| (r.frame, r.object)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 2), (1, 1), (1, 2)]);
        assert_eq!(table.overall_mean(), 1.0);
        assert_eq!(table.frame_mean(1), 1.0);
        assert_eq!(table.object_mean(2), Some(1.0));
        assert_eq!(table.object_mean(9), None);
    }

    #[test]
    fn evaluate_sequence_scores_absent_object_as_perfect_when_both_empty() {
        let s = size(4, 4);
        let gt = label(s, |x, _| u8::from(x == 0));
        let frames = std::slice::from_ref(&gt);
        let table = evaluate_sequence(frames, frames, &[1, 7], BoundaryTolerance::default())
            .unwrap();
        assert_eq!(table.object_mean(7), Some(1.0));
    }

    fn score_table(means: &[f64]) -> SequenceScoreTable {
        let rows = means
            .iter()
            .enumerate()
            .map(|(frame, &v)| FrameObjectScore {
                frame,
                object: 1,
                j: v,
                f: v,
                jf: v,
            })
            .collect();
        SequenceScoreTable::from_rows(means.len(), vec![1], rows).unwrap()
    }

    #[test]
    fn worst_frame_is_argmin_with_low_index_ties() {
        let table = score_table(&[0.9, 0.2, 0.5, 0.2]);
        assert_eq!(worst_frame(&table, &BTreeSet::new()).unwrap(), 1);
    }

    #[test]
    fn worst_frame_honors_exclusions_and_falls_back_when_all_excluded() {
        let table = score_table(&[0.1, 0.2, 0.3]);
        let excluded: BTreeSet<usize> = [0].into_iter().collect();
        assert_eq!(worst_frame(&table, &excluded).unwrap(), 1);
        let all: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
        assert_eq!(worst_frame(&table, &all).unwrap(), 0);
    }

    #[test]
    fn csv_columns_are_frozen() {
        let table = score_table(&[0.5]);
        let csv = table.to_csv();
        assert_eq!(csv, "frame,object,j,f,jf\n0,1,0.500000,0.500000,0.500000\n");
    }

    #[test]
    fn from_rows_rejects_holes_and_duplicates() {
        let row = |frame, object| FrameObjectScore {
            frame,
            object,
            j: 0.0,
            f: 0.0,
            jf: 0.0,
        };
        assert!(SequenceScoreTable::from_rows(2, vec![1], vec![row(0, 1)]).is_err());
        assert!(
            SequenceScoreTable::from_rows(2, vec![1], vec![row(0, 1), row(0, 1)]).is_err()
        );
        assert!(SequenceScoreTable::from_rows(1, vec![1], vec![row(0, 2)]).is_err());
        assert!(SequenceScoreTable::from_rows(1, vec![], vec![]).is_err());
    }
}
