//! Scribble synthesis from prediction errors, plus annotation-time pricing.

use super::simplify::simplify_contained;
use super::{
    longest::skeleton_longest_path, AnnotationCostModel, RobotError, RobotParams, Scribble,
    ScribbleKind, ScribbleSet,
};
use crate::raster::components::{connected_components, Component};
use crate::raster::draw::pixel_to_normalized;
use crate::raster::morph::skeletonize;
use crate::raster::{BinaryMask, LabelMask, RasterSize};

/// Pixels the prediction misses (reference says `object`, prediction does
/// not) and pixels it invents (prediction says `object`, reference does
/// not).
pub fn error_regions(
    pred: &LabelMask,
    gt: &LabelMask,
    object: u8,
) -> Result<(BinaryMask, BinaryMask), RobotError> {
    if pred.size() != gt.size() {
        return Err(RobotError::SizeMismatch {
            pred: pred.size(),
            gt: gt.size(),
        });
    }
    let size = pred.size();
    let missed = BinaryMask::from_fn(size, |x, y| {
        gt.get(x, y) == object && pred.get(x, y) != object
    });
    let spurious = BinaryMask::from_fn(size, |x, y| {
        pred.get(x, y) == object && gt.get(x, y) != object
    });
    Ok((missed, spurious))
}

/// Drop components below the area floor, then keep at most
/// `max_components_per_kind` of the rest. Input order (largest first) is
/// preserved.
pub fn filter_spurious(
    components: Vec<Component>,
    frame_area: usize,
    params: &RobotParams,
) -> Vec<Component> {
    let floor = params.min_area_fraction * frame_area as f64;
    let mut kept: Vec<Component> = components
        .into_iter()
        .filter(|c| c.area as f64 >= floor)
        .collect();
    kept.truncate(params.max_components_per_kind);
    kept
}

fn scribble_for_component(
    component: &Component,
    label: u8,
    frame: usize,
    kind: ScribbleKind,
    params: &RobotParams,
) -> Result<Scribble, RobotError> {
    let size: RasterSize = component.mask.size();
    let skeleton = skeletonize(&component.mask);
    let path = skeleton_longest_path(&skeleton)?;
    let kept = simplify_contained(&path, params.simplify_epsilon_px, &component.mask);
    let path: Vec<(f64, f64)> = kept
        .into_iter()
        .map(|(x, y)| {
            (
                pixel_to_normalized(x, size.width()),
                pixel_to_normalized(y, size.height()),
            )
        })
        .collect();
    Ok(Scribble {
        frame,
        object_label: label,
        path,
        kind,
        start_time_s: None,
        end_time_s: None,
    })
}

/// Most frequent reference label over the component's pixels; ties go to
/// the smaller label, so background wins against any single object tie.
fn majority_label(gt: &LabelMask, component: &BinaryMask) -> u8 {
    let mut counts = [0usize; 256];
    for (x, y) in component.iter_ones() {
        counts[gt.get(x, y) as usize] += 1;
    }
    let mut best = 0u8;
    let mut best_count = counts[0];
    for (label, &count) in counts.iter().enumerate().skip(1) {
        if count > best_count {
            best = label as u8;
            best_count = count;
        }
    }
    best
}

/// Corrective scribbles for one frame: per object (in the given order),
/// first the surviving missed-region components, then the spurious ones.
/// Missed regions carry the object's label; spurious regions carry the
/// majority reference label under them, 0 when background dominates.
/// Identical prediction and reference produce an empty set.
pub fn generate_scribbles(
    pred: &LabelMask,
    gt: &LabelMask,
    frame: usize,
    objects: &[u8],
    params: &RobotParams,
    sequence: &str,
) -> Result<ScribbleSet, RobotError> {
    let mut set = ScribbleSet::empty(sequence);
    let frame_area = pred.size().pixel_count();
    for &object in objects {
        let (missed, spurious) = error_regions(pred, gt, object)?;
        for (region, is_missed) in [(missed, true), (spurious, false)] {
            let components = filter_spurious(
                connected_components(&region, params.connectivity),
                frame_area,
                params,
            );
            for component in &components {
                let label = if is_missed {
                    object
                } else {
                    majority_label(gt, &component.mask)
                };
                set.scribbles.push(scribble_for_component(
                    component,
                    label,
                    frame,
                    ScribbleKind::Simulated,
                    params,
                )?);
            }
        }
    }
    Ok(set)
}

/// Opening annotation when no recorded scribbles exist: one foreground
/// stroke per object present in the frame. When the area filter would drop
/// an object entirely, its largest component is used anyway so every
/// present object gets marked.
pub fn bootstrap_initial_scribbles(
    gt: &LabelMask,
    frame: usize,
    objects: &[u8],
    params: &RobotParams,
    sequence: &str,
) -> Result<ScribbleSet, RobotError> {
    let mut set = ScribbleSet::empty(sequence);
    let frame_area = gt.size().pixel_count();
    for &object in objects {
        let mask = gt.extract_object(object);
        let components = connected_components(&mask, params.connectivity);
        if components.is_empty() {
            continue;
        }
        let largest = components[0].clone();
        let mut chosen = filter_spurious(components, frame_area, params);
        if chosen.is_empty() {
            chosen = vec![largest];
        }
        for component in &chosen {
            set.scribbles.push(scribble_for_component(
                component,
                object,
                frame,
                ScribbleKind::Bootstrap,
                params,
            )?);
        }
    }
    Ok(set)
}

/// Price a set as if a person drew it: each stroke costs the base plus the
/// per-point rate times its point count.
pub fn estimate_annotation_time(set: &ScribbleSet, model: &AnnotationCostModel) -> f64 {
    set.scribbles
        .iter()
        .map(|s| model.base_s + model.per_point_s * s.path.len() as f64)
        .sum()
}
