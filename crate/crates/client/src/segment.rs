//! Segmenters close the loop: they turn accumulated scribbles into
//! full-sequence label masks. The linear baseline refits per-object
//! classifiers each turn over a feature map computed exactly once.

use crate::features::FeatureMap;
use crate::labels::{scribble_to_labels, BaselineConfig};
use crate::svm::{fit_linear_svm, LinearScorer, TrainingSet};
use crate::ClientError;
use scribbleval_core::raster::draw::rasterize_polyline;
use scribbleval_core::raster::morph::dilate;
use scribbleval_core::raster::{BinaryMask, LabelMask, RasterSize, StructuringElement};
use scribbleval_core::robot::wire::WireScribbleSet;
use std::collections::{BTreeMap, BTreeSet};

/// What a session told us about the sequence it serves.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceContext {
    pub sequence: String,
    pub frames: usize,
    pub size: RasterSize,
    pub objects: Vec<u8>,
}

/// Scribbles accumulated over the turns of one session, rasterized at full
/// resolution. Key 0 holds explicit background strokes.
#[derive(Debug, Clone)]
pub struct ScribbleStore {
    size: RasterSize,
    frames: usize,
    rasters: BTreeMap<u8, Vec<BinaryMask>>,
    annotated: BTreeSet<usize>,
}

impl ScribbleStore {
    pub fn new(ctx: &SequenceContext) -> ScribbleStore {
        ScribbleStore {
            size: ctx.size,
            frames: ctx.frames,
            rasters: BTreeMap::new(),
            annotated: BTreeSet::new(),
        }
    }

    pub fn absorb(&mut self, wire: &WireScribbleSet) -> Result<(), ClientError> {
        if wire.scribbles.len() != self.frames {
            return Err(ClientError::BadResponse(format!(
                "scribble set covers {} frames, sequence has {}",
                wire.scribbles.len(),
                self.frames
            )));
        }
        for (frame, strokes) in wire.scribbles.iter().enumerate() {
            for stroke in strokes {
                let ink = rasterize_polyline(&stroke.path, self.size, 1)?;
                self.rasters
                    .entry(stroke.object_id)
                    .or_insert_with(|| vec![BinaryMask::new(self.size); self.frames])[frame]
                    .union_with(&ink);
                self.annotated.insert(frame);
            }
        }
        Ok(())
    }

    /// Frames that have received at least one stroke so far.
    pub fn annotated_frames(&self) -> &BTreeSet<usize> {
        &self.annotated
    }

    /// Nonzero object ids with any ink.
    pub fn inked_objects(&self) -> Vec<u8> {
        self.rasters.keys().copied().filter(|&id| id != 0).collect()
    }

    pub fn ink(&self, object: u8, frame: usize) -> Option<&BinaryMask> {
        self.rasters.get(&object).map(|frames| &frames[frame])
    }

    /// Every stroke pixel on `frame` that does not belong to `object`,
    /// explicit background strokes included.
    pub fn foreign_ink(&self, object: u8, frame: usize) -> BinaryMask {
        let mut out = BinaryMask::new(self.size);
        for (&id, frames) in &self.rasters {
            if id != object {
                out.union_with(&frames[frame]);
            }
        }
        out
    }
}

pub trait Segmenter {
    fn name(&self) -> &'static str;
    fn predict(
        &mut self,
        ctx: &SequenceContext,
        store: &ScribbleStore,
    ) -> Result<Vec<LabelMask>, ClientError>;
}

/// Scores computed at feature-grid resolution, winner-takes-all per cell
/// (strictly above the threshold, ties to the lowest id), then upsampled
/// nearest-neighbor to the full raster.
pub fn predict_masks(
    features: &FeatureMap,
    scorers: &BTreeMap<u8, LinearScorer>,
    full: RasterSize,
    bg_threshold: f64,
) -> Result<Vec<LabelMask>, ClientError> {
    if scorers.is_empty() {
        return Err(ClientError::BadParam("no scorers".into()));
    }
    for (id, scorer) in scorers {
        if scorer.dim() != features.dim() {
            return Err(ClientError::BadParam(format!(
                "object {id}: scorer dimension {} does not match features {}",
                scorer.dim(),
                features.dim()
            )));
        }
    }
    check_coverage(features, full)?;
    let grid = features.grid();
    let mut out = Vec::with_capacity(features.frames());
    for t in 0..features.frames() {
        let mut cells = vec![0u8; grid.pixel_count()];
        for gy in 0..grid.height() {
            for gx in 0..grid.width() {
                let x = features.at(t, gx, gy);
                let mut best: Option<(u8, f64)> = None;
                for (&id, scorer) in scorers {
                    let s = scorer.score(x);
                    if s > bg_threshold && best.is_none_or(|(_, b)| s > b) {
                        best = Some((id, s));
                    }
                }
                if let Some((id, _)) = best {
                    cells[grid.index(gx, gy)] = id;
                }
            }
        }
        let mut mask = LabelMask::new(full);
        for y in 0..full.height() {
            for x in 0..full.width() {
                let (gx, gy) = features.cell_of(x, y);
                mask.set(x, y, cells[grid.index(gx, gy)]);
            }
        }
        out.push(mask);
    }
    Ok(out)
}

fn check_coverage(features: &FeatureMap, full: RasterSize) -> Result<(), ClientError> {
    let f = features.factor();
    let want_w = full.width().div_ceil(f);
    let want_h = full.height().div_ceil(f);
    if features.grid().width() != want_w || features.grid().height() != want_h {
        return Err(ClientError::BadParam(format!(
            "feature grid {}x{} with factor {f} cannot cover a {}x{} raster",
            features.grid().width(),
            features.grid().height(),
            full.width(),
            full.height()
        )));
    }
    Ok(())
}

/// Per-object linear classifiers over a fixed feature map, refit from the
/// accumulated scribble labels every turn.
pub struct LinearBaseline {
    cfg: BaselineConfig,
    features: FeatureMap,
    seed: u64,
    prior: Option<Vec<LabelMask>>,
}

impl LinearBaseline {
    pub fn new(features: FeatureMap, cfg: BaselineConfig, seed: u64) -> Result<LinearBaseline, ClientError> {
        cfg.validate()?;
        Ok(LinearBaseline {
            cfg,
            features,
            seed,
            prior: None,
        })
    }

    /// The map is owned and never recomputed; turns differ only in labels.
    pub fn features(&self) -> &FeatureMap {
        &self.features
    }

    /// A feature cell trains positive when any covered pixel is foreground,
    /// negative when every covered pixel is background, and is skipped when
    /// no-care pixels are the only non-background content.
    fn add_frame_samples(
        &self,
        set: &mut TrainingSet,
        frame: usize,
        fg: &BinaryMask,
        bg: &BinaryMask,
        full: RasterSize,
    ) {
        let grid = self.features.grid();
        let f = self.features.factor();
        for gy in 0..grid.height() {
            for gx in 0..grid.width() {
                let mut any_fg = false;
                let mut all_bg = true;
                for y in (gy * f)..((gy + 1) * f).min(full.height()) {
                    for x in (gx * f)..((gx + 1) * f).min(full.width()) {
                        if fg.get(x, y) {
                            any_fg = true;
                        }
                        if !bg.get(x, y) {
                            all_bg = false;
                        }
                    }
                }
                if any_fg {
                    set.push(self.features.at(frame, gx, gy), true);
                } else if all_bg {
                    set.push(self.features.at(frame, gx, gy), false);
                }
            }
        }
    }
}

impl Segmenter for LinearBaseline {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn predict(
        &mut self,
        ctx: &SequenceContext,
        store: &ScribbleStore,
    ) -> Result<Vec<LabelMask>, ClientError> {
        if self.features.frames() != ctx.frames {
            return Err(ClientError::BadParam(format!(
                "feature map has {} frames, sequence has {}",
                self.features.frames(),
                ctx.frames
            )));
        }
        check_coverage(&self.features, ctx.size)?;
        let empty = BinaryMask::new(ctx.size);
        let mut scorers = BTreeMap::new();
        for &id in &ctx.objects {
            let mut set = TrainingSet::new(self.features.dim());
            for &frame in store.annotated_frames() {
                let ink = store.ink(id, frame).unwrap_or(&empty);
                let foreign = store.foreign_ink(id, frame);
                let prior_fg = self
                    .prior
                    .as_ref()
                    .map(|masks| masks[frame].extract_object(id));
                let labels =
                    scribble_to_labels(id, ink, &foreign, prior_fg.as_ref(), &self.cfg)?;
                self.add_frame_samples(&mut set, frame, &labels.fg, &labels.bg, ctx.size);
            }
            match fit_linear_svm(&set, self.cfg.regularization, self.seed ^ id as u64, id) {
                Ok(scorer) => {
                    scorers.insert(id, scorer);
                }
                // objects without usable supervision yet stay background
                Err(ClientError::SingleClass(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        let prediction = if scorers.is_empty() {
            (0..ctx.frames).map(|_| LabelMask::new(ctx.size)).collect()
        } else {
            predict_masks(&self.features, &scorers, ctx.size, self.cfg.bg_threshold)?
        };
        if self.cfg.prior_fg_nocare {
            self.prior = Some(prediction.clone());
        }
        Ok(prediction)
    }
}

/// Test-and-calibration segmenter with local ground-truth access: echoes
/// the truth back, so sessions close on the first turn.
pub struct OracleSegmenter {
    gt: Vec<LabelMask>,
}

impl OracleSegmenter {
    pub fn new(gt: Vec<LabelMask>) -> OracleSegmenter {
        OracleSegmenter { gt }
    }
}

impl Segmenter for OracleSegmenter {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn predict(
        &mut self,
        ctx: &SequenceContext,
        _store: &ScribbleStore,
    ) -> Result<Vec<LabelMask>, ClientError> {
        if self.gt.len() != ctx.frames || self.gt.iter().any(|m| m.size() != ctx.size) {
            return Err(ClientError::BadParam(
                "oracle ground truth does not match the sequence".into(),
            ));
        }
        Ok(self.gt.clone())
    }
}

/// Floor segmenter: the dilated scribbles themselves, nothing learned.
/// Lower ids win where dilations touch; background strokes are ignored.
pub struct StaticSegmenter {
    pub se: StructuringElement,
}

impl Default for StaticSegmenter {
    fn default() -> Self {
        StaticSegmenter {
            se: StructuringElement::disk(3),
        }
    }
}

impl Segmenter for StaticSegmenter {
    fn name(&self) -> &'static str {
        "static"
    }

    fn predict(
        &mut self,
        ctx: &SequenceContext,
        store: &ScribbleStore,
    ) -> Result<Vec<LabelMask>, ClientError> {
        let mut out = Vec::with_capacity(ctx.frames);
        for frame in 0..ctx.frames {
            let mut mask = LabelMask::new(ctx.size);
            for id in store.inked_objects() {
                let Some(ink) = store.ink(id, frame) else {
                    continue;
                };
                if !ink.any() {
                    continue;
                }
                for (x, y) in dilate(ink, self.se).iter_ones() {
                    if mask.get(x, y) == 0 {
                        mask.set(x, y, id);
                    }
                }
            }
            out.push(mask);
        }
        Ok(out)
    }
}
