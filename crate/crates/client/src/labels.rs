//! Scribble supervision: a stroke raster becomes foreground, no-care, and
//! background regions. No-care pixels carry no loss; strokes of other
//! objects are background no matter what.

use crate::ClientError;
use scribbleval_core::raster::morph::dilate;
use scribbleval_core::raster::{BinaryMask, StructuringElement};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Foreground support B: scribble pixels dilated by this are positives.
    pub fg_se: StructuringElement,
    /// Care support C: outside the C-dilation everything is background.
    pub care_se: StructuringElement,
    /// Upper bound on the per-sample dual weights of the classifier.
    pub regularization: f64,
    /// Scores at or below this are background.
    pub bg_threshold: f64,
    /// Carry the previous prediction's foreground as no-care unless a new
    /// scribble contradicts it.
    pub prior_fg_nocare: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            fg_se: StructuringElement::disk(3),
            care_se: StructuringElement::disk(9),
            regularization: 1.0,
            bg_threshold: 0.0,
            prior_fg_nocare: false,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), ClientError> {
        if !self.care_se.covers(self.fg_se) {
            return Err(ClientError::SupportOrder);
        }
        if !(self.regularization.is_finite() && self.regularization > 0.0) {
            return Err(ClientError::BadParam(format!(
                "regularization must be positive ({})",
                self.regularization
            )));
        }
        if !self.bg_threshold.is_finite() {
            return Err(ClientError::BadParam("bg_threshold must be finite".into()));
        }
        Ok(())
    }
}

/// The three masks partition the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ScribbleLabels {
    pub object: u8,
    pub fg: BinaryMask,
    pub nocare: BinaryMask,
    pub bg: BinaryMask,
}

/// Label a frame for one object from its accumulated stroke raster.
/// `others` holds every stroke pixel that is not this object's (other
/// objects and explicit background strokes); those pixels end up background
/// even inside this object's dilation. With `prior_fg_nocare` set,
/// `prior_fg` pixels become no-care wherever no stroke claims them.
pub fn scribble_to_labels(
    object: u8,
    scribbled: &BinaryMask,
    others: &BinaryMask,
    prior_fg: Option<&BinaryMask>,
    cfg: &BaselineConfig,
) -> Result<ScribbleLabels, ClientError> {
    cfg.validate()?;
    if scribbled.size() != others.size() {
        return Err(ClientError::SizeMismatch);
    }
    if let Some(prior) = prior_fg {
        if prior.size() != scribbled.size() {
            return Err(ClientError::SizeMismatch);
        }
    }
    let mut fg = dilate(scribbled, cfg.fg_se);
    fg.subtract(others);
    let mut nocare = dilate(scribbled, cfg.care_se);
    nocare.subtract(&fg);
    nocare.subtract(others);
    if cfg.prior_fg_nocare {
        if let Some(prior) = prior_fg {
            let mut carried = prior.clone();
            carried.subtract(&fg);
            carried.subtract(others);
            nocare.union_with(&carried);
        }
    }
    let size = scribbled.size();
    let bg = BinaryMask::from_fn(size, |x, y| !fg.get(x, y) && !nocare.get(x, y));
    Ok(ScribbleLabels {
        object,
        fg,
        nocare,
        bg,
    })
}
