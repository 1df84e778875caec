//! Run-length codec for binary masks. Runs alternate background/foreground
//! over the row-major pixel stream and start with a background run, so a
//! mask whose first pixel is foreground encodes with a leading zero run.

use super::{BinaryMask, RasterError, RasterSize};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub size: RasterSize,
    pub runs: Vec<u32>,
}

impl RleMask {
    pub fn encode(mask: &BinaryMask) -> Self {
        Self {
            size: mask.size(),
            runs: encode_runs(mask),
        }
    }

    pub fn decode(&self) -> Result<BinaryMask, RasterError> {
        decode_runs(self.size, &self.runs)
    }
}

/// Canonical runs: no zero-length run except possibly the leading one, and
/// no trailing zero run.
pub fn encode_runs(mask: &BinaryMask) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len: u32 = 0;
    for &bit in mask.as_slice() {
        if bit == current {
            len += 1;
        } else {
            runs.push(len);
            current = bit;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

/// Accepts any run list (zero runs included) whose sum matches the pixel
/// count, so foreign encoders with non-canonical output still decode.
pub fn decode_runs(size: RasterSize, runs: &[u32]) -> Result<BinaryMask, RasterError> {
    let want = size.pixel_count() as u64;
    let got: u64 = runs.iter().map(|&r| r as u64).sum();
    if got != want {
        return Err(RasterError::RunSumMismatch { want, got });
    }
    let mut mask = BinaryMask::new(size);
    let w = size.width();
    let mut at: usize = 0;
    let mut fg = false;
    for &run in runs {
        if fg {
            for i in at..at + run as usize {
                mask.set((i as u32) % w, (i as u32) / w, true);
            }
        }
        at += run as usize;
        fg = !fg;
    }
    Ok(mask)
}
