//! Volumetric agreement between two masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::LabelMask;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// `2 |A ∩ B| / (|A| + |B|)`
    pub dice: f64,
    /// `|A ∩ B| / min(|A|, |B|)`
    pub overlap: f64,
    pub volume_a: usize,
    pub volume_b: usize,
    pub intersection: usize,
}

pub fn compare(a: &LabelMask, b: &LabelMask) -> Result<AgreementReport> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(a.dims(), b.dims()));
    }
    let (mut va, mut vb, mut both) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        va += x as usize;
        vb += y as usize;
        both += (x && y) as usize;
    }
    if va == 0 && vb == 0 {
        return Err(Error::BothEmpty);
    }
    let (dice, overlap) = if va == 0 || vb == 0 {
        (0.0, 0.0)
    } else {
        (
            2.0 * both as f64 / (va + vb) as f64,
            both as f64 / va.min(vb) as f64,
        )
    };
    Ok(AgreementReport {
        dice,
        overlap,
        volume_a: va,
        volume_b: vb,
        intersection: both,
    })
}
