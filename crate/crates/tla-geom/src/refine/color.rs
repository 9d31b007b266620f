//! Green-index color classification (canopy / pot / dismissed).

use tla_core::{PointCloud, Real};

use crate::error::{GeomError, Result};

/// Classification thresholds on the green index.
#[derive(Clone, Copy, Debug)]
pub struct ColorFilterParams<T> {
    /// Points with I_g ≥ this value are canopy.
    pub canopy_min_ig: T,
    /// Points with I_g ≤ this value are pot.
    pub pot_max_ig: T,
}

impl<T: Real> Default for ColorFilterParams<T> {
    fn default() -> Self {
        ColorFilterParams {
            canopy_min_ig: T::of(-0.02),
            pot_max_ig: T::of(-0.25),
        }
    }
}

/// Green index I_g = (g − r) / (r + g), in [−1, 1].
/// Returns `None` when both channels are 0 (the index is undefined and the
/// caller dismisses the point).
pub fn green_index<T: Real>(r: u8, g: u8) -> Option<T> {
    if r == 0 && g == 0 {
        return None;
    }
    let (rf, gf) = (T::of_usize(r as usize), T::of_usize(g as usize));
    Some((gf - rf) / (rf + gf))
}

/// The three-way partition produced by color classification.
#[derive(Clone, Debug)]
pub struct Classified<T> {
    pub canopy: PointCloud<T>,
    pub pot: PointCloud<T>,
    pub dismissed: PointCloud<T>,
}

/// Partitions a colored cloud by green index: I_g ≥ canopy_min_ig → canopy;
/// I_g ≤ pot_max_ig → pot; everything else (including undefined I_g) →
/// dismissed. The three outputs partition the input exactly.
pub fn classify_points<T: Real>(
    cloud: &PointCloud<T>,
    params: &ColorFilterParams<T>,
) -> Result<Classified<T>> {
    let colors = cloud.colors.as_ref().ok_or_else(|| {
        GeomError::MissingReference("classification requires per-point colors".into())
    })?;

    let mut canopy_idx = Vec::new();
    let mut pot_idx = Vec::new();
    let mut dismissed_idx = Vec::new();
    for (i, c) in colors.iter().enumerate() {
        match green_index::<T>(c[0], c[1]) {
            Some(ig) if ig >= params.canopy_min_ig => canopy_idx.push(i),
            Some(ig) if ig <= params.pot_max_ig => pot_idx.push(i),
            _ => dismissed_idx.push(i),
        }
    }
    Ok(Classified {
        canopy: cloud.select(&canopy_idx),
        pot: cloud.select(&pot_idx),
        dismissed: cloud.select(&dismissed_idx),
    })
}
