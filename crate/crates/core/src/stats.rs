//! Local statistics over the 8-neighborhood of a pixel.
//!
//! The center pixel is excluded. At borders only in-bounds neighbors take part
//! and `count` shrinks to match (5 on an edge, 3 in a corner).

use crate::error::{Error, Result};
use crate::imageio::GrayImage;

/// Denominator floor applied to the mean in both ratios, in tone units.
pub const DEFAULT_MEAN_FLOOR: f64 = 1.0;

const OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodStats {
    pub mean: f64,
    /// Population variance, tone² units.
    pub variance: f64,
    pub count: u32,
}

/// Rejects images the neighborhood statistics are not defined for.
pub fn check_supported(image: &GrayImage) -> Result<()> {
    if image.width() < 2 || image.height() < 2 {
        return Err(Error::UnsupportedImage { width: image.width(), height: image.height() });
    }
    Ok(())
}

/// Mean and population variance of the in-bounds 8-neighbors of `(x, y)`.
pub fn local_stats(image: &GrayImage, x: usize, y: usize) -> Result<NeighborhoodStats> {
    check_supported(image)?;
    if !image.in_bounds(x, y) {
        return Err(Error::Usage(format!(
            "pixel ({x}, {y}) outside {}x{} image",
            image.width(),
            image.height()
        )));
    }
    Ok(neighborhood(image, x, y))
}

/// Unchecked variant for the scan loop; caller guarantees bounds and size.
pub(crate) fn neighborhood(image: &GrayImage, x: usize, y: usize) -> NeighborhoodStats {
    let mut tones = [0u8; 8];
    let mut n = 0usize;
    let (w, h) = (image.width() as isize, image.height() as isize);
    for (dx, dy) in OFFSETS {
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        if nx >= 0 && ny >= 0 && nx < w && ny < h {
            tones[n] = image.get(nx as usize, ny as usize);
            n += 1;
        }
    }
    let tones = &tones[..n];
    let count = n as f64;
    let mean = tones.iter().map(|&g| f64::from(g)).sum::<f64>() / count;
    let variance = tones
        .iter()
        .map(|&g| {
            let d = f64::from(g) - mean;
            d * d
        })
        .sum::<f64>()
        / count;
    NeighborhoodStats { mean, variance, count: n as u32 }
}

/// `|g - mean| / max(mean, floor)`.
#[inline]
pub fn ratio_r1_with_floor(g: f64, mean: f64, floor: f64) -> f64 {
    (g - mean).abs() / mean.max(floor)
}

/// Relative deviation of a tone from the neighborhood mean.
#[inline]
pub fn ratio_r1(g: f64, mean: f64) -> f64 {
    ratio_r1_with_floor(g, mean, DEFAULT_MEAN_FLOOR)
}

/// `sqrt(variance / count) / max(mean, floor)`.
#[inline]
pub fn ratio_r2_with_floor(stats: &NeighborhoodStats, floor: f64) -> f64 {
    (stats.variance / f64::from(stats.count)).sqrt() / stats.mean.max(floor)
}

/// Normalized neighborhood dispersion; large near contours.
#[inline]
pub fn ratio_r2(stats: &NeighborhoodStats) -> f64 {
    ratio_r2_with_floor(stats, DEFAULT_MEAN_FLOOR)
}
