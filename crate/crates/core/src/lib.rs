//! Labyrinthine-tiling stylization of grayscale images.
//!
//! Each pixel is compared against the mean and dispersion of its 8-neighborhood.
//! Pixels far from the local mean are resampled from a tone interval until they
//! land within a relative band of that mean, unless the neighborhood is
//! dispersed enough to protect them. Competition between the two tests produces
//! a maze-like texture that follows object contours.
//!
//! The pipeline is split into:
//!
//! * [`stats`]: neighborhood mean, variance and the two decision ratios.
//! * [`tone`]: tone interval table, classification, and seeded candidate sampling.
//! * [`render`]: the in-place raster scan and its per-pixel decision trace.
//! * [`imageio`]: PGM (P5) codec, PNG bridge and luma conversion.
//! * [`analysis`]: change masks, edge concentration and parameter sweeps.

pub mod analysis;
pub mod error;
pub mod imageio;
pub mod render;
pub mod stats;
pub mod tone;

pub use error::{Error, Result};
pub use imageio::GrayImage;
pub use render::{render, render_pass, Outcome, PixelDecision, DecisionTrace, RenderParams};
pub use stats::{local_stats, ratio_r1, ratio_r2, NeighborhoodStats};
pub use tone::{RandomSource, ToneInterval, ToneIntervalTable};
