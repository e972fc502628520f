//! Tone intervals and the seeded candidate sampler.
//!
//! A table splits the tone range into contiguous classification intervals
//! `[l_inf, l_sup)`; the last one is closed at 255. Each interval also carries a
//! target range `[t_inf, t_sup]` from which replacement candidates are drawn.
//!
//! Table files are TOML:
//!
//! ```toml
//! [[interval]]
//! l_inf = 10
//! l_sup = 92
//! # t_inf / t_sup are optional and default to l_inf / l_sup
//! t_inf = 20
//! t_sup = 80
//! ```

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToneInterval {
    pub l_inf: u8,
    pub l_sup: u8,
    pub t_inf: u8,
    pub t_sup: u8,
}

impl ToneInterval {
    /// Interval whose sampling targets coincide with its bounds.
    pub fn coincident(l_inf: u8, l_sup: u8) -> Self {
        Self { l_inf, l_sup, t_inf: l_inf, t_sup: l_sup }
    }

    #[inline]
    pub fn target_contains(&self, tone: u8) -> bool {
        (self.t_inf..=self.t_sup).contains(&tone)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ToneIntervalTable {
    intervals: Vec<ToneInterval>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    interval: Vec<IntervalEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalEntry {
    l_inf: u8,
    l_sup: u8,
    t_inf: Option<u8>,
    t_sup: Option<u8>,
}

impl ToneIntervalTable {
    /// Builds a table, checking every invariant. Errors name the one violated.
    pub fn new(intervals: Vec<ToneInterval>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidTable(msg));
        let (Some(first), Some(last)) = (intervals.first(), intervals.last()) else {
            return bad("table must contain at least one interval".into());
        };
        if first.l_inf == 0 {
            return bad("first interval l_inf must be greater than 0".into());
        }
        if last.l_sup != 255 {
            return bad(format!("last interval l_sup must be 255, got {}", last.l_sup));
        }
        for (i, iv) in intervals.iter().enumerate() {
            if iv.l_inf >= iv.l_sup {
                return bad(format!(
                    "interval {i}: l_inf < l_sup violated ({} >= {})",
                    iv.l_inf, iv.l_sup
                ));
            }
            if iv.t_inf > iv.t_sup {
                return bad(format!(
                    "interval {i}: t_inf <= t_sup violated ({} > {})",
                    iv.t_inf, iv.t_sup
                ));
            }
        }
        for (i, pair) in intervals.windows(2).enumerate() {
            if pair[0].l_sup != pair[1].l_inf {
                return bad(format!(
                    "contiguity violated between intervals {i} and {}: l_sup {} != l_inf {}",
                    i + 1,
                    pair[0].l_sup,
                    pair[1].l_inf
                ));
            }
        }
        Ok(Self { intervals })
    }

    /// Three near-equal intervals over [10, 255] with targets equal to bounds.
    pub fn default_table() -> Self {
        Self {
            intervals: vec![
                ToneInterval::coincident(10, 92),
                ToneInterval::coincident(92, 174),
                ToneInterval::coincident(174, 255),
            ],
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TableFile =
            toml::from_str(text).map_err(|e| Error::InvalidTable(e.message().to_owned()))?;
        Self::new(
            file.interval
                .into_iter()
                .map(|e| ToneInterval {
                    l_inf: e.l_inf,
                    l_sup: e.l_sup,
                    t_inf: e.t_inf.unwrap_or(e.l_inf),
                    t_sup: e.t_sup.unwrap_or(e.l_sup),
                })
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn intervals(&self) -> &[ToneInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&ToneInterval> {
        self.intervals.get(index)
    }

    /// Index of the interval containing `g`. Tones below the first `l_inf`
    /// fall into interval 0.
    pub fn classify(&self, g: u8) -> usize {
        // Lower bounds are strictly increasing, so the containing interval is
        // the last one whose l_inf <= g.
        self.intervals
            .partition_point(|iv| iv.l_inf <= g)
            .saturating_sub(1)
    }

    /// Draws one candidate from interval `index`'s target range.
    ///
    /// Consumes exactly one value from `rng`. Panics if `index` is out of range.
    pub fn sample_candidate(&self, index: usize, rng: &mut RandomSource) -> u8 {
        candidate_at(&self.intervals[index], rng.next_unit())
    }
}

impl Default for ToneIntervalTable {
    fn default() -> Self {
        Self::default_table()
    }
}

/// `round(t_inf + r * (t_sup - t_inf))` clamped to the tone range.
#[inline]
pub fn candidate_at(interval: &ToneInterval, r: f64) -> u8 {
    let lo = f64::from(interval.t_inf);
    let hi = f64::from(interval.t_sup);
    (lo + r * (hi - lo)).round().clamp(0.0, 255.0) as u8
}

/// Seeded uniform source backed by ChaCha8.
///
/// ChaCha8's output stream is fixed by its definition, and `rand_chacha`
/// guarantees value stability for `seed_from_u64`, so a seed yields the same
/// sequence on every platform.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent source on ChaCha stream `stream` of the same seed; used
    /// to hand each parallel job its own generator.
    pub fn derive(&self, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream.wrapping_add(1));
        Self { seed: self.seed, rng }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
