//! Metrics over render results and threshold sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::imageio::GrayImage;
use crate::render::{render, DecisionTrace, Outcome, RenderParams};

/// Positions where two equally sized images disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ChangeMask {
    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} mask bits for {width}x{height}",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

pub fn change_mask(before: &GrayImage, after: &GrayImage) -> Result<ChangeMask> {
    if before.dimensions() != after.dimensions() {
        return Err(Error::DimensionMismatch { left: before.dimensions(), right: after.dimensions() });
    }
    let bits = before.pixels().iter().zip(after.pixels()).map(|(a, b)| a != b).collect();
    let (width, height) = before.dimensions();
    Ok(ChangeMask { width, height, bits })
}

/// Hamming distance between two masks.
pub fn mask_distance(a: &ChangeMask, b: &ChangeMask) -> Result<usize> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::DimensionMismatch { left: a.dimensions(), right: b.dimensions() });
    }
    Ok(a.bits.iter().zip(&b.bits).filter(|(p, q)| p != q).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeConcentration {
    pub near_fraction: f64,
    pub far_fraction: f64,
}

/// Share of protected pixels within Chebyshev distance `radius` of the edge
/// set, and among all remaining pixels. A side with no pixels reports 0.
pub fn edge_concentration(
    trace: &DecisionTrace,
    edge_set: &[(usize, usize)],
    radius: usize,
) -> Result<EdgeConcentration> {
    if edge_set.is_empty() {
        return Err(Error::Usage("edge set is empty".into()));
    }
    let (w, h) = (trace.width, trace.height);
    let mut near = vec![false; w * h];
    for &(ex, ey) in edge_set {
        if ex >= w || ey >= h {
            return Err(Error::Usage(format!("edge pixel ({ex}, {ey}) outside {w}x{h}")));
        }
        for y in ey.saturating_sub(radius)..=(ey + radius).min(h - 1) {
            for x in ex.saturating_sub(radius)..=(ex + radius).min(w - 1) {
                near[y * w + x] = true;
            }
        }
    }
    // [near, far] x [total, protected]
    let mut tally = [[0usize; 2]; 2];
    for d in &trace.decisions {
        let side = usize::from(!near[d.y * w + d.x]);
        tally[side][0] += 1;
        tally[side][1] += usize::from(d.outcome == Outcome::ProtectedR2);
    }
    let frac = |[total, hit]: [usize; 2]| if total == 0 { 0.0 } else { hit as f64 / total as f64 };
    Ok(EdgeConcentration { near_fraction: frac(tally[0]), far_fraction: frac(tally[1]) })
}

/// Pixels with a 4-neighbor of a different tone.
pub fn tone_boundaries(image: &GrayImage) -> Vec<(usize, usize)> {
    let (w, h) = image.dimensions();
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let g = image.get(x, y);
            let differs = (x > 0 && image.get(x - 1, y) != g)
                || (x + 1 < w && image.get(x + 1, y) != g)
                || (y > 0 && image.get(x, y - 1) != g)
                || (y + 1 < h && image.get(x, y + 1) != g);
            if differs {
                edges.push((x, y));
            }
        }
    }
    edges
}

/// Parses an edge set file: one `x,y` pair per line; blank lines and `#`
/// comments are skipped.
pub fn parse_edge_set(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parsed = line
            .split_once(',')
            .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)));
        match parsed {
            Some(p) => out.push(p),
            None => {
                return Err(Error::Usage(format!("edge set line {}: expected \"x,y\"", n + 1)))
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    T,
    VThresh,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::T => "t",
            SweepParam::VThresh => "v_thresh",
        }
    }

    pub fn apply(self, params: &mut RenderParams, value: f64) {
        match self {
            SweepParam::T => params.t = value,
            SweepParam::VThresh => params.v_thresh = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(SweepParam::T),
            "v_thresh" | "v-threshold" | "v_threshold" | "v" => Ok(SweepParam::VThresh),
            _ => Err(Error::Usage(format!("unknown sweep parameter {s:?} (use t or v_thresh)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub base: RenderParams,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>, base: RenderParams) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("sweep needs at least one value".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Usage(format!("sweep value {v} must be > 0")));
        }
        Ok(Self { param, values, base })
    }

    /// Parses `PARAM=v1,v2,...`.
    pub fn parse(text: &str, base: RenderParams) -> Result<Self> {
        let (name, list) = text
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("sweep {text:?}: expected PARAM=v1,v2,...")))?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("sweep value {v:?} is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name.trim().parse()?, values, base)
    }

    pub fn params_for(&self, value: f64) -> RenderParams {
        let mut p = self.base.clone();
        self.param.apply(&mut p, value);
        p
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub value: f64,
    pub image: GrayImage,
    pub traces: Vec<DecisionTrace>,
}

/// One independent render per value, same seed and other params. Cells run in
/// parallel and come back in the order of `spec.values`.
pub fn run_sweep(image: &GrayImage, spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    spec.values
        .par_iter()
        .map(|&value| {
            let (out, traces) = render(image, &spec.params_for(value))?;
            Ok(SweepCell { value, image: out, traces })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PassMetrics {
    pub pass: u32,
    pub outcomes: BTreeMap<&'static str, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_concentration: Option<EdgeConcentration>,
}

/// Structured summary of one render, including the effective configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RenderMetrics {
    pub config: RenderParams,
    pub width: usize,
    pub height: usize,
    pub changed_pixels: usize,
    pub outcomes: BTreeMap<&'static str, usize>,
    pub passes: Vec<PassMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_radius: Option<usize>,
}

fn outcome_counts<'a>(decisions: impl Iterator<Item = &'a crate::render::PixelDecision>) -> BTreeMap<&'static str, usize> {
    let mut counts: BTreeMap<&'static str, usize> =
        Outcome::ALL.iter().map(|o| (o.as_str(), 0)).collect();
    for d in decisions {
        *counts.get_mut(d.outcome.as_str()).expect("all outcomes seeded") += 1;
    }
    counts
}

impl RenderMetrics {
    pub fn collect(
        params: &RenderParams,
        input: &GrayImage,
        output: &GrayImage,
        traces: &[DecisionTrace],
        edges: Option<(&[(usize, usize)], usize)>,
    ) -> Result<Self> {
        let passes = traces
            .iter()
            .map(|t| {
                Ok(PassMetrics {
                    pass: t.pass_index,
                    outcomes: outcome_counts(t.decisions.iter()),
                    edge_concentration: edges
                        .map(|(set, radius)| edge_concentration(t, set, radius))
                        .transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: params.clone(),
            width: input.width(),
            height: input.height(),
            changed_pixels: change_mask(input, output)?.popcount(),
            outcomes: outcome_counts(traces.iter().flat_map(|t| t.decisions.iter())),
            passes,
            edge_radius: edges.map(|(_, r)| r),
        })
    }
}
