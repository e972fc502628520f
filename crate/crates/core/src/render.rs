//! In-place raster scan that applies the keep / protect / resample decision to
//! every pixel, plus the decision trace used to audit it.
//!
//! Per pixel, against the image as it stands at visit time:
//!
//! 1. dispersion ratio above `v_thresh`: the pixel is protected and left alone;
//! 2. deviation ratio at most `t`: the pixel is kept;
//! 3. otherwise candidates are drawn from the target range of the interval the
//!    pixel's tone falls in, up to `max_attempts` times, and the first one
//!    within the `t` band of the neighborhood mean replaces the pixel;
//! 4. if none qualifies the pixel keeps its tone.
//!
//! Later pixels see earlier replacements. Multi-pass renders reuse a single
//! random stream.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imageio::GrayImage;
use crate::stats::{self, ratio_r1_with_floor, ratio_r2_with_floor, DEFAULT_MEAN_FLOOR};
use crate::tone::{RandomSource, ToneIntervalTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderParams {
    /// Relative band around the neighborhood mean within which a tone is kept.
    pub t: f64,
    /// Dispersion ratio above which a pixel is protected.
    pub v_thresh: f64,
    pub max_attempts: u32,
    pub passes: u32,
    pub seed: u64,
    /// Floor applied to the mean when it is used as a denominator.
    pub mean_floor: f64,
    #[serde(rename = "intervals")]
    pub table: ToneIntervalTable,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            t: 0.12,
            v_thresh: 0.50,
            max_attempts: 100,
            passes: 1,
            seed: 0,
            mean_floor: DEFAULT_MEAN_FLOOR,
            table: ToneIntervalTable::default_table(),
        }
    }
}

impl RenderParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Usage(format!("{name} must be a finite value > 0, got {v}")))
            }
        };
        positive("t", self.t)?;
        positive("v_thresh", self.v_thresh)?;
        positive("mean_floor", self.mean_floor)?;
        if self.max_attempts == 0 {
            return Err(Error::Usage("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    KeptR1,
    ProtectedR2,
    Replaced,
    Exhausted,
}

impl Outcome {
    pub const ALL: [Outcome; 4] =
        [Outcome::KeptR1, Outcome::ProtectedR2, Outcome::Replaced, Outcome::Exhausted];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::KeptR1 => "kept_r1",
            Outcome::ProtectedR2 => "protected_r2",
            Outcome::Replaced => "replaced",
            Outcome::Exhausted => "exhausted",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Outcome::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown outcome {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelDecision {
    pub x: usize,
    pub y: usize,
    pub outcome: Outcome,
    /// Deviation ratio of the tone found at visit time.
    pub r1: f64,
    pub r2: f64,
    /// Candidates drawn; 0 unless resampling happened.
    pub attempts: u32,
    pub old_tone: u8,
    pub new_tone: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTrace {
    pub pass_index: u32,
    pub width: usize,
    pub height: usize,
    pub decisions: Vec<PixelDecision>,
}

impl DecisionTrace {
    pub fn get(&self, x: usize, y: usize) -> &PixelDecision {
        &self.decisions[y * self.width + x]
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.decisions.iter().filter(|d| d.outcome == outcome).count()
    }
}

/// Header line of the delimited trace format.
pub const TRACE_HEADER: &str = "pass,x,y,outcome,r1,r2,attempts,old,new";

/// Writes traces as comma-separated text.
///
/// One header line ([`TRACE_HEADER`]), then one line per decision, `\n`
/// terminated. `pass`, `x`, `y`, `attempts`, `old` and `new` are decimal
/// integers; `outcome` is one of `kept_r1`, `protected_r2`, `replaced`,
/// `exhausted`; `r1` and `r2` use Rust's shortest round-trip formatting of an
/// `f64`, so parsing them back yields the identical value.
pub fn format_traces<'a>(traces: impl IntoIterator<Item = &'a DecisionTrace>) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for trace in traces {
        for d in &trace.decisions {
            let _ = writeln!(
                out,
                "{},{},{},{},{:?},{:?},{},{},{}",
                trace.pass_index, d.x, d.y, d.outcome, d.r1, d.r2, d.attempts, d.old_tone, d.new_tone
            );
        }
    }
    out
}

/// Inverse of [`format_traces`]; the image dimensions must be supplied.
pub fn parse_traces(text: &str, width: usize, height: usize) -> Result<Vec<DecisionTrace>> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::Usage("trace header missing".into()));
    }
    let mut traces: Vec<DecisionTrace> = Vec::new();
    for (n, line) in lines.enumerate() {
        let bad = |what: &str| Error::Usage(format!("trace line {}: bad {what}", n + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad("field count"));
        }
        let pass: u32 = f[0].parse().map_err(|_| bad("pass"))?;
        let d = PixelDecision {
            x: f[1].parse().map_err(|_| bad("x"))?,
            y: f[2].parse().map_err(|_| bad("y"))?,
            outcome: f[3].parse().map_err(|_| bad("outcome"))?,
            r1: f[4].parse().map_err(|_| bad("r1"))?,
            r2: f[5].parse().map_err(|_| bad("r2"))?,
            attempts: f[6].parse().map_err(|_| bad("attempts"))?,
            old_tone: f[7].parse().map_err(|_| bad("old"))?,
            new_tone: f[8].parse().map_err(|_| bad("new"))?,
        };
        match traces.last_mut() {
            Some(t) if t.pass_index == pass => t.decisions.push(d),
            _ => traces.push(DecisionTrace { pass_index: pass, width, height, decisions: vec![d] }),
        }
    }
    Ok(traces)
}

/// Decides, and possibly rewrites, the single pixel at `(x, y)`.
pub fn process_pixel(
    image: &mut GrayImage,
    x: usize,
    y: usize,
    params: &RenderParams,
    rng: &mut RandomSource,
) -> Result<PixelDecision> {
    stats::local_stats(image, x, y)?;
    Ok(decide(image, x, y, params, rng))
}

fn decide(
    image: &mut GrayImage,
    x: usize,
    y: usize,
    params: &RenderParams,
    rng: &mut RandomSource,
) -> PixelDecision {
    let s = stats::neighborhood(image, x, y);
    let g = image.get(x, y);
    let r1 = ratio_r1_with_floor(f64::from(g), s.mean, params.mean_floor);
    let r2 = ratio_r2_with_floor(&s, params.mean_floor);
    let mut d = PixelDecision {
        x,
        y,
        outcome: Outcome::KeptR1,
        r1,
        r2,
        attempts: 0,
        old_tone: g,
        new_tone: g,
    };
    if r2 > params.v_thresh {
        d.outcome = Outcome::ProtectedR2;
        return d;
    }
    if r1 <= params.t {
        return d;
    }
    let interval = params.table.classify(g);
    for attempt in 1..=params.max_attempts {
        let candidate = params.table.sample_candidate(interval, rng);
        if ratio_r1_with_floor(f64::from(candidate), s.mean, params.mean_floor) <= params.t {
            image.set(x, y, candidate);
            d.outcome = Outcome::Replaced;
            d.attempts = attempt;
            d.new_tone = candidate;
            return d;
        }
    }
    d.outcome = Outcome::Exhausted;
    d.attempts = params.max_attempts;
    d
}

/// One row-major scan from the upper-left corner, mutating `image` in place.
pub fn render_pass(
    image: &mut GrayImage,
    params: &RenderParams,
    rng: &mut RandomSource,
    pass_index: u32,
) -> Result<DecisionTrace> {
    stats::check_supported(image)?;
    let (width, height) = image.dimensions();
    let mut decisions = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            decisions.push(decide(image, x, y, params, rng));
        }
    }
    Ok(DecisionTrace { pass_index, width, height, decisions })
}

/// Applies `params.passes` scans to a copy of `image` with one random stream
/// seeded from `params.seed`.
pub fn render(image: &GrayImage, params: &RenderParams) -> Result<(GrayImage, Vec<DecisionTrace>)> {
    params.validate()?;
    let mut out = image.clone();
    if params.passes == 0 {
        return Ok((out, Vec::new()));
    }
    let mut rng = RandomSource::new(params.seed);
    let traces = (0..params.passes)
        .map(|pass| render_pass(&mut out, params, &mut rng, pass))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, traces))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surrounded(center: u8, around: u8) -> GrayImage {
        GrayImage::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { center } else { around }).unwrap()
    }

    #[test]
    fn uniform_neighborhood_is_kept() {
        let mut img = surrounded(50, 50);
        let mut rng = RandomSource::new(1);
        let d = process_pixel(&mut img, 1, 1, &RenderParams::default(), &mut rng).unwrap();
        assert_eq!(d.outcome, Outcome::KeptR1);
        assert_eq!((d.r1, d.r2, d.attempts), (0.0, 0.0, 0));
        assert_eq!(img, surrounded(50, 50));
    }

    #[test]
    fn dispersed_neighborhood_is_protected() {
        // Seven zeros and one 80: mean 10, variance 700.
        let mut img = GrayImage::from_raw(3, 3, vec![80, 0, 0, 0, 200, 0, 0, 0, 0]).unwrap();
        let before = img.clone();
        let mut rng = RandomSource::new(1);
        let d = process_pixel(&mut img, 1, 1, &RenderParams::default(), &mut rng).unwrap();
        assert_eq!(d.outcome, Outcome::ProtectedR2);
        assert_eq!(d.r2, 87.5f64.sqrt() / 10.0);
        assert_eq!(img, before);
    }

    #[test]
    fn unreachable_band_exhausts() {
        let mut img = surrounded(255, 50);
        let mut rng = RandomSource::new(9);
        let params = RenderParams::default();
        let d = process_pixel(&mut img, 1, 1, &params, &mut rng).unwrap();
        assert_eq!(d.outcome, Outcome::Exhausted);
        assert_eq!(d.attempts, params.max_attempts);
        assert!((d.r1 - 4.1).abs() < 1e-12);
        assert_eq!(d.r2, 0.0);
        assert_eq!(img, surrounded(255, 50));
    }

    #[test]
    fn reachable_band_replaces() {
        // Mean 50, tone 80 is in [10, 92) whose targets cover the band [44, 56].
        let mut img = surrounded(80, 50);
        let mut rng = RandomSource::new(3);
        let d = process_pixel(&mut img, 1, 1, &RenderParams::default(), &mut rng).unwrap();
        assert_eq!(d.outcome, Outcome::Replaced);
        assert!((44..=56).contains(&d.new_tone), "{}", d.new_tone);
        assert_eq!(img.get(1, 1), d.new_tone);
        assert!(d.attempts >= 1);
    }

    #[test]
    fn center_255_construction_replaces_edge_midpoints() {
        // (0, 0) sees {50, 50, 255}: mean 118.3, band above interval 0, exhausted.
        // (1, 0) sees {50, 50, 50, 255, 50}: mean 91, band [80.08, 101.92]
        // overlaps interval [10, 92], so it is replaced.
        let img = surrounded(255, 50);
        let (out, traces) = render(&img, &RenderParams::default()).unwrap();
        let trace = &traces[0];
        assert_eq!(trace.get(0, 0).outcome, Outcome::Exhausted);
        let mid = trace.get(1, 0);
        assert_eq!(mid.outcome, Outcome::Replaced);
        assert!((81..=92).contains(&mid.new_tone), "{}", mid.new_tone);
        assert_eq!(out.get(1, 1), 255);
        assert_eq!(trace.count(Outcome::ProtectedR2), 0);
        assert_ne!(out, img);
    }

    #[test]
    fn scan_is_row_major() {
        let img = GrayImage::from_fn(5, 3, |x, y| (40 + x * 3 + y * 11) as u8).unwrap();
        let (_, traces) = render(&img, &RenderParams::default()).unwrap();
        let coords: Vec<_> = traces[0].decisions.iter().map(|d| (d.x, d.y)).collect();
        let expected: Vec<_> = (0..3).flat_map(|y| (0..5).map(move |x| (x, y))).collect();
        assert_eq!(coords, expected);
    }

    #[test]
    fn zero_passes_is_identity() {
        let img = GrayImage::from_fn(6, 6, |x, y| (x * 40 + y) as u8).unwrap();
        let params = RenderParams { passes: 0, ..Default::default() };
        let (out, traces) = render(&img, &params).unwrap();
        assert_eq!(out, img);
        assert!(traces.is_empty());
    }

    #[test]
    fn one_pass_matches_render_pass() {
        let img = GrayImage::from_fn(12, 9, |x, y| ((x * 37 + y * 101) % 256) as u8).unwrap();
        let params = RenderParams { seed: 77, ..Default::default() };
        let (out, traces) = render(&img, &params).unwrap();
        let mut manual = img.clone();
        let trace = render_pass(&mut manual, &params, &mut RandomSource::new(77), 0).unwrap();
        assert_eq!(out, manual);
        assert_eq!(traces, vec![trace]);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let thin = GrayImage::filled(1, 4, 10).unwrap();
        assert!(matches!(
            render(&thin, &RenderParams::default()),
            Err(Error::UnsupportedImage { .. })
        ));
        let img = GrayImage::filled(3, 3, 10).unwrap();
        for bad in [
            RenderParams { t: 0.0, ..Default::default() },
            RenderParams { v_thresh: -1.0, ..Default::default() },
            RenderParams { max_attempts: 0, ..Default::default() },
            RenderParams { t: f64::NAN, ..Default::default() },
        ] {
            assert!(matches!(render(&img, &bad), Err(Error::Usage(_))));
        }
        let mut img = img;
        let mut rng = RandomSource::new(0);
        assert!(process_pixel(&mut img, 3, 0, &RenderParams::default(), &mut rng).is_err());
    }

    #[test]
    fn trace_text_roundtrip() {
        let img = GrayImage::from_fn(7, 5, |x, y| ((x * 53 + y * 29) % 256) as u8).unwrap();
        let params = RenderParams { passes: 2, seed: 5, ..Default::default() };
        let (_, traces) = render(&img, &params).unwrap();
        let text = format_traces(&traces);
        assert!(text.starts_with("pass,x,y,outcome,r1,r2,attempts,old,new\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 35);
        assert_eq!(parse_traces(&text, 7, 5).unwrap(), traces);
    }

    #[test]
    fn trace_line_format() {
        let trace = DecisionTrace {
            pass_index: 3,
            width: 1,
            height: 1,
            decisions: vec![PixelDecision {
                x: 0,
                y: 0,
                outcome: Outcome::Replaced,
                r1: 0.5,
                r2: 0.1,
                attempts: 2,
                old_tone: 75,
                new_tone: 52,
            }],
        };
        assert_eq!(format_traces([&trace]), format!("{TRACE_HEADER}\n3,0,0,replaced,0.5,0.1,2,75,52\n"));
    }
}
