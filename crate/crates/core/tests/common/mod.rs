//! Test-only oracles, independent of the library's scan and statistics code.
#![allow(dead_code)]

use labyrinth::render::{DecisionTrace, Outcome, RenderParams};
use labyrinth::{GrayImage, RandomSource};

/// Brute-force 3×3 window statistics (center excluded, out-of-bounds skipped).
pub fn brute_stats(px: &[u8], w: usize, h: usize, x: usize, y: usize) -> (f64, f64, u32) {
    let mut vals = Vec::with_capacity(8);
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            vals.push(f64::from(px[ny as usize * w + nx as usize]));
        }
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
    (mean, var, vals.len() as u32)
}

pub fn random_image(rng: &mut RandomSource, w: usize, h: usize) -> GrayImage {
    let px = (0..w * h).map(|_| (rng.next_u64() >> 56) as u8).collect();
    GrayImage::from_raw(w, h, px).unwrap()
}

/// Blocky image with noise, closer to photographic content than white noise.
pub fn textured_image(rng: &mut RandomSource, w: usize, h: usize) -> GrayImage {
    let block = 4 + (rng.next_u64() % 8) as usize;
    let bw = w.div_ceil(block);
    let bases: Vec<u8> =
        (0..bw * h.div_ceil(block)).map(|_| (rng.next_u64() >> 56) as u8).collect();
    let mut px = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let base = i32::from(bases[(y / block) * bw + x / block]);
            let noise = (rng.next_u64() % 41) as i32 - 20;
            px.push((base + noise).clamp(0, 255) as u8);
        }
    }
    GrayImage::from_raw(w, h, px).unwrap()
}

/// Checks every decision of `traces` against a from-scratch reconstruction of
/// the scan starting at `input`. Returns violation descriptions.
pub fn replay(input: &GrayImage, output: &GrayImage, params: &RenderParams, traces: &[DecisionTrace]) -> Vec<String> {
    let (w, h) = input.dimensions();
    let mut state = input.pixels().to_vec();
    let mut bad = Vec::new();
    let floor = params.mean_floor;
    for trace in traces {
        if trace.decisions.len() != w * h {
            bad.push(format!("pass {}: {} decisions", trace.pass_index, trace.decisions.len()));
            continue;
        }
        for (i, d) in trace.decisions.iter().enumerate() {
            let ctx = format!("pass {} ({}, {})", trace.pass_index, d.x, d.y);
            if (d.x, d.y) != (i % w, i / w) {
                bad.push(format!("{ctx}: out of row-major order at {i}"));
                continue;
            }
            let g = state[i];
            if d.old_tone != g {
                bad.push(format!("{ctx}: old tone {} but state has {g}", d.old_tone));
            }
            let (mean, var, n) = brute_stats(&state, w, h, d.x, d.y);
            let den = mean.max(floor);
            let r1 = (f64::from(g) - mean).abs() / den;
            let r2 = (var / f64::from(n)).sqrt() / den;
            if (r1 - d.r1).abs() > 1e-12 || (r2 - d.r2).abs() > 1e-12 {
                bad.push(format!("{ctx}: ratios ({}, {}) vs recomputed ({r1}, {r2})", d.r1, d.r2));
            }
            if d.attempts > params.max_attempts {
                bad.push(format!("{ctx}: {} attempts", d.attempts));
            }
            match d.outcome {
                Outcome::ProtectedR2 => {
                    if !(r2 > params.v_thresh) {
                        bad.push(format!("{ctx}: protected with r2 {r2}"));
                    }
                }
                Outcome::KeptR1 => {
                    if !(r2 <= params.v_thresh && r1 <= params.t) {
                        bad.push(format!("{ctx}: kept with r1 {r1} r2 {r2}"));
                    }
                }
                Outcome::Replaced => {
                    let idx = params.table.classify(g);
                    let iv = params.table.intervals()[idx];
                    if !iv.target_contains(d.new_tone) {
                        bad.push(format!("{ctx}: {} outside target of interval {idx}", d.new_tone));
                    }
                    if (f64::from(d.new_tone) - mean).abs() / den > params.t {
                        bad.push(format!("{ctx}: {} outside t band of {mean}", d.new_tone));
                    }
                    if !(r2 <= params.v_thresh && r1 > params.t) || d.attempts == 0 {
                        bad.push(format!("{ctx}: replaced but gate/keep should have fired"));
                    }
                }
                Outcome::Exhausted => {
                    if d.attempts != params.max_attempts {
                        bad.push(format!("{ctx}: exhausted after {} attempts", d.attempts));
                    }
                }
            }
            if d.outcome != Outcome::Replaced && d.new_tone != d.old_tone {
                bad.push(format!("{ctx}: {:?} changed the tone", d.outcome));
            }
            state[i] = d.new_tone;
        }
    }
    if state != output.pixels() {
        bad.push("replayed state differs from output image".into());
    }
    bad
}
