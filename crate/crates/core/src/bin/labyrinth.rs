//! Command-line front end for the labyrinth filter.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 input format error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use labyrinth::analysis::{
    change_mask, mask_distance, parse_edge_set, run_sweep, tone_boundaries, RenderMetrics, SweepSpec,
};
use labyrinth::imageio;
use labyrinth::render::{format_traces, render, DecisionTrace, RenderParams};
use labyrinth::tone::ToneIntervalTable;
use labyrinth::{Error, GrayImage};

#[derive(Debug, Parser)]
#[command(name = "labyrinth", version, about = "Labyrinthine-tiling stylization of gray images")]
struct Args {
    /// Input image (.pgm or .png; colour PNGs are converted to gray)
    #[arg(long)]
    input: PathBuf,

    /// Output image (.pgm or .png)
    #[arg(long)]
    output: PathBuf,

    /// Relative band around the local mean within which a tone is kept
    #[arg(long, default_value_t = 0.12)]
    t: f64,

    /// Dispersion ratio above which a pixel is protected from replacement
    #[arg(long = "v-threshold", default_value_t = 0.50)]
    v_threshold: f64,

    #[arg(long, default_value_t = 1)]
    passes: u32,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Candidate draws per pixel before giving up
    #[arg(long = "max-attempts", default_value_t = 100)]
    max_attempts: u32,

    /// Floor for the local mean when used as a denominator
    #[arg(long = "mean-floor", default_value_t = labyrinth::stats::DEFAULT_MEAN_FLOOR)]
    mean_floor: f64,

    /// Tone interval table (TOML); defaults to the built-in three-interval table
    #[arg(long)]
    intervals: Option<PathBuf>,

    /// Write the per-pixel decision trace (CSV)
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Render once per value, e.g. `v_thresh=0.47,0.5,0.53`
    #[arg(long)]
    sweep: Option<String>,

    /// Write change counts, outcome counts and effective config (JSON)
    #[arg(long)]
    metrics: Option<PathBuf>,

    /// Edge pixels for edge concentration: a file of `x,y` lines, or `auto`
    /// for the tone boundaries of the input
    #[arg(long = "edge-set")]
    edge_set: Option<String>,

    /// Chebyshev radius around the edge set
    #[arg(long = "edge-radius", default_value_t = 1)]
    edge_radius: usize,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Usage(_) => 2,
        Error::Io(_) => 1,
        Error::UnsupportedImage { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidImage(_)
        | Error::Pgm(_)
        | Error::Png(_)
        | Error::InvalidTable(_) => 3,
    }
}

/// `out.pgm` + `v_thresh` + 0.47 → `out_v_thresh-0.47.pgm`
fn suffixed(path: &Path, param: &str, value: f64) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{param}-{value}.{ext}"),
        None => format!("{stem}_{param}-{value}"),
    };
    path.with_file_name(name)
}

fn write_json(path: &Path, value: &serde_json::Value) -> labyrinth::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("metrics serialize");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_outputs(
    output: &Path,
    trace_path: Option<&Path>,
    image: &GrayImage,
    traces: &[DecisionTrace],
) -> labyrinth::Result<()> {
    imageio::save(output, image)?;
    if let Some(path) = trace_path {
        fs::write(path, format_traces(traces))?;
    }
    Ok(())
}

fn run(args: &Args) -> labyrinth::Result<()> {
    // Validate the output codec before doing any work.
    imageio::Codec::from_path(&args.output)?;
    let table = match &args.intervals {
        Some(path) => ToneIntervalTable::load(path)?,
        None => ToneIntervalTable::default_table(),
    };
    let params = RenderParams {
        t: args.t,
        v_thresh: args.v_threshold,
        max_attempts: args.max_attempts,
        passes: args.passes,
        seed: args.seed,
        mean_floor: args.mean_floor,
        table,
    };
    params.validate()?;
    let sweep = args.sweep.as_deref().map(|s| SweepSpec::parse(s, params.clone())).transpose()?;
    let input = imageio::load(&args.input)?;
    let edges = match args.edge_set.as_deref() {
        None => None,
        Some("auto") => Some(tone_boundaries(&input)),
        Some(path) => Some(parse_edge_set(&fs::read_to_string(path)?)?),
    };
    if edges.as_ref().is_some_and(Vec::is_empty) {
        return Err(Error::Usage("edge set is empty".into()));
    }
    let edge_arg = edges.as_deref().map(|e| (e, args.edge_radius));

    let Some(spec) = sweep else {
        let (out, traces) = render(&input, &params)?;
        write_outputs(&args.output, args.trace.as_deref(), &out, &traces)?;
        if let Some(path) = &args.metrics {
            let m = RenderMetrics::collect(&params, &input, &out, &traces, edge_arg)?;
            write_json(path, &serde_json::to_value(m).expect("metrics serialize"))?;
        }
        return Ok(());
    };

    let cells = run_sweep(&input, &spec)?;
    let mut cell_reports = Vec::with_capacity(cells.len());
    let mut masks = Vec::with_capacity(cells.len());
    for cell in &cells {
        let out_path = suffixed(&args.output, spec.param.name(), cell.value);
        let trace_path = args.trace.as_deref().map(|p| suffixed(p, spec.param.name(), cell.value));
        write_outputs(&out_path, trace_path.as_deref(), &cell.image, &cell.traces)?;
        let cell_params = spec.params_for(cell.value);
        let m = RenderMetrics::collect(&cell_params, &input, &cell.image, &cell.traces, edge_arg)?;
        cell_reports.push(json!({
            "value": cell.value,
            "output": out_path.display().to_string(),
            "metrics": m,
        }));
        masks.push(change_mask(&input, &cell.image)?);
    }
    if let Some(path) = &args.metrics {
        let distances = masks
            .iter()
            .map(|a| masks.iter().map(|b| mask_distance(a, b)).collect::<labyrinth::Result<Vec<_>>>())
            .collect::<labyrinth::Result<Vec<_>>>()?;
        write_json(
            path,
            &json!({
                "sweep": {
                    "param": spec.param.name(),
                    "values": spec.values,
                    "cells": cell_reports,
                    "mask_distance": distances,
                }
            }),
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("labyrinth: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
