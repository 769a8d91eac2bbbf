//! Map-versus-truth error statistics and the CDF table.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, FormatError};
use crate::formats::{MapFile, TruthLed};

pub const REPORT_PERCENTILES: [f64; 4] = [50.0, 90.0, 95.0, 100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedError {
    pub led: String,
    /// Planar distance between estimate and truth.
    pub planar_m: f64,
    /// Signed height error, estimate minus truth.
    pub height_m: f64,
    pub error_3d_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percentile {
    pub p: f64,
    pub error_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub error_m: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub leds: Vec<LedError>,
    pub mean_3d_m: f64,
    pub mean_planar_m: f64,
    pub mean_abs_height_m: f64,
    pub percentiles: Vec<Percentile>,
    pub cdf: Vec<CdfPoint>,
}

/// Nearest-rank percentile of `sorted` (ascending, non-empty).
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Empirical CDF with one point per sample: `(e_(i), i/n)`.
pub fn empirical_cdf(errors: &[f64]) -> Vec<CdfPoint> {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, error_m)| CdfPoint {
            error_m,
            cdf: (i + 1) as f64 / n,
        })
        .collect()
}

/// Aggregates a set of per-LED errors.
pub fn summarize(leds: Vec<LedError>) -> Result<EvaluationReport, EvalError> {
    if leds.is_empty() {
        return Err(EvalError::EmptyMap);
    }
    let n = leds.len() as f64;
    let errors: Vec<f64> = leds.iter().map(|e| e.error_3d_m).collect();
    let mut sorted = errors.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(EvaluationReport {
        mean_3d_m: errors.iter().sum::<f64>() / n,
        mean_planar_m: leds.iter().map(|e| e.planar_m).sum::<f64>() / n,
        mean_abs_height_m: leds.iter().map(|e| e.height_m.abs()).sum::<f64>() / n,
        percentiles: REPORT_PERCENTILES
            .iter()
            .map(|&p| Percentile {
                p,
                error_m: percentile(&sorted, p),
            })
            .collect(),
        cdf: empirical_cdf(&errors),
        leds,
    })
}

/// Per-LED planar, height and 3-D errors of `map` against `truth`.
pub fn led_errors(map: &MapFile, truth: &[TruthLed]) -> Result<Vec<LedError>, EvalError> {
    let by_key: HashMap<&str, &TruthLed> = truth.iter().map(|t| (t.led.as_str(), t)).collect();
    map.leds
        .iter()
        .map(|m| {
            let t = by_key
                .get(m.led.as_str())
                .ok_or_else(|| EvalError::MissingTruth(m.led.clone()))?;
            let planar_m = (m.x - t.x).hypot(m.y - t.y);
            let height_m = m.h - t.h;
            Ok(LedError {
                led: m.led.clone(),
                planar_m,
                height_m,
                error_3d_m: planar_m.hypot(height_m),
            })
        })
        .collect()
}

pub fn evaluate(map: &MapFile, truth: &[TruthLed]) -> Result<EvaluationReport, EvalError> {
    summarize(led_errors(map, truth)?)
}

/// Ground truth built from a map's own entries.
pub fn map_as_truth(map: &MapFile) -> Vec<TruthLed> {
    map.leds
        .iter()
        .map(|m| TruthLed {
            led: m.led.clone(),
            x: m.x,
            y: m.y,
            h: m.h,
        })
        .collect()
}

pub fn write_report<W: Write>(mut out: W, report: &EvaluationReport) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_report<R: std::io::Read>(input: R) -> Result<EvaluationReport, FormatError> {
    Ok(serde_json::from_reader(input)?)
}

/// Two-column CSV `error_m,cdf` in ascending order.
pub fn write_cdf_csv<W: Write>(mut out: W, cdf: &[CdfPoint]) -> std::io::Result<()> {
    writeln!(out, "error_m,cdf")?;
    for p in cdf {
        writeln!(out, "{},{}", p.error_m, p.cdf)?;
    }
    Ok(())
}
