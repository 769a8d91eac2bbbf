//! On-disk formats: the line-delimited observation log, the ground-truth
//! sidecar and the LED map file.

use std::io::{BufRead, Write};

use lumen_core::{
    CameraIntrinsics, FixedTransform2D, GroundTruthLed, LedKey, LedMapEntry, Observation,
    PixelPoint, PlanarPose, SensorRecord,
};
use serde::{Deserialize, Serialize};

use crate::config::{EstimatorFile, IntrinsicsFile, TransformFile};
use crate::error::FormatError;

pub const LOG_SCHEMA: &str = "lumen-log";
pub const LOG_VERSION: u32 = 1;
pub const MAP_SCHEMA: &str = "lumen-map";
pub const MAP_VERSION: u32 = 1;

/// Wire form of one log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationRecord {
    pub t: f64,
    pub led: String,
    pub u: f64,
    pub v: f64,
    pub yaw: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl ObservationRecord {
    fn validate(&self) -> Result<(), String> {
        let fields = [
            ("t", self.t),
            ("u", self.u),
            ("v", self.v),
            ("yaw", self.yaw),
            ("x", self.x),
            ("y", self.y),
            ("theta", self.theta),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(format!("field `{name}` is not finite"));
            }
        }
        if self.led.is_empty() {
            return Err("field `led` is empty".into());
        }
        Ok(())
    }

    pub fn to_sensor_record(&self) -> Result<SensorRecord, String> {
        self.validate()?;
        Ok(SensorRecord {
            timestamp: self.t,
            led_key: LedKey::new(self.led.clone()),
            pixel: PixelPoint::new(self.u, self.v).map_err(|e| e.to_string())?,
            yaw: self.yaw,
            cam1_pose: PlanarPose::new(self.x, self.y, self.theta).map_err(|e| e.to_string())?,
        })
    }
}

impl From<&SensorRecord> for ObservationRecord {
    fn from(r: &SensorRecord) -> Self {
        Self {
            t: r.timestamp,
            led: r.led_key.as_str().to_owned(),
            u: r.pixel.u,
            v: r.pixel.v,
            yaw: r.yaw,
            x: r.cam1_pose.x(),
            y: r.cam1_pose.y(),
            theta: r.cam1_pose.theta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LogHeader {
    schema: String,
    version: u32,
}

/// Writes the schema header followed by one JSON object per line.
pub fn write_log<W: Write>(mut out: W, records: &[ObservationRecord]) -> Result<(), FormatError> {
    let header = LogHeader {
        schema: LOG_SCHEMA.into(),
        version: LOG_VERSION,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Abort on the first malformed line.
    #[default]
    Strict,
    /// Skip malformed lines and report them.
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedRecords {
    pub records: Vec<ObservationRecord>,
    /// 1-based source line of each entry in `records`.
    pub lines: Vec<usize>,
    pub skipped: Vec<LineIssue>,
    pub warnings: Vec<LineIssue>,
}

/// Reads and validates log records. The schema header line is optional.
pub fn read_records<R: BufRead>(input: R, mode: ParseMode) -> Result<ParsedRecords, FormatError> {
    let mut out = ParsedRecords::default();
    let mut last_t: Option<f64> = None;
    let mut seen_content = false;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !seen_content {
            seen_content = true;
            if let Ok(header) = serde_json::from_str::<LogHeader>(trimmed) {
                if header.schema != LOG_SCHEMA || header.version != LOG_VERSION {
                    return Err(FormatError::UnsupportedSchema {
                        schema: header.schema,
                        version: header.version,
                    });
                }
                continue;
            }
        }
        let parsed = serde_json::from_str::<ObservationRecord>(trimmed)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r));
        match parsed {
            Ok(record) => {
                if let Some(prev) = last_t {
                    if record.t < prev {
                        log::warn!("line {line_no}: timestamp {} precedes {prev}", record.t);
                        out.warnings.push(LineIssue {
                            line: line_no,
                            message: format!("timestamp {} precedes {prev}", record.t),
                        });
                    }
                }
                last_t = Some(record.t);
                out.records.push(record);
                out.lines.push(line_no);
            }
            Err(message) => match mode {
                ParseMode::Strict => return Err(FormatError::Line { line: line_no, message }),
                ParseMode::Lenient => {
                    log::warn!("line {line_no}: skipped: {message}");
                    out.skipped.push(LineIssue { line: line_no, message });
                }
            },
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedLog {
    pub observations: Vec<Observation>,
    pub skipped: Vec<LineIssue>,
    pub warnings: Vec<LineIssue>,
}

/// Reads a log and fuses every record into an [`Observation`].
pub fn parse_log<R: BufRead>(
    input: R,
    mode: ParseMode,
    intrinsics: &CameraIntrinsics,
    cam1_to_cam2: &FixedTransform2D,
) -> Result<ParsedLog, FormatError> {
    let parsed = read_records(input, mode)?;
    let mut observations = Vec::with_capacity(parsed.records.len());
    for (r, &line) in parsed.records.iter().zip(&parsed.lines) {
        let sensor = r.to_sensor_record().map_err(|message| FormatError::Line { line, message })?;
        let obs = sensor
            .to_observation(intrinsics, cam1_to_cam2)
            .map_err(|e| FormatError::Line {
                line,
                message: e.to_string(),
            })?;
        observations.push(obs);
    }
    Ok(ParsedLog {
        observations,
        skipped: parsed.skipped,
        warnings: parsed.warnings,
    })
}

/// One ground-truth LED in the sidecar file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthLed {
    pub led: String,
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl From<&GroundTruthLed> for TruthLed {
    fn from(g: &GroundTruthLed) -> Self {
        Self {
            led: g.key.as_str().to_owned(),
            x: g.x,
            y: g.y,
            h: g.height,
        }
    }
}

impl From<&TruthLed> for GroundTruthLed {
    fn from(t: &TruthLed) -> Self {
        GroundTruthLed::new(t.led.as_str(), t.x, t.y, t.h)
    }
}

pub fn write_truth<W: Write>(mut out: W, leds: &[TruthLed]) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(&mut out, leds)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_truth<R: std::io::Read>(input: R) -> Result<Vec<TruthLed>, FormatError> {
    Ok(serde_json::from_reader(input)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapHeader {
    pub schema: String,
    pub version: u32,
    pub tool_version: String,
    pub intrinsics: IntrinsicsFile,
    pub cam_height_h1: f64,
    pub cam1_to_cam2: TransformFile,
    pub config: EstimatorFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapLed {
    pub led: String,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub n: usize,
    pub rms: f64,
}

impl From<&LedMapEntry> for MapLed {
    fn from(e: &LedMapEntry) -> Self {
        Self {
            led: e.led_key.as_str().to_owned(),
            x: e.x_hat,
            y: e.y_hat,
            h: e.height,
            n: e.n_observations,
            rms: e.rms_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub header: MapHeader,
    pub leds: Vec<MapLed>,
}

impl MapFile {
    pub fn new(config: &crate::config::EstimatorSettings, entries: &[LedMapEntry]) -> Self {
        Self {
            header: MapHeader {
                schema: MAP_SCHEMA.into(),
                version: MAP_VERSION,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                intrinsics: config.intrinsics.clone(),
                cam_height_h1: config.cam_height_h1,
                cam1_to_cam2: config.cam1_to_cam2.clone(),
                config: config.estimator.clone(),
            },
            leds: entries.iter().map(MapLed::from).collect(),
        }
    }
}

pub fn write_map<W: Write>(mut out: W, map: &MapFile) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(&mut out, map)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_map<R: std::io::Read>(input: R) -> Result<MapFile, FormatError> {
    let map: MapFile = serde_json::from_reader(input)?;
    if map.header.schema != MAP_SCHEMA || map.header.version != MAP_VERSION {
        return Err(FormatError::UnsupportedSchema {
            schema: map.header.schema,
            version: map.header.version,
        });
    }
    Ok(map)
}

/// Writes `bytes` to `path` through a temp file in the same directory and a rename.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => std::path::Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
