//! Framed binary log of a run.
//!
//! Layout: the 8-byte magic `PLAUSREC`, a little-endian `u32` schema
//! version, then frames of a little-endian `u32` payload length followed by
//! the payload. The first frame is the [`RecordingHeader`], every further
//! frame one [`StepRecord`].

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::RecordingError;
use crate::model::SensorMeta;
use crate::simulation::{AnalysisSpec, ScenarioConfig, StepRecord};

pub const RECORDING_MAGIC: &[u8; 8] = b"PLAUSREC";
pub const RECORDING_VERSION: u32 = 1;
/// Upper bound on a single frame, guards against reading garbage lengths.
const MAX_FRAME: u32 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingHeader {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub sample_period: f64,
    /// Nominal sensor metadata as used by the fusion centre.
    pub sensors: Vec<SensorMeta>,
    pub analysis: AnalysisSpec,
    /// Label of the injected fault, if any.
    pub fault: Option<String>,
    /// Configuration text the run was started from.
    pub config: String,
}

impl RecordingHeader {
    pub fn for_config(config: &ScenarioConfig) -> Self {
        Self {
            schema_version: RECORDING_VERSION,
            scenario: config.name.clone(),
            seed: config.seed,
            sample_period: config.sample_period,
            sensors: config.sensor_metas(),
            analysis: config.analysis.clone(),
            fault: config.fault.as_ref().map(|f| f.label().to_string()),
            config: config.source.clone(),
        }
    }
}

fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<(), RecordingError> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|l| *l <= MAX_FRAME)
        .ok_or_else(|| RecordingError::Corrupt("frame too large".into()))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(payload)?;
    Ok(())
}

/// `None` at a clean end of stream.
fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, RecordingError> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_le_bytes(len);
    if len > MAX_FRAME {
        return Err(RecordingError::Corrupt(format!(
            "frame length {len} out of range"
        )));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)
        .map_err(|_| RecordingError::Corrupt("truncated frame".into()))?;
    Ok(Some(buf))
}

/// Streams step records to a sink.
pub struct RecordingWriter<W: Write> {
    inner: W,
}

impl<W: Write> RecordingWriter<W> {
    pub fn new(mut inner: W, header: &RecordingHeader) -> Result<Self, RecordingError> {
        inner.write_all(RECORDING_MAGIC)?;
        inner.write_all(&RECORDING_VERSION.to_le_bytes())?;
        write_frame(&mut inner, &bincode::serialize(header)?)?;
        Ok(Self { inner })
    }

    pub fn write_step(&mut self, step: &StepRecord) -> Result<(), RecordingError> {
        write_frame(&mut self.inner, &bincode::serialize(step)?)
    }

    pub fn finish(mut self) -> Result<W, RecordingError> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Reads a recording frame by frame.
pub struct RecordingReader<R: Read> {
    inner: R,
    header: RecordingHeader,
}

impl<R: Read> RecordingReader<R> {
    pub fn new(mut inner: R) -> Result<Self, RecordingError> {
        let mut magic = [0u8; 8];
        inner
            .read_exact(&mut magic)
            .map_err(|_| RecordingError::BadMagic)?;
        if &magic != RECORDING_MAGIC {
            return Err(RecordingError::BadMagic);
        }
        let mut version = [0u8; 4];
        inner
            .read_exact(&mut version)
            .map_err(|_| RecordingError::MissingHeader)?;
        let version = u32::from_le_bytes(version);
        if version != RECORDING_VERSION {
            return Err(RecordingError::Version {
                found: version,
                expected: RECORDING_VERSION,
            });
        }
        let frame = read_frame(&mut inner)?.ok_or(RecordingError::MissingHeader)?;
        let header: RecordingHeader = bincode::deserialize(&frame)?;
        if header.schema_version != RECORDING_VERSION {
            return Err(RecordingError::Version {
                found: header.schema_version,
                expected: RECORDING_VERSION,
            });
        }
        Ok(Self { inner, header })
    }

    pub fn header(&self) -> &RecordingHeader {
        &self.header
    }
}

impl<R: Read> Iterator for RecordingReader<R> {
    type Item = Result<StepRecord, RecordingError>;

    fn next(&mut self) -> Option<Self::Item> {
        match read_frame(&mut self.inner) {
            Ok(Some(frame)) => Some(bincode::deserialize(&frame).map_err(Into::into)),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

/// Fully loaded recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub header: RecordingHeader,
    pub steps: Vec<StepRecord>,
}

impl Recording {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, RecordingError> {
        let file = File::open(path)?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, RecordingError> {
        let reader = RecordingReader::new(reader)?;
        let header = reader.header().clone();
        let steps = reader.collect::<Result<Vec<_>, _>>()?;
        Ok(Self { header, steps })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, RecordingError> {
        let mut w = RecordingWriter::new(Vec::new(), &self.header)?;
        for s in &self.steps {
            w.write_step(s)?;
        }
        w.finish()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), RecordingError> {
        let file = File::create(path)?;
        let mut w = RecordingWriter::new(BufWriter::new(file), &self.header)?;
        for s in &self.steps {
            w.write_step(s)?;
        }
        w.finish()?;
        Ok(())
    }
}
