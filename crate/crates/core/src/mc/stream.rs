//! Binary persistence of sample streams: a 32-byte header (8-byte magic, then
//! `n`, `N` and the configuration count as little-endian `u64`) followed by
//! `count · n · N` little-endian `f64` values, vertex-major per configuration.

use std::io::{Read, Write};

use super::{SampleSource, SpinConfiguration};
use crate::error::{Error, Result};

pub const STREAM_MAGIC: [u8; 8] = *b"SPNSMPL1";

/// Configurations held in memory and replayed in order.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedSamples {
    n: usize,
    spin_dim: usize,
    samples: Vec<SpinConfiguration>,
    cursor: usize,
}

impl RecordedSamples {
    pub fn new(n: usize, spin_dim: usize, samples: Vec<SpinConfiguration>) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|s| s.n() != n || s.spin_dim() != spin_dim) {
            return Err(Error::DimensionMismatch { expected: n * spin_dim, got: bad.n() * bad.spin_dim() });
        }
        Ok(RecordedSamples { n, spin_dim, samples, cursor: 0 })
    }

    /// Drains `source` into memory.
    pub fn record<S: SampleSource + ?Sized>(source: &mut S) -> Self {
        let (n, spin_dim) = (source.n(), source.spin_dim());
        let mut samples = Vec::with_capacity(source.remaining());
        while let Some(s) = source.next_sample() {
            samples.push(s.clone());
        }
        RecordedSamples { n, spin_dim, samples, cursor: 0 }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[SpinConfiguration] {
        &self.samples
    }

    /// Restarts replay from the first configuration.
    pub fn rewind(&mut self) {
        self.cursor = 0;
    }
}

impl SampleSource for RecordedSamples {
    fn n(&self) -> usize {
        self.n
    }

    fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    fn remaining(&self) -> usize {
        self.samples.len() - self.cursor
    }

    fn next_sample(&mut self) -> Option<&SpinConfiguration> {
        let s = self.samples.get(self.cursor)?;
        self.cursor += 1;
        Some(s)
    }
}

/// Writes every remaining configuration of `source`; returns the count.
pub fn write_samples<S, W>(source: &mut S, mut out: W) -> Result<usize>
where
    S: SampleSource + ?Sized,
    W: Write,
{
    let count = source.remaining();
    out.write_all(&STREAM_MAGIC)?;
    for field in [source.n(), source.spin_dim(), count] {
        out.write_all(&(field as u64).to_le_bytes())?;
    }
    let mut written = 0;
    while let Some(s) = source.next_sample() {
        for x in s.as_slice() {
            out.write_all(&x.to_le_bytes())?;
        }
        written += 1;
    }
    debug_assert_eq!(written, count);
    out.flush()?;
    Ok(written)
}

pub fn read_samples<R: Read>(mut input: R) -> Result<RecordedSamples> {
    let mut header = [0u8; 32];
    input.read_exact(&mut header).map_err(|e| Error::Parse(format!("sample stream header: {e}")))?;
    if header[..8] != STREAM_MAGIC {
        return Err(Error::Parse("not a spin sample stream (bad magic)".into()));
    }
    let field = |k: usize| {
        let bytes: [u8; 8] = header[8 + 8 * k..16 + 8 * k].try_into().expect("8-byte slice");
        usize::try_from(u64::from_le_bytes(bytes)).map_err(|_| Error::Parse("header field overflows".into()))
    };
    let (n, spin_dim, count) = (field(0)?, field(1)?, field(2)?);
    if n == 0 || spin_dim == 0 {
        return Err(Error::Parse(format!("invalid stream dimensions n = {n}, N = {spin_dim}")));
    }
    let width = n * spin_dim;
    let mut buf = vec![0u8; width * 8];
    let mut samples = Vec::with_capacity(count.min(1 << 20));
    for k in 0..count {
        input.read_exact(&mut buf).map_err(|e| Error::Parse(format!("sample {k} of {count}: {e}")))?;
        let data = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        samples.push(SpinConfiguration::from_vec(n, spin_dim, data)?);
    }
    RecordedSamples::new(n, spin_dim, samples)
}
