//! Complexity metrics, tracer-token statistics and state-transition
//! detection.
//!
//! High-order entropy is the per-byte Shannon entropy minus the compressed
//! size per byte (in bits). It stays near zero for i.i.d. noise and
//! approaches the entropy of a single copy when the data is many copies of
//! one string.

use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("cannot measure an empty byte string")]
    Empty,
    #[error("compressor `{name}` failed: {source}")]
    Compressor {
        name: String,
        #[source]
        source: std::io::Error,
    },
    #[error("tracing is disabled for this run")]
    TracingDisabled,
    #[error("stats csv: {0}")]
    Csv(#[from] csv::Error),
}

/// A deterministic compressor used as a stand-in for Kolmogorov complexity.
pub trait Compressor: Send + Sync {
    /// Identifier written next to every measurement, e.g. `brotli-q2-w24`.
    fn id(&self) -> String;
    fn compressed_len(&self, data: &[u8]) -> std::io::Result<usize>;
}

/// Brotli at a fast quality setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Brotli {
    pub quality: u32,
    pub lgwin: u32,
}

impl Default for Brotli {
    fn default() -> Self {
        Brotli { quality: 2, lgwin: 24 }
    }
}

impl Compressor for Brotli {
    fn id(&self) -> String {
        format!("brotli-q{}-w{}", self.quality, self.lgwin)
    }

    fn compressed_len(&self, data: &[u8]) -> std::io::Result<usize> {
        let mut out = Vec::with_capacity(data.len() / 4 + 64);
        {
            let mut w = brotli::CompressorWriter::new(&mut out, 1 << 16, self.quality, self.lgwin);
            w.write_all(data)?;
            w.flush()?;
        }
        Ok(out.len())
    }
}

pub fn byte_histogram(bytes: &[u8]) -> [u64; 256] {
    let mut h = [0u64; 256];
    for &b in bytes {
        h[b as usize] += 1;
    }
    h
}

/// Shannon entropy of the byte distribution, in bits per byte.
pub fn shannon_entropy(bytes: &[u8]) -> Result<f64, AnalysisError> {
    if bytes.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let n = bytes.len() as f64;
    Ok(byte_histogram(bytes)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complexity {
    pub shannon_bits_per_byte: f64,
    pub compressed_size_bytes: usize,
    pub high_order_entropy: f64,
}

pub fn complexity(bytes: &[u8], compressor: &dyn Compressor) -> Result<Complexity, AnalysisError> {
    let shannon = shannon_entropy(bytes)?;
    let compressed = compressor
        .compressed_len(bytes)
        .map_err(|source| AnalysisError::Compressor { name: compressor.id(), source })?;
    Ok(Complexity {
        shannon_bits_per_byte: shannon,
        compressed_size_bytes: compressed,
        high_order_entropy: shannon - 8.0 * compressed as f64 / bytes.len() as f64,
    })
}

/// Shannon entropy minus compressed bits per byte. May be negative.
pub fn high_order_entropy(bytes: &[u8], compressor: &dyn Compressor) -> Result<f64, AnalysisError> {
    Ok(complexity(bytes, compressor)?.high_order_entropy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenStats {
    pub unique: u64,
    /// Combined multiplicity of the 32 most frequent tokens.
    pub top32: u64,
}

/// Distinct token count and top-32 mass. `None` means tracing was off.
pub fn token_stats(tokens: Option<&[u64]>) -> Result<TokenStats, AnalysisError> {
    let tokens = tokens.ok_or(AnalysisError::TracingDisabled)?;
    let mut sorted = tokens.to_vec();
    sorted.sort_unstable();
    let mut counts: Vec<u64> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        counts.push((j - i) as u64);
        i = j;
    }
    let unique = counts.len() as u64;
    let top32 = if counts.len() > 32 {
        let k = counts.len() - 32;
        counts.select_nth_unstable(k);
        counts[k..].iter().sum()
    } else {
        counts.iter().sum()
    };
    Ok(TokenStats { unique, top32 })
}

/// One analytics row. Token columns are empty when tracing is disabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: u64,
    pub shannon_bits_per_byte: f64,
    pub compressed_size_bytes: u64,
    pub high_order_entropy: f64,
    pub unique_token_count: Option<u64>,
    pub top32_token_count: Option<u64>,
    pub zero_byte_count: u64,
    pub mean_steps_executed: f64,
    pub compressor: String,
}

impl EpochStats {
    /// Measures a soup snapshot.
    pub fn measure(
        epoch: u64,
        bytes: &[u8],
        tokens: Option<&[u64]>,
        mean_steps_executed: f64,
        compressor: &dyn Compressor,
    ) -> Result<Self, AnalysisError> {
        let c = complexity(bytes, compressor)?;
        let tokens = match tokens {
            Some(t) => Some(token_stats(Some(t))?),
            None => None,
        };
        Ok(EpochStats {
            epoch,
            shannon_bits_per_byte: c.shannon_bits_per_byte,
            compressed_size_bytes: c.compressed_size_bytes as u64,
            high_order_entropy: c.high_order_entropy,
            unique_token_count: tokens.map(|t| t.unique),
            top32_token_count: tokens.map(|t| t.top32),
            zero_byte_count: bytes.iter().filter(|&&b| b == 0).count() as u64,
            mean_steps_executed,
            compressor: compressor.id(),
        })
    }
}

/// Something with an epoch and a complexity reading.
pub trait ComplexitySample {
    fn epoch(&self) -> u64;
    fn high_order_entropy(&self) -> f64;
}

impl ComplexitySample for EpochStats {
    fn epoch(&self) -> u64 {
        self.epoch
    }
    fn high_order_entropy(&self) -> f64 {
        self.high_order_entropy
    }
}

impl ComplexitySample for (u64, f64) {
    fn epoch(&self) -> u64 {
        self.0
    }
    fn high_order_entropy(&self) -> f64 {
        self.1
    }
}

/// First epoch whose high-order entropy reaches `threshold`.
pub fn detect_transition<S: ComplexitySample>(series: &[S], threshold: f64) -> Option<u64> {
    series
        .iter()
        .find(|s| s.high_order_entropy() >= threshold)
        .map(|s| s.epoch())
}

pub const DEFAULT_TRANSITION_THRESHOLD: f64 = 1.0;

pub fn write_stats_csv<W: std::io::Write>(w: W, rows: &[EpochStats]) -> Result<(), AnalysisError> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record(STATS_COLUMNS)?;
    }
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_stats_csv<R: std::io::Read>(r: R) -> Result<Vec<EpochStats>, AnalysisError> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<Result<Vec<_>, _>>()?)
}

pub const STATS_COLUMNS: [&str; 9] = [
    "epoch",
    "shannon_bits_per_byte",
    "compressed_size_bytes",
    "high_order_entropy",
    "unique_token_count",
    "top32_token_count",
    "zero_byte_count",
    "mean_steps_executed",
    "compressor",
];
