//! Applying a designed codebook to data.
//!
//! Encoding maps a point to a 1-based level index via binary search over the
//! scheme's cell boundaries; decoding returns the level. The envelope
//! scheme's cell rule guarantees `decode(encode(x)) >= x`.

use std::io::{self, BufRead, Write};

use crate::cubic::Scheme;
use crate::error::{Error, Result};
use crate::quantizer::Codebook;

/// Encoded level indices tied to the codebook that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream {
    pub indices: Vec<usize>,
    pub codebook_id: String,
}

/// Map `x` to its level index in `1..=K`.
///
/// Unconstrained scheme: nearest designed level, with midpoint boundaries
/// and ties assigned to the lower index. Envelope scheme: smallest `k` with
/// `q_k >= x`.
pub fn encode(x: f64, cb: &Codebook) -> Result<usize> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfSupport { x });
    }
    let idx = match cb.scheme() {
        Scheme::Alm => {
            let bounds = cb.boundaries();
            let interior = &bounds[1..bounds.len() - 1];
            interior.partition_point(|b| *b < x) + 1
        }
        Scheme::Aeq => {
            let designed = cb.designed_levels();
            designed.partition_point(|q| *q < x) + 1
        }
    };
    Ok(idx.min(cb.num_levels()))
}

/// Level value for a 1-based index.
pub fn decode(index: usize, cb: &Codebook) -> Result<f64> {
    let count = cb.num_levels();
    if index == 0 || index > count {
        return Err(Error::IndexOutOfRange { index, count });
    }
    Ok(cb.designed_levels()[index - 1])
}

pub fn encode_batch(xs: &[f64], cb: &Codebook) -> Result<EncodedStream> {
    let indices = xs
        .iter()
        .map(|&x| encode(x, cb))
        .collect::<Result<Vec<usize>>>()?;
    Ok(EncodedStream {
        indices,
        codebook_id: cb.fingerprint(),
    })
}

/// Decode a stream, refusing indices produced by a different codebook.
pub fn decode_stream(stream: &EncodedStream, cb: &Codebook) -> Result<Vec<f64>> {
    if stream.codebook_id != cb.fingerprint() {
        return Err(Error::CodebookMismatch);
    }
    stream.indices.iter().map(|&i| decode(i, cb)).collect()
}

/// Mean squared reconstruction error over a sample set.
pub fn empirical_mse(samples: &[f64], cb: &Codebook) -> Result<f64> {
    empirical_mse_stats(samples, cb).map(|(mse, _)| mse)
}

/// Empirical MSE together with the standard error of the mean, for
/// Monte-Carlo comparisons against the quadrature cost.
pub fn empirical_mse_stats(samples: &[f64], cb: &Codebook) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &x in samples {
        let err = decode(encode(x, cb)?, cb)? - x;
        let sq = err * err;
        sum += sq;
        sum_sq += sq * sq;
    }
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Read newline-delimited reals, ignoring blank lines.
pub fn read_samples<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::ParseError {
            what: "sample input".into(),
            detail: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let x: f64 = trimmed.parse().map_err(|e| Error::ParseError {
            what: "sample input".into(),
            detail: format!("{trimmed:?}: {e}"),
        })?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfSupport { x });
        }
        out.push(x);
    }
    Ok(out)
}

/// Write `(x, index, level)` rows for an encoded batch.
pub fn write_encoding_csv<W: Write>(
    mut writer: W,
    xs: &[f64],
    stream: &EncodedStream,
    cb: &Codebook,
) -> io::Result<()> {
    writeln!(writer, "x,index,level")?;
    for (x, &idx) in xs.iter().zip(&stream.indices) {
        let level = cb.designed_levels()[idx - 1];
        writeln!(writer, "{x},{idx},{level}")?;
    }
    Ok(())
}
