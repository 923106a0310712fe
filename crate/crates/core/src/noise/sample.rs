use std::path::Path;

use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hermite::{CoefField, MultiIndex, SpectralGrid};

const DUMP_FORMAT: &str = "wickgp-noise";
const DUMP_VERSION: u32 = 1;

/// Gaussian coordinates ξ_k of one white noise realization on the K×K modes.
///
/// Generation: a ChaCha20 stream keyed by `seed` (expanded with
/// `SeedableRng::seed_from_u64`) and selected by `stream_index`
/// (`set_stream`). Mode k reads the two 64-bit words at block position
/// 4·ι(k), where ι(k) = (k1+k2)(k1+k2+1)/2 + k2 is the Cantor index, and
/// turns them into one standard normal by Box–Muller (cosine branch).
/// ξ_k therefore does not depend on K: a larger basis extends a realization.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization {
    pub seed: u64,
    pub stream_index: u64,
    pub k: usize,
    /// Row-major over (k1, k2).
    pub xi: Array2<f64>,
}

fn cantor(k: MultiIndex) -> u128 {
    let d = (k.k1 + k.k2) as u128;
    d * (d + 1) / 2 + k.k2 as u128
}

fn box_muller(a: u64, b: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) as f64 + 1.0) * SCALE; // (0, 1]
    let u2 = (b >> 11) as f64 * SCALE; // [0, 1)
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Regenerates the realization (seed, stream_index) on K×K modes.
pub fn sample_noise(seed: u64, stream_index: u64, k: usize) -> Result<NoiseRealization> {
    if k == 0 {
        return Err(Error::EmptyBasis);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_index);
    let xi = Array2::from_shape_fn((k, k), |(a, b)| {
        rng.set_word_pos(4 * cantor(MultiIndex::new(a, b)));
        let x = rng.next_u64();
        let y = rng.next_u64();
        box_muller(x, y)
    });
    Ok(NoiseRealization {
        seed,
        stream_index,
        k,
        xi,
    })
}

#[derive(Serialize, Deserialize)]
struct NoiseDump {
    format: String,
    version: u32,
    seed: u64,
    stream_index: u64,
    k: usize,
    layout: String,
    xi: Vec<f64>,
    sha256: String,
}

fn checksum(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl NoiseRealization {
    /// All-zero coordinates (ξ = 0), for deterministic comparisons.
    pub fn zero(k: usize) -> Self {
        Self {
            seed: 0,
            stream_index: 0,
            k,
            xi: Array2::zeros((k, k)),
        }
    }

    /// ξ as a real coefficient field.
    pub fn field(&self, grid: &std::sync::Arc<SpectralGrid>) -> Result<CoefField> {
        if grid.k() != self.k {
            return Err(Error::GridMismatch);
        }
        CoefField::from_real(grid, self.xi.clone())
    }

    /// Self-describing JSON record with a SHA-256 over the little-endian ξ bytes.
    pub fn to_json(&self) -> Result<String> {
        let xi: Vec<f64> = self.xi.iter().copied().collect();
        let dump = NoiseDump {
            format: DUMP_FORMAT.into(),
            version: DUMP_VERSION,
            seed: self.seed,
            stream_index: self.stream_index,
            k: self.k,
            layout: "row-major (k1, k2)".into(),
            sha256: checksum(&xi),
            xi,
        };
        Ok(serde_json::to_string_pretty(&dump)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: NoiseDump = serde_json::from_str(text)?;
        if dump.format != DUMP_FORMAT || dump.version != DUMP_VERSION {
            return Err(Error::Format(format!(
                "unsupported noise record {} v{}",
                dump.format, dump.version
            )));
        }
        if dump.xi.len() != dump.k * dump.k {
            return Err(Error::Format(format!(
                "expected {} coordinates, found {}",
                dump.k * dump.k,
                dump.xi.len()
            )));
        }
        if checksum(&dump.xi) != dump.sha256 {
            return Err(Error::Format("checksum mismatch".into()));
        }
        let xi = Array2::from_shape_vec((dump.k, dump.k), dump.xi)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self {
            seed: dump.seed,
            stream_index: dump.stream_index,
            k: dump.k,
            xi,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_stream_separated() {
        let a = sample_noise(7, 3, 10).unwrap();
        let b = sample_noise(7, 3, 10).unwrap();
        assert_eq!(a, b);
        let c = sample_noise(7, 4, 10).unwrap();
        assert_ne!(a.xi, c.xi);
        let d = sample_noise(8, 3, 10).unwrap();
        assert_ne!(a.xi, d.xi);
    }

    #[test]
    fn larger_basis_extends_realization() {
        let small = sample_noise(42, 1, 6).unwrap();
        let big = sample_noise(42, 1, 12).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(small.xi[[a, b]], big.xi[[a, b]]);
            }
        }
    }

    #[test]
    fn dump_round_trip_and_tamper_detection() {
        let n = sample_noise(1, 2, 5).unwrap();
        let text = n.to_json().unwrap();
        assert_eq!(NoiseRealization::from_json(&text).unwrap(), n);
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["xi"][3] = serde_json::json!(0.125);
        assert!(NoiseRealization::from_json(&v.to_string()).is_err());
    }
}
