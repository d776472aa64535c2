//! Seeded disorder generation and persistence.
//!
//! Each `(seed, replica)` pair owns a ChaCha12 stream: the key comes from the
//! seed and the replica index selects the ChaCha stream id, so replicas are
//! independent sub-streams that can be generated in any order.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DisorderLaw, SQRT_3};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CPDV";
const FORMAT_VERSION: u16 = 1;

/// A realization `omega_1..omega_N` with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderVector {
    pub values: Vec<f64>,
    pub law: DisorderLaw,
    pub seed: u64,
    pub replica: u64,
}

impl DisorderVector {
    /// IID draws of length `n` (even) from the `(seed, replica)` sub-stream.
    pub fn sample(law: DisorderLaw, n: usize, seed: u64, replica: u64) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::invalid("N", format!("must be even, got {n}")));
        }
        let mut stream = DisorderStream::new(law, seed, replica);
        stream.ensure(n);
        Ok(Self {
            values: stream.values()[..n].to_vec(),
            law,
            seed,
            replica,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copies the values into another scalar type.
    pub fn cast<T: crate::Real>(&self) -> Vec<T> {
        self.values.iter().map(|&v| T::lit(v)).collect()
    }
}

/// Extendable disorder stream; prefixes never change when the stream grows.
#[derive(Clone, Debug)]
pub struct DisorderStream {
    law: DisorderLaw,
    seed: u64,
    replica: u64,
    rng: ChaCha12Rng,
    values: Vec<f64>,
}

impl DisorderStream {
    pub fn new(law: DisorderLaw, seed: u64, replica: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        Self {
            law,
            seed,
            replica,
            rng,
            values: Vec::new(),
        }
    }

    pub fn law(&self) -> DisorderLaw {
        self.law
    }

    /// Grows the stream to at least `len` values.
    pub fn ensure(&mut self, len: usize) {
        self.values.reserve(len.saturating_sub(self.values.len()));
        while self.values.len() < len {
            let v = draw(self.law, &mut self.rng);
            self.values.push(v);
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_vector(&self, n: usize) -> DisorderVector {
        DisorderVector {
            values: self.values[..n].to_vec(),
            law: self.law,
            seed: self.seed,
            replica: self.replica,
        }
    }
}

#[inline]
fn draw(law: DisorderLaw, rng: &mut ChaCha12Rng) -> f64 {
    match law {
        DisorderLaw::BernoulliPm1 => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        DisorderLaw::GaussianStd => rng.sample(StandardNormal),
        DisorderLaw::UniformBounded => SQRT_3 * (2.0 * rng.random::<f64>() - 1.0),
    }
}

/// Writes the binary container: a 32-byte little-endian header
/// (`"CPDV"`, version `u16`, law tag `u8`, reserved `u8`, `N u64`, seed `u64`,
/// replica `u64`) followed by `N` little-endian `f64` values.
pub fn write_binary<W: Write>(mut w: W, v: &DisorderVector) -> Result<()> {
    let mut header = Vec::with_capacity(32);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    header.push(v.law.byte_tag());
    header.push(0);
    header.extend_from_slice(&(v.values.len() as u64).to_le_bytes());
    header.extend_from_slice(&v.seed.to_le_bytes());
    header.extend_from_slice(&v.replica.to_le_bytes());
    w.write_all(&header)?;
    let mut payload = Vec::with_capacity(8 * v.values.len());
    for x in &v.values {
        payload.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&payload)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<DisorderVector> {
    let mut header = [0u8; 32];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let law = DisorderLaw::from_byte_tag(header[6])
        .ok_or_else(|| Error::Format(format!("unknown law tag {}", header[6])))?;
    let word = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().expect("8 bytes"));
    let n = word(8) as usize;
    let seed = word(16);
    let replica = word(24);
    let mut payload = vec![0u8; 8 * n];
    r.read_exact(&mut payload)?;
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(DisorderVector {
        values,
        law,
        seed,
        replica,
    })
}

/// CSV with columns `index,value` (1-based index).
pub fn write_csv<W: Write>(w: W, v: &DisorderVector) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["index", "value"])?;
    for (i, x) in v.values.iter().enumerate() {
        wtr.write_record([(i + 1).to_string(), format!("{x:.17e}")])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_support_and_determinism() {
        let a = DisorderVector::sample(DisorderLaw::BernoulliPm1, 1000, 7, 3).unwrap();
        assert!(a.values.iter().all(|&x| x == 1.0 || x == -1.0));
        let b = DisorderVector::sample(DisorderLaw::BernoulliPm1, 1000, 7, 3).unwrap();
        assert_eq!(a, b);
        let c = DisorderVector::sample(DisorderLaw::BernoulliPm1, 1000, 7, 4).unwrap();
        assert_ne!(a.values, c.values);
        assert!(DisorderVector::sample(DisorderLaw::GaussianStd, 7, 1, 1).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let n = 100_000;
        let v = DisorderVector::sample(DisorderLaw::GaussianStd, n, 11, 0).unwrap();
        let mean = v.values.iter().sum::<f64>() / n as f64;
        let var = v.values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() <= 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() <= 0.05);
    }

    #[test]
    fn uniform_support_and_variance() {
        let n = 100_000;
        let v = DisorderVector::sample(DisorderLaw::UniformBounded, n, 5, 2).unwrap();
        assert!(v.values.iter().all(|x| x.abs() <= SQRT_3));
        let var = v.values.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.03);
    }

    #[test]
    fn replicas_uncorrelated() {
        let n = 20_000;
        for law in DisorderLaw::ALL {
            let a = DisorderVector::sample(law, n, 99, 0).unwrap();
            for r in 1..5 {
                let b = DisorderVector::sample(law, n, 99, r).unwrap();
                let rho = correlation(&a.values, &b.values);
                assert!(rho.abs() <= 4.0 / (n as f64).sqrt(), "{law:?} r={r}: {rho}");
            }
        }
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn stream_extension_preserves_prefix() {
        let mut s = DisorderStream::new(DisorderLaw::GaussianStd, 3, 1);
        s.ensure(100);
        let head = s.values().to_vec();
        s.ensure(10_000);
        assert_eq!(&s.values()[..100], &head[..]);
        let direct = DisorderVector::sample(DisorderLaw::GaussianStd, 10_000, 3, 1).unwrap();
        assert_eq!(s.values(), &direct.values[..]);
    }

    #[test]
    fn binary_container_layout() {
        let v = DisorderVector::sample(DisorderLaw::UniformBounded, 6, 42, 9).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &v).unwrap();
        assert_eq!(buf.len(), 32 + 6 * 8);
        assert_eq!(&buf[0..4], b"CPDV");
        assert_eq!(buf[6], 3);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 6);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 42);
        assert_eq!(u64::from_le_bytes(buf[24..32].try_into().unwrap()), 9);
        assert_eq!(
            f64::from_le_bytes(buf[32..40].try_into().unwrap()),
            v.values[0]
        );
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!(back, v);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_binary(&bad[..]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let v = DisorderVector::sample(DisorderLaw::BernoulliPm1, 4, 1, 0).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &v).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "index,value");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("1,"));
    }
}
