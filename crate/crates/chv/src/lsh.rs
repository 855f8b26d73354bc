//! Rounded random-projection hash over the nonnegative hypergrid. The key
//! is a Gaussian matrix with variance 1/m; hashing projects, floors to the
//! grid gamma Z^m, and zeroes out (with a flag) anything that escapes the
//! radius-r ball. A pair of inputs whose digests sit closer than half the
//! contraction target certifies a CHV solution for the rescaled matrix,
//! which is the reduction implemented here, together with the spectral
//! non-expansion certificate and the counting-based compression margin.

use crate::error::{Error, Result};
use crate::instance::sample_gaussian_matrix;
use crate::linalg::{norm2, spectral_norm, Mat};
use crate::rng::{Sampler, Seed};

/// Fixed post-sampling quantization of key entries, in fractional bits.
/// Hashing uses the quantized entries, so serialization is lossless.
pub const ENTRY_PRECISION_BITS: u16 = 40;

const KEY_MAGIC: &[u8; 4] = b"CHVK";
const DIGEST_MAGIC: &[u8; 4] = b"CHVD";
const FORMAT_VERSION: u8 = 1;

#[derive(Clone, Debug)]
pub struct HashKey {
    pub n: usize,
    pub m: usize,
    pub bound_b: u32,
    pub kappa: f64,
    /// Grid step kappa / (2 sqrt(m)).
    pub gamma: f64,
    /// Ball radius 4 B n / sqrt(m).
    pub r_ball: f64,
    pub entry_precision_bits: u16,
    pub seed: Seed,
    /// m x n matrix, entries N(0, 1/m) quantized to the stated precision.
    pub a_scaled: Mat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashDigest {
    /// Digest point is gamma * q.
    pub q: Vec<i64>,
    /// True when the projection escaped the ball and the digest was zeroed.
    pub is_overflow_zero: bool,
}

impl HashDigest {
    pub fn point(&self, gamma: f64) -> Vec<f64> {
        self.q.iter().map(|&v| gamma * v as f64).collect()
    }
}

/// Non-expansion / contraction scales of the hash: alpha = 4 sqrt(n/m),
/// beta = kappa/2, and their ratio xi (the distortion).
#[derive(Clone, Copy, Debug)]
pub struct DistortionReport {
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
}

pub fn distortion_report(n: usize, m: usize, kappa: f64) -> DistortionReport {
    let alpha = 4.0 * (n as f64 / m as f64).sqrt();
    let beta = kappa / 2.0;
    DistortionReport { alpha, beta, xi: alpha / beta }
}

fn quantize(v: f64) -> f64 {
    let scale = (1u64 << ENTRY_PRECISION_BITS) as f64;
    (v * scale).round_ties_even() / scale
}

fn derive_gamma(m: usize, kappa: f64) -> f64 {
    kappa / (2.0 * (m as f64).sqrt())
}

fn derive_r_ball(n: usize, m: usize, bound_b: u32) -> f64 {
    4.0 * bound_b as f64 * n as f64 / (m as f64).sqrt()
}

/// Samples a hash key. Deterministic in the seed; entries are quantized
/// right after sampling. Infeasible compression parameters are not
/// rejected here (compression_margin reports them; the CLI warns).
pub fn keygen(n: usize, m: usize, bound_b: u32, kappa: f64, seed: Seed) -> Result<HashKey> {
    if m >= n {
        return Err(Error::domain(format!("hash key needs m < n, got m={m}, n={n}")));
    }
    if bound_b < 1 || !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::domain("need B >= 1 and kappa in (0,1)"));
    }
    let raw = sample_gaussian_matrix(m, n, 1.0 / m as f64, seed)?;
    let data: Vec<f64> = raw.data().iter().map(|&v| quantize(v)).collect();
    Ok(HashKey {
        n,
        m,
        bound_b,
        kappa,
        gamma: derive_gamma(m, kappa),
        r_ball: derive_r_ball(n, m, bound_b),
        entry_precision_bits: ENTRY_PRECISION_BITS,
        seed,
        a_scaled: Mat::from_vec(m, n, data),
    })
}

impl HashKey {
    /// The matrix of the CHV instance this key reduces to: sqrt(m) * A.
    pub fn chv_matrix(&self) -> Mat {
        self.a_scaled.scaled((self.m as f64).sqrt())
    }

    fn check_domain(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::domain(format!(
                "input length {} does not match n={}",
                x.len(),
                self.n
            )));
        }
        let b = self.bound_b as i64;
        if let Some(bad) = x.iter().find(|&&v| v < 0 || v > b) {
            return Err(Error::domain(format!("entry {bad} outside [0, {b}]")));
        }
        Ok(())
    }
}

/// Hashes x in [0,B]^n: floor(Ax/gamma) coordinate-wise, zeroed with the
/// overflow flag when the grid point leaves the radius-r ball.
pub fn hash(key: &HashKey, x: &[i64]) -> Result<HashDigest> {
    key.check_domain(x)?;
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let ax = key.a_scaled.mul_vec(&xf);
    let q: Vec<i64> = ax.iter().map(|&v| (v / key.gamma).floor() as i64).collect();
    let point_norm = key.gamma * (q.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>()).sqrt();
    if point_norm <= key.r_ball {
        Ok(HashDigest { q, is_overflow_zero: false })
    } else {
        Ok(HashDigest { q: vec![0; key.m], is_overflow_zero: true })
    }
}

/// What came out of attempting the contraction-to-CHV reduction on a pair.
#[derive(Clone, Debug)]
pub enum ReductionOutcome {
    /// The pair was contracting and x = y - z passed CHV verification
    /// against sqrt(m) * A.
    Solution { x: Vec<i64>, ratio: f64 },
    /// The pair does not violate contraction; no solution is implied.
    NotContracting { digest_distance: f64, threshold: f64 },
}

/// Turns a contracting pair (digest distance below (kappa/2) ||y - z||)
/// into a verified CHV solution x = y - z for the rescaled instance.
/// A non-contracting pair is reported as such, not an error; a contracting
/// pair failing final verification would be, since the proof chain rules
/// that out.
pub fn reduce_contraction_to_chv(
    key: &HashKey,
    y: &[i64],
    z: &[i64],
) -> Result<ReductionOutcome> {
    key.check_domain(y)?;
    key.check_domain(z)?;
    if y == z {
        return Err(Error::domain("the pair must be two distinct points"));
    }
    let hy = hash(key, y)?;
    let hz = hash(key, z)?;
    let digest_distance = key.gamma
        * hy.q
            .iter()
            .zip(&hz.q)
            .map(|(&a, &b)| {
                let d = (a - b) as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt();
    let x: Vec<i64> = y.iter().zip(z).map(|(&a, &b)| a - b).collect();
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let x_norm = norm2(&xf);
    let threshold = key.kappa / 2.0 * x_norm;
    if digest_distance >= threshold {
        return Ok(ReductionOutcome::NotContracting { digest_distance, threshold });
    }
    // verify ||sqrt(m) A x|| < kappa sqrt(m) ||x||, i.e. ||Ax|| < kappa ||x||
    let ax_norm = norm2(&key.a_scaled.mul_vec(&xf));
    if ax_norm < key.kappa * x_norm {
        Ok(ReductionOutcome::Solution { x, ratio: ax_norm / x_norm })
    } else {
        Err(Error::numerical(format!(
            "contracting pair failed CHV verification (||Ax||/||x|| = {:.6}, kappa = {})",
            ax_norm / x_norm,
            key.kappa
        )))
    }
}

/// Spectral non-expansion certificate plus an empirical max expansion ratio
/// over sampled digest pairs.
#[derive(Clone, Copy, Debug)]
pub struct NonExpansionReport {
    pub max_ratio: f64,
    pub spectral_norm_scaled: f64,
    pub certificate_bound: f64,
    /// True when the certificate ||A||_2 <= 3 sqrt(n/m) fails.
    pub violated: bool,
    pub pairs_used: u64,
}

/// Samples `trials` pairs from the hash domain, tracking the worst ratio
/// ||hash(y) - hash(z)|| / ||y - z|| (coincident pairs are skipped), and
/// checks the spectral certificate that bounds every pair at once.
pub fn check_non_expansion(key: &HashKey, trials: u64, seed: Seed) -> NonExpansionReport {
    let mut sampler = Sampler::new(seed);
    let b = key.bound_b as i64;
    let mut max_ratio = 0.0f64;
    let mut pairs_used = 0;
    for _ in 0..trials {
        let y: Vec<i64> = (0..key.n).map(|_| sampler.int_range(0, b)).collect();
        let z: Vec<i64> = (0..key.n).map(|_| sampler.int_range(0, b)).collect();
        if y == z {
            continue;
        }
        let hy = hash(key, &y).expect("sampled inside the domain");
        let hz = hash(key, &z).expect("sampled inside the domain");
        let dist = key.gamma
            * hy.q
                .iter()
                .zip(&hz.q)
                .map(|(&a, &c)| {
                    let d = (a - c) as f64;
                    d * d
                })
                .sum::<f64>()
                .sqrt();
        let diff_norm = y
            .iter()
            .zip(&z)
            .map(|(&a, &c)| {
                let d = (a - c) as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        max_ratio = max_ratio.max(dist / diff_norm);
        pairs_used += 1;
    }
    let spectral_norm_scaled = spectral_norm(&key.a_scaled, 1e-9);
    let certificate_bound = 3.0 * (key.n as f64 / key.m as f64).sqrt();
    NonExpansionReport {
        max_ratio,
        spectral_norm_scaled,
        certificate_bound,
        violated: spectral_norm_scaled > certificate_bound,
        pairs_used,
    }
}

/// Bits to spare in the counting argument for 2x compression:
/// log2((B+1)^n) - log2(2 (B n sqrt(128 pi e)/(kappa sqrt(m)) + sqrt(2 pi e)/2)^m).
/// Positive means the digest space is provably under half the input space.
pub fn compression_margin(n: usize, m: usize, bound_b: u32, kappa: f64) -> f64 {
    let b = bound_b as f64;
    let sqrt_2pie = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
    let digest_root = 8.0 * b * n as f64 * sqrt_2pie / (kappa * (m as f64).sqrt()) + sqrt_2pie / 2.0;
    n as f64 * (b + 1.0).log2() - 1.0 - m as f64 * digest_root.log2()
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.pos + len > self.buf.len() {
            return Err(Error::Format("truncated input".into()));
        }
        let s = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        Ok(())
    }
}

/// Key wire format: "CHVK", version, reserved byte, precision u16, n u32,
/// m u32, B u32, kappa f64, seed u64, stream u64, then row-major f64
/// entries. All little-endian.
pub fn serialize_key(key: &HashKey) -> Vec<u8> {
    let mut buf = Vec::with_capacity(44 + 8 * key.m * key.n);
    buf.extend_from_slice(KEY_MAGIC);
    buf.push(FORMAT_VERSION);
    buf.push(0);
    buf.extend_from_slice(&key.entry_precision_bits.to_le_bytes());
    put_u32(&mut buf, key.n as u32);
    put_u32(&mut buf, key.m as u32);
    put_u32(&mut buf, key.bound_b);
    put_f64(&mut buf, key.kappa);
    put_u64(&mut buf, key.seed.seed);
    put_u64(&mut buf, key.seed.stream_id);
    for &v in key.a_scaled.data() {
        put_f64(&mut buf, v);
    }
    buf
}

pub fn deserialize_key(bytes: &[u8]) -> Result<HashKey> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != KEY_MAGIC {
        return Err(Error::Format("bad key magic".into()));
    }
    if r.u8()? != FORMAT_VERSION {
        return Err(Error::Format("unsupported key version".into()));
    }
    let _reserved = r.u8()?;
    let precision = r.u16()?;
    let n = r.u32()? as usize;
    let m = r.u32()? as usize;
    let bound_b = r.u32()?;
    let kappa = r.f64()?;
    let seed = Seed { seed: r.u64()?, stream_id: r.u64()? };
    if m == 0 || n == 0 || m >= n {
        return Err(Error::Format("key dimensions invalid".into()));
    }
    if !(kappa > 0.0 && kappa < 1.0) || bound_b < 1 {
        return Err(Error::Format("key parameters invalid".into()));
    }
    let mut data = vec![0.0; m * n];
    for v in data.iter_mut() {
        *v = r.f64()?;
        if !v.is_finite() {
            return Err(Error::Format("non-finite key entry".into()));
        }
    }
    r.done()?;
    Ok(HashKey {
        n,
        m,
        bound_b,
        kappa,
        gamma: derive_gamma(m, kappa),
        r_ball: derive_r_ball(n, m, bound_b),
        entry_precision_bits: precision,
        seed,
        a_scaled: Mat::from_vec(m, n, data),
    })
}

fn zigzag_encode(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn zigzag_decode(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn put_varint(buf: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            buf.push(byte);
            return;
        }
        buf.push(byte | 0x80);
    }
}

fn read_varint(r: &mut Reader) -> Result<u64> {
    let mut v: u64 = 0;
    for i in 0..10 {
        let byte = r.u8()?;
        let payload = (byte & 0x7f) as u64;
        if i == 9 && payload > 1 {
            return Err(Error::Format("varint overflows 64 bits".into()));
        }
        v |= payload << (7 * i);
        if byte & 0x80 == 0 {
            // canonical encodings never end on an all-zero continuation byte
            if i > 0 && payload == 0 {
                return Err(Error::Format("non-minimal varint encoding".into()));
            }
            return Ok(v);
        }
    }
    Err(Error::Format("varint longer than 10 bytes".into()))
}

/// Digest wire format: "CHVD", version, overflow flag byte, m u32, then m
/// zigzag varints (canonical minimal-length encoding, so equal digests
/// have equal bytes).
pub fn serialize_digest(d: &HashDigest) -> Vec<u8> {
    let mut buf = Vec::with_capacity(10 + 2 * d.q.len());
    buf.extend_from_slice(DIGEST_MAGIC);
    buf.push(FORMAT_VERSION);
    buf.push(d.is_overflow_zero as u8);
    put_u32(&mut buf, d.q.len() as u32);
    for &v in &d.q {
        put_varint(&mut buf, zigzag_encode(v));
    }
    buf
}

pub fn deserialize_digest(bytes: &[u8]) -> Result<HashDigest> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != DIGEST_MAGIC {
        return Err(Error::Format("bad digest magic".into()));
    }
    if r.u8()? != FORMAT_VERSION {
        return Err(Error::Format("unsupported digest version".into()));
    }
    let overflow = match r.u8()? {
        0 => false,
        1 => true,
        _ => return Err(Error::Format("overflow flag must be 0 or 1".into())),
    };
    let m = r.u32()? as usize;
    let mut q = Vec::with_capacity(m);
    for _ in 0..m {
        q.push(zigzag_decode(read_varint(&mut r)?));
    }
    r.done()?;
    if overflow && q.iter().any(|&v| v != 0) {
        return Err(Error::Format("overflow digest must be the zero point".into()));
    }
    Ok(HashDigest { q, is_overflow_zero: overflow })
}
