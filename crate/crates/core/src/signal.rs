//! Packet geometry and elementary signal containers.

use std::f64::consts::PI;
use std::ops::Add;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of one C-FBMC packet.
///
/// The body holds `num_subcarriers · num_complex_slots` samples; the cyclic
/// prefix sits before it and the optional cyclic suffix after it. Roll-off
/// lengths are carried as data: nothing here requires them to fit inside
/// the prefix and suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketConfig {
    pub num_subcarriers: usize,
    pub num_complex_slots: usize,
    pub cp_len: usize,
    #[serde(default)]
    pub cs_len: usize,
    #[serde(default)]
    pub tx_rolloff: usize,
    #[serde(default)]
    pub rx_rolloff: usize,
}

impl PacketConfig {
    pub fn new(num_subcarriers: usize, num_complex_slots: usize, cp_len: usize) -> Result<Self> {
        let cfg = Self { num_subcarriers, num_complex_slots, cp_len, cs_len: 0, tx_rolloff: 0, rx_rolloff: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_suffix(mut self, cs_len: usize) -> Self {
        self.cs_len = cs_len;
        self
    }

    pub fn with_rolloff(mut self, tx_rolloff: usize, rx_rolloff: usize) -> Self {
        self.tx_rolloff = tx_rolloff;
        self.rx_rolloff = rx_rolloff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_subcarriers == 0 || !self.num_subcarriers.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "number of subcarriers must be positive and even, got {}",
                self.num_subcarriers
            )));
        }
        if self.num_complex_slots == 0 {
            return Err(Error::Config("number of complex slots must be positive".into()));
        }
        Ok(())
    }

    /// `N`
    pub fn n(&self) -> usize {
        self.num_subcarriers
    }

    /// `M`
    pub fn m(&self) -> usize {
        self.num_complex_slots
    }

    /// Samples in the packet body, `M·N`.
    pub fn body_len(&self) -> usize {
        self.num_subcarriers * self.num_complex_slots
    }

    /// Spacing between consecutive real-symbol slots, `N/2`.
    pub fn half_symbol(&self) -> usize {
        self.num_subcarriers / 2
    }

    /// Real-symbol slots per subcarrier, `2M`.
    pub fn num_slots(&self) -> usize {
        2 * self.num_complex_slots
    }

    /// Length of the flat part of the transmit window: prefix, body and suffix.
    pub fn flat_span(&self) -> usize {
        self.cp_len + self.body_len() + self.cs_len
    }

    pub(crate) fn check_indices(&self, k: usize, l: usize) -> Result<()> {
        if k >= self.n() {
            return Err(Error::Subcarrier { k, n: self.n() });
        }
        if l == 0 || l > self.num_slots() {
            return Err(Error::Slot { l, max: self.num_slots() });
        }
        Ok(())
    }
}

/// A finite complex sequence placed on the global time axis.
///
/// Samples outside `[start, start + len)` are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexSignal {
    pub start: i64,
    pub samples: Vec<Complex64>,
}

impl ComplexSignal {
    pub fn new(start: i64, samples: Vec<Complex64>) -> Self {
        Self { start, samples }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// One past the last sample index.
    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64
    }

    pub fn at(&self, n: i64) -> Complex64 {
        if n < self.start || n >= self.end() {
            return Complex64::new(0.0, 0.0);
        }
        self.samples[(n - self.start) as usize]
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.start..self.end()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.indices().zip(self.samples.iter().copied())
    }

    pub fn shifted(&self, delay: i64) -> Self {
        Self { start: self.start + delay, samples: self.samples.clone() }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { start: self.start, samples: self.samples.iter().map(|s| s * factor).collect() }
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn dtft(&self, omega: f64) -> Complex64 {
        dtft(self, omega)
    }

    /// Adds `other` into `self`, growing the support as needed.
    pub fn accumulate(&mut self, other: &ComplexSignal) {
        if other.is_empty() {
            return;
        }
        if self.is_empty() {
            *self = other.clone();
            return;
        }
        let start = self.start.min(other.start);
        let end = self.end().max(other.end());
        if start < self.start || end > self.end() {
            let mut grown = vec![Complex64::new(0.0, 0.0); (end - start) as usize];
            let off = (self.start - start) as usize;
            grown[off..off + self.samples.len()].copy_from_slice(&self.samples);
            self.samples = grown;
            self.start = start;
        }
        let off = (other.start - self.start) as usize;
        for (dst, src) in self.samples[off..].iter_mut().zip(&other.samples) {
            *dst += src;
        }
    }
}

impl Add for &ComplexSignal {
    type Output = ComplexSignal;

    fn add(self, rhs: &ComplexSignal) -> ComplexSignal {
        let mut out = self.clone();
        out.accumulate(rhs);
        out
    }
}

impl Add for ComplexSignal {
    type Output = ComplexSignal;

    fn add(mut self, rhs: ComplexSignal) -> ComplexSignal {
        self.accumulate(&rhs);
        self
    }
}

/// Pointwise sum on the union of supports.
pub fn signal_add(a: &ComplexSignal, b: &ComplexSignal) -> ComplexSignal {
    a + b
}

/// Exact finite DTFT `Σ s[n]·e^{-jωn}` over the support of `s`.
pub fn dtft(s: &ComplexSignal, omega: f64) -> Complex64 {
    s.iter().map(|(n, x)| x * Complex64::from_polar(1.0, -omega * n as f64)).sum()
}

/// DTFT of a real sequence starting at `start`.
pub(crate) fn real_dtft(start: i64, taps: &[f64], omega: f64) -> Complex64 {
    taps.iter().enumerate().map(|(i, &t)| t * Complex64::from_polar(1.0, -omega * (start + i as i64) as f64)).sum()
}

/// `j^e` for an integer exponent.
pub(crate) fn j_pow(e: i64) -> Complex64 {
    match e.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Real data symbols `a_{k,l}`: one row per subcarrier, one column per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols] }
    }

    pub fn for_config(cfg: &PacketConfig) -> Self {
        Self::zeros(cfg.n(), cfg.num_slots())
    }

    /// Builds a matrix from `f(k, l)` with `l` 1-based.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for k in 0..rows {
            for l in 1..=cols {
                m.set(k, l, f(k, l));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at subcarrier `k` (0-based) and slot `l` (1-based).
    pub fn get(&self, k: usize, l: usize) -> f64 {
        assert!(k < self.rows && l >= 1 && l <= self.cols, "index ({k}, {l}) out of range");
        self.values[k * self.cols + l - 1]
    }

    pub fn set(&mut self, k: usize, l: usize, value: f64) {
        assert!(k < self.rows && l >= 1 && l <= self.cols, "index ({k}, {l}) out of range");
        self.values[k * self.cols + l - 1] = value;
    }

    /// Iterates `(k, l, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (i / self.cols, i % self.cols + 1, v))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &DataMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub(crate) fn check_shape(&self, cfg: &PacketConfig) -> Result<()> {
        if self.rows != cfg.n() || self.cols != cfg.num_slots() {
            return Err(Error::Dimension {
                rows: self.rows,
                cols: self.cols,
                want_rows: cfg.n(),
                want_cols: cfg.num_slots(),
            });
        }
        Ok(())
    }
}

/// Channel offsets of an asynchronous user.
///
/// The frequency offset rotates sample `n` by `e^{j2πΔf·(n − phase_ref)}`.
/// `phase_ref = 0` references the rotation to the global axis; any other
/// choice only adds a constant carrier phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetSpec {
    pub delta_n: i64,
    /// Cycles per sample.
    pub delta_f: f64,
    #[serde(default)]
    pub phase_ref: i64,
}

impl OffsetSpec {
    pub fn new(delta_n: i64, delta_f: f64) -> Result<Self> {
        let off = Self { delta_n, delta_f, phase_ref: 0 };
        off.validate()?;
        Ok(off)
    }

    pub fn synchronized() -> Self {
        Self { delta_n: 0, delta_f: 0.0, phase_ref: 0 }
    }

    pub fn with_phase_ref(mut self, phase_ref: i64) -> Self {
        self.phase_ref = phase_ref;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_f.is_nan() || self.delta_f.abs() >= 0.5 {
            return Err(Error::FrequencyOffset(self.delta_f));
        }
        Ok(())
    }

    pub fn is_synchronized(&self) -> bool {
        self.delta_n == 0 && self.delta_f == 0.0
    }

    /// Rotation applied to the sample at global index `n`.
    pub fn rotation(&self, n: i64) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.delta_f * (n - self.phase_ref) as f64)
    }
}
