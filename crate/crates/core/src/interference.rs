//! Leakage gains between an asynchronous data symbol and synchronous ones.
//!
//! The leakage gain `I_{p,m}^{k,l}` is the receiver's estimate of `a_{p,m}`
//! produced by a unit symbol `a_{k,l}` that arrives with timing offset `Δn`
//! and frequency offset `Δf`. Gains are normalized by the synchronized
//! self-gain `M` (and the body length `MN` that scales the receiver's
//! inner product), so a synchronized symbol maps onto itself with gain one.
//!
//! Three routes are provided:
//!
//! * [`leakage_analytic`] evaluates the general double sum over prototype
//!   coefficients with samples of the combined window spectrum `U(ω)`,
//!   where `u[n] = w[n − Δn]·v[n]`:
//!
//!   ```text
//!   I = Re{ j^{k−p+l−m} e^{−j2πkΔn/N} e^{−j2πΔf·n_ref}
//!           Σ_r c_r e^{jπmr/M} Σ_r' c_r' e^{−j2πr'(Δn + lN/2)/MN}
//!           U(2π(r − r' − (k−p)M)/MN − 2πΔf) } / (MN·M)
//!   ```
//!
//! * [`leakage_sync`] and [`leakage_timing_flat`] are the closed forms that
//!   hold when `u` folds to one (no offset, or a timing offset absorbed by
//!   the flat part of the transmit window).
//! * [`leakage_oracle`] runs the transmitter, channel and receiver sample by
//!   sample and shares no algebra with the other routes.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::prototype::PrototypeCoefficients;
use crate::signal::{j_pow, DataMatrix, OffsetSpec};
use crate::waveform::{apply_offsets, phasor, Transceiver, Window};

/// dB value reported for an exactly zero gain.
pub const ZERO_GAIN_DB: f64 = -300.0;

/// `u[n] = w[n − Δn]·v[n]` on the intersection of both supports.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedWindow {
    pub start: i64,
    pub taps: Vec<f64>,
}

impl CombinedWindow {
    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn end(&self) -> i64 {
        self.start + self.taps.len() as i64
    }

    pub fn at(&self, n: i64) -> f64 {
        if n < self.start || n >= self.end() {
            0.0
        } else {
            self.taps[(n - self.start) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        (self.start..self.end()).zip(self.taps.iter().copied())
    }

    /// True when `u` equals `v` sample for sample.
    pub fn equals(&self, v: &Window) -> bool {
        let lo = self.start.min(v.start);
        let hi = self.end().max(v.end());
        (lo..hi).all(|n| self.at(n) == v.at(n))
    }
}

pub fn combine_windows(w: &Window, v: &Window, delta_n: i64) -> CombinedWindow {
    let start = (w.start + delta_n).max(v.start);
    let end = (w.end() + delta_n).min(v.end());
    if end <= start {
        return CombinedWindow { start: v.start, taps: Vec::new() };
    }
    let taps = (start..end).map(|n| w.at(n - delta_n) * v.at(n)).collect();
    CombinedWindow { start, taps }
}

/// True iff the delayed transmit window is exactly one wherever `v > 0`.
pub fn flat_coverage(w: &Window, v: &Window, delta_n: i64) -> bool {
    v.iter().filter(|&(_, t)| t > 0.0).all(|(n, _)| w.at(n - delta_n) == 1.0)
}

/// Signed subcarrier distance `k − p` reduced into `(−N/2, N/2]`.
fn subcarrier_distance(k: usize, p: usize, num_subcarriers: usize) -> i64 {
    let n = num_subcarriers as i64;
    let d = (k as i64 - p as i64).rem_euclid(n);
    if d > n / 2 {
        d - n
    } else {
        d
    }
}

/// Samples of `U(2πq/MN − 2πΔf)` for `q = 0..MN`.
struct GridSpectrum {
    values: Vec<Complex64>,
}

impl GridSpectrum {
    fn new(u: &CombinedWindow, off: &OffsetSpec, body_len: usize) -> Self {
        let mn = body_len as i64;
        let rotated: Vec<(i64, Complex64)> = u
            .iter()
            .filter(|&(_, t)| t != 0.0)
            .map(|(n, t)| (n, t * Complex64::from_polar(1.0, 2.0 * PI * off.delta_f * n as f64)))
            .collect();
        let values = (0..mn).map(|q| rotated.iter().map(|&(n, x)| x * phasor(-q * n, mn)).sum()).collect();
        Self { values }
    }

    fn at(&self, q: i64) -> Complex64 {
        self.values[q.rem_euclid(self.values.len() as i64) as usize]
    }
}

fn analytic_entry(
    tx: &Transceiver,
    spectrum: &GridSpectrum,
    off: &OffsetSpec,
    (k, l): (usize, usize),
    (p, m): (usize, usize),
) -> f64 {
    let cfg = tx.config();
    let proto = tx.prototype();
    let n_sc = cfg.n() as i64;
    let ov = cfg.m() as i64;
    let mn = cfg.body_len() as i64;
    let dn = off.delta_n;
    let delay = dn + (l * cfg.half_symbol()) as i64;
    let carrier = (k as i64 - p as i64) * ov;

    let mut acc = Complex64::new(0.0, 0.0);
    for (r, c) in proto.iter() {
        let inner: Complex64 =
            proto.iter().map(|(rp, cp)| cp * phasor(-rp * delay, mn) * spectrum.at(r - rp - carrier)).sum();
        acc += c * phasor(m as i64 * r, 2 * ov) * inner;
    }
    let lead = j_pow(k as i64 - p as i64 + l as i64 - m as i64)
        * phasor(-(k as i64) * dn, n_sc)
        * Complex64::from_polar(1.0, -2.0 * PI * off.delta_f * off.phase_ref as f64);
    (lead * acc).re / (mn * ov) as f64
}

/// General leakage gain through the combined window spectrum.
#[allow(clippy::too_many_arguments)]
pub fn leakage_analytic(
    tx: &Transceiver,
    w: &Window,
    v: &Window,
    k: usize,
    l: usize,
    p: usize,
    m: usize,
    off: &OffsetSpec,
) -> Result<f64> {
    let cfg = tx.config();
    cfg.check_indices(k, l)?;
    cfg.check_indices(p, m)?;
    off.validate()?;
    let u = combine_windows(w, v, off.delta_n);
    let spectrum = GridSpectrum::new(&u, off, cfg.body_len());
    Ok(analytic_entry(tx, &spectrum, off, (k, l), (p, m)))
}

/// Closed form for perfectly synchronized symbols:
/// `Re{j^{k−p+l−m} (−1)^{sl} Σ_r c_r c_{r−sM} e^{jπr(m−l)/M}} / M`, with `s`
/// the circular subcarrier distance.
pub fn leakage_sync(
    proto: &PrototypeCoefficients,
    num_subcarriers: usize,
    k: usize,
    l: usize,
    p: usize,
    m: usize,
) -> f64 {
    let ov = proto.overlap() as i64;
    let s = subcarrier_distance(k, p, num_subcarriers);
    let dm = m as i64 - l as i64;
    let sum: Complex64 = proto.iter().map(|(r, c)| c * proto.get(r - s * ov) * phasor(r * dm, 2 * ov)).sum();
    let lead = j_pow(k as i64 - p as i64 - dm) * phasor(s * l as i64, 2);
    (lead * sum).re / ov as f64
}

/// Closed form for a pure timing offset whose receive window stays on the
/// flat part of the transmit window (the caller asserts [`flat_coverage`]).
///
/// With `d = m − l − 2Δn/N` the delay acts as a fractional slot shift.
/// Symbols two or more subcarriers apart never leak. On the same subcarrier
/// `I = cos(π(l−m)/2 − 2πpΔn/N)·Σ_r c_r² cos(πrd/M) / M`. On adjacent
/// subcarriers the products `c_r c_{M−r}` form an even series about `M/2`,
/// giving `I = ±{cos|sin}(θ)·Σ_r c_r c_{M−r} cos(π(r − M/2)d/M) / M` with
/// `θ = πsl − 2πpΔn/N + πsd/2`: the cosine form when `k − p + l − m` is even
/// (odd `m − l`), the sine form otherwise.
#[allow(clippy::too_many_arguments)]
pub fn leakage_timing_flat(
    proto: &PrototypeCoefficients,
    num_subcarriers: usize,
    k: usize,
    l: usize,
    p: usize,
    m: usize,
    delta_n: i64,
) -> f64 {
    let ov = proto.overlap() as i64;
    let mf = ov as f64;
    let s = subcarrier_distance(k, p, num_subcarriers);
    let d = m as f64 - l as f64 - 2.0 * delta_n as f64 / num_subcarriers as f64;
    let carrier_phase =
        -2.0 * PI * (p as i64 * delta_n).rem_euclid(num_subcarriers as i64) as f64 / num_subcarriers as f64;
    match s.abs() {
        0 => {
            let series: f64 = proto.iter().map(|(r, c)| c * c * (PI * r as f64 * d / mf).cos()).sum();
            let theta = PI * (l as f64 - m as f64) / 2.0 + carrier_phase;
            theta.cos() * series / mf
        }
        1 => {
            let series: f64 =
                (1..ov).map(|r| proto.get(r) * proto.get(ov - r) * (PI * (r as f64 - mf / 2.0) * d / mf).cos()).sum();
            let theta = PI * (s * l as i64) as f64 + carrier_phase + PI * s as f64 * d / 2.0;
            let rotated = match (k as i64 - p as i64 + l as i64 - m as i64).rem_euclid(4) {
                0 => theta.cos(),
                1 => -theta.sin(),
                2 => -theta.cos(),
                _ => theta.sin(),
            };
            rotated * series / mf
        }
        _ => 0.0,
    }
}

/// Receiver estimate of `a_{p,m}` when only `a_{k,l} = amplitude` is sent,
/// computed sample by sample: modulate, delay and rotate, window by `v`,
/// downconvert subcarrier `p`, fold onto one body period and correlate with
/// the prototype at lag `mN/2`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_estimate(
    tx: &Transceiver,
    w: &Window,
    v: &Window,
    (k, l): (usize, usize),
    amplitude: f64,
    (p, m): (usize, usize),
    off: &OffsetSpec,
) -> Result<f64> {
    let cfg = tx.config();
    cfg.check_indices(p, m)?;
    off.validate()?;
    let x = tx.modulate_symbol(k, l, amplitude, w)?;
    let y = apply_offsets(&x, off);

    let mn = cfg.body_len();
    let n_sc = cfg.n() as f64;
    let mut folded = vec![Complex64::new(0.0, 0.0); mn];
    for (n, sample) in y.iter() {
        let tap = v.at(n);
        if tap == 0.0 {
            continue;
        }
        let down = Complex64::from_polar(1.0, -2.0 * PI * (p as f64) * (n as f64) / n_sc);
        folded[n.rem_euclid(mn as i64) as usize] += sample * tap * down;
    }

    let g = tx.pulse();
    let lag = (m * cfg.half_symbol()) as i64;
    let corr: Complex64 = folded.iter().enumerate().map(|(i, z)| z * g.at(lag - i as i64)).sum();
    let est = j_pow(-((p + m) as i64)) * corr;
    Ok(est.re / (mn * cfg.m()) as f64)
}

/// Brute-force leakage gain: [`oracle_estimate`] for a unit symbol.
#[allow(clippy::too_many_arguments)]
pub fn leakage_oracle(
    tx: &Transceiver,
    w: &Window,
    v: &Window,
    k: usize,
    l: usize,
    p: usize,
    m: usize,
    off: &OffsetSpec,
) -> Result<f64> {
    oracle_estimate(tx, w, v, (k, l), 1.0, (p, m), off)
}

/// `20·log10|gain|`, with exact zeros and underflow at [`ZERO_GAIN_DB`].
pub fn gain_db(gain: f64) -> f64 {
    if gain == 0.0 {
        ZERO_GAIN_DB
    } else {
        (20.0 * gain.abs().log10()).max(ZERO_GAIN_DB)
    }
}

/// Leakage gains from one asynchronous source symbol into every `(p, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageMap {
    pub source: (usize, usize),
    pub offsets: OffsetSpec,
    pub gains: DataMatrix,
}

impl LeakageMap {
    pub fn gain(&self, p: usize, m: usize) -> f64 {
        self.gains.get(p, m)
    }

    pub fn gain_db(&self, p: usize, m: usize) -> f64 {
        gain_db(self.gains.get(p, m))
    }

    /// `(p, m, gain, gain_db)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.gains.iter().map(|(p, m, g)| (p, m, g, gain_db(g)))
    }

    /// `Σ gain²` over every entry except the source itself.
    pub fn off_target_energy(&self) -> f64 {
        self.gains.iter().filter(|&(p, m, _)| (p, m) != self.source).map(|(_, _, g)| g * g).sum()
    }

    pub fn count_above_db(&self, threshold_db: f64) -> usize {
        self.entries().filter(|e| e.3 > threshold_db).count()
    }
}

/// Evaluates [`leakage_analytic`] for every `(p, m)`.
pub fn leakage_map(
    tx: &Transceiver,
    w: &Window,
    v: &Window,
    k: usize,
    l: usize,
    off: &OffsetSpec,
) -> Result<LeakageMap> {
    let cfg = tx.config();
    cfg.check_indices(k, l)?;
    off.validate()?;
    let u = combine_windows(w, v, off.delta_n);
    let spectrum = GridSpectrum::new(&u, off, cfg.body_len());
    let gains =
        DataMatrix::from_fn(cfg.n(), cfg.num_slots(), |p, m| analytic_entry(tx, &spectrum, off, (k, l), (p, m)));
    Ok(LeakageMap { source: (k, l), offsets: *off, gains })
}
