//! Packet synthesis, windowing, channel offsets and the matched-filter receiver.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prototype::{PeriodicPulse, PrototypeCoefficients};
use crate::signal::{j_pow, real_dtft, ComplexSignal, DataMatrix, OffsetSpec, PacketConfig};

/// Largest deviation from one tolerated in a folded receiver window.
pub const FOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Rectangular,
    RaisedCosine,
}

impl WindowKind {
    pub fn name(&self) -> &'static str {
        match self {
            WindowKind::Rectangular => "rectangular",
            WindowKind::RaisedCosine => "raised_cosine",
        }
    }
}

/// Real window taps placed on the global time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start: i64,
    pub taps: Vec<f64>,
    pub kind: WindowKind,
}

impl Window {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

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

    pub fn dtft(&self, omega: f64) -> Complex64 {
        real_dtft(self.start, &self.taps, omega)
    }

    /// `Σ_i w[n + i·period]` for `n = 0..period`.
    pub fn fold(&self, period: usize) -> Vec<f64> {
        let mut out = vec![0.0; period];
        for (n, t) in self.iter() {
            out[n.rem_euclid(period as i64) as usize] += t;
        }
        out
    }

    /// Largest `|fold − 1|` over one period.
    pub fn fold_deviation(&self, period: usize) -> f64 {
        self.fold(period).iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Rising half raised-cosine ramp of `len` samples, strictly inside (0, 1).
pub fn rc_ramp(len: usize) -> Vec<f64> {
    (0..len).map(|i| 0.5 * (1.0 - (PI * (i + 1) as f64 / (len + 1) as f64).cos())).collect()
}

/// Transmit window `w[n]`.
///
/// Flat over the prefix, body and suffix, `[−N_cp, MN + cs_len)`. The
/// raised-cosine kind adds `tx_rolloff` ramp samples on each side.
pub fn make_tx_window(cfg: &PacketConfig, kind: WindowKind) -> Window {
    let flat = cfg.flat_span();
    let start = -(cfg.cp_len as i64);
    match kind {
        WindowKind::Rectangular => Window { start, taps: vec![1.0; flat], kind },
        WindowKind::RaisedCosine => {
            let up = rc_ramp(cfg.tx_rolloff);
            let mut taps = Vec::with_capacity(flat + 2 * up.len());
            taps.extend_from_slice(&up);
            taps.extend(std::iter::repeat_n(1.0, flat));
            taps.extend(up.iter().rev());
            Window { start: start - cfg.tx_rolloff as i64, taps, kind }
        }
    }
}

/// Receiver window `v[n]`.
///
/// Every kind folds to one over the `MN`-sample body, so its DTFT (scaled
/// by `1/MN`) is one at `ω = 0` and zero at every other multiple of
/// `2π/MN`. The raised-cosine kind ramps up over `[−R, 0)` inside the
/// cyclic prefix and down over `[MN − R, MN)`, with complementary ramps.
pub fn make_rx_window(cfg: &PacketConfig, kind: WindowKind) -> Result<Window> {
    let mn = cfg.body_len();
    let window = match kind {
        WindowKind::Rectangular => Window { start: 0, taps: vec![1.0; mn], kind },
        WindowKind::RaisedCosine => {
            let r = cfg.rx_rolloff;
            if r > mn / 2 {
                return Err(Error::RxRolloff { rolloff: r, half: mn / 2 });
            }
            let up = rc_ramp(r);
            let mut taps = Vec::with_capacity(mn + r);
            taps.extend_from_slice(&up);
            taps.extend(std::iter::repeat_n(1.0, mn - r));
            taps.extend(up.iter().map(|u| 1.0 - u));
            Window { start: -(r as i64), taps, kind }
        }
    };
    let dev = window.fold_deviation(mn);
    if dev > FOLD_TOL {
        return Err(Error::FoldToOne(dev));
    }
    Ok(window)
}

/// Delays `s` by `Δn` and rotates it by the frequency offset.
pub fn apply_offsets(s: &ComplexSignal, off: &OffsetSpec) -> ComplexSignal {
    let shifted = s.shifted(off.delta_n);
    if off.delta_f == 0.0 {
        return shifted;
    }
    let samples = shifted.iter().map(|(n, x)| x * off.rotation(n)).collect();
    ComplexSignal::new(shifted.start, samples)
}

/// Unit phasor `e^{j2π·num/den}` with the numerator reduced first.
pub(crate) fn phasor(num: i64, den: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * num.rem_euclid(den) as f64 / den as f64)
}

/// C-FBMC modulator and matched-filter receiver for one packet geometry.
#[derive(Debug, Clone)]
pub struct Transceiver {
    cfg: PacketConfig,
    proto: PrototypeCoefficients,
    pulse: PeriodicPulse,
}

impl Transceiver {
    pub fn new(cfg: PacketConfig, proto: PrototypeCoefficients) -> Result<Self> {
        cfg.validate()?;
        if proto.overlap() != cfg.m() {
            return Err(Error::Config(format!(
                "prototype overlap {} does not match {} complex slots",
                proto.overlap(),
                cfg.m()
            )));
        }
        let pulse = PeriodicPulse::new(&proto, cfg.n())?;
        Ok(Self { cfg, proto, pulse })
    }

    pub fn config(&self) -> &PacketConfig {
        &self.cfg
    }

    pub fn prototype(&self) -> &PrototypeCoefficients {
        &self.proto
    }

    pub fn pulse(&self) -> &PeriodicPulse {
        &self.pulse
    }

    /// `x_{k,l}[n] = j^{k+l}·a·h[n − lN/2]·e^{j2πkn/N}·w[n]` over the support of `w`.
    pub fn modulate_symbol(&self, k: usize, l: usize, a: f64, window: &Window) -> Result<ComplexSignal> {
        self.cfg.check_indices(k, l)?;
        let mut out = ComplexSignal::new(window.start, vec![Complex64::new(0.0, 0.0); window.len()]);
        self.add_symbol(&mut out.samples, window, k, l, a);
        Ok(out)
    }

    /// Sum of [`Self::modulate_symbol`] over every entry of `data`.
    pub fn modulate_packet(&self, data: &DataMatrix, window: &Window) -> Result<ComplexSignal> {
        data.check_shape(&self.cfg)?;
        let mut out = ComplexSignal::new(window.start, vec![Complex64::new(0.0, 0.0); window.len()]);
        for (k, l, a) in data.iter() {
            if a != 0.0 {
                self.add_symbol(&mut out.samples, window, k, l, a);
            }
        }
        Ok(out)
    }

    fn add_symbol(&self, buf: &mut [Complex64], window: &Window, k: usize, l: usize, a: f64) {
        let n_sc = self.cfg.n() as i64;
        let shift = (l * self.cfg.half_symbol()) as i64;
        let phase = j_pow((k + l) as i64) * a;
        for (dst, (n, w)) in buf.iter_mut().zip(window.iter()) {
            if w == 0.0 {
                continue;
            }
            *dst += phase * self.pulse.at(n - shift) * w * phasor(k as i64 * n, n_sc);
        }
    }

    /// Estimates every data symbol from `received` through receiver window `v`.
    ///
    /// For each `(p, m)` the windowed signal is evaluated on the body grid
    /// `ω = 2π(pM + r)/MN` by direct finite sums and combined as
    /// `Re{j^{−(p+m)} Σ_r c_r Z_p(2πr/MN) e^{jπmr/M}} / (MN·M)`, so a clean
    /// synchronized packet is returned unchanged.
    pub fn demodulate(&self, v: &Window, received: &ComplexSignal) -> DataMatrix {
        let mn = self.cfg.body_len() as i64;
        let m = self.cfg.m() as i64;
        let windowed: Vec<(i64, Complex64)> = v
            .iter()
            .filter(|&(_, t)| t != 0.0)
            .map(|(n, t)| (n, received.at(n) * t))
            .filter(|(_, x)| x.norm_sqr() != 0.0)
            .collect();

        let twiddle: Vec<Complex64> = (0..mn).map(|i| phasor(-i, mn)).collect();
        let spectrum: Vec<Complex64> = (0..mn)
            .map(|i| windowed.iter().map(|&(n, x)| x * twiddle[(i * n).rem_euclid(mn) as usize]).sum())
            .collect();

        let norm = (mn * m) as f64;
        let mut out = DataMatrix::for_config(&self.cfg);
        for p in 0..self.cfg.n() {
            for slot in 1..=self.cfg.num_slots() {
                let acc: Complex64 = self
                    .proto
                    .iter()
                    .map(|(r, c)| {
                        let bin = (p as i64 * m + r).rem_euclid(mn) as usize;
                        c * spectrum[bin] * phasor(slot as i64 * r, 2 * m)
                    })
                    .sum();
                let est = j_pow(-((p + slot) as i64)) * acc;
                out.set(p, slot, est.re / norm);
            }
        }
        out
    }
}
