//! Energy spectral densities of individual data symbols and whole packets.
//!
//! The analytic route writes the spectrum of `x_{k,l}` as a weighted sum of
//! shifted window spectra,
//!
//! ```text
//! E_{k,l}(ω) = σ_a² · | Σ_r c_r e^{−jπlr/M} W(ω − 2π(r + kM)/MN) |²
//! ```
//!
//! while the numeric route takes `|DTFT|²` of the synthesized samples. Both
//! evaluate exact finite sums at arbitrary `ω`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::waveform::{phasor, Transceiver, Window};

/// Level reported for exact zeros.
pub const ZERO_DB: f64 = -300.0;
/// Display floor for nonzero curve values.
pub const CURVE_FLOOR_DB: f64 = -120.0;
pub const DEFAULT_GRID: usize = 4096;

/// `size` uniform frequencies covering `[−π, π)`.
pub fn uniform_grid(size: usize) -> Vec<f64> {
    (0..size).map(|i| -PI + 2.0 * PI * i as f64 / size as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsdCurve {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

impl EsdCurve {
    /// `|DTFT|²` of `s` on `grid`.
    pub fn of_signal(s: &ComplexSignal, grid: &[f64]) -> Self {
        Self { omega: grid.to_vec(), values: grid.iter().map(|&w| s.dtft(w).norm_sqr()).collect() }
    }

    /// Multiplies by the symbol variance `σ_a²`.
    pub fn scaled(mut self, sigma2: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= sigma2);
        self
    }

    pub fn db(&self) -> Vec<f64> {
        self.values.iter().map(|&v| to_db(v)).collect()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `(1/2π)∫E(ω)dω` by the trapezoidal rule over a uniform grid, closing
    /// the period.
    pub fn energy(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let step = if self.omega.len() > 1 { self.omega[1] - self.omega[0] } else { 2.0 * PI };
        // Periodic trapezoid over a full uniform period reduces to the plain sum.
        self.values.iter().sum::<f64>() * step / (2.0 * PI)
    }
}

/// `10·log10(v)` floored at [`CURVE_FLOOR_DB`], with exact zeros at [`ZERO_DB`].
pub fn to_db(v: f64) -> f64 {
    if v <= 0.0 {
        ZERO_DB
    } else {
        (10.0 * v.log10()).max(CURVE_FLOOR_DB)
    }
}

/// Circular frequency band `center ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub center: f64,
    pub half_width: f64,
}

impl Band {
    pub fn new(center: f64, half_width: f64) -> Self {
        Self { center, half_width }
    }

    /// Subcarrier `k` plus one subcarrier spacing on either side.
    pub fn subcarrier(k: usize, num_subcarriers: usize) -> Self {
        let spacing = 2.0 * PI / num_subcarriers as f64;
        Self { center: spacing * k as f64, half_width: spacing }
    }

    /// Contiguous allocation `first..=last` plus one spacing on either side.
    pub fn allocation(first: usize, last: usize, num_subcarriers: usize) -> Self {
        let spacing = 2.0 * PI / num_subcarriers as f64;
        Self {
            center: spacing * (first + last) as f64 / 2.0,
            half_width: spacing * ((last - first) as f64 / 2.0 + 1.0),
        }
    }

    pub fn contains(&self, omega: f64) -> bool {
        let d = (omega - self.center).rem_euclid(2.0 * PI);
        let d = d.min(2.0 * PI - d);
        d <= self.half_width + 1e-12
    }
}

fn window_spectrum_shifted(w: &Window, grid: &[f64], shift: f64) -> Vec<Complex64> {
    grid.iter().map(|&om| w.dtft(om - shift)).collect()
}

/// Per-slot coefficients `c_r e^{−jπlr/M}` combined with shared window spectra.
fn combine(tx: &Transceiver, l: usize, spectra: &[(i64, Vec<Complex64>)], grid_len: usize) -> Vec<f64> {
    let m = tx.config().m() as i64;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid_len];
    for (r, spec) in spectra {
        let coef = tx.prototype().get(*r) * phasor(-(l as i64) * r, 2 * m);
        for (a, s) in acc.iter_mut().zip(spec) {
            *a += coef * s;
        }
    }
    acc.into_iter().map(|v| v.norm_sqr()).collect()
}

fn shifted_spectra(tx: &Transceiver, w: &Window, k: usize, grid: &[f64]) -> Vec<(i64, Vec<Complex64>)> {
    let cfg = tx.config();
    let mn = cfg.body_len() as f64;
    let km = (k * cfg.m()) as i64;
    tx.prototype().iter().map(|(r, _)| (r, window_spectrum_shifted(w, grid, 2.0 * PI * (r + km) as f64 / mn))).collect()
}

/// ESD of symbol `(k, l)` from the prototype coefficients and `W(ω)`, `σ_a² = 1`.
pub fn esd_symbol_analytic(tx: &Transceiver, w: &Window, k: usize, l: usize, grid: &[f64]) -> Result<EsdCurve> {
    tx.config().check_indices(k, l)?;
    let spectra = shifted_spectra(tx, w, k, grid);
    Ok(EsdCurve { omega: grid.to_vec(), values: combine(tx, l, &spectra, grid.len()) })
}

/// ESD of symbol `(k, l)` as `|DTFT(x_{k,l})|²` of the synthesized samples.
pub fn esd_symbol_numeric(tx: &Transceiver, w: &Window, k: usize, l: usize, grid: &[f64]) -> Result<EsdCurve> {
    let x = tx.modulate_symbol(k, l, 1.0, w)?;
    Ok(EsdCurve::of_signal(&x, grid))
}

/// Packet ESD for independent unit-variance symbols on `subcarriers`.
pub fn esd_packet(tx: &Transceiver, w: &Window, subcarriers: &[usize], grid: &[f64]) -> Result<EsdCurve> {
    let mut total = vec![0.0; grid.len()];
    for &k in subcarriers {
        tx.config().check_indices(k, 1)?;
        let spectra = shifted_spectra(tx, w, k, grid);
        for l in 1..=tx.config().num_slots() {
            for (t, v) in total.iter_mut().zip(combine(tx, l, &spectra, grid.len())) {
                *t += v;
            }
        }
    }
    Ok(EsdCurve { omega: grid.to_vec(), values: total })
}

/// Out-of-band to in-band energy ratio in dB.
pub fn oob_metric(curve: &EsdCurve, band: &Band) -> Result<f64> {
    let mut inside = 0.0;
    let mut outside = 0.0;
    let mut hits = 0usize;
    for (&w, &v) in curve.omega.iter().zip(&curve.values) {
        if band.contains(w) {
            inside += v;
            hits += 1;
        } else {
            outside += v;
        }
    }
    if hits == 0 {
        return Err(Error::EmptyBand);
    }
    if outside == 0.0 {
        return Ok(ZERO_DB);
    }
    if inside == 0.0 {
        return Ok(-ZERO_DB);
    }
    Ok(10.0 * (outside / inside).log10())
}
