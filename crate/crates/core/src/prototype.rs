//! PHYDYAS prototype filter.
//!
//! The prototype `g[n]` of length `MN` is described by its Fourier series
//! coefficients `c_r`, `r = −(M−1)..=(M−1)`:
//!
//! ```text
//! g[n] = Σ_r c_r · e^{j2π r n / (MN)}
//! ```
//!
//! [`design_phydyas`] builds the coefficients from two sets of constraints.
//! The square-root-Nyquist pairs `c_0 = 1`, `c_r² + c_{M−r}² = 1` are
//! enforced exactly by writing each pair as `(cos θ_r, sin θ_r)`, which leaves
//! `⌊(M−1)/2⌋` free angles. Those are fixed by requiring the continuous
//! pulse `Σ_r c_r cos(2π r t / M)` and its first even derivatives to vanish at
//! the block edge `t = M/2`:
//!
//! ```text
//! Σ_r (−1)^r r^{2q} c_r = 0,   q = 0..⌊(M−1)/2⌋−1
//! ```
//!
//! For `M ≤ 4` this has the well-known closed forms (`M = 3`: `c_1 = 0.911438`,
//! `M = 4`: `c_1 = 0.971960`, `c_3 = 0.235147`); larger `M` is solved by
//! Newton iteration.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deviation allowed by [`check_sqrt_nyquist`].
pub const NYQUIST_TOL: f64 = 1e-9;

/// Threshold on `Im g[n]` above which the coefficients are rejected.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Fourier coefficients `c_r` of the prototype filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoefficientDump")]
pub struct PrototypeCoefficients {
    #[serde(rename = "M")]
    overlap: usize,
    /// `c_{−(M−1)} ..= c_{M−1}`.
    c: Vec<f64>,
}

#[derive(Deserialize)]
struct CoefficientDump {
    #[serde(rename = "M")]
    overlap: usize,
    c: Vec<f64>,
}

impl TryFrom<CoefficientDump> for PrototypeCoefficients {
    type Error = Error;

    fn try_from(raw: CoefficientDump) -> Result<Self> {
        Self::from_table(raw.overlap, raw.c)
    }
}

impl PrototypeCoefficients {
    /// Wraps an explicit table `c_{−(M−1)} ..= c_{M−1}`.
    ///
    /// No symmetry is imposed; use [`check_sqrt_nyquist`] to validate.
    pub fn from_table(overlap: usize, c: Vec<f64>) -> Result<Self> {
        if overlap == 0 {
            return Err(Error::Design(0, "overlap factor must be positive".into()));
        }
        if c.len() != 2 * overlap - 1 {
            return Err(Error::Coefficients { got: c.len(), want: 2 * overlap - 1 });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Design(overlap, "non-finite coefficient".into()));
        }
        Ok(Self { overlap, c })
    }

    /// Builds the symmetric table from `c_0 ..= c_{M−1}`.
    pub fn from_half(half: &[f64]) -> Result<Self> {
        let m = half.len();
        let c = half.iter().rev().chain(half.iter().skip(1)).copied().collect();
        Self::from_table(m, c)
    }

    /// Overlap factor `M`.
    pub fn overlap(&self) -> usize {
        self.overlap
    }

    /// `c_r`, zero outside `|r| < M`.
    pub fn get(&self, r: i64) -> f64 {
        let idx = r + self.overlap as i64 - 1;
        if idx < 0 || idx as usize >= self.c.len() {
            0.0
        } else {
            self.c[idx as usize]
        }
    }

    /// `(r, c_r)` for `r = −(M−1)..=(M−1)`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let first = -(self.overlap as i64 - 1);
        self.c.iter().enumerate().map(move |(i, &c)| (first + i as i64, c))
    }

    pub fn table(&self) -> &[f64] {
        &self.c
    }

    /// `Σ_r c_r²`, the unnormalized synchronized self-gain.
    pub fn energy(&self) -> f64 {
        self.c.iter().map(|c| c * c).sum()
    }

    /// Adds `delta` to `c_1` and `c_{−1}` (or to `c_0` when `M = 1`).
    pub fn perturbed(&self, delta: f64) -> Self {
        let mut out = self.clone();
        let mid = self.overlap - 1;
        if self.overlap == 1 {
            out.c[mid] += delta;
        } else {
            out.c[mid - 1] += delta;
            out.c[mid + 1] += delta;
        }
        out
    }
}

/// Designs the PHYDYAS prototype with overlap factor `overlap`.
pub fn design_phydyas(overlap: usize) -> Result<PrototypeCoefficients> {
    let m = overlap;
    if m == 0 {
        return Err(Error::Design(0, "overlap factor must be positive".into()));
    }
    let free = (m - 1) / 2;
    let theta = if free == 0 { Vec::new() } else { solve_edge_constraints(m, free)? };
    let half = half_from_angles(m, &theta);
    PrototypeCoefficients::from_half(&half)
}

fn half_from_angles(m: usize, theta: &[f64]) -> Vec<f64> {
    let mut half = vec![0.0; m];
    half[0] = 1.0;
    for (i, &t) in theta.iter().enumerate() {
        half[i + 1] = t.cos();
        half[m - i - 1] = t.sin();
    }
    if m.is_multiple_of(2) && m >= 2 {
        half[m / 2] = FRAC_1_SQRT_2;
    }
    half
}

// Row q is scaled by M^{-2q} to keep the system well conditioned.
fn edge_residual(m: usize, half: &[f64], free: usize) -> DVector<f64> {
    DVector::from_fn(free, |q, _| {
        let scale = (m as f64).powi(-2 * q as i32);
        let mut f = if q == 0 { 1.0 } else { 0.0 };
        for (r, &c) in half.iter().enumerate().skip(1) {
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            f += 2.0 * sign * (r as f64).powi(2 * q as i32) * c * scale;
        }
        f
    })
}

fn edge_jacobian(m: usize, theta: &[f64]) -> DMatrix<f64> {
    let free = theta.len();
    DMatrix::from_fn(free, free, |q, i| {
        let scale = (m as f64).powi(-2 * q as i32);
        let lo = i + 1;
        let hi = m - lo;
        let sign = |r: usize| if r.is_multiple_of(2) { 1.0 } else { -1.0 };
        let d_lo = -theta[i].sin();
        let d_hi = theta[i].cos();
        2.0 * scale
            * (sign(lo) * (lo as f64).powi(2 * q as i32) * d_lo + sign(hi) * (hi as f64).powi(2 * q as i32) * d_hi)
    })
}

// The system has several solution branches. Continuation on
// F(θ) = (1 − t)·F(θ₀) with t stepping from 0 to 1 tracks the branch that
// starts at the raised-cosine guess, which is the smooth, monotone one.
const CONTINUATION_STEPS: usize = 20;

fn solve_edge_constraints(m: usize, free: usize) -> Result<Vec<f64>> {
    let mut theta: Vec<f64> = (1..=free).map(|r| PI * r as f64 / (2.0 * m as f64)).collect();
    let start = edge_residual(m, &half_from_angles(m, &theta), free);
    let mut err = f64::INFINITY;
    for step in 1..=CONTINUATION_STEPS {
        let t = step as f64 / CONTINUATION_STEPS as f64;
        for _ in 0..50 {
            let f = edge_residual(m, &half_from_angles(m, &theta), free) - &start * (1.0 - t);
            err = f.amax();
            if err < 1e-14 {
                break;
            }
            let delta = edge_jacobian(m, &theta)
                .lu()
                .solve(&f)
                .ok_or_else(|| Error::Design(m, "singular Jacobian in edge-constraint solve".into()))?;
            for (th, d) in theta.iter_mut().zip(delta.iter()) {
                *th -= d;
            }
        }
    }
    if err.is_nan() || err > 1e-12 {
        return Err(Error::Design(m, format!("edge constraints not met (residual {err:e})")));
    }
    Ok(theta)
}

fn unit(turns_num: i64, turns_den: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * turns_num.rem_euclid(turns_den) as f64 / turns_den as f64)
}

fn complex_response(p: &PrototypeCoefficients, num_subcarriers: usize) -> Vec<Complex64> {
    let mn = (p.overlap() * num_subcarriers) as i64;
    (0..mn).map(|n| p.iter().map(|(r, c)| c * unit(r * n, mn)).sum()).collect()
}

/// Samples `g[n]` for `n = 0..MN`.
pub fn impulse_response(p: &PrototypeCoefficients, num_subcarriers: usize) -> Result<Vec<f64>> {
    let g = complex_response(p, num_subcarriers);
    let residue = g.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if residue > IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue(residue));
    }
    Ok(g.into_iter().map(|v| v.re).collect())
}

/// The `MN`-periodic extension `h[n]` of the prototype.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPulse {
    period: Vec<f64>,
}

impl PeriodicPulse {
    pub fn new(p: &PrototypeCoefficients, num_subcarriers: usize) -> Result<Self> {
        Ok(Self { period: impulse_response(p, num_subcarriers)? })
    }

    pub fn period(&self) -> usize {
        self.period.len()
    }

    pub fn at(&self, n: i64) -> f64 {
        self.period[n.rem_euclid(self.period.len() as i64) as usize]
    }

    /// One period, `g[0..MN]`.
    pub fn one_period(&self) -> &[f64] {
        &self.period
    }
}

/// `h[n]` over `support`.
pub fn periodic_pulse(
    p: &PrototypeCoefficients,
    num_subcarriers: usize,
    support: std::ops::Range<i64>,
) -> Result<Vec<f64>> {
    let h = PeriodicPulse::new(p, num_subcarriers)?;
    Ok(support.map(|n| h.at(n)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub status: CheckStatus,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NyquistReport {
    pub passed: bool,
    pub max_deviation: f64,
    pub checks: Vec<IdentityCheck>,
}

impl NyquistReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

/// `Σ_r c_r·c_{r+sM}·sin(πrd/M)` for even `d`, the cosine form for odd `d`.
pub fn odd_series_sum(p: &PrototypeCoefficients, s: i64, d: i64) -> f64 {
    let m = p.overlap() as i64;
    p.iter()
        .map(|(r, c)| {
            let arg = PI * (r * d) as f64 / m as f64;
            let t = if d % 2 == 0 { arg.sin() } else { arg.cos() };
            c * p.get(r + s * m) * t
        })
        .sum()
}

/// Verifies the square-root-Nyquist identities of `p`.
///
/// Coefficient checks: even symmetry, `c_0 = 1`, `c_r² + c_{M−r}² = 1`,
/// `Σ c_r² = M`, and the odd-series cancellations behind synchronized
/// orthogonality between adjacent subcarriers. Time-domain check: the
/// circular autocorrelation of `g` vanishes at every nonzero lag `qN`.
pub fn check_sqrt_nyquist(p: &PrototypeCoefficients, num_subcarriers: usize) -> NyquistReport {
    let m = p.overlap() as i64;
    let mut checks = Vec::new();
    let mut push = |name: &str, applicable: bool, dev: f64| {
        let status = if !applicable {
            CheckStatus::Skipped
        } else if dev <= NYQUIST_TOL {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        checks.push(IdentityCheck {
            name: name.to_string(),
            status,
            max_deviation: if applicable { dev } else { 0.0 },
        });
    };

    let symmetry = (1..m).map(|r| (p.get(r) - p.get(-r)).abs()).fold(0.0, f64::max);
    push("even_symmetry", true, symmetry);
    push("unit_center", true, (p.get(0) - 1.0).abs());

    let pairs = (1..m)
        .flat_map(|r| [r, -r])
        .map(|r| {
            let partner = if r > 0 { m - r } else { -m - r };
            (p.get(r).powi(2) + p.get(partner).powi(2) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    push("nyquist_pairs", m >= 2, pairs);
    push("energy_equals_overlap", true, (p.energy() - m as f64).abs());

    let odd = (-2 * m..=2 * m).flat_map(|d| [1, -1].map(|s| odd_series_sum(p, s, d).abs())).fold(0.0, f64::max);
    push("odd_series_cancellation", m >= 2, odd);

    let g = complex_response(p, num_subcarriers);
    let mn = g.len();
    let n = num_subcarriers;
    let lag_dev = (1..m as usize)
        .map(|q| {
            let acc: Complex64 = (0..mn).map(|i| g[i] * g[(i + q * n) % mn].conj()).sum();
            acc.norm() / mn as f64
        })
        .fold(0.0, f64::max);
    push("time_domain_nyquist", m >= 2, lag_dev);

    let max_deviation = checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    NyquistReport { passed, max_deviation, checks }
}
