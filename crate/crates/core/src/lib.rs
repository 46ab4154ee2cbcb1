//! Circular filter bank multicarrier (C-FBMC) packets and their analysis.
//!
//! The crate synthesizes CP-appended, circularly shaped multicarrier packets
//! built on the PHYDYAS prototype filter and evaluates them two ways:
//!
//! * [`spectrum`] computes the energy spectral density of each data symbol
//!   from the prototype's Fourier coefficients and the window spectrum, and
//!   cross-checks it against the DTFT of the synthesized samples.
//! * [`interference`] computes the leakage gain from an asynchronous data
//!   symbol (time offset `Δn`, frequency offset `Δf`) into every symbol the
//!   receiver estimates, both in closed form and with a brute-force
//!   transceiver.
//!
//! Index conventions: subcarriers `k` run `0..N`, real-symbol slots `l` run
//! `1..=2M`, and slot `l` is centered at sample `l·N/2` of the packet body,
//! which occupies samples `0..M·N` of the global time axis.

pub mod error;
pub mod interference;
pub mod prototype;
pub mod signal;
pub mod spectrum;
pub mod waveform;

pub use error::{Error, Result};
pub use interference::{
    combine_windows, flat_coverage, leakage_analytic, leakage_map, leakage_oracle, leakage_sync, leakage_timing_flat,
    CombinedWindow, LeakageMap,
};
pub use num_complex::Complex64;
pub use prototype::{check_sqrt_nyquist, design_phydyas, NyquistReport, PeriodicPulse, PrototypeCoefficients};
pub use signal::{dtft, signal_add, ComplexSignal, DataMatrix, OffsetSpec, PacketConfig};
pub use spectrum::{esd_packet, esd_symbol_analytic, esd_symbol_numeric, oob_metric, uniform_grid, Band, EsdCurve};
pub use waveform::{apply_offsets, make_rx_window, make_tx_window, Transceiver, Window, WindowKind};
