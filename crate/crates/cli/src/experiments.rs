use std::fs;
use std::path::Path;

use cfbmc::prototype::{CheckStatus, NYQUIST_TOL};
use cfbmc::waveform::FOLD_TOL;
use cfbmc::{
    check_sqrt_nyquist, design_phydyas, esd_packet, esd_symbol_analytic, flat_coverage, leakage_analytic, leakage_map,
    leakage_oracle, make_rx_window, make_tx_window, oob_metric, uniform_grid, Band, DataMatrix, OffsetSpec,
    PrototypeCoefficients, Transceiver, Window, WindowKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{esd_csv, leakage_csv, signal_csv, window_csv, write_json, write_text};
use crate::CliError;

/// dB level at which exported leakage maps are clamped for display.
pub const DISPLAY_CLAMP_DB: f64 = -60.0;

/// Tolerance of the transceiver-level validation checks.
pub const TRANSCEIVER_TOL: f64 = 1e-9;

struct Setup {
    proto: PrototypeCoefficients,
    tx: Transceiver,
    w: Window,
    v: Window,
}

fn setup(cfg: &ExperimentConfig, proto: PrototypeCoefficients) -> Result<Setup, CliError> {
    let tx = Transceiver::new(cfg.packet, proto.clone())?;
    let w = make_tx_window(&cfg.packet, cfg.tx_window);
    let v = make_rx_window(&cfg.packet, cfg.rx_window)?;
    Ok(Setup { proto, tx, w, v })
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

#[derive(Debug, Serialize)]
struct WindowEntry {
    kind: WindowKind,
    start: i64,
    len: usize,
    file: String,
}

#[derive(Debug, Serialize)]
pub struct CurveEntry {
    pub k: usize,
    pub l: usize,
    pub window: WindowKind,
    pub pulse_file: String,
    pub esd_file: String,
    pub oob_db: f64,
}

#[derive(Debug, Serialize)]
struct SpectrumManifest<'a> {
    experiment: ExperimentKind,
    config: &'a ExperimentConfig,
    prototype: &'a PrototypeCoefficients,
    tx_window: WindowEntry,
    rx_window: WindowEntry,
    /// OOB metric of every slot on the subcarrier taken together.
    packet_oob_db: f64,
    curves: Vec<CurveEntry>,
}

/// Pulse and ESD files for each configured slot on one subcarrier.
pub fn run_spectrum(cfg: &ExperimentConfig) -> Result<Vec<CurveEntry>, CliError> {
    let s = setup(cfg, design_phydyas(cfg.packet.m())?)?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;

    let window_entry = |w: &Window, name: &str| -> Result<WindowEntry, CliError> {
        let file = write_text(dir, name, &window_csv(w))?;
        Ok(WindowEntry { kind: w.kind, start: w.start, len: w.len(), file })
    };
    let tx_window = window_entry(&s.w, "window_tx.csv")?;
    let rx_window = window_entry(&s.v, "window_rx.csv")?;

    let k = cfg.spectrum.subcarrier;
    let grid = uniform_grid(cfg.spectrum.grid_size);
    let band = Band::subcarrier(k, cfg.packet.n());
    let mut curves = Vec::with_capacity(cfg.spectrum.symbols.len());
    for &l in &cfg.spectrum.symbols {
        let pulse = s.tx.modulate_symbol(k, l, 1.0, &s.w)?;
        let esd = esd_symbol_analytic(&s.tx, &s.w, k, l, &grid)?;
        curves.push(CurveEntry {
            k,
            l,
            window: cfg.tx_window,
            pulse_file: write_text(dir, &format!("pulse_k{k}_l{l}.csv"), &signal_csv(&pulse))?,
            esd_file: write_text(dir, &format!("esd_k{k}_l{l}.csv"), &esd_csv(&esd))?,
            oob_db: oob_metric(&esd, &band)?,
        });
    }

    let packet = esd_packet(&s.tx, &s.w, &[k], &grid)?;
    let manifest = SpectrumManifest {
        experiment: ExperimentKind::Spectrum,
        config: cfg,
        prototype: &s.proto,
        tx_window,
        rx_window,
        packet_oob_db: oob_metric(&packet, &band)?,
        curves,
    };
    write_json(dir, "manifest.json", &manifest)?;
    Ok(manifest.curves)
}

#[derive(Debug, Serialize)]
struct Windows {
    tx: WindowKind,
    rx: WindowKind,
}

#[derive(Debug, Serialize)]
struct Source {
    k: usize,
    l: usize,
}

#[derive(Debug, Serialize)]
struct MapMetadata<'a> {
    source: Source,
    offsets: OffsetSpec,
    windows: Windows,
    flat_coverage: bool,
    off_target_energy: f64,
    clamp_db: f64,
    csv: String,
    config: &'a ExperimentConfig,
}

#[derive(Debug, Serialize)]
pub struct MapEntry {
    pub k: usize,
    pub l: usize,
    pub offset_index: usize,
    pub csv: String,
    pub json: String,
}

#[derive(Debug, Serialize)]
struct LeakageManifest<'a> {
    experiment: ExperimentKind,
    config: &'a ExperimentConfig,
    maps: &'a [MapEntry],
}

/// One map per `(source, offset)` pair, sources outermost.
pub fn run_leakage(cfg: &ExperimentConfig) -> Result<Vec<MapEntry>, CliError> {
    let s = setup(cfg, design_phydyas(cfg.packet.m())?)?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;

    let mut maps = Vec::new();
    for &(k, l) in &cfg.leakage.sources {
        for (i, pair) in cfg.leakage.offsets.iter().enumerate() {
            let off = cfg.offset_spec(pair);
            let map = leakage_map(&s.tx, &s.w, &s.v, k, l, &off)?;
            let stem = format!("leakage_k{k}_l{l}_off{i}");
            let csv = write_text(dir, &format!("{stem}.csv"), &leakage_csv(&map))?;
            let meta = MapMetadata {
                source: Source { k, l },
                offsets: off,
                windows: Windows { tx: cfg.tx_window, rx: cfg.rx_window },
                flat_coverage: flat_coverage(&s.w, &s.v, off.delta_n),
                off_target_energy: map.off_target_energy(),
                clamp_db: DISPLAY_CLAMP_DB,
                csv: csv.clone(),
                config: cfg,
            };
            let json = write_json(dir, &format!("{stem}.json"), &meta)?;
            maps.push(MapEntry { k, l, offset_index: i, csv, json });
        }
    }
    write_json(
        dir,
        "manifest.json",
        &LeakageManifest { experiment: ExperimentKind::Leakage, config: cfg, maps: &maps },
    )?;
    Ok(maps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationCheck {
    pub name: String,
    pub status: CheckStatus,
    pub max_deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport<'a> {
    pub passed: bool,
    pub checks: Vec<ValidationCheck>,
    pub config: &'a ExperimentConfig,
}

impl ValidationReport<'_> {
    pub fn failed(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

fn measured(name: &str, deviation: f64, tolerance: f64) -> ValidationCheck {
    let status = if deviation <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
    ValidationCheck { name: name.into(), status, max_deviation: deviation, tolerance }
}

fn random_slot(rng: &mut ChaCha8Rng, cfg: &ExperimentConfig) -> (usize, usize) {
    (rng.gen_range(0..cfg.packet.n()), rng.gen_range(1..=cfg.packet.num_slots()))
}

/// Runs the prototype identities and the transceiver-level invariants.
///
/// Trial counts scale with `validate.trials`; every draw comes from a
/// ChaCha stream seeded by `validate.seed`.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<ValidationReport<'_>, CliError> {
    let mut proto = design_phydyas(cfg.packet.m())?;
    if cfg.validate.inject_coefficient_error != 0.0 {
        proto = proto.perturbed(cfg.validate.inject_coefficient_error);
    }
    let s = setup(cfg, proto)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.validate.seed);
    let trials = cfg.validate.trials;
    let n = cfg.packet.n();

    let mut checks: Vec<ValidationCheck> = check_sqrt_nyquist(&s.proto, n)
        .checks
        .into_iter()
        .map(|c| ValidationCheck {
            name: c.name,
            status: c.status,
            max_deviation: c.max_deviation,
            tolerance: NYQUIST_TOL,
        })
        .collect();

    checks.push(measured("rx_fold_to_one", s.v.fold_deviation(cfg.packet.body_len()), FOLD_TOL));

    let mut orth = 0.0f64;
    for _ in 0..trials.div_ceil(50) {
        let (k, l) = random_slot(&mut rng, cfg);
        let map = leakage_map(&s.tx, &s.w, &s.v, k, l, &OffsetSpec::synchronized())?;
        for (p, m, g, _) in map.entries() {
            let want = if (p, m) == (k, l) { 1.0 } else { 0.0 };
            orth = orth.max((g - want).abs());
        }
    }
    checks.push(measured("synchronized_orthogonality", orth, TRANSCEIVER_TOL));

    let ncp = cfg.packet.cp_len as i64;
    let mut dual = 0.0f64;
    for _ in 0..trials {
        let (k, l) = random_slot(&mut rng, cfg);
        let (p, m) = random_slot(&mut rng, cfg);
        let dn = rng.gen_range(-ncp..=ncp);
        let df = rng.gen_range(-0.1..=0.1) / n as f64;
        let off = OffsetSpec::new(dn, df)?;
        let a = leakage_analytic(&s.tx, &s.w, &s.v, k, l, p, m, &off)?;
        let o = leakage_oracle(&s.tx, &s.w, &s.v, k, l, p, m, &off)?;
        dual = dual.max((a - o).abs());
    }
    checks.push(measured("dual_path_equivalence", dual, TRANSCEIVER_TOL));

    let mut recon = 0.0f64;
    for _ in 0..trials {
        let data = DataMatrix::from_fn(n, cfg.packet.num_slots(), |_, _| rng.gen_range(-1.0..=1.0));
        let packet = s.tx.modulate_packet(&data, &s.w)?;
        recon = recon.max(s.tx.demodulate(&s.v, &packet).max_abs_diff(&data));
    }
    checks.push(measured("perfect_reconstruction", recon, TRANSCEIVER_TOL));

    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    let report = ValidationReport { passed, checks, config: cfg };
    prepare_dir(&cfg.output_dir)?;
    write_json(&cfg.output_dir, "validate_report.json", &report)?;
    Ok(report)
}
