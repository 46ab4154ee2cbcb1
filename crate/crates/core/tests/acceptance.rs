//! Exit criteria for the library, run at the reference desk scale.
//!
//! Each criterion prints one `PASS`/`FAIL` line with the measured quantity.
//! The process exits non-zero if any criterion fails.

use std::process::ExitCode;

use cfbmc::prototype::{odd_series_sum, CheckStatus};
use cfbmc::{
    check_sqrt_nyquist, design_phydyas, esd_symbol_analytic, esd_symbol_numeric, leakage_analytic, leakage_map,
    leakage_oracle, leakage_timing_flat, make_rx_window, make_tx_window, oob_metric, uniform_grid, Band, DataMatrix,
    OffsetSpec, PacketConfig, Transceiver, Window, WindowKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [WindowKind; 2] = [WindowKind::Rectangular, WindowKind::RaisedCosine];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

/// N=16, 2M=16 real slots, CP of 8, roll-off 8 at both ends.
fn async_config() -> PacketConfig {
    PacketConfig::new(16, 8, 8).unwrap().with_rolloff(8, 8)
}

/// N=16, 2M=6 real slots, CP of 10, rectangular transmit window.
fn pulse_config() -> PacketConfig {
    PacketConfig::new(16, 3, 10).unwrap()
}

fn transceiver(cfg: PacketConfig) -> Transceiver {
    Transceiver::new(cfg, design_phydyas(cfg.m()).unwrap()).unwrap()
}

fn windows(cfg: &PacketConfig, kind: WindowKind) -> (Window, Window) {
    (make_tx_window(cfg, kind), make_rx_window(cfg, kind).unwrap())
}

/// Frequency offsets are referenced to the centre of the packet body.
fn offset(cfg: &PacketConfig, delta_n: i64, delta_f: f64) -> OffsetSpec {
    OffsetSpec::new(delta_n, delta_f).unwrap().with_phase_ref(cfg.body_len() as i64 / 2)
}

fn circular_distance(k: usize, p: usize, n: usize) -> usize {
    let d = (k as i64 - p as i64).rem_euclid(n as i64) as usize;
    d.min(n - d)
}

fn synchronized_orthogonality() -> Outcome {
    let cfg = async_config();
    let tx = transceiver(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for kind in KINDS {
        let (w, v) = windows(&cfg, kind);
        for _ in 0..20 {
            let k = rng.gen_range(0..cfg.n());
            let l = rng.gen_range(1..=cfg.num_slots());
            let map = leakage_map(&tx, &w, &v, k, l, &OffsetSpec::synchronized()).unwrap();
            for (p, m, g, _) in map.entries() {
                let want = if (p, m) == (k, l) { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
    }
    Outcome::new(worst < 1e-9, format!("max |map - delta| = {worst:.3e} (tol 1e-9)"))
}

fn dual_path_equivalence() -> Outcome {
    let cfg = async_config();
    let tx = transceiver(cfg);
    let n = cfg.n();
    let ncp = cfg.cp_len as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let kind = KINDS[rng.gen_range(0..2)];
        let (w, v) = windows(&cfg, kind);
        let k = rng.gen_range(0..n);
        let l = rng.gen_range(1..=cfg.num_slots());
        let p = rng.gen_range(0..n);
        let m = rng.gen_range(1..=cfg.num_slots());
        let dn = rng.gen_range(-ncp..=ncp);
        let df = rng.gen_range(-0.1..=0.1) / n as f64;
        let off = OffsetSpec::new(dn, df).unwrap();
        let a = leakage_analytic(&tx, &w, &v, k, l, p, m, &off).unwrap();
        let o = leakage_oracle(&tx, &w, &v, k, l, p, m, &off).unwrap();
        worst = worst.max((a - o).abs());
    }
    Outcome::new(worst < 1e-9, format!("max |analytic - oracle| = {worst:.3e} over 200 trials (tol 1e-9)"))
}

fn flat_coverage_confinement() -> Outcome {
    let cfg = async_config();
    let tx = transceiver(cfg);
    let (w, v) = windows(&cfg, WindowKind::Rectangular);
    let off = OffsetSpec::new(4, 0.0).unwrap();
    let (k, l) = (8, 1);
    let map = leakage_map(&tx, &w, &v, k, l, &off).unwrap();
    let mut loudest_far = f64::NEG_INFINITY;
    let mut worst_adjacent = 0.0f64;
    for (p, m, g, db) in map.entries() {
        match circular_distance(k, p, cfg.n()) {
            0 => {}
            1 => {
                let closed = leakage_timing_flat(tx.prototype(), cfg.n(), k, l, p, m, off.delta_n);
                worst_adjacent = worst_adjacent.max((g - closed).abs());
            }
            _ => loudest_far = loudest_far.max(db),
        }
    }
    Outcome::new(
        loudest_far < -200.0 && worst_adjacent < 1e-10,
        format!(
            "|k-p|>=2 peak {loudest_far:.1} dB (limit -200); |k-p|=1 closed-form deviation {worst_adjacent:.3e} (tol 1e-10)"
        ),
    )
}

fn windowing_suppression() -> Outcome {
    let cfg = async_config();
    let tx = transceiver(cfg);
    let (wr, vr) = windows(&cfg, WindowKind::Rectangular);
    let (wc, vc) = windows(&cfg, WindowKind::RaisedCosine);
    let mut passed = true;
    let mut parts = Vec::new();
    for (dn, df) in [(-4, 0.0), (0, 0.05 / 16.0)] {
        let off = offset(&cfg, dn, df);
        let rect = leakage_map(&tx, &wr, &vr, 8, 1, &off).unwrap();
        let rc = leakage_map(&tx, &wc, &vc, 8, 1, &off).unwrap();
        let band: Vec<(usize, usize)> =
            rect.entries().filter(|e| e.3 > -25.0 && e.3 <= -10.0).map(|e| (e.0, e.1)).collect();
        let dropped = band.iter().filter(|&&(p, m)| rc.gain_db(p, m) < -40.0).count();
        let fraction = if band.is_empty() { 0.0 } else { dropped as f64 / band.len() as f64 };
        let fewer = rc.count_above_db(-40.0) < rect.count_above_db(-40.0);
        passed &= fraction >= 0.8 && fewer;
        parts.push(format!(
            "off=({dn},{df:.5}): {dropped}/{} of (-25,-10] dB entries below -40 dB = {:.0}% (need 80%), above -40 dB {} -> {}",
            band.len(),
            100.0 * fraction,
            rect.count_above_db(-40.0),
            rc.count_above_db(-40.0)
        ));
    }
    Outcome::new(passed, parts.join("; "))
}

fn center_vs_edge_ordering() -> Outcome {
    let cfg = async_config();
    let tx = transceiver(cfg);
    let off = offset(&cfg, 0, 0.05 / 16.0);
    let mut passed = true;
    let mut parts = Vec::new();
    for kind in KINDS {
        let (w, v) = windows(&cfg, kind);
        let energy: Vec<f64> =
            [7, 3, 1].iter().map(|&l| leakage_map(&tx, &w, &v, 8, l, &off).unwrap().off_target_energy()).collect();
        passed &= energy[0] < energy[1] && energy[1] < energy[2];
        parts.push(format!(
            "{}: E(8,7)={:.4e} E(8,3)={:.4e} E(8,1)={:.4e}",
            kind.name(),
            energy[0],
            energy[1],
            energy[2]
        ));
    }
    Outcome::new(passed, parts.join("; "))
}

fn esd_dual_route() -> Outcome {
    let cfg = pulse_config();
    let tx = transceiver(cfg);
    let w = make_tx_window(&cfg, WindowKind::Rectangular);
    let grid = uniform_grid(4096);
    let k = 2;
    let band = Band::subcarrier(k, cfg.n());
    let mut worst = 0.0f64;
    let mut metrics = Vec::new();
    for l in 1..=cfg.num_slots() {
        let analytic = esd_symbol_analytic(&tx, &w, k, l, &grid).unwrap();
        let numeric = esd_symbol_numeric(&tx, &w, k, l, &grid).unwrap();
        let peak = analytic.peak();
        let dev = analytic.values.iter().zip(&numeric.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev / peak);
        metrics.push(oob_metric(&analytic, &band).unwrap());
    }
    let argmin = (1..=metrics.len()).min_by(|&a, &b| metrics[a - 1].total_cmp(&metrics[b - 1])).unwrap();
    let listed: Vec<String> = metrics.iter().map(|m| format!("{m:.1}")).collect();
    Outcome::new(
        worst < 1e-10 && argmin == cfg.m(),
        format!(
            "max relative deviation {worst:.3e} (tol 1e-10); OOB dB by l = [{}], argmin l={argmin} (want {})",
            listed.join(", "),
            cfg.m()
        ),
    )
}

fn prototype_identities() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for overlap in [1usize, 2, 4, 8] {
        let proto = design_phydyas(overlap).unwrap();
        let ov = overlap as i64;
        let symmetry = (1..ov).map(|r| (proto.get(r) - proto.get(-r)).abs()).fold(0.0, f64::max);
        let pairs = (1..ov).map(|r| (proto.get(r).powi(2) + proto.get(ov - r).powi(2) - 1.0).abs()).fold(0.0, f64::max);
        let energy = (proto.energy() - overlap as f64).abs();
        let odd = if overlap >= 2 {
            (-2 * ov..=2 * ov).flat_map(|d| [1, -1].map(|s| odd_series_sum(&proto, s, d).abs())).fold(0.0, f64::max)
        } else {
            0.0
        };
        let report = check_sqrt_nyquist(&proto, 16);
        let report_ok = report.checks.iter().all(|c| c.status != CheckStatus::Fail);
        let ok = symmetry == 0.0 && pairs < 1e-9 && energy < 1e-9 && odd < 1e-10 && report_ok;
        passed &= ok;
        parts.push(format!("M={overlap}: pairs {pairs:.1e}, energy {energy:.1e}, odd series {odd:.1e}"));
    }
    Outcome::new(passed, parts.join("; "))
}

fn perfect_reconstruction() -> Outcome {
    let cfg = async_config();
    let tx = transceiver(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for kind in KINDS {
        let (w, v) = windows(&cfg, kind);
        for _ in 0..1000 {
            let data = DataMatrix::from_fn(cfg.n(), cfg.num_slots(), |_, _| rng.gen_range(-1.0..=1.0));
            let packet = tx.modulate_packet(&data, &w).unwrap();
            worst = worst.max(tx.demodulate(&v, &packet).max_abs_diff(&data));
        }
    }
    Outcome::new(worst < 1e-9, format!("max |estimate - data| = {worst:.3e} over 2x1000 packets (tol 1e-9)"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("synchronized orthogonality", synchronized_orthogonality),
        ("dual-path equivalence", dual_path_equivalence),
        ("flat-coverage confinement", flat_coverage_confinement),
        ("windowing suppression", windowing_suppression),
        ("center-vs-edge ordering", center_vs_edge_ordering),
        ("ESD dual route and minimal OOB", esd_dual_route),
        ("prototype identities", prototype_identities),
        ("perfect reconstruction", perfect_reconstruction),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        if !outcome.passed {
            failures += 1;
        }
        println!("criterion {} [{name}]: {verdict} | {}", i + 1, outcome.detail);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
