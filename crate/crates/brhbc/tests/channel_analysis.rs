use std::path::Path;

use brhbc::channel::{
    capacity_with_psd, dbm_to_watts, superpose_air_path, dominant_peaks, energy_per_bit, find_features, first_notch,
    shannon_capacity, sweep_gain, AirPath, ChannelResponse, FeatureKind, FrequencySweep,
    NoiseModel, Spacing, DEFAULT_PROMINENCE_DB,
};
use brhbc::network::{DeviceGeometry, TerminationNetwork};
use brhbc::scenario::Scenario;
use brhbc::{Cx, Error};
use proptest::prelude::*;

fn scenario(name: &str) -> Scenario {
    Scenario::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    FrequencySweep::new(lo, hi, n, Spacing::Log).unwrap().frequencies()
}

/// Second-order band-pass with centre `f0` and quality factor `q`.
fn resonance(freqs: &[f64], f0: f64, q: f64) -> ChannelResponse {
    let g = freqs
        .iter()
        .map(|&f| Cx::new(1e-2, 0.0) / Cx::new(1.0, q * (f / f0 - f0 / f)))
        .collect();
    ChannelResponse::from_complex(freqs.to_vec(), g, 1.0)
}

fn flat(freqs: &[f64], g: f64) -> ChannelResponse {
    ChannelResponse::from_complex(
        freqs.to_vec(),
        vec![Cx::new(g, 0.0); freqs.len()],
        1.0,
    )
}

#[test]
fn synthetic_resonance_is_recovered() {
    let freqs = grid(20e6, 250e6, 1024);
    let feats = find_features(&resonance(&freqs, 70e6, 5.0), DEFAULT_PROMINENCE_DB);
    assert_eq!(feats.len(), 1);
    let p = feats[0];
    assert_eq!(p.kind, FeatureKind::Peak);
    let step = freqs[p.index + 1] - freqs[p.index];
    assert!((p.f_c - 70e6).abs() <= step, "{}", p.f_c);
    assert!((p.q / 5.0 - 1.0).abs() < 0.1, "Q = {}", p.q);
}

#[test]
fn monotone_response_has_no_features() {
    let freqs = grid(1e5, 1e9, 256);
    let g = freqs.iter().map(|f| Cx::new(f * 1e-9, 0.0)).collect();
    let resp = ChannelResponse::from_complex(freqs, g, 1.0);
    assert!(find_features(&resp, DEFAULT_PROMINENCE_DB).is_empty());
}

#[test]
fn too_few_points_yields_nothing() {
    let freqs = grid(20e6, 250e6, 16);
    assert!(find_features(&resonance(&freqs, 70e6, 5.0), DEFAULT_PROMINENCE_DB).is_empty());
}

#[test]
fn unit_snr_over_one_hertz() {
    let noise = NoiseModel::default();
    let resp = flat(&[1e6, 1e6 + 0.5, 1e6 + 1.0], 1e-3);
    let psd = noise.psd().unwrap() / 1e-6;
    let (c, snr_db) = capacity_with_psd(&resp, &noise, psd, (1e6, 1e6 + 1.0)).unwrap();
    assert!((c - 1.0).abs() < 1e-9);
    assert!(snr_db.abs() < 1e-9);
}

#[test]
fn flat_snr_formula() {
    let noise = NoiseModel::default();
    let freqs = grid(50e6, 100e6, 64);
    let resp = flat(&freqs, 1e-2);
    let psd = 1e3 * noise.psd().unwrap() / 1e-4;
    let (c, _) = capacity_with_psd(&resp, &noise, psd, (50e6, 100e6)).unwrap();
    let want = 50e6 * 1001f64.log2();
    assert!((c / want - 1.0).abs() < 1e-12);
    assert!((c - 4.98e8).abs() < 1e6);
}

#[test]
fn capacity_errors() {
    let noise = NoiseModel::default();
    let resp = flat(&grid(1e6, 1e8, 32), 1e-3);
    assert!(matches!(
        shannon_capacity(&resp, &noise, 0.0, (5e7, 5e7)),
        Err(Error::EmptyBand)
    ));
    assert!(shannon_capacity(&resp, &noise, 0.0, (5e5, 5e7)).is_err());
    assert!(matches!(energy_per_bit(1e-3, 0.0), Err(Error::ZeroCapacity)));
}

#[test]
fn energy_per_bit_examples() {
    assert!((energy_per_bit(1e-3, 1e9).unwrap() - 1e-12).abs() < 1e-27);
    assert_eq!(energy_per_bit(0.0, 123.0).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn capacity_grows_with_power(p1 in -40.0f64..20.0, dp in 0.0f64..20.0) {
        let noise = NoiseModel::default();
        let resp = resonance(&grid(1e5, 1e9, 200), 70e6, 3.0);
        let a = shannon_capacity(&resp, &noise, p1, (30e6, 300e6)).unwrap();
        let b = shannon_capacity(&resp, &noise, p1 + dp, (30e6, 300e6)).unwrap();
        prop_assert!(b.capacity_bits_per_s >= a.capacity_bits_per_s);
    }

    #[test]
    fn superset_band_never_loses(lo in 1e6f64..5e7, w in 1e5f64..1e8, extra_lo in 0.0f64..5e5, extra_hi in 0.0f64..1e8) {
        let noise = NoiseModel::default();
        let resp = resonance(&grid(1e5, 1e9, 300), 70e6, 3.0);
        let psd = 1e-12;
        let (a, _) = capacity_with_psd(&resp, &noise, psd, (lo, lo + w)).unwrap();
        let (b, _) = capacity_with_psd(&resp, &noise, psd, (lo - extra_lo, lo + w + extra_hi)).unwrap();
        prop_assert!(b >= a);
    }

    #[test]
    fn adjacent_bands_add(lo in 1e5f64..1e8, split in 0.01f64..0.99, w in 1e3f64..8e8) {
        let noise = NoiseModel::default();
        let resp = resonance(&grid(1e5, 1e9, 300), 70e6, 3.0);
        let hi = (lo + w).min(1e9);
        let mid = lo + split * (hi - lo);
        let psd = 1e-10;
        let (whole, _) = capacity_with_psd(&resp, &noise, psd, (lo, hi)).unwrap();
        let (a, _) = capacity_with_psd(&resp, &noise, psd, (lo, mid)).unwrap();
        let (b, _) = capacity_with_psd(&resp, &noise, psd, (mid, hi)).unwrap();
        prop_assert!((a + b - whole).abs() <= 1e-9 * whole);
    }

    #[test]
    fn air_path_is_linear_in_scale(s in -10.0f64..10.0) {
        let freqs = grid(1e7, 1e9, 40);
        let body = resonance(&freqs, 70e6, 3.0);
        let unit = air(1.0);
        let scaled = AirPath { scale: s, ..unit.clone() };
        let r1 = superpose_air_path(&body, &unit, 1.0, 1.0).unwrap();
        let rs = superpose_air_path(&body, &scaled, 1.0, 1.0).unwrap();
        for i in 0..freqs.len() {
            let d1 = r1.complex_gain[i] - body.complex_gain[i];
            let ds = rs.complex_gain[i] - body.complex_gain[i];
            prop_assert!((d1 * s - ds).norm() <= 1e-12 * d1.norm().max(1e-300) * s.abs().max(1.0));
        }
    }
}

fn air(scale: f64) -> AirPath {
    AirPath {
        dev_tx: DeviceGeometry::wrist_default(),
        dev_rx: DeviceGeometry::wrist_default(),
        termination: TerminationNetwork::capacitive(2.3e-12),
        scale,
    }
}

#[test]
fn zero_air_path_is_identity() {
    let freqs = grid(1e5, 1e9, 64);
    let body = resonance(&freqs, 70e6, 3.0);
    let out = superpose_air_path(&body, &air(0.0), 1.5, 1.0).unwrap();
    assert_eq!(out.complex_gain, body.complex_gain);
    assert_eq!(out.gain_db, body.gain_db);
}

#[test]
fn opposing_phasors_notch() {
    let path = air(1.0);
    let f0 = 120e6;
    let a0 = path.gain(f0, 1.5, 1.0).unwrap();
    let freqs = FrequencySweep::new(100e6, 140e6, 101, Spacing::Linear).unwrap().frequencies();
    let body = ChannelResponse::from_complex(freqs.clone(), vec![-a0; freqs.len()], 1.0);
    let sum = superpose_air_path(&body, &path, 1.5, 1.0).unwrap();
    let i = freqs.iter().position(|&f| (f - f0).abs() < 1.0).unwrap();
    let depth = body.gain_db[i] - sum.gain_db[i];
    assert!(depth > 30.0, "depth {depth} dB");
}

#[test]
fn higher_permittivity_lowers_first_notch() {
    // body term of fixed magnitude and phase, air term whose phase advances with eps_eff
    let freqs = grid(20e6, 1e9, 2048);
    let path = air(1.0);
    let body_gain: Vec<Cx<f64>> = freqs
        .iter()
        .map(|&f| -Cx::new(path.gain(f, 1.5, 1.0).unwrap().norm(), 0.0))
        .collect();
    let body = ChannelResponse::from_complex(freqs.clone(), body_gain, 1.0);
    let mut last = f64::INFINITY;
    for eps in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let sum = superpose_air_path(&body, &path, 1.5, eps).unwrap();
        let notch = first_notch(&find_features(&sum, DEFAULT_PROMINENCE_DB))
            .unwrap_or_else(|| panic!("no notch at eps_eff = {eps}"));
        assert!(notch.f_c < last, "eps_eff = {eps}: {} >= {last}", notch.f_c);
        last = notch.f_c;
    }
}

#[test]
fn invalid_air_path_inputs() {
    let freqs = grid(1e6, 1e8, 20);
    let body = flat(&freqs, 1e-3);
    assert!(superpose_air_path(&body, &air(1.0), 0.0, 1.0).is_err());
    assert!(superpose_air_path(&body, &air(1.0), 1.0, 0.5).is_err());
}

#[test]
fn features_ignore_source_amplitude() {
    let sc = scenario("reference_body.cfg");
    let model = sc.link_model().unwrap();
    let sweep = FrequencySweep::new(1e6, 1e9, 400, Spacing::Log).unwrap();
    let a = find_features(&sweep_gain(&model, &sweep, 1.0).unwrap(), DEFAULT_PROMINENCE_DB);
    let b = find_features(&sweep_gain(&model, &sweep, 7.3).unwrap(), DEFAULT_PROMINENCE_DB);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.f_c, y.f_c);
        assert!((x.q - y.q).abs() <= 1e-9 * x.q);
    }
}

#[test]
fn features_are_stable_under_refinement() {
    let mut sc = scenario("reference_body.cfg");
    sc.sweep.points = 512;
    let coarse_sweep = sc.frequency_sweep().unwrap();
    let coarse = sc.features(&sc.response(&coarse_sweep).unwrap());
    sc.sweep.points = 1024;
    let fine = sc.features(&sc.response(&sc.frequency_sweep().unwrap()).unwrap());
    let ratio = (coarse_sweep.f_stop / coarse_sweep.f_start).powf(1.0 / 511.0);
    for c in coarse.iter().filter(|c| c.prominence_db > 2.0 * DEFAULT_PROMINENCE_DB) {
        let step = c.f_c * (ratio - 1.0);
        let nearest = fine
            .iter()
            .filter(|f| f.kind == c.kind)
            .map(|f| (f.f_c - c.f_c).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < step, "{:?} at {} moved {}", c.kind, c.f_c, nearest);
    }
}

#[test]
fn reference_body_energy_per_bit() {
    let sc = Scenario::reference();
    let sweep = FrequencySweep::new(1e5, 3e8, 1024, Spacing::Log).unwrap();
    let resp = sc.response(&sweep).unwrap();
    let cap = shannon_capacity(&resp, &sc.noise_model(), sc.capacity.tx_power_dbm, (30e6, 300e6))
        .unwrap();
    let p_tx = dbm_to_watts(sc.capacity.tx_power_dbm);
    let e = energy_per_bit(p_tx, cap.capacity_bits_per_s).unwrap();
    println!(
        "energy per bit at -5 dBm: {:.3} pJ/bit ({} the 4.5 pJ/bit bound)",
        e * 1e12,
        if e < 4.5e-12 { "below" } else { "above" }
    );
    assert!(e.is_finite() && e > 0.0);
}

#[test]
fn one_dominant_peak_on_reference_body() {
    let sc = Scenario::reference();
    let resp = sc.response(&sc.frequency_sweep().unwrap()).unwrap();
    let dom = dominant_peaks(&sc.features(&resp), 6.0);
    assert_eq!(dom.len(), 1);
    assert!((50e6..=150e6).contains(&dom[0].f_c));
}
