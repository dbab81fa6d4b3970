//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use brhbc::calib::{calibrated_gain, fit_body_ground_capacitance, ingest_sweep, CorrectionFactors, SweepRecord};
use brhbc::channel::{
    find_features, first_peak_in, shannon_capacity_vs, sweep_gain,
    ChannelResponse, FrequencySweep, Spacing, BR_BAND, DEFAULT_PROMINENCE_DB, EQS_BAND,
};
use brhbc::dipole::{fields_at, radiation_zone_radius, DipoleSource, FieldPoint, Medium};
use brhbc::leakage::offbody_profile;
use brhbc::network::{LinkModel, TerminationNetwork};
use brhbc::rlgc::PerUnitLengthParams;
use brhbc::safety::{exposure_estimate, TISSUE_DENSITY};
use brhbc::scenario::Scenario;
use brhbc::twoport::{cascade, segment_twoport, TwoPortChain};
use brhbc::Cx;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../brhbc/data").join(name)
}

fn load(name: &str) -> Scenario {
    Scenario::load(&data(name)).expect("bundled scenario")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn log_sweep(lo: f64, hi: f64, n: usize) -> FrequencySweep {
    FrequencySweep::new(lo, hi, n, Spacing::Log).unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn uniform_line_oracle() -> Outcome {
    let pul = PerUnitLengthParams {
        r: 40.0,
        l: 600e-9,
        g: 2e-4,
        c: 12e-12,
    };
    let (f, len, n) = (75e6, 1.8, 1000);
    let t0 = Instant::now();
    let sec = segment_twoport(&pul, len / n as f64, f).unwrap();
    let mut chain = TwoPortChain::new(f);
    for _ in 0..n {
        chain.push(sec);
    }
    let got = cascade(&chain).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let want = segment_twoport(&pul, len, f).unwrap();
    let err = [(got.a, want.a), (got.b, want.b), (got.c, want.c), (got.d, want.d)]
        .iter()
        .map(|(g, w)| (g - w).norm() / w.norm())
        .fold(0.0, f64::max);
    check(err < 1e-6 && secs < 1.0, format!("max rel err {err:.2e}, {secs:.4} s"))
}

fn dipole_slope_law() -> Outcome {
    let m = Medium::free_space();
    let f = 1e8;
    let beta = m.beta(f);
    let src = DipoleSource::new(Cx::new(1e-3, 0.0), 1e-3, f).unwrap();
    let fit = |lo: f64, hi: f64| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..41)
            .map(|k| {
                let r = lo * (hi / lo).powf(k as f64 / 40.0) / beta;
                let e = fields_at(&src, &m, &FieldPoint::broadside(r)).unwrap();
                (r.ln(), e.e_theta.norm().ln())
            })
            .unzip();
        slope(&xs, &ys)
    };
    let near = fit(1e-4, 1e-2);
    let far = fit(1e2, 1e4);
    let worst_eta = [20.0, 50.0, 200.0, 1e3, 1e4]
        .iter()
        .map(|br| {
            let e = fields_at(&src, &m, &FieldPoint::broadside(br / beta)).unwrap();
            (e.e_theta.norm() / e.h_phi.norm() / m.eta() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    check(
        (near + 3.0).abs() <= 0.05 && (far + 1.0).abs() <= 0.05 && worst_eta < 5e-3,
        format!("near {near:.4}, far {far:.4}, |E/H|/eta off by {:.3}%", worst_eta * 100.0),
    )
}

fn br_peak_location() -> Outcome {
    let dir = std::env::temp_dir().join(format!("brhbc-accept-c3-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let out = dir.join("ref.csv");
    let t0 = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_brhbc"))
        .args(["sweep", "--points", "1024", "--config"])
        .arg(data("reference_body.cfg"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let secs = t0.elapsed().as_secs_f64();
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let json: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("ref.csv.features.json")).unwrap()).unwrap();
    let rows = fs::read_to_string(&out).unwrap().lines().count() - 1;
    let _ = fs::remove_dir_all(&dir);
    let dom = json["dominant_peaks"].as_array().unwrap();
    let f: Vec<f64> = dom.iter().map(|p| p["f_c_hz"].as_f64().unwrap()).collect();
    check(
        rows == 1024 && f.len() == 1 && (50e6..=150e6).contains(&f[0]) && secs < 10.0,
        format!("{} dominant peak(s) at {:?} MHz, {rows} rows, {secs:.2} s", f.len(), f.iter().map(|x| (x / 1e4).round() / 100.0).collect::<Vec<_>>()),
    )
}

fn first_peak(resp: &ChannelResponse) -> Option<(f64, f64)> {
    first_peak_in(&find_features(resp, DEFAULT_PROMINENCE_DB), BR_BAND).map(|p| (p.f_c, p.gain_db))
}

fn resonance_uplift() -> Outcome {
    let sweep = log_sweep(1e5, 1e9, 1024);
    let cu = load("copper_cylinder.cfg");
    let tissue = load("tissue_cylinder.cfg");
    let cu_resp = cu.response(&sweep).unwrap();
    let t_resp = tissue.response(&sweep).unwrap();
    let (Some((fc, gc)), Some((ft, gt))) = (first_peak(&cu_resp), first_peak(&t_resp)) else {
        return Err("no resonance peak found".into());
    };
    let g1 = 20.0 * cu.link_model().unwrap().transfer_function(1e6).unwrap().norm().log10();
    let uplift = gc - g1;
    let deficit = gc - gt;
    check(
        (uplift - 15.0).abs() <= 5.0 && (deficit - 9.0).abs() <= 4.0,
        format!(
            "copper peak {:.2} MHz uplift {uplift:.2} dB over 1 MHz; tissue peak {:.2} MHz deficit {deficit:.2} dB",
            fc / 1e6,
            ft / 1e6
        ),
    )
}

fn capacity_ratio() -> Outcome {
    let sc = Scenario::reference();
    let sweep = log_sweep(EQS_BAND.0, BR_BAND.1, 1024);
    let resp = sc.response(&sweep).unwrap();
    let rep = shannon_capacity_vs(&resp, &sc.noise_model(), sc.capacity.tx_power_dbm, BR_BAND, EQS_BAND)
        .unwrap();
    let ratio = rep.comparison_ratio.unwrap_or(0.0);
    check(
        ratio >= 10.0,
        format!(
            "BR {:.3e} bit/s vs EQS {:.3e} bit/s, ratio {ratio:.2}",
            rep.capacity_bits_per_s,
            rep.reference_capacity_bits_per_s.unwrap_or(0.0)
        ),
    )
}

fn termination_behavior() -> Outcome {
    let base = Scenario::reference().link_model().unwrap();
    let sweep = log_sweep(1e5, 1e7, 41);
    let cap = sweep_gain(&base, &sweep, 1.0).unwrap();
    let (lo, hi) = cap
        .gain_db
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &g| (a.min(g), b.max(g)));
    let flat = hi - lo;
    let resistive = LinkModel {
        termination: TerminationNetwork::new(Some(50.0), Some(2.3e-12)).unwrap(),
        ..base
    };
    let r = sweep_gain(&resistive, &sweep, 1.0).unwrap();
    let xs: Vec<f64> = r.frequencies.iter().map(|f| f.log10()).collect();
    let s = slope(&xs, &r.gain_db);
    check(
        flat <= 1.0 && (s - 20.0).abs() <= 2.0,
        format!("2.3 pF spread {flat:.3} dB; 50 ohm || 2.3 pF slope {s:.2} dB/decade"),
    )
}

fn leakage_confinement() -> Outcome {
    let sc = Scenario::reference();
    let model = sc.link_model().unwrap();
    let f = sc.br_peak_frequency().unwrap();
    let rd = radiation_zone_radius(&Medium::free_space(), f);
    let mut d = vec![0.5];
    d.extend((0..200).map(|k| rd * 1000f64.powf(k as f64 / 199.0)).filter(|&x| x > 0.5));
    d.sort_by(f64::total_cmp);
    d.dedup();
    let p = offbody_profile(&model, f, &d, 1.0).unwrap();
    let at_half = p.ratio[0];
    let beyond: Vec<f64> = p
        .distances
        .iter()
        .zip(&p.ratio)
        .filter(|(x, _)| **x >= rd)
        .map(|(_, r)| *r)
        .collect();
    let decreasing = beyond.windows(2).all(|w| w[1] < w[0]);
    check(
        at_half < 0.1 && decreasing,
        format!(
            "ratio {at_half:.4} at 0.5 m ({:.2} MHz), r_d {rd:.3} m, strictly decreasing beyond: {decreasing}",
            f / 1e6
        ),
    )
}

fn safety_floors() -> Outcome {
    let sc = Scenario::reference();
    let model = sc.link_model().unwrap();
    let lim = sc.exposure_limits().unwrap();
    let f = sc.br_peak_frequency().unwrap();
    let a = exposure_estimate(&model, f, 1.0, &lim, TISSUE_DENSITY).unwrap();
    let b = exposure_estimate(&model, f, 2.0, &lim, TISSUE_DENSITY).unwrap();
    let sar_ratio = b.sar_avg / a.sar_avg;
    check(
        a.margin_e >= 10.0 && a.margin_h >= 10.0 && a.margin_sar >= 100.0 && (sar_ratio - 4.0).abs() < 1e-12,
        format!(
            "margins E {:.1}x, H {:.1}x, SAR {:.0}x at {:.2} MHz; SAR ratio at 2 V {sar_ratio:.12}",
            a.margin_e,
            a.margin_h,
            a.margin_sar,
            f / 1e6
        ),
    )
}

/// First resonance of a bare lossless line: first peak of 1/|A| of the chain matrix.
fn bare_line_resonance(pul: &PerUnitLengthParams<f64>, len: f64) -> Option<f64> {
    let sweep = log_sweep(5e6, 5e8, 4096);
    let freqs = sweep.frequencies();
    let inv_a: Vec<Cx<f64>> = freqs
        .iter()
        .map(|&f| {
            let n = 256;
            let sec = segment_twoport(pul, len / n as f64, f).unwrap();
            let mut chain = TwoPortChain::new(f);
            for _ in 0..n {
                chain.push(sec);
            }
            Cx::new(1.0, 0.0) / cascade(&chain).unwrap().a
        })
        .collect();
    let resp = ChannelResponse::from_complex(freqs, inv_a, 1.0);
    find_features(&resp, DEFAULT_PROMINENCE_DB)
        .into_iter()
        .find(|f| f.kind == brhbc::channel::FeatureKind::Peak)
        .map(|p| p.f_c)
}

fn length_scaling() -> Outcome {
    let model = Scenario::reference().link_model().unwrap();
    let arm = model.pul_at(0, 75e6).unwrap();
    let pul = PerUnitLengthParams {
        r: 0.0,
        g: 0.0,
        ..arm
    };
    let len = model.path.total_length();
    let (Some(f1), Some(f2)) = (bare_line_resonance(&pul, len), bare_line_resonance(&pul, 2.0 * len)) else {
        return Err("resonance not found".into());
    };
    let ratio = f1 / f2;
    check(
        (ratio - 2.0).abs() <= 0.04,
        format!("{:.3} MHz at {len} m, {:.3} MHz at {} m, ratio {ratio:.4}", f1 / 1e6, f2 / 1e6, 2.0 * len),
    )
}

fn calibration_round_trip() -> Outcome {
    let raw = [(1e6, -45.0, -5.0), (2e6, -44.25, -5.0), (5e6, -43.125, -4.5)];
    let recs: Vec<SweepRecord> = raw
        .iter()
        .map(|&(frequency, rx_power_dbm, tx_power_dbm)| SweepRecord {
            frequency,
            rx_power_dbm,
            tx_power_dbm,
        })
        .collect();
    let g = calibrated_gain(&recs, &CorrectionFactors::zero()).unwrap();
    let exact = g
        .gain_db
        .iter()
        .zip(&raw)
        .all(|(g, r)| *g == r.1 - r.2);
    let fixture = ingest_sweep(fs::File::open(data("synthetic_measurement.csv")).unwrap()).unwrap();
    let measured = calibrated_gain(&fixture, &CorrectionFactors::zero()).unwrap();
    let fit = fit_body_ground_capacitance(&measured, &Scenario::reference().link_model().unwrap());
    match fit {
        Ok(fit) => check(
            exact && (fit.c_b / 150e-12 - 1.0).abs() < 0.1,
            format!(
                "zero-offset subtraction exact: {exact}; fitted C_B {:.2} pF (residual {:.3} dB)",
                fit.c_b * 1e12,
                fit.residual_db
            ),
        ),
        Err(e) => Err(format!("fit failed: {e}")),
    }
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("brhbc-accept-c11-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let out = dir.join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_brhbc"))
            .args(["sweep", "--config"])
            .arg(data("reference_body.cfg"))
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    let _ = fs::remove_dir_all(&dir);
    check(a == b && !a.is_empty(), format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("uniform-line oracle", uniform_line_oracle),
        ("dipole slope law", dipole_slope_law),
        ("BR peak location", br_peak_location),
        ("resonance gain uplift", resonance_uplift),
        ("capacity ratio", capacity_ratio),
        ("termination behavior", termination_behavior),
        ("leakage confinement", leakage_confinement),
        ("safety floors", safety_floors),
        ("length scaling", length_scaling),
        ("calibration round trip", calibration_round_trip),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
