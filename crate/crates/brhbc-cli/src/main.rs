mod oracle;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use brhbc::calib::{
    calibrated_gain, fit_body_ground_capacitance, ingest_sweep, synthesize_measurement,
    CorrectionFactors, CorrectionTable,
};
use brhbc::channel::{
    dominant_peaks, energy_per_bit, shannon_capacity_vs, FeatureKind, FrequencySweep,
    SpectralFeature, Spacing, MIN_FEATURE_POINTS,
};
use brhbc::io::{write_gain_csv, write_leakage_csv, write_response_csv};
use brhbc::leakage::offbody_profile;
use brhbc::safety::{exposure_estimate, modeled_tx_power};
use brhbc::scenario::Scenario;

/// Environment variable holding the worker thread count for sweeps.
const THREADS_ENV: &str = "BRHBC_THREADS";

#[derive(Parser)]
#[command(name = "brhbc", version, about = "Body-resonance HBC channel toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file; the bundled reference body when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the number of sweep points.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Frequency band `LOW,HIGH` in Hz (sweep range, or the capacity band).
    #[arg(long, global = true, value_parser = parse_band)]
    band: Option<(f64, f64)>,
    /// Override the number of line segments.
    #[arg(long, global = true)]
    segments: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Gain versus frequency, plus detected peaks and notches.
    Sweep,
    /// Shannon capacity in the BR band and the EQS reference band.
    Capacity,
    /// Induced fields, SAR and transmitter power against exposure limits.
    Safety,
    /// Off-body leakage versus distance.
    Leakage,
    /// Calibrate a measured sweep and fit the body-to-ground capacitance.
    Calibrate {
        /// Measurement CSV `frequency_hz,rx_power_dbm,tx_power_dbm`.
        #[arg(long, required_unless_present = "synthesize")]
        measurement: Option<PathBuf>,
        /// Receiver correction CSV `frequency_hz,offset_db`.
        #[arg(long)]
        rx_correction: Option<PathBuf>,
        /// Buffer correction CSV `frequency_hz,offset_db`.
        #[arg(long)]
        buffer_correction: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        tx_offset_db: f64,
        /// Write a model-generated measurement (C_B from the scenario, 0.1 dB noise) here and exit.
        #[arg(long)]
        synthesize: Option<PathBuf>,
    },
    /// Run the built-in oracles; nonzero exit if any fails.
    Oracle,
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| "expected LOW,HIGH".to_string())?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

type CmdResult = Result<(), String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return ExitCode::FAILURE;
            }
        }
    }
    let res = match &cli.command {
        Command::Sweep => cmd_sweep(&cli),
        Command::Capacity => cmd_capacity(&cli),
        Command::Safety => cmd_safety(&cli),
        Command::Leakage => cmd_leakage(&cli),
        Command::Calibrate {
            measurement,
            rx_correction,
            buffer_correction,
            tx_offset_db,
            synthesize,
        } => cmd_calibrate(
            &cli,
            measurement.as_deref(),
            rx_correction.as_deref(),
            buffer_correction.as_deref(),
            *tx_offset_db,
            synthesize.as_deref(),
        ),
        Command::Oracle => cmd_oracle(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario, String> {
    let mut sc = match &cli.config {
        Some(p) => Scenario::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => Scenario::reference(),
    };
    if let Some(n) = cli.points {
        sc.sweep.points = n;
    }
    if let Some(n) = cli.segments {
        sc.line.segments = n;
    }
    sc.validate().map_err(|e| e.to_string())?;
    Ok(sc)
}

/// Writes `bytes` to `--out` or stdout.
fn emit(out: Option<&Path>, bytes: &[u8]) -> CmdResult {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout().write_all(bytes).map_err(|e| e.to_string()),
    }
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn json_text(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s.into_bytes()
}

fn feature_json(f: &SpectralFeature) -> Value {
    json!({
        "kind": match f.kind { FeatureKind::Peak => "peak", FeatureKind::Notch => "notch" },
        "f_c_hz": f.f_c,
        "gain_db": f.gain_db,
        "q": f.q,
        "bandwidth_hz": f.bandwidth,
        "prominence_db": f.prominence_db,
    })
}

fn config_echo(sc: &Scenario) -> Value {
    serde_json::to_value(sc).expect("scenario serializes")
}

fn air_path_meta(sc: &Scenario) -> Value {
    json!({
        "enabled": sc.air_path.enabled,
        "coupling": "Rx plate capacitance / (plate capacitance + load), times plate separation",
        "scale": sc.air_path.scale,
    })
}

fn cmd_sweep(cli: &Cli) -> CmdResult {
    let mut sc = load_scenario(cli)?;
    if let Some((lo, hi)) = cli.band {
        sc.sweep.start_hz = lo;
        sc.sweep.stop_hz = hi;
        sc.validate().map_err(|e| e.to_string())?;
    }
    let sweep = sc.frequency_sweep().map_err(|e| e.to_string())?;
    let resp = sc.response(&sweep).map_err(|e| e.to_string())?;

    let skipped = resp.len() <= MIN_FEATURE_POINTS;
    if skipped {
        eprintln!(
            "warning: {} points is below the feature-detection minimum ({}); features skipped",
            resp.len(),
            MIN_FEATURE_POINTS + 1
        );
    }
    let feats = if skipped { Vec::new() } else { sc.features(&resp) };
    let dominant = dominant_peaks(&feats, sc.features.dominant_window_db);

    let mut csv = Vec::new();
    write_response_csv(&mut csv, &resp).map_err(|e| e.to_string())?;
    let doc = json!({
        "scenario": sc.name,
        "points": resp.len(),
        "features_skipped": skipped,
        "features": feats.iter().map(feature_json).collect::<Vec<_>>(),
        "dominant_peaks": dominant.iter().map(feature_json).collect::<Vec<_>>(),
        "air_path": air_path_meta(&sc),
        "config": config_echo(&sc),
    });
    emit(cli.out.as_deref(), &csv)?;
    if let Some(out) = &cli.out {
        emit(Some(&sidecar(out, ".features.json")), &json_text(&doc))?;
    }
    for p in &dominant {
        eprintln!("dominant peak: {:.4} MHz, {:.2} dB, Q {:.2}", p.f_c / 1e6, p.gain_db, p.q);
    }
    Ok(())
}

fn cmd_capacity(cli: &Cli) -> CmdResult {
    let sc = load_scenario(cli)?;
    let br = cli
        .band
        .unwrap_or((sc.capacity.br_band_hz[0], sc.capacity.br_band_hz[1]));
    if br.1.partial_cmp(&br.0) != Some(std::cmp::Ordering::Greater) {
        return Err("empty band".into());
    }
    let eqs = (sc.capacity.eqs_band_hz[0], sc.capacity.eqs_band_hz[1]);
    let sweep = FrequencySweep::new(
        br.0.min(eqs.0),
        br.1.max(eqs.1),
        sc.sweep.points,
        Spacing::Log,
    )
    .map_err(|e| e.to_string())?;
    let resp = sc.response(&sweep).map_err(|e| e.to_string())?;
    let noise = sc.noise_model();
    let p = sc.capacity.tx_power_dbm;
    let rep = shannon_capacity_vs(&resp, &noise, p, br, eqs).map_err(|e| e.to_string())?;

    let model = sc.link_model().map_err(|e| e.to_string())?;
    let f_peak = sc.br_peak_frequency().map_err(|e| e.to_string())?;
    let txp = modeled_tx_power(
        &model,
        f_peak,
        sc.excitation.v_in_v,
        sc.safety.sense_resistance_ohm,
    )
    .map_err(|e| e.to_string())?;
    let epb = energy_per_bit(txp.p_tx, rep.capacity_bits_per_s).ok();

    let doc = json!({
        "scenario": sc.name,
        "band_hz": [br.0, br.1],
        "capacity_bits_per_s": rep.capacity_bits_per_s,
        "mean_snr_db": rep.mean_snr_db,
        "reference_band_hz": [eqs.0, eqs.1],
        "reference_capacity_bits_per_s": rep.reference_capacity_bits_per_s,
        "comparison_ratio": rep.comparison_ratio,
        "tx_power_dbm": p,
        "noise": {
            "temperature_k": noise.temperature,
            "noise_figure_db": noise.noise_figure_db,
            "extra_floor_dbm_per_hz": noise.extra_floor_dbm_per_hz,
        },
        "modeled_p_tx_w": txp.p_tx,
        "modeled_p_tx_frequency_hz": f_peak,
        "energy_per_bit_j": epb,
        "energy_per_bit_below_4_5_pj": epb.map(|e| e < 4.5e-12),
        "config": config_echo(&sc),
    });
    emit(cli.out.as_deref(), &json_text(&doc))
}

fn cmd_safety(cli: &Cli) -> CmdResult {
    let sc = load_scenario(cli)?;
    let model = sc.link_model().map_err(|e| e.to_string())?;
    let limits = sc.exposure_limits().map_err(|e| e.to_string())?;
    let f = match sc.safety.frequency_hz {
        Some(f) => f,
        None => sc.br_peak_frequency().map_err(|e| e.to_string())?,
    };
    let v = sc.excitation.v_in_v;
    let rep = exposure_estimate(&model, f, v, &limits, sc.safety.tissue_density_kg_per_m3)
        .map_err(|e| e.to_string())?;
    let txp = modeled_tx_power(&model, f, v, sc.safety.sense_resistance_ohm)
        .map_err(|e| e.to_string())?;
    let doc = json!({
        "scenario": sc.name,
        "frequency_hz": f,
        "v_in_peak_v": v,
        "induced_e_v_per_m": rep.induced_e,
        "induced_h_a_per_m": rep.induced_h,
        "sar_avg_w_per_kg": rep.sar_avg,
        "margin_e": rep.margin_e,
        "margin_h": rep.margin_h,
        "margin_sar": rep.margin_sar,
        "safe": rep.is_safe(),
        "tx": {
            "v_r_peak_v": txp.v_r,
            "i_tx_rms_a": txp.i_tx_rms,
            "v_tx_rms_v": txp.v_tx_rms,
            "p_tx_w": txp.p_tx,
        },
        "config": config_echo(&sc),
    });
    emit(cli.out.as_deref(), &json_text(&doc))
}

fn cmd_leakage(cli: &Cli) -> CmdResult {
    let sc = load_scenario(cli)?;
    let model = sc.link_model().map_err(|e| e.to_string())?;
    let f = match sc.leakage.frequency_hz {
        Some(f) => f,
        None => sc.br_peak_frequency().map_err(|e| e.to_string())?,
    };
    let prof = offbody_profile(&model, f, &sc.leakage.distances_m, sc.excitation.v_in_v)
        .map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    write_leakage_csv(&mut csv, &prof).map_err(|e| e.to_string())?;
    emit(cli.out.as_deref(), &csv)?;
    if let Some(out) = &cli.out {
        let doc = json!({
            "scenario": sc.name,
            "frequency_hz": prof.frequency,
            "v_on_volts": prof.v_on,
            "moment_a_m": [prof.moment.re, prof.moment.im],
            "radiation_zone_radius_m": prof.radiation_zone_radius,
            "config": config_echo(&sc),
        });
        emit(Some(&sidecar(out, ".json")), &json_text(&doc))?;
    }
    Ok(())
}

fn read_table(p: Option<&Path>) -> Result<CorrectionTable, String> {
    match p {
        None => Ok(CorrectionTable::zero()),
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| format!("{}: {e}", p.display()))?;
            CorrectionTable::from_csv(f).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn cmd_calibrate(
    cli: &Cli,
    measurement: Option<&Path>,
    rx_corr: Option<&Path>,
    buf_corr: Option<&Path>,
    tx_offset_db: f64,
    synthesize: Option<&Path>,
) -> CmdResult {
    let sc = load_scenario(cli)?;
    let model = sc.link_model().map_err(|e| e.to_string())?;
    if let Some(dest) = synthesize {
        let freqs = FrequencySweep::new(1e5, 2e7, 40, Spacing::Log)
            .map_err(|e| e.to_string())?
            .frequencies();
        let recs = synthesize_measurement(
            &model,
            &freqs,
            sc.ground.body_capacitance_f,
            sc.capacity.tx_power_dbm,
            0.1,
            7,
        )
        .map_err(|e| e.to_string())?;
        let mut text = String::from("frequency_hz,rx_power_dbm,tx_power_dbm\n");
        for r in recs {
            text.push_str(&format!("{},{},{}\n", r.frequency, r.rx_power_dbm, r.tx_power_dbm));
        }
        return emit(Some(dest), text.as_bytes());
    }
    let mpath = measurement.expect("clap enforces --measurement");
    let file = fs::File::open(mpath).map_err(|e| format!("{}: {e}", mpath.display()))?;
    let recs = ingest_sweep(file).map_err(|e| format!("{}: {e}", mpath.display()))?;
    let corr = CorrectionFactors {
        tx_offset_db,
        rx_offset_db: read_table(rx_corr)?,
        buffer_offset_db: read_table(buf_corr)?,
    };
    let gain = calibrated_gain(&recs, &corr).map_err(|e| e.to_string())?;
    let fit = fit_body_ground_capacitance(&gain, &model).map_err(|e| e.to_string())?;

    let mut csv = Vec::new();
    write_gain_csv(&mut csv, &gain).map_err(|e| e.to_string())?;
    emit(cli.out.as_deref(), &csv)?;
    let doc = json!({
        "fitted_c_b_f": fit.c_b,
        "residual_db_rms": fit.residual_db,
        "points": fit.points,
        "evaluations": fit.evaluations,
        "config": config_echo(&sc),
    });
    match &cli.out {
        Some(out) => emit(Some(&sidecar(out, ".fit.json")), &json_text(&doc))?,
        None => eprint!("{}", String::from_utf8_lossy(&json_text(&doc))),
    }
    eprintln!(
        "fitted C_B = {:.2} pF (rms residual {:.3} dB over {} points)",
        fit.c_b * 1e12,
        fit.residual_db,
        fit.points
    );
    Ok(())
}

fn cmd_oracle() -> CmdResult {
    let checks = oracle::run_all();
    let mut failed = 0;
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(format!("{failed} oracle(s) failed"));
    }
    Ok(())
}
