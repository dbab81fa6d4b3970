//! Induced field, SAR and transmitter power estimates against exposure limits.

use std::io::Read;

use num_complex::Complex64;

use crate::error::{csv_error, invariant, Error, Result};
use crate::network::LinkModel;

const ICNIRP_TABLE: &str = include_str!("../data/icnirp_general_public.csv");

/// Whole-body average SAR limit for the general public, W/kg.
pub const SAR_LIMIT_WHOLE_BODY: f64 = 0.08;
pub const TISSUE_DENSITY: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExposureLimits {
    /// `(frequency, E limit, H limit)` rows, strictly increasing in frequency.
    pub rows: Vec<(f64, f64, f64)>,
    pub sar_limit_whole_body: f64,
}

impl ExposureLimits {
    pub fn bundled() -> Self {
        Self::from_csv(ICNIRP_TABLE.as_bytes(), SAR_LIMIT_WHOLE_BODY).expect("bundled limits")
    }

    /// Reads `frequency_hz,e_limit_v_per_m,h_limit_a_per_m`.
    pub fn from_csv<R: Read>(source: R, sar_limit_whole_body: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(source);
        let expected = ["frequency_hz", "e_limit_v_per_m", "h_limit_a_per_m"];
        let header = rdr.headers().map_err(csv_error)?.clone();
        if header.iter().ne(expected.iter().copied()) {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header `{}`", expected.join(",")),
            });
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map_or(0, |p| p.line());
            let mut vals = [0.0; 3];
            for (i, v) in vals.iter_mut().enumerate() {
                let raw = rec.get(i).unwrap_or("");
                *v = raw.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{raw}` is not a number ({})", expected[i]),
                })?;
            }
            rows.push((vals[0], vals[1], vals[2]));
        }
        let limits = Self {
            rows,
            sar_limit_whole_body,
        };
        limits.validate()?;
        Ok(limits)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(invariant("limits table is empty"));
        }
        if self
            .rows
            .iter()
            .any(|&(f, e, h)| !(f > 0.0 && e > 0.0 && h > 0.0))
            || !(self.sar_limit_whole_body > 0.0)
        {
            return Err(invariant("exposure limits must be positive"));
        }
        if self.rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(invariant("limits table frequencies must increase"));
        }
        Ok(())
    }

    /// `(E limit, H limit)` at `f`, log-frequency interpolation.
    pub fn at(&self, f: f64) -> Result<(f64, f64)> {
        let rows = &self.rows;
        let (lo, hi) = (rows[0].0, rows[rows.len() - 1].0);
        if !(f >= lo && f <= hi) {
            return Err(Error::MissingLimit(f));
        }
        let i = rows.partition_point(|r| r.0 < f);
        if rows[i].0 == f {
            return Ok((rows[i].1, rows[i].2));
        }
        let (a, b) = (rows[i - 1], rows[i]);
        let t = (f.ln() - a.0.ln()) / (b.0.ln() - a.0.ln());
        Ok((a.1 + t * (b.1 - a.1), a.2 + t * (b.2 - a.2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxPowerReport {
    /// Peak voltage across the sense resistor, V.
    pub v_r: f64,
    pub i_tx_rms: f64,
    pub v_tx_rms: f64,
    pub p_tx: f64,
}

pub fn tx_power(v_in_peak: f64, sense_resistance: f64, v_r_peak: f64) -> Result<TxPowerReport> {
    if !(sense_resistance > 0.0) {
        return Err(invariant("sense resistance must be positive"));
    }
    let i_tx_rms = v_r_peak.abs() / std::f64::consts::SQRT_2 / sense_resistance;
    let v_tx_rms = v_in_peak.abs() / std::f64::consts::SQRT_2;
    Ok(TxPowerReport {
        v_r: v_r_peak,
        i_tx_rms,
        v_tx_rms,
        p_tx: v_tx_rms * i_tx_rms,
    })
}

/// Transmitter power at `f` from the modeled source current through a sense resistor.
pub fn modeled_tx_power(
    model: &LinkModel<f64>,
    f: f64,
    v_in_peak: f64,
    sense_resistance: f64,
) -> Result<TxPowerReport> {
    let state = model.solve(f, Complex64::new(v_in_peak, 0.0))?;
    tx_power(v_in_peak, sense_resistance, state.i_tx.norm() * sense_resistance)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureReport {
    pub frequency: f64,
    /// Peak-over-body induced E, V/m rms.
    pub induced_e: f64,
    /// Peak-over-body surface H, A/m rms.
    pub induced_h: f64,
    /// Volume-averaged SAR, W/kg.
    pub sar_avg: f64,
    pub margin_e: f64,
    pub margin_h: f64,
    pub margin_sar: f64,
}

impl ExposureReport {
    pub fn is_safe(&self) -> bool {
        self.margin_e > 1.0 && self.margin_h > 1.0 && self.margin_sar > 1.0
    }
}

pub fn exposure_estimate(
    model: &LinkModel<f64>,
    f: f64,
    v_in_peak: f64,
    limits: &ExposureLimits,
    density: f64,
) -> Result<ExposureReport> {
    if !(density > 0.0) {
        return Err(invariant("tissue density must be positive"));
    }
    let (e_lim, h_lim) = limits.at(f)?;
    let state = model.solve(f, Complex64::new(v_in_peak, 0.0))?;
    let rms = std::f64::consts::FRAC_1_SQRT_2;

    let sigma = model
        .path
        .segments
        .iter()
        .map(|s| {
            let (_, ss) = model.tissues.properties(&s.tissue_outer, f)?;
            let (_, sm) = model.tissues.properties(&s.tissue_inner, f)?;
            let a2 = s.outer_radius * s.outer_radius;
            let rm = s.outer_radius - s.skin_thickness;
            Ok((ss * (a2 - rm * rm) + sm * rm * rm) / a2)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut e_max: f64 = 0.0;
    let mut h_max: f64 = 0.0;
    let mut absorbed = 0.0;
    let mut volume = 0.0;
    for (k, el) in state.elements.iter().enumerate() {
        let seg = &model.path.segments[el.segment];
        let dv = state.node_voltages[k + 1] - state.node_voltages[k];
        let e = dv.norm() / el.length * rms;
        let h = el.mean_current().norm() / (std::f64::consts::TAU * seg.outer_radius) * rms;
        e_max = e_max.max(e);
        h_max = h_max.max(h);
        let vol = std::f64::consts::PI * seg.outer_radius * seg.outer_radius * el.length;
        absorbed += sigma[el.segment] * e * e * vol;
        volume += vol;
    }
    let sar_avg = absorbed / (density * volume);
    let margin = |lim: f64, est: f64| if est > 0.0 { lim / est } else { f64::INFINITY };
    Ok(ExposureReport {
        frequency: f,
        induced_e: e_max,
        induced_h: h_max,
        sar_avg,
        margin_e: margin(e_lim, e_max),
        margin_h: margin(h_lim, h_max),
        margin_sar: margin(limits.sar_limit_whole_body, sar_avg),
    })
}
