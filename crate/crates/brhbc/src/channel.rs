//! Frequency sweeps, air-path superposition, spectral features and capacity.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::consts::K_B;
use crate::dipole::{fields_at, DipoleSource, FieldPoint, Medium};
use crate::error::{invariant, Error, Result};
use crate::network::{DeviceGeometry, LinkModel, TerminationNetwork};

/// Features need more samples than this.
pub const MIN_FEATURE_POINTS: usize = 16;
pub const DEFAULT_PROMINENCE_DB: f64 = 3.0;
pub const DEFAULT_DOMINANT_WINDOW_DB: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencySweep {
    pub f_start: f64,
    pub f_stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl FrequencySweep {
    pub fn new(f_start: f64, f_stop: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if !(f_start > 0.0 && f_stop > f_start && f_stop.is_finite()) {
            return Err(invariant("sweep needs 0 < f_start < f_stop"));
        }
        if points < 2 {
            return Err(invariant("sweep needs at least 2 points"));
        }
        Ok(Self {
            f_start,
            f_stop,
            points,
            spacing,
        })
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|k| {
                if k == 0 {
                    return self.f_start;
                }
                if k == n {
                    return self.f_stop;
                }
                let t = k as f64 / n as f64;
                match self.spacing {
                    Spacing::Log => {
                        (self.f_start.ln() + t * (self.f_stop.ln() - self.f_start.ln())).exp()
                    }
                    Spacing::Linear => self.f_start + t * (self.f_stop - self.f_start),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelResponse {
    pub frequencies: Vec<f64>,
    pub complex_gain: Vec<Complex64>,
    pub gain_db: Vec<f64>,
    pub v_in: f64,
    pub v_rx: Vec<Complex64>,
}

impl ChannelResponse {
    pub fn from_complex(frequencies: Vec<f64>, complex_gain: Vec<Complex64>, v_in: f64) -> Self {
        let gain_db = complex_gain.iter().map(|g| to_db(g.norm())).collect();
        let v_rx = complex_gain.iter().map(|g| g * v_in).collect();
        Self {
            frequencies,
            complex_gain,
            gain_db,
            v_in,
            v_rx,
        }
    }

    /// Magnitude-only response (measurements); phase is set to zero.
    pub fn from_gain_db(frequencies: Vec<f64>, gain_db: Vec<f64>) -> Self {
        let complex_gain = gain_db
            .iter()
            .map(|db| Complex64::new(10f64.powf(db / 20.0), 0.0))
            .collect::<Vec<_>>();
        let v_rx = complex_gain.clone();
        Self {
            frequencies,
            complex_gain,
            gain_db,
            v_in: 1.0,
            v_rx,
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Gain in dB at `f`, linear interpolation in log frequency.
    pub fn gain_db_at(&self, f: f64) -> Option<f64> {
        let fs = &self.frequencies;
        if fs.is_empty() || f < fs[0] || f > fs[fs.len() - 1] {
            return None;
        }
        let i = fs.partition_point(|&x| x < f);
        if fs[i] == f {
            return Some(self.gain_db[i]);
        }
        let t = (f.ln() - fs[i - 1].ln()) / (fs[i].ln() - fs[i - 1].ln());
        Some(self.gain_db[i - 1] + t * (self.gain_db[i] - self.gain_db[i - 1]))
    }
}

pub fn to_db(mag: f64) -> f64 {
    20.0 * mag.log10()
}

/// Evaluates the body-guided transfer function on every sweep frequency.
pub fn sweep_gain(model: &LinkModel<f64>, sweep: &FrequencySweep, v_in: f64) -> Result<ChannelResponse> {
    model.validate()?;
    let freqs = sweep.frequencies();
    let gains = freqs
        .par_iter()
        .map(|&f| model.transfer_function(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelResponse::from_complex(freqs, gains, v_in))
}

/// Line-of-sight coupling between the Tx and Rx devices through air.
///
/// The Tx is a dipole of length `plate_separation` carrying the return-path
/// displacement current; the Rx picks the field up as a floating receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct AirPath {
    pub dev_tx: DeviceGeometry<f64>,
    pub dev_rx: DeviceGeometry<f64>,
    pub termination: TerminationNetwork<f64>,
    pub scale: f64,
}

impl AirPath {
    /// Air-path voltage gain at `f`.
    pub fn gain(&self, f: f64, los_distance: f64, eps_eff: f64) -> Result<Complex64> {
        let medium = Medium::new(eps_eff)?;
        let w = std::f64::consts::TAU * f;
        let i0 = Complex64::new(0.0, w * self.dev_tx.return_capacitance());
        let src = DipoleSource::new(i0, self.dev_tx.plate_separation, f)?;
        let field = fields_at(&src, &medium, &FieldPoint::broadside(los_distance))?;
        Ok(field.e_theta * self.dev_rx.floating_pickup(&self.termination, f) * self.scale)
    }
}

pub fn superpose_air_path(
    body: &ChannelResponse,
    air: &AirPath,
    los_distance: f64,
    eps_eff: f64,
) -> Result<ChannelResponse> {
    if !(los_distance > 0.0) {
        return Err(Error::Geometry("los_distance must be positive".into()));
    }
    let gains = body
        .frequencies
        .iter()
        .zip(&body.complex_gain)
        .map(|(&f, &g)| Ok(g + air.gain(f, los_distance, eps_eff)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelResponse::from_complex(
        body.frequencies.clone(),
        gains,
        body.v_in,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Peak,
    Notch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFeature {
    pub kind: FeatureKind,
    pub f_c: f64,
    pub gain_db: f64,
    pub q: f64,
    /// -3 dB (peaks) or +3 dB (notches) width, Hz.
    pub bandwidth: f64,
    pub prominence_db: f64,
    pub index: usize,
}

/// Local extrema with at least `prominence_db` topographic prominence, in frequency order.
pub fn find_features(resp: &ChannelResponse, prominence_db: f64) -> Vec<SpectralFeature> {
    if resp.len() <= MIN_FEATURE_POINTS {
        return Vec::new();
    }
    let up: Vec<f64> = resp.gain_db.clone();
    let down: Vec<f64> = resp.gain_db.iter().map(|g| -g).collect();
    let mut out = Vec::new();
    for (kind, y) in [(FeatureKind::Peak, &up), (FeatureKind::Notch, &down)] {
        for (i, prom) in prominent_maxima(y, prominence_db) {
            let bw = width_at(&resp.frequencies, y, i, 3.0);
            let f_c = resp.frequencies[i];
            out.push(SpectralFeature {
                kind,
                f_c,
                gain_db: resp.gain_db[i],
                q: f_c / bw,
                bandwidth: bw,
                prominence_db: prom,
                index: i,
            });
        }
    }
    out.sort_by_key(|f| f.index);
    out
}

/// Indices of local maxima (leftmost sample of a plateau) and their prominences.
fn prominent_maxima(y: &[f64], min_prominence: f64) -> Vec<(usize, f64)> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] {
                let mut left_min = y[i];
                for k in (0..i).rev() {
                    if y[k] > y[i] {
                        break;
                    }
                    left_min = left_min.min(y[k]);
                }
                let mut right_min = y[i];
                for &v in &y[j + 1..] {
                    if v > y[i] {
                        break;
                    }
                    right_min = right_min.min(v);
                }
                let prom = y[i] - left_min.max(right_min);
                if prom >= min_prominence {
                    out.push((i, prom));
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Width of the extremum at `i` measured `drop_db` below it, log-frequency interpolation.
fn width_at(f: &[f64], y: &[f64], i: usize, drop_db: f64) -> f64 {
    let level = y[i] - drop_db;
    let cross = |a: usize, b: usize| {
        let t = (y[a] - level) / (y[a] - y[b]);
        (f[a].ln() + t * (f[b].ln() - f[a].ln())).exp()
    };
    let lo = (0..i).rev().find(|&k| y[k] < level).map(|k| cross(k + 1, k));
    let hi = (i + 1..y.len()).find(|&k| y[k] < level).map(|k| cross(k - 1, k));
    let fc = f[i];
    match (lo, hi) {
        (Some(l), Some(h)) => h - l,
        (Some(l), None) => 2.0 * (fc - l),
        (None, Some(h)) => 2.0 * (h - fc),
        (None, None) => f[f.len() - 1] - f[0],
    }
}

/// Peaks within `window_db` of the strongest peak.
pub fn dominant_peaks(features: &[SpectralFeature], window_db: f64) -> Vec<SpectralFeature> {
    let peaks: Vec<_> = features
        .iter()
        .filter(|f| f.kind == FeatureKind::Peak)
        .copied()
        .collect();
    let Some(top) = peaks.iter().map(|p| p.gain_db).reduce(f64::max) else {
        return Vec::new();
    };
    peaks
        .into_iter()
        .filter(|p| p.gain_db >= top - window_db)
        .collect()
}

/// Lowest-frequency peak inside `band`.
pub fn first_peak_in(features: &[SpectralFeature], band: (f64, f64)) -> Option<SpectralFeature> {
    features
        .iter()
        .find(|f| f.kind == FeatureKind::Peak && f.f_c >= band.0 && f.f_c <= band.1)
        .copied()
}

/// Lowest-frequency notch.
pub fn first_notch(features: &[SpectralFeature]) -> Option<SpectralFeature> {
    features
        .iter()
        .find(|f| f.kind == FeatureKind::Notch)
        .copied()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub temperature: f64,
    pub noise_figure_db: f64,
    pub extra_floor_dbm_per_hz: Option<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            temperature: 290.0,
            noise_figure_db: 5.0,
            extra_floor_dbm_per_hz: None,
        }
    }
}

impl NoiseModel {
    /// Noise power spectral density referred to the receiver input, W/Hz.
    pub fn psd(&self) -> Result<f64> {
        if !(self.temperature > 0.0) {
            return Err(invariant("noise temperature must be positive"));
        }
        let thermal = K_B * self.temperature * 10f64.powf(self.noise_figure_db / 10.0);
        Ok(thermal + self.extra_floor_dbm_per_hz.map_or(0.0, dbm_to_watts))
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// EQS reference band used for capacity comparisons, Hz.
pub const EQS_BAND: (f64, f64) = (1e5, 20e6);
/// Body-resonance band, Hz.
pub const BR_BAND: (f64, f64) = (30e6, 300e6);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityReport {
    pub band: (f64, f64),
    pub capacity_bits_per_s: f64,
    pub mean_snr_db: f64,
    pub reference_band: (f64, f64),
    pub reference_capacity_bits_per_s: Option<f64>,
    /// Capacity in `band` over capacity in `reference_band`, both at the same total Tx power.
    pub comparison_ratio: Option<f64>,
}

/// Capacity for a fixed transmit power spectral density (W/Hz).
///
/// The SNR is piecewise constant on cells centred on the sweep samples, so
/// capacities of adjacent sub-bands add exactly.
pub fn capacity_with_psd(
    resp: &ChannelResponse,
    noise: &NoiseModel,
    tx_psd: f64,
    band: (f64, f64),
) -> Result<(f64, f64)> {
    let (lo, hi) = band;
    if !(hi > lo) {
        return Err(Error::EmptyBand);
    }
    let fs = &resp.frequencies;
    if fs.is_empty() || lo < fs[0] || hi > fs[fs.len() - 1] {
        return Err(invariant(format!(
            "band [{lo}, {hi}] Hz is outside the sweep range"
        )));
    }
    let n0 = noise.psd()?;
    let n = fs.len();
    let mut cap = 0.0;
    let mut snr_sum = 0.0;
    for i in 0..n {
        let left = if i == 0 { fs[0] } else { 0.5 * (fs[i - 1] + fs[i]) };
        let right = if i + 1 == n { fs[n - 1] } else { 0.5 * (fs[i] + fs[i + 1]) };
        let w = right.min(hi) - left.max(lo);
        if w <= 0.0 {
            continue;
        }
        let snr = tx_psd * resp.complex_gain[i].norm_sqr() / n0;
        cap += w * (1.0 + snr).log2();
        snr_sum += w * snr;
    }
    Ok((cap, 10.0 * (snr_sum / (hi - lo)).log10()))
}

/// Shannon capacity with `tx_power_dbm` spread evenly over `band`.
pub fn shannon_capacity(
    resp: &ChannelResponse,
    noise: &NoiseModel,
    tx_power_dbm: f64,
    band: (f64, f64),
) -> Result<CapacityReport> {
    shannon_capacity_vs(resp, noise, tx_power_dbm, band, EQS_BAND)
}

pub fn shannon_capacity_vs(
    resp: &ChannelResponse,
    noise: &NoiseModel,
    tx_power_dbm: f64,
    band: (f64, f64),
    reference_band: (f64, f64),
) -> Result<CapacityReport> {
    if !(band.1 > band.0) {
        return Err(Error::EmptyBand);
    }
    let p = dbm_to_watts(tx_power_dbm);
    let (cap, snr_db) = capacity_with_psd(resp, noise, p / (band.1 - band.0), band)?;
    let reference = if reference_band.1 > reference_band.0 {
        capacity_with_psd(
            resp,
            noise,
            p / (reference_band.1 - reference_band.0),
            reference_band,
        )
        .ok()
        .map(|r| r.0)
    } else {
        None
    };
    Ok(CapacityReport {
        band,
        capacity_bits_per_s: cap,
        mean_snr_db: snr_db,
        reference_band,
        reference_capacity_bits_per_s: reference,
        comparison_ratio: reference.filter(|&r| r > 0.0).map(|r| cap / r),
    })
}

/// Energy per bit, J/bit.
pub fn energy_per_bit(p_tx: f64, capacity: f64) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::ZeroCapacity);
    }
    Ok(p_tx / capacity)
}
