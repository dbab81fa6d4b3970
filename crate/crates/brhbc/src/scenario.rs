//! Scenario files: sectioned key-value text (TOML) describing one body link.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{
    find_features, superpose_air_path, sweep_gain, AirPath, ChannelResponse, FrequencySweep,
    NoiseModel, SpectralFeature, Spacing, BR_BAND, DEFAULT_DOMINANT_WINDOW_DB, DEFAULT_PROMINENCE_DB,
    EQS_BAND,
};
use crate::dielectric::{load_dispersion_table, Dielectric, TissueKind, TissueSet};
use crate::error::{Error, Result};
use crate::network::{
    BodyGroundCoupling, BodyPath, DeviceGeometry, GroundPlacement, LinkModel, TerminationNetwork,
};
use crate::rlgc::BodySegment;
use crate::safety::{ExposureLimits, SAR_LIMIT_WHOLE_BODY, TISSUE_DENSITY};

const REFERENCE_BODY: &str = include_str!("../data/reference_body.cfg");

fn cfg_err(key: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
    /// `log` or `linear`.
    pub spacing: String,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            start_hz: 1e5,
            stop_hz: 1e9,
            points: 1024,
            spacing: "log".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExcitationSection {
    pub v_in_v: f64,
}

impl Default for ExcitationSection {
    fn default() -> Self {
        Self { v_in_v: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LineSection {
    pub segments: usize,
    pub tx_position_m: Option<f64>,
    pub rx_position_m: Option<f64>,
    pub radiation: bool,
    pub radiation_scale: f64,
}

impl Default for LineSection {
    fn default() -> Self {
        Self {
            segments: 512,
            tx_position_m: None,
            rx_position_m: None,
            radiation: true,
            radiation_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TissueSection {
    /// `table` (bundled or user CSVs) or `cole-cole`.
    pub model: String,
    pub skin_table: Option<PathBuf>,
    pub muscle_table: Option<PathBuf>,
}

impl Default for TissueSection {
    fn default() -> Self {
        Self {
            model: "table".into(),
            skin_table: None,
            muscle_table: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    #[serde(default)]
    pub name: String,
    pub length_m: f64,
    pub outer_radius_m: f64,
    #[serde(default = "default_skin")]
    pub skin_thickness_m: f64,
    pub height_above_ground_m: f64,
    #[serde(default = "default_outer")]
    pub outer: String,
    #[serde(default = "default_inner")]
    pub inner: String,
}

fn default_skin() -> f64 {
    0.004
}
fn default_outer() -> String {
    "skin".into()
}
fn default_inner() -> String {
    "muscle".into()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceSection {
    pub signal_plate_radius_m: f64,
    pub plate_separation_m: f64,
    /// Defaults to the signal plate area.
    pub ground_plate_area_m2: Option<f64>,
    pub ground_plate_thickness_m: f64,
    pub skin_gap_m: f64,
    pub ground_distance_m: f64,
}

impl Default for DeviceSection {
    fn default() -> Self {
        Self {
            signal_plate_radius_m: 0.025,
            plate_separation_m: 0.03,
            ground_plate_area_m2: None,
            ground_plate_thickness_m: 1e-3,
            skin_gap_m: 1e-3,
            ground_distance_m: 1.0,
        }
    }
}

impl DeviceSection {
    fn geometry(&self) -> DeviceGeometry<f64> {
        let r = self.signal_plate_radius_m;
        DeviceGeometry {
            signal_plate_radius: r,
            plate_separation: self.plate_separation_m,
            ground_plate_area: self
                .ground_plate_area_m2
                .unwrap_or(std::f64::consts::PI * r * r),
            ground_plate_thickness: self.ground_plate_thickness_m,
            skin_gap: self.skin_gap_m,
            ground_distance: self.ground_distance_m,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Devices {
    pub tx: DeviceSection,
    pub rx: DeviceSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TerminationSection {
    pub load_resistance_ohm: Option<f64>,
    pub load_capacitance_f: Option<f64>,
}

impl Default for TerminationSection {
    fn default() -> Self {
        Self {
            load_resistance_ohm: None,
            load_capacitance_f: Some(2.3e-12),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GroundSection {
    pub enabled: bool,
    pub body_capacitance_f: f64,
    /// `distributed` or `lumped`.
    pub placement: String,
    /// Lumped position along the path; defaults to the midpoint.
    pub position_m: Option<f64>,
}

impl Default for GroundSection {
    fn default() -> Self {
        Self {
            enabled: true,
            body_capacitance_f: 150e-12,
            placement: "distributed".into(),
            position_m: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AirPathSection {
    pub enabled: bool,
    pub los_distance_m: f64,
    pub eps_eff: f64,
    pub scale: f64,
}

impl Default for AirPathSection {
    fn default() -> Self {
        Self {
            enabled: false,
            los_distance_m: 1.5,
            eps_eff: 1.0,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub temperature_k: f64,
    pub noise_figure_db: f64,
    pub extra_floor_dbm_per_hz: Option<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseModel::default();
        Self {
            temperature_k: n.temperature,
            noise_figure_db: n.noise_figure_db,
            extra_floor_dbm_per_hz: n.extra_floor_dbm_per_hz,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CapacitySection {
    pub tx_power_dbm: f64,
    pub br_band_hz: [f64; 2],
    pub eqs_band_hz: [f64; 2],
}

impl Default for CapacitySection {
    fn default() -> Self {
        Self {
            tx_power_dbm: -5.0,
            br_band_hz: [BR_BAND.0, BR_BAND.1],
            eqs_band_hz: [EQS_BAND.0, EQS_BAND.1],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SafetySection {
    /// Limits CSV; relative paths resolve against the config file. Bundled table if absent.
    pub limits_file: Option<PathBuf>,
    pub sar_limit_w_per_kg: f64,
    pub tissue_density_kg_per_m3: f64,
    pub sense_resistance_ohm: f64,
    /// Evaluation frequency; the BR-band gain peak if absent.
    pub frequency_hz: Option<f64>,
}

impl Default for SafetySection {
    fn default() -> Self {
        Self {
            limits_file: None,
            sar_limit_w_per_kg: SAR_LIMIT_WHOLE_BODY,
            tissue_density_kg_per_m3: TISSUE_DENSITY,
            sense_resistance_ohm: 1.0,
            frequency_hz: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LeakageSection {
    pub distances_m: Vec<f64>,
    /// Evaluation frequency; the BR-band gain peak if absent.
    pub frequency_hz: Option<f64>,
}

impl Default for LeakageSection {
    fn default() -> Self {
        Self {
            distances_m: vec![
                0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0,
            ],
            frequency_hz: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureSection {
    pub prominence_db: f64,
    /// Peaks within this many dB of the strongest count as dominant.
    pub dominant_window_db: f64,
}

impl Default for FeatureSection {
    fn default() -> Self {
        Self {
            prominence_db: DEFAULT_PROMINENCE_DB,
            dominant_window_db: DEFAULT_DOMINANT_WINDOW_DB,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub excitation: ExcitationSection,
    #[serde(default)]
    pub line: LineSection,
    #[serde(default)]
    pub tissue: TissueSection,
    #[serde(rename = "segment")]
    pub segments: Vec<SegmentSection>,
    #[serde(default)]
    pub device: Devices,
    #[serde(default)]
    pub termination: TerminationSection,
    #[serde(default)]
    pub ground: GroundSection,
    #[serde(default)]
    pub air_path: AirPathSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub capacity: CapacitySection,
    #[serde(default)]
    pub safety: SafetySection,
    #[serde(default)]
    pub leakage: LeakageSection,
    #[serde(default)]
    pub features: FeatureSection,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<document>".into());
            cfg_err(key, e.to_string().trim().replace('\n', " "))
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut sc = Self::parse(&text)?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        // referenced tables must resolve at load time
        sc.tissues()?;
        sc.exposure_limits()?;
        Ok(sc)
    }

    /// The bundled wrist-to-wrist reference body.
    pub fn reference() -> Self {
        Self::parse(REFERENCE_BODY).expect("bundled reference scenario")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, key: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(cfg_err(key, format!("must be positive, got {v}")))
            }
        };
        pos(self.sweep.start_hz, "sweep.start_hz")?;
        pos(self.sweep.stop_hz, "sweep.stop_hz")?;
        if self.sweep.stop_hz <= self.sweep.start_hz {
            return Err(cfg_err("sweep.stop_hz", "must exceed sweep.start_hz"));
        }
        if self.sweep.points < 2 {
            return Err(cfg_err("sweep.points", "must be at least 2"));
        }
        self.spacing()?;
        if !self.excitation.v_in_v.is_finite() || self.excitation.v_in_v < 0.0 {
            return Err(cfg_err("excitation.v_in_v", "must be non-negative"));
        }
        if self.line.segments == 0 {
            return Err(cfg_err("line.segments", "must be at least 1"));
        }
        if !(self.line.radiation_scale >= 0.0) {
            return Err(cfg_err("line.radiation_scale", "must be non-negative"));
        }
        if !matches!(self.tissue.model.as_str(), "table" | "cole-cole") {
            return Err(cfg_err("tissue.model", "expected `table` or `cole-cole`"));
        }
        if self.segments.is_empty() {
            return Err(cfg_err("segment", "at least one [[segment]] is required"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            let k = |f: &str| format!("segment[{i}].{f}");
            pos(s.length_m, &k("length_m"))?;
            pos(s.outer_radius_m, &k("outer_radius_m"))?;
            pos(s.skin_thickness_m, &k("skin_thickness_m"))?;
            pos(s.height_above_ground_m, &k("height_above_ground_m"))?;
            if s.skin_thickness_m >= s.outer_radius_m {
                return Err(cfg_err(k("skin_thickness_m"), "must be below outer_radius_m"));
            }
            for (field, v) in [("outer", &s.outer), ("inner", &s.inner)] {
                match v.parse::<TissueKind>() {
                    Ok(TissueKind::Custom(_)) | Err(_) => {
                        return Err(cfg_err(k(field), format!("unknown tissue `{v}`")))
                    }
                    Ok(_) => {}
                }
            }
        }
        for (side, d) in [("tx", &self.device.tx), ("rx", &self.device.rx)] {
            let k = |f: &str| format!("device.{side}.{f}");
            pos(d.signal_plate_radius_m, &k("signal_plate_radius_m"))?;
            pos(d.plate_separation_m, &k("plate_separation_m"))?;
            if let Some(a) = d.ground_plate_area_m2 {
                pos(a, &k("ground_plate_area_m2"))?;
            }
            pos(d.ground_plate_thickness_m, &k("ground_plate_thickness_m"))?;
            pos(d.skin_gap_m, &k("skin_gap_m"))?;
            pos(d.ground_distance_m, &k("ground_distance_m"))?;
        }
        let t = &self.termination;
        if t.load_resistance_ohm.is_none() && t.load_capacitance_f.is_none() {
            return Err(cfg_err(
                "termination",
                "set load_resistance_ohm and/or load_capacitance_f",
            ));
        }
        if let Some(r) = t.load_resistance_ohm {
            pos(r, "termination.load_resistance_ohm")?;
        }
        if let Some(c) = t.load_capacitance_f {
            pos(c, "termination.load_capacitance_f")?;
        }
        let total: f64 = self.segments.iter().map(|s| s.length_m).sum();
        let (xt, xr) = self.positions();
        if !(xt >= 0.0 && xt < xr && xr <= total) {
            return Err(cfg_err(
                "line.tx_position_m",
                format!("need 0 <= tx < rx <= {total} m, got tx = {xt}, rx = {xr}"),
            ));
        }
        if self.ground.enabled {
            pos(self.ground.body_capacitance_f, "ground.body_capacitance_f")?;
            match self.ground.placement.as_str() {
                "distributed" => {}
                "lumped" => {
                    let p = self.ground.position_m.unwrap_or(total / 2.0);
                    if !(0.0..=total).contains(&p) {
                        return Err(cfg_err("ground.position_m", "outside the body path"));
                    }
                }
                _ => {
                    return Err(cfg_err(
                        "ground.placement",
                        "expected `distributed` or `lumped`",
                    ))
                }
            }
        }
        if self.air_path.enabled {
            pos(self.air_path.los_distance_m, "air_path.los_distance_m")?;
            if !(self.air_path.eps_eff >= 1.0) {
                return Err(cfg_err("air_path.eps_eff", "must be >= 1"));
            }
        }
        pos(self.noise.temperature_k, "noise.temperature_k")?;
        for (key, b) in [
            ("capacity.br_band_hz", self.capacity.br_band_hz),
            ("capacity.eqs_band_hz", self.capacity.eqs_band_hz),
        ] {
            if !(b[0] > 0.0 && b[1] > b[0]) {
                return Err(cfg_err(key, "need 0 < low < high"));
            }
        }
        pos(self.safety.sar_limit_w_per_kg, "safety.sar_limit_w_per_kg")?;
        pos(self.safety.tissue_density_kg_per_m3, "safety.tissue_density_kg_per_m3")?;
        pos(self.safety.sense_resistance_ohm, "safety.sense_resistance_ohm")?;
        if self.leakage.distances_m.is_empty()
            || self.leakage.distances_m.iter().any(|&d| !(d > 0.0))
            || self.leakage.distances_m.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(cfg_err(
                "leakage.distances_m",
                "must be positive and strictly increasing",
            ));
        }
        pos(self.features.prominence_db, "features.prominence_db")?;
        pos(self.features.dominant_window_db, "features.dominant_window_db")?;
        Ok(())
    }

    fn spacing(&self) -> Result<Spacing> {
        match self.sweep.spacing.as_str() {
            "log" => Ok(Spacing::Log),
            "linear" => Ok(Spacing::Linear),
            _ => Err(cfg_err("sweep.spacing", "expected `log` or `linear`")),
        }
    }

    /// Tx and Rx positions along the path; defaults are the two ends.
    pub fn positions(&self) -> (f64, f64) {
        let total: f64 = self.segments.iter().map(|s| s.length_m).sum();
        (
            self.line.tx_position_m.unwrap_or(0.0),
            self.line.rx_position_m.unwrap_or(total),
        )
    }

    pub fn frequency_sweep(&self) -> Result<FrequencySweep> {
        FrequencySweep::new(
            self.sweep.start_hz,
            self.sweep.stop_hz,
            self.sweep.points,
            self.spacing()?,
        )
    }

    pub fn tissues(&self) -> Result<TissueSet<f64>> {
        if self.tissue.model == "cole-cole" {
            return Ok(TissueSet::parametric());
        }
        let mut set = TissueSet::bundled();
        let load = |p: &Path, kind: TissueKind, key: &str| -> Result<Dielectric<f64>> {
            let file = fs::File::open(self.resolve(p))
                .map_err(|e| cfg_err(key, format!("{}: {e}", p.display())))?;
            Ok(Dielectric::Table(load_dispersion_table(kind, file)?))
        };
        if let Some(p) = &self.tissue.skin_table {
            set.skin = load(p, TissueKind::Skin, "tissue.skin_table")?;
        }
        if let Some(p) = &self.tissue.muscle_table {
            set.muscle = load(p, TissueKind::Muscle, "tissue.muscle_table")?;
        }
        Ok(set)
    }

    pub fn termination_network(&self) -> TerminationNetwork<f64> {
        TerminationNetwork {
            r_l: self.termination.load_resistance_ohm,
            c_l: self.termination.load_capacitance_f,
        }
    }

    pub fn link_model(&self) -> Result<LinkModel<f64>> {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                Ok(BodySegment {
                    length: s.length_m,
                    outer_radius: s.outer_radius_m,
                    skin_thickness: s.skin_thickness_m,
                    height_above_ground: s.height_above_ground_m,
                    tissue_outer: s.outer.parse()?,
                    tissue_inner: s.inner.parse()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let (tx_position, rx_position) = self.positions();
        let path = BodyPath {
            segments,
            tx_position,
            rx_position,
        };
        let ground = self.ground.enabled.then(|| BodyGroundCoupling {
            c_b: self.ground.body_capacitance_f,
            placement: if self.ground.placement == "lumped" {
                GroundPlacement::Lumped {
                    position: self
                        .ground
                        .position_m
                        .unwrap_or(0.5 * path.total_length()),
                }
            } else {
                GroundPlacement::Distributed
            },
        });
        let model = LinkModel {
            path,
            dev_tx: self.device.tx.geometry(),
            dev_rx: self.device.rx.geometry(),
            termination: self.termination_network(),
            ground,
            radiation_scale: self.line.radiation.then_some(self.line.radiation_scale),
            n_segments: self.line.segments,
            tissues: self.tissues()?,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn air_path(&self) -> Option<AirPath> {
        self.air_path.enabled.then(|| AirPath {
            dev_tx: self.device.tx.geometry(),
            dev_rx: self.device.rx.geometry(),
            termination: self.termination_network(),
            scale: self.air_path.scale,
        })
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            temperature: self.noise.temperature_k,
            noise_figure_db: self.noise.noise_figure_db,
            extra_floor_dbm_per_hz: self.noise.extra_floor_dbm_per_hz,
        }
    }

    pub fn exposure_limits(&self) -> Result<ExposureLimits> {
        match &self.safety.limits_file {
            None => Ok(ExposureLimits {
                sar_limit_whole_body: self.safety.sar_limit_w_per_kg,
                ..ExposureLimits::bundled()
            }),
            Some(p) => {
                let file = fs::File::open(self.resolve(p))
                    .map_err(|e| cfg_err("safety.limits_file", format!("{}: {e}", p.display())))?;
                ExposureLimits::from_csv(file, self.safety.sar_limit_w_per_kg)
            }
        }
    }

    /// Body-guided response plus the air path when enabled.
    pub fn response(&self, sweep: &FrequencySweep) -> Result<ChannelResponse> {
        let model = self.link_model()?;
        let body = sweep_gain(&model, sweep, self.excitation.v_in_v)?;
        match self.air_path() {
            Some(air) => superpose_air_path(
                &body,
                &air,
                self.air_path.los_distance_m,
                self.air_path.eps_eff,
            ),
            None => Ok(body),
        }
    }

    pub fn features(&self, resp: &ChannelResponse) -> Vec<SpectralFeature> {
        find_features(resp, self.features.prominence_db)
    }

    /// Frequency of the largest gain inside the BR band.
    pub fn br_peak_frequency(&self) -> Result<f64> {
        let [lo, hi] = self.capacity.br_band_hz;
        let sweep = FrequencySweep::new(lo, hi, self.sweep.points.max(64), Spacing::Log)?;
        let resp = self.response(&sweep)?;
        let (i, _) = resp
            .gain_db
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &g)| {
                if g > best.1 {
                    (i, g)
                } else {
                    best
                }
            });
        Ok(resp.frequencies[i])
    }
}
