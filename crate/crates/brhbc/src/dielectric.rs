//! Frequency-dependent permittivity and conductivity of body tissues.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use crate::consts::EPS0;
use crate::error::{csv_error, invariant, Error, Result};
use crate::scalar::{Cx, Scalar};

const SKIN_TABLE: &str = include_str!("../data/skin_dry.csv");
const MUSCLE_TABLE: &str = include_str!("../data/muscle.csv");

/// Conductivity used for the copper reference body, S/m.
pub const COPPER_SIGMA: f64 = 5.8e7;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TissueKind {
    Skin,
    Muscle,
    CopperReference,
    Custom(String),
}

impl fmt::Display for TissueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TissueKind::Skin => f.write_str("skin"),
            TissueKind::Muscle => f.write_str("muscle"),
            TissueKind::CopperReference => f.write_str("copper"),
            TissueKind::Custom(name) => f.write_str(name),
        }
    }
}

impl FromStr for TissueKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s.to_ascii_lowercase().as_str() {
            "skin" | "dry-skin" | "skin-dry" => TissueKind::Skin,
            "muscle" => TissueKind::Muscle,
            "copper" | "copper-reference" => TissueKind::CopperReference,
            "" => return Err(Error::UnknownTissue(String::new())),
            _ => TissueKind::Custom(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricSample<T> {
    pub frequency: T,
    pub eps_r: T,
    pub sigma: T,
}

/// Tabulated dispersion, interpolated piecewise-linearly in log frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DielectricSpectrum<T> {
    tissue: TissueKind,
    samples: Vec<DielectricSample<T>>,
}

impl<T: Scalar> DielectricSpectrum<T> {
    pub fn new(tissue: TissueKind, samples: Vec<DielectricSample<T>>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invariant("dispersion table needs at least 2 samples"));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.frequency > T::zero()) || !s.frequency.is_finite() {
                return Err(invariant(format!("sample {i}: frequency must be positive")));
            }
            if !(s.eps_r >= T::one()) || !s.eps_r.is_finite() {
                return Err(invariant(format!(
                    "sample {i}: eps_r = {:?} is below 1",
                    s.eps_r
                )));
            }
            if !(s.sigma >= T::zero()) || !s.sigma.is_finite() {
                return Err(invariant(format!("sample {i}: sigma must be non-negative")));
            }
        }
        if let Some(i) = samples
            .windows(2)
            .position(|w| !(w[1].frequency > w[0].frequency))
        {
            return Err(invariant(format!(
                "frequencies must be strictly increasing (samples {} and {})",
                i,
                i + 1
            )));
        }
        Ok(Self { tissue, samples })
    }

    pub fn tissue(&self) -> &TissueKind {
        &self.tissue
    }

    pub fn samples(&self) -> &[DielectricSample<T>] {
        &self.samples
    }

    pub fn range(&self) -> (T, T) {
        (
            self.samples[0].frequency,
            self.samples[self.samples.len() - 1].frequency,
        )
    }

    /// `(eps_r, sigma)` at `f`. Tabulated frequencies return the stored pair exactly.
    pub fn eval(&self, f: T) -> Result<(T, T)> {
        if !(f > T::zero()) {
            return Err(Error::NonPositiveFrequency(f.as_f64()));
        }
        let (lo, hi) = self.range();
        if f < lo || f > hi {
            return Err(Error::OutOfRange {
                f: f.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        let idx = self
            .samples
            .partition_point(|s| s.frequency < f);
        let right = &self.samples[idx];
        if right.frequency == f {
            return Ok((right.eps_r, right.sigma));
        }
        let left = &self.samples[idx - 1];
        let t = (f.ln() - left.frequency.ln()) / (right.frequency.ln() - left.frequency.ln());
        let lerp = |a: T, b: T| a + (b - a) * t;
        Ok((lerp(left.eps_r, right.eps_r), lerp(left.sigma, right.sigma)))
    }
}

/// One Cole-Cole relaxation term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationTerm<T> {
    pub delta_eps: T,
    pub tau: T,
    pub alpha: T,
}

/// Multi-term Cole-Cole parameterization with a static ionic conductivity.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationParams<T> {
    pub eps_inf: T,
    pub terms: Vec<RelaxationTerm<T>>,
    pub sigma_ionic: T,
}

impl<T: Scalar> RelaxationParams<T> {
    pub fn new(eps_inf: T, terms: Vec<RelaxationTerm<T>>, sigma_ionic: T) -> Result<Self> {
        if !(eps_inf >= T::one()) {
            return Err(invariant("eps_inf must be >= 1"));
        }
        for (i, t) in terms.iter().enumerate() {
            if !(t.tau > T::zero()) {
                return Err(invariant(format!("term {i}: tau must be positive")));
            }
            if !(t.alpha >= T::zero() && t.alpha < T::one()) {
                return Err(invariant(format!("term {i}: alpha must lie in [0, 1)")));
            }
        }
        if !(sigma_ionic >= T::zero()) {
            return Err(invariant("sigma_ionic must be non-negative"));
        }
        Ok(Self {
            eps_inf,
            terms,
            sigma_ionic,
        })
    }

    /// Dry skin, four-term Cole-Cole literature fit (two dominant terms kept).
    pub fn dry_skin() -> Self {
        Self::from_f64(4.0, &[(32.0, 7.23e-12, 0.0), (1100.0, 32.48e-9, 0.20)], 0.0002)
    }

    /// Skeletal muscle, four-term Cole-Cole literature fit.
    pub fn muscle() -> Self {
        Self::from_f64(
            4.0,
            &[
                (50.0, 7.234e-12, 0.10),
                (7000.0, 353.678e-9, 0.10),
                (1.2e6, 318.31e-6, 0.10),
                (2.5e7, 2.274e-3, 0.0),
            ],
            0.2,
        )
    }

    fn from_f64(eps_inf: f64, terms: &[(f64, f64, f64)], sigma_ionic: f64) -> Self {
        Self {
            eps_inf: T::lit(eps_inf),
            terms: terms
                .iter()
                .map(|&(d, tau, a)| RelaxationTerm {
                    delta_eps: T::lit(d),
                    tau: T::lit(tau),
                    alpha: T::lit(a),
                })
                .collect(),
            sigma_ionic: T::lit(sigma_ionic),
        }
    }

    /// Complex relative permittivity `eps' - j eps''` including the ionic term.
    pub fn relative_permittivity(&self, f: T) -> Result<Cx<T>> {
        if !(f > T::zero()) {
            return Err(Error::NonPositiveFrequency(f.as_f64()));
        }
        let w = T::TAU() * f;
        let mut eps = Cx::new(self.eps_inf, T::zero());
        for t in &self.terms {
            // (j w tau)^(1 - alpha) in polar form
            let p = T::one() - t.alpha;
            let mag = (w * t.tau).powf(p);
            let ph = p * T::FRAC_PI_2();
            let denom = Cx::new(T::one() + mag * ph.cos(), mag * ph.sin());
            eps = eps + Cx::new(t.delta_eps, T::zero()) / denom;
        }
        eps = eps - Cx::new(T::zero(), self.sigma_ionic / (w * T::lit(EPS0)));
        Ok(eps)
    }

    pub fn eval(&self, f: T) -> Result<(T, T)> {
        let eps = self.relative_permittivity(f)?;
        let w = T::TAU() * f;
        Ok((eps.re, -eps.im * w * T::lit(EPS0)))
    }
}

/// Any source of `(eps_r, sigma)` versus frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum Dielectric<T> {
    Table(DielectricSpectrum<T>),
    Relaxation(RelaxationParams<T>),
    /// Frequency-independent material (the copper reference).
    Constant { eps_r: T, sigma: T },
}

impl<T: Scalar> Dielectric<T> {
    pub fn copper() -> Self {
        Dielectric::Constant {
            eps_r: T::one(),
            sigma: T::lit(COPPER_SIGMA),
        }
    }

    /// `(eps_r, sigma)` at `f`; complex permittivity is `EPS0 * eps_r - j sigma / w`.
    pub fn complex_permittivity(&self, f: T) -> Result<(T, T)> {
        match self {
            Dielectric::Table(t) => t.eval(f),
            Dielectric::Relaxation(p) => p.eval(f),
            Dielectric::Constant { eps_r, sigma } => {
                if !(f > T::zero()) {
                    return Err(Error::NonPositiveFrequency(f.as_f64()));
                }
                Ok((*eps_r, *sigma))
            }
        }
    }
}

/// Parses a `frequency_hz,eps_r,sigma_s_per_m` table. `#` lines are comments.
pub fn load_dispersion_table<T: Scalar, R: Read>(
    tissue: TissueKind,
    source: R,
) -> Result<DielectricSpectrum<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let expected = ["frequency_hz", "eps_r", "sigma_s_per_m"];
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<T> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(T::lit)
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("`{raw}` is not a finite number ({})", expected[i]),
                })
        };
        samples.push(DielectricSample {
            frequency: field(0)?,
            eps_r: field(1)?,
            sigma: field(2)?,
        });
    }
    DielectricSpectrum::new(tissue, samples)
}

/// Bundled dry-skin or muscle table (100 kHz to 1 GHz).
pub fn bundled_table<T: Scalar>(kind: &TissueKind) -> Result<DielectricSpectrum<T>> {
    let text = match kind {
        TissueKind::Skin => SKIN_TABLE,
        TissueKind::Muscle => MUSCLE_TABLE,
        other => return Err(Error::UnknownTissue(other.to_string())),
    };
    load_dispersion_table(kind.clone(), text.as_bytes())
}

/// Resolves tissue labels to dielectric models.
#[derive(Debug, Clone)]
pub struct TissueSet<T> {
    pub skin: Dielectric<T>,
    pub muscle: Dielectric<T>,
    pub custom: Vec<(String, Dielectric<T>)>,
}

impl<T: Scalar> TissueSet<T> {
    /// Skin and muscle from the bundled tables.
    pub fn bundled() -> Self {
        Self {
            skin: Dielectric::Table(bundled_table(&TissueKind::Skin).expect("bundled table")),
            muscle: Dielectric::Table(bundled_table(&TissueKind::Muscle).expect("bundled table")),
            custom: Vec::new(),
        }
    }

    /// Skin and muscle evaluated from the relaxation parameters directly.
    pub fn parametric() -> Self {
        Self {
            skin: Dielectric::Relaxation(RelaxationParams::dry_skin()),
            muscle: Dielectric::Relaxation(RelaxationParams::muscle()),
            custom: Vec::new(),
        }
    }

    pub fn with_custom(mut self, name: impl Into<String>, model: Dielectric<T>) -> Self {
        self.custom.push((name.into(), model));
        self
    }

    pub fn properties(&self, kind: &TissueKind, f: T) -> Result<(T, T)> {
        match kind {
            TissueKind::Skin => self.skin.complex_permittivity(f),
            TissueKind::Muscle => self.muscle.complex_permittivity(f),
            TissueKind::CopperReference => Dielectric::<T>::copper().complex_permittivity(f),
            TissueKind::Custom(name) => self
                .custom
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::UnknownTissue(name.clone()))?
                .1
                .complex_permittivity(f),
        }
    }
}
