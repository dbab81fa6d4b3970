//! Per-unit-length parameters of a body segment treated as a lossy wire over ground.

use crate::consts::{C0, EPS0, ETA0, MU0};
use crate::dielectric::{TissueKind, TissueSet};
use crate::error::{Error, Result};
use crate::scalar::{cx, Scalar};
use crate::special::{cin, si};

/// Cylindrical body section: a skin shell around a muscle core.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySegment<T> {
    pub length: T,
    pub outer_radius: T,
    pub skin_thickness: T,
    /// Clearance between the body surface and the ground plane.
    pub height_above_ground: T,
    pub tissue_outer: TissueKind,
    pub tissue_inner: TissueKind,
}

impl<T: Scalar> BodySegment<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T, what: &str| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Geometry(format!("{what} must be positive")))
            }
        };
        pos(self.length, "length")?;
        pos(self.outer_radius, "outer_radius")?;
        pos(self.skin_thickness, "skin_thickness")?;
        pos(self.height_above_ground, "height_above_ground")?;
        if self.skin_thickness >= self.outer_radius {
            return Err(Error::Geometry(
                "skin_thickness must be smaller than outer_radius".into(),
            ));
        }
        Ok(())
    }

    /// Height of the conductor axis above ground.
    pub fn axis_height(&self) -> T {
        self.height_above_ground + self.outer_radius
    }
}

/// Distributed series and shunt parameters, SI per metre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerUnitLengthParams<T> {
    pub r: T,
    pub l: T,
    pub g: T,
    pub c: T,
}

impl<T: Scalar> PerUnitLengthParams<T> {
    pub fn phase_velocity(&self) -> T {
        T::one() / (self.l * self.c).sqrt()
    }
}

/// Series resistance representing power radiated by the whole body acting as an antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationLoading<T> {
    /// Length of the radiating structure (the full body path), m.
    pub radiating_length: T,
    pub scale: T,
}

/// Radiation resistance of a thin centre-fed dipole of electrical length `x = β·l`,
/// referred to the current maximum.
pub fn dipole_radiation_resistance<T: Scalar>(x: T) -> T {
    let x = x.abs();
    let bracket = if x < T::one() {
        // the closed form cancels to O(x^4) here
        let x2 = x * x;
        let coeffs = [
            1.0 / 48.0,
            -1.0 / 960.0,
            11.0 / 483_840.0,
            -1.0 / 3_483_648.0,
            137.0 / 57_480_192_000.0,
        ];
        let mut acc = T::zero();
        for c in coeffs.iter().rev() {
            acc = acc * x2 + T::lit(*c);
        }
        acc * x2 * x2
    } else {
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        cin(x)
            + half * x.sin() * (si(two * x) - two * si(x))
            + half * x.cos() * (two * cin(x) - cin(two * x))
    };
    T::lit(ETA0) / T::TAU() * bracket
}

pub fn pul_params<T: Scalar>(
    seg: &BodySegment<T>,
    f: T,
    tissues: &TissueSet<T>,
    radiation: Option<&RadiationLoading<T>>,
) -> Result<PerUnitLengthParams<T>> {
    seg.validate()?;
    if !(f > T::zero()) {
        return Err(Error::NonPositiveFrequency(f.as_f64()));
    }
    let a = seg.outer_radius;
    let h = seg.axis_height();
    if h < a {
        return Err(Error::Geometry("axis height below conductor radius".into()));
    }
    let w = T::TAU() * f;
    let eps0 = T::lit(EPS0);
    let mu0 = T::lit(MU0);
    let ach = (h / a).acosh();
    let l = mu0 / T::TAU() * ach;
    let c = T::TAU() * eps0 / ach;

    let (eps_s, sig_s) = tissues.properties(&seg.tissue_outer, f)?;
    let (_, sig_m) = tissues.properties(&seg.tissue_inner, f)?;

    let mut r = conduction_resistance(a, seg.skin_thickness, sig_s, sig_m, w);
    if let Some(rad) = radiation {
        let beta0 = w / T::lit(C0);
        let rrad = dipole_radiation_resistance(beta0 * rad.radiating_length);
        r = r + rad.scale * T::lit(2.0) * rrad / rad.radiating_length;
    }

    // tissue shell in series with the air gap to ground
    let y_shell = cx(sig_s, w * eps0 * eps_s) * (T::TAU() / (a / (a - seg.skin_thickness)).ln());
    let y_air = cx(T::zero(), w * c);
    let g = (y_shell * y_air / (y_shell + y_air)).re.max(T::zero());
    Ok(PerUnitLengthParams { r, l, g, c })
}

/// Axial resistance of the skin/muscle cross-section, limited to one skin depth.
fn conduction_resistance<T: Scalar>(a: T, t: T, sig_s: T, sig_m: T, w: T) -> T {
    let pi = T::PI();
    let rm = a - t;
    let conductance = |depth: T| {
        let ri = (a - depth).max(T::zero());
        let shell_inner = ri.max(rm);
        let area_s = pi * (a * a - shell_inner * shell_inner);
        let area_m = if ri < rm {
            pi * (rm * rm - ri * ri)
        } else {
            T::zero()
        };
        sig_s * area_s + sig_m * area_m
    };
    let sig_eff = conductance(a) / (pi * a * a);
    let delta = (T::lit(2.0) / (w * T::lit(MU0) * sig_eff)).sqrt();
    T::one() / conductance(delta.min(a))
}
