//! Fields of an electrically short (Hertzian) dipole along z.

use crate::consts::{C0, ETA0};
use crate::error::{invariant, Error, Result};
use crate::scalar::{cx, Cx, Scalar};

/// Homogeneous, lossless medium characterized by its relative permittivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium<T> {
    pub eps_r: T,
}

impl<T: Scalar> Medium<T> {
    pub fn free_space() -> Self {
        Self { eps_r: T::one() }
    }

    pub fn new(eps_r: T) -> Result<Self> {
        if !(eps_r >= T::one()) || !eps_r.is_finite() {
            return Err(invariant("medium eps_r must be >= 1"));
        }
        Ok(Self { eps_r })
    }

    /// Wave impedance, ohm.
    pub fn eta(&self) -> T {
        T::lit(ETA0) / self.eps_r.sqrt()
    }

    pub fn wavelength(&self, f: T) -> T {
        T::lit(C0) / (f * self.eps_r.sqrt())
    }

    /// Phase constant, rad/m.
    pub fn beta(&self, f: T) -> T {
        T::TAU() / self.wavelength(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSource<T> {
    /// Peak current phasor, A.
    pub current: Cx<T>,
    pub length: T,
    pub frequency: T,
}

impl<T: Scalar> DipoleSource<T> {
    pub fn new(current: Cx<T>, length: T, frequency: T) -> Result<Self> {
        if !(length > T::zero()) {
            return Err(invariant("dipole length must be positive"));
        }
        if !(frequency > T::zero()) {
            return Err(Error::NonPositiveFrequency(frequency.as_f64()));
        }
        Ok(Self {
            current,
            length,
            frequency,
        })
    }

    /// Dipole moment `I0 * l`, A·m.
    pub fn moment(&self) -> Cx<T> {
        self.current * self.length
    }

    /// Warning text when `l > λ/10` and the short-dipole formulas lose accuracy.
    pub fn short_dipole_warning(&self, medium: &Medium<T>) -> Option<String> {
        let lambda = medium.wavelength(self.frequency);
        (self.length > lambda / T::lit(10.0)).then(|| {
            format!(
                "dipole length {:?} m exceeds lambda/10 = {:?} m",
                self.length,
                lambda / T::lit(10.0)
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint<T> {
    pub r: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Scalar> FieldPoint<T> {
    pub fn new(r: T, theta: T, phi: T) -> Self {
        Self { r, theta, phi }
    }

    /// Point in the equatorial plane.
    pub fn broadside(r: T) -> Self {
        Self::new(r, T::FRAC_PI_2(), T::zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EMField<T> {
    pub e_r: Cx<T>,
    pub e_theta: Cx<T>,
    pub e_phi: Cx<T>,
    pub h_r: Cx<T>,
    pub h_theta: Cx<T>,
    pub h_phi: Cx<T>,
}

impl<T: Scalar> EMField<T> {
    /// Magnitude of the electric field vector.
    pub fn e_magnitude(&self) -> T {
        (self.e_r.norm_sqr() + self.e_theta.norm_sqr() + self.e_phi.norm_sqr()).sqrt()
    }
}

pub fn fields_at<T: Scalar>(
    src: &DipoleSource<T>,
    medium: &Medium<T>,
    p: &FieldPoint<T>,
) -> Result<EMField<T>> {
    if !(p.r > T::zero()) || !p.r.is_finite() {
        return Err(Error::Geometry("field point at r = 0 is singular".into()));
    }
    if !(p.theta >= T::zero() && p.theta <= T::PI()) {
        return Err(Error::Geometry("theta must lie in [0, pi]".into()));
    }
    let beta = medium.beta(src.frequency);
    let eta = medium.eta();
    let r = p.r;
    let il = src.moment();
    let sin_t = p.theta.sin();
    // written as a sine so theta = pi/2 gives an exact zero
    let cos_t = (T::FRAC_PI_2() - p.theta).sin();
    let j = cx(T::zero(), T::one());
    let phase = Cx::from_polar(T::one(), -beta * r);
    let inv_jbr = cx(T::zero(), -T::one() / (beta * r));
    let four_pi = T::lit(4.0) * T::PI();

    let e_r = il * (eta * cos_t / T::TAU()) * (Cx::from(T::one()) + inv_jbr) / (r * r) * phase;
    let near = T::one() / (beta * beta * r * r);
    let e_theta = j * il * (eta * beta * sin_t / four_pi) / r
        * (Cx::from(T::one() - near) + inv_jbr)
        * phase;
    let h_phi = j * il * (beta * sin_t / four_pi) / r * (Cx::from(T::one()) + inv_jbr) * phase;
    Ok(EMField {
        e_r,
        e_theta,
        h_phi,
        ..EMField::default()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Region {
    Near,
    Intermediate,
    Far,
}

/// Region boundaries on `βr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionThresholds<T> {
    pub near_below: T,
    pub far_above: T,
}

impl<T: Scalar> Default for RegionThresholds<T> {
    fn default() -> Self {
        Self {
            near_below: T::lit(0.1),
            far_above: T::lit(10.0),
        }
    }
}

pub fn region_classify<T: Scalar>(medium: &Medium<T>, r: T, f: T) -> Result<Region> {
    region_classify_with(medium, r, f, &RegionThresholds::default())
}

pub fn region_classify_with<T: Scalar>(
    medium: &Medium<T>,
    r: T,
    f: T,
    th: &RegionThresholds<T>,
) -> Result<Region> {
    if !(f > T::zero()) {
        return Err(Error::NonPositiveFrequency(f.as_f64()));
    }
    if !(r > T::zero()) {
        return Err(Error::Geometry("r must be positive".into()));
    }
    let br = medium.beta(f) * r;
    Ok(if br < th.near_below {
        Region::Near
    } else if br > th.far_above {
        Region::Far
    } else {
        Region::Intermediate
    })
}

/// Crossover radius between reactive and radiating zones, `λ/2π = 1/β`.
pub fn radiation_zone_radius<T: Scalar>(medium: &Medium<T>, f: T) -> T {
    T::one() / medium.beta(f)
}

/// Time-averaged radial power density, W/m².
pub fn radial_poynting<T: Scalar>(field: &EMField<T>) -> T {
    T::lit(0.5) * (field.e_theta * field.h_phi.conj()).re
}

/// Total radiated power of the dipole, W.
pub fn radiated_power<T: Scalar>(src: &DipoleSource<T>, medium: &Medium<T>) -> T {
    let bil = medium.beta(src.frequency) * src.moment().norm();
    medium.eta() * bil * bil / (T::lit(12.0) * T::PI())
}
