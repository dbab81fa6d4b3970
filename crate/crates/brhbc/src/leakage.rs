//! Off-body leakage versus distance and the confinement ratio.

use num_complex::Complex64;

use crate::dipole::{fields_at, radiation_zone_radius, DipoleSource, FieldPoint, Medium};
use crate::error::{invariant, Result};
use crate::network::LinkModel;

#[derive(Debug, Clone, PartialEq)]
pub struct LeakageProfile {
    pub frequency: f64,
    pub distances: Vec<f64>,
    pub v_off: Vec<f64>,
    pub v_on: f64,
    pub ratio: Vec<f64>,
    /// Effective radiating moment of the body, A·m.
    pub moment: Complex64,
    pub radiation_zone_radius: f64,
}

/// Off-body voltage at a floating receiver broadside to the body.
///
/// The body radiates as one short dipole whose moment is the integral of the
/// axial line current; the receiver uses the Rx device geometry and load.
pub fn offbody_profile(
    model: &LinkModel<f64>,
    f: f64,
    distances: &[f64],
    v_in: f64,
) -> Result<LeakageProfile> {
    if distances.is_empty() || distances.iter().any(|&d| !(d > 0.0)) {
        return Err(invariant("distances must be positive"));
    }
    if distances.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invariant("distances must be strictly increasing"));
    }
    let state = model.solve(f, Complex64::new(v_in, 0.0))?;
    let moment = state
        .elements
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, e| acc + e.mean_current() * e.length);
    let medium = Medium::free_space();
    let src = DipoleSource::new(moment, 1.0, f)?;
    let pickup = model.dev_rx.floating_pickup(&model.termination, f);
    let v_off = distances
        .iter()
        .map(|&d| {
            let field = fields_at(&src, &medium, &FieldPoint::broadside(d))?;
            Ok((field.e_theta * pickup).norm())
        })
        .collect::<Result<Vec<_>>>()?;
    let v_on = state.v_rx.norm();
    let ratio = v_off.iter().map(|v| v / v_on).collect();
    Ok(LeakageProfile {
        frequency: f,
        distances: distances.to_vec(),
        v_off,
        v_on,
        ratio,
        moment,
        radiation_zone_radius: radiation_zone_radius(&medium, f),
    })
}
