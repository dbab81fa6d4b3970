//! Built-in self checks: uniform-line cascade and dipole field laws.

use brhbc::dipole::{fields_at, DipoleSource, FieldPoint, Medium};
use brhbc::rlgc::{dipole_radiation_resistance, PerUnitLengthParams};
use brhbc::twoport::{cascade, segment_twoport, TwoPortChain};
use brhbc::Cx;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Least-squares slope of `ln|E_theta|` against `ln r` over `βr ∈ [lo, hi]`.
pub fn e_theta_slope(lo: f64, hi: f64) -> f64 {
    let f = 1e8;
    let m = Medium::free_space();
    let beta = m.beta(f);
    let src = DipoleSource::new(Cx::new(1e-3, 0.0), 1e-3, f).unwrap();
    let n = 41;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let br = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        let r = br / beta;
        let e = fields_at(&src, &m, &FieldPoint::broadside(r)).unwrap();
        let (x, y) = (r.ln(), e.e_theta.norm().ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let nf = n as f64;
    (nf * sxy - sx * sy) / (nf * sxx - sx * sx)
}

pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();

    // 1000-section cascade vs one closed-form section of the full length
    let pul = PerUnitLengthParams {
        r: 40.0,
        l: 600e-9,
        g: 2e-4,
        c: 12e-12,
    };
    let (f, len, n) = (75e6, 1.8, 1000);
    let t0 = std::time::Instant::now();
    let seg = segment_twoport(&pul, len / n as f64, f).unwrap();
    let mut chain = TwoPortChain::new(f);
    for _ in 0..n {
        chain.push(seg);
    }
    let cascaded = cascade(&chain).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let exact = segment_twoport(&pul, len, f).unwrap();
    let rel = [
        (cascaded.a, exact.a),
        (cascaded.b, exact.b),
        (cascaded.c, exact.c),
        (cascaded.d, exact.d),
    ]
    .iter()
    .map(|(x, y)| (x - y).norm() / y.norm())
    .fold(0.0, f64::max);
    out.push(Check {
        name: "uniform line cascade",
        passed: rel < 1e-6 && elapsed < 1.0,
        detail: format!("max rel err {rel:.2e}, {elapsed:.3} s"),
    });

    let near = e_theta_slope(1e-4, 1e-2);
    out.push(Check {
        name: "near-field slope",
        passed: (near + 3.0).abs() <= 0.05,
        detail: format!("{near:.4}"),
    });
    let far = e_theta_slope(1e2, 1e4);
    out.push(Check {
        name: "far-field slope",
        passed: (far + 1.0).abs() <= 0.05,
        detail: format!("{far:.4}"),
    });

    let m: Medium<f64> = Medium::free_space();
    let src = DipoleSource::new(Cx::new(1.0, 0.0), 1e-3, 1e8).unwrap();
    let r = 20.0 / m.beta(1e8);
    let e = fields_at(&src, &m, &FieldPoint::broadside(r)).unwrap();
    let ratio = e.e_theta.norm() / e.h_phi.norm() / m.eta();
    out.push(Check {
        name: "wave impedance at βr = 20",
        passed: (ratio - 1.0).abs() < 5e-3,
        detail: format!("|E/H|/η = {ratio:.6}"),
    });

    let rr = dipole_radiation_resistance(std::f64::consts::PI);
    out.push(Check {
        name: "half-wave radiation resistance",
        passed: (rr - 73.08).abs() < 0.05,
        detail: format!("{rr:.3} ohm"),
    });
    out
}
