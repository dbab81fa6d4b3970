//! Sine and cosine integrals.
//!
//! Power series below `x = 4`, the continued fraction for `E1(ix)` above
//! (modified Lentz).

use num_complex::Complex;

use crate::consts::EULER_GAMMA;
use crate::scalar::Scalar;

const SERIES_LIMIT: f64 = 4.0;
const MAX_ITER: usize = 200;

/// Sine integral `Si(x) = ∫0^x sin t / t dt`.
pub fn si<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        return -si(-x);
    }
    if x <= T::lit(SERIES_LIMIT) {
        si_series(x)
    } else {
        let (_, s) = large_arg(x);
        s
    }
}

/// Cosine integral `Ci(x)` for `x > 0`.
pub fn ci<T: Scalar>(x: T) -> T {
    if x <= T::lit(SERIES_LIMIT) {
        T::lit(EULER_GAMMA) + x.ln() - cin_series(x)
    } else {
        large_arg(x).0
    }
}

/// Entire cosine integral `Cin(x) = ∫0^x (1 - cos t) / t dt = γ + ln x - Ci(x)`.
pub fn cin<T: Scalar>(x: T) -> T {
    let x = x.abs();
    if x <= T::lit(SERIES_LIMIT) {
        cin_series(x)
    } else {
        T::lit(EULER_GAMMA) + x.ln() - large_arg(x).0
    }
}

fn si_series<T: Scalar>(x: T) -> T {
    let x2 = x * x;
    // term_k = (-1)^k x^(2k+1) / (2k+1)!
    let mut term = x;
    let mut sum = x;
    for k in 1..60 {
        let n = T::lit((2 * k) as f64);
        term = -term * x2 / (n * (n + T::one()));
        let add = term / (n + T::one());
        sum = sum + add;
        if add.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

fn cin_series<T: Scalar>(x: T) -> T {
    let x2 = x * x;
    // term_k = (-1)^(k+1) x^(2k) / (2k)!
    let mut term = x2 / T::lit(2.0);
    let mut sum = term / T::lit(2.0);
    for k in 2..60 {
        let n = T::lit((2 * k) as f64);
        term = -term * x2 / ((n - T::one()) * n);
        let add = term / n;
        sum = sum + add;
        if add.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

/// Returns `(Ci(x), Si(x))` for large positive `x`.
fn large_arg<T: Scalar>(x: T) -> (T, T) {
    let one = Complex::new(T::one(), T::zero());
    let tiny = T::min_positive_value().sqrt();
    let mut b = Complex::new(T::one(), x);
    let mut c = Complex::new(T::one() / tiny, T::zero());
    let mut d = one / b;
    let mut h = d;
    for i in 2..MAX_ITER {
        let a = -T::lit(((i - 1) * (i - 1)) as f64);
        b = b + Complex::new(T::lit(2.0), T::zero());
        d = one / (d * a + b);
        c = b + one * a / c;
        let del = c * d;
        h = h * del;
        if (del - one).norm() < T::epsilon() {
            break;
        }
    }
    h = Complex::new(x.cos(), -x.sin()) * h;
    (-h.re, T::FRAC_PI_2() + h.im)
}
