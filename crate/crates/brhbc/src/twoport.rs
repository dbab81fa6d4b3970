//! ABCD (chain) matrices and their cascades.

use std::ops::Mul;

use crate::error::{invariant, Error, Result};
use crate::rlgc::PerUnitLengthParams;
use crate::scalar::{jw, re, Cx, Scalar};

/// `[V1; I1] = [[A, B], [C, D]] [V2; I2]`, with `I2` flowing out of port 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPort<T> {
    pub a: Cx<T>,
    pub b: Cx<T>,
    pub c: Cx<T>,
    pub d: Cx<T>,
}

impl<T: Scalar> TwoPort<T> {
    pub fn new(a: Cx<T>, b: Cx<T>, c: Cx<T>, d: Cx<T>) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = re(T::one());
        let zero = re(T::zero());
        Self::new(one, zero, zero, one)
    }

    pub fn series(z: Cx<T>) -> Self {
        Self {
            b: z,
            ..Self::identity()
        }
    }

    pub fn shunt(y: Cx<T>) -> Self {
        Self {
            c: y,
            ..Self::identity()
        }
    }

    pub fn determinant(&self) -> Cx<T> {
        self.a * self.d - self.b * self.c
    }

    /// `|AD - BC - 1|`; zero for a reciprocal network.
    pub fn reciprocity_error(&self) -> T {
        (self.determinant() - re(T::one())).norm()
    }

    /// `self` followed by `rhs`.
    pub fn then(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Port-2 state from port-1 state, assuming `AD - BC = 1`.
    pub fn propagate(&self, v1: Cx<T>, i1: Cx<T>) -> (Cx<T>, Cx<T>) {
        (self.d * v1 - self.b * i1, self.a * i1 - self.c * v1)
    }

    /// Input admittance with port 2 left open.
    pub fn open_input_admittance(&self) -> Cx<T> {
        self.c / self.a
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(T::zero(), T::max)
    }
}

impl<T: Scalar> Mul for TwoPort<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.then(&rhs)
    }
}

/// Exact chain matrix of a uniform lossy line section of length `dl`.
pub fn segment_twoport<T: Scalar>(pul: &PerUnitLengthParams<T>, dl: T, f: T) -> Result<TwoPort<T>> {
    if !(dl >= T::zero()) {
        return Err(invariant("segment length must be non-negative"));
    }
    if !(f > T::zero()) {
        return Err(Error::NonPositiveFrequency(f.as_f64()));
    }
    let w = T::TAU() * f;
    let z = re(pul.r) + jw(w * pul.l);
    let y = re(pul.g) + jw(w * pul.c);
    // principal roots of Z and Y keep Re(gamma) >= 0 and Re(Z0) > 0 together
    let (sz, sy) = (z.sqrt(), y.sqrt());
    let gl = sz * sy * dl;
    let z0 = sz / sy;
    let (ch, sh) = (gl.cosh(), gl.sinh());
    Ok(TwoPort::new(ch, z0 * sh, sh / z0, ch))
}

/// Ordered list of two-ports evaluated at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPortChain<T> {
    frequency: T,
    members: Vec<(T, TwoPort<T>)>,
}

impl<T: Scalar> TwoPortChain<T> {
    pub fn new(frequency: T) -> Self {
        Self {
            frequency,
            members: Vec::new(),
        }
    }

    pub fn frequency(&self) -> T {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Appends a member evaluated at `frequency`.
    pub fn push_at(&mut self, frequency: T, tp: TwoPort<T>) {
        self.members.push((frequency, tp));
    }

    pub fn push(&mut self, tp: TwoPort<T>) {
        self.members.push((self.frequency, tp));
    }
}

pub fn cascade<T: Scalar>(chain: &TwoPortChain<T>) -> Result<TwoPort<T>> {
    if chain.members.is_empty() {
        return Err(invariant("cannot cascade an empty chain"));
    }
    let mut acc = TwoPort::identity();
    for (i, (f, tp)) in chain.members.iter().enumerate() {
        if *f != chain.frequency {
            return Err(invariant(format!(
                "chain member {i} evaluated at {:?} Hz, chain at {:?} Hz",
                f, chain.frequency
            )));
        }
        acc = acc.then(tp);
    }
    Ok(acc)
}
