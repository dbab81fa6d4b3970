//! Source, couplers, segmented body line, termination and return path as one network.
//!
//! Node unknowns: Tx ground plate, body node under the Tx, body node under the
//! Rx, Rx signal plate, Rx ground plate, plus the line currents entering and
//! leaving the Tx-to-Rx section. The line sections beyond each device are open
//! stubs folded into shunt admittances.

use crate::consts::EPS0;
use crate::dielectric::TissueSet;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rlgc::{pul_params, BodySegment, PerUnitLengthParams, RadiationLoading};
use crate::scalar::{jw, re, Cx, Scalar};
use crate::twoport::{segment_twoport, TwoPort};

/// Wearable coupler: a signal disc on the skin and a floating ground plate above it.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceGeometry<T> {
    pub signal_plate_radius: T,
    /// Device thickness between signal and ground plates.
    pub plate_separation: T,
    pub ground_plate_area: T,
    pub ground_plate_thickness: T,
    /// Dielectric gap between the signal plate and skin.
    pub skin_gap: T,
    /// Height of the ground plate above earth ground.
    pub ground_distance: T,
}

impl<T: Scalar> DeviceGeometry<T> {
    /// 2.5 cm disc couplers 3 cm apart, ground plate the same size as the signal plate.
    pub fn wrist_default() -> Self {
        let r = T::lit(0.025);
        Self {
            signal_plate_radius: r,
            plate_separation: T::lit(0.03),
            ground_plate_area: T::PI() * r * r,
            ground_plate_thickness: T::lit(1e-3),
            skin_gap: T::lit(1e-3),
            ground_distance: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.signal_plate_radius, "signal_plate_radius"),
            (self.plate_separation, "plate_separation"),
            (self.ground_plate_area, "ground_plate_area"),
            (self.ground_plate_thickness, "ground_plate_thickness"),
            (self.skin_gap, "skin_gap"),
            (self.ground_distance, "ground_distance"),
        ];
        for (v, name) in fields {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Geometry(format!("device {name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn signal_area(&self) -> T {
        T::PI() * self.signal_plate_radius * self.signal_plate_radius
    }

    /// Signal plate to body, across the skin gap.
    pub fn coupling_capacitance(&self) -> T {
        T::lit(EPS0) * self.signal_area() / self.skin_gap
    }

    /// Ground plate to body, through the device.
    pub fn plate_capacitance(&self) -> T {
        T::lit(EPS0) * self.signal_area().min(self.ground_plate_area) / self.plate_separation
    }

    /// Voltage across the load of a floating receiver per unit incident field (V per V/m).
    ///
    /// The plates form a Thevenin source `E * plate_separation` behind the
    /// inter-plate capacitance.
    pub fn floating_pickup(&self, term: &TerminationNetwork<T>, f: T) -> Cx<T> {
        let w = T::TAU() * f;
        let yg = jw(w * self.plate_capacitance());
        yg / (yg + term.admittance(w)) * self.plate_separation
    }

    pub fn return_capacitance(&self) -> T {
        return_path_capacitance(self, self.ground_distance).expect("validated geometry")
    }
}

/// Ground plate to earth: disc self-capacitance plus a parallel-plate term.
pub fn return_path_capacitance<T: Scalar>(dev: &DeviceGeometry<T>, ground_distance: T) -> Result<T> {
    if !(ground_distance > T::zero()) {
        return Err(Error::Geometry("ground_distance must be positive".into()));
    }
    let eps0 = T::lit(EPS0);
    let a_eq = (dev.ground_plate_area / T::PI()).sqrt();
    Ok(T::lit(8.0) * eps0 * a_eq + eps0 * dev.ground_plate_area / ground_distance)
}

/// Wire-over-ground estimate of C_B for the segments of `path`.
///
/// Grows as any segment moves toward the ground plane. Useful when no
/// measured C_B is available.
pub fn geometric_body_capacitance<T: Scalar>(path: &BodyPath<T>) -> Result<T> {
    let mut total = T::zero();
    for seg in &path.segments {
        seg.validate()?;
        total = total + T::TAU() * T::lit(EPS0) * seg.length / (seg.axis_height() / seg.outer_radius).acosh();
    }
    Ok(total)
}

/// Receiver load `R_L || C_L`; either element may be absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationNetwork<T> {
    pub r_l: Option<T>,
    pub c_l: Option<T>,
}

impl<T: Scalar> TerminationNetwork<T> {
    pub fn new(r_l: Option<T>, c_l: Option<T>) -> Result<Self> {
        let t = Self { r_l, c_l };
        t.validate()?;
        Ok(t)
    }

    pub fn capacitive(c_l: T) -> Self {
        Self {
            r_l: None,
            c_l: Some(c_l),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_l.is_none() && self.c_l.is_none() {
            return Err(Error::Geometry("termination needs R_L or C_L".into()));
        }
        if self.r_l.is_some_and(|r| !(r > T::zero())) || self.c_l.is_some_and(|c| !(c > T::zero())) {
            return Err(Error::Geometry("termination elements must be positive".into()));
        }
        Ok(())
    }

    pub fn admittance(&self, w: T) -> Cx<T> {
        let g = self.r_l.map_or(T::zero(), |r| T::one() / r);
        let b = self.c_l.map_or(T::zero(), |c| w * c);
        Cx::new(g, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundPlacement<T> {
    /// Spread uniformly along the whole body path.
    Distributed,
    /// Concentrated at one position along the path.
    Lumped { position: T },
}

/// Parasitic capacitance from the body to earth ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyGroundCoupling<T> {
    pub c_b: T,
    pub placement: GroundPlacement<T>,
}

impl<T: Scalar> BodyGroundCoupling<T> {
    pub fn impedance(&self, f: T) -> Cx<T> {
        re(T::one()) / jw(T::TAU() * f * self.c_b)
    }
}

/// Ordered body segments and where the devices sit along them.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyPath<T> {
    pub segments: Vec<BodySegment<T>>,
    pub tx_position: T,
    pub rx_position: T,
}

impl<T: Scalar> BodyPath<T> {
    pub fn total_length(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |acc, s| acc + s.length)
    }

    /// Segment index containing position `x`.
    pub fn segment_at(&self, x: T) -> usize {
        let mut end = T::zero();
        for (i, s) in self.segments.iter().enumerate() {
            end = end + s.length;
            if x <= end {
                return i;
            }
        }
        self.segments.len().saturating_sub(1)
    }
}

/// Full link description.
#[derive(Debug, Clone)]
pub struct LinkModel<T> {
    pub path: BodyPath<T>,
    pub dev_tx: DeviceGeometry<T>,
    pub dev_rx: DeviceGeometry<T>,
    pub termination: TerminationNetwork<T>,
    pub ground: Option<BodyGroundCoupling<T>>,
    /// Scale on the body radiation resistance; `None` disables it.
    pub radiation_scale: Option<T>,
    pub n_segments: usize,
    pub tissues: TissueSet<T>,
}

/// One discretized line element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineElement<T> {
    pub start: T,
    pub length: T,
    pub segment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementState<T> {
    pub start: T,
    pub length: T,
    pub segment: usize,
    /// Axial current at the element ends, positive along the path.
    pub current_start: Cx<T>,
    pub current_end: Cx<T>,
    /// Series impedance per metre, `R' + jωL'`.
    pub series_impedance: Cx<T>,
}

impl<T: Scalar> ElementState<T> {
    pub fn mean_current(&self) -> Cx<T> {
        (self.current_start + self.current_end) * T::lit(0.5)
    }
}

/// Solved network at one frequency.
#[derive(Debug, Clone)]
pub struct LinkState<T> {
    pub frequency: T,
    pub v_in: Cx<T>,
    pub v_rx: Cx<T>,
    /// Current delivered by the source into the Tx signal plate.
    pub i_tx: Cx<T>,
    pub load_admittance: Cx<T>,
    pub node_positions: Vec<T>,
    pub node_voltages: Vec<Cx<T>>,
    pub elements: Vec<ElementState<T>>,
}

impl<T: Scalar> LinkState<T> {
    pub fn gain(&self) -> Cx<T> {
        self.v_rx / self.v_in
    }

    /// Time-averaged power delivered by the source, W.
    pub fn input_power(&self) -> T {
        T::lit(0.5) * (self.v_in * self.i_tx.conj()).re
    }

    /// Time-averaged power dissipated in the load, W.
    pub fn load_power(&self) -> T {
        T::lit(0.5) * self.v_rx.norm_sqr() * self.load_admittance.re
    }
}

impl<T: Scalar> LinkModel<T> {
    pub fn validate(&self) -> Result<()> {
        if self.path.segments.is_empty() {
            return Err(Error::Geometry("body path has no segments".into()));
        }
        for s in &self.path.segments {
            s.validate()?;
        }
        self.dev_tx.validate()?;
        self.dev_rx.validate()?;
        self.termination.validate()?;
        if self.n_segments == 0 {
            return Err(Error::Geometry("n_segments must be at least 1".into()));
        }
        let total = self.path.total_length();
        let (xt, xr) = (self.path.tx_position, self.path.rx_position);
        if !(xt >= T::zero() && xr <= total && xt < xr) {
            return Err(Error::Geometry(
                "device positions must satisfy 0 <= tx < rx <= path length".into(),
            ));
        }
        if let Some(g) = &self.ground {
            if !(g.c_b > T::zero()) {
                return Err(Error::Geometry("C_B must be positive".into()));
            }
            if let GroundPlacement::Lumped { position } = g.placement {
                if !(position >= T::zero() && position <= total) {
                    return Err(Error::Geometry("C_B position outside the body path".into()));
                }
            }
        }
        if self.radiation_scale.is_some_and(|s| !(s >= T::zero())) {
            return Err(Error::Geometry("radiation scale must be non-negative".into()));
        }
        Ok(())
    }

    fn radiation(&self) -> Option<RadiationLoading<T>> {
        self.radiation_scale.map(|scale| RadiationLoading {
            radiating_length: self.path.total_length(),
            scale,
        })
    }

    pub fn pul_at(&self, segment: usize, f: T) -> Result<PerUnitLengthParams<T>> {
        pul_params(
            &self.path.segments[segment],
            f,
            &self.tissues,
            self.radiation().as_ref(),
        )
    }

    /// Elements with nodes placed exactly at segment joints, devices and a lumped C_B.
    pub fn discretize(&self) -> Vec<LineElement<T>> {
        let total = self.path.total_length();
        let mut marks = vec![self.path.tx_position, self.path.rx_position];
        if let Some(BodyGroundCoupling {
            placement: GroundPlacement::Lumped { position },
            ..
        }) = &self.ground
        {
            marks.push(*position);
        }
        let tol = total * T::lit(1e-12);
        let n_total = T::lit(self.n_segments as f64);
        let mut out = Vec::new();
        let mut start = T::zero();
        for (si, seg) in self.path.segments.iter().enumerate() {
            let end = start + seg.length;
            let mut cuts = vec![start];
            let mut inner: Vec<T> = marks
                .iter()
                .copied()
                .filter(|&m| m > start + tol && m < end - tol)
                .collect();
            inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
            inner.dedup_by(|a, b| (*a - *b).abs() <= tol);
            cuts.extend(inner);
            cuts.push(end);
            for w in cuts.windows(2) {
                let len = w[1] - w[0];
                let n = (n_total * len / total).round().to_usize().unwrap_or(1).max(1);
                let dl = len / T::lit(n as f64);
                for k in 0..n {
                    out.push(LineElement {
                        start: w[0] + dl * T::lit(k as f64),
                        length: dl,
                        segment: si,
                    });
                }
            }
            start = end;
        }
        out
    }

    pub fn transfer_function(&self, f: T) -> Result<Cx<T>> {
        Ok(self.solve(f, re(T::one()))?.gain())
    }

    pub fn solve(&self, f: T, v_in: Cx<T>) -> Result<LinkState<T>> {
        self.validate()?;
        if !(f > T::zero()) {
            return Err(Error::NonPositiveFrequency(f.as_f64()));
        }
        let w = T::TAU() * f;
        let elems = self.discretize();
        let n = elems.len();

        let puls = (0..self.path.segments.len())
            .map(|i| self.pul_at(i, f))
            .collect::<Result<Vec<_>>>()?;
        let mut tps = Vec::with_capacity(n);
        let mut last: Option<(usize, T, TwoPort<T>)> = None;
        for e in &elems {
            let tp = match last {
                Some((s, dl, tp)) if s == e.segment && dl == e.length => tp,
                _ => segment_twoport(&puls[e.segment], e.length, f)?,
            };
            last = Some((e.segment, e.length, tp));
            tps.push(tp);
        }

        let mut pos = Vec::with_capacity(n + 1);
        pos.extend(elems.iter().map(|e| e.start));
        pos.push(self.path.total_length());
        let nearest = |x: T| {
            (0..=n)
                .min_by(|&i, &j| {
                    (pos[i] - x)
                        .abs()
                        .partial_cmp(&(pos[j] - x).abs())
                        .unwrap()
                })
                .unwrap()
        };

        let mut ynode = vec![re(T::zero()); n + 1];
        if let Some(g) = &self.ground {
            match g.placement {
                GroundPlacement::Lumped { position } => {
                    ynode[nearest(position)] = ynode[nearest(position)] + jw(w * g.c_b);
                }
                GroundPlacement::Distributed => {
                    let total = self.path.total_length();
                    for (k, e) in elems.iter().enumerate() {
                        let half = jw(w * g.c_b * e.length / total * T::lit(0.5));
                        ynode[k] = ynode[k] + half;
                        ynode[k + 1] = ynode[k + 1] + half;
                    }
                }
            }
        }

        let it = nearest(self.path.tx_position);
        let ir = nearest(self.path.rx_position);

        let mut mid = TwoPort::identity();
        for k in it..ir {
            if k > it {
                mid = mid.then(&TwoPort::shunt(ynode[k]));
            }
            mid = mid.then(&tps[k]);
        }
        let mut left = TwoPort::identity();
        for k in (0..it).rev() {
            left = left.then(&tps[k]).then(&TwoPort::shunt(ynode[k]));
        }
        let mut right = TwoPort::identity();
        for k in ir..n {
            right = right.then(&tps[k]).then(&TwoPort::shunt(ynode[k + 1]));
        }
        let y_left = if it > 0 { left.open_input_admittance() } else { re(T::zero()) };
        let y_right = if ir < n { right.open_input_admittance() } else { re(T::zero()) };
        let y1 = ynode[it] + y_left;
        let y2 = ynode[ir] + y_right;

        let yc1 = jw(w * self.dev_tx.coupling_capacitance());
        let yg1 = jw(w * self.dev_tx.plate_capacitance());
        let yr1 = jw(w * self.dev_tx.return_capacitance());
        let yc2 = jw(w * self.dev_rx.coupling_capacitance());
        let yg2 = jw(w * self.dev_rx.plate_capacitance());
        let yr2 = jw(w * self.dev_rx.return_capacitance());
        let yl = self.termination.admittance(w);

        // unknowns: [V_gtx, V_b1, V_b2, V_srx, V_grx, I1, I2]
        let z = re(T::zero());
        let one = re(T::one());
        let mut a = [[z; 7]; 7];
        let mut b = [z; 7];
        a[0][0] = yc1 + yg1 + yr1;
        a[0][1] = -(yc1 + yg1);
        b[0] = -yc1 * v_in;
        a[1][0] = yc1 + yg1;
        a[1][1] = -(yc1 + yg1) - y1;
        a[1][5] = -one;
        b[1] = -yc1 * v_in;
        a[2][2] = yc2 + yg2 + y2;
        a[2][3] = -yc2;
        a[2][4] = -yg2;
        a[2][6] = -one;
        a[3][2] = -yc2;
        a[3][3] = yc2 + yl;
        a[3][4] = -yl;
        a[4][2] = -yg2;
        a[4][3] = -yl;
        a[4][4] = yg2 + yl + yr2;
        a[5][1] = one;
        a[5][2] = -mid.a;
        a[5][6] = -mid.b;
        a[6][5] = one;
        a[6][2] = -mid.c;
        a[6][6] = -mid.d;
        let x = linalg::solve(a, b).ok_or(Error::Singular(f.as_f64()))?;
        let (vg, vb1, vb2, vs, vgr, i1) = (x[0], x[1], x[2], x[3], x[4], x[5]);

        let mut volts = vec![z; n + 1];
        let mut cur = vec![(z, z); n];
        volts[it] = vb1;
        volts[ir] = vb2;
        let (mut v, mut i) = (vb1, i1);
        for k in it..ir {
            if k > it {
                i = i - ynode[k] * v;
            }
            let (vn, inext) = tps[k].propagate(v, i);
            cur[k] = (i, inext);
            volts[k + 1] = vn;
            v = vn;
            i = inext;
        }
        let (mut v, mut i) = (vb2, y_right * vb2);
        for k in ir..n {
            if k > ir {
                i = i - ynode[k] * v;
            }
            let (vn, inext) = tps[k].propagate(v, i);
            cur[k] = (i, inext);
            volts[k + 1] = vn;
            v = vn;
            i = inext;
        }
        // left stub walked towards the path start; flip the sign back afterwards
        let (mut v, mut i) = (vb1, y_left * vb1);
        for k in (0..it).rev() {
            if k + 1 < it {
                i = i - ynode[k + 1] * v;
            }
            let (vn, inext) = tps[k].propagate(v, i);
            cur[k] = (-inext, -i);
            volts[k] = vn;
            v = vn;
            i = inext;
        }

        let elements = elems
            .iter()
            .zip(&cur)
            .map(|(e, &(c0, c1))| {
                let p = &puls[e.segment];
                ElementState {
                    start: e.start,
                    length: e.length,
                    segment: e.segment,
                    current_start: c0,
                    current_end: c1,
                    series_impedance: Cx::new(p.r, w * p.l),
                }
            })
            .collect();

        Ok(LinkState {
            frequency: f,
            v_in,
            v_rx: vs - vgr,
            i_tx: yc1 * (vg + v_in - vb1),
            load_admittance: yl,
            node_positions: pos,
            node_voltages: volts,
            elements,
        })
    }
}

pub fn transfer_function<T: Scalar>(model: &LinkModel<T>, f: T) -> Result<Cx<T>> {
    model.transfer_function(f)
}
