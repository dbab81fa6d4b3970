//! Measurement ingestion, correction factors and body-to-ground capacitance fitting.

use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{ChannelResponse, EQS_BAND};
use crate::error::{csv_error, invariant, Error, Result};
use crate::network::{BodyGroundCoupling, GroundPlacement, LinkModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub frequency: f64,
    pub rx_power_dbm: f64,
    pub tx_power_dbm: f64,
}

fn read_rows<R: Read, const N: usize>(source: R, header: [&str; N]) -> Result<Vec<[f64; N]>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let got = rdr.headers().map_err(csv_error)?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut row = [0.0; N];
        for (i, v) in row.iter_mut().enumerate() {
            let raw = rec.get(i).unwrap_or("");
            *v = raw
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("`{raw}` is not a finite number ({})", header[i]),
                })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Reads `frequency_hz,rx_power_dbm,tx_power_dbm` and sorts by frequency.
pub fn ingest_sweep<R: Read>(source: R) -> Result<Vec<SweepRecord>> {
    let rows = read_rows(source, ["frequency_hz", "rx_power_dbm", "tx_power_dbm"])?;
    if rows.is_empty() {
        return Err(invariant("measurement file has no records"));
    }
    let mut recs: Vec<SweepRecord> = rows
        .into_iter()
        .map(|[f, rx, tx]| SweepRecord {
            frequency: f,
            rx_power_dbm: rx,
            tx_power_dbm: tx,
        })
        .collect();
    if recs.iter().any(|r| !(r.frequency > 0.0)) {
        return Err(invariant("measurement frequencies must be positive"));
    }
    recs.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    if let Some(w) = recs.windows(2).find(|w| w[0].frequency == w[1].frequency) {
        return Err(invariant(format!(
            "duplicate measurement frequency {} Hz",
            w[0].frequency
        )));
    }
    Ok(recs)
}

/// Frequency-dependent dB offset, log-frequency piecewise-linear.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrectionTable {
    Constant(f64),
    Table(Vec<(f64, f64)>),
}

impl CorrectionTable {
    pub fn zero() -> Self {
        CorrectionTable::Constant(0.0)
    }

    /// Reads `frequency_hz,offset_db`.
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let rows = read_rows(source, ["frequency_hz", "offset_db"])?;
        Self::from_points(rows.into_iter().map(|[f, o]| (f, o)).collect())
    }

    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invariant("correction table is empty"));
        }
        if points.iter().any(|p| !(p.0 > 0.0)) || points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(invariant(
                "correction frequencies must be positive and strictly increasing",
            ));
        }
        Ok(CorrectionTable::Table(points))
    }

    pub fn offset_at(&self, f: f64) -> Result<f64> {
        match self {
            CorrectionTable::Constant(c) => Ok(*c),
            CorrectionTable::Table(p) => {
                let (lo, hi) = (p[0].0, p[p.len() - 1].0);
                if !(f >= lo && f <= hi) {
                    return Err(Error::CoverageGap(f));
                }
                let i = p.partition_point(|x| x.0 < f);
                if p[i].0 == f {
                    return Ok(p[i].1);
                }
                let t = (f.ln() - p[i - 1].0.ln()) / (p[i].0.ln() - p[i - 1].0.ln());
                Ok(p[i - 1].1 + t * (p[i].1 - p[i - 1].1))
            }
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            CorrectionTable::Constant(c) => CorrectionTable::Constant(-c),
            CorrectionTable::Table(p) => {
                CorrectionTable::Table(p.iter().map(|&(f, o)| (f, -o)).collect())
            }
        }
    }

    /// Pointwise sum on the union grid, restricted to the common coverage.
    pub fn sum(&self, other: &Self) -> Self {
        use CorrectionTable::*;
        match (self, other) {
            (Constant(a), Constant(b)) => Constant(a + b),
            (Constant(c), Table(p)) | (Table(p), Constant(c)) => {
                Table(p.iter().map(|&(f, o)| (f, o + c)).collect())
            }
            (Table(a), Table(b)) => {
                let lo = a[0].0.max(b[0].0);
                let hi = a[a.len() - 1].0.min(b[b.len() - 1].0);
                let mut grid: Vec<f64> = a
                    .iter()
                    .chain(b.iter())
                    .map(|p| p.0)
                    .filter(|&f| f >= lo && f <= hi)
                    .collect();
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                Table(
                    grid.into_iter()
                        .map(|f| (f, self.offset_at(f).unwrap() + other.offset_at(f).unwrap()))
                        .collect(),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionFactors {
    pub tx_offset_db: f64,
    pub rx_offset_db: CorrectionTable,
    pub buffer_offset_db: CorrectionTable,
}

impl CorrectionFactors {
    pub fn zero() -> Self {
        Self {
            tx_offset_db: 0.0,
            rx_offset_db: CorrectionTable::zero(),
            buffer_offset_db: CorrectionTable::zero(),
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            tx_offset_db: -self.tx_offset_db,
            rx_offset_db: self.rx_offset_db.negated(),
            buffer_offset_db: self.buffer_offset_db.negated(),
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self {
            tx_offset_db: self.tx_offset_db + other.tx_offset_db,
            rx_offset_db: self.rx_offset_db.sum(&other.rx_offset_db),
            buffer_offset_db: self.buffer_offset_db.sum(&other.buffer_offset_db),
        }
    }
}

/// Shifts recorded powers by the correction factors.
pub fn apply_corrections(records: &[SweepRecord], corr: &CorrectionFactors) -> Result<Vec<SweepRecord>> {
    records
        .iter()
        .map(|r| {
            Ok(SweepRecord {
                frequency: r.frequency,
                rx_power_dbm: r.rx_power_dbm
                    + corr.rx_offset_db.offset_at(r.frequency)?
                    + corr.buffer_offset_db.offset_at(r.frequency)?,
                tx_power_dbm: r.tx_power_dbm + corr.tx_offset_db,
            })
        })
        .collect()
}

/// Channel gain in dB after corrections; magnitude-only response.
pub fn calibrated_gain(records: &[SweepRecord], corr: &CorrectionFactors) -> Result<ChannelResponse> {
    let mut recs = apply_corrections(records, corr)?;
    recs.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(ChannelResponse::from_gain_db(
        recs.iter().map(|r| r.frequency).collect(),
        recs.iter().map(|r| r.rx_power_dbm - r.tx_power_dbm).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub value: f64,
    /// Objective at the optimum.
    pub objective: f64,
    pub evaluations: usize,
}

/// Golden-section minimization over `log(x)` on `[lo, hi]`.
///
/// Fails as non-identifiable when the objective is flat or the minimum sits on
/// the bracket edge.
pub fn fit_log_parameter<F>(lo: f64, hi: f64, mut objective: F) -> Result<FitResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(invariant("fit bracket must satisfy 0 < lo < hi"));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut evals = 0;
    let mut eval = |u: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        objective(u.exp())
    };
    let j_lo = eval(a, &mut evals)?;
    let j_hi = eval(b, &mut evals)?;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, &mut evals)?;
    let mut fd = eval(d, &mut evals)?;
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c, &mut evals)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d, &mut evals)?;
        }
    }
    let u = 0.5 * (a + b);
    let j = eval(u, &mut evals)?;
    let spread = j_lo.max(j_hi) - j;
    if !(spread > 1e-12 * (1.0 + j.abs())) {
        return Err(Error::NonIdentifiable("objective is flat over the bracket".into()));
    }
    let edge = 1e-3 * (hi.ln() - lo.ln());
    if u - lo.ln() < edge || hi.ln() - u < edge || j_lo <= j || j_hi <= j {
        return Err(Error::NonIdentifiable(format!(
            "optimum at the bracket edge ({:.4e})",
            u.exp()
        )));
    }
    Ok(FitResult {
        value: u.exp(),
        objective: j,
        evaluations: evals,
    })
}

/// Fit result for the body-to-ground capacitance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbFit {
    pub c_b: f64,
    /// RMS gain error over the EQS points, dB.
    pub residual_db: f64,
    pub evaluations: usize,
    pub points: usize,
}

pub const CB_BRACKET: (f64, f64) = (1e-12, 1e-9);

fn with_cb(model: &LinkModel<f64>, c_b: f64) -> LinkModel<f64> {
    let mut m = model.clone();
    let placement = m.ground.map_or(
        GroundPlacement::Lumped {
            position: 0.5 * m.path.total_length(),
        },
        |g| g.placement,
    );
    m.ground = Some(BodyGroundCoupling { c_b, placement });
    m
}

/// Least-squares fit of C_B against measured EQS-band gains.
pub fn fit_body_ground_capacitance(measured: &ChannelResponse, model: &LinkModel<f64>) -> Result<CbFit> {
    let pts: Vec<(f64, f64)> = measured
        .frequencies
        .iter()
        .zip(&measured.gain_db)
        .filter(|(&f, _)| f >= EQS_BAND.0 && f <= EQS_BAND.1)
        .map(|(&f, &g)| (f, g))
        .collect();
    if pts.len() < 2 {
        return Err(Error::NonIdentifiable(
            "fewer than two measurement points in the EQS band".into(),
        ));
    }
    let objective = |c_b: f64| -> Result<f64> {
        let m = with_cb(model, c_b);
        let mut acc = 0.0;
        for &(f, g) in &pts {
            let d = 20.0 * m.transfer_function(f)?.norm().log10() - g;
            acc += d * d;
        }
        Ok(acc / pts.len() as f64)
    };
    let fit = fit_log_parameter(CB_BRACKET.0, CB_BRACKET.1, objective)?;
    Ok(CbFit {
        c_b: fit.value,
        residual_db: fit.objective.sqrt(),
        evaluations: fit.evaluations,
        points: pts.len(),
    })
}

/// Synthetic sweep generated by the model with a known C_B plus uniform dB noise.
pub fn synthesize_measurement(
    model: &LinkModel<f64>,
    frequencies: &[f64],
    c_b: f64,
    tx_power_dbm: f64,
    noise_db: f64,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    let m = with_cb(model, c_b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    frequencies
        .iter()
        .map(|&f| {
            let g = 20.0 * m.transfer_function(f)?.norm().log10();
            let n = if noise_db > 0.0 {
                rng.gen_range(-noise_db..=noise_db)
            } else {
                0.0
            };
            Ok(SweepRecord {
                frequency: f,
                rx_power_dbm: tx_power_dbm + g + n,
                tx_power_dbm,
            })
        })
        .collect()
}
