//! Parameter-space sweeps.
//!
//! ```toml
//! mach = 1.0
//! ratio = { start = 1.0, stop = 4.0, step = 0.01 }
//! numerical = false   # optional: run the numerical cross-checks per point
//!
//! [F]
//! f11 = 0.5
//! f22 = { start = 0.0, stop = 1.0, step = 0.1 }
//! ```
//!
//! Rows come out in lexicographic order of `(M, R, F11, F12, F21, F22)`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{classify, ClassifyOptions, Verdict};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::params::{Deformation, ShockParameters};
use crate::scan::ScanConfig;

pub const MAX_POINTS: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Fixed(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl Default for Axis {
    fn default() -> Self {
        Axis::Fixed(0.0)
    }
}

impl Axis {
    /// Number of points; a range with `stop < start` is empty.
    pub fn len(&self) -> Result<u128> {
        match *self {
            Axis::Fixed(_) => Ok(1),
            Axis::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0) {
                    return Err(Error::Config(format!(
                        "bad range {start}..{stop} step {step}"
                    )));
                }
                if stop < start {
                    return Ok(0);
                }
                let n = ((stop - start) / step + 1e-9).floor();
                if n >= 1e30 {
                    return Ok(u128::MAX);
                }
                Ok(n as u128 + 1)
            }
        }
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }

    /// `k`-th value, `start + k * step` for ranges.
    pub fn value(&self, k: usize) -> f64 {
        match *self {
            Axis::Fixed(v) => v,
            Axis::Range { start, step, .. } => start + k as f64 * step,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FAxes {
    pub f11: Axis,
    pub f12: Axis,
    pub f21: Axis,
    pub f22: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mach: Axis,
    pub ratio: Axis,
    #[serde(rename = "F", default)]
    pub deformation: FAxes,
    #[serde(default)]
    pub mach_upstream: Option<f64>,
    #[serde(default)]
    pub numerical: bool,
    #[serde(default)]
    pub solver: Option<ScanConfig>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn axes(&self) -> [Axis; 6] {
        let f = &self.deformation;
        [self.mach, self.ratio, f.f11, f.f12, f.f21, f.f22]
    }

    /// Total point count, saturating.
    pub fn len(&self) -> Result<u128> {
        let mut n: u128 = 1;
        for a in self.axes() {
            n = n.saturating_mul(a.len()?);
        }
        Ok(n)
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "M")]
    pub mach: f64,
    #[serde(rename = "R")]
    pub ratio: f64,
    #[serde(rename = "F11")]
    pub f11: f64,
    #[serde(rename = "F12")]
    pub f12: f64,
    #[serde(rename = "F21")]
    pub f21: f64,
    #[serde(rename = "F22")]
    pub f22: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    #[serde(rename = "Mstar")]
    pub mach_star: f64,
    pub beta: f64,
    pub ell0: f64,
    pub sigma: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "K3")]
    pub k3: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub boundary_roots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Row indices where the numerical checks disagreed with the closed form.
    pub disagreements: Vec<usize>,
}

fn row_for(p: &ShockParameters, opts: &ClassifyOptions) -> Result<(SweepRow, bool)> {
    let (v, agree) = match classify(p, opts) {
        Ok(v) => (v, true),
        Err(Error::Disagreement(v)) => (*v, false),
        Err(e) => return Err(e),
    };
    let f = p.deformation;
    let m1 = (f.f11 * f.f11 + f.f12 * f.f12).sqrt();
    let m2 = (f.f21 * f.f21 + f.f22 * f.f22).sqrt();
    let dq = v.derived;
    let g = |h: fn(&crate::params::DerivedQuantities) -> f64| dq.as_ref().map_or(f64::NAN, h);
    let row = SweepRow {
        mach: p.mach,
        ratio: p.ratio,
        f11: f.f11,
        f12: f.f12,
        f21: f.f21,
        f22: f.f22,
        m1,
        m2,
        mach_star: (1.0 + m1 * m1).sqrt(),
        beta: g(|d| d.beta),
        ell0: f.ell0(),
        sigma: g(|d| d.sigma),
        k: g(|d| d.k),
        k1: g(|d| d.k1),
        k2: g(|d| d.k2),
        k3: g(|d| d.k3),
        margin: v.margin,
        verdict: v.verdict,
        boundary_roots: v.delta_branch_roots,
    };
    Ok((row, agree))
}

/// Evaluates every grid point. Points are processed concurrently under
/// `Execution::Parallel`; row order is fixed by the grid index.
pub fn sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepOutput> {
    let total = spec.len()?;
    if total > MAX_POINTS {
        return Err(Error::SweepTooLarge(total));
    }
    let axes = spec.axes();
    let lens: Vec<usize> = axes
        .iter()
        .map(|a| a.len().map(|n| n as usize))
        .collect::<Result<_>>()?;
    let opts = ClassifyOptions {
        boundary_roots: true,
        numerical: spec.numerical,
        scan: spec.solver.unwrap_or_default(),
        exec: Execution::Sequential,
        ..ClassifyOptions::default()
    };

    let results = map_indexed(total as usize, exec, |flat| {
        let mut rem = flat;
        let mut vals = [0.0; 6];
        for a in (0..6).rev() {
            vals[a] = axes[a].value(rem % lens[a]);
            rem /= lens[a];
        }
        let f = Deformation::new(vals[2], vals[3], vals[4], vals[5]);
        let p = ShockParameters {
            mach: vals[0],
            ratio: vals[1],
            deformation: f,
            mach_upstream: spec.mach_upstream,
        };
        p.validate()?;
        row_for(&p, &opts)
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut disagreements = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let (row, agree) = r?;
        if !agree {
            disagreements.push(i);
        }
        rows.push(row);
    }
    Ok(SweepOutput {
        rows,
        disagreements,
    })
}

pub const CSV_HEADER: [&str; 19] = [
    "M",
    "R",
    "F11",
    "F12",
    "F21",
    "F22",
    "M1",
    "M2",
    "Mstar",
    "beta",
    "ell0",
    "sigma",
    "K",
    "K1",
    "K2",
    "K3",
    "margin",
    "verdict",
    "boundary_roots",
];

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line; non-finite numbers become `null`.
pub fn write_jsonl<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
