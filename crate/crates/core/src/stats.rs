//! Statistics for alignment studies: McNemar's test on paired coherence
//! labels, per-axis complexity means, and a one-sided Welch t-test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::variants::Shape;

/// Paired outcomes: first letter is the model's label, second the user's.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub yy: u64,
    pub yn: u64,
    pub ny: u64,
    pub nn: u64,
}

impl ContingencyTable {
    pub fn new(yy: u64, yn: u64, ny: u64, nn: u64) -> Self {
        Self { yy, yn, ny, nn }
    }

    pub fn total(&self) -> u64 {
        self.yy + self.yn + self.ny + self.nn
    }

    pub fn record(&mut self, model: bool, user: bool) {
        match (model, user) {
            (true, true) => self.yy += 1,
            (true, false) => self.yn += 1,
            (false, true) => self.ny += 1,
            (false, false) => self.nn += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut t = Self::default();
        for (m, u) in pairs {
            t.record(m, u);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    pub chi2: f64,
    pub p: f64,
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_sf_1df(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        erfc((x / 2.0).sqrt())
    }
}

/// Uncorrected McNemar statistic on the discordant cells.
pub fn mcnemar(t: &ContingencyTable) -> Result<McNemar> {
    let discordant = t.yn + t.ny;
    if discordant == 0 {
        return Err(Error::UndefinedTest("McNemar's test needs at least one discordant pair".into()));
    }
    let diff = t.ny as f64 - t.yn as f64;
    let chi2 = diff * diff / discordant as f64;
    Ok(McNemar {
        chi2,
        p: chi2_sf_1df(chi2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
}

impl GroupSummary {
    pub fn new(mean: f64, sd: f64, n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("group size {n} is below 2")));
        }
        if !(sd >= 0.0 && sd.is_finite()) || !mean.is_finite() {
            return Err(Error::Domain(format!("invalid summary: mean {mean}, sd {sd}")));
        }
        Ok(Self { mean, sd, n })
    }

    /// Mean and sample standard deviation of `successes` ones among `n`
    /// binary observations.
    pub fn from_binary(successes: u64, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::UndefinedTest("mean of an empty group".into()));
        }
        if successes > n {
            return Err(Error::Domain(format!("{successes} successes out of {n}")));
        }
        let mean = successes as f64 / n as f64;
        let sd = if n > 1 {
            (mean * (1.0 - mean) * n as f64 / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self::new(mean, sd, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Upper-tail probability under H1: mean(a) > mean(b).
    pub p: f64,
}

/// One-sided two-sample Welch t-test from summary statistics.
pub fn t_test_one_sided(a: &GroupSummary, b: &GroupSummary) -> Result<WelchTest> {
    for g in [a, b] {
        if g.n < 2 {
            return Err(Error::Domain(format!("group size {} is below 2", g.n)));
        }
    }
    let va = a.sd * a.sd / a.n as f64;
    let vb = b.sd * b.sd / b.n as f64;
    if va + vb == 0.0 {
        return Err(Error::UndefinedTest("both groups have zero variance".into()));
    }
    let t = (a.mean - b.mean) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::UndefinedTest(e.to_string()))?;
    Ok(WelchTest { t, df, p: dist.sf(t) })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentCount {
    pub aligned: u64,
    pub not_aligned: u64,
}

impl AlignmentCount {
    pub fn total(&self) -> u64 {
        self.aligned + self.not_aligned
    }
}

/// Alignment counts keyed by debate shape.
pub type ShapeCounts = BTreeMap<Shape, AlignmentCount>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMeans {
    pub complex: GroupSummary,
    pub not_complex: GroupSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityMeans {
    pub vote: AxisMeans,
    pub breadth: AxisMeans,
    pub depth: AxisMeans,
}

/// Pools shape counts into complex and non-complex groups per axis, scoring
/// aligned samples as 1 and the rest as 0.
pub fn complexity_means(counts: &ShapeCounts) -> Result<ComplexityMeans> {
    let axis = |is_complex: fn(&Shape) -> bool, name: &str| -> Result<AxisMeans> {
        let pool = |want: bool| -> Result<GroupSummary> {
            let (aligned, total) = counts
                .iter()
                .filter(|(s, _)| is_complex(s) == want)
                .fold((0, 0), |(a, t), (_, c)| (a + c.aligned, t + c.total()));
            GroupSummary::from_binary(aligned, total).map_err(|_| {
                Error::UndefinedTest(format!(
                    "{} group on the {name} axis has {total} samples",
                    if want { "complex" } else { "non-complex" }
                ))
            })
        };
        Ok(AxisMeans {
            complex: pool(true)?,
            not_complex: pool(false)?,
        })
    };
    Ok(ComplexityMeans {
        vote: axis(|s| s.profile().vote_complex, "vote")?,
        breadth: axis(|s| s.profile().breadth_complex, "breadth")?,
        depth: axis(|s| s.profile().depth_complex, "depth")?,
    })
}
