use std::fmt;

use num_rational::Ratio;
use num_traits::ToPrimitive;

use super::Arrangement;
use crate::error::{Error, Result};

/// The four tiling factors and the resulting cost, all exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub lambda: usize,
    pub m: usize,
    pub n: usize,
    pub points: usize,
    /// Distinct computed points outside the point-set.
    pub phi_td: usize,
    /// Thread evaluations beyond one per distinct computed point.
    pub phi_r: usize,
    pub phi_ru: Ratio<i64>,
    pub phi_cmr: Ratio<i64>,
    pub cost: Ratio<i64>,
}

impl CostReport {
    pub fn cost_f64(&self) -> f64 {
        self.cost.to_f64().unwrap_or(f64::NAN)
    }

    /// Flat `key value` pairs in a fixed order.
    pub fn to_record(&self) -> Vec<(&'static str, String)> {
        vec![
            ("lambda", self.lambda.to_string()),
            ("block_m", self.m.to_string()),
            ("block_n", self.n.to_string()),
            ("points", self.points.to_string()),
            ("phi_td", self.phi_td.to_string()),
            ("phi_r", self.phi_r.to_string()),
            ("phi_ru", self.phi_ru.to_string()),
            ("phi_cmr", self.phi_cmr.to_string()),
            ("cost", self.cost.to_string()),
        ]
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_record() {
            writeln!(f, "{k} {v}")?;
        }
        Ok(())
    }
}

/// Evaluates an arrangement: `φ_TD = |⋃Comp \ P|`, `φ_R = λmn − |P| − φ_TD`,
/// `φ_RU = |P|/(λmn)`, `φ_CMR = (1/λ)·Σ 1/s_i` and `cost = λ/φ_CMR`.
pub fn cost_metrics(arr: &Arrangement) -> Result<CostReport> {
    arr.verify_cover()?;
    let lambda = arr.lambda();
    if lambda == 0 {
        return Err(Error::Empty("arrangement has no blocks".into()));
    }
    let (m, n) = (arr.m(), arr.n());
    let points = arr.point_set().len();
    let phi_td = arr.divergent_points();
    let threads = lambda * m * n;
    let phi_r = threads - points - phi_td;
    let lam = lambda as i64;
    let phi_ru = Ratio::new(points as i64, threads as i64);
    let inv_sum: Ratio<i64> = arr
        .blocks()
        .iter()
        .map(|b| Ratio::new(1, b.stretch as i64))
        .sum();
    let phi_cmr = inv_sum / lam;
    let cost = Ratio::from_integer(lam) / phi_cmr;
    Ok(CostReport {
        lambda,
        m,
        n,
        points,
        phi_td,
        phi_r,
        phi_ru,
        phi_cmr,
        cost,
    })
}
