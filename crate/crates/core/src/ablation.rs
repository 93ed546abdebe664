//! Density sweeps comparing each optimization against its baseline.
//!
//! Density is varied through the pattern parameter (window radius, block size,
//! stride); each grid point uses the parameter whose density is nearest the target.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acsr::{convert_layout, Acsr, AcsrLayout};
use crate::error::{Error, Result};
use crate::masks::{check_regularity, generate_pattern, PatternKind, PatternSpec};
use crate::matrix::DenseMatrix;
use crate::simexec::{build_spmm_opt, rspmm_execute, ExecMetrics, SimConfig};
use crate::tiling::{naive_tile, poset_tile_hinted};

/// Target densities as fractions of the full grid.
pub const DENSITY_GRID: [f64; 10] = [0.004, 0.008, 0.016, 0.03, 0.06, 0.12, 0.24, 0.44, 0.75, 1.0];
pub const ABLATION_SEQ_LEN: usize = 1024;
pub const ABLATION_HEAD_DIM: usize = 64;

/// Parameter whose pattern density is nearest `target`; ties go to the smaller
/// parameter.
pub fn param_for_density(kind: PatternKind, seq_len: usize, target: f64) -> Result<PatternSpec> {
    if seq_len == 0 {
        return Err(Error::InvalidSpec("seq_len must be positive".into()));
    }
    let mut best: Option<(f64, PatternSpec)> = None;
    for param in 1..=seq_len {
        let spec = PatternSpec::new(kind, param, seq_len)?;
        let gap = (spec.density() - target).abs();
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, spec));
        }
    }
    Ok(best.expect("seq_len > 0").1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationSuite {
    Tiling,
    Span,
    Alignment,
    Layout,
}

impl AblationSuite {
    pub const ALL: [AblationSuite; 4] = [
        AblationSuite::Tiling,
        AblationSuite::Span,
        AblationSuite::Alignment,
        AblationSuite::Layout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationSuite::Tiling => "tiling",
            AblationSuite::Span => "span",
            AblationSuite::Alignment => "alignment",
            AblationSuite::Layout => "layout",
        }
    }

    /// Patterns swept by the suite.
    pub fn patterns(self) -> &'static [PatternKind] {
        match self {
            AblationSuite::Tiling => &[PatternKind::Windowed, PatternKind::Blocked],
            AblationSuite::Span | AblationSuite::Layout => &PatternKind::ALL,
            AblationSuite::Alignment => &[PatternKind::Strided],
        }
    }

    /// Name of the compared quantity.
    pub fn metric(self) -> &'static str {
        match self {
            AblationSuite::Tiling => "thread_blocks",
            AblationSuite::Span => "inner_loop_iterations",
            AblationSuite::Alignment => "divergent_load_events",
            AblationSuite::Layout => "acsr_read_transactions",
        }
    }
}

impl fmt::Display for AblationSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationSuite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "unknown ablation suite '{s}' (expected tiling, span, alignment or layout)"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationConfig {
    pub seq_len: usize,
    pub head_dim: usize,
    pub sim: SimConfig,
    pub densities: Vec<f64>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            seq_len: ABLATION_SEQ_LEN,
            head_dim: ABLATION_HEAD_DIM,
            sim: SimConfig::default(),
            densities: DENSITY_GRID.to_vec(),
        }
    }
}

/// One sweep point. `baseline` is the quantity without the optimization
/// (naive tiling, full loop, identity row order, row-major layout).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub suite: AblationSuite,
    pub pattern: PatternKind,
    pub param: usize,
    pub target_density: f64,
    pub achieved_density: f64,
    pub metric: String,
    pub baseline: u64,
    pub optimized: u64,
}

impl AblationRow {
    /// `baseline / optimized`; 1 when both are zero and `None` when only the
    /// optimized count is zero.
    pub fn ratio(&self) -> Option<f64> {
        match (self.baseline, self.optimized) {
            (0, 0) => Some(1.0),
            (_, 0) => None,
            (b, o) => Some(b as f64 / o as f64),
        }
    }
}

/// Arithmetic mean of the finite ratios of `pattern`'s rows.
pub fn mean_ratio(rows: &[AblationRow], pattern: PatternKind) -> Option<f64> {
    let r: Vec<f64> = rows
        .iter()
        .filter(|r| r.pattern == pattern)
        .filter_map(AblationRow::ratio)
        .collect();
    (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64)
}

/// Runs one suite over every (pattern, density) point, in pattern then density order.
pub fn run_ablation(suite: AblationSuite, cfg: &AblationConfig) -> Result<Vec<AblationRow>> {
    cfg.sim.validate()?;
    let points: Vec<(PatternKind, f64)> = suite
        .patterns()
        .iter()
        .flat_map(|&k| cfg.densities.iter().map(move |&d| (k, d)))
        .collect();
    points
        .par_iter()
        .map(|&(kind, target)| sweep_point(suite, kind, target, cfg))
        .collect()
}

fn sweep_point(
    suite: AblationSuite,
    kind: PatternKind,
    target: f64,
    cfg: &AblationConfig,
) -> Result<AblationRow> {
    let spec = param_for_density(kind, cfg.seq_len, target)?;
    let mask = generate_pattern(&spec)?;
    let (baseline, optimized) = match suite {
        AblationSuite::Tiling => {
            let p = mask.point_set();
            let naive = naive_tile(&p, cfg.sim.tb_m, cfg.sim.tb_n);
            let poset = poset_tile_hinted(&p, cfg.sim.tb_m, cfg.sim.tb_n, Some(&spec));
            (naive.lambda() as u64, poset.lambda() as u64)
        }
        AblationSuite::Span => {
            let off = spmm_metrics(&mask, cfg, AcsrLayout::RowCompressedRowMajor, false, false)?;
            let on = spmm_metrics(&mask, cfg, AcsrLayout::RowCompressedRowMajor, true, false)?;
            (off.inner_loop_iterations, on.inner_loop_iterations)
        }
        AblationSuite::Alignment => {
            let off = spmm_metrics(&mask, cfg, AcsrLayout::RowCompressedRowMajor, false, false)?;
            let on = spmm_metrics(&mask, cfg, AcsrLayout::RowCompressedRowMajor, false, true)?;
            (off.divergent_load_events, on.divergent_load_events)
        }
        AblationSuite::Layout => {
            let row = spmm_metrics(&mask, cfg, AcsrLayout::RowCompressedRowMajor, true, true)?;
            let col = spmm_metrics(&mask, cfg, AcsrLayout::ColCompressedColMajor, true, true)?;
            (row.acsr_read_transactions, col.acsr_read_transactions)
        }
    };
    Ok(AblationRow {
        suite,
        pattern: kind,
        param: spec.param,
        target_density: target,
        achieved_density: spec.density(),
        metric: suite.metric().to_string(),
        baseline,
        optimized,
    })
}

/// Sparse × dense counters for `mask`; the counters do not depend on the values,
/// so the operands are zero.
fn spmm_metrics(
    mask: &crate::masks::Mask,
    cfg: &AblationConfig,
    layout: AcsrLayout,
    use_span: bool,
    use_alignment: bool,
) -> Result<ExecMetrics> {
    let meta = check_regularity(mask)?;
    let opt = build_spmm_opt(&meta, &cfg.sim)?;
    let a = convert_layout(&Acsr::<f32>::zeros(mask.n_cols(), meta), layout)?;
    let v = DenseMatrix::<f32>::zeros(mask.n_cols(), cfg.head_dim);
    Ok(rspmm_execute(&a, &v, &opt, &cfg.sim, use_span, use_alignment)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_density_parameters() {
        let s = param_for_density(PatternKind::Strided, 64, 0.25).unwrap();
        assert_eq!(s.param, 4);
        assert_eq!(s.density(), 0.25);
        let w = param_for_density(PatternKind::Windowed, 16, 1.0).unwrap();
        assert_eq!(w.density(), 1.0);
        assert_eq!(w.param, 15);
        let b = param_for_density(PatternKind::Blocked, 16, 1.0).unwrap();
        assert_eq!(b.param, 16);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in AblationSuite::ALL {
            assert_eq!(s.name().parse::<AblationSuite>().unwrap(), s);
        }
        assert!("speed".parse::<AblationSuite>().is_err());
    }

    #[test]
    fn ratio_edge_cases() {
        let mut r = AblationRow {
            suite: AblationSuite::Alignment,
            pattern: PatternKind::Strided,
            param: 2,
            target_density: 0.5,
            achieved_density: 0.5,
            metric: "x".into(),
            baseline: 0,
            optimized: 0,
        };
        assert_eq!(r.ratio(), Some(1.0));
        r.baseline = 6;
        assert_eq!(r.ratio(), None);
        r.optimized = 4;
        assert_eq!(r.ratio(), Some(1.5));
    }

    #[test]
    fn small_sweeps_keep_direction() {
        let cfg = AblationConfig {
            seq_len: 64,
            head_dim: 8,
            sim: SimConfig::new(8, 4, 4).unwrap(),
            densities: vec![0.03, 0.24, 0.75],
        };
        for r in run_ablation(AblationSuite::Tiling, &cfg).unwrap() {
            assert!(r.optimized <= r.baseline, "{r:?}");
        }
        for r in run_ablation(AblationSuite::Span, &cfg).unwrap() {
            if r.achieved_density < 1.0 {
                assert!(r.optimized < r.baseline, "{r:?}");
            }
        }
        let layout = run_ablation(AblationSuite::Layout, &cfg).unwrap();
        assert_eq!(layout.len(), 9);
    }
}
