//! Compiler toolkit for regularly sparse attention.
//!
//! Masks are analysed for row-wise affine compressibility, compressed into the
//! affine-compressed sparse-row format, tiled into thread blocks under a
//! divergence/reuse/coalescing cost model, and executed on a deterministic
//! abstract GPU that reports both exact outputs and performance proxies.

pub mod ablation;
pub mod acsr;
pub mod error;
pub mod masks;
pub mod matrix;
pub mod pipeline;
pub mod simexec;
pub mod tiling;

pub use acsr::{acsr_to_dense, build_acsr, convert_layout, Acsr, AcsrLayout, AffineRowMeta};
pub use error::{Error, Result};
pub use masks::{
    check_regularity, density_analysis, generate_pattern, Density, DensityClass, Mask, PatternKind,
    PatternSpec, Point, PointSet,
};
pub use matrix::{DenseMatrix, Element};
pub use pipeline::{
    code_gen_sparse_mhsa, code_gen_sparse_mhsa_hinted, emit_kernel_plan, run_plan, run_plan_with,
    AggregateMetrics, BufferSizes, MhsaPlan, RunOptions,
};
pub use simexec::{ExecMetrics, SimConfig, SpmmOptMeta};
pub use tiling::{Arrangement, CostReport, ThreadBlock};
