//! End-to-end sparse attention: analysis passes, kernel planning, buffer sizing,
//! layout choice, plan text, and the launcher that runs the three kernels.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::acsr::{convert_layout, AcsrLayout, AffineRowMeta};
use crate::error::{Error, Result};
use crate::masks::{check_regularity, density_analysis, DensityClass, Mask, PatternSpec};
use crate::matrix::{DenseMatrix, Element};
use crate::simexec::{
    build_spmm_opt, rsddmm_execute, rspmm_execute, softmax_execute, ExecMetrics, SimConfig,
    SpmmOptMeta,
};
use crate::tiling::{select_stretch, Arrangement, DEFAULT_STRETCH_BUDGET};

pub const PLAN_HEADER: &str = "regsparse-plan v1";

/// Element counts of the four intermediate buffers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferSizes {
    pub rsddmm_out: usize,
    pub softmax_out: usize,
    pub transpose_out: usize,
    pub rspmm_out: usize,
}

/// Everything needed to run sparse attention over one mask.
#[derive(Clone, Debug)]
pub struct MhsaPlan {
    pub seq_len: usize,
    pub head_dim: usize,
    pub mask: Mask,
    pub mask_meta: Vec<AffineRowMeta>,
    pub anchors: Arrangement,
    pub stretch: usize,
    pub spans: SpmmOptMeta,
    pub rspmm_layout: AcsrLayout,
    /// Set when the mask is dense but its columns are not affine-compressible, so
    /// the row layout was kept.
    pub column_layout_unavailable: bool,
    pub density: DensityClass,
    pub buffer_sizes: BufferSizes,
    pub sim: SimConfig,
    pub emitted_plan: String,
}

/// Dense masks read the value array column-wise in the sparse × dense kernel.
pub fn decide_layout(d: &DensityClass) -> AcsrLayout {
    if d.is_dense() {
        AcsrLayout::ColCompressedColMajor
    } else {
        AcsrLayout::RowCompressedRowMajor
    }
}

/// Compiles a plan for `mask`: regularity check, metadata, density class, poset
/// tiling with `cfg`'s block shape, spans and alignment for the sparse × dense
/// kernel, buffer sizes, layout, and the plan text.
pub fn code_gen_sparse_mhsa(
    mask: &Mask,
    seq_len: usize,
    head_dim: usize,
    cfg: &SimConfig,
    alpha: f64,
) -> Result<MhsaPlan> {
    code_gen_sparse_mhsa_hinted(mask, seq_len, head_dim, cfg, alpha, None)
}

/// [`code_gen_sparse_mhsa`] with the generating pattern, when known, guiding the
/// stretch search.
pub fn code_gen_sparse_mhsa_hinted(
    mask: &Mask,
    seq_len: usize,
    head_dim: usize,
    cfg: &SimConfig,
    alpha: f64,
    hint: Option<&PatternSpec>,
) -> Result<MhsaPlan> {
    cfg.validate()?;
    if mask.n_rows() != seq_len || mask.n_cols() != seq_len {
        return Err(Error::Shape(format!(
            "mask is {}x{}, expected {seq_len}x{seq_len}",
            mask.n_rows(),
            mask.n_cols()
        )));
    }
    if head_dim == 0 {
        return Err(Error::InvalidSpec("head dimension must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "density threshold must lie in (0, 1), got {alpha}"
        )));
    }
    let mask_meta = check_regularity(mask)?;
    let density = density_analysis(mask, alpha);
    let p = mask.point_set();
    if p.is_empty() {
        return Err(Error::Empty("mask has no non-zeros".into()));
    }
    let choice = select_stretch(&p, cfg.tb_m, cfg.tb_n, hint, DEFAULT_STRETCH_BUDGET);
    let spans = build_spmm_opt(&mask_meta, cfg)?;

    let mut rspmm_layout = decide_layout(&density);
    let mut column_layout_unavailable = false;
    if !rspmm_layout.is_row_compressed() && check_regularity(&mask.transpose()).is_err() {
        rspmm_layout = AcsrLayout::RowCompressedRowMajor;
        column_layout_unavailable = true;
    }
    let nnz: usize = mask_meta.iter().map(|m| m.nnzs).sum();
    let buffer_sizes = BufferSizes {
        rsddmm_out: nnz,
        softmax_out: nnz,
        transpose_out: nnz,
        rspmm_out: seq_len * head_dim,
    };

    let mut plan = MhsaPlan {
        seq_len,
        head_dim,
        mask: mask.clone(),
        mask_meta,
        anchors: choice.arrangement,
        stretch: choice.stretch,
        spans,
        rspmm_layout,
        column_layout_unavailable,
        density,
        buffer_sizes,
        sim: *cfg,
        emitted_plan: String::new(),
    };
    plan.emitted_plan = emit_kernel_plan(&plan);
    Ok(plan)
}

/// Deterministic plan text, headed by [`PLAN_HEADER`].
pub fn emit_kernel_plan(plan: &MhsaPlan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{PLAN_HEADER}");
    let _ = writeln!(s, "seq_len {}", plan.seq_len);
    let _ = writeln!(s, "head_dim {}", plan.head_dim);
    let d = &plan.density;
    let _ = writeln!(
        s,
        "density {}/{} {:.6} alpha {} class {}",
        d.nnz,
        d.cells,
        d.density,
        d.alpha,
        if d.is_dense() { "dense" } else { "sparse" }
    );
    let _ = writeln!(s, "layout {}", plan.rspmm_layout);
    if plan.column_layout_unavailable {
        let _ = writeln!(s, "layout_note columns not affine-compressible");
    }
    let transpose = if plan.rspmm_layout == AcsrLayout::RowCompressedRowMajor {
        "none".to_string()
    } else {
        format!(
            "{} -> {}",
            AcsrLayout::RowCompressedRowMajor,
            plan.rspmm_layout
        )
    };
    let _ = writeln!(s, "transpose {transpose}");
    let _ = writeln!(s, "warp_width {}", plan.sim.warp_width);
    let _ = writeln!(s, "block_shape {}x{}", plan.sim.tb_m, plan.sim.tb_n);
    let _ = writeln!(s, "stretch {}", plan.stretch);
    let _ = writeln!(s, "blocks {}", plan.anchors.lambda());
    for b in plan.anchors.blocks() {
        let _ = writeln!(s, "anchor {b}");
    }
    for (row, m) in plan.mask_meta.iter().enumerate() {
        let _ = writeln!(s, "meta {row} {} {} {}", m.a, m.b, m.nnzs);
    }
    let remap: Vec<String> = plan
        .spans
        .row_permutation
        .iter()
        .map(usize::to_string)
        .collect();
    let _ = writeln!(s, "remap {}", remap.join(" "));
    let _ = writeln!(s, "group_rows {}", plan.spans.group_rows);
    for (g, (lo, hi)) in plan.spans.spans.iter().enumerate() {
        let _ = writeln!(s, "span {g} {lo} {hi}");
    }
    let b = &plan.buffer_sizes;
    let _ = writeln!(s, "buffer rsddmm_out {}", b.rsddmm_out);
    let _ = writeln!(s, "buffer softmax_out {}", b.softmax_out);
    let _ = writeln!(s, "buffer transpose_out {}", b.transpose_out);
    let _ = writeln!(s, "buffer rspmm_out {}", b.rspmm_out);
    s
}

/// Launch-time switches; the defaults run the plan as compiled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub use_span: bool,
    pub use_alignment: bool,
    /// Overrides the plan's layout for the sparse × dense kernel.
    pub force_layout: Option<AcsrLayout>,
    /// Multiply scores by `1/√head_dim` before the softmax.
    pub scale_scores: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            use_span: true,
            use_alignment: true,
            force_layout: None,
            scale_scores: false,
        }
    }
}

/// Per-stage counters of one launch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub rsddmm: ExecMetrics,
    pub softmax: ExecMetrics,
    /// `None` when the layouts already matched and no transpose ran.
    pub transpose: Option<ExecMetrics>,
    pub rspmm: ExecMetrics,
}

impl AggregateMetrics {
    pub fn total(&self) -> ExecMetrics {
        let mut t = self.rsddmm;
        t += self.softmax;
        if let Some(x) = self.transpose {
            t += x;
        }
        t += self.rspmm;
        t
    }

    /// Flat `stage.key value` pairs in launch order.
    pub fn to_record(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |stage: &str, m: &ExecMetrics| {
            out.extend(
                m.to_record()
                    .into_iter()
                    .map(|(k, v)| (format!("{stage}.{k}"), v)),
            );
        };
        push("rsddmm", &self.rsddmm);
        push("softmax", &self.softmax);
        if let Some(t) = &self.transpose {
            push("transpose", t);
        }
        push("rspmm", &self.rspmm);
        out
    }
}

pub fn run_plan<T: Element>(
    plan: &MhsaPlan,
    q: &DenseMatrix<T>,
    k: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
) -> Result<(DenseMatrix<T>, AggregateMetrics)> {
    run_plan_with(plan, q, k, v, &RunOptions::default())
}

/// Runs sampled product → softmax → optional transpose → sparse × dense product.
pub fn run_plan_with<T: Element>(
    plan: &MhsaPlan,
    q: &DenseMatrix<T>,
    k: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    opts: &RunOptions,
) -> Result<(DenseMatrix<T>, AggregateMetrics)> {
    let (n, d) = (plan.seq_len, plan.head_dim);
    for (name, m) in [("q", q), ("k", k), ("v", v)] {
        if m.rows() != n || m.cols() != d {
            return Err(Error::Shape(format!(
                "{name} is {}x{}, plan expects {n}x{d}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let kt = k.transpose();
    let (scores, rsddmm) = rsddmm_execute(
        q,
        &kt,
        &plan.mask,
        &plan.anchors,
        &plan.mask_meta,
        &plan.sim,
    )?;
    let scale = opts
        .scale_scores
        .then(|| T::one() / T::of_f64(d as f64).sqrt());
    let (probs, softmax) = softmax_execute(&scores, scale, &plan.sim)?;
    let layout = opts.force_layout.unwrap_or(plan.rspmm_layout);
    let (probs, transpose) = if probs.layout() == layout {
        (probs, None)
    } else {
        let moved = convert_layout(&probs, layout)?;
        let m = ExecMetrics {
            threads_launched: moved.nnz() as u64,
            inner_loop_iterations: moved.nnz() as u64,
            ..Default::default()
        };
        (moved, Some(m))
    };
    let (out, rspmm) = rspmm_execute(
        &probs,
        v,
        &plan.spans,
        &plan.sim,
        opts.use_span,
        opts.use_alignment,
    )?;
    Ok((
        out,
        AggregateMetrics {
            rsddmm,
            softmax,
            transpose,
            rspmm,
        },
    ))
}
