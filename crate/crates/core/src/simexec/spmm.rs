use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{map_blocks, ExecMetrics, SimConfig};
use crate::acsr::{Acsr, AffineRowMeta};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Element};

/// Values per memory segment when counting sparse-value read transactions.
const SEGMENT: usize = 32;

/// Plan-time data for the sparse × dense kernel.
///
/// Output rows are assigned to thread-row slots through `row_permutation`
/// (slot → row). Consecutive slots are grouped `group_rows` at a time, one group
/// per warp, and each group loops only over its span of dense columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpmmOptMeta {
    pub row_permutation: Vec<usize>,
    pub group_rows: usize,
    /// Half-open dense-column interval per group of permuted slots.
    pub spans: Vec<(usize, usize)>,
    /// The same intervals for the identity assignment.
    pub unaligned_spans: Vec<(usize, usize)>,
}

impl SpmmOptMeta {
    pub fn n_groups(&self) -> usize {
        self.row_permutation.len().div_ceil(self.group_rows)
    }
}

/// Per group, the half-open interval `[min(−b/a), max((nnzs − b)/a))` of dense
/// columns that contains every non-zero of the group's rows (rounded outwards).
/// Rows without non-zeros do not widen the span; a group made only of such rows
/// gets `(0, 0)`.
pub fn compute_spans(
    meta: &[AffineRowMeta],
    row_groups: &[Vec<usize>],
) -> Result<Vec<(usize, usize)>> {
    row_groups
        .iter()
        .enumerate()
        .map(|(g, rows)| {
            if rows.is_empty() {
                return Err(Error::Empty(format!("row group {g} has no rows")));
            }
            let mut span: Option<(i64, i64)> = None;
            for &r in rows {
                let m = meta.get(r).ok_or(Error::Index {
                    index: r,
                    len: meta.len(),
                })?;
                if let Some((lo, hi)) = m.dense_span() {
                    span = Some(match span {
                        None => (lo, hi),
                        Some((a, b)) => (a.min(lo), b.max(hi)),
                    });
                }
            }
            let (lo, hi) = span.unwrap_or((0, 0));
            Ok((lo.max(0) as usize, hi.max(0) as usize))
        })
        .collect()
}

/// Stable permutation (slot → row) that packs rows with identical `(a, b, nnzs)`
/// into the same `group_width`-row warp wherever a key has enough rows.
///
/// Rows are grouped by key in order of first appearance. Every full chunk of
/// `group_width` same-key rows is emitted first, then the leftover rows of each
/// key in the same key order.
pub fn alignment_remap(meta: &[AffineRowMeta], group_width: usize) -> Vec<usize> {
    let width = group_width.max(1);
    let mut order: Vec<AffineRowMeta> = Vec::new();
    let mut groups: HashMap<AffineRowMeta, Vec<usize>> = HashMap::new();
    for (row, m) in meta.iter().enumerate() {
        groups
            .entry(*m)
            .or_insert_with(|| {
                order.push(*m);
                Vec::new()
            })
            .push(row);
    }
    let mut full = Vec::with_capacity(meta.len());
    let mut rest = Vec::new();
    for key in &order {
        let rows = &groups[key];
        let cut = rows.len() - rows.len() % width;
        full.extend_from_slice(&rows[..cut]);
        rest.extend_from_slice(&rows[cut..]);
    }
    full.extend(rest);
    full
}

/// Alignment permutation plus spans for both the aligned and identity assignment,
/// grouped by the rows one warp covers.
pub fn build_spmm_opt(meta: &[AffineRowMeta], cfg: &SimConfig) -> Result<SpmmOptMeta> {
    if meta.is_empty() {
        return Err(Error::Empty("no rows to plan".into()));
    }
    let group_rows = cfg.rows_per_warp();
    let perm = alignment_remap(meta, group_rows);
    let identity: Vec<usize> = (0..meta.len()).collect();
    let groups = |order: &[usize]| {
        order
            .chunks(group_rows)
            .map(<[usize]>::to_vec)
            .collect::<Vec<_>>()
    };
    let spans = compute_spans(meta, &groups(&perm))?;
    let unaligned_spans = compute_spans(meta, &groups(&identity))?;
    Ok(SpmmOptMeta {
        row_permutation: perm,
        group_rows,
        spans,
        unaligned_spans,
    })
}

struct BlockOut<T> {
    writes: Vec<(usize, usize, T)>,
    metrics: ExecMetrics,
}

/// Sparse × dense product `C = A·B` with a guard per loaded element.
///
/// Thread `(ty, tx)` of block `(by, bx)` owns output row
/// `row_permutation[by·tb_m + ty]` (identity when alignment is off) and column
/// `bx·tb_n + tx`. It walks dense `k` ascending over its warp's span (or all of
/// `0..K`), and accumulates `A[row][k]·B[k][col]` only where the O(1) index guard
/// finds a stored value. A warp step in which some lanes pass the guard and others
/// fail adds the smaller of the two lane counts to `divergent_load_events`.
pub fn rspmm_execute<T: Element>(
    acsr: &Acsr<T>,
    b: &DenseMatrix<T>,
    opt: &SpmmOptMeta,
    cfg: &SimConfig,
    use_span: bool,
    use_alignment: bool,
) -> Result<(DenseMatrix<T>, ExecMetrics)> {
    cfg.validate()?;
    let (n_rows, k_dim, d_out) = (acsr.n_rows(), acsr.n_cols(), b.cols());
    if b.rows() != k_dim {
        return Err(Error::Shape(format!(
            "cannot multiply {n_rows}x{k_dim} sparse by {}x{d_out} dense",
            b.rows()
        )));
    }
    if opt.row_permutation.len() != n_rows || opt.group_rows == 0 {
        return Err(Error::Shape(format!(
            "plan covers {} rows, matrix has {n_rows}",
            opt.row_permutation.len()
        )));
    }
    let groups = opt.n_groups();
    if opt.spans.len() != groups || opt.unaligned_spans.len() != groups {
        return Err(Error::Shape(format!(
            "expected {groups} spans per assignment"
        )));
    }
    let identity: Vec<usize> = (0..n_rows).collect();
    let (perm, spans) = if use_alignment {
        (&opt.row_permutation, &opt.spans)
    } else {
        (&identity, &opt.unaligned_spans)
    };

    let blocks_x = d_out.div_ceil(cfg.tb_n);
    let blocks_y = n_rows.div_ceil(cfg.tb_m);
    let outs = map_blocks(blocks_x * blocks_y, cfg.parallel, |bi| {
        let (by, bx) = (bi / blocks_x, bi % blocks_x);
        run_block(acsr, b, perm, spans, opt.group_rows, cfg, use_span, by, bx)
    });

    let mut c = DenseMatrix::zeros(n_rows, d_out);
    let mut metrics = ExecMetrics::default();
    for o in outs {
        metrics += o.metrics;
        for (r, x, v) in o.writes {
            c.set(r, x, v);
        }
    }
    Ok((c, metrics))
}

#[allow(clippy::too_many_arguments)]
fn run_block<T: Element>(
    acsr: &Acsr<T>,
    b: &DenseMatrix<T>,
    perm: &[usize],
    spans: &[(usize, usize)],
    group_rows: usize,
    cfg: &SimConfig,
    use_span: bool,
    by: usize,
    bx: usize,
) -> BlockOut<T> {
    let (n_rows, k_dim, d_out) = (acsr.n_rows(), acsr.n_cols(), b.cols());
    let threads = cfg.threads_per_block();
    let mut metrics = ExecMetrics {
        threads_launched: threads as u64,
        ..Default::default()
    };
    let mut writes = Vec::new();

    for warp_start in (0..threads).step_by(cfg.warp_width) {
        metrics.warps += 1;
        // Active lanes grouped by the row they own: (row, slot, output columns).
        let mut rows: Vec<(usize, usize, Vec<usize>)> = Vec::new();
        for t in warp_start..(warp_start + cfg.warp_width).min(threads) {
            let (ty, tx) = (t / cfg.tb_n, t % cfg.tb_n);
            let (slot, col) = (by * cfg.tb_m + ty, bx * cfg.tb_n + tx);
            if slot >= n_rows || col >= d_out {
                metrics.redundant_threads += 1;
                continue;
            }
            match rows.iter_mut().find(|r| r.1 == slot) {
                Some(r) => r.2.push(col),
                None => rows.push((perm[slot], slot, vec![col])),
            }
        }
        if rows.is_empty() {
            continue;
        }
        let active: usize = rows.iter().map(|r| r.2.len()).sum();
        let (lo, hi) = if use_span {
            let mut lo = usize::MAX;
            let mut hi = 0;
            for r in &rows {
                let (s, e) = spans[r.1 / group_rows];
                if e > s {
                    lo = lo.min(s);
                    hi = hi.max(e);
                }
            }
            if lo >= hi {
                (0, 0)
            } else {
                (lo.min(k_dim), hi.min(k_dim))
            }
        } else {
            (0, k_dim)
        };
        metrics.inner_loop_iterations += (active * (hi - lo)) as u64;

        let mut acc: Vec<Vec<T>> = rows.iter().map(|r| vec![T::zero(); r.2.len()]).collect();
        let mut idled = vec![false; rows.len()];
        let mut segments: Vec<usize> = Vec::with_capacity(rows.len());
        let mut hits: Vec<Option<usize>> = vec![None; rows.len()];
        for k in lo..hi {
            let mut on = 0;
            segments.clear();
            for (ri, r) in rows.iter().enumerate() {
                hits[ri] = acsr.index_of(r.0, k);
                if let Some(idx) = hits[ri] {
                    on += r.2.len();
                    let seg = idx / SEGMENT;
                    if !segments.contains(&seg) {
                        segments.push(seg);
                    }
                }
            }
            let off = active - on;
            if on > 0 && off > 0 {
                metrics.divergent_load_events += on.min(off) as u64;
                for (ri, h) in hits.iter().enumerate() {
                    idled[ri] |= h.is_none();
                }
            }
            metrics.acsr_read_transactions += segments.len() as u64;
            let brow = b.row(k);
            for (ri, r) in rows.iter().enumerate() {
                if let Some(idx) = hits[ri] {
                    let v = acsr.values()[idx];
                    for (lane, &x) in r.2.iter().enumerate() {
                        acc[ri][lane] = acc[ri][lane] + v * brow[x];
                    }
                    metrics.flops += r.2.len() as u64;
                }
            }
        }
        for (ri, r) in rows.iter().enumerate() {
            if idled[ri] {
                metrics.divergent_threads += r.2.len() as u64;
            }
            for (lane, &x) in r.2.iter().enumerate() {
                writes.push((r.0, x, acc[ri][lane]));
            }
        }
    }
    BlockOut { writes, metrics }
}
