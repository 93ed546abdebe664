//! Deterministic abstract-GPU execution of the three attention kernels.
//!
//! Threads are grouped into blocks, and a block's threads are flattened row-major
//! and cut into warps of `warp_width` lanes. Blocks may run on worker threads;
//! their partial results are merged in block order so every output and counter is
//! independent of scheduling.

mod reference;
mod rsddmm;
mod softmax;
mod spmm;

use std::fmt;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use reference::{dense_reference_mhsa, dense_reference_mhsa_scaled};
pub use rsddmm::rsddmm_execute;
pub use softmax::{softmax_acsr, softmax_execute};
pub use spmm::{alignment_remap, build_spmm_opt, compute_spans, rspmm_execute, SpmmOptMeta};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub warp_width: usize,
    /// Thread rows per block.
    pub tb_m: usize,
    /// Thread columns per block.
    pub tb_n: usize,
    /// Run blocks on the rayon pool.
    pub parallel: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            warp_width: 32,
            tb_m: 16,
            tb_n: 16,
            parallel: true,
        }
    }
}

impl SimConfig {
    pub fn new(warp_width: usize, tb_m: usize, tb_n: usize) -> Result<Self> {
        let cfg = Self {
            warp_width,
            tb_m,
            tb_n,
            parallel: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.warp_width == 0 || self.tb_m == 0 || self.tb_n == 0 {
            return Err(Error::InvalidSpec(format!(
                "warp width and block shape must be positive, got warp {} block {}x{}",
                self.warp_width, self.tb_m, self.tb_n
            )));
        }
        Ok(())
    }

    pub fn threads_per_block(&self) -> usize {
        self.tb_m * self.tb_n
    }

    pub fn warps_per_block(&self) -> usize {
        self.threads_per_block().div_ceil(self.warp_width)
    }

    /// Thread rows that share one warp when the warp width is a multiple of the
    /// block width (otherwise 1).
    pub fn rows_per_warp(&self) -> usize {
        if self.warp_width >= self.tb_n && self.warp_width.is_multiple_of(self.tb_n) {
            (self.warp_width / self.tb_n).min(self.tb_m)
        } else {
            1
        }
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Runtime counters of one kernel launch (or a sum of launches).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecMetrics {
    pub threads_launched: u64,
    pub divergent_threads: u64,
    pub redundant_threads: u64,
    pub inner_loop_iterations: u64,
    pub divergent_load_events: u64,
    pub flops: u64,
    pub warps: u64,
    /// Distinct 32-element segments of the sparse value array touched per warp step.
    pub acsr_read_transactions: u64,
    /// Σ over warps of `1 − 1/stretch`.
    pub uncoalesced_warp_sum: f64,
}

impl ExecMetrics {
    /// Average over warps of `1 − 1/stretch`.
    pub fn uncoalesced_request_fraction(&self) -> f64 {
        if self.warps == 0 {
            0.0
        } else {
            self.uncoalesced_warp_sum / self.warps as f64
        }
    }

    /// Flat `key value` pairs in a fixed order.
    pub fn to_record(&self) -> Vec<(&'static str, String)> {
        vec![
            ("threads_launched", self.threads_launched.to_string()),
            ("divergent_threads", self.divergent_threads.to_string()),
            ("redundant_threads", self.redundant_threads.to_string()),
            (
                "inner_loop_iterations",
                self.inner_loop_iterations.to_string(),
            ),
            (
                "divergent_load_events",
                self.divergent_load_events.to_string(),
            ),
            ("flops", self.flops.to_string()),
            ("warps", self.warps.to_string()),
            (
                "acsr_read_transactions",
                self.acsr_read_transactions.to_string(),
            ),
            (
                "uncoalesced_request_fraction",
                format!("{:.6}", self.uncoalesced_request_fraction()),
            ),
        ]
    }
}

impl AddAssign for ExecMetrics {
    fn add_assign(&mut self, o: Self) {
        self.threads_launched += o.threads_launched;
        self.divergent_threads += o.divergent_threads;
        self.redundant_threads += o.redundant_threads;
        self.inner_loop_iterations += o.inner_loop_iterations;
        self.divergent_load_events += o.divergent_load_events;
        self.flops += o.flops;
        self.warps += o.warps;
        self.acsr_read_transactions += o.acsr_read_transactions;
        self.uncoalesced_warp_sum += o.uncoalesced_warp_sum;
    }
}

impl fmt::Display for ExecMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_record() {
            writeln!(f, "{k} {v}")?;
        }
        Ok(())
    }
}

/// Runs `f` over `0..count`, in parallel when asked, returning results in index order.
pub(crate) fn map_blocks<R: Send>(
    count: usize,
    parallel: bool,
    f: impl Fn(usize) -> R + Sync + Send,
) -> Vec<R> {
    if parallel {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}
