use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use regsparse_core::ablation::{mean_ratio, run_ablation, AblationConfig, DENSITY_GRID};
use regsparse_core::masks::parse_mask;
use regsparse_core::simexec::{dense_reference_mhsa_scaled, SimConfig};
use regsparse_core::tiling::{
    cost_metrics, naive_tile, optimal_tile_bruteforce, select_stretch, DEFAULT_STRETCH_BUDGET,
};
use regsparse_core::{
    check_regularity, code_gen_sparse_mhsa_hinted, density_analysis, generate_pattern,
    run_plan_with, DenseMatrix, Error as CoreError, Mask, PatternSpec, RunOptions,
};

use crate::report::{record, scalar_value, Report};
use crate::{AblateArgs, AnalyzeArgs, MaskArgs, MhsaArgs, TileArgs};

struct Loaded {
    mask: Mask,
    spec: Option<PatternSpec>,
    summary: Value,
}

fn load_mask(src: &MaskArgs) -> Result<Loaded> {
    if let Some(path) = &src.mask {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading mask {}", path.display()))?;
        let mask = parse_mask(&text).with_context(|| format!("parsing mask {}", path.display()))?;
        let summary = json!({"mask": path.display().to_string(), "rows": mask.n_rows(), "cols": mask.n_cols()});
        return Ok(Loaded {
            mask,
            spec: None,
            summary,
        });
    }
    let (Some(kind), Some(param), Some(seq)) = (src.pattern, src.param, src.seq) else {
        return Err(CoreError::InvalidSpec(
            "give --mask PATH or --pattern KIND --param N --seq N".into(),
        )
        .into());
    };
    let spec = PatternSpec::new(kind, param, seq)?;
    let mask = generate_pattern(&spec)?;
    let summary = json!({"pattern": kind.name(), "param": param, "seq": seq});
    Ok(Loaded {
        mask,
        spec: Some(spec),
        summary,
    })
}

fn density_value(d: &regsparse_core::DensityClass) -> Value {
    json!({
        "nnz": d.nnz,
        "cells": d.cells,
        "density": d.density,
        "alpha": d.alpha,
        "class": if d.is_dense() { "dense" } else { "sparse" },
    })
}

pub fn analyze(args: &AnalyzeArgs, echo: &str) -> Result<Report> {
    let src = load_mask(&args.source)?;
    let mut r = Report::new(echo);
    r.set("inputs", src.summary);
    match check_regularity(&src.mask) {
        Ok(meta) => {
            r.set("verdict", "regular");
            let mut classes: Vec<_> = meta.iter().map(|m| (m.a, m.b, m.nnzs)).collect();
            classes.sort();
            classes.dedup();
            let nnzs = meta.iter().map(|m| m.nnzs);
            r.set(
                "metadata",
                json!({
                    "rows": meta.len(),
                    "distinct": classes.len(),
                    "empty_rows": meta.iter().filter(|m| m.nnzs == 0).count(),
                    "min_nnzs": nnzs.clone().min().unwrap_or(0),
                    "max_nnzs": nnzs.max().unwrap_or(0),
                }),
            );
            if args.rows {
                let rows: Vec<Value> = meta
                    .iter()
                    .enumerate()
                    .map(|(y, m)| json!({"row": y, "a": m.a.to_string(), "b": m.b.to_string(), "nnzs": m.nnzs}))
                    .collect();
                r.set("row_meta", rows);
            }
        }
        Err(CoreError::Regularity { row, col }) => {
            r.set("verdict", "irregular");
            r.set("first_offending_cell", json!({"row": row, "col": col}));
        }
        Err(e) => return Err(e.into()),
    }
    r.set(
        "density",
        density_value(&density_analysis(&src.mask, args.alpha)),
    );
    Ok(r)
}

pub fn tile(args: &TileArgs, echo: &str) -> Result<Report> {
    let src = load_mask(&args.source)?;
    check_regularity(&src.mask)?;
    let (m, n) = args.tb;
    let p = src.mask.point_set();
    if p.is_empty() {
        return Err(CoreError::Empty("mask has no non-zeros".into()).into());
    }
    let choice = select_stretch(&p, m, n, src.spec.as_ref(), DEFAULT_STRETCH_BUDGET);
    let cost = cost_metrics(&choice.arrangement)?;
    let naive = cost_metrics(&naive_tile(&p, m, n))?;

    let mut r = Report::new(echo);
    r.set("inputs", src.summary);
    r.set("block", json!({"m": m, "n": n}));
    r.set("stretch", choice.stretch);
    let cands: Vec<Value> = choice
        .candidates
        .iter()
        .map(|c| json!({"stretch": c.stretch, "lambda": c.lambda, "cost": scalar_value(c.cost.to_string())}))
        .collect();
    r.set("candidates", cands);
    r.set("cost", record(cost.to_record()));
    r.set(
        "naive",
        json!({"lambda": naive.lambda, "cost": scalar_value(naive.cost.to_string()), "lambda_ratio": naive.lambda as f64 / cost.lambda as f64}),
    );
    if args.optimal {
        let stretches: Vec<usize> = (1..=p.width().max(p.height())).collect();
        let best = cost_metrics(&optimal_tile_bruteforce(&p, m, n, &stretches)?)?;
        r.set(
            "optimal",
            json!({"lambda": best.lambda, "cost": scalar_value(best.cost.to_string())}),
        );
    }
    let anchors: Vec<Value> = choice
        .arrangement
        .blocks()
        .iter()
        .map(|b| json!({"x": b.anchor.x, "y": b.anchor.y, "s": b.stretch}))
        .collect();
    r.set("anchors", anchors);
    Ok(r)
}

fn read_matrix(path: &Path) -> Result<DenseMatrix<f32>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading matrix {}", path.display()))?;
    DenseMatrix::parse_text(&text).with_context(|| format!("parsing matrix {}", path.display()))
}

/// Seeded inputs with entries uniform in [-1, 1], drawn q, then k, then v.
pub fn random_inputs(seed: u64, rows: usize, cols: usize) -> [DenseMatrix<f32>; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = || DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0f32..=1.0));
    [next(), next(), next()]
}

pub fn mhsa(args: &MhsaArgs, echo: &str) -> Result<Report> {
    let src = load_mask(&args.source)?;
    let n = src.mask.n_rows();
    let mut sim = SimConfig::new(args.warp, args.tb.0, args.tb.1)?;
    if args.sequential {
        sim = sim.sequential();
    }
    let plan =
        code_gen_sparse_mhsa_hinted(&src.mask, n, args.dim, &sim, args.alpha, src.spec.as_ref())?;
    let (seed, [q, k, v]) = match (&args.q, &args.k, &args.v) {
        (Some(q), Some(k), Some(v)) => (None, [read_matrix(q)?, read_matrix(k)?, read_matrix(v)?]),
        (None, None, None) => {
            let seed = args.random.unwrap_or(0);
            (Some(seed), random_inputs(seed, n, args.dim))
        }
        _ => bail!(CoreError::InvalidSpec(
            "--q, --k and --v must be given together".into()
        )),
    };
    let opts = RunOptions {
        use_span: !args.no_span,
        use_alignment: !args.no_alignment,
        force_layout: None,
        scale_scores: args.scale,
    };
    let (out, metrics) = run_plan_with(&plan, &q, &k, &v, &opts)?;
    let scale = args.scale.then(|| 1.0 / (args.dim as f64).sqrt());
    let reference = dense_reference_mhsa_scaled(
        &q.cast::<f64>(),
        &k.cast::<f64>(),
        &v.cast::<f64>(),
        &src.mask,
        scale,
    )?;
    let err = out.cast::<f64>().max_relative_error(&reference)?;

    if let Some(path) = &args.plan_out {
        std::fs::write(path, &plan.emitted_plan)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.output_matrix {
        std::fs::write(path, out.to_text())
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let mut r = Report::new(echo);
    let mut inputs = src.summary;
    inputs["dim"] = json!(args.dim);
    inputs["seed"] = json!(seed);
    r.set("inputs", inputs);
    r.set(
        "plan",
        json!({
            "layout": plan.rspmm_layout.tag(),
            "stretch": plan.stretch,
            "blocks": plan.anchors.lambda(),
            "block": format!("{}x{}", sim.tb_m, sim.tb_n),
            "warp_width": sim.warp_width,
            "span": opts.use_span,
            "alignment": opts.use_alignment,
            "scaled": opts.scale_scores,
            "buffers": {
                "rsddmm_out": plan.buffer_sizes.rsddmm_out,
                "softmax_out": plan.buffer_sizes.softmax_out,
                "transpose_out": plan.buffer_sizes.transpose_out,
                "rspmm_out": plan.buffer_sizes.rspmm_out,
            },
        }),
    );
    r.set("density", density_value(&plan.density));
    r.set("max_relative_error", err);
    let mut stages = serde_json::Map::new();
    stages.insert("rsddmm".into(), record(metrics.rsddmm.to_record()));
    stages.insert("softmax".into(), record(metrics.softmax.to_record()));
    stages.insert(
        "transpose".into(),
        metrics
            .transpose
            .map_or(Value::Null, |t| record(t.to_record())),
    );
    stages.insert("rspmm".into(), record(metrics.rspmm.to_record()));
    r.set("metrics", Value::Object(stages));
    Ok(r)
}

pub fn ablate(args: &AblateArgs, echo: &str) -> Result<Report> {
    let cfg = AblationConfig {
        seq_len: args.seq,
        head_dim: args.dim,
        sim: SimConfig::new(args.warp, args.tb.0, args.tb.1)?,
        densities: DENSITY_GRID.to_vec(),
    };
    let rows = run_ablation(args.suite, &cfg)?;
    let mut r = Report::new(echo);
    r.set(
        "inputs",
        json!({"suite": args.suite.name(), "seq": args.seq, "dim": args.dim, "block": format!("{}x{}", args.tb.0, args.tb.1)}),
    );
    r.set("metric", args.suite.metric());
    let points: Vec<Value> = rows
        .iter()
        .map(|p| {
            json!({
                "pattern": p.pattern.name(),
                "param": p.param,
                "target": p.target_density,
                "density": (p.achieved_density * 1e6).round() / 1e6,
                "baseline": p.baseline,
                "optimized": p.optimized,
                "ratio": p.ratio().map(|x| (x * 1e4).round() / 1e4),
            })
        })
        .collect();
    r.set("points", points);
    let mut means = serde_json::Map::new();
    for &kind in args.suite.patterns() {
        means.insert(
            kind.name().into(),
            json!(mean_ratio(&rows, kind).map(|x| (x * 1e4).round() / 1e4)),
        );
    }
    r.set("mean_ratio", Value::Object(means));
    Ok(r)
}
