use anyhow::{bail, Result};
use branchdyn::dynamics::{
    build_process_isomorphism, check_markov, check_measure_preserving, haar_sample, markov_violation,
    LevelMap,
};
use branchdyn::group::{
    count_pattern_closed, detect_depth, extract_pattern_set, fractality_evidence, Tower,
};
use branchdyn::invariants::{
    f_invariant, hausdorff_dimension, order_law_defects, r_sequence, s_sequence,
    verify_branch_order_condition, DisplayBase, HausdorffReport,
};
use branchdyn::{Error, Vertex};
use serde_json::{json, Value};

use crate::args::{Common, MarkovMethod, VertexSweep};
use crate::output::{show, Report};

pub struct Ctx<'a> {
    pub common: &'a Common,
    pub tower: Tower,
    pub base: DisplayBase,
}

/// The given depth, or the detected one together with its evidence label.
fn resolve_depth(ctx: &Ctx, given: Option<usize>) -> Result<(usize, String)> {
    if let Some(d) = given {
        if d == 0 {
            bail!("depth must be at least 1");
        }
        return Ok((d, "given".into()));
    }
    let n_max = ctx.common.levels.max(2);
    let ev = detect_depth(&ctx.tower, n_max)?;
    match ev.depth {
        Some(d) => Ok((d, ev.status())),
        None => Err(Error::Precondition(format!(
            "no depth detected up to level {n_max} ({}); raise --levels or give the depth explicitly",
            ev.status()
        ))
        .into()),
    }
}

fn sweep_vertices(m: usize, sweep: &VertexSweep, min_level: usize) -> Result<Vec<Vertex>> {
    if let Some(text) = &sweep.vertex {
        let v: Vertex = text.parse()?;
        return Ok(vec![Vertex::new(v.letters().to_vec(), m)?]);
    }
    Ok((min_level..=sweep.max_vertex_level)
        .flat_map(|l| Vertex::all_at_level(m, l))
        .collect())
}

pub fn orders(ctx: &Ctx) -> Result<Report> {
    let t = &ctx.tower;
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    let mut prev = t.order(0)?;
    for n in 1..=ctx.common.levels {
        let order = t.order(n)?;
        let log = t.log_order(n)?;
        let index = &order / &prev;
        levels.push(json!({
            "n": n,
            "order": order.to_string(),
            "log_order": log.to_json(ctx.base),
            "index_over_previous": index.to_string(),
        }));
        rows.push(vec![n.to_string(), order.to_string(), show(&log, ctx.base), index.to_string()]);
        prev = order;
    }
    Ok(Report::new(
        json!({ "quotients": levels }),
        vec!["n", "order", "log_order", "index_over_previous"],
        rows,
    ))
}

fn hdim_json(h: &HausdorffReport) -> Value {
    json!({
        "ambient": h.ambient.to_string(),
        "sequence": h.sequence.iter().map(|(n, v)| json!({ "n": n, "dim": v.to_json() })).collect::<Vec<_>>(),
        "limit": h.limit.as_ref().map(|l| l.to_json()),
        "depth": h.depth,
        "tail_gap": h.tail_gap(),
    })
}

pub fn invariants(ctx: &Ctx) -> Result<Report> {
    let t = &ctx.tower;
    let n_max = ctx.common.levels.max(2);
    let b = ctx.base;
    let r = r_sequence(t, n_max)?;
    let s = s_sequence(t, n_max)?;
    let f = f_invariant(t, n_max)?;
    let hdim = hausdorff_dimension(t, n_max, ctx.common.ambient()?);
    let fractal = fractality_evidence(t, n_max)?;
    let (order_condition, order_law) = match (f.depth.depth, &f.value) {
        (Some(d), Some(value)) => {
            let cond = verify_branch_order_condition(t, d, n_max)?;
            let defects = order_law_defects(t, d, value, n_max)?;
            (
                serde_json::to_value(&cond)?,
                json!({
                    "holds": defects.iter().all(|(_, e)| e.is_zero()),
                    "defects": defects.iter().map(|(k, e)| json!({ "k": k, "defect": e.to_json(b) })).collect::<Vec<_>>(),
                }),
            )
        }
        _ => (Value::Null, Value::Null),
    };
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let cell = |v: Option<String>| v.unwrap_or_default();
        rows.push(vec![
            n.to_string(),
            show(&t.log_order(n)?, b),
            cell(r.get(n - 1).map(|x| show(x, b))),
            cell(s.get(n - 1).map(|x| show(x, b))),
            cell(hdim.as_ref().ok().and_then(|h| h.sequence.get(n - 1)).map(|(_, v)| {
                v.exact.as_ref().map_or_else(|| v.approx.to_string(), |q| q.to_string())
            })),
        ]);
    }
    let passed = order_law["holds"].as_bool().unwrap_or(true)
        && order_condition["holds"].as_bool().unwrap_or(true);
    let result = json!({
        "n_max": n_max,
        "log_orders": (1..=n_max).map(|n| Ok(t.log_order(n)?.to_json(b))).collect::<Result<Vec<_>>>()?,
        "r": r.iter().map(|x| x.to_json(b)).collect::<Vec<_>>(),
        "s": s.iter().map(|x| x.to_json(b)).collect::<Vec<_>>(),
        "depth": f.depth.depth,
        "evidence": f.depth.status(),
        "branch_checks": serde_json::to_value(&f.depth.branch_checks)?,
        "fractality": serde_json::to_value(&fractal)?,
        "f": f.value.as_ref().map(|v| v.to_json(b)),
        "f_constant_over_levels": f.constant,
        "hausdorff": match &hdim {
            Ok(h) => hdim_json(h),
            Err(e) => json!({ "unavailable": e.to_string() }),
        },
        "branch_order_condition": order_condition,
        "order_law": order_law,
    });
    Ok(Report::new(result, vec!["n", "log_order", "r_n", "s_n", "dim_n"], rows).with_passed(passed))
}

pub fn f(ctx: &Ctx) -> Result<Report> {
    let n_max = ctx.common.levels.max(2);
    let f = f_invariant(&ctx.tower, n_max)?;
    let b = ctx.base;
    let rows = f
        .f_by_level
        .iter()
        .map(|(n, v)| vec![n.to_string(), show(v, b)])
        .collect();
    let result = json!({
        "f": f.value.as_ref().map(|v| v.to_json(b)),
        "depth": f.depth.depth,
        "status": f.depth.status(),
        "big_f_by_level": f.f_by_level.iter().map(|(n, v)| json!({ "n": n, "value": v.to_json(b) })).collect::<Vec<_>>(),
        "constant": f.constant,
    });
    Ok(Report::new(result, vec!["n", "big_f"], rows))
}

pub fn hdim(ctx: &Ctx) -> Result<Report> {
    let h = hausdorff_dimension(&ctx.tower, ctx.common.levels, ctx.common.ambient()?)?;
    let rows = h
        .sequence
        .iter()
        .map(|(n, v)| {
            vec![
                n.to_string(),
                v.exact.as_ref().map(|q| q.to_string()).unwrap_or_default(),
                v.approx.to_string(),
            ]
        })
        .collect();
    Ok(Report::new(hdim_json(&h), vec!["n", "dim_exact", "dim_approx"], rows))
}

pub fn markov(
    ctx: &Ctx,
    k: Option<usize>,
    sweep: &VertexSweep,
    letter: Option<u32>,
    method: MarkovMethod,
) -> Result<Report> {
    let (k, evidence) = resolve_depth(ctx, k)?;
    let m = ctx.tower.arity();
    let letters: Vec<u32> = match letter {
        Some(x) => vec![x],
        None => (1..=m as u32).collect(),
    };
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut passed = true;
    for v in sweep_vertices(m, sweep, 0)? {
        for &x in &letters {
            if method == MarkovMethod::Enumerate {
                let w = markov_violation(&ctx.tower, k, &v, x, ctx.common.max_enum)?;
                passed &= w.is_none();
                rows.push(vec![v.to_string(), x.to_string(), w.is_none().to_string(), String::new(), String::new()]);
                checks.push(json!({
                    "k": k,
                    "vertex": v.to_string(),
                    "letter": x,
                    "passed": w.is_none(),
                    "witness": w.map(|w| json!({
                        "cell": w.cell.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                        "value": w.value.to_string(),
                        "conditional_past": w.conditional_past.to_string(),
                        "conditional_step": w.conditional_step.to_string(),
                    })),
                }));
                continue;
            }
            let r = check_markov(&ctx.tower, k, &v, x, ctx.common.max_enum)?;
            passed &= r.passed;
            rows.push(vec![
                v.to_string(),
                x.to_string(),
                r.passed.to_string(),
                r.past_support.to_string(),
                r.step_support.to_string(),
            ]);
            checks.push(r.to_json());
        }
    }
    let method = match method {
        MarkovMethod::Structural => "structural",
        MarkovMethod::Enumerate => "enumerate",
    };
    let result = json!({ "k": k, "k_source": evidence, "method": method, "checks": checks, "all_passed": passed });
    Ok(Report::new(result, vec!["vertex", "letter", "passed", "past_support", "step_support"], rows).with_passed(passed))
}

pub fn measure(ctx: &Ctx, depth: usize, sweep: &VertexSweep) -> Result<Report> {
    let m = ctx.tower.arity();
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut passed = true;
    for v in sweep_vertices(m, sweep, 1)? {
        let r = check_measure_preserving(&ctx.tower, &v, depth, ctx.common.max_enum)?;
        passed &= r.passed;
        rows.push(vec![
            v.to_string(),
            depth.to_string(),
            r.passed.to_string(),
            r.target_order.to_string(),
            r.image_size.to_string(),
        ]);
        checks.push(r.to_json());
    }
    let result = json!({ "depth": depth, "checks": checks, "all_passed": passed });
    Ok(Report::new(result, vec!["vertex", "depth", "passed", "target_order", "image_size"], rows).with_passed(passed))
}

pub fn patterns(ctx: &Ctx, depth: Option<usize>, sample_level: Option<usize>) -> Result<Report> {
    let (d, evidence) = resolve_depth(ctx, depth)?;
    let sample = sample_level.unwrap_or(d);
    let set = extract_pattern_set(&ctx.tower, d, sample, ctx.common.max_enum)?;
    let mut counts = Vec::new();
    let mut rows = Vec::new();
    let mut passed = true;
    for n in d..=ctx.common.levels.max(d) {
        let count = count_pattern_closed(&set, n, ctx.common.max_states)?;
        let order = ctx.tower.order(n)?;
        let equal = count == order;
        passed &= equal;
        rows.push(vec![n.to_string(), count.to_string(), order.to_string(), equal.to_string()]);
        counts.push(json!({
            "n": n,
            "pattern_closed": count.to_string(),
            "order": order.to_string(),
            "equal": equal,
        }));
    }
    let result = json!({
        "depth": d,
        "depth_source": evidence,
        "sample_level": sample,
        "pattern_count": set.len(),
        "counts": counts,
    });
    Ok(Report::new(result, vec!["n", "pattern_closed", "order", "equal"], rows).with_passed(passed))
}

pub fn iso(ctx: &Ctx, other: &Tower, depth: Option<usize>) -> Result<Report> {
    let (d, evidence) = resolve_depth(ctx, depth)?;
    let n_max = ctx.common.levels.max(d);
    let iso = build_process_isomorphism(&ctx.tower, other, d, n_max, ctx.common.max_enum)?;
    let rows = iso
        .levels
        .iter()
        .map(|(n, map)| {
            let (kind, size) = match map {
                LevelMap::Explicit { image, .. } => ("explicit", image.len().to_string()),
                LevelMap::Identity { order } => ("identity", order.to_string()),
            };
            vec![n.to_string(), kind.to_string(), size, map.is_identity().to_string()]
        })
        .collect();
    let mut result = iso.to_json();
    result["other"] = json!({ "label": other.spec().label(), "definition": other.spec().to_json() });
    result["depth_source"] = json!(evidence);
    result["transcript"] = json!(iso
        .transcript
        .iter()
        .map(|e| json!({ "level": e.level, "check": e.check, "passed": e.passed, "detail": e.detail }))
        .collect::<Vec<_>>());
    Ok(Report::new(result, vec!["level", "kind", "size", "identity"], rows).with_passed(iso.verified()))
}

pub fn sample(ctx: &Ctx, count: u64) -> Result<Report> {
    let n = ctx.common.levels;
    let mut samples = Vec::new();
    let mut rows = Vec::new();
    for i in 0..count {
        let seed = ctx.common.seed.wrapping_add(i);
        let g = haar_sample(&ctx.tower, n, seed)?;
        let labels: Vec<String> = g.labels().iter().map(|p| p.to_string()).collect();
        rows.push(vec![i.to_string(), seed.to_string(), labels.join(" | ")]);
        samples.push(json!({ "seed": seed, "portrait": g.to_string() }));
    }
    Ok(Report::new(
        json!({ "level": n, "samples": samples }),
        vec!["index", "seed", "labels"],
        rows,
    ))
}
