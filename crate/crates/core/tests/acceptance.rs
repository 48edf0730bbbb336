use std::process::ExitCode;
use std::time::Instant;

use branchdyn::dynamics::{
    big_f_direct, big_f_structural, build_process_isomorphism, check_markov,
    check_measure_preserving, joint_section_distribution, ConePartition,
};
use branchdyn::group::{
    count_pattern_closed, cyclic_group, detect_depth, extract_pattern_set, ggs_spec,
    grigorchuk_spec, symmetric_group, wreath_spec, GroupSpec, Tower, DEFAULT_ENUM_CAP,
    DEFAULT_STATE_CAP,
};
use branchdyn::invariants::{
    big_f_formula, f_invariant, hausdorff_dimension, order_law_defects, r_sequence,
    verify_branch_order_condition, Ambient, DisplayBase,
};
use branchdyn::{Error, LogQuantity, Vertex};
use num_rational::BigRational;

const CAP: u64 = DEFAULT_ENUM_CAP;

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(k.into())
}

fn in_base(q: &LogQuantity, b: u64) -> String {
    match q.in_base(DisplayBase::Base(b)) {
        Some(c) => format!("{c}"),
        None => format!("{q}"),
    }
}

fn ggs(p: u64, alpha: &[u64]) -> Tower {
    Tower::new(ggs_spec(p, alpha).expect("valid GGS vector"))
}

fn full_wreath(m: usize) -> Tower {
    Tower::new(wreath_spec(m, &symmetric_group(m)).expect("valid wreath"))
}

fn presets() -> Vec<(String, GroupSpec)> {
    vec![
        ("ggs p=3 (1,0)".into(), ggs_spec(3, &[1, 0]).unwrap()),
        ("ggs p=3 (1,2)".into(), ggs_spec(3, &[1, 2]).unwrap()),
        ("ggs p=5 (1,0,0,1)".into(), ggs_spec(5, &[1, 0, 0, 1]).unwrap()),
        ("grigorchuk".into(), grigorchuk_spec()),
        ("wreath m=2 sym".into(), wreath_spec(2, &symmetric_group(2)).unwrap()),
        ("wreath m=3 sym".into(), wreath_spec(3, &symmetric_group(3)).unwrap()),
        ("wreath m=3 cyclic".into(), wreath_spec(3, &cyclic_group(3)).unwrap()),
    ]
}

fn c1_ggs_f() -> Result<Outcome, Error> {
    let mut cases: Vec<(u64, Vec<u64>, i64)> = Vec::new();
    for a in 0..3u64 {
        for b in 0..3u64 {
            if (a, b) != (0, 0) && a != b {
                cases.push((3, vec![a, b], -2));
            }
        }
    }
    cases.push((5, vec![1, 0, 0, 0], -4));
    cases.push((5, vec![1, 0, 0, 1], -5));
    let mut passed = true;
    let mut parts = Vec::new();
    for (p, alpha, want) in cases {
        let n_max = if p == 3 { 5 } else { 4 };
        let f = f_invariant(&ggs(p, &alpha), n_max)?;
        let got = f.value.as_ref().and_then(|v| v.in_base(DisplayBase::Base(p)));
        let good = got == Some(int(want)) && f.constant;
        passed &= good;
        parts.push(format!(
            "p={p} {alpha:?}: {}",
            got.map_or("none".to_string(), |g| g.to_string())
        ));
    }
    Ok(ok(passed, parts.join("; ")))
}

fn c2_big_f() -> Result<Outcome, Error> {
    let mut passed = true;
    let mut parts = Vec::new();
    let w = full_wreath(2);
    for n in 1..=2 {
        let direct = big_f_direct(&w, n, CAP)?.value;
        let formula = big_f_formula(&w, n, 1)?;
        passed &= direct == formula;
        parts.push(format!("wreath(2) n={n}: {} vs {}", in_base(&direct, 2), in_base(&formula, 2)));
    }
    let t = ggs(3, &[1, 0]);
    let d = detect_depth(&t, 5)?.depth.unwrap_or(0);
    let direct = big_f_direct(&t, 2, CAP)?.value;
    // the closed form needs n >= D; compare with log|G_1| - r_3 directly
    let closed = match big_f_formula(&t, 2, d) {
        Ok(v) => v,
        Err(Error::Precondition(_)) => t.log_order(1)? - r_sequence(&t, 4)?[2].clone(),
        Err(e) => return Err(e),
    };
    passed &= direct == closed;
    parts.push(format!(
        "ggs(1,0) D={d} n=2: direct {} vs log|G_1|-r_3 {}",
        in_base(&direct, 3),
        in_base(&closed, 3)
    ));
    for n in d..=d + 1 {
        let s = big_f_structural(&t, n)?.value;
        let formula = big_f_formula(&t, n, d)?;
        passed &= s == formula;
        parts.push(format!("n={n}: orbit {} vs formula {}", in_base(&s, 3), in_base(&formula, 3)));
    }
    Ok(ok(passed, parts.join("; ")))
}

fn c3_entropy() -> Result<Outcome, Error> {
    let mut passed = true;
    let mut checked = 0;
    for (name, spec) in presets() {
        let t = Tower::new(spec);
        let n_top = if t.arity() == 2 { 4 } else { 2 };
        for n in 1..=n_top {
            let joint = joint_section_distribution(&t, &[Vertex::root()], n, CAP)?;
            let h = joint.entropy()?;
            let cone = ConePartition::new(&t, n)?.entropy()?;
            let want = t.log_order(n)?;
            if h != want || cone != want {
                passed = false;
                println!("    {name} n={n}: H = {h}, log|G_n| = {want}");
            }
            checked += 1;
        }
    }
    Ok(ok(passed, format!("{checked} (preset, level) pairs")))
}

fn c4_measure() -> Result<Outcome, Error> {
    let mut passed = true;
    let mut checked = 0;
    let t = ggs(3, &[1, 0]);
    for lvl in 1..=2 {
        for v in Vertex::all_at_level(3, lvl) {
            for d in 1..=2 {
                let r = check_measure_preserving(&t, &v, d, CAP)?;
                passed &= r.passed;
                checked += 1;
            }
        }
    }
    let g = Tower::new(grigorchuk_spec());
    for v in Vertex::all_at_level(2, 1) {
        for d in 1..=3 {
            let r = check_measure_preserving(&g, &v, d, CAP)?;
            passed &= r.passed;
            checked += 1;
        }
    }
    Ok(ok(passed, format!("{checked} (v, d) pairs with equal fibers")))
}

fn c5_markov() -> Result<Outcome, Error> {
    let t = ggs(3, &[1, 0]);
    let d = detect_depth(&t, 5)?.depth.unwrap_or(0);
    let mut passed = d > 0;
    let mut checked = 0;
    for lvl in 0..=2 {
        for v in Vertex::all_at_level(3, lvl) {
            for x in 1..=3 {
                let r = check_markov(&t, d, &v, x, CAP)?;
                if !r.passed {
                    println!("    FAIL v={v} x={x}: {} vs {}", r.past_support, r.step_support);
                }
                passed &= r.passed;
                checked += 1;
            }
        }
    }
    Ok(ok(passed, format!("k=D={d}, {checked} (v, x) pairs")))
}

fn c6_order_condition() -> Result<Outcome, Error> {
    let mut passed = true;
    let mut parts = Vec::new();
    let towers = [
        ("ggs(1,0)", ggs(3, &[1, 0]), 5),
        ("ggs(1,2)", ggs(3, &[1, 2]), 5),
        ("ggs(0,1)", ggs(3, &[0, 1]), 5),
        ("wreath(2)", full_wreath(2), 5),
        ("wreath(3)", full_wreath(3), 4),
    ];
    for (name, t, n_max) in towers {
        let d = detect_depth(&t, n_max)?.depth.unwrap_or(0);
        if d == 0 {
            passed = false;
            parts.push(format!("{name}: no depth"));
            continue;
        }
        let rep = verify_branch_order_condition(&t, d, n_max)?;
        passed &= rep.holds && !rep.levels.is_empty();
        parts.push(format!("{name} D={d} n<{n_max}: {}", rep.holds));
    }
    Ok(ok(passed, parts.join("; ")))
}

fn c7_order_law() -> Result<Outcome, Error> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, spec) in presets() {
        let t = Tower::new(spec);
        let n_max = match t.arity() {
            2 => 8,
            3 => 5,
            _ => 4,
        };
        let f = f_invariant(&t, n_max)?;
        let (Some(d), Some(value)) = (f.depth.depth, f.value) else {
            parts.push(format!("{name}: no depth"));
            continue;
        };
        let defects = order_law_defects(&t, d, &value, n_max)?;
        let good = defects.iter().all(|(_, e)| e.is_zero());
        passed &= good;
        parts.push(format!("{name} D={d} k<={}: {good}", defects.len() - 1));
    }
    Ok(ok(passed, parts.join("; ")))
}

fn c8_patterns() -> Result<Outcome, Error> {
    let mut passed = true;
    let mut parts = Vec::new();
    let t = ggs(3, &[1, 0]);
    let d = detect_depth(&t, 5)?.depth.unwrap_or(0);
    let pats = extract_pattern_set(&t, d, d, CAP)?;
    for n in d..=d + 1 {
        let count = count_pattern_closed(&pats, n, DEFAULT_STATE_CAP)?;
        let want = t.order(n)?;
        passed &= count == want;
        parts.push(format!("ggs(1,0) D={d} n={n}: {count} vs {want}"));
    }
    let w = full_wreath(2);
    let pats = extract_pattern_set(&w, 1, 1, CAP)?;
    for n in 1..=3 {
        let count = count_pattern_closed(&pats, n, DEFAULT_STATE_CAP)?;
        let want = w.order(n)?;
        passed &= count == want;
        parts.push(format!("wreath(2) n={n}: {count} vs {want}"));
    }
    Ok(ok(passed, parts.join("; ")))
}

fn c9_iso() -> Result<Outcome, Error> {
    let g = ggs(3, &[1, 0]);
    let h = ggs(3, &[2, 0]);
    let d = detect_depth(&g, 5)?.depth.unwrap_or(0);
    let dh = detect_depth(&h, 5)?.depth.unwrap_or(0);
    let iso = build_process_isomorphism(&g, &h, d, d + 1, CAP)?;
    let built = iso.verified() && (d..=d + 1).all(|n| iso.level(n).is_some()) && d == dh;
    let rejected = match build_process_isomorphism(
        &ggs(5, &[1, 0, 0, 0]),
        &ggs(5, &[1, 0, 0, 1]),
        3,
        4,
        CAP,
    ) {
        Err(Error::HypothesisViolation(msg)) => msg.starts_with("log|G_3| != log|H_3|"),
        _ => false,
    };
    Ok(ok(
        built && rejected,
        format!(
            "(1,0)~(2,0) D={d}..{}: {} checks verified={}; p=5 pair rejected at order check={rejected}",
            d + 1,
            iso.transcript.len(),
            iso.verified()
        ),
    ))
}

fn c10_degenerate() -> Result<Outcome, Error> {
    let mut passed = true;
    let mut parts = Vec::new();
    for q in [2usize, 3] {
        let t = Tower::new(wreath_spec(q, &cyclic_group(q))?);
        let n_max = 5;
        let r = r_sequence(&t, n_max)?;
        let r_zero = r.iter().all(LogQuantity::is_zero);
        let f = f_invariant(&t, n_max)?;
        let f_ok = f.value == Some(LogQuantity::log_of_integer(q as u64));
        let dim = hausdorff_dimension(&t, n_max, Ambient::Wq)?;
        let one = Some(int(1));
        let dim_ok = dim.limit.as_ref().map(|l| l.exact.clone()) == Some(one.clone())
            && dim.sequence.iter().all(|(_, v)| v.exact == one);
        let mut markov_ok = true;
        for lvl in 0..=2 {
            for v in Vertex::all_at_level(q, lvl) {
                for x in 1..=q as u32 {
                    markov_ok &= check_markov(&t, 1, &v, x, CAP)?.passed;
                }
            }
        }
        let good = r_zero && f_ok && dim_ok && markov_ok;
        passed &= good;
        parts.push(format!(
            "q={q}: r=0 {r_zero}, f=log q {f_ok}, dim_wq=1 {dim_ok}, markov k=1 {markov_ok}"
        ));
    }
    Ok(ok(passed, parts.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome, Error>); 10] = [
        ("GGS f-invariant", c1_ggs_f),
        ("F direct = closed form", c2_big_f),
        ("H(cone partition) = log|G_n|", c3_entropy),
        ("measure preservation", c4_measure),
        ("Markov at k = D", c5_markov),
        ("branch order identity", c6_order_condition),
        ("recursive order law", c7_order_law),
        ("pattern DP = |G_n|", c8_patterns),
        ("process isomorphism", c9_iso),
        ("degenerate full groups", c10_degenerate),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "[{}] {:>2}. {name} ({:.2?}): {detail}",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed()
        );
    }
    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
