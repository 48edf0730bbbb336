use std::collections::{BTreeSet, VecDeque};

use branchdyn::group::{
    count_pattern_closed, cyclic_group, detect_depth, extract_pattern_set, fractality_evidence,
    ggs_spec, grigorchuk_spec, quotient_generators, rigid_stabilizer_index, symmetric_group,
    verify_regular_branch, wreath_spec, GroupSpec, PatternSet, Tower, Word,
};
use branchdyn::{Error, Portrait, Vertex};
use num_bigint::BigUint;
use proptest::prelude::*;

fn brute_quotient(spec: &GroupSpec, n: usize) -> BTreeSet<Portrait> {
    let gens = quotient_generators(spec, n).unwrap();
    let id = Portrait::identity(spec.arity(), n);
    let mut seen = BTreeSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in &gens {
            let h = g.compose(s).unwrap();
            if seen.insert(h.clone()) {
                queue.push_back(h);
            }
        }
    }
    seen
}

fn pow2(e: u32) -> BigUint {
    BigUint::from(2u32).pow(e)
}

#[test]
fn quotient_orders_match_brute_force_closure() {
    let cases: Vec<(GroupSpec, usize)> = vec![
        (grigorchuk_spec(), 4),
        (ggs_spec(3, &[1, 0]).unwrap(), 3),
        (ggs_spec(3, &[1, 1]).unwrap(), 3),
        (wreath_spec(3, &cyclic_group(3)).unwrap(), 2),
        (wreath_spec(2, &symmetric_group(2)).unwrap(), 4),
    ];
    for (spec, top) in cases {
        let tower = Tower::new(spec.clone());
        for n in 1..=top {
            let brute = brute_quotient(&spec, n);
            assert_eq!(tower.order(n).unwrap(), BigUint::from(brute.len()), "{} n={n}", spec.label());
            let q = tower.quotient(n).unwrap();
            assert!(brute.iter().all(|g| q.contains(g).unwrap()));
        }
    }
}

#[test]
fn grigorchuk_orders_follow_known_formula() {
    let t = Tower::new(grigorchuk_spec());
    assert_eq!(t.order(1).unwrap(), pow2(1));
    assert_eq!(t.order(2).unwrap(), pow2(3));
    for n in 3..=8u32 {
        assert_eq!(t.order(n as usize).unwrap(), pow2(5 * 2u32.pow(n - 3) + 2), "n={n}");
    }
}

#[test]
fn full_wreath_orders() {
    for m in 2..=4usize {
        let t = Tower::new(wreath_spec(m, &symmetric_group(m)).unwrap());
        let fact: u64 = (1..=m as u64).product();
        for n in 1..=3usize {
            let vertices = (m.pow(n as u32) - 1) / (m - 1);
            assert_eq!(t.order(n).unwrap(), BigUint::from(fact).pow(vertices as u32));
        }
    }
}

#[test]
fn ggs_quotients_are_level_transitive() {
    let t = Tower::new(ggs_spec(5, &[1, 0, 0, 1]).unwrap());
    for n in 1..=3 {
        assert!(t.quotient(n).unwrap().is_level_transitive());
    }
    let rooted = GroupSpec::from_json_str(
        r#"{"arity": 2, "generators": {"a": {"root": [2, 1], "sections": ["1", "1"]}}}"#,
    )
    .unwrap();
    assert!(!Tower::new(rooted).quotient(2).unwrap().is_level_transitive());
}

#[test]
fn ggs_vector_validation() {
    assert!(ggs_spec(4, &[1, 0, 0]).is_err());
    assert!(ggs_spec(3, &[1]).is_err());
    assert!(ggs_spec(3, &[0, 0]).is_err());
    assert!(ggs_spec(3, &[3, 0]).is_err());
    assert!(ggs_spec(2, &[1]).is_err());
    assert!(!ggs_spec(3, &[2, 2]).unwrap().warnings().is_empty());
    assert!(ggs_spec(3, &[1, 0]).unwrap().warnings().is_empty());
}

#[test]
fn json_round_trips() {
    let specs = vec![
        ggs_spec(3, &[1, 2]).unwrap(),
        grigorchuk_spec(),
        wreath_spec(3, &cyclic_group(3)).unwrap(),
    ];
    for spec in specs {
        let text = spec.to_json().to_string();
        let back = GroupSpec::from_json_str(&text).unwrap();
        let (a, b) = (Tower::new(spec), Tower::new(back));
        for n in 1..=3 {
            assert_eq!(a.order(n).unwrap(), b.order(n).unwrap());
        }
    }
}

#[test]
fn malformed_json_is_rejected() {
    let bad = [
        "[]",
        r#"{"preset": "ggs", "p": 3}"#,
        r#"{"preset": "ggs", "p": 3, "alpha": [1, 0], "extra": 1}"#,
        r#"{"preset": "nope"}"#,
        r#"{"preset": 7}"#,
        r#"{"arity": 2, "generators": {"a": {"root": [1, 1], "sections": ["", ""]}}}"#,
        r#"{"arity": 2, "generators": {"a": {"root": [2, 1], "sections": ["b", ""]}}}"#,
        r#"{"arity": 2, "generators": {"a": {"root": [2, 1], "sections": [""]}}}"#,
        r#"{"preset": "wreath", "m": 3, "pattern_group": [[2, 3, 1], [2, 1, 3, 4]]}"#,
        r#"{"preset": "patterns", "arity": 2, "depth": 1, "patterns": ["garbage"]}"#,
    ];
    for text in bad {
        let err = GroupSpec::from_json_str(text).err();
        assert!(err.is_some(), "{text}");
    }
}

#[test]
fn pattern_preset_matches_wreath() {
    let spec = GroupSpec::from_json_str(
        r#"{"preset": "patterns", "arity": 2, "depth": 1, "patterns": ["1 2\n1 2", "1 2\n2 1"]}"#,
    )
    .unwrap();
    let t = Tower::new(spec);
    for n in 1..=4 {
        assert_eq!(t.order(n).unwrap(), pow2(((1u32 << n) - 1) as u32));
    }
}

#[test]
fn pattern_counts_for_grigorchuk_closure() {
    let t = Tower::new(grigorchuk_spec());
    let pats = extract_pattern_set(&t, 4, 4, 1 << 20).unwrap();
    assert_eq!(BigUint::from(pats.len()), t.order(4).unwrap());
    for n in 4..=6 {
        let count = count_pattern_closed(&pats, n, 1 << 20).unwrap();
        assert_eq!(count, t.order(n).unwrap(), "n={n}");
    }
}

#[test]
fn deep_pattern_towers_recover_finite_type_closures() {
    let grig = Tower::new(grigorchuk_spec());
    let h = extract_pattern_set(&grig, 4, 4, 1 << 20).unwrap();
    let closure = Tower::new(GroupSpec::from_patterns("grig4", h.clone()).unwrap());
    for n in 1..=8usize {
        assert_eq!(closure.order(n).unwrap(), grig.order(n).unwrap(), "n = {n}");
        if n >= 4 {
            assert_eq!(closure.order(n).unwrap(), count_pattern_closed(&h, n, 1 << 16).unwrap());
        }
    }
    let ggs = Tower::new(ggs_spec(3, &[1, 0]).unwrap());
    let h = extract_pattern_set(&ggs, 3, 3, 1 << 20).unwrap();
    let closure = Tower::new(GroupSpec::from_patterns("ggs3", h).unwrap());
    for n in 1..=5usize {
        assert_eq!(closure.order(n).unwrap(), ggs.order(n).unwrap(), "n = {n}");
    }
}

#[test]
fn deep_pattern_towers_match_brute_force() {
    let ggs = Tower::new(ggs_spec(3, &[1, 2]).unwrap());
    let h = extract_pattern_set(&ggs, 2, 3, 1 << 20).unwrap();
    let spec = GroupSpec::from_patterns("w2", h.clone()).unwrap();
    for n in 1..=3 {
        let brute = brute_quotient(&spec, n);
        assert!(brute.iter().all(|g| n < 2 || h.admits(g)));
        let want = if n >= 2 {
            count_pattern_closed(&h, n, 1 << 16).unwrap()
        } else {
            BigUint::from(brute.len())
        };
        assert_eq!(BigUint::from(brute.len()), want);
        assert_eq!(Tower::new(spec.clone()).order(n).unwrap(), want);
    }
}

#[test]
fn deep_pattern_sets_must_be_closed() {
    let a = Portrait::rooted(&cyclic_group(2)[1], 2);
    let not_group = PatternSet::new(2, 2, vec![Portrait::identity(2, 2), a.clone(), a.compose(&Portrait::embed_below(&Portrait::rooted(&cyclic_group(2)[1], 1), 0)).unwrap()]).unwrap();
    let spec = GroupSpec::from_patterns("bad", not_group).unwrap();
    assert!(matches!(Tower::new(spec).order(3), Err(Error::Precondition(_))));
    let b = Portrait::embed_below(&Portrait::rooted(&cyclic_group(2)[1], 1), 0);
    let unsectioned = PatternSet::new(2, 2, vec![Portrait::identity(2, 2), b]).unwrap();
    let spec = GroupSpec::from_patterns("bad", unsectioned).unwrap();
    assert!(matches!(Tower::new(spec).order(3), Err(Error::Precondition(_))));
}

#[test]
fn pattern_set_rejects_mixed_shapes() {
    let a = Portrait::identity(2, 1);
    let b = Portrait::identity(2, 2);
    assert!(PatternSet::new(2, 1, vec![a, b]).is_err());
}

#[test]
fn depth_detection() {
    let ggs = Tower::new(ggs_spec(3, &[1, 0]).unwrap());
    let ev = detect_depth(&ggs, 5).unwrap();
    assert_eq!(ev.depth, Some(3));
    assert!(!verify_regular_branch(&ggs, 2, 3).unwrap().passed);
    assert!(verify_regular_branch(&ggs, 3, 4).unwrap().passed);
    let constant = Tower::new(ggs_spec(3, &[1, 1]).unwrap());
    assert_eq!(detect_depth(&constant, 5).unwrap().depth, None);
    let grig = Tower::new(grigorchuk_spec());
    assert_eq!(detect_depth(&grig, 7).unwrap().depth, Some(4));
    assert!(matches!(detect_depth(&grig, 1), Err(Error::Precondition(_))));
}

#[test]
fn fractality_and_rigid_stabilizers() {
    let ggs = Tower::new(ggs_spec(3, &[1, 0]).unwrap());
    let fr = fractality_evidence(&ggs, 3).unwrap();
    assert!(fr.passed);
    let wreath = Tower::new(wreath_spec(2, &symmetric_group(2)).unwrap());
    // rigid level stabilizers of the full group are the full level stabilizers
    let idx = rigid_stabilizer_index(&wreath, 1, 3).unwrap();
    assert_eq!(idx, BigUint::from(2u32));
}

#[test]
fn section_words_evaluate_consistently() {
    let spec = ggs_spec(3, &[1, 0]).unwrap();
    let b = spec.truncate_generator("b", 3).unwrap();
    let a = spec.truncate_generator("a", 2).unwrap();
    assert_eq!(b.section(&Vertex::new(vec![1], 3).unwrap(), 2).unwrap(), a);
    assert_eq!(b.section(&Vertex::new(vec![3], 3).unwrap(), 2).unwrap(), b.truncate(2).unwrap());
}

proptest! {
    #[test]
    fn word_text_round_trip(
        letters in prop::collection::vec((prop::sample::select(vec!["a", "b", "c1", "_x"]), -5i64..=5), 0..6)
    ) {
        let text = letters
            .iter()
            .map(|(n, e)| format!("{n}^{e}"))
            .collect::<Vec<_>>()
            .join(" ");
        let w: Word = text.parse().unwrap();
        let back: Word = w.to_string().parse().unwrap();
        prop_assert_eq!(back, w);
    }
}
