use argucast_core::acf::{stance, EdgeProvenance};
use argucast_core::coherence::{judge, strength_branch, Branch};
use argucast_core::datasets::{accuracy_report, Breadth, DebateDocument, ForecastRecord, GeneratedArgument};
use argucast_core::stats::{mcnemar, t_test_one_sided, ContingencyTable, GroupSummary};
use argucast_core::variants::classify;
use argucast_core::*;
use proptest::prelude::*;

fn id(s: &str) -> ArgumentId {
    ArgumentId::new(s).unwrap()
}

fn user(s: &str) -> ForecasterId {
    ForecasterId::new(s).unwrap()
}

fn vote_strategy() -> impl Strategy<Value = Option<Vote>> {
    prop_oneof![
        Just(None),
        Just(Some(Vote::Agree)),
        Just(Some(Vote::Disagree)),
        Just(Some(Vote::Unsure)),
    ]
}

/// Random DAG: argument i may only point at arguments with a smaller index.
fn dag_strategy() -> impl Strategy<Value = Qbaf> {
    (1usize..10).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..=1.0, n),
            prop::collection::vec((0usize..n, 0usize..n, any::<bool>()), 0..2 * n),
        )
            .prop_map(move |(bases, raw_edges)| {
                let mut q = Qbaf::new();
                for (i, b) in bases.iter().enumerate() {
                    q.add_argument(Argument::new(id(&format!("x{i}")), ""), *b);
                }
                let mut seen = std::collections::BTreeSet::new();
                for (a, b, attack) in raw_edges {
                    let (src, dst) = (a.max(b), a.min(b));
                    if src == dst || !seen.insert((src, dst)) {
                        continue;
                    }
                    let (s, d) = (id(&format!("x{src}")), id(&format!("x{dst}")));
                    if attack {
                        q.add_attack(s, d);
                    } else {
                        q.add_support(s, d);
                    }
                }
                q
            })
    })
}

/// Tree debate rooted at forecasting argument `f`, with the vote of `u` on
/// each regular argument.
#[derive(Debug, Clone)]
struct TreeDebate {
    parents: Vec<(usize, bool)>,
    votes: Vec<Option<Vote>>,
}

impl TreeDebate {
    fn name(i: usize) -> ArgumentId {
        if i == 0 {
            id("f")
        } else {
            id(&format!("r{i}"))
        }
    }

    fn acf(&self) -> Acf {
        let mut acf = Acf::new();
        acf.add_forecasting(Argument::new(id("f"), ""));
        for (k, (parent, attack)) in self.parents.iter().enumerate() {
            let me = Self::name(k + 1);
            acf.add_regular(Argument::new(me.clone(), ""));
            let e = Edge::new(me, Self::name(*parent), if *attack { Polarity::Attack } else { Polarity::Support });
            acf.add_edge(e);
        }
        acf.add_forecaster(user("u"));
        for (k, v) in self.votes.iter().enumerate() {
            acf.set_vote(user("u"), Self::name(k + 1), *v);
        }
        acf
    }
}

fn tree_strategy(votes: BoxedStrategy<Option<Vote>>) -> impl Strategy<Value = TreeDebate> {
    (1usize..12).prop_flat_map(move |n| {
        let parents: Vec<_> = (0..n).map(|k| (0..=k, any::<bool>())).collect();
        (parents, prop::collection::vec(votes.clone(), n)).prop_map(|(parents, votes)| TreeDebate { parents, votes })
    })
}

fn silent_vote() -> BoxedStrategy<Option<Vote>> {
    prop_oneof![Just(None), Just(Some(Vote::Unsure))].boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn strengths_stay_in_unit_interval(q in dag_strategy()) {
        let s = evaluate(&q).unwrap();
        prop_assert_eq!(s.len(), q.arguments().len());
        for (_, v) in s.iter() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn leaves_keep_their_base_score(q in dag_strategy()) {
        let s = evaluate(&q).unwrap();
        for a in q.arguments() {
            if !q.edges().iter().any(|e| e.dst == a.id) {
                prop_assert_eq!(s.get(&a.id), q.base_score(&a.id));
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic(q in dag_strategy()) {
        prop_assert_eq!(evaluate(&q).unwrap(), evaluate(&q.clone()).unwrap());
    }

    #[test]
    fn zero_strength_child_is_neutral(q in dag_strategy(), pick in any::<prop::sample::Index>(), attack in any::<bool>()) {
        let before = evaluate(&q).unwrap();
        let target = q.arguments()[pick.index(q.arguments().len())].id.clone();
        let mut q2 = q.clone();
        q2.add_argument(Argument::new(id("zero"), ""), 0.0);
        if attack { q2.add_attack(id("zero"), target); } else { q2.add_support(id("zero"), target); }
        let after = evaluate(&q2).unwrap();
        for (k, v) in before.iter() {
            prop_assert_eq!(after.get(k), Some(v));
        }
    }

    #[test]
    fn strict_bias_and_balance(base in 0.001f64..0.999, att in 0.0f64..=1.0, sup in 0.0f64..=1.0) {
        let v = combine(base, att, sup).unwrap();
        if att > sup {
            prop_assert!(v < base);
        } else if sup > att {
            prop_assert!(v > base);
        } else {
            prop_assert_eq!(v, base);
        }
        prop_assert_eq!(combine(base, att, att).unwrap(), base);
    }

    #[test]
    fn aggregate_ignores_order(mut xs in prop::collection::vec(0.0f64..=1.0, 0..8)) {
        let a = aggregate(&xs).unwrap();
        xs.reverse();
        let b = aggregate(&xs).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn silent_forecaster_is_neutral(t in tree_strategy(silent_vote())) {
        let s = forecaster_strengths(&t.acf(), &user("u"), &ForecastBase::default()).unwrap();
        prop_assert!((s.get(&id("f")).unwrap() - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn one_agreed_child_biases_the_forecast(
        t in tree_strategy(silent_vote()),
        child in any::<prop::sample::Index>(),
        base in 0.01f64..0.99,
    ) {
        let children: Vec<usize> = t.parents.iter().enumerate().filter(|(_, (p, _))| *p == 0).map(|(k, _)| k).collect();
        prop_assume!(!children.is_empty());
        let k = children[child.index(children.len())];
        let mut t = t;
        t.votes[k] = Some(Vote::Agree);
        let fb = ForecastBase::constant(base);
        let sigma = forecaster_strengths(&t.acf(), &user("u"), &fb).unwrap().get(&id("f")).unwrap();
        if t.parents[k].1 {
            prop_assert!(sigma < base);
        } else {
            prop_assert!(sigma > base);
        }
    }

    #[test]
    fn unsure_and_undefined_are_interchangeable(t in tree_strategy(vote_strategy().boxed()), pick in any::<prop::sample::Index>()) {
        let k = pick.index(t.votes.len());
        let mut a = t.clone();
        let mut b = t.clone();
        a.votes[k] = Some(Vote::Unsure);
        b.votes[k] = None;
        let fb = ForecastBase::default();
        prop_assert_eq!(
            forecaster_strengths(&a.acf(), &user("u"), &fb).unwrap(),
            forecaster_strengths(&b.acf(), &user("u"), &fb).unwrap()
        );
    }

    #[test]
    fn provenance_partitions_edges(t in tree_strategy(vote_strategy().boxed())) {
        let acf = t.acf();
        let fq = derive_forecaster_qbaf(&acf, &user("u"), &ForecastBase::default()).unwrap();
        prop_assert_eq!(fq.provenance.len(), acf.edges().len());
        let surviving = fq.provenance.iter().filter(|r| r.provenance != EdgeProvenance::Dropped).count();
        prop_assert_eq!(surviving, fq.qbaf.edges().len());
        for r in &fq.provenance {
            let found = fq.qbaf.edges().iter().find(|e| e.src == r.original.src && e.dst == r.original.dst);
            match r.provenance {
                EdgeProvenance::Kept => prop_assert_eq!(found.map(|e| e.polarity), Some(r.original.polarity)),
                EdgeProvenance::Flipped => prop_assert_eq!(found.map(|e| e.polarity), Some(r.original.polarity.flipped())),
                EdgeProvenance::Dropped => prop_assert!(found.is_none()),
            }
        }
    }

    #[test]
    fn flipping_is_an_involution(src in vote_strategy(), dst in vote_strategy(), attack in any::<bool>()) {
        let p = if attack { Polarity::Attack } else { Polarity::Support };
        if let Some((q, how)) = stance(p, src, dst) {
            let (back, _) = stance(q, src, dst).unwrap();
            prop_assert_eq!(back, p);
            prop_assert_eq!(how == EdgeProvenance::Flipped, src == Some(Vote::Disagree) && dst != Some(Vote::Disagree));
        }
    }

    #[test]
    fn branches_are_a_trichotomy(sigma in 0.0f64..=1.0, xi1 in 0.01f64..0.99) {
        let b = strength_branch(sigma, xi1, 1e-9);
        let below = sigma < xi1 && (sigma - xi1).abs() > 1e-9;
        let above = sigma > xi1 && (sigma - xi1).abs() > 1e-9;
        let at = (sigma - xi1).abs() <= 1e-9;
        prop_assert_eq!([below, above, at].iter().filter(|x| **x).count(), 1);
        prop_assert_eq!(b == Branch::Below, below);
        prop_assert_eq!(b == Branch::Above, above);
        prop_assert_eq!(b == Branch::AtThreshold, at);
    }

    #[test]
    fn raising_xi2_only_hurts_above_branch(sigma in 0.0f64..=1.0, p in 0.0f64..=1.0, lo in 0.01f64..0.99, hi in 0.01f64..0.99) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let (b, c_lo) = judge(sigma, Some(p), 0.5, lo, 0.05, 1e-9);
        let (_, c_hi) = judge(sigma, Some(p), 0.5, hi, 0.05, 1e-9);
        match b {
            Branch::Above => prop_assert!(!(c_hi && !c_lo)),
            Branch::Below => prop_assert!(!(c_lo && !c_hi)),
            _ => {}
        }
    }

    #[test]
    fn coherent_mean_within_raw_range(
        debate in tree_strategy(vote_strategy().boxed()),
        preds in prop::collection::vec((vote_strategy(), 0.0f64..=1.0), 1..8),
    ) {
        // Several forecasters on the same tree with varied votes.
        let mut acf = debate.acf();
        for (i, (v, p)) in preds.iter().enumerate() {
            let u = user(&format!("w{i}"));
            acf.set_vote(u.clone(), id("r1"), *v);
            acf.set_prediction(u, id("f"), Some(*p));
        }
        let cfg = ThresholdConfig::default();
        let s = aggregate_forecast(&acf, &id("f"), &cfg, &ForecastBase::default()).unwrap();
        let again = aggregate_forecast(&acf, &id("f"), &cfg, &ForecastBase::default()).unwrap();
        prop_assert_eq!(&s, &again);
        prop_assert!(s.n_coherent <= s.n_raw);
        prop_assert_eq!(s.n_raw, preds.len());
        if let Some(m) = s.coherent_mean {
            let lo = preds.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
            let hi = preds.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        } else {
            prop_assert_eq!(s.n_coherent, 0);
        }
    }

    #[test]
    fn debate_documents_round_trip(t in tree_strategy(vote_strategy().boxed()), p in prop::option::of(0.0f64..=1.0)) {
        let mut acf = t.acf();
        acf.set_prediction(user("u"), id("f"), p);
        let doc = DebateDocument::from(&acf);
        let text = serde_json::to_string(&doc).unwrap();
        let back: DebateDocument = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_acf(), acf);
    }

    #[test]
    fn mcnemar_ignores_concordant_cells(yy in 0u64..100, yn in 0u64..100, ny in 0u64..100, nn in 0u64..100, dy in 0u64..50, dn in 0u64..50) {
        prop_assume!(yn + ny > 0);
        let a = mcnemar(&ContingencyTable::new(yy, yn, ny, nn)).unwrap();
        let b = mcnemar(&ContingencyTable::new(yy + dy, ny, yn, nn + dn)).unwrap();
        prop_assert_eq!(a.chi2, b.chi2);
        prop_assert!((0.0..=1.0).contains(&a.p));
    }

    #[test]
    fn higher_mean_never_raises_p(m in -1.0f64..1.0, bump in 0.0f64..1.0, sa in 0.01f64..1.0, sb in 0.01f64..1.0, na in 2u64..200, nb in 2u64..200) {
        let b = GroupSummary::new(0.0, sb, nb).unwrap();
        let p1 = t_test_one_sided(&GroupSummary::new(m, sa, na).unwrap(), &b).unwrap().p;
        let p2 = t_test_one_sided(&GroupSummary::new(m + bump, sa, na).unwrap(), &b).unwrap().p;
        prop_assert!(p2 <= p1 + 1e-15);
    }

    #[test]
    fn complexity_flags_ignore_silence_labels(t in tree_strategy(vote_strategy().boxed()), pick in any::<prop::sample::Index>()) {
        let k = pick.index(t.votes.len());
        let mut a = t.clone();
        let mut b = t.clone();
        a.votes[k] = Some(Vote::Unsure);
        b.votes[k] = None;
        let pa = classify(&a.acf(), &user("u")).unwrap();
        let pb = classify(&b.acf(), &user("u")).unwrap();
        prop_assert_eq!(pa, pb);
        if pa.simple {
            prop_assert!(!pa.vote_complex && !pa.breadth_complex && !pa.depth_complex);
        }
    }

    #[test]
    fn mirrored_records_keep_accuracy(rows in prop::collection::vec((0.0f64..=1.0, any::<bool>()), 1..30)) {
        let make = |p: f64, r: bool| ForecastRecord {
            question_id: "q".into(),
            claim: String::new(),
            prediction: p,
            resolution: Some(r),
            breadth: Breadth::B11,
            pro: vec![GeneratedArgument { text: String::new(), score: 0.5 }],
            con: vec![GeneratedArgument { text: String::new(), score: 0.5 }],
        };
        let rows: Vec<_> = rows.into_iter().filter(|(p, _)| *p != 0.5).collect();
        prop_assume!(!rows.is_empty());
        let a: Vec<_> = rows.iter().map(|(p, r)| make(*p, *r)).collect();
        let b: Vec<_> = rows.iter().map(|(p, r)| make(1.0 - p, !r)).collect();
        let cfg = ThresholdConfig::default();
        let ra = accuracy_report(&a, &cfg, 0.5).unwrap();
        let rb = accuracy_report(&b, &cfg, 0.5).unwrap();
        prop_assert_eq!(ra.correct, rb.correct);
        let ret = ra.retention.unwrap();
        prop_assert!((0.0..=1.0).contains(&ret));
        prop_assert!(ra.coherent_correct <= ra.coherent_total && ra.coherent_total <= ra.total);
        prop_assert_eq!(ra.coherent_accuracy.is_some(), ra.coherent_total > 0);
    }
}
