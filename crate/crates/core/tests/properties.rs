mod common;

use common::random_graph;
use pipeforge::filter::{as_code_graph, filter_corpus, filter_graph, FilterOptions, Filtered, NodeVocabulary};
use pipeforge::generator::generate::{generate, GenerateOptions, Mode};
use pipeforge::generator::io::{quantize, read_model, write_model};
use pipeforge::generator::trace::canonical_relabel;
use pipeforge::generator::{canonicalize_trace, replay, GeneratorModel};
use pipeforge::metrics::{macro_f1, mrr, r2};
use pipeforge::prep::{detect_task, plan_budget};
use pipeforge::profile::{cosine, embed_table, profile_table, ProfileConfig};
use pipeforge::script::{analyze, EdgeKind, NodeKind, ScriptSource};
use pipeforge::skeleton::{SkeletonDocument, SkeletonEntry};
use pipeforge::table::Table;
use pipeforge::topo_order;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// One line of a generated script over variables `v0..v5` and `m0..m3`.
fn statement() -> impl Strategy<Value = String> {
    let v = 0..6usize;
    let m = 0..4usize;
    let est = prop::sample::select(vec![
        "LogisticRegression",
        "RandomForestClassifier",
        "XGBClassifier",
        "Ridge",
        "KMeans",
    ]);
    let pre = prop::sample::select(vec!["StandardScaler", "MinMaxScaler", "SimpleImputer", "PCA", "OneHotEncoder"]);
    prop_oneof![
        (v.clone(), 0..3usize).prop_map(|(a, f)| format!("v{a} = pd.read_csv('data{f}.csv')")),
        (m.clone(), pre).prop_map(|(a, p)| format!("m{a} = {p}()")),
        (m.clone(), est).prop_map(|(a, e)| format!("m{a} = {e}()")),
        (v.clone(), m.clone(), v.clone()).prop_map(|(a, b, c)| format!("v{a} = m{b}.fit_transform(v{c})")),
        (m.clone(), v.clone(), v.clone()).prop_map(|(a, b, c)| format!("m{a}.fit(v{b}, v{c})")),
        (v.clone(), m.clone(), v.clone()).prop_map(|(a, b, c)| format!("v{a} = m{b}.predict(v{c})")),
        (v.clone(), v.clone()).prop_map(|(a, b)| format!("v{a} = v{b}.dropna().reset_index()")),
        (v.clone(), v.clone()).prop_map(|(a, b)| format!("v{a}, v{b} = train_test_split(v{a}, v{b})")),
        v.clone().prop_map(|a| format!("print(v{a}.describe())")),
        (v.clone(), v).prop_map(|(a, b)| format!("for i in range(3):\n    v{a} = v{b}.head(i)")),
        Just("plt.show()".to_string()),
    ]
}

fn script() -> impl Strategy<Value = String> {
    prop::collection::vec(statement(), 0..40).prop_map(|lines| {
        let mut s = String::from(
            "import pandas as pd\nimport matplotlib.pyplot as plt\n\
             from sklearn.model_selection import train_test_split\n\
             from sklearn.preprocessing import StandardScaler, MinMaxScaler, OneHotEncoder\n\
             from sklearn.impute import SimpleImputer\nfrom sklearn.decomposition import PCA\n\
             from sklearn.linear_model import LogisticRegression, Ridge\n\
             from sklearn.ensemble import RandomForestClassifier\nfrom sklearn.cluster import KMeans\n\
             from xgboost import XGBClassifier\n",
        );
        for l in lines {
            s.push_str(&l);
            s.push('\n');
        }
        s
    })
}

fn column(rows: usize) -> impl Strategy<Value = Vec<String>> {
    prop_oneof![
        prop::collection::vec((0..50i32).prop_map(|x| x.to_string()), rows),
        prop::collection::vec((-1e3..1e3f64).prop_map(|x| format!("{x:.3}")), rows),
        prop::collection::vec(prop::sample::select(vec!["red", "green", "blue", "", "teal"]), rows)
            .prop_map(|v| v.into_iter().map(String::from).collect()),
        prop::collection::vec("[a-z]{1,8}( [a-z]{1,8}){0,6}", rows),
    ]
}

fn table() -> impl Strategy<Value = Table> {
    (1..40usize, 1..6usize)
        .prop_flat_map(|(rows, cols)| prop::collection::vec(column(rows), cols))
        .prop_map(|columns| Table {
            name: "t".into(),
            headers: (0..columns.len()).map(|i| format!("c{i}")).collect(),
            columns,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn code_graphs_are_deterministic_and_valid(src in script()) {
        let s = ScriptSource::new("gen.py", src);
        let (stmts, g) = analyze(&s).unwrap();
        let (_, g2) = analyze(&s).unwrap();
        prop_assert_eq!(serde_json::to_string(&g).unwrap(), serde_json::to_string(&g2).unwrap());
        prop_assert!(g.validate().is_ok(), "{:?}", g.validate());
        let flow = g.edges.iter().filter(|e| e.kind == EdgeKind::DataFlow).map(|e| (e.src, e.dst));
        prop_assert!(topo_order(g.nodes.len(), flow).is_some());
        prop_assert_eq!(g.count_kind(NodeKind::CallSite), stmts.call_count());
    }

    #[test]
    fn filtering_shrinks_and_is_idempotent(src in script()) {
        let v = NodeVocabulary::default_whitelist();
        let (_, g) = analyze(&ScriptSource::new("gen.py", src)).unwrap();
        if let Filtered::Kept(p) = filter_graph(&g, &v, "data0", &FilterOptions::default()) {
            prop_assert!(p.validate(&v, 64).is_ok(), "{:?}", p.validate(&v, 64));
            // the added DATASET node and its edge are not part of the code graph
            prop_assert!(p.nodes.len() - 1 <= g.nodes.len());
            prop_assert!(p.edges.len() - 1 <= g.edges.len());
            let again = filter_graph(&as_code_graph(&p, &v), &v, "data0", &FilterOptions::default());
            let Filtered::Kept(q) = again else { return Err(TestCaseError::fail("refilter rejected")) };
            let key = |g: &pipeforge::pipeline::PipelineGraph| {
                let mut e: Vec<_> = g.edges.iter().map(|e| (g.nodes[e.src].vocab_id, g.nodes[e.dst].vocab_id)).collect();
                e.sort();
                (g.nodes.iter().map(|n| n.vocab_id).collect::<Vec<_>>(), e)
            };
            prop_assert_eq!(key(&p), key(&q));
        }
    }

    #[test]
    fn report_merge_is_associative(a in script(), b in script(), c in script()) {
        let v = NodeVocabulary::default_whitelist();
        let r = |src: &str| {
            let (_, g) = analyze(&ScriptSource::new("gen.py", src)).unwrap();
            filter_corpus(&[g], &v, &HashMap::new(), &FilterOptions::default()).1
        };
        let (ra, rb, rc) = (r(&a), r(&b), r(&c));
        prop_assert_eq!(ra.merge(&rb).merge(&rc), ra.merge(&rb.merge(&rc)));
        let rate = ra.merge(&rb).merge(&rc).reduction_rate_total();
        prop_assert!((0.0..=1.0).contains(&rate));
    }

    #[test]
    fn trace_round_trip(seed in any::<u64>(), extra in 0..9usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 12, extra, "d");
        let back = replay(&canonicalize_trace(&g).unwrap()).unwrap();
        prop_assert_eq!(Some(back), canonical_relabel(&g));
    }

    #[test]
    fn cosine_is_symmetric_and_bounded(
        a in prop::collection::vec(-10.0..10.0f64, 8),
        b in prop::collection::vec(-10.0..10.0f64, 8),
    ) {
        let x = cosine(&a, &b);
        prop_assert_eq!(x, cosine(&b, &a));
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&x));
    }

    #[test]
    fn table_vector_ignores_column_order(t in table(), seed in any::<u64>()) {
        let cfg = ProfileConfig { dim: 64, ..Default::default() };
        let mut order: Vec<usize> = (0..t.headers.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let permuted = Table {
            name: t.name.clone(),
            headers: order.iter().map(|&i| t.headers[i].clone()).collect(),
            columns: order.iter().map(|&i| t.columns[i].clone()).collect(),
        };
        let a = embed_table(&profile_table(&t, &cfg), "t").unwrap();
        let b = embed_table(&profile_table(&permuted, &cfg), "t").unwrap();
        prop_assert_eq!(a.vector, b.vector);
    }

    #[test]
    fn task_detection_ignores_row_order(col in column(30), seed in any::<u64>()) {
        let mut shuffled = col.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(detect_task(&col).ok(), detect_task(&shuffled).ok());
    }

    #[test]
    fn budget_fits_within_total(total in 1e-3..1e6f64, frac in 0.0..0.999f64, k in 1..50usize) {
        let consumed = total * frac;
        let plan = plan_budget(total, consumed, k).unwrap();
        prop_assert!(plan.per_graph > 0.0);
        prop_assert!(k as f64 * plan.per_graph + consumed <= total + 1e-9);
        prop_assert!(plan_budget(total, total, k).is_err());
    }

    #[test]
    fn macro_f1_survives_relabeling(
        pairs in prop::collection::vec((0..4u8, 0..4u8), 1..60),
        perm in Just([0u8, 1, 2, 3]).prop_shuffle(),
    ) {
        let (p, l): (Vec<u8>, Vec<u8>) = pairs.iter().copied().unzip();
        let rp: Vec<u8> = p.iter().map(|&x| perm[x as usize]).collect();
        let rl: Vec<u8> = l.iter().map(|&x| perm[x as usize]).collect();
        let a = macro_f1(&p, &l).unwrap();
        prop_assert!((a - macro_f1(&rp, &rl).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn r2_ignores_a_common_shift(
        pairs in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 2..40),
        c in -1e3..1e3f64,
    ) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        prop_assume!(t.iter().any(|&x| (x - t[0]).abs() > 1e-3));
        let sp: Vec<f64> = p.iter().map(|x| x + c).collect();
        let st: Vec<f64> = t.iter().map(|x| x + c).collect();
        let (a, b) = (r2(&p, &t).unwrap(), r2(&sp, &st).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn mrr_is_monotone(ranks in prop::collection::vec(1..20usize, 1..20), i in any::<prop::sample::Index>()) {
        let j = i.index(ranks.len());
        prop_assume!(ranks[j] > 1);
        let mut better = ranks.clone();
        better[j] -= 1;
        prop_assert!(mrr(&better).unwrap() >= mrr(&ranks).unwrap());
    }

    #[test]
    fn generated_graphs_are_ranked_and_valid(seed in any::<u64>(), k in 1..6usize) {
        let mut m = GeneratorModel::new(8, 4, 1, vec!["d".into()], seed);
        common::randomize(&mut m, &mut ChaCha8Rng::seed_from_u64(seed), 0.5);
        let opts = GenerateOptions { k, max_nodes: 8, mode: Mode::Sampled(seed), retries: 20 };
        if let Ok(r) = generate(&m, "d", &opts, &|g| topo_order(g.nodes.len(), g.edges.iter().map(|e| (e.src, e.dst))).is_some()) {
            prop_assert!(r.graphs.len() <= k);
            prop_assert!(r.graphs.windows(2).all(|w| w[0].log_prob >= w[1].log_prob));
            prop_assert!(r.graphs.iter().all(|g| g.log_prob <= 0.0 && g.graph.nodes.len() <= 8));
        }
    }

    #[test]
    fn quantized_model_file_round_trips(seed in any::<u64>()) {
        let mut m = GeneratorModel::new(7, 3, 2, vec!["a".into(), "b".into()], seed);
        quantize(&mut m);
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        prop_assert_eq!(read_model(&buf[..]).unwrap(), m);
    }

    #[test]
    fn skeleton_document_round_trips(
        entries in prop::collection::vec(("[a-z]{1,6}", prop::collection::vec("[A-Z][a-z]{2,8}", 0..4), "[A-Z][a-z]{2,8}", -50.0..0.0f64, 0.0..1e4f64), 0..6),
    ) {
        let doc = SkeletonDocument {
            version: 1,
            dataset: "d".into(),
            task: pipeforge::prep::Task::Regression,
            skeletons: entries
                .into_iter()
                .map(|(id, preprocessors, estimator, log_prob, budget_seconds)| SkeletonEntry { id, preprocessors, estimator, log_prob, budget_seconds })
                .collect(),
            registry: "sklearn".into(),
        };
        prop_assert_eq!(SkeletonDocument::from_json(&doc.to_json()).unwrap(), doc);
    }
}
