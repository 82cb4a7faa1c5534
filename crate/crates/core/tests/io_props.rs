use std::io::Cursor;

use proptest::prelude::*;
use saga_core::data::{
    load_edgelist, load_features, parse_edgelist, parse_features, save_edgelist, save_features,
    write_edgelist,
};
use saga_core::graph::gen_powerlaw;
use saga_core::params::{dump_params, load_params, read_dump};
use saga_core::profile::{bytes_model, report, OpShape};
use saga_core::{
    build_model, Edge, Error, Graph, Matrix, ModelName, Profile, Profiler, SyntheticSource,
};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1usize..25).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32, 0u32..4), 0..60).prop_map(move |es| {
            let edges = es
                .into_iter()
                .map(|(s, d, t)| Edge::typed(s, d, t))
                .collect();
            Graph::with_etypes(edges, n, 4).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn edgelist_parser_never_panics(text in "[0-9a-z #\\t\\n,.-]{0,200}", directed: bool, typed: bool) {
        let _ = parse_edgelist(Cursor::new(text), directed, typed);
    }

    #[test]
    fn feature_parser_never_panics(text in "[0-9e .,\\n\\t-]{0,200}", rows in 0usize..6) {
        let _ = parse_features(Cursor::new(text), rows);
    }

    #[test]
    fn synthetic_parser_never_panics(text in "[a-z_:=,.0-9]{0,40}") {
        let _ = SyntheticSource::parse(&text);
    }

    #[test]
    fn directed_edgelist_round_trips(g in arb_graph()) {
        let mut buf = Vec::new();
        write_edgelist(&g, &mut buf, true).unwrap();
        let back = parse_edgelist(Cursor::new(buf), true, true).unwrap();
        // Labels are densified in first-appearance order, so compare edges
        // through the relabelling.
        prop_assert_eq!(back.num_edges(), g.num_edges());
        let mut map = std::collections::HashMap::new();
        for (a, b) in g.edges().iter().zip(back.edges()) {
            prop_assert_eq!(a.etype, b.etype);
            for (x, y) in [(a.src, b.src), (a.dst, b.dst)] {
                prop_assert_eq!(*map.entry(x).or_insert(y), y);
            }
        }
    }

    #[test]
    fn features_round_trip_exactly(rows in 1usize..8, cols in 1usize..6, seed in any::<u64>()) {
        let m = saga_core::data::random_features(rows, cols, seed);
        let mut buf = Vec::new();
        saga_core::data::write_features(&m, &mut buf).unwrap();
        prop_assert_eq!(parse_features(Cursor::new(buf), rows).unwrap(), m);
    }

    #[test]
    fn report_shares_sum_to_one(walls in prop::collection::vec(0u64..1_000_000, 1..12)) {
        let g = Graph::from_edges(vec![Edge::new(0, 1)], 2).unwrap();
        let card = build_model(ModelName::Gat, 2, 2, 2, 3, 1, 0).unwrap();
        let mut p = Profiler::new();
        card.run(&g, &Matrix::filled(2, 2, 1.0), &mut p).unwrap();
        let mut profile = p.into_profile("gat", "tiny");
        for (r, &w) in profile.records.iter_mut().zip(walls.iter().cycle()) {
            r.wall_ns = w;
        }
        let rep = report(&profile);
        let total: f64 = rep.rows.iter().map(|r| r.share).sum();
        if profile.records.iter().any(|r| r.wall_ns > 0) {
            prop_assert!((total - 1.0).abs() < 1e-9);
        } else {
            prop_assert_eq!(total, 0.0);
        }
    }
}

#[test]
fn undirected_input_adds_reverse_edges() {
    let g = parse_edgelist(Cursor::new("# comment\na b\nb c\nc c\n"), false, false).unwrap();
    assert_eq!(g.num_vertices(), 3);
    assert_eq!(
        g.edges(),
        &[
            Edge::new(0, 1),
            Edge::new(1, 0),
            Edge::new(1, 2),
            Edge::new(2, 1),
            Edge::new(2, 2)
        ]
    );
}

#[test]
fn parse_errors_carry_the_line() {
    let err = parse_edgelist(Cursor::new("0 1\n0 1 2 3\n"), true, false).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    let err = parse_features(Cursor::new("1,2\n3\n"), 2).unwrap_err();
    assert!(err.to_string().contains(":2:"), "{err}");
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen_powerlaw(200, 3.0, 2.5, 1).unwrap();
    let path = dir.path().join("g.edges");
    save_edgelist(&g, &path, false).unwrap();
    assert_eq!(
        load_edgelist(&path, true, false).unwrap().num_edges(),
        g.num_edges()
    );
    let m = saga_core::data::random_features(5, 3, 2);
    let fpath = dir.path().join("x.csv");
    save_features(&m, &fpath).unwrap();
    assert_eq!(load_features(&fpath, 5).unwrap(), m);
    let missing = load_edgelist(dir.path().join("nope"), true, false).unwrap_err();
    assert!(missing.to_string().contains("nope"));
}

#[test]
fn param_dumps_are_deterministic_and_reload() {
    for name in ModelName::ALL {
        let card = build_model(name, 6, 5, 4, 2, 3, 42).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        dump_params(&card.params, &mut a).unwrap();
        dump_params(
            &build_model(name, 6, 5, 4, 2, 3, 42).unwrap().params,
            &mut b,
        )
        .unwrap();
        assert_eq!(a, b, "{name}");

        let mut other = build_model(name, 6, 5, 4, 2, 3, 43).unwrap();
        assert_ne!(other.params, card.params);
        load_params(&mut other.params, Cursor::new(&a)).unwrap();
        assert_eq!(other.params, card.params, "{name}");
        assert!(!read_dump(Cursor::new(&a)).unwrap().is_empty());
    }
}

#[test]
fn param_load_rejects_wrong_shapes() {
    let card = build_model(ModelName::Gcn, 6, 5, 4, 2, 1, 1).unwrap();
    let mut dump = Vec::new();
    dump_params(&card.params, &mut dump).unwrap();
    let mut wider = build_model(ModelName::Gcn, 7, 5, 4, 2, 1, 1).unwrap();
    assert!(load_params(&mut wider.params, Cursor::new(&dump)).is_err());
}

#[test]
fn profile_csv_round_trips() {
    let g = gen_powerlaw(300, 3.0, 2.5, 2).unwrap();
    let mut out = Vec::new();
    let mut expected = Vec::new();
    for (i, name) in [ModelName::Gcn, ModelName::GraphSage]
        .into_iter()
        .enumerate()
    {
        let card = build_model(name, 8, 8, 8, 2, 1, 2).unwrap();
        let mut p = Profiler::new();
        card.run(&g, &saga_core::data::random_features(300, 8, 2), &mut p)
            .unwrap();
        let profile = p.into_profile(name.name(), "pl300");
        profile.write_csv(&mut out, i == 0).unwrap();
        expected.push(profile);
    }
    let back: Vec<Profile> = Profile::read_csv(out.as_slice()).unwrap();
    assert_eq!(back, expected);
}

#[test]
fn bytes_model_counts_each_operand_once() {
    assert_eq!(
        bytes_model(OpShape::Gemm {
            m: 3,
            k: 4,
            n: 5,
            bias: true
        }),
        4 * (12 + 20 + 15 + 5)
    );
    assert_eq!(
        bytes_model(OpShape::Spmm {
            rows: 2,
            cols: 3,
            nnz: 4,
            k: 5
        }),
        4 * (3 + 8 + 15 + 10)
    );
    assert_eq!(
        bytes_model(OpShape::IndexSelect {
            gathered: 6,
            written: 6
        }),
        48
    );
    assert_eq!(
        bytes_model(OpShape::SegmentReduce {
            in_rows: 4,
            out_rows: 2,
            k: 3
        }),
        4 * 18
    );
}
