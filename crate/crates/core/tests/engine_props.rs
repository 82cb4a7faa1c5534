use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saga_core::cells::{gru_cell, lstm_fold, lstm_fold_batched, mlp_forward};
use saga_core::data::random_features;
use saga_core::engine::{run_apply_edge, run_model, run_scatter, EdgeParams};
use saga_core::graph::random_edge_types;
use saga_core::{
    build_model, Activation, ApplyEdgeOp, Edge, Fusion, Graph, GruParams, LayerState, LstmParams,
    Matrix, MlpParams, ModelName, Profiler, ScatterMode, Stage,
};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..30).prop_flat_map(|n| {
        prop::collection::vec((0..n as u32, 0..n as u32, 0u32..3), 0..90).prop_map(move |es| {
            let edges = es
                .into_iter()
                .map(|(s, d, t)| Edge::typed(s, d, t))
                .collect();
            Graph::with_etypes(edges, n, 3).unwrap()
        })
    })
}

fn permute(g: &Graph, perm: &[u32]) -> Graph {
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge::typed(perm[e.src as usize], perm[e.dst as usize], e.etype))
        .collect();
    Graph::with_etypes(edges, g.num_vertices(), g.num_etypes()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn models_are_equivariant_under_relabelling(g in arb_graph(), seed in any::<u64>()) {
        let n = g.num_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let pg = permute(&g, &perm);
        let x = random_features(n, 6, seed);
        let mut px = Matrix::zeros(n, 6);
        for v in 0..n {
            px.row_mut(perm[v] as usize).copy_from_slice(x.row(v));
        }
        for name in ModelName::ALL {
            let card = build_model(name, 6, 5, 4, 2, 3, seed).unwrap();
            let a = card.run(&g, &x, &mut Profiler::new()).unwrap().vertex_emb;
            let b = card.run(&pg, &px, &mut Profiler::new()).unwrap().vertex_emb;
            for v in 0..n {
                for (p, q) in a.row(v).iter().zip(b.row(perm[v] as usize)) {
                    prop_assert!((p - q).abs() <= 1e-5 * p.abs().max(1.0), "{name} vertex {v}: {p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn cells_are_row_independent(rows in 1usize..9, i in 1usize..6, h in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::random_uniform(rows, i, 2.0, &mut rng);
        let hs = Matrix::random_uniform(rows, h, 2.0, &mut rng);
        let gru = GruParams::random(i, h, &mut rng);
        let mlp = MlpParams::random(&[i, 4, h], Activation::Relu, &mut rng).unwrap();
        let whole_gru = gru_cell(&hs, &x, &gru).unwrap();
        let whole_mlp = mlp_forward(&x, &mlp).unwrap();
        for r in 0..rows {
            let xr = Matrix::from_rows(&[x.row(r)]).unwrap();
            let hr = Matrix::from_rows(&[hs.row(r)]).unwrap();
            let (one_gru, one_mlp) = (gru_cell(&hr, &xr, &gru).unwrap(), mlp_forward(&xr, &mlp).unwrap());
            prop_assert_eq!(one_gru.row(0), whole_gru.row(r));
            prop_assert_eq!(one_mlp.row(0), whole_mlp.row(r));
        }
        let lstm = LstmParams::random(i, h, &mut rng);
        let seqs: Vec<Matrix> = (0..rows).map(|_| Matrix::random_uniform(3, i, 1.0, &mut rng)).collect();
        let batched = lstm_fold_batched(&seqs, &lstm).unwrap();
        for (r, s) in seqs.iter().enumerate() {
            let one = lstm_fold(s, &lstm).unwrap();
            prop_assert_eq!(one.as_slice(), batched.row(r));
        }
    }

    #[test]
    fn per_type_apply_edge_matches_row_by_row(g in arb_graph(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = Matrix::random_uniform(g.num_edges(), 4, 1.0, &mut rng);
        let mlps: Vec<MlpParams> =
            (0..3).map(|_| MlpParams::random(&[4, 3], Activation::None, &mut rng).unwrap()).collect();
        let (out, cost) = run_apply_edge(&g, &input, ApplyEdgeOp::MlpPerType, &EdgeParams::PerType(mlps.clone())).unwrap();
        for (e, edge) in g.edges().iter().enumerate() {
            let row = Matrix::from_rows(&[input.row(e)]).unwrap();
            let want = mlp_forward(&row, &mlps[edge.etype as usize]).unwrap();
            prop_assert_eq!(out.row(e), want.row(0));
        }
        prop_assert_eq!(cost.invocations as usize, g.present_etypes().len());
    }

    #[test]
    fn scatter_does_no_arithmetic(g in arb_graph()) {
        let state = LayerState {
            vertex_emb: random_features(g.num_vertices(), 3, 1),
            edge_emb: Some(random_features(g.num_edges(), 2, 2)),
        };
        for mode in [ScatterMode::SrcDst, ScatterMode::EdgePlusSrc, ScatterMode::SrcDstEdge] {
            let (m, cost) = run_scatter(&g, &state, mode).unwrap();
            prop_assert_eq!(cost.flops, 0);
            prop_assert_eq!(m.rows(), g.num_edges());
            prop_assert_eq!(m.dim(), mode.output_dim(3, 2));
        }
    }
}

#[test]
fn absent_stages_leave_no_records() {
    let g = random_edge_types(&saga_core::graph::gen_uniform(50, 200, 3).unwrap(), 2, 3).unwrap();
    for name in ModelName::ALL {
        let card = build_model(name, 8, 8, 8, 3, 2, 1).unwrap();
        let mut p = Profiler::new();
        card.run(&g, &random_features(50, 8, 1), &mut p).unwrap();
        let stages: Vec<Stage> = p.records().iter().map(|r| r.stage).collect();
        let per_layer: &[Stage] = if card.spec.scatter == ScatterMode::None {
            &[Stage::Gather, Stage::ApplyVertex]
        } else {
            &Stage::ALL
        };
        assert_eq!(stages, per_layer.repeat(3), "{name}");
        let layers: Vec<usize> = p.records().iter().map(|r| r.layer).collect();
        assert!(layers.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn model_run_equals_layer_by_layer_composition() {
    let g = saga_core::graph::gen_powerlaw(300, 3.0, 2.5, 4).unwrap();
    let x = random_features(300, 8, 2);
    for name in [ModelName::Gcn, ModelName::Gat, ModelName::GraphSage] {
        let card = build_model(name, 8, 8, 8, 2, 1, 3).unwrap();
        let whole = run_model(&g, &x, &card.spec, &card.params, &mut Profiler::new()).unwrap();
        let mut state = LayerState::new(x.clone());
        for l in 0..2 {
            let mut one = card.spec.clone();
            one.num_layers = 1;
            one.dims = card.spec.dims[l..l + 2].to_vec();
            let layer = saga_core::ModelParams {
                layers: vec![card.params.layers[l].clone()],
                edge_type_embedding: None,
            };
            state = run_model(&g, &state.vertex_emb, &one, &layer, &mut Profiler::new()).unwrap();
        }
        assert_eq!(whole.vertex_emb, state.vertex_emb, "{name}");
    }
}

#[test]
fn fusion_toggle_is_invisible_in_outputs() {
    let g = random_edge_types(
        &saga_core::graph::gen_powerlaw(2000, 4.0, 2.2, 5).unwrap(),
        4,
        5,
    )
    .unwrap();
    let x = random_features(2000, 16, 5);
    for name in [
        ModelName::Gcn,
        ModelName::Gat,
        ModelName::Ggnn,
        ModelName::Rgcn,
    ] {
        let card = build_model(name, 16, 16, 16, 2, 4, 5).unwrap();
        let on = card
            .clone()
            .with_fusion(Fusion::On)
            .unwrap()
            .run(&g, &x, &mut Profiler::new())
            .unwrap();
        let off = card
            .with_fusion(Fusion::Off)
            .unwrap()
            .run(&g, &x, &mut Profiler::new())
            .unwrap();
        assert!(
            on.vertex_emb.max_rel_diff(&off.vertex_emb).unwrap() <= 1e-5,
            "{name}"
        );
    }
    let options = saga_core::ModelOptions {
        ggnn_all_edges: true,
        ..Default::default()
    };
    let card = saga_core::build_model_with(ModelName::Ggnn, 16, 16, 16, 2, 4, 5, options).unwrap();
    let on = card
        .clone()
        .with_fusion(Fusion::On)
        .unwrap()
        .run(&g, &x, &mut Profiler::new())
        .unwrap();
    let off = card
        .with_fusion(Fusion::Off)
        .unwrap()
        .run(&g, &x, &mut Profiler::new())
        .unwrap();
    assert!(on.vertex_emb.max_rel_diff(&off.vertex_emb).unwrap() <= 1e-5);
}
