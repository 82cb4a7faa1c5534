//! The five reference models as stage compositions with seeded parameters.
//!
//! | model     | Scatter   | ApplyEdge     | Gather            | concat | ApplyVertex |
//! |-----------|-----------|---------------|-------------------|--------|-------------|
//! | gcn       | -         | -             | sum(in-edges)     | no     | MLP         |
//! | gat       | src,dst   | MLP (score)   | attention(in)     | no     | MLP         |
//! | ggnn      | src,dst   | MLP           | sum(in-edges)     | yes    | GRU         |
//! | rgcn      | edge,src  | MLP per type  | sum(in-edges)     | yes    | sum         |
//! | graphsage | -         | -             | LSTM(in-edges)    | yes    | MLP         |
//!
//! GAT is the single-head form: its ApplyEdge emits one score per edge.
//! GGNN keeps one width throughout; input features are zero-padded to it.
//! [`ModelOptions::ggnn_all_edges`] widens its sum to in- and out-edges.
//! R-GCN's edge input at layer 0 is a learned per-relation embedding of the
//! input width, and its sum ApplyVertex adds a projected self term.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cells::{Activation, GruParams, LstmParams, MlpParams};
use crate::engine::{
    run_model, ApplyEdgeOp, ApplyVertexOp, EdgeNorm, EdgeParams, Fusion, GatherOp, LayerParams,
    LayerState, ModelParams, ModelSpec, VertexParams,
};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};
use crate::profile::{Profiler, Stage};
use crate::tensor::{Matrix, ScatterMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelName {
    Gcn,
    Gat,
    Ggnn,
    Rgcn,
    GraphSage,
}

impl ModelName {
    pub const ALL: [ModelName; 5] = [
        ModelName::Gcn,
        ModelName::Gat,
        ModelName::Ggnn,
        ModelName::Rgcn,
        ModelName::GraphSage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelName::Gcn => "gcn",
            ModelName::Gat => "gat",
            ModelName::Ggnn => "ggnn",
            ModelName::Rgcn => "rgcn",
            ModelName::GraphSage => "graphsage",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        ModelName::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Unknown {
                kind: "model",
                name: s.to_string(),
            })
    }
}

/// What the GGNN GRU receives as its input vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum GruInput {
    /// `[gathered ∥ vertex]`, with the vertex embedding also the GRU state.
    #[default]
    Concat,
    /// The gathered vector alone.
    Gather,
}

impl FromStr for GruInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "concat" => Ok(GruInput::Concat),
            "gather" => Ok(GruInput::Gather),
            other => Err(Error::Unknown {
                kind: "GRU input",
                name: other.to_string(),
            }),
        }
    }
}

/// Variant switches that leave the stage composition recognisable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModelOptions {
    /// GCN only: symmetric degree normalization on the sum.
    pub gcn_norm: bool,
    /// GGNN only.
    pub ggnn_gru_input: GruInput,
    /// GGNN only: sum over in- and out-edges instead of in-edges.
    pub ggnn_all_edges: bool,
}

/// A built model: its stage spec plus parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelCard {
    pub name: ModelName,
    pub spec: ModelSpec,
    pub params: ModelParams,
    pub seed: u64,
    pub num_etypes: usize,
}

/// Layer widths `[in, hidden, …, hidden, out]`.
fn layer_dims(in_dim: usize, hidden: usize, out: usize, layers: usize) -> Vec<usize> {
    (0..=layers)
        .map(|l| match l {
            0 => in_dim,
            l if l == layers => out,
            _ => hidden,
        })
        .collect()
}

fn output_activation(layer: usize, layers: usize) -> Activation {
    if layer + 1 == layers {
        Activation::None
    } else {
        Activation::Relu
    }
}

/// [`build_model_with`] under default options.
pub fn build_model(
    name: ModelName,
    in_dim: usize,
    hidden_dim: usize,
    out_dim: usize,
    num_layers: usize,
    num_etypes: usize,
    seed: u64,
) -> Result<ModelCard> {
    build_model_with(
        name,
        in_dim,
        hidden_dim,
        out_dim,
        num_layers,
        num_etypes,
        seed,
        ModelOptions::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn build_model_with(
    name: ModelName,
    in_dim: usize,
    hidden_dim: usize,
    out_dim: usize,
    num_layers: usize,
    num_etypes: usize,
    seed: u64,
    options: ModelOptions,
) -> Result<ModelCard> {
    if in_dim == 0 || hidden_dim == 0 || out_dim == 0 {
        return Err(Error::InvalidParameter("model widths must be >= 1".into()));
    }
    if name == ModelName::Rgcn && num_etypes == 0 {
        return Err(Error::InvalidParameter(
            "rgcn needs at least one edge type".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plain = |gather, apply_vertex, dims| ModelSpec {
        scatter: ScatterMode::None,
        apply_edge: ApplyEdgeOp::None,
        gather,
        concat_vertex: false,
        apply_vertex,
        num_layers,
        dims,
        fusion: Fusion::On,
        gather_edges: EdgeSet::In,
        norm: EdgeNorm::None,
    };
    let mut edge_type_embedding = None;
    let (spec, layers) = match name {
        ModelName::Gcn => {
            let mut spec = plain(
                GatherOp::Sum,
                ApplyVertexOp::Mlp,
                layer_dims(in_dim, hidden_dim, out_dim, num_layers),
            );
            if options.gcn_norm {
                spec.norm = EdgeNorm::Symmetric;
            }
            let mut layers = Vec::with_capacity(num_layers);
            for l in 0..num_layers {
                let (d, d2) = spec.layer_dims(l);
                layers.push(LayerParams {
                    apply_edge: None,
                    gather_lstm: None,
                    apply_vertex: VertexParams::Mlp(MlpParams::random(
                        &[d, d2],
                        output_activation(l, num_layers),
                        &mut rng,
                    )?),
                });
            }
            (spec, layers)
        }
        ModelName::Gat => {
            let spec = ModelSpec {
                scatter: ScatterMode::SrcDst,
                apply_edge: ApplyEdgeOp::Mlp,
                ..plain(
                    GatherOp::Attention,
                    ApplyVertexOp::Mlp,
                    layer_dims(in_dim, hidden_dim, out_dim, num_layers),
                )
            };
            let mut layers = Vec::with_capacity(num_layers);
            for l in 0..num_layers {
                let (d, d2) = spec.layer_dims(l);
                let score = MlpParams::random(&[2 * d, 1], Activation::None, &mut rng)?;
                let vertex =
                    MlpParams::random(&[d, d2], output_activation(l, num_layers), &mut rng)?;
                layers.push(LayerParams {
                    apply_edge: Some(EdgeParams::Mlp(score)),
                    gather_lstm: None,
                    apply_vertex: VertexParams::Mlp(vertex),
                });
            }
            (spec, layers)
        }
        ModelName::Ggnn => {
            let width = in_dim.max(hidden_dim);
            let concat = options.ggnn_gru_input == GruInput::Concat;
            let spec = ModelSpec {
                scatter: ScatterMode::SrcDst,
                apply_edge: ApplyEdgeOp::Mlp,
                concat_vertex: concat,
                gather_edges: if options.ggnn_all_edges {
                    EdgeSet::All
                } else {
                    EdgeSet::In
                },
                ..plain(
                    GatherOp::Sum,
                    ApplyVertexOp::Gru,
                    vec![width; num_layers + 1],
                )
            };
            let gru_in = if concat { 2 * width } else { width };
            let mut layers = Vec::with_capacity(num_layers);
            for _ in 0..num_layers {
                let msg = MlpParams::random(&[2 * width, width], Activation::Relu, &mut rng)?;
                let gru = GruParams::random(gru_in, width, &mut rng);
                layers.push(LayerParams {
                    apply_edge: Some(EdgeParams::Mlp(msg)),
                    gather_lstm: None,
                    apply_vertex: VertexParams::Gru(gru),
                });
            }
            (spec, layers)
        }
        ModelName::Rgcn => {
            let spec = ModelSpec {
                scatter: ScatterMode::EdgePlusSrc,
                apply_edge: ApplyEdgeOp::MlpPerType,
                concat_vertex: true,
                ..plain(
                    GatherOp::Sum,
                    ApplyVertexOp::Sum,
                    layer_dims(in_dim, hidden_dim, out_dim, num_layers),
                )
            };
            edge_type_embedding = Some(Matrix::random_uniform(num_etypes, in_dim, 1.0, &mut rng));
            let mut layers = Vec::with_capacity(num_layers);
            for l in 0..num_layers {
                let (d, d2) = spec.layer_dims(l);
                let act = output_activation(l, num_layers);
                let per_type = (0..num_etypes)
                    .map(|_| MlpParams::random(&[2 * d, d2], act, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let self_weight =
                    Matrix::random_uniform(d, d2, crate::cells::init_bound(d), &mut rng);
                layers.push(LayerParams {
                    apply_edge: Some(EdgeParams::PerType(per_type)),
                    gather_lstm: None,
                    apply_vertex: VertexParams::Sum {
                        self_weight: Some(self_weight),
                    },
                });
            }
            (spec, layers)
        }
        ModelName::GraphSage => {
            let spec = ModelSpec {
                concat_vertex: true,
                fusion: Fusion::Off,
                ..plain(
                    GatherOp::Lstm,
                    ApplyVertexOp::Mlp,
                    layer_dims(in_dim, hidden_dim, out_dim, num_layers),
                )
            };
            let mut layers = Vec::with_capacity(num_layers);
            for l in 0..num_layers {
                let (d, d2) = spec.layer_dims(l);
                let lstm = LstmParams::random(d, d, &mut rng);
                let vertex =
                    MlpParams::random(&[2 * d, d2], output_activation(l, num_layers), &mut rng)?;
                layers.push(LayerParams {
                    apply_edge: None,
                    gather_lstm: Some(lstm),
                    apply_vertex: VertexParams::Mlp(vertex),
                });
            }
            (spec, layers)
        }
    };
    spec.validate()?;
    Ok(ModelCard {
        name,
        spec,
        params: ModelParams {
            layers,
            edge_type_embedding,
        },
        seed,
        num_etypes,
    })
}

impl ModelCard {
    /// Same card with the Gather path switched; fails for LSTM gathers.
    pub fn with_fusion(mut self, fusion: Fusion) -> Result<Self> {
        self.spec.fusion = fusion;
        self.spec.validate()?;
        Ok(self)
    }

    pub fn in_dim(&self) -> usize {
        self.spec.dims[0]
    }

    /// Zero-pads narrower feature matrices up to the model's input width.
    pub fn prepare_features(&self, features: &Matrix) -> Result<Matrix> {
        let want = self.in_dim();
        if features.dim() == want {
            Ok(features.clone())
        } else if self.name == ModelName::Ggnn && features.dim() < want {
            features.pad_cols(want)
        } else {
            Err(Error::shape(
                "model features",
                format!("width {want}"),
                features.dim(),
            ))
        }
    }

    pub fn run(&self, g: &Graph, features: &Matrix, profiler: &mut Profiler) -> Result<LayerState> {
        let x = self.prepare_features(features)?;
        run_model(g, &x, &self.spec, &self.params, profiler)
    }
}

/// Closed-form FLOPs per stage, summed over layers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageFlops {
    pub scatter: u64,
    pub apply_edge: u64,
    pub gather: u64,
    pub apply_vertex: u64,
}

impl StageFlops {
    pub fn get(&self, stage: Stage) -> u64 {
        match stage {
            Stage::Scatter => self.scatter,
            Stage::ApplyEdge => self.apply_edge,
            Stage::Gather => self.gather,
            Stage::ApplyVertex => self.apply_vertex,
        }
    }

    pub fn total(&self) -> u64 {
        self.scatter + self.apply_edge + self.gather + self.apply_vertex
    }
}

/// FLOPs of `card` on `g` from widths and graph counts alone.
///
/// Products count `2·m·k·n`, fused sparse sums `2·nnz·k`, non-fused sums
/// `nnz·k`, per-edge scaling `E·k`, softmax `4·E`, one LSTM step over `b`
/// rows `8·b·h·(k+h)`, and a GRU over `V` rows `6·V·h·(i+h)`.
pub fn analytic_flops(card: &ModelCard, g: &Graph) -> StageFlops {
    let e = g.num_edges() as u64;
    let v = g.num_vertices() as u64;
    let fused = card.spec.fusion.is_on();
    let sum_flops = |nnz: u64, k: u64| if fused { 2 * nnz * k } else { nnz * k };
    let mut f = StageFlops::default();
    for l in 0..card.spec.num_layers {
        let d = card.spec.dims[l] as u64;
        let d2 = card.spec.dims[l + 1] as u64;
        match card.name {
            ModelName::Gcn => {
                f.gather += sum_flops(e, d);
                if card.spec.norm == EdgeNorm::Symmetric && !fused {
                    f.gather += e * d;
                }
                f.apply_vertex += 2 * v * d * d2;
            }
            ModelName::Gat => {
                f.apply_edge += 2 * e * (2 * d);
                f.gather += 4 * e + sum_flops(e, d) + if fused { 0 } else { e * d };
                f.apply_vertex += 2 * v * d * d2;
            }
            ModelName::Ggnn => {
                f.apply_edge += 2 * e * (2 * d) * d;
                let summed = if card.spec.gather_edges == EdgeSet::All {
                    2 * e
                } else {
                    e
                };
                f.gather += sum_flops(summed, d);
                let i = if card.spec.concat_vertex { 2 * d } else { d };
                f.apply_vertex += 6 * v * d * (i + d);
            }
            ModelName::Rgcn => {
                f.apply_edge += 2 * e * (2 * d) * d2;
                f.gather += sum_flops(e, d2);
                f.apply_vertex += 2 * v * d * d2 + v * d2;
            }
            ModelName::GraphSage => {
                f.gather += 8 * e * d * (2 * d);
                f.apply_vertex += 2 * v * (2 * d) * d2;
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_uniform, random_edge_types, Edge};

    #[test]
    fn parse_names() {
        assert_eq!(
            "GraphSAGE".parse::<ModelName>().unwrap(),
            ModelName::GraphSage
        );
        assert_eq!("r-gcn".parse::<ModelName>().unwrap(), ModelName::Rgcn);
        assert!("gin".parse::<ModelName>().is_err());
    }

    #[test]
    fn graphsage_refuses_fusion() {
        let card = build_model(ModelName::GraphSage, 4, 4, 4, 1, 1, 0).unwrap();
        assert_eq!(card.spec.fusion, Fusion::Off);
        let err = card.with_fusion(Fusion::On).unwrap_err();
        assert!(err.to_string().contains("LSTM gather cannot be fused"));
    }

    #[test]
    fn rgcn_needs_types() {
        assert!(build_model(ModelName::Rgcn, 4, 4, 4, 1, 0, 0).is_err());
        assert!(build_model(ModelName::Gcn, 0, 4, 4, 1, 1, 0).is_err());
    }

    #[test]
    fn gcn_on_empty_graph_counts_apply_vertex_only() {
        let card = build_model(ModelName::Gcn, 8, 16, 4, 2, 1, 1).unwrap();
        let f = analytic_flops(&card, &Graph::empty(10));
        assert_eq!(f.gather, 0);
        assert_eq!(f.apply_vertex, 2 * 10 * (8 * 16 + 16 * 4));
    }

    #[test]
    fn analytic_matches_profiler_for_every_model() {
        let g = gen_uniform(40, 150, 5).unwrap();
        let g = random_edge_types(&g, 3, 6).unwrap();
        let x = Matrix::random_uniform(40, 6, 1.0, &mut ChaCha8Rng::seed_from_u64(2));
        for name in ModelName::ALL {
            for fusion in [Fusion::On, Fusion::Off] {
                let Ok(card) =
                    build_model(name, 6, 8, 5, 2, 3, 9).and_then(|c| c.with_fusion(fusion))
                else {
                    continue;
                };
                let mut prof = Profiler::new();
                card.run(&g, &x, &mut prof).unwrap();
                let measured = prof.into_profile(name.name(), "t");
                let analytic = analytic_flops(&card, &g);
                for stage in Stage::ALL {
                    let m: u64 = measured.stage_records(stage).map(|r| r.flops).sum();
                    assert_eq!(m, analytic.get(stage), "{name} {fusion} {stage}");
                }
            }
        }
    }

    #[test]
    fn gcn_is_cheapest() {
        let g =
            Graph::from_edges(vec![Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 0)], 3).unwrap();
        let gcn =
            analytic_flops(&build_model(ModelName::Gcn, 4, 4, 4, 2, 1, 0).unwrap(), &g).total();
        for name in &ModelName::ALL[1..] {
            let other = analytic_flops(&build_model(*name, 4, 4, 4, 2, 1, 0).unwrap(), &g).total();
            assert!(gcn < other, "{name}");
        }
    }

    #[test]
    fn ggnn_pads_features() {
        let card = build_model(ModelName::Ggnn, 3, 8, 8, 1, 1, 0).unwrap();
        let x = card.prepare_features(&Matrix::filled(2, 3, 1.0)).unwrap();
        assert_eq!(x.row(0), &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let gcn = build_model(ModelName::Gcn, 3, 8, 8, 1, 1, 0).unwrap();
        assert!(gcn.prepare_features(&Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn seeding_is_deterministic() {
        for name in ModelName::ALL {
            let a = build_model(name, 5, 6, 3, 2, 2, 11).unwrap();
            let b = build_model(name, 5, 6, 3, 2, 2, 11).unwrap();
            assert_eq!(a, b);
        }
    }
}
