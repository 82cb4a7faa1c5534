//! The layer executor.
//!
//! A layer runs the stages present in its [`ModelSpec`] in the fixed order
//! Scatter → ApplyEdge → Gather → ApplyVertex and records one
//! [`ProfileRecord`] per executed stage. Gather has two interchangeable
//! paths for sum-like reductions:
//!
//! * fused: one sparse × dense product between a vertex-by-edge (or
//!   vertex-by-vertex) matrix and the embedding matrix, with no per-edge
//!   intermediate;
//! * non-fused: per-edge messages are materialized with an index select and
//!   then reduced segment by segment.
//!
//! Both paths sum each vertex's contributions in ascending edge-id order.
//! LSTM reductions have no fused form and run by degree traversal: vertices
//! sharing an in-degree are folded together in one batched call.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::cells::{gru_cell, lstm_fold_steps, mlp_forward, GruParams, LstmParams, MlpParams};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};
use crate::profile::{bytes_model, KernelClass, OpShape, ProfileRecord, Profiler, Stage};
use crate::tensor::{
    gemm_flops, index_select_concat, index_select_rows, linear, scale_rows, segment_reduce_by,
    segment_softmax, spmm, spmm_max, CsrMatrix, Matrix, Reduce, ScatterMode,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ApplyEdgeOp {
    #[default]
    None,
    /// One MLP over all edge rows.
    Mlp,
    /// One MLP per relation type, each applied to that type's edges.
    MlpPerType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GatherOp {
    Sum,
    Mean,
    Max,
    /// Softmax over in-edge scores, then a weighted sum of source embeddings.
    Attention,
    /// LSTM over each vertex's in-edges taken as a sequence.
    Lstm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ApplyVertexOp {
    Mlp,
    Gru,
    /// Reduced embedding plus the vertex's own (optionally projected) embedding.
    Sum,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Fusion {
    #[default]
    On,
    Off,
}

impl Fusion {
    pub fn is_on(self) -> bool {
        self == Fusion::On
    }
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_on() { "on" } else { "off" })
    }
}

impl FromStr for Fusion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "on" | "true" | "1" => Ok(Fusion::On),
            "off" | "false" | "0" => Ok(Fusion::Off),
            other => Err(Error::Unknown {
                kind: "fusion setting",
                name: other.to_string(),
            }),
        }
    }
}

/// Per-edge weighting applied inside a sum Gather.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EdgeNorm {
    #[default]
    None,
    /// `1/√(out_deg(src) · in_deg(dst))`
    Symmetric,
}

/// Stage composition of a model plus its layer widths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub scatter: ScatterMode,
    pub apply_edge: ApplyEdgeOp,
    pub gather: GatherOp,
    /// Append the vertex's current embedding to the reduced vector.
    pub concat_vertex: bool,
    pub apply_vertex: ApplyVertexOp,
    pub num_layers: usize,
    /// `dims[l]` is the vertex width entering layer `l`; `num_layers + 1` entries.
    pub dims: Vec<usize>,
    pub fusion: Fusion,
    /// Edges each vertex reduces over.
    pub gather_edges: EdgeSet,
    pub norm: EdgeNorm,
}

impl ModelSpec {
    /// Reject stage combinations the engine cannot execute.
    pub fn validate(&self) -> Result<()> {
        if self.dims.len() != self.num_layers + 1 {
            return Err(Error::Config(format!(
                "{} layers need {} widths, got {}",
                self.num_layers,
                self.num_layers + 1,
                self.dims.len()
            )));
        }
        if self.dims.contains(&0) {
            return Err(Error::Config("layer widths must be >= 1".into()));
        }
        if (self.scatter == ScatterMode::None) != (self.apply_edge == ApplyEdgeOp::None) {
            return Err(Error::Config(
                "Scatter and ApplyEdge must be both present or both absent".into(),
            ));
        }
        match self.gather {
            GatherOp::Lstm if self.fusion.is_on() => {
                return Err(Error::Config("LSTM gather cannot be fused".into()));
            }
            GatherOp::Attention if self.apply_edge == ApplyEdgeOp::None => {
                return Err(Error::Config(
                    "attention gather needs an ApplyEdge stage producing scores".into(),
                ));
            }
            GatherOp::Lstm | GatherOp::Attention if self.gather_edges != EdgeSet::In => {
                return Err(Error::Config(format!(
                    "{:?} gather only reduces over in-edges",
                    self.gather
                )));
            }
            _ => {}
        }
        if self.norm == EdgeNorm::Symmetric
            && (self.gather != GatherOp::Sum || self.gather_edges != EdgeSet::In)
        {
            return Err(Error::Config(
                "symmetric normalization applies to in-edge sum gathers only".into(),
            ));
        }
        if self.apply_vertex == ApplyVertexOp::Gru && self.dims.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Config(
                "GRU ApplyVertex keeps the vertex width; all layer widths must match".into(),
            ));
        }
        Ok(())
    }

    pub fn layer_dims(&self, layer: usize) -> (usize, usize) {
        (self.dims[layer], self.dims[layer + 1])
    }
}

/// ApplyEdge parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeParams {
    Mlp(MlpParams),
    /// Indexed by relation id.
    PerType(Vec<MlpParams>),
}

/// ApplyVertex parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum VertexParams {
    Mlp(MlpParams),
    Gru(GruParams),
    /// `self_weight` projects the vertex's own embedding before the sum; if
    /// absent the embedding is added unchanged.
    Sum {
        self_weight: Option<Matrix>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub apply_edge: Option<EdgeParams>,
    pub gather_lstm: Option<LstmParams>,
    pub apply_vertex: VertexParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<LayerParams>,
    /// One row per relation type; seeds the first layer's edge embeddings
    /// for Scatter modes that read them.
    pub edge_type_embedding: Option<Matrix>,
}

/// Embeddings entering (or leaving) a layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerState {
    pub vertex_emb: Matrix,
    pub edge_emb: Option<Matrix>,
}

impl LayerState {
    pub fn new(vertex_emb: Matrix) -> Self {
        Self {
            vertex_emb,
            edge_emb: None,
        }
    }
}

/// Analytical counters of one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageCost {
    pub flops: u64,
    pub bytes_moved: u64,
    pub invocations: u64,
    pub kernel_class: KernelClass,
}

impl StageCost {
    fn new(kernel_class: KernelClass) -> Self {
        Self {
            flops: 0,
            bytes_moved: 0,
            invocations: 0,
            kernel_class,
        }
    }

    fn kernel(&mut self, flops: u64, traffic: OpShape) {
        self.flops += flops;
        self.bytes_moved += bytes_model(traffic);
        self.invocations += 1;
    }
}

fn dense_class(out_dim: usize) -> KernelClass {
    if out_dim == 1 {
        KernelClass::Gemv
    } else {
        KernelClass::Gemm
    }
}

fn mlp_traffic(p: &MlpParams, rows: usize) -> u64 {
    p.layers()
        .iter()
        .map(|l| {
            bytes_model(OpShape::Gemm {
                m: rows,
                k: l.in_dim(),
                n: l.out_dim(),
                bias: true,
            })
        })
        .sum()
}

fn check_rows(op: &'static str, m: &Matrix, want: usize) -> Result<()> {
    if m.rows() != want {
        return Err(Error::shape(op, format!("{want} rows"), m.rows()));
    }
    Ok(())
}

/// Scatter: assemble one row per edge. Pure data movement, so no FLOPs.
pub fn run_scatter(
    g: &Graph,
    state: &LayerState,
    mode: ScatterMode,
) -> Result<(Matrix, StageCost)> {
    if mode == ScatterMode::None {
        return Err(Error::Config(
            "run_scatter called without a scatter mode".into(),
        ));
    }
    let out = index_select_concat(g, mode, &state.vertex_emb, state.edge_emb.as_ref())?;
    let edge_dim = state.edge_emb.as_ref().map_or(0, Matrix::dim);
    let gathered = g.num_edges()
        * (mode.vertex_reads() * state.vertex_emb.dim()
            + if mode.needs_edge_input() { edge_dim } else { 0 });
    let mut cost = StageCost::new(KernelClass::IndexSelection);
    cost.kernel(
        0,
        OpShape::IndexSelect {
            gathered,
            written: out.len(),
        },
    );
    Ok((out, cost))
}

/// ApplyEdge: transform every edge row.
pub fn run_apply_edge(
    g: &Graph,
    edge_in: &Matrix,
    op: ApplyEdgeOp,
    params: &EdgeParams,
) -> Result<(Matrix, StageCost)> {
    check_rows("run_apply_edge", edge_in, g.num_edges())?;
    match (op, params) {
        (ApplyEdgeOp::Mlp, EdgeParams::Mlp(p)) => {
            let out = mlp_forward(edge_in, p)?;
            let mut cost = StageCost::new(dense_class(p.out_dim()));
            cost.flops = p.flops(edge_in.rows());
            cost.bytes_moved = mlp_traffic(p, edge_in.rows());
            cost.invocations = 1;
            Ok((out, cost))
        }
        (ApplyEdgeOp::MlpPerType, EdgeParams::PerType(per_type)) => {
            let present = g.present_etypes();
            let out_dim = match present.first() {
                Some(&t) => per_type.get(t as usize).map_or(0, MlpParams::out_dim),
                None => per_type.first().map_or(0, MlpParams::out_dim),
            };
            let mut by_type: Vec<Vec<u32>> = vec![Vec::new(); g.num_etypes()];
            for (id, e) in g.edges().iter().enumerate() {
                by_type[e.etype as usize].push(id as u32);
            }
            let mut out = Matrix::zeros(g.num_edges(), out_dim);
            let mut cost = StageCost::new(dense_class(out_dim));
            for t in present {
                let p = per_type.get(t as usize).ok_or_else(|| {
                    Error::Config(format!("no ApplyEdge parameters for edge type {t}"))
                })?;
                if p.out_dim() != out_dim {
                    return Err(Error::shape(
                        "run_apply_edge per-type output",
                        out_dim,
                        p.out_dim(),
                    ));
                }
                let ids = &by_type[t as usize];
                let rows = index_select_rows(edge_in, ids)?;
                let y = mlp_forward(&rows, p)?;
                for (i, &id) in ids.iter().enumerate() {
                    out.row_mut(id as usize).copy_from_slice(y.row(i));
                }
                cost.flops += p.flops(ids.len());
                cost.bytes_moved += mlp_traffic(p, ids.len())
                    + bytes_model(OpShape::IndexSelect {
                        gathered: rows.len() + y.len(),
                        written: rows.len() + y.len(),
                    });
                cost.invocations += 1;
            }
            Ok((out, cost))
        }
        (ApplyEdgeOp::None, _) => Err(Error::Config(
            "run_apply_edge called without an ApplyEdge op".into(),
        )),
        (op, _) => Err(Error::Config(format!(
            "ApplyEdge {op:?} given mismatched parameters"
        ))),
    }
}

/// Where Gather finds the per-edge values it reduces.
#[derive(Clone, Copy)]
enum Messages<'a> {
    /// Row `e` of an edge matrix.
    Edge(&'a Matrix),
    /// Row `src(e)` of a vertex matrix.
    Source(&'a Matrix),
}

impl Messages<'_> {
    fn dim(&self) -> usize {
        match self {
            Messages::Edge(m) | Messages::Source(m) => m.dim(),
        }
    }
}

fn symmetric_weights(g: &Graph) -> Vec<f32> {
    let ind = g.in_degrees();
    let outd = g.out_degrees();
    g.edges()
        .iter()
        .map(|e| 1.0 / ((outd[e.src as usize] * ind[e.dst as usize]) as f32).sqrt())
        .collect()
}

/// Sum/mean/max reduction of `messages` over the edge set, fused or not.
fn reduce_messages(
    g: &Graph,
    messages: Messages<'_>,
    set: EdgeSet,
    op: Reduce,
    edge_weight: Option<&[f32]>,
    fusion: Fusion,
    cost: &mut StageCost,
) -> Result<Matrix> {
    let index = g.edge_index(set);
    let k = messages.dim();
    let nnz = index.nnz();
    let v = g.num_vertices();
    if let Messages::Edge(m) = messages {
        check_rows("gather edge messages", m, g.num_edges())?;
    }
    if fusion.is_on() {
        cost.kernel_class = KernelClass::SparseGemm;
        let dense = match messages {
            Messages::Edge(m) | Messages::Source(m) => m,
        };
        let built;
        let s: &CsrMatrix = match (messages, set, op, edge_weight) {
            (Messages::Edge(_), _, Reduce::Sum | Reduce::Max, None) => g.unit_incidence(set),
            (Messages::Source(_), EdgeSet::In, Reduce::Sum | Reduce::Max, None) => {
                g.unit_adjacency_in()
            }
            _ => {
                let cols: Vec<u32> = match messages {
                    Messages::Edge(_) => index.edge_ids().to_vec(),
                    Messages::Source(_) => index
                        .edge_ids()
                        .iter()
                        .map(|&e| g.edge(e as usize).src)
                        .collect(),
                };
                let mut values = Vec::with_capacity(nnz);
                for row in 0..v {
                    let ids = index.row(row);
                    let mean = 1.0 / ids.len() as f32;
                    values.extend(ids.iter().map(|&e| match op {
                        Reduce::Mean => mean,
                        _ => edge_weight.map_or(1.0, |w| w[e as usize]),
                    }));
                }
                built =
                    CsrMatrix::from_parts(v, dense.rows(), index.row_ptr().to_vec(), cols, values)?;
                &built
            }
        };
        let (out, flops) = match op {
            Reduce::Max => (spmm_max(s, dense)?, nnz as u64 * k as u64),
            Reduce::Sum | Reduce::Mean => (spmm(s, dense)?, crate::tensor::spmm_flops(nnz, k)),
        };
        cost.kernel(
            flops,
            OpShape::Spmm {
                rows: v,
                cols: dense.rows(),
                nnz,
                k,
            },
        );
        return Ok(out);
    }

    cost.kernel_class = KernelClass::IndexSelection;
    let owned;
    let edge_rows: &Matrix = match messages {
        Messages::Edge(m) => m,
        Messages::Source(m) => {
            let srcs: Vec<u32> = g.edges().iter().map(|e| e.src).collect();
            owned = index_select_rows(m, &srcs)?;
            let n = owned.len();
            cost.kernel(
                0,
                OpShape::IndexSelect {
                    gathered: n,
                    written: n,
                },
            );
            &owned
        }
    };
    let scaled;
    let edge_rows = match edge_weight {
        Some(w) => {
            let mut m = edge_rows.clone();
            scale_rows(&mut m, w);
            let n = m.len();
            cost.kernel(
                n as u64,
                OpShape::Elementwise {
                    elems: n,
                    inputs: 2,
                },
            );
            scaled = m;
            &scaled
        }
        None => edge_rows,
    };
    let out = segment_reduce_by(edge_rows, &index, op)?;
    let mut flops = nnz as u64 * k as u64;
    if op == Reduce::Mean {
        let nonempty = (0..v).filter(|&r| index.degree(r) > 0).count();
        flops += nonempty as u64 * k as u64;
    }
    cost.kernel(
        flops,
        OpShape::SegmentReduce {
            in_rows: nnz,
            out_rows: v,
            k,
        },
    );
    Ok(out)
}

/// Degree traversal: one batched LSTM fold per distinct in-degree.
fn lstm_gather(
    g: &Graph,
    messages: Messages<'_>,
    p: &LstmParams,
    cost: &mut StageCost,
) -> Result<Matrix> {
    cost.kernel_class = KernelClass::CellStep;
    let k = messages.dim();
    if k != p.input_dim() {
        return Err(Error::shape(
            "lstm gather",
            format!("message width {}", p.input_dim()),
            k,
        ));
    }
    if let Messages::Edge(m) = messages {
        check_rows("gather edge messages", m, g.num_edges())?;
    }
    let h = p.hidden_dim();
    let mut out = Matrix::zeros(g.num_vertices(), h);
    let index = g.csr_in();
    for (degree, vertices) in g.degree_buckets().iter() {
        let b = vertices.len();
        let steps: Vec<Matrix> = (0..degree)
            .map(|t| {
                let mut step = Matrix::zeros(b, k);
                for (i, &vtx) in vertices.iter().enumerate() {
                    let e = index.row(vtx as usize)[t] as usize;
                    let src = match messages {
                        Messages::Edge(m) => m.row(e),
                        Messages::Source(m) => m.row(g.edge(e).src as usize),
                    };
                    step.row_mut(i).copy_from_slice(src);
                }
                step
            })
            .collect();
        let hb = lstm_fold_steps(&steps, p)?;
        for (i, &vtx) in vertices.iter().enumerate() {
            out.row_mut(vtx as usize).copy_from_slice(hb.row(i));
        }
        let per_step = 4
            * (bytes_model(OpShape::Gemm {
                m: b,
                k,
                n: h,
                bias: true,
            }) + bytes_model(OpShape::Gemm {
                m: b,
                k: h,
                n: h,
                bias: false,
            }));
        cost.flops += degree as u64 * p.step_flops(b);
        cost.bytes_moved += degree as u64 * per_step
            + bytes_model(OpShape::IndexSelect {
                gathered: degree * b * k,
                written: degree * b * k,
            });
        cost.invocations += 1;
    }
    Ok(out)
}

/// Gather: reduce each vertex's incident edge values into one row, then
/// optionally append the vertex's own embedding.
///
/// Without an ApplyEdge stage (`edge_out == None`) an edge contributes its
/// source vertex's embedding.
pub fn run_gather(
    g: &Graph,
    edge_out: Option<&Matrix>,
    state: &LayerState,
    spec: &ModelSpec,
    params: &LayerParams,
) -> Result<(Matrix, StageCost)> {
    check_rows(
        "run_gather vertex state",
        &state.vertex_emb,
        g.num_vertices(),
    )?;
    let mut cost = StageCost::new(KernelClass::SparseGemm);
    let vertex = &state.vertex_emb;
    let messages = match edge_out {
        Some(e) => Messages::Edge(e),
        None => Messages::Source(vertex),
    };
    let norm_weights = match spec.norm {
        EdgeNorm::Symmetric => Some(symmetric_weights(g)),
        EdgeNorm::None => None,
    };
    let reduced = match spec.gather {
        GatherOp::Sum | GatherOp::Mean | GatherOp::Max => {
            let op = match spec.gather {
                GatherOp::Sum => Reduce::Sum,
                GatherOp::Mean => Reduce::Mean,
                _ => Reduce::Max,
            };
            reduce_messages(
                g,
                messages,
                spec.gather_edges,
                op,
                norm_weights.as_deref(),
                spec.fusion,
                &mut cost,
            )?
        }
        GatherOp::Attention => {
            let scores = edge_out
                .ok_or_else(|| Error::Config("attention gather needs per-edge scores".into()))?;
            if scores.dim() != 1 {
                return Err(Error::Config(format!(
                    "attention gather needs width-1 edge scores, got width {}",
                    scores.dim()
                )));
            }
            let weights = segment_softmax(scores, g)?;
            let e = g.num_edges();
            cost.kernel(
                4 * e as u64,
                OpShape::Elementwise {
                    elems: e,
                    inputs: 1,
                },
            );
            reduce_messages(
                g,
                Messages::Source(vertex),
                EdgeSet::In,
                Reduce::Sum,
                Some(&weights),
                spec.fusion,
                &mut cost,
            )?
        }
        GatherOp::Lstm => {
            if spec.fusion.is_on() {
                return Err(Error::Config("LSTM gather cannot be fused".into()));
            }
            let p = params
                .gather_lstm
                .as_ref()
                .ok_or_else(|| Error::Config("LSTM gather without LSTM parameters".into()))?;
            lstm_gather(g, messages, p, &mut cost)?
        }
    };
    if !spec.concat_vertex {
        return Ok((reduced, cost));
    }
    let out = Matrix::hconcat(&[&reduced, vertex])?;
    cost.bytes_moved += bytes_model(OpShape::IndexSelect {
        gathered: out.len(),
        written: out.len(),
    });
    Ok((out, cost))
}

/// ApplyVertex: produce the next vertex embeddings.
pub fn run_apply_vertex(
    g: &Graph,
    gather_out: &Matrix,
    state: &LayerState,
    spec: &ModelSpec,
    params: &VertexParams,
) -> Result<(Matrix, StageCost)> {
    let v = g.num_vertices();
    check_rows("run_apply_vertex", gather_out, v)?;
    check_rows("run_apply_vertex state", &state.vertex_emb, v)?;
    match (spec.apply_vertex, params) {
        (ApplyVertexOp::Mlp, VertexParams::Mlp(p)) => {
            let out = mlp_forward(gather_out, p)?;
            let cost = StageCost {
                flops: p.flops(v),
                bytes_moved: mlp_traffic(p, v),
                invocations: 1,
                kernel_class: dense_class(p.out_dim()),
            };
            Ok((out, cost))
        }
        (ApplyVertexOp::Gru, VertexParams::Gru(p)) => {
            let out = gru_cell(&state.vertex_emb, gather_out, p)?;
            let (i, h) = (p.input_dim(), p.hidden_dim());
            let bytes = 3
                * (bytes_model(OpShape::Gemm {
                    m: v,
                    k: i,
                    n: h,
                    bias: true,
                }) + bytes_model(OpShape::Gemm {
                    m: v,
                    k: h,
                    n: h,
                    bias: false,
                }));
            let cost = StageCost {
                flops: p.flops(v),
                bytes_moved: bytes,
                invocations: 1,
                kernel_class: KernelClass::Gemm,
            };
            Ok((out, cost))
        }
        (ApplyVertexOp::Sum, VertexParams::Sum { self_weight }) => {
            let own = &state.vertex_emb;
            let reduced_dim = if spec.concat_vertex {
                gather_out.dim().checked_sub(own.dim()).ok_or_else(|| {
                    Error::shape(
                        "run_apply_vertex sum",
                        format!("gather width >= {}", own.dim()),
                        gather_out.dim(),
                    )
                })?
            } else {
                gather_out.dim()
            };
            let reduced = if spec.concat_vertex {
                gather_out.columns(0, reduced_dim)?
            } else {
                gather_out.clone()
            };
            let mut cost = StageCost::new(KernelClass::Gemv);
            let out = match self_weight {
                Some(w) => {
                    let projected = linear(own, w, None)?;
                    cost.kernel_class = KernelClass::Gemm;
                    cost.kernel(
                        gemm_flops(v, w.rows(), w.cols()),
                        OpShape::Gemm {
                            m: v,
                            k: w.rows(),
                            n: w.cols(),
                            bias: false,
                        },
                    );
                    reduced.add(&projected)?
                }
                None => reduced.add(own)?,
            };
            let n = out.len();
            cost.kernel(
                n as u64,
                OpShape::Elementwise {
                    elems: n,
                    inputs: 2,
                },
            );
            Ok((out, cost))
        }
        (op, _) => Err(Error::Config(format!(
            "ApplyVertex {op:?} given mismatched parameters"
        ))),
    }
}

fn timed<T>(f: impl FnOnce() -> Result<(T, StageCost)>) -> Result<(T, StageCost, u64)> {
    let start = Instant::now();
    let (out, cost) = f()?;
    Ok((out, cost, start.elapsed().as_nanos() as u64))
}

fn push(
    profiler: &mut Profiler,
    stage: Stage,
    layer: usize,
    cost: StageCost,
    wall_ns: u64,
    out: &Matrix,
) {
    profiler.record(ProfileRecord {
        stage,
        layer,
        wall_ns,
        flops: cost.flops,
        bytes_moved: cost.bytes_moved,
        invocations: cost.invocations,
        kernel_class: cost.kernel_class,
        out_bytes: out.nbytes(),
    });
}

/// Runs one layer, skipping the stages `spec` declares absent.
pub fn run_layer(
    g: &Graph,
    state: &LayerState,
    spec: &ModelSpec,
    params: &LayerParams,
    layer: usize,
    profiler: &mut Profiler,
) -> Result<LayerState> {
    let mut edge_out = None;
    if spec.scatter != ScatterMode::None {
        let (scattered, cost, ns) = timed(|| run_scatter(g, state, spec.scatter))?;
        push(profiler, Stage::Scatter, layer, cost, ns, &scattered);
        let edge_params = params
            .apply_edge
            .as_ref()
            .ok_or_else(|| Error::Config(format!("layer {layer}: ApplyEdge parameters missing")))?;
        let (out, cost, ns) =
            timed(|| run_apply_edge(g, &scattered, spec.apply_edge, edge_params))?;
        push(profiler, Stage::ApplyEdge, layer, cost, ns, &out);
        edge_out = Some(out);
    }
    let (gathered, cost, ns) = timed(|| run_gather(g, edge_out.as_ref(), state, spec, params))?;
    push(profiler, Stage::Gather, layer, cost, ns, &gathered);
    let (vertex, cost, ns) =
        timed(|| run_apply_vertex(g, &gathered, state, spec, &params.apply_vertex))?;
    push(profiler, Stage::ApplyVertex, layer, cost, ns, &vertex);
    Ok(LayerState {
        vertex_emb: vertex,
        edge_emb: edge_out.or_else(|| state.edge_emb.clone()),
    })
}

/// Initial edge embeddings: each edge takes its relation's row.
pub fn edge_embeddings_from_types(g: &Graph, table: &Matrix) -> Result<Matrix> {
    if table.rows() < g.num_etypes() {
        return Err(Error::shape(
            "edge type embedding",
            format!(">= {} rows", g.num_etypes()),
            table.rows(),
        ));
    }
    let types: Vec<u32> = g.edges().iter().map(|e| e.etype).collect();
    index_select_rows(table, &types)
}

/// Runs `spec.num_layers` layers in sequence starting from `features`.
pub fn run_model(
    g: &Graph,
    features: &Matrix,
    spec: &ModelSpec,
    params: &ModelParams,
    profiler: &mut Profiler,
) -> Result<LayerState> {
    spec.validate()?;
    check_rows("run_model features", features, g.num_vertices())?;
    if features.dim() != spec.dims[0] {
        return Err(Error::shape(
            "run_model features",
            format!("width {}", spec.dims[0]),
            features.dim(),
        ));
    }
    if params.layers.len() != spec.num_layers {
        return Err(Error::Config(format!(
            "{} layers declared, parameters for {}",
            spec.num_layers,
            params.layers.len()
        )));
    }
    let mut state = LayerState::new(features.clone());
    if spec.num_layers > 0 && spec.scatter.needs_edge_input() {
        let table = params.edge_type_embedding.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "scatter mode {:?} needs edge-type embeddings",
                spec.scatter
            ))
        })?;
        state.edge_emb = Some(edge_embeddings_from_types(g, table)?);
    }
    for (layer, lp) in params.layers.iter().enumerate() {
        state = run_layer(g, &state, spec, lp, layer, profiler)?;
    }
    Ok(state)
}
