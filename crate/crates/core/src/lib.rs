//! Inference engine for graph neural networks expressed as four stages per
//! layer: Scatter, ApplyEdge, Gather and ApplyVertex.

pub mod accel;
pub mod cells;
pub mod data;
pub mod engine;
pub mod error;
pub mod graph;
pub mod models;
pub mod params;
pub mod profile;
pub mod tensor;

pub use accel::{compare, project, DeviceModel, Projection};
pub use cells::{Activation, GruParams, LstmParams, MlpParams};
pub use data::{builtin_meta, DatasetMeta, SyntheticSource};
pub use engine::{
    ApplyEdgeOp, ApplyVertexOp, EdgeNorm, Fusion, GatherOp, LayerParams, LayerState, ModelParams,
    ModelSpec,
};
pub use error::{Error, Result};
pub use graph::{DegreeBuckets, Edge, EdgeSet, Graph};
pub use models::{
    analytic_flops, build_model, build_model_with, ModelCard, ModelName, ModelOptions,
};
pub use profile::{KernelClass, Profile, ProfileRecord, Profiler, Stage};
pub use tensor::{EmbeddingMatrix, Matrix, ScatterMode};
