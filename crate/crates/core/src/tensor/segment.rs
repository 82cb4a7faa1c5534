use rayon::prelude::*;

use super::{Matrix, PAR_MIN_ROWS};
use crate::error::{Error, Result};
use crate::graph::{CsrIndex, Graph};

/// How Scatter assembles one row per edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ScatterMode {
    /// No Scatter stage.
    #[default]
    None,
    /// `[v[src] ∥ v[dst]]`
    SrcDst,
    /// `[e[id] ∥ v[src]]`
    EdgePlusSrc,
    /// `[v[src] ∥ v[dst] ∥ e[id]]`
    SrcDstEdge,
}

impl ScatterMode {
    pub fn needs_edge_input(self) -> bool {
        matches!(self, ScatterMode::EdgePlusSrc | ScatterMode::SrcDstEdge)
    }

    /// Width of the assembled edge rows.
    pub fn output_dim(self, vertex_dim: usize, edge_dim: usize) -> usize {
        match self {
            ScatterMode::None => 0,
            ScatterMode::SrcDst => 2 * vertex_dim,
            ScatterMode::EdgePlusSrc => edge_dim + vertex_dim,
            ScatterMode::SrcDstEdge => 2 * vertex_dim + edge_dim,
        }
    }

    /// Rows read from the vertex matrix per edge.
    pub(crate) fn vertex_reads(self) -> usize {
        match self {
            ScatterMode::None => 0,
            ScatterMode::EdgePlusSrc => 1,
            ScatterMode::SrcDst | ScatterMode::SrcDstEdge => 2,
        }
    }
}

/// Builds one output row per edge from endpoint (and optionally edge)
/// embeddings.
pub fn index_select_concat(
    g: &Graph,
    mode: ScatterMode,
    v: &Matrix,
    e: Option<&Matrix>,
) -> Result<Matrix> {
    if v.rows() != g.num_vertices() {
        return Err(Error::shape(
            "index_select_concat",
            format!("{} vertex rows", g.num_vertices()),
            v.rows(),
        ));
    }
    let edge_in = if mode.needs_edge_input() {
        let e = e.ok_or_else(|| {
            Error::Config(format!(
                "scatter mode {mode:?} requires an edge embedding matrix"
            ))
        })?;
        if e.rows() != g.num_edges() {
            return Err(Error::shape(
                "index_select_concat",
                format!("{} edge rows", g.num_edges()),
                e.rows(),
            ));
        }
        Some(e)
    } else {
        None
    };
    if mode == ScatterMode::None {
        return Err(Error::Config(
            "index_select_concat called with ScatterMode::None".into(),
        ));
    }
    let vd = v.dim();
    let ed = edge_in.map_or(0, Matrix::dim);
    let width = mode.output_dim(vd, ed);
    let mut out = Matrix::zeros(g.num_edges(), width);
    if width == 0 {
        return Ok(out);
    }
    let edges = g.edges();
    out.as_mut_slice()
        .par_chunks_mut(width)
        .with_min_len(PAR_MIN_ROWS)
        .enumerate()
        .for_each(|(id, row)| {
            let edge = edges[id];
            let src = v.row(edge.src as usize);
            let dst = v.row(edge.dst as usize);
            match mode {
                ScatterMode::SrcDst => {
                    row[..vd].copy_from_slice(src);
                    row[vd..].copy_from_slice(dst);
                }
                ScatterMode::EdgePlusSrc => {
                    row[..ed].copy_from_slice(edge_in.unwrap().row(id));
                    row[ed..].copy_from_slice(src);
                }
                ScatterMode::SrcDstEdge => {
                    row[..vd].copy_from_slice(src);
                    row[vd..2 * vd].copy_from_slice(dst);
                    row[2 * vd..].copy_from_slice(edge_in.unwrap().row(id));
                }
                ScatterMode::None => unreachable!(),
            }
        });
    Ok(out)
}

/// `out[i] = m[index[i]]`.
pub fn index_select_rows(m: &Matrix, index: &[u32]) -> Result<Matrix> {
    if let Some(&bad) = index.iter().find(|&&i| i as usize >= m.rows()) {
        return Err(Error::shape(
            "index_select_rows",
            format!("row < {}", m.rows()),
            bad,
        ));
    }
    let k = m.dim();
    let mut out = Matrix::zeros(index.len(), k);
    if k == 0 {
        return Ok(out);
    }
    out.as_mut_slice()
        .par_chunks_mut(k)
        .with_min_len(PAR_MIN_ROWS)
        .zip(index.par_iter())
        .for_each(|(row, &i)| row.copy_from_slice(m.row(i as usize)));
    Ok(out)
}

/// Multiply row `i` by `weights[i]` in place.
pub(crate) fn scale_rows(m: &mut Matrix, weights: &[f32]) {
    let k = m.dim();
    if k == 0 {
        return;
    }
    m.as_mut_slice()
        .par_chunks_mut(k)
        .with_min_len(PAR_MIN_ROWS)
        .zip(weights.par_iter())
        .for_each(|(row, &w)| row.iter_mut().for_each(|x| *x *= w));
}

/// Segment reduction operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduce {
    Sum,
    Mean,
    Max,
}

/// Reduces edge rows into vertex rows over in-edges. Vertices without
/// in-edges get a zero row for every operator.
pub fn segment_reduce(e: &Matrix, g: &Graph, op: Reduce) -> Result<Matrix> {
    segment_reduce_by(e, g.csr_in(), op)
}

/// [`segment_reduce`] over an arbitrary edge grouping.
pub fn segment_reduce_by(e: &Matrix, index: &CsrIndex, op: Reduce) -> Result<Matrix> {
    if let Some(&bad) = index.edge_ids().iter().find(|&&id| id as usize >= e.rows()) {
        return Err(Error::shape(
            "segment_reduce",
            format!("edge row < {}", e.rows()),
            bad,
        ));
    }
    let k = e.dim();
    let mut out = Matrix::zeros(index.num_rows(), k);
    if k == 0 {
        return Ok(out);
    }
    out.as_mut_slice()
        .par_chunks_mut(k)
        .with_min_len(PAR_MIN_ROWS)
        .enumerate()
        .for_each(|(v, orow)| {
            let ids = index.row(v);
            if ids.is_empty() {
                return;
            }
            match op {
                Reduce::Sum | Reduce::Mean => {
                    for &id in ids {
                        for (o, &x) in orow.iter_mut().zip(e.row(id as usize)) {
                            *o += x;
                        }
                    }
                    if op == Reduce::Mean {
                        let n = ids.len() as f32;
                        orow.iter_mut().for_each(|o| *o /= n);
                    }
                }
                Reduce::Max => {
                    orow.copy_from_slice(e.row(ids[0] as usize));
                    for &id in &ids[1..] {
                        for (o, &x) in orow.iter_mut().zip(e.row(id as usize)) {
                            *o = o.max(x);
                        }
                    }
                }
            }
        });
    Ok(out)
}

/// Softmax of per-edge scores within each destination segment.
///
/// Returns one weight per edge, indexed by edge id. Each segment is shifted
/// by its maximum before exponentiation.
pub fn segment_softmax(scores: &Matrix, g: &Graph) -> Result<Vec<f32>> {
    if scores.dim() != 1 || scores.rows() != g.num_edges() {
        return Err(Error::shape(
            "segment_softmax",
            format!("{}x1 scores", g.num_edges()),
            format!("{}x{}", scores.rows(), scores.dim()),
        ));
    }
    let s = scores.as_slice();
    let index = g.csr_in();
    let mut weights = vec![0.0f32; g.num_edges()];
    for v in 0..index.num_rows() {
        let ids = index.row(v);
        if ids.is_empty() {
            continue;
        }
        let max = ids
            .iter()
            .map(|&i| s[i as usize])
            .fold(f32::NEG_INFINITY, f32::max);
        let mut denom = 0.0f32;
        for &i in ids {
            let w = (s[i as usize] - max).exp();
            weights[i as usize] = w;
            denom += w;
        }
        for &i in ids {
            weights[i as usize] /= denom;
        }
    }
    Ok(weights)
}
