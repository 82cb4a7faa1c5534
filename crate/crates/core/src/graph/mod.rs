//! Directed multigraph topology with destination- and source-grouped CSR
//! indices, degree analysis and incidence-matrix construction.

mod generate;

pub use generate::{gen_powerlaw, gen_uniform, random_edge_types, PowerLawConfig};

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tensor::{CsrMatrix, IncidenceMatrix};

/// One directed edge with its relation type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    pub etype: u32,
}

impl Edge {
    pub const fn new(src: u32, dst: u32) -> Self {
        Self { src, dst, etype: 0 }
    }

    pub const fn typed(src: u32, dst: u32, etype: u32) -> Self {
        Self { src, dst, etype }
    }
}

/// Edge ids grouped by one endpoint. Row `v` lists the edges whose grouping
/// endpoint is `v`, in ascending edge-id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsrIndex {
    row_ptr: Vec<usize>,
    edge_ids: Vec<u32>,
}

impl CsrIndex {
    fn group_by(num_vertices: usize, edges: &[Edge], key: impl Fn(&Edge) -> u32) -> Self {
        let mut row_ptr = vec![0usize; num_vertices + 1];
        for e in edges {
            row_ptr[key(e) as usize + 1] += 1;
        }
        for v in 0..num_vertices {
            row_ptr[v + 1] += row_ptr[v];
        }
        let mut cursor = row_ptr.clone();
        let mut edge_ids = vec![0u32; edges.len()];
        // Visiting edges in id order keeps each row sorted.
        for (id, e) in edges.iter().enumerate() {
            let slot = &mut cursor[key(e) as usize];
            edge_ids[*slot] = id as u32;
            *slot += 1;
        }
        Self { row_ptr, edge_ids }
    }

    /// Row-wise merge of two indices over the same vertex set.
    fn merged(a: &CsrIndex, b: &CsrIndex) -> Self {
        let n = a.num_rows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut edge_ids = Vec::with_capacity(a.edge_ids.len() + b.edge_ids.len());
        row_ptr.push(0);
        for v in 0..n {
            let (x, y) = (a.row(v), b.row(v));
            let (mut i, mut j) = (0, 0);
            while i < x.len() || j < y.len() {
                if j == y.len() || (i < x.len() && x[i] <= y[j]) {
                    edge_ids.push(x[i]);
                    i += 1;
                } else {
                    edge_ids.push(y[j]);
                    j += 1;
                }
            }
            row_ptr.push(edge_ids.len());
        }
        Self { row_ptr, edge_ids }
    }

    pub fn num_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, v: usize) -> &[u32] {
        &self.edge_ids[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row_ptr[v + 1] - self.row_ptr[v]
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn edge_ids(&self) -> &[u32] {
        &self.edge_ids
    }

    pub fn nnz(&self) -> usize {
        self.edge_ids.len()
    }
}

/// Which incident edges a vertex reduces over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EdgeSet {
    /// Edges ending at the vertex.
    #[default]
    In,
    /// In-edges followed by out-edges, merged by edge id. A self-loop is
    /// listed twice.
    All,
}

/// Immutable directed multigraph.
#[derive(Clone, Debug)]
pub struct Graph {
    num_vertices: usize,
    num_etypes: usize,
    edges: Vec<Edge>,
    csr_in: CsrIndex,
    csr_out: CsrIndex,
    unit: UnitMatrices,
}

/// Unit-weight sparse matrices, built on first use.
#[derive(Clone, Debug, Default)]
struct UnitMatrices {
    adjacency_in: OnceLock<CsrMatrix>,
    incidence_in: OnceLock<CsrMatrix>,
    incidence_all: OnceLock<CsrMatrix>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.num_vertices == other.num_vertices
            && self.num_etypes == other.num_etypes
            && self.edges == other.edges
    }
}

impl Graph {
    /// Build from an edge list; the relation count is `max(etype) + 1` (at least 1).
    pub fn from_edges(edges: Vec<Edge>, num_vertices: usize) -> Result<Self> {
        let num_etypes = edges
            .iter()
            .map(|e| e.etype as usize + 1)
            .max()
            .unwrap_or(1);
        Self::with_etypes(edges, num_vertices, num_etypes)
    }

    /// Build with an explicit relation count.
    pub fn with_etypes(edges: Vec<Edge>, num_vertices: usize, num_etypes: usize) -> Result<Self> {
        if num_vertices > u32::MAX as usize || edges.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter(
                "graph exceeds 32-bit id space".into(),
            ));
        }
        let num_etypes = num_etypes.max(1);
        for (index, e) in edges.iter().enumerate() {
            if e.src as usize >= num_vertices
                || e.dst as usize >= num_vertices
                || e.etype as usize >= num_etypes
            {
                return Err(Error::EdgeOutOfRange {
                    index,
                    src: e.src,
                    dst: e.dst,
                    etype: e.etype,
                    num_vertices,
                    num_etypes,
                });
            }
        }
        let csr_in = CsrIndex::group_by(num_vertices, &edges, |e| e.dst);
        let csr_out = CsrIndex::group_by(num_vertices, &edges, |e| e.src);
        Ok(Self {
            num_vertices,
            num_etypes,
            edges,
            csr_in,
            csr_out,
            unit: UnitMatrices::default(),
        })
    }

    pub fn empty(num_vertices: usize) -> Self {
        Self::from_edges(Vec::new(), num_vertices).expect("empty graph is always valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_etypes(&self) -> usize {
        self.num_etypes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn csr_in(&self) -> &CsrIndex {
        &self.csr_in
    }

    pub fn csr_out(&self) -> &CsrIndex {
        &self.csr_out
    }

    pub fn edge_index(&self, set: EdgeSet) -> Cow<'_, CsrIndex> {
        match set {
            EdgeSet::In => Cow::Borrowed(&self.csr_in),
            EdgeSet::All => Cow::Owned(CsrIndex::merged(&self.csr_in, &self.csr_out)),
        }
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        (0..self.num_vertices)
            .map(|v| self.csr_in.degree(v))
            .collect()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.num_vertices)
            .map(|v| self.csr_out.degree(v))
            .collect()
    }

    /// Vertices with in-degree ≥ 1 grouped by that degree.
    pub fn degree_buckets(&self) -> DegreeBuckets {
        let mut buckets: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for v in 0..self.num_vertices {
            let d = self.csr_in.degree(v);
            if d > 0 {
                buckets.entry(d).or_default().push(v as u32);
            }
        }
        DegreeBuckets { buckets }
    }

    /// Relation types that occur on at least one edge, ascending.
    pub fn present_etypes(&self) -> Vec<u32> {
        let mut seen = vec![false; self.num_etypes];
        for e in &self.edges {
            seen[e.etype as usize] = true;
        }
        (0..self.num_etypes as u32)
            .filter(|&t| seen[t as usize])
            .collect()
    }

    /// Vertex × edge incidence matrix over in-edges.
    pub fn incidence_in(&self, weights: Option<&[f32]>) -> Result<IncidenceMatrix> {
        self.incidence(EdgeSet::In, weights)
    }

    /// Vertex × edge incidence over the chosen edge set, row entries by
    /// ascending edge id.
    pub fn incidence(&self, set: EdgeSet, weights: Option<&[f32]>) -> Result<IncidenceMatrix> {
        let index = self.edge_index(set);
        let values = self.edge_values(&index, weights)?;
        CsrMatrix::from_parts(
            self.num_vertices,
            self.num_edges(),
            index.row_ptr().to_vec(),
            index.edge_ids().to_vec(),
            values,
        )
    }

    /// Vertex × vertex adjacency by destination: row `v` holds `src(e)` for
    /// every in-edge `e` of `v`, in ascending edge-id order. Parallel edges
    /// stay separate nonzeros.
    pub fn adjacency_in(&self, weights: Option<&[f32]>) -> Result<CsrMatrix> {
        let values = self.edge_values(&self.csr_in, weights)?;
        let cols = self
            .csr_in
            .edge_ids()
            .iter()
            .map(|&e| self.edges[e as usize].src)
            .collect();
        CsrMatrix::from_parts(
            self.num_vertices,
            self.num_vertices,
            self.csr_in.row_ptr().to_vec(),
            cols,
            values,
        )
    }

    /// Cached `adjacency_in(None)`.
    pub fn unit_adjacency_in(&self) -> &CsrMatrix {
        self.unit.adjacency_in.get_or_init(|| {
            self.adjacency_in(None)
                .expect("unit adjacency is always valid")
        })
    }

    /// Cached `incidence(set, None)`.
    pub fn unit_incidence(&self, set: EdgeSet) -> &CsrMatrix {
        let cell = match set {
            EdgeSet::In => &self.unit.incidence_in,
            EdgeSet::All => &self.unit.incidence_all,
        };
        cell.get_or_init(|| {
            self.incidence(set, None)
                .expect("unit incidence is always valid")
        })
    }

    fn edge_values(&self, index: &CsrIndex, weights: Option<&[f32]>) -> Result<Vec<f32>> {
        match weights {
            None => Ok(vec![1.0; index.nnz()]),
            Some(w) if w.len() != self.num_edges() => {
                Err(Error::shape("incidence weights", self.num_edges(), w.len()))
            }
            Some(w) => Ok(index.edge_ids().iter().map(|&e| w[e as usize]).collect()),
        }
    }

    /// Same topology with each edge's relation replaced from `etypes`.
    pub fn with_edge_types(&self, etypes: &[u32], num_etypes: usize) -> Result<Graph> {
        if etypes.len() != self.num_edges() {
            return Err(Error::shape(
                "with_edge_types",
                self.num_edges(),
                etypes.len(),
            ));
        }
        let edges = self
            .edges
            .iter()
            .zip(etypes)
            .map(|(e, &t)| Edge::typed(e.src, e.dst, t))
            .collect();
        Graph::with_etypes(edges, self.num_vertices, num_etypes)
    }
}

/// In-degree buckets: vertices sharing an in-degree, keyed by that degree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeBuckets {
    buckets: BTreeMap<usize, Vec<u32>>,
}

impl DegreeBuckets {
    pub fn distinct_degrees(&self) -> usize {
        self.buckets.len()
    }

    pub fn get(&self, degree: usize) -> Option<&[u32]> {
        self.buckets.get(&degree).map(Vec::as_slice)
    }

    /// `(degree, vertices)` in ascending degree order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[u32])> {
        self.buckets.iter().map(|(&d, vs)| (d, vs.as_slice()))
    }

    /// `(degree, vertex count)` histogram, degrees ascending.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        self.iter().map(|(d, vs)| (d, vs.len())).collect()
    }
}
