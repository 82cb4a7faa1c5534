//! Edge-list and feature files, built-in dataset metadata and synthetic
//! stand-ins sized like those datasets.
//!
//! Edge lists hold one `src dst [etype]` triple per line; `#` starts a
//! comment. Vertex tokens are labels: they are numbered `0..n` in order of
//! first appearance, so a loaded graph never has isolated vertices.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{gen_powerlaw, gen_uniform, random_edge_types, Edge, Graph};
use crate::tensor::Matrix;

/// Size of a named benchmark dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetMeta {
    pub name: &'static str,
    pub vertices: usize,
    pub edges: usize,
    pub graph_type: &'static str,
}

/// The vertex-classification datasets, by name.
pub const BUILTIN_DATASETS: [DatasetMeta; 6] = [
    DatasetMeta {
        name: "cora",
        vertices: 2708,
        edges: 5429,
        graph_type: "Citation",
    },
    DatasetMeta {
        name: "citeseer",
        vertices: 3327,
        edges: 4732,
        graph_type: "Citation",
    },
    DatasetMeta {
        name: "pubmed",
        vertices: 19717,
        edges: 44338,
        graph_type: "Citation",
    },
    DatasetMeta {
        name: "aifb",
        vertices: 8285,
        edges: 29043,
        graph_type: "Semantic",
    },
    DatasetMeta {
        name: "mutag",
        vertices: 23644,
        edges: 74227,
        graph_type: "Molecular",
    },
    DatasetMeta {
        name: "bgs",
        vertices: 333845,
        edges: 916199,
        graph_type: "Geological",
    },
];

pub fn builtin_meta(name: &str) -> Result<DatasetMeta> {
    BUILTIN_DATASETS
        .iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
        .cloned()
        .ok_or_else(|| Error::Unknown {
            kind: "dataset",
            name: name.to_string(),
        })
}

/// Exponent used for graphs synthesized after a dataset.
pub const SYNTH_ALPHA: f64 = 2.5;

/// Power-law graph with the dataset's vertex count and about its edge count.
pub fn synth_like(meta: &DatasetMeta, seed: u64) -> Result<Graph> {
    gen_powerlaw(
        meta.vertices,
        meta.edges as f64 / meta.vertices as f64,
        SYNTH_ALPHA,
        seed,
    )
}

/// Parses edge-list text. With `directed == false` each non-loop edge is
/// also added reversed, right after the original.
pub fn parse_edgelist<R: BufRead>(input: R, directed: bool, typed: bool) -> Result<Graph> {
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut edges = Vec::new();
    let mut max_type = None;
    for (i, line) in input.lines().enumerate() {
        let no = i + 1;
        let line = line.map_err(|e| Error::parse(no, format!("unreadable line: {e}")))?;
        let body = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::parse(
                no,
                format!("expected `src dst [etype]`, got {} fields", toks.len()),
            ));
        }
        let etype = match (typed, toks.get(2)) {
            (true, Some(t)) => t.parse::<u32>().map_err(|_| {
                Error::parse(no, format!("edge type `{t}` is not a non-negative integer"))
            })?,
            (true, None) => {
                return Err(Error::parse(
                    no,
                    "typed edge list needs an edge type column",
                ))
            }
            (false, _) => 0,
        };
        max_type = max_type.max(Some(etype));
        let mut id_of = |tok: &str| -> Result<u32> {
            if let Some(&id) = ids.get(tok) {
                return Ok(id);
            }
            let id = u32::try_from(ids.len()).map_err(|_| Error::parse(no, "too many vertices"))?;
            ids.insert(tok.to_string(), id);
            Ok(id)
        };
        let src = id_of(toks[0])?;
        let dst = id_of(toks[1])?;
        edges.push(Edge::typed(src, dst, etype));
        if !directed && src != dst {
            edges.push(Edge::typed(dst, src, etype));
        }
    }
    let num_etypes = max_type.map_or(1, |t| t as usize + 1);
    Graph::with_etypes(edges, ids.len(), num_etypes)
}

pub fn load_edgelist(path: impl AsRef<Path>, directed: bool, typed: bool) -> Result<Graph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edgelist(BufReader::new(file), directed, typed).map_err(|e| e.at_path(path))
}

/// Writes one line per edge in edge-id order, with the type column when
/// `typed`.
pub fn write_edgelist<W: Write>(g: &Graph, mut out: W, typed: bool) -> Result<()> {
    let io = |e| Error::io("edge list", e);
    for e in g.edges() {
        if typed {
            writeln!(out, "{} {} {}", e.src, e.dst, e.etype).map_err(io)?;
        } else {
            writeln!(out, "{} {}", e.src, e.dst).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn save_edgelist(g: &Graph, path: impl AsRef<Path>, typed: bool) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_edgelist(g, std::io::BufWriter::new(file), typed).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Seeded uniform features in `[-1, 1]`.
pub fn random_features(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfea7_0000);
    Matrix::random_uniform(rows, cols, 1.0, &mut rng)
}

/// Parses a feature matrix: comma-separated if the first data line has a
/// comma, whitespace-separated otherwise. `#` lines are skipped.
pub fn parse_features<R: Read>(mut input: R, expected_rows: usize) -> Result<Matrix> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::parse(0, format!("unreadable features: {e}")))?;
    let data_lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let comma = data_lines.first().is_some_and(|(_, l)| l.contains(','));
    let mut values: Vec<f32> = Vec::new();
    let mut cols = None;
    for &(no, line) in &data_lines {
        let fields: Vec<String> = if comma {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_reader(line.as_bytes());
            match rdr.records().next() {
                Some(rec) => rec?.iter().map(str::to_string).collect(),
                None => Vec::new(),
            }
        } else {
            line.split_whitespace().map(str::to_string).collect()
        };
        if fields.is_empty() || fields.iter().all(String::is_empty) {
            return Err(Error::parse(no, "feature row has no values"));
        }
        match cols {
            None => cols = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(Error::parse(
                    no,
                    format!("expected {c} columns, got {}", fields.len()),
                ));
            }
            _ => {}
        }
        for f in &fields {
            values.push(
                f.parse::<f32>()
                    .map_err(|_| Error::parse(no, format!("bad feature value `{f}`")))?,
            );
        }
    }
    let rows = data_lines.len();
    if rows != expected_rows {
        return Err(Error::shape(
            "load_features",
            format!("{expected_rows} rows"),
            rows,
        ));
    }
    match cols {
        Some(c) => Matrix::from_vec(rows, c, values),
        None => Err(Error::InvalidParameter(
            "feature matrix has no columns".into(),
        )),
    }
}

pub fn load_features(path: impl AsRef<Path>, expected_rows: usize) -> Result<Matrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_features(file, expected_rows).map_err(|e| e.at_path(path))
}

pub fn write_features<W: Write>(m: &Matrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for r in 0..m.rows() {
        w.write_record(m.row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("features", e))
}

pub fn save_features(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_features(m, file)
}

/// A generated graph described by a short string:
///
/// * `powerlaw:n=1000,avg_deg=3,alpha=2.5`
/// * `uniform:n=100,m=500`
/// * `like:cora`
///
/// Any form may add `etypes=K` to assign `K` random relation types.
#[derive(Clone, Debug, PartialEq)]
pub enum SyntheticSource {
    PowerLaw {
        n: usize,
        avg_deg: f64,
        alpha: f64,
        etypes: usize,
    },
    Uniform {
        n: usize,
        m: usize,
        etypes: usize,
    },
    Like {
        meta: DatasetMeta,
        etypes: usize,
    },
}

impl SyntheticSource {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("synthetic graph `{s}`: {msg}"));
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| bad("expected `<kind>:<args>`".into()))?;
        let mut kv: HashMap<&str, &str> = HashMap::new();
        let mut bare = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    kv.insert(k.trim(), v.trim());
                }
                None => bare.push(part),
            }
        }
        fn take<T: std::str::FromStr>(
            kv: &mut HashMap<&str, &str>,
            key: &str,
            default: Option<T>,
            bad: &dyn Fn(String) -> Error,
        ) -> Result<T> {
            match kv.remove(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| bad(format!("bad value `{v}` for {key}"))),
                None => default.ok_or_else(|| bad(format!("missing {key}"))),
            }
        }
        let etypes = take(&mut kv, "etypes", Some(1usize), &bad)?;
        let src = match kind {
            "powerlaw" => SyntheticSource::PowerLaw {
                n: take(&mut kv, "n", None, &bad)?,
                avg_deg: take(&mut kv, "avg_deg", None, &bad)?,
                alpha: take(&mut kv, "alpha", Some(SYNTH_ALPHA), &bad)?,
                etypes,
            },
            "uniform" => SyntheticSource::Uniform {
                n: take(&mut kv, "n", None, &bad)?,
                m: take(&mut kv, "m", None, &bad)?,
                etypes,
            },
            "like" => {
                let name = match (bare.pop(), kv.remove("name")) {
                    (Some(n), None) | (None, Some(n)) => n,
                    _ => return Err(bad("expected one dataset name".into())),
                };
                SyntheticSource::Like {
                    meta: builtin_meta(name)?,
                    etypes,
                }
            }
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        if let Some(extra) = bare.first() {
            return Err(bad(format!("unexpected `{extra}`")));
        }
        if let Some(k) = kv.keys().next() {
            return Err(bad(format!("unknown key `{k}`")));
        }
        if etypes == 0 {
            return Err(bad("etypes must be >= 1".into()));
        }
        Ok(src)
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        let (g, etypes) = match self {
            SyntheticSource::PowerLaw {
                n,
                avg_deg,
                alpha,
                etypes,
            } => (gen_powerlaw(*n, *avg_deg, *alpha, seed)?, *etypes),
            SyntheticSource::Uniform { n, m, etypes } => (gen_uniform(*n, *m, seed)?, *etypes),
            SyntheticSource::Like { meta, etypes } => (synth_like(meta, seed)?, *etypes),
        };
        if etypes > 1 {
            random_edge_types(&g, etypes, seed.wrapping_add(1))
        } else {
            Ok(g)
        }
    }
}

impl fmt::Display for SyntheticSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntheticSource::PowerLaw {
                n,
                avg_deg,
                alpha,
                etypes,
            } => {
                write!(f, "powerlaw:n={n},avg_deg={avg_deg},alpha={alpha}")?;
                if *etypes > 1 {
                    write!(f, ",etypes={etypes}")?;
                }
                Ok(())
            }
            SyntheticSource::Uniform { n, m, etypes } => {
                write!(f, "uniform:n={n},m={m}")?;
                if *etypes > 1 {
                    write!(f, ",etypes={etypes}")?;
                }
                Ok(())
            }
            SyntheticSource::Like { meta, etypes } => {
                write!(f, "like:{}", meta.name)?;
                if *etypes > 1 {
                    write!(f, ",etypes={etypes}")?;
                }
                Ok(())
            }
        }
    }
}
