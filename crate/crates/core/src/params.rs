//! Textual parameter dumps.
//!
//! ```text
//! # saga-params 1
//! tensor layer0.apply_vertex.dense0.weight 4 2
//! 0.1 -0.25
//! ...
//! ```
//!
//! Each `tensor` header is followed by `rows` lines of `cols` values.
//! Loading fills an existing parameter set by name and checks every shape,
//! so a dump only loads into a model built with the same configuration.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::cells::{GruParams, LstmParams, MlpParams};
use crate::engine::{EdgeParams, ModelParams, VertexParams};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

const MAGIC: &str = "# saga-params 1";

fn mlp_names(prefix: &str, p: &MlpParams, out: &mut Vec<String>) {
    for i in 0..p.layers().len() {
        out.push(format!("{prefix}.dense{i}.weight"));
        out.push(format!("{prefix}.dense{i}.bias"));
    }
}

fn mlp_refs<'a>(p: &'a mut MlpParams, out: &mut Vec<&'a mut Matrix>) {
    for l in p.layers_mut() {
        out.push(&mut l.weight);
        out.push(&mut l.bias);
    }
}

const GRU_FIELDS: [&str; 9] = [
    "w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h",
];
const LSTM_FIELDS: [&str; 12] = [
    "w_i", "w_f", "w_o", "w_g", "u_i", "u_f", "u_o", "u_g", "b_i", "b_f", "b_o", "b_g",
];

fn gru_refs(p: &mut GruParams) -> [&mut Matrix; 9] {
    [
        &mut p.w_z, &mut p.w_r, &mut p.w_h, &mut p.u_z, &mut p.u_r, &mut p.u_h, &mut p.b_z,
        &mut p.b_r, &mut p.b_h,
    ]
}

fn lstm_refs(p: &mut LstmParams) -> [&mut Matrix; 12] {
    [
        &mut p.w_i, &mut p.w_f, &mut p.w_o, &mut p.w_g, &mut p.u_i, &mut p.u_f, &mut p.u_o,
        &mut p.u_g, &mut p.b_i, &mut p.b_f, &mut p.b_o, &mut p.b_g,
    ]
}

/// Every tensor of `params` with a stable dotted name, in dump order.
pub fn named_tensors_mut(params: &mut ModelParams) -> Vec<(String, &mut Matrix)> {
    let mut names = Vec::new();
    let mut refs: Vec<&mut Matrix> = Vec::new();
    if let Some(t) = params.edge_type_embedding.as_mut() {
        names.push("edge_type_embedding".to_string());
        refs.push(t);
    }
    for (l, layer) in params.layers.iter_mut().enumerate() {
        match layer.apply_edge.as_mut() {
            Some(EdgeParams::Mlp(p)) => {
                mlp_names(&format!("layer{l}.apply_edge"), p, &mut names);
                mlp_refs(p, &mut refs);
            }
            Some(EdgeParams::PerType(ps)) => {
                for (t, p) in ps.iter_mut().enumerate() {
                    mlp_names(&format!("layer{l}.apply_edge.type{t}"), p, &mut names);
                    mlp_refs(p, &mut refs);
                }
            }
            None => {}
        }
        if let Some(p) = layer.gather_lstm.as_mut() {
            names.extend(
                LSTM_FIELDS
                    .iter()
                    .map(|f| format!("layer{l}.gather.lstm.{f}")),
            );
            refs.extend(lstm_refs(p));
        }
        match &mut layer.apply_vertex {
            VertexParams::Mlp(p) => {
                mlp_names(&format!("layer{l}.apply_vertex"), p, &mut names);
                mlp_refs(p, &mut refs);
            }
            VertexParams::Gru(p) => {
                names.extend(
                    GRU_FIELDS
                        .iter()
                        .map(|f| format!("layer{l}.apply_vertex.gru.{f}")),
                );
                refs.extend(gru_refs(p));
            }
            VertexParams::Sum { self_weight } => {
                if let Some(w) = self_weight.as_mut() {
                    names.push(format!("layer{l}.apply_vertex.self_weight"));
                    refs.push(w);
                }
            }
        }
    }
    names.into_iter().zip(refs).collect()
}

pub fn dump_params<W: Write>(params: &ModelParams, mut out: W) -> Result<()> {
    let mut copy = params.clone();
    let io = |e| Error::io("parameter dump", e);
    writeln!(out, "{MAGIC}").map_err(io)?;
    for (name, m) in named_tensors_mut(&mut copy) {
        writeln!(out, "tensor {name} {} {}", m.rows(), m.cols()).map_err(io)?;
        for r in 0..m.rows() {
            let line: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" ")).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

/// Parses a dump into named matrices.
pub fn read_dump<R: BufRead>(input: R) -> Result<BTreeMap<String, Matrix>> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut out = BTreeMap::new();
    let next = |lines: &mut dyn Iterator<Item = (usize, std::io::Result<String>)>| -> Result<Option<(usize, String)>> {
        for (no, l) in lines {
            let l = l.map_err(|e| Error::io("parameter dump", e))?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some((no, t.to_string())));
        }
        Ok(None)
    };
    while let Some((no, header)) = next(&mut lines)? {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [kw, name, rows, cols] = parts[..] else {
            return Err(Error::parse(
                no,
                format!("expected `tensor <name> <rows> <cols>`, got `{header}`"),
            ));
        };
        if kw != "tensor" {
            return Err(Error::parse(
                no,
                format!("expected `tensor` header, got `{kw}`"),
            ));
        }
        let rows: usize = rows
            .parse()
            .map_err(|_| Error::parse(no, format!("bad row count `{rows}`")))?;
        let cols: usize = cols
            .parse()
            .map_err(|_| Error::parse(no, format!("bad column count `{cols}`")))?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (lno, line) = next(&mut lines)?.ok_or_else(|| {
                Error::parse(
                    no,
                    format!("tensor {name}: file ends after {r} of {rows} rows"),
                )
            })?;
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(
                    tok.parse::<f32>()
                        .map_err(|_| Error::parse(lno, format!("bad value `{tok}`")))?,
                );
            }
            if data.len() - before != cols {
                return Err(Error::parse(
                    lno,
                    format!(
                        "tensor {name}: expected {cols} values, got {}",
                        data.len() - before
                    ),
                ));
            }
        }
        if out
            .insert(name.to_string(), Matrix::from_vec(rows, cols, data)?)
            .is_some()
        {
            return Err(Error::parse(no, format!("tensor {name} appears twice")));
        }
    }
    Ok(out)
}

/// Overwrites every tensor of `params` from a dump. The dump must hold
/// exactly the same names and shapes.
pub fn load_params<R: BufRead>(params: &mut ModelParams, input: R) -> Result<()> {
    let mut dump = read_dump(input)?;
    for (name, slot) in named_tensors_mut(params) {
        let m = dump
            .remove(&name)
            .ok_or_else(|| Error::Config(format!("parameter dump lacks tensor {name}")))?;
        if m.rows() != slot.rows() || m.cols() != slot.cols() {
            return Err(Error::shape(
                "load_params",
                format!("{name} {}x{}", slot.rows(), slot.cols()),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        *slot = m;
    }
    if let Some(extra) = dump.keys().next() {
        return Err(Error::Config(format!(
            "parameter dump has unexpected tensor {extra}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelName};

    #[test]
    fn round_trip_every_model() {
        for name in ModelName::ALL {
            let card = build_model(name, 3, 4, 2, 2, 2, 5).unwrap();
            let mut buf = Vec::new();
            dump_params(&card.params, &mut buf).unwrap();
            let mut other = build_model(name, 3, 4, 2, 2, 2, 99).unwrap();
            assert_ne!(other.params, card.params);
            load_params(&mut other.params, buf.as_slice()).unwrap();
            assert_eq!(other.params, card.params, "{name}");
        }
    }

    #[test]
    fn names_are_unique() {
        let mut card = build_model(ModelName::Rgcn, 3, 4, 2, 2, 3, 5).unwrap();
        let names: Vec<String> = named_tensors_mut(&mut card.params)
            .into_iter()
            .map(|(n, _)| n)
            .collect();
        let set: std::collections::BTreeSet<_> = names.iter().collect();
        assert_eq!(set.len(), names.len());
        assert!(names.contains(&"edge_type_embedding".to_string()));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let small = build_model(ModelName::Gcn, 3, 4, 2, 1, 1, 5).unwrap();
        let mut buf = Vec::new();
        dump_params(&small.params, &mut buf).unwrap();
        let mut wide = build_model(ModelName::Gcn, 3, 4, 5, 1, 1, 5).unwrap();
        assert!(matches!(
            load_params(&mut wide.params, buf.as_slice()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn positioned_parse_errors() {
        let text = "# saga-params 1\ntensor a 1 2\n1.0 x\n";
        let err = read_dump(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains(":3:"), "{err}");
        let short = "tensor a 2 1\n1\n";
        assert!(read_dump(short.as_bytes()).is_err());
    }
}
