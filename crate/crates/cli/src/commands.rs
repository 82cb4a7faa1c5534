use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use saga_core::accel::{compare, DeviceModel};
use saga_core::data::{self, builtin_meta, SyntheticSource, BUILTIN_DATASETS};
use saga_core::models::{build_model_with, GruInput, ModelCard, ModelName, ModelOptions};
use saga_core::params::{dump_params, load_params};
use saga_core::profile::{report, Profile, Profiler, Stage};
use saga_core::{Error, Fusion, Graph, Matrix, Result};

use crate::{
    DataArgs, DegreeArgs, Format, FusionArg, FusionArgs, GruInputArg, MetaArgs, ModelArgs,
    OutputArgs, ProjectArgs, RunArgs,
};

/// Sizes the global rayon pool from `SAGA_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SAGA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "SAGA_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn emit(output: &OutputArgs, text: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| io_err(path, e))?;
            f.write_all(text).map_err(|e| io_err(path, e))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text).map_err(|e| io_err("<stdout>", e))
        }
    }
}

fn io_err(path: impl AsRef<Path>, e: std::io::Error) -> Error {
    Error::Io {
        path: path.as_ref().to_path_buf(),
        source: e,
    }
}

/// The graph named by the data flags, with a label for reports.
pub fn load_graph(args: &DataArgs) -> Result<(Graph, String)> {
    if let Some(s) = &args.synthetic {
        let src = SyntheticSource::parse(s)?;
        return Ok((src.generate(args.seed)?, src.to_string()));
    }
    let name = args
        .dataset
        .as_deref()
        .ok_or_else(|| Error::Config("one of --dataset or --synthetic is required".into()))?;
    let path = Path::new(name);
    if path.exists() {
        let g = data::load_edgelist(path, args.directed, args.typed)?;
        let label = path
            .file_stem()
            .map_or(name.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok((g, label));
    }
    match builtin_meta(name) {
        Ok(meta) => Ok((data::synth_like(&meta, args.seed)?, meta.name.to_string())),
        Err(_) => Err(Error::Config(format!(
            "--dataset `{name}` is neither a file nor a built-in dataset name"
        ))),
    }
}

fn build_card(args: &ModelArgs, g: &Graph, in_dim: usize, seed: u64) -> Result<ModelCard> {
    let name: ModelName = args.model.parse()?;
    let options = ModelOptions {
        gcn_norm: args.gcn_norm,
        ggnn_gru_input: match args.ggnn_gru_input {
            GruInputArg::Concat => GruInput::Concat,
            GruInputArg::Gather => GruInput::Gather,
        },
        ggnn_all_edges: args.ggnn_all_edges,
    };
    if args.gcn_norm && name != ModelName::Gcn {
        return Err(Error::Config("--gcn-norm applies to gcn only".into()));
    }
    if args.ggnn_all_edges && name != ModelName::Ggnn {
        return Err(Error::Config(
            "--ggnn-all-edges applies to ggnn only".into(),
        ));
    }
    let out = args.out_dim.unwrap_or(args.hidden);
    let mut card = build_model_with(
        name,
        in_dim,
        args.hidden,
        out,
        args.layers,
        g.num_etypes(),
        seed,
        options,
    )?;
    if let Some(path) = &args.load_params {
        let f = File::open(path).map_err(|e| io_err(path, e))?;
        load_params(&mut card.params, BufReader::new(f)).map_err(|e| e.at_path(path))?;
    }
    if let Some(path) = &args.dump_params {
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        dump_params(&card.params, std::io::BufWriter::new(f))?;
    }
    Ok(card)
}

fn features(args: &ModelArgs, g: &Graph, seed: u64) -> Result<Matrix> {
    match &args.features {
        Some(path) => data::load_features(path, g.num_vertices()),
        None => Ok(data::random_features(g.num_vertices(), args.in_dim, seed)),
    }
}

fn fusion_of(arg: FusionArg) -> Fusion {
    match arg {
        FusionArg::On => Fusion::On,
        FusionArg::Off => Fusion::Off,
    }
}

fn csv_bytes(profiles: &[&Profile]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        p.write_csv(&mut buf, i == 0)?;
    }
    Ok(buf)
}

pub fn run(args: &RunArgs) -> Result<()> {
    let (g, label) = load_graph(&args.data)?;
    let x = features(&args.model, &g, args.data.seed)?;
    let mut card = build_card(&args.model, &g, x.dim(), args.data.seed)?;
    if let Some(f) = args.fusion {
        card = card.with_fusion(fusion_of(f))?;
    }
    let mut profiler = Profiler::new();
    card.run(&g, &x, &mut profiler)?;
    let profile = profiler.into_profile(card.name.name(), label);
    let text = match args.output.format {
        Format::Csv => csv_bytes(&[&profile])?,
        Format::Table => {
            let rep = report(&profile);
            format!(
                "model {}  dataset {}  vertices {}  edges {}  fusion {}\n{}total flops {}\n",
                card.name,
                profile.dataset,
                g.num_vertices(),
                g.num_edges(),
                card.spec.fusion,
                rep.to_table(),
                rep.total_flops()
            )
            .into_bytes()
        }
    };
    emit(&args.output, &text)
}

fn gather_ns(profiler: &Profiler) -> u64 {
    profiler
        .records()
        .iter()
        .filter(|r| r.stage == Stage::Gather)
        .map(|r| r.wall_ns)
        .sum()
}

/// Relative tolerance for the fused/non-fused output check.
pub const FUSION_TOLERANCE: f32 = 1e-5;

pub fn fusion_compare(args: &FusionArgs) -> Result<()> {
    let (g, label) = load_graph(&args.data)?;
    let x = features(&args.model, &g, args.data.seed)?;
    let card = build_card(&args.model, &g, x.dim(), args.data.seed)?;
    let fused = card.clone().with_fusion(Fusion::On)?;
    let unfused = card.with_fusion(Fusion::Off)?;
    let repeat = args.repeat.max(1);
    let mut best = [u64::MAX; 2];
    let mut outputs = [None, None];
    for _ in 0..repeat {
        for (i, c) in [&fused, &unfused].into_iter().enumerate() {
            let mut p = Profiler::new();
            let out = c.run(&g, &x, &mut p)?;
            best[i] = best[i].min(gather_ns(&p));
            outputs[i] = Some(out.vertex_emb);
        }
    }
    let (a, b) = (outputs[0].take().unwrap(), outputs[1].take().unwrap());
    let diff = a
        .max_rel_diff(&b)
        .ok_or_else(|| Error::Config("fused and non-fused outputs differ in shape".into()))?;
    if diff.is_nan() || diff > FUSION_TOLERANCE {
        return Err(Error::Config(format!(
            "fused and non-fused outputs disagree: max relative difference {diff:e} > {FUSION_TOLERANCE:e}"
        )));
    }
    let ratio = if g.num_edges() == 0 {
        1.0
    } else {
        best[1] as f64 / best[0].max(1) as f64
    };
    let header = [
        "model",
        "dataset",
        "fused_gather_ns",
        "unfused_gather_ns",
        "ratio",
        "max_rel_diff",
    ];
    let row = [
        fused.name.to_string(),
        label,
        best[0].to_string(),
        best[1].to_string(),
        format!("{ratio:.3}"),
        format!("{diff:e}"),
    ];
    let text = match args.output.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header)?;
            w.write_record(&row)?;
            w.into_inner().map_err(|e| Error::Config(e.to_string()))?
        }
        Format::Table => header
            .iter()
            .zip(&row)
            .map(|(h, v)| format!("{h:<18}{v}\n"))
            .collect::<String>()
            .into_bytes(),
    };
    emit(&args.output, &text)
}

pub fn degree_report(args: &DegreeArgs) -> Result<()> {
    let (g, label) = load_graph(&args.data)?;
    let buckets = g.degree_buckets();
    let predicted = buckets.distinct_degrees();
    let measured = if args.verify {
        let card = build_model_with(
            ModelName::GraphSage,
            8,
            8,
            8,
            1,
            g.num_etypes(),
            args.data.seed,
            ModelOptions::default(),
        )?;
        let x = data::random_features(g.num_vertices(), 8, args.data.seed);
        let mut p = Profiler::new();
        card.run(&g, &x, &mut p)?;
        let m: u64 = p
            .records()
            .iter()
            .filter(|r| r.stage == Stage::Gather)
            .map(|r| r.invocations)
            .sum();
        if m != predicted as u64 {
            return Err(Error::Config(format!(
                "measured LSTM gather invocations {m} differ from predicted {predicted}"
            )));
        }
        Some(m)
    } else {
        None
    };
    let hist = buckets.histogram();
    let mut text = String::new();
    match args.output.format {
        Format::Csv => {
            text.push_str("degree,count\n");
            for (d, c) in &hist {
                text.push_str(&format!("{d},{c}\n"));
            }
            text.push_str(&format!("# distinct_degrees={predicted}\n"));
            if let Some(m) = measured {
                text.push_str(&format!("# measured_invocations={m}\n"));
            }
        }
        Format::Table => {
            text.push_str(&format!(
                "dataset {label}  vertices {}  edges {}\n",
                g.num_vertices(),
                g.num_edges()
            ));
            text.push_str(&format!("{:>8}  {:>8}\n", "degree", "count"));
            for (d, c) in &hist {
                text.push_str(&format!("{d:>8}  {c:>8}\n"));
            }
            text.push_str(&format!("predicted LSTM gather invocations {predicted}\n"));
            if let Some(m) = measured {
                text.push_str(&format!("measured LSTM gather invocations {m}\n"));
            }
        }
    }
    emit(&args.output, text.as_bytes())
}

fn device_from(spec: &str) -> Result<DeviceModel> {
    match spec.strip_prefix("builtin:") {
        Some("tpu-like") => Ok(DeviceModel::tpu_like()),
        Some("gpu-like") => Ok(DeviceModel::gpu_like()),
        Some("host") => Ok(DeviceModel::default_host()),
        Some(other) => Err(Error::Unknown {
            kind: "built-in device",
            name: other.to_string(),
        }),
        None => DeviceModel::load(spec),
    }
}

pub fn project(args: &ProjectArgs) -> Result<()> {
    let f = File::open(&args.profile).map_err(|e| io_err(&args.profile, e))?;
    let profiles = Profile::read_csv(BufReader::new(f)).map_err(|e| e.at_path(&args.profile))?;
    let devices = args
        .devices
        .iter()
        .map(|d| device_from(d))
        .collect::<Result<Vec<_>>>()?;
    let host = match &args.host {
        Some(h) => device_from(h)?,
        None => DeviceModel::default_host(),
    };
    let mut buf = Vec::new();
    for (i, profile) in profiles.iter().enumerate() {
        let cmp = compare(profile, &devices, &host)?;
        match args.output.format {
            Format::Csv => cmp.write_csv(profile, &mut buf, i == 0)?,
            Format::Table => {
                buf.extend_from_slice(cmp.to_table(profile).as_bytes());
                for (stage, w) in &cmp.stage_winners {
                    buf.extend_from_slice(format!("best {stage}: {}\n", w.join(", ")).as_bytes());
                }
                buf.extend_from_slice(
                    format!("best Total: {}\n", cmp.total_winners.join(", ")).as_bytes(),
                );
            }
        }
    }
    emit(&args.output, &buf)
}

pub fn meta(args: &MetaArgs) -> Result<()> {
    let metas = match &args.name {
        Some(n) => vec![builtin_meta(n)?],
        None => BUILTIN_DATASETS.to_vec(),
    };
    let loaded = match &args.check {
        Some(path) => {
            let g = data::load_edgelist(path, args.directed, false)?;
            Some((g.num_vertices(), g.num_edges()))
        }
        None => None,
    };
    let mut header = vec!["name", "vertices", "edges", "graph_type"];
    if loaded.is_some() {
        header.extend(["loaded_vertices", "loaded_edges"]);
    }
    let rows: Vec<Vec<String>> = metas
        .iter()
        .map(|m| {
            let mut r = vec![
                m.name.to_string(),
                m.vertices.to_string(),
                m.edges.to_string(),
                m.graph_type.to_string(),
            ];
            if let Some((v, e)) = loaded {
                r.extend([v.to_string(), e.to_string()]);
            }
            r
        })
        .collect();
    let text = match args.output.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            w.into_inner().map_err(|e| Error::Config(e.to_string()))?
        }
        Format::Table => {
            let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for r in &rows {
                for (w, c) in width.iter_mut().zip(r) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: &[String]| {
                let parts: Vec<String> = cells
                    .iter()
                    .zip(&width)
                    .enumerate()
                    .map(|(i, (c, w))| {
                        if i == 0 || i == 3 {
                            format!("{c:<w$}")
                        } else {
                            format!("{c:>w$}")
                        }
                    })
                    .collect();
                format!("{}\n", parts.join("  ").trim_end())
            };
            let mut s = line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
            for r in &rows {
                s.push_str(&line(r));
            }
            s.into_bytes()
        }
    };
    emit(&args.output, &text)
}
