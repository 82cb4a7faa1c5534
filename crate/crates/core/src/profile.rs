//! Per-stage analytical counters, wall-clock timing and stage-breakdown
//! reports.
//!
//! A [`Profiler`] belongs to one run. The engine pushes one
//! [`ProfileRecord`] per executed stage per layer; [`report`] aggregates
//! them by stage.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// The four stages of a layer, in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Scatter,
    ApplyEdge,
    Gather,
    ApplyVertex,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Scatter,
        Stage::ApplyEdge,
        Stage::Gather,
        Stage::ApplyVertex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Scatter => "Scatter",
            Stage::ApplyEdge => "ApplyEdge",
            Stage::Gather => "Gather",
            Stage::ApplyVertex => "ApplyVertex",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "stage",
                name: s.to_string(),
            })
    }
}

/// Dominant kernel family of a stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelClass {
    IndexSelection,
    Gemm,
    Gemv,
    SparseGemm,
    CellStep,
}

impl KernelClass {
    pub const ALL: [KernelClass; 5] = [
        KernelClass::IndexSelection,
        KernelClass::Gemm,
        KernelClass::Gemv,
        KernelClass::SparseGemm,
        KernelClass::CellStep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelClass::IndexSelection => "IndexSelection",
            KernelClass::Gemm => "Gemm",
            KernelClass::Gemv => "Gemv",
            KernelClass::SparseGemm => "SparseGemm",
            KernelClass::CellStep => "CellStep",
        }
    }
}

impl fmt::Display for KernelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelClass::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "kernel class",
                name: s.to_string(),
            })
    }
}

/// Counters for one executed stage of one layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileRecord {
    pub stage: Stage,
    pub layer: usize,
    pub wall_ns: u64,
    pub flops: u64,
    pub bytes_moved: u64,
    pub invocations: u64,
    pub kernel_class: KernelClass,
    /// Size of the stage's output matrix; what crosses a processor boundary
    /// if the next stage runs elsewhere.
    pub out_bytes: u64,
}

/// Collects records during one run.
#[derive(Clone, Debug, Default)]
pub struct Profiler {
    records: Vec<ProfileRecord>,
}

impl Profiler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, record: ProfileRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[ProfileRecord] {
        &self.records
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }

    pub fn into_profile(self, model: impl Into<String>, dataset: impl Into<String>) -> Profile {
        Profile {
            model: model.into(),
            dataset: dataset.into(),
            records: self.records,
        }
    }
}

/// The records of one run together with the labels that identify it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Profile {
    pub model: String,
    pub dataset: String,
    pub records: Vec<ProfileRecord>,
}

/// Column order of the profile CSV.
pub const CSV_COLUMNS: [&str; 10] = [
    "model",
    "dataset",
    "layer",
    "stage",
    "wall_ns",
    "flops",
    "bytes",
    "invocations",
    "kernel_class",
    "out_bytes",
];

impl Profile {
    pub fn total_flops(&self) -> u64 {
        self.records.iter().map(|r| r.flops).sum()
    }

    pub fn stage_records(&self, stage: Stage) -> impl Iterator<Item = &ProfileRecord> {
        self.records.iter().filter(move |r| r.stage == stage)
    }

    /// Write one row per record. Multiple profiles may share a file; pass
    /// `header = false` for all but the first.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if header {
            w.write_record(CSV_COLUMNS)?;
        }
        for r in &self.records {
            w.write_record([
                self.model.clone(),
                self.dataset.clone(),
                r.layer.to_string(),
                r.stage.to_string(),
                r.wall_ns.to_string(),
                r.flops.to_string(),
                r.bytes_moved.to_string(),
                r.invocations.to_string(),
                r.kernel_class.to_string(),
                r.out_bytes.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Parse a profile CSV. Rows from several runs are returned as separate
    /// profiles in first-appearance order of their `(model, dataset)` labels.
    pub fn read_csv<R: Read>(input: R) -> Result<Vec<Profile>> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::parse(1, format!("missing column '{name}'")))
        };
        let idx: Vec<usize> = CSV_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
        let mut profiles: Vec<Profile> = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row?;
            let field = |k: usize| row.get(idx[k]).unwrap_or("");
            let num = |k: usize| -> Result<u64> {
                field(k).parse::<u64>().map_err(|_| {
                    Error::parse(
                        line,
                        format!(
                            "column '{}': expected integer, got '{}'",
                            CSV_COLUMNS[k],
                            field(k)
                        ),
                    )
                })
            };
            let stage = field(3)
                .parse::<Stage>()
                .map_err(|e| Error::parse(line, e.to_string()))?;
            let kernel_class = field(8)
                .parse::<KernelClass>()
                .map_err(|e| Error::parse(line, e.to_string()))?;
            let record = ProfileRecord {
                stage,
                layer: num(2)? as usize,
                wall_ns: num(4)?,
                flops: num(5)?,
                bytes_moved: num(6)?,
                invocations: num(7)?,
                kernel_class,
                out_bytes: num(9)?,
            };
            let (model, dataset) = (field(0), field(1));
            match profiles
                .iter_mut()
                .find(|p| p.model == model && p.dataset == dataset)
            {
                Some(p) => p.records.push(record),
                None => profiles.push(Profile {
                    model: model.to_string(),
                    dataset: dataset.to_string(),
                    records: vec![record],
                }),
            }
        }
        Ok(profiles)
    }
}

/// One aggregated stage row of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct StageSummary {
    pub stage: Stage,
    pub wall_ns: u64,
    pub share: f64,
    pub flops: u64,
    pub bytes_moved: u64,
    pub invocations: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageReport {
    pub rows: Vec<StageSummary>,
}

/// Aggregate records per stage. Stages that never ran do not appear. Time
/// shares sum to one unless every stage took zero time, in which case all
/// shares are zero.
pub fn report(profile: &Profile) -> StageReport {
    let total: u64 = profile.records.iter().map(|r| r.wall_ns).sum();
    let rows = Stage::ALL
        .into_iter()
        .filter_map(|stage| {
            let mut it = profile.stage_records(stage).peekable();
            it.peek()?;
            let mut s = StageSummary {
                stage,
                wall_ns: 0,
                share: 0.0,
                flops: 0,
                bytes_moved: 0,
                invocations: 0,
            };
            for r in it {
                s.wall_ns += r.wall_ns;
                s.flops += r.flops;
                s.bytes_moved += r.bytes_moved;
                s.invocations += r.invocations;
            }
            if total > 0 {
                s.share = s.wall_ns as f64 / total as f64;
            }
            Some(s)
        })
        .collect();
    StageReport { rows }
}

impl StageReport {
    pub fn total_flops(&self) -> u64 {
        self.rows.iter().map(|r| r.flops).sum()
    }

    pub fn get(&self, stage: Stage) -> Option<&StageSummary> {
        self.rows.iter().find(|r| r.stage == stage)
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let header = ["stage", "time_ms", "share", "flops", "bytes", "invocations"];
        let body: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.stage.to_string(),
                    format!("{:.3}", r.wall_ns as f64 / 1e6),
                    format!("{:.1}%", r.share * 100.0),
                    r.flops.to_string(),
                    r.bytes_moved.to_string(),
                    r.invocations.to_string(),
                ]
            })
            .collect();
        format_table(&header, &body)
    }
}

pub(crate) fn format_table<const N: usize>(header: &[&str; N], rows: &[[String; N]]) -> String {
    let mut width = header.map(str::len);
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

/// Operand shapes for the traffic model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpShape {
    /// `m×k · k×n`, plus an optional broadcast bias of `n`.
    Gemm {
        m: usize,
        k: usize,
        n: usize,
        bias: bool,
    },
    /// CSR matrix with `rows`, `nnz` times a dense `cols × k`.
    Spmm {
        rows: usize,
        cols: usize,
        nnz: usize,
        k: usize,
    },
    /// Row gathers: `gathered` input elements read, `written` output elements.
    IndexSelect { gathered: usize, written: usize },
    /// `in_rows × k` reduced into `out_rows × k`.
    SegmentReduce {
        in_rows: usize,
        out_rows: usize,
        k: usize,
    },
    /// `elems` outputs computed from `inputs` same-sized operands.
    Elementwise { elems: usize, inputs: usize },
}

/// Bytes of DRAM traffic assuming every input is read once and every
/// output written once, 4 bytes per element (indices included). Caches are
/// ignored.
pub fn bytes_model(op: OpShape) -> u64 {
    let elems = match op {
        OpShape::Gemm { m, k, n, bias } => m * k + k * n + m * n + if bias { n } else { 0 },
        OpShape::Spmm { rows, cols, nnz, k } => (rows + 1) + 2 * nnz + cols * k + rows * k,
        OpShape::IndexSelect { gathered, written } => gathered + written,
        OpShape::SegmentReduce {
            in_rows,
            out_rows,
            k,
        } => in_rows * k + out_rows * k,
        OpShape::Elementwise { elems, inputs } => elems * (inputs + 1),
    };
    4 * elems as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(stage: Stage, wall_ns: u64, flops: u64) -> ProfileRecord {
        ProfileRecord {
            stage,
            layer: 0,
            wall_ns,
            flops,
            bytes_moved: 10,
            invocations: 1,
            kernel_class: KernelClass::Gemm,
            out_bytes: 4,
        }
    }

    #[test]
    fn empty_report() {
        let r = report(&Profile::default());
        assert!(r.rows.is_empty());
        assert_eq!(r.total_flops(), 0);
    }

    #[test]
    fn shares_sum_to_one() {
        let p = Profile {
            records: vec![
                rec(Stage::Gather, 300, 5),
                rec(Stage::ApplyVertex, 700, 7),
                rec(Stage::Gather, 1, 1),
            ],
            ..Default::default()
        };
        let r = report(&p);
        assert_eq!(r.rows.len(), 2);
        let sum: f64 = r.rows.iter().map(|s| s.share).sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert_eq!(r.get(Stage::Gather).unwrap().flops, 6);
        assert!(r.to_table().contains("ApplyVertex"));
    }

    #[test]
    fn zero_time_shares_are_zero() {
        let p = Profile {
            records: vec![rec(Stage::Gather, 0, 1)],
            ..Default::default()
        };
        assert_eq!(report(&p).rows[0].share, 0.0);
    }

    #[test]
    fn bytes_formula() {
        // One edge, dim 1, src‖dst: two gathered reads and two written values.
        assert_eq!(
            bytes_model(OpShape::IndexSelect {
                gathered: 2,
                written: 2
            }),
            16
        );
        assert_eq!(
            bytes_model(OpShape::IndexSelect {
                gathered: 0,
                written: 0
            }),
            0
        );
        assert_eq!(
            bytes_model(OpShape::Gemm {
                m: 2,
                k: 3,
                n: 4,
                bias: false
            }),
            4 * (6 + 12 + 8)
        );
        assert_eq!(
            bytes_model(OpShape::Gemm {
                m: 0,
                k: 0,
                n: 0,
                bias: false
            }),
            0
        );
    }

    #[test]
    fn csv_round_trip() {
        let p = Profile {
            model: "gcn".into(),
            dataset: "toy".into(),
            records: vec![rec(Stage::Gather, 3, 5), rec(Stage::ApplyVertex, 4, 6)],
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "model,dataset,layer,stage,wall_ns,flops,bytes,invocations,kernel_class,out_bytes\n"
        ));
        let back = Profile::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, vec![p]);
    }

    #[test]
    fn csv_bad_field_is_positioned() {
        let text =
            "model,dataset,layer,stage,wall_ns,flops,bytes,invocations,kernel_class,out_bytes\n\
                    gcn,x,0,Gather,1,2,3,4,SparseGemm,5\n\
                    gcn,x,0,Gather,1,abc,3,4,SparseGemm,5\n";
        let err = Profile::read_csv(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
