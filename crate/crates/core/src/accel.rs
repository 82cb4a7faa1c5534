//! Roofline projection of a measured profile onto hypothetical processors.
//!
//! Each record runs either on the device or on the host. A record may go to
//! the device only if the device supports its kernel class; among the
//! capable processors it goes to the one with the smaller roofline time
//! `max(flops / rate, bytes / mem_bw)`, ties going to the device. Whenever
//! two consecutive records sit on different processors, the earlier one's
//! output crosses the device's host link.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::{format_table, KernelClass, Profile, ProfileRecord, Stage};

/// Throughput and bandwidth of one processor, in units per second.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    pub name: String,
    pub dense_flops_per_s: f64,
    /// 0 means sparse products are unsupported.
    pub sparse_flops_per_s: f64,
    pub mem_bw_bytes_per_s: f64,
    pub host_link_bytes_per_s: f64,
    pub supports_index_select: bool,
}

const KEYS: [&str; 6] = [
    "name",
    "dense_flops_per_s",
    "sparse_flops_per_s",
    "mem_bw_bytes_per_s",
    "host_link_bytes_per_s",
    "supports_index_select",
];

impl DeviceModel {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("dense_flops_per_s", self.dense_flops_per_s),
            ("sparse_flops_per_s", self.sparse_flops_per_s),
            ("mem_bw_bytes_per_s", self.mem_bw_bytes_per_s),
            ("host_link_bytes_per_s", self.host_link_bytes_per_s),
        ];
        if let Some((k, v)) = rates.iter().find(|(_, v)| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "device {}: {k} = {v} must be >= 0",
                self.name
            )));
        }
        if self.dense_flops_per_s == 0.0
            && self.sparse_flops_per_s == 0.0
            && !self.supports_index_select
        {
            return Err(Error::InvalidParameter(format!(
                "device {} has no usable capability",
                self.name
            )));
        }
        Ok(())
    }

    /// Multicore-CPU-like host able to run every kernel class.
    pub fn default_host() -> Self {
        Self {
            name: "host".into(),
            dense_flops_per_s: 2.0e11,
            sparse_flops_per_s: 2.0e10,
            mem_bw_bytes_per_s: 5.0e10,
            host_link_bytes_per_s: f64::INFINITY,
            supports_index_select: true,
        }
    }

    /// Highest dense rate and memory bandwidth, no sparse or gather support,
    /// narrow host link.
    pub fn tpu_like() -> Self {
        Self {
            name: "tpu-like".into(),
            dense_flops_per_s: 1.0e14,
            sparse_flops_per_s: 0.0,
            mem_bw_bytes_per_s: 1.2e12,
            host_link_bytes_per_s: 8.0e9,
            supports_index_select: false,
        }
    }

    /// Lower dense rate than [`DeviceModel::tpu_like`] but supports every
    /// kernel class.
    pub fn gpu_like() -> Self {
        Self {
            name: "gpu-like".into(),
            dense_flops_per_s: 1.5e13,
            sparse_flops_per_s: 1.0e12,
            mem_bw_bytes_per_s: 9.0e11,
            host_link_bytes_per_s: 1.6e10,
            supports_index_select: true,
        }
    }

    /// Same device with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            name: self.name.clone(),
            dense_flops_per_s: self.dense_flops_per_s * factor,
            sparse_flops_per_s: self.sparse_flops_per_s * factor,
            mem_bw_bytes_per_s: self.mem_bw_bytes_per_s * factor,
            host_link_bytes_per_s: self.host_link_bytes_per_s * factor,
            supports_index_select: self.supports_index_select,
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. All six keys are
    /// required. Rates accept `inf`.
    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut name = None;
        let mut rates = [None; 4];
        let mut index_select = None;
        let mut last = 0;
        for (i, line) in input.lines().enumerate() {
            let no = i + 1;
            last = no;
            let line = line.map_err(|e| Error::parse(no, format!("unreadable line: {e}")))?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::parse(no, format!("expected `key = value`, got `{body}`")))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "name" => name = Some(v.to_string()),
                "supports_index_select" => {
                    index_select = Some(match v.to_ascii_lowercase().as_str() {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => {
                            return Err(Error::parse(
                                no,
                                format!("supports_index_select: expected true/false, got `{v}`"),
                            ))
                        }
                    })
                }
                _ => {
                    let slot = KEYS[1..5]
                        .iter()
                        .position(|key| *key == k)
                        .ok_or_else(|| Error::parse(no, format!("unknown key `{k}`")))?;
                    let rate: f64 = v.parse().map_err(|_| {
                        Error::parse(no, format!("{k}: expected a number, got `{v}`"))
                    })?;
                    if rate.is_nan() || rate < 0.0 {
                        return Err(Error::parse(
                            no,
                            format!("{k}: rate must be >= 0, got `{v}`"),
                        ));
                    }
                    rates[slot] = Some(rate);
                }
            }
        }
        let missing = |k: &str| Error::parse(last, format!("missing key `{k}`"));
        let d = DeviceModel {
            name: name.ok_or_else(|| missing("name"))?,
            dense_flops_per_s: rates[0].ok_or_else(|| missing(KEYS[1]))?,
            sparse_flops_per_s: rates[1].ok_or_else(|| missing(KEYS[2]))?,
            mem_bw_bytes_per_s: rates[2].ok_or_else(|| missing(KEYS[3]))?,
            host_link_bytes_per_s: rates[3].ok_or_else(|| missing(KEYS[4]))?,
            supports_index_select: index_select.ok_or_else(|| missing(KEYS[5]))?,
        };
        d.validate()
            .map_err(|e| Error::parse(last, e.to_string()))?;
        Ok(d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file)).map_err(|e| e.at_path(path))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("device file", e);
        writeln!(out, "name = {}", self.name).map_err(io)?;
        writeln!(out, "dense_flops_per_s = {:e}", self.dense_flops_per_s).map_err(io)?;
        writeln!(out, "sparse_flops_per_s = {:e}", self.sparse_flops_per_s).map_err(io)?;
        writeln!(out, "mem_bw_bytes_per_s = {:e}", self.mem_bw_bytes_per_s).map_err(io)?;
        writeln!(
            out,
            "host_link_bytes_per_s = {:e}",
            self.host_link_bytes_per_s
        )
        .map_err(io)?;
        writeln!(
            out,
            "supports_index_select = {}",
            self.supports_index_select
        )
        .map_err(io)
    }

    /// Compute rate for a kernel class, or `None` if unsupported.
    fn rate(&self, class: KernelClass) -> Option<f64> {
        match class {
            KernelClass::Gemm | KernelClass::Gemv | KernelClass::CellStep => {
                Some(self.dense_flops_per_s)
            }
            KernelClass::SparseGemm => Some(self.sparse_flops_per_s),
            KernelClass::IndexSelection => {
                self.supports_index_select.then_some(self.dense_flops_per_s)
            }
        }
    }

    /// Roofline time of one record, or `None` if this processor cannot run it.
    pub fn record_time(&self, r: &ProfileRecord) -> Option<f64> {
        let rate = self.rate(r.kernel_class)?;
        let compute = ratio(r.flops, rate)?;
        let memory = ratio(r.bytes_moved, self.mem_bw_bytes_per_s)?;
        Some(compute.max(memory))
    }
}

/// `amount / rate`, with zero work free and positive work on a zero rate
/// impossible.
fn ratio(amount: u64, rate: f64) -> Option<f64> {
    if amount == 0 {
        Some(0.0)
    } else if rate > 0.0 {
        Some(amount as f64 / rate)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Processor {
    Device,
    Host,
}

impl fmt::Display for Processor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Processor::Device => "device",
            Processor::Host => "host",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    /// One entry per profile record, in record order.
    pub assignment: Vec<Processor>,
    pub transfer_bytes: u64,
}

/// Projected seconds for one device.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub device: String,
    /// Indexed like [`Stage::ALL`].
    pub stage_s: [f64; 4],
    pub transfer_s: f64,
    pub placement: Placement,
}

fn stage_slot(stage: Stage) -> usize {
    Stage::ALL.iter().position(|&s| s == stage).unwrap()
}

impl Projection {
    pub fn stage(&self, stage: Stage) -> f64 {
        self.stage_s[stage_slot(stage)]
    }

    pub fn total_s(&self) -> f64 {
        self.stage_s.iter().sum::<f64>() + self.transfer_s
    }

    /// `(device, host)` record counts placed in `stage`.
    pub fn placed(&self, profile: &Profile, stage: Stage) -> (usize, usize) {
        let mut counts = (0, 0);
        for (r, p) in profile.records.iter().zip(&self.placement.assignment) {
            if r.stage == stage {
                match p {
                    Processor::Device => counts.0 += 1,
                    Processor::Host => counts.1 += 1,
                }
            }
        }
        counts
    }
}

pub fn project(profile: &Profile, device: &DeviceModel, host: &DeviceModel) -> Result<Projection> {
    device.validate()?;
    host.validate()?;
    let mut stage_s = [0.0; 4];
    let mut assignment = Vec::with_capacity(profile.records.len());
    for r in &profile.records {
        let (proc, t) = match (device.record_time(r), host.record_time(r)) {
            (Some(d), Some(h)) if d <= h => (Processor::Device, d),
            (Some(d), None) => (Processor::Device, d),
            (_, Some(h)) => (Processor::Host, h),
            (None, None) => {
                return Err(Error::Config(format!(
                    "neither {} nor {} can run layer {} {} ({})",
                    device.name, host.name, r.layer, r.stage, r.kernel_class
                )))
            }
        };
        stage_s[stage_slot(r.stage)] += t;
        assignment.push(proc);
    }
    let mut transfer_bytes = 0;
    for (w, r) in assignment.windows(2).zip(&profile.records) {
        if w[0] != w[1] {
            transfer_bytes += r.out_bytes;
        }
    }
    let transfer_s = if transfer_bytes == 0 {
        0.0
    } else if device.host_link_bytes_per_s > 0.0 {
        transfer_bytes as f64 / device.host_link_bytes_per_s
    } else {
        return Err(Error::Config(format!(
            "device {} has no host link but needs transfers",
            device.name
        )));
    };
    Ok(Projection {
        device: device.name.clone(),
        stage_s,
        transfer_s,
        placement: Placement {
            assignment,
            transfer_bytes,
        },
    })
}

/// Projections of one profile on several devices plus the winners.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub projections: Vec<Projection>,
    /// Devices with the smallest time, per stage, ties included.
    pub stage_winners: Vec<(Stage, Vec<String>)>,
    pub total_winners: Vec<String>,
    /// Devices that win ApplyVertex but not Total.
    pub flagged: Vec<String>,
}

fn winners<'a>(projections: &'a [Projection], time: impl Fn(&Projection) -> f64) -> Vec<String> {
    let best = projections.iter().map(&time).fold(f64::INFINITY, f64::min);
    projections
        .iter()
        .filter(|p| time(p) <= best)
        .map(|p: &'a Projection| p.device.clone())
        .collect()
}

pub fn compare(
    profile: &Profile,
    devices: &[DeviceModel],
    host: &DeviceModel,
) -> Result<Comparison> {
    let projections = devices
        .iter()
        .map(|d| project(profile, d, host))
        .collect::<Result<Vec<_>>>()?;
    let stage_winners: Vec<(Stage, Vec<String>)> = Stage::ALL
        .into_iter()
        .map(|s| (s, winners(&projections, |p| p.stage(s))))
        .collect();
    let total_winners = winners(&projections, Projection::total_s);
    let totals: HashSet<&String> = total_winners.iter().collect();
    let flagged = stage_winners[stage_slot(Stage::ApplyVertex)]
        .1
        .iter()
        .filter(|d| !totals.contains(d))
        .cloned()
        .collect();
    Ok(Comparison {
        projections,
        stage_winners,
        total_winners,
        flagged,
    })
}

/// Columns of the projection CSV.
pub const PROJECTION_COLUMNS: [&str; 9] = [
    "model",
    "dataset",
    "device",
    "stage",
    "projected_s",
    "device_records",
    "host_records",
    "winner",
    "note",
];

impl Comparison {
    fn rows(&self, profile: &Profile) -> Vec<[String; 9]> {
        let mut rows = Vec::new();
        let win = |list: &[String], d: &str| {
            if list.iter().any(|x| x == d) {
                "1"
            } else {
                "0"
            }
            .to_string()
        };
        for p in &self.projections {
            for (s, stage_w) in &self.stage_winners {
                let (on_dev, on_host) = p.placed(profile, *s);
                rows.push([
                    profile.model.clone(),
                    profile.dataset.clone(),
                    p.device.clone(),
                    s.to_string(),
                    format!("{:.6e}", p.stage(*s)),
                    on_dev.to_string(),
                    on_host.to_string(),
                    win(stage_w, &p.device),
                    String::new(),
                ]);
            }
            rows.push([
                profile.model.clone(),
                profile.dataset.clone(),
                p.device.clone(),
                "Transfer".into(),
                format!("{:.6e}", p.transfer_s),
                String::new(),
                String::new(),
                String::new(),
                format!("{} bytes", p.placement.transfer_bytes),
            ]);
            let note = if self.flagged.contains(&p.device) {
                "wins ApplyVertex but not Total".to_string()
            } else {
                String::new()
            };
            let (d, h) = p
                .placement
                .assignment
                .iter()
                .fold((0, 0), |(d, h), x| match x {
                    Processor::Device => (d + 1, h),
                    Processor::Host => (d, h + 1),
                });
            rows.push([
                profile.model.clone(),
                profile.dataset.clone(),
                p.device.clone(),
                "Total".into(),
                format!("{:.6e}", p.total_s()),
                d.to_string(),
                h.to_string(),
                win(&self.total_winners, &p.device),
                note,
            ]);
        }
        rows
    }

    /// CSV rows for `profile`, with the header row when `header` is set.
    pub fn write_csv<W: Write>(&self, profile: &Profile, out: W, header: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if header {
            w.write_record(PROJECTION_COLUMNS)?;
        }
        for r in self.rows(profile) {
            w.write_record(&r)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn to_table(&self, profile: &Profile) -> String {
        format_table(&PROJECTION_COLUMNS, &self.rows(profile))
    }
}
