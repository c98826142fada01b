//! Device profiles: per-device cost database plus clock and capacity data.
//!
//! Profile files are line-oriented text: `key = value` headers followed by a
//! CSV table of per-instruction costs. Unknown keys are rejected.
//!
//! ```text
//! name = stratix-like
//! clock_period_ns = 4.0
//! reconfig_time_ms = 1.0
//! capacity_aluts = 182400
//! capacity_regs = 364800
//! capacity_bram_bits = 14625792
//! capacity_dsps = 1288
//! seq_aluts_per_instr = 16
//! seq_regs_per_instr = 8
//! seq_instr_word_bits = 32
//! multiport_aluts = 50
//! multiport_regs = 20
//! multiport_bram_bits = 0
//! multiport_dsps = 0
//! op,width,aluts,regs,dsps,cpi
//! add,8,8,0,0,1
//! ...
//! ```
//!
//! Queries at a width with no exact row interpolate linearly between the
//! nearest bracketing rows of the same opcode, rounding each component to
//! the nearest integer; widths outside the bracketed range are errors.

use std::fmt;
use std::path::Path;

use crate::ir::{CostVector, DataType, Opcode};

/// Per-(opcode, width) cost table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostEntry {
    pub aluts: u64,
    pub regs: u64,
    pub dsps: u64,
    pub cpi: u64,
}

impl CostEntry {
    pub fn cost_vector(&self) -> CostVector {
        CostVector::new(self.aluts, self.regs, 0, self.dsps)
    }
}

/// Extra cost per instruction in a `seq` function (instruction store and
/// sequencing control logic).
#[derive(Debug, Clone, Copy, Default)]
pub struct SeqOverhead {
    pub aluts_per_instr: u64,
    pub regs_per_instr: u64,
    pub instr_word_bits: u64,
}

#[derive(Debug, Clone)]
pub struct DeviceProfile {
    pub name: String,
    /// T: clock period in seconds.
    pub clock_period_s: f64,
    /// T_R: reconfiguration time in seconds.
    pub reconfig_time_s: f64,
    /// Device totals per resource axis.
    pub capacity: CostVector,
    pub seq_overhead: SeqOverhead,
    /// Added per extra port on a multi-ported memory.
    pub multiport_overhead_per_extra_port: CostVector,
    /// Rows keyed by opcode, sorted by width, unique widths.
    entries: Vec<(Opcode, Vec<(u32, CostEntry)>)>,
}

/// A cost lookup that could not be satisfied from the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LookupError {
    UncostedOpcode { opcode: Opcode },
    UncostedWidth { opcode: Opcode, width: u32 },
}

impl fmt::Display for LookupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LookupError::UncostedOpcode { opcode } => {
                write!(f, "opcode `{opcode}` has no entry in the device cost database")
            }
            LookupError::UncostedWidth { opcode, width } => write!(
                f,
                "opcode `{opcode}` at width {width} is not covered by the device cost database \
                 (no exact or bracketing entries)"
            ),
        }
    }
}

impl std::error::Error for LookupError {}

/// Errors loading a profile file.
#[derive(Debug)]
pub enum ProfileError {
    Io(std::io::Error),
    Malformed { line: usize, message: String },
    MissingKey(&'static str),
    Invalid(String),
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::Io(e) => write!(f, "cannot read device profile: {e}"),
            ProfileError::Malformed { line, message } => {
                write!(f, "device profile line {line}: {message}")
            }
            ProfileError::MissingKey(k) => write!(f, "device profile is missing required key `{k}`"),
            ProfileError::Invalid(m) => write!(f, "invalid device profile: {m}"),
        }
    }
}

impl std::error::Error for ProfileError {}

impl DeviceProfile {
    /// Looks up (and if needed interpolates) the cost entry for an opcode at
    /// the width of `dtype`.
    pub fn entry(&self, opcode: Opcode, dtype: DataType) -> Result<CostEntry, LookupError> {
        self.entry_at_width(opcode, dtype.total_bits)
    }

    pub fn entry_at_width(&self, opcode: Opcode, width: u32) -> Result<CostEntry, LookupError> {
        let rows = self
            .entries
            .iter()
            .find(|(op, _)| *op == opcode)
            .map(|(_, rows)| rows)
            .ok_or(LookupError::UncostedOpcode { opcode })?;
        if let Some((_, e)) = rows.iter().find(|(w, _)| *w == width) {
            return Ok(*e);
        }
        let lower = rows.iter().filter(|(w, _)| *w < width).max_by_key(|(w, _)| *w);
        let upper = rows.iter().filter(|(w, _)| *w > width).min_by_key(|(w, _)| *w);
        match (lower, upper) {
            (Some((w0, e0)), Some((w1, e1))) => {
                let lerp = |a: u64, b: u64| -> u64 {
                    let a = a as i128;
                    let b = b as i128;
                    let num = (b - a) * i128::from(width - w0);
                    let den = i128::from(w1 - w0);
                    // round half away from zero
                    let half = if num >= 0 { den / 2 } else { -(den / 2) };
                    (a + (num + half) / den).max(0) as u64
                };
                Ok(CostEntry {
                    aluts: lerp(e0.aluts, e1.aluts),
                    regs: lerp(e0.regs, e1.regs),
                    dsps: lerp(e0.dsps, e1.dsps),
                    cpi: lerp(e0.cpi, e1.cpi).max(1),
                })
            }
            _ => Err(LookupError::UncostedWidth { opcode, width }),
        }
    }

    /// True if a query at `width` can be answered (exact row or bracketed).
    pub fn covers(&self, opcode: Opcode, width: u32) -> bool {
        self.entry_at_width(opcode, width).is_ok()
    }
}

const HEADER_KEYS: [&str; 14] = [
    "name",
    "clock_period_ns",
    "reconfig_time_ms",
    "capacity_aluts",
    "capacity_regs",
    "capacity_bram_bits",
    "capacity_dsps",
    "seq_aluts_per_instr",
    "seq_regs_per_instr",
    "seq_instr_word_bits",
    "multiport_aluts",
    "multiport_regs",
    "multiport_bram_bits",
    "multiport_dsps",
];

const CSV_HEADER: &str = "op,width,aluts,regs,dsps,cpi";

/// Loads and validates a device profile from `path`.
pub fn load_device_profile(path: &Path) -> Result<DeviceProfile, ProfileError> {
    let text = std::fs::read_to_string(path).map_err(ProfileError::Io)?;
    parse_device_profile(&text)
}

/// Parses a device profile from its text form.
pub fn parse_device_profile(text: &str) -> Result<DeviceProfile, ProfileError> {
    let mut keys: std::collections::HashMap<&str, (usize, String)> = Default::default();
    let mut rows: Vec<(Opcode, u32, CostEntry)> = Vec::new();
    let mut in_table = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_table {
            if line == CSV_HEADER {
                in_table = true;
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ProfileError::Malformed {
                    line: lineno,
                    message: format!(
                        "expected `key = value` or the `{CSV_HEADER}` table header, got `{line}`"
                    ),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let Some(canon) = HEADER_KEYS.iter().find(|k| **k == key) else {
                return Err(ProfileError::Malformed {
                    line: lineno,
                    message: format!("unknown key `{key}`"),
                });
            };
            if keys.insert(canon, (lineno, value.to_string())).is_some() {
                return Err(ProfileError::Malformed {
                    line: lineno,
                    message: format!("duplicate key `{key}`"),
                });
            }
        } else {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 6 {
                return Err(ProfileError::Malformed {
                    line: lineno,
                    message: format!("expected 6 comma-separated fields, got {}", fields.len()),
                });
            }
            let opcode = Opcode::from_mnemonic(fields[0]).ok_or_else(|| ProfileError::Malformed {
                line: lineno,
                message: format!("unknown opcode `{}`", fields[0]),
            })?;
            let parse_u64 = |s: &str, what: &str| -> Result<u64, ProfileError> {
                s.parse::<u64>().map_err(|_| ProfileError::Malformed {
                    line: lineno,
                    message: format!("bad {what} `{s}`"),
                })
            };
            let width = parse_u64(fields[1], "width")? as u32;
            if !(1..=64).contains(&width) {
                return Err(ProfileError::Malformed {
                    line: lineno,
                    message: format!("width {width} out of range 1..=64"),
                });
            }
            let entry = CostEntry {
                aluts: parse_u64(fields[2], "aluts")?,
                regs: parse_u64(fields[3], "regs")?,
                dsps: parse_u64(fields[4], "dsps")?,
                cpi: parse_u64(fields[5], "cpi")?,
            };
            if entry.cpi == 0 {
                return Err(ProfileError::Malformed {
                    line: lineno,
                    message: "cpi must be at least 1".into(),
                });
            }
            rows.push((opcode, width, entry));
        }
    }

    let take = |k: &'static str| -> Result<String, ProfileError> {
        keys.get(k).map(|(_, v)| v.clone()).ok_or(ProfileError::MissingKey(k))
    };
    let take_f64 = |k: &'static str| -> Result<f64, ProfileError> {
        let v = take(k)?;
        v.parse::<f64>()
            .map_err(|_| ProfileError::Invalid(format!("key `{k}`: bad number `{v}`")))
    };
    let take_u64 = |k: &'static str| -> Result<u64, ProfileError> {
        let v = take(k)?;
        v.parse::<u64>()
            .map_err(|_| ProfileError::Invalid(format!("key `{k}`: bad integer `{v}`")))
    };
    let opt_u64 = |k: &'static str| -> Result<u64, ProfileError> {
        match keys.get(k) {
            Some((_, v)) => v
                .parse::<u64>()
                .map_err(|_| ProfileError::Invalid(format!("key `{k}`: bad integer `{v}`"))),
            None => Ok(0),
        }
    };

    let name = take("name")?;
    let clock_period_ns = take_f64("clock_period_ns")?;
    if clock_period_ns.is_nan() || clock_period_ns <= 0.0 {
        return Err(ProfileError::Invalid("clock_period_ns must be positive".into()));
    }
    let reconfig_time_ms = match keys.get("reconfig_time_ms") {
        Some((_, v)) => v
            .parse::<f64>()
            .map_err(|_| ProfileError::Invalid(format!("key `reconfig_time_ms`: bad number `{v}`")))?,
        None => 0.0,
    };
    if reconfig_time_ms.is_nan() || reconfig_time_ms < 0.0 {
        return Err(ProfileError::Invalid("reconfig_time_ms must be >= 0".into()));
    }
    let capacity = CostVector::new(
        take_u64("capacity_aluts")?,
        take_u64("capacity_regs")?,
        take_u64("capacity_bram_bits")?,
        take_u64("capacity_dsps")?,
    );
    if capacity.aluts == 0 || capacity.regs == 0 || capacity.bram_bits == 0 || capacity.dsps == 0 {
        return Err(ProfileError::Invalid("all capacity components must be positive".into()));
    }
    let seq_overhead = SeqOverhead {
        aluts_per_instr: opt_u64("seq_aluts_per_instr")?,
        regs_per_instr: opt_u64("seq_regs_per_instr")?,
        instr_word_bits: opt_u64("seq_instr_word_bits")?,
    };
    let multiport = CostVector::new(
        opt_u64("multiport_aluts")?,
        opt_u64("multiport_regs")?,
        opt_u64("multiport_bram_bits")?,
        opt_u64("multiport_dsps")?,
    );

    let mut entries: Vec<(Opcode, Vec<(u32, CostEntry)>)> = Vec::new();
    for (opcode, width, entry) in rows {
        let slot = match entries.iter_mut().find(|(op, _)| *op == opcode) {
            Some((_, rows)) => rows,
            None => {
                entries.push((opcode, Vec::new()));
                &mut entries.last_mut().unwrap().1
            }
        };
        if slot.iter().any(|(w, _)| *w == width) {
            return Err(ProfileError::Invalid(format!(
                "duplicate table row for `{opcode}` at width {width}"
            )));
        }
        slot.push((width, entry));
    }
    for (_, rows) in &mut entries {
        rows.sort_by_key(|(w, _)| *w);
    }

    Ok(DeviceProfile {
        name,
        clock_period_s: clock_period_ns * 1e-9,
        reconfig_time_s: reconfig_time_ms * 1e-3,
        capacity,
        seq_overhead,
        multiport_overhead_per_extra_port: multiport,
        entries,
    })
}
