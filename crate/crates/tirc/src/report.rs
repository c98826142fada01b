//! Estimate assembly and report emission.
//!
//! One estimate bundles the configuration class, the extracted performance
//! parameters, the cost breakdown, cycles per kernel, and the throughput.
//! Reports come in two shapes with identical numbers:
//!
//! * a fixed-width human table with rows in the order ALUTs, REGs,
//!   BRAM(bits), DSPs, Cycles/Kernel, EWGT;
//! * a machine JSON document, hand-emitted so that identical inputs yield
//!   byte-identical output: keys in fixed order, integers plain, rates in
//!   scientific notation with six significant digits. Exact rationals (the
//!   CPI) are JSON strings.

use std::fmt;
use std::fmt::Write as _;

use crate::analysis::{classify_config, extract_perf_params, ParamError};
use crate::cost::{cost_program, CostBreakdown, CostError};
use crate::device::DeviceProfile;
use crate::ir::{EstimateReport, Program};
use crate::perf::{cycles_per_kernel, ewgt, PerfError};

#[derive(Debug)]
pub enum EstimateError {
    Param(ParamError),
    Cost(CostError),
    Perf(PerfError),
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateError::Param(e) => write!(f, "{e}"),
            EstimateError::Cost(e) => write!(f, "{e}"),
            EstimateError::Perf(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EstimateError {}

/// A full estimate for one program on one device.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub file: String,
    pub report: EstimateReport,
    pub breakdown: CostBreakdown,
}

/// Classifies, extracts parameters, costs, and evaluates the throughput
/// model for a validated program.
pub fn estimate_program(
    file: &str,
    program: &Program,
    device: &DeviceProfile,
) -> Result<Estimate, EstimateError> {
    let config = classify_config(program);
    let params = extract_perf_params(program, device).map_err(EstimateError::Param)?;
    let breakdown = cost_program(program, device).map_err(EstimateError::Cost)?;
    let rate = ewgt(&params, config).map_err(EstimateError::Perf)?;
    let cycles = cycles_per_kernel(&params, config).map_err(EstimateError::Perf)?;
    let fits = breakdown.total.fits_within(&device.capacity);
    Ok(Estimate {
        file: file.to_string(),
        report: EstimateReport {
            config,
            params,
            cost: breakdown.total,
            cycles_per_kernel: cycles,
            ewgt: rate,
            device: device.name.clone(),
            fits,
        },
        breakdown,
    })
}

/// Scientific notation with six significant digits (`2.49252e5`).
pub fn format_rate(v: f64) -> String {
    format!("{v:.5e}")
}

/// Thousands with three significant digits, matching how throughput tables
/// are usually quoted (`249K`, `57.4K`, `0.853K`).
pub fn format_kilo(v: f64) -> String {
    let k = v / 1000.0;
    if k >= 100.0 {
        format!("{k:.0}K")
    } else if k >= 10.0 {
        format!("{k:.1}K")
    } else if k >= 1.0 {
        format!("{k:.2}K")
    } else {
        format!("{k:.3}K")
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// The human-readable estimate report.
pub fn human_estimate(e: &Estimate, device: &DeviceProfile) -> String {
    let r = &e.report;
    let p = &r.params;
    let mut out = String::new();
    let _ = writeln!(out, "file:    {}", e.file);
    let _ = writeln!(out, "device:  {} (T = {} s)", r.device, format_rate(p.clock_period_s));
    let _ = writeln!(out, "config:  {}", r.config);
    let _ = writeln!(
        out,
        "params:  L={} D_V={} N_R={} T_R={} s N_I={} N_to={} P={} I={}",
        p.lanes,
        p.vector_degree,
        p.num_configs,
        format_rate(p.reconfig_time_s),
        p.seq_instr_count,
        p.cpi,
        p.pipeline_depth,
        p.work_items
    );
    out.push('\n');
    let cap = &device.capacity;
    let _ = writeln!(out, "  ALUTs         {:>10} / {}", r.cost.aluts, cap.aluts);
    let _ = writeln!(out, "  REGs          {:>10} / {}", r.cost.regs, cap.regs);
    let _ = writeln!(out, "  BRAM(bits)    {:>10} / {}", r.cost.bram_bits, cap.bram_bits);
    let _ = writeln!(out, "  DSPs          {:>10} / {}", r.cost.dsps, cap.dsps);
    let _ = writeln!(out, "  Cycles/Kernel {:>10}", r.cycles_per_kernel);
    let _ = writeln!(
        out,
        "  EWGT          {:>10} /s ({})",
        r.ewgt.round() as u64,
        format_kilo(r.ewgt)
    );
    out.push('\n');
    let _ = writeln!(out, "fits: {}", if r.fits { "yes" } else { "no" });
    out
}

fn json_report_object(out: &mut String, e: &Estimate) {
    let r = &e.report;
    let p = &r.params;
    let _ = write!(out, "{{\"file\":\"{}\",", json_escape(&e.file));
    let _ = write!(out, "\"device\":\"{}\",", json_escape(&r.device));
    let _ = write!(out, "\"config\":\"{}\",", r.config);
    let _ = write!(
        out,
        "\"params\":{{\"lanes\":{},\"vector_degree\":{},\"num_configs\":{},\"reconfig_time_s\":{},\"seq_instr_count\":{},\"cpi\":\"{}\",\"clock_period_s\":{},\"pipeline_depth\":{},\"work_items\":{}}},",
        p.lanes,
        p.vector_degree,
        p.num_configs,
        format_rate(p.reconfig_time_s),
        p.seq_instr_count,
        p.cpi,
        format_rate(p.clock_period_s),
        p.pipeline_depth,
        p.work_items
    );
    let _ = write!(
        out,
        "\"cost\":{{\"aluts\":{},\"regs\":{},\"bram_bits\":{},\"dsps\":{}}},",
        r.cost.aluts, r.cost.regs, r.cost.bram_bits, r.cost.dsps
    );
    let _ = write!(out, "\"cycles_per_kernel\":{},", r.cycles_per_kernel);
    let _ = write!(out, "\"ewgt_per_s\":{},", format_rate(r.ewgt));
    let _ = write!(out, "\"ewgt_k\":\"{}\",", format_kilo(r.ewgt));
    let _ = write!(out, "\"fits\":{}}}", r.fits);
}

/// The machine-readable estimate document.
pub fn json_estimate(tool_version: &str, e: &Estimate) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"tool_version\":\"{}\",\"command\":\"estimate\",\"reports\":[",
        json_escape(tool_version)
    );
    json_report_object(&mut out, e);
    out.push_str("]}\n");
    out
}

/// Per-metric ratios B/A in report row order. `None` marks a ratio with a
/// zero denominator and nonzero numerator.
pub fn ratios(a: &Estimate, b: &Estimate) -> Vec<(&'static str, Option<f64>)> {
    let pairs: [(&'static str, f64, f64); 6] = [
        ("aluts", a.report.cost.aluts as f64, b.report.cost.aluts as f64),
        ("regs", a.report.cost.regs as f64, b.report.cost.regs as f64),
        ("bram_bits", a.report.cost.bram_bits as f64, b.report.cost.bram_bits as f64),
        ("dsps", a.report.cost.dsps as f64, b.report.cost.dsps as f64),
        (
            "cycles_per_kernel",
            a.report.cycles_per_kernel as f64,
            b.report.cycles_per_kernel as f64,
        ),
        ("ewgt", a.report.ewgt, b.report.ewgt),
    ];
    pairs
        .into_iter()
        .map(|(name, va, vb)| {
            let ratio = if va == 0.0 && vb == 0.0 {
                Some(1.0)
            } else if va == 0.0 {
                None
            } else {
                Some(vb / va)
            };
            (name, ratio)
        })
        .collect()
}

/// The human-readable comparison report: both estimates side by side plus a
/// ratio column.
pub fn human_compare(a: &Estimate, b: &Estimate, device: &DeviceProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "A: {} ({})", a.file, a.report.config);
    let _ = writeln!(out, "B: {} ({})", b.file, b.report.config);
    let _ = writeln!(out, "device: {}", device.name);
    out.push('\n');
    let _ = writeln!(out, "  {:<14}{:>14}{:>14}{:>10}", "metric", "A", "B", "B/A");
    let rows = [
        ("ALUTs", a.report.cost.aluts.to_string(), b.report.cost.aluts.to_string()),
        ("REGs", a.report.cost.regs.to_string(), b.report.cost.regs.to_string()),
        ("BRAM(bits)", a.report.cost.bram_bits.to_string(), b.report.cost.bram_bits.to_string()),
        ("DSPs", a.report.cost.dsps.to_string(), b.report.cost.dsps.to_string()),
        (
            "Cycles/Kernel",
            a.report.cycles_per_kernel.to_string(),
            b.report.cycles_per_kernel.to_string(),
        ),
        (
            "EWGT",
            format!("{}", a.report.ewgt.round() as u64),
            format!("{}", b.report.ewgt.round() as u64),
        ),
    ];
    for ((label, va, vb), (_, ratio)) in rows.iter().zip(ratios(a, b)) {
        let ratio_text = match ratio {
            Some(r) => format!("{r:.2}"),
            None => "n/a".to_string(),
        };
        let _ = writeln!(out, "  {label:<14}{va:>14}{vb:>14}{ratio_text:>10}");
    }
    out
}

/// The machine-readable comparison document.
pub fn json_compare(tool_version: &str, a: &Estimate, b: &Estimate) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"tool_version\":\"{}\",\"command\":\"compare\",\"reports\":[",
        json_escape(tool_version)
    );
    json_report_object(&mut out, a);
    out.push(',');
    json_report_object(&mut out, b);
    out.push_str("],\"ratios\":{");
    let mut first = true;
    for (name, ratio) in ratios(a, b) {
        if !first {
            out.push(',');
        }
        first = false;
        match ratio {
            Some(r) => {
                let _ = write!(out, "\"{name}\":{}", format_rate(r));
            }
            None => {
                let _ = write!(out, "\"{name}\":null");
            }
        }
    }
    out.push_str("}}\n");
    out
}
