//! Throughput model: effective work-group throughput (EWGT) and cycles per
//! kernel execution.
//!
//! The generic expression over the nine parameters is
//!
//! ```text
//! EWGT = L * D_V / ( N_R * ( T_R + N_I * N_to * T * (P + I) ) )
//! ```
//!
//! and each configuration class uses a specialization of it:
//!
//! ```text
//! C1: L / (N_to * T * (P + I))            C4: L / (N_I * N_to * T * (P + I))
//! C2: 1 / (N_to * T * (P + I))            C5: L * D_V / (N_I * N_to * T * (P + I))
//! C3: L / (N_to * T * I)                  C0, C6: the generic expression
//! ```
//!
//! The formulas are generic over the scalar type so the same code runs in
//! `f64` for reports and in exact rational arithmetic in tests. Evaluation
//! order matches the generic expression term for term, so a specialized
//! formula is bit-identical to the generic one under its substitutions
//! (multiplying by one and adding zero are exact in IEEE arithmetic too).
//!
//! Cycles per kernel count one configuration pass of one work-group:
//! `floor(N_I * N_to * (P + I) / (L * D_V))`, except `C3` which has no
//! pipeline fill and counts `floor(N_to * I / L)`. The quotient spreads the
//! fill time across lanes, which keeps `EWGT ~ 1 / (cycles * T)` exact up to
//! the flooring.

use std::fmt;

use num_traits::Num;

use crate::ir::{ConfigClass, PerfParams};
use crate::Rate;

/// Scalar types the performance formulas run in: `f64`, rationals, etc.
pub trait PerfScalar: Num + Clone + PartialOrd {}

impl<T: Num + Clone + PartialOrd> PerfScalar for T {}

/// The parameter tuple lifted into an arbitrary scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarParams<S> {
    pub lanes: S,
    pub vector_degree: S,
    pub num_configs: S,
    pub reconfig_time: S,
    pub seq_instr_count: S,
    pub cpi: S,
    pub clock_period: S,
    pub pipeline_depth: S,
    pub work_items: S,
}

impl From<&PerfParams> for ScalarParams<f64> {
    fn from(p: &PerfParams) -> Self {
        ScalarParams {
            lanes: p.lanes as f64,
            vector_degree: p.vector_degree as f64,
            num_configs: p.num_configs as f64,
            reconfig_time: p.reconfig_time_s,
            seq_instr_count: p.seq_instr_count as f64,
            cpi: *p.cpi.numer() as f64 / *p.cpi.denom() as f64,
            clock_period: p.clock_period_s,
            pipeline_depth: p.pipeline_depth as f64,
            work_items: p.work_items as f64,
        }
    }
}

/// The generic throughput expression, evaluated exactly as written.
pub fn ewgt_generic<S: PerfScalar>(p: &ScalarParams<S>) -> S {
    let inner = p.seq_instr_count.clone()
        * p.cpi.clone()
        * p.clock_period.clone()
        * (p.pipeline_depth.clone() + p.work_items.clone());
    let denom = p.num_configs.clone() * (p.reconfig_time.clone() + inner);
    (p.lanes.clone() * p.vector_degree.clone()) / denom
}

/// The specialized throughput expression for a configuration class.
pub fn ewgt_class<S: PerfScalar>(p: &ScalarParams<S>, class: ConfigClass) -> S {
    match class {
        ConfigClass::C1 => {
            p.lanes.clone()
                / (p.cpi.clone()
                    * p.clock_period.clone()
                    * (p.pipeline_depth.clone() + p.work_items.clone()))
        }
        ConfigClass::C2 => {
            S::one()
                / (p.cpi.clone()
                    * p.clock_period.clone()
                    * (p.pipeline_depth.clone() + p.work_items.clone()))
        }
        ConfigClass::C3 => {
            p.lanes.clone() / (p.cpi.clone() * p.clock_period.clone() * p.work_items.clone())
        }
        ConfigClass::C4 => {
            p.lanes.clone()
                / (p.seq_instr_count.clone()
                    * p.cpi.clone()
                    * p.clock_period.clone()
                    * (p.pipeline_depth.clone() + p.work_items.clone()))
        }
        ConfigClass::C5 => {
            (p.lanes.clone() * p.vector_degree.clone())
                / (p.seq_instr_count.clone()
                    * p.cpi.clone()
                    * p.clock_period.clone()
                    * (p.pipeline_depth.clone() + p.work_items.clone()))
        }
        ConfigClass::C0 | ConfigClass::C6 => ewgt_generic(p),
    }
}

/// The substitutions under which a class's specialized expression equals the
/// generic one. `C3` has no pipeline, so its substitution removes the fill
/// term entirely (the depth enters as zero).
pub fn substituted<S: PerfScalar>(p: &ScalarParams<S>, class: ConfigClass) -> ScalarParams<S> {
    let mut q = p.clone();
    match class {
        ConfigClass::C1 => {
            q.num_configs = S::one();
            q.reconfig_time = S::zero();
            q.seq_instr_count = S::one();
            q.vector_degree = S::one();
        }
        ConfigClass::C2 => {
            q.num_configs = S::one();
            q.reconfig_time = S::zero();
            q.seq_instr_count = S::one();
            q.vector_degree = S::one();
            q.lanes = S::one();
        }
        ConfigClass::C3 => {
            q.num_configs = S::one();
            q.reconfig_time = S::zero();
            q.seq_instr_count = S::one();
            q.vector_degree = S::one();
            q.pipeline_depth = S::zero();
        }
        ConfigClass::C4 => {
            q.num_configs = S::one();
            q.reconfig_time = S::zero();
            q.vector_degree = S::one();
        }
        ConfigClass::C5 => {
            q.num_configs = S::one();
            q.reconfig_time = S::zero();
        }
        ConfigClass::C0 | ConfigClass::C6 => {}
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerfError {
    Invalid(String),
    ParamMismatch { class: ConfigClass, reason: String },
}

impl fmt::Display for PerfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerfError::Invalid(m) => write!(f, "invalid performance parameters: {m}"),
            PerfError::ParamMismatch { class, reason } => {
                write!(f, "parameters are inconsistent with {class}: {reason}")
            }
        }
    }
}

impl std::error::Error for PerfError {}

/// Checks that a parameter tuple is consistent with a class (the fields the
/// class's specialization fixes must hold their fixed values).
pub fn check_consistency(p: &PerfParams, class: ConfigClass) -> Result<(), PerfError> {
    let mut problems = Vec::new();
    let fixed_base = |problems: &mut Vec<String>| {
        if p.num_configs != 1 {
            problems.push(format!("N_R must be 1, got {}", p.num_configs));
        }
        if p.reconfig_time_s != 0.0 {
            problems.push(format!("T_R must be 0, got {}", p.reconfig_time_s));
        }
    };
    match class {
        ConfigClass::C1 | ConfigClass::C2 | ConfigClass::C3 => {
            fixed_base(&mut problems);
            if p.seq_instr_count != 1 {
                problems.push(format!("N_I must be 1, got {}", p.seq_instr_count));
            }
            if p.vector_degree != 1 {
                problems.push(format!("D_V must be 1, got {}", p.vector_degree));
            }
            if class == ConfigClass::C2 && p.lanes != 1 {
                problems.push(format!("L must be 1, got {}", p.lanes));
            }
            if class == ConfigClass::C3 && p.pipeline_depth != 1 {
                problems.push(format!(
                    "P must be 1 for non-pipelined kernels, got {}",
                    p.pipeline_depth
                ));
            }
        }
        ConfigClass::C4 => {
            fixed_base(&mut problems);
            if p.vector_degree != 1 {
                problems.push(format!("D_V must be 1, got {}", p.vector_degree));
            }
        }
        ConfigClass::C5 => fixed_base(&mut problems),
        ConfigClass::C0 | ConfigClass::C6 => {}
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(PerfError::ParamMismatch { class, reason: problems.join("; ") })
    }
}

/// EWGT in work-groups per second for validated parameters of a class.
pub fn ewgt(p: &PerfParams, class: ConfigClass) -> Result<Rate, PerfError> {
    p.validate().map_err(PerfError::Invalid)?;
    check_consistency(p, class)?;
    Ok(ewgt_class(&ScalarParams::<f64>::from(p), class))
}

/// Cycles for one work-group pass in one configuration, floored from the
/// exact rational count. Clamped to at least one cycle.
pub fn cycles_per_kernel(p: &PerfParams, class: ConfigClass) -> Result<u64, PerfError> {
    p.validate().map_err(PerfError::Invalid)?;
    check_consistency(p, class)?;
    Ok(cycles_unchecked(p, class))
}

fn cycles_unchecked(p: &PerfParams, class: ConfigClass) -> u64 {
    let (num, den) = cycles_ratio(p, class);
    u64::try_from((num / den).max(1)).unwrap_or(u64::MAX)
}

/// The exact unrounded cycle count as a `num/den` pair in `u128`.
pub fn cycles_ratio(p: &PerfParams, class: ConfigClass) -> (u128, u128) {
    let cpi_num = u128::from(*p.cpi.numer());
    let cpi_den = u128::from(*p.cpi.denom());
    let pi = u128::from(p.pipeline_depth) + u128::from(p.work_items);
    match class {
        ConfigClass::C3 => {
            (cpi_num * u128::from(p.work_items), cpi_den * u128::from(p.lanes))
        }
        _ => {
            let num = u128::from(p.seq_instr_count) * cpi_num * pi;
            let den = cpi_den * u128::from(p.lanes) * u128::from(p.vector_degree);
            (num, den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cpi;

    fn params(
        lanes: u64,
        d_v: u64,
        n_i: u64,
        cpi: u64,
        t: f64,
        p: u64,
        i: u64,
    ) -> PerfParams {
        PerfParams {
            lanes,
            vector_degree: d_v,
            num_configs: 1,
            reconfig_time_s: 0.0,
            seq_instr_count: n_i,
            cpi: Cpi::from_integer(cpi),
            clock_period_s: t,
            pipeline_depth: p,
            work_items: i,
        }
    }

    #[test]
    fn generic_hand_evaluation() {
        // all-ones tuple with T = 1s, P = 1, I = 1: 1/(1*(0+1*1*1*(1+1)))
        let p = params(1, 1, 1, 1, 1.0, 1, 1);
        assert_eq!(ewgt_generic(&ScalarParams::<f64>::from(&p)), 0.5);
        // I = 0 is representable at the formula level (tests only)
        let mut z = ScalarParams::<f64>::from(&p);
        z.work_items = 0.0;
        assert_eq!(ewgt_generic(&z), 1.0);
    }

    #[test]
    fn generic_with_reconfiguration() {
        // N_R = 2, T_R = 1e-3 s, inner product = 1e-3 s -> 1/(2 * 2e-3)
        let sp = ScalarParams {
            lanes: 1.0,
            vector_degree: 1.0,
            num_configs: 2.0,
            reconfig_time: 1e-3,
            seq_instr_count: 1.0,
            cpi: 1.0,
            clock_period: 1e-3,
            pipeline_depth: 0.0,
            work_items: 1.0,
        };
        assert_eq!(ewgt_generic(&sp), 250.0);
    }

    #[test]
    fn table_values_for_the_simple_kernel() {
        // calibrated clock: T = 4 ns; P = 3; I = 1000
        let c2 = params(1, 1, 1, 1, 4.0e-9, 3, 1000);
        let e2 = ewgt(&c2, ConfigClass::C2).unwrap();
        assert_eq!(e2.round() as u64, 249_252);

        let c1 = params(4, 1, 1, 1, 4.0e-9, 3, 1000);
        let e1 = ewgt(&c1, ConfigClass::C1).unwrap();
        assert_eq!(e1.round() as u64, 997_009);

        // lane scaling is exact, not approximate
        assert_eq!(e1 / e2, 4.0);
        assert_eq!(e1, 4.0 * e2);
    }

    #[test]
    fn c5_direct_substitution() {
        let c5 = params(1, 4, 4, 1, 4.0e-9, 1, 1000);
        let e5 = ewgt(&c5, ConfigClass::C5).unwrap();
        assert_eq!(e5.round() as u64, 249_750);
    }

    #[test]
    fn c2_is_the_single_lane_case_of_c1() {
        let p = params(1, 1, 1, 1, 4.0e-9, 3, 1000);
        let e1 = ewgt(&p, ConfigClass::C1).unwrap();
        let e2 = ewgt(&p, ConfigClass::C2).unwrap();
        assert_eq!(e1.to_bits(), e2.to_bits());
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(
            cycles_per_kernel(&params(1, 1, 1, 1, 4.0e-9, 3, 1000), ConfigClass::C2).unwrap(),
            1003
        );
        assert_eq!(
            cycles_per_kernel(&params(4, 1, 1, 1, 4.0e-9, 3, 1000), ConfigClass::C1).unwrap(),
            250
        );
        // no pipeline: one item per tick
        assert_eq!(
            cycles_per_kernel(&params(1, 1, 1, 1, 4.0e-9, 1, 7), ConfigClass::C3).unwrap(),
            7
        );
        // vector processor: N_I * (P + I) spread over D_V lanes
        assert_eq!(
            cycles_per_kernel(&params(1, 4, 4, 1, 4.0e-9, 1, 1000), ConfigClass::C5).unwrap(),
            1001
        );
    }

    #[test]
    fn param_mismatch_detected() {
        let p = params(4, 1, 1, 1, 4.0e-9, 3, 1000);
        assert!(matches!(
            ewgt(&p, ConfigClass::C2),
            Err(PerfError::ParamMismatch { .. })
        ));
        assert!(ewgt(&p, ConfigClass::C1).is_ok());
    }

    #[test]
    fn invalid_params_rejected_in_production() {
        let mut p = params(1, 1, 1, 1, 4.0e-9, 3, 1000);
        p.work_items = 0;
        assert!(matches!(ewgt(&p, ConfigClass::C2), Err(PerfError::Invalid(_))));
    }

    #[test]
    fn specializations_match_generic_under_substitution() {
        // spot check in f64; the acceptance suite sweeps this property
        let p = params(4, 1, 1, 1, 4.0e-9, 3, 1000);
        let sp = ScalarParams::<f64>::from(&p);
        for class in [ConfigClass::C1, ConfigClass::C2, ConfigClass::C3, ConfigClass::C4, ConfigClass::C5]
        {
            let specialized = ewgt_class(&sp, class);
            let generic = ewgt_generic(&substituted(&sp, class));
            assert_eq!(specialized.to_bits(), generic.to_bits(), "{class}");
        }
        assert_eq!(
            ewgt_class(&sp, ConfigClass::C6).to_bits(),
            ewgt_class(&sp, ConfigClass::C0).to_bits()
        );
    }

    #[test]
    fn monotonicity_spot_checks() {
        let base = params(2, 1, 3, 2, 4.0e-9, 5, 500);
        let e = |p: &PerfParams| ewgt_generic(&ScalarParams::<f64>::from(p));
        let mut more_items = base.clone();
        more_items.work_items += 1;
        assert!(e(&more_items) < e(&base));
        let mut deeper = base.clone();
        deeper.pipeline_depth += 1;
        assert!(e(&deeper) < e(&base));
        let mut slower = base.clone();
        slower.cpi = Cpi::from_integer(3);
        assert!(e(&slower) < e(&base));
        let mut more_lanes = base.clone();
        more_lanes.lanes = 4;
        assert_eq!(e(&more_lanes), 2.0 * e(&base));
        let mut wider = base.clone();
        wider.vector_degree = 2;
        assert_eq!(e(&wider), 2.0 * e(&base));
        let mut slower_clock = base.clone();
        slower_clock.clock_period_s *= 2.0;
        assert!(e(&slower_clock) < e(&base));
        let mut reconfigured = base.clone();
        reconfigured.num_configs = 2;
        assert!(e(&reconfigured) < e(&base));
        let mut stalled = base.clone();
        stalled.reconfig_time_s = 1e-3;
        assert!(e(&stalled) < e(&base));
        let mut busier = base.clone();
        busier.seq_instr_count += 1;
        assert!(e(&busier) < e(&base));
    }

    #[test]
    fn ewgt_and_cycles_are_mutually_consistent() {
        for (p, class) in [
            (params(1, 1, 1, 1, 4.0e-9, 3, 1000), ConfigClass::C2),
            (params(4, 1, 1, 1, 4.0e-9, 3, 1000), ConfigClass::C1),
            (params(2, 1, 1, 1, 4.0e-9, 1, 500), ConfigClass::C3),
            (params(1, 1, 4, 2, 4.0e-9, 1, 1000), ConfigClass::C4),
            (params(1, 4, 4, 1, 4.0e-9, 1, 1000), ConfigClass::C5),
        ] {
            let e = ewgt(&p, class).unwrap();
            let (num, den) = cycles_ratio(&p, class);
            let unrounded = num as f64 / den as f64;
            let recomputed = 1.0 / (unrounded * p.clock_period_s);
            assert!(
                (e - recomputed).abs() / recomputed < 1e-12,
                "{class}: {e} vs {recomputed}"
            );

            // floor slack: ewgt * cycles * T in [1 - lanes/(P+I), 1]
            let cycles = cycles_per_kernel(&p, class).unwrap();
            let product = e * cycles as f64 * p.clock_period_s;
            let slack = (p.lanes * p.vector_degree) as f64
                / (p.pipeline_depth + p.work_items) as f64;
            assert!(product <= 1.0 + 1e-12, "{class}: {product}");
            assert!(product >= 1.0 - slack - 1e-12, "{class}: {product}");
        }
    }
}
