//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS line with the measured value (run with `--nocapture` to see them).

mod common;

use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::rngs::SmallRng;
use rand::{RngExt, SeedableRng};

use tirc::analysis::asap_stages;
use tirc::cost::cost_function;
use tirc::device::{load_device_profile, DeviceProfile};
use tirc::interp::{run, DataSet};
use tirc::ir::{ConfigClass, Program};
use tirc::parser::{parse_program, pretty_print};
use tirc::perf::{ewgt_class, ewgt_generic, ScalarParams};
use tirc::report::{estimate_program, format_kilo, Estimate};

use common::*;

fn device() -> DeviceProfile {
    load_device_profile(&fixture("stratix-like.dev")).expect("device profile")
}

fn load(name: &str) -> Program {
    let source = read_fixture(name);
    let program = parse_program(name, &source).expect("fixture parses");
    tirc::analysis::validate(&program).expect("fixture validates");
    program
}

fn estimate(name: &str) -> Estimate {
    estimate_program(name, &load(name), &device()).expect("estimate")
}

fn tirc_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tirc"))
}

fn random_column(rng: &mut SmallRng, n: usize) -> Vec<i128> {
    (0..n).map(|_| rng.random_range(0..(1i128 << 18))).collect()
}

fn simple_dataset(rng: &mut SmallRng, n: usize) -> DataSet {
    let mut ds = DataSet::new();
    ds.insert("main_a", random_column(rng, n));
    ds.insert("main_b", random_column(rng, n));
    ds.insert("main_c", random_column(rng, n));
    ds
}

#[test]
fn criterion_01_simple_c2_cycles_are_1003() {
    let start = Instant::now();
    let out = tirc_cmd()
        .args([
            "estimate",
            fixture("simple_c2.tir").to_str().unwrap(),
            "--device",
            fixture("stratix-like.dev").to_str().unwrap(),
            "--json",
        ])
        .output()
        .expect("spawn tirc");
    let elapsed = start.elapsed();
    assert!(out.status.success(), "estimate failed: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("\"cycles_per_kernel\":1003"),
        "expected 1003 cycles, got: {stdout}"
    );
    assert!(elapsed.as_secs_f64() < 1.0, "estimate took {elapsed:?}");
    println!("criterion 01 (simple C2 cycles/kernel = 1003, < 1s): PASS ({elapsed:?})");
}

#[test]
fn criterion_02_simple_c1_cycles_are_250() {
    let start = Instant::now();
    let out = tirc_cmd()
        .args([
            "estimate",
            fixture("simple_c1.tir").to_str().unwrap(),
            "--device",
            fixture("stratix-like.dev").to_str().unwrap(),
            "--json",
        ])
        .output()
        .expect("spawn tirc");
    let elapsed = start.elapsed();
    assert!(out.status.success(), "estimate failed: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"cycles_per_kernel\":250"), "expected 250 cycles, got: {stdout}");
    assert!(elapsed.as_secs_f64() < 1.0, "estimate took {elapsed:?}");
    println!("criterion 02 (simple C1 cycles/kernel = 250, < 1s): PASS ({elapsed:?})");
}

#[test]
fn criterion_03_ewgt_lane_scaling_is_exactly_four() {
    let c2 = estimate("simple_c2.tir");
    let c1 = estimate("simple_c1.tir");
    let ratio = c1.report.ewgt / c2.report.ewgt;
    assert_eq!(ratio, 4.0, "lane scaling must be exact in-model");
    println!("criterion 03 (EWGT(C1)/EWGT(C2) = {ratio} exactly): PASS");
}

#[test]
fn criterion_04_ewgt_absolute_values_and_k_rendering() {
    let c2 = estimate("simple_c2.tir");
    let c1 = estimate("simple_c1.tir");
    assert_eq!(c2.report.ewgt.round() as u64, 249_252);
    assert_eq!(c1.report.ewgt.round() as u64, 997_009);
    assert_eq!(format_kilo(c2.report.ewgt), "249K");
    assert_eq!(format_kilo(c1.report.ewgt), "997K");

    let human = tirc_cmd()
        .args([
            "estimate",
            fixture("simple_c2.tir").to_str().unwrap(),
            "--device",
            fixture("stratix-like.dev").to_str().unwrap(),
        ])
        .output()
        .expect("spawn tirc");
    let text = String::from_utf8(human.stdout).unwrap();
    assert!(text.contains("(249K)"), "human report must print 249K: {text}");
    println!("criterion 04 (EWGT 249,252 /s and 997,009 /s; printed 249K / 997K): PASS");
}

#[test]
fn criterion_05_resource_calibration_and_replication_linearity() {
    // 100-element memory fixture: ALUTs 82 +-5%, REGs 172 +-5%,
    // BRAM exactly 4*100*18, DSPs exactly 1.
    let e = estimate("simple_c2_mem100.tir");
    let cost = e.report.cost;
    let within = |value: u64, target: f64| (value as f64 - target).abs() <= 0.05 * target;
    assert!(within(cost.aluts, 82.0), "ALUTs {} not within 5% of 82", cost.aluts);
    assert!(within(cost.regs, 172.0), "REGs {} not within 5% of 172", cost.regs);
    assert_eq!(cost.bram_bits, 7200, "BRAM bits must be exactly 4*100*18");
    assert_eq!(cost.dsps, 1);

    // replication linearity: the 4-lane wrapper costs exactly 4x one lane
    let c1 = load("simple_c1.tir");
    let dev = device();
    let lane = cost_function(&c1, c1.function("f2").unwrap(), &dev).unwrap();
    let wrapper = cost_function(&c1, c1.function("f3").unwrap(), &dev).unwrap();
    assert_eq!(wrapper, lane.cost_scale(4).unwrap());
    assert_eq!(lane, tirc::ir::CostVector::new(82, 172, 0, 1));
    println!(
        "criterion 05 (calibration {{{}, {}, {}, {}}}; par x4 = 4x single exactly): PASS",
        cost.aluts, cost.regs, cost.bram_bits, cost.dsps
    );
}

/// The substitutions the specialized formulas are derived under, written
/// out independently of the library's own substitution helper. `C3` has no
/// pipeline fill term, so its depth enters the generic expression as zero.
fn substitute_f64(p: &ScalarParams<f64>, class: ConfigClass) -> ScalarParams<f64> {
    let mut q = p.clone();
    match class {
        ConfigClass::C1 => {
            q.num_configs = 1.0;
            q.reconfig_time = 0.0;
            q.seq_instr_count = 1.0;
            q.vector_degree = 1.0;
        }
        ConfigClass::C2 => {
            q.num_configs = 1.0;
            q.reconfig_time = 0.0;
            q.seq_instr_count = 1.0;
            q.vector_degree = 1.0;
            q.lanes = 1.0;
        }
        ConfigClass::C3 => {
            q.num_configs = 1.0;
            q.reconfig_time = 0.0;
            q.seq_instr_count = 1.0;
            q.vector_degree = 1.0;
            q.pipeline_depth = 0.0;
        }
        ConfigClass::C4 => {
            q.num_configs = 1.0;
            q.reconfig_time = 0.0;
            q.vector_degree = 1.0;
        }
        ConfigClass::C5 => {
            q.num_configs = 1.0;
            q.reconfig_time = 0.0;
        }
        _ => {}
    }
    q
}

fn substitute_big(p: &ScalarParams<BigRational>, class: ConfigClass) -> ScalarParams<BigRational> {
    let zero = BigRational::from_integer(BigInt::from(0));
    let one = BigRational::from_integer(BigInt::from(1));
    let mut q = p.clone();
    match class {
        ConfigClass::C1 => {
            q.num_configs = one.clone();
            q.reconfig_time = zero;
            q.seq_instr_count = one.clone();
            q.vector_degree = one;
        }
        ConfigClass::C2 => {
            q.num_configs = one.clone();
            q.reconfig_time = zero;
            q.seq_instr_count = one.clone();
            q.vector_degree = one.clone();
            q.lanes = one;
        }
        ConfigClass::C3 => {
            q.num_configs = one.clone();
            q.reconfig_time = zero.clone();
            q.seq_instr_count = one.clone();
            q.vector_degree = one;
            q.pipeline_depth = zero;
        }
        ConfigClass::C4 => {
            q.num_configs = one.clone();
            q.reconfig_time = zero;
            q.vector_degree = one;
        }
        ConfigClass::C5 => {
            q.num_configs = one;
            q.reconfig_time = zero;
        }
        _ => {}
    }
    q
}

#[test]
fn criterion_06_formula_reductions_are_exact() {
    let start = Instant::now();
    let mut rng = SmallRng::seed_from_u64(0xF0E1);
    let classes =
        [ConfigClass::C1, ConfigClass::C2, ConfigClass::C3, ConfigClass::C4, ConfigClass::C5];

    // f64 route: bit-exact equality
    for _ in 0..1200 {
        let p = ScalarParams {
            lanes: rng.random_range(1..=64) as f64,
            vector_degree: rng.random_range(1..=64) as f64,
            num_configs: rng.random_range(1..=8) as f64,
            reconfig_time: rng.random_range(0.0..1e-2),
            seq_instr_count: rng.random_range(1..=64) as f64,
            cpi: rng.random_range(1..=16) as f64,
            clock_period: rng.random_range(1e-10..1e-6),
            pipeline_depth: rng.random_range(1..=40) as f64,
            work_items: rng.random_range(1..=1_000_000) as f64,
        };
        for class in classes {
            let specialized = ewgt_class(&p, class);
            let generic = ewgt_generic(&substitute_f64(&p, class));
            assert_eq!(
                specialized.to_bits(),
                generic.to_bits(),
                "{class}: {specialized} vs {generic} for {p:?}"
            );
        }
        assert_eq!(
            ewgt_class(&p, ConfigClass::C6).to_bits(),
            ewgt_class(&p, ConfigClass::C0).to_bits()
        );
    }

    // exact rational route
    let big = |v: u64| BigRational::from_integer(BigInt::from(v));
    for _ in 0..1000 {
        let p = ScalarParams {
            lanes: big(rng.random_range(1..=64)),
            vector_degree: big(rng.random_range(1..=64)),
            num_configs: big(rng.random_range(1..=8)),
            reconfig_time: BigRational::new(
                BigInt::from(rng.random_range(0..1000u64)),
                BigInt::from(rng.random_range(1..1_000_000u64)),
            ),
            seq_instr_count: big(rng.random_range(1..=64)),
            cpi: BigRational::new(
                BigInt::from(rng.random_range(1..64u64)),
                BigInt::from(rng.random_range(1..16u64)),
            ),
            clock_period: BigRational::new(
                BigInt::from(rng.random_range(1..1000u64)),
                BigInt::from(rng.random_range(1..1_000_000_000u64)),
            ),
            pipeline_depth: big(rng.random_range(1..=40)),
            work_items: big(rng.random_range(1..=1_000_000)),
        };
        for class in classes {
            assert_eq!(ewgt_class(&p, class), ewgt_generic(&substitute_big(&p, class)), "{class}");
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "formula suite took {elapsed:?}");
    println!("criterion 06 (2200 tuples, all reductions exact in f64 bits and rationals): PASS ({elapsed:?})");
}

#[test]
fn criterion_07_asap_matches_longest_path_and_is_minimal() {
    let start = Instant::now();
    let mut rng = SmallRng::seed_from_u64(0xA5A9);
    let mut checked = 0usize;

    let mut check = |preds: &[Vec<usize>], lat: &[u64]| {
        let (stages, depth) = asap_stages(preds, lat);
        // schedule validity
        for (v, ps) in preds.iter().enumerate() {
            for &u in ps {
                assert!(stages[v] >= stages[u] + lat[u], "dependency violated");
            }
        }
        let oracle = longest_path(preds, lat);
        assert_eq!(depth, oracle, "ASAP depth must equal the longest path");
        if depth > 0 {
            assert!(
                !schedule_exists_within(preds, lat, depth - 1),
                "a schedule shorter than ASAP exists for {preds:?} / {lat:?}"
            );
        }
        checked += 1;
    };

    // exhaustive: every DAG on up to 4 nodes, unit and random latencies
    for n in 1..=4usize {
        for preds in all_dags(n) {
            check(&preds, &vec![1; n]);
            let lat: Vec<u64> = (0..n).map(|_| rng.random_range(1..=4)).collect();
            check(&preds, &lat);
        }
    }
    // random sampling: 10,000 DAGs on up to 8 nodes
    for _ in 0..10_000 {
        let (preds, lat) = random_dag(&mut rng, 8);
        check(&preds, &lat);
    }
    // wider graphs for the depth/longest-path equality alone
    for _ in 0..2_000 {
        let (preds, lat) = random_dag(&mut rng, 12);
        let (_, depth) = asap_stages(&preds, &lat);
        assert_eq!(depth, longest_path(&preds, &lat));
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "scheduling oracle took {elapsed:?}");
    println!("criterion 07 ({checked} DAGs: ASAP = longest path, no shorter schedule): PASS ({elapsed:?})");
}

#[test]
fn criterion_08_all_simple_configurations_agree_with_the_scalar_oracle() {
    let configs = ["simple_c4.tir", "simple_c2.tir", "simple_c1.tir", "simple_c5.tir"];
    let programs: Vec<Program> = configs.iter().map(|f| load(f)).collect();
    let mut rng = SmallRng::seed_from_u64(0x51A7);

    for round in 0..100 {
        let ds = simple_dataset(&mut rng, 1000);
        let expect = simple_kernel_oracle(
            &ds.columns["main_a"],
            &ds.columns["main_b"],
            &ds.columns["main_c"],
            2,
        );
        for (name, program) in configs.iter().zip(&programs) {
            let result = run(program, &ds).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(result.outputs["main_y"], expect, "{name} diverged on round {round}");
        }
    }
    println!("criterion 08 (C4/C2/C1/C5 identical to the scalar oracle on 100 datasets): PASS");
}

#[test]
fn criterion_09_sor_matches_the_2d_stencil_oracle() {
    let mut rng = SmallRng::seed_from_u64(0x50F2);
    let c2 = load("sor_c2.tir");
    let c1 = load("sor_c1.tir");

    // the shipped demo grid plus random grids, two sweeps each, exact
    let mut grids: Vec<Vec<i128>> = vec![DataSet::from_csv(&read_fixture("sor_grid.csv"))
        .unwrap()
        .columns["main_u"]
        .clone()];
    for _ in 0..10 {
        grids.push(random_column(&mut rng, 324));
    }
    for grid in &grids {
        let mut ds = DataSet::new();
        ds.insert("main_u", grid.clone());
        let expect = sor_oracle(grid, 2);
        let r2 = run(&c2, &ds).expect("sor_c2 runs");
        assert_eq!(r2.outputs["main_u"], expect, "sor_c2 diverged");
        assert_eq!(r2.repeats_executed, 2);
        let r1 = run(&c1, &ds).expect("sor_c1 runs");
        assert_eq!(r1.outputs["main_u"], expect, "sor_c1 diverged");
    }

    // estimates: exact lane scaling and monotone cost growth
    let e2 = estimate("sor_c2.tir");
    let e1 = estimate("sor_c1.tir");
    assert_eq!(e1.report.params.lanes, 4);
    assert_eq!(e1.report.ewgt / e2.report.ewgt, 4.0);
    assert!(
        e1.report.cost.dominates(&e2.report.cost),
        "4-lane cost {:?} must dominate single-lane {:?}",
        e1.report.cost,
        e2.report.cost
    );
    println!("criterion 09 (SOR C2/C1 = 2D oracle on 11 grids; EWGT x4 exact; cost monotone): PASS");
}

#[test]
fn criterion_10_interpreter_and_estimator_cycles_agree_on_every_fixture() {
    let mut rng = SmallRng::seed_from_u64(0xC10C);
    let grid = random_column(&mut rng, 324);
    let mut sor_ds = DataSet::new();
    sor_ds.insert("main_u", grid);

    let fixtures: Vec<(&str, DataSet)> = vec![
        ("simple_c4.tir", simple_dataset(&mut rng, 1000)),
        ("simple_c2.tir", simple_dataset(&mut rng, 1000)),
        ("simple_c1.tir", simple_dataset(&mut rng, 1000)),
        ("simple_c5.tir", simple_dataset(&mut rng, 1000)),
        ("simple_c2_mem100.tir", simple_dataset(&mut rng, 100)),
        ("simple_c2_tiny.tir", simple_dataset(&mut rng, 2)),
        ("sor_c2.tir", sor_ds.clone()),
        ("sor_c1.tir", sor_ds),
    ];

    let mut summary = String::new();
    for (name, ds) in fixtures {
        let program = load(name);
        let e = estimate(name);
        let result = run(&program, &ds).unwrap_or_else(|err| panic!("{name}: {err}"));
        let measured = result.cycles_per_iteration();
        let predicted = e.report.cycles_per_kernel;
        let tolerance = (0.01 * predicted as f64).max(1.0);
        let diff = measured.abs_diff(predicted) as f64;
        assert!(
            diff <= tolerance,
            "{name}: interpreter {measured} vs estimator {predicted} (tolerance {tolerance})"
        );
        summary.push_str(&format!(" {name}:{measured}/{predicted}"));
    }
    println!("criterion 10 (|measured - predicted| <= max(1, 1%) on every fixture):{summary} PASS");
}

#[test]
fn criterion_11_parse_print_parse_identity() {
    let start = Instant::now();

    let corpus = [
        "simple_c4.tir",
        "simple_c2.tir",
        "simple_c1.tir",
        "simple_c5.tir",
        "simple_c2_mem100.tir",
        "simple_c2_tiny.tir",
        "sor_c2.tir",
        "sor_c1.tir",
    ];
    for name in corpus {
        let p1 = parse_program(name, &read_fixture(name)).expect("fixture parses");
        let printed = pretty_print(&p1);
        let p2 = parse_program(name, &printed).expect("canonical text parses");
        assert!(p1.structurally_eq(&p2), "{name} round trip changed the program");
        assert_eq!(printed, pretty_print(&p2), "{name} print is not a fixed point");
    }

    let mut rng = SmallRng::seed_from_u64(0x11F0);
    for i in 0..1000 {
        let source = random_program_source(&mut rng);
        let p1 = match parse_program("generated.tir", &source) {
            Ok(p) => p,
            Err(diags) => panic!("generated program {i} failed to parse: {diags:?}\n{source}"),
        };
        let printed = pretty_print(&p1);
        let p2 = parse_program("generated2.tir", &printed)
            .unwrap_or_else(|d| panic!("reprint of program {i} failed: {d:?}\n{printed}"));
        assert!(p1.structurally_eq(&p2), "random program {i} round trip mismatch:\n{source}");
        assert_eq!(printed, pretty_print(&p2));
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "round-trip suite took {elapsed:?}");
    println!("criterion 11 (corpus + 1000 generated programs round-trip): PASS ({elapsed:?})");
}
