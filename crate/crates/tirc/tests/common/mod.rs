//! Shared test support: independent oracles and random generators.
//!
//! Everything here is deliberately written without reference to the
//! implementation it checks: the longest-path and schedule searches work on
//! raw edge lists, the kernel oracles are direct scalar loops, and the
//! program generator emits source text from the grammar.

// each test binary compiles this module and uses a different subset
#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::SmallRng;
use rand::RngExt;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    let path = fixture(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// scalar oracles

/// Direct evaluation of the simple kernel loop: y(n) = K + ((a+b) * (c+c)),
/// wrapping at 18 bits like the hardware datapath.
pub fn simple_kernel_oracle(a: &[i128], b: &[i128], c: &[i128], k: i128) -> Vec<i128> {
    const M: i128 = 1 << 18;
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((&a, &b), &c)| {
            let s1 = (a + b) % M;
            let s2 = (c + c) % M;
            let prod = (s1 * s2) % M;
            (k + prod) % M
        })
        .collect()
}

/// Independent 2D implementation of the relaxation sweep on an 18x18 grid:
/// interior cells become (4*center + n + s + w + e) / 8 with 18-bit
/// wrap-around, boundary cells copy through.
pub fn sor_oracle(grid: &[i128], iterations: u64) -> Vec<i128> {
    const N: usize = 18;
    const M: i128 = 1 << 18;
    assert_eq!(grid.len(), N * N);
    let mut u: Vec<Vec<i128>> = (0..N).map(|i| grid[i * N..(i + 1) * N].to_vec()).collect();
    for _ in 0..iterations {
        let mut v = u.clone();
        for i in 0..N {
            for j in 0..N {
                if i == 0 || i == N - 1 || j == 0 || j == N - 1 {
                    v[i][j] = u[i][j];
                } else {
                    let sum =
                        ((4 * u[i][j]) % M + u[i - 1][j] + u[i + 1][j] + u[i][j - 1] + u[i][j + 1])
                            % M;
                    v[i][j] = sum >> 3;
                }
            }
        }
        u = v;
    }
    u.into_iter().flatten().collect()
}

// ---------------------------------------------------------------------------
// scheduling oracles

/// Latency-weighted longest path through a DAG given as predecessor lists
/// (computed forward over successors, the opposite direction from the
/// scheduler's recurrence).
pub fn longest_path(preds: &[Vec<usize>], lat: &[u64]) -> u64 {
    let n = preds.len();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, ps) in preds.iter().enumerate() {
        for &u in ps {
            succs[u].push(v);
        }
    }
    // path weight from each node to any sink, over nodes in reverse order
    let mut from = vec![0u64; n];
    let mut best = 0;
    for v in (0..n).rev() {
        let tail = succs[v].iter().map(|&s| from[s]).max().unwrap_or(0);
        from[v] = lat[v] + tail;
        best = best.max(from[v]);
    }
    best
}

/// Exhaustive (pruned) search for a valid stage assignment of depth at most
/// `target`. Every pruning bound is implied by validity, so a `false` answer
/// really means no such schedule exists.
pub fn schedule_exists_within(preds: &[Vec<usize>], lat: &[u64], target: u64) -> bool {
    let n = preds.len();
    if n == 0 {
        return true;
    }
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, ps) in preds.iter().enumerate() {
        for &u in ps {
            succs[u].push(v);
        }
    }
    let mut tail = vec![0u64; n]; // longest path starting at v, inclusive
    for v in (0..n).rev() {
        tail[v] = lat[v] + succs[v].iter().map(|&s| tail[s]).max().unwrap_or(0);
    }

    fn search(
        v: usize,
        stages: &mut Vec<u64>,
        preds: &[Vec<usize>],
        lat: &[u64],
        tail: &[u64],
        target: u64,
    ) -> bool {
        if v == preds.len() {
            return true;
        }
        let lower = preds[v].iter().map(|&u| stages[u] + lat[u]).max().unwrap_or(1);
        // a node must still fit its downstream chain before the target
        if tail[v] > target || lower > target - tail[v] + 1 {
            return false;
        }
        let upper = target - tail[v] + 1;
        for s in lower..=upper {
            stages[v] = s;
            if search(v + 1, stages, preds, lat, tail, target) {
                return true;
            }
        }
        false
    }

    let mut stages = vec![0u64; n];
    search(0, &mut stages, preds, lat, &tail, target)
}

/// All DAGs on `n` topologically ordered nodes, as predecessor lists (every
/// subset of the upper-triangular edge set).
pub fn all_dags(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    let mut out = Vec::new();
    for bits in 0u32..(1 << edges.len()) {
        let mut preds = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            if bits & (1 << i) != 0 {
                preds[v].push(u);
            }
        }
        out.push(preds);
    }
    out
}

/// A random DAG with edges pointing forward in node order.
pub fn random_dag(rng: &mut SmallRng, max_nodes: usize) -> (Vec<Vec<usize>>, Vec<u64>) {
    let n = rng.random_range(1..=max_nodes);
    let mut preds = vec![Vec::new(); n];
    for (v, ps) in preds.iter_mut().enumerate() {
        for u in 0..v {
            if rng.random_bool(0.35) {
                ps.push(u);
            }
        }
    }
    let lat = (0..n).map(|_| rng.random_range(1..=4)).collect();
    (preds, lat)
}

// ---------------------------------------------------------------------------
// grammar-driven random program source

pub struct ProgramGen {
    pub memories: Vec<String>,
    pub streams: Vec<String>,
    pub counters: Vec<String>,
    pub functions: Vec<String>,
}

fn random_type(rng: &mut SmallRng) -> String {
    match rng.random_range(0..3) {
        0 => format!("ui{}", rng.random_range(1..=64)),
        1 => format!("i{}", rng.random_range(1..=64)),
        _ => {
            let total = rng.random_range(2..=64);
            let frac = rng.random_range(0..total);
            format!("fix{total}.{frac}")
        }
    }
}

fn maybe_comment(rng: &mut SmallRng, out: &mut String) {
    if rng.random_bool(0.15) {
        out.push_str("  ; generated\n");
    }
}

/// Emits a random grammatically valid program: names resolve and `main`
/// exists, but SSA and types are unconstrained (those are analysis-level
/// properties, not grammar-level ones).
pub fn random_program_source(rng: &mut SmallRng) -> String {
    let mut out = String::from("launch {\n");
    let mut gen = ProgramGen {
        memories: Vec::new(),
        streams: Vec::new(),
        counters: Vec::new(),
        functions: Vec::new(),
    };

    for i in 0..rng.random_range(0..4usize) {
        let name = format!("m{i}");
        out.push_str(&format!(
            "  @{name} = memobj {}, size {}, addrspace({})\n",
            random_type(rng),
            rng.random_range(1..=50),
            rng.random_range(1..=5)
        ));
        gen.memories.push(name);
        maybe_comment(rng, &mut out);
    }
    if !gen.memories.is_empty() {
        for i in 0..rng.random_range(0..6usize) {
            let name = format!("s{i}");
            let mem = &gen.memories[rng.random_range(0..gen.memories.len())];
            let dir = if rng.random_bool(0.5) { "read" } else { "write" };
            out.push_str(&format!("  @{name} = streamobj {}, {dir} @{mem}", random_type(rng)));
            if rng.random_bool(0.4) {
                out.push_str(&format!(", offset {}", rng.random_range(-60..=60i64)));
            }
            out.push('\n');
            gen.streams.push(name);
        }
    }
    for i in 0..rng.random_range(0..3usize) {
        let name = format!("c{i}");
        out.push_str(&format!("  @{name} = counter {}", rng.random_range(1..=100)));
        if !gen.counters.is_empty() && rng.random_bool(0.5) {
            let parent = &gen.counters[rng.random_range(0..gen.counters.len())];
            out.push_str(&format!(", nest @{parent}"));
        }
        out.push('\n');
        gen.counters.push(name);
    }
    out.push_str("  call @main\n}\n");

    let n_funcs = rng.random_range(1..=4usize);
    for i in 0..=n_funcs {
        let name = if i == n_funcs { "main".to_string() } else { format!("fn{i}") };
        let kind = ["pipe", "par", "seq", "comb"][rng.random_range(0..4)];
        out.push_str(&format!("\ndefine {kind} void @{name} ("));
        let n_ports = rng.random_range(0..=5usize);
        for p in 0..n_ports {
            if p > 0 {
                out.push_str(", ");
            }
            let pkind = ["streamin", "streamout", "scalarin"][rng.random_range(0..3)];
            out.push_str(&format!("{} %p{p}, {pkind}", random_type(rng)));
            match rng.random_range(0..4) {
                0 if !gen.streams.is_empty() => {
                    let s = &gen.streams[rng.random_range(0..gen.streams.len())];
                    out.push_str(&format!(" @{s}"));
                }
                1 if !gen.counters.is_empty() => {
                    let c = &gen.counters[rng.random_range(0..gen.counters.len())];
                    out.push_str(&format!(" @{c}"));
                }
                2 => out.push_str(&format!(" {}", rng.random_range(-100..=100i64))),
                _ => {}
            }
        }
        out.push(')');
        if rng.random_bool(0.3) {
            out.push_str(&format!(" repeat {}", rng.random_range(1..=5u64)));
        }
        out.push_str(" {\n");
        for b in 0..rng.random_range(0..6usize) {
            let call_possible = !gen.functions.is_empty();
            if call_possible && rng.random_bool(0.3) {
                let target = &gen.functions[rng.random_range(0..gen.functions.len())];
                out.push_str(&format!("  call @{target} ("));
                let n_args = rng.random_range(0..4usize);
                for a in 0..n_args {
                    if a > 0 {
                        out.push_str(", ");
                    }
                    random_operand(rng, &gen, &mut out);
                }
                out.push_str(")\n");
            } else {
                let op = ["add", "sub", "mul", "div", "shl", "shr", "and", "or", "xor", "cmp"]
                    [rng.random_range(0..10)];
                out.push_str(&format!("  %v{b} = {op} {} ", random_type(rng)));
                random_operand(rng, &gen, &mut out);
                out.push_str(", ");
                random_operand(rng, &gen, &mut out);
                out.push('\n');
            }
            maybe_comment(rng, &mut out);
        }
        out.push_str("}\n");
        gen.functions.push(name);
    }
    out
}

fn random_operand(rng: &mut SmallRng, gen: &ProgramGen, out: &mut String) {
    match rng.random_range(0..3) {
        0 => out.push_str(&format!("%v{}", rng.random_range(0..10))),
        1 if !gen.counters.is_empty() => {
            let c = &gen.counters[rng.random_range(0..gen.counters.len())];
            out.push_str(&format!("@{c}"));
        }
        _ => out.push_str(&format!("{}", rng.random_range(-1000..=1000i64))),
    }
}
