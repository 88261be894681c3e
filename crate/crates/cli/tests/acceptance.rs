//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! Expected values come from small oracles written here against the integer
//! constraint definitions, independent of the library's polytope code.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mimo_dof::channel::{derive_seed, sample_channel, swap_users, AntennaConfig, CognitionScenario};
use mimo_dof::dof::{
    dof_cooperation, dof_cooperation_upper_bounds, dof_formula, inner_region, lemma5_holds, outer_region,
    scenario_ordering_holds, ORDERING_CHAIN,
};
use mimo_dof::rates::{cooperation_dof_gap_check, log_grid, simulate_point, BOUND_PROBE_GRID};
use mimo_dof::region::{regions_equal, sum_dof_lp, DofPoint};
use mimo_dof::zf::{achievability_sweep, NULL_RESIDUAL_TOL};
use num_traits::ToPrimitive;

fn pos(x: i64) -> i64 {
    x.max(0)
}

fn all_configs(max: u32) -> Vec<AntennaConfig> {
    AntennaConfig::sweep(max)
}

fn bits(s: CognitionScenario) -> [i64; 4] {
    s.bits().map(i64::from)
}

fn counts(c: AntennaConfig) -> [i64; 4] {
    [c.m1, c.m2, c.n1, c.n2].map(i64::from)
}

/// Integer points meeting the four transmit/receive dimension constraints.
fn oracle_achievable(c: AntennaConfig, s: CognitionScenario, d1: i64, d2: i64) -> bool {
    let [m1, m2, n1, n2] = counts(c);
    let [t1, t2, r1, r2] = bits(s);
    t1 * m1 + m2 >= t1 * d1 + d2
        && m1 + t2 * m2 >= d1 + t2 * d2
        && n1 >= (1 - r1) * pos(d2 - pos(t1 * m1 + m2 - n1)) + d1
        && n2 >= (1 - r2) * pos(d1 - pos(m1 + t2 * m2 - n2)) + d2
}

/// The outer bound written out as plain inequalities.
fn oracle_outer(c: AntennaConfig, s: CognitionScenario, d1: i64, d2: i64) -> bool {
    let [m1, m2, n1, n2] = counts(c);
    let [t1, t2, r1, r2] = bits(s);
    let mut ok = d1 >= 0 && d2 >= 0 && d1 + d2 <= m1 + m2 && d1 + d2 <= n1 + n2 && d1 <= n1 && d2 <= n2;
    if t2 == 0 {
        ok &= d1 <= m1 && d1 + d2 <= if r2 == 1 { m1 + n2 } else { m1.max(n2) };
    }
    if t1 == 0 {
        ok &= d2 <= m2 && d1 + d2 <= if r1 == 1 { m2 + n1 } else { m2.max(n1) };
    }
    ok
}

fn oracle_box(c: AntennaConfig) -> i64 {
    i64::from(c.m1 + c.m2 + c.n1 + c.n2)
}

fn oracle_max_sum(c: AntennaConfig, s: CognitionScenario) -> i64 {
    let b = oracle_box(c);
    (0..=b)
        .flat_map(|d1| (0..=b).map(move |d2| (d1, d2)))
        .filter(|&(d1, d2)| oracle_achievable(c, s, d1, d2))
        .map(|(d1, d2)| d1 + d2)
        .max()
        .unwrap_or(0)
}

fn vertex_ints(v: &DofPoint) -> Option<(i64, i64)> {
    v.is_integral().then(|| (v.d1.to_integer().to_i64().unwrap(), v.d2.to_integer().to_i64().unwrap()))
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn inner_equals_outer() -> Outcome {
    let mut cases = 0;
    for c in all_configs(4) {
        for s in CognitionScenario::all() {
            cases += 1;
            let inner = inner_region(c, s);
            let outer = outer_region(c, s);
            if !regions_equal(&inner, &outer) {
                return Err(format!("{c} {s}: library regions differ"));
            }
            let b = oracle_box(c);
            for d1 in 0..=b {
                for d2 in 0..=b {
                    if oracle_achievable(c, s, d1, d2) != oracle_outer(c, s, d1, d2) {
                        return Err(format!("{c} {s}: oracle sets differ at ({d1},{d2})"));
                    }
                }
            }
            for v in outer.vertices() {
                match vertex_ints(v) {
                    Some((a, b)) if oracle_achievable(c, s, a, b) => {}
                    _ => return Err(format!("{c} {s}: outer vertex {v} is not an achievable integer point")),
                }
            }
        }
    }
    Ok(format!("{cases} cases"))
}

fn formula_matches_lp() -> Outcome {
    let mut cases = 0;
    for c in all_configs(4) {
        for s in CognitionScenario::all() {
            cases += 1;
            let eta = dof_formula(c, s);
            let lp = sum_dof_lp(&outer_region(c, s)).map_err(|e| format!("{c} {s}: {e}"))?;
            if lp.to_integer().to_i64() != Some(i64::from(eta)) || !lp.is_integer() {
                return Err(format!("{c} {s}: formula {eta} vs LP {lp}"));
            }
            let oracle = oracle_max_sum(c, s);
            if i64::from(eta) != oracle {
                return Err(format!("{c} {s}: formula {eta} vs oracle {oracle}"));
            }
        }
    }
    for n in 1..=5 {
        let c = AntennaConfig::new(1, n, n, 1).unwrap();
        let eta = dof_formula(c, CognitionScenario::NONE);
        if eta != 1 {
            return Err(format!("{c}: expected 1, got {eta}"));
        }
    }
    Ok(format!("{cases} cases + (1,n,n,1) for n=1..5"))
}

fn lemma5() -> Outcome {
    let mut cases = 0;
    for c in 0..=8i64 {
        for d in 0..=8i64 {
            cases += 1;
            let oracle = (0..=20i64)
                .all(|a| (0..=20i64).all(|b| (a + pos(b - pos(c - d)) <= d) == (a <= d && a + b <= c.max(d))));
            let lib = lemma5_holds(c as u32, d as u32, 20);
            if !oracle || !lib {
                return Err(format!("c={c} d={d}: oracle {oracle} library {lib}"));
            }
        }
    }
    Ok(format!("{cases} (c,d) pairs, box 20"))
}

fn ordering() -> Outcome {
    let chain = ORDERING_CHAIN.map(CognitionScenario::from_bits);
    let configs = all_configs(4);
    for &c in &configs {
        if !scenario_ordering_holds(c) {
            return Err(format!("{c}: library ordering check fails"));
        }
        let eta = chain.map(|s| oracle_max_sum(c, s));
        if !(eta[0] <= eta[1] && eta[1] == eta[2] && eta[2] <= eta[3] && eta[3] <= eta[4]) {
            return Err(format!("{c}: oracle chain {eta:?}"));
        }
        let b = oracle_box(c);
        for d1 in 0..=b {
            for d2 in 0..=b {
                let inside = chain.map(|s| oracle_outer(c, s, d1, d2));
                if (inside[0] && !inside[1]) || inside[1] != inside[2] || (inside[2] && !inside[3]) || (inside[3] && !inside[4]) {
                    return Err(format!("{c}: oracle inclusion breaks at ({d1},{d2})"));
                }
            }
        }
    }
    Ok(format!("{} configs", configs.len()))
}

fn cooperation() -> Outcome {
    let configs = all_configs(4);
    for &c in &configs {
        let coop = dof_cooperation(c);
        let plain = dof_formula(c, CognitionScenario::NONE);
        let [m1, m2, n1, n2] = [c.m1, c.m2, c.n1, c.n2];
        let oracle = (m1 + m2).min(n1 + n2).min(m1.max(n2)).min(m2.max(n1));
        let (b1, b2) = dof_cooperation_upper_bounds(c);
        if coop != plain || coop != oracle || coop > b1.min(b2) || (b1, b2) != (m1.max(n2), m2.max(n1)) {
            return Err(format!("{c}: cooperation {coop}, plain {plain}, oracle {oracle}, bounds ({b1},{b2})"));
        }
    }
    Ok(format!("{} configs", configs.len()))
}

fn achievability() -> Outcome {
    let rep = achievability_sweep(3, 50, 1);
    let trials = rep.total_trials();
    if let Some(c) = rep.failures().next() {
        return Err(format!("{} {} ({},{}): {}/{} pass", c.config, c.scenario, c.point[0], c.point[1], c.passes, c.trials));
    }
    let worst = rep.worst_null_residual();
    if rep.total_passes() != trials || worst > NULL_RESIDUAL_TOL {
        return Err(format!("{}/{trials} pass, worst residual {worst:e}", rep.total_passes()));
    }
    let configs = all_configs(3);
    let expected_cells: usize = configs
        .iter()
        .flat_map(|&c| CognitionScenario::all().map(move |s| (c, s)))
        .map(|(c, s)| {
            let b = oracle_box(c);
            (0..=b).flat_map(|d1| (0..=b).map(move |d2| (d1, d2))).filter(|&(a, b)| oracle_achievable(c, s, a, b)).count()
        })
        .sum();
    if rep.cells.len() != expected_cells {
        return Err(format!("{} cells, oracle expects {expected_cells}", rep.cells.len()));
    }
    Ok(format!("{} cells, {trials} trials, worst residual {worst:.2e}", rep.cells.len()))
}

fn slopes() -> Outcome {
    let grid = log_grid(1e4, 1e9, 6);
    let cases: [(&str, [u8; 4], [u32; 2]); 4] = [
        ("2,2,2,2", [0, 0, 0, 0], [1, 1]),
        ("2,2,2,2", [1, 1, 0, 0], [2, 2]),
        ("1,3,3,1", [0, 1, 0, 0], [2, 1]),
        ("1,3,3,1", [0, 1, 0, 0], [3, 0]),
    ];
    let mut shown = Vec::new();
    for (c, s, p) in cases {
        let c: AntennaConfig = c.parse().unwrap();
        let s = CognitionScenario::from_bits(s);
        let target = f64::from(p[0] + p[1]);
        if u32::try_from(oracle_max_sum(c, s)).ok() != Some(p[0] + p[1]) {
            return Err(format!("{c} {s}: ({},{}) is not a sum-DOF point", p[0], p[1]));
        }
        let sum = simulate_point(c, s, p[0], p[1], &grid, 5, 10, 7).map_err(|e| format!("{c} {s}: {e}"))?;
        let slope = sum.mean.slope;
        if (slope - target).abs() > 0.03 * target {
            return Err(format!("{c} {s} ({},{}): slope {slope:.4} vs {target}", p[0], p[1]));
        }
        shown.push(format!("{slope:.3}"));
    }
    Ok(format!("slopes {} (targets 2, 4, 3, 3)", shown.join(", ")))
}

fn bound_terms() -> Outcome {
    let c: AntennaConfig = "2,2,2,2".parse().unwrap();
    let seed = 11;
    let rep = cooperation_dof_gap_check(c, 10, seed).map_err(|e| e.to_string())?;
    if !rep.terms_bounded() || !rep.ceiling_respected() {
        return Err(format!("max term slope {:e}", rep.max_term_slope));
    }
    // recompute each term from the raw channel rows
    let mut worst = 0.0f64;
    for t in 0..10 {
        let ch = sample_channel(c, derive_seed(seed, t), true).map_err(|e| e.to_string())?;
        let h11 = ch.link(1, 1).ok_or("missing full-duplex link")?;
        let h41 = &ch.h41;
        for j in 0..c.m1 as usize {
            let own: f64 = h11.row(j).iter().map(|x| x * x).sum();
            let cross: f64 = h41.row(j).iter().map(|x| x * x).sum();
            let term = |rho: f64| (1.0 + own * rho / (1.0 + cross * rho)).log2();
            for w in BOUND_PROBE_GRID.windows(2) {
                worst = worst.max(((term(w[1]) - term(w[0])) / (w[1].log2() - w[0].log2())).abs());
            }
        }
    }
    if worst >= 0.01 || (worst - rep.max_term_slope).abs() > 1e-12 {
        return Err(format!("oracle worst slope {worst:e}, library {:e}", rep.max_term_slope));
    }
    Ok(format!("10 channels, worst term slope {worst:.2e}"))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(Vec<u8>, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mimo-dof"))
        .args(args)
        .current_dir(dir)
        .env_remove(mimo_dof_cli::OUT_DIR_ENV)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.stdout, out.status.code().unwrap_or(-1)))
}

fn symmetry_and_determinism() -> Outcome {
    let mut seed = 0x5eed_u64;
    for i in 0..500u64 {
        seed = derive_seed(seed, i);
        let v: [u32; 4] = std::array::from_fn(|k| 1 + ((seed >> (8 * k)) % 6) as u32);
        let b: [u8; 4] = std::array::from_fn(|k| ((seed >> (40 + k)) & 1) as u8);
        let c = AntennaConfig::new(v[0], v[1], v[2], v[3]).unwrap();
        let s = CognitionScenario::from_bits(b);
        let (c2, s2) = swap_users(c, s);
        let manual = (
            AntennaConfig::new(v[1], v[0], v[3], v[2]).unwrap(),
            CognitionScenario::from_bits([b[1], b[0], b[3], b[2]]),
        );
        if (c2, s2) != manual || dof_formula(c, s) != dof_formula(c2, s2) {
            return Err(format!("{c} {s}: swap breaks the DOF"));
        }
    }

    let runs = [
        vec!["dof", "--config", "1,3,3,1", "--all-scenarios", "--format", "json"],
        vec!["region", "--config", "2,3,3,2", "--scenario", "0,1,1,0", "--format", "json"],
        vec!["achieve", "--config", "3,3,3,3", "--scenario", "0,1,0,1", "--point", "2,1", "--trials", "5", "--seed", "9", "--format", "json"],
        vec!["achieve", "--sweep", "2", "--trials", "2", "--seed", "3", "--format", "json"],
        vec!["simulate", "--config", "2,2,2,2", "--point", "1,1", "--trials", "3", "--seed", "5", "--out", "sim", "--format", "json"],
        vec!["coop-bound", "--config", "2,2,2,2", "--trials", "3", "--seed", "4", "--format", "json"],
    ];
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    for args in &runs {
        let (out_a, code_a) = run_cli(args, a.path())?;
        let (out_b, code_b) = run_cli(args, b.path())?;
        let stdout_a = String::from_utf8_lossy(&out_a).replace(&a.path().display().to_string(), "");
        let stdout_b = String::from_utf8_lossy(&out_b).replace(&b.path().display().to_string(), "");
        if code_a != 0 || code_a != code_b || stdout_a != stdout_b {
            return Err(format!("`{}` differs between runs (exit {code_a} vs {code_b})", args.join(" ")));
        }
    }
    for f in ["sim.csv", "sim.json"] {
        let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{f} differs between runs"));
        }
    }
    Ok(format!("500 swaps, {} CLI commands rerun byte-identically", runs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("inner region equals outer region", inner_equals_outer),
        ("closed-form sum DOF equals LP optimum", formula_matches_lp),
        ("max/positive-part identity", lemma5),
        ("cognition ordering chain", ordering),
        ("full cooperation sum DOF and genie bounds", cooperation),
        ("zero-forcing achievability sweep", achievability),
        ("empirical sum-rate slopes", slopes),
        ("genie bound terms stay bounded", bound_terms),
        ("swap symmetry and determinism", symmetry_and_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
