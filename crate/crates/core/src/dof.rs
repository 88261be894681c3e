//! Inner and outer DOF regions, the closed-form sum DOF, and the
//! combinatorial identities tying them together.

use std::collections::BTreeSet;

use num_rational::BigRational;
use serde::Serialize;

use crate::channel::{AntennaConfig, CognitionScenario};
use crate::region::{rat, rational_string, sum_dof_lp, DofPoint, Halfspace, Region2D};

fn pos(x: i64) -> i64 {
    x.max(0)
}

fn ind(b: bool) -> i64 {
    b as i64
}

/// Integer DOF pairs reachable by one-shot zero forcing, closed downward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AchievableSet {
    pub points: BTreeSet<(u32, u32)>,
    pub config: AntennaConfig,
    pub scenario: CognitionScenario,
}

/// The four zero-forcing feasibility inequalities for an integer pair.
pub fn is_achievable_point(config: AntennaConfig, scenario: CognitionScenario, d1: u32, d2: u32) -> bool {
    let (m1, m2, n1, n2) = (config.m1 as i64, config.m2 as i64, config.n1 as i64, config.n2 as i64);
    let (t1, t2, r1, r2) = (ind(scenario.t1), ind(scenario.t2), ind(scenario.r1), ind(scenario.r2));
    let (d1, d2) = (d1 as i64, d2 as i64);
    // transmit dimensions of W2 and W1
    let span2 = t1 * m1 + m2;
    let span1 = m1 + t2 * m2;
    span2 >= t1 * d1 + d2
        && span1 >= d1 + t2 * d2
        && n1 >= (1 - r1) * pos(d2 - pos(span2 - n1)) + d1
        && n2 >= (1 - r2) * pos(d1 - pos(span1 - n2)) + d2
}

impl AchievableSet {
    pub fn contains(&self, d1: u32, d2: u32) -> bool {
        self.points.contains(&(d1, d2))
    }

    pub fn is_downward_closed(&self) -> bool {
        self.points
            .iter()
            .all(|&(a, b)| (0..=a).all(|x| (0..=b).all(|y| self.points.contains(&(x, y)))))
    }
}

/// Enumerates the achievable integer points. Each coordinate is at most
/// `min(M1+M2, N1+N2)`, so the box `[0, M1+M2]^2` covers the set.
pub fn inner_points(config: AntennaConfig, scenario: CognitionScenario) -> AchievableSet {
    let bound = config.m1 + config.m2;
    let points = (0..=bound)
        .flat_map(|d1| (0..=bound).map(move |d2| (d1, d2)))
        .filter(|&(d1, d2)| is_achievable_point(config, scenario, d1, d2))
        .collect();
    AchievableSet { points, config, scenario }
}

/// Convex hull of [`inner_points`] (time sharing between integer points).
pub fn inner_region(config: AntennaConfig, scenario: CognitionScenario) -> Region2D {
    let pts: Vec<(i64, i64)> =
        inner_points(config, scenario).points.iter().map(|&(a, b)| (a as i64, b as i64)).collect();
    Region2D::from_integer_points(&pts).expect("(0,0) is always achievable")
}

/// Converse halfspaces, excluding the two nonnegativity constraints.
///
/// The single-user sum bounds are switched on by the transmitter bit alone:
/// a cognitive receiver relaxes `max(M1, N2)` to `M1 + N2` but does not remove
/// it.
pub fn outer_halfspaces(config: AntennaConfig, scenario: CognitionScenario) -> Vec<Halfspace> {
    let (m1, m2, n1, n2) = (config.m1 as i64, config.m2 as i64, config.n1 as i64, config.n2 as i64);
    let mut hs = vec![
        Halfspace::new(1, 1, m1 + m2),
        Halfspace::new(1, 1, n1 + n2),
        Halfspace::new(1, 0, n1),
        Halfspace::new(0, 1, n2),
    ];
    if !scenario.t2 {
        hs.push(Halfspace::new(1, 0, m1));
        let b = if scenario.r2 { m1 + n2 } else { m1.max(n2) };
        hs.push(Halfspace::new(1, 1, b));
    }
    if !scenario.t1 {
        hs.push(Halfspace::new(0, 1, m2));
        let b = if scenario.r1 { m2 + n1 } else { m2.max(n1) };
        hs.push(Halfspace::new(1, 1, b));
    }
    hs
}

pub fn outer_region(config: AntennaConfig, scenario: CognitionScenario) -> Region2D {
    Region2D::from_halfspaces(&outer_halfspaces(config, scenario)).expect("outer region is a bounded polygon")
}

/// Closed-form sum DOF with cognitive message sharing.
pub fn dof_formula(config: AntennaConfig, scenario: CognitionScenario) -> u32 {
    let (m1, m2, n1, n2) = (config.m1, config.m2, config.n1, config.n2);
    let mut eta = (m1 + m2).min(n1 + n2);
    if !scenario.t2 {
        eta = eta.min(if scenario.r2 { m1 + n2 } else { m1.max(n2) });
    }
    if !scenario.t1 {
        eta = eta.min(if scenario.r1 { m2 + n1 } else { m2.max(n1) });
    }
    eta
}

/// Sum DOF with full-duplex cooperation among all four nodes.
pub fn dof_cooperation(config: AntennaConfig) -> u32 {
    let (m1, m2, n1, n2) = (config.m1, config.m2, config.n1, config.n2);
    [m1 + m2, n1 + n2, m1.max(n2), m2.max(n1)].into_iter().min().unwrap()
}

/// The genie upper bounds `(max(M1, N2), max(M2, N1))` for the cooperative channel.
pub fn dof_cooperation_upper_bounds(config: AntennaConfig) -> (u32, u32) {
    (config.m1.max(config.n2), config.m2.max(config.n1))
}

/// Brute-force check over `[0, box]^2` that
/// `a + (b - (c - d)^+)^+ <= d` iff `a <= d` and `a + b <= max(c, d)`.
pub fn lemma5_holds(c: u32, d: u32, box_size: u32) -> bool {
    lemma5_counterexample(c, d, box_size).is_none()
}

pub fn lemma5_counterexample(c: u32, d: u32, box_size: u32) -> Option<(u32, u32)> {
    let (c, d) = (c as i64, d as i64);
    (0..=box_size as i64)
        .flat_map(|a| (0..=box_size as i64).map(move |b| (a, b)))
        .find(|&(a, b)| {
            let left = a + pos(b - pos(c - d)) <= d;
            let right = a <= d && a + b <= c.max(d);
            left != right
        })
        .map(|(a, b)| (a as u32, b as u32))
}

/// Scenarios of the cognition ordering chain, weakest first.
pub const ORDERING_CHAIN: [[u8; 4]; 5] = [[0, 0, 0, 1], [0, 1, 0, 0], [0, 1, 0, 1], [0, 1, 1, 0], [1, 1, 0, 0]];

/// `eta_0001 <= eta_0100 = eta_0101 <= eta_0110 <= eta_1100`, and the
/// matching region inclusions.
pub fn scenario_ordering_holds(config: AntennaConfig) -> bool {
    let sc = ORDERING_CHAIN.map(CognitionScenario::from_bits);
    let eta = sc.map(|s| dof_formula(config, s));
    let chain = eta[0] <= eta[1] && eta[1] == eta[2] && eta[2] <= eta[3] && eta[3] <= eta[4];
    let regions = sc.map(|s| outer_region(config, s));
    let inclusions = regions[1].contains_region(&regions[0])
        && crate::region::regions_equal(&regions[1], &regions[2])
        && regions[3].contains_region(&regions[2])
        && regions[4].contains_region(&regions[3]);
    chain && inclusions
}

/// JSON form of a region together with the channel it belongs to.
#[derive(Debug, Clone, Serialize)]
pub struct RegionJson {
    pub config: AntennaConfig,
    pub scenario: CognitionScenario,
    pub halfspaces: Vec<Halfspace>,
    pub vertices: Vec<[String; 2]>,
    pub sum_dof: String,
}

impl RegionJson {
    pub fn new(config: AntennaConfig, scenario: CognitionScenario, region: &Region2D) -> Self {
        RegionJson {
            config,
            scenario,
            halfspaces: region.halfspaces().to_vec(),
            vertices: region.vertices().iter().map(DofPoint::to_strings).collect(),
            sum_dof: rational_string(&sum_dof_lp(region).expect("constructed regions are bounded")),
        }
    }
}

/// Outcome of one exhaustive identity sweep.
#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct CheckTally {
    pub performed: u64,
    pub failures: Vec<String>,
}

impl CheckTally {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.performed += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn merge(&mut self, other: CheckTally) {
        self.performed += other.performed;
        self.failures.extend(other.failures);
    }
}

/// Results of the exhaustive exact checks over `1..=max_antennas`.
#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct RegionSweepReport {
    pub max_antennas: u32,
    /// inner hull equals outer polytope
    pub region_equality: CheckTally,
    /// closed form equals LP maximum over the outer region
    pub formula_vs_lp: CheckTally,
    /// integer vertices on both sides
    pub integrality: CheckTally,
    /// downward closure of the achievable set
    pub downward_closure: CheckTally,
    pub swap_symmetry: CheckTally,
    pub ordering: CheckTally,
    pub cooperation: CheckTally,
}

impl RegionSweepReport {
    pub fn passed(&self) -> bool {
        self.tallies().iter().all(|(_, t)| t.passed())
    }

    pub fn tallies(&self) -> [(&'static str, &CheckTally); 7] {
        [
            ("region_equality", &self.region_equality),
            ("formula_vs_lp", &self.formula_vs_lp),
            ("integrality", &self.integrality),
            ("downward_closure", &self.downward_closure),
            ("swap_symmetry", &self.swap_symmetry),
            ("ordering", &self.ordering),
            ("cooperation", &self.cooperation),
        ]
    }

    fn merge(&mut self, other: RegionSweepReport) {
        self.region_equality.merge(other.region_equality);
        self.formula_vs_lp.merge(other.formula_vs_lp);
        self.integrality.merge(other.integrality);
        self.downward_closure.merge(other.downward_closure);
        self.swap_symmetry.merge(other.swap_symmetry);
        self.ordering.merge(other.ordering);
        self.cooperation.merge(other.cooperation);
    }
}

fn check_config(config: AntennaConfig) -> RegionSweepReport {
    let mut rep = RegionSweepReport::default();
    for scenario in CognitionScenario::all() {
        let label = || format!("config {config} scenario {scenario}");
        let set = inner_points(config, scenario);
        let inner = inner_region(config, scenario);
        let outer = outer_region(config, scenario);
        rep.region_equality.record(crate::region::regions_equal(&inner, &outer), || {
            format!("{}: inner {:?} != outer {:?}", label(), strings(&inner), strings(&outer))
        });
        let eta = dof_formula(config, scenario);
        let lp = sum_dof_lp(&outer).expect("bounded");
        rep.formula_vs_lp
            .record(lp == rat(eta as i64), || format!("{}: formula {eta} vs LP {lp}", label()));
        let integral = inner.vertices().iter().chain(outer.vertices()).all(DofPoint::is_integral);
        rep.integrality.record(integral, || format!("{}: fractional vertex", label()));
        rep.downward_closure.record(set.is_downward_closed(), || format!("{}: not downward closed", label()));
        let (sc, ss) = crate::channel::swap_users(config, scenario);
        let swapped = dof_formula(sc, ss);
        rep.swap_symmetry.record(swapped == eta, || format!("{}: swapped formula {swapped} vs {eta}", label()));
    }
    rep.ordering.record(scenario_ordering_holds(config), || format!("config {config}: ordering chain broken"));
    let coop = dof_cooperation(config);
    let plain = dof_formula(config, CognitionScenario::NONE);
    let (b1, b2) = dof_cooperation_upper_bounds(config);
    rep.cooperation.record(coop == plain && coop <= b1.min(b2), || {
        format!("config {config}: cooperation {coop}, plain {plain}, bounds ({b1},{b2})")
    });
    rep
}

fn strings(r: &Region2D) -> Vec<[String; 2]> {
    r.vertices().iter().map(DofPoint::to_strings).collect()
}

/// Runs every exact identity over all configs with counts in `1..=max_antennas`
/// and all 16 scenarios. Results are merged in config order.
pub fn verify_regions(max_antennas: u32) -> RegionSweepReport {
    let configs = AntennaConfig::sweep(max_antennas);
    #[cfg(feature = "parallel")]
    let parts: Vec<RegionSweepReport> = {
        use rayon::prelude::*;
        configs.par_iter().map(|&c| check_config(c)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<RegionSweepReport> = configs.iter().map(|&c| check_config(c)).collect();
    let mut rep = RegionSweepReport { max_antennas, ..Default::default() };
    for p in parts {
        rep.merge(p);
    }
    rep
}

/// Lemma-style identity over all `c, d` in `0..=max_cd`.
pub fn verify_lemma5(max_cd: u32, box_size: u32) -> CheckTally {
    let mut tally = CheckTally::default();
    for c in 0..=max_cd {
        for d in 0..=max_cd {
            let ce = lemma5_counterexample(c, d, box_size);
            tally.record(ce.is_none(), || format!("c={c} d={d}: counterexample (a,b)={:?}", ce.unwrap()));
        }
    }
    tally
}

/// Exact sum DOF of a region as a rational, for callers that do not want
/// to handle the error path on module-built regions.
pub fn region_sum_dof(region: &Region2D) -> BigRational {
    sum_dof_lp(region).expect("module-built regions are bounded")
}
