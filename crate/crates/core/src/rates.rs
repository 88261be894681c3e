//! Finite-SNR rates of zero-forcing schemes, high-SNR slope fits, and the
//! per-antenna genie term of the cooperative converse.
//!
//! Rates are in bits per channel use. Every transmitting node has power `rho`
//! and unit-variance noise is added at each receive antenna.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{derive_seed, sample_channel, AntennaConfig, ChannelError, ChannelRealization, CognitionScenario};
use crate::dof::{dof_cooperation, dof_cooperation_upper_bounds};
use crate::linalg::singular_values;
use crate::zf::{build_scheme, interference_basis, verify_scheme, ZfError, ZfScheme};

/// Largest allowed |d(term)/d(log2 rho)| for the genie term to count as bounded.
pub const BOUND_SLOPE_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("scheme is not decodable on this channel (W1 {w1}, W2 {w2})")]
    Undecodable { w1: bool, w2: bool },
    #[error("invalid power grid: {0}")]
    InvalidGrid(String),
    #[error("transmit power must be nonnegative, got {0}")]
    NegativePower(f64),
    #[error("channel has no extended (full-duplex) links")]
    MissingExtendedLinks,
    #[error("genie bound needs N2 >= M1, got N2 = {n2} < M1 = {m1}")]
    HypothesisViolated { m1: u32, n2: u32 },
    #[error(transparent)]
    Zf(#[from] ZfError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// `sum_i log2(1 + p * s_i^2)` over the singular values of `m`.
fn log_det_rate(m: &DMatrix<f64>, power: f64) -> f64 {
    singular_values(m).into_iter().map(|s| (power * s * s).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

fn receiver_rate(scheme: &ZfScheme, channel: &ChannelRealization, rx: usize, power: f64) -> f64 {
    let g = channel.stacked(rx);
    let own = if rx == 3 { scheme.embedded_w1() } else { scheme.embedded_w2() };
    if own.ncols() == 0 {
        return 0.0;
    }
    let q = interference_basis(scheme, channel, rx);
    let signal = &g * own;
    // drop every direction that carries interference
    let projected = &signal - &q * (q.transpose() * &signal);
    log_det_rate(&projected, power)
}

/// Rates of both messages at per-node power `rho`.
///
/// Streams get equal power, scaled so that the busiest transmitter spends
/// exactly `rho` (each stream vector has unit norm).
pub fn achievable_rates(scheme: &ZfScheme, channel: &ChannelRealization, rho: f64) -> Result<(f64, f64), RateError> {
    if rho < 0.0 || rho.is_nan() {
        return Err(RateError::NegativePower(rho));
    }
    let diag = verify_scheme(scheme, channel);
    if !(diag.decodable_w1 && diag.decodable_w2) {
        return Err(RateError::Undecodable { w1: diag.decodable_w1, w2: diag.decodable_w2 });
    }
    if rho == 0.0 {
        return Ok((0.0, 0.0));
    }
    let busiest = scheme.streams_at(1).max(scheme.streams_at(2)).max(1);
    let power = rho / busiest as f64;
    Ok((receiver_rate(scheme, channel, 3, power), receiver_rate(scheme, channel, 4, power)))
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..points).map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64)).collect()
        }
    }
}

/// Default power grid: 7 points over `1e4..=1e10`, slope fitted on the top 5.
pub fn default_rho_grid() -> Vec<f64> {
    log_grid(1e4, 1e10, 7)
}

pub const DEFAULT_FIT_POINTS: usize = 5;

fn check_grid(grid: &[f64]) -> Result<(), RateError> {
    if grid.len() < 3 {
        return Err(RateError::InvalidGrid(format!("need at least 3 points, got {}", grid.len())));
    }
    if grid.iter().any(|&r| !r.is_finite() || r <= 0.0) {
        return Err(RateError::InvalidGrid("powers must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RateError::InvalidGrid("powers must be strictly increasing".into()));
    }
    Ok(())
}

/// Rates over a power grid with a fitted sum-rate slope against `log2 rho`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSweep {
    pub rho_grid: Vec<f64>,
    pub r1_rates: Vec<f64>,
    pub r2_rates: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

impl RateSweep {
    /// Builds a sweep from rate samples, fitting over the last `fit_points`
    /// grid points (all of them if `fit_points` is 0 or too large).
    pub fn from_rates(rho_grid: Vec<f64>, r1_rates: Vec<f64>, r2_rates: Vec<f64>, fit_points: usize) -> Result<Self, RateError> {
        check_grid(&rho_grid)?;
        if r1_rates.len() != rho_grid.len() || r2_rates.len() != rho_grid.len() {
            return Err(RateError::InvalidGrid("rate and grid lengths differ".into()));
        }
        let n = rho_grid.len();
        let k = if fit_points == 0 || fit_points > n { n } else { fit_points.max(2) };
        let x: Vec<f64> = rho_grid[n - k..].iter().map(|r| r.log2()).collect();
        let y: Vec<f64> = (n - k..n).map(|i| r1_rates[i] + r2_rates[i]).collect();
        let (slope, intercept) = fit_line(&x, &y);
        Ok(RateSweep { rho_grid, r1_rates, r2_rates, slope, intercept })
    }

    pub fn sum_rates(&self) -> Vec<f64> {
        self.r1_rates.iter().zip(&self.r2_rates).map(|(a, b)| a + b).collect()
    }

    /// `rho,r1,r2,rsum` CSV with full-precision numbers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,r1,r2,rsum\n");
        for i in 0..self.rho_grid.len() {
            let (r1, r2) = (self.r1_rates[i], self.r2_rates[i]);
            out.push_str(&format!("{},{},{},{}\n", self.rho_grid[i], r1, r2, r1 + r2));
        }
        out
    }
}

/// Rates of `scheme` over `rho_grid` and the least-squares slope of
/// `R1 + R2` against `log2 rho` over every grid point.
pub fn estimate_dof_slope(scheme: &ZfScheme, channel: &ChannelRealization, rho_grid: &[f64]) -> Result<RateSweep, RateError> {
    estimate_dof_slope_tail(scheme, channel, rho_grid, 0)
}

/// As [`estimate_dof_slope`], fitting only the top `fit_points` powers.
pub fn estimate_dof_slope_tail(
    scheme: &ZfScheme,
    channel: &ChannelRealization,
    rho_grid: &[f64],
    fit_points: usize,
) -> Result<RateSweep, RateError> {
    check_grid(rho_grid)?;
    let mut r1 = Vec::with_capacity(rho_grid.len());
    let mut r2 = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let (a, b) = achievable_rates(scheme, channel, rho)?;
        r1.push(a);
        r2.push(b);
    }
    RateSweep::from_rates(rho_grid.to_vec(), r1, r2, fit_points)
}

/// Channel-averaged rate sweep for one DOF point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub config: AntennaConfig,
    pub scenario: CognitionScenario,
    pub point: [u32; 2],
    /// Rates averaged over channels; its slope is the mean per-channel slope.
    pub mean: RateSweep,
    pub per_channel_slopes: Vec<f64>,
}

/// Runs [`estimate_dof_slope_tail`] on `trials` random channels with derived seeds.
#[allow(clippy::too_many_arguments)]
pub fn simulate_point(
    config: AntennaConfig,
    scenario: CognitionScenario,
    d1: u32,
    d2: u32,
    rho_grid: &[f64],
    fit_points: usize,
    trials: u32,
    seed: u64,
) -> Result<SimulationSummary, RateError> {
    check_grid(rho_grid)?;
    if trials == 0 {
        return Err(RateError::InvalidGrid("at least one channel trial is required".into()));
    }
    let n = rho_grid.len();
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    let mut slopes = Vec::with_capacity(trials as usize);
    for t in 0..trials as u64 {
        let channel = sample_channel(config, derive_seed(seed, 2 * t), false)?;
        let scheme = build_scheme(config, scenario, d1, d2, &channel, derive_seed(seed, 2 * t + 1))?;
        let sweep = estimate_dof_slope_tail(&scheme, &channel, rho_grid, fit_points)?;
        for i in 0..n {
            r1[i] += sweep.r1_rates[i];
            r2[i] += sweep.r2_rates[i];
        }
        slopes.push(sweep.slope);
    }
    let k = trials as f64;
    r1.iter_mut().chain(r2.iter_mut()).for_each(|v| *v /= k);
    let mean = RateSweep::from_rates(rho_grid.to_vec(), r1, r2, fit_points)?;
    Ok(SimulationSummary { config, scenario, point: [d1, d2], mean, per_channel_slopes: slopes })
}

/// `log2(1 + a*rho / (1 + b*rho))` with `a`, `b` squared row norms.
pub fn bound_term(own_sq: f64, cross_sq: f64, rho: f64) -> f64 {
    (own_sq * rho / (1.0 + cross_sq * rho)).ln_1p() / std::f64::consts::LN_2
}

/// Per-antenna genie terms at transmitter 1 for one power level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooperationBoundProbe {
    pub per_antenna_terms: Vec<f64>,
    pub rho: f64,
}

fn check_cooperation(config: AntennaConfig) -> Result<(), RateError> {
    if config.n2 < config.m1 {
        Err(RateError::HypothesisViolated { m1: config.m1, n2: config.n2 })
    } else {
        Ok(())
    }
}

/// Evaluates the term for each antenna `j` of node 1, pairing row `j` of the
/// self link `H[1][1]` with row `j` of `H[4][1]`.
pub fn cooperation_bound_term(channel: &ChannelRealization, rho: f64) -> Result<CooperationBoundProbe, RateError> {
    check_cooperation(channel.config)?;
    let links = channel.extended_links.as_ref().ok_or(RateError::MissingExtendedLinks)?;
    let h11 = &links[&(1, 1)];
    let h41 = &channel.h41;
    let per_antenna_terms = (0..channel.config.m1 as usize)
        .map(|j| bound_term(h11.row(j).norm_squared(), h41.row(j).norm_squared(), rho))
        .collect();
    Ok(CooperationBoundProbe { per_antenna_terms, rho })
}

/// Powers at which the genie term's growth is probed.
pub const BOUND_PROBE_GRID: [f64; 3] = [1e6, 1e8, 1e10];

/// Worst finite-difference slope of each antenna's term against `log2 rho`.
pub fn bound_term_slopes(channel: &ChannelRealization, grid: &[f64]) -> Result<Vec<f64>, RateError> {
    let probes: Vec<CooperationBoundProbe> =
        grid.iter().map(|&rho| cooperation_bound_term(channel, rho)).collect::<Result<_, _>>()?;
    let antennas = channel.config.m1 as usize;
    Ok((0..antennas)
        .map(|j| {
            probes
                .windows(2)
                .map(|w| {
                    let dt = w[1].per_antenna_terms[j] - w[0].per_antenna_terms[j];
                    (dt / (w[1].rho.log2() - w[0].rho.log2())).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooperationGapReport {
    pub config: AntennaConfig,
    pub trials: u32,
    /// Per channel, per antenna of node 1.
    pub term_slopes: Vec<Vec<f64>>,
    pub max_term_slope: f64,
    pub dof_cooperation: u32,
    pub upper_bounds: (u32, u32),
}

impl CooperationGapReport {
    pub fn terms_bounded(&self) -> bool {
        self.max_term_slope < BOUND_SLOPE_TOL
    }

    pub fn ceiling_respected(&self) -> bool {
        self.dof_cooperation <= self.upper_bounds.0.min(self.upper_bounds.1)
    }

    pub fn passed(&self) -> bool {
        self.terms_bounded() && self.ceiling_respected()
    }
}

/// Checks on random full-duplex channels that every genie term stops growing
/// with `rho`, and reports the cooperative DOF next to its bounds.
pub fn cooperation_dof_gap_check(config: AntennaConfig, trials: u32, seed: u64) -> Result<CooperationGapReport, RateError> {
    check_cooperation(config)?;
    let mut term_slopes = Vec::with_capacity(trials as usize);
    for t in 0..trials as u64 {
        let channel = sample_channel(config, derive_seed(seed, t), true)?;
        term_slopes.push(bound_term_slopes(&channel, &BOUND_PROBE_GRID)?);
    }
    let max_term_slope = term_slopes.iter().flatten().copied().fold(0.0, f64::max);
    Ok(CooperationGapReport {
        config,
        trials,
        term_slopes,
        max_term_slope,
        dof_cooperation: dof_cooperation(config),
        upper_bounds: dof_cooperation_upper_bounds(config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dof::dof_formula;

    fn cfg(m1: u32, m2: u32, n1: u32, n2: u32) -> AntennaConfig {
        AntennaConfig::new(m1, m2, n1, n2).unwrap()
    }

    fn sc(b: [u8; 4]) -> CognitionScenario {
        CognitionScenario::from_bits(b)
    }

    #[test]
    fn zero_power_gives_zero_rates() {
        let c = cfg(2, 2, 2, 2);
        let ch = sample_channel(c, 1, false).unwrap();
        let s = build_scheme(c, CognitionScenario::NONE, 1, 1, &ch, 0).unwrap();
        assert_eq!(achievable_rates(&s, &ch, 0.0).unwrap(), (0.0, 0.0));
        assert!(matches!(achievable_rates(&s, &ch, -1.0), Err(RateError::NegativePower(_))));
    }

    #[test]
    fn single_stream_matches_scalar_shannon() {
        let c = cfg(1, 1, 1, 1);
        let ch = sample_channel(c, 6, false).unwrap();
        let s = build_scheme(c, CognitionScenario::NONE, 1, 0, &ch, 0).unwrap();
        let v = s.w1_vectors[0][0];
        let g = (ch.h31[(0, 0)] * v).powi(2);
        for rho in [0.5, 10.0, 1e6] {
            let (r1, r2) = achievable_rates(&s, &ch, rho).unwrap();
            assert!((r1 - (1.0 + g * rho).log2()).abs() < 1e-12);
            assert_eq!(r2, 0.0);
        }
    }

    #[test]
    fn undecodable_scheme_is_rejected() {
        let c = cfg(1, 3, 3, 1);
        let ch = sample_channel(c, 13, false).unwrap();
        let mut s = build_scheme(c, sc([0, 1, 0, 0]), 2, 1, &ch, 3).unwrap();
        s.w1_vectors[0][1] += 0.1;
        assert!(matches!(achievable_rates(&s, &ch, 1e3), Err(RateError::Undecodable { w2: false, .. })));
    }

    #[test]
    fn regression_exact_on_linear_data() {
        let x: Vec<f64> = (0..7).map(|k| 13.0 + 3.3 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.75 * v - 4.5).collect();
        let (s, b) = fit_line(&x, &y);
        assert!((s - 2.75).abs() / 2.75 < 1e-12);
        assert!((b + 4.5).abs() < 1e-9);
    }

    #[test]
    fn grid_validation() {
        let c = cfg(1, 1, 1, 1);
        let ch = sample_channel(c, 6, false).unwrap();
        let s = build_scheme(c, CognitionScenario::NONE, 1, 0, &ch, 0).unwrap();
        assert!(matches!(estimate_dof_slope(&s, &ch, &[1e4, 1e5]), Err(RateError::InvalidGrid(_))));
        assert!(matches!(estimate_dof_slope(&s, &ch, &[1e4, 1e6, 1e5]), Err(RateError::InvalidGrid(_))));
        let g = default_rho_grid();
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e4).abs() < 1e-6 && (g[6] - 1e10).abs() < 1.0);
    }

    #[test]
    fn slope_of_two_user_interference_channel() {
        let c = cfg(2, 2, 2, 2);
        let grid = log_grid(1e4, 1e9, 6);
        let sum = simulate_point(c, CognitionScenario::NONE, 1, 1, &grid, 0, 10, 42).unwrap();
        assert!((sum.mean.slope - 2.0).abs() <= 0.06, "{}", sum.mean.slope);
        let mean_of_slopes = sum.per_channel_slopes.iter().sum::<f64>() / 10.0;
        assert!((mean_of_slopes - sum.mean.slope).abs() < 1e-9);
    }

    #[test]
    fn rates_monotone_and_slope_below_formula() {
        let grid = default_rho_grid();
        for (c, s, d1, d2) in [
            (cfg(2, 2, 2, 2), sc([1, 1, 0, 0]), 2, 2),
            (cfg(1, 3, 3, 1), sc([0, 1, 0, 0]), 2, 1),
            (cfg(3, 2, 2, 3), sc([0, 0, 1, 0]), 1, 2),
        ] {
            for seed in 0..5 {
                let ch = sample_channel(c, seed, false).unwrap();
                let scheme = build_scheme(c, s, d1, d2, &ch, seed).unwrap();
                let sw = estimate_dof_slope_tail(&scheme, &ch, &grid, DEFAULT_FIT_POINTS).unwrap();
                assert!(sw.sum_rates().windows(2).all(|w| w[1] >= w[0]));
                assert!(sw.slope <= dof_formula(c, s) as f64 + 0.1);
            }
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let sw = RateSweep::from_rates(vec![1.0, 2.0, 4.0], vec![0.5, 1.0, 1.5], vec![0.0, 0.5, 1.0], 0).unwrap();
        let csv = sw.to_csv();
        assert!(csv.starts_with("rho,r1,r2,rsum\n"));
        assert_eq!(csv.lines().nth(2).unwrap(), "2,1,0.5,1.5");
        assert!((sw.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_term_edge_cases() {
        for rho in [1.0, 1e6, 1e10] {
            assert_eq!(bound_term(0.0, 2.0, rho), 0.0);
        }
        assert!((bound_term(1.7, 1.7, 1e10) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bound_term_requires_extended_links_and_hypothesis() {
        let ch = sample_channel(cfg(2, 2, 2, 2), 0, false).unwrap();
        assert_eq!(cooperation_bound_term(&ch, 1e6), Err(RateError::MissingExtendedLinks));
        let ch = sample_channel(cfg(3, 1, 1, 2), 0, true).unwrap();
        assert!(matches!(cooperation_bound_term(&ch, 1e6), Err(RateError::HypothesisViolated { m1: 3, n2: 2 })));
        assert!(cooperation_dof_gap_check(cfg(3, 1, 1, 2), 3, 0).is_err());
    }

    #[test]
    fn zero_self_link_row_gives_zero_term() {
        let mut ch = sample_channel(cfg(2, 2, 2, 2), 5, true).unwrap();
        ch.extended_links.as_mut().unwrap().get_mut(&(1, 1)).unwrap().row_mut(0).fill(0.0);
        let p = cooperation_bound_term(&ch, 1e8).unwrap();
        assert_eq!(p.per_antenna_terms[0], 0.0);
        assert!(p.per_antenna_terms[1] > 0.0);
    }

    #[test]
    fn gap_check_examples() {
        let rep = cooperation_dof_gap_check(cfg(2, 2, 2, 2), 10, 0).unwrap();
        assert!(rep.terms_bounded(), "{}", rep.max_term_slope);
        assert_eq!(rep.upper_bounds, (2, 2));
        assert!(rep.dof_cooperation <= 2);
        let rep = cooperation_dof_gap_check(cfg(1, 3, 3, 1), 10, 0).unwrap();
        assert_eq!(rep.dof_cooperation, 1);
        assert_eq!(rep.upper_bounds.0, 1);
        assert!(rep.passed());
    }
}
