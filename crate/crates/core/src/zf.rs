//! Zero-forcing achievability of integer DOF points.
//!
//! Message `W1` is sent from transmitter 1 and, when transmitter 2 is
//! cognitive, jointly from transmitter 2 as well; its beamforming vectors
//! live in that stacked transmit space. Up to `r1` of them are drawn from the
//! kernel of the cross channel to receiver 2 restricted to the same space,
//! the rest isotropically. `W2` is the mirror image. A cognitive receiver
//! removes the other message before detection.
//!
//! [`verify_scheme`] checks decodability by counting dimensions at each
//! receiver on a concrete channel.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::channel::{derive_seed, sample_channel, AntennaConfig, ChannelError, ChannelRealization, CognitionScenario};
use crate::dof::{inner_points, is_achievable_point};
use crate::linalg::{self, column_basis, hstack, null_space, rank_with_scale, spectral_norm};

/// Relative bound on `|H v| / (|H| |v|)` for a zero-forced vector.
pub const NULL_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZfError {
    #[error("point ({d1},{d2}) is not in the achievable set of {config} {scenario}")]
    NotAchievable { config: AntennaConfig, scenario: CognitionScenario, d1: u32, d2: u32 },
    #[error("channel was drawn for {found}, scheme requested for {expected}")]
    ChannelMismatch { expected: AntennaConfig, found: AntennaConfig },
    #[error("cross-channel kernel has dimension {found}, need {needed}")]
    DegenerateKernel { needed: usize, found: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Transmit-vector plan realising `(d1, d2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfScheme {
    pub config: AntennaConfig,
    pub scenario: CognitionScenario,
    pub d1: u32,
    pub d2: u32,
    /// Dimension of the kernel available for nulling W1 at receiver 2.
    pub r1: u32,
    /// Dimension of the kernel available for nulling W2 at receiver 1.
    pub r2: u32,
    /// The first `nulled1` W1 vectors are zero-forced at receiver 2.
    pub nulled1: usize,
    pub nulled2: usize,
    /// Unit vectors of length `M1 + 1_T2 * M2`.
    pub w1_vectors: Vec<DVector<f64>>,
    /// Unit vectors of length `1_T1 * M1 + M2`.
    pub w2_vectors: Vec<DVector<f64>>,
}

/// Indices into the joint `M1 + M2` transmit vector that carry message `user`.
fn active_indices(config: AntennaConfig, scenario: CognitionScenario, user: u8) -> Vec<usize> {
    let (m1, m2) = (config.m1 as usize, config.m2 as usize);
    let (own_first, other_cognitive) = match user {
        1 => (true, scenario.t2),
        2 => (false, scenario.t1),
        _ => unreachable!("two users"),
    };
    let tx1 = 0..m1;
    let tx2 = m1..m1 + m2;
    match (own_first, other_cognitive) {
        (true, false) => tx1.collect(),
        (false, false) => tx2.collect(),
        (_, true) => tx1.chain(tx2).collect(),
    }
}

fn embed(vectors: &[DVector<f64>], indices: &[usize], total: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(total, vectors.len());
    for (c, v) in vectors.iter().enumerate() {
        for (k, &row) in indices.iter().enumerate() {
            out[(row, c)] = v[k];
        }
    }
    out
}

fn restrict_columns(m: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), indices.len(), |r, c| m[(r, indices[c])])
}

impl ZfScheme {
    pub fn w1_indices(&self) -> Vec<usize> {
        active_indices(self.config, self.scenario, 1)
    }

    pub fn w2_indices(&self) -> Vec<usize> {
        active_indices(self.config, self.scenario, 2)
    }

    /// W1 vectors embedded in the joint `M1 + M2` transmit space, one per column.
    pub fn embedded_w1(&self) -> DMatrix<f64> {
        embed(&self.w1_vectors, &self.w1_indices(), self.config.total_transmit())
    }

    pub fn embedded_w2(&self) -> DMatrix<f64> {
        embed(&self.w2_vectors, &self.w2_indices(), self.config.total_transmit())
    }

    /// Number of streams with a nonzero component at transmitter `tx` (1 or 2).
    pub fn streams_at(&self, tx: usize) -> usize {
        let m1 = self.config.m1 as usize;
        let range = if tx == 1 { 0..m1 } else { m1..self.config.total_transmit() };
        let touches = |e: &DMatrix<f64>| {
            e.column_iter().filter(|c| range.clone().any(|r| c[r] != 0.0)).count()
        };
        touches(&self.embedded_w1()) + touches(&self.embedded_w2())
    }
}

fn isotropic(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(len, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn message_vectors(
    rng: &mut ChaCha8Rng,
    cross: &DMatrix<f64>,
    streams: usize,
    r: usize,
) -> Result<(Vec<DVector<f64>>, usize), ZfError> {
    let nulled = streams.min(r);
    let mut vectors = Vec::with_capacity(streams);
    if nulled > 0 {
        let kernel = null_space(cross);
        if kernel.len() < nulled {
            return Err(ZfError::DegenerateKernel { needed: nulled, found: kernel.len() });
        }
        vectors.extend(kernel.into_iter().take(nulled));
    }
    while vectors.len() < streams {
        vectors.push(isotropic(rng, cross.ncols()));
    }
    Ok((vectors, nulled))
}

/// Builds the zero-forcing scheme for an achievable integer point.
///
/// Isotropic vectors are drawn from `seed`, W1's first, so the same inputs
/// always give the same scheme.
pub fn build_scheme(
    config: AntennaConfig,
    scenario: CognitionScenario,
    d1: u32,
    d2: u32,
    channel: &ChannelRealization,
    seed: u64,
) -> Result<ZfScheme, ZfError> {
    if channel.config != config || !channel.shapes_match(&config) {
        return Err(ZfError::ChannelMismatch { expected: config, found: channel.config });
    }
    if !is_achievable_point(config, scenario, d1, d2) {
        return Err(ZfError::NotAchievable { config, scenario, d1, d2 });
    }
    let idx1 = active_indices(config, scenario, 1);
    let idx2 = active_indices(config, scenario, 2);
    let r1 = idx1.len().saturating_sub(config.n2 as usize);
    let r2 = idx2.len().saturating_sub(config.n1 as usize);
    let cross1 = restrict_columns(&channel.stacked(4), &idx1);
    let cross2 = restrict_columns(&channel.stacked(3), &idx2);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w1_vectors, nulled1) = message_vectors(&mut rng, &cross1, d1 as usize, r1)?;
    let (w2_vectors, nulled2) = message_vectors(&mut rng, &cross2, d2 as usize, r2)?;
    Ok(ZfScheme {
        config,
        scenario,
        d1,
        d2,
        r1: r1 as u32,
        r2: r2 as u32,
        nulled1,
        nulled2,
        w1_vectors,
        w2_vectors,
    })
}

/// Dimension counts at both receivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeDiagnostics {
    pub signal_dim_rx1: usize,
    pub interference_dim_rx1: usize,
    pub intersection_dim_rx1: usize,
    pub signal_dim_rx2: usize,
    pub interference_dim_rx2: usize,
    pub intersection_dim_rx2: usize,
    pub decodable_w1: bool,
    pub decodable_w2: bool,
    /// Worst relative residual over all zero-forced vectors (0 if none).
    pub null_residual: f64,
    /// Rank of all transmit vectors embedded in the joint transmit space.
    pub transmit_rank: usize,
    pub streams: usize,
}

impl SchemeDiagnostics {
    /// Both messages decodable, nulling exact to tolerance, and the transmit
    /// vectors linearly independent.
    pub fn passes(&self) -> bool {
        self.decodable_w1
            && self.decodable_w2
            && self.null_residual <= NULL_RESIDUAL_TOL
            && self.transmit_rank == self.streams
    }
}

struct ReceiverCount {
    signal: usize,
    interference: usize,
    intersection: usize,
    decodable: bool,
}

fn count_receiver(
    stacked: &DMatrix<f64>,
    own: &DMatrix<f64>,
    other: &DMatrix<f64>,
    cognitive: bool,
    streams: usize,
) -> ReceiverCount {
    let antennas = stacked.nrows();
    let scale = spectral_norm(stacked);
    let signal_m = stacked * own;
    let interference_m = if cognitive { DMatrix::zeros(antennas, 0) } else { stacked * other };
    let signal = rank_with_scale(&signal_m, scale);
    let interference = rank_with_scale(&interference_m, scale);
    let union = rank_with_scale(&hstack(&signal_m, &interference_m), scale);
    let intersection = (signal + interference).saturating_sub(union);
    ReceiverCount {
        signal,
        interference,
        intersection,
        decodable: signal == streams && intersection == 0 && signal + interference <= antennas,
    }
}

fn worst_residual(cross: &DMatrix<f64>, embedded: &DMatrix<f64>, count: usize) -> f64 {
    let norm = spectral_norm(cross);
    (0..count)
        .map(|c| {
            let v = embedded.column(c);
            let denom = norm * v.norm();
            if denom == 0.0 {
                0.0
            } else {
                (cross * v).norm() / denom
            }
        })
        .fold(0.0, f64::max)
}

/// Signal, interference and overlap dimensions at each receiver.
pub fn verify_scheme(scheme: &ZfScheme, channel: &ChannelRealization) -> SchemeDiagnostics {
    let e1 = scheme.embedded_w1();
    let e2 = scheme.embedded_w2();
    let g3 = channel.stacked(3);
    let g4 = channel.stacked(4);
    let rx1 = count_receiver(&g3, &e1, &e2, scheme.scenario.r1, scheme.d1 as usize);
    let rx2 = count_receiver(&g4, &e2, &e1, scheme.scenario.r2, scheme.d2 as usize);
    let null_residual = worst_residual(&g4, &e1, scheme.nulled1).max(worst_residual(&g3, &e2, scheme.nulled2));
    let transmit_rank = rank_with_scale(&hstack(&e1, &e2), 1.0);
    SchemeDiagnostics {
        signal_dim_rx1: rx1.signal,
        interference_dim_rx1: rx1.interference,
        intersection_dim_rx1: rx1.intersection,
        signal_dim_rx2: rx2.signal,
        interference_dim_rx2: rx2.interference,
        intersection_dim_rx2: rx2.intersection,
        decodable_w1: rx1.decodable,
        decodable_w2: rx2.decodable,
        null_residual,
        transmit_rank,
        streams: (scheme.d1 + scheme.d2) as usize,
    }
}

/// Orthonormal basis of the residual interference subspace at receiver
/// node `rx` (3 or 4), after cognitive subtraction.
pub fn interference_basis(scheme: &ZfScheme, channel: &ChannelRealization, rx: usize) -> DMatrix<f64> {
    let g = channel.stacked(rx);
    let (other, cognitive) = match rx {
        3 => (scheme.embedded_w2(), scheme.scenario.r1),
        4 => (scheme.embedded_w1(), scheme.scenario.r2),
        _ => panic!("receiver node must be 3 or 4"),
    };
    if cognitive || other.ncols() == 0 {
        return DMatrix::zeros(g.nrows(), 0);
    }
    column_basis(&(&g * other), linalg::spectral_norm(&g))
}

/// Pass counts for one `(config, scenario, point)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub config: AntennaConfig,
    pub scenario: CognitionScenario,
    pub point: [u32; 2],
    pub trials: u32,
    pub passes: u32,
    pub worst_null_residual: f64,
}

impl SweepCell {
    pub fn all_passed(&self) -> bool {
        self.passes == self.trials
    }
}

/// One cell of trials plus the first failing diagnostics, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub cell: SweepCell,
    pub first_failure: Option<SchemeDiagnostics>,
    /// Diagnostics of the first trial, for reporting.
    pub sample: Option<SchemeDiagnostics>,
}

/// Builds and verifies the scheme on `trials` independent channels.
pub fn run_cell(
    config: AntennaConfig,
    scenario: CognitionScenario,
    d1: u32,
    d2: u32,
    trials: u32,
    seed: u64,
) -> Result<CellOutcome, ZfError> {
    if !is_achievable_point(config, scenario, d1, d2) {
        return Err(ZfError::NotAchievable { config, scenario, d1, d2 });
    }
    let mut cell =
        SweepCell { config, scenario, point: [d1, d2], trials, passes: 0, worst_null_residual: 0.0 };
    let mut first_failure = None;
    let mut sample = None;
    for t in 0..trials as u64 {
        let channel = sample_channel(config, derive_seed(seed, 2 * t), false)?;
        let outcome = build_scheme(config, scenario, d1, d2, &channel, derive_seed(seed, 2 * t + 1))
            .map(|s| verify_scheme(&s, &channel));
        match outcome {
            Ok(diag) => {
                sample.get_or_insert(diag);
                cell.worst_null_residual = cell.worst_null_residual.max(diag.null_residual);
                if diag.passes() {
                    cell.passes += 1;
                } else {
                    first_failure.get_or_insert(diag);
                }
            }
            Err(ZfError::DegenerateKernel { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(CellOutcome { cell, first_failure, sample })
}

fn cell_seed(seed: u64, config: AntennaConfig, scenario: CognitionScenario, d1: u32, d2: u32) -> u64 {
    let b = scenario.bits();
    let key = [config.m1, config.m2, config.n1, config.n2, b[0] as u32, b[1] as u32, b[2] as u32, b[3] as u32, d1, d2]
        .iter()
        .fold(0u64, |acc, &x| acc.wrapping_mul(257).wrapping_add(x as u64 + 1));
    derive_seed(seed, key)
}

/// Pass/fail counts for every achievable point of every config with counts in
/// `1..=max_antennas` and every scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn total_trials(&self) -> u64 {
        self.cells.iter().map(|c| c.trials as u64).sum()
    }

    pub fn total_passes(&self) -> u64 {
        self.cells.iter().map(|c| c.passes as u64).sum()
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| !c.all_passed())
    }

    pub fn worst_null_residual(&self) -> f64 {
        self.cells.iter().map(|c| c.worst_null_residual).fold(0.0, f64::max)
    }
}

/// Monte Carlo validation of every achievable integer point. Each cell uses
/// its own derived seed, so the report does not depend on scheduling.
pub fn achievability_sweep(max_antennas: u32, trials: u32, seed: u64) -> SweepReport {
    if trials == 0 {
        return SweepReport { cells: Vec::new() };
    }
    let mut jobs = Vec::new();
    for config in AntennaConfig::sweep(max_antennas) {
        for scenario in CognitionScenario::all() {
            for &(d1, d2) in &inner_points(config, scenario).points {
                jobs.push((config, scenario, d1, d2));
            }
        }
    }
    let run = |&(config, scenario, d1, d2): &(AntennaConfig, CognitionScenario, u32, u32)| {
        let s = cell_seed(seed, config, scenario, d1, d2);
        match run_cell(config, scenario, d1, d2, trials, s) {
            Ok(out) => out.cell,
            Err(_) => SweepCell { config, scenario, point: [d1, d2], trials, passes: 0, worst_null_residual: f64::NAN },
        }
    };
    #[cfg(feature = "parallel")]
    let cells = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cells = jobs.iter().map(run).collect();
    SweepReport { cells }
}
