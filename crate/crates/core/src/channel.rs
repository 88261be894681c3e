//! Antenna configurations, cognition scenarios and random channel draws.
//!
//! Node numbering follows the usual two-user convention: nodes 1 and 2 are
//! the transmitters (with `m1`, `m2` antennas), nodes 3 and 4 the receivers
//! (with `n1`, `n2` antennas). `H[j][i]` is the channel from node `i` to
//! node `j`, with rows indexed by the receive antennas of `j`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Maximum number of draws before a channel is declared degenerate.
pub const MAX_SAMPLE_ATTEMPTS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("antenna count `{field}` must be at least 1 (got {value})")]
    InvalidCount { field: &'static str, value: i64 },
    #[error("expected four comma-separated values, got `{0}`")]
    Malformed(String),
    #[error("scenario entries must be 0 or 1, got `{0}`")]
    BadIndicator(String),
    #[error("no full-rank channel after {attempts} draws from seed {seed}; the RNG looks degenerate")]
    Degenerate { seed: u64, attempts: u32 },
}

/// Antenna counts `(M1, M2, N1, N2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct AntennaConfig {
    pub m1: u32,
    pub m2: u32,
    pub n1: u32,
    pub n2: u32,
}

#[derive(Deserialize)]
struct RawConfig {
    m1: i64,
    m2: i64,
    n1: i64,
    n2: i64,
}

impl TryFrom<RawConfig> for AntennaConfig {
    type Error = ChannelError;

    fn try_from(raw: RawConfig) -> Result<Self, Self::Error> {
        validate_config(raw.m1, raw.m2, raw.n1, raw.n2)
    }
}

/// Builds a config, rejecting any count below one.
pub fn validate_config(m1: i64, m2: i64, n1: i64, n2: i64) -> Result<AntennaConfig, ChannelError> {
    let check = |field: &'static str, value: i64| -> Result<u32, ChannelError> {
        if value < 1 || value > u32::MAX as i64 {
            Err(ChannelError::InvalidCount { field, value })
        } else {
            Ok(value as u32)
        }
    };
    Ok(AntennaConfig {
        m1: check("m1", m1)?,
        m2: check("m2", m2)?,
        n1: check("n1", n1)?,
        n2: check("n2", n2)?,
    })
}

impl AntennaConfig {
    pub fn new(m1: u32, m2: u32, n1: u32, n2: u32) -> Result<Self, ChannelError> {
        validate_config(m1 as i64, m2 as i64, n1 as i64, n2 as i64)
    }

    /// Antenna count of node 1..=4 (transmitters first, then receivers).
    pub fn node_antennas(&self, node: usize) -> usize {
        match node {
            1 => self.m1 as usize,
            2 => self.m2 as usize,
            3 => self.n1 as usize,
            4 => self.n2 as usize,
            _ => panic!("node index {node} out of range 1..=4"),
        }
    }

    pub fn total_transmit(&self) -> usize {
        (self.m1 + self.m2) as usize
    }

    /// Every config with all four counts in `1..=max`, in lexicographic order.
    pub fn sweep(max: u32) -> Vec<AntennaConfig> {
        let mut out = Vec::with_capacity((max as usize).pow(4));
        for m1 in 1..=max {
            for m2 in 1..=max {
                for n1 in 1..=max {
                    for n2 in 1..=max {
                        out.push(AntennaConfig { m1, m2, n1, n2 });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for AntennaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.m1, self.m2, self.n1, self.n2)
    }
}

impl FromStr for AntennaConfig {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(ChannelError::Malformed(s.to_string()));
        }
        let mut vals = [0i64; 4];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p.parse().map_err(|_| ChannelError::Malformed(s.to_string()))?;
        }
        validate_config(vals[0], vals[1], vals[2], vals[3])
    }
}

/// Which nodes hold the other user's message: `[1_T1, 1_T2, 1_R1, 1_R2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CognitionScenario {
    pub t1: bool,
    pub t2: bool,
    pub r1: bool,
    pub r2: bool,
}

impl CognitionScenario {
    pub const NONE: CognitionScenario = CognitionScenario::from_bits([0, 0, 0, 0]);

    pub const fn from_bits(bits: [u8; 4]) -> Self {
        CognitionScenario {
            t1: bits[0] != 0,
            t2: bits[1] != 0,
            r1: bits[2] != 0,
            r2: bits[3] != 0,
        }
    }

    pub fn bits(&self) -> [u8; 4] {
        [self.t1 as u8, self.t2 as u8, self.r1 as u8, self.r2 as u8]
    }

    /// All 16 scenarios, ordered by their label read as a binary number.
    pub fn all() -> impl Iterator<Item = CognitionScenario> {
        (0u8..16).map(|k| Self::from_bits([(k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1]))
    }
}

impl fmt::Display for CognitionScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.bits();
        write!(f, "[{},{},{},{}]", b[0], b[1], b[2], b[3])
    }
}

impl FromStr for CognitionScenario {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim_matches(['[', ']']).split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(ChannelError::Malformed(s.to_string()));
        }
        let mut bits = [0u8; 4];
        for (b, p) in bits.iter_mut().zip(&parts) {
            *b = match *p {
                "0" => 0,
                "1" => 1,
                _ => return Err(ChannelError::BadIndicator(p.to_string())),
            };
        }
        Ok(Self::from_bits(bits))
    }
}

impl Serialize for CognitionScenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.bits().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CognitionScenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bits = <[u8; 4]>::deserialize(deserializer)?;
        if bits.iter().any(|&b| b > 1) {
            return Err(serde::de::Error::custom("scenario entries must be 0 or 1"));
        }
        Ok(Self::from_bits(bits))
    }
}

/// Relabels user 1 as user 2 and vice versa.
pub fn swap_users(
    config: AntennaConfig,
    scenario: CognitionScenario,
) -> (AntennaConfig, CognitionScenario) {
    (
        AntennaConfig { m1: config.m2, m2: config.m1, n1: config.n2, n2: config.n1 },
        CognitionScenario { t1: scenario.t2, t2: scenario.t1, r1: scenario.r2, r2: scenario.r1 },
    )
}

/// One draw of every channel matrix in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub config: AntennaConfig,
    pub h31: DMatrix<f64>,
    pub h32: DMatrix<f64>,
    pub h41: DMatrix<f64>,
    pub h42: DMatrix<f64>,
    /// All 16 directed links `(rx node, tx node)` of the full-duplex model,
    /// present only for extended draws. The four interference-channel
    /// entries alias the fields above.
    pub extended_links: Option<BTreeMap<(usize, usize), DMatrix<f64>>>,
    pub seed: u64,
}

impl ChannelRealization {
    /// `[H(rx,1) H(rx,2)]` for receiver node 3 or 4.
    pub fn stacked(&self, rx: usize) -> DMatrix<f64> {
        let (a, b) = match rx {
            3 => (&self.h31, &self.h32),
            4 => (&self.h41, &self.h42),
            _ => panic!("receiver node must be 3 or 4, got {rx}"),
        };
        let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
        out.columns_mut(0, a.ncols()).copy_from(a);
        out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
        out
    }

    pub fn link(&self, rx: usize, tx: usize) -> Option<&DMatrix<f64>> {
        match (rx, tx) {
            (3, 1) => Some(&self.h31),
            (3, 2) => Some(&self.h32),
            (4, 1) => Some(&self.h41),
            (4, 2) => Some(&self.h42),
            _ => self.extended_links.as_ref().and_then(|m| m.get(&(rx, tx))),
        }
    }

    pub fn shapes_match(&self, config: &AntennaConfig) -> bool {
        let dims = |rx: usize, tx: usize| (config.node_antennas(rx), config.node_antennas(tx));
        let base = [(3, 1, &self.h31), (3, 2, &self.h32), (4, 1, &self.h41), (4, 2, &self.h42)]
            .into_iter()
            .all(|(rx, tx, m)| m.shape() == dims(rx, tx));
        let ext = self
            .extended_links
            .as_ref()
            .is_none_or(|links| links.iter().all(|(&(rx, tx), m)| m.shape() == dims(rx, tx)));
        base && ext
    }

    fn all_matrices(&self) -> impl Iterator<Item = &DMatrix<f64>> {
        [&self.h31, &self.h32, &self.h41, &self.h42]
            .into_iter()
            .chain(self.extended_links.iter().flat_map(|m| m.values()))
    }

    pub fn all_full_rank(&self) -> bool {
        self.all_matrices().all(linalg::is_full_rank)
    }
}

/// Mixes a seed with a stream index (splitmix64 finaliser).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn draw(config: AntennaConfig, draw_seed: u64, seed: u64, extended: bool) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(draw_seed);
    let h31 = gaussian(&mut rng, config.n1 as usize, config.m1 as usize);
    let h32 = gaussian(&mut rng, config.n1 as usize, config.m2 as usize);
    let h41 = gaussian(&mut rng, config.n2 as usize, config.m1 as usize);
    let h42 = gaussian(&mut rng, config.n2 as usize, config.m2 as usize);
    let extended_links = extended.then(|| {
        let mut links = BTreeMap::new();
        for rx in 1..=4 {
            for tx in 1..=4 {
                let m = match (rx, tx) {
                    (3, 1) => h31.clone(),
                    (3, 2) => h32.clone(),
                    (4, 1) => h41.clone(),
                    (4, 2) => h42.clone(),
                    _ => gaussian(&mut rng, config.node_antennas(rx), config.node_antennas(tx)),
                };
                links.insert((rx, tx), m);
            }
        }
        links
    });
    ChannelRealization { config, h31, h32, h41, h42, extended_links, seed }
}

/// Draws i.i.d. standard normal channels. The same `(config, seed, extended)`
/// always yields the same matrices. A rank-deficient draw is retried with a
/// derived seed.
pub fn sample_channel(
    config: AntennaConfig,
    seed: u64,
    extended: bool,
) -> Result<ChannelRealization, ChannelError> {
    for attempt in 0..MAX_SAMPLE_ATTEMPTS {
        let draw_seed = if attempt == 0 { seed } else { derive_seed(seed, attempt as u64) };
        let realization = draw(config, draw_seed, seed, extended);
        if realization.all_full_rank() {
            return Ok(realization);
        }
    }
    Err(ChannelError::Degenerate { seed, attempts: MAX_SAMPLE_ATTEMPTS })
}
