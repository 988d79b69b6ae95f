//! Seeded sampling of joint detection events and coincidence scans.
//!
//! All randomness comes from ChaCha8 seeded with [`RngSeed`] through
//! `seed_from_u64`. Independent draws use separate ChaCha streams of that
//! key: scan step `k` draws from stream `k`, and single-configuration
//! samplers use stream 0. A step's events therefore depend only on the
//! master seed and its own index, never on how many steps the scan has.
//!
//! Each uniform variate is the top 53 bits of one `next_u64` call, mapped
//! onto `[0, 1)`, and selects a cell by inverse CDF over the explicit
//! outcome table. Table entries below the global tolerance are snapped to
//! zero first, so outcomes with vanishing probability are never drawn.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::hilbert;
use crate::mz_eraser::{adaptive_basis, correlation_table, Detector, JointTable, MzConfig};
use crate::optics::{BasisFamily, BasisPair, OpticsError, Outcome};
use crate::two_slit::{erased_basis_check, pattern, TwoSlitConfig, TwoSlitError, WhichWay};

/// Tolerance on the total of an expected probability table.
pub const TABLE_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("no events to check")]
    EmptyEvents,
    #[error("expected probability table is empty")]
    EmptyExpected,
    #[error("{counts} observed cells but {expected} expected cells")]
    LengthMismatch { counts: usize, expected: usize },
    #[error("expected probabilities sum to {sum}, not 1")]
    ExpectedNotNormalized { sum: f64 },
    #[error("invalid scan: {0}")]
    InvalidScan(&'static str),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    TwoSlit(#[from] TwoSlitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

/// The generator for stream `stream` under `seed`.
pub fn stream_rng(seed: RngSeed, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(stream);
    rng
}

/// A uniform variate in [0, 1) built from the top 53 bits of one draw.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF sampler over a finite table.
#[derive(Clone, Debug)]
struct CellSampler {
    cdf: Vec<f64>,
    last_nonzero: usize,
}

impl CellSampler {
    fn new(weights: &[f64]) -> Option<Self> {
        let tol = hilbert::tolerance();
        let snapped: Vec<f64> = weights
            .iter()
            .map(|&w| if w.is_finite() && w > tol { w } else { 0.0 })
            .collect();
        let total: f64 = snapped.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let last_nonzero = snapped.iter().rposition(|&w| w > 0.0)?;
        let mut acc = 0.0;
        let cdf = snapped
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        Some(CellSampler { cdf, last_nonzero })
    }

    fn draw(&self, rng: &mut impl RngCore) -> usize {
        let u = uniform(rng);
        let k = self.cdf.partition_point(|&c| c <= u);
        if k < self.cdf.len() {
            k
        } else {
            self.last_nonzero
        }
    }
}

fn table_sampler(table: &JointTable) -> CellSampler {
    let flat: Vec<f64> = table.entries.iter().flatten().copied().collect();
    CellSampler::new(&flat).expect("joint table has positive mass")
}

fn cell(index: usize) -> (Detector, Outcome) {
    (Detector::ALL[index / 2], Outcome::ALL[index % 2])
}

/// One sampled coincidence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub trial: usize,
    pub x: f64,
    pub detector: Detector,
    pub idler_outcome: Outcome,
    pub basis_theta: f64,
    pub family: BasisFamily,
}

impl EventRecord {
    pub fn idler_label(&self) -> &'static str {
        self.family.label(self.idler_outcome)
    }
}

/// `n` independent joint detections at one configuration, from stream 0.
pub fn sample_joint(
    cfg: &MzConfig,
    basis: &BasisPair,
    n: usize,
    seed: RngSeed,
) -> Result<Vec<EventRecord>, MonteCarloError> {
    if n == 0 {
        return Err(MonteCarloError::ZeroCount);
    }
    let table = correlation_table(cfg, basis)?;
    let sampler = table_sampler(&table);
    let mut rng = stream_rng(seed, 0);
    Ok((0..n)
        .map(|trial| {
            let (detector, idler_outcome) = cell(sampler.draw(&mut rng));
            EventRecord {
                trial,
                x: cfg.x(),
                detector,
                idler_outcome,
                basis_theta: basis.theta(),
                family: basis.family(),
            }
        })
        .collect())
}

/// How the idler basis is chosen at each scan position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisPolicy {
    Fixed(BasisPair),
    /// `P/Q` basis at `θ = 2πx/λ`.
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub steps: usize,
    pub shots: u64,
    pub policy: BasisPolicy,
    /// Draw each position's shot count from a Poisson law with mean `shots`.
    pub poisson: bool,
}

impl ScanSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        steps: usize,
        shots: u64,
        policy: BasisPolicy,
    ) -> Result<Self, MonteCarloError> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(MonteCarloError::InvalidScan("scan bounds must be finite"));
        }
        if !(x_min < x_max) {
            return Err(MonteCarloError::InvalidScan("x_min must be below x_max"));
        }
        if steps < 2 {
            return Err(MonteCarloError::InvalidScan(
                "at least two steps are required",
            ));
        }
        if shots == 0 {
            return Err(MonteCarloError::ZeroCount);
        }
        if let BasisPolicy::Fixed(basis) = policy {
            if basis.family() == BasisFamily::DetectorPM {
                return Err(MonteCarloError::InvalidScan(
                    "scan basis must act on the idler",
                ));
            }
        }
        Ok(ScanSpec {
            x_min,
            x_max,
            steps,
            shots,
            policy,
            poisson: false,
        })
    }

    pub fn with_poisson(mut self, poisson: bool) -> Self {
        self.poisson = poisson;
        self
    }

    /// Equispaced positions, both ends included.
    pub fn positions(&self) -> Vec<f64> {
        let step = (self.x_max - self.x_min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k == self.steps - 1 {
                    self.x_max
                } else {
                    self.x_min + step * k as f64
                }
            })
            .collect()
    }
}

/// Tallies at one scan position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub step: usize,
    pub x: f64,
    pub basis: BasisPair,
    pub shots: u64,
    /// Indexed `[detector][outcome]`.
    pub counts: [[u64; 2]; 2],
    pub expected: JointTable,
}

impl ScanRow {
    pub fn count(&self, detector: Detector, outcome: Outcome) -> u64 {
        self.counts[detector.index()][outcome.index()]
    }

    pub fn frequency(&self, detector: Detector, outcome: Outcome) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(detector, outcome) as f64 / self.shots as f64
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceHistogram {
    pub rows: Vec<ScanRow>,
}

/// Coincidence scan over the splitter displacement.
///
/// `template` supplies the wavelength; its displacement is ignored.
pub fn scan(
    template: &MzConfig,
    spec: &ScanSpec,
    seed: RngSeed,
) -> Result<CoincidenceHistogram, MonteCarloError> {
    let rows = spec
        .positions()
        .into_iter()
        .enumerate()
        .map(|(step, x)| scan_step(template, spec, seed, step, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoincidenceHistogram { rows })
}

fn scan_step(
    template: &MzConfig,
    spec: &ScanSpec,
    seed: RngSeed,
    step: usize,
    x: f64,
) -> Result<ScanRow, MonteCarloError> {
    let cfg = template.with_x(x)?;
    let basis = match spec.policy {
        BasisPolicy::Fixed(b) => b,
        BasisPolicy::Adaptive => adaptive_basis(&cfg),
    };
    let expected = correlation_table(&cfg, &basis)?;
    let sampler = table_sampler(&expected);
    let mut rng = stream_rng(seed, step as u64);
    let shots = if spec.poisson {
        let law = Poisson::new(spec.shots as f64).expect("positive mean");
        law.sample(&mut rng) as u64
    } else {
        spec.shots
    };
    let mut counts = [[0u64; 2]; 2];
    for _ in 0..shots {
        let (d, o) = cell(sampler.draw(&mut rng));
        counts[d.index()][o.index()] += 1;
    }
    Ok(ScanRow {
        step,
        x,
        basis,
        shots,
        counts,
        expected,
    })
}

/// A photon registered on the two-slit screen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenEvent {
    pub trial: usize,
    pub x: f64,
    pub theta_star: f64,
    pub outcome: WhichWay,
}

/// Draws screen positions on the configured grid from the which-way
/// marginal `p₊ + p₋ = 2A(x)`, then the detector outcome in the basis
/// `θ*(x)` by the Born rule. Uses stream 0.
pub fn sample_two_slit(
    cfg: &TwoSlitConfig,
    n: usize,
    seed: RngSeed,
) -> Result<Vec<ScreenEvent>, MonteCarloError> {
    if n == 0 {
        return Err(MonteCarloError::ZeroCount);
    }
    let marginal: Vec<f64> = pattern(cfg, 0.0)
        .iter()
        .map(|s| s.p_plus + s.p_minus)
        .collect();
    let positions = CellSampler::new(&marginal).ok_or(MonteCarloError::InvalidScan(
        "envelope vanishes on the whole grid",
    ))?;
    let checks: Vec<_> = cfg
        .grid()
        .iter()
        .map(|&x| {
            let check = erased_basis_check(cfg, x);
            let p = check.plus_probability;
            let outcome = CellSampler::new(&[p, 1.0 - p]).expect("one branch has mass");
            (check, outcome)
        })
        .collect();
    let mut rng = stream_rng(seed, 0);
    Ok((0..n)
        .map(|trial| {
            let (check, outcome) = &checks[positions.draw(&mut rng)];
            let outcome = match outcome.draw(&mut rng) {
                0 => WhichWay::Plus,
                _ => WhichWay::Minus,
            };
            ScreenEvent {
                trial,
                x: check.x,
                theta_star: check.theta,
                outcome,
            }
        })
        .collect())
}

/// Per-cell comparison of observed counts with an expected probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellCheck {
    pub expected: f64,
    pub count: u64,
    pub frequency: f64,
    /// `(freq − p)/√(p(1−p)/n)`; zero or infinite for degenerate `p`.
    pub z: f64,
    /// A zero-probability cell was hit, or a certain cell was missed.
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyReport {
    pub n: u64,
    pub cells: Vec<CellCheck>,
}

impl FrequencyReport {
    pub fn max_abs_z(&self) -> f64 {
        self.cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }

    pub fn has_violation(&self) -> bool {
        self.cells.iter().any(|c| c.violation)
    }

    pub fn passes(&self, z_limit: f64) -> bool {
        !self.has_violation() && self.max_abs_z() < z_limit
    }
}

/// Binomial z-scores of `counts` against `expected`.
pub fn check_counts(counts: &[u64], expected: &[f64]) -> Result<FrequencyReport, MonteCarloError> {
    if expected.is_empty() {
        return Err(MonteCarloError::EmptyExpected);
    }
    if counts.len() != expected.len() {
        return Err(MonteCarloError::LengthMismatch {
            counts: counts.len(),
            expected: expected.len(),
        });
    }
    let sum: f64 = expected.iter().sum();
    if !((sum - 1.0).abs() <= TABLE_SUM_TOLERANCE)
        || expected.iter().any(|&p| p < -TABLE_SUM_TOLERANCE)
    {
        return Err(MonteCarloError::ExpectedNotNormalized { sum });
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(MonteCarloError::EmptyEvents);
    }
    let tol = hilbert::tolerance();
    let cells = counts
        .iter()
        .zip(expected)
        .map(|(&count, &p)| {
            let frequency = count as f64 / n as f64;
            let (z, violation) = if p <= tol {
                if count == 0 {
                    (0.0, false)
                } else {
                    (f64::INFINITY, true)
                }
            } else if p >= 1.0 - tol {
                if count == n {
                    (0.0, false)
                } else {
                    (f64::NEG_INFINITY, true)
                }
            } else {
                ((frequency - p) / (p * (1.0 - p) / n as f64).sqrt(), false)
            };
            CellCheck {
                expected: p,
                count,
                frequency,
                z,
                violation,
            }
        })
        .collect();
    Ok(FrequencyReport { n, cells })
}

/// Tallies `events` into the four joint cells and checks them against `expected`.
pub fn frequency_check(
    events: &[EventRecord],
    expected: &JointTable,
) -> Result<FrequencyReport, MonteCarloError> {
    if events.is_empty() {
        return Err(MonteCarloError::EmptyEvents);
    }
    let mut counts = [0u64; 4];
    for e in events {
        counts[e.detector.index() * 2 + e.idler_outcome.index()] += 1;
    }
    let probs: Vec<f64> = expected.entries.iter().flatten().copied().collect();
    check_counts(&counts, &probs)
}
