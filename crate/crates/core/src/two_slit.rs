//! Two-slit interference with a two-state which-way detector.
//!
//! Each slit contributes a far-field amplitude `√A(x)·e^{±iπxd/(λD)}` with a
//! Gaussian envelope `A(x) = exp(−x²/2σ²)`. Reading the detector in the
//! basis `d±^θ = (e^{iθ}d₁ ± d₂)/√2` splits the screen pattern into
//! `p±(x) = A(x)[1 ± cos(2πxd/(λD) − θ)]`; picking `θ = 2πxd/(λD)` for the
//! position where a photon landed empties the `−` branch there.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use thiserror::Error;

use crate::hilbert::{born_probability, StateVector, Subsystem, C64};
use crate::optics::{canonical_angle, mub_pair, BasisFamily, Outcome};

/// Default envelope width, in fringe periods.
pub const DEFAULT_SIGMA_PERIODS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoSlitError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("screen grid must be non-empty and strictly increasing")]
    BadGrid,
}

fn positive(name: &'static str, value: f64) -> Result<f64, TwoSlitError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(TwoSlitError::NonPositive { name, value })
    }
}

/// `steps` equispaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, TwoSlitError> {
    for (name, value) in [("grid minimum", min), ("grid maximum", max)] {
        if !value.is_finite() {
            return Err(TwoSlitError::NonFinite { name, value });
        }
    }
    if steps < 2 || !(min < max) {
        return Err(TwoSlitError::BadGrid);
    }
    let step = (max - min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k == steps - 1 {
                max
            } else {
                min + step * k as f64
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoSlitConfig {
    slit_separation: f64,
    screen_distance: f64,
    lambda: f64,
    envelope_sigma: f64,
    grid: Vec<f64>,
}

impl TwoSlitConfig {
    /// `envelope_sigma = None` selects [`DEFAULT_SIGMA_PERIODS`] fringe periods.
    pub fn new(
        slit_separation: f64,
        screen_distance: f64,
        lambda: f64,
        envelope_sigma: Option<f64>,
        grid: Vec<f64>,
    ) -> Result<Self, TwoSlitError> {
        let d = positive("slit separation", slit_separation)?;
        let big_d = positive("screen distance", screen_distance)?;
        let lambda = positive("wavelength", lambda)?;
        let sigma = match envelope_sigma {
            Some(s) => positive("envelope sigma", s)?,
            None => positive("envelope sigma", DEFAULT_SIGMA_PERIODS * lambda * big_d / d)?,
        };
        if grid.is_empty()
            || grid.iter().any(|x| !x.is_finite())
            || grid.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(TwoSlitError::BadGrid);
        }
        Ok(TwoSlitConfig {
            slit_separation: d,
            screen_distance: big_d,
            lambda,
            envelope_sigma: sigma,
            grid,
        })
    }

    pub fn slit_separation(&self) -> f64 {
        self.slit_separation
    }

    pub fn screen_distance(&self) -> f64 {
        self.screen_distance
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn envelope_sigma(&self) -> f64 {
        self.envelope_sigma
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `λD/d`
    pub fn fringe_period(&self) -> f64 {
        self.lambda * self.screen_distance / self.slit_separation
    }

    pub fn envelope(&self, x: f64) -> f64 {
        (-x * x / (2.0 * self.envelope_sigma * self.envelope_sigma)).exp()
    }

    /// `2πxd/(λD)`
    pub fn fringe_phase(&self, x: f64) -> f64 {
        TAU * x * self.slit_separation / (self.lambda * self.screen_distance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternSample {
    pub x: f64,
    pub envelope: f64,
    pub p_plus: f64,
    pub p_minus: f64,
}

/// Which-way detector outcome in the `d±^θ` basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WhichWay {
    Plus,
    Minus,
}

impl WhichWay {
    pub const fn label(self) -> &'static str {
        match self {
            WhichWay::Plus => "plus",
            WhichWay::Minus => "minus",
        }
    }

    pub const fn outcome(self) -> Outcome {
        match self {
            WhichWay::Plus => Outcome::First,
            WhichWay::Minus => Outcome::Second,
        }
    }
}

/// Screen amplitudes `(ψ₁(x), ψ₂(x))` of the two slits.
pub fn slit_amplitudes(cfg: &TwoSlitConfig, x: f64) -> (C64, C64) {
    let amp = cfg.envelope(x).sqrt();
    let half = PI * x * cfg.slit_separation / (cfg.lambda * cfg.screen_distance);
    (C64::from_polar(amp, half), C64::from_polar(amp, -half))
}

/// `p±(x) = A(x)[1 ± cos(2πxd/(λD) − θ)]` over the grid.
pub fn pattern(cfg: &TwoSlitConfig, theta: f64) -> Vec<PatternSample> {
    cfg.grid
        .iter()
        .map(|&x| closed_form_sample(cfg, x, theta))
        .collect()
}

fn closed_form_sample(cfg: &TwoSlitConfig, x: f64, theta: f64) -> PatternSample {
    let envelope = cfg.envelope(x);
    let cos = (cfg.fringe_phase(x) - theta).cos();
    PatternSample {
        x,
        envelope,
        p_plus: envelope * (1.0 + cos),
        p_minus: envelope * (1.0 - cos),
    }
}

/// The same pattern as [`pattern`], computed as `|(e^{−iθ}ψ₁ ± ψ₂)/√2|²`.
pub fn pattern_from_amplitudes(cfg: &TwoSlitConfig, theta: f64) -> Vec<PatternSample> {
    cfg.grid
        .iter()
        .map(|&x| amplitude_sample(cfg, x, theta))
        .collect()
}

fn amplitude_sample(cfg: &TwoSlitConfig, x: f64, theta: f64) -> PatternSample {
    let (psi1, psi2) = slit_amplitudes(cfg, x);
    let rotated = C64::from_polar(1.0, -theta) * psi1;
    PatternSample {
        x,
        envelope: psi1.norm_sqr(),
        p_plus: ((rotated + psi2) * FRAC_1_SQRT_2).norm_sqr(),
        p_minus: ((rotated - psi2) * FRAC_1_SQRT_2).norm_sqr(),
    }
}

/// Detector basis angle that forces the `+` outcome for a photon at `x`.
pub fn theta_star(cfg: &TwoSlitConfig, x: f64) -> f64 {
    canonical_angle(cfg.fringe_phase(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErasureCheck {
    pub x: f64,
    pub theta: f64,
    pub envelope: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Probability of `d₊^θ` for the detector state conditioned on a photon at `x`.
    pub plus_probability: f64,
    /// The outcome when it is certain within tolerance.
    pub forced_outcome: Option<WhichWay>,
}

/// Evaluates the pattern at `x` in the basis `θ*(x)` and reads the
/// conditional which-way state in that basis.
pub fn erased_basis_check(cfg: &TwoSlitConfig, x: f64) -> ErasureCheck {
    let theta = theta_star(cfg, x);
    let sample = amplitude_sample(cfg, x, theta);

    // The envelope is a common factor, so the conditional detector state
    // is (e^{iα}|d₁⟩ + e^{−iα}|d₂⟩)/√2 at every x.
    let half = 0.5 * cfg.fringe_phase(x);
    let detector = StateVector::new(
        vec![Subsystem::WwDetector],
        vec![
            C64::from_polar(FRAC_1_SQRT_2, half),
            C64::from_polar(FRAC_1_SQRT_2, -half),
        ],
    )
    .expect("unit vector");
    let basis = mub_pair(BasisFamily::DetectorPM, theta).expect("finite angle");
    let plus_probability = born_probability(
        &detector,
        &[(Subsystem::WwDetector, basis.ket(Outcome::First))],
    )
    .expect("normalized basis ket");

    let tol = crate::hilbert::tolerance();
    let forced_outcome = if plus_probability >= 1.0 - tol {
        Some(WhichWay::Plus)
    } else if plus_probability <= tol {
        Some(WhichWay::Minus)
    } else {
        None
    };
    ErasureCheck {
        x,
        theta,
        envelope: sample.envelope,
        p_plus: sample.p_plus,
        p_minus: sample.p_minus,
        plus_probability,
        forced_outcome,
    }
}

/// Fringe visibility `(max − min)/(max + min)`.
pub fn visibility(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / (max + min)
}
