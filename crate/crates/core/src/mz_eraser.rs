//! The Mach-Zehnder eraser with a polarization-entangled photon pair.
//!
//! The signal photon starts in `(|V_s H_i⟩ + |H_s V_i⟩)/√2`, is split by
//! polarization into two arms, has its polarization in arm `ψ₁` rotated by
//! 90°, picks up a phase `e^{2πix/λ}` in arm `ψ₂` from the displaced first
//! splitter, and is recombined onto the detectors `D₁`, `D₂`. The idler is
//! never touched; every statistic is a joint one over detector and idler.
//!
//! Register layout of every state built here is
//! `(signal_pol, idler_pol, signal_path)`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;

use crate::hilbert::{
    apply_local, born_probability, post_select, tensor, Ket, StateVector, Subsystem, C64,
};
use crate::optics::{
    self, beam_splitter, canonical_angle, conditional_pol_flip, mub_pair, pbs_route, BasisFamily,
    BasisPair, OpticsError, Outcome,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detector {
    D1,
    D2,
}

impl Detector {
    pub const ALL: [Detector; 2] = [Detector::D1, Detector::D2];

    pub const fn index(self) -> usize {
        match self {
            Detector::D1 => 0,
            Detector::D2 => 1,
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
        }
    }

    pub fn ket(self) -> Ket {
        Ket::basis(self.index())
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Displacement `x` of the first splitter and the wavelength, in the same length unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MzConfig {
    x: f64,
    lambda: f64,
}

impl MzConfig {
    pub fn new(x: f64, lambda: f64) -> Result<Self, OpticsError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(OpticsError::InvalidWavelength(lambda));
        }
        if !x.is_finite() {
            return Err(OpticsError::NonFiniteLength(x));
        }
        let cfg = MzConfig { x, lambda };
        if !cfg.phase().is_finite() {
            return Err(OpticsError::NonFiniteAngle(cfg.phase()));
        }
        Ok(cfg)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `φ = 2πx/λ`, not reduced.
    pub fn phase(&self) -> f64 {
        TAU * self.x / self.lambda
    }

    pub fn with_x(&self, x: f64) -> Result<Self, OpticsError> {
        Self::new(x, self.lambda)
    }
}

/// Order in which the two photons are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementOrder {
    /// Signal at the detectors first, idler later (delayed mode).
    SignalFirst,
    /// Idler first, signal later.
    IdlerFirst,
}

/// The entangled pair as it leaves the source.
pub fn initial_state() -> StateVector {
    let pair = StateVector::new(
        vec![Subsystem::SignalPol, Subsystem::IdlerPol],
        vec![
            C64::new(0.0, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
    .expect("Bell pair is normalized");
    let port = StateVector::basis(Subsystem::SignalPath, 0).expect("source port");
    tensor(&pair, &port).expect("disjoint registers")
}

/// State just before the recombining splitter.
pub fn evolve_pre_bs2(cfg: &MzConfig) -> StateVector {
    let phase = optics::path_phase_radians(cfg.phase()).expect("validated config");
    [pbs_route(), conditional_pol_flip(), phase]
        .iter()
        .fold(initial_state(), |s, op| {
            apply_local(op, &s).expect("element sequence matches stages")
        })
}

/// State just before the signal photon reaches the detectors.
pub fn evolve_final(cfg: &MzConfig) -> StateVector {
    apply_local(&beam_splitter(), &evolve_pre_bs2(cfg)).expect("arms stage")
}

fn check_idler_basis(basis: &BasisPair) -> Result<(), OpticsError> {
    if basis.register() != Subsystem::IdlerPol {
        return Err(OpticsError::WrongRegister {
            family: basis.family(),
            expected: Subsystem::IdlerPol,
        });
    }
    Ok(())
}

/// Born probability of the signal at `detector` and the idler in `outcome` of `basis`.
pub fn joint_probability(
    cfg: &MzConfig,
    detector: Detector,
    basis: &BasisPair,
    outcome: Outcome,
) -> Result<f64, OpticsError> {
    check_idler_basis(basis)?;
    joint_probability_in(&evolve_final(cfg), detector, basis, outcome)
}

fn joint_probability_in(
    state: &StateVector,
    detector: Detector,
    basis: &BasisPair,
    outcome: Outcome,
) -> Result<f64, OpticsError> {
    Ok(born_probability(
        state,
        &[
            (Subsystem::SignalPath, detector.ket()),
            (Subsystem::IdlerPol, basis.ket(outcome)),
        ],
    )?)
}

/// The idler basis angle that restores perfect correlation at this position.
pub fn mub_for_position(cfg: &MzConfig) -> f64 {
    canonical_angle(cfg.phase())
}

/// The `P/Q` basis at [`mub_for_position`].
pub fn adaptive_basis(cfg: &MzConfig) -> BasisPair {
    mub_pair(BasisFamily::PolarizationPQ, mub_for_position(cfg)).expect("finite angle")
}

/// Full detector × idler-outcome distribution in one idler basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointTable {
    pub basis: BasisPair,
    /// Indexed `[detector][outcome]`.
    pub entries: [[f64; 2]; 2],
}

impl JointTable {
    pub fn get(&self, detector: Detector, outcome: Outcome) -> f64 {
        self.entries[detector.index()][outcome.index()]
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }

    pub fn detector_marginal(&self, detector: Detector) -> f64 {
        self.entries[detector.index()].iter().sum()
    }

    pub fn outcome_marginal(&self, outcome: Outcome) -> f64 {
        self.entries.iter().map(|row| row[outcome.index()]).sum()
    }

    /// Cells in `(D1, first), (D1, second), (D2, first), (D2, second)` order.
    pub fn cells(&self) -> impl Iterator<Item = (Detector, Outcome, f64)> + '_ {
        Detector::ALL.into_iter().flat_map(move |d| {
            Outcome::ALL
                .into_iter()
                .map(move |o| (d, o, self.get(d, o)))
        })
    }

    pub fn max_deviation(&self, other: &[[f64; 2]; 2]) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn correlation_table(cfg: &MzConfig, basis: &BasisPair) -> Result<JointTable, OpticsError> {
    check_idler_basis(basis)?;
    let state = evolve_final(cfg);
    let mut entries = [[0.0; 2]; 2];
    for d in Detector::ALL {
        for o in Outcome::ALL {
            entries[d.index()][o.index()] = joint_probability_in(&state, d, basis, o)?;
        }
    }
    Ok(JointTable {
        basis: *basis,
        entries,
    })
}

/// Joint distribution obtained by measuring one photon, collapsing, then
/// measuring the other.
pub fn joint_distribution(
    state: &StateVector,
    basis: &BasisPair,
    order: MeasurementOrder,
) -> Result<[[f64; 2]; 2], OpticsError> {
    check_idler_basis(basis)?;
    let mut table = [[0.0; 2]; 2];
    match order {
        MeasurementOrder::SignalFirst => {
            for d in Detector::ALL {
                let first = post_select(state, Subsystem::SignalPath, &d.ket())?;
                let Some(rest) = first.state else { continue };
                for o in Outcome::ALL {
                    let p = born_probability(&rest, &[(Subsystem::IdlerPol, basis.ket(o))])?;
                    table[d.index()][o.index()] = first.probability * p;
                }
            }
        }
        MeasurementOrder::IdlerFirst => {
            for o in Outcome::ALL {
                let first = post_select(state, Subsystem::IdlerPol, &basis.ket(o))?;
                let Some(rest) = first.state else { continue };
                for d in Detector::ALL {
                    let p = born_probability(&rest, &[(Subsystem::SignalPath, d.ket())])?;
                    table[d.index()][o.index()] = first.probability * p;
                }
            }
        }
    }
    Ok(table)
}

/// Sup-norm difference between the delayed and advanced measurement orders.
pub fn mode_equivalence_check(cfg: &MzConfig, basis: &BasisPair) -> Result<f64, OpticsError> {
    let state = evolve_final(cfg);
    let delayed = joint_distribution(&state, basis, MeasurementOrder::SignalFirst)?;
    let advanced = joint_distribution(&state, basis, MeasurementOrder::IdlerFirst)?;
    Ok(delayed
        .iter()
        .flatten()
        .zip(advanced.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Worst deviation observed for one analytic property over a set of cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
}

/// Evaluates the analytic properties of the setup at the displacements
/// `xs`, using `thetas` as idler `P/Q` angles for the measurement-order
/// check (paired with `xs` cyclically).
pub fn analytic_checks(
    lambda: f64,
    xs: &[f64],
    thetas: &[f64],
) -> Result<Vec<InvariantCheck>, OpticsError> {
    let rl = mub_pair(BasisFamily::CircularRL, 0.0)?;
    let hv = mub_pair(BasisFamily::LinearHV, 0.0)?;
    let erased = [[0.0, 0.5], [0.5, 0.0]];
    let mut checks = Vec::new();
    let mut record = |name, cases, max_deviation| {
        checks.push(InvariantCheck {
            name,
            cases,
            max_deviation,
        })
    };

    let origin = MzConfig::new(0.0, lambda)?;
    record(
        "circular_correlation_at_origin",
        1,
        correlation_table(&origin, &rl)?.max_deviation(&erased),
    );

    let mut marginal: f64 = 0.0;
    let mut closed_form: f64 = 0.0;
    let mut adaptive: f64 = 0.0;
    let mut flat: f64 = 0.0;
    let mut normalization: f64 = 0.0;
    let mut signal_purity: f64 = 0.0;
    let mut idler_purity: f64 = 0.0;
    let mut order: f64 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let cfg = MzConfig::new(x, lambda)?;
        let circ = correlation_table(&cfg, &rl)?;
        let cos = cfg.phase().cos();
        for d in Detector::ALL {
            marginal = marginal.max((circ.detector_marginal(d) - 0.5).abs());
        }
        closed_form = closed_form
            .max((circ.get(Detector::D1, Outcome::First) - (1.0 - cos) / 4.0).abs())
            .max((circ.get(Detector::D2, Outcome::First) - (1.0 + cos) / 4.0).abs());
        adaptive =
            adaptive.max(correlation_table(&cfg, &adaptive_basis(&cfg))?.max_deviation(&erased));
        let lin = correlation_table(&cfg, &hv)?;
        flat = flat.max(lin.max_deviation(&[[0.25; 2]; 2]));
        normalization = normalization
            .max((circ.total() - 1.0).abs())
            .max((lin.total() - 1.0).abs());

        let pre = evolve_pre_bs2(&cfg);
        signal_purity = signal_purity
            .max((crate::hilbert::reduced_purity(&pre, Subsystem::SignalPol)? - 1.0).abs());
        idler_purity = idler_purity
            .max((crate::hilbert::reduced_purity(&pre, Subsystem::IdlerPol)? - 0.5).abs());

        for basis in [rl, hv] {
            order = order.max(mode_equivalence_check(&cfg, &basis)?);
        }
        if !thetas.is_empty() {
            let pq = mub_pair(BasisFamily::PolarizationPQ, thetas[k % thetas.len()])?;
            order = order.max(mode_equivalence_check(&cfg, &pq)?);
        }
    }
    let n = xs.len();
    record("detector_marginals_unbiased", n, marginal);
    record("circular_closed_form", n, closed_form);
    record("adaptive_basis_correlation", n, adaptive);
    record("linear_basis_flatness", n, flat);
    record("joint_table_normalization", n, normalization);
    record("signal_polarization_purity", n, signal_purity);
    record("idler_polarization_purity", n, idler_purity);
    record("measurement_order_equivalence", n, order);
    Ok(checks)
}
