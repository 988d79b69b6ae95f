//! Optical elements of the interferometer as unitaries on the signal
//! registers, and the phase-parameterized qubit bases used to read out the
//! idler polarization and the which-way detector.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hilbert::{self, HilbertError, Ket, LocalOperator, PathStage, Subsystem, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("wavelength must be positive and finite, got {0}")]
    InvalidWavelength(f64),
    #[error("length must be finite, got {0}")]
    NonFiniteLength(f64),
    #[error("unknown basis family `{0}`")]
    UnknownFamily(String),
    #[error("basis family {family} does not act on {expected}")]
    WrongRegister {
        family: BasisFamily,
        expected: Subsystem,
    },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Reduces an angle to `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisFamily {
    LinearHV,
    CircularRL,
    PolarizationPQ,
    DetectorPM,
}

impl BasisFamily {
    pub const fn name(self) -> &'static str {
        match self {
            BasisFamily::LinearHV => "linear_HV",
            BasisFamily::CircularRL => "circular_RL",
            BasisFamily::PolarizationPQ => "polarization_PQ",
            BasisFamily::DetectorPM => "detector_pm",
        }
    }

    /// The register this family is a basis of.
    pub const fn register(self) -> Subsystem {
        match self {
            BasisFamily::DetectorPM => Subsystem::WwDetector,
            _ => Subsystem::IdlerPol,
        }
    }

    pub const fn label(self, outcome: Outcome) -> &'static str {
        match (self, outcome) {
            (BasisFamily::LinearHV, Outcome::First) => "H",
            (BasisFamily::LinearHV, Outcome::Second) => "V",
            (BasisFamily::CircularRL, Outcome::First) => "R",
            (BasisFamily::CircularRL, Outcome::Second) => "L",
            (BasisFamily::PolarizationPQ, Outcome::First) => "P",
            (BasisFamily::PolarizationPQ, Outcome::Second) => "Q",
            (BasisFamily::DetectorPM, Outcome::First) => "+",
            (BasisFamily::DetectorPM, Outcome::Second) => "-",
        }
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisFamily {
    type Err = OpticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear_HV" | "linear" | "hv" => Ok(BasisFamily::LinearHV),
            "circular_RL" | "circular" | "rl" => Ok(BasisFamily::CircularRL),
            "polarization_PQ" | "pq" => Ok(BasisFamily::PolarizationPQ),
            "detector_pm" | "pm" => Ok(BasisFamily::DetectorPM),
            other => Err(OpticsError::UnknownFamily(other.to_string())),
        }
    }
}

/// One of the two outcomes of a [`BasisPair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    First,
    Second,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::First, Outcome::Second];

    pub const fn index(self) -> usize {
        match self {
            Outcome::First => 0,
            Outcome::Second => 1,
        }
    }
}

/// An orthonormal qubit basis from one of the supported families.
///
/// Two pairs describe the same measurement when their states agree up to
/// phase; compare them with [`BasisPair::same_as`] rather than by angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisPair {
    family: BasisFamily,
    theta: f64,
    states: [Ket; 2],
}

impl BasisPair {
    pub fn family(&self) -> BasisFamily {
        self.family
    }

    /// Canonical angle in `[0, 2π)`; zero for the families without one.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn ket(&self, outcome: Outcome) -> Ket {
        self.states[outcome.index()]
    }

    pub fn kets(&self) -> &[Ket; 2] {
        &self.states
    }

    pub fn label(&self, outcome: Outcome) -> &'static str {
        self.family.label(outcome)
    }

    pub fn register(&self) -> Subsystem {
        self.family.register()
    }

    pub fn same_as(&self, other: &BasisPair) -> bool {
        let tol = hilbert::tolerance();
        self.states
            .iter()
            .zip(&other.states)
            .all(|(a, b)| (a.inner(b).norm() - 1.0).abs() <= tol)
    }
}

/// Builds the basis of `family` at phase `theta`.
///
/// `P, Q = (e^{iθ}H ± iV)/√2`, `d± = (e^{iθ}d₁ ± d₂)/√2`; the linear and
/// circular families ignore `theta`.
pub fn mub_pair(family: BasisFamily, theta: f64) -> Result<BasisPair, OpticsError> {
    if !theta.is_finite() {
        return Err(OpticsError::NonFiniteAngle(theta));
    }
    let s = FRAC_1_SQRT_2;
    let i = C64::new(0.0, s);
    let (theta, states) = match family {
        BasisFamily::LinearHV => (0.0, [Ket::basis(0), Ket::basis(1)]),
        BasisFamily::CircularRL => {
            let h = C64::new(s, 0.0);
            (0.0, [Ket::new(h, i), Ket::new(h, -i)])
        }
        BasisFamily::PolarizationPQ => {
            let theta = canonical_angle(theta);
            let h = C64::from_polar(s, theta);
            (theta, [Ket::new(h, i), Ket::new(h, -i)])
        }
        BasisFamily::DetectorPM => {
            let theta = canonical_angle(theta);
            let d1 = C64::from_polar(s, theta);
            let d2 = C64::new(s, 0.0);
            (theta, [Ket::new(d1, d2), Ket::new(d1, -d2)])
        }
    };
    hilbert::check_orthonormal(&states)?;
    Ok(BasisPair {
        family,
        theta,
        states,
    })
}

/// The optical elements of the interferometer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementKind {
    PbsRoute,
    ConditionalPolFlip,
    PathPhase { phi: f64 },
    BeamSplitter,
}

impl ElementKind {
    pub fn operator(&self) -> Result<LocalOperator, OpticsError> {
        match *self {
            ElementKind::PbsRoute => Ok(pbs_route()),
            ElementKind::ConditionalPolFlip => Ok(conditional_pol_flip()),
            ElementKind::PathPhase { phi } => path_phase_radians(phi),
            ElementKind::BeamSplitter => Ok(beam_splitter()),
        }
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn permutation(targets: Vec<Subsystem>, image: [usize; 4]) -> LocalOperator {
    let mut m = vec![re(0.0); 16];
    for (col, &row) in image.iter().enumerate() {
        m[row * 4 + col] = re(1.0);
    }
    LocalOperator::new(targets, m).expect("permutation matrices are unitary")
}

/// Polarizing splitter: `H_s` leaves on arm `ψ₁`, `V_s` on arm `ψ₂`.
///
/// Acts on `(signal_pol, signal_path)` as a controlled flip of the path,
/// which is the unitary completion of the routing from the single source port.
pub fn pbs_route() -> LocalOperator {
    // basis order |H,0⟩ |H,1⟩ |V,0⟩ |V,1⟩
    permutation(
        vec![Subsystem::SignalPol, Subsystem::SignalPath],
        [0, 1, 3, 2],
    )
    .with_stage_transition(PathStage::Source, PathStage::Arms)
}

/// 90° polarization rotator placed in arm `ψ₁` only.
pub fn conditional_pol_flip() -> LocalOperator {
    // basis order |ψ₁,H⟩ |ψ₁,V⟩ |ψ₂,H⟩ |ψ₂,V⟩
    permutation(
        vec![Subsystem::SignalPath, Subsystem::SignalPol],
        [1, 0, 2, 3],
    )
    .requiring_stage(PathStage::Arms)
}

/// Phase `e^{2πix/λ}` on arm `ψ₂` from displacing the first splitter by `x`.
pub fn path_phase(x: f64, lambda: f64) -> Result<LocalOperator, OpticsError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(OpticsError::InvalidWavelength(lambda));
    }
    if !x.is_finite() {
        return Err(OpticsError::NonFiniteLength(x));
    }
    path_phase_radians(TAU * x / lambda)
}

pub fn path_phase_radians(phi: f64) -> Result<LocalOperator, OpticsError> {
    if !phi.is_finite() {
        return Err(OpticsError::NonFiniteAngle(phi));
    }
    let op = LocalOperator::new(
        vec![Subsystem::SignalPath],
        vec![re(1.0), re(0.0), re(0.0), C64::from_polar(1.0, phi)],
    )?;
    Ok(op.requiring_stage(PathStage::Arms))
}

/// Recombining 50/50 splitter, `(1/√2)[[1, i], [i, 1]]`, relabeling arms as detectors.
pub fn beam_splitter() -> LocalOperator {
    let s = re(FRAC_1_SQRT_2);
    let is = C64::new(0.0, FRAC_1_SQRT_2);
    LocalOperator::new(vec![Subsystem::SignalPath], vec![s, is, is, s])
        .expect("beam splitter is unitary")
        .with_stage_transition(PathStage::Arms, PathStage::Detectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{apply_local, apply_local_unchecked, tensor, HilbertError, StateVector};
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn arms(ket: Ket) -> StateVector {
        StateVector::from_ket(Subsystem::SignalPath, ket)
            .unwrap()
            .with_stage(PathStage::Arms)
    }

    fn assert_amps(s: &StateVector, expected: &[C64]) {
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < TOL, "{a} != {e}");
        }
    }

    #[test]
    fn pbs_routes_polarizations_to_arms() {
        let s = StateVector::product(&[
            (Subsystem::SignalPol, Ket::basis(0)),
            (Subsystem::SignalPath, Ket::basis(0)),
        ])
        .unwrap();
        let out = apply_local(&pbs_route(), &s).unwrap();
        assert_eq!(out.stage(), PathStage::Arms);
        assert!((out.amplitude(&[0, 0]) - c(1.0, 0.0)).norm() < TOL);

        let s = StateVector::product(&[
            (Subsystem::SignalPol, Ket::basis(1)),
            (Subsystem::SignalPath, Ket::basis(0)),
        ])
        .unwrap();
        let out = apply_local(&pbs_route(), &s).unwrap();
        assert!((out.amplitude(&[1, 1]) - c(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn rotator_is_identity_on_second_arm_and_an_involution() {
        let s = StateVector::product(&[
            (Subsystem::SignalPol, Ket::basis(0)),
            (Subsystem::SignalPath, Ket::basis(1)),
        ])
        .unwrap()
        .with_stage(PathStage::Arms);
        let flip = conditional_pol_flip();
        assert_eq!(apply_local(&flip, &s).unwrap(), s);

        let mixed = StateVector::normalized(
            vec![Subsystem::SignalPol, Subsystem::SignalPath],
            vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)],
        )
        .unwrap()
        .with_stage(PathStage::Arms);
        let twice = apply_local(&flip, &apply_local(&flip, &mixed).unwrap()).unwrap();
        assert_amps(&twice, mixed.amplitudes());
    }

    #[test]
    fn path_phase_special_values() {
        let id = path_phase(0.0, 1.0).unwrap();
        let s = arms(Ket::new(c(0.6, 0.0), c(0.0, 0.8)));
        assert_amps(&apply_local(&id, &s).unwrap(), s.amplitudes());

        let half = path_phase(0.5, 1.0).unwrap();
        let out = apply_local(&half, &arms(Ket::basis(1))).unwrap();
        assert_amps(&out, &[c(0.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn path_phase_rejects_bad_wavelength() {
        assert_eq!(
            path_phase(0.1, 0.0).unwrap_err(),
            OpticsError::InvalidWavelength(0.0)
        );
        assert_eq!(
            path_phase(0.1, -2.0).unwrap_err(),
            OpticsError::InvalidWavelength(-2.0)
        );
        assert!(path_phase(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn beam_splitter_on_first_arm() {
        let out = apply_local(&beam_splitter(), &arms(Ket::basis(0))).unwrap();
        assert_eq!(out.stage(), PathStage::Detectors);
        assert_amps(&out, &[c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]);
    }

    #[test]
    fn beam_splitter_sends_erased_arm_states_to_single_detectors() {
        let h = FRAC_1_SQRT_2;
        // (ψ₂ − iψ₁)/√2 → D₂
        let out = apply_local(&beam_splitter(), &arms(Ket::new(c(0.0, -h), c(h, 0.0)))).unwrap();
        assert_amps(&out, &[c(0.0, 0.0), c(1.0, 0.0)]);
        // (ψ₂ + iψ₁)/√2 → i D₁
        let out = apply_local(&beam_splitter(), &arms(Ket::new(c(0.0, h), c(h, 0.0)))).unwrap();
        assert_amps(&out, &[c(0.0, 1.0), c(0.0, 0.0)]);
    }

    #[test]
    fn beam_splitter_twice_is_guarded_and_squares_to_i_swap() {
        let once = apply_local(&beam_splitter(), &arms(Ket::basis(0))).unwrap();
        assert!(matches!(
            apply_local(&beam_splitter(), &once),
            Err(HilbertError::StageMismatch { .. })
        ));
        let twice = apply_local_unchecked(&beam_splitter(), &once).unwrap();
        // Hand-squared: [[1,i],[i,1]]²/2 = [[0,i],[i,0]], so ψ₁ → iψ₂.
        assert_amps(&twice, &[c(0.0, 0.0), c(0.0, 1.0)]);
    }

    #[test]
    fn all_elements_are_unitary() {
        let elements = [
            ElementKind::PbsRoute,
            ElementKind::ConditionalPolFlip,
            ElementKind::PathPhase { phi: 1.234 },
            ElementKind::BeamSplitter,
        ];
        for e in elements {
            assert!(e.operator().unwrap().unitarity_deviation() < TOL, "{e:?}");
        }
    }

    #[test]
    fn pq_at_zero_is_circular() {
        let pq = mub_pair(BasisFamily::PolarizationPQ, 0.0).unwrap();
        let rl = mub_pair(BasisFamily::CircularRL, 0.0).unwrap();
        assert!(pq.same_as(&rl));
        assert_eq!(pq.label(Outcome::First), "P");
        assert_eq!(rl.label(Outcome::Second), "L");
    }

    #[test]
    fn pq_at_quarter_turn() {
        let pq = mub_pair(BasisFamily::PolarizationPQ, PI / 2.0).unwrap();
        let h = FRAC_1_SQRT_2;
        let p = pq.ket(Outcome::First);
        let q = pq.ket(Outcome::Second);
        assert!((p.0[0] - c(0.0, h)).norm() < TOL && (p.0[1] - c(0.0, h)).norm() < TOL);
        assert!((q.0[0] - c(0.0, h)).norm() < TOL && (q.0[1] - c(0.0, -h)).norm() < TOL);
    }

    #[test]
    fn detector_pm_at_zero() {
        let pm = mub_pair(BasisFamily::DetectorPM, 0.0).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_eq!(pm.register(), Subsystem::WwDetector);
        assert!((pm.ket(Outcome::First).0[1] - c(h, 0.0)).norm() < TOL);
        assert!((pm.ket(Outcome::Second).0[1] - c(-h, 0.0)).norm() < TOL);
    }

    #[test]
    fn theta_is_canonicalized() {
        let a = mub_pair(BasisFamily::PolarizationPQ, -PI / 2.0).unwrap();
        assert!((a.theta() - 1.5 * PI).abs() < TOL);
        let b = mub_pair(BasisFamily::PolarizationPQ, 1.5 * PI + 4.0 * PI).unwrap();
        assert!(a.same_as(&b));
        assert_eq!(canonical_angle(TAU), 0.0);
        assert_eq!(canonical_angle(-0.0), 0.0);
        assert!(mub_pair(BasisFamily::DetectorPM, f64::NAN).is_err());
    }

    #[test]
    fn family_names_parse() {
        assert_eq!(
            "circular".parse::<BasisFamily>().unwrap(),
            BasisFamily::CircularRL
        );
        assert_eq!(
            "pq".parse::<BasisFamily>().unwrap(),
            BasisFamily::PolarizationPQ
        );
        assert!(matches!(
            "elliptic".parse::<BasisFamily>(),
            Err(OpticsError::UnknownFamily(_))
        ));
    }

    #[test]
    fn rotator_commutes_with_phase() {
        let s = tensor(
            &StateVector::from_ket(Subsystem::SignalPol, Ket::new(c(0.6, 0.0), c(0.0, 0.8)))
                .unwrap(),
            &StateVector::from_ket(Subsystem::SignalPath, Ket::new(c(0.8, 0.0), c(0.6, 0.0)))
                .unwrap(),
        )
        .unwrap()
        .with_stage(PathStage::Arms);
        let phase = path_phase(0.37, 1.0).unwrap();
        let flip = conditional_pol_flip();
        let a = apply_local(&flip, &apply_local(&phase, &s).unwrap()).unwrap();
        let b = apply_local(&phase, &apply_local(&flip, &s).unwrap()).unwrap();
        assert_amps(&a, b.amplitudes());
    }
}
