//! Exact state algebra over a small composite of labeled qubit registers.
//!
//! Amplitudes are stored densely, first subsystem of the layout as the most
//! significant index bit. Register basis index 0 is `H`, `ψ₁`, `D₁` or `d₁`
//! depending on the register; index 1 is `V`, `ψ₂`, `D₂` or `d₂`.
//!
//! Every value here is immutable once built and every operation is a pure
//! function, so states can be shared freely between threads.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Absolute tolerance used for every comparison unless configured otherwise.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Projections with a smaller Born weight have no defined collapsed state.
pub const ZERO_PROBABILITY: f64 = 1e-14;

static TOLERANCE: OnceLock<f64> = OnceLock::new();

/// The process-wide comparison tolerance.
pub fn tolerance() -> f64 {
    TOLERANCE.get().copied().unwrap_or(DEFAULT_TOLERANCE)
}

/// Configures the process-wide tolerance. Can be called at most once, and
/// only before the first comparison that should observe it.
pub fn set_tolerance(tol: f64) -> Result<(), HilbertError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(HilbertError::InvalidTolerance(tol));
    }
    TOLERANCE
        .set(tol)
        .map_err(|_| HilbertError::ToleranceAlreadySet)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("subsystem {0} appears more than once")]
    DuplicateSubsystem(Subsystem),
    #[error("subsystem {0} is not part of the state layout")]
    UnknownSubsystem(Subsystem),
    #[error("expected {expected} amplitudes, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("amplitudes must be finite")]
    NonFinite,
    #[error("vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("operator is not unitary (max deviation {deviation:e})")]
    NonUnitary { deviation: f64 },
    #[error("basis is not orthonormal (max deviation {deviation:e})")]
    NonOrthonormal { deviation: f64 },
    #[error("operator expects path stage {expected}, state is at {found}")]
    StageMismatch {
        expected: PathStage,
        found: PathStage,
    },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("global tolerance was already configured")]
    ToleranceAlreadySet,
}

pub type Result<T, E = HilbertError> = std::result::Result<T, E>;

/// A named two-level register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subsystem {
    SignalPath,
    SignalPol,
    IdlerPol,
    DetectorRegister,
    WwDetector,
}

impl Subsystem {
    pub const fn dim(self) -> usize {
        2
    }

    pub const fn name(self) -> &'static str {
        match self {
            Subsystem::SignalPath => "signal_path",
            Subsystem::SignalPol => "signal_pol",
            Subsystem::IdlerPol => "idler_pol",
            Subsystem::DetectorRegister => "detector_register",
            Subsystem::WwDetector => "ww_detector",
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which labeling applies to the signal path register.
///
/// `Source` is the single input port before the polarizing splitter, `Arms`
/// labels the basis `{ψ₁, ψ₂}` and `Detectors` labels it `{D₁, D₂}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathStage {
    Source,
    Arms,
    Detectors,
}

impl fmt::Display for PathStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathStage::Source => "source",
            PathStage::Arms => "arms",
            PathStage::Detectors => "detectors",
        })
    }
}

/// A single-qubit ket `a|0⟩ + b|1⟩`, not necessarily normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket(pub [C64; 2]);

impl Ket {
    pub const fn new(a: C64, b: C64) -> Self {
        Ket([a, b])
    }

    pub fn basis(index: usize) -> Self {
        let mut amps = [C64::new(0.0, 0.0); 2];
        amps[index] = C64::new(1.0, 0.0);
        Ket(amps)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr().sqrt() - 1.0).abs() <= tol
    }

    fn check_normalized(&self) -> Result<()> {
        if self
            .0
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(HilbertError::NonFinite);
        }
        if !self.is_normalized(tolerance()) {
            return Err(HilbertError::NotNormalized {
                norm: self.norm_sqr().sqrt(),
            });
        }
        Ok(())
    }
}

/// Checks that `kets` form an orthonormal basis of a qubit.
pub fn check_orthonormal(kets: &[Ket]) -> Result<()> {
    let mut deviation: f64 = 0.0;
    for (i, a) in kets.iter().enumerate() {
        for (j, b) in kets.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((a.inner(b) - C64::new(target, 0.0)).norm());
        }
    }
    if kets.len() != 2 || !(deviation <= tolerance()) {
        return Err(HilbertError::NonOrthonormal {
            deviation: if kets.len() != 2 {
                f64::INFINITY
            } else {
                deviation
            },
        });
    }
    Ok(())
}

fn check_layout(layout: &[Subsystem]) -> Result<()> {
    for (i, s) in layout.iter().enumerate() {
        if layout[..i].contains(s) {
            return Err(HilbertError::DuplicateSubsystem(*s));
        }
    }
    Ok(())
}

fn vector_norm(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Inserts bit `b` at bit position `shift` of `rest`.
fn insert_bit(rest: usize, shift: usize, b: usize) -> usize {
    let low = rest & ((1 << shift) - 1);
    ((rest >> shift) << (shift + 1)) | (b << shift) | low
}

/// A normalized pure state over an ordered list of registers.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: Vec<Subsystem>,
    amps: Vec<C64>,
    stage: PathStage,
}

impl StateVector {
    /// Builds a state, rejecting anything that is not unit-norm within tolerance.
    pub fn new(layout: Vec<Subsystem>, amps: Vec<C64>) -> Result<Self> {
        let state = Self::raw(layout, amps)?;
        let norm = vector_norm(&state.amps);
        if (norm - 1.0).abs() > tolerance() {
            return Err(HilbertError::NotNormalized { norm });
        }
        Ok(state)
    }

    /// Builds a state from an arbitrary nonzero vector by rescaling it.
    pub fn normalized(layout: Vec<Subsystem>, amps: Vec<C64>) -> Result<Self> {
        let mut state = Self::raw(layout, amps)?;
        let norm = vector_norm(&state.amps);
        if norm < ZERO_PROBABILITY {
            return Err(HilbertError::ZeroVector);
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn raw(layout: Vec<Subsystem>, amps: Vec<C64>) -> Result<Self> {
        check_layout(&layout)?;
        let expected: usize = layout.iter().map(|s| s.dim()).product();
        if amps.len() != expected {
            return Err(HilbertError::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(HilbertError::NonFinite);
        }
        Ok(StateVector {
            layout,
            amps,
            stage: PathStage::Source,
        })
    }

    /// The computational basis state `|index⟩` of a single register.
    pub fn basis(sub: Subsystem, index: usize) -> Result<Self> {
        if index >= sub.dim() {
            return Err(HilbertError::DimensionMismatch {
                expected: sub.dim(),
                found: index + 1,
            });
        }
        Self::from_ket(sub, Ket::basis(index))
    }

    pub fn from_ket(sub: Subsystem, ket: Ket) -> Result<Self> {
        ket.check_normalized()?;
        Self::new(vec![sub], ket.0.to_vec())
    }

    /// Product of single-register kets, in the given order.
    pub fn product(factors: &[(Subsystem, Ket)]) -> Result<Self> {
        let mut state = StateVector {
            layout: Vec::new(),
            amps: vec![C64::new(1.0, 0.0)],
            stage: PathStage::Source,
        };
        for &(sub, ket) in factors {
            state = tensor(&state, &Self::from_ket(sub, ket)?)?;
        }
        Ok(state)
    }

    pub fn with_stage(mut self, stage: PathStage) -> Self {
        self.stage = stage;
        self
    }

    pub fn layout(&self) -> &[Subsystem] {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn stage(&self) -> PathStage {
        self.stage
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.amps)
    }

    pub fn position(&self, sub: Subsystem) -> Result<usize> {
        self.layout
            .iter()
            .position(|&s| s == sub)
            .ok_or(HilbertError::UnknownSubsystem(sub))
    }

    fn shift_of(&self, sub: Subsystem) -> Result<usize> {
        Ok(self.layout.len() - 1 - self.position(sub)?)
    }

    /// Amplitude of the basis state given one index per register, in layout order.
    pub fn amplitude(&self, indices: &[usize]) -> C64 {
        assert_eq!(indices.len(), self.layout.len(), "one index per register");
        let idx = indices.iter().fold(0, |acc, &i| (acc << 1) | i);
        self.amps[idx]
    }

    /// `|⟨self|other⟩|`, the phase-insensitive overlap of two states on the same layout.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        let other = other.reordered(&self.layout)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm())
    }

    /// Same state with registers permuted into `layout`.
    pub fn reordered(&self, layout: &[Subsystem]) -> Result<StateVector> {
        check_layout(layout)?;
        if layout.len() != self.layout.len() {
            return Err(HilbertError::DimensionMismatch {
                expected: self.layout.len(),
                found: layout.len(),
            });
        }
        let shifts = layout
            .iter()
            .map(|&s| self.shift_of(s))
            .collect::<Result<Vec<_>>>()?;
        let n = layout.len();
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (new_idx, amp) in amps.iter_mut().enumerate() {
            let mut old_idx = 0;
            for (p, &shift) in shifts.iter().enumerate() {
                let bit = (new_idx >> (n - 1 - p)) & 1;
                old_idx |= bit << shift;
            }
            *amp = self.amps[old_idx];
        }
        Ok(StateVector {
            layout: layout.to_vec(),
            amps,
            stage: self.stage,
        })
    }

    /// `⟨ket|_sub |self⟩` as an unnormalized vector over the remaining registers.
    fn contract(&self, sub: Subsystem, ket: &Ket) -> Result<PartialState> {
        let shift = self.shift_of(sub)?;
        let rest_len = self.amps.len() / 2;
        let amps = (0..rest_len)
            .map(|r| {
                ket.0[0].conj() * self.amps[insert_bit(r, shift, 0)]
                    + ket.0[1].conj() * self.amps[insert_bit(r, shift, 1)]
            })
            .collect();
        Ok(PartialState {
            layout: self.layout.iter().copied().filter(|&s| s != sub).collect(),
            amps,
            stage: self.stage,
        })
    }
}

/// An unnormalized vector over a register layout, e.g. a conditional partner state.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialState {
    pub layout: Vec<Subsystem>,
    pub amps: Vec<C64>,
    pub stage: PathStage,
}

impl PartialState {
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<StateVector> {
        Ok(StateVector::normalized(self.layout.clone(), self.amps.clone())?.with_stage(self.stage))
    }

    fn as_state_unchecked(&self) -> StateVector {
        StateVector {
            layout: self.layout.clone(),
            amps: self.amps.clone(),
            stage: self.stage,
        }
    }
}

/// `a ⊗ b` with `a`'s registers first.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    if let Some(&dup) = b.layout.iter().find(|s| a.layout.contains(s)) {
        return Err(HilbertError::DuplicateSubsystem(dup));
    }
    let mut layout = a.layout.clone();
    layout.extend_from_slice(&b.layout);
    let amps = a
        .amps
        .iter()
        .flat_map(|x| b.amps.iter().map(move |y| x * y))
        .collect();
    let stage = if b.layout.contains(&Subsystem::SignalPath) {
        b.stage
    } else {
        a.stage
    };
    Ok(StateVector {
        layout,
        amps,
        stage,
    })
}

/// A unitary acting on an ordered subset of registers.
///
/// The matrix is row-major over the targets' joint basis, first target most
/// significant. An operator may additionally demand a path stage on its
/// input and relabel the stage on its output.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    targets: Vec<Subsystem>,
    matrix: Vec<C64>,
    requires: Option<PathStage>,
    produces: Option<PathStage>,
}

impl LocalOperator {
    pub fn new(targets: Vec<Subsystem>, matrix: Vec<C64>) -> Result<Self> {
        check_layout(&targets)?;
        let dim: usize = targets.iter().map(|s| s.dim()).product();
        if matrix.len() != dim * dim {
            return Err(HilbertError::DimensionMismatch {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        if matrix
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(HilbertError::NonFinite);
        }
        let op = LocalOperator {
            targets,
            matrix,
            requires: None,
            produces: None,
        };
        let deviation = op.unitarity_deviation();
        if !(deviation <= tolerance()) {
            return Err(HilbertError::NonUnitary { deviation });
        }
        Ok(op)
    }

    pub fn identity(targets: Vec<Subsystem>) -> Result<Self> {
        let dim: usize = targets.iter().map(|s| s.dim()).product();
        let matrix = (0..dim * dim)
            .map(|k| {
                if k / dim == k % dim {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        Self::new(targets, matrix)
    }

    /// Requires the input to be at `from` and relabels the output as `to`.
    pub fn with_stage_transition(mut self, from: PathStage, to: PathStage) -> Self {
        self.requires = Some(from);
        self.produces = Some(to);
        self
    }

    /// Requires the input to be at `stage`, leaving it unchanged.
    pub fn requiring_stage(mut self, stage: PathStage) -> Self {
        self.requires = Some(stage);
        self
    }

    pub fn targets(&self) -> &[Subsystem] {
        &self.targets
    }

    pub fn dim(&self) -> usize {
        self.targets.iter().map(|s| s.dim()).product()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.dim() + col]
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn required_stage(&self) -> Option<PathStage> {
        self.requires
    }

    /// `max |(U†U − I)ᵢⱼ|`
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let v: C64 = (0..dim)
                    .map(|k| self.entry(k, i).conj() * self.entry(k, j))
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `(I ⊗ U ⊗ I)|s⟩`, honoring the operator's stage requirement.
pub fn apply_local(op: &LocalOperator, s: &StateVector) -> Result<StateVector> {
    if let Some(expected) = op.requires {
        if s.layout.contains(&Subsystem::SignalPath) && s.stage != expected {
            return Err(HilbertError::StageMismatch {
                expected,
                found: s.stage,
            });
        }
    }
    apply_local_unchecked(op, s)
}

/// Like [`apply_local`] but ignores the operator's stage requirement.
pub fn apply_local_unchecked(op: &LocalOperator, s: &StateVector) -> Result<StateVector> {
    let shifts = op
        .targets
        .iter()
        .map(|&t| s.shift_of(t))
        .collect::<Result<Vec<_>>>()?;
    let k = shifts.len();
    let dim = op.dim();
    let mask: usize = shifts.iter().map(|&sh| 1usize << sh).sum();
    let scatter = |t: usize| -> usize {
        shifts
            .iter()
            .enumerate()
            .map(|(j, &sh)| ((t >> (k - 1 - j)) & 1) << sh)
            .sum()
    };
    let offsets: Vec<usize> = (0..dim).map(scatter).collect();

    let mut out = vec![C64::new(0.0, 0.0); s.amps.len()];
    for base in (0..s.amps.len()).filter(|b| b & mask == 0) {
        for (r, &row_off) in offsets.iter().enumerate() {
            out[base | row_off] = offsets
                .iter()
                .enumerate()
                .map(|(c, &col_off)| op.entry(r, c) * s.amps[base | col_off])
                .sum();
        }
    }
    let stage = match op.produces {
        Some(st) if s.layout.contains(&Subsystem::SignalPath) => st,
        _ => s.stage,
    };
    Ok(StateVector {
        layout: s.layout.clone(),
        amps: out,
        stage,
    })
}

fn check_outcomes(outcome: &[(Subsystem, Ket)]) -> Result<()> {
    for (i, (sub, ket)) in outcome.iter().enumerate() {
        if outcome[..i].iter().any(|(s, _)| s == sub) {
            return Err(HilbertError::DuplicateSubsystem(*sub));
        }
        ket.check_normalized()?;
    }
    Ok(())
}

/// Born probability of finding every listed register in its listed state.
pub fn born_probability(s: &StateVector, outcome: &[(Subsystem, Ket)]) -> Result<f64> {
    check_outcomes(outcome)?;
    let mut partial = PartialState {
        layout: s.layout.clone(),
        amps: s.amps.clone(),
        stage: s.stage,
    };
    for (sub, ket) in outcome {
        partial = partial.as_state_unchecked().contract(*sub, ket)?;
    }
    Ok(partial.norm_sqr().clamp(0.0, 1.0))
}

/// Result of a projective post-selection.
#[derive(Clone, Debug, PartialEq)]
pub struct Collapse {
    pub probability: f64,
    /// `None` when the projection is impossible (probability below [`ZERO_PROBABILITY`]).
    pub state: Option<StateVector>,
}

impl Collapse {
    pub fn is_impossible(&self) -> bool {
        self.state.is_none()
    }
}

/// Projects `sub` onto `onto`, returning the Born weight and the renormalized
/// state of the remaining registers.
pub fn post_select(s: &StateVector, sub: Subsystem, onto: &Ket) -> Result<Collapse> {
    onto.check_normalized()?;
    let partner = s.contract(sub, onto)?;
    let probability = partner.norm_sqr().clamp(0.0, 1.0);
    if probability < ZERO_PROBABILITY {
        return Ok(Collapse {
            probability: 0.0,
            state: None,
        });
    }
    Ok(Collapse {
        probability,
        state: Some(partner.normalize()?),
    })
}

/// A state rewritten as `Σₖ |bₖ⟩_sub ⊗ |partnerₖ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub sub: Subsystem,
    pub basis: Vec<Ket>,
    pub partners: Vec<PartialState>,
    original_layout: Vec<Subsystem>,
}

impl Expansion {
    /// Rebuilds the expanded state in its original register order.
    pub fn reconstruct(&self) -> Result<StateVector> {
        let pos = self
            .original_layout
            .iter()
            .position(|&s| s == self.sub)
            .ok_or(HilbertError::UnknownSubsystem(self.sub))?;
        let shift = self.original_layout.len() - 1 - pos;
        let rest_len = self.partners.first().map_or(1, |p| p.amps.len());
        let mut amps = vec![C64::new(0.0, 0.0); rest_len * 2];
        for (ket, partner) in self.basis.iter().zip(&self.partners) {
            for (r, p) in partner.amps.iter().enumerate() {
                for b in 0..2 {
                    amps[insert_bit(r, shift, b)] += ket.0[b] * p;
                }
            }
        }
        let stage = self.partners.first().map_or(PathStage::Source, |p| p.stage);
        Ok(StateVector::new(self.original_layout.clone(), amps)?.with_stage(stage))
    }
}

/// Expands `s` in an orthonormal basis of `sub`; partners are unnormalized.
pub fn expand_in_basis(s: &StateVector, sub: Subsystem, basis: &[Ket]) -> Result<Expansion> {
    check_orthonormal(basis)?;
    let partners = basis
        .iter()
        .map(|ket| s.contract(sub, ket))
        .collect::<Result<Vec<_>>>()?;
    Ok(Expansion {
        sub,
        basis: basis.to_vec(),
        partners,
        original_layout: s.layout.clone(),
    })
}

/// Reduced density matrix of a single register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// `Tr ρ²`, which for a Hermitian matrix is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entry(0, 0).re;
        let d = self.entry(1, 1).re;
        let b = self.entry(0, 1).norm();
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - radius, mean + radius]
    }
}

/// Partial trace of `s` over every register except `keep`.
pub fn reduced_density(s: &StateVector, keep: Subsystem) -> Result<DensityMatrix> {
    let shift = s.shift_of(keep)?;
    let rest_len = s.amps.len() / 2;
    let mut entries = vec![C64::new(0.0, 0.0); 4];
    for r in 0..rest_len {
        for a in 0..2 {
            for b in 0..2 {
                entries[a * 2 + b] +=
                    s.amps[insert_bit(r, shift, a)] * s.amps[insert_bit(r, shift, b)].conj();
            }
        }
    }
    Ok(DensityMatrix { dim: 2, entries })
}

/// Purity `Tr ρ²` of the reduced state of `keep`.
pub fn reduced_purity(s: &StateVector, keep: Subsystem) -> Result<f64> {
    Ok(reduced_density(s, keep)?.purity())
}
