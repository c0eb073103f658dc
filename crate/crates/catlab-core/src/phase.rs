//! Spin-labelled coherent states and their exact inner-product algebra.
//!
//! Every state of the experiment is a finite superposition
//! `sum_j a_j |s_j> |alpha_j>` of qubit states `s` tensored with coherent
//! states `|alpha>` of the motional mode. Displacements, trap evolution and
//! qubit rotations all map such superpositions to superpositions of the same
//! form, so the list of [`CoherentTerm`]s is a closed, exact representation.
//! Normalization is never enforced silently: amplitudes are tracked as they
//! come, and measurement routines divide by `<psi|psi>` themselves.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math comes from the Float trait in no_std builds
use num_traits::Float;

use crate::error::Error;
use crate::Result;

/// Complex amplitude attached to one term of a superposition.
pub type Amplitude = Complex64;

/// The two qubit states. `Up` is the bright (fluorescing) state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpinLabel {
    Up,
    Down,
}

impl SpinLabel {
    /// The other qubit state.
    pub fn flipped(self) -> Self {
        match self {
            SpinLabel::Up => SpinLabel::Down,
            SpinLabel::Down => SpinLabel::Up,
        }
    }
}

/// Dimensionless phase-space coordinate of a coherent state.
///
/// `Re(alpha)` is position in units of twice the zero-point width,
/// `Im(alpha)` is momentum in units of `hbar / x0`. Labels are guarded
/// against leaving the harmonic region of the trap (`|alpha| <= alpha_max`,
/// default [`Tolerances::DEFAULT_ALPHA_MAX`]); constructors error rather
/// than clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentLabel {
    alpha: Complex64,
}

impl CoherentLabel {
    /// Build a label under the default harmonic-region guard.
    pub fn new(alpha: Complex64) -> Result<Self> {
        Self::guarded(alpha, Tolerances::DEFAULT_ALPHA_MAX)
    }

    /// Build a label under an explicit guard radius.
    pub fn guarded(alpha: Complex64, alpha_max: f64) -> Result<Self> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::NonFinite);
        }
        let r = alpha.norm();
        if r > alpha_max {
            return Err(Error::LabelOutOfRange {
                alpha_abs: r,
                alpha_max,
            });
        }
        Ok(CoherentLabel { alpha })
    }

    /// The motional ground state, `alpha = 0`.
    pub fn origin() -> Self {
        CoherentLabel {
            alpha: Complex64::new(0.0, 0.0),
        }
    }

    // For norm-preserving maps applied to already-guarded labels.
    pub(crate) fn unguarded(alpha: Complex64) -> Self {
        CoherentLabel { alpha }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }
}

/// One branch of a superposition: amplitude x spin x coherent label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentTerm {
    pub amp: Amplitude,
    pub spin: SpinLabel,
    pub label: CoherentLabel,
}

impl CoherentTerm {
    pub fn new(amp: Amplitude, spin: SpinLabel, label: CoherentLabel) -> Self {
        CoherentTerm { amp, spin, label }
    }
}

/// Merge and drop thresholds for canonicalization plus the label guard.
///
/// The defaults sit far below any physical scale of the experiment
/// (kick size eta = 0.2) but above accumulated double rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Labels closer than this (same spin) are merged by amplitude addition.
    pub merge_tol: f64,
    /// Terms with `|amp|` at or below this are dropped.
    pub amp_tol: f64,
    /// Harmonic-region guard radius for coherent labels.
    pub alpha_max: f64,
}

impl Tolerances {
    pub const DEFAULT_MERGE_TOL: f64 = 1e-12;
    pub const DEFAULT_AMP_TOL: f64 = 1e-14;
    /// Harmonic-region bound `|alpha| <~ d / x0 ~ 1e4` for a trap of
    /// characteristic size `d ~ 100 um`.
    pub const DEFAULT_ALPHA_MAX: f64 = 1e4;
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            merge_tol: Self::DEFAULT_MERGE_TOL,
            amp_tol: Self::DEFAULT_AMP_TOL,
            alpha_max: Self::DEFAULT_ALPHA_MAX,
        }
    }
}

/// Overlap of two coherent states,
/// `<a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)`.
///
/// Always has `|<a|b>| = exp(-|a - b|^2 / 2) <= 1`.
pub fn overlap(a: CoherentLabel, b: CoherentLabel) -> Amplitude {
    let a = a.alpha();
    let b = b.alpha();
    let exponent = a.conj() * b - Complex64::new(0.5 * (a.norm_sqr() + b.norm_sqr()), 0.0);
    exponent.exp()
}

/// A finite superposition of spin-labelled coherent states.
///
/// States are immutable values: every operation returns a new state, which
/// makes parameter scans trivially parallel. The term list is kept canonical
/// (deterministically ordered, duplicates merged) by the constructors and by
/// the operator functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMotionState {
    terms: Vec<CoherentTerm>,
}

impl SpinMotionState {
    /// Build a state from raw terms; canonicalizes with default tolerances.
    pub fn new(terms: Vec<CoherentTerm>) -> Result<Self> {
        for t in &terms {
            if !t.amp.re.is_finite() || !t.amp.im.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(SpinMotionState { terms }.canonicalized(&Tolerances::default()))
    }

    /// `|spin>|0>`: a single unit-amplitude term at the origin.
    pub fn ground(spin: SpinLabel) -> Self {
        SpinMotionState {
            terms: alloc::vec![CoherentTerm::new(
                Complex64::new(1.0, 0.0),
                spin,
                CoherentLabel::origin(),
            )],
        }
    }

    /// `|spin>|beta>`: a single unit-amplitude coherent term.
    pub fn coherent(spin: SpinLabel, beta: Complex64) -> Result<Self> {
        Ok(SpinMotionState {
            terms: alloc::vec![CoherentTerm::new(
                Complex64::new(1.0, 0.0),
                spin,
                CoherentLabel::new(beta)?,
            )],
        })
    }

    pub(crate) fn from_terms_unchecked(terms: Vec<CoherentTerm>) -> Self {
        SpinMotionState { terms }
    }

    pub fn terms(&self) -> &[CoherentTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `<self|other>`, expanded bilinearly over term pairs. Spin labels are
    /// orthonormal; motional overlaps come from [`overlap`].
    pub fn inner(&self, other: &SpinMotionState) -> Amplitude {
        let mut acc = Complex64::new(0.0, 0.0);
        for bra in &self.terms {
            for ket in &other.terms {
                if bra.spin == ket.spin {
                    acc += bra.amp.conj() * ket.amp * overlap(bra.label, ket.label);
                }
            }
        }
        acc
    }

    /// `sqrt(<psi|psi>)`. The imaginary part of the self-inner product is
    /// pure rounding noise and is discarded; tiny negative real parts from
    /// near-degenerate Gram matrices are clamped to zero.
    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// Scale every amplitude by `c`.
    pub fn scaled(&self, c: Amplitude) -> Self {
        SpinMotionState {
            terms: self
                .terms
                .iter()
                .map(|t| CoherentTerm::new(t.amp * c, t.spin, t.label))
                .collect(),
        }
    }

    /// The (unnormalized) projection onto one spin state.
    pub fn spin_component(&self, spin: SpinLabel) -> SpinMotionState {
        SpinMotionState {
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|t| t.spin == spin)
                .collect(),
        }
    }

    /// Canonical form: terms sorted by (spin, Re alpha, Im alpha), terms with
    /// equal spin and labels within `merge_tol` merged by amplitude addition
    /// (the first label of a cluster is kept), then amplitudes at or below
    /// `amp_tol` dropped.
    pub fn canonicalized(&self, tol: &Tolerances) -> Self {
        let mut terms = self.terms.clone();
        terms.sort_unstable_by(compare_terms);

        let mut out: Vec<CoherentTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(head)
                    if head.spin == t.spin
                        && (head.label.alpha() - t.label.alpha()).norm() <= tol.merge_tol =>
                {
                    head.amp += t.amp;
                }
                _ => out.push(t),
            }
        }
        out.retain(|t| t.amp.norm() > tol.amp_tol);
        SpinMotionState { terms: out }
    }
}

fn compare_terms(a: &CoherentTerm, b: &CoherentTerm) -> Ordering {
    a.spin
        .cmp(&b.spin)
        .then_with(|| a.label.alpha().re.total_cmp(&b.label.alpha().re))
        .then_with(|| a.label.alpha().im.total_cmp(&b.label.alpha().im))
}

/// Thermal occupation of the motional mode before the experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalEnsemble {
    nbar: f64,
}

impl ThermalEnsemble {
    /// Mean phonon number `nbar >= 0`.
    pub fn new(nbar: f64) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "nbar must be finite and >= 0, got {nbar}"
            )));
        }
        Ok(ThermalEnsemble { nbar })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Zero temperature: the motional ground state.
    pub fn ground() -> Self {
        ThermalEnsemble { nbar: 0.0 }
    }
}
