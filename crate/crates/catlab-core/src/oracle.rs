//! Independent brute-force verifier: dense operators on the spin x
//! truncated-number basis.
//!
//! Nothing here shares code with the coherent-label engine. States are
//! plain complex vectors (spin-major: the up block of `n_max + 1` number
//! amplitudes, then the down block), kicks are displacement matrices
//! obtained by exponentiating the truncated generator
//! `gamma a^dag - conj(gamma) a` (exactly anti-Hermitian, so the result is
//! unitary on the retained block to machine precision), and programs are
//! executed instruction by instruction through matrix-vector products.
//! Intended for small instances only; never used as a performance path.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math comes from the Float trait in no_std builds
use num_traits::Float;

use crate::error::Error;
use crate::operators::{KickDirection, KickParams, RotationParams};
use crate::phase::{SpinLabel, SpinMotionState};
use crate::program::{Bindings, ExecParams, Instruction, PulseProgram};
use crate::Result;

/// Hard cap on the truncation to bound memory.
pub const N_MAX_CAP: usize = 512;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            data: alloc::vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, r) in dst.iter_mut().zip(row) {
                    *d += aik * r;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len());
        let n = self.n;
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); n];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &self.data[i * n..(i + 1) * n];
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            *slot = acc;
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Largest element magnitude of `A^dag A - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                let d = (prod.data[i * n + j] - Complex64::new(expect, 0.0)).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn scaled(&self, s: f64) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn inf_norm(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            let row: f64 = self.data[i * n..(i + 1) * n].iter().map(|x| x.norm()).sum();
            worst = worst.max(row);
        }
        worst
    }
}

/// Matrix exponential by scaling and squaring with a Taylor series on the
/// scaled matrix. For the anti-Hermitian generators used here the truncation
/// error sits at machine precision and the result is unitary on the block.
pub fn expm(a: &CMat) -> CMat {
    let norm = a.inf_norm();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a.scaled(0.5f64.powi(s as i32));

    let mut result = CMat::identity(a.n);
    let mut term = CMat::identity(a.n);
    for k in 1..=40 {
        term = term.matmul(&b).scaled(1.0 / k as f64);
        let tnorm = term.inf_norm();
        for (r, t) in result.data.iter_mut().zip(&term.data) {
            *r += t;
        }
        if tnorm < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = result.matmul(&result);
    }
    result
}

/// State vector over spin x truncated number basis, spin-major
/// (up block first).
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    n_max: usize,
    vec: Vec<Complex64>,
}

/// Norm lost to the truncation when encoding a coherent superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub leaked_norm: f64,
    pub n_max: usize,
}

impl FockState {
    pub fn new(n_max: usize, vec: Vec<Complex64>) -> Result<Self> {
        if vec.len() != 2 * (n_max + 1) {
            return Err(Error::InvalidArgument(alloc::format!(
                "state vector length {} does not match 2 (n_max + 1) = {}",
                vec.len(),
                2 * (n_max + 1)
            )));
        }
        Ok(FockState { n_max, vec })
    }

    /// Basis state `|spin>|n>`.
    pub fn basis(spin: SpinLabel, n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidArgument(alloc::format!(
                "basis index {n} beyond truncation {n_max}"
            )));
        }
        let dim = 2 * (n_max + 1);
        let mut vec = alloc::vec![Complex64::new(0.0, 0.0); dim];
        let offset = match spin {
            SpinLabel::Up => 0,
            SpinLabel::Down => n_max + 1,
        };
        vec[offset + n] = Complex64::new(1.0, 0.0);
        FockState::new(n_max, vec)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn vec(&self) -> &[Complex64] {
        &self.vec
    }

    pub fn norm_sqr(&self) -> f64 {
        self.vec.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn up_block(&self) -> &[Complex64] {
        &self.vec[..self.n_max + 1]
    }

    pub fn down_block(&self) -> &[Complex64] {
        &self.vec[self.n_max + 1..]
    }

    pub fn inner(&self, other: &FockState) -> Complex64 {
        assert_eq!(self.n_max, other.n_max);
        self.vec
            .iter()
            .zip(&other.vec)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex64::new(0.0, 0.0), |acc, x| acc + x)
    }

    /// Probability of finding the qubit up, `||up||^2 / ||vec||^2`.
    pub fn brightness(&self) -> Result<f64> {
        let total = self.norm_sqr();
        if total <= 0.0 {
            return Err(Error::ZeroNormState);
        }
        let up: f64 = self.up_block().iter().map(|x| x.norm_sqr()).sum();
        Ok(up / total)
    }
}

/// Coherent-state number coefficients `<n|alpha> = e^{-|alpha|^2/2} alpha^n / sqrt(n!)`,
/// generated by the stable ratio recurrence.
fn coherent_coefficients(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c *= alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Expand a coherent superposition over the truncated number basis.
///
/// The report carries the norm lost to the truncation; it stays below
/// `1e-10` when `n_max >= |alpha|^2 + 6 |alpha| + 10` for every label.
pub fn encode(psi: &SpinMotionState, n_max: usize) -> Result<(FockState, TruncationReport)> {
    if n_max > N_MAX_CAP {
        return Err(Error::InvalidArgument(alloc::format!(
            "n_max {n_max} beyond cap {N_MAX_CAP}"
        )));
    }
    let dim = 2 * (n_max + 1);
    let mut vec = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for t in psi.terms() {
        let offset = match t.spin {
            SpinLabel::Up => 0,
            SpinLabel::Down => n_max + 1,
        };
        for (n, c) in coherent_coefficients(t.label.alpha(), n_max)
            .into_iter()
            .enumerate()
        {
            vec[offset + n] += t.amp * c;
        }
    }
    let state = FockState::new(n_max, vec)?;
    let exact = psi.inner(psi).re;
    let leaked = (exact - state.norm_sqr()).max(0.0);
    Ok((
        state,
        TruncationReport {
            leaked_norm: leaked,
            n_max,
        },
    ))
}

/// Displacement operator `D[gamma]` on the truncated motional space:
/// the exponential of the truncated generator `gamma a^dag - conj(gamma) a`.
pub fn displacement_matrix(gamma: Complex64, n_max: usize) -> CMat {
    let n = n_max + 1;
    let mut gen = CMat::zeros(n);
    for m in 0..n_max {
        // a^dag |m> = sqrt(m+1) |m+1>, a |m+1> = sqrt(m+1) |m>.
        let root = ((m + 1) as f64).sqrt();
        gen.set(m + 1, m, gamma * root);
        gen.set(m, m + 1, -gamma.conj() * root);
    }
    expm(&gen)
}

/// Full kick matrix on spin x motion:
/// `sigma_+ (x) D[i s eta] e^{+i phi_lambda} + sigma_- (x) D[-i s eta] e^{-i phi_lambda}`
/// with `s` the direction sign; the optical phase multiplies the raising /
/// lowering branches exactly as in the coherent-label engine.
pub fn sdk_matrix(k: &KickParams, n_max: usize) -> CMat {
    let n = n_max + 1;
    let s = k.direction.sign();
    let d_up = displacement_matrix(Complex64::new(0.0, s * k.eta), n_max);
    let d_down = displacement_matrix(Complex64::new(0.0, -s * k.eta), n_max);
    let plus = Complex64::from_polar(1.0, k.phi_lambda);
    let minus = plus.conj();

    let mut out = CMat::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            // up <- down (sigma_+) and down <- up (sigma_-).
            out.set(i, n + j, plus * d_up.get(i, j));
            out.set(n + i, j, minus * d_down.get(i, j));
        }
    }
    out
}

/// Free evolution: diagonal `e^{-i n theta}` on number states of both spin
/// blocks.
pub fn evolve_matrix(theta: f64, n_max: usize) -> CMat {
    let n = n_max + 1;
    let mut out = CMat::zeros(2 * n);
    for m in 0..n {
        let ph = Complex64::from_polar(1.0, -(m as f64) * theta);
        out.set(m, m, ph);
        out.set(n + m, n + m, ph);
    }
    out
}

/// Microwave rotation: the 2x2 spin rotation tensored with the motional
/// identity, same convention as the coherent-label engine.
pub fn uwave_matrix(r: &RotationParams, n_max: usize) -> CMat {
    let n = n_max + 1;
    let half = 0.5 * r.area;
    let c = Complex64::new(half.cos(), 0.0);
    let s = half.sin();
    let up_from_down = -s * Complex64::from_polar(1.0, -r.phi_mu);
    let down_from_up = s * Complex64::from_polar(1.0, r.phi_mu);
    let mut out = CMat::zeros(2 * n);
    for m in 0..n {
        out.set(m, m, c);
        out.set(n + m, n + m, c);
        out.set(m, n + m, up_from_down);
        out.set(n + m, m, down_from_up);
    }
    out
}

/// Kick-size bound for a program: largest initial label plus `eta` per kick.
/// Returns a truncation that keeps encode leakage below ~1e-10, capped at
/// [`N_MAX_CAP`].
pub fn recommended_n_max(initial: &SpinMotionState, prog: &PulseProgram, eta: f64) -> usize {
    let max_initial = initial
        .terms()
        .iter()
        .map(|t| t.label.alpha().norm())
        .fold(0.0f64, f64::max);
    let bound = max_initial + prog.sdk_count() as f64 * eta;
    let rec = (bound * bound + 6.0 * bound + 10.0).ceil() as usize;
    rec.min(N_MAX_CAP)
}

/// Execute a program through dense matrices. Matches
/// [`crate::program::execute`] instruction for instruction; brightness of
/// the result comes from [`FockState::brightness`].
pub fn oracle_run(
    prog: &PulseProgram,
    initial: &FockState,
    params: &ExecParams,
    bind: &Bindings,
) -> Result<FockState> {
    let n_max = initial.n_max();
    let n = n_max + 1;
    // eta is fixed for the run, so only two displacement matrices exist.
    let d_plus = displacement_matrix(Complex64::new(0.0, params.eta), n_max);
    let d_minus = displacement_matrix(Complex64::new(0.0, -params.eta), n_max);

    let mut vec = initial.vec().to_vec();
    let mut phi_lambda = params.phi_lambda;

    for (idx, instr) in prog.instructions().iter().enumerate() {
        let line = idx + 1;
        match instr {
            Instruction::Sdk { direction } => {
                let (d_up, d_down) = match direction {
                    KickDirection::Plus => (&d_plus, &d_minus),
                    KickDirection::Minus => (&d_minus, &d_plus),
                };
                let plus = Complex64::from_polar(1.0, phi_lambda);
                let up_new = d_up.matvec(&vec[n..]);
                let down_new = d_down.matvec(&vec[..n]);
                for i in 0..n {
                    vec[i] = plus * up_new[i];
                    vec[n + i] = plus.conj() * down_new[i];
                }
            }
            Instruction::Wait { angle } => {
                let theta = angle.eval(bind, line)?;
                if theta < 0.0 {
                    return Err(Error::NegativeWait { line });
                }
                for m in 0..n {
                    let ph = Complex64::from_polar(1.0, -(m as f64) * theta);
                    vec[m] *= ph;
                    vec[n + m] *= ph;
                }
            }
            Instruction::Uw { phi_mu, area } => {
                let r = RotationParams::new(phi_mu.eval(bind, line)?, area.eval(bind, line)?)?;
                let half = 0.5 * r.area;
                let c = half.cos();
                let s = half.sin();
                let ufd = -s * Complex64::from_polar(1.0, -r.phi_mu);
                let dfu = s * Complex64::from_polar(1.0, r.phi_mu);
                for m in 0..n {
                    let u = vec[m];
                    let d = vec[n + m];
                    vec[m] = c * u + ufd * d;
                    vec[n + m] = dfu * u + c * d;
                }
            }
            Instruction::SetPhase { phi_lambda: e } => {
                phi_lambda = e.eval(bind, line)?;
            }
        }
    }
    FockState::new(n_max, vec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{CoherentLabel, CoherentTerm, SpinMotionState};
    use core::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn displacement_of_zero_is_identity() {
        let d = displacement_matrix(c(0.0, 0.0), 12);
        assert_eq!(d, CMat::identity(13));
    }

    #[test]
    fn displacement_is_unitary_on_block() {
        for gamma in [c(0.0, 0.2), c(0.3, -0.1), c(0.0, -0.4)] {
            let d = displacement_matrix(gamma, 60);
            assert!(d.unitarity_defect() < 1e-12, "gamma = {gamma}");
        }
    }

    #[test]
    fn displacement_matches_coherent_encoding() {
        // D[i eta] |0> = |i eta> up to truncation.
        let eta = 0.2;
        let d = displacement_matrix(c(0.0, eta), 40);
        let mut vac = alloc::vec![c(0.0, 0.0); 41];
        vac[0] = c(1.0, 0.0);
        let displaced = d.matvec(&vac);
        let expected = coherent_coefficients(c(0.0, eta), 40);
        for (a, b) in displaced.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn displacement_composition_law() {
        // D[a] D[b] = e^{(a conj(b) - conj(a) b)/2} D[a+b] on a probe.
        let a = c(0.1, 0.25);
        let b = c(-0.2, 0.05);
        let n_max = 50;
        let da = displacement_matrix(a, n_max);
        let db = displacement_matrix(b, n_max);
        let dab = displacement_matrix(a + b, n_max);
        let phase = ((a * b.conj() - a.conj() * b) / 2.0).exp();

        let probe = coherent_coefficients(c(0.3, -0.4), n_max);
        let lhs = da.matvec(&db.matvec(&probe));
        let rhs: Vec<Complex64> = dab.matvec(&probe).iter().map(|x| phase * x).collect();
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-10);
        }
    }

    #[test]
    fn evolve_full_period_is_identity() {
        let e = evolve_matrix(TAU, 20);
        let defect = e
            .matmul(&CMat::identity(42))
            .data
            .iter()
            .zip(&CMat::identity(42).data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(defect < 1e-12);
    }

    #[test]
    fn evolve_rotates_coherent_labels() {
        let theta = 0.7;
        let alpha = c(0.5, -0.3);
        let n_max = 40;
        let e = evolve_matrix(theta, n_max);
        let mut full = alloc::vec![c(0.0, 0.0); 2 * (n_max + 1)];
        for (n, coef) in coherent_coefficients(alpha, n_max).into_iter().enumerate() {
            full[n] = coef;
        }
        let rotated = e.matvec(&full);
        let expected = coherent_coefficients(alpha * Complex64::from_polar(1.0, -theta), n_max);
        for (got, want) in rotated[..n_max + 1].iter().zip(&expected) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn encode_leakage_small_at_recommended_truncation() {
        let psi = SpinMotionState::coherent(SpinLabel::Up, c(1.0, 0.0)).unwrap();
        let (_state, report) = encode(&psi, 40).unwrap();
        assert!(report.leaked_norm < 1e-12);
    }

    #[test]
    fn encode_norm_agrees_with_exact_inner() {
        let psi = SpinMotionState::new(alloc::vec![
            CoherentTerm::new(
                c(1.0, 0.0),
                SpinLabel::Up,
                CoherentLabel::new(c(1.0, 0.0)).unwrap()
            ),
            CoherentTerm::new(
                c(1.0, 0.0),
                SpinLabel::Up,
                CoherentLabel::new(c(-1.0, 0.0)).unwrap()
            ),
        ])
        .unwrap();
        let (state, report) = encode(&psi, 40).unwrap();
        let exact = psi.inner(&psi).re; // 2 + 2 e^{-2}
        assert!((exact - (2.0 + 2.0 * (-2.0f64).exp())).abs() < 1e-14);
        assert!((state.norm_sqr() - exact).abs() < 1e-10);
        assert!(report.leaked_norm < 1e-10);
    }

    #[test]
    fn sdk_matrix_is_unitary() {
        let k = KickParams::new(0.2, 0.77, KickDirection::Minus).unwrap();
        let m = sdk_matrix(&k, 40);
        assert!(m.unitarity_defect() < 1e-12);
    }

    #[test]
    fn uwave_matrix_is_unitary() {
        let r = RotationParams::pi_half(0.4);
        let m = uwave_matrix(&r, 10);
        assert!(m.unitarity_defect() < 1e-13);
    }

    #[test]
    fn truncation_cap_enforced() {
        let psi = SpinMotionState::ground(SpinLabel::Down);
        assert!(encode(&psi, N_MAX_CAP + 1).is_err());
    }
}
