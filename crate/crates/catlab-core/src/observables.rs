//! Measured quantities: spin-up brightness, thermal averaging, Ramsey
//! contrast scans, the two-component revival law and its width, the
//! closed-form three/four-component thermal brightness, and amplitude-only
//! lineshape fitting with the fidelity chain built on it.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math comes from the Float trait in no_std builds
use num_traits::Float;

use crate::error::Error;
use crate::phase::{SpinLabel, SpinMotionState, ThermalEnsemble};
use crate::program::{execute, Bindings, ExecParams, PulseProgram};
use crate::quad::gauss_hermite;
use crate::rng::SplitMix64;
use crate::Result;

/// One sampled brightness point of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightnessSample {
    pub theta: f64,
    pub phi_analysis: f64,
    pub value: f64,
}

/// Probability of finding the qubit in the bright (up) state:
/// `<up component|up component> / <psi|psi>`.
pub fn brightness(psi: &SpinMotionState) -> Result<f64> {
    let total = psi.inner(psi).re;
    if total <= 0.0 {
        return Err(Error::ZeroNormState);
    }
    let up = psi.spin_component(SpinLabel::Up);
    Ok((up.inner(&up).re / total).clamp(0.0, 1.0))
}

/// Execute a program and measure brightness in one step.
pub fn run_brightness(
    prog: &PulseProgram,
    initial: &SpinMotionState,
    params: &ExecParams,
    bind: &Bindings,
) -> Result<f64> {
    brightness(&execute(prog, initial, params, bind)?)
}

/// Node count and convergence tolerance for the thermal quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss-Hermite nodes per axis.
    pub nodes: usize,
    /// Flag the result as unconverged when doubling the nodes moves it by
    /// more than this.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 24,
            tol: 1e-8,
        }
    }
}

/// Thermal brightness with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalBrightness {
    pub value: f64,
    /// Change of the value under node doubling.
    pub node_delta: f64,
    pub converged: bool,
}

fn brightness_from_beta(
    prog: &PulseProgram,
    initial_spin: SpinLabel,
    beta: Complex64,
    params: &ExecParams,
    bind: &Bindings,
) -> Result<f64> {
    let init = SpinMotionState::coherent(initial_spin, beta)?;
    run_brightness(prog, &init, params, bind)
}

fn thermal_quadrature_pass(
    prog: &PulseProgram,
    initial_spin: SpinLabel,
    nbar: f64,
    nodes: usize,
    params: &ExecParams,
    bind: &Bindings,
) -> Result<f64> {
    let (x, w) = gauss_hermite(nodes)?;
    let scale = nbar.sqrt();
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (xj, wj) in x.iter().zip(&w) {
            let beta = Complex64::new(scale * xi, scale * xj);
            acc += wi * wj * brightness_from_beta(prog, initial_spin, beta, params, bind)?;
        }
    }
    Ok(acc / core::f64::consts::PI)
}

/// Brightness of a program averaged over a thermal initial motional state,
/// `B = (1/(pi nbar)) integral e^{-|beta|^2/nbar} B(beta) d^2 beta`,
/// evaluated by two-dimensional Gauss-Hermite quadrature with per-axis
/// scaling `sigma = sqrt(nbar/2)`. `nbar = 0` short-circuits to the pure
/// ground-state brightness.
pub fn thermal_brightness(
    prog: &PulseProgram,
    initial_spin: SpinLabel,
    ens: &ThermalEnsemble,
    quad: &QuadratureSpec,
    params: &ExecParams,
    bind: &Bindings,
) -> Result<ThermalBrightness> {
    if ens.nbar() == 0.0 {
        let value = run_brightness(prog, &SpinMotionState::ground(initial_spin), params, bind)?;
        return Ok(ThermalBrightness {
            value,
            node_delta: 0.0,
            converged: true,
        });
    }
    if quad.nodes == 0 {
        return Err(Error::InvalidArgument(
            "quadrature needs at least one node".to_string(),
        ));
    }
    let coarse = thermal_quadrature_pass(prog, initial_spin, ens.nbar(), quad.nodes, params, bind)?;
    let fine =
        thermal_quadrature_pass(prog, initial_spin, ens.nbar(), 2 * quad.nodes, params, bind)?;
    let node_delta = (fine - coarse).abs();
    Ok(ThermalBrightness {
        value: fine,
        node_delta,
        converged: node_delta <= quad.tol,
    })
}

/// Monte Carlo cross-check of [`thermal_brightness`]: `beta` drawn from the
/// thermal Gaussian with `sigma = sqrt(nbar/2)` per axis. Converges like
/// `1/sqrt(n_samples)`; kept for validating the quadrature, not for
/// production scans.
pub fn thermal_brightness_mc(
    prog: &PulseProgram,
    initial_spin: SpinLabel,
    ens: &ThermalEnsemble,
    n_samples: usize,
    seed: u64,
    params: &ExecParams,
    bind: &Bindings,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".to_string()));
    }
    if ens.nbar() == 0.0 {
        return run_brightness(prog, &SpinMotionState::ground(initial_spin), params, bind);
    }
    let sigma = (ens.nbar() / 2.0).sqrt();
    let mut rng = SplitMix64::new(seed);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        let (gx, gy) = rng.normal_pair();
        let beta = Complex64::new(sigma * gx, sigma * gy);
        acc += brightness_from_beta(prog, initial_spin, beta, params, bind)?;
    }
    Ok(acc / n_samples as f64)
}

/// Which lineshape a contrast curve is meant to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Two-component revival `C0 exp(-4 |alpha|^2 (1 - cos theta))`.
    Eq4,
    /// Three/four-component closed-form lineshape.
    Multi34,
    /// Six/eight-component lineshape (no closed form; template comes from
    /// the pure-state simulation).
    Multi68,
}

/// One point of a contrast-vs-delay curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastPoint {
    pub theta: f64,
    /// Fitted fringe amplitude times two (so an ideal full-visibility
    /// fringe scores 1).
    pub contrast: f64,
    /// Standard error of the contrast from the fringe-fit residuals.
    pub stderr: f64,
    /// Set when the fringe was flat and the contrast defaulted to zero.
    pub degenerate: bool,
}

/// Contrast versus trap delay, with an optional peak-amplitude fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastCurve {
    pub points: Vec<ContrastPoint>,
    pub model: ModelKind,
    pub c0_fit: Option<FitResult>,
}

impl ContrastCurve {
    pub fn thetas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta).collect()
    }

    pub fn contrasts(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.contrast).collect()
    }
}

/// Least-squares fringe fit `value(phi) = a + b cos(phi) + c sin(phi)`.
/// Returns `(a, b, c, rms_residual)`, or `None` when the phase set is
/// degenerate.
fn fit_fringe(phases: &[f64], values: &[f64]) -> Option<(f64, f64, f64, f64)> {
    let n = phases.len();
    // Normal equations for the three regressors.
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&phi, &y) in phases.iter().zip(values) {
        let g = [1.0, phi.cos(), phi.sin()];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += g[i] * g[j];
            }
            rhs[i] += g[i] * y;
        }
    }
    let det = det3(&m);
    if det.abs() < 1e-9 * n as f64 {
        return None;
    }
    let sol = solve3(&m, &rhs, det);
    let mut ss = 0.0;
    for (&phi, &y) in phases.iter().zip(values) {
        let fit = sol[0] + sol[1] * phi.cos() + sol[2] * phi.sin();
        ss += (y - fit) * (y - fit);
    }
    Some((sol[0], sol[1], sol[2], (ss / n as f64).sqrt()))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn solve3(m: &[[f64; 3]; 3], rhs: &[f64; 3], det: f64) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for k in 0..3 {
        let mut mk = *m;
        for i in 0..3 {
            mk[i][k] = rhs[i];
        }
        out[k] = det3(&mk) / det;
    }
    out
}

/// Ramsey contrast versus trap delay.
///
/// For every `theta` the analysis-pulse phase is swept over
/// `analysis_phases` (at least four points spanning the circle), the
/// brightness fringe is fit to `a + b cos(phi - phi0)` by linear least
/// squares on cosine/sine regressors, and the contrast is `2 |b|` so that an
/// ideal two-component revival scores exactly one. Flat fringes are
/// reported as zero contrast with the `degenerate` flag set.
#[allow(clippy::too_many_arguments)]
pub fn contrast_scan(
    prog: &PulseProgram,
    initial_spin: SpinLabel,
    thetas: &[f64],
    ens: &ThermalEnsemble,
    analysis_phases: &[f64],
    quad: &QuadratureSpec,
    params: &ExecParams,
    model: ModelKind,
) -> Result<ContrastCurve> {
    if analysis_phases.len() < 4 {
        return Err(Error::InvalidArgument(
            "contrast_scan needs at least 4 analysis phases spanning 2 pi".to_string(),
        ));
    }
    let mut points = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let mut values = Vec::with_capacity(analysis_phases.len());
        for &phi in analysis_phases {
            let bind = Bindings::theta_phi(theta, phi);
            let b = thermal_brightness(prog, initial_spin, ens, quad, params, &bind)?;
            values.push(b.value);
        }
        let point = match fit_fringe(analysis_phases, &values) {
            Some((_, b, c, rms)) => {
                let amp = (b * b + c * c).sqrt();
                let n = analysis_phases.len() as f64;
                // Residual-based one-sigma error on the fitted amplitude;
                // the cos/sin regressors carry weight ~ n/2 each.
                let stderr = if n > 3.0 {
                    2.0 * rms * (2.0 / n).sqrt() * (n / (n - 3.0)).sqrt()
                } else {
                    0.0
                };
                if amp < 1e-13 {
                    ContrastPoint {
                        theta,
                        contrast: 0.0,
                        stderr,
                        degenerate: true,
                    }
                } else {
                    ContrastPoint {
                        theta,
                        contrast: 2.0 * amp,
                        stderr,
                        degenerate: false,
                    }
                }
            }
            None => ContrastPoint {
                theta,
                contrast: 0.0,
                stderr: 0.0,
                degenerate: true,
            },
        };
        points.push(point);
    }
    Ok(ContrastCurve {
        points,
        model,
        c0_fit: None,
    })
}

/// Two-component revival law `C(theta) = C0 exp(-4 |alpha|^2 (1 - cos theta))`.
pub fn contrast_closed_form(theta: f64, alpha_abs: f64, c0: f64) -> f64 {
    c0 * (-4.0 * alpha_abs * alpha_abs * (1.0 - theta.cos())).exp()
}

/// Full width at half maximum of the contrast revival around
/// `theta = 2 pi`, found by bisection on the closed form to 1e-10.
/// Approaches `1.18 / |alpha|` for `|alpha| >> 1/sqrt(2)`.
pub fn revival_fwhm(alpha_abs: f64) -> Result<f64> {
    if !alpha_abs.is_finite() || alpha_abs <= 0.0 {
        return Err(Error::InvalidArgument(
            "revival_fwhm needs |alpha| > 0".to_string(),
        ));
    }
    // C(2 pi + delta)/C0 = exp(-4 a^2 (1 - cos delta)) crosses 1/2 within
    // delta in (0, pi].
    let target = 0.5f64.ln();
    let f = |delta: f64| -4.0 * alpha_abs * alpha_abs * (1.0 - delta.cos()) - target;
    let mut lo = 0.0f64;
    let mut hi = core::f64::consts::PI;
    if f(hi) > 0.0 {
        // Contrast never falls to half: the revival is wider than the
        // whole period.
        return Err(Error::InvalidArgument(alloc::format!(
            "revival of |alpha| = {alpha_abs} never reaches half maximum"
        )));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + hi) // 2 * midpoint: full width is twice the half-width.
}

/// Closed-form thermal brightness of the three/four-component
/// interferometer at delay `theta` and microwave phases
/// `(phi_first, phi_middle, phi_analysis)`:
///
/// ```text
/// B = 1/4 [1 + e^{16 (1+2 nbar) eta^2 (cos theta - 1)} cos(phi1 - phi3)]
///   + 1/4 [1 - e^{-32 (1+2 nbar) eta^2 cos^2(theta/2)} cos(2 phi2 - phi1 - phi3)]
///   + 1/2 e^{-8 (1+2 nbar) eta^2} sin(16 eta^2 sin theta) sin(phi2 - phi3)
/// ```
///
/// The sine-term coefficient 1/2 is fixed by the interferometer expansion
/// and confirmed against both the quadrature and the number-basis thermal
/// sum (see tests/closed_form.rs).
pub fn multi34_closed_form(theta: f64, phis: &[f64; 3], eta: f64, nbar: f64) -> f64 {
    let heat = 1.0 + 2.0 * nbar;
    let e2 = eta * eta;
    let env_revival = (16.0 * heat * e2 * (theta.cos() - 1.0)).exp();
    let half = 0.5 * theta;
    let env_middle = (-32.0 * heat * e2 * half.cos() * half.cos()).exp();
    let env_sine = (-8.0 * heat * e2).exp();
    let x = 16.0 * e2 * theta.sin();

    0.25 * (1.0 + env_revival * (phis[0] - phis[2]).cos())
        + 0.25 * (1.0 - env_middle * (2.0 * phis[1] - phis[0] - phis[2]).cos())
        + 0.5 * env_sine * x.sin() * (phis[1] - phis[2]).sin()
}

/// Contrast of the three/four-component lineshape versus delay: the fitted
/// fringe amplitude of [`multi34_closed_form`] over the analysis phase,
/// times two.
pub fn multi34_contrast_closed_form(
    theta: f64,
    eta: f64,
    nbar: f64,
    phi_first: f64,
    phi_middle: f64,
) -> f64 {
    let heat = 1.0 + 2.0 * nbar;
    let e2 = eta * eta;
    let env_revival = (16.0 * heat * e2 * (theta.cos() - 1.0)).exp();
    let half = 0.5 * theta;
    let env_middle = (-32.0 * heat * e2 * half.cos() * half.cos()).exp();
    let env_sine = (-8.0 * heat * e2).exp();
    let x = 16.0 * e2 * theta.sin();

    // B as a function of the analysis phase phi3 is first-harmonic:
    // collect the cos(phi3) and sin(phi3) coefficients.
    let a_c = 0.25 * env_revival * phi_first.cos()
        - 0.25 * env_middle * (2.0 * phi_middle - phi_first).cos()
        + 0.5 * env_sine * x.sin() * phi_middle.sin();
    let a_s = 0.25 * env_revival * phi_first.sin()
        - 0.25 * env_middle * (2.0 * phi_middle - phi_first).sin()
        - 0.5 * env_sine * x.sin() * phi_middle.cos();
    2.0 * (a_c * a_c + a_s * a_s).sqrt()
}

/// Result of an amplitude-only linear least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub c0: f64,
    pub stderr: f64,
    pub residual_rms: f64,
}

/// Fit the single free amplitude of a known lineshape template:
/// `c0 = sum(y f) / sum(f^2)` with the standard error taken from the
/// residuals. `template` must be sampled on the same grid as `data`.
pub fn fit_peak_contrast(data: &[f64], template: &[f64]) -> Result<FitResult> {
    if data.is_empty() || data.len() != template.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "fit needs matching nonempty samples, got {} data and {} template",
            data.len(),
            template.len()
        )));
    }
    let sff: f64 = template.iter().map(|f| f * f).sum();
    if sff <= 0.0 {
        return Err(Error::InvalidArgument(
            "template is identically zero".to_string(),
        ));
    }
    let syf: f64 = data.iter().zip(template).map(|(y, f)| y * f).sum();
    let c0 = syf / sff;
    let n = data.len() as f64;
    let ss: f64 = data
        .iter()
        .zip(template)
        .map(|(y, f)| {
            let r = y - c0 * f;
            r * r
        })
        .sum();
    let residual_rms = (ss / n).sqrt();
    let stderr = if data.len() > 1 {
        (ss / (n - 1.0) / sff).sqrt()
    } else {
        0.0
    };
    Ok(FitResult {
        c0,
        stderr,
        residual_rms,
    })
}

/// Cat-state fidelity inferred from the revival peak contrast,
/// `F = sqrt(C0)`.
pub fn fidelity_from_contrast(c0: f64) -> Result<f64> {
    if !c0.is_finite() || c0 < 0.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "contrast must be finite and >= 0, got {c0}"
        )));
    }
    Ok(c0.sqrt())
}

/// Effective fidelity of a single kick inferred from the revival contrast
/// of a cat built from two sets of `n_kicks_per_set` kicks:
/// `f = C0^{1/(4 n)}`, i.e. the state fidelity `sqrt(C0)` spread over the
/// `2 n` kicks of the full sequence.
pub fn sdk_fidelity_estimate(c0: f64, n_kicks_per_set: usize) -> Result<f64> {
    if n_kicks_per_set == 0 {
        return Err(Error::InvalidArgument(
            "n_kicks_per_set must be >= 1".to_string(),
        ));
    }
    if !c0.is_finite() || c0 <= 0.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "contrast must be finite and > 0, got {c0}"
        )));
    }
    Ok(c0.powf(1.0 / (4.0 * n_kicks_per_set as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{CoherentLabel, CoherentTerm};
    use crate::presets::{build_preset, PresetParams};
    use crate::program::parse_program;
    use core::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn brightness_basics() {
        let up = SpinMotionState::ground(SpinLabel::Up);
        assert!((brightness(&up).unwrap() - 1.0).abs() < 1e-15);

        let both = SpinMotionState::new(alloc::vec![
            CoherentTerm::new(c(1.0, 0.0), SpinLabel::Up, CoherentLabel::origin()),
            CoherentTerm::new(c(1.0, 0.0), SpinLabel::Down, CoherentLabel::origin()),
        ])
        .unwrap();
        assert!((brightness(&both).unwrap() - 0.5).abs() < 1e-15);

        let empty = SpinMotionState::new(alloc::vec![]).unwrap();
        assert!(matches!(brightness(&empty), Err(Error::ZeroNormState)));
    }

    #[test]
    fn ideal_revival_brightness_is_one() {
        // cat2-halfperiod, n = 10, theta = 2 pi, analysis phase 0.
        let preset = build_preset("cat2-halfperiod", &PresetParams::default()).unwrap();
        let b = run_brightness(
            &preset.program,
            &preset.initial_state(),
            &ExecParams::default(),
            &Bindings::theta_phi(TAU, 0.0),
        )
        .unwrap();
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ramsey_without_kicks_gives_cosine_fringe() {
        let prog = parse_program("ramsey", "UW 0 pi/2\nUW phi pi/2").unwrap();
        let init = SpinMotionState::ground(SpinLabel::Down);
        for phi in [0.0, 0.7, PI, 4.0] {
            let b = run_brightness(
                &prog,
                &init,
                &ExecParams::default(),
                &Bindings::theta_phi(0.0, phi),
            )
            .unwrap();
            assert!((b - 0.5 * (1.0 + phi.cos())).abs() < 1e-12, "phi = {phi}");
        }
    }

    #[test]
    fn thermal_zero_nbar_short_circuits() {
        let preset = build_preset("cat34", &PresetParams::default()).unwrap();
        let quad = QuadratureSpec::default();
        let bind = Bindings::theta_phi(0.4, 0.2);
        let t = thermal_brightness(
            &preset.program,
            preset.initial_spin,
            &ThermalEnsemble::ground(),
            &quad,
            &ExecParams::default(),
            &bind,
        )
        .unwrap();
        let pure = run_brightness(
            &preset.program,
            &preset.initial_state(),
            &ExecParams::default(),
            &bind,
        )
        .unwrap();
        assert!(t.converged);
        assert_eq!(t.value, pure);
    }

    #[test]
    fn thermal_quadrature_matches_monte_carlo() {
        let preset = build_preset("cat34", &PresetParams::default()).unwrap();
        let ens = ThermalEnsemble::new(0.15).unwrap();
        let bind = Bindings::theta_phi(0.9, 0.3);
        let quad = thermal_brightness(
            &preset.program,
            preset.initial_spin,
            &ens,
            &QuadratureSpec::default(),
            &ExecParams::default(),
            &bind,
        )
        .unwrap();
        assert!(quad.converged);
        let mc = thermal_brightness_mc(
            &preset.program,
            preset.initial_spin,
            &ens,
            20_000,
            12345,
            &ExecParams::default(),
            &bind,
        )
        .unwrap();
        assert!(
            (quad.value - mc).abs() < 5e-3,
            "quad {} vs mc {}",
            quad.value,
            mc
        );
    }

    #[test]
    fn closed_form_trivial_points() {
        assert!((contrast_closed_form(0.0, 3.0, 0.8) - 0.8).abs() < 1e-15);
        let expected = 0.7 * (-32.0f64).exp();
        assert!((contrast_closed_form(PI, 2.0, 0.7) - expected).abs() < 1e-18);
    }

    #[test]
    fn fwhm_matches_small_angle_law() {
        for alpha in [2.0, 5.0, 10.0, 12.0] {
            let fwhm = revival_fwhm(alpha).unwrap();
            let approx = 1.18 / alpha;
            assert!(
                (fwhm - approx).abs() / approx < 0.02,
                "alpha = {alpha}: {fwhm} vs {approx}"
            );
        }
        // |alpha| = 10 pins the quoted 0.118 rad.
        assert!((revival_fwhm(10.0).unwrap() - 0.118).abs() < 0.118 * 0.02);
        // Too-small separations never decay to half maximum.
        assert!(revival_fwhm(0.2).is_err());
    }

    #[test]
    fn fit_recovers_exact_amplitude() {
        let thetas: Vec<f64> = (0..60).map(|i| TAU - 0.3 + 0.01 * i as f64).collect();
        let template: Vec<f64> = thetas
            .iter()
            .map(|&t| contrast_closed_form(t, 2.0, 1.0))
            .collect();
        let data: Vec<f64> = template.iter().map(|f| 0.37 * f).collect();
        let fit = fit_peak_contrast(&data, &template).unwrap();
        assert!((fit.c0 - 0.37).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn fit_zero_data_gives_zero_amplitude() {
        let template = alloc::vec![0.2, 0.5, 1.0, 0.5, 0.2];
        let data = alloc::vec![0.0; 5];
        let fit = fit_peak_contrast(&data, &template).unwrap();
        assert_eq!(fit.c0, 0.0);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_peak_contrast(&[], &[]).is_err());
        assert!(fit_peak_contrast(&[1.0], &[0.0]).is_err());
        assert!(fit_peak_contrast(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn fidelity_chain() {
        assert!((fidelity_from_contrast(0.81).unwrap() - 0.9).abs() < 1e-12);
        assert!((fidelity_from_contrast(0.36).unwrap() - 0.6).abs() < 1e-12);
        assert!((fidelity_from_contrast(0.1296).unwrap() - 0.36).abs() < 1e-12);
        assert!(fidelity_from_contrast(-0.1).is_err());
    }

    #[test]
    fn sdk_fidelity_round_trip() {
        // f = 0.951 over two sets of 10 kicks: C0 = f^40.
        let c0 = 0.951f64.powi(40);
        assert!((c0 - 0.134).abs() < 1e-3);
        let f = sdk_fidelity_estimate(c0, 10).unwrap();
        assert!((f - 0.951).abs() < 1e-12);
        assert!((sdk_fidelity_estimate(1.0, 7).unwrap() - 1.0).abs() < 1e-15);
        let c0_doppler = 0.9912f64.powi(4 * 25);
        assert!((sdk_fidelity_estimate(c0_doppler, 25).unwrap() - 0.9912).abs() < 1e-12);
    }

    #[test]
    fn contrast_scan_requires_enough_phases() {
        let preset = build_preset("cat2-halfperiod", &PresetParams::default()).unwrap();
        let err = contrast_scan(
            &preset.program,
            preset.initial_spin,
            &[TAU],
            &ThermalEnsemble::ground(),
            &[0.0, 1.0, 2.0],
            &QuadratureSpec::default(),
            &ExecParams::default(),
            ModelKind::Eq4,
        );
        assert!(err.is_err());
    }

    #[test]
    fn contrast_scan_flags_flat_fringe() {
        // A bare pi/2 pulse has no phi dependence: flat fringe.
        let prog = parse_program("flat", "UW 0 pi/2\nWAIT theta\nUW 0 pi/2").unwrap();
        let phases: Vec<f64> = (0..8).map(|i| TAU * i as f64 / 8.0).collect();
        let curve = contrast_scan(
            &prog,
            SpinLabel::Down,
            &[0.0],
            &ThermalEnsemble::ground(),
            &phases,
            &QuadratureSpec::default(),
            &ExecParams::default(),
            ModelKind::Eq4,
        )
        .unwrap();
        assert!(curve.points[0].degenerate);
        assert_eq!(curve.points[0].contrast, 0.0);
    }

    #[test]
    fn ideal_cat2_contrast_tracks_closed_form() {
        let preset = build_preset(
            "cat2-halfperiod",
            &PresetParams {
                n_kicks: 5,
                ..PresetParams::default()
            },
        )
        .unwrap();
        let alpha = 5.0 * 0.2;
        let thetas: Vec<f64> = (0..9).map(|i| TAU - 1.0 + 0.25 * i as f64).collect();
        let phases: Vec<f64> = (0..8).map(|i| TAU * i as f64 / 8.0).collect();
        let curve = contrast_scan(
            &preset.program,
            preset.initial_spin,
            &thetas,
            &ThermalEnsemble::ground(),
            &phases,
            &QuadratureSpec::default(),
            &ExecParams::default(),
            ModelKind::Eq4,
        )
        .unwrap();
        for p in &curve.points {
            let expected = contrast_closed_form(p.theta, alpha, 1.0);
            assert!(
                (p.contrast - expected).abs() < 1e-9,
                "theta {}: {} vs {}",
                p.theta,
                p.contrast,
                expected
            );
        }
    }

    #[test]
    fn thermal_revival_width_broadened_by_occupation() {
        // Thermal revival: contrast = exp(-4 (1+2 nbar) |alpha|^2 (1-cos th)).
        // Fit the exponent slope from two points and compare.
        let n_kicks = 5;
        let nbar = 0.15;
        let preset = build_preset(
            "cat2-halfperiod",
            &PresetParams {
                n_kicks,
                ..PresetParams::default()
            },
        )
        .unwrap();
        let ens = ThermalEnsemble::new(nbar).unwrap();
        let phases: Vec<f64> = (0..8).map(|i| TAU * i as f64 / 8.0).collect();
        let thetas = [TAU - 0.25, TAU - 0.125];
        let curve = contrast_scan(
            &preset.program,
            preset.initial_spin,
            &thetas,
            &ens,
            &phases,
            &QuadratureSpec::default(),
            &ExecParams::default(),
            ModelKind::Eq4,
        )
        .unwrap();
        let alpha = n_kicks as f64 * 0.2;
        for p in &curve.points {
            let expected =
                (-4.0 * (1.0 + 2.0 * nbar) * alpha * alpha * (1.0 - p.theta.cos())).exp();
            assert!(
                (p.contrast - expected).abs() < 1e-6,
                "theta {}: {} vs {}",
                p.theta,
                p.contrast,
                expected
            );
        }
    }
}
