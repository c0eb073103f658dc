//! Wigner quasi-probability maps of the motional state (spin traced out).
//!
//! Coordinates follow the textbook quadrature convention
//! `alpha = (x + i p) / sqrt(2)`, so the vacuum peaks at `W(0,0) = 1/pi` and
//! the map integrates to one over `dx dp`. For a superposition of coherent
//! states the Wigner function is an exact finite sum of Gaussians and
//! interference fringes, evaluated here in closed form per grid cell.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math comes from the Float trait in no_std builds
use num_traits::Float;

use crate::error::Error;
use crate::phase::{SpinLabel, SpinMotionState};
use crate::Result;

/// Requested grid: inclusive ranges, `nx x np` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl WignerSpec {
    /// Square grid covering every coherent component of a state with
    /// `margin` quadrature units to spare.
    pub fn covering(psi: &SpinMotionState, margin: f64, n: usize) -> Self {
        let mut extent = 0.0f64;
        for t in psi.terms() {
            let a = t.label.alpha();
            extent = extent.max((a.re.abs().max(a.im.abs())) * 2.0f64.sqrt());
        }
        let half = extent + margin;
        WignerSpec {
            x_min: -half,
            x_max: half,
            p_min: -half,
            p_max: half,
            nx: n,
            np: n,
        }
    }
}

/// Sampled Wigner map; `values[ip * nx + ix]` is `W(x[ix], p[ip])`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.x.len() + ix]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Riemann sum times cell area; one for a well-covered state.
    pub fn total_mass(&self) -> f64 {
        let dx = if self.x.len() > 1 {
            self.x[1] - self.x[0]
        } else {
            0.0
        };
        let dp = if self.p.len() > 1 {
            self.p[1] - self.p[0]
        } else {
            0.0
        };
        self.values.iter().sum::<f64>() * dx * dp
    }

    /// Position marginal `integral W dp`, one value per `x` node.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = if self.p.len() > 1 {
            self.p[1] - self.p[0]
        } else {
            0.0
        };
        let nx = self.x.len();
        let mut out = alloc::vec![0.0; nx];
        for ip in 0..self.p.len() {
            for (ix, slot) in out.iter_mut().enumerate() {
                *slot += self.values[ip * nx + ix] * dp;
            }
        }
        out
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Evaluate the Wigner function of the motional state on a grid.
///
/// Spin is traced out: only same-spin term pairs interfere. The result is
/// normalized by `<psi|psi>`, so the grid integrates to one whenever it
/// covers the state.
pub fn wigner(psi: &SpinMotionState, spec: &WignerSpec) -> Result<WignerGrid> {
    if spec.nx < 2 || spec.np < 2 {
        return Err(Error::InvalidArgument(
            "wigner grid needs at least 2 nodes per axis".to_string(),
        ));
    }
    if spec.x_max <= spec.x_min
        || spec.p_max <= spec.p_min
        || !spec.x_min.is_finite()
        || !spec.x_max.is_finite()
        || !spec.p_min.is_finite()
        || !spec.p_max.is_finite()
    {
        return Err(Error::InvalidArgument(
            "wigner grid ranges must be increasing".to_string(),
        ));
    }
    let total = psi.inner(psi).re;
    if total <= 0.0 {
        return Err(Error::ZeroNormState);
    }

    // Precompute the pair data: coefficient and the two labels.
    struct Pair {
        coeff: Complex64,
        bra: Complex64,
        ket: Complex64,
    }
    let mut pairs = Vec::new();
    for bra in psi.terms() {
        for ket in psi.terms() {
            if bra.spin != ket.spin {
                continue;
            }
            let aj = bra.label.alpha();
            let ak = ket.label.alpha();
            // exp(conj(aj) ak - |aj|^2/2 - |ak|^2/2) folded into the
            // coefficient.
            let k = aj.conj() * ak - Complex64::new(0.5 * (aj.norm_sqr() + ak.norm_sqr()), 0.0);
            pairs.push(Pair {
                coeff: bra.amp.conj() * ket.amp * k.exp(),
                bra: aj,
                ket: ak,
            });
        }
    }

    let xs = linspace(spec.x_min, spec.x_max, spec.nx);
    let ps = linspace(spec.p_min, spec.p_max, spec.np);
    let norm = 1.0 / (core::f64::consts::PI * total);
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;

    let mut values = alloc::vec![0.0f64; spec.nx * spec.np];
    for (ip, &p) in ps.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            let z = Complex64::new(x * inv_sqrt2, p * inv_sqrt2);
            let mut acc = Complex64::new(0.0, 0.0);
            for pair in &pairs {
                let e = 2.0 * (pair.bra.conj() - z.conj()) * (z - pair.ket);
                acc += pair.coeff * e.exp();
            }
            values[ip * spec.nx + ix] = norm * acc.re;
        }
    }
    Ok(WignerGrid {
        x: xs,
        p: ps,
        values,
    })
}

/// Position density `|<x|psi>|^2 / <psi|psi>` in the same units as the
/// Wigner grid, for checking the `p`-marginal.
pub fn position_density(psi: &SpinMotionState, x: f64) -> Result<f64> {
    let total = psi.inner(psi).re;
    if total <= 0.0 {
        return Err(Error::ZeroNormState);
    }
    let quarter = core::f64::consts::PI.powf(-0.25);
    let mut density = 0.0;
    for spin in [SpinLabel::Up, SpinLabel::Down] {
        let mut amp = Complex64::new(0.0, 0.0);
        for t in psi.spin_component(spin).terms() {
            let a = t.label.alpha();
            // <x|alpha> = pi^{-1/4} exp(-x^2/2 + sqrt(2) alpha x
            //                            - alpha^2/2 - |alpha|^2/2)
            let e = Complex64::new(-0.5 * x * x, 0.0) + 2.0f64.sqrt() * a * x
                - 0.5 * a * a
                - Complex64::new(0.5 * a.norm_sqr(), 0.0);
            amp += t.amp * quarter * e.exp();
        }
        density += amp.norm_sqr();
    }
    Ok(density / total)
}
