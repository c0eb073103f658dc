//! Gauss-Hermite quadrature nodes and weights for weight `e^{-x^2}` on the
//! real line, computed by Newton iteration on the orthonormal Hermite
//! recurrence with the usual asymptotic starting guesses.

use alloc::vec::Vec;
#[allow(unused_imports)] // f64 math comes from the Float trait in no_std builds
use num_traits::Float;

use crate::error::Error;
use crate::Result;

/// Nodes and weights such that `integral e^{-x^2} f(x) dx ~ sum w_i f(x_i)`,
/// exact for polynomials up to degree `2n - 1`. Nodes come out in ascending
/// order.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 256 {
        return Err(Error::InvalidArgument(alloc::format!(
            "gauss_hermite supports 1..=256 nodes, got {n}"
        )));
    }
    let mut nodes = alloc::vec![0.0f64; n];
    let mut weights = alloc::vec![0.0f64; n];

    let pim4 = 0.751_125_544_464_943; // pi^{-1/4}
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;

    for i in 0..m {
        // Starting guesses for the roots, largest first.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };

        let mut pp = 0.0;
        for _ in 0..100 {
            // Orthonormal Hermite recurrence.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }

        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        let w = 2.0 / (pp * pp);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn moments_match_gaussian_integrals() {
        for n in [1usize, 2, 5, 16, 24, 48, 64] {
            let (x, w) = gauss_hermite(n).unwrap();
            let m0: f64 = w.iter().sum();
            assert!((m0 - PI.sqrt()).abs() < 1e-12, "n = {n}: m0 = {m0}");
            if n >= 2 {
                let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
                assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12, "n = {n}");
            }
            if n >= 3 {
                let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
                assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-11, "n = {n}");
            }
        }
    }

    #[test]
    fn oscillatory_integrand() {
        // integral e^{-x^2} cos(x) dx = sqrt(pi) e^{-1/4}
        let (x, w) = gauss_hermite(24).unwrap();
        let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        let exact = PI.sqrt() * (-0.25f64).exp();
        assert!((val - exact).abs() < 1e-13);
    }

    #[test]
    fn nodes_ascend_and_pair_symmetrically() {
        let (x, _) = gauss_hermite(25).unwrap();
        for i in 1..x.len() {
            assert!(x[i] > x[i - 1]);
        }
        for i in 0..x.len() {
            assert!((x[i] + x[x.len() - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(gauss_hermite(0).is_err());
        assert!(gauss_hermite(257).is_err());
    }
}
