//! Quadrature on S^n and helpers for exact sphere integrals.
//!
//! The S^n rule is a product rule: for each polar level the measure factor
//! sin^{n-i}(theta) becomes the Gegenbauer weight (1-t^2)^{lambda} in
//! t = cos(theta), handled by a Gauss-Jacobi rule so polynomial exactness
//! holds for every n; the innermost circle uses a uniform (trapezoid) rule.
//! Node sets are antipodally symmetric, so odd monomials cancel to rounding.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Gamma function at half-integer arguments 2z = `twice`, computed by the
/// recursion from Gamma(1/2) = sqrt(pi) and Gamma(1) = 1.
pub fn gamma_half(twice: usize) -> f64 {
    assert!(twice >= 1);
    if twice == 1 {
        return std::f64::consts::PI.sqrt();
    }
    if twice == 2 {
        return 1.0;
    }
    (twice as f64 / 2.0 - 1.0) * gamma_half(twice - 2)
}

/// Surface area of S^n (the unit sphere in R^{n+1}).
pub fn sphere_area(n: usize) -> f64 {
    let np1 = n + 1;
    2.0 * std::f64::consts::PI.powf(np1 as f64 / 2.0) / gamma_half(np1)
}

/// omega_n: surface area of the unit sphere in R^n, 2 pi^{n/2} / Gamma(n/2).
pub fn omega(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Exact integral of the monomial w^beta over S^n in R^{n+1}:
/// zero unless all exponents are even, otherwise
/// 2 prod Gamma((beta_i+1)/2) / Gamma((|beta| + n + 1)/2).
pub fn monomial_integral(n: usize, beta: &[usize]) -> f64 {
    assert_eq!(beta.len(), n + 1);
    if beta.iter().any(|b| b % 2 == 1) {
        return 0.0;
    }
    let total: usize = beta.iter().sum();
    let mut num = 2.0;
    for &b in beta {
        num *= gamma_half(b + 1);
    }
    num / gamma_half(total + n + 1)
}

/// Gauss-Jacobi nodes and weights on [-1, 1] for the weight (1-t^2)^lambda,
/// computed by the Golub-Welsch eigenvalue method. `q` nodes integrate
/// polynomials up to degree 2q - 1 exactly against the weight.
pub fn gauss_gegenbauer(q: usize, lambda: f64) -> Vec<(f64, f64)> {
    assert!(q >= 1);
    // mu0 = int (1-t^2)^lambda dt = sqrt(pi) Gamma(lambda+1) / Gamma(lambda+3/2)
    let mu0 = std::f64::consts::PI.sqrt() * gamma_f(lambda + 1.0) / gamma_f(lambda + 1.5);
    if q == 1 {
        return vec![(0.0, mu0)];
    }
    // Monic three-term recurrence: a_k = 0 by symmetry,
    // b_k = k (k + 2 lambda) / ((2k + 2 lambda - 1)(2k + 2 lambda + 1)).
    let mut jac = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let kf = k as f64;
        let b = kf * (kf + 2.0 * lambda)
            / ((2.0 * kf + 2.0 * lambda - 1.0) * (2.0 * kf + 2.0 * lambda + 1.0));
        let off = b.sqrt();
        jac[(k - 1, k)] = off;
        jac[(k, k - 1)] = off;
    }
    let eig = jac.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = mu0 * eig.eigenvectors[(0, i)].powi(2);
            (node, w)
        })
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Symmetrize nodes and weights across 0 to restore the exact +/- pairing
    // blurred by the eigensolver.
    let m = out.len();
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let node = 0.5 * (out[j].0 - out[i].0);
        let w = 0.5 * (out[i].1 + out[j].1);
        out[i] = (-node, w);
        out[j] = (node, w);
    }
    if m % 2 == 1 {
        out[m / 2].0 = 0.0;
    }
    out
}

/// Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(q: usize) -> Vec<(f64, f64)> {
    gauss_gegenbauer(q, 0.0)
}

// Lanczos approximation, only used for mu0 above (arguments are small
// half-integers, where this is accurate to ~1e-15).
fn gamma_f(x: f64) -> f64 {
    // For our uses x is a positive half-integer; route through the exact
    // recursion when it is.
    let twice = (2.0 * x).round();
    if (2.0 * x - twice).abs() < 1e-12 && twice >= 1.0 {
        return gamma_half(twice as usize);
    }
    unreachable!("gamma_f is only called on half-integer arguments")
}

/// Product quadrature rule on S^n.
pub struct QuadratureRule {
    pub n: usize,
    pub d_exact: usize,
    /// Unit vectors in R^{n+1}.
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub const MAX_EXACTNESS: usize = 40;

/// Builds the S^n product rule with polynomial exactness >= d_exact.
pub fn quadrature_rule(n: usize, d_exact: usize) -> Result<QuadratureRule> {
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedSphere(n));
    }
    if d_exact > MAX_EXACTNESS {
        return Err(Error::ExactnessTooHigh {
            requested: d_exact,
            cap: MAX_EXACTNESS,
        });
    }
    let (nodes, weights) = build_sphere_rule(n, d_exact);
    Ok(QuadratureRule {
        n,
        d_exact,
        nodes,
        weights,
    })
}

fn build_sphere_rule(n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 1 {
        // Even node count keeps the set antipodally symmetric.
        let m = 2 * (d / 2 + 1);
        let w = 2.0 * std::f64::consts::PI / m as f64;
        let nodes = (0..m)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * (j as f64) / (m as f64);
                vec![phi.cos(), phi.sin()]
            })
            .collect();
        return (nodes, vec![w; m]);
    }
    let (sub_nodes, sub_weights) = build_sphere_rule(n - 1, d);
    let lambda = (n as f64 - 2.0) / 2.0;
    let q = d / 2 + 1;
    let polar = gauss_gegenbauer(q, lambda);
    let mut nodes = Vec::with_capacity(polar.len() * sub_nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for &(t, wt) in &polar {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (u, &wu) in sub_nodes.iter().zip(&sub_weights) {
            let mut w = Vec::with_capacity(n + 1);
            for &ui in u {
                w.push(s * ui);
            }
            w.push(t);
            nodes.push(w);
            weights.push(wt * wu);
        }
    }
    (nodes, weights)
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrates a scalar function over the sphere.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }
}

/// Radial rule for integrals over R^n via r = tan(theta):
/// int_0^inf g(r) r^{n-1} dr = sum w_i g(r_i), with the volume factor
/// folded into the weights.
pub fn radial_tangent_rule(n: usize, count: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(count);
    gl.iter()
        .map(|&(t, w)| {
            // map [-1,1] -> (0, pi/2)
            let theta = (t + 1.0) * std::f64::consts::FRAC_PI_4;
            let jac = std::f64::consts::FRAC_PI_4;
            let r = theta.tan();
            let sec2 = 1.0 + r * r;
            (r, w * jac * sec2 * r.powi(n as i32 - 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(3) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0); // Gamma(4) = 3!
    }

    #[test]
    fn areas() {
        let pi = std::f64::consts::PI;
        assert!((sphere_area(1) - 2.0 * pi).abs() < 1e-12);
        assert!((sphere_area(2) - 4.0 * pi).abs() < 1e-12);
        assert!((sphere_area(3) - 2.0 * pi * pi).abs() < 1e-12);
        assert!((omega(2) - 2.0 * pi).abs() < 1e-12);
        assert!((omega(3) - 4.0 * pi).abs() < 1e-12);
    }

    #[test]
    fn weight_sums_match_areas() {
        for n in 1..=4 {
            for d in [4, 9, 16] {
                let rule = quadrature_rule(n, d).unwrap();
                let rel = (rule.weight_sum() - sphere_area(n)).abs() / sphere_area(n);
                assert!(rel < 1e-12, "n={n} d={d} rel={rel:.2e}");
            }
        }
    }

    #[test]
    fn second_moment_on_s2() {
        let rule = quadrature_rule(2, 6).unwrap();
        let val = rule.integrate(|w| w[0] * w[0]);
        let expect = 4.0 * std::f64::consts::PI / 3.0;
        assert!((val - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn monomial_exactness() {
        // Every monomial up to the declared exactness degree integrates to
        // the closed form, across all supported sphere dimensions.
        for n in 1..=4usize {
            let d = 8;
            let rule = quadrature_rule(n, d).unwrap();
            let scale = sphere_area(n);
            let mut beta = vec![0usize; n + 1];
            check_all(&rule, &mut beta, 0, d, scale);
        }
    }

    fn check_all(rule: &QuadratureRule, beta: &mut Vec<usize>, var: usize, left: usize, scale: f64) {
        if var == beta.len() {
            let exact = monomial_integral(rule.n, beta);
            let got = rule.integrate(|w| {
                w.iter()
                    .zip(beta.iter())
                    .map(|(x, &b)| x.powi(b as i32))
                    .product()
            });
            assert!(
                (got - exact).abs() <= 1e-12 * scale,
                "n={} beta={:?} got={} exact={}",
                rule.n,
                beta,
                got,
                exact
            );
            return;
        }
        for b in 0..=left {
            beta[var] = b;
            check_all(rule, beta, var + 1, left - b, scale);
            beta[var] = 0;
        }
    }

    #[test]
    fn unsupported_dimensions_error() {
        assert!(quadrature_rule(5, 4).is_err());
        assert!(quadrature_rule(2, 80).is_err());
    }

    #[test]
    fn radial_rule_integrates_rational_decay() {
        // int_{R^2} (1+r^2)^{-2} dx = pi
        let rule = radial_tangent_rule(2, 60);
        let val: f64 = rule
            .iter()
            .map(|&(r, w)| w / (1.0 + r * r).powi(2))
            .sum::<f64>()
            * 2.0
            * std::f64::consts::PI;
        assert!((val - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_degree() {
        let gl = gauss_legendre(6);
        // exact for degree 11: check x^10 -> 2/11
        let v: f64 = gl.iter().map(|&(t, w)| w * t.powi(10)).sum();
        assert!((v - 2.0 / 11.0).abs() < 1e-13);
    }
}
