//! Riesz-type kernels G_k with constants fixed by the recursion
//! D G_k = G_{k-1}, C_1 = 1, and the singular convolution used by the
//! kernel-inequality checks.

use super::{EuclideanGrid, RationalField};
use crate::clifford::{gp, Multivector, Signature};
use crate::error::{Error, Result};
use crate::quad::{self, omega};

/// Parity-dispatched kernel: odd k is the vector form
/// (C_k/omega_n)(x-y)/|x-y|^{n+1-k}, even k the scalar form
/// (C_k/omega_n)/|x-y|^{n-k}.
#[derive(Debug, Clone, Copy)]
pub struct RieszKernel {
    pub n: usize,
    pub k: usize,
    pub constant: f64,
}

/// Constants C_1..C_{k_max} from applying D symbolically to the parity
/// forms: the odd step D(x f(r)) = -n f - r f' gives C_{k-1} = -(k-1) C_k,
/// the even step D f(r) = f'(r) x / r gives C_{k-1} = (k-n) C_k.
pub fn kernel_constants(n: usize, k_max: usize) -> Result<Vec<f64>> {
    if n % 2 == 0 && k_max >= n {
        return Err(Error::KernelDegenerate { n, k: n });
    }
    let mut out = vec![1.0f64];
    for k in 2..=k_max {
        let prev = out[k - 2];
        let c = if k % 2 == 0 {
            // C_{k-1} = (k-n) C_k
            let denom = k as f64 - n as f64;
            if denom == 0.0 {
                return Err(Error::KernelDegenerate { n, k });
            }
            prev / denom
        } else {
            // C_{k-1} = -(k-1) C_k
            -prev / (k as f64 - 1.0)
        };
        out.push(c);
    }
    Ok(out)
}

impl RieszKernel {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        let constants = kernel_constants(n, k)?;
        Ok(RieszKernel {
            n,
            k,
            constant: constants[k - 1],
        })
    }

    /// G_k(x - y) as a Cl_{n+1} value.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Multivector> {
        let sig = Signature::new(self.n + 1)?;
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let r = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < 1e-14 {
            return Err(Error::CoincidentPoints);
        }
        let c = self.constant / omega(self.n);
        if self.k % 2 == 1 {
            let scale = c * r.powi(self.k as i32 - self.n as i32 - 1);
            let comps: Vec<f64> = diff.iter().map(|d| d * scale).collect();
            Ok(Multivector::vector(sig, &comps))
        } else {
            Ok(Multivector::scalar(
                sig,
                c * r.powi(self.k as i32 - self.n as i32),
            ))
        }
    }
}

/// Convenience: evaluates G_k(x - y) building the kernel on the fly.
pub fn riesz_kernel_eval(n: usize, k: usize, x: &[f64], y: &[f64]) -> Result<Multivector> {
    RieszKernel::new(n, k)?.evaluate(x, y)
}

/// Finite-difference residual of D G_k = G_{k-1} at one point pair,
/// relative to |G_{k-1}|.
pub fn dg_recursion_residual(n: usize, k: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    assert!(k > 1);
    let sig = Signature::new(n + 1)?;
    let gk = RieszKernel::new(n, k)?;
    let gk1 = RieszKernel::new(n, k - 1)?;
    let h = 1e-5;
    let mut d = Multivector::zero(sig);
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let diff = gk
            .evaluate(&xp, y)?
            .sub(&gk.evaluate(&xm, y)?)
            .scale(1.0 / (2.0 * h));
        d = d.add(&gp(&Multivector::basis_vector(sig, j), &diff));
    }
    let target = gk1.evaluate(x, y)?;
    Ok(d.sub(&target).norm() / target.norm().max(1e-300))
}

/// C^2 bump: 1 on [0, R/2], 0 beyond R, quintic smoothstep between.
pub fn smooth_cutoff(r: f64, radius: f64) -> f64 {
    if r <= radius / 2.0 {
        1.0
    } else if r >= radius {
        0.0
    } else {
        let t = (r - radius / 2.0) / (radius / 2.0);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Result of a singular convolution with a shell-refinement error estimate.
#[derive(Debug, Clone)]
pub struct ConvolutionValue {
    pub value: Multivector,
    pub error_estimate: f64,
}

/// (G_k star h)(y) = int G_k(x - y) h(x) chi_R(|x|) dx by radial-shell
/// quadrature centered at y: shells graded geometrically toward the
/// singularity, Gauss-Legendre per shell. The rational weights of h are not
/// polynomial in the angular variable, so both the radial node count and
/// the angular resolution are refined across the three levels; the error
/// estimate is the difference between the last two (Richardson style).
pub fn convolve_gk(
    h: &RationalField,
    k: usize,
    y: &[f64],
    cutoff_radius: f64,
    base_radial: usize,
) -> Result<ConvolutionValue> {
    let n = h.n();
    if n % 2 == 0 && k >= n {
        return Err(Error::KernelDegenerate { n, k });
    }
    let kernel = RieszKernel::new(n, k)?;
    let max_deg = h
        .terms()
        .iter()
        .map(|(p, _)| p.degree())
        .max()
        .unwrap_or(0);
    let levels: Vec<Multivector> = (0..3)
        .map(|lvl| {
            convolve_level(
                h,
                &kernel,
                y,
                cutoff_radius,
                base_radial << lvl,
                max_deg + 10 + 10 * lvl,
            )
        })
        .collect::<Result<_>>()?;
    let err2 = levels[2].sub(&levels[1]).norm();
    Ok(ConvolutionValue {
        value: levels[2].clone(),
        error_estimate: err2,
    })
}

fn angular_rule(n: usize, degree: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match n {
        1 => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        2 => {
            // circle rule built directly: no exactness cap needed
            let m = 2 * (degree / 2 + 1);
            let w = 2.0 * std::f64::consts::PI / m as f64;
            Ok((0..m)
                .map(|j| {
                    let phi = 2.0 * std::f64::consts::PI * (j as f64) / (m as f64);
                    (vec![phi.cos(), phi.sin()], w)
                })
                .collect())
        }
        _ => {
            let rule = quad::quadrature_rule(n - 1, degree.min(quad::MAX_EXACTNESS))?;
            Ok(rule
                .nodes
                .iter()
                .cloned()
                .zip(rule.weights.iter().cloned())
                .collect())
        }
    }
}

fn convolve_level(
    h: &RationalField,
    kernel: &RieszKernel,
    y: &[f64],
    cutoff_radius: f64,
    radial_nodes: usize,
    angular_degree: usize,
) -> Result<Multivector> {
    let n = h.n();
    let sig = h.signature();
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let outer = cutoff_radius + ynorm + 1.0;

    // Geometric shells toward the singularity at rho = 0.
    let n_shells = 14usize;
    let mut edges = Vec::with_capacity(n_shells + 1);
    edges.push(0.0);
    for j in (0..n_shells).rev() {
        edges.push(outer * 0.5f64.powi(j as i32));
    }

    let angular = angular_rule(n, angular_degree)?;
    let gl = quad::gauss_legendre(radial_nodes.max(2));

    let mut acc = Multivector::zero(sig);
    let mut x = vec![0.0; n];
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = (b - a) / 2.0;
        let mid = (a + b) / 2.0;
        for &(t, wt) in &gl {
            let rho = mid + half * t;
            if rho <= 0.0 {
                continue;
            }
            let meas = wt * half * rho.powi(n as i32 - 1);
            for (u, wu) in &angular {
                for ((xi, ui), yi) in x.iter_mut().zip(u).zip(y) {
                    *xi = yi + rho * ui;
                }
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let chi = smooth_cutoff(r, cutoff_radius);
                if chi == 0.0 {
                    continue;
                }
                let g = kernel.evaluate(&x, y)?;
                let hv = h.evaluate(&x);
                acc.add_assign_scaled(&gp(&g, &hv), meas * wu * chi);
            }
        }
    }
    Ok(acc)
}

/// Numeric weighted L2 norm of an arbitrary field closure (used for
/// cutoff-multiplied fields that leave the rational class).
pub fn numeric_weighted_l2<F: Fn(&[f64]) -> Multivector>(
    f: F,
    weight: i32,
    grid: &EuclideanGrid,
) -> f64 {
    grid.integrate(|x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        f(x).norm_squared() * (1.0 + r2).powi(weight)
    })
    .max(0.0)
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::{random_rational, Poly};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constants_c1_and_c2() {
        let c = kernel_constants(3, 4).unwrap();
        assert_eq!(c[0], 1.0);
        // n=3: even step k=2: C_2 = C_1/(2-3) = -1.
        assert_eq!(c[1], -1.0);
        // k=3: odd step: C_3 = -C_2/2 = 1/2.
        assert_eq!(c[2], 0.5);
    }

    #[test]
    fn degenerate_even_dimension() {
        match kernel_constants(4, 4) {
            Err(Error::KernelDegenerate { n: 4, k: 4 }) => {}
            other => panic!("expected degenerate kernel, got {other:?}"),
        }
        assert!(kernel_constants(4, 3).is_ok());
        match kernel_constants(2, 2) {
            Err(Error::KernelDegenerate { n: 2, .. }) => {}
            other => panic!("expected degenerate kernel, got {other:?}"),
        }
    }

    #[test]
    fn recursion_certified_by_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for n in 2..=5usize {
            let k_max = if n % 2 == 0 { n - 1 } else { 5 };
            for k in 2..=k_max {
                for _ in 0..25 {
                    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                    let x: Vec<f64> = (0..n)
                        .map(|i| y[i] + rng.gen_range(0.5..=2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                        .collect();
                    let res = dg_recursion_residual(n, k, &x, &y).unwrap();
                    assert!(res <= 1e-6, "n={n} k={k} res={res:.2e}");
                }
            }
        }
    }

    #[test]
    fn convolution_trivia() {
        let n = 2usize;
        let z = RationalField::new(n).unwrap();
        let v = convolve_gk(&z, 1, &[0.2, 0.1], 20.0, 8).unwrap();
        assert!(v.value.norm() == 0.0);

        let sig = Signature::new(n + 1).unwrap();
        let h = RationalField::from_terms(
            n,
            vec![(Poly::constant(n, sig, Multivector::one(sig)), 8)],
        )
        .unwrap();
        let y = vec![0.3, -0.2];
        let a = convolve_gk(&h, 1, &y, 20.0, 8).unwrap();
        let b = convolve_gk(&h.scale(3.0), 1, &y, 20.0, 8).unwrap();
        assert!(b.value.sub(&a.value.scale(3.0)).norm() <= 1e-10 * a.value.norm());
    }

    #[test]
    fn convolution_inverts_dirac() {
        // G_k star (D^k h) = (-1)^{k-1} h for decaying h: the recursion
        // D G_k = G_{k-1} bottoms out at G_1 star (D h) = +h under the
        // e_j^2 = -1 signature.
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let n = 2usize;
        let h = random_rational(&mut rng, n, 1).unwrap();
        let dh = super::super::d_apply_rational(&h);
        let y = vec![0.4, -0.3];
        let conv = convolve_gk(&dh, 1, &y, 60.0, 16).unwrap();
        let expect = h.evaluate(&y);
        let err = conv.value.sub(&expect).norm() / expect.norm();
        assert!(
            err <= 2e-3,
            "relative error {err:.2e}, estimate {:.2e}",
            conv.error_estimate
        );

        // Even case on R^3 where G_2 exists: expect the minus sign.
        let n = 3usize;
        let h = random_rational(&mut rng, n, 2).unwrap();
        let ddh = super::super::d_power_apply(&h, 2);
        let y = vec![0.2, 0.4, -0.1];
        let conv = convolve_gk(&ddh, 2, &y, 60.0, 12).unwrap();
        let expect = h.evaluate(&y).scale(-1.0);
        let err = conv.value.sub(&expect).norm() / expect.norm();
        assert!(err <= 2e-3, "k=2 relative error {err:.2e}");
    }
}
