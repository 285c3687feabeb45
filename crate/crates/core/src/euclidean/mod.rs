//! Euclidean side: the rational test-function class, exact Dirac calculus
//! on it, weighted L2 integrals, Riesz-type kernels, and the inequality
//! verifiers for the flat counterparts of the sphere theorems.
//!
//! Fields are sums P(x) (1 + |x|^2)^{-s/2} with P a Cl_{n+1}-valued
//! polynomial in n variables: the class is closed under D, under the
//! conformal weights, and contains every Cayley pullback of a band-limited
//! spherical field.

mod kernels;
mod verify;

pub use kernels::{
    convolve_gk, dg_recursion_residual, kernel_constants, numeric_weighted_l2, riesz_kernel_eval,
    smooth_cutoff, ConvolutionValue, RieszKernel,
};
pub use verify::{
    euclid_side_kernel_ratio, euclid_theorem_name, euclidean_constant, euclidean_ratio,
    kernel_cross_check, route_equivalence, sphere_side_kernel_ratio, verify_euclidean_inequality,
    verify_kernel_inequality, EuclideanSource,
};

use crate::clifford::{gp, Multivector, Signature};
use crate::error::{Error, Result};
use crate::quad;
use rand::Rng;
use std::collections::BTreeMap;

/// Cl_{n+1}-valued polynomial in n real variables (not necessarily
/// homogeneous).
#[derive(Clone, Debug)]
pub struct Poly {
    nvars: usize,
    sig: Signature,
    terms: BTreeMap<Vec<u8>, Multivector>,
}

impl Poly {
    pub fn zero(nvars: usize, sig: Signature) -> Self {
        Poly {
            nvars,
            sig,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, sig: Signature, c: Multivector) -> Self {
        let mut p = Self::zero(nvars, sig);
        p.insert(vec![0; nvars], c);
        p
    }

    pub fn monomial(nvars: usize, sig: Signature, alpha: Vec<u8>, c: Multivector) -> Self {
        assert_eq!(alpha.len(), nvars);
        let mut p = Self::zero(nvars, sig);
        p.insert(alpha, c);
        p
    }

    /// The grade-1 polynomial x = sum_{j<=n} x_j e_j.
    pub fn vector_x(nvars: usize, sig: Signature) -> Self {
        let mut p = Self::zero(nvars, sig);
        for j in 0..nvars {
            let mut alpha = vec![0u8; nvars];
            alpha[j] = 1;
            p.insert(alpha, Multivector::basis_vector(sig, j));
        }
        p
    }

    /// 1 + |x|^2 as a scalar polynomial.
    pub fn one_plus_r2(nvars: usize, sig: Signature) -> Self {
        let mut p = Self::constant(nvars, sig, Multivector::one(sig));
        for j in 0..nvars {
            let mut alpha = vec![0u8; nvars];
            alpha[j] = 2;
            p.insert(alpha, Multivector::one(sig));
        }
        p
    }

    fn insert(&mut self, alpha: Vec<u8>, c: Multivector) {
        if c.is_zero(0.0) {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(old) => {
                *old = old.add(&c);
                if old.is_zero(0.0) {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|a| a.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn terms_iter(&self) -> impl Iterator<Item = (&Vec<u8>, &Multivector)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.insert(a.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.nvars, self.sig);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(s);
        }
        out
    }

    pub fn scale_mv_left(&self, m: &Multivector) -> Self {
        let mut out = Self::zero(self.nvars, self.sig);
        for (a, c) in &self.terms {
            out.insert(a.clone(), gp(m, c));
        }
        out
    }

    /// Product self * other, coefficients multiplied in that order.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars, self.sig);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let alpha: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.insert(alpha, gp(ca, cb));
            }
        }
        out
    }

    pub fn diff(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.sig);
        for (a, c) in &self.terms {
            if a[j] == 0 {
                continue;
            }
            let mut alpha = a.clone();
            alpha[j] -= 1;
            out.insert(alpha, c.scale(a[j] as f64));
        }
        out
    }

    /// Euclidean Dirac sum_{j<=n} e_j d/dx_j with left multiplication.
    pub fn dirac(&self) -> Self {
        let mut out = Self::zero(self.nvars, self.sig);
        for j in 0..self.nvars {
            let d = self.diff(j);
            out = out.add(&d.scale_mv_left(&Multivector::basis_vector(self.sig, j)));
        }
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> Multivector {
        assert_eq!(x.len(), self.nvars);
        let mut out = Multivector::zero(self.sig);
        for (alpha, c) in &self.terms {
            let mut mono = 1.0;
            for (xi, &ai) in x.iter().zip(alpha) {
                for _ in 0..ai {
                    mono *= xi;
                }
            }
            out.add_assign_scaled(c, mono);
        }
        out
    }
}

/// Sum of terms P(x) (1 + |x|^2)^{-s/2}; s may be negative for transported
/// fields, integrability is checked at integration time.
#[derive(Clone, Debug)]
pub struct RationalField {
    n: usize,
    sig: Signature,
    terms: Vec<(Poly, i32)>,
}

impl RationalField {
    pub fn new(n: usize) -> Result<Self> {
        let sig = Signature::new(n + 1)?;
        Ok(RationalField {
            n,
            sig,
            terms: Vec::new(),
        })
    }

    pub fn from_terms(n: usize, terms: Vec<(Poly, i32)>) -> Result<Self> {
        let mut f = Self::new(n)?;
        for (p, s) in terms {
            f.push(p, s);
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn terms(&self) -> &[(Poly, i32)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Inserts a term, merging with an existing equal power.
    pub fn push(&mut self, p: Poly, s: i32) {
        if p.is_zero() {
            return;
        }
        for (q, t) in &mut self.terms {
            if *t == s {
                *q = q.add(&p);
                if q.is_zero() {
                    let keep: Vec<(Poly, i32)> = self
                        .terms
                        .iter()
                        .filter(|(pp, _)| !pp.is_zero())
                        .cloned()
                        .collect();
                    self.terms = keep;
                }
                return;
            }
        }
        self.terms.push((p, s));
        self.terms.sort_by_key(|(_, s)| *s);
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (p, s) in &other.terms {
            out.push(p.clone(), *s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        if c == 0.0 {
            out.terms.clear();
            return out;
        }
        for (p, _) in &mut out.terms {
            *p = p.scale(c);
        }
        out
    }

    /// Left multiplication by a polynomial (conformal weights, x factors).
    pub fn mul_poly_left(&self, w: &Poly) -> Self {
        let mut out = Self {
            n: self.n,
            sig: self.sig,
            terms: Vec::new(),
        };
        for (p, s) in &self.terms {
            out.push(w.mul(p), *s);
        }
        out
    }

    /// Multiplies by (1 + |x|^2)^{delta/2} (shifts every power by -delta).
    pub fn shift_power(&self, delta: i32) -> Self {
        let mut out = self.clone();
        for (_, s) in &mut out.terms {
            *s -= delta;
        }
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> Multivector {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let mut out = Multivector::zero(self.sig);
        for (p, s) in &self.terms {
            let w = (1.0 + r2).powf(-(*s as f64) / 2.0);
            out.add_assign_scaled(&p.evaluate(x), w);
        }
        out
    }

    /// Growth degree at infinity. When all powers share a parity the terms
    /// are combined over the largest power first, so cancellations between
    /// terms (ubiquitous in Cayley pullbacks) are realized; otherwise the
    /// conservative per-term bound max(deg P - s) is used.
    pub fn decay_degree(&self) -> i64 {
        if self.terms.is_empty() {
            return i64::MIN / 2;
        }
        if let Some((num, s_max)) = self.combined_numerator() {
            return effective_degree(&num) - s_max;
        }
        self.terms
            .iter()
            .map(|(p, s)| p.degree() as i64 - *s as i64)
            .max()
            .unwrap_or(i64::MIN / 2)
    }

    /// Single-numerator form N(x) (1+r^2)^{-s_max/2}, available when all
    /// stored powers differ by even amounts.
    pub fn combined_numerator(&self) -> Option<(Poly, i64)> {
        let s_max = self.terms.iter().map(|(_, s)| *s).max()?;
        if self
            .terms
            .iter()
            .any(|(_, s)| (s_max - *s).rem_euclid(2) != 0)
        {
            return None;
        }
        let w = Poly::one_plus_r2(self.n, self.sig);
        let mut num = Poly::zero(self.n, self.sig);
        for (p, s) in &self.terms {
            let mut q = p.clone();
            for _ in 0..((s_max - *s) / 2) {
                q = w.mul(&q);
            }
            num = num.add(&q);
        }
        Some((num, s_max as i64))
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(p, _)| p.coeff_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Degree of the numerically significant part: monomials whose coefficient
/// norm falls below 1e-9 of the largest are treated as cancelled residue.
fn effective_degree(p: &Poly) -> i64 {
    let max_norm = p
        .terms
        .values()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    p.terms
        .iter()
        .filter(|(_, c)| c.norm() > 1e-9 * max_norm)
        .map(|(a, _)| a.iter().map(|&x| x as i64).sum())
        .max()
        .unwrap_or(0)
}

/// D [P (1+r^2)^{-s/2}] = (D P)(1+r^2)^{-s/2} - s (x P)(1+r^2)^{-(s+2)/2}.
pub fn d_apply_rational(f: &RationalField) -> RationalField {
    let x = Poly::vector_x(f.n, f.sig);
    let mut out = RationalField {
        n: f.n,
        sig: f.sig,
        terms: Vec::new(),
    };
    for (p, s) in &f.terms {
        out.push(p.dirac(), *s);
        if *s != 0 {
            out.push(x.mul(p).scale(-(*s as f64)), *s + 2);
        }
    }
    out
}

/// k-fold application of the exact Dirac operator.
pub fn d_power_apply(f: &RationalField, k: usize) -> RationalField {
    let mut out = f.clone();
    for _ in 0..k {
        out = d_apply_rational(&out);
    }
    out
}

/// Laplacian power for even k: Delta^{k/2} = (-1)^{k/2} D^k.
pub fn laplacian_power_apply(f: &RationalField, k: usize) -> RationalField {
    assert!(k % 2 == 0);
    let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    d_power_apply(f, k).scale(sign)
}

/// Quadrature grid for weighted integrals over R^n: tangent-substitution
/// radial rule crossed with an exact S^{n-1} rule.
pub struct EuclideanGrid {
    n: usize,
    radial: Vec<(f64, f64)>,
    angular: Vec<(Vec<f64>, f64)>,
}

impl EuclideanGrid {
    pub fn new(n: usize, radial_nodes: usize, angular_degree: usize) -> Result<Self> {
        let radial = quad::radial_tangent_rule(n, radial_nodes);
        let angular: Vec<(Vec<f64>, f64)> = if n == 1 {
            vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]
        } else {
            let rule = quad::quadrature_rule(n - 1, angular_degree)?;
            rule.nodes
                .iter()
                .cloned()
                .zip(rule.weights.iter().cloned())
                .collect()
        };
        Ok(EuclideanGrid { n, radial, angular })
    }

    /// Integrates a scalar function over R^n.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut x = vec![0.0; self.n];
        let mut acc = 0.0;
        for &(r, wr) in &self.radial {
            for (u, wu) in &self.angular {
                for (xi, ui) in x.iter_mut().zip(u) {
                    *xi = r * ui;
                }
                acc += wr * wu * f(&x);
            }
        }
        acc
    }
}

/// int |f(x)|^2 (1+|x|^2)^{weight} dx with a symbolic integrability check.
pub fn weighted_l2_squared(
    f: &RationalField,
    weight: i32,
    grid: &EuclideanGrid,
) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let exponent = 2 * f.decay_degree() + 2 * weight as i64 + f.n as i64;
    if exponent >= 0 {
        return Err(Error::NonIntegrable(exponent));
    }
    Ok(grid.integrate(|x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        f.evaluate(x).norm_squared() * (1.0 + r2).powi(weight)
    }))
}

pub fn weighted_l2(f: &RationalField, weight: i32, grid: &EuclideanGrid) -> Result<f64> {
    Ok(weighted_l2_squared(f, weight, grid)?.max(0.0).sqrt())
}

/// int Sc(conj(f) g) (1+|x|^2)^{weight} dx.
pub fn weighted_inner(
    f: &RationalField,
    g: &RationalField,
    weight: i32,
    grid: &EuclideanGrid,
) -> Result<f64> {
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let exponent = f.decay_degree() + g.decay_degree() + 2 * weight as i64 + f.n as i64;
    if exponent >= 0 {
        return Err(Error::NonIntegrable(exponent));
    }
    Ok(grid.integrate(|x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let fv = f.evaluate(x);
        let gv = g.evaluate(x);
        let dot: f64 = fv
            .coeffs()
            .iter()
            .zip(gv.coeffs())
            .map(|(a, b)| a * b)
            .sum();
        dot * (1.0 + r2).powi(weight)
    }))
}

/// Random rational field with decay strong enough for D^k and the
/// (1+r^2)^{+k} weight.
pub fn random_rational<R: Rng>(rng: &mut R, n: usize, k: usize) -> Result<RationalField> {
    let sig = Signature::new(n + 1)?;
    let deg = 2usize;
    let s = (deg + n + 2 * k + 2) as i32;
    let mut p = Poly::zero(n, sig);
    let mut alpha = vec![0u8; n];
    fill_random_poly(rng, sig, &mut p, &mut alpha, 0, deg);
    RationalField::from_terms(n, vec![(p, s)])
}

fn fill_random_poly<R: Rng>(
    rng: &mut R,
    sig: Signature,
    p: &mut Poly,
    alpha: &mut Vec<u8>,
    var: usize,
    left: usize,
) {
    if var == alpha.len() {
        let mut c = Multivector::zero(sig);
        for mask in 0..sig.blades() {
            c.set_coeff(mask, rng.gen_range(-1.0..=1.0));
        }
        p.insert(alpha.clone(), c);
        return;
    }
    for take in 0..=left {
        alpha[var] = take as u8;
        fill_random_poly(rng, sig, p, alpha, var + 1, left - take);
        alpha[var] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(n: usize) -> Signature {
        Signature::new(n).unwrap()
    }

    #[test]
    fn d_on_pure_weight() {
        // f = (1+r^2)^{-1/2}: D f = -x (1+r^2)^{-3/2}.
        let n = 3;
        let s3 = sig(4);
        let f = RationalField::from_terms(
            n,
            vec![(Poly::constant(n, s3, Multivector::one(s3)), 1)],
        )
        .unwrap();
        let df = d_apply_rational(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
            let got = df.evaluate(&x);
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let scale = -(1.0 + r2).powf(-1.5);
            let expect =
                Multivector::vector(s3, &x.iter().map(|v| v * scale).collect::<Vec<_>>());
            assert!(got.sub(&expect).norm() <= 1e-12 * expect.norm().max(1e-6));
        }
    }

    #[test]
    fn d_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for n in 2..=3usize {
            let f = random_rational(&mut rng, n, 1).unwrap();
            let df = d_apply_rational(&f);
            let s = f.signature();
            let h = 1e-5;
            for _ in 0..20 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..=1.5)).collect();
                let mut fd = Multivector::zero(s);
                for j in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let d = f.evaluate(&xp).sub(&f.evaluate(&xm)).scale(1.0 / (2.0 * h));
                    fd = fd.add(&gp(&Multivector::basis_vector(s, j), &d));
                }
                let exact = df.evaluate(&x);
                assert!(
                    exact.sub(&fd).norm() <= 1e-5 * exact.norm().max(1.0),
                    "n={n} x={x:?}"
                );
            }
        }
    }

    #[test]
    fn polynomial_only_reduces_to_polyspace_dirac() {
        // With s = 0 on homogeneous input restricted to the flat variables,
        // the rational D agrees with the polyspace Dirac (same generators,
        // the ambient one unused).
        use crate::polyspace;
        let n = 2usize;
        let s3 = sig(n + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        // random homogeneous degree-2 polynomial in the flat variables
        let mut p = Poly::zero(n, s3);
        for alpha in polyspace::monomials(n, 2) {
            let mut c = Multivector::zero(s3);
            for mask in 0..s3.blades() {
                c.set_coeff(mask, rng.gen_range(-1.0..=1.0));
            }
            p.insert(alpha.clone(), c);
        }
        let f = RationalField::from_terms(n, vec![(p.clone(), 0)]).unwrap();
        let df = d_apply_rational(&f);

        // Mirror in polyspace over N = n+1 variables with the last unused.
        let mut p_amb = polyspace::MvPolynomial::zero(s3, 2);
        for (alpha, c) in p.terms.iter() {
            let mut a = alpha.clone();
            a.push(0);
            p_amb = p_amb.add(&polyspace::MvPolynomial::monomial(s3, a, c.clone()));
        }
        // The polyspace Dirac includes e_{n+1} d/dx_{n+1}, which vanishes here.
        let dp = polyspace::dirac_apply(&p_amb);
        for _ in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mut xa = x.clone();
            xa.push(0.0);
            let got = df.evaluate(&x);
            let expect = dp.evaluate(&xa);
            assert!(got.sub(&expect).norm() <= 1e-13 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn d_squared_is_minus_laplacian_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let n = 2usize;
        let f = random_rational(&mut rng, n, 2).unwrap();
        let ddf = d_power_apply(&f, 2);
        let h = 1e-4;
        for _ in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            // FD Laplacian componentwise
            let mut lap = f.evaluate(&x).scale(-2.0 * n as f64);
            for j in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                lap = lap.add(&f.evaluate(&xp)).add(&f.evaluate(&xm));
            }
            let lap = lap.scale(1.0 / (h * h));
            let got = ddf.evaluate(&x);
            assert!(
                got.add(&lap).norm() <= 1e-5 * got.norm().max(1.0),
                "x={x:?} res={}",
                got.add(&lap).norm()
            );
        }
    }

    #[test]
    fn class_closure_structural() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..100 {
            let n = rng.gen_range(2..=3);
            let f = random_rational(&mut rng, n, 1).unwrap();
            let df = d_apply_rational(&f);
            // every term re-parses: powers shifted by 0 or 2, degrees track
            for (p, s) in df.terms() {
                assert!(!p.is_zero());
                assert!(*s >= 0);
            }
            // D of the class stays evaluable and finite
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            assert!(df.evaluate(&x).is_finite());
        }
    }

    #[test]
    fn weighted_l2_examples() {
        // f = (1+r^2)^{-n/2} with n=2, weight 0: integral pi.
        let n = 2;
        let s3 = sig(3);
        let f = RationalField::from_terms(
            n,
            vec![(Poly::constant(n, s3, Multivector::one(s3)), 2)],
        )
        .unwrap();
        let grid = EuclideanGrid::new(n, 80, 8).unwrap();
        let v = weighted_l2_squared(&f, 0, &grid).unwrap();
        assert!((v - std::f64::consts::PI).abs() <= 1e-10);

        // zero field
        let z = RationalField::new(n).unwrap();
        assert_eq!(weighted_l2(&z, 3, &grid).unwrap(), 0.0);

        // non-integrable combination errors with the offending exponent
        let g = RationalField::from_terms(
            n,
            vec![(Poly::constant(n, s3, Multivector::one(s3)), 1)],
        )
        .unwrap();
        match weighted_l2_squared(&g, 2, &grid) {
            Err(Error::NonIntegrable(e)) => assert!(e >= 0),
            other => panic!("expected non-integrable error, got {other:?}"),
        }
    }
}
