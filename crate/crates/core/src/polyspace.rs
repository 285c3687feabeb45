//! Exact calculus on homogeneous Cl_N-valued polynomials on R^N.
//!
//! Hosts the Dirac operator D = sum_j e_j d/dx_j, the Euler operator,
//! Gamma = x D + E (so monogenics of degree m have eigenvalue +m), the
//! Laplacian, harmonic/monogenic subspace construction by null-space
//! extraction, the splitting h = p + x q of harmonics into monogenics,
//! and Kelvin inversion.

use crate::clifford::{gp, Multivector, Signature};
use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::collections::BTreeMap;

pub type MultiIndex = Vec<u8>;

/// Homogeneous polynomial R^N -> Cl_N as a map multi-index -> coefficient.
/// Zero coefficients are pruned; all stored indices have total degree
/// exactly `degree`.
#[derive(Clone, Debug)]
pub struct MvPolynomial {
    sig: Signature,
    degree: usize,
    terms: BTreeMap<MultiIndex, Multivector>,
}

const PRUNE_EPS: f64 = 0.0;

impl MvPolynomial {
    pub fn zero(sig: Signature, degree: usize) -> Self {
        MvPolynomial {
            sig,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(sig: Signature, value: Multivector) -> Self {
        let mut p = Self::zero(sig, 0);
        p.insert(vec![0; sig.dim()], value);
        p
    }

    /// Single monomial x^alpha * coeff.
    pub fn monomial(sig: Signature, alpha: MultiIndex, coeff: Multivector) -> Self {
        assert_eq!(alpha.len(), sig.dim());
        let degree = alpha.iter().map(|&a| a as usize).sum();
        let mut p = Self::zero(sig, degree);
        p.insert(alpha, coeff);
        p
    }

    /// The identity vector field x = sum_j x_j e_j (degree 1, grade-1 values).
    pub fn identity_vector(sig: Signature) -> Self {
        let mut p = Self::zero(sig, 1);
        for j in 0..sig.dim() {
            let mut alpha = vec![0u8; sig.dim()];
            alpha[j] = 1;
            p.insert(alpha, Multivector::basis_vector(sig, j));
        }
        p
    }

    fn insert(&mut self, alpha: MultiIndex, coeff: Multivector) {
        debug_assert_eq!(
            alpha.iter().map(|&a| a as usize).sum::<usize>(),
            self.degree
        );
        if coeff.is_zero(PRUNE_EPS) {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(c) => {
                *c = c.add(&coeff);
                if c.is_zero(PRUNE_EPS) {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, coeff);
            }
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Multivector)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient-space l2 norm (plain dot over monomials and blades).
    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        if s == 0.0 {
            out.terms.clear();
            return out;
        }
        for c in out.terms.values_mut() {
            *c = c.scale(s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig);
        assert!(self.is_zero() || other.is_zero() || self.degree == other.degree);
        let mut out = self.clone();
        if out.is_zero() {
            out.degree = other.degree;
        }
        for (alpha, c) in &other.terms {
            out.insert(alpha.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn evaluate(&self, x: &[f64]) -> Multivector {
        assert_eq!(x.len(), self.sig.dim());
        let mut out = Multivector::zero(self.sig);
        for (alpha, coeff) in &self.terms {
            let mut mono = 1.0;
            for (xi, &ai) in x.iter().zip(alpha.iter()) {
                for _ in 0..ai {
                    mono *= xi;
                }
            }
            out.add_assign_scaled(coeff, mono);
        }
        out
    }

    /// Left multiplication by the vector polynomial x, raising degree by one.
    pub fn mul_by_x_left(&self) -> Self {
        let sig = self.sig;
        let mut out = Self::zero(sig, self.degree + 1);
        for (alpha, coeff) in &self.terms {
            for j in 0..sig.dim() {
                let mut a = alpha.clone();
                a[j] += 1;
                let ej = Multivector::basis_vector(sig, j);
                out.insert(a, gp(&ej, coeff));
            }
        }
        out
    }
}

/// D p = sum_j e_j dp/dx_j, with left Clifford multiplication by e_j.
pub fn dirac_apply(p: &MvPolynomial) -> MvPolynomial {
    let sig = p.signature();
    let mut out = MvPolynomial::zero(sig, p.degree().saturating_sub(1));
    for (alpha, coeff) in p.terms() {
        for j in 0..sig.dim() {
            if alpha[j] == 0 {
                continue;
            }
            let mut a = alpha.clone();
            a[j] -= 1;
            let ej = Multivector::basis_vector(sig, j);
            out.insert(a, gp(&ej, coeff).scale(alpha[j] as f64));
        }
    }
    out
}

/// Euler operator sum_j x_j dp/dx_j; equals m p on homogeneous p.
pub fn euler_apply(p: &MvPolynomial) -> MvPolynomial {
    let mut out = MvPolynomial::zero(p.signature(), p.degree());
    for (alpha, coeff) in p.terms() {
        let total: usize = alpha.iter().map(|&a| a as usize).sum();
        out.insert(alpha.clone(), coeff.scale(total as f64));
    }
    out
}

/// Gamma p = x (D p) + E p; monogenics of degree m have eigenvalue +m.
pub fn gamma_apply(p: &MvPolynomial) -> MvPolynomial {
    let xd = dirac_apply(p).mul_by_x_left();
    let xd = if xd.is_zero() {
        MvPolynomial::zero(p.signature(), p.degree())
    } else {
        xd
    };
    xd.add(&euler_apply(p))
}

/// Laplacian sum_j d^2 p/dx_j^2 (componentwise, no Clifford factors).
pub fn laplacian_apply(p: &MvPolynomial) -> MvPolynomial {
    let sig = p.signature();
    let mut out = MvPolynomial::zero(sig, p.degree().saturating_sub(2));
    for (alpha, coeff) in p.terms() {
        for j in 0..sig.dim() {
            if alpha[j] < 2 {
                continue;
            }
            let mut a = alpha.clone();
            a[j] -= 2;
            let f = (alpha[j] as f64) * (alpha[j] as f64 - 1.0);
            out.insert(a, coeff.scale(f));
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Monomials of total degree m in `nvars` variables, in a fixed
/// deterministic order.
pub fn monomials(nvars: usize, m: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(binomial(m + nvars - 1, nvars - 1));
    let mut cur = vec![0u8; nvars];
    fn rec(out: &mut Vec<MultiIndex>, cur: &mut MultiIndex, var: usize, left: usize) {
        if var + 1 == cur.len() {
            cur[var] = left as u8;
            out.push(cur.clone());
            return;
        }
        for take in (0..=left).rev() {
            cur[var] = take as u8;
            rec(out, cur, var + 1, left - take);
        }
    }
    if nvars == 0 {
        return out;
    }
    rec(&mut out, &mut cur, 0, m);
    out
}

/// Coordinates of the space of Cl_N-valued homogeneous polynomials of
/// degree m: index = monomial_index * 2^N + blade_mask.
pub struct PolyCoords {
    sig: Signature,
    degree: usize,
    monos: Vec<MultiIndex>,
    index: BTreeMap<MultiIndex, usize>,
}

impl PolyCoords {
    pub fn new(sig: Signature, degree: usize) -> Self {
        let monos = monomials(sig.dim(), degree);
        let index = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        PolyCoords {
            sig,
            degree,
            monos,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.monos.len() * self.sig.blades()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monos
    }

    pub fn to_vector(&self, p: &MvPolynomial) -> DVector<f64> {
        assert_eq!(p.signature(), self.sig);
        assert!(p.is_zero() || p.degree() == self.degree);
        let blades = self.sig.blades();
        let mut v = DVector::zeros(self.dim());
        for (alpha, coeff) in p.terms() {
            let mi = self.index[alpha];
            for (mask, &c) in coeff.coeffs().iter().enumerate() {
                v[mi * blades + mask] = c;
            }
        }
        v
    }

    pub fn from_vector(&self, v: &DVector<f64>) -> MvPolynomial {
        let blades = self.sig.blades();
        let mut p = MvPolynomial::zero(self.sig, self.degree);
        for (mi, alpha) in self.monos.iter().enumerate() {
            let mut coeff = Multivector::zero(self.sig);
            for mask in 0..blades {
                coeff.set_coeff(mask, v[mi * blades + mask]);
            }
            if !coeff.is_zero(0.0) {
                p.insert(alpha.clone(), coeff);
            }
        }
        p
    }

    /// Matrix of a linear operator into `target` coordinates.
    fn operator_matrix<F>(&self, target: &PolyCoords, op: F) -> DMatrix<f64>
    where
        F: Fn(&MvPolynomial) -> MvPolynomial,
    {
        let blades = self.sig.blades();
        let mut m = DMatrix::zeros(target.dim(), self.dim());
        for (mi, alpha) in self.monos.iter().enumerate() {
            for mask in 0..blades {
                let mut coeff = Multivector::zero(self.sig);
                coeff.set_coeff(mask, 1.0);
                let basis = MvPolynomial::monomial(self.sig, alpha.clone(), coeff);
                let image = op(&basis);
                let col = target.to_vector(&image);
                m.set_column(mi * blades + mask, &col);
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceLabel {
    Harmonic,
    Monogenic,
}

/// Basis of a kernel subspace (harmonic or monogenic polynomials).
pub struct PolySubspace {
    pub sig: Signature,
    pub degree: usize,
    pub label: SubspaceLabel,
    pub basis: Vec<MvPolynomial>,
}

impl PolySubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Scalar harmonic dimension times the blade count.
pub fn harmonic_dim(n_ambient: usize, m: usize) -> usize {
    let scalar = binomial(m + n_ambient - 1, n_ambient - 1)
        - if m >= 2 {
            binomial(m + n_ambient - 3, n_ambient - 1)
        } else {
            0
        };
    (1usize << n_ambient) * scalar
}

/// Basis of ker(Laplacian) on Cl_N-valued homogeneous degree-m polynomials.
pub fn harmonic_basis(sig: Signature, m: usize) -> PolySubspace {
    kernel_basis(sig, m, SubspaceLabel::Harmonic)
}

/// Basis of ker(D) on Cl_N-valued homogeneous degree-m polynomials.
pub fn monogenic_basis(sig: Signature, m: usize) -> PolySubspace {
    kernel_basis(sig, m, SubspaceLabel::Monogenic)
}

fn kernel_basis(sig: Signature, m: usize, label: SubspaceLabel) -> PolySubspace {
    let source = PolyCoords::new(sig, m);
    let (target_deg, op): (usize, fn(&MvPolynomial) -> MvPolynomial) = match label {
        SubspaceLabel::Harmonic => (m.saturating_sub(2), laplacian_apply),
        SubspaceLabel::Monogenic => (m.saturating_sub(1), dirac_apply),
    };
    let trivial = match label {
        SubspaceLabel::Harmonic => m < 2,
        SubspaceLabel::Monogenic => m < 1,
    };
    let basis = if trivial {
        // The operator vanishes identically: the whole space is the kernel.
        let blades = sig.blades();
        let mut out = Vec::with_capacity(source.dim());
        for alpha in source.monomials() {
            for mask in 0..blades {
                let mut coeff = Multivector::zero(sig);
                coeff.set_coeff(mask, 1.0);
                out.push(MvPolynomial::monomial(sig, alpha.clone(), coeff));
            }
        }
        out
    } else {
        let target = PolyCoords::new(sig, target_deg);
        let mat = source.operator_matrix(&target, op);
        linalg::null_space(&mat)
            .iter()
            .map(|v| source.from_vector(v))
            .collect()
    };
    PolySubspace {
        sig,
        degree: m,
        label,
        basis,
    }
}

/// Splits a harmonic h of degree m >= 1 as h = p + x q with D p = D q = 0,
/// deg p = m, deg q = m - 1.
pub fn fischer_split(h: &MvPolynomial) -> Result<(MvPolynomial, MvPolynomial)> {
    let sig = h.signature();
    let m = h.degree();
    if m == 0 || h.is_zero() {
        return Ok((h.clone(), MvPolynomial::zero(sig, 0)));
    }
    let mono_m = monogenic_basis(sig, m);
    let mono_m1 = monogenic_basis(sig, m - 1);
    let coords = PolyCoords::new(sig, m);

    let ncols = mono_m.dim() + mono_m1.dim();
    let mut a = DMatrix::zeros(coords.dim(), ncols);
    for (j, p) in mono_m.basis.iter().enumerate() {
        a.set_column(j, &coords.to_vector(p));
    }
    for (j, q) in mono_m1.basis.iter().enumerate() {
        a.set_column(mono_m.dim() + j, &coords.to_vector(&q.mul_by_x_left()));
    }

    let b = coords.to_vector(h);
    let c = linalg::lstsq(&a, &b);
    let residual = (&a * &c - &b).norm();
    if residual > 1e-10 * b.norm().max(1e-300) {
        return Err(Error::NotHarmonic {
            residual: residual / b.norm().max(1e-300),
        });
    }

    let mut p = MvPolynomial::zero(sig, m);
    for (j, basis_p) in mono_m.basis.iter().enumerate() {
        p = p.add(&basis_p.scale(c[j]));
    }
    let mut q = MvPolynomial::zero(sig, m - 1);
    for (j, basis_q) in mono_m1.basis.iter().enumerate() {
        q = q.add(&basis_q.scale(c[mono_m.dim() + j]));
    }
    Ok((p, q))
}

/// Kelvin inversion of a monogenic p of degree m:
/// x -> G(x) p(x^{-1}) = (-1)^m (x p(x)) |x|^{-(N + 2m)},
/// kept symbolically so the sphere restriction is exact.
pub struct KelvinImage {
    sig: Signature,
    /// x * p(x), expanded: homogeneous of degree m + 1.
    numerator: MvPolynomial,
    /// Exponent of |x| in the scale factor, always negative.
    power: i32,
    sign: f64,
}

impl KelvinImage {
    pub fn evaluate(&self, x: &[f64]) -> Result<Multivector> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            return Err(Error::EvalAtOrigin);
        }
        let scale = r2.powf(self.power as f64 / 2.0);
        Ok(self.numerator.evaluate(x).scale(self.sign * scale))
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    /// Homogeneity degree of the image, 1 - N - m.
    pub fn homogeneity(&self) -> i32 {
        (self.numerator.degree() as i32) + self.power
    }
}

pub fn kelvin_invert(p: &MvPolynomial) -> KelvinImage {
    let sig = p.signature();
    let m = p.degree() as i32;
    let n_ambient = sig.dim() as i32;
    KelvinImage {
        sig,
        numerator: p.mul_by_x_left(),
        power: -(n_ambient + 2 * m),
        sign: if m % 2 == 0 { 1.0 } else { -1.0 },
    }
}

/// Random Cl_N-valued homogeneous polynomial with coefficients in [-1, 1].
pub fn random_polynomial<R: Rng>(rng: &mut R, sig: Signature, m: usize) -> MvPolynomial {
    let mut p = MvPolynomial::zero(sig, m);
    for alpha in monomials(sig.dim(), m) {
        let mut coeff = Multivector::zero(sig);
        for mask in 0..sig.blades() {
            coeff.set_coeff(mask, rng.gen_range(-1.0..=1.0));
        }
        p.insert(alpha, coeff);
    }
    p
}

/// Random element of a subspace with basis coefficients in [-1, 1].
pub fn random_in_subspace<R: Rng>(rng: &mut R, space: &PolySubspace) -> MvPolynomial {
    let mut p = MvPolynomial::zero(space.sig, space.degree);
    for b in &space.basis {
        p = p.add(&b.scale(rng.gen_range(-1.0..=1.0)));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sig(n: usize) -> Signature {
        Signature::new(n).unwrap()
    }

    /// The canonical degree-1 monogenic in Cl_2: x1 - e1e2 x2.
    fn canonical_monogenic_n2() -> MvPolynomial {
        let s = sig(2);
        let mut e12 = Multivector::zero(s);
        e12.set_coeff(0b11, -1.0);
        MvPolynomial::monomial(s, vec![1, 0], Multivector::one(s))
            .add(&MvPolynomial::monomial(s, vec![0, 1], e12))
    }

    #[test]
    fn dirac_examples() {
        let s = sig(2);
        let p = MvPolynomial::monomial(s, vec![1, 0], Multivector::one(s));
        let dp = dirac_apply(&p);
        assert_eq!(dp.num_terms(), 1);
        let (_, c) = dp.terms().next().unwrap();
        assert_eq!(c.coeff(0b01), 1.0);

        // Hand expansion: D(x1 - e1e2 x2) = e1 + e2(-e1e2) = e1 - e1 = 0.
        let p = canonical_monogenic_n2();
        assert!(dirac_apply(&p).is_zero());
    }

    #[test]
    fn dirac_squared_is_minus_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=4 {
            let s = sig(n);
            for m in 2..=4 {
                for _ in 0..12 {
                    let p = random_polynomial(&mut rng, s, m);
                    let dd = dirac_apply(&dirac_apply(&p));
                    let lap = laplacian_apply(&p).scale(-1.0);
                    let diff = dd.sub(&lap);
                    assert!(diff.coeff_norm() <= 1e-12 * p.coeff_norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn euler_examples() {
        let s = sig(2);
        let p = MvPolynomial::monomial(s, vec![2, 0], Multivector::one(s)).add(
            &MvPolynomial::monomial(s, vec![0, 2], Multivector::scalar(s, -1.0)),
        );
        let ep = euler_apply(&p);
        assert!(ep.sub(&p.scale(2.0)).is_zero());

        let c = MvPolynomial::constant(s, Multivector::basis_vector(s, 0));
        assert!(euler_apply(&c).is_zero());

        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let p = random_polynomial(&mut rng, sig(3), 3);
        let diff = euler_apply(&p).sub(&p.scale(3.0));
        assert!(diff.coeff_norm() <= 1e-12 * p.coeff_norm());
    }

    #[test]
    fn gamma_examples() {
        // Monogenic of degree 1 has eigenvalue +1.
        let p = canonical_monogenic_n2();
        let g = gamma_apply(&p);
        assert!(g.sub(&p).coeff_norm() <= 1e-14);

        // Term-by-term expansion for p = x in N = 2: D x = -2, so
        // Gamma x = x (-2) + x = -x.
        let x = MvPolynomial::identity_vector(sig(2));
        let g = gamma_apply(&x);
        assert!(g.sub(&x.scale(-1.0)).coeff_norm() <= 1e-14);

        // Gamma annihilates constants.
        let c = MvPolynomial::constant(sig(2), Multivector::one(sig(2)));
        assert!(gamma_apply(&c).is_zero());
    }

    #[test]
    fn gamma_kelvin_sector_eigenvalue() {
        // Gamma(x q) = -(n + m)(x q) for monogenic q of degree m in Cl_{n+1}.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n_ambient in 2..=4 {
            let s = sig(n_ambient);
            for m in 0..=2 {
                let space = monogenic_basis(s, m);
                let q = random_in_subspace(&mut rng, &space);
                let xq = q.mul_by_x_left();
                let expected = -((n_ambient - 1 + m) as f64);
                let diff = gamma_apply(&xq).sub(&xq.scale(expected));
                assert!(diff.coeff_norm() <= 1e-12 * xq.coeff_norm().max(1.0));
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let s = sig(2);
        let p = MvPolynomial::monomial(s, vec![2, 0], Multivector::one(s))
            .add(&MvPolynomial::monomial(s, vec![0, 2], Multivector::one(s)));
        let lap = laplacian_apply(&p);
        assert_eq!(lap.num_terms(), 1);
        assert_eq!(lap.terms().next().unwrap().1.scalar_part(), 4.0);

        let h = MvPolynomial::monomial(s, vec![2, 0], Multivector::one(s)).add(
            &MvPolynomial::monomial(s, vec![0, 2], Multivector::scalar(s, -1.0)),
        );
        assert!(laplacian_apply(&h).is_zero());
    }

    #[test]
    fn harmonic_dims() {
        assert_eq!(harmonic_basis(sig(2), 0).dim(), 4);
        assert_eq!(harmonic_basis(sig(2), 1).dim(), 8);
        assert_eq!(harmonic_basis(sig(3), 2).dim(), 40);
        for n in 2..=4 {
            for m in 0..=4 {
                assert_eq!(
                    harmonic_basis(sig(n), m).dim(),
                    harmonic_dim(n, m),
                    "N={n} m={m}"
                );
            }
        }
    }

    #[test]
    fn monogenic_basis_properties() {
        // Constants are monogenic.
        assert_eq!(monogenic_basis(sig(2), 0).dim(), 4);

        // The canonical monogenic lies in the span: projecting onto the
        // basis reproduces it.
        let space = monogenic_basis(sig(2), 1);
        assert_eq!(space.dim(), 4);
        let coords = PolyCoords::new(sig(2), 1);
        let target = coords.to_vector(&canonical_monogenic_n2());
        let mut a = DMatrix::zeros(coords.dim(), space.dim());
        for (j, p) in space.basis.iter().enumerate() {
            a.set_column(j, &coords.to_vector(p));
        }
        let c = linalg::lstsq(&a, &target);
        assert!((&a * &c - &target).norm() <= 1e-10);

        // Monogenic implies harmonic.
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for n in 2..=3 {
            for m in 1..=3 {
                let space = monogenic_basis(sig(n), m);
                let p = random_in_subspace(&mut rng, &space);
                assert!(dirac_apply(&p).coeff_norm() <= 1e-10 * p.coeff_norm().max(1.0));
                assert!(laplacian_apply(&p).coeff_norm() <= 1e-10 * p.coeff_norm().max(1.0));
            }
        }
    }

    #[test]
    fn gamma_eigenvalue_on_monogenics() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for n in 2..=4 {
            for m in 0..=3 {
                let space = monogenic_basis(sig(n), m);
                let p = random_in_subspace(&mut rng, &space);
                let diff = gamma_apply(&p).sub(&p.scale(m as f64));
                assert!(diff.coeff_norm() <= 1e-12 * p.coeff_norm().max(1.0));
            }
        }
    }

    #[test]
    fn dimension_identity() {
        // dim H_m = dim P_m + dim P_{m-1}, small-scale version of the
        // acceptance criterion.
        for n in 2..=3 {
            for m in 1..=3 {
                let h = harmonic_basis(sig(n), m).dim();
                let p = monogenic_basis(sig(n), m).dim();
                let q = monogenic_basis(sig(n), m - 1).dim();
                assert_eq!(h, p + q, "N={n} m={m}");
            }
        }
    }

    #[test]
    fn fischer_split_examples() {
        // Already monogenic: split is (h, 0).
        let h = canonical_monogenic_n2();
        let (p, q) = fischer_split(&h).unwrap();
        assert!(h.sub(&p).coeff_norm() <= 1e-10);
        assert!(q.coeff_norm() <= 1e-10);

        // h = x in N=2 splits with a constant q part.
        let x = MvPolynomial::identity_vector(sig(2));
        let (p, q) = fischer_split(&x).unwrap();
        let rebuilt = p.add(&q.mul_by_x_left());
        assert!(x.sub(&rebuilt).coeff_norm() <= 1e-10);
        assert!(dirac_apply(&p).coeff_norm() <= 1e-10);

        // Random harmonics reconstruct.
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for n in 2..=3 {
            for m in 1..=3 {
                let space = harmonic_basis(sig(n), m);
                for _ in 0..8 {
                    let h = random_in_subspace(&mut rng, &space);
                    let (p, q) = fischer_split(&h).unwrap();
                    let rebuilt = p.add(&q.mul_by_x_left());
                    assert!(h.sub(&rebuilt).coeff_norm() <= 1e-10 * h.coeff_norm().max(1.0));
                    assert!(dirac_apply(&p).coeff_norm() <= 1e-9 * h.coeff_norm().max(1.0));
                    assert!(dirac_apply(&q).coeff_norm() <= 1e-9 * h.coeff_norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn fischer_split_rejects_non_harmonic() {
        let s = sig(2);
        // x1^2 is not harmonic.
        let h = MvPolynomial::monomial(s, vec![2, 0], Multivector::one(s));
        assert!(fischer_split(&h).is_err());
    }

    #[test]
    fn kelvin_examples() {
        let s = sig(2);
        // p = 1: image is G(x) = x / |x|^2; on the unit circle it is w.
        let one = MvPolynomial::constant(s, Multivector::one(s));
        let img = kelvin_invert(&one);
        for k in 0..8 {
            let t = 2.0 * std::f64::consts::PI * (k as f64) / 8.0;
            let w = [t.cos(), t.sin()];
            let val = img.evaluate(&w).unwrap();
            let expect = Multivector::vector(s, &w);
            assert!(val.sub(&expect).norm() <= 1e-12);
        }
        assert!(img.evaluate(&[0.0, 0.0]).is_err());

        // Degree-1 monogenic: on the unit circle the image equals
        // w p(-w) = -w p(w).
        let p = canonical_monogenic_n2();
        let img = kelvin_invert(&p);
        for k in 0..16 {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.3) / 16.0;
            let w = [t.cos(), t.sin()];
            let val = img.evaluate(&w).unwrap();
            let wv = Multivector::vector(s, &w);
            let expect = gp(&wv, &p.evaluate(&w)).scale(-1.0);
            assert!(val.sub(&expect).norm() <= 1e-12);
        }
    }

    #[test]
    fn kelvin_images_are_monogenic() {
        // Finite-difference Dirac residual at random points away from 0.
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for n in 2..=3 {
            let s = sig(n);
            for m in 0..=2 {
                let space = monogenic_basis(s, m);
                let p = random_in_subspace(&mut rng, &space);
                let img = kelvin_invert(&p);
                let h = 1e-5;
                for _ in 0..20 {
                    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
                    let mut residual = Multivector::zero(s);
                    for j in 0..n {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[j] += h;
                        xm[j] -= h;
                        let diff = img
                            .evaluate(&xp)
                            .unwrap()
                            .sub(&img.evaluate(&xm).unwrap())
                            .scale(1.0 / (2.0 * h));
                        residual = residual.add(&gp(&Multivector::basis_vector(s, j), &diff));
                    }
                    let scale = img.evaluate(&x).unwrap().norm().max(1e-6);
                    assert!(
                        residual.norm() <= 1e-6 * scale.max(1.0),
                        "residual {} at {:?}",
                        residual.norm(),
                        x
                    );
                }
            }
        }
    }

    #[test]
    fn kelvin_homogeneity() {
        let s = sig(3);
        let p = MvPolynomial::constant(s, Multivector::one(s));
        let img = kelvin_invert(&p);
        // degree 1 - N - m = 1 - 3 - 0 = -2
        assert_eq!(img.homogeneity(), -2);
        let x = [0.3, -0.4, 0.9];
        let lam = 1.7;
        let xs: Vec<f64> = x.iter().map(|v| v * lam).collect();
        let lhs = img.evaluate(&xs).unwrap();
        let rhs = img.evaluate(&x).unwrap().scale(lam.powi(-2));
        assert!(lhs.sub(&rhs).norm() <= 1e-12 * rhs.norm());
    }
}
