//! Real Clifford algebra Cl_N with negative-definite signature.
//!
//! Every generator squares to -1, so `e_i e_j + e_j e_i = -2 delta_ij`.
//! Elements are stored densely: coefficient `coeffs[mask]` multiplies the
//! basis blade whose generator set is the bitmask (bit i set means e_{i+1}
//! is a factor, factors in ascending order).

use crate::error::{Error, Result};
use rand::Rng;
use std::fmt;
use std::sync::OnceLock;

pub const MAX_DIM: usize = 8;

/// Ambient dimension N of Cl_N, validated to 1..=8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature(usize);

impl Signature {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::DimensionOutOfRange(dim));
        }
        Ok(Signature(dim))
    }

    #[inline]
    pub fn dim(self) -> usize {
        self.0
    }

    /// Number of basis blades, 2^N.
    #[inline]
    pub fn blades(self) -> usize {
        1 << self.0
    }
}

/// Number of transpositions needed to merge the generator lists of two
/// blades into ascending order: pairs (i in a, j in b) with i > j.
#[inline]
fn reorder_swaps(a: usize, b: usize) -> u32 {
    let mut a = a >> 1;
    let mut swaps = 0;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    swaps
}

/// Sign of the blade product e_A * e_B; the result blade is A ^ B.
/// Each transposition flips the sign, and each repeated generator
/// contributes a factor e_i^2 = -1.
#[inline]
fn blade_product_sign(a: usize, b: usize) -> f64 {
    let flips = reorder_swaps(a, b) + (a & b).count_ones();
    if flips % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

// Per-dimension sign tables, built on first use. Entry [a * 2^N + b] is the
// sign of e_a e_b.
static SIGN_TABLES: [OnceLock<Vec<i8>>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];

fn sign_table(dim: usize) -> &'static [i8] {
    SIGN_TABLES[dim].get_or_init(|| {
        let size = 1usize << dim;
        let mut table = vec![0i8; size * size];
        for a in 0..size {
            for b in 0..size {
                table[a * size + b] = blade_product_sign(a, b) as i8;
            }
        }
        table
    })
}

/// Dense multivector in Cl_N.
#[derive(Clone, PartialEq)]
pub struct Multivector {
    sig: Signature,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn zero(sig: Signature) -> Self {
        Multivector {
            sig,
            coeffs: vec![0.0; sig.blades()],
        }
    }

    pub fn scalar(sig: Signature, value: f64) -> Self {
        let mut mv = Self::zero(sig);
        mv.coeffs[0] = value;
        mv
    }

    pub fn one(sig: Signature) -> Self {
        Self::scalar(sig, 1.0)
    }

    /// Basis generator e_{i+1} (zero-based index).
    pub fn basis_vector(sig: Signature, i: usize) -> Self {
        assert!(i < sig.dim(), "generator index out of range");
        let mut mv = Self::zero(sig);
        mv.coeffs[1 << i] = 1.0;
        mv
    }

    /// Basis blade for an explicit mask.
    pub fn basis_blade(sig: Signature, mask: usize) -> Self {
        assert!(mask < sig.blades());
        let mut mv = Self::zero(sig);
        mv.coeffs[mask] = 1.0;
        mv
    }

    /// Grade-1 element from components.
    pub fn vector(sig: Signature, components: &[f64]) -> Self {
        assert!(components.len() <= sig.dim());
        let mut mv = Self::zero(sig);
        for (i, &c) in components.iter().enumerate() {
            mv.coeffs[1 << i] = c;
        }
        mv
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        self.sig
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn set_coeff(&mut self, mask: usize, value: f64) {
        self.coeffs[mask] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Coefficient of the empty blade.
    #[inline]
    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Components of the grade-1 part.
    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.coeffs[1 << i]).collect()
    }

    /// Keep only grade-k coefficients.
    pub fn grade(&self, k: usize) -> Self {
        let mut out = Self::zero(self.sig);
        for (mask, &c) in self.coeffs.iter().enumerate() {
            if mask.count_ones() as usize == k {
                out.coeffs[mask] = c;
            }
        }
        out
    }

    /// Largest coefficient magnitude outside grade k.
    pub fn off_grade_norm(&self, k: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask.count_ones() as usize != k)
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_grade(&self, k: usize, tol: f64) -> bool {
        self.off_grade_norm(k) <= tol * (1.0 + self.norm())
    }

    /// Euclidean coefficient norm; coincides with Sc(conj(A) A)^(1/2).
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig);
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.sig, other.sig);
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c -= o;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: f64) {
        assert_eq!(self.sig, other.sig);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += s * o;
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    /// Reversion (the tilde map): grade-r blade scaled by (-1)^{r(r-1)/2}.
    pub fn reversion(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            let r = mask.count_ones() as usize;
            if (r * (r.wrapping_sub(1)) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// Clifford conjugation (the bar map): grade-r blade scaled by (-1)^{r(r+1)/2}.
    pub fn conjugation(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            let r = mask.count_ones() as usize;
            if (r * (r + 1) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }
}

/// Geometric product under e_i e_j + e_j e_i = -2 delta_ij.
pub fn geometric_product(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    if a.sig != b.sig {
        return Err(Error::SignatureMismatch(a.dim(), b.dim()));
    }
    Ok(gp(a, b))
}

/// Infallible geometric product for same-signature operands.
pub fn gp(a: &Multivector, b: &Multivector) -> Multivector {
    assert_eq!(a.sig, b.sig, "signature mismatch");
    let size = a.sig.blades();
    let table = sign_table(a.dim());
    let mut out = Multivector::zero(a.sig);
    for (ma, &ca) in a.coeffs.iter().enumerate() {
        if ca == 0.0 {
            continue;
        }
        let row = &table[ma * size..(ma + 1) * size];
        for (mb, &cb) in b.coeffs.iter().enumerate() {
            if cb == 0.0 {
                continue;
            }
            out.coeffs[ma ^ mb] += ca * cb * row[mb] as f64;
        }
    }
    out
}

/// Multiplicative inverse -x/|x|^2 of a nonzero grade-1 element.
pub fn vector_inverse(x: &Multivector) -> Result<Multivector> {
    if !x.is_grade(1, 1e-12) {
        return Err(Error::NotAVector);
    }
    let n2 = x.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(x.scale(-1.0 / n2))
}

/// Product of nonzero vectors, kept alongside its factor list so GPin
/// membership is certified constructively.
#[derive(Clone)]
pub struct Versor {
    value: Multivector,
    factors: Vec<Multivector>,
}

impl Versor {
    /// Builds the product of the given grade-1 factors.
    pub fn from_factors(factors: Vec<Multivector>) -> Result<Self> {
        let first = factors.first().ok_or(Error::NotAVector)?;
        let sig = first.signature();
        let mut value = Multivector::one(sig);
        for f in &factors {
            if !f.is_grade(1, 1e-12) {
                return Err(Error::NotAVector);
            }
            if f.norm() == 0.0 {
                return Err(Error::ZeroVector);
            }
            value = gp(&value, f);
        }
        Ok(Versor { value, factors })
    }

    pub fn value(&self) -> &Multivector {
        &self.value
    }

    pub fn factors(&self) -> &[Multivector] {
        &self.factors
    }

    /// conj(A) A for a versor is |A|^2 as a scalar; inverse is conj(A)/|A|^2.
    pub fn inverse(&self) -> Multivector {
        let n2 = self.value.norm_squared();
        self.value.conjugation().scale(1.0 / n2)
    }
}

/// Random versor: product of `num_factors` vectors with components uniform
/// in [-1, 1], rejecting factors with norm below 1e-3.
pub fn random_versor<R: Rng>(rng: &mut R, sig: Signature, num_factors: usize) -> Versor {
    assert!(num_factors >= 1);
    let mut factors = Vec::with_capacity(num_factors);
    while factors.len() < num_factors {
        let comps: Vec<f64> = (0..sig.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let v = Multivector::vector(sig, &comps);
        if v.norm() >= 1e-3 {
            factors.push(v);
        }
    }
    Versor::from_factors(factors).expect("factors are nonzero vectors")
}

/// Random multivector with coefficients uniform in [-1, 1].
pub fn random_multivector<R: Rng>(rng: &mut R, sig: Signature) -> Multivector {
    let mut mv = Multivector::zero(sig);
    for c in &mut mv.coeffs {
        *c = rng.gen_range(-1.0..=1.0);
    }
    mv
}

fn blade_name(mask: usize) -> String {
    if mask == 0 {
        return String::new();
    }
    let mut s = String::new();
    for i in 0..MAX_DIM {
        if mask & (1 << i) != 0 {
            s.push_str(&format!("e{}", i + 1));
        }
    }
    s
}

impl fmt::Debug for Multivector {
    /// Signed coefficient list `c * e{i}e{j}...` sorted by blade mask.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mask == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} * {}", blade_name(mask))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
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

    /// Naive symbolic blade multiplication: bubble-sort the concatenated
    /// generator list, flipping the sign per swap and cancelling repeated
    /// generators with e_i^2 = -1.
    fn naive_blade_product(a: usize, b: usize) -> (f64, usize) {
        let mut gens: Vec<usize> = Vec::new();
        for i in 0..MAX_DIM {
            if a & (1 << i) != 0 {
                gens.push(i);
            }
        }
        for i in 0..MAX_DIM {
            if b & (1 << i) != 0 {
                gens.push(i);
            }
        }
        let mut sign = 1.0;
        // bubble sort with sign tracking
        loop {
            let mut swapped = false;
            for i in 0..gens.len().saturating_sub(1) {
                if gens[i] > gens[i + 1] {
                    gens.swap(i, i + 1);
                    sign = -sign;
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        // cancel adjacent equal pairs
        let mut out: Vec<usize> = Vec::new();
        for g in gens {
            if out.last() == Some(&g) {
                out.pop();
                sign = -sign;
            } else {
                out.push(g);
            }
        }
        let mask = out.iter().fold(0usize, |m, g| m | (1 << g));
        (sign, mask)
    }

    #[test]
    fn sign_table_matches_naive_expander() {
        for dim in 1..=5 {
            let size = 1usize << dim;
            let table = sign_table(dim);
            for a in 0..size {
                for b in 0..size {
                    let (s, mask) = naive_blade_product(a, b);
                    assert_eq!(mask, a ^ b);
                    assert_eq!(table[a * size + b] as f64, s, "blades {a:#b} {b:#b}");
                }
            }
        }
    }

    #[test]
    fn generator_relations() {
        let s = sig(3);
        for i in 0..3 {
            let ei = Multivector::basis_vector(s, i);
            let sq = gp(&ei, &ei);
            assert_eq!(sq.scalar_part(), -1.0);
            assert_eq!(sq.off_grade_norm(0), 0.0);
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let ej = Multivector::basis_vector(s, j);
                let anti = gp(&ei, &ej).add(&gp(&ej, &ei));
                assert!(anti.is_zero(0.0), "e_i e_j + e_j e_i must vanish exactly");
            }
        }
    }

    #[test]
    fn product_examples() {
        let s = sig(2);
        let e1 = Multivector::basis_vector(s, 0);
        let e2 = Multivector::basis_vector(s, 1);
        assert_eq!(gp(&e1, &e1).scalar_part(), -1.0);

        let e12 = gp(&e1, &e2);
        assert_eq!(e12.coeff(0b11), 1.0);
        let e21 = gp(&e2, &e1);
        assert_eq!(e21.coeff(0b11), -1.0);

        // (1 + e1)(1 - e1) = 1 - e1^2 = 2
        let a = Multivector::one(s).add(&e1);
        let b = Multivector::one(s).sub(&e1);
        let p = gp(&a, &b);
        assert_eq!(p.scalar_part(), 2.0);
        assert_eq!(p.off_grade_norm(0), 0.0);
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = Multivector::one(sig(2));
        let b = Multivector::one(sig(3));
        assert!(geometric_product(&a, &b).is_err());
    }

    #[test]
    fn reversion_examples() {
        let s = sig(3);
        let e12 = Multivector::basis_blade(s, 0b011);
        assert_eq!(e12.reversion().coeff(0b011), -1.0);
        let e123 = Multivector::basis_blade(s, 0b111);
        assert_eq!(e123.reversion().coeff(0b111), -1.0);
        let c = Multivector::scalar(s, 5.0);
        assert_eq!(c.reversion().scalar_part(), 5.0);
    }

    #[test]
    fn conjugation_examples() {
        let s = sig(2);
        let e1 = Multivector::basis_vector(s, 0);
        assert_eq!(e1.conjugation().coeff(0b01), -1.0);
        let e12 = Multivector::basis_blade(s, 0b11);
        assert_eq!(e12.conjugation().coeff(0b11), -1.0);
        assert_eq!(Multivector::one(s).conjugation().scalar_part(), 1.0);
    }

    #[test]
    fn scalar_part_examples() {
        let s = sig(2);
        let e1 = Multivector::basis_vector(s, 0);
        let a = Multivector::scalar(s, 3.0).add(&e1.scale(2.0));
        assert_eq!(a.scalar_part(), 3.0);
        assert_eq!(Multivector::basis_blade(s, 0b11).scalar_part(), 0.0);

        // Sc(conj(A) A) = |A|^2 for A = 1 + e1
        let a = Multivector::one(s).add(&e1);
        let p = gp(&a.conjugation(), &a);
        assert!((p.scalar_part() - 2.0).abs() < 1e-15);
        assert!((p.scalar_part() - a.norm_squared()).abs() < 1e-15);
    }

    #[test]
    fn vector_inverse_examples() {
        let s = sig(2);
        let e1 = Multivector::basis_vector(s, 0);
        let inv = vector_inverse(&e1).unwrap();
        assert_eq!(inv.coeff(0b01), -1.0);

        let x = Multivector::basis_vector(s, 1).scale(2.0);
        let inv = vector_inverse(&x).unwrap();
        assert!((inv.coeff(0b10) + 0.5).abs() < 1e-15);

        let x = Multivector::vector(s, &[1.0, 1.0]);
        let inv = vector_inverse(&x).unwrap();
        let prod = gp(&x, &inv);
        assert!((prod.scalar_part() - 1.0).abs() < 1e-12);
        assert!(prod.off_grade_norm(0) < 1e-12);

        assert!(vector_inverse(&Multivector::zero(s)).is_err());
        assert!(vector_inverse(&Multivector::one(s)).is_err());
    }

    #[test]
    fn involutions_are_anti_homomorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=5 {
            let s = sig(dim);
            for _ in 0..50 {
                let a = random_multivector(&mut rng, s);
                let b = random_multivector(&mut rng, s);
                let ab = gp(&a, &b);
                let scale = a.norm() * b.norm() + 1.0;

                let lhs = ab.reversion();
                let rhs = gp(&b.reversion(), &a.reversion());
                assert!(lhs.sub(&rhs).norm() <= 1e-12 * scale);

                let lhs = ab.conjugation();
                let rhs = gp(&b.conjugation(), &a.conjugation());
                assert!(lhs.sub(&rhs).norm() <= 1e-12 * scale);

                assert_eq!(a.reversion().reversion(), a);
                assert_eq!(a.conjugation().conjugation(), a);
            }
        }
    }

    #[test]
    fn vector_inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for dim in 1..=6 {
            let s = sig(dim);
            for _ in 0..100 {
                let comps: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let x = Multivector::vector(s, &comps);
                if x.norm() < 1e-3 {
                    continue;
                }
                let prod = gp(&x, &vector_inverse(&x).unwrap());
                assert!((prod.scalar_part() - 1.0).abs() <= 1e-12);
                assert!(prod.off_grade_norm(0) <= 1e-12);
            }
        }
    }

    #[test]
    fn versor_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = sig(3);

        let v = random_versor(&mut rng, s, 1);
        assert!(v.value().is_grade(1, 0.0));

        let v = random_versor(&mut rng, s, 2);
        for (mask, &c) in v.value().coeffs().iter().enumerate() {
            if mask.count_ones() % 2 == 1 {
                assert_eq!(c, 0.0, "product of two vectors has only even grades");
            }
        }

        for _ in 0..50 {
            let v = random_versor(&mut rng, s, 3);
            let a = v.value();
            // Lemma 1 proof steps: conj(A) A is the positive scalar |A|^2.
            let p = gp(&a.conjugation(), a);
            assert!(p.scalar_part() > 0.0);
            assert!((p.scalar_part() - a.norm_squared()).abs() <= 1e-12 * a.norm_squared());
            assert!(p.off_grade_norm(0) <= 1e-12 * a.norm_squared());

            let inv = v.inverse();
            let id = gp(a, &inv);
            assert!((id.scalar_part() - 1.0).abs() <= 1e-12);
            assert!(id.off_grade_norm(0) <= 1e-12);
        }
    }

    #[test]
    fn norm_multiplicativity_sample() {
        // Small-scale version of the Lemma 1 acceptance suite.
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for dim in 1..=6 {
            let s = sig(dim);
            for _ in 0..200 {
                let nf = rng.gen_range(1..=4);
                let a = random_versor(&mut rng, s, nf);
                let b = random_multivector(&mut rng, s);
                let ab = gp(a.value(), &b);
                let lhs = ab.norm();
                let rhs = a.value().norm() * b.norm();
                assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
            }
        }
    }
}
