//! Moebius machinery: Ahlfors-Vahlen conditions, the Cayley transform
//! between R^n and S^n, conformal weights J_k, the intertwining relation
//! between D^k and D_S^{(k)}, Jacobians, and the L2 isometry between the
//! sphere and weighted Euclidean space.

use crate::clifford::{gp, Multivector, Signature};
use crate::error::{Error, Result};
use crate::euclidean::{EuclideanGrid, Poly, RationalField};
use crate::quad::QuadratureRule;
use crate::sphere::{dsk_apply, SphereContext, SphericalField};

/// y = (a x + b)(c x + d)^{-1} with Clifford entries.
#[derive(Clone)]
pub struct MobiusMap {
    pub a: Multivector,
    pub b: Multivector,
    pub c: Multivector,
    pub d: Multivector,
}

impl MobiusMap {
    pub fn identity(sig: Signature) -> Self {
        MobiusMap {
            a: Multivector::one(sig),
            b: Multivector::zero(sig),
            c: Multivector::zero(sig),
            d: Multivector::one(sig),
        }
    }

    pub fn translation(sig: Signature, t: &[f64]) -> Self {
        MobiusMap {
            a: Multivector::one(sig),
            b: Multivector::vector(sig, t),
            c: Multivector::zero(sig),
            d: Multivector::one(sig),
        }
    }

    /// The Cayley quadruple (e_{n+1}, 1, 1, e_{n+1}) in Cl_{n+1}.
    pub fn cayley(n: usize) -> Result<Self> {
        let sig = Signature::new(n + 1)?;
        Ok(MobiusMap {
            a: Multivector::basis_vector(sig, n),
            b: Multivector::one(sig),
            c: Multivector::one(sig),
            d: Multivector::basis_vector(sig, n),
        })
    }

    pub fn signature(&self) -> Signature {
        self.a.signature()
    }
}

/// Inverse of a versor-like element via conjugation; errors when conj(A) A
/// is not a positive scalar.
fn versor_inverse(a: &Multivector) -> Result<Multivector> {
    let p = gp(&a.conjugation(), a);
    let n2 = p.scalar_part();
    if n2.abs() < 1e-24 {
        return Err(Error::MobiusPole);
    }
    if p.off_grade_norm(0) > 1e-10 * n2.abs() {
        return Err(Error::NotInvertible(
            "conj(A) A is not scalar".to_string(),
        ));
    }
    Ok(a.conjugation().scale(1.0 / n2))
}

/// Applies the map to x in R^n (embedded in the first n generators);
/// returns the grade-1 image (projected, with the off-grade residue
/// checked at 1e-10).
pub fn apply_mobius(map: &MobiusMap, x: &[f64]) -> Result<Vec<f64>> {
    let sig = map.signature();
    let xv = Multivector::vector(sig, x);
    let num = gp(&map.a, &xv).add(&map.b);
    let den = gp(&map.c, &xv).add(&map.d);
    if den.norm() < 1e-12 {
        return Err(Error::MobiusPole);
    }
    let out = gp(&num, &versor_inverse(&den)?);
    if out.off_grade_norm(1) > 1e-10 * (1.0 + out.norm()) {
        return Err(Error::NotInvertible(
            "Moebius image is not grade-1".to_string(),
        ));
    }
    Ok(out.vector_part())
}

/// Cayley transform C(x) = (e_{n+1} x + 1)(x + e_{n+1})^{-1}, landing on
/// S^n; x has n components, the image n+1.
pub fn cayley(n: usize, x: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(x.len(), n);
    apply_mobius(&MobiusMap::cayley(n)?, x)
}

/// Closed form of the Cayley image: (-2x, |x|^2 - 1) / (1 + |x|^2).
pub fn cayley_closed(n: usize, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), n);
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let mut w: Vec<f64> = x.iter().map(|v| -2.0 * v / (1.0 + r2)).collect();
    w.push((r2 - 1.0) / (1.0 + r2));
    w
}

/// Inverse Cayley transform, undefined at the north pole e_{n+1}.
/// For unit w, 1 - w_{n+1} = |w - e_{n+1}|^2 / 2; that form avoids the
/// catastrophic cancellation near the pole.
pub fn cayley_inverse(n: usize, w: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(w.len(), n + 1);
    let tangent_sq: f64 = w[..n].iter().map(|v| v * v).sum();
    let denom = 0.5 * (tangent_sq + (1.0 - w[n]) * (1.0 - w[n]));
    if denom.abs() < 1e-12 {
        return Err(Error::NorthPole);
    }
    Ok(w[..n].iter().map(|v| -v / denom).collect())
}

/// Outcome of the three Ahlfors conditions for a quadruple, with condition
/// (iii) evaluated both verbatim (a d~ - c c~) and in the common variant
/// reading (a d~ - b c~); the validity verdict uses the verbatim form.
#[derive(Debug, Clone)]
pub struct AhlforsReport {
    /// (i): every entry is a versor or zero.
    pub entries_versor_or_zero: bool,
    /// (ii): a c~, c~ d, d~ b, b~ a are grade-1 in the ambient space.
    pub products_grade_one: bool,
    /// (iii) verbatim: scalar part and pass flag of a d~ - c c~.
    pub pseudo_det_verbatim: f64,
    pub verbatim_nonzero_scalar: bool,
    /// (iii) variant: scalar part and pass flag of a d~ - b c~.
    pub pseudo_det_variant: f64,
    pub variant_nonzero_scalar: bool,
    pub valid: bool,
}

fn is_versor_or_zero(a: &Multivector) -> bool {
    if a.is_zero(0.0) {
        return true;
    }
    // Necessary versor certificates: pure parity and conj(A) A = |A|^2.
    let even: f64 = a
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(m, _)| m.count_ones() % 2 == 0)
        .map(|(_, c)| c * c)
        .sum();
    let odd = a.norm_squared() - even;
    let pure_parity = even <= 1e-20 * a.norm_squared() || odd <= 1e-20 * a.norm_squared();
    let p = gp(&a.conjugation(), a);
    let scalar_ok = p.off_grade_norm(0) <= 1e-10 * a.norm_squared()
        && (p.scalar_part() - a.norm_squared()).abs() <= 1e-10 * a.norm_squared();
    pure_parity && scalar_ok
}

pub fn ahlfors_conditions(map: &MobiusMap) -> AhlforsReport {
    let entries = [&map.a, &map.b, &map.c, &map.d];
    let entries_versor_or_zero = entries.iter().all(|e| is_versor_or_zero(e));

    let prods = [
        gp(&map.a, &map.c.reversion()),
        gp(&map.c.reversion(), &map.d),
        gp(&map.d.reversion(), &map.b),
        gp(&map.b.reversion(), &map.a),
    ];
    let products_grade_one = prods
        .iter()
        .all(|p| p.is_zero(0.0) || p.off_grade_norm(1) <= 1e-12 * (1.0 + p.norm()));

    let verbatim = gp(&map.a, &map.d.reversion()).sub(&gp(&map.c, &map.c.reversion()));
    let variant = gp(&map.a, &map.d.reversion()).sub(&gp(&map.b, &map.c.reversion()));
    let scalar_nonzero = |m: &Multivector| {
        m.off_grade_norm(0) <= 1e-12 * (1.0 + m.norm()) && m.scalar_part().abs() > 1e-12
    };
    let verbatim_ok = scalar_nonzero(&verbatim);
    let variant_ok = scalar_nonzero(&variant);

    AhlforsReport {
        entries_versor_or_zero,
        products_grade_one,
        pseudo_det_verbatim: verbatim.scalar_part(),
        verbatim_nonzero_scalar: verbatim_ok,
        pseudo_det_variant: variant.scalar_part(),
        variant_nonzero_scalar: variant_ok,
        valid: entries_versor_or_zero && products_grade_one && verbatim_ok,
    }
}

/// Conformal weight J_k(C, x): for odd k the versor
/// 2^{(n-k)/2} (x + e_{n+1}) / (1+|x|^2)^{(n-k+1)/2}, for even k the scalar
/// 2^{(n-k)/2} / (1+|x|^2)^{(n-k)/2}. Negative odd indices carry an extra
/// sign (the vector enters through conjugation rather than reversion);
/// this is the reading under which the intertwining residual vanishes.
pub fn jk_weight(n: usize, k: i32, x: &[f64]) -> Result<Multivector> {
    assert_eq!(x.len(), n);
    let sig = Signature::new(n + 1)?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let nf = n as f64;
    let kf = k as f64;
    let scale = 2f64.powf((nf - kf) / 2.0);
    if k.rem_euclid(2) == 1 {
        let mut comps = x.to_vec();
        comps.push(1.0);
        let v = Multivector::vector(sig, &comps);
        let sign = if k < 0 { -1.0 } else { 1.0 };
        Ok(v.scale(sign * scale * (1.0 + r2).powf(-(nf - kf + 1.0) / 2.0)))
    } else {
        Ok(Multivector::scalar(
            sig,
            scale * (1.0 + r2).powf(-(nf - kf) / 2.0),
        ))
    }
}

/// Jacobian of a Moebius map: 2^n / |c x + d|^{2n}.
pub fn jacobian(map: &MobiusMap, n: usize, x: &[f64]) -> f64 {
    let sig = map.signature();
    let xv = Multivector::vector(sig, x);
    let den = gp(&map.c, &xv).add(&map.d);
    2f64.powi(n as i32) / den.norm_squared().powi(n as i32)
}

/// The Cayley numerator u(x) = -2x + (|x|^2 - 1) e_{n+1} as a grade-1
/// polynomial: C(x) = u(x) / (1 + |x|^2).
fn cayley_numerator(n: usize, sig: Signature) -> Poly {
    let mut u = Poly::zero(n, sig);
    for j in 0..n {
        let mut alpha = vec![0u8; n];
        alpha[j] = 1;
        u = u.add(&Poly::monomial(
            n,
            sig,
            alpha,
            Multivector::basis_vector(sig, j).scale(-2.0),
        ));
    }
    let en1 = Multivector::basis_vector(sig, n);
    u = u.add(&Poly::constant(n, sig, en1.scale(-1.0)));
    for j in 0..n {
        let mut alpha = vec![0u8; n];
        alpha[j] = 2;
        u = u.add(&Poly::monomial(n, sig, alpha, en1.clone()));
    }
    u
}

/// Composes a homogeneous polynomial with the Cayley numerator:
/// p(u(x)), a polynomial of degree 2 deg(p).
fn compose_with_cayley(
    p: &crate::polyspace::MvPolynomial,
    n: usize,
    sig: Signature,
) -> Poly {
    let u = cayley_numerator(n, sig);
    // scalar component polynomials of u
    let mut u_comp: Vec<Poly> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut q = Poly::zero(n, sig);
        for (alpha, c) in u.terms_iter() {
            let cj = c.coeff(1 << j);
            if cj != 0.0 {
                q = q.add(&Poly::monomial(
                    n,
                    sig,
                    alpha.clone(),
                    Multivector::scalar(sig, cj),
                ));
            }
        }
        u_comp.push(q);
    }
    let mut out = Poly::zero(n, sig);
    for (alpha, coeff) in p.terms() {
        let mut mono = Poly::constant(n, sig, Multivector::one(sig));
        for (j, &aj) in alpha.iter().enumerate() {
            for _ in 0..aj {
                mono = mono.mul(&u_comp[j]);
            }
        }
        out = out.add(&mono.mul(&Poly::constant(n, sig, coeff.clone())));
    }
    out
}

/// phi(x) = J_k(C, x) psi(C(x)) as an exact member of the rational class:
/// composing a band-limited field with C(x) and multiplying by the weight
/// stays inside polynomial x (1+|x|^2)^{-s/2}.
pub fn pullback(ctx: &SphereContext, psi: &SphericalField, k: i32) -> Result<RationalField> {
    let n = ctx.n();
    let sig = ctx.signature();
    let combined = ctx.combine(psi);
    let u = cayley_numerator(n, sig);

    // J_k = scale * W(x) * (1+r^2)^{-s_j/2}
    let (j_poly, s_j) = if k.rem_euclid(2) == 1 {
        let mut comps_poly = Poly::vector_x(n, sig);
        comps_poly = comps_poly.add(&Poly::constant(
            n,
            sig,
            Multivector::basis_vector(sig, n),
        ));
        let sign = if k < 0 { -1.0 } else { 1.0 };
        (
            comps_poly.scale(sign * 2f64.powf((n as f64 - k as f64) / 2.0)),
            n as i32 - k + 1,
        )
    } else {
        (
            Poly::constant(
                n,
                sig,
                Multivector::scalar(sig, 2f64.powf((n as f64 - k as f64) / 2.0)),
            ),
            n as i32 - k,
        )
    };

    let mut out = RationalField::new(n)?;
    for (m, (pa, pb)) in combined.per_degree().iter().enumerate() {
        if !pa.is_zero() {
            let composed = compose_with_cayley(pa, n, sig);
            out.push(j_poly.mul(&composed), s_j + 2 * m as i32);
        }
        if !pb.is_zero() {
            let composed = compose_with_cayley(pb, n, sig);
            out.push(j_poly.mul(&u.mul(&composed)), s_j + 2 * (m as i32 + 1));
        }
    }
    Ok(out)
}

/// Max over samples of the intertwining residual
/// | D^k[J_k psi o C](x) - J_{-k}(C,x) (D_S^{(k)} psi)(C(x)) |,
/// normalized by the largest right-hand side magnitude.
pub fn intertwine_residual(
    ctx: &SphereContext,
    psi: &SphericalField,
    k: usize,
    samples: &[Vec<f64>],
) -> Result<f64> {
    let n = ctx.n();
    let phi = pullback(ctx, psi, k as i32)?;
    let dk_phi = crate::euclidean::d_power_apply(&phi, k);
    let image = dsk_apply(psi, k);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1e-300;
    let mut diffs = Vec::with_capacity(samples.len());
    for x in samples {
        let lhs = dk_phi.evaluate(x);
        let w = cayley_closed(n, x);
        let rhs = gp(&jk_weight(n, -(k as i32), x)?, &ctx.evaluate(&image, &w));
        scale = scale.max(rhs.norm());
        diffs.push(lhs.sub(&rhs).norm());
    }
    for d in diffs {
        worst = worst.max(d / scale);
    }
    Ok(worst)
}

/// The L2 isometry transport: psi'(x) = sqrt(2) (1+|x|^2)^{-1/2} J_1 psi(C(x)).
/// The sqrt(2) normalization makes the map an exact isometry (the weight
/// squared times the density equals the Cayley Jacobian).
pub fn isometry_transport(ctx: &SphereContext, psi: &SphericalField) -> Result<RationalField> {
    Ok(pullback(ctx, psi, 1)?.shift_power(-1).scale(2f64.sqrt()))
}

/// Both sides of the isometry: the sphere inner product by quadrature and
/// the Euclidean inner product of the transported pair.
pub fn isometry_check(
    ctx: &SphereContext,
    psi: &SphericalField,
    phi: &SphericalField,
    rule: &QuadratureRule,
    grid: &EuclideanGrid,
) -> Result<(f64, f64)> {
    let sphere = ctx.l2_inner(phi, psi, rule)?;
    let psi_t = isometry_transport(ctx, psi)?;
    let phi_t = isometry_transport(ctx, phi)?;
    let euclid = crate::euclidean::weighted_inner(&phi_t, &psi_t, 0, grid)?;
    Ok((sphere, euclid))
}
