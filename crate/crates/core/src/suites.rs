//! Assembles verification suites into report rows: the sphere and Euclidean
//! inequality suites, the kernel-bound suite, and the operator-identity
//! battery. Trials are parallel with per-trial seeds; results are collected
//! in index order so reports are bit-reproducible regardless of scheduling.

use crate::clifford::{gp, random_multivector, random_versor, Signature};
use crate::conformal::{ahlfors_conditions, intertwine_residual, isometry_check, MobiusMap};
use crate::error::Result;
use crate::euclidean::{
    kernel_cross_check, verify_euclidean_inequality, verify_kernel_inequality, EuclideanGrid,
    EuclideanSource,
};
use crate::kernel::{c1_cross_check, c2_identity_residual};
use crate::quad;
use crate::report::{IdentityRow, ReportRow};
use crate::sphere::{
    delta_s_apply, ds_apply, dsk_block, gamma_w_apply, sharp_constant, verify_sphere_inequality,
    w_mul_apply, SphereContext, SpectralBlock,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_SEED: u64 = 0xD1AC;

/// Tolerances for the suites; defaults are the contract values.
#[derive(Debug, Clone)]
pub struct Tolerances {
    pub lemma1: f64,
    pub identity: f64,
    pub eq1: f64,
    pub c1_cross: f64,
    pub c2_identity: f64,
    pub isometry: f64,
    pub parseval: f64,
    pub sphere_ratio: f64,
    pub sphere_extremal: f64,
    pub euclid_ratio: f64,
    pub euclid_extremal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lemma1: 1e-10,
            identity: 1e-12,
            eq1: 1e-8,
            c1_cross: 1e-5,
            c2_identity: 1e-4,
            isometry: 1e-6,
            parseval: 1e-10,
            sphere_ratio: 1e-9,
            sphere_extremal: 1e-9,
            euclid_ratio: 1e-6,
            euclid_extremal: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub band: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n_list: vec![2, 3],
            k_list: vec![1, 2, 4],
            band: 2,
            trials: 100,
            seed: DEFAULT_SEED,
            tol: Tolerances::default(),
        }
    }
}

fn trial_seed(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E3779B97F4A7C15)
}

/// Sphere-side inequality rows for every (n, k) in the config.
pub fn sphere_suite(cfg: &SuiteConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let rule = quad::quadrature_rule(n, (2 * (cfg.band + 1) + 2).min(quad::MAX_EXACTNESS))?;
        for &k in &cfg.k_list {
            let mut row = verify_sphere_inequality(k, n, cfg.trials, cfg.band, &rule, cfg.seed)?;
            row.ratio_tolerance = cfg.tol.sphere_ratio;
            row.extremal_tolerance = cfg.tol.sphere_extremal;
            row.pass = row.recompute_pass();
            rows.push(ReportRow::Sphere(row));
        }
    }
    Ok(rows)
}

/// Euclidean differential-inequality rows: one-sided random trials plus the
/// transported sharpness witness, per (n, k).
pub fn euclidean_suite(cfg: &SuiteConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let grid = EuclideanGrid::new(n, 200, (2 * (2 * cfg.band + 3)).min(quad::MAX_EXACTNESS))?;
        for &k in &cfg.k_list {
            let mut row = verify_euclidean_inequality(
                k,
                n,
                cfg.trials,
                EuclideanSource::RandomRational,
                cfg.seed,
                &grid,
            )?;
            row.ratio_tolerance = cfg.tol.euclid_ratio;
            row.extremal_tolerance = cfg.tol.euclid_extremal;
            row.pass = row.recompute_pass();
            rows.push(ReportRow::Euclid(row));

            let mut row = verify_euclidean_inequality(
                k,
                n,
                1,
                EuclideanSource::PullbackExtremal,
                cfg.seed,
                &grid,
            )?;
            row.theorem += "_extremal";
            row.ratio_tolerance = cfg.tol.euclid_ratio;
            row.extremal_tolerance = cfg.tol.euclid_extremal;
            row.pass = row.recompute_pass();
            rows.push(ReportRow::Euclid(row));
        }
    }
    Ok(rows)
}

/// Valid kernel orders for dimension n (library runtime range k <= 4).
pub fn valid_kernel_orders(n: usize) -> Vec<usize> {
    (1..=4)
        .filter(|&k| if n % 2 == 0 { k < n } else { k <= 2 })
        .collect()
}

/// Kernel-bound rows (convolution inequalities) for n in {2, 3}.
pub fn kernels_suite(cfg: &SuiteConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        if n > 3 {
            continue;
        }
        for k in valid_kernel_orders(n) {
            if !cfg.k_list.contains(&k) {
                continue;
            }
            let row = verify_kernel_inequality(k, n, cfg.trials, cfg.seed, 50.0)?;
            rows.push(ReportRow::Kernel(row));
        }
    }
    Ok(rows)
}

fn identity_row(name: &str, n: usize, k: usize, residual: f64, tol: f64, detail: String) -> ReportRow {
    ReportRow::Identity(IdentityRow {
        identity: name.to_string(),
        n,
        k,
        residual,
        tolerance: tol,
        detail,
        pass: residual <= tol,
        wall_ms: None,
    })
}

/// Norm multiplicativity over random (versor, multivector) pairs:
/// max relative deviation of |AB| from |A||B|.
pub fn lemma1_residual(pairs: usize, max_dim: usize, seed: u64) -> f64 {
    (0..pairs)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t as u64));
            let dim = rng.gen_range(1..=max_dim);
            let sig = Signature::new(dim).expect("dim in range");
            let nf = rng.gen_range(1..=4);
            let a = random_versor(&mut rng, sig, nf);
            let b = random_multivector(&mut rng, sig);
            let lhs = gp(a.value(), &b).norm();
            let rhs = a.value().norm() * b.norm();
            (lhs - rhs).abs() / rhs.max(1e-300)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Identity battery. `filter` restricts to identities whose name contains
/// the given substring.
pub fn identities_suite(cfg: &SuiteConfig, filter: Option<&str>) -> Result<Vec<ReportRow>> {
    let mut rows: Vec<ReportRow> = Vec::new();
    let wants = |name: &str| filter.map(|f| name.contains(f)).unwrap_or(true);
    let sphere_ns: Vec<usize> = cfg.n_list.iter().cloned().filter(|&n| n <= 4).collect();

    if wants("lemma1") {
        let res = lemma1_residual(cfg.trials.max(2000), 6, cfg.seed);
        rows.push(identity_row("lemma1_norm_multiplicativity", 6, 0, res, cfg.tol.lemma1, String::new()));
    }

    for &n in &sphere_ns {
        let ctx = SphereContext::new(n, cfg.band)?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, n as u64));

        if wants("gamma-anticommute") {
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let h = ctx.random_field(&mut rng, cfg.band);
                let wh = w_mul_apply(&h);
                let lhs = gamma_w_apply(&wh).add(&w_mul_apply(&gamma_w_apply(&h)));
                let rhs = wh.scale(-(n as f64));
                worst = worst.max(lhs.sub(&rhs).coeff_norm() / h.coeff_norm().max(1e-300));
            }
            rows.push(identity_row("gamma-anticommute", n, 0, worst, cfg.tol.identity, String::new()));
        }

        if wants("ds-anticommute") {
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let h = ctx.random_field(&mut rng, cfg.band);
                let lhs = ds_apply(&w_mul_apply(&h));
                let rhs = w_mul_apply(&ds_apply(&h)).scale(-1.0);
                worst = worst.max(lhs.sub(&rhs).coeff_norm() / h.coeff_norm().max(1e-300));
            }
            rows.push(identity_row("ds-anticommute", n, 1, worst, cfg.tol.identity, String::new()));
        }

        if wants("delta-s") {
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let h = ctx.random_field(&mut rng, cfg.band);
                let route1 = delta_s_apply(&h);
                let route2 = ds_apply(&ds_apply(&h).sub(&w_mul_apply(&h)));
                let nf = n as f64;
                let g = gamma_w_apply(&h);
                let lap_w = gamma_w_apply(&g).scale(-1.0).add(&g.scale(1.0 - nf));
                let route3 = lap_w.scale(-1.0).add(&h.scale(nf * (nf - 2.0) / 4.0));
                let scale = h.coeff_norm().max(1e-300);
                worst = worst
                    .max(route1.sub(&route2).coeff_norm() / scale)
                    .max(route1.sub(&route3).coeff_norm() / scale);
            }
            rows.push(identity_row("delta-s-factorization", n, 2, worst, cfg.tol.identity, String::new()));
        }

        if wants("paenitz") {
            let mut worst: f64 = 0.0;
            for m in 0..=6 {
                let p4 = dsk_block(n, 4, m);
                let d2 = dsk_block(n, 2, m);
                let shifted = SpectralBlock {
                    m,
                    s: d2.s,
                    matrix: [[d2.matrix[0][0] - 2.0, 0.0], [0.0, d2.matrix[1][1] - 2.0]],
                };
                let composed = d2.compose(&shifted);
                let mut scale: f64 = 1.0;
                for i in 0..2 {
                    for j in 0..2 {
                        scale = scale.max(p4.matrix[i][j].abs());
                    }
                }
                for i in 0..2 {
                    for j in 0..2 {
                        worst = worst.max((p4.matrix[i][j] - composed.matrix[i][j]).abs() / scale);
                    }
                }
            }
            rows.push(identity_row(
                "paenitz-factorization",
                n,
                4,
                worst,
                cfg.tol.identity,
                "dsk(4) = delta_s (delta_s - 2) per block".to_string(),
            ));
        }

        if wants("eq1") {
            let samples: Vec<Vec<f64>> = {
                let mut r = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, 1000 + n as u64));
                (0..50)
                    .map(|_| (0..n).map(|_| r.gen_range(-1.5..=1.5)).collect())
                    .collect()
            };
            let psi = ctx.random_field(&mut rng, cfg.band.min(3));
            for &k in cfg.k_list.iter().filter(|&&k| k <= 3) {
                let res = intertwine_residual(&ctx, &psi, k, &samples)?;
                rows.push(identity_row("eq1-intertwining", n, k, res, cfg.tol.eq1, String::new()));
            }
        }

        if wants("parseval") {
            let rule = quad::quadrature_rule(n, (2 * (cfg.band + 1) + 2).min(quad::MAX_EXACTNESS))?;
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let f = ctx.random_field(&mut rng, cfg.band);
                let q = ctx.l2_inner(&f, &f, &rule)?;
                let g = ctx.gram_norm_squared(&f);
                worst = worst.max((q - g).abs() / g.max(1e-300));
            }
            rows.push(identity_row("parseval-consistency", n, 0, worst, cfg.tol.parseval, String::new()));
        }

        if wants("isometry") && n <= 3 {
            let rule = quad::quadrature_rule(n, (2 * (cfg.band + 1) + 2).min(quad::MAX_EXACTNESS))?;
            let grid = EuclideanGrid::new(n, 160, (4 * cfg.band + 6).min(quad::MAX_EXACTNESS))?;
            let mut worst: f64 = 0.0;
            for _ in 0..5 {
                let psi = ctx.random_field(&mut rng, cfg.band.min(2));
                let phi = ctx.random_field(&mut rng, cfg.band.min(2));
                let (s, e) = isometry_check(&ctx, &psi, &phi, &rule, &grid)?;
                let scale = (ctx.gram_norm_squared(&psi) * ctx.gram_norm_squared(&phi)).sqrt();
                worst = worst.max((s - e).abs() / scale.max(1e-300));
            }
            rows.push(identity_row("prop1-isometry", n, 1, worst, cfg.tol.isometry, String::new()));
        }

        if wants("c1-convolution") && n <= 3 {
            let psi = ctx.random_field(&mut rng, cfg.band.min(3));
            let samples: Vec<Vec<f64>> = {
                let mut r = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, 2000 + n as u64));
                (0..8)
                    .map(|_| {
                        let mut w: Vec<f64> =
                            (0..=n).map(|_| r.gen_range(-1.0..=1.0)).collect();
                        let nr = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                        w.iter_mut().for_each(|v| *v /= nr.max(1e-9));
                        w
                    })
                    .collect()
            };
            let err = c1_cross_check(&ctx, &psi, &samples, 48)?;
            rows.push(identity_row(
                "c1-convolution-cross-check",
                n,
                1,
                err,
                cfg.tol.c1_cross,
                String::new(),
            ));
        }

        if wants("c2-identity") && n >= 3 {
            let mut r = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, 3000 + n as u64));
            let mut y: Vec<f64> = (0..=n).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let nr = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            y.iter_mut().for_each(|v| *v /= nr);
            let samples: Vec<Vec<f64>> = (0..12)
                .map(|_| {
                    let mut w: Vec<f64> = (0..=n).map(|_| r.gen_range(-1.0..=1.0)).collect();
                    let nr = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    w.iter_mut().for_each(|v| *v /= nr);
                    w
                })
                .filter(|w| {
                    w.iter()
                        .zip(&y)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                        > 0.5
                })
                .collect();
            let (res, conv) = c2_identity_residual(n, &y, &samples)?;
            rows.push(identity_row(
                "c2-two-point-identity",
                n,
                2,
                res,
                cfg.tol.c2_identity,
                format!("convention-dependent; matched {conv}"),
            ));
        }

        if wants("gk-convolution") && n <= 3 {
            let psi = ctx.random_field(&mut rng, cfg.band.min(2));
            let samples: Vec<Vec<f64>> = {
                let mut r = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, 4000 + n as u64));
                (0..4)
                    .map(|_| (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect())
                    .collect()
            };
            let (err, est) = kernel_cross_check(&ctx, &psi, 1, &samples, 240.0, 10)?;
            rows.push(identity_row(
                "gk-convolution-cross-check",
                n,
                1,
                err,
                1e-3,
                format!("refinement estimate {est:.2e}"),
            ));
        }
    }

    if wants("ahlfors") {
        for &n in &sphere_ns {
            let rep = ahlfors_conditions(&MobiusMap::cayley(n)?);
            let ok = rep.valid;
            rows.push(identity_row(
                "ahlfors-cayley",
                n,
                0,
                if ok { 0.0 } else { 1.0 },
                0.5,
                format!(
                    "(i) {} (ii) {} (iii) verbatim a d~ - c c~ = {:.6} [{}], variant a d~ - b c~ = {:.6} [{}]",
                    rep.entries_versor_or_zero,
                    rep.products_grade_one,
                    rep.pseudo_det_verbatim,
                    rep.verbatim_nonzero_scalar,
                    rep.pseudo_det_variant,
                    rep.variant_nonzero_scalar,
                ),
            ));
        }
    }

    if wants("lemma2") {
        // Closed-form products of the minimal eigenvalues as the oracle.
        let mut worst: f64 = 0.0;
        for k in 1..=6usize {
            for n in 2..=6usize {
                let got = sharp_constant(k, n);
                let expect = lemma2_closed_form(k, n);
                worst = worst.max((got - expect).abs() / expect.max(1.0));
            }
        }
        rows.push(identity_row("lemma2-closed-forms", 6, 6, worst, cfg.tol.identity, String::new()));
    }

    Ok(rows)
}

/// |n (2-n) (n+2)(4-n) ... | / 2^k (k even) or
/// |n (n+2)(2-n) ... | / 2^k (k odd): the closed-form minimal eigenvalue
/// magnitude of D_S^{(k)}.
pub fn lemma2_closed_form(k: usize, n: usize) -> f64 {
    let nf = n as f64;
    let mut prod = if k % 2 == 1 { nf } else { 1.0 };
    let pairs = if k % 2 == 1 { (k - 1) / 2 } else { k / 2 };
    for j in 1..=pairs {
        let jf = j as f64;
        if k % 2 == 1 {
            prod *= (nf + 2.0 * jf) * (2.0 * jf - nf);
        } else {
            prod *= (nf + 2.0 * jf - 2.0) * (2.0 * jf - nf);
        }
    }
    prod.abs() / 2f64.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_battery() {
        let res = lemma1_residual(2000, 6, DEFAULT_SEED);
        assert!(res <= 1e-10, "worst residual {res:.2e}");
    }

    #[test]
    fn identity_battery_small() {
        let cfg = SuiteConfig {
            n_list: vec![2],
            k_list: vec![1, 2],
            band: 2,
            trials: 200,
            seed: DEFAULT_SEED,
            tol: Tolerances::default(),
        };
        let rows = identities_suite(&cfg, None).unwrap();
        assert!(!rows.is_empty());
        for row in &rows {
            assert!(row.pass(), "failing identity row: {row:?}");
        }
    }

    #[test]
    fn sphere_suite_small() {
        let cfg = SuiteConfig {
            n_list: vec![2],
            k_list: vec![1, 2],
            band: 2,
            trials: 50,
            seed: DEFAULT_SEED,
            tol: Tolerances::default(),
        };
        let rows = sphere_suite(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for row in rows {
            assert!(row.pass());
        }
    }
}
