//! Quadrature over the unit tangent sphere bundle `UM`.
//!
//! Verifies the two integral statements behind the pinching equivalence: the
//! Ros-type vanishing `∫_UM (∇T)(ū, u, …, ū) dU = 0` of the diagonal
//! contraction of any covariant derivative on a compact Kaehler base, and
//! the balance of the curvature and `‖∇σ‖²` integrals obtained from it.
//!
//! The base measure is the induced Riemannian volume: `2^m det h` against
//! chart Lebesgue measure, glued over the atlas by the smooth partition of
//! unity.  The fiber carries the uniform probability measure on the unit
//! sphere of `T_{1,0}`; for `m = 1` the fiber collapses to a single phase
//! representative, which is valid precisely because every verified
//! integrand is phase-invariant — [`ros_integral`] asserts that at runtime
//! rather than assuming it.

use crate::immersion::{DiffConfig, Immersion};
use crate::linalg::{det, C64};
use crate::pinching::{nabla_t, orthonormal_basis};
use crate::submanifold::{covariant_sigma, fundamental_form};
use crate::tol::FD_STEP;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// One weighted sample of the unit tangent bundle.
#[derive(Clone, Debug)]
pub struct UMSample {
    pub chart: usize,
    pub z: Vec<C64>,
    /// Chart coefficients of a `(1,0)` tangent direction, unit in the
    /// induced metric.
    pub u: Vec<C64>,
    /// Quadrature weight absorbing the Riemannian volume of the base and
    /// the fiber probability measure.
    pub weight: f64,
}

/// A deterministic quadrature plan over `UM`.
#[derive(Clone, Debug)]
pub struct UMPlan {
    pub samples: Vec<UMSample>,
    /// Total base volume estimate (the weights sum to it).
    pub volume: f64,
    pub base_grid_density: usize,
    pub fiber_samples: usize,
    pub seed: u64,
}

/// Builds the quadrature plan: per chart, a midpoint grid over the sampling
/// polydisc weighted by partition of unity times `2^m det h`, crossed with
/// fiber directions.  Deterministic for a fixed seed.
pub fn build_um_plan(
    imm: &Immersion,
    base_grid_density: usize,
    fiber_samples: usize,
    seed: u64,
    cfg: &DiffConfig,
) -> Result<UMPlan> {
    let m = imm.m();
    if m > 2 {
        return Err(Error::InvalidParameter(
            "sphere-bundle quadrature supports base dimension at most two".into(),
        ));
    }
    if base_grid_density == 0 || (m > 1 && fiber_samples == 0) {
        return Err(Error::EmptyPlan);
    }
    if !imm.base.covers() {
        return Err(Error::NonCoveringAtlas(
            "single dense chart covers only an open subset; global integrals need a finite atlas"
                .into(),
        ));
    }
    partition_check(imm)?;

    // Tensor-product midpoint rule in per-coordinate polar variables
    // (radius × angle).  The partition bumps are radial in each coordinate,
    // so aligning the grid with them converges far faster than a Cartesian
    // grid of the same density; the angular direction is periodic, where
    // the midpoint rule is spectrally accurate.
    let radius = imm.base.domain_radius();
    let g = base_grid_density;
    let dr = radius / g as f64;
    let dt = std::f64::consts::TAU / g as f64;

    let mut tasks: Vec<(usize, Vec<C64>, f64, u64)> = Vec::new();
    for chart in 0..imm.chart_count() {
        // Slot layout: (radial, angular) index pair per complex coordinate.
        let mut idx = vec![0usize; 2 * m];
        'grid: loop {
            let mut cell = 1.0;
            let z: Vec<C64> = (0..m)
                .map(|v| {
                    let r = radius * (idx[2 * v] as f64 + 0.5) / g as f64;
                    let t = std::f64::consts::TAU * (idx[2 * v + 1] as f64 + 0.5) / g as f64;
                    cell *= dr * dt * r;
                    C64::new(r * t.cos(), r * t.sin())
                })
                .collect();
            let key = idx
                .iter()
                .fold(chart as u64 + 1, |acc, &i| acc.wrapping_mul(131).wrapping_add(i as u64));
            tasks.push((chart, z, cell, key));
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] < g {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
                if carry == 2 * m {
                    break 'grid;
                }
            }
        }
    }

    let per_point: Result<Vec<Vec<UMSample>>> = tasks
        .par_iter()
        .map(|(chart, z, cell, key)| -> Result<Vec<UMSample>> {
            let rho = imm.base.partition_weight(*chart, z);
            if rho < 1e-14 {
                return Ok(Vec::new());
            }
            let h = imm.induced_metric(*chart, z)?;
            let base_weight = rho * (1u32 << m) as f64 * det(&h).re * cell;
            let unit_norm = |u: &[C64]| -> f64 {
                let mut s = C64::new(0.0, 0.0);
                for a in 0..m {
                    for b in 0..m {
                        s += h[(a, b)] * u[a] * u[b].conj();
                    }
                }
                s.re
            };
            let mut out = Vec::new();
            if m == 1 {
                let u = vec![C64::new(1.0 / h[(0, 0)].re.sqrt(), 0.0)];
                debug_assert!((unit_norm(&u) - 1.0).abs() < 1e-10);
                out.push(UMSample {
                    chart: *chart,
                    z: z.clone(),
                    u,
                    weight: base_weight,
                });
            } else {
                let basis = orthonormal_basis(&h);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ key);
                let fw = base_weight / fiber_samples as f64;
                for _ in 0..fiber_samples {
                    // Gaussian draw in an orthonormal frame, normalized:
                    // uniform on the metric unit sphere.
                    let coeff: Vec<C64> = (0..m)
                        .map(|_| C64::new(gauss(&mut rng), gauss(&mut rng)))
                        .collect();
                    let norm: f64 = coeff.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    let mut u = vec![C64::new(0.0, 0.0); m];
                    for (l, c) in coeff.iter().enumerate() {
                        for s in 0..m {
                            u[s] += (c / norm) * basis[l][s];
                        }
                    }
                    let n = unit_norm(&u);
                    if (n - 1.0).abs() > 1e-10 {
                        return Err(Error::NotUnit(n));
                    }
                    out.push(UMSample {
                        chart: *chart,
                        z: z.clone(),
                        u,
                        weight: fw,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let samples: Vec<UMSample> = per_point?.into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let volume = samples.iter().map(|s| s.weight).sum();
    let _ = cfg;
    Ok(UMPlan {
        samples,
        volume,
        base_grid_density,
        fiber_samples,
        seed,
    })
}

/// Box–Muller normal deviate (unit variance per real component).
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Probes the partition of unity on random points: the weights of all
/// charts containing a point must sum to one.
fn partition_check(imm: &Immersion) -> Result<()> {
    let m = imm.m();
    let r = 0.8 * imm.base.domain_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(7140);
    for _ in 0..12 {
        let z: Vec<C64> = (0..m)
            .map(|_| C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r)))
            .collect();
        let mut total = 0.0;
        for chart in 0..imm.chart_count() {
            if let Some(zc) = imm.base.transition(0, &z, chart) {
                total += imm.base.partition_weight(chart, &zc);
            }
        }
        if (total - 1.0).abs() > 1e-3 {
            return Err(Error::NonCoveringAtlas(format!(
                "partition weights sum to {total:.6} at a probe point"
            )));
        }
    }
    Ok(())
}

/// A weighted-sum estimate with a delete-one jackknife standard error.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RosEstimate {
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub standard_error: f64,
    pub samples: usize,
}

impl RosEstimate {
    pub fn magnitude(&self) -> f64 {
        (self.estimate_re * self.estimate_re + self.estimate_im * self.estimate_im).sqrt()
    }
}

fn jackknife(values: &[(f64, C64)]) -> (C64, f64) {
    let n = values.len();
    let total_w: f64 = values.iter().map(|(w, _)| w).sum();
    let sum: C64 = values
        .iter()
        .fold(C64::new(0.0, 0.0), |acc, (w, g)| acc + g * *w);
    if n < 2 {
        return (sum, f64::INFINITY);
    }
    // Leave-one-out estimates rescaled to the full measure.
    let thetas: Vec<C64> = values
        .iter()
        .map(|(w, g)| (sum - g * *w) * (total_w / (total_w - w)))
        .collect();
    let mean = thetas.iter().fold(C64::new(0.0, 0.0), |a, t| a + t) / n as f64;
    let var: f64 = thetas.iter().map(|t| (t - mean).norm_sqr()).sum::<f64>() * (n as f64 - 1.0)
        / n as f64;
    (sum, var.sqrt())
}

/// Integrates a phase-invariant evaluator `g(chart, z, u)` over the plan.
/// Phase invariance is checked on five random fiber phases before any
/// weight is accumulated; accumulation runs in fixed index order.
pub fn ros_integral<F>(plan: &UMPlan, eval: F) -> Result<RosEstimate>
where
    F: Fn(usize, &[C64], &[C64]) -> Result<C64> + Sync,
{
    let first = plan.samples.first().ok_or(Error::EmptyPlan)?;
    let base = eval(first.chart, &first.z, &first.u)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0x9e3779b97f4a7c15);
    for _ in 0..5 {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let phase = C64::new(0.0, theta).exp();
        let up: Vec<C64> = first.u.iter().map(|c| c * phase).collect();
        let drift = (eval(first.chart, &first.z, &up)? - base).norm();
        if drift > 1e-8 * base.norm().max(1.0) {
            return Err(Error::PhaseVariant(drift));
        }
    }
    let values: Result<Vec<(f64, C64)>> = plan
        .samples
        .par_iter()
        .map(|s| Ok((s.weight, eval(s.chart, &s.z, &s.u)?)))
        .collect();
    let values = values?;
    let (sum, se) = jackknife(&values);
    Ok(RosEstimate {
        estimate_re: sum.re,
        estimate_im: sum.im,
        standard_error: se,
        samples: values.len(),
    })
}

/// Integrand of the Ros-type vanishing integral for the squared-`σ` tensor
/// `T`: the diagonal contraction `(∇T)(ū, u, u, ū, ū)` of its first
/// covariant derivative.
pub fn nabla_t_diagonal(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    u: &[C64],
    cfg: &DiffConfig,
) -> Result<C64> {
    let nt = nabla_t(imm, chart, z, cfg, FD_STEP)?;
    Ok(contract_nabla_t(&nt, imm.m(), u))
}

/// Contracts a `∇T` component table (row-major over `[a, i, j, k̄, l̄]`)
/// against the diagonal direction `u`.  Reality of `T` swaps the
/// holomorphic-derivative contraction into the antiholomorphic one that the
/// vanishing integral wants, hence the final conjugation.
pub(crate) fn contract_nabla_t(nt: &[C64], m: usize, u: &[C64]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for a in 0..m {
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        s += u[a]
                            * u[i]
                            * u[j]
                            * (u[k] * u[l]).conj()
                            * nt[(((a * m + i) * m + j) * m + k) * m + l];
                    }
                }
            }
        }
    }
    s.conj()
}

/// The two integrals whose sum vanishes for projectively flat members, with
/// jackknife standard errors.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BalanceReport {
    /// `(3/q) ∫ (‖σ(u,u)‖² − q‖A_{σ(u,u)}ū‖²) dU` — non-positive.
    pub curvature_term: f64,
    pub curvature_se: f64,
    /// `∫ ‖(∇σ)(u,u,u)‖² dU` — non-negative.
    pub nabla_sigma_term: f64,
    pub nabla_sigma_se: f64,
    /// `|sum|` relative to the larger term magnitude.
    pub residual: f64,
    /// A standard error exceeded 10% of its term: the plan is too sparse to
    /// certify the balance.
    pub inconclusive: bool,
    pub samples: usize,
}

/// Evaluates the integral balance between the curvature defect term and the
/// parallelism defect term over the plan.
pub fn integral_balance(imm: &Immersion, plan: &UMPlan, cfg: &DiffConfig) -> Result<BalanceReport> {
    let q = imm.q as f64;
    // Group fiber samples sharing a base point so σ and ∇σ are computed
    // once per point (the builder emits them contiguously).
    let mut groups: Vec<(usize, Vec<C64>, Vec<(usize, f64, Vec<C64>)>)> = Vec::new();
    for (i, s) in plan.samples.iter().enumerate() {
        match groups.last_mut() {
            Some((chart, z, members)) if *chart == s.chart && z == &s.z => {
                members.push((i, s.weight, s.u.clone()));
            }
            _ => groups.push((s.chart, s.z.clone(), vec![(i, s.weight, s.u.clone())])),
        }
    }
    let evaluated: Result<Vec<Vec<(usize, f64, f64, f64)>>> = groups
        .par_iter()
        .map(|(chart, z, members)| -> Result<Vec<(usize, f64, f64, f64)>> {
            let data = fundamental_form(imm, *chart, z, cfg)?;
            let cs = covariant_sigma(imm, *chart, z, cfg)?;
            members
                .iter()
                .map(|(i, w, u)| {
                    let sig = data.sigma_vec(u, u);
                    let s2 = sig.norm_sq().re;
                    let a2 = if s2 < 1e-14 {
                        0.0
                    } else {
                        data.shape_apply(&sig, u)?.norm_sq().re
                    };
                    let g1 = 3.0 / q * (s2 - q * a2);
                    let g2 = cs.contract(u, u, u).norm_sq().re;
                    Ok((*i, *w, g1, g2))
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<(usize, f64, f64, f64)> = evaluated?.into_iter().flatten().collect();
    rows.sort_by_key(|r| r.0);
    let v1: Vec<(f64, C64)> = rows.iter().map(|r| (r.1, C64::new(r.2, 0.0))).collect();
    let v2: Vec<(f64, C64)> = rows.iter().map(|r| (r.1, C64::new(r.3, 0.0))).collect();
    let (t1, se1) = jackknife(&v1);
    let (t2, se2) = jackknife(&v2);
    let curvature_term = t1.re;
    let nabla_sigma_term = t2.re;
    let scale = curvature_term.abs().max(nabla_sigma_term.abs()).max(1e-9);
    let mut inconclusive = rows.len() < 2;
    if curvature_term.abs() > 1e-8 && se1 > 0.1 * curvature_term.abs() {
        inconclusive = true;
    }
    if nabla_sigma_term.abs() > 1e-8 && se2 > 0.1 * nabla_sigma_term.abs() {
        inconclusive = true;
    }
    Ok(BalanceReport {
        curvature_term,
        curvature_se: se1,
        nabla_sigma_term,
        nabla_sigma_se: se2,
        residual: (curvature_term + nabla_sigma_term).abs() / scale,
        inconclusive,
        samples: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::testutil::skew_speed_surface;
    use crate::tol::{BALANCE_REL_TOL, VOLUME_REL_TOL};
    use std::f64::consts::PI;

    fn cfg() -> DiffConfig {
        DiffConfig::default()
    }

    #[test]
    fn plan_samples_are_unit_and_deterministic() {
        let imm = catalog::segre().unwrap();
        let a = build_um_plan(&imm, 4, 6, 99, &cfg()).unwrap();
        let b = build_um_plan(&imm, 4, 6, 99, &cfg()).unwrap();
        assert_eq!(a.samples.len(), b.samples.len());
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.z, y.z);
            assert_eq!(x.u, y.u);
            assert_eq!(x.weight, y.weight);
        }
        for s in &a.samples {
            assert!(s.weight > 0.0);
            let h = imm.induced_metric(s.chart, &s.z).unwrap();
            let mut n = C64::new(0.0, 0.0);
            for p in 0..2 {
                for r in 0..2 {
                    n += h[(p, r)] * s.u[p] * s.u[r].conj();
                }
            }
            assert!((n.re - 1.0).abs() < 1e-10 && n.im.abs() < 1e-10);
        }
        let c = build_um_plan(&imm, 4, 6, 100, &cfg()).unwrap();
        assert!(a.samples.iter().zip(&c.samples).any(|(x, y)| x.u != y.u));
    }

    #[test]
    fn volume_matches_closed_forms() {
        // Round projective line at this normalization: area 2π; the degree-d
        // rational normal curve scales it by d.  Density 30 is where the
        // partition bump's transition region is fully resolved.
        for (d, want) in [(1usize, 2.0 * PI), (3, 6.0 * PI)] {
            let imm = catalog::veronese(d).unwrap();
            let plan = build_um_plan(&imm, 30, 1, 5, &cfg()).unwrap();
            let rel = (plan.volume - want).abs() / want;
            assert!(
                rel < VOLUME_REL_TOL,
                "veronese({d}): volume {} vs {want}, rel {rel:.2e}",
                plan.volume
            );
        }
        let imm = catalog::veronese(1).unwrap();
        let coarse = build_um_plan(&imm, 30, 1, 5, &cfg()).unwrap();
        let fine = build_um_plan(&imm, 60, 1, 5, &cfg()).unwrap();
        assert!((coarse.volume - fine.volume).abs() / fine.volume < 1e-3);
    }

    #[test]
    fn product_volume_matches_closed_form() {
        // Four real dimensions: the tensor grid at this density resolves
        // the partition transition to a few tenths of a percent only.
        let imm = catalog::segre().unwrap();
        let plan = build_um_plan(&imm, 14, 1, 5, &cfg()).unwrap();
        let want = 4.0 * PI * PI;
        let rel = (plan.volume - want).abs() / want;
        assert!(rel < 1e-2, "volume {} vs {want}, rel {rel:.2e}", plan.volume);
    }

    #[test]
    fn dense_base_is_rejected() {
        let imm = skew_speed_surface();
        match build_um_plan(&imm, 5, 1, 1, &cfg()) {
            Err(Error::NonCoveringAtlas(_)) => {}
            other => panic!("expected NonCoveringAtlas, got {other:?}"),
        }
    }

    #[test]
    fn ros_vanishes_for_parallel_member() {
        // ∇T ≡ 0 pointwise, so every sample contributes numerical noise only.
        let imm = catalog::veronese(2).unwrap();
        let plan = build_um_plan(&imm, 7, 1, 3, &cfg()).unwrap();
        let est = ros_integral(&plan, |c, z, u| nabla_t_diagonal(&imm, c, z, u, &cfg())).unwrap();
        assert!(est.magnitude() < 1e-8, "estimate {:.3e}", est.magnitude());
    }

    #[test]
    fn ros_vanishes_within_error_for_non_parallel_member() {
        let imm = catalog::veronese(3).unwrap();
        let plan = build_um_plan(&imm, 9, 1, 3, &cfg()).unwrap();
        let est = ros_integral(&plan, |c, z, u| nabla_t_diagonal(&imm, c, z, u, &cfg())).unwrap();
        assert!(
            est.magnitude() <= (3.0 * est.standard_error).max(1e-7),
            "estimate {:.3e}, se {:.3e}",
            est.magnitude(),
            est.standard_error
        );
    }

    #[test]
    fn constant_tensor_derivative_is_exactly_zero() {
        let imm = catalog::veronese(2).unwrap();
        let plan = build_um_plan(&imm, 5, 1, 3, &cfg()).unwrap();
        // Central difference of a constant function: identically zero, so
        // the weighted sum is exactly zero.
        let est = ros_integral(&plan, |_, z, _| {
            let f = |_: &[C64]| C64::new(4.25, 0.0);
            let h = 1e-5;
            let mut zp = z.to_vec();
            zp[0] += C64::new(h, 0.0);
            let mut zm = z.to_vec();
            zm[0] -= C64::new(h, 0.0);
            Ok((f(&zp) - f(&zm)) / (2.0 * h))
        })
        .unwrap();
        assert_eq!(est.estimate_re, 0.0);
        assert_eq!(est.estimate_im, 0.0);
    }

    #[test]
    fn phase_variant_integrand_is_rejected() {
        let imm = catalog::veronese(2).unwrap();
        let plan = build_um_plan(&imm, 4, 1, 3, &cfg()).unwrap();
        match ros_integral(&plan, |_, _, u| Ok(u[0])) {
            Err(Error::PhaseVariant(_)) => {}
            other => panic!("expected PhaseVariant, got {other:?}"),
        }
    }

    #[test]
    fn balance_holds_for_non_parallel_members() {
        for d in [3usize, 4] {
            let imm = catalog::veronese(d).unwrap();
            let plan = build_um_plan(&imm, 9, 1, 3, &cfg()).unwrap();
            let rep = integral_balance(&imm, &plan, &cfg()).unwrap();
            assert!(rep.curvature_term < 0.0, "veronese({d}): {:.4}", rep.curvature_term);
            assert!(rep.nabla_sigma_term > 0.0, "veronese({d}): {:.4}", rep.nabla_sigma_term);
            assert!(
                rep.residual < BALANCE_REL_TOL,
                "veronese({d}): residual {:.4}",
                rep.residual
            );
            assert!(!rep.inconclusive, "veronese({d}) should be conclusive");
            assert!(rep.curvature_term.abs() > 10.0 * rep.curvature_se);
            assert!(rep.nabla_sigma_term > 10.0 * rep.nabla_sigma_se);
        }
    }

    #[test]
    fn balance_trivial_for_parallel_member() {
        let imm = catalog::veronese(2).unwrap();
        let plan = build_um_plan(&imm, 7, 1, 3, &cfg()).unwrap();
        let rep = integral_balance(&imm, &plan, &cfg()).unwrap();
        assert!(rep.curvature_term.abs() < 1e-6);
        assert!(rep.nabla_sigma_term.abs() < 1e-6);
        assert!(!rep.inconclusive);
    }

    #[test]
    fn single_sample_plan_is_inconclusive() {
        let imm = catalog::veronese(3).unwrap();
        let mut plan = build_um_plan(&imm, 5, 1, 3, &cfg()).unwrap();
        plan.samples.truncate(1);
        let rep = integral_balance(&imm, &plan, &cfg()).unwrap();
        assert!(rep.inconclusive);
    }

    #[test]
    fn estimates_stable_under_reseeding() {
        // Fiber sampling only exists for m ≥ 2; the estimates must agree
        // across seeds within their reported errors.
        let imm = catalog::segre().unwrap();
        let evaluator = |c: usize, z: &[C64], u: &[C64]| -> Result<C64> {
            let data = fundamental_form(&imm, c, z, &cfg())?;
            Ok(data.sigma_vec(u, u).norm_sq())
        };
        let mut results = Vec::new();
        for seed in [11u64, 12, 13] {
            let plan = build_um_plan(&imm, 4, 8, seed, &cfg()).unwrap();
            results.push(ros_integral(&plan, evaluator).unwrap());
        }
        for pair in results.windows(2) {
            let spread = (pair[0].estimate_re - pair[1].estimate_re).abs();
            let budget = 3.0 * (pair[0].standard_error + pair[1].standard_error);
            assert!(spread <= budget, "spread {spread:.3e} vs budget {budget:.3e}");
        }
    }
}

