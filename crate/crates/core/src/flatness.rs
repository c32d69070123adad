//! Projective-flatness diagnostics for the pulled-back quotient bundle.
//!
//! A holomorphic isometric immersion pulls the quotient bundle `Q` back to
//! the base; its curvature in the directions `u, v̄` is the `q x q` operator
//! `R(u, v̄) = U V^H` built from the pushforwards.  The bundle is
//! projectively flat when this operator is the scalar `h(u, v)/q` times the
//! identity at every point and pair of directions.  This module measures the
//! worst-case deviation over a sampling plan, together with two consequences
//! of flatness that the rest of the crate leans on: the ambient holomorphic
//! sectional curvature of pushforwards pins to `2/q`, and the composition
//! `H_{σ(u,u)} ∘ K_{ū}` of the bundle-valued forms vanishes.

use crate::grassmann::{curvature_q, hol_sectional};
use crate::immersion::{DiffConfig, Immersion};
use crate::linalg::{hermitian_spectral_norm, CMat, C64};
use crate::submanifold::fundamental_form;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Deterministic sampling plan over the atlas: every chart receives
/// `points_per_chart` pseudo-random points, each with
/// `directions_per_point` pseudo-random direction pairs, all derived from
/// `seed`.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplePlan {
    pub points_per_chart: usize,
    pub directions_per_point: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            points_per_chart: 8,
            directions_per_point: 4,
            seed: 20240901,
        }
    }
}

impl SamplePlan {
    /// The chart points of the plan for one chart, inside a polydisc that
    /// stays well within the chart domain.
    pub fn chart_points(&self, imm: &Immersion, chart: usize) -> Vec<Vec<C64>> {
        let m = imm.m();
        let radius = 0.6 * imm.base.domain_radius().min(1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ ((chart as u64 + 1) << 32));
        (0..self.points_per_chart)
            .map(|_| {
                (0..m)
                    .map(|_| C64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius)))
                    .collect()
            })
            .collect()
    }

    /// Direction pairs for one sampled point, as raw chart coefficients.
    pub fn direction_pairs(&self, m: usize, chart: usize, point_idx: usize) -> Vec<(Vec<C64>, Vec<C64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed ^ ((chart as u64 + 1) << 16) ^ ((point_idx as u64 + 1) << 40),
        );
        let draw = |rng: &mut ChaCha8Rng| -> Vec<C64> {
            (0..m)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        (0..self.directions_per_point)
            .map(|_| (draw(&mut rng), draw(&mut rng)))
            .collect()
    }
}

/// Report of the projective-flatness check for one immersion.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlatnessReport {
    pub member: String,
    pub q: usize,
    /// Number of (point, direction-pair) samples inspected.
    pub samples: usize,
    /// Tolerance gate under which the bundle counts as projectively flat.
    pub gate: f64,
    /// Worst deviation `‖R(u, v̄) − (h(u,v)/q) Id‖` over the plan.
    pub max_residual: f64,
    pub flat: bool,
    /// The scalar curvature coefficient for unit directions, `1/q`.
    pub alpha_unit: f64,
    /// `p ≥ q` must hold whenever the bundle is flat; vacuously true
    /// otherwise.
    pub rank_check_passed: bool,
    /// Worst defect of `trace R(u, v̄) = h(u, v)` (holds unconditionally).
    pub trace_defect_max: f64,
    /// Worst deviation of the ambient holomorphic sectional curvature of
    /// unit pushforwards from `2/q`; `None` when the flatness gate failed
    /// and the check is skipped.
    pub ambient_hol_deviation: Option<f64>,
    /// Worst spectral norm of `H_{σ(u,u)} ∘ K_{ū}` over unit directions;
    /// vanishes for flat members even when `σ` does not.
    pub sigma_k_composition_max: f64,
}

/// Curvature of the pulled-back quotient bundle at a chart point in the
/// directions `(u, v̄)`, as a `q x q` operator.
pub fn pullback_q_curvature(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    u: &[C64],
    v: &[C64],
    cfg: &DiffConfig,
) -> Result<CMat> {
    let frame = imm.frame_data(chart, z, cfg)?;
    let fu = frame.pushforward(u)?;
    let fv = frame.pushforward(v)?;
    curvature_q(&fu, &fv)
}

/// `‖R(u, v̄) − (h(u, v)/q) Id‖` at one point and direction pair.
pub fn flatness_residual_at(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    u: &[C64],
    v: &[C64],
    cfg: &DiffConfig,
) -> Result<f64> {
    let frame = imm.frame_data(chart, z, cfg)?;
    let fu = frame.pushforward(u)?;
    let fv = frame.pushforward(v)?;
    let r = curvature_q(&fu, &fv)?;
    let h_uv = fu.metric(&fv)?;
    let q = imm.q;
    let scalar = CMat::identity(q).scale(h_uv / q as f64);
    Ok(r.sub(&scalar).fnorm())
}

/// Spectral norm of a general matrix, `sqrt` of the largest eigenvalue of
/// `A^H A`.
fn spectral_norm(a: &CMat) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    Ok(hermitian_spectral_norm(&a.adjoint().mul(a))?.sqrt())
}

/// Runs the full flatness battery over a sampling plan.
pub fn flatness_report(
    imm: &Immersion,
    plan: &SamplePlan,
    cfg: &DiffConfig,
    gate: f64,
) -> Result<FlatnessReport> {
    if plan.points_per_chart == 0 || plan.directions_per_point == 0 {
        return Err(Error::EmptyPlan);
    }
    let q = imm.q;
    let m = imm.m();
    struct PointStats {
        max_residual: f64,
        trace_defect: f64,
        hol_deviation: f64,
        composition: f64,
    }
    let mut tasks: Vec<(usize, Vec<C64>, usize)> = Vec::new();
    for chart in 0..imm.chart_count() {
        for (idx, z) in plan.chart_points(imm, chart).into_iter().enumerate() {
            tasks.push((chart, z, idx));
        }
    }
    let stats: Result<Vec<PointStats>> = tasks
        .par_iter()
        .map(|(chart, z, idx)| -> Result<PointStats> {
            let data = fundamental_form(imm, *chart, z, cfg)?;
            let mut st = PointStats {
                max_residual: 0.0,
                trace_defect: 0.0,
                hol_deviation: 0.0,
                composition: 0.0,
            };
            for (u, v) in plan.direction_pairs(m, *chart, *idx) {
                let fu = data.frame.pushforward(&u)?;
                let fv = data.frame.pushforward(&v)?;
                let r = curvature_q(&fu, &fv)?;
                let h_uv = fu.metric(&fv)?;
                st.max_residual = st
                    .max_residual
                    .max(r.sub(&CMat::identity(q).scale(h_uv / q as f64)).fnorm());
                st.trace_defect = st.trace_defect.max((r.trace() - h_uv).norm());
                // Unit-normalized direction for the scalar checks.
                let nsq = data.metric_norm_sq(&u);
                if nsq > 1e-12 {
                    let un: Vec<C64> = u.iter().map(|c| c / nsq.sqrt()).collect();
                    let fun = data.frame.pushforward(&un)?;
                    st.hol_deviation = st
                        .hol_deviation
                        .max((hol_sectional(&fun.normalized()?)? - 2.0 / q as f64).abs());
                    let sig = data.sigma_vec(&un, &un);
                    let comp = sig.mul(&fun.mat().adjoint());
                    st.composition = st.composition.max(spectral_norm(&comp)?);
                }
            }
            Ok(st)
        })
        .collect();
    let stats = stats?;
    let samples = stats.len() * plan.directions_per_point;
    let max_residual = stats.iter().map(|s| s.max_residual).fold(0.0, f64::max);
    let trace_defect_max = stats.iter().map(|s| s.trace_defect).fold(0.0, f64::max);
    let hol_dev = stats.iter().map(|s| s.hol_deviation).fold(0.0, f64::max);
    let sigma_k_composition_max = stats.iter().map(|s| s.composition).fold(0.0, f64::max);
    let flat = max_residual < gate;
    Ok(FlatnessReport {
        member: imm.name.clone(),
        q,
        samples,
        gate,
        max_residual,
        flat,
        alpha_unit: 1.0 / q as f64,
        rank_check_passed: !flat || imm.p >= q,
        trace_defect_max,
        ambient_hol_deviation: if flat { Some(hol_dev) } else { None },
        sigma_k_composition_max,
    })
}

/// Default flatness gate.
pub const FLATNESS_GATE: f64 = 1e-6;
