//! Run configuration, the ambient identity battery, structured verification
//! reports, and their JSON/CSV/text renderings.
//!
//! A report is the artifact of record for one tool invocation: it echoes the
//! complete configuration, carries one section per pipeline stage, and
//! reduces to an overall status whose exit code the binary propagates.
//! Reports are byte-stable for a fixed `(config, seed, toolVersion)`.

use crate::flatness::{FlatnessReport, SamplePlan, FLATNESS_GATE};
use crate::grassmann::{
    curvature_gr, curvature_q, curvature_s, hol_sectional, AmbientTangent, GrassmannPoint,
};
use crate::immersion::{DiffConfig, DiffMode, Immersion};
use crate::integrate::{
    build_um_plan, contract_nabla_t, integral_balance, ros_integral, BalanceReport, RosEstimate,
    UMPlan,
};
use crate::jet::{mat_lift, mat_pd, mat_pd2, mat_val, Jet};
use crate::linalg::{complete_frame_seeded, orthonormalize, random_gaussian, CMat, Mat, C64};
use crate::pinching::{
    nabla_t, theorem_verdict, HolSample, PinchingVerdict, SearchPlan, VerdictConfig,
    VerdictOutcome,
};
use crate::submanifold::{
    covariant_sigma, fundamental_form, gauss_equation_residual, hol_m, ricci_equation_residual,
};
use crate::tol::{
    ALGEBRAIC_TOL, BALANCE_REL_TOL, CHAIN_SLACK, CURVATURE_TOL, DERIVATIVE_TOL, FD_STEP,
    FIRST_ORDER_TOL, PARALLEL_TOL, PINCH_TOL, RICCI_TOL, VOLUME_REL_TOL,
};
use crate::{catalog, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Schema version stamped into every report.
pub const SCHEMA_VERSION: u32 = 1;

/// Tool version stamped into every report.
pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Differentiation backend selection, as spelled in configuration files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DiffSettings {
    /// `jets` (exact forward-mode) or `central` (finite differences on
    /// orthonormalized frames).
    #[serde(default = "default_diff_mode")]
    pub mode: String,
    /// Step for the finite-difference backend.
    #[serde(default = "default_diff_step")]
    pub step: f64,
}

fn default_diff_mode() -> String {
    "jets".to_string()
}

fn default_diff_step() -> f64 {
    1e-4
}

impl Default for DiffSettings {
    fn default() -> Self {
        DiffSettings {
            mode: default_diff_mode(),
            step: default_diff_step(),
        }
    }
}

impl DiffSettings {
    pub fn to_diff_config(&self) -> Result<DiffConfig> {
        let mode = match self.mode.as_str() {
            "jets" => DiffMode::Jets,
            "central" => DiffMode::CentralDifferences,
            other => {
                return Err(Error::MalformedConfig(format!(
                    "unknown differentiation mode `{other}` (expected `jets` or `central`)"
                )))
            }
        };
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::MalformedConfig(format!(
                "differentiation step must be positive, got {}",
                self.step
            )));
        }
        Ok(DiffConfig {
            mode,
            step: self.step,
        })
    }
}

/// Tolerance gates a run is measured against.  Every value must be positive.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Tolerances {
    /// Projective-flatness residual gate.
    #[serde(default = "default_flat_gate")]
    pub flat_gate: f64,
    /// Slack allowed below the pinching threshold `1/q`.
    #[serde(default = "default_pinch_tol")]
    pub pinch_tol: f64,
    /// Gate on `max ‖∇σ(u,u,u)‖` for the parallel flag.
    #[serde(default = "default_parallel_tol")]
    pub parallel_tol: f64,
    /// Relative residual gate for the integral balance.
    #[serde(default = "default_balance_tol")]
    pub balance_tol: f64,
}

fn default_flat_gate() -> f64 {
    FLATNESS_GATE
}

fn default_pinch_tol() -> f64 {
    PINCH_TOL
}

fn default_parallel_tol() -> f64 {
    PARALLEL_TOL
}

fn default_balance_tol() -> f64 {
    BALANCE_REL_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            flat_gate: default_flat_gate(),
            pinch_tol: default_pinch_tol(),
            parallel_tol: default_parallel_tol(),
            balance_tol: default_balance_tol(),
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let named = [
            ("flatGate", self.flat_gate),
            ("pinchTol", self.pinch_tol),
            ("parallelTol", self.parallel_tol),
            ("balanceTol", self.balance_tol),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::MalformedConfig(format!(
                    "tolerance `{name}` must be positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Complete description of one tool invocation.  Unknown keys are rejected
/// so that a report always reproduces the run that made it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    /// One of `verify`, `identities`, `catalog`, `integrate`.
    pub command: String,
    /// Catalog descriptor (`name[:params]`), path to an immersion JSON file,
    /// or `gr:n=N,p=P` for the ambient identity battery.
    #[serde(default)]
    pub immersion: Option<String>,
    /// Grid resolution per real axis for the curvature minimization.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Base grid density per real axis for the sphere-bundle sample plan;
    /// unset picks a dimension-appropriate default.
    #[serde(default)]
    pub integration_grid: Option<usize>,
    /// Fiber directions per base point (minimization and quadrature).
    #[serde(default = "default_fiber")]
    pub fiber_samples: usize,
    /// Random draws for the ambient identity battery.
    #[serde(default = "default_identity_samples")]
    pub identity_samples: usize,
    #[serde(default)]
    pub diff: DiffSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Path the JSON report is written to, in addition to stdout output.
    #[serde(default)]
    pub out: Option<String>,
    /// Path for CSV sample export.
    #[serde(default)]
    pub csv: Option<String>,
    /// Stdout rendering: `json`, `csv`, or `text`.
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_grid() -> usize {
    7
}

fn default_fiber() -> usize {
    16
}

fn default_identity_samples() -> usize {
    100
}

fn default_seed() -> u64 {
    20240901
}

fn default_format() -> String {
    "text".to_string()
}

impl RunConfig {
    /// Fresh configuration with every field at its default.
    pub fn new(command: &str) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            immersion: None,
            grid: default_grid(),
            integration_grid: None,
            fiber_samples: default_fiber(),
            identity_samples: default_identity_samples(),
            diff: DiffSettings::default(),
            tolerances: Tolerances::default(),
            seed: default_seed(),
            out: None,
            csv: None,
            format: default_format(),
        }
    }

    /// Parses and validates a configuration file.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::MalformedConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match self.command.as_str() {
            "verify" | "identities" | "catalog" | "integrate" => {}
            other => {
                return Err(Error::MalformedConfig(format!(
                    "unknown command `{other}`"
                )))
            }
        }
        if self.grid < 2 {
            return Err(Error::MalformedConfig(format!(
                "search grid must have at least 2 nodes per axis, got {}",
                self.grid
            )));
        }
        if let Some(g) = self.integration_grid {
            if g == 0 {
                return Err(Error::MalformedConfig(
                    "integration grid density must be positive".into(),
                ));
            }
        }
        if self.fiber_samples == 0 {
            return Err(Error::MalformedConfig(
                "fiber sample count must be positive".into(),
            ));
        }
        if self.identity_samples == 0 {
            return Err(Error::MalformedConfig(
                "identity sample count must be positive".into(),
            ));
        }
        match self.format.as_str() {
            "json" | "csv" | "text" => {}
            other => {
                return Err(Error::MalformedConfig(format!(
                    "unknown report format `{other}` (expected `json`, `csv`, or `text`)"
                )))
            }
        }
        self.diff.to_diff_config()?;
        self.tolerances.validate()
    }

    pub fn diff_config(&self) -> Result<DiffConfig> {
        self.diff.to_diff_config()
    }

    /// Sampling plan for the flatness gate.
    pub fn flat_plan(&self) -> SamplePlan {
        SamplePlan {
            points_per_chart: 8,
            directions_per_point: 4,
            seed: self.seed,
        }
    }

    /// Sampling plan for the identity sweeps (second variation, norm
    /// duality, eigenvalue chain, submanifold residuals).
    pub fn identity_plan(&self) -> SamplePlan {
        SamplePlan {
            points_per_chart: 3,
            directions_per_point: 2,
            seed: self.seed ^ 0x9e37_79b9,
        }
    }

    pub fn search_plan(&self) -> SearchPlan {
        SearchPlan {
            grid_per_axis: self.grid,
            fiber_samples: self.fiber_samples,
            refine_iters: 30,
            seed: self.seed,
        }
    }

    pub fn verdict_config(&self) -> VerdictConfig {
        VerdictConfig {
            flat_plan: self.flat_plan(),
            search: self.search_plan(),
            identity_plan: self.identity_plan(),
            flat_gate: self.tolerances.flat_gate,
            pinch_tol: self.tolerances.pinch_tol,
            parallel_tol: self.tolerances.parallel_tol,
        }
    }
}

/// Overall outcome of a run, in one-to-one correspondence with the process
/// exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "hypothesis-not-met")]
    HypothesisNotMet,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::HypothesisNotMet => 2,
            Status::Inconclusive => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisNotMet => "hypothesis-not-met",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// Residual maxima of the ambient identity battery on `Gr_p(C^n)`: the
/// structural identities of the bundle calculus measured on random draws.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AmbientSection {
    pub n: usize,
    pub p: usize,
    pub samples: usize,
    pub seed: u64,
    /// Worst pairwise disagreement of three metric evaluations: the library
    /// pairing, an elementwise Frobenius sum, and the pairing of the ambient
    /// `Hom(C^n)` embeddings `F_Q X F_S^H`.
    pub metric_consistency_max: f64,
    /// `K` block of the jet connection form against `−H^H`.
    pub adjoint_identity_max: f64,
    /// Frame-derivative identification of the tangent matrix: the
    /// holomorphic block recovers the direction, the antiholomorphic block
    /// vanishes.
    pub tangent_identification_max: f64,
    /// Jet-differentiated sub-bundle curvature against the algebraic
    /// `R^S(U,Ū) = −U^H U` and `R^Q(U,Ū) = U U^H` forms.
    pub connection_curvature_max: f64,
    /// Symmetry of `R(U, V̄)Z` under `U ↔ Z`.
    pub curvature_symmetry_max: f64,
    /// `tr R^Q(U,V̄) = ⟨U,V⟩` and `tr R^S(U,V̄) = −⟨U,V⟩`.
    pub trace_identity_max: f64,
    /// `Hol` stayed inside `(0, 2]` on every draw.
    pub hol_range_ok: bool,
    /// Invariance of `Hol` under fiber phase rotation.
    pub hol_phase_max: f64,
    /// `Hol(U)` against the curvature contraction `⟨R(U,Ū)U, U⟩`.
    pub hol_contraction_max: f64,
    /// `max |Hol − 2|` when the target is a projective space (`p = 1` or
    /// `p = n − 1`); absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projective_hol_deviation: Option<f64>,
    pub passed: bool,
}

/// Jet-frame differentiation data behind the connection-level identities.
struct JetFamily {
    omega_s: CMat,
    omega_q: CMat,
    h_block: CMat,
    k_block: CMat,
    push: CMat,
    push_bar: CMat,
}

/// Differentiates the orthonormalized frame family `F_S(w) = GS(F_S + w F_Q M)`
/// with second-order jets and extracts the connection form blocks, the
/// `(1,1)` curvature of the induced sub-bundle connections, and the
/// first-derivative tangent identification.
fn jet_family(pt: &GrassmannPoint, m: &CMat) -> Result<JetFamily> {
    let w = Jet::variable(C64::new(0.0, 0.0), 0, 1);
    let drift = pt.frame_q().mul(m);
    let family: Mat<Jet> = mat_lift(pt.frame_s()).add(&mat_lift(&drift).scale(w));
    let fs = orthonormalize(&family)?;
    let fq = complete_frame_seeded(&fs, pt.frame_q())?;
    let f = fs.hcat(&fq);
    let n = pt.n();
    let p = pt.p();
    let val = mat_val(&f);
    let d = [mat_pd(&f, 0), mat_pd(&f, 1)];
    let omega = [val.adjoint().mul(&d[0]), val.adjoint().mul(&d[1])];
    // ∂_a ω_b = (∂_{σa} F)^H (∂_b F) + F^H (∂_a ∂_b F), with σ swapping the
    // holomorphic and antiholomorphic slots.
    let d_omega = |a: usize, b: usize| -> CMat {
        let sa = (a + 1) % 2;
        d[sa].adjoint()
            .mul(&d[b])
            .add(&val.adjoint().mul(&mat_pd2(&f, a, b)))
    };
    // The full moving-frame connection is flat, so the sub-bundle curvature
    // is assembled from the block connection: the derivative part plus the
    // commutator of the matching ω blocks.
    let dpart = d_omega(0, 1).sub(&d_omega(1, 0));
    let sblock = |x: &CMat| Mat::from_fn(p, p, |i, j| x[(i, j)]);
    let qblock = |x: &CMat| Mat::from_fn(n - p, n - p, |i, j| x[(p + i, p + j)]);
    let comm = |a: &CMat, b: &CMat| a.mul(b).sub(&b.mul(a));
    Ok(JetFamily {
        omega_s: sblock(&dpart).add(&comm(&sblock(&omega[0]), &sblock(&omega[1]))),
        omega_q: qblock(&dpart).add(&comm(&qblock(&omega[0]), &qblock(&omega[1]))),
        h_block: Mat::from_fn(n - p, p, |i, j| omega[0][(p + i, j)]),
        k_block: Mat::from_fn(p, n - p, |i, j| omega[1][(i, p + j)]),
        push: pt.frame_q().adjoint().mul(&mat_pd(&fs, 0)),
        push_bar: pt.frame_q().adjoint().mul(&mat_pd(&fs, 1)),
    })
}

/// Runs the ambient identity battery on `Gr_p(C^n)` with `samples` random
/// draws derived from `seed`.
pub fn ambient_battery(n: usize, p: usize, samples: usize, seed: u64) -> Result<AmbientSection> {
    if p == 0 || p >= n {
        return Err(Error::InvalidParameter(format!(
            "ambient battery needs 0 < p < n, got n={n}, p={p}"
        )));
    }
    if samples == 0 {
        return Err(Error::EmptyPlan);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let projective = p == 1 || p + 1 == n;
    let mut metric_max = 0.0f64;
    let mut adjoint_max = 0.0f64;
    let mut tangent_max = 0.0f64;
    let mut curvature_jet_max = 0.0f64;
    let mut symmetry_max = 0.0f64;
    let mut trace_max = 0.0f64;
    let mut range_ok = true;
    let mut phase_max = 0.0f64;
    let mut contraction_max = 0.0f64;
    let mut proj_max = 0.0f64;
    for _ in 0..samples {
        let pt = GrassmannPoint::random(n, p, &mut rng)?;
        let u = pt.random_tangent(&mut rng);
        let v = pt.random_tangent(&mut rng);
        let zt = pt.random_tangent(&mut rng);

        let pairing = u.metric(&v)?;
        let mut elementwise = C64::new(0.0, 0.0);
        for i in 0..(n - p) {
            for j in 0..p {
                elementwise += u.mat()[(i, j)] * v.mat()[(i, j)].conj();
            }
        }
        let embed = |t: &AmbientTangent| pt.frame_q().mul(t.mat()).mul(&pt.frame_s().adjoint());
        let embedded = embed(&u).frob_inner(&embed(&v));
        metric_max = metric_max
            .max((pairing - elementwise).norm())
            .max((pairing - embedded).norm());

        // Connection-level identities from one jet family per draw; the
        // direction is normalized so residuals share a common scale.
        let mmat = {
            let g = random_gaussian(n - p, p, &mut rng);
            let s = 1.0 / g.fnorm();
            g.scale(C64::new(s, 0.0))
        };
        let fam = jet_family(&pt, &mmat)?;
        tangent_max = tangent_max
            .max(fam.push.sub(&mmat).fnorm())
            .max(fam.push_bar.fnorm());
        adjoint_max = adjoint_max.max(fam.k_block.add(&fam.h_block.adjoint()).fnorm());
        curvature_jet_max = curvature_jet_max
            .max(fam.omega_s.add(&mmat.adjoint().mul(&mmat)).fnorm())
            .max(fam.omega_q.sub(&mmat.mul(&mmat.adjoint())).fnorm());

        symmetry_max = symmetry_max.max(
            curvature_gr(&u, &v, &zt)?
                .mat()
                .sub(curvature_gr(&zt, &v, &u)?.mat())
                .fnorm(),
        );
        trace_max = trace_max
            .max((curvature_q(&u, &v)?.trace() - pairing).norm())
            .max((curvature_s(&u, &v)?.trace() + pairing).norm());

        let un = u.normalized()?;
        let hol = hol_sectional(&un)?;
        if !(hol > 0.0 && hol <= 2.0 + ALGEBRAIC_TOL) {
            range_ok = false;
        }
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let rotated = un.scale(C64::new(theta.cos(), theta.sin()));
        phase_max = phase_max.max((hol_sectional(&rotated)? - hol).abs());
        let contraction = curvature_gr(&un, &un, &un)?.metric(&un)?;
        contraction_max = contraction_max
            .max((contraction.re - hol).abs())
            .max(contraction.im.abs());
        if projective {
            proj_max = proj_max.max((hol - 2.0).abs());
        }
    }
    let projective_hol_deviation = projective.then_some(proj_max);
    let passed = metric_max < ALGEBRAIC_TOL
        && adjoint_max < ALGEBRAIC_TOL
        && tangent_max < ALGEBRAIC_TOL
        && curvature_jet_max < DERIVATIVE_TOL
        && symmetry_max < ALGEBRAIC_TOL
        && trace_max < ALGEBRAIC_TOL
        && range_ok
        && phase_max < ALGEBRAIC_TOL
        && contraction_max < ALGEBRAIC_TOL
        && projective_hol_deviation.map_or(true, |d| d < ALGEBRAIC_TOL);
    Ok(AmbientSection {
        n,
        p,
        samples,
        seed,
        metric_consistency_max: metric_max,
        adjoint_identity_max: adjoint_max,
        tangent_identification_max: tangent_max,
        connection_curvature_max: curvature_jet_max,
        curvature_symmetry_max: symmetry_max,
        trace_identity_max: trace_max,
        hol_range_ok: range_ok,
        hol_phase_max: phase_max,
        hol_contraction_max: contraction_max,
        projective_hol_deviation,
        passed,
    })
}

/// Validation of the chart maps themselves: holomorphy and immersiveness at
/// sampled points, plus the member's dimensional data.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ImmersionSection {
    pub member: String,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub normal_rank: usize,
    pub points: usize,
    /// Worst antiholomorphic pushforward residual.
    pub holomorphy_max: f64,
    /// Smallest induced-metric determinant (immersiveness margin).
    pub metric_det_min: f64,
    pub passed: bool,
}

pub fn immersion_section(imm: &Immersion, plan: &SamplePlan) -> Result<ImmersionSection> {
    let mut holomorphy_max = 0.0f64;
    let mut det_min = f64::INFINITY;
    let mut points = 0usize;
    for chart in 0..imm.chart_count() {
        for z in plan.chart_points(imm, chart) {
            holomorphy_max = holomorphy_max.max(imm.check_holomorphy(chart, &z)?);
            det_min = det_min.min(imm.check_immersive(chart, &z)?);
            points += 1;
        }
    }
    Ok(ImmersionSection {
        member: imm.name.clone(),
        n: imm.n,
        p: imm.p,
        q: imm.q,
        m: imm.m(),
        normal_rank: imm.normal_rank(),
        points,
        holomorphy_max,
        metric_det_min: det_min,
        passed: holomorphy_max < FIRST_ORDER_TOL && det_min > 1e-12,
    })
}

/// Residual maxima of the submanifold identity suite on sampled points.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SubmanifoldSection {
    pub member: String,
    pub samples: usize,
    /// `‖σ(∂_i, ∂_j) − σ(∂_j, ∂_i)‖` maximum.
    pub sigma_symmetry_max: f64,
    /// Residual of the covariant pushforward derivative in antiholomorphic
    /// directions; certifies that `σ` has no `(0,1)` part.
    pub mixed_type_max: f64,
    /// `h(σ(u,v), ξ)` against `h(v, A_ξ ū)`.
    pub duality_max: f64,
    /// Symmetry defect of `∇σ` across its holomorphic slots.
    pub codazzi_max: f64,
    /// `max ‖∇_{V̄} σ‖`; vanishes on projectively flat members.
    pub nabla_bar_max: f64,
    /// Whether the flat-member gate applies to `nablaBarMax`.
    pub nabla_bar_gated: bool,
    /// Intrinsic-vs-ambient curvature equation residual.
    pub gauss_max: f64,
    /// Normal-curvature equation residual.
    pub ricci_max: f64,
    /// Spread between the intrinsic and extrinsic sectional curvature.
    pub hol_agreement_max: f64,
    pub passed: bool,
}

pub fn submanifold_section(
    imm: &Immersion,
    plan: &SamplePlan,
    cfg: &DiffConfig,
    flat: bool,
) -> Result<SubmanifoldSection> {
    let m = imm.m();
    let mut sym = 0.0f64;
    let mut mixed = 0.0f64;
    let mut duality = 0.0f64;
    let mut codazzi = 0.0f64;
    let mut nbar = 0.0f64;
    let mut gauss = 0.0f64;
    let mut ricci = 0.0f64;
    let mut agree = 0.0f64;
    let mut samples = 0usize;
    for chart in 0..imm.chart_count() {
        for (idx, z) in plan.chart_points(imm, chart).into_iter().enumerate() {
            let data = fundamental_form(imm, chart, &z, cfg)?;
            for i in 0..m {
                for j in 0..m {
                    sym = sym.max(data.sigma(i, j).sub(data.sigma(j, i)).fnorm());
                }
            }
            mixed = mixed.max(data.mixed_type_residual());
            let pairs = plan.direction_pairs(m, chart, idx);
            for (u, v) in &pairs {
                for xi in &data.normal_frame {
                    let lhs = data.sigma_vec(u, v).frob_inner(xi);
                    let shape = data.shape_apply(xi, u)?;
                    let fv = data.frame.pushforward(v)?;
                    duality = duality.max((lhs - fv.mat().frob_inner(&shape)).norm());
                }
            }
            let cs = covariant_sigma(imm, chart, &z, cfg)?;
            codazzi = codazzi.max(cs.codazzi_defect());
            nbar = nbar.max(cs.sup_nabla_bar());
            samples += 1;
            // The curvature-equation residuals rebuild finite-difference
            // curvature tensors; one point per chart keeps the section cheap.
            if idx == 0 {
                if let Some((u, v)) = pairs.first() {
                    let (zv, w) = pairs
                        .get(1)
                        .cloned()
                        .unwrap_or_else(|| (u.clone(), v.clone()));
                    gauss =
                        gauss.max(gauss_equation_residual(imm, chart, &z, u, v, &zv, &w, cfg)?);
                    agree = agree.max(hol_m(imm, chart, &z, u, cfg)?.spread());
                    if !data.normal_frame.is_empty() {
                        let xi = &data.normal_frame[0];
                        let eta = data.normal_frame.last().unwrap();
                        ricci = ricci
                            .max(ricci_equation_residual(imm, chart, &z, u, v, xi, eta, cfg)?);
                    }
                }
            }
        }
    }
    let passed = sym < CURVATURE_TOL
        && mixed < CURVATURE_TOL
        && duality < DERIVATIVE_TOL
        && codazzi < CURVATURE_TOL
        && (!flat || nbar < CURVATURE_TOL)
        && gauss < CURVATURE_TOL
        && ricci < RICCI_TOL
        && agree < CURVATURE_TOL;
    Ok(SubmanifoldSection {
        member: imm.name.clone(),
        samples,
        sigma_symmetry_max: sym,
        mixed_type_max: mixed,
        duality_max: duality,
        codazzi_max: codazzi,
        nabla_bar_max: nbar,
        nabla_bar_gated: flat,
        gauss_max: gauss,
        ricci_max: ricci,
        hol_agreement_max: agree,
        passed,
    })
}

/// Sphere-bundle quadrature results: base volume against the closed form,
/// the vanishing first-derivative integral, and the two-term balance.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegrationSection {
    pub member: String,
    /// Base density of the fine plan behind the volume estimate.
    pub volume_grid: usize,
    /// Base density of the plan behind the derivative integrands.
    pub sample_grid: usize,
    pub fiber_samples: usize,
    pub volume_samples: usize,
    pub samples: usize,
    pub volume_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_rel_error: Option<f64>,
    pub volume_passed: bool,
    /// Estimate of the sphere-bundle integral of the derivative field,
    /// which vanishes on every closed base.
    pub ros: RosEstimate,
    pub ros_passed: bool,
    pub balance: BalanceReport,
    pub balance_passed: bool,
    /// The plan was too sparse for its jackknife errors to certify anything.
    pub inconclusive: bool,
    pub passed: bool,
}

impl IntegrationSection {
    pub fn status(&self) -> Status {
        if !(self.volume_passed && self.ros_passed && self.balance_passed) {
            Status::Fail
        } else if self.inconclusive {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }
}

/// Default quadrature densities: fine for one complex base coordinate,
/// coarser for the four-real-dimensional case.
fn default_grids(m: usize) -> (usize, usize) {
    if m <= 1 {
        (30, 9)
    } else {
        (14, 4)
    }
}

fn z_key(chart: usize, z: &[C64]) -> (usize, Vec<u64>) {
    (
        chart,
        z.iter()
            .flat_map(|c| [c.re.to_bits(), c.im.to_bits()])
            .collect(),
    )
}

/// The quadrature plan the derivative integrands run on (and the one the
/// CSV sample export lists).
pub fn um_plan_for(imm: &Immersion, config: &RunConfig) -> Result<UMPlan> {
    let cfg = config.diff_config()?;
    let sample_grid = config
        .integration_grid
        .unwrap_or(default_grids(imm.m()).1);
    build_um_plan(imm, sample_grid, config.fiber_samples, config.seed, &cfg)
}

pub fn integration_section(imm: &Immersion, config: &RunConfig) -> Result<IntegrationSection> {
    let m = imm.m();
    let cfg = config.diff_config()?;
    let balance_tol = config.tolerances.balance_tol;
    let plan = um_plan_for(imm, config)?;
    let sample_grid = plan.base_grid_density;
    let volume_grid = default_grids(m).0.max(sample_grid);
    // The volume needs only the base measure, so it gets a fine plan with a
    // trivial fiber; the derivative integrands run on a coarser plan.
    let volume_plan = build_um_plan(imm, volume_grid, 1, config.seed, &cfg)?;
    let volume_expected = imm.expected.as_ref().and_then(|e| e.volume);
    let volume_rel_error = volume_expected.map(|v| (volume_plan.volume - v).abs() / v);
    // The four-real-dimensional midpoint rule is necessarily coarser and
    // carries a proportionally larger volume error.
    let volume_gate = if m <= 1 {
        VOLUME_REL_TOL
    } else {
        10.0 * VOLUME_REL_TOL
    };
    let volume_passed = volume_rel_error.map_or(true, |r| r < volume_gate);

    // One ∇T component table per distinct base point; the fiber samples
    // then only contract it.
    let mut keys: Vec<(usize, Vec<C64>)> = Vec::new();
    for s in &plan.samples {
        if keys
            .last()
            .map_or(true, |(c, z)| *c != s.chart || z != &s.z)
        {
            keys.push((s.chart, s.z.clone()));
        }
    }
    let tensors: Result<Vec<Vec<C64>>> = keys
        .par_iter()
        .map(|(c, z)| nabla_t(imm, *c, z, &cfg, FD_STEP))
        .collect();
    let tensors = tensors?;
    let index: HashMap<(usize, Vec<u64>), usize> = keys
        .iter()
        .enumerate()
        .map(|(i, (c, z))| (z_key(*c, z), i))
        .collect();
    let ros = ros_integral(&plan, |chart, z, u| {
        let t = &tensors[index[&z_key(chart, z)]];
        Ok(contract_nabla_t(t, m, u))
    })?;
    let ros_passed = ros.magnitude() <= (3.0 * ros.standard_error).max(FIRST_ORDER_TOL);

    let balance = integral_balance(imm, &plan, &cfg)?;
    // Both balance terms vanish identically on parallel members; the
    // relative residual is only meaningful when a term is macroscopic.
    let macroscopic = balance
        .curvature_term
        .abs()
        .max(balance.nabla_sigma_term.abs())
        > 1e-6;
    let balance_passed =
        balance.inconclusive || !macroscopic || balance.residual < balance_tol;
    let inconclusive = balance.inconclusive || !ros.standard_error.is_finite();

    let passed = volume_passed && ros_passed && balance_passed && !inconclusive;
    Ok(IntegrationSection {
        member: imm.name.clone(),
        volume_grid,
        sample_grid,
        fiber_samples: plan.fiber_samples,
        volume_samples: volume_plan.samples.len(),
        samples: plan.samples.len(),
        volume_estimate: volume_plan.volume,
        volume_expected,
        volume_rel_error,
        volume_passed,
        ros,
        ros_passed,
        balance,
        balance_passed,
        inconclusive,
        passed,
    })
}

/// Gates on the verdict beyond the headline agreement flag: the
/// second-variation assembly must match its finite-difference evaluation,
/// parallel members must satisfy the norm identity, and pinched members must
/// keep every eigenvalue-chain slack nonnegative.
pub fn pinching_passed(v: &PinchingVerdict) -> bool {
    v.agreement
        && v.second_variation_max_residual < RICCI_TOL
        && (!v.parallel || v.norm_duality_max_residual < CURVATURE_TOL)
        && (!v.pinched || v.lambda_chain_worst_slack.map_or(true, |w| w >= -CHAIN_SLACK))
}

/// One report section per pipeline stage; stages that did not run are
/// omitted from the JSON.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sections {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ambient: Option<AmbientSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub immersion: Option<ImmersionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub submanifold: Option<SubmanifoldSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flatness: Option<FlatnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinching: Option<PinchingVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integration: Option<IntegrationSection>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub sections: Sections,
    pub status: Status,
}

/// Reduces the enabled sections to one status.  Assumes the hypothesis gate
/// was already handled by the caller.
fn overall_status(sections: &Sections) -> Status {
    let mut ok = true;
    let mut inconclusive = false;
    if let Some(s) = &sections.ambient {
        ok &= s.passed;
    }
    if let Some(s) = &sections.immersion {
        ok &= s.passed;
    }
    if let Some(s) = &sections.submanifold {
        ok &= s.passed;
    }
    if let Some(s) = &sections.flatness {
        ok &= s.flat && s.rank_check_passed;
    }
    if let Some(v) = &sections.pinching {
        ok &= pinching_passed(v);
    }
    if let Some(s) = &sections.integration {
        match s.status() {
            Status::Fail => ok = false,
            Status::Inconclusive => inconclusive = true,
            _ => {}
        }
    }
    if !ok {
        Status::Fail
    } else if inconclusive {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}

fn assemble(config: &RunConfig, sections: Sections, status: Status) -> VerificationReport {
    VerificationReport {
        schema_version: SCHEMA_VERSION,
        tool_version: tool_version().to_string(),
        config: config.clone(),
        sections,
        status,
    }
}

/// Full pipeline on one immersion: ambient battery, chart validation, the
/// flatness gate, the pinching verdict with its identity sweeps, and — for
/// covered low-dimensional bases — sphere-bundle integration.
pub fn run_verify(imm: &Immersion, config: &RunConfig) -> Result<VerificationReport> {
    config.validate()?;
    let cfg = config.diff_config()?;
    let mut sections = Sections::default();
    sections.ambient = Some(ambient_battery(
        imm.n,
        imm.p,
        config.identity_samples,
        config.seed,
    )?);
    let plan = config.identity_plan();
    sections.immersion = Some(immersion_section(imm, &plan)?);
    let status = match theorem_verdict(imm, &config.verdict_config(), &cfg)? {
        VerdictOutcome::HypothesisNotMet { flatness } => {
            sections.flatness = Some(flatness);
            Status::HypothesisNotMet
        }
        VerdictOutcome::Verdict { flatness, verdict } => {
            sections.submanifold = Some(submanifold_section(imm, &plan, &cfg, flatness.flat)?);
            sections.flatness = Some(flatness);
            sections.pinching = Some(verdict);
            if imm.m() <= 2 && imm.base.covers() {
                sections.integration = Some(integration_section(imm, config)?);
            }
            overall_status(&sections)
        }
    };
    Ok(assemble(config, sections, status))
}

/// Ambient identity battery as a standalone report.
pub fn run_identities(n: usize, p: usize, config: &RunConfig) -> Result<VerificationReport> {
    config.validate()?;
    let ambient = ambient_battery(n, p, config.identity_samples, config.seed)?;
    let status = if ambient.passed {
        Status::Pass
    } else {
        Status::Fail
    };
    let sections = Sections {
        ambient: Some(ambient),
        ..Sections::default()
    };
    Ok(assemble(config, sections, status))
}

/// Sphere-bundle integration as a standalone report.
pub fn run_integrate(imm: &Immersion, config: &RunConfig) -> Result<VerificationReport> {
    config.validate()?;
    let section = integration_section(imm, config)?;
    let status = section.status();
    let sections = Sections {
        integration: Some(section),
        ..Sections::default()
    };
    Ok(assemble(config, sections, status))
}

/// One catalog listing row, from the frozen member expectations.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CatalogRow {
    pub descriptor: String,
    pub member: String,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub normal_rank: usize,
    /// Pinching threshold `1/q`.
    pub threshold: f64,
    pub expected_min_hol: f64,
    pub expected_parallel: bool,
    pub projectively_flat: bool,
    pub hol_constant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    pub note: String,
}

/// The verification battery plus the non-flat negative control, with the
/// dimensional data of each instantiated member.
pub fn catalog_rows() -> Result<Vec<CatalogRow>> {
    let mut descriptors: Vec<String> = catalog::verification_battery()
        .iter()
        .map(|s| s.to_string())
        .collect();
    descriptors.push("identity:p=2,n=4".to_string());
    let mut rows = Vec::new();
    for descriptor in descriptors {
        let imm = catalog::build(&descriptor)?;
        let e = imm.expected.clone().ok_or_else(|| {
            Error::InvalidParameter(format!("catalog member `{descriptor}` has no expectations"))
        })?;
        rows.push(CatalogRow {
            descriptor,
            member: imm.name.clone(),
            n: imm.n,
            p: imm.p,
            q: imm.q,
            m: imm.m(),
            normal_rank: imm.normal_rank(),
            threshold: 1.0 / imm.q as f64,
            expected_min_hol: e.min_hol,
            expected_parallel: e.parallel,
            projectively_flat: e.flat,
            hol_constant: e.hol_constant,
            volume: e.volume,
            note: e.description,
        });
    }
    Ok(rows)
}

/// Aligned text table of the catalog listing.
pub fn catalog_text(rows: &[CatalogRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} {:>2} {:>2} {:>2} {:>2}  {:>8}  {:>8}  {:<8}  {:<8}",
        "descriptor", "n", "p", "q", "m", "minHol", "1/q", "parallel", "flatness"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<22} {:>2} {:>2} {:>2} {:>2}  {:>8.4}  {:>8.4}  {:<8}  {:<8}",
            r.descriptor,
            r.n,
            r.p,
            r.q,
            r.m,
            r.expected_min_hol,
            r.threshold,
            if r.expected_parallel { "yes" } else { "no" },
            if r.projectively_flat {
                "flat"
            } else {
                "non-flat"
            },
        );
    }
    out
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV rendering of the catalog listing, one row per member.
pub fn catalog_csv(rows: &[CatalogRow]) -> String {
    let mut out = String::from(
        "descriptor,member,n,p,q,m,normal_rank,threshold,expected_min_hol,\
         expected_parallel,projectively_flat,hol_constant,volume\n",
    );
    for r in rows {
        let volume = r.volume.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.descriptor),
            csv_field(&r.member),
            r.n,
            r.p,
            r.q,
            r.m,
            r.normal_rank,
            r.threshold,
            r.expected_min_hol,
            r.expected_parallel,
            r.projectively_flat,
            r.hol_constant,
            volume,
        );
    }
    out
}

/// Pretty JSON with a trailing newline; field order follows the struct
/// declarations, so equal runs serialize to equal bytes.
pub fn to_json(report: &VerificationReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    Ok(text)
}

/// Human summary.  The first line is always the verdict.
pub fn text_summary(report: &VerificationReport) -> String {
    let mut out = String::new();
    let s = &report.sections;
    let status = report.status.label();
    if let Some(v) = &s.pinching {
        let _ = writeln!(
            out,
            "verdict: {status} — min Hol {:.6} vs threshold {:.6}; pinched={}, parallel={} ({})",
            v.min_hol.min_hol,
            v.threshold,
            v.pinched,
            v.parallel,
            if v.agreement {
                "equivalence agrees"
            } else {
                "equivalence VIOLATED"
            }
        );
    } else if let Some(f) = &s.flatness {
        let _ = writeln!(
            out,
            "verdict: {status} — pulled-back quotient curvature is not projectively flat \
             (max residual {:.3e} > gate {:.1e}); no verdict is rendered",
            f.max_residual, f.gate
        );
    } else if let Some(a) = &s.ambient {
        let _ = writeln!(
            out,
            "verdict: {status} — ambient identity battery on Gr_{}(C^{})",
            a.p, a.n
        );
    } else if let Some(i) = &s.integration {
        let _ = writeln!(
            out,
            "verdict: {status} — sphere-bundle integration on {}",
            i.member
        );
    } else {
        let _ = writeln!(out, "verdict: {status} — {}", report.config.command);
    }
    if let Some(i) = &s.immersion {
        let _ = writeln!(
            out,
            "member: {} — base dim {} into Gr_{}(C^{}), q={}, normal rank {}",
            i.member, i.m, i.p, i.n, i.q, i.normal_rank
        );
        let _ = writeln!(
            out,
            "immersion: holomorphy={:.3e} metric_det_min={:.3e} [{}]",
            i.holomorphy_max,
            i.metric_det_min,
            if i.passed { "ok" } else { "FAIL" }
        );
    }
    if let Some(f) = &s.flatness {
        let _ = writeln!(
            out,
            "flatness: {} max_residual={:.3e} gate={:.1e} alpha_unit={:.6} trace_defect={:.3e} \
             rank_check={} sigma_k_composition={:.3e}",
            if f.flat { "flat" } else { "NOT FLAT" },
            f.max_residual,
            f.gate,
            f.alpha_unit,
            f.trace_defect_max,
            if f.rank_check_passed { "ok" } else { "FAIL" },
            f.sigma_k_composition_max
        );
        if let Some(d) = f.ambient_hol_deviation {
            let _ = writeln!(out, "flatness: ambient Hol deviation from 2/q = {d:.3e}");
        }
    }
    if let Some(a) = &s.ambient {
        let _ = writeln!(
            out,
            "ambient[Gr_{}(C^{}), {} draws]: metric={:.3e} adjoint={:.3e} tangent={:.3e} \
             curvature(jet)={:.3e} symmetry={:.3e} traces={:.3e} [{}]",
            a.p,
            a.n,
            a.samples,
            a.metric_consistency_max,
            a.adjoint_identity_max,
            a.tangent_identification_max,
            a.connection_curvature_max,
            a.curvature_symmetry_max,
            a.trace_identity_max,
            if a.passed { "ok" } else { "FAIL" }
        );
        let _ = writeln!(
            out,
            "ambient: Hol range {} phase={:.3e} contraction={:.3e}",
            if a.hol_range_ok {
                "in (0, 2]"
            } else {
                "OUT OF RANGE"
            },
            a.hol_phase_max,
            a.hol_contraction_max
        );
        if let Some(d) = a.projective_hol_deviation {
            let _ = writeln!(
                out,
                "ambient: projective target, Hol == 2 identically (max deviation {d:.3e})"
            );
        }
    }
    if let Some(sm) = &s.submanifold {
        let _ = writeln!(
            out,
            "submanifold[{} pts]: sigma_sym={:.3e} mixed={:.3e} duality={:.3e} codazzi={:.3e} \
             nabla_bar={:.3e}{} gauss={:.3e} ricci={:.3e} hol_agree={:.3e} [{}]",
            sm.samples,
            sm.sigma_symmetry_max,
            sm.mixed_type_max,
            sm.duality_max,
            sm.codazzi_max,
            sm.nabla_bar_max,
            if sm.nabla_bar_gated { " (gated)" } else { "" },
            sm.gauss_max,
            sm.ricci_max,
            sm.hol_agreement_max,
            if sm.passed { "ok" } else { "FAIL" }
        );
    }
    if let Some(v) = &s.pinching {
        let _ = writeln!(
            out,
            "pinching: min_hol={:.6} (chart {}, grid gap {:.2e}, refined drop {:.2e}, {} samples)",
            v.min_hol.min_hol,
            v.min_hol.argmin_chart,
            v.min_hol.grid_gap,
            v.min_hol.refined_drop,
            v.min_hol.samples
        );
        let _ = writeln!(
            out,
            "parallelism: max ‖∇σ(u,u,u)‖={:.3e} polarization bound={:.3e} ({} samples)",
            v.parallelism.max_diagonal, v.parallelism.polarization_bound, v.parallelism.samples
        );
        let chain = match v.lambda_chain_worst_slack {
            Some(w) => format!("{w:.3e}"),
            None => "vacuous".to_string(),
        };
        let _ = writeln!(
            out,
            "identities: second_variation={:.3e} norm_duality={:.3e} cs_min_slack={:.3e} \
             lambda_chain_worst_slack={} ({}/{} vacuous) [{}]",
            v.second_variation_max_residual,
            v.norm_duality_max_residual,
            v.cauchy_schwarz_min_slack,
            chain,
            v.lambda_chain_vacuous_samples,
            v.lambda_chain_samples,
            if pinching_passed(v) { "ok" } else { "FAIL" }
        );
    }
    if let Some(i) = &s.integration {
        let volume = match (i.volume_expected, i.volume_rel_error) {
            (Some(expected), Some(rel)) => {
                format!(
                    "{:.6} (expected {:.6}, rel {:.2e}) [{}]",
                    i.volume_estimate,
                    expected,
                    rel,
                    if i.volume_passed { "ok" } else { "FAIL" }
                )
            }
            _ => format!("{:.6} (no closed form on record)", i.volume_estimate),
        };
        let _ = writeln!(out, "integration: volume={volume}");
        let _ = writeln!(
            out,
            "integration: ros={:.3e}{:+.3e}i se={:.3e} ({} samples) [{}]",
            i.ros.estimate_re,
            i.ros.estimate_im,
            i.ros.standard_error,
            i.ros.samples,
            if i.ros_passed { "ok" } else { "FAIL" }
        );
        let _ = writeln!(
            out,
            "integration: balance curvature={:.6e}±{:.1e} nabla_sigma={:.6e}±{:.1e} \
             residual={:.3e} [{}{}]",
            i.balance.curvature_term,
            i.balance.curvature_se,
            i.balance.nabla_sigma_term,
            i.balance.nabla_sigma_se,
            i.balance.residual,
            if i.balance_passed { "ok" } else { "FAIL" },
            if i.inconclusive { ", inconclusive" } else { "" }
        );
    }
    let _ = writeln!(out, "status: {status}");
    out
}

/// CSV export of sampled holomorphic sectional curvatures.  Columns:
/// `chart`, `z{k}_re`, `z{k}_im` per base coordinate, `u{k}_re`, `u{k}_im`
/// per fiber coefficient, `hol`.
pub fn hol_samples_csv(samples: &[HolSample]) -> String {
    let mut out = String::new();
    let m = samples.first().map_or(0, |s| s.z.len());
    out.push_str("chart");
    for k in 0..m {
        let _ = write!(out, ",z{k}_re,z{k}_im");
    }
    for k in 0..m {
        let _ = write!(out, ",u{k}_re,u{k}_im");
    }
    out.push_str(",hol\n");
    for s in samples {
        let _ = write!(out, "{}", s.chart);
        for c in &s.z {
            let _ = write!(out, ",{},{}", c[0], c[1]);
        }
        for c in &s.u {
            let _ = write!(out, ",{},{}", c[0], c[1]);
        }
        let _ = writeln!(out, ",{}", s.hol);
    }
    out
}

/// CSV export of a sphere-bundle quadrature plan.  Columns: `chart`,
/// `z{k}_re`, `z{k}_im` per base coordinate, `u{k}_re`, `u{k}_im` per fiber
/// coefficient, `weight`.
pub fn um_samples_csv(plan: &UMPlan) -> String {
    let mut out = String::new();
    let m = plan.samples.first().map_or(0, |s| s.z.len());
    out.push_str("chart");
    for k in 0..m {
        let _ = write!(out, ",z{k}_re,z{k}_im");
    }
    for k in 0..m {
        let _ = write!(out, ",u{k}_re,u{k}_im");
    }
    out.push_str(",weight\n");
    for s in &plan.samples {
        let _ = write!(out, "{}", s.chart);
        for c in &s.z {
            let _ = write!(out, ",{},{}", c.re, c.im);
        }
        for c in &s.u {
            let _ = write!(out, ",{},{}", c.re, c.im);
        }
        let _ = writeln!(out, ",{}", s.weight);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::pinching::hol_samples;
    use crate::testutil::skew_speed_surface;

    #[test]
    fn config_rejects_unknown_keys() {
        let err = RunConfig::from_json(r#"{"command": "verify", "gridd": 9}"#).unwrap_err();
        assert!(matches!(err, Error::MalformedConfig(_)), "{err}");
    }

    #[test]
    fn config_rejects_bad_values() {
        let cases = [
            r#"{"command": "conquer"}"#,
            r#"{"command": "verify", "grid": 1}"#,
            r#"{"command": "verify", "fiberSamples": 0}"#,
            r#"{"command": "verify", "format": "xml"}"#,
            r#"{"command": "verify", "diff": {"mode": "symbolic"}}"#,
            r#"{"command": "verify", "diff": {"step": -0.1}}"#,
            r#"{"command": "verify", "tolerances": {"pinchTol": 0.0}}"#,
            r#"{"command": "verify", "integrationGrid": 0}"#,
        ];
        for text in cases {
            let err = RunConfig::from_json(text).unwrap_err();
            assert!(matches!(err, Error::MalformedConfig(_)), "{text} -> {err}");
        }
    }

    #[test]
    fn config_round_trips_with_defaults() {
        let config = RunConfig::from_json(r#"{"command": "verify", "seed": 7}"#).unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.grid, 7);
        assert_eq!(config.format, "text");
        let text = serde_json::to_string(&config).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back.seed, config.seed);
        assert_eq!(back.tolerances.flat_gate, config.tolerances.flat_gate);
    }

    #[test]
    fn status_labels_and_exit_codes_match() {
        let table = [
            (Status::Pass, 0, "\"pass\""),
            (Status::Fail, 1, "\"fail\""),
            (Status::HypothesisNotMet, 2, "\"hypothesis-not-met\""),
            (Status::Inconclusive, 3, "\"inconclusive\""),
        ];
        for (status, code, json) in table {
            assert_eq!(status.exit_code(), code);
            assert_eq!(serde_json::to_string(&status).unwrap(), json);
        }
    }

    #[test]
    fn ambient_battery_passes_on_small_grassmannians() {
        for (n, p) in [(4, 2), (5, 2), (6, 3)] {
            let section = ambient_battery(n, p, 60, 17).unwrap();
            assert!(section.passed, "Gr_{p}(C^{n}): {section:?}");
            assert!(section.projective_hol_deviation.is_none());
        }
    }

    #[test]
    fn ambient_battery_reports_projective_line() {
        for (n, p) in [(2, 1), (4, 3), (5, 1)] {
            let section = ambient_battery(n, p, 40, 23).unwrap();
            assert!(section.passed, "Gr_{p}(C^{n}): {section:?}");
            let dev = section.projective_hol_deviation.unwrap();
            assert!(dev < ALGEBRAIC_TOL, "deviation {dev:.3e}");
        }
    }

    #[test]
    fn ambient_battery_is_seed_stable() {
        let a = ambient_battery(4, 2, 50, 1).unwrap();
        let b = ambient_battery(4, 2, 50, 2).unwrap();
        assert_eq!(a.passed, b.passed);
        // The jet-curvature residual is dominated by roundoff accumulation
        // of the same algorithm, so seeds only move it within a decade.
        let ratio = a.connection_curvature_max / b.connection_curvature_max;
        assert!(
            (0.1..=10.0).contains(&ratio),
            "ratio {ratio:.3e} ({:.3e} vs {:.3e})",
            a.connection_curvature_max,
            b.connection_curvature_max
        );
    }

    #[test]
    fn catalog_rows_cover_battery_and_negative_control() {
        let rows = catalog_rows().unwrap();
        assert_eq!(rows.len(), catalog::verification_battery().len() + 1);
        let veronese3 = rows.iter().find(|r| r.descriptor == "veronese:3").unwrap();
        assert!((veronese3.expected_min_hol - 2.0 / 3.0).abs() < 1e-12);
        assert!(!veronese3.expected_parallel);
        assert!(veronese3.projectively_flat);
        let tensor = rows
            .iter()
            .find(|r| r.descriptor == "tensor_embedding:3")
            .unwrap();
        assert!((tensor.expected_min_hol - 2.0 / 3.0).abs() < 1e-12);
        assert!((tensor.threshold - 1.0 / 3.0).abs() < 1e-12);
        let identity = rows.iter().find(|r| r.descriptor.starts_with("identity")).unwrap();
        assert!(!identity.projectively_flat);
        let text = catalog_text(&rows);
        assert!(text.contains("veronese:3"));
        assert!(text.contains("non-flat"));
    }

    #[test]
    fn verify_report_is_byte_stable() {
        let imm = catalog::veronese(1).unwrap();
        let mut config = RunConfig::new("verify");
        config.immersion = Some("veronese:1".into());
        config.identity_samples = 25;
        config.integration_grid = Some(8);
        let a = to_json(&run_verify(&imm, &config).unwrap()).unwrap();
        let b = to_json(&run_verify(&imm, &config).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"schemaVersion\": 1"));
        assert!(a.contains("\"status\": \"pass\""));
    }

    #[test]
    fn verify_flags_hypothesis_failure_on_nonflat_control() {
        let imm = skew_speed_surface();
        let mut config = RunConfig::new("verify");
        config.identity_samples = 20;
        let report = run_verify(&imm, &config).unwrap();
        assert_eq!(report.status, Status::HypothesisNotMet);
        assert!(report.sections.pinching.is_none());
        assert!(report.sections.integration.is_none());
        let flatness = report.sections.flatness.as_ref().unwrap();
        assert!(!flatness.flat);
        assert!(flatness.max_residual > 0.01);
        let text = text_summary(&report);
        assert!(text.starts_with("verdict: hypothesis-not-met"));
        assert_eq!(report.status.exit_code(), 2);
    }

    #[test]
    fn identities_report_carries_projective_line_in_text() {
        let config = RunConfig::new("identities");
        let report = run_identities(2, 1, &config).unwrap();
        assert_eq!(report.status, Status::Pass);
        let text = text_summary(&report);
        assert!(text.starts_with("verdict: pass"));
        assert!(text.contains("Hol == 2"), "{text}");
    }

    #[test]
    fn csv_exports_have_documented_columns() {
        let imm = catalog::veronese(2).unwrap();
        let plan = SearchPlan {
            grid_per_axis: 4,
            fiber_samples: 4,
            refine_iters: 0,
            seed: 5,
        };
        let samples = hol_samples(&imm, &plan, &DiffConfig::default()).unwrap();
        let csv = hol_samples_csv(&samples);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "chart,z0_re,z0_im,u0_re,u0_im,hol");
        assert_eq!(csv.lines().count(), samples.len() + 1);
        assert_eq!(csv, hol_samples_csv(&samples));

        let um = build_um_plan(&imm, 5, 1, 9, &DiffConfig::default()).unwrap();
        let um_csv = um_samples_csv(&um);
        assert_eq!(
            um_csv.lines().next().unwrap(),
            "chart,z0_re,z0_im,u0_re,u0_im,weight"
        );
        assert_eq!(um_csv.lines().count(), um.samples.len() + 1);
    }
}
