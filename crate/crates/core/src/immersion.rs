//! Holomorphic immersions into Grassmannians: polynomial chart maps,
//! base-space atlases with smooth partitions of unity, and frame fields
//! differentiated to second order.
//!
//! An [`Immersion`] describes a compact complex base `M` through a finite
//! atlas.  Each chart carries a polynomial map `z -> P(z)` whose columns span
//! the image plane `S(z)` in `C^n`; different charts differ by constant
//! ambient rotations, so all charts of one immersion land in the same
//! Grassmannian.  The central computational object is [`FrameData`]: adapted
//! frames at a point together with their first and second Wirtinger
//! derivatives, obtained either from exact second-order jets (default) or
//! from finite-difference stencils (cross-check backend).  Derivative slots
//! follow the jet convention: slot `i < m` is `d/dz_i`, slot `m + i` is
//! `d/dz̄_i`.

use crate::grassmann::{AmbientTangent, GrassmannPoint};
use crate::jet::{mat_pd, mat_pd2, mat_val, Jet};
use crate::linalg::{
    complete_frame, complete_frame_seeded, orthonormalize, solve_general, CMat, Mat, Scalar, C64,
};
use crate::tol::FIRST_ORDER_TOL;
use crate::{Error, Result};
use rand::Rng;
use serde::Deserialize;

/// One monomial `coeff * z_1^{k_1} ... z_m^{k_m}` of a chart-map entry.
#[derive(Clone, Debug)]
pub struct MonomialTerm {
    pub coeff: C64,
    pub powers: Vec<u32>,
}

/// A matrix of polynomials in `m` complex variables; the chart map of an
/// immersion, with columns spanning the image plane.
#[derive(Clone, Debug)]
pub struct ChartPolynomial {
    rows: usize,
    cols: usize,
    m: usize,
    /// Row-major entry terms.
    entries: Vec<Vec<MonomialTerm>>,
}

impl ChartPolynomial {
    pub fn new(rows: usize, cols: usize, m: usize, entries: Vec<Vec<MonomialTerm>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        for terms in &entries {
            for t in terms {
                if t.powers.len() != m {
                    return Err(Error::InvalidParameter(format!(
                        "monomial exponent vector has length {}, expected {m}",
                        t.powers.len()
                    )));
                }
            }
        }
        Ok(ChartPolynomial {
            rows,
            cols,
            m,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.m
    }

    /// Evaluates the polynomial matrix over any scalar (complex numbers or
    /// jets), sharing one code path between plain and differentiated
    /// evaluation.
    pub fn eval<T: Scalar>(&self, z: &[T]) -> Mat<T> {
        assert_eq!(z.len(), self.m, "wrong number of chart coordinates");
        Mat::from_fn(self.rows, self.cols, |i, j| {
            let mut acc = T::zero();
            for term in &self.entries[i * self.cols + j] {
                let mut prod = T::from_c64(term.coeff);
                for (v, &k) in z.iter().zip(&term.powers) {
                    for _ in 0..k {
                        prod = prod * v.clone();
                    }
                }
                acc = acc + prod;
            }
            acc
        })
    }

    /// Value and exact holomorphic partial derivatives of the polynomial
    /// matrix, differentiating monomials termwise.  Much cheaper than a jet
    /// evaluation when only first-order data is needed.
    pub fn eval_gradient(&self, z: &[C64]) -> (CMat, Vec<CMat>) {
        assert_eq!(z.len(), self.m, "wrong number of chart coordinates");
        let entry = |i: usize, j: usize, slot: Option<usize>| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            'terms: for term in &self.entries[i * self.cols + j] {
                let mut prod = term.coeff;
                for (v, (&zv, &k)) in z.iter().zip(&term.powers).enumerate() {
                    let mut pow = k;
                    if slot == Some(v) {
                        if k == 0 {
                            continue 'terms;
                        }
                        prod *= k as f64;
                        pow -= 1;
                    }
                    for _ in 0..pow {
                        prod *= zv;
                    }
                }
                acc += prod;
            }
            acc
        };
        let value = Mat::from_fn(self.rows, self.cols, |i, j| entry(i, j, None));
        let grads = (0..self.m)
            .map(|a| Mat::from_fn(self.rows, self.cols, |i, j| entry(i, j, Some(a))))
            .collect();
        (value, grads)
    }

    /// The chart map composed with a constant ambient rotation `g`.
    pub fn rotated(&self, g: &CMat) -> Result<ChartPolynomial> {
        if g.rows() != self.rows || g.cols() != self.rows {
            return Err(Error::DimensionMismatch(
                "rotation must act on the ambient space".into(),
            ));
        }
        let mut entries = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let mut terms: Vec<MonomialTerm> = Vec::new();
                for k in 0..self.rows {
                    let gik = g[(i, k)];
                    if gik.norm() < 1e-15 {
                        continue;
                    }
                    for t in &self.entries[k * self.cols + j] {
                        terms.push(MonomialTerm {
                            coeff: gik * t.coeff,
                            powers: t.powers.clone(),
                        });
                    }
                }
                entries.push(terms);
            }
        }
        ChartPolynomial::new(self.rows, self.cols, self.m, entries)
    }
}

/// Builds a monomial term from real/imaginary coefficient parts.
pub fn term(re: f64, im: f64, powers: Vec<u32>) -> MonomialTerm {
    MonomialTerm {
        coeff: C64::new(re, im),
        powers,
    }
}

/// `exp(-1/s)` glue, the standard smooth step: 0 for `s <= 0`, 1 for
/// `s >= 1`, strictly increasing in between, C-infinity everywhere.
fn smooth_step(s: f64) -> f64 {
    let g = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let a = g(s);
    let b = g(1.0 - s);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Bump in the chart-local squared radius `t`: identically 1 for `t <= t0`,
/// identically 0 for `t >= t1`.
fn radial_bump(t: f64, t0: f64, t1: f64) -> f64 {
    smooth_step((t1 - t) / (t1 - t0))
}

/// How the base manifold of an immersion is covered by its charts.
///
/// The first two variants provide a genuine finite atlas together with a
/// smooth partition of unity subordinate to polydiscs, which is what the
/// quadrature needs; [`BaseSpace::Dense`] marks a single chart covering a
/// dense open subset (fine for pointwise sampling, unusable for global
/// integrals).
#[derive(Clone, Debug, PartialEq)]
pub enum BaseSpace {
    /// `CP^m` with its `m + 1` standard affine charts; chart `j`
    /// parametrizes `{x_j != 0}` after swapping homogeneous slots `0` and
    /// `j`.
    Projective { m: usize },
    /// A product of `factors` projective lines; chart bits flip factors
    /// through `z -> 1/z`.
    ProductLines { factors: usize },
    /// One chart, dense image, no covering quadrature available; `radius`
    /// bounds the sampling polydisc.
    Dense { m: usize, radius: f64 },
}

impl BaseSpace {
    /// Single dense chart with the default sampling radius.
    pub fn dense(m: usize) -> Self {
        BaseSpace::Dense { m, radius: 1.5 }
    }
}

impl BaseSpace {
    pub fn m(&self) -> usize {
        match self {
            BaseSpace::Projective { m } => *m,
            BaseSpace::ProductLines { factors } => *factors,
            BaseSpace::Dense { m, .. } => *m,
        }
    }

    pub fn chart_count(&self) -> usize {
        match self {
            BaseSpace::Projective { m } => m + 1,
            BaseSpace::ProductLines { factors } => 1 << factors,
            BaseSpace::Dense { .. } => 1,
        }
    }

    /// Whether the atlas plus partition of unity covers the whole base.
    pub fn covers(&self) -> bool {
        !matches!(self, BaseSpace::Dense { .. })
    }

    /// Bump thresholds `(t0, t1)` in the chart-local squared radius.
    fn bump_range(&self) -> (f64, f64) {
        match self {
            BaseSpace::Projective { m } => (*m as f64 + 0.25, *m as f64 + 1.25),
            BaseSpace::ProductLines { .. } => (1.25, 2.5),
            BaseSpace::Dense { radius, .. } => (radius * radius * 0.5, radius * radius),
        }
    }

    /// Radius of the sampling polydisc per complex coordinate; the support
    /// of every partition weight is contained in the corresponding closed
    /// polydisc.
    pub fn domain_radius(&self) -> f64 {
        match self {
            BaseSpace::Dense { radius, .. } => *radius,
            _ => self.bump_range().1.sqrt(),
        }
    }

    /// Homogeneous coordinates of the point with parameters `z` in
    /// `chart` (projective base only).
    fn homogeneous(&self, chart: usize, z: &[C64]) -> Vec<C64> {
        let m = self.m();
        let mut x = Vec::with_capacity(m + 1);
        x.push(C64::new(1.0, 0.0));
        x.extend_from_slice(z);
        x.swap(0, chart);
        x
    }

    /// Smooth partition-of-unity weight of `chart` at its local point `z`.
    /// Weights over all charts containing a point sum to one, and each
    /// weight vanishes outside the chart's sampling polydisc.
    pub fn partition_weight(&self, chart: usize, z: &[C64]) -> f64 {
        let (t0, t1) = self.bump_range();
        match self {
            BaseSpace::Dense { .. } => 1.0,
            BaseSpace::Projective { m } => {
                let x = self.homogeneous(chart, z);
                let total: f64 = x.iter().map(|c| c.norm_sqr()).sum();
                let psi = |k: usize| -> f64 {
                    let xk = x[k].norm_sqr();
                    if xk == 0.0 {
                        0.0
                    } else {
                        radial_bump(total / xk - 1.0, t0, t1)
                    }
                };
                let mine = psi(chart);
                if mine == 0.0 {
                    return 0.0;
                }
                let sum: f64 = (0..=*m).map(psi).sum();
                mine / sum
            }
            BaseSpace::ProductLines { factors } => {
                let psi_chart = |c: usize| -> f64 {
                    let mut prod = 1.0;
                    for (i, zi) in z.iter().enumerate() {
                        // Local squared radius of factor i as seen from
                        // chart c: own coordinate if the flip bits agree,
                        // inverted otherwise.
                        let r2 = zi.norm_sqr();
                        let flip_differs = ((c >> i) & 1) != ((chart >> i) & 1);
                        let t = if flip_differs {
                            if r2 == 0.0 {
                                return 0.0;
                            }
                            1.0 / r2
                        } else {
                            r2
                        };
                        prod *= radial_bump(t, t0, t1);
                        if prod == 0.0 {
                            return 0.0;
                        }
                    }
                    prod
                };
                let mine = psi_chart(chart);
                if mine == 0.0 {
                    return 0.0;
                }
                let sum: f64 = (0..(1 << factors)).map(psi_chart).sum();
                mine / sum
            }
        }
    }

    /// Coordinates of the same base point in another chart, when defined.
    pub fn transition(&self, from: usize, z: &[C64], to: usize) -> Option<Vec<C64>> {
        match self {
            BaseSpace::Dense { .. } => (from == to).then(|| z.to_vec()),
            BaseSpace::Projective { .. } => {
                let mut x = self.homogeneous(from, z);
                x.swap(0, to);
                if x[0].norm() < 1e-12 {
                    return None;
                }
                let x0 = x[0];
                Some(x.iter().skip(1).map(|&c| c / x0).collect())
            }
            BaseSpace::ProductLines { .. } => {
                let mut out = Vec::with_capacity(z.len());
                for (i, &zi) in z.iter().enumerate() {
                    if ((from >> i) & 1) != ((to >> i) & 1) {
                        if zi.norm() < 1e-12 {
                            return None;
                        }
                        out.push(C64::new(1.0, 0.0) / zi);
                    } else {
                        out.push(zi);
                    }
                }
                Some(out)
            }
        }
    }

    /// Holomorphic Jacobian `J_{kl} = d tau_k / d z_l` of the transition map
    /// by central differences.
    pub fn transition_jacobian(&self, from: usize, z: &[C64], to: usize) -> Option<CMat> {
        let m = self.m();
        let h = 1e-6;
        let mut j = CMat::zeros(m, m);
        for l in 0..m {
            let mut zp = z.to_vec();
            zp[l] += C64::new(h, 0.0);
            let mut zm = z.to_vec();
            zm[l] -= C64::new(h, 0.0);
            let tp = self.transition(from, &zp, to)?;
            let tm = self.transition(from, &zm, to)?;
            for k in 0..m {
                j[(k, l)] = (tp[k] - tm[k]) / (2.0 * h);
            }
        }
        Some(j)
    }
}

/// Differentiation backend for frame data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffMode {
    /// Exact second-order Wirtinger jets (default).
    Jets,
    /// Central finite differences on orthonormalized frames.
    CentralDifferences,
}

#[derive(Clone, Copy, Debug)]
pub struct DiffConfig {
    pub mode: DiffMode,
    /// Step for the finite-difference backend, balanced for mixed first and
    /// second derivative stencils.
    pub step: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            mode: DiffMode::Jets,
            step: 1e-4,
        }
    }
}

/// Adapted frames at a chart point together with first and second Wirtinger
/// derivatives of both frame blocks.  All downstream geometry (pushforwards,
/// connection forms, second fundamental form) reads from this structure,
/// making it independent of the differentiation backend.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub m: usize,
    /// Canonical adapted frame at the center.
    pub point: GrassmannPoint,
    /// `d F_S / d slot`, `2m` slots.
    dfs: Vec<CMat>,
    /// `d F_Q / d slot`.
    dfq: Vec<CMat>,
    /// `d^2 F_S / (d slot_a d slot_b)`, row-major over `(2m)^2`.
    d2fs: Vec<CMat>,
}

impl FrameData {
    pub fn dfs(&self, slot: usize) -> &CMat {
        &self.dfs[slot]
    }

    pub fn dfq(&self, slot: usize) -> &CMat {
        &self.dfq[slot]
    }

    pub fn d2fs(&self, a: usize, b: usize) -> &CMat {
        &self.d2fs[a * 2 * self.m + b]
    }

    /// Connection form of the plane bundle in slot `a`: `F_S^H d_a F_S`.
    pub fn omega_s(&self, a: usize) -> CMat {
        self.point.frame_s().adjoint().mul(&self.dfs[a])
    }

    /// Connection form of the quotient bundle in slot `a`: `F_Q^H d_a F_Q`.
    pub fn omega_q(&self, a: usize) -> CMat {
        self.point.frame_q().adjoint().mul(&self.dfq[a])
    }

    /// Pushforward matrix of the holomorphic coordinate field `d/dz_i`:
    /// `W_i = F_Q^H d_i F_S`, a `q x p` tangent matrix.
    pub fn push(&self, i: usize) -> CMat {
        self.point.frame_q().adjoint().mul(&self.dfs[i])
    }

    /// Antiholomorphic pushforward residual `F_Q^H d_{z̄_i} F_S`; vanishes
    /// for holomorphic chart maps.
    pub fn push_bar_residual(&self, i: usize) -> CMat {
        self.point.frame_q().adjoint().mul(&self.dfs[self.m + i])
    }

    /// Slot derivative of the pushforward matrix:
    /// `d_a W_i = (d_{σa} F_Q)^H d_i F_S + F_Q^H d_a d_i F_S` where σ swaps
    /// holomorphic and antiholomorphic slots.
    pub fn d_push(&self, a: usize, i: usize) -> CMat {
        let sa = (a + self.m) % (2 * self.m);
        self.dfq[sa]
            .adjoint()
            .mul(&self.dfs[i])
            .add(&self.point.frame_q().adjoint().mul(self.d2fs(a, i)))
    }

    /// Induced Hermitian metric `h_{ij̄} = <W_i, W_j>` of the chart
    /// coordinates.
    pub fn induced_metric(&self) -> CMat {
        let w: Vec<CMat> = (0..self.m).map(|i| self.push(i)).collect();
        Mat::from_fn(self.m, self.m, |i, j| w[i].frob_inner(&w[j]))
    }

    /// Pushforward of the chart vector `u` as an ambient tangent.
    pub fn pushforward(&self, u: &[C64]) -> Result<AmbientTangent> {
        assert_eq!(u.len(), self.m);
        let mut mat = CMat::zeros(self.point.q(), self.point.p());
        for (i, &ui) in u.iter().enumerate() {
            mat = mat.add(&self.push(i).scale(ui));
        }
        self.point.tangent(mat)
    }
}

/// A holomorphic immersion of a compact base into `Gr_p(C^n)`, given by one
/// polynomial chart map per atlas chart (all differing by constant ambient
/// rotations).
#[derive(Clone, Debug)]
pub struct Immersion {
    pub name: String,
    pub base: BaseSpace,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    charts: Vec<ChartPolynomial>,
    /// Known closed-form facts about the member, when it comes from the
    /// catalog.
    pub expected: Option<Expectations>,
}

/// Closed-form facts about a catalog member, used as frozen oracles by the
/// test-suite and echoed into reports.
#[derive(Clone, Debug)]
pub struct Expectations {
    /// Pulled-back quotient bundle is projectively flat.
    pub flat: bool,
    /// Second fundamental form is parallel.
    pub parallel: bool,
    /// Minimal holomorphic sectional curvature over the unit tangent bundle.
    pub min_hol: f64,
    /// Holomorphic sectional curvature is direction-independent.
    pub hol_constant: bool,
    /// Riemannian volume of the base in the induced metric, when known.
    pub volume: Option<f64>,
    pub description: String,
}

impl Immersion {
    pub fn new(
        name: impl Into<String>,
        base: BaseSpace,
        charts: Vec<ChartPolynomial>,
        expected: Option<Expectations>,
    ) -> Result<Self> {
        if charts.is_empty() {
            return Err(Error::InvalidParameter("immersion needs at least one chart".into()));
        }
        if charts.len() != base.chart_count() {
            return Err(Error::InvalidParameter(format!(
                "base expects {} charts, got {}",
                base.chart_count(),
                charts.len()
            )));
        }
        let n = charts[0].rows();
        let p = charts[0].cols();
        let m = base.m();
        if p == 0 || p >= n {
            return Err(Error::InvalidParameter(format!(
                "chart map must span a proper plane: n={n}, p={p}"
            )));
        }
        for c in &charts {
            if c.rows() != n || c.cols() != p || c.nvars() != m {
                return Err(Error::DimensionMismatch(
                    "all charts must share the same shape and variable count".into(),
                ));
            }
        }
        Ok(Immersion {
            name: name.into(),
            base,
            n,
            p,
            q: n - p,
            charts,
            expected,
        })
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }

    pub fn chart(&self, j: usize) -> &ChartPolynomial {
        &self.charts[j]
    }

    /// The dimension of the normal space of the immersion inside the
    /// Grassmannian tangent space.
    pub fn normal_rank(&self) -> usize {
        self.p * self.q - self.m()
    }

    /// Adapted frame at a chart point: Gram–Schmidt of the chart map columns
    /// plus the deterministic pivoted completion.
    pub fn evaluate(&self, chart: usize, z: &[C64]) -> Result<GrassmannPoint> {
        let span = self.charts[chart].eval(z);
        let fs = orthonormalize(&span)?;
        let fq = complete_frame(&fs)?;
        GrassmannPoint::from_frames(fs, fq)
    }

    /// Frames and their derivatives at a chart point, in the canonical gauge
    /// (deterministic pivoted completion at the point itself).
    pub fn frame_data(&self, chart: usize, z: &[C64], cfg: &DiffConfig) -> Result<FrameData> {
        let span = self.charts[chart].eval(z);
        let fs = orthonormalize(&span)?;
        let fq = complete_frame(&fs)?;
        self.frame_data_seeded(chart, z, cfg, &fq)
    }

    /// Frames and derivatives with the complement frame continued smoothly
    /// from `seed` (an orthonormal complement at a nearby point).  Fixing one
    /// seed across several evaluation points puts them all in a common smooth
    /// gauge, which outer finite-difference layers require.
    pub fn frame_data_seeded(
        &self,
        chart: usize,
        z: &[C64],
        cfg: &DiffConfig,
        seed: &CMat,
    ) -> Result<FrameData> {
        let span = self.charts[chart].eval(z);
        let fs = orthonormalize(&span)?;
        let fq = complete_frame_seeded(&fs, seed)?;
        let center = GrassmannPoint::from_frames(fs, fq)?;
        match cfg.mode {
            DiffMode::Jets => self.frame_data_jets(chart, z, center, seed),
            DiffMode::CentralDifferences => self.frame_data_fd(chart, z, center, cfg.step, seed),
        }
    }

    fn frame_data_jets(
        &self,
        chart: usize,
        z: &[C64],
        center: GrassmannPoint,
        seed: &CMat,
    ) -> Result<FrameData> {
        let m = self.m();
        let vars = Jet::variables(z);
        let span = self.charts[chart].eval(&vars);
        let fs = orthonormalize(&span)?;
        let fq = complete_frame_seeded(&fs, seed)?;
        let k2 = 2 * m;
        let dfs: Vec<CMat> = (0..k2).map(|a| mat_pd(&fs, a)).collect();
        let dfq: Vec<CMat> = (0..k2).map(|a| mat_pd(&fq, a)).collect();
        let mut d2fs = Vec::with_capacity(k2 * k2);
        for a in 0..k2 {
            for b in 0..k2 {
                d2fs.push(mat_pd2(&fs, a, b));
            }
        }
        // The jet centers coincide with the canonical frames by construction;
        // guard against drift anyway.
        debug_assert!(mat_val(&fs).sub(center.frame_s()).fnorm() < 1e-10);
        Ok(FrameData {
            m,
            point: center,
            dfs,
            dfq,
            d2fs,
        })
    }

    fn frame_data_fd(
        &self,
        chart: usize,
        z: &[C64],
        center: GrassmannPoint,
        h: f64,
        seed: &CMat,
    ) -> Result<FrameData> {
        let m = self.m();
        let k2 = 2 * m;
        // Frames at a shifted point, completed smoothly from the shared seed.
        let frames_at = |dz: &[C64]| -> Result<(CMat, CMat)> {
            let zp: Vec<C64> = z.iter().zip(dz).map(|(a, b)| a + b).collect();
            let span = self.charts[chart].eval(&zp);
            let fs = orthonormalize(&span)?;
            let fq = complete_frame_seeded(&fs, seed)?;
            Ok((fs, fq))
        };
        // Real axes: axis a < m shifts Re(z_a), axis m + a shifts Im(z_a).
        let shift = |axis: usize, s: f64| -> Vec<C64> {
            let mut dz = vec![C64::new(0.0, 0.0); m];
            if axis < m {
                dz[axis] = C64::new(s, 0.0);
            } else {
                dz[axis - m] = C64::new(0.0, s);
            }
            dz
        };
        let zero = vec![C64::new(0.0, 0.0); m];
        let f0 = frames_at(&zero)?;
        let mut fp = Vec::with_capacity(k2);
        let mut fm = Vec::with_capacity(k2);
        for a in 0..k2 {
            fp.push(frames_at(&shift(a, h))?);
            fm.push(frames_at(&shift(a, -h))?);
        }
        // First real derivatives per axis.
        let d1 = |block: &dyn Fn(&(CMat, CMat)) -> CMat, a: usize| -> CMat {
            block(&fp[a])
                .sub(&block(&fm[a]))
                .scale(C64::new(1.0 / (2.0 * h), 0.0))
        };
        // Second real derivatives (diagonal and mixed corner stencils).
        let mut corners: Vec<Vec<Option<[CMat; 4]>>> = vec![vec![None; k2]; k2];
        for a in 0..k2 {
            for b in a + 1..k2 {
                let mk = |sa: f64, sb: f64| -> Result<CMat> {
                    let mut dz = shift(a, sa);
                    let db = shift(b, sb);
                    for i in 0..m {
                        dz[i] += db[i];
                    }
                    Ok(frames_at(&dz)?.0)
                };
                corners[a][b] = Some([mk(h, h)?, mk(h, -h)?, mk(-h, h)?, mk(-h, -h)?]);
            }
        }
        let d2_real = |a: usize, b: usize| -> CMat {
            if a == b {
                fp[a].0
                    .sub(&f0.0.scale(C64::new(2.0, 0.0)))
                    .add(&fm[a].0)
                    .scale(C64::new(1.0 / (h * h), 0.0))
            } else {
                let (lo, hi) = (a.min(b), a.max(b));
                let c = corners[lo][hi].as_ref().unwrap();
                c[0].sub(&c[1])
                    .sub(&c[2])
                    .add(&c[3])
                    .scale(C64::new(1.0 / (4.0 * h * h), 0.0))
            }
        };
        // Wirtinger combinations: slot s differentiates with
        // (X_v + c_s i Y_v)/2 where v = s mod m and c_s = -1 on holomorphic
        // slots, +1 on antiholomorphic ones.
        let coeff = |s: usize| if s < m { -1.0 } else { 1.0 };
        let axis_x = |s: usize| s % m;
        let axis_y = |s: usize| m + s % m;
        let i_unit = C64::new(0.0, 1.0);
        let wirt1 = |block: &dyn Fn(&(CMat, CMat)) -> CMat, s: usize| -> CMat {
            let dx = d1(block, axis_x(s));
            let dy = d1(block, axis_y(s));
            dx.add(&dy.scale(i_unit * coeff(s)))
                .scale(C64::new(0.5, 0.0))
        };
        let fs_block: &dyn Fn(&(CMat, CMat)) -> CMat = &|f| f.0.clone();
        let fq_block: &dyn Fn(&(CMat, CMat)) -> CMat = &|f| f.1.clone();
        let dfs: Vec<CMat> = (0..k2).map(|s| wirt1(fs_block, s)).collect();
        let dfq: Vec<CMat> = (0..k2).map(|s| wirt1(fq_block, s)).collect();
        let mut d2fs = Vec::with_capacity(k2 * k2);
        for s in 0..k2 {
            for t in 0..k2 {
                let xx = d2_real(axis_x(s), axis_x(t));
                let xy = d2_real(axis_x(s), axis_y(t));
                let yx = d2_real(axis_y(s), axis_x(t));
                let yy = d2_real(axis_y(s), axis_y(t));
                let v = xx
                    .add(&xy.scale(i_unit * coeff(t)))
                    .add(&yx.scale(i_unit * coeff(s)))
                    .sub(&yy.scale(C64::new(coeff(s) * coeff(t), 0.0)))
                    .scale(C64::new(0.25, 0.0));
                d2fs.push(v);
            }
        }
        Ok(FrameData {
            m,
            point: center,
            dfs,
            dfq,
            d2fs,
        })
    }

    /// Pushforward of the chart vector `u` at a chart point.
    pub fn pushforward(&self, chart: usize, z: &[C64], u: &[C64]) -> Result<AmbientTangent> {
        self.frame_data(chart, z, &DiffConfig::default())?.pushforward(u)
    }

    /// Induced Hermitian metric of the chart coordinates at a point.
    ///
    /// Uses only the span and its first holomorphic derivatives:
    /// `h_{ij} = tr(∂_j S^H (1 − S G^{-1} S^H) ∂_i S · G^{-1})` with
    /// `G = S^H S`, which agrees with the frame-based metric but skips the
    /// second-order jet machinery.
    pub fn induced_metric(&self, chart: usize, z: &[C64]) -> Result<CMat> {
        let (s, ds) = self.charts[chart].eval_gradient(z);
        let g = s.adjoint().mul(&s);
        let x: Vec<CMat> = ds.iter().map(|d| s.adjoint().mul(d)).collect();
        let y: Vec<CMat> = x
            .iter()
            .map(|xi| solve_general(&g, xi))
            .collect::<Result<_>>()?;
        let m = self.m();
        let mut h = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mij = ds[j].adjoint().mul(&ds[i]).sub(&x[j].adjoint().mul(&y[i]));
                h[(i, j)] = solve_general(&g, &mij)?.trace();
            }
        }
        Ok(h)
    }

    /// Verifies that the plane family is holomorphic at a point: the
    /// antiholomorphic pushforward residuals must vanish.
    pub fn check_holomorphy(&self, chart: usize, z: &[C64]) -> Result<f64> {
        let fd = self.frame_data(chart, z, &DiffConfig::default())?;
        let mut worst: f64 = 0.0;
        for i in 0..self.m() {
            worst = worst.max(fd.push_bar_residual(i).fnorm());
        }
        if worst > FIRST_ORDER_TOL {
            return Err(Error::NotHolomorphic(worst));
        }
        Ok(worst)
    }

    /// Verifies that the chart map is immersive at a point: the induced
    /// metric must be positive definite well away from zero.
    pub fn check_immersive(&self, chart: usize, z: &[C64]) -> Result<f64> {
        let g = self.induced_metric(chart, z)?;
        let d = crate::linalg::det(&g).re;
        if !(d > 1e-12) {
            let rank = (0..self.m())
                .filter(|&i| g[(i, i)].re > 1e-12)
                .count();
            return Err(Error::NotImmersive {
                rank,
                expected: self.m(),
            });
        }
        Ok(d)
    }

    /// Uniform random point of the chart's sampling polydisc.
    pub fn random_chart_point(&self, rng: &mut impl Rng) -> Vec<C64> {
        let r = self.base.domain_radius();
        (0..self.m())
            .map(|_| C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r)))
            .collect()
    }
}

/// On-disk description of a user-supplied immersion: a single polynomial
/// chart in monomial form.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImmersionFile {
    name: String,
    n: usize,
    p: usize,
    m: usize,
    #[serde(default)]
    radius: Option<f64>,
    entries: Vec<EntryFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    row: usize,
    col: usize,
    coeff: [f64; 2],
    powers: Vec<u32>,
}

/// Loads a user-supplied immersion from JSON and validates it at a handful
/// of sample points (frame rank, immersivity, holomorphy of the resulting
/// plane family).
pub fn load_immersion_json(text: &str) -> Result<Immersion> {
    let file: ImmersionFile = serde_json::from_str(text)
        .map_err(|e| Error::MalformedImmersion(e.to_string()))?;
    if file.p == 0 || file.p >= file.n {
        return Err(Error::MalformedImmersion(format!(
            "need 0 < p < n, got p={}, n={}",
            file.p, file.n
        )));
    }
    if file.m == 0 {
        return Err(Error::MalformedImmersion("base dimension m must be positive".into()));
    }
    if file.p * (file.n - file.p) < file.m {
        return Err(Error::MalformedImmersion(format!(
            "base dimension m={} exceeds the Grassmannian dimension {}",
            file.m,
            file.p * (file.n - file.p)
        )));
    }
    let mut entries: Vec<Vec<MonomialTerm>> = vec![Vec::new(); file.n * file.p];
    for e in &file.entries {
        if e.row >= file.n || e.col >= file.p {
            return Err(Error::MalformedImmersion(format!(
                "entry ({}, {}) outside the {} x {} chart map",
                e.row, e.col, file.n, file.p
            )));
        }
        if e.powers.len() != file.m {
            return Err(Error::MalformedImmersion(format!(
                "entry ({}, {}) has {} exponents, expected {}",
                e.row,
                e.col,
                e.powers.len(),
                file.m
            )));
        }
        entries[e.row * file.p + e.col].push(MonomialTerm {
            coeff: C64::new(e.coeff[0], e.coeff[1]),
            powers: e.powers.clone(),
        });
    }
    let chart = ChartPolynomial::new(file.n, file.p, file.m, entries)?;
    let base = match file.radius {
        None => BaseSpace::dense(file.m),
        Some(r) if r > 0.0 => BaseSpace::Dense {
            m: file.m,
            radius: r,
        },
        Some(_) => {
            return Err(Error::MalformedImmersion("radius must be positive".into()));
        }
    };
    let imm = Immersion::new(file.name, base, vec![chart], None)?;
    // Validate at the origin and a few fixed sample points.
    let probes: Vec<Vec<C64>> = vec![
        vec![C64::new(0.0, 0.0); file.m],
        (0..file.m)
            .map(|i| C64::new(0.31 + 0.07 * i as f64, -0.22 + 0.05 * i as f64))
            .collect(),
        (0..file.m)
            .map(|i| C64::new(-0.4 + 0.11 * i as f64, 0.35 - 0.04 * i as f64))
            .collect(),
    ];
    for z in &probes {
        imm.evaluate(0, z).map_err(|e| {
            Error::MalformedImmersion(format!("chart map degenerates at a probe point: {e}"))
        })?;
        imm.check_immersive(0, z)?;
        imm.check_holomorphy(0, z)?;
    }
    Ok(imm)
}
