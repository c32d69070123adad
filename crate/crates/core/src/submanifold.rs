//! Second fundamental form and curvature identities of a holomorphic
//! isometric immersion into the Grassmannian.
//!
//! At a chart point the pushforwards `W_i` of the coordinate fields span the
//! holomorphic tangent space of the submanifold inside the ambient tangent
//! space `Hom(S, Q)`; the Frobenius-orthogonal complement of that span is the
//! holomorphic normal space `N`.  This module computes, all at desk scale,
//!
//! * the second fundamental form `σ(∂_i, ∂_j)` as the normal component of the
//!   ambient covariant derivative of the pushforward field,
//! * the shape operator `A_ξ` by metric duality against `σ`,
//! * the chart Christoffel symbols and from them the intrinsic curvature of
//!   the induced metric,
//! * covariant derivatives `∇σ` and `∇_{V̄}σ` (an outer finite-difference
//!   layer over exact per-point data),
//! * the curvature of the normal connection.
//!
//! Each of these follows an independent code path, so the classical Gauss,
//! Codazzi, and Ricci relations checked by the test-suite are genuine
//! cross-validations rather than restatements of the construction.

use crate::grassmann::{curvature_gr, hol_sectional, AmbientTangent};
use crate::immersion::{DiffConfig, FrameData, Immersion};
use crate::linalg::{solve_general, CMat, Mat, C64};
use crate::tol::{DEGENERATE_TOL, FD_OUTER_STEP, FD_STEP, FIRST_ORDER_TOL};
use crate::{Error, Result};

/// The real structure on complexified chart tangents: component-wise
/// conjugation, exchanging `(1,0)` and `(0,1)` coefficient vectors.
pub fn tau(u: &[C64]) -> Vec<C64> {
    u.iter().map(|c| c.conj()).collect()
}

fn mat_vec(a: &CMat, v: &[C64]) -> Vec<C64> {
    assert_eq!(a.cols(), v.len());
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

fn solve_vec(a: &CMat, b: &[C64]) -> Result<Vec<C64>> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = solve_general(a, &rhs)?;
    Ok((0..b.len()).map(|i| x[(i, 0)]).collect())
}

/// Second fundamental form data of an immersion at one chart point.
///
/// Everything is expressed in the adapted frame of the underlying
/// [`FrameData`]: tangent and normal vectors are raw `q x p` matrices, chart
/// vectors are coefficient tuples against `∂/∂z_i`.
#[derive(Clone, Debug)]
pub struct FundamentalFormData {
    pub chart: usize,
    pub z: Vec<C64>,
    pub frame: FrameData,
    /// Induced metric `h_{ij̄} = <W_i, W_j>`.
    pub h: CMat,
    pub h_inv: CMat,
    /// Pushforwards `W_i` of the chart coordinate fields.
    pub tangent_frame: Vec<CMat>,
    /// Frobenius-orthonormal basis of the holomorphic normal space; length
    /// `pq - m` for an immersion (possibly zero).
    pub normal_frame: Vec<CMat>,
    /// `σ(∂_i, ∂_j)`, row-major over `(i, j)`; symmetric.
    sigma: Vec<CMat>,
    /// `shape[α]` is the `m x m` matrix `C` with
    /// `A_{ξ_α} ∂̄_k = Σ_l C[(l, k)] ∂_l`.
    pub shape: Vec<CMat>,
    /// `christoffel[i]` holds `Γ^l_{ik}` at `(k, l)`.
    pub christoffel: Vec<CMat>,
}

/// Second fundamental form data in the canonical gauge at the point.
pub fn fundamental_form(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
) -> Result<FundamentalFormData> {
    let pt = imm.evaluate(chart, z)?;
    let fq_seed = pt.frame_q().clone();
    fundamental_form_gauged(imm, chart, z, cfg, &fq_seed, None)
}

/// Second fundamental form data with both the complement frame and the
/// normal frame continued smoothly from seeds at a nearby point.  Outer
/// finite-difference layers evaluate the same smooth gauge at every stencil
/// point; the canonical entry point simply seeds from the point itself.
pub(crate) fn fundamental_form_gauged(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
    fq_seed: &CMat,
    normal_seed: Option<&[CMat]>,
) -> Result<FundamentalFormData> {
    let frame = imm.frame_data_seeded(chart, z, cfg, fq_seed)?;
    let m = imm.m();
    let tangent_frame: Vec<CMat> = (0..m).map(|i| frame.push(i)).collect();
    let h = frame.induced_metric();
    let h_inv = solve_general(&h, &CMat::identity(m))?;

    let tang_coeff = |x: &CMat| -> Vec<C64> {
        let b: Vec<C64> = tangent_frame.iter().map(|w| x.frob_inner(w)).collect();
        mat_vec(&h_inv.transpose(), &b)
    };
    let project_normal = |x: &CMat| -> CMat {
        let c = tang_coeff(x);
        let mut out = x.clone();
        for (i, w) in tangent_frame.iter().enumerate() {
            out = out.sub(&w.scale(c[i]));
        }
        out
    };

    let normal_frame = build_normal_frame(
        imm.q,
        imm.p,
        imm.normal_rank(),
        &project_normal,
        normal_seed,
    )?;

    // σ(∂_i, ∂_j): normal part of the covariant derivative of the
    // pushforward field, with both bundle connection forms in slot i.
    let mut sigma = Vec::with_capacity(m * m);
    for i in 0..m {
        let oq = frame.omega_q(i);
        let os = frame.omega_s(i);
        for j in 0..m {
            let d = frame
                .d_push(i, j)
                .add(&oq.mul(&tangent_frame[j]))
                .sub(&tangent_frame[j].mul(&os));
            sigma.push(project_normal(&d));
        }
    }

    // Chart Christoffel symbols of the induced Kaehler metric:
    // Γ^l_{ik} solves Σ_l Γ^l_{ik} h_{lj̄} = ∂_i h_{kj̄}.
    let mut christoffel = Vec::with_capacity(m);
    for i in 0..m {
        let rhs = Mat::from_fn(m, m, |k, j| {
            let dw_k = frame.d_push(i, k);
            let dw_j_bar = frame.d_push(m + i, j);
            dw_k.frob_inner(&tangent_frame[j]) + tangent_frame[k].frob_inner(&dw_j_bar)
        });
        christoffel.push(rhs.mul(&h_inv));
    }

    // Shape operator against each normal frame vector, by duality:
    // h(A_ξ ∂̄_k, ∂_j) = conj h(σ(∂_k, ∂_j), ξ).
    let ht = h.transpose();
    let mut shape = Vec::with_capacity(normal_frame.len());
    for xi in &normal_frame {
        let mut c = CMat::zeros(m, m);
        for k in 0..m {
            let b: Vec<C64> = (0..m)
                .map(|j| sigma[k * m + j].frob_inner(xi).conj())
                .collect();
            let x = solve_vec(&ht, &b)?;
            c.set_col(k, &x);
        }
        shape.push(c);
    }

    Ok(FundamentalFormData {
        chart,
        z: z.to_vec(),
        frame,
        h,
        h_inv,
        tangent_frame,
        normal_frame,
        sigma,
        shape,
        christoffel,
    })
}

/// Orthonormal basis of the normal space.  Without a seed the candidates are
/// the elementary matrices of `Hom(S, Q)` taken greedily by residual norm
/// (deterministic); with a seed the candidates are the seed vectors in order,
/// which keeps the frame smooth across nearby evaluation points.
fn build_normal_frame(
    q: usize,
    p: usize,
    rank: usize,
    project_normal: &dyn Fn(&CMat) -> CMat,
    normal_seed: Option<&[CMat]>,
) -> Result<Vec<CMat>> {
    let mut frame: Vec<CMat> = Vec::with_capacity(rank);
    let reorth = |x: &CMat, frame: &[CMat]| -> CMat {
        let mut y = x.clone();
        for xi in frame {
            let c = y.frob_inner(xi);
            y = y.sub(&xi.scale(c));
        }
        y
    };
    match normal_seed {
        Some(seed) => {
            for (idx, s) in seed.iter().enumerate() {
                let mut y = reorth(&project_normal(s), &frame);
                let norm = y.fnorm();
                if norm < 0.5 {
                    // A seeded frame vector collapsing means the gauge moved
                    // too far to continue; treat as a degenerate frame.
                    return Err(Error::DegenerateFrame { col: idx, norm });
                }
                y = y.scale(C64::new(1.0 / norm, 0.0));
                // Second pass for orthogonality at roundoff level.
                let mut y2 = reorth(&y, &frame);
                y2 = y2.scale(C64::new(1.0 / y2.fnorm(), 0.0));
                frame.push(y2);
            }
        }
        None => {
            let mut candidates: Vec<CMat> = Vec::with_capacity(p * q);
            for a in 0..q {
                for b in 0..p {
                    let mut e = CMat::zeros(q, p);
                    e[(a, b)] = C64::new(1.0, 0.0);
                    candidates.push(e);
                }
            }
            let residual_sq = |c: &CMat, frame: &[CMat]| -> f64 {
                reorth(&project_normal(c), frame).norm_sq().re
            };
            for _ in 0..rank {
                let mut best = 0usize;
                let mut best_sq = -1.0f64;
                for (idx, c) in candidates.iter().enumerate() {
                    let r = residual_sq(c, &frame);
                    if r > best_sq + DEGENERATE_TOL {
                        best = idx;
                        best_sq = r;
                    }
                }
                if best_sq < 1e-8 {
                    return Err(Error::DegenerateFrame {
                        col: frame.len(),
                        norm: best_sq.max(0.0).sqrt(),
                    });
                }
                let mut y = reorth(&project_normal(&candidates[best]), &frame);
                y = y.scale(C64::new(1.0 / y.fnorm(), 0.0));
                let mut y2 = reorth(&y, &frame);
                y2 = y2.scale(C64::new(1.0 / y2.fnorm(), 0.0));
                frame.push(y2);
            }
        }
    }
    Ok(frame)
}

impl FundamentalFormData {
    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn normal_rank(&self) -> usize {
        self.normal_frame.len()
    }

    /// `σ(∂_i, ∂_j)` as a raw normal matrix.
    pub fn sigma(&self, i: usize, j: usize) -> &CMat {
        &self.sigma[i * self.m() + j]
    }

    /// `σ(u, v)` for chart coefficient vectors, by bilinearity.  Zero inputs
    /// short-circuit to the zero matrix.
    pub fn sigma_vec(&self, u: &[C64], v: &[C64]) -> CMat {
        let m = self.m();
        let q = self.frame.point.q();
        let p = self.frame.point.p();
        let mut out = CMat::zeros(q, p);
        if u.iter().all(|c| c.norm() == 0.0) || v.iter().all(|c| c.norm() == 0.0) {
            return out;
        }
        for i in 0..m {
            for j in 0..m {
                let c = u[i] * v[j];
                if c.norm() > 0.0 {
                    out = out.add(&self.sigma[i * m + j].scale(c));
                }
            }
        }
        out
    }

    /// Coefficients of the tangential part of an ambient matrix against the
    /// pushforward basis.
    pub fn tangent_coefficients(&self, x: &CMat) -> Vec<C64> {
        let b: Vec<C64> = self.tangent_frame.iter().map(|w| x.frob_inner(w)).collect();
        mat_vec(&self.h_inv.transpose(), &b)
    }

    /// Tangential part of an ambient matrix.
    pub fn project_tangent(&self, x: &CMat) -> CMat {
        let c = self.tangent_coefficients(x);
        let mut out = CMat::zeros(x.rows(), x.cols());
        for (i, w) in self.tangent_frame.iter().enumerate() {
            out = out.add(&w.scale(c[i]));
        }
        out
    }

    /// Normal part of an ambient matrix.
    pub fn project_normal(&self, x: &CMat) -> CMat {
        x.sub(&self.project_tangent(x))
    }

    /// Components of a normal matrix against the orthonormal normal frame.
    pub fn normal_coefficients(&self, x: &CMat) -> Vec<C64> {
        self.normal_frame.iter().map(|xi| x.frob_inner(xi)).collect()
    }

    /// Rejects vectors with a tangential component above `tol` relative to
    /// their norm, returning the offending norm.
    pub fn check_normal(&self, xi: &CMat) -> Result<()> {
        let t = self.project_tangent(xi).fnorm();
        if t > FIRST_ORDER_TOL * xi.fnorm().max(1.0) {
            return Err(Error::NotNormal(t));
        }
        Ok(())
    }

    /// `A_ξ ū` as a tangential ambient matrix, for a normal `ξ` and the
    /// conjugate of the chart vector `u`.
    pub fn shape_apply(&self, xi: &CMat, u: &[C64]) -> Result<CMat> {
        self.check_normal(xi)?;
        let c = self.shape_matrix(xi)?;
        let coeff = mat_vec(&c, &tau(u));
        let mut out = CMat::zeros(xi.rows(), xi.cols());
        for (l, w) in self.tangent_frame.iter().enumerate() {
            out = out.add(&w.scale(coeff[l]));
        }
        Ok(out)
    }

    /// The matrix `C` of `A_ξ` against the chart frames:
    /// `A_ξ ∂̄_k = Σ_l C[(l, k)] ∂_l`.
    pub fn shape_matrix(&self, xi: &CMat) -> Result<CMat> {
        let m = self.m();
        let ht = self.h.transpose();
        let mut c = CMat::zeros(m, m);
        for k in 0..m {
            let b: Vec<C64> = (0..m)
                .map(|j| self.sigma[k * m + j].frob_inner(xi).conj())
                .collect();
            let x = solve_vec(&ht, &b)?;
            c.set_col(k, &x);
        }
        Ok(c)
    }

    /// Largest antiholomorphic covariant-derivative residual of the
    /// pushforward field `‖∇_{∂̄_b} W_j‖`; vanishes for holomorphic
    /// isometric immersions and certifies both `σ(Ū, V) = 0` and
    /// `A_ξ U = 0` on `(1,0)` input.
    pub fn mixed_type_residual(&self) -> f64 {
        let m = self.m();
        let mut worst: f64 = 0.0;
        for b in 0..m {
            let oq = self.frame.omega_q(m + b);
            let os = self.frame.omega_s(m + b);
            for j in 0..m {
                let d = self
                    .frame
                    .d_push(m + b, j)
                    .add(&oq.mul(&self.tangent_frame[j]))
                    .sub(&self.tangent_frame[j].mul(&os));
                worst = worst.max(d.fnorm());
            }
        }
        worst
    }

    /// Squared metric norm of a chart vector in the induced metric.
    pub fn metric_norm_sq(&self, u: &[C64]) -> f64 {
        let m = self.m();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                s += self.h[(i, j)] * u[i] * u[j].conj();
            }
        }
        s.re
    }

    /// Largest `‖σ(u, u)‖` over the induced-metric unit sphere is bounded by
    /// the frame norms; this returns the Frobenius norm of the whole tensor,
    /// a cheap gauge-invariant size measure.
    pub fn sigma_total_norm(&self) -> f64 {
        self.sigma.iter().map(|s| s.norm_sq().re).sum::<f64>().sqrt()
    }
}

/// `σ(u, v)` at a point, for chart `(1,0)` coefficient vectors.
pub fn second_fundamental_form(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    u: &[C64],
    v: &[C64],
    cfg: &DiffConfig,
) -> Result<CMat> {
    Ok(fundamental_form(imm, chart, z, cfg)?.sigma_vec(u, v))
}

/// `A_ξ ū` at a point as an ambient tangent, for a normal matrix `ξ` and the
/// conjugate of the chart vector `u`.
pub fn shape_operator(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    xi: &CMat,
    u: &[C64],
    cfg: &DiffConfig,
) -> Result<AmbientTangent> {
    let data = fundamental_form(imm, chart, z, cfg)?;
    let mat = data.shape_apply(xi, u)?;
    data.frame.point.tangent(mat)
}

/// Covariant derivatives of the second fundamental form at a point:
/// `nabla[a][i][j] = (∇_{∂_a} σ)(∂_i, ∂_j)` and
/// `nabla_bar[b][i][j] = (∇_{∂̄_b} σ)(∂_i, ∂_j)`, each a normal matrix.
#[derive(Clone, Debug)]
pub struct CovariantSigma {
    pub m: usize,
    nabla: Vec<CMat>,
    nabla_bar: Vec<CMat>,
}

impl CovariantSigma {
    pub fn nabla(&self, a: usize, i: usize, j: usize) -> &CMat {
        &self.nabla[(a * self.m + i) * self.m + j]
    }

    pub fn nabla_bar(&self, b: usize, i: usize, j: usize) -> &CMat {
        &self.nabla_bar[(b * self.m + i) * self.m + j]
    }

    /// Trilinear contraction `(∇_w σ)(u, v)`.
    pub fn contract(&self, w: &[C64], u: &[C64], v: &[C64]) -> CMat {
        let mut out = self.nabla[0].scale(C64::new(0.0, 0.0));
        for a in 0..self.m {
            for i in 0..self.m {
                for j in 0..self.m {
                    let c = w[a] * u[i] * v[j];
                    out = out.add(&self.nabla(a, i, j).scale(c));
                }
            }
        }
        out
    }

    /// Trilinear contraction `(∇_{v̄} σ)(u, z)`, taking the `(0,1)` direction
    /// as the conjugate of `v`.
    pub fn contract_bar(&self, v: &[C64], u: &[C64], zv: &[C64]) -> CMat {
        let mut out = self.nabla_bar[0].scale(C64::new(0.0, 0.0));
        for b in 0..self.m {
            for i in 0..self.m {
                for j in 0..self.m {
                    let c = v[b].conj() * u[i] * zv[j];
                    out = out.add(&self.nabla_bar(b, i, j).scale(c));
                }
            }
        }
        out
    }

    /// Largest entry norm of the holomorphic derivative; the parallelism
    /// defect at this point.
    pub fn sup_nabla(&self) -> f64 {
        self.nabla.iter().map(|x| x.fnorm()).fold(0.0, f64::max)
    }

    /// Largest entry norm of the antiholomorphic derivative.
    pub fn sup_nabla_bar(&self) -> f64 {
        self.nabla_bar.iter().map(|x| x.fnorm()).fold(0.0, f64::max)
    }

    /// Worst deviation of `nabla` from total symmetry in all three slots
    /// (Codazzi symmetry in the first two plus `σ`-symmetry in the last two).
    pub fn codazzi_defect(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let x = self.nabla(a, i, j);
                    worst = worst.max(x.sub(self.nabla(i, a, j)).fnorm());
                    worst = worst.max(x.sub(self.nabla(a, j, i)).fnorm());
                }
            }
        }
        worst
    }
}

/// Computes `∇σ` by an outer finite-difference layer over the exact
/// per-point second fundamental form, holding the frame gauge fixed at the
/// center and applying connection and Christoffel corrections there.
pub fn covariant_sigma(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
) -> Result<CovariantSigma> {
    covariant_sigma_with_step(imm, chart, z, cfg, FD_STEP)
}

pub fn covariant_sigma_with_step(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
    step: f64,
) -> Result<CovariantSigma> {
    let m = imm.m();
    let center = fundamental_form(imm, chart, z, cfg)?;
    let fq_seed = center.frame.point.frame_q().clone();
    let nseed = center.normal_frame.clone();

    // Raw σ components in the fixed smooth gauge at shifted points.
    let field = |zp: &[C64]| -> Result<Vec<CMat>> {
        Ok(fundamental_form_gauged(imm, chart, zp, cfg, &fq_seed, Some(&nseed))?.sigma)
    };
    let shift = |axis: usize, s: f64| -> Vec<C64> {
        let mut zp = z.to_vec();
        if axis < m {
            zp[axis] += C64::new(s, 0.0);
        } else {
            zp[axis - m] += C64::new(0.0, s);
        }
        zp
    };
    let mut dplus = Vec::with_capacity(2 * m);
    let mut dminus = Vec::with_capacity(2 * m);
    for axis in 0..2 * m {
        dplus.push(field(&shift(axis, step))?);
        dminus.push(field(&shift(axis, -step))?);
    }
    let real_d = |axis: usize, idx: usize| -> CMat {
        dplus[axis][idx]
            .sub(&dminus[axis][idx])
            .scale(C64::new(1.0 / (2.0 * step), 0.0))
    };
    // Wirtinger combination for slot s over 2m slots.
    let wirt = |s: usize, idx: usize| -> CMat {
        let c = if s < m { -1.0 } else { 1.0 };
        let dx = real_d(s % m, idx);
        let dy = real_d(m + s % m, idx);
        dx.add(&dy.scale(C64::new(0.0, c))).scale(C64::new(0.5, 0.0))
    };

    let mut nabla = Vec::with_capacity(m * m * m);
    for a in 0..m {
        let oq = center.frame.omega_q(a);
        let os = center.frame.omega_s(a);
        for i in 0..m {
            for j in 0..m {
                let idx = i * m + j;
                let s0 = &center.sigma[idx];
                let mut d = wirt(a, idx).add(&oq.mul(s0)).sub(&s0.mul(&os));
                d = center.project_normal(&d);
                for l in 0..m {
                    d = d
                        .sub(&center.sigma[l * m + j].scale(center.christoffel[a][(i, l)]))
                        .sub(&center.sigma[i * m + l].scale(center.christoffel[a][(j, l)]));
                }
                nabla.push(d);
            }
        }
    }
    let mut nabla_bar = Vec::with_capacity(m * m * m);
    for b in 0..m {
        let oq = center.frame.omega_q(m + b);
        let os = center.frame.omega_s(m + b);
        for i in 0..m {
            for j in 0..m {
                let idx = i * m + j;
                let s0 = &center.sigma[idx];
                let d = wirt(m + b, idx).add(&oq.mul(s0)).sub(&s0.mul(&os));
                // Mixed-type Christoffel symbols of a Kaehler metric vanish,
                // so only the bundle correction appears.
                nabla_bar.push(center.project_normal(&d));
            }
        }
    }
    Ok(CovariantSigma { m, nabla, nabla_bar })
}

/// `(∇_w σ)(u, v)` at a point for chart `(1,0)` coefficient vectors.
pub fn nabla_sigma(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    w: &[C64],
    u: &[C64],
    v: &[C64],
    cfg: &DiffConfig,
) -> Result<CMat> {
    Ok(covariant_sigma(imm, chart, z, cfg)?.contract(w, u, v))
}

/// `(∇_{v̄} σ)(u, zv)` at a point; the `(0,1)` direction is the conjugate of
/// `v`.
pub fn nabla_bar_sigma(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    v: &[C64],
    u: &[C64],
    zv: &[C64],
    cfg: &DiffConfig,
) -> Result<CMat> {
    Ok(covariant_sigma(imm, chart, z, cfg)?.contract_bar(v, u, zv))
}

/// Intrinsic curvature tensor of the induced metric at a point, stored as
/// `R(∂_i, ∂̄_j) ∂_k = Σ_l R^l_{ik j̄} ∂_l` together with the metric for
/// lowering.
#[derive(Clone, Debug)]
pub struct IntrinsicCurvature {
    pub m: usize,
    pub h: CMat,
    /// `R^l_{ik j̄}` at `((l * m + i) * m + k) * m + j`.
    comp: Vec<C64>,
}

impl IntrinsicCurvature {
    pub fn coeff(&self, l: usize, i: usize, k: usize, jbar: usize) -> C64 {
        self.comp[((l * self.m + i) * self.m + k) * self.m + jbar]
    }

    /// Fully lowered component `R(∂_i, ∂̄_j, ∂_k, ∂̄_l)`.
    pub fn lowered(&self, i: usize, jbar: usize, k: usize, lbar: usize) -> C64 {
        (0..self.m)
            .map(|s| self.coeff(s, i, k, jbar) * self.h[(s, lbar)])
            .sum()
    }

    /// Holomorphic sectional curvature of a unit chart vector in the induced
    /// metric.
    pub fn hol(&self, u: &[C64]) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.m {
            for j in 0..self.m {
                for k in 0..self.m {
                    for l in 0..self.m {
                        s += self.lowered(i, j, k, l) * u[i] * u[j].conj() * u[k] * u[l].conj();
                    }
                }
            }
        }
        s.re
    }
}

/// Chart Christoffel symbols alone (a light-weight slice of
/// [`fundamental_form`] used for the curvature stencil).
fn metric_christoffels(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
) -> Result<Vec<CMat>> {
    let frame = imm.frame_data(chart, z, cfg)?;
    let m = imm.m();
    let w: Vec<CMat> = (0..m).map(|i| frame.push(i)).collect();
    let h = frame.induced_metric();
    let h_inv = solve_general(&h, &CMat::identity(m))?;
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let rhs = Mat::from_fn(m, m, |k, j| {
            frame.d_push(i, k).frob_inner(&w[j]) + w[k].frob_inner(&frame.d_push(m + i, j))
        });
        out.push(rhs.mul(&h_inv));
    }
    Ok(out)
}

/// Intrinsic curvature of the induced metric via
/// `R^l_{ik j̄} = -∂_{z̄_j} Γ^l_{ik}`, differentiating the (gauge-invariant,
/// per-point exact) Christoffel field with central differences.
pub fn intrinsic_curvature(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
) -> Result<IntrinsicCurvature> {
    intrinsic_curvature_with_step(imm, chart, z, cfg, FD_OUTER_STEP)
}

pub fn intrinsic_curvature_with_step(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
    step: f64,
) -> Result<IntrinsicCurvature> {
    let m = imm.m();
    let frame = imm.frame_data(chart, z, cfg)?;
    let h = frame.induced_metric();
    let shift = |axis: usize, s: f64| -> Vec<C64> {
        let mut zp = z.to_vec();
        if axis < m {
            zp[axis] += C64::new(s, 0.0);
        } else {
            zp[axis - m] += C64::new(0.0, s);
        }
        zp
    };
    let mut gplus = Vec::with_capacity(2 * m);
    let mut gminus = Vec::with_capacity(2 * m);
    for axis in 0..2 * m {
        gplus.push(metric_christoffels(imm, chart, &shift(axis, step), cfg)?);
        gminus.push(metric_christoffels(imm, chart, &shift(axis, -step), cfg)?);
    }
    let dbar = |jbar: usize, i: usize, k: usize, l: usize| -> C64 {
        // ∂_{z̄_j} = (X_j + i Y_j) / 2 on the real axes.
        let dx = (gplus[jbar][i][(k, l)] - gminus[jbar][i][(k, l)]) / (2.0 * step);
        let dy = (gplus[m + jbar][i][(k, l)] - gminus[m + jbar][i][(k, l)]) / (2.0 * step);
        (dx + C64::new(0.0, 1.0) * dy) * 0.5
    };
    let mut comp = vec![C64::new(0.0, 0.0); m * m * m * m];
    for l in 0..m {
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    comp[((l * m + i) * m + k) * m + j] = -dbar(j, i, k, l);
                }
            }
        }
    }
    Ok(IntrinsicCurvature { m, h, comp })
}

/// Absolute defect of the Gauss equation
/// `h(R^M(u, v̄) zv, w) = h(R^Gr(f_*u, f_*v̄) f_*zv, f_*w) - <σ(u, zv), σ(v, w)>`
/// with the left side computed intrinsically from the induced metric.
pub fn gauss_equation_residual(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    u: &[C64],
    v: &[C64],
    zv: &[C64],
    w: &[C64],
    cfg: &DiffConfig,
) -> Result<f64> {
    let m = imm.m();
    let data = fundamental_form(imm, chart, z, cfg)?;
    let curv = intrinsic_curvature(imm, chart, z, cfg)?;
    let mut lhs = C64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    lhs += curv.lowered(i, j, k, l) * u[i] * v[j].conj() * zv[k] * w[l].conj();
                }
            }
        }
    }
    let fu = data.frame.pushforward(u)?;
    let fv = data.frame.pushforward(v)?;
    let fz = data.frame.pushforward(zv)?;
    let fw = data.frame.pushforward(w)?;
    let amb = curvature_gr(&fu, &fv, &fz)?.metric(&fw)?;
    let sig = data.sigma_vec(u, zv).frob_inner(&data.sigma_vec(v, w));
    Ok((lhs - (amb - sig)).norm())
}

/// Holomorphic sectional curvature of the immersed submanifold at a point,
/// computed two independent ways.
#[derive(Clone, Copy, Debug)]
pub struct HolPair {
    /// From the intrinsic curvature tensor of the induced metric.
    pub intrinsic: f64,
    /// From the ambient sectional curvature minus `‖σ(u, u)‖²`.
    pub extrinsic: f64,
    /// The input direction was not unit in the induced metric and has been
    /// normalized.
    pub normalized_input: bool,
}

impl HolPair {
    pub fn spread(&self) -> f64 {
        (self.intrinsic - self.extrinsic).abs()
    }
}

/// Holomorphic sectional curvature in the chart direction `u`, both
/// intrinsically and through the ambient curvature and `σ`.
pub fn hol_m(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    u: &[C64],
    cfg: &DiffConfig,
) -> Result<HolPair> {
    let data = fundamental_form(imm, chart, z, cfg)?;
    let nsq = data.metric_norm_sq(u);
    if nsq <= DEGENERATE_TOL {
        return Err(Error::InvalidParameter(
            "zero direction for sectional curvature".into(),
        ));
    }
    let normalized_input = (nsq - 1.0).abs() > 1e-8;
    let scale = 1.0 / nsq.sqrt();
    let un: Vec<C64> = u.iter().map(|c| c * scale).collect();
    let curv = intrinsic_curvature(imm, chart, z, cfg)?;
    let intrinsic = curv.hol(&un);
    let fu = data.frame.pushforward(&un)?;
    let extrinsic = hol_sectional(&fu.normalized()?)? - data.sigma_vec(&un, &un).norm_sq().re;
    Ok(HolPair {
        intrinsic,
        extrinsic,
        normalized_input,
    })
}

/// Curvature of the normal connection at a point:
/// `comp[i * m + j]` is the matrix of `R^N(∂_i, ∂̄_j)` against the
/// orthonormal normal frame, entry `(α, β) = h(R^N(∂_i, ∂̄_j) ξ_β, ξ_α)`.
#[derive(Clone, Debug)]
pub struct NormalCurvature {
    pub m: usize,
    pub rank: usize,
    comp: Vec<CMat>,
}

impl NormalCurvature {
    pub fn matrix(&self, i: usize, j: usize) -> &CMat {
        &self.comp[i * self.m + j]
    }

    /// `h(R^N(u, v̄) ξ, η)` for normal coefficient vectors against the frame.
    pub fn pair(&self, u: &[C64], v: &[C64], xi: &[C64], eta: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.m {
            for j in 0..self.m {
                let mat = self.matrix(i, j);
                for a in 0..self.rank {
                    for b in 0..self.rank {
                        s += u[i] * v[j].conj() * eta[a].conj() * mat[(a, b)] * xi[b];
                    }
                }
            }
        }
        s
    }
}

/// Connection coefficients `Θ[a]` of the normal connection at `zp` in the
/// smooth gauge seeded at the center: `Θ[a]_{αβ} = <∇_a ξ_β, ξ_α>`, with the
/// frame derivative taken by an inner central difference of the seeded
/// normal-frame field.
fn normal_connection_at(
    imm: &Immersion,
    chart: usize,
    zp: &[C64],
    cfg: &DiffConfig,
    fq_seed: &CMat,
    nseed: &[CMat],
    step: f64,
) -> Result<Vec<CMat>> {
    let m = imm.m();
    let r = nseed.len();
    let here = fundamental_form_gauged(imm, chart, zp, cfg, fq_seed, Some(nseed))?;
    let shift = |axis: usize, s: f64| -> Vec<C64> {
        let mut zq = zp.to_vec();
        if axis < m {
            zq[axis] += C64::new(s, 0.0);
        } else {
            zq[axis - m] += C64::new(0.0, s);
        }
        zq
    };
    let frames_at = |zq: &[C64]| -> Result<Vec<CMat>> {
        Ok(fundamental_form_gauged(imm, chart, zq, cfg, fq_seed, Some(nseed))?.normal_frame)
    };
    let mut fplus = Vec::with_capacity(2 * m);
    let mut fminus = Vec::with_capacity(2 * m);
    for axis in 0..2 * m {
        fplus.push(frames_at(&shift(axis, step))?);
        fminus.push(frames_at(&shift(axis, -step))?);
    }
    let real_d = |axis: usize, beta: usize| -> CMat {
        fplus[axis][beta]
            .sub(&fminus[axis][beta])
            .scale(C64::new(1.0 / (2.0 * step), 0.0))
    };
    let wirt = |s: usize, beta: usize| -> CMat {
        let c = if s < m { -1.0 } else { 1.0 };
        let dx = real_d(s % m, beta);
        let dy = real_d(m + s % m, beta);
        dx.add(&dy.scale(C64::new(0.0, c))).scale(C64::new(0.5, 0.0))
    };
    let mut theta = Vec::with_capacity(2 * m);
    for a in 0..2 * m {
        let oq = here.frame.omega_q(a);
        let os = here.frame.omega_s(a);
        let mut t = CMat::zeros(r, r);
        for beta in 0..r {
            let xib = &here.normal_frame[beta];
            let d = wirt(a, beta).add(&oq.mul(xib)).sub(&xib.mul(&os));
            for alpha in 0..r {
                t[(alpha, beta)] = d.frob_inner(&here.normal_frame[alpha]);
            }
        }
        theta.push(t);
    }
    Ok(theta)
}

/// Curvature of the normal connection by differentiating its connection
/// coefficients:
/// `R^N(∂_i, ∂̄_j) = ∂_i Θ[j̄] - ∂_{j̄} Θ[i] + [Θ[i], Θ[j̄]]`.
pub fn normal_curvature(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
) -> Result<NormalCurvature> {
    normal_curvature_with_steps(imm, chart, z, cfg, FD_STEP, FD_OUTER_STEP)
}

pub fn normal_curvature_with_steps(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    cfg: &DiffConfig,
    inner_step: f64,
    outer_step: f64,
) -> Result<NormalCurvature> {
    let m = imm.m();
    let center = fundamental_form(imm, chart, z, cfg)?;
    let rank = center.normal_rank();
    if rank == 0 {
        return Ok(NormalCurvature {
            m,
            rank,
            comp: vec![CMat::zeros(0, 0); m * m],
        });
    }
    let fq_seed = center.frame.point.frame_q().clone();
    let nseed = center.normal_frame.clone();
    let theta_field = |zp: &[C64]| -> Result<Vec<CMat>> {
        normal_connection_at(imm, chart, zp, cfg, &fq_seed, &nseed, inner_step)
    };
    let shift = |axis: usize, s: f64| -> Vec<C64> {
        let mut zp = z.to_vec();
        if axis < m {
            zp[axis] += C64::new(s, 0.0);
        } else {
            zp[axis - m] += C64::new(0.0, s);
        }
        zp
    };
    let theta0 = theta_field(z)?;
    let mut tplus = Vec::with_capacity(2 * m);
    let mut tminus = Vec::with_capacity(2 * m);
    for axis in 0..2 * m {
        tplus.push(theta_field(&shift(axis, outer_step))?);
        tminus.push(theta_field(&shift(axis, -outer_step))?);
    }
    let real_d = |axis: usize, slot: usize| -> CMat {
        tplus[axis][slot]
            .sub(&tminus[axis][slot])
            .scale(C64::new(1.0 / (2.0 * outer_step), 0.0))
    };
    // ∂ in outer slot s of the Θ-component for inner slot `slot`.
    let wirt = |s: usize, slot: usize| -> CMat {
        let c = if s < m { -1.0 } else { 1.0 };
        let dx = real_d(s % m, slot);
        let dy = real_d(m + s % m, slot);
        dx.add(&dy.scale(C64::new(0.0, c))).scale(C64::new(0.5, 0.0))
    };
    let mut comp = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let d_i = wirt(i, m + j);
            let d_jbar = wirt(m + j, i);
            let commutator = theta0[i].mul(&theta0[m + j]).sub(&theta0[m + j].mul(&theta0[i]));
            comp.push(d_i.sub(&d_jbar).add(&commutator));
        }
    }
    Ok(NormalCurvature { m, rank, comp })
}

/// Absolute defect of the Ricci equation
/// `h(R^N(u, v̄) ξ, η) = h(R^Gr(f_*u, f_*v̄) ξ, η) + <A_ξ v̄, A_η ū>`
/// with the left side from the finite-difference normal curvature and the
/// right side from the ambient curvature and the shape operator.
pub fn ricci_equation_residual(
    imm: &Immersion,
    chart: usize,
    z: &[C64],
    u: &[C64],
    v: &[C64],
    xi: &CMat,
    eta: &CMat,
    cfg: &DiffConfig,
) -> Result<f64> {
    let data = fundamental_form(imm, chart, z, cfg)?;
    data.check_normal(xi)?;
    data.check_normal(eta)?;
    let rn = normal_curvature(imm, chart, z, cfg)?;
    let xc = data.normal_coefficients(xi);
    let ec = data.normal_coefficients(eta);
    let lhs = rn.pair(u, v, &xc, &ec);
    let fu = data.frame.pushforward(u)?;
    let fv = data.frame.pushforward(v)?;
    let xi_t = data.frame.point.tangent(xi.clone())?;
    let eta_t = data.frame.point.tangent(eta.clone())?;
    let amb = curvature_gr(&fu, &fv, &xi_t)?.metric(&eta_t)?;
    let a_xi = data.shape_apply(xi, v)?;
    let a_eta = data.shape_apply(eta, u)?;
    let rhs = amb + a_xi.frob_inner(&a_eta);
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::immersion::DiffMode;
    use crate::tol::{ALGEBRAIC_TOL, CURVATURE_TOL, DERIVATIVE_TOL, RICCI_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> DiffConfig {
        DiffConfig::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_point(m: usize, rng: &mut impl Rng) -> Vec<C64> {
        (0..m)
            .map(|_| c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
            .collect()
    }

    fn unit_vector(data: &FundamentalFormData, raw: &[C64]) -> Vec<C64> {
        let n = data.metric_norm_sq(raw).sqrt();
        raw.iter().map(|x| x / n).collect()
    }

    use crate::testutil::skew_speed_surface;

    #[test]
    fn totally_geodesic_members_have_vanishing_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for desc in ["linear:m=1,n=3", "tensor_embedding:2", "veronese:1", "identity:p=2,n=4"] {
            let imm = catalog::build(desc).unwrap();
            for _ in 0..3 {
                let z = random_point(imm.m(), &mut rng);
                let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
                assert!(
                    data.sigma_total_norm() < ALGEBRAIC_TOL,
                    "{desc}: σ = {:.3e}",
                    data.sigma_total_norm()
                );
            }
        }
    }

    #[test]
    fn sigma_is_symmetric_and_phase_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for desc in ["veronese:3", "segre", "pluecker"] {
            let imm = catalog::build(desc).unwrap();
            let z = random_point(imm.m(), &mut rng);
            let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
            let m = imm.m();
            for i in 0..m {
                for j in 0..m {
                    let d = data.sigma(i, j).sub(data.sigma(j, i)).fnorm();
                    assert!(d < 1e-8, "{desc}: symmetry defect {d:.3e}");
                }
            }
            let u = random_point(m, &mut rng);
            let theta = c(0.0, 0.96).exp();
            let ut: Vec<C64> = u.iter().map(|x| x * theta).collect();
            let lhs = data.sigma_vec(&ut, &ut);
            let rhs = data.sigma_vec(&u, &u).scale(theta * theta);
            assert!(lhs.sub(&rhs).fnorm() < 1e-8);
        }
    }

    #[test]
    fn veronese_sigma_norms_match_frozen_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // ‖σ(u,u)‖² = 2 - 2/d for the degree-d rational curve.
        for (d, want) in [(2usize, 1.0), (3, 4.0 / 3.0)] {
            let imm = catalog::veronese(d).unwrap();
            for _ in 0..4 {
                let z = random_point(1, &mut rng);
                let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
                let u = unit_vector(&data, &[c(1.0, 0.0)]);
                let got = data.sigma_vec(&u, &u).norm_sq().re;
                assert!(
                    (got - want).abs() < DERIVATIVE_TOL,
                    "d={d}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn mixed_type_derivatives_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for desc in ["veronese:3", "segre", "tensor_embedding:2"] {
            let imm = catalog::build(desc).unwrap();
            let z = random_point(imm.m(), &mut rng);
            let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
            assert!(
                data.mixed_type_residual() < FIRST_ORDER_TOL,
                "{desc}: {:.3e}",
                data.mixed_type_residual()
            );
        }
    }

    #[test]
    fn shape_operator_satisfies_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let imm = catalog::veronese(3).unwrap();
        for _ in 0..5 {
            let z = random_point(1, &mut rng);
            let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
            assert_eq!(data.normal_rank(), imm.normal_rank());
            let u = random_point(1, &mut rng);
            let v = random_point(1, &mut rng);
            for xi in &data.normal_frame {
                // h(σ(u, v), ξ) against h(v, A_ξ ū).
                let lhs = data.sigma_vec(&u, &v).frob_inner(xi);
                let a = data.shape_apply(xi, &u).unwrap();
                let fv = data.frame.pushforward(&v).unwrap();
                let rhs = fv.mat().frob_inner(&a);
                assert!(
                    (lhs - rhs).norm() < DERIVATIVE_TOL,
                    "duality defect {:.3e}",
                    (lhs - rhs).norm()
                );
            }
        }
    }

    #[test]
    fn shape_operator_rejects_tangential_input() {
        let imm = catalog::veronese(3).unwrap();
        let z = [c(0.21, -0.1)];
        let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
        let w = data.tangent_frame[0].clone();
        match data.shape_apply(&w, &[c(1.0, 0.0)]) {
            Err(Error::NotNormal(_)) => {}
            other => panic!("expected NotNormal, got {other:?}"),
        }
    }

    #[test]
    fn christoffels_are_symmetric_in_lower_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for desc in ["segre", "pluecker"] {
            let imm = catalog::build(desc).unwrap();
            let z = random_point(imm.m(), &mut rng);
            let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
            let m = imm.m();
            for i in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let d = (data.christoffel[i][(k, l)] - data.christoffel[k][(i, l)]).norm();
                        assert!(d < 1e-8, "{desc}: Γ asymmetry {d:.3e}");
                    }
                }
            }
        }
    }

    #[test]
    fn covariant_sigma_is_codazzi_symmetric_and_detects_parallelism() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // Parallel members: ∇σ vanishes.
        for desc in ["veronese:2", "segre"] {
            let imm = catalog::build(desc).unwrap();
            let z = random_point(imm.m(), &mut rng);
            let cs = covariant_sigma(&imm, 0, &z, &cfg()).unwrap();
            assert!(cs.sup_nabla() < CURVATURE_TOL, "{desc}: {:.3e}", cs.sup_nabla());
            assert!(cs.codazzi_defect() < CURVATURE_TOL);
        }
        // Non-parallel: ∇σ is macroscopic but still totally symmetric.
        let imm = catalog::veronese(3).unwrap();
        let z = [c(0.3, 0.1)];
        let cs = covariant_sigma(&imm, 0, &z, &cfg()).unwrap();
        assert!(cs.sup_nabla() > 0.1, "veronese(3): {:.3e}", cs.sup_nabla());
        assert!(cs.codazzi_defect() < CURVATURE_TOL);
        let u = [c(1.0, 0.0)];
        let dir = cs.contract(&u, &u, &u);
        assert!(dir.fnorm() > 0.1);
    }

    #[test]
    fn nabla_bar_sigma_vanishes_on_flat_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for desc in ["veronese:2", "veronese:3", "segre", "tensor_embedding:2"] {
            let imm = catalog::build(desc).unwrap();
            let z = random_point(imm.m(), &mut rng);
            let cs = covariant_sigma(&imm, 0, &z, &cfg()).unwrap();
            assert!(
                cs.sup_nabla_bar() < CURVATURE_TOL,
                "{desc}: {:.3e}",
                cs.sup_nabla_bar()
            );
        }
    }

    #[test]
    fn nabla_bar_sigma_matches_ambient_curvature_normal_part() {
        // On a non-flat control surface both sides are macroscopically
        // nonzero, so agreement is a real cross-check.
        let imm = skew_speed_surface();
        let z = [c(0.15, -0.2)];
        let cs = covariant_sigma(&imm, 0, &z, &cfg()).unwrap();
        let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
        let m = 1;
        let mut checked = 0.0f64;
        for b in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let lhs = cs.nabla_bar(b, i, j);
                    let fu = data.frame.pushforward(&[c(1.0, 0.0)]).unwrap();
                    let amb = curvature_gr(&fu, &fu, &fu).unwrap();
                    let rhs = data.project_normal(amb.mat()).neg();
                    let d = lhs.sub(&rhs).fnorm();
                    assert!(d < DERIVATIVE_TOL * 10.0, "defect {d:.3e}");
                    checked = checked.max(rhs.fnorm());
                }
            }
        }
        assert!(checked > 0.5, "control surface should have (R^Gr)^⊥ ≠ 0, got {checked:.3e}");
        // Zero input short-circuits.
        let zvec = [c(0.0, 0.0)];
        let out = cs.contract_bar(&[c(1.0, 0.0)], &[c(1.0, 0.0)], &zvec);
        assert!(out.fnorm() == 0.0 || out.fnorm() < 1e-15);
    }

    #[test]
    fn gauss_equation_holds_on_catalog_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for desc in ["veronese:2", "veronese:3", "segre"] {
            let imm = catalog::build(desc).unwrap();
            for _ in 0..3 {
                let z = random_point(imm.m(), &mut rng);
                let u = random_point(imm.m(), &mut rng);
                let v = random_point(imm.m(), &mut rng);
                let zv = random_point(imm.m(), &mut rng);
                let w = random_point(imm.m(), &mut rng);
                let r = gauss_equation_residual(&imm, 0, &z, &u, &v, &zv, &w, &cfg()).unwrap();
                assert!(r < CURVATURE_TOL, "{desc}: Gauss residual {r:.3e}");
            }
        }
    }

    #[test]
    fn hol_matches_frozen_values_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for (d, want) in [(1usize, 2.0), (2, 1.0), (3, 2.0 / 3.0), (4, 0.5)] {
            let imm = catalog::veronese(d).unwrap();
            let z = random_point(1, &mut rng);
            let pair = hol_m(&imm, 0, &z, &[c(1.0, 0.0)], &cfg()).unwrap();
            assert!(pair.normalized_input);
            assert!(
                (pair.intrinsic - want).abs() < CURVATURE_TOL,
                "veronese({d}): intrinsic {}, want {want}",
                pair.intrinsic
            );
            assert!(pair.spread() < CURVATURE_TOL);
        }
        // Product of lines: factor direction curvature 2, diagonal 1.
        let imm = catalog::segre().unwrap();
        let z = [c(0.0, 0.0), c(0.0, 0.0)];
        let factor = hol_m(&imm, 0, &z, &[c(1.0, 0.0), c(0.0, 0.0)], &cfg()).unwrap();
        assert!((factor.intrinsic - 2.0).abs() < CURVATURE_TOL);
        assert!(factor.spread() < CURVATURE_TOL);
        let s = 1.0 / 2.0f64.sqrt();
        let diag = hol_m(&imm, 0, &z, &[c(s, 0.0), c(s, 0.0)], &cfg()).unwrap();
        assert!((diag.intrinsic - 1.0).abs() < CURVATURE_TOL);
        assert!(diag.spread() < CURVATURE_TOL);
        // Totally geodesic with q = 2: curvature 2/q.
        let imm = catalog::tensor_embedding(2).unwrap();
        let z = random_point(1, &mut rng);
        let pair = hol_m(&imm, 0, &z, &[c(1.0, 0.0)], &cfg()).unwrap();
        assert!((pair.intrinsic - 1.0).abs() < CURVATURE_TOL);
        assert!(pair.spread() < CURVATURE_TOL);
    }

    #[test]
    fn ricci_equation_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for desc in ["veronese:2", "veronese:3", "tensor_embedding:2"] {
            let imm = catalog::build(desc).unwrap();
            let z = random_point(imm.m(), &mut rng);
            let data = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
            assert!(data.normal_rank() > 0, "{desc} should have normal directions");
            let u = random_point(imm.m(), &mut rng);
            let v = random_point(imm.m(), &mut rng);
            // Random normal vectors as combinations of the frame.
            let mix = |rng: &mut ChaCha8Rng| -> CMat {
                let mut x = data.normal_frame[0].scale(c(0.0, 0.0));
                for xi in &data.normal_frame {
                    x = x.add(&xi.scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
                x
            };
            let xi = mix(&mut rng);
            let eta = mix(&mut rng);
            let r = ricci_equation_residual(&imm, 0, &z, &u, &v, &xi, &eta, &cfg()).unwrap();
            assert!(r < RICCI_TOL, "{desc}: Ricci residual {r:.3e}");
        }
    }

    #[test]
    fn normal_curvature_handles_rank_zero() {
        let imm = catalog::identity_grassmannian(2, 4).unwrap();
        let z = vec![c(0.05, 0.0); 4];
        let rn = normal_curvature(&imm, 0, &z, &cfg()).unwrap();
        assert_eq!(rn.rank, 0);
        let imm = catalog::veronese(1).unwrap();
        let rn = normal_curvature(&imm, 0, &[c(0.2, 0.1)], &cfg()).unwrap();
        assert_eq!(rn.rank, 0);
    }

    #[test]
    fn backends_agree_on_sigma() {
        let imm = catalog::veronese(3).unwrap();
        let z = [c(0.17, -0.23)];
        let jets = fundamental_form(&imm, 0, &z, &cfg()).unwrap();
        let fd_cfg = DiffConfig {
            mode: DiffMode::CentralDifferences,
            step: 1e-4,
        };
        let fd = fundamental_form(&imm, 0, &z, &fd_cfg).unwrap();
        let d = jets.sigma(0, 0).sub(fd.sigma(0, 0)).fnorm();
        assert!(d < 1e-5, "backend disagreement {d:.3e}");
    }

    #[test]
    fn tau_is_componentwise_conjugation() {
        let u = [c(1.0, 2.0), c(-0.5, 0.25)];
        let t = tau(&u);
        assert_eq!(t[0], c(1.0, -2.0));
        assert_eq!(t[1], c(-0.5, -0.25));
        assert_eq!(tau(&t), u.to_vec());
    }
}
