//! Points and tangent vectors of the complex Grassmannian `Gr_p(C^n)`,
//! together with the curvature of its tautological and quotient bundles.
//!
//! A point is stored as an *adapted frame*: a unitary basis of `C^n` whose
//! first `p` columns span the plane `S` and whose remaining `q = n - p`
//! columns span the orthogonal complement `Q`.  A tangent vector at such a
//! point is a homomorphism `S -> Q`, concretely a `q x p` matrix `U` written
//! in the adapted frame.  All bundle-valued quantities below are expressed in
//! that frame, and every formula transforms consistently under the gauge
//! change `F_S -> F_S a`, `F_Q -> F_Q b`, `U -> b^H U a`.
//!
//! Conventions (verified numerically by the frame-family tests at the bottom
//! of this file, which differentiate orthonormalized frame families with
//! second-order jets):
//!
//! * metric: `<U, V> = tr(V^H U)`, a Hermitian inner product;
//! * tautological bundle curvature: `R^S(U, V̄) = -V^H U` (`p x p`);
//! * quotient bundle curvature: `R^Q(U, V̄) = U V^H` (`q x q`);
//! * full curvature: `R(U, V̄)Z = U V^H Z + Z V^H U`, which is exactly
//!   `R^Q(U, V̄) ∘ Z - Z ∘ R^S(U, V̄)` under the `Hom(S, Q)` identification;
//! * holomorphic sectional curvature of a unit vector:
//!   `Hol(U) = <R(U, Ū)U, U> = 2 tr((U^H U)^2)`, which lies in `(0, 2]` and
//!   is identically `2` when `min(p, q) = 1`.

use crate::linalg::{complete_frame, orthonormalize, CMat, C64};
use crate::tol::FRAME_TOL;
use crate::{Error, Result};
use rand::Rng;

/// A point of `Gr_p(C^n)` given by an adapted unitary frame.
#[derive(Clone, Debug)]
pub struct GrassmannPoint {
    n: usize,
    p: usize,
    q: usize,
    frame_s: CMat,
    frame_q: CMat,
}

impl GrassmannPoint {
    /// Builds a point from an `n x p` frame of the plane and an `n x q` frame
    /// of its complement.  The concatenated frame must be unitary to
    /// [`FRAME_TOL`].
    pub fn from_frames(frame_s: CMat, frame_q: CMat) -> Result<Self> {
        let n = frame_s.rows();
        let p = frame_s.cols();
        let q = frame_q.cols();
        if frame_q.rows() != n || p + q != n {
            return Err(Error::DimensionMismatch(format!(
                "adapted frame blocks {n}x{p} and {}x{q} do not assemble to a unitary basis",
                frame_q.rows()
            )));
        }
        if p == 0 || q == 0 {
            return Err(Error::InvalidParameter(format!(
                "Gr_{p}(C^{n}) has no tangent directions"
            )));
        }
        let defect = frame_s.hcat(&frame_q).unitarity_defect();
        if defect > FRAME_TOL {
            return Err(Error::DegenerateFrame {
                col: 0,
                norm: defect,
            });
        }
        Ok(GrassmannPoint {
            n,
            p,
            q,
            frame_s,
            frame_q,
        })
    }

    /// Splits the columns of a unitary matrix into an adapted frame.
    pub fn from_unitary(u: &CMat, p: usize) -> Result<Self> {
        let n = u.rows();
        if p == 0 || p >= n {
            return Err(Error::InvalidParameter(format!(
                "plane dimension p={p} must satisfy 0 < p < n={n}"
            )));
        }
        Self::from_frames(u.col_block(0, p), u.col_block(p, n))
    }

    /// Orthonormalizes an `n x p` spanning set and completes it to an adapted
    /// frame deterministically.
    pub fn from_span(span: &CMat) -> Result<Self> {
        let fs = orthonormalize(span)?;
        let fq = complete_frame(&fs)?;
        Self::from_frames(fs, fq)
    }

    /// A pseudorandom point; the same generator state always produces the
    /// same point.
    pub fn random(n: usize, p: usize, rng: &mut impl Rng) -> Result<Self> {
        if p == 0 || p >= n {
            return Err(Error::InvalidParameter(format!(
                "plane dimension p={p} must satisfy 0 < p < n={n}"
            )));
        }
        let u = crate::linalg::random_unitary(n, rng);
        Self::from_unitary(&u, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn frame_s(&self) -> &CMat {
        &self.frame_s
    }

    pub fn frame_q(&self) -> &CMat {
        &self.frame_q
    }

    /// The full `n x n` unitary `[F_S | F_Q]`.
    pub fn full_frame(&self) -> CMat {
        self.frame_s.hcat(&self.frame_q)
    }

    /// Orthogonal projection of ambient columns onto the plane `S`.
    pub fn project_s(&self, x: &CMat) -> CMat {
        self.frame_s.mul(&self.frame_s.adjoint().mul(x))
    }

    /// Orthogonal projection of ambient columns onto the complement `Q`.
    pub fn project_q(&self, x: &CMat) -> CMat {
        self.frame_q.mul(&self.frame_q.adjoint().mul(x))
    }

    /// Gauge-invariant projector `F_S F_S^H` onto the plane.
    pub fn plane_projector(&self) -> CMat {
        self.frame_s.mul(&self.frame_s.adjoint())
    }

    /// Rotates the adapted frame by unitaries `a` (on `S`) and `b` (on `Q`)
    /// without moving the underlying point.
    pub fn re_gauge(&self, a: &CMat, b: &CMat) -> Result<Self> {
        if a.rows() != self.p || a.cols() != self.p || b.rows() != self.q || b.cols() != self.q {
            return Err(Error::DimensionMismatch(
                "gauge blocks must be p x p and q x q".into(),
            ));
        }
        GrassmannPoint::from_frames(self.frame_s.mul(a), self.frame_q.mul(b))
    }

    /// Whether two values describe the same point *in the same frame* (frame
    /// equality up to roundoff), which is what tangent-vector arithmetic
    /// requires.
    pub fn same_base(&self, other: &GrassmannPoint) -> bool {
        self.n == other.n
            && self.p == other.p
            && self.frame_s.sub(&other.frame_s).fnorm() < 1e-10
            && self.frame_q.sub(&other.frame_q).fnorm() < 1e-10
    }

    /// Wraps a `q x p` matrix as a tangent vector at this point.
    pub fn tangent(&self, mat: CMat) -> Result<AmbientTangent> {
        if mat.rows() != self.q || mat.cols() != self.p {
            return Err(Error::DimensionMismatch(format!(
                "tangent matrix must be {} x {}, got {} x {}",
                self.q,
                self.p,
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(AmbientTangent {
            point: self.clone(),
            mat,
        })
    }

    /// A pseudorandom tangent vector with standard Gaussian entries.
    pub fn random_tangent(&self, rng: &mut impl Rng) -> AmbientTangent {
        AmbientTangent {
            point: self.clone(),
            mat: crate::linalg::random_gaussian(self.q, self.p, rng),
        }
    }
}

/// A `(1, 0)` tangent vector of the Grassmannian at a specific adapted frame,
/// stored as the `q x p` matrix of the corresponding map `S -> Q`.
#[derive(Clone, Debug)]
pub struct AmbientTangent {
    point: GrassmannPoint,
    mat: CMat,
}

impl AmbientTangent {
    pub fn point(&self) -> &GrassmannPoint {
        &self.point
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    /// Hermitian metric `<U, V> = tr(V^H U)`, linear in `self`.
    pub fn metric(&self, other: &AmbientTangent) -> Result<C64> {
        if !self.point.same_base(&other.point) {
            return Err(Error::BaseMismatch);
        }
        Ok(self.mat.frob_inner(&other.mat))
    }

    pub fn norm_sq(&self) -> f64 {
        self.mat.norm_sq().re
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Result<AmbientTangent> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(Error::NotUnit(0.0));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: C64) -> AmbientTangent {
        AmbientTangent {
            point: self.point.clone(),
            mat: self.mat.scale(c),
        }
    }

    pub fn add(&self, other: &AmbientTangent) -> Result<AmbientTangent> {
        if !self.point.same_base(&other.point) {
            return Err(Error::BaseMismatch);
        }
        Ok(AmbientTangent {
            point: self.point.clone(),
            mat: self.mat.add(&other.mat),
        })
    }

    /// The `Hom(S, Q)`-valued second fundamental form of the tautological
    /// inclusion evaluated on this vector: under the adapted-frame
    /// identification it *is* the tangent matrix.
    pub fn bundle_h(&self) -> CMat {
        self.mat.clone()
    }

    /// The `Hom(Q, S)`-valued form dual to [`bundle_h`](Self::bundle_h),
    /// evaluated on the conjugate vector: `K_Ū = -U^H`.
    pub fn bundle_k(&self) -> CMat {
        self.mat.adjoint().neg()
    }

    /// The same tangent vector expressed after the gauge change `(a, b)`.
    pub fn gauged(&self, a: &CMat, b: &CMat) -> Result<AmbientTangent> {
        let point = self.point.re_gauge(a, b)?;
        point.tangent(b.adjoint().mul(&self.mat).mul(a))
    }
}

/// Curvature of the tautological bundle: `R^S(U, V̄) = -V^H U` as a `p x p`
/// matrix in the adapted frame.
pub fn curvature_s(u: &AmbientTangent, v: &AmbientTangent) -> Result<CMat> {
    if !u.point.same_base(&v.point) {
        return Err(Error::BaseMismatch);
    }
    Ok(v.mat.adjoint().mul(&u.mat).neg())
}

/// Curvature of the quotient bundle: `R^Q(U, V̄) = U V^H` as a `q x q` matrix
/// in the adapted frame.  Its trace equals `<U, V>`.
pub fn curvature_q(u: &AmbientTangent, v: &AmbientTangent) -> Result<CMat> {
    if !u.point.same_base(&v.point) {
        return Err(Error::BaseMismatch);
    }
    Ok(u.mat.mul(&v.mat.adjoint()))
}

/// Full curvature tensor of the Grassmannian acting on tangent vectors:
/// `R(U, V̄)Z = U V^H Z + Z V^H U`.
pub fn curvature_gr(
    u: &AmbientTangent,
    v: &AmbientTangent,
    z: &AmbientTangent,
) -> Result<AmbientTangent> {
    if !u.point.same_base(&v.point) || !u.point.same_base(&z.point) {
        return Err(Error::BaseMismatch);
    }
    let vh = v.mat.adjoint();
    let mat = u.mat.mul(&vh).mul(&z.mat).add(&z.mat.mul(&vh).mul(&u.mat));
    u.point.tangent(mat)
}

/// Holomorphic sectional curvature `<R(U, Ū)U, U> = 2 tr((U^H U)^2)` of a
/// unit tangent vector.
pub fn hol_sectional(u: &AmbientTangent) -> Result<f64> {
    let nsq = u.norm_sq();
    if (nsq - 1.0).abs() > 1e-8 {
        return Err(Error::NotUnit(nsq));
    }
    let g = u.mat.adjoint().mul(&u.mat);
    Ok(2.0 * g.mul(&g).trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{mat_lift, mat_pd, mat_pd2, mat_val, Jet};
    use crate::linalg::{complete_frame_seeded, random_gaussian, Mat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn random_point_is_deterministic_and_adapted() {
        let a = GrassmannPoint::random(5, 2, &mut rng(42)).unwrap();
        let b = GrassmannPoint::random(5, 2, &mut rng(42)).unwrap();
        assert!(a.full_frame().sub(&b.full_frame()).fnorm() == 0.0);
        assert!(a.full_frame().unitarity_defect() < 1e-12);
        assert_eq!((a.n(), a.p(), a.q()), (5, 2, 3));
    }

    #[test]
    fn degenerate_plane_dimensions_are_rejected() {
        assert!(GrassmannPoint::random(4, 0, &mut rng(0)).is_err());
        assert!(GrassmannPoint::random(4, 4, &mut rng(0)).is_err());
        assert!(GrassmannPoint::random(4, 5, &mut rng(0)).is_err());
    }

    #[test]
    fn projections_split_ambient_vectors() {
        let mut r = rng(1);
        for _ in 0..10 {
            let pt = GrassmannPoint::random(6, 2, &mut r).unwrap();
            let x = random_gaussian(6, 1, &mut r);
            let xs = pt.project_s(&x);
            let xq = pt.project_q(&x);
            // Completeness and Pythagoras.
            assert!(xs.add(&xq).sub(&x).fnorm() < 1e-12);
            let total = x.norm_sq().re;
            assert!((xs.norm_sq().re + xq.norm_sq().re - total).abs() < 1e-12);
            // Projections are idempotent and mutually annihilating.
            assert!(pt.project_s(&xs).sub(&xs).fnorm() < 1e-12);
            assert!(pt.project_s(&xq).fnorm() < 1e-12);
        }
    }

    #[test]
    fn projection_on_coordinate_frame() {
        let pt = GrassmannPoint::from_unitary(&CMat::identity(4), 2).unwrap();
        let mut x = CMat::zeros(4, 1);
        x[(0, 0)] = c(1.0, 0.0);
        x[(3, 0)] = c(2.0, -1.0);
        let xs = pt.project_s(&x);
        assert!((xs[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(xs[(3, 0)].norm() < 1e-15);
        let xq = pt.project_q(&x);
        assert!((xq[(3, 0)] - c(2.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn metric_is_hermitian_sesquilinear_and_positive() {
        let mut r = rng(2);
        let pt = GrassmannPoint::random(5, 2, &mut r).unwrap();
        let u = pt.random_tangent(&mut r);
        let v = pt.random_tangent(&mut r);
        let w = pt.random_tangent(&mut r);
        let guv = u.metric(&v).unwrap();
        let gvu = v.metric(&u).unwrap();
        assert!((guv - gvu.conj()).norm() < 1e-12);
        // Linearity in the first slot.
        let lam = c(0.7, -1.3);
        let lhs = u.scale(lam).add(&w).unwrap().metric(&v).unwrap();
        assert!((lhs - (lam * guv + w.metric(&v).unwrap())).norm() < 1e-12);
        assert!(u.norm_sq() > 0.0);
        // Trace identities against the bundle curvatures.
        let rq = curvature_q(&u, &v).unwrap();
        assert!((rq.trace() - guv).norm() < 1e-12);
        let rs = curvature_s(&u, &v).unwrap();
        assert!((rs.trace() + guv).norm() < 1e-12);
    }

    #[test]
    fn metric_rejects_mismatched_bases() {
        let mut r = rng(3);
        let p1 = GrassmannPoint::random(5, 2, &mut r).unwrap();
        let p2 = GrassmannPoint::random(5, 2, &mut r).unwrap();
        let u = p1.random_tangent(&mut r);
        let v = p2.random_tangent(&mut r);
        assert!(matches!(u.metric(&v), Err(Error::BaseMismatch)));
    }

    #[test]
    fn bundle_forms_on_elementary_tangent() {
        let pt = GrassmannPoint::from_unitary(&CMat::identity(3), 1).unwrap();
        // q = 2, p = 1; tangent matrix is 2 x 1.
        let mut m = CMat::zeros(2, 1);
        m[(0, 0)] = c(0.0, 2.0);
        let u = pt.tangent(m).unwrap();
        let h = u.bundle_h();
        assert!((h[(0, 0)] - c(0.0, 2.0)).norm() < 1e-15);
        let k = u.bundle_k();
        assert_eq!((k.rows(), k.cols()), (1, 2));
        assert!((k[(0, 0)] - c(0.0, 2.0)).norm() < 1e-15, "K_Ū = -U^H");
        assert!(k[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn curvature_composition_identity() {
        // R(U, V̄)Z = R^Q(U, V̄) ∘ Z - Z ∘ R^S(U, V̄) exactly.
        let mut r = rng(4);
        let pt = GrassmannPoint::random(6, 2, &mut r).unwrap();
        let (u, v, z) = (
            pt.random_tangent(&mut r),
            pt.random_tangent(&mut r),
            pt.random_tangent(&mut r),
        );
        let lhs = curvature_gr(&u, &v, &z).unwrap();
        let rq = curvature_q(&u, &v).unwrap();
        let rs = curvature_s(&u, &v).unwrap();
        let rhs = rq.mul(z.mat()).sub(&z.mat().mul(&rs));
        assert!(lhs.mat().sub(&rhs).fnorm() < 1e-12);
    }

    #[test]
    fn curvature_pair_symmetries() {
        let mut r = rng(5);
        let pt = GrassmannPoint::random(5, 2, &mut r).unwrap();
        let (u, v, z, w) = (
            pt.random_tangent(&mut r),
            pt.random_tangent(&mut r),
            pt.random_tangent(&mut r),
            pt.random_tangent(&mut r),
        );
        let g = |a: &AmbientTangent, b: &AmbientTangent| a.metric(b).unwrap();
        let ruvzw = g(&curvature_gr(&u, &v, &z).unwrap(), &w);
        // Symmetry in the two unbarred slots.
        let rzvuw = g(&curvature_gr(&z, &v, &u).unwrap(), &w);
        assert!((ruvzw - rzvuw).norm() < 1e-12);
        // Exchange of the pairs (U, V̄) and (Z, W̄).
        let rzwuv = g(&curvature_gr(&z, &w, &u).unwrap(), &v);
        assert!((ruvzw - rzwuv).norm() < 1e-12);
        // Conjugate symmetry <R(U,V̄)Z, W> = conj <R(V,Ū)W, Z>.
        let rvuwz = g(&curvature_gr(&v, &u, &w).unwrap(), &z);
        assert!((ruvzw - rvuwz.conj()).norm() < 1e-12);
    }

    #[test]
    fn hol_sectional_range_and_phase_invariance() {
        let mut r = rng(6);
        for (n, p) in [(4, 2), (5, 2), (6, 3)] {
            let pt = GrassmannPoint::random(n, p, &mut r).unwrap();
            for _ in 0..20 {
                let u = pt.random_tangent(&mut r).normalized().unwrap();
                let h = hol_sectional(&u).unwrap();
                assert!(h > 0.0 && h <= 2.0 + 1e-12, "Hol out of range: {h}");
                let rotated = u.scale(C64::from_polar(1.0, 1.234));
                let h2 = hol_sectional(&rotated).unwrap();
                assert!((h - h2).abs() < 1e-12);
                // Cross-check against the curvature tensor contraction.
                let contraction = curvature_gr(&u, &u, &u)
                    .unwrap()
                    .metric(&u)
                    .unwrap();
                assert!((contraction.re - h).abs() < 1e-12);
                assert!(contraction.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hol_sectional_is_two_on_projective_spaces() {
        // When p = n - 1 (or p = 1) the tangent matrices have rank one and
        // the holomorphic sectional curvature is constant equal to 2.
        let mut r = rng(7);
        for n in 2..=6 {
            let pt = GrassmannPoint::random(n, n - 1, &mut r).unwrap();
            for _ in 0..10 {
                let u = pt.random_tangent(&mut r).normalized().unwrap();
                assert!((hol_sectional(&u).unwrap() - 2.0).abs() < 1e-12);
            }
            let pt1 = GrassmannPoint::random(n, 1, &mut r).unwrap();
            let u = pt1.random_tangent(&mut r).normalized().unwrap();
            assert!((hol_sectional(&u).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hol_sectional_requires_unit_input() {
        let mut r = rng(8);
        let pt = GrassmannPoint::random(4, 2, &mut r).unwrap();
        let u = pt.random_tangent(&mut r).scale(c(3.0, 0.0));
        assert!(matches!(hol_sectional(&u), Err(Error::NotUnit(_))));
    }

    #[test]
    fn gauge_invariance_of_scalars() {
        let mut r = rng(9);
        let pt = GrassmannPoint::random(6, 2, &mut r).unwrap();
        let u = pt.random_tangent(&mut r);
        let v = pt.random_tangent(&mut r);
        let a = crate::linalg::random_unitary(2, &mut r);
        let b = crate::linalg::random_unitary(4, &mut r);
        let (ug, vg) = (u.gauged(&a, &b).unwrap(), v.gauged(&a, &b).unwrap());
        assert!((u.metric(&v).unwrap() - ug.metric(&vg).unwrap()).norm() < 1e-12);
        let un = u.normalized().unwrap();
        let ung = un.gauged(&a, &b).unwrap();
        assert!((hol_sectional(&un).unwrap() - hol_sectional(&ung).unwrap()).abs() < 1e-12);
        // The plane projector does not move under gauge changes.
        assert!(pt
            .plane_projector()
            .sub(&pt.re_gauge(&a, &b).unwrap().plane_projector())
            .fnorm()
            < 1e-12);
    }

    /// Differentiates an orthonormalized frame family `F_S(w) = GS(F_S^0 +
    /// w F_Q^0 M)` with second-order jets and returns the `(1,1)` curvature
    /// blocks of the induced connections on `S` and `Q`, plus the first
    /// derivative data used by the tangent-identification tests.
    struct FrameFamily {
        omega_blocks: (CMat, CMat),
        push: CMat,
        push_bar: CMat,
    }

    fn frame_family(pt: &GrassmannPoint, m: &CMat) -> FrameFamily {
        let w = Jet::variable(c(0.0, 0.0), 0, 1);
        let drift = pt.frame_q().mul(m);
        let a: Mat<Jet> = mat_lift(pt.frame_s()).add(&mat_lift(&drift).scale(w));
        let fs = orthonormalize(&a).unwrap();
        let fq = complete_frame_seeded(&fs, pt.frame_q()).unwrap();
        let f = fs.hcat(&fq);
        let n = pt.n();
        let p = pt.p();
        // Connection form slots: omega_a = F^H (∂_a F); derivative of the
        // form: ∂_a omega_b = (∂_{σa} F)^H (∂_b F) + F^H (∂_a ∂_b F) where σ
        // swaps holomorphic and antiholomorphic slots.
        let val = mat_val(&f);
        let d = [mat_pd(&f, 0), mat_pd(&f, 1)];
        let omega = [val.adjoint().mul(&d[0]), val.adjoint().mul(&d[1])];
        let d_omega = |a: usize, b: usize| -> CMat {
            let sa = (a + 1) % 2;
            d[sa].adjoint().mul(&d[b]).add(&val.adjoint().mul(&mat_pd2(&f, a, b)))
        };
        // The full moving-frame connection is flat (it is a gauge transform
        // of the trivial one), so the sub-bundle curvature must be assembled
        // from the *block* connection: Ω_S(∂_w, ∂_w̄) = S-block of
        // (∂_w ω_w̄ - ∂_w̄ ω_w) plus the commutator of the S-blocks of ω.
        let dpart = d_omega(0, 1).sub(&d_omega(1, 0));
        let sblock = |m: &CMat| Mat::from_fn(p, p, |i, j| m[(i, j)]);
        let qblock = |m: &CMat| Mat::from_fn(n - p, n - p, |i, j| m[(p + i, p + j)]);
        let comm = |a: &CMat, b: &CMat| a.mul(b).sub(&b.mul(a));
        let omega_s = sblock(&dpart).add(&comm(&sblock(&omega[0]), &sblock(&omega[1])));
        let omega_q = qblock(&dpart).add(&comm(&qblock(&omega[0]), &qblock(&omega[1])));
        let fs_d = mat_pd(&fs, 0);
        let fs_db = mat_pd(&fs, 1);
        let fq_val = pt.frame_q();
        FrameFamily {
            omega_blocks: (omega_s, omega_q),
            push: fq_val.adjoint().mul(&fs_d),
            push_bar: fq_val.adjoint().mul(&fs_db),
        }
    }

    #[test]
    fn frame_family_identifies_tangent_matrix() {
        // The w-derivative of the orthonormalized family, watched from Q,
        // recovers the direction matrix exactly; the w̄-derivative vanishes.
        let mut r = rng(10);
        let pt = GrassmannPoint::random(5, 2, &mut r).unwrap();
        let m = random_gaussian(3, 2, &mut r);
        let fam = frame_family(&pt, &m);
        assert!(fam.push.sub(&m).fnorm() < 1e-10);
        assert!(fam.push_bar.fnorm() < 1e-10);
    }

    #[test]
    fn frame_family_confirms_bundle_curvature_signs() {
        // The (1,1) curvature of the induced connections, computed purely by
        // differentiating frames, matches the algebraic formulas
        // R^S(U, Ū) = -U^H U and R^Q(U, Ū) = U U^H.
        let mut r = rng(11);
        for (n, p) in [(4, 2), (5, 2), (6, 3)] {
            let pt = GrassmannPoint::random(n, p, &mut r).unwrap();
            let m = random_gaussian(n - p, p, &mut r);
            let fam = frame_family(&pt, &m);
            let expected_s = m.adjoint().mul(&m).neg();
            let expected_q = m.mul(&m.adjoint());
            let (got_s, got_q) = fam.omega_blocks;
            assert!(
                got_s.sub(&expected_s).fnorm() < 1e-9,
                "S-curvature mismatch: {:e}",
                got_s.sub(&expected_s).fnorm()
            );
            assert!(
                got_q.sub(&expected_q).fnorm() < 1e-9,
                "Q-curvature mismatch: {:e}",
                got_q.sub(&expected_q).fnorm()
            );
        }
    }
}
