//! Second-order forward-mode Wirtinger jets.
//!
//! A [`Jet`] carries a complex value together with all first and second
//! partial derivatives with respect to `k` complex variables *and* their
//! conjugates.  Derivative slots are laid out flat: slot `i < k` is
//! `d/dz_i`, slot `k + i` is `d/dz̄_i`.  Conjugation swaps the two halves
//! (and conjugates), so expressions mixing `z` and `z̄` — Hermitian metrics,
//! Gram–Schmidt normalizations — differentiate exactly through a single
//! generic evaluation.
//!
//! Constants are jets with zero variables and broadcast against anything;
//! two non-constant operands must agree on `k`.

use crate::linalg::{CMat, Mat, Scalar, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    /// Number of complex variables `k` (0 for constants).
    nvars: usize,
    val: C64,
    /// First-order slots, length `2k`.
    grad: Vec<C64>,
    /// Second-order slots, row-major `(2k) x (2k)`, symmetric.
    hess: Vec<C64>,
}

impl Jet {
    pub fn constant(val: C64) -> Self {
        Jet {
            nvars: 0,
            val,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    /// The `i`-th of `k` complex variables, seeded with unit holomorphic
    /// derivative.  Conjugate variables are obtained with [`Scalar::conj`],
    /// never seeded directly.
    pub fn variable(val: C64, i: usize, k: usize) -> Self {
        assert!(i < k, "variable index out of range");
        let mut grad = vec![C64::new(0.0, 0.0); 2 * k];
        grad[i] = C64::new(1.0, 0.0);
        Jet {
            nvars: k,
            val,
            grad,
            hess: vec![C64::new(0.0, 0.0); 4 * k * k],
        }
    }

    /// Seeds one jet variable per entry of `values`.
    pub fn variables(values: &[C64]) -> Vec<Jet> {
        let k = values.len();
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, k))
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn val(&self) -> C64 {
        self.val
    }

    /// First derivative in flat slot `a` (`a < k` holomorphic, `a >= k`
    /// antiholomorphic).  Constants report zero in every slot.
    pub fn pd(&self, a: usize) -> C64 {
        if self.nvars == 0 {
            C64::new(0.0, 0.0)
        } else {
            self.grad[a]
        }
    }

    /// Second derivative in flat slots `(a, b)`.
    pub fn pd2(&self, a: usize, b: usize) -> C64 {
        if self.nvars == 0 {
            C64::new(0.0, 0.0)
        } else {
            self.hess[a * 2 * self.nvars + b]
        }
    }

    /// Holomorphic derivative `df/dz_i`.
    pub fn dz(&self, i: usize) -> C64 {
        self.pd(i)
    }

    /// Antiholomorphic derivative `df/dz̄_i`.
    pub fn dzbar(&self, i: usize) -> C64 {
        if self.nvars == 0 {
            C64::new(0.0, 0.0)
        } else {
            self.grad[self.nvars + i]
        }
    }

    fn promote(&self, k: usize) -> Jet {
        if self.nvars == k {
            return self.clone();
        }
        assert_eq!(self.nvars, 0, "jets with different variable counts");
        let mut j = Jet::constant(self.val);
        j.nvars = k;
        j.grad = vec![C64::new(0.0, 0.0); 2 * k];
        j.hess = vec![C64::new(0.0, 0.0); 4 * k * k];
        j
    }

    fn binary(&self, other: &Jet) -> (Jet, Jet) {
        let k = self.nvars.max(other.nvars);
        (self.promote(k), other.promote(k))
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let (mut a, b) = self.binary(other);
        a.val += b.val;
        for (x, y) in a.grad.iter_mut().zip(&b.grad) {
            *x += y;
        }
        for (x, y) in a.hess.iter_mut().zip(&b.hess) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let (mut a, b) = self.binary(other);
        a.val -= b.val;
        for (x, y) in a.grad.iter_mut().zip(&b.grad) {
            *x -= y;
        }
        for (x, y) in a.hess.iter_mut().zip(&b.hess) {
            *x -= y;
        }
        a
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let (a, b) = self.binary(other);
        let k2 = 2 * a.nvars;
        let mut out = a.clone();
        out.val = a.val * b.val;
        for s in 0..k2 {
            out.grad[s] = a.val * b.grad[s] + b.val * a.grad[s];
        }
        for r in 0..k2 {
            for s in 0..k2 {
                out.hess[r * k2 + s] = a.val * b.hess[r * k2 + s]
                    + b.val * a.hess[r * k2 + s]
                    + a.grad[r] * b.grad[s]
                    + a.grad[s] * b.grad[r];
            }
        }
        out
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        out.val = -out.val;
        for x in out.grad.iter_mut() {
            *x = -*x;
        }
        for x in out.hess.iter_mut() {
            *x = -*x;
        }
        out
    }

    /// Applies a smooth scalar function through its value and first two
    /// derivatives at the jet center.
    fn chain(&self, phi: C64, dphi: C64, d2phi: C64) -> Jet {
        let k2 = 2 * self.nvars;
        let mut out = self.clone();
        out.val = phi;
        for s in 0..k2 {
            out.grad[s] = dphi * self.grad[s];
        }
        for r in 0..k2 {
            for s in 0..k2 {
                out.hess[r * k2 + s] =
                    dphi * self.hess[r * k2 + s] + d2phi * self.grad[r] * self.grad[s];
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let w = self.val;
        self.chain(1.0 / w, -1.0 / (w * w), 2.0 / (w * w * w))
    }

    pub fn sqrt_jet(&self) -> Jet {
        let s = self.val.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn conj_jet(&self) -> Jet {
        let k = self.nvars;
        if k == 0 {
            return Jet::constant(self.val.conj());
        }
        let k2 = 2 * k;
        let swap = |s: usize| (s + k) % k2;
        let mut out = self.clone();
        out.val = self.val.conj();
        for s in 0..k2 {
            out.grad[s] = self.grad[swap(s)].conj();
        }
        for r in 0..k2 {
            for s in 0..k2 {
                out.hess[r * k2 + s] = self.hess[swap(r) * k2 + swap(s)].conj();
            }
        }
        out
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        Jet::add(&self, &rhs)
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        Jet::sub(&self, &rhs)
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        Jet::mul(&self, &rhs)
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        Jet::mul(&self, &rhs.recip())
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::neg(&self)
    }
}

/// Centers of a jet matrix.
pub fn mat_val(m: &Mat<Jet>) -> CMat {
    m.map(|j| j.val())
}

/// Entrywise first derivative of a jet matrix in flat slot `a`.
pub fn mat_pd(m: &Mat<Jet>, a: usize) -> CMat {
    m.map(|j| j.pd(a))
}

/// Entrywise second derivative of a jet matrix in flat slots `(a, b)`.
pub fn mat_pd2(m: &Mat<Jet>, a: usize, b: usize) -> CMat {
    m.map(|j| j.pd2(a, b))
}

/// Lifts a complex matrix to a constant jet matrix.
pub fn mat_lift(m: &CMat) -> Mat<Jet> {
    m.map(|c| Jet::constant(*c))
}

impl Scalar for Jet {
    fn zero() -> Self {
        Jet::constant(C64::new(0.0, 0.0))
    }
    fn one() -> Self {
        Jet::constant(C64::new(1.0, 0.0))
    }
    fn from_c64(c: C64) -> Self {
        Jet::constant(c)
    }
    fn conj(&self) -> Self {
        self.conj_jet()
    }
    fn sqrt(&self) -> Self {
        self.sqrt_jet()
    }
    fn value(&self) -> C64 {
        self.val
    }
}
