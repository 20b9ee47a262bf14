//! Closed-form complex 2×2 algebra on the bare basis (|g⟩, |e⟩).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Amplitudes on the bare basis: `cg` on |g⟩ and `ce` on |e⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub cg: C64,
    pub ce: C64,
}

impl StateVector {
    pub const fn new(cg: C64, ce: C64) -> Self {
        Self { cg, ce }
    }

    pub const fn ground() -> Self {
        Self::new(ONE, ZERO)
    }

    pub const fn excited() -> Self {
        Self::new(ZERO, ONE)
    }

    pub fn p_g(&self) -> f64 {
        self.cg.norm_sqr()
    }

    pub fn p_e(&self) -> f64 {
        self.ce.norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.p_g() + self.p_e()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.cg / n, self.ce / n)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C64 {
        self.cg.conj() * other.cg + self.ce.conj() * other.ce
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.cg * s, self.ce * s)
    }

    pub fn is_finite(&self) -> bool {
        self.cg.is_finite() && self.ce.is_finite()
    }
}

/// Row-major complex 2×2 matrix `[[gg, ge], [eg, ee]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub gg: C64,
    pub ge: C64,
    pub eg: C64,
    pub ee: C64,
}

impl Mat2 {
    pub const fn new(gg: C64, ge: C64, eg: C64, ee: C64) -> Self {
        Self { gg, ge, eg, ee }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(gg: C64, ee: C64) -> Self {
        Self::new(gg, ZERO, ZERO, ee)
    }

    /// Hermitian matrix `[[a, b], [b*, d]]` with real diagonal.
    pub fn hermitian(a: f64, b: C64, d: f64) -> Self {
        Self::new(C64::from(a), b, b.conj(), C64::from(d))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.gg.conj(), self.eg.conj(), self.ge.conj(), self.ee.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.gg * s, self.ge * s, self.eg * s, self.ee * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::from(s))
    }

    pub fn trace(&self) -> C64 {
        self.gg + self.ee
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector::new(
            self.gg * v.cg + self.ge * v.ce,
            self.eg * v.cg + self.ee * v.ce,
        )
    }

    pub fn frobenius(&self) -> f64 {
        (self.gg.norm_sqr() + self.ge.norm_sqr() + self.eg.norm_sqr() + self.ee.norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.gg.is_finite() && self.ge.is_finite() && self.eg.is_finite() && self.ee.is_finite()
    }

    /// Largest deviation from Hermiticity, relative to the Frobenius norm.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.frobenius().max(f64::MIN_POSITIVE);
        let off = (self.ge - self.eg.conj()).norm();
        let diag = self.gg.im.abs().max(self.ee.im.abs());
        off.max(diag) / scale
    }

    /// Pauli decomposition `c0·1 + cx σx + cy σy + cz σz`.
    pub fn pauli(&self) -> [C64; 4] {
        [
            (self.gg + self.ee) * 0.5,
            (self.ge + self.eg) * 0.5,
            (self.eg - self.ge) * 0.5 * (-I),
            (self.gg - self.ee) * 0.5,
        ]
    }

    /// Unitary `exp(-i H)` for Hermitian `H`, evaluated in closed form.
    ///
    /// With `H = c0 + n·σ`, the exponential is `e^{-i c0}(cos|n| − i sin|n| n̂·σ)`.
    /// The anti-Hermitian part of `H` is discarded.
    pub fn expm_neg_i_hermitian(&self) -> Self {
        let [c0, cx, cy, cz] = self.pauli();
        let (nx, ny, nz) = (cx.re, cy.re, cz.re);
        let theta = (nx * nx + ny * ny + nz * nz).sqrt();
        let c = theta.cos();
        // sin(θ)/θ, stable as θ → 0
        let s = if theta < 1e-4 {
            1.0 - theta * theta / 6.0 + theta.powi(4) / 120.0
        } else {
            theta.sin() / theta
        };
        let phase = C64::from_polar(1.0, -c0.re);
        let m = Self::new(
            C64::new(c, -s * nz),
            C64::new(-s * ny, -s * nx),
            C64::new(s * ny, -s * nx),
            C64::new(c, s * nz),
        );
        m.scale(phase)
    }
}

impl Add for Mat2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.gg + o.gg, self.ge + o.ge, self.eg + o.eg, self.ee + o.ee)
    }
}

impl Sub for Mat2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.gg - o.gg, self.ge - o.ge, self.eg - o.eg, self.ee - o.ee)
    }
}

impl Neg for Mat2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.gg * o.gg + self.ge * o.eg,
            self.gg * o.ge + self.ge * o.ee,
            self.eg * o.gg + self.ee * o.eg,
            self.eg * o.ge + self.ee * o.ee,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_roundtrip() {
        let m = Mat2::new(C64::new(1.0, 0.5), C64::new(-2.0, 3.0), C64::new(0.25, 1.0), C64::new(4.0, -1.0));
        let [c0, cx, cy, cz] = m.pauli();
        let sx = Mat2::new(ZERO, ONE, ONE, ZERO);
        let sy = Mat2::new(ZERO, -I, I, ZERO);
        let sz = Mat2::diag(ONE, -ONE);
        let back = Mat2::identity().scale(c0) + sx.scale(cx) + sy.scale(cy) + sz.scale(cz);
        assert!((back - m).frobenius() < 1e-14);
    }

    #[test]
    fn exponential_matches_series() {
        let h = Mat2::hermitian(0.3, C64::new(0.2, -0.7), -1.1);
        let u = h.expm_neg_i_hermitian();
        // Taylor series of exp(-iH) to high order
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..40 {
            term = (term * h).scale(-I / k as f64);
            sum = sum + term;
        }
        assert!((u - sum).frobenius() < 1e-13);
        assert!((u.adjoint() * u - Mat2::identity()).frobenius() < 1e-15);
    }

    #[test]
    fn tiny_exponent_is_near_identity() {
        let h = Mat2::hermitian(0.0, C64::new(1e-9, 0.0), 0.0);
        let u = h.expm_neg_i_hermitian();
        assert!((u.ge - C64::new(0.0, -1e-9)).norm() < 1e-20);
    }
}
