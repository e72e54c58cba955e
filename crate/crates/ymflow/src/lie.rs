//! Exact SU(2)/su(2) kernels: group arithmetic, exponential map, projections,
//! inner products and randomness.
//!
//! Conventions (fixed once, everything downstream depends on them):
//!
//! * A group element is a unit quaternion `(q0, q1, q2, q3)` representing the
//!   SU(2) matrix `q0·I + i(q1·σ1 + q2·σ2 + q3·σ3)` with Pauli matrices `σk`.
//!   [`GroupElem::mul`] is the 2x2 matrix product in this representation.
//! * The algebra basis is `T_k = -(i/2)·σ_k`, orthonormal under
//!   `<X,Y> = Σ_k c_k(X)·c_k(Y)`, which equals `-2·tr(X·Y)`. The bracket is
//!   `[T_1,T_2] = T_3` and cyclic.
//! * An algebra element with coefficients `c` embeds as the quaternion
//!   `(0, -c1/2, -c2/2, -c3/2)`.

use rand::Rng;

/// An SU(2) element stored as a unit quaternion.
///
/// Represents the matrix `q0·I + i(q1σ1 + q2σ2 + q3σ3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElem {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// An su(2) element: coefficients in the orthonormal basis `T_k = -(i/2)σ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgebraElem {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// A general 2x2 complex matrix as 8 reals, row-major:
/// `[[a, b], [c, d]]` with entries `(re, im)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub m: [[(f64, f64); 2]; 2],
}

impl GroupElem {
    pub const IDENTITY: GroupElem = GroupElem {
        q0: 1.0,
        q1: 0.0,
        q2: 0.0,
        q3: 0.0,
    };

    pub fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        GroupElem { q0, q1, q2, q3 }
    }

    /// Squared quaternion norm; 1 for a valid group element.
    pub fn norm_sq(&self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3
    }

    /// Rescale to unit norm. Applied after every product to control drift.
    pub fn normalized(&self) -> Self {
        let n = self.norm_sq().sqrt();
        GroupElem {
            q0: self.q0 / n,
            q1: self.q1 / n,
            q2: self.q2 / n,
            q3: self.q3 / n,
        }
    }

    /// Group product `a·b`, i.e. the 2x2 matrix product of the representatives.
    ///
    /// In this representation the vector part composes with a *negative*
    /// cross product: `(a·b)_vec = a0·b + b0·a - a x b` (the basis `iσ_k`
    /// satisfies `(iσ1)(iσ2) = -iσ3`). Pinned by the matrix-product oracle in
    /// the tests.
    pub fn mul(&self, rhs: &GroupElem) -> GroupElem {
        let (a0, a1, a2, a3) = (self.q0, self.q1, self.q2, self.q3);
        let (b0, b1, b2, b3) = (rhs.q0, rhs.q1, rhs.q2, rhs.q3);
        GroupElem {
            q0: a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            q1: a0 * b1 + b0 * a1 - (a2 * b3 - a3 * b2),
            q2: a0 * b2 + b0 * a2 - (a3 * b1 - a1 * b3),
            q3: a0 * b3 + b0 * a3 - (a1 * b2 - a2 * b1),
        }
        .normalized()
    }

    /// Inverse = conjugate quaternion = matrix dagger.
    pub fn inverse(&self) -> GroupElem {
        GroupElem {
            q0: self.q0,
            q1: -self.q1,
            q2: -self.q2,
            q3: -self.q3,
        }
    }

    /// Real 2x2 trace, `tr U = 2·q0`.
    pub fn trace(&self) -> f64 {
        2.0 * self.q0
    }

    /// Principal logarithm with `|result| < 2π`.
    pub fn log(&self) -> AlgebraElem {
        let v = (self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3).sqrt();
        if v < 1e-300 {
            if self.q0 > 0.0 {
                return AlgebraElem::ZERO;
            }
            // log(-I): any direction works; fix the first axis.
            return AlgebraElem::new(2.0 * std::f64::consts::PI, 0.0, 0.0);
        }
        let theta = 2.0 * v.atan2(self.q0);
        let scale = -theta / v;
        AlgebraElem::new(scale * self.q1, scale * self.q2, scale * self.q3)
    }

    /// Embed as an explicit 2x2 complex matrix.
    pub fn to_matrix(&self) -> Mat2 {
        Mat2 {
            m: [
                [(self.q0, self.q3), (self.q2, self.q1)],
                [(-self.q2, self.q1), (self.q0, -self.q3)],
            ],
        }
    }

    /// Uniform element of SU(2) (Haar measure): normalized 4d Gaussian.
    pub fn random<R: Rng>(rng: &mut R) -> GroupElem {
        loop {
            let g = GroupElem {
                q0: gaussian(rng),
                q1: gaussian(rng),
                q2: gaussian(rng),
                q3: gaussian(rng),
            };
            let n = g.norm_sq();
            if n > 1e-12 {
                return g.normalized();
            }
        }
    }
}

/// Exponential map su(2) -> SU(2), exact closed form.
///
/// For `|x| = θ`: `exp(x) = (cos(θ/2), -(sin(θ/2)/θ)·c)`, with a series branch
/// below `θ = 1e-6`.
pub fn exp_map(x: &AlgebraElem) -> GroupElem {
    let theta = x.norm();
    let (q0, s) = if theta < 1e-6 {
        // cos(θ/2) and sin(θ/2)/θ to O(θ^6).
        let t2 = theta * theta;
        (
            1.0 - t2 / 8.0 + t2 * t2 / 384.0,
            0.5 - t2 / 48.0 + t2 * t2 / 3840.0,
        )
    } else {
        ((0.5 * theta).cos(), (0.5 * theta).sin() / theta)
    };
    GroupElem {
        q0,
        q1: -s * x.c1,
        q2: -s * x.c2,
        q3: -s * x.c3,
    }
}

/// Coefficients of the traceless anti-Hermitian part of `m` in the `T_k` basis:
/// `(m - m†)/2 - tr((m - m†)/2)/2 · I`.
pub fn project_algebra(m: &Mat2) -> AlgebraElem {
    // Anti-Hermitian part entries: ah_jk = (m_jk - conj(m_kj)) / 2.
    let a = m.m[0][0];
    let b = m.m[0][1];
    let c = m.m[1][0];
    let d = m.m[1][1];
    let ah00 = (0.0, a.1); // (a - conj a)/2 is purely imaginary
    let ah11 = (0.0, d.1);
    let ah01 = ((b.0 - c.0) / 2.0, (b.1 + c.1) / 2.0);
    let ah10 = ((c.0 - b.0) / 2.0, (c.1 + b.1) / 2.0);
    // Subtract the (purely imaginary) trace part.
    let tr_im = (ah00.1 + ah11.1) / 2.0;
    let t00 = ah00.1 - tr_im;
    // Result = i(p1σ1 + p2σ2 + p3σ3); read off p_k and convert c_k = -2 p_k.
    // i·p1σ1 = [[0, ip1],[ip1, 0]], i·p2σ2 = [[0, p2],[-p2, 0]],
    // i·p3σ3 = [[ip3, 0],[0, -ip3]].
    let p3 = t00;
    let p1 = (ah01.1 + ah10.1) / 2.0;
    let p2 = (ah01.0 - ah10.0) / 2.0;
    let _ = ah11;
    AlgebraElem::new(-2.0 * p1, -2.0 * p2, -2.0 * p3)
}

impl AlgebraElem {
    pub const ZERO: AlgebraElem = AlgebraElem {
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
    };

    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        AlgebraElem { c1, c2, c3 }
    }

    pub fn add(&self, rhs: &AlgebraElem) -> AlgebraElem {
        AlgebraElem::new(self.c1 + rhs.c1, self.c2 + rhs.c2, self.c3 + rhs.c3)
    }

    pub fn sub(&self, rhs: &AlgebraElem) -> AlgebraElem {
        AlgebraElem::new(self.c1 - rhs.c1, self.c2 - rhs.c2, self.c3 - rhs.c3)
    }

    pub fn scale(&self, s: f64) -> AlgebraElem {
        AlgebraElem::new(s * self.c1, s * self.c2, s * self.c3)
    }

    /// Inner product `<X,Y> = Σ_k c_k(X)c_k(Y)` (equals `-2 tr(XY)`).
    pub fn inner(&self, rhs: &AlgebraElem) -> f64 {
        self.c1 * rhs.c1 + self.c2 * rhs.c2 + self.c3 * rhs.c3
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Lie bracket; in the `T_k` basis this is the vector cross product.
    pub fn bracket(&self, rhs: &AlgebraElem) -> AlgebraElem {
        AlgebraElem::new(
            self.c2 * rhs.c3 - self.c3 * rhs.c2,
            self.c3 * rhs.c1 - self.c1 * rhs.c3,
            self.c1 * rhs.c2 - self.c2 * rhs.c1,
        )
    }

    /// Adjoint action `Ad_g x = g·x·g⁻¹`.
    pub fn adjoint(&self, g: &GroupElem) -> AlgebraElem {
        // Conjugate the embedded quaternion (0, -c/2); no renormalization since
        // the result is a pure vector.
        let (v1, v2, v3) = (-self.c1 / 2.0, -self.c2 / 2.0, -self.c3 / 2.0);
        let (a0, a1, a2, a3) = (g.q0, g.q1, g.q2, g.q3);
        // w = g * v (pure-vector rhs), matrix-product convention.
        let w0 = -(a1 * v1 + a2 * v2 + a3 * v3);
        let w1 = a0 * v1 - (a2 * v3 - a3 * v2);
        let w2 = a0 * v2 - (a3 * v1 - a1 * v3);
        let w3 = a0 * v3 - (a1 * v2 - a2 * v1);
        // r = w * g⁻¹ with g⁻¹ = (a0, -a1, -a2, -a3).
        let r1 = -w0 * a1 + a0 * w1 - (-w2 * a3 + w3 * a2);
        let r2 = -w0 * a2 + a0 * w2 - (-w3 * a1 + w1 * a3);
        let r3 = -w0 * a3 + a0 * w3 - (-w1 * a2 + w2 * a1);
        AlgebraElem::new(-2.0 * r1, -2.0 * r2, -2.0 * r3)
    }

    /// Embed as an explicit 2x2 complex matrix (`Σ c_k T_k`).
    pub fn to_matrix(&self) -> Mat2 {
        let (v1, v2, v3) = (-self.c1 / 2.0, -self.c2 / 2.0, -self.c3 / 2.0);
        Mat2 {
            m: [[(0.0, v3), (v2, v1)], [(-v2, v1), (0.0, -v3)]],
        }
    }

    /// Uniform draw from the closed algebra ball of the given radius.
    pub fn random_in_ball<R: Rng>(rng: &mut R, radius: f64) -> AlgebraElem {
        if radius == 0.0 {
            return AlgebraElem::ZERO;
        }
        loop {
            let d = AlgebraElem::new(gaussian(rng), gaussian(rng), gaussian(rng));
            let n = d.norm();
            if n > 1e-12 {
                let u: f64 = rng.gen();
                return d.scale(radius * u.cbrt() / n);
            }
        }
    }
}

impl Mat2 {
    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = Mat2::default();
        for i in 0..2 {
            for j in 0..2 {
                let mut re = 0.0;
                let mut im = 0.0;
                for k in 0..2 {
                    let (ar, ai) = self.m[i][k];
                    let (br, bi) = rhs.m[k][j];
                    re += ar * br - ai * bi;
                    im += ar * bi + ai * br;
                }
                out.m[i][j] = (re, im);
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        let mut out = Mat2::default();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = (
                    self.m[i][j].0 + rhs.m[i][j].0,
                    self.m[i][j].1 + rhs.m[i][j].1,
                );
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = (s * out.m[i][j].0, s * out.m[i][j].1);
            }
        }
        out
    }

    pub const IDENTITY: Mat2 = Mat2 {
        m: [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]],
    };
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; one value per call keeps the stream layout simple.
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > 1e-300 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn mat_close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (0..2).all(|i| {
            (0..2).all(|j| {
                (a.m[i][j].0 - b.m[i][j].0).abs() < tol && (a.m[i][j].1 - b.m[i][j].1).abs() < tol
            })
        })
    }

    fn alg_close(a: &AlgebraElem, b: &AlgebraElem, tol: f64) -> bool {
        a.sub(b).norm() < tol
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let g = GroupElem::random(&mut rng);
            let h = GroupElem::IDENTITY.mul(&g);
            assert!((h.q0 - g.q0).abs() < 1e-14 && (h.q3 - g.q3).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_gives_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let g = GroupElem::random(&mut rng);
            let e = g.mul(&g.inverse());
            assert!((e.q0 - 1.0).abs() < 1e-14);
            assert!(e.q1.abs() < 1e-14 && e.q2.abs() < 1e-14 && e.q3.abs() < 1e-14);
        }
    }

    // Oracle: explicit Pauli-matrix multiplication. iσ1 · iσ2 = -iσ3, so the
    // product of (0,1,0,0) and (0,0,1,0) is (0,0,0,-1).
    #[test]
    fn product_matches_matrix_oracle() {
        let e1 = GroupElem::new(0.0, 1.0, 0.0, 0.0);
        let e2 = GroupElem::new(0.0, 0.0, 1.0, 0.0);
        let p = e1.mul(&e2);
        let oracle = e1.to_matrix().mul(&e2.to_matrix());
        assert!(mat_close(&p.to_matrix(), &oracle, 1e-14));
        assert_eq!((p.q0, p.q1, p.q2, p.q3), (0.0, 0.0, 0.0, -1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = GroupElem::random(&mut rng);
            let b = GroupElem::random(&mut rng);
            let p = a.mul(&b).to_matrix();
            let q = a.to_matrix().mul(&b.to_matrix());
            assert!(mat_close(&p, &q, 1e-13));
        }
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let g = exp_map(&AlgebraElem::ZERO);
        assert_eq!((g.q0, g.q1, g.q2, g.q3), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn exp_inverse_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = AlgebraElem::random_in_ball(&mut rng, 3.0);
            let e = exp_map(&x).mul(&exp_map(&x.scale(-1.0)));
            assert!((e.q0 - 1.0).abs() < 1e-13);
        }
    }

    // exp((2π,0,0)) = -I: cos(π) = -1. Cross-checked against a 20-term matrix
    // power series of the embedded algebra element.
    #[test]
    fn exp_of_two_pi_is_minus_identity() {
        let x = AlgebraElem::new(2.0 * PI, 0.0, 0.0);
        let g = exp_map(&x);
        assert!((g.q0 + 1.0).abs() < 1e-12);
        assert!(g.q1.abs() < 1e-12 && g.q2.abs() < 1e-12 && g.q3.abs() < 1e-12);

        let xm = x.to_matrix();
        let mut series = Mat2::IDENTITY;
        let mut term = Mat2::IDENTITY;
        for k in 1..=20 {
            term = term.mul(&xm).scale(1.0 / k as f64);
            series = series.add(&term);
        }
        assert!(mat_close(&g.to_matrix(), &series, 1e-9));
    }

    #[test]
    fn exp_matches_series_oracle_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = AlgebraElem::random_in_ball(&mut rng, 2.0);
            let xm = x.to_matrix();
            let mut series = Mat2::IDENTITY;
            let mut term = Mat2::IDENTITY;
            for k in 1..=20 {
                term = term.mul(&xm).scale(1.0 / k as f64);
                series = series.add(&term);
            }
            assert!(mat_close(&exp_map(&x).to_matrix(), &series, 1e-12));
        }
    }

    #[test]
    fn project_of_identity_is_zero() {
        assert_eq!(project_algebra(&Mat2::IDENTITY), AlgebraElem::ZERO);
    }

    #[test]
    fn project_is_idempotent_on_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let x = AlgebraElem::random_in_ball(&mut rng, 5.0);
            let back = project_algebra(&x.to_matrix());
            assert!(alg_close(&back, &x, 1e-13));
        }
    }

    // project(exp(x)) = x·(sin(|x|/2)/(|x|/2)), so the small-x error is cubic.
    #[test]
    fn project_exp_linearity_series_oracle() {
        let x = AlgebraElem::new(0.3, 0.0, 0.0);
        let p = project_algebra(&exp_map(&x).to_matrix());
        assert!((p.c1 - 2.0 * (0.15f64).sin()).abs() < 1e-14);

        for &eps in &[1e-2, 1e-3, 1e-4] {
            let x = AlgebraElem::new(eps, -0.5 * eps, 0.25 * eps);
            let p = project_algebra(&exp_map(&x).to_matrix());
            assert!(p.sub(&x).norm() <= 0.1 * x.norm().powi(3) + 1e-15);
        }
    }

    #[test]
    fn log_exp_roundtrip_inside_principal_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = AlgebraElem::random_in_ball(&mut rng, 2.0 * PI - 1e-3);
            let back = exp_map(&x).log();
            assert!(alg_close(&back, &x, 1e-9), "x = {x:?}, back = {back:?}");
        }
    }

    // Beyond |x| = 2π the principal log cannot recover x itself, but it must
    // land on the same group element.
    #[test]
    fn log_exp_agrees_at_group_level_up_to_ten() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = AlgebraElem::random_in_ball(&mut rng, 10.0);
            let g = exp_map(&x);
            let y = g.log();
            assert!(y.norm() < 2.0 * PI + 1e-9);
            let h = exp_map(&y);
            let d = g.mul(&h.inverse());
            assert!((d.q0 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bracket_structure_constants() {
        let t1 = AlgebraElem::new(1.0, 0.0, 0.0);
        let t2 = AlgebraElem::new(0.0, 1.0, 0.0);
        let t3 = AlgebraElem::new(0.0, 0.0, 1.0);
        assert!(alg_close(&t1.bracket(&t2), &t3, 1e-15));
        assert!(alg_close(&t2.bracket(&t3), &t1, 1e-15));
        assert!(alg_close(&t3.bracket(&t1), &t2, 1e-15));
        // Consistency with the matrix commutator.
        let xm = t1.to_matrix();
        let ym = t2.to_matrix();
        let comm = xm.mul(&ym).add(&ym.mul(&xm).scale(-1.0));
        assert!(alg_close(&project_algebra(&comm), &t3, 1e-15));
    }

    #[test]
    fn adjoint_matches_matrix_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let g = GroupElem::random(&mut rng);
            let x = AlgebraElem::random_in_ball(&mut rng, 2.0);
            let ad = x.adjoint(&g);
            let m = g
                .to_matrix()
                .mul(&x.to_matrix())
                .mul(&g.inverse().to_matrix());
            assert!(alg_close(&ad, &project_algebra(&m), 1e-12));
        }
    }

    proptest! {
        #[test]
        fn prop_product_stays_unit(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = GroupElem::random(&mut rng);
            let b = GroupElem::random(&mut rng);
            prop_assert!((a.mul(&b).norm_sq() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn prop_inner_ad_invariant(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = GroupElem::random(&mut rng);
            let x = AlgebraElem::random_in_ball(&mut rng, 4.0);
            let y = AlgebraElem::random_in_ball(&mut rng, 4.0);
            let lhs = x.adjoint(&g).inner(&y.adjoint(&g));
            prop_assert!((lhs - x.inner(&y)).abs() < 1e-10 * (1.0 + x.norm() * y.norm()));
        }

        #[test]
        fn prop_inner_bilinear_symmetric(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = AlgebraElem::random_in_ball(&mut rng, 3.0);
            let y = AlgebraElem::random_in_ball(&mut rng, 3.0);
            let z = AlgebraElem::random_in_ball(&mut rng, 3.0);
            prop_assert!((x.inner(&y) - y.inner(&x)).abs() < 1e-12);
            let lhs = x.add(&y.scale(2.5)).inner(&z);
            let rhs = x.inner(&z) + 2.5 * y.inner(&z);
            prop_assert!((lhs - rhs).abs() < 1e-11);
        }
    }
}
