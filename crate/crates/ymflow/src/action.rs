//! The discrete alpha-functional, curvature observables and the topological
//! charge.
//!
//! Normalization conventions (all constants below derive from these):
//!
//! * `|F|^2` at a site means `sum_{mu<nu} |F_{mu nu}|^2` in the orthonormal
//!   `T_k` basis (equivalently `-2 tr F^2` summed over ordered planes).
//! * With that convention the plaquette density constant is [`KAPPA`] = 4:
//!   for `U_P = exp(a^2 phi T_3)` one has `2 - tr U_P = 2(1 - cos(a^2 phi/2))
//!   -> a^4 phi^2 / 4`, so `(KAPPA/a^4)(2 - tr U_P) -> phi^2 = |F|^2`.
//! * The charge pairing is the trace form `<X,Y>_tr = -tr(XY)`, i.e. half the
//!   basis inner product; with it a unit self-dual lump integrates to
//!   `Q = +1` and carries Yang-Mills energy `16 pi^2` (= `8 pi^2` times the
//!   convention factor 2 between `-tr` and `-2 tr` norms, recorded as
//!   [`INSTANTON_YM_ENERGY`]).

use crate::lattice::{GaugeField, Geom, Lattice};
use crate::lie::{AlgebraElem, GroupElem};
use crate::util::{par_site_map, tree_sum};

/// Plaquette-density normalization fixed by the small-field series expansion
/// (see module docs).
pub const KAPPA: f64 = 4.0;

/// Continuum Yang-Mills energy of a single unit-charge instanton under this
/// module's `|F|^2` convention.
pub const INSTANTON_YM_ENERGY: f64 = 16.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Ordered planes `(mu, nu)` with `mu < nu`; index order is fixed and public.
pub const PLANES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Clover field strength `F_{mu nu}(x)` for the six ordered planes.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    lattice: Lattice,
    f: Vec<[AlgebraElem; 6]>, // per site, plane index per PLANES
}

impl CurvatureField {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn from_values(lattice: Lattice, f: Vec<[AlgebraElem; 6]>) -> Self {
        assert_eq!(f.len(), lattice.n_sites());
        CurvatureField { lattice, f }
    }

    /// `F_{mu nu}(x)` for an ordered plane index (see [`PLANES`]).
    #[inline(always)]
    pub fn at(&self, site: usize, plane: usize) -> &AlgebraElem {
        &self.f[site][plane]
    }

    /// Pointwise `|F|^2 = sum_{mu<nu} |F_{mu nu}|^2`.
    pub fn density(&self, site: usize) -> f64 {
        (0..6).map(|p| self.at(site, p).norm_sq()).sum()
    }
}

/// Pointwise scalar density `rho(x) >= 0` (units 1/length^4).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    lattice: Lattice,
    rho: Vec<f64>,
}

impl DensityField {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn at(&self, site: usize) -> f64 {
        self.rho[site]
    }

    pub fn from_values(lattice: Lattice, rho: Vec<f64>) -> Self {
        assert_eq!(rho.len(), lattice.n_sites());
        DensityField { lattice, rho }
    }

    /// `a^4 * sum_x |rho_self - rho_other|`: the gauge-invariant field
    /// distance used by stability checks.
    pub fn l1_distance(&self, other: &DensityField) -> f64 {
        let diffs: Vec<f64> = self
            .rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| (a - b).abs())
            .collect();
        self.lattice.spacing().powi(4) * tree_sum(&diffs)
    }

    pub fn max_diff(&self, other: &DensityField) -> f64 {
        self.rho
            .iter()
            .zip(&other.rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Holonomy around the elementary square at `x` in the `(mu, nu)` plane:
/// `U_mu(x) U_nu(x+mu) U_mu(x+nu)^-1 U_nu(x)^-1`.
pub fn plaquette(u: &GaugeField, site: usize, mu: usize, nu: usize) -> GroupElem {
    assert!(mu != nu, "plaquette needs two distinct directions");
    let lat = u.lattice();
    let xmu = lat.neighbor(site, mu, true);
    let xnu = lat.neighbor(site, nu, true);
    u.link(site, mu)
        .mul(u.link(xmu, nu))
        .mul(&u.link(xnu, mu).inverse())
        .mul(&u.link(site, nu).inverse())
}

#[inline(always)]
fn plaquette_geom(u: &GaugeField, geom: &Geom, site: usize, mu: usize, nu: usize) -> GroupElem {
    let xmu = geom.up(site, mu);
    let xnu = geom.up(site, nu);
    u.link(site, mu)
        .mul(u.link(xmu, nu))
        .mul(&u.link(xnu, mu).inverse())
        .mul(&u.link(site, nu).inverse())
}

/// Energy density carried by one plaquette,
/// `(KAPPA/a^4) * (2 - tr U_P) -> |F_{mu nu}|^2 + O(a^2)`.
pub fn plaquette_density(u: &GaugeField, site: usize, mu: usize, nu: usize) -> f64 {
    assert!(mu < nu, "plaquette density uses ordered planes");
    let a4 = u.lattice().spacing().powi(4);
    KAPPA / a4 * (2.0 - plaquette(u, site, mu, nu).trace())
}

#[inline(always)]
fn site_density_geom(u: &GaugeField, geom: &Geom, site: usize, inv_a4: f64) -> f64 {
    let mut rho = 0.0;
    for &(mu, nu) in &PLANES {
        rho += 2.0 - plaquette_geom(u, geom, site, mu, nu).trace();
    }
    KAPPA * inv_a4 * rho
}

/// Plaquette-anchored density field `rho(x) = sum_{mu<nu} e(x, mu, nu)`.
/// This is the density the action and the flow monitors integrate.
pub fn density_field(u: &GaugeField) -> DensityField {
    let lat = *u.lattice();
    let geom = Geom::new(&lat);
    let inv_a4 = 1.0 / lat.spacing().powi(4);
    let rho = par_site_map(lat.n_sites(), |s| site_density_geom(u, &geom, s, inv_a4));
    DensityField { lattice: lat, rho }
}

/// The discrete alpha-functional `S_alpha = a^4 sum_x (1 + rho(x))^alpha`.
pub fn alpha_action(u: &GaugeField, alpha: f64) -> f64 {
    assert!(alpha >= 1.0, "alpha_action requires alpha >= 1");
    let lat = *u.lattice();
    let geom = Geom::new(&lat);
    let inv_a4 = 1.0 / lat.spacing().powi(4);
    let terms = par_site_map(lat.n_sites(), |s| {
        (1.0 + site_density_geom(u, &geom, s, inv_a4)).powf(alpha)
    });
    lat.spacing().powi(4) * tree_sum(&terms)
}

/// Wilson-type Yang-Mills energy `a^4 sum_x rho(x)`.
pub fn ym_energy(u: &GaugeField) -> f64 {
    let lat = *u.lattice();
    let geom = Geom::new(&lat);
    let inv_a4 = 1.0 / lat.spacing().powi(4);
    let terms = par_site_map(lat.n_sites(), |s| site_density_geom(u, &geom, s, inv_a4));
    lat.spacing().powi(4) * tree_sum(&terms)
}

/// Clover (4-leaf symmetric) field strength, an O(a^2)-accurate estimator of
/// `F_{mu nu}(x)`. Antisymmetric in `(mu, nu)` by construction.
pub fn clover_curvature(u: &GaugeField) -> CurvatureField {
    let lat = *u.lattice();
    let geom = Geom::new(&lat);
    let inv_a2 = 1.0 / (lat.spacing() * lat.spacing());
    let f = par_site_map(lat.n_sites(), |s| {
        let mut row = [AlgebraElem::ZERO; 6];
        for (p, &(mu, nu)) in PLANES.iter().enumerate() {
            row[p] = clover_leaf(u, &geom, s, mu, nu, inv_a2);
        }
        row
    });
    CurvatureField { lattice: lat, f }
}

/// Average of the four plaquettes in the `(mu, nu)` plane touching `x`, all
/// traversed with the same circulation and based at `x`, projected to the
/// algebra and divided by `a^2`.
fn clover_leaf(
    u: &GaugeField,
    geom: &Geom,
    s: usize,
    mu: usize,
    nu: usize,
    inv_a2: f64,
) -> AlgebraElem {
    let up_mu = geom.up(s, mu);
    let up_nu = geom.up(s, nu);
    let dn_mu = geom.dn(s, mu);
    let dn_nu = geom.dn(s, nu);
    let dn_mu_up_nu = geom.up(dn_mu, nu);
    let dn_mu_dn_nu = geom.dn(dn_mu, nu);
    let dn_nu_up_mu = geom.up(dn_nu, mu);

    // Quadrant (+mu, +nu)
    let p1 = u
        .link(s, mu)
        .mul(u.link(up_mu, nu))
        .mul(&u.link(up_nu, mu).inverse())
        .mul(&u.link(s, nu).inverse());
    // Quadrant (-mu, +nu)
    let p2 = u
        .link(s, nu)
        .mul(&u.link(dn_mu_up_nu, mu).inverse())
        .mul(&u.link(dn_mu, nu).inverse())
        .mul(u.link(dn_mu, mu));
    // Quadrant (-mu, -nu)
    let p3 = u
        .link(dn_mu, mu)
        .inverse()
        .mul(&u.link(dn_mu_dn_nu, nu).inverse())
        .mul(u.link(dn_mu_dn_nu, mu))
        .mul(u.link(dn_nu, nu));
    // Quadrant (+mu, -nu)
    let p4 = u
        .link(dn_nu, nu)
        .inverse()
        .mul(u.link(dn_nu, mu))
        .mul(u.link(dn_nu_up_mu, nu))
        .mul(&u.link(s, mu).inverse());

    // Sums of SU(2) matrices stay in the span {I, i sigma_k}; the projection
    // of the average reads off the vector part.
    let v1 = (p1.q1 + p2.q1 + p3.q1 + p4.q1) * 0.25;
    let v2 = (p1.q2 + p2.q2 + p3.q2 + p4.q2) * 0.25;
    let v3 = (p1.q3 + p2.q3 + p3.q3 + p4.q3) * 0.25;
    AlgebraElem::new(-2.0 * v1 * inv_a2, -2.0 * v2 * inv_a2, -2.0 * v3 * inv_a2)
}

/// Clover-based density field (observable-grade, O(a^2) symmetric).
pub fn clover_density_field(u: &GaugeField) -> DensityField {
    let f = clover_curvature(u);
    let lat = *u.lattice();
    let rho = par_site_map(lat.n_sites(), |s| f.density(s));
    DensityField { lattice: lat, rho }
}

/// `sup_x |F|^2` from the clover estimator.
pub fn sup_curvature(u: &GaugeField) -> f64 {
    let f = clover_curvature(u);
    (0..u.lattice().n_sites())
        .map(|s| f.density(s))
        .fold(0.0, f64::max)
}

/// Second Chern number estimate
/// `Q = (1/32 pi^2) a^4 sum_x sum_{munurhosigma} eps <F_{mu nu}, F_{rho sigma}>_tr`
/// with the trace form `<X,Y>_tr = -tr(XY)`; the epsilon contraction reduces
/// to the three dual plane pairings.
pub fn topological_charge(u: &GaugeField) -> f64 {
    let f = clover_curvature(u);
    let lat = *u.lattice();
    // Pair the plane indices (01,23), (02,13), (03,12) with signs +,-,+.
    let terms = par_site_map(lat.n_sites(), |s| {
        f.at(s, 0).inner(f.at(s, 5)) - f.at(s, 1).inner(f.at(s, 4)) + f.at(s, 2).inner(f.at(s, 3))
    });
    let a4 = lat.spacing().powi(4);
    a4 * tree_sum(&terms) / (8.0 * std::f64::consts::PI * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{
        apply_gauge, cold_start, hot_start, random_gauge, sample_continuum, single_instanton,
        Lattice,
    };
    use crate::lie::exp_map;
    use std::f64::consts::PI;

    #[test]
    fn cold_field_observables_vanish() {
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        let u = cold_start(lat);
        assert_eq!(plaquette(&u, 0, 0, 1), GroupElem::IDENTITY);
        assert_eq!(plaquette_density(&u, 0, 0, 1), 0.0);
        assert_eq!(ym_energy(&u), 0.0);
        assert_eq!(sup_curvature(&u), 0.0);
        assert_eq!(topological_charge(&u), 0.0);
        let f = clover_curvature(&u);
        assert!(f.density(17) == 0.0);
    }

    #[test]
    fn pure_gauge_plaquettes_are_identity() {
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        let g = random_gauge(lat, 99);
        let u = apply_gauge(&cold_start(lat), &g).unwrap();
        for s in [0, 5, 100] {
            for &(mu, nu) in &PLANES {
                let p = plaquette(&u, s, mu, nu);
                assert!((p.q0 - 1.0).abs() < 1e-12);
                assert!(p.q1.abs() < 1e-12 && p.q2.abs() < 1e-12 && p.q3.abs() < 1e-12);
            }
        }
    }

    // Series oracle pinning KAPPA: for U_P = exp(c T_3), the density must
    // approach (c/a^2)^2 = |F|^2 with quartic error in c.
    #[test]
    fn kappa_fixed_by_small_field_series() {
        for &c in &[1e-2f64, 1e-3, 1e-4] {
            let e = KAPPA * (2.0 - 2.0 * (0.5 * c).cos());
            let rel = (e / (c * c) - 1.0).abs();
            assert!(rel < c * c, "kappa series failed at c={c}: rel={rel}");
        }
    }

    #[test]
    fn plaquette_density_matches_kappa_formula_on_a_link() {
        // Build a field whose (0,1) plaquette at the origin is exp(c T_3).
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        let mut u = cold_start(lat);
        let c = 0.05;
        u.set_link(0, 0, exp_map(&AlgebraElem::new(0.0, 0.0, c)));
        let e = plaquette_density(&u, 0, 0, 1);
        assert!((e - KAPPA * (2.0 - 2.0 * (0.5 * c).cos())).abs() < 1e-14);
        // Trace conjugation invariance: gauge transforming leaves it be.
        let g = random_gauge(lat, 1);
        let v = apply_gauge(&u, &g).unwrap();
        assert!((plaquette_density(&v, 0, 0, 1) - e).abs() < 1e-12);
    }

    #[test]
    fn alpha_one_action_equals_vacuum_plus_energy() {
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        let u = hot_start(lat, 3, 0.35);
        let s1 = alpha_action(&u, 1.0);
        let e = ym_energy(&u);
        assert!((s1 - lat.volume() - e).abs() < 1e-12 * s1);
    }

    #[test]
    #[should_panic(expected = "alpha >= 1")]
    fn alpha_below_one_rejected() {
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        alpha_action(&cold_start(lat), 0.9);
    }

    // Independent brute-force evaluation of S_alpha plus the convexity bound
    // S_1.2 >= S_1 + 0.2 a^4 sum rho.
    #[test]
    fn alpha_action_against_naive_sum_and_convexity() {
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        let u = hot_start(lat, 8, 0.4);
        let a4 = lat.spacing().powi(4);
        for &alpha in &[1.0, 1.1, 1.2] {
            let mut naive = 0.0;
            for s in 0..lat.n_sites() {
                let mut rho = 0.0;
                for &(mu, nu) in &PLANES {
                    rho += plaquette_density(&u, s, mu, nu);
                }
                naive += a4 * (1.0 + rho).powf(alpha);
            }
            let fast = alpha_action(&u, alpha);
            assert!((naive - fast).abs() < 1e-10 * naive);
        }
        let s1 = alpha_action(&u, 1.0);
        let s12 = alpha_action(&u, 1.2);
        let e = ym_energy(&u);
        assert!(s12 >= s1 + 0.2 * e - 1e-9);
        // Strict monotonicity in alpha on a non-flat field.
        let s11 = alpha_action(&u, 1.1);
        assert!(s1 < s11 && s11 < s12);
    }

    #[test]
    fn vacuum_is_the_action_minimum() {
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        let u = hot_start(lat, 12, 0.2);
        assert!(alpha_action(&u, 1.3) >= lat.volume());
    }

    // Abelian mode: the clover estimate must converge to the analytic F_01 at
    // second order in the spacing.
    #[test]
    fn clover_matches_analytic_field_with_second_order_error() {
        let amp = 0.04;
        let lbox = 8.0;
        let field_err = |n: usize| -> f64 {
            let lat = Lattice::hypercubic(n, lbox / n as f64).unwrap();
            let a = lat.spacing();
            let u = sample_continuum(lat, |pos, mu| {
                if mu == 1 {
                    AlgebraElem::new(0.0, 0.0, amp * (2.0 * PI * pos[0] / lbox).sin())
                } else {
                    AlgebraElem::ZERO
                }
            });
            let f = clover_curvature(&u);
            let mut worst: f64 = 0.0;
            for s in 0..lat.n_sites() {
                let x = lat.site_coords(s);
                let analytic = amp * (2.0 * PI / lbox) * (2.0 * PI * (x[0] as f64) * a / lbox).cos();
                worst = worst.max((f.at(s, 0).c3 - analytic).abs());
            }
            worst
        };
        let e1 = field_err(8);
        let e2 = field_err(16);
        let ratio = e1 / e2;
        assert!((3.0..=5.0).contains(&ratio), "clover refinement ratio {ratio}");
    }

    #[test]
    fn clover_covariance_via_density_invariance() {
        let lat = Lattice::hypercubic(4, 1.0).unwrap();
        let u = hot_start(lat, 21, 0.5);
        let g = random_gauge(lat, 22);
        let v = apply_gauge(&u, &g).unwrap();
        let du = clover_density_field(&u);
        let dv = clover_density_field(&v);
        let scale = du.values().iter().cloned().fold(0.0, f64::max);
        assert!(du.max_diff(&dv) < 1e-10 * scale);
    }

    #[test]
    fn instanton_energy_near_continuum_value() {
        let lat = Lattice::hypercubic(16, 1.0).unwrap();
        let u = single_instanton(lat, 4.0);
        let e = ym_energy(&u);
        let rel = (e - INSTANTON_YM_ENERGY).abs() / INSTANTON_YM_ENERGY;
        assert!(rel < 0.25, "ym energy {e} vs {INSTANTON_YM_ENERGY}, rel {rel}");

        // Refinement oracle: same box at half the resolution, and the a^2
        // Richardson extrapolation, must both sit near the continuum value.
        let coarse = ym_energy(&single_instanton(
            Lattice::hypercubic(8, 2.0).unwrap(),
            4.0,
        ));
        let rel_c = (coarse - INSTANTON_YM_ENERGY).abs() / INSTANTON_YM_ENERGY;
        assert!(rel_c < 0.25, "coarse energy {coarse}, rel {rel_c}");
        let extrap = (4.0 * e - coarse) / 3.0;
        let rel_x = (extrap - INSTANTON_YM_ENERGY).abs() / INSTANTON_YM_ENERGY;
        assert!(rel_x < 0.25, "extrapolated energy {extrap}, rel {rel_x}");
    }

    #[test]
    fn instanton_sup_curvature_sits_at_the_center() {
        let lat = Lattice::hypercubic(12, 1.0).unwrap();
        let u = single_instanton(lat, 3.0);
        let f = clover_curvature(&u);
        let sup = sup_curvature(&u);
        let (mut best, mut best_d) = (0usize, f64::INFINITY);
        for s in 0..lat.n_sites() {
            if (f.density(s) - sup).abs() < 1e-12 {
                let x = lat.site_coords(s);
                let d: f64 = x
                    .iter()
                    .map(|&c| (c as f64 - 5.5).abs().powi(2))
                    .sum::<f64>()
                    .sqrt();
                if d < best_d {
                    best_d = d;
                    best = s;
                }
            }
        }
        let x = lat.site_coords(best);
        for &c in &x {
            assert!(
                (c as f64 - 5.5).abs() <= 1.5,
                "max at {x:?}, expected within one site of the center"
            );
        }
    }

    // The clover estimator smears the core by O(a^2/rho^2), so both scales
    // must be well resolved for the continuum 16x to show through.
    #[test]
    fn sup_curvature_scales_like_inverse_fourth_power_of_instanton_size() {
        let lat = Lattice::hypercubic(24, 1.0).unwrap();
        let big = sup_curvature(&single_instanton(lat, 8.0));
        let small = sup_curvature(&single_instanton(lat, 4.0));
        let ratio = small / big;
        assert!(
            (11.0..=21.0).contains(&ratio),
            "expected ~16x growth, got {ratio}"
        );
    }

    #[test]
    fn orientation_flip_negates_charge() {
        let lat = Lattice::hypercubic(8, 1.0).unwrap();
        let u = single_instanton(lat, 2.0);
        let q = topological_charge(&u);
        for axis in 0..4 {
            let w = u.axis_reflected(axis);
            let qw = topological_charge(&w);
            assert!((qw + q).abs() < 1e-10 * (1.0 + q.abs()), "axis {axis}: {q} vs {qw}");
        }
    }
}
