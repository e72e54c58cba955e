//! The periodic 4-torus: site indexing, link-variable storage, gauge
//! transformations and initial-condition generators.
//!
//! Sites are indexed lexicographically with the last coordinate fastest;
//! links are stored per site with the direction index fastest. Direction
//! `mu` runs over `0..4`.

use crate::lie::{exp_map, AlgebraElem, GroupElem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("lattice dimension {0} is below the minimum of 4")]
    DimTooSmall(usize),
    #[error("lattice spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("fields live on different lattices: {0:?} vs {1:?}")]
    Mismatch([usize; 4], [usize; 4]),
}

/// The flat periodic 4-torus geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    dims: [usize; 4],
    spacing: f64,
}

impl Lattice {
    pub fn new(dims: [usize; 4], spacing: f64) -> Result<Self, LatticeError> {
        for &d in &dims {
            if d < 4 {
                return Err(LatticeError::DimTooSmall(d));
            }
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(LatticeError::BadSpacing(spacing));
        }
        Ok(Lattice { dims, spacing })
    }

    /// Hypercubic lattice `n^4`.
    pub fn hypercubic(n: usize, spacing: f64) -> Result<Self, LatticeError> {
        Lattice::new([n, n, n, n], spacing)
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_links(&self) -> usize {
        4 * self.n_sites()
    }

    /// Physical box lengths `N_mu * a`.
    pub fn box_lengths(&self) -> [f64; 4] {
        [
            self.dims[0] as f64 * self.spacing,
            self.dims[1] as f64 * self.spacing,
            self.dims[2] as f64 * self.spacing,
            self.dims[3] as f64 * self.spacing,
        ]
    }

    /// Lattice volume `a^4 * #sites`.
    pub fn volume(&self) -> f64 {
        self.spacing.powi(4) * self.n_sites() as f64
    }

    pub fn site_index(&self, x: [usize; 4]) -> usize {
        ((x[0] * self.dims[1] + x[1]) * self.dims[2] + x[2]) * self.dims[3] + x[3]
    }

    pub fn site_coords(&self, mut s: usize) -> [usize; 4] {
        let x3 = s % self.dims[3];
        s /= self.dims[3];
        let x2 = s % self.dims[2];
        s /= self.dims[2];
        let x1 = s % self.dims[1];
        s /= self.dims[1];
        [s, x1, x2, x3]
    }

    /// Site shifted by one lattice unit along `mu` (periodic).
    pub fn neighbor(&self, s: usize, mu: usize, forward: bool) -> usize {
        let mut x = self.site_coords(s);
        let n = self.dims[mu];
        x[mu] = if forward {
            (x[mu] + 1) % n
        } else {
            (x[mu] + n - 1) % n
        };
        self.site_index(x)
    }

    /// Minimal-image displacement from `b` to `a` (physical units).
    pub fn min_image(&self, a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
        let l = self.box_lengths();
        let mut d = [0.0; 4];
        for k in 0..4 {
            let mut v = a[k] - b[k];
            v -= l[k] * (v / l[k]).round();
            d[k] = v;
        }
        d
    }

    /// Minimal-image squared distance between two sites (physical units).
    pub fn site_dist_sq(&self, s1: usize, s2: usize) -> f64 {
        let x = self.site_coords(s1);
        let y = self.site_coords(s2);
        let mut d2 = 0.0;
        for k in 0..4 {
            let n = self.dims[k] as i64;
            let mut d = (x[k] as i64 - y[k] as i64).rem_euclid(n);
            if 2 * d > n {
                d -= n;
            }
            let dp = d as f64 * self.spacing;
            d2 += dp * dp;
        }
        d2
    }
}

/// Precomputed neighbor tables; rebuilt cheaply by the hot loops.
pub struct Geom {
    pub up: Vec<u32>,
    pub dn: Vec<u32>,
}

impl Geom {
    pub fn new(lat: &Lattice) -> Self {
        let n = lat.n_sites();
        let mut up = vec![0u32; 4 * n];
        let mut dn = vec![0u32; 4 * n];
        for s in 0..n {
            for mu in 0..4 {
                up[4 * s + mu] = lat.neighbor(s, mu, true) as u32;
                dn[4 * s + mu] = lat.neighbor(s, mu, false) as u32;
            }
        }
        Geom { up, dn }
    }

    #[inline(always)]
    pub fn up(&self, s: usize, mu: usize) -> usize {
        self.up[4 * s + mu] as usize
    }

    #[inline(always)]
    pub fn dn(&self, s: usize, mu: usize) -> usize {
        self.dn[4 * s + mu] as usize
    }
}

/// The full link-variable configuration `U_mu(x)`: the discrete connection.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    lattice: Lattice,
    links: Vec<GroupElem>,
}

impl GaugeField {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline(always)]
    pub fn link(&self, site: usize, mu: usize) -> &GroupElem {
        &self.links[4 * site + mu]
    }

    pub fn set_link(&mut self, site: usize, mu: usize, u: GroupElem) {
        self.links[4 * site + mu] = u;
    }

    pub fn links(&self) -> &[GroupElem] {
        &self.links
    }

    pub fn links_mut(&mut self) -> &mut [GroupElem] {
        &mut self.links
    }

    pub fn from_links(lattice: Lattice, links: Vec<GroupElem>) -> Self {
        assert_eq!(links.len(), lattice.n_links());
        GaugeField { lattice, links }
    }

    /// Cyclic translation by an integer site offset.
    pub fn shifted(&self, offset: [i64; 4]) -> GaugeField {
        let lat = self.lattice;
        let mut links = vec![GroupElem::IDENTITY; lat.n_links()];
        for s in 0..lat.n_sites() {
            let x = lat.site_coords(s);
            let mut y = [0usize; 4];
            for k in 0..4 {
                let n = lat.dims[k] as i64;
                y[k] = (x[k] as i64 + offset[k]).rem_euclid(n) as usize;
            }
            let t = lat.site_index(y);
            for mu in 0..4 {
                links[4 * t + mu] = *self.link(s, mu);
            }
        }
        GaugeField { lattice: lat, links }
    }

    /// Reflection of one axis (an orientation-reversing lattice isometry).
    pub fn axis_reflected(&self, axis: usize) -> GaugeField {
        let lat = self.lattice;
        let geom = Geom::new(&lat);
        let mut links = vec![GroupElem::IDENTITY; lat.n_links()];
        for s in 0..lat.n_sites() {
            let x = lat.site_coords(s);
            let mut y = x;
            y[axis] = lat.dims[axis] - 1 - x[axis];
            let sy = lat.site_index(y);
            for mu in 0..4 {
                links[4 * s + mu] = if mu == axis {
                    self.link(geom.dn(sy, mu), mu).inverse()
                } else {
                    *self.link(sy, mu)
                };
            }
        }
        GaugeField { lattice: lat, links }
    }
}

/// A site-wise gauge transformation `g(x)`.
#[derive(Debug, Clone)]
pub struct GaugeTransform {
    lattice: Lattice,
    g: Vec<GroupElem>,
}

impl GaugeTransform {
    pub fn identity(lat: Lattice) -> Self {
        GaugeTransform {
            lattice: lat,
            g: vec![GroupElem::IDENTITY; lat.n_sites()],
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline(always)]
    pub fn at(&self, site: usize) -> &GroupElem {
        &self.g[site]
    }

    pub fn set(&mut self, site: usize, g: GroupElem) {
        self.g[site] = g;
    }

    pub fn inverse(&self) -> GaugeTransform {
        GaugeTransform {
            lattice: self.lattice,
            g: self.g.iter().map(|g| g.inverse()).collect(),
        }
    }
}

/// An algebra-valued connection field `a_mu(x)` at sites (one per direction).
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionField {
    lattice: Lattice,
    a: Vec<AlgebraElem>,
}

impl ConnectionField {
    pub fn zero(lat: Lattice) -> Self {
        ConnectionField {
            lattice: lat,
            a: vec![AlgebraElem::ZERO; lat.n_links()],
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline(always)]
    pub fn at(&self, site: usize, mu: usize) -> &AlgebraElem {
        &self.a[4 * site + mu]
    }

    pub fn set(&mut self, site: usize, mu: usize, v: AlgebraElem) {
        self.a[4 * site + mu] = v;
    }

    pub fn values(&self) -> &[AlgebraElem] {
        &self.a
    }

    pub fn values_mut(&mut self) -> &mut [AlgebraElem] {
        &mut self.a
    }

    pub fn max_norm(&self) -> f64 {
        self.a.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// All links set to the identity: the flat connection, `F = 0`.
pub fn cold_start(lat: Lattice) -> GaugeField {
    GaugeField {
        lattice: lat,
        links: vec![GroupElem::IDENTITY; lat.n_links()],
    }
}

/// Links `exp(xi)` with `xi` uniform in the algebra ball of the given radius.
/// Deterministic in the seed.
pub fn hot_start(lat: Lattice, seed: u64, magnitude: f64) -> GaugeField {
    assert!(magnitude >= 0.0, "hot start magnitude must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let links = (0..lat.n_links())
        .map(|_| exp_map(&AlgebraElem::random_in_ball(&mut rng, magnitude)))
        .collect();
    GaugeField { lattice: lat, links }
}

/// Transcribe a continuum connection onto links with the midpoint rule:
/// `U_mu(x) = exp(a * A(x + mu/2, mu))`. Positions are physical.
pub fn sample_continuum<F>(lat: Lattice, field: F) -> GaugeField
where
    F: Fn([f64; 4], usize) -> AlgebraElem,
{
    let a = lat.spacing();
    let mut links = vec![GroupElem::IDENTITY; lat.n_links()];
    for s in 0..lat.n_sites() {
        let x = lat.site_coords(s);
        for mu in 0..4 {
            let mut pos = [0.0; 4];
            for k in 0..4 {
                pos[k] = x[k] as f64 * a;
            }
            pos[mu] += 0.5 * a;
            links[4 * s + mu] = exp_map(&field(pos, mu).scale(a));
        }
    }
    GaugeField { lattice: lat, links }
}

/// Gauge action on links: `U'_mu(x) = g(x) U_mu(x) g(x+mu)^{-1}`.
pub fn apply_gauge(u: &GaugeField, g: &GaugeTransform) -> Result<GaugeField, LatticeError> {
    if u.lattice != g.lattice {
        return Err(LatticeError::Mismatch(u.lattice.dims, g.lattice.dims));
    }
    let lat = u.lattice;
    let geom = Geom::new(&lat);
    let mut links = vec![GroupElem::IDENTITY; lat.n_links()];
    for s in 0..lat.n_sites() {
        for mu in 0..4 {
            let up = geom.up(s, mu);
            links[4 * s + mu] = g.at(s).mul(u.link(s, mu)).mul(&g.at(up).inverse());
        }
    }
    Ok(GaugeField { lattice: lat, links })
}

/// Site-wise Haar-uniform gauge transformation, deterministic in the seed.
pub fn random_gauge(lat: Lattice, seed: u64) -> GaugeTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e3779b97f4a7c15));
    let g = (0..lat.n_sites())
        .map(|_| GroupElem::random(&mut rng))
        .collect();
    GaugeTransform { lattice: lat, g }
}

/// One lump of the 't Hooft ansatz: scale and physical center position.
#[derive(Debug, Clone, Copy)]
pub struct InstantonBump {
    pub center: [f64; 4],
    pub rho: f64,
}

/// Symbols `S^a_{mu nu}` used by the instanton ansatz: `S^a_{ij} = eps_{aij}`
/// on spatial indices `1..=3`, `S^a_{0i} = -delta_{ai}`, `S^a_{i0} = +delta_{ai}`.
/// Oriented so the sampled lump carries charge +1 under this crate's
/// `eps_{0123} = +1` convention (pinned by the charge tests).
fn sd_symbol(a: usize, mu: usize, nu: usize) -> f64 {
    if mu == nu {
        return 0.0;
    }
    if mu == 0 {
        return if nu == a { -1.0 } else { 0.0 };
    }
    if nu == 0 {
        return if mu == a { 1.0 } else { 0.0 };
    }
    // eps_{a mu nu} on {1,2,3}
    let (i, j, k) = (a, mu, nu);
    if i == j || j == k || i == k {
        0.0
    } else if (i, j, k) == (1, 2, 3)
        || (i, j, k) == (2, 3, 1)
        || (i, j, k) == (3, 1, 2)
    {
        1.0
    } else {
        -1.0
    }
}

/// Periodized 't Hooft profile machinery.
///
/// The ansatz needs `Phi = 1 + sum_i rho_i^2 G(x - c_i)` with `G` the
/// periodic counterpart of `1/r^2` (the 4d Green kernel). A naive image sum
/// is conditionally convergent: truncating it leaves an O(rho^2/L^3) gradient
/// discontinuity on the torus cut locus whose plaquette energy never
/// converges away. The Ewald split fixes this:
///
/// `G(d) = sum_n exp(-|d-Ln|^2/4s^2)/|d-Ln|^2
///        + (4 pi^2/V) sum_{K!=0} exp(-s^2 K^2)/K^2 * cos(K.d)`
///
/// which is exactly periodic and smooth. `G` solves the Poisson equation with
/// a uniform compensating background, so `Phi` is harmonic up to an
/// O(rho^2/V) constant background and the field stays near self-dual. The
/// constant `G` attains at the lump center is subtracted per lump so the
/// nominal scale is preserved.
pub struct ThooftAnsatz {
    lattice: Lattice,
    bumps: Vec<InstantonBump>,
    inv_4s2: f64,
    real_shift: Vec<[f64; 4]>,
    modes: Vec<([f64; 4], f64)>, // (K vector, 4pi^2/V * exp(-s^2K^2)/K^2)
    center_const: f64,
}

impl ThooftAnsatz {
    pub fn new(lat: Lattice, bumps: &[InstantonBump]) -> Self {
        let l = lat.box_lengths();
        let lmin = l.iter().cloned().fold(f64::INFINITY, f64::min);
        let sigma = lmin / 5.0;
        let inv_4s2 = 1.0 / (4.0 * sigma * sigma);
        // Real-space images: Gaussian screening makes everything beyond the
        // single-coordinate neighbor shells negligible at sigma = L/5 (the
        // kernel is evaluated at |d - Ln| >= L/2 past the nearest image).
        let mut real_shift = Vec::new();
        for n0 in -1i32..=1 {
            for n1 in -1i32..=1 {
                for n2 in -1i32..=1 {
                    for n3 in -1i32..=1 {
                        if n0 * n0 + n1 * n1 + n2 * n2 + n3 * n3 > 1 {
                            continue;
                        }
                        real_shift.push([
                            n0 as f64 * l[0],
                            n1 as f64 * l[1],
                            n2 as f64 * l[2],
                            n3 as f64 * l[3],
                        ]);
                    }
                }
            }
        }
        // Reciprocal modes with exp(-sigma^2 K^2) above cutoff.
        let volume = l[0] * l[1] * l[2] * l[3];
        let mut modes = Vec::new();
        let mmax = 8i32;
        for m0 in -mmax..=mmax {
            for m1 in -mmax..=mmax {
                for m2 in -mmax..=mmax {
                    for m3 in -mmax..=mmax {
                        let m = [m0, m1, m2, m3];
                        // Keep one representative of each +-K pair.
                        match m.iter().find(|&&v| v != 0) {
                            None => continue,
                            Some(&first) if first < 0 => continue,
                            _ => {}
                        }
                        let k = [
                            2.0 * std::f64::consts::PI * m0 as f64 / l[0],
                            2.0 * std::f64::consts::PI * m1 as f64 / l[1],
                            2.0 * std::f64::consts::PI * m2 as f64 / l[2],
                            2.0 * std::f64::consts::PI * m3 as f64 / l[3],
                        ];
                        let k2: f64 = k.iter().map(|v| v * v).sum();
                        let damp = (-sigma * sigma * k2).exp();
                        if damp < 3e-9 {
                            continue;
                        }
                        modes.push((
                            k,
                            8.0 * std::f64::consts::PI.powi(2) / volume * damp / k2,
                        ));
                    }
                }
            }
        }
        let mut ansatz = ThooftAnsatz {
            lattice: lat,
            bumps: bumps.to_vec(),
            inv_4s2,
            real_shift,
            modes,
            center_const: 0.0,
        };
        // G(d) - 1/d^2 -> C0 as d -> 0: images, the k-sum at 0, and the
        // short-range self-term expansion e^{-d^2/4s^2}/d^2 = 1/d^2 - 1/4s^2.
        let mut c0 = -inv_4s2;
        for shift in &ansatz.real_shift {
            let r2: f64 = shift.iter().map(|v| v * v).sum();
            if r2 > 0.0 {
                c0 += (-r2 * inv_4s2).exp() / r2;
            }
        }
        c0 += ansatz.modes.iter().map(|(_, w)| w).sum::<f64>();
        ansatz.center_const = c0;
        ansatz
    }

    /// Periodic kernel value and gradient at displacement `d`.
    fn green(&self, d: [f64; 4]) -> (f64, [f64; 4]) {
        let mut g = 0.0;
        let mut grad = [0.0f64; 4];
        for shift in &self.real_shift {
            let v = [
                d[0] - shift[0],
                d[1] - shift[1],
                d[2] - shift[2],
                d[3] - shift[3],
            ];
            let r2 = v.iter().map(|q| q * q).sum::<f64>().max(1e-12);
            let e = (-r2 * self.inv_4s2).exp();
            g += e / r2;
            let w = -2.0 * e * (self.inv_4s2 / r2 + 1.0 / (r2 * r2));
            for k in 0..4 {
                grad[k] += w * v[k];
            }
        }
        for (k, w) in &self.modes {
            let phase = k[0] * d[0] + k[1] * d[1] + k[2] * d[2] + k[3] * d[3];
            let (s, c) = phase.sin_cos();
            g += w * c;
            for i in 0..4 {
                grad[i] -= w * s * k[i];
            }
        }
        (g, grad)
    }

    /// The connection components at a physical position.
    pub fn eval(&self, pos: [f64; 4]) -> [AlgebraElem; 4] {
        let mut phi = 1.0;
        let mut grad = [0.0f64; 4];
        for b in &self.bumps {
            let base = self.lattice.min_image(pos, b.center);
            let (g, gg) = self.green(base);
            phi += b.rho * b.rho * (g - self.center_const);
            for k in 0..4 {
                grad[k] += b.rho * b.rho * gg[k];
            }
        }
        debug_assert!(phi > 0.0, "periodized ansatz profile must stay positive");
        let mut out = [AlgebraElem::ZERO; 4];
        for mu in 0..4 {
            let mut c = [0.0f64; 3];
            for a in 1..=3 {
                let mut v = 0.0;
                for nu in 0..4 {
                    let s = sd_symbol(a, mu, nu);
                    if s != 0.0 {
                        v -= s * grad[nu] / phi;
                    }
                }
                c[a - 1] = v;
            }
            out[mu] = AlgebraElem::new(c[0], c[1], c[2]);
        }
        out
    }
}

/// Continuum 't Hooft multi-instanton connection in singular gauge:
/// `A^a_mu = -S^a_{mu nu} d_nu ln Phi` with the periodized profile
/// (see [`ThooftAnsatz`]). Convenience wrapper; batch callers should build
/// the ansatz once.
pub fn thooft_connection(lat: &Lattice, bumps: &[InstantonBump], pos: [f64; 4]) -> [AlgebraElem; 4] {
    ThooftAnsatz::new(*lat, bumps).eval(pos)
}

/// Lattice transcription of the 't Hooft ansatz.
///
/// Near the gauge singularity of each lump the connection varies on the scale
/// of the distance itself and the one-point midpoint rule breaks down, so each
/// link is transcribed as a path-ordered product of short segments; closed
/// loops then see only the (smooth, gauge-invariant) curvature flux.
pub fn instanton_start(lat: Lattice, bumps: &[InstantonBump]) -> GaugeField {
    let ansatz = ThooftAnsatz::new(lat, bumps);
    let a = lat.spacing();
    let mut links = vec![GroupElem::IDENTITY; lat.n_links()];
    for s in 0..lat.n_sites() {
        let x = lat.site_coords(s);
        for mu in 0..4 {
            let mut start = [0.0; 4];
            for k in 0..4 {
                start[k] = x[k] as f64 * a;
            }
            let mut mid = start;
            mid[mu] += 0.5 * a;
            // Distance to the nearest singular center decides the subdivision.
            let mut r2_min = f64::INFINITY;
            for b in bumps {
                let d = lat.min_image(mid, b.center);
                let r2 = d.iter().map(|v| v * v).sum::<f64>();
                r2_min = r2_min.min(r2);
            }
            let r = r2_min.sqrt();
            let segments = if r >= 8.0 * a {
                1
            } else {
                ((24.0 * a / r).ceil() as usize).clamp(2, 96)
            };
            let h = a / segments as f64;
            let mut u = GroupElem::IDENTITY;
            for i in 0..segments {
                let mut p = start;
                p[mu] += (i as f64 + 0.5) * h;
                let step = exp_map(&ansatz.eval(p)[mu].scale(h));
                // First traversed segment leftmost, matching link composition
                // in plaquettes.
                u = if i == 0 { step } else { u.mul(&step) };
            }
            links[4 * s + mu] = u;
        }
    }
    GaugeField { lattice: lat, links }
}

/// Single instanton of scale `rho`, centered mid-box on half-integer
/// coordinates so link midpoints never hit the gauge singularity.
pub fn single_instanton(lat: Lattice, rho: f64) -> GaugeField {
    let a = lat.spacing();
    let d = lat.dims();
    let center = [
        (d[0] as f64 / 2.0 - 0.5) * a,
        (d[1] as f64 / 2.0 - 0.5) * a,
        (d[2] as f64 / 2.0 - 0.5) * a,
        (d[3] as f64 / 2.0 - 0.5) * a,
    ];
    instanton_start(lat, &[InstantonBump { center, rho }])
}

/// A band-limited random continuum field: fixed set of Fourier modes with
/// seeded coefficients, so the same seed yields the same physical field at
/// any lattice resolution.
pub struct SmoothSampler {
    lengths: [f64; 4],
    // (mode k, direction mu) -> cos/sin algebra amplitudes
    modes: Vec<([i32; 4], [AlgebraElem; 4], [AlgebraElem; 4])>,
}

impl SmoothSampler {
    pub fn new(lengths: [f64; 4], seed: u64, magnitude: f64, kmax: i32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545f4914f6cdd1d));
        let mut modes = Vec::new();
        let mut count = 0usize;
        for k0 in 0..=kmax {
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    for k3 in -kmax..=kmax {
                        let k = [k0, k1, k2, k3];
                        if k.iter().all(|&v| v == 0) {
                            continue;
                        }
                        count += 1;
                        let mut cs = [AlgebraElem::ZERO; 4];
                        let mut sn = [AlgebraElem::ZERO; 4];
                        for mu in 0..4 {
                            cs[mu] = AlgebraElem::random_in_ball(&mut rng, 1.0);
                            sn[mu] = AlgebraElem::random_in_ball(&mut rng, 1.0);
                        }
                        modes.push((k, cs, sn));
                    }
                }
            }
        }
        let norm = magnitude / (count as f64).sqrt();
        for (_, cs, sn) in &mut modes {
            for mu in 0..4 {
                cs[mu] = cs[mu].scale(norm);
                sn[mu] = sn[mu].scale(norm);
            }
        }
        SmoothSampler { lengths, modes }
    }

    pub fn eval(&self, pos: [f64; 4], mu: usize) -> AlgebraElem {
        let mut out = AlgebraElem::ZERO;
        for (k, cs, sn) in &self.modes {
            let mut phase = 0.0;
            for d in 0..4 {
                phase += 2.0 * std::f64::consts::PI * k[d] as f64 * pos[d] / self.lengths[d];
            }
            out = out
                .add(&cs[mu].scale(phase.cos()))
                .add(&sn[mu].scale(phase.sin()));
        }
        out
    }
}

/// Band-limited random connection sampled at sites (for the noncompact flow).
pub fn smooth_random_connection(
    lat: Lattice,
    seed: u64,
    magnitude: f64,
    kmax: i32,
) -> ConnectionField {
    let sampler = SmoothSampler::new(lat.box_lengths(), seed, magnitude, kmax);
    let a = lat.spacing();
    let mut c = ConnectionField::zero(lat);
    for s in 0..lat.n_sites() {
        let x = lat.site_coords(s);
        let pos = [
            x[0] as f64 * a,
            x[1] as f64 * a,
            x[2] as f64 * a,
            x[3] as f64 * a,
        ];
        for mu in 0..4 {
            c.set(s, mu, sampler.eval(pos, mu));
        }
    }
    c
}
