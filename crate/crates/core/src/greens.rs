//! Coincident-point Green-function traces inside a planar cavity.
//!
//! Mirrors sit at `z = 0` and `z = a`. For every frequency the scattering
//! part of the electric and magnetic Green tensors is an integral over the
//! in-plane wave-vector `k`; the magnetic tensor follows from the electric
//! one by exchanging the TE and TM reflection coefficients.
//!
//! The wave-vector axis is split at the light line. The propagating sector
//! is integrated in `kz in [0, w/c]` (which removes the `1/kz` endpoint
//! singularity), the evanescent sector in `q = -i kz` on geometric panels
//! up to `q_max = tail_cutoff / (2 min(z, a - z))`. At imaginary frequency
//! `w = i xi` there is a single sector, `kappa = -i kz >= xi/c`.
//!
//! Internally everything is Gaussian: lengths in cm, traces in cm^-3. The
//! free-space coincident limit is `Im G0 = 2 w^3 / (3 c^3)` per diagonal
//! component.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::materials::{
    interface, interface_complements, kz_of, slab, slab_complements, MaterialModel, ReflectionPair,
};
use crate::quadrature::{geometric_breaks, integrate, Estimate, QuadratureSpec};
use crate::units::{cm_to_m, m_to_cm, per_cm3_to_per_m3, C, CM_PER_M};

/// One cavity wall.
#[derive(Debug, Clone, PartialEq)]
pub enum Mirror {
    /// A metal described by a permittivity model; `thickness` in metres,
    /// `None` for a semi-infinite mirror.
    Material {
        model: MaterialModel,
        thickness: Option<f64>,
    },
    /// Frequency- and angle-independent reflection coefficients. Used as a
    /// test hook for closed-form oracles.
    Constant(ReflectionPair),
}

impl Mirror {
    pub fn semi_infinite(model: MaterialModel) -> Self {
        Mirror::Material {
            model,
            thickness: None,
        }
    }

    pub fn vacuum() -> Self {
        Mirror::Constant(ReflectionPair::default())
    }

    pub fn constant(r_s: f64, r_p: f64) -> Self {
        Mirror::Constant(ReflectionPair {
            r_s: Complex64::new(r_s, 0.0),
            r_p: Complex64::new(r_p, 0.0),
        })
    }

    /// Same mirror with TE and TM roles exchanged. Only constant mirrors
    /// support this.
    pub fn swapped(&self) -> Option<Self> {
        match self {
            Mirror::Constant(r) => Some(Mirror::Constant(r.swapped())),
            Mirror::Material { .. } => None,
        }
    }

    pub fn model(&self) -> Option<&MaterialModel> {
        match self {
            Mirror::Material { model, .. } => Some(model),
            Mirror::Constant(_) => None,
        }
    }

    /// Whether the mirror reflects real-axis waves without absorption, so
    /// that guided modes appear as real-axis poles.
    fn is_lossless(&self, t: f64) -> bool {
        match self {
            Mirror::Material { model, .. } => model.is_lossless(t),
            Mirror::Constant(r) => r.r_s.norm() >= 1.0 - 1e-12 && r.r_p.norm() >= 1.0 - 1e-12,
        }
    }

    /// Extra optical length added by field penetration, cm.
    fn penetration(&self) -> f64 {
        match self {
            Mirror::Material { model, .. } => m_to_cm(model.plasma_length()),
            Mirror::Constant(_) => 0.0,
        }
    }

    fn at_real(&self, omega: f64, t: f64) -> Response {
        match self {
            Mirror::Constant(r) => Response::Constant(*r),
            Mirror::Material { model, thickness } => {
                let eps = model.epsilon_unchecked(omega, t);
                let k0 = omega / C;
                Response::Medium {
                    eps,
                    eps_infinite: false,
                    chi_k0sq: (eps - 1.0) * k0 * k0,
                    thickness: thickness.map(m_to_cm),
                }
            }
        }
    }

    fn at_imag(&self, xi: f64, t: f64) -> Response {
        match self {
            Mirror::Constant(r) => Response::Constant(*r),
            Mirror::Material { model, thickness } => {
                let r = model.imag_response(xi, t);
                Response::Medium {
                    eps: Complex64::new(r.eps, 0.0),
                    eps_infinite: !r.eps.is_finite(),
                    chi_k0sq: Complex64::new(-r.chi_xi2 / (C * C), 0.0),
                    thickness: thickness.map(m_to_cm),
                }
            }
        }
    }
}

/// Geometry, mirrors and temperature of the cavity. SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct CavitySetup {
    /// Gap width, m.
    pub a: f64,
    pub mirror1: Mirror,
    pub mirror2: Mirror,
    /// Temperature, K.
    pub t: f64,
}

impl CavitySetup {
    pub fn new(a: f64, mirror1: Mirror, mirror2: Mirror, t: f64) -> Result<Self> {
        let s = Self {
            a,
            mirror1,
            mirror2,
            t,
        };
        s.validate()?;
        Ok(s)
    }

    /// Two identical semi-infinite mirrors.
    pub fn symmetric(a: f64, model: MaterialModel, t: f64) -> Result<Self> {
        Self::new(
            a,
            Mirror::semi_infinite(model.clone()),
            Mirror::semi_infinite(model),
            t,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return domain(format!("gap width must be positive, got {}", self.a));
        }
        if !(self.t > 0.0) {
            return domain(format!("temperature must be positive, got {}", self.t));
        }
        for m in [&self.mirror1, &self.mirror2] {
            if let Mirror::Material { model, thickness } = m {
                model.validate()?;
                if let Some(w) = thickness {
                    if !(*w > 0.0) {
                        return domain(format!("mirror thickness must be positive, got {w}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Non-fatal diagnostics about the validity of the macroscopic model.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for m in [&self.mirror1, &self.mirror2] {
            if let Some(model) = m.model() {
                if model.plasma_length() >= self.a {
                    out.push(format!(
                        "{}: plasma length {:.3e} m is not small compared with the gap {:.3e} m",
                        model.name,
                        model.plasma_length(),
                        self.a
                    ));
                }
            }
        }
        out
    }

    /// True when neither mirror absorbs.
    pub fn is_lossless(&self) -> bool {
        self.mirror1.is_lossless(self.t) && self.mirror2.is_lossless(self.t)
    }

    /// Lower bound on the first propagating cavity mode of a lossless
    /// cavity, rad/s. Real-axis spectra of lossless cavities are available
    /// only below it.
    pub fn mode_cutoff(&self) -> f64 {
        let eff = m_to_cm(self.a) + self.mirror1.penetration() + self.mirror2.penetration();
        0.95 * std::f64::consts::PI * C / eff
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn with_a(&self, a: f64) -> Self {
        Self { a, ..self.clone() }
    }

    /// Both mirrors with the TE and TM coefficients exchanged (constant
    /// mirrors only).
    pub fn swapped(&self) -> Option<Self> {
        Some(Self {
            mirror1: self.mirror1.swapped()?,
            mirror2: self.mirror2.swapped()?,
            ..self.clone()
        })
    }

    pub(crate) fn check_z(&self, z: f64) -> Result<()> {
        if !(z > 0.0 && z < self.a) {
            return domain(format!("position z = {z} m is outside the gap (0, {})", self.a));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Response {
    Constant(ReflectionPair),
    Medium {
        eps: Complex64,
        eps_infinite: bool,
        chi_k0sq: Complex64,
        thickness: Option<f64>,
    },
}

/// Reflection coefficients together with `1 + r` and `1 - r`.
#[derive(Debug, Clone, Copy)]
struct Reflection {
    r: ReflectionPair,
    plus: ReflectionPair,
    minus: ReflectionPair,
}

impl Response {
    #[inline]
    fn reflect(&self, kz: Complex64) -> Reflection {
        match *self {
            Response::Constant(r) => Reflection {
                r,
                plus: ReflectionPair {
                    r_s: 1.0 + r.r_s,
                    r_p: 1.0 + r.r_p,
                },
                minus: ReflectionPair {
                    r_s: 1.0 - r.r_s,
                    r_p: 1.0 - r.r_p,
                },
            },
            Response::Medium {
                eps,
                eps_infinite,
                chi_k0sq,
                thickness,
            } => {
                let (mut r, kzm) = interface(eps, chi_k0sq, kz);
                let (mut plus, mut minus) = interface_complements(eps, kz, kzm);
                if eps_infinite {
                    r.r_p = Complex64::new(1.0, 0.0);
                    plus.r_p = Complex64::new(2.0, 0.0);
                    minus.r_p = Complex64::new(0.0, 0.0);
                }
                match thickness {
                    Some(w) => {
                        let (plus, minus) = slab_complements(r, plus, minus, kzm, w);
                        Reflection {
                            r: slab(r, kzm, w),
                            plus,
                            minus,
                        }
                    }
                    None => Reflection { r, plus, minus },
                }
            }
        }
    }
}

/// Scattering-part building blocks for one polarisation. With the
/// single-bounce term `b = (R1 e^{2ikz z} + R2 e^{2ikz(a-z)})/A`, the
/// double-bounce term `d = 2 R1 R2 e^{2ikz a}/A` and
/// `A = 1 - R1 R2 e^{2ikz a}`, the kernels need `b + d`, `b - d` and
/// `db/dz`.
#[derive(Debug, Clone, Copy, Default)]
struct Bounce {
    sum: Complex64,
    diff: Complex64,
    db_dz: Complex64,
}

/// `e^x - 1` for complex `x` without cancellation at small `|x|`.
#[inline]
fn expm1(x: Complex64) -> Complex64 {
    let (s, c) = x.im.sin_cos();
    let h = (0.5 * x.im).sin();
    let em = x.re.exp_m1();
    Complex64::new(em * c - 2.0 * h * h, x.re.exp() * s)
}

/// Both mirrors are written as `r = sigma (1 - u)` with `sigma = +-1`
/// chosen so that `u` is small when it matters; `A`, `b + d` and `b - d`
/// are then free of leading-order cancellations.
#[inline]
fn bounce(u1: Complex64, u2: Complex64, sigma: f64, kz: Complex64, a: f64, z: f64) -> Bounce {
    let ik2 = Complex64::i() * 2.0 * kz;
    let x1 = expm1(ik2 * z);
    let x2 = expm1(ik2 * (a - z));
    let xa = expm1(ik2 * a);
    let (e1, e2, ea) = (1.0 + x1, 1.0 + x2, 1.0 + xa);
    let uu = u1 + u2 - u1 * u2;
    let inv_a = 1.0 / (uu * ea - xa);
    let ue = u1 * e1 + u2 * e2;
    // e1 + e2 - 2 e1 e2 = -(x1 x2 + xa)
    let g = x1 * x2 + xa;
    let full = e1 + e2 + 2.0 * ea;
    let (num_sum, num_diff) = if sigma < 0.0 {
        (g + ue - 2.0 * uu * ea, -full + ue + 2.0 * uu * ea)
    } else {
        (full - ue - 2.0 * uu * ea, -g - ue + 2.0 * uu * ea)
    };
    Bounce {
        sum: num_sum * inv_a,
        diff: num_diff * inv_a,
        db_dz: ik2 * sigma * ((x1 - x2) - u1 * e1 + u2 * e2) * inv_a,
    }
}

#[inline]
fn bounce_one(r1: &Reflection, r2: &Reflection, pick: fn(&ReflectionPair) -> Complex64, kz: Complex64, a: f64, z: f64) -> Bounce {
    if (pick(&r1.r) + pick(&r2.r)).re < 0.0 {
        bounce(pick(&r1.plus), pick(&r2.plus), -1.0, kz, a, z)
    } else {
        bounce(pick(&r1.minus), pick(&r2.minus), 1.0, kz, a, z)
    }
}

#[inline]
fn bounce_pair(r1: &Reflection, r2: &Reflection, kz: Complex64, a: f64, z: f64) -> (Bounce, Bounce) {
    (
        bounce_one(r1, r2, |r| r.r_s, kz, a, z),
        bounce_one(r1, r2, |r| r.r_p, kz, a, z),
    )
}

/// Index of each trace component in the internal integrand arrays.
mod idx {
    pub const E_PERP_S: usize = 0;
    pub const E_PERP_P: usize = 1;
    pub const E_PAR_P: usize = 2;
    pub const H_PERP_S: usize = 3;
    pub const H_PERP_P: usize = 4;
    pub const H_PAR_S: usize = 5;
}

/// `kz` times the `k dk` integrand of each trace component. The trace is
/// `i * int k dk I` with `k dk I = kz dkz I`, so these are regular at the
/// light line.
#[inline]
fn weighted_components(s: &Bounce, p: &Bounce, k0sq: Complex64, kz: Complex64) -> [Complex64; 6] {
    let kz2 = kz * kz;
    let kp2 = k0sq - kz2;
    [
        0.5 * k0sq * s.sum,
        -0.5 * kz2 * p.diff,
        kp2 * p.sum,
        -0.5 * kz2 * s.diff,
        0.5 * k0sq * p.sum,
        kp2 * s.sum,
    ]
}

/// Scattering traces split by polarisation, Gaussian units (cm^-3).
///
/// On the real axis the fields hold `Im G(w)`; on the imaginary axis they
/// hold the (real) value `G(i xi)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SplitTraces {
    pub e_perp_s: Estimate,
    pub e_perp_p: Estimate,
    pub e_par: Estimate,
    pub h_perp_s: Estimate,
    pub h_perp_p: Estimate,
    pub h_par: Estimate,
}

impl SplitTraces {
    fn from_array(r: [Estimate; 6]) -> Self {
        Self {
            e_perp_s: r[idx::E_PERP_S],
            e_perp_p: r[idx::E_PERP_P],
            e_par: r[idx::E_PAR_P],
            h_perp_s: r[idx::H_PERP_S],
            h_perp_p: r[idx::H_PERP_P],
            h_par: r[idx::H_PAR_S],
        }
    }

    pub fn e_perp(&self) -> Estimate {
        self.e_perp_s + self.e_perp_p
    }

    pub fn h_perp(&self) -> Estimate {
        self.h_perp_s + self.h_perp_p
    }

    /// `sum_a G_aa` restricted to TE (s) waves, electric part.
    pub fn te_electric(&self) -> Estimate {
        self.e_perp_s.scale(2.0)
    }

    pub fn te_magnetic(&self) -> Estimate {
        self.h_perp_s.scale(2.0) + self.h_par
    }

    pub fn tm_electric(&self) -> Estimate {
        self.e_perp_p.scale(2.0) + self.e_par
    }

    pub fn tm_magnetic(&self) -> Estimate {
        self.h_perp_p.scale(2.0)
    }

    pub fn electric_trace(&self) -> Estimate {
        self.te_electric() + self.tm_electric()
    }

    pub fn magnetic_trace(&self) -> Estimate {
        self.te_magnetic() + self.tm_magnetic()
    }
}

/// Gaussian-unit view of a setup at a point.
pub(crate) struct Point {
    pub(crate) a: f64,
    pub(crate) z: f64,
}

impl Point {
    pub(crate) fn new(setup: &CavitySetup, z: f64) -> Result<Self> {
        setup.check_z(z)?;
        Ok(Self {
            a: m_to_cm(setup.a),
            z: m_to_cm(z),
        })
    }

    pub(crate) fn nearest_wall(&self) -> f64 {
        self.z.min(self.a - self.z)
    }
}

/// Free-space `Im G0` per diagonal component, cm^-3.
#[inline]
pub fn free_space_trace_cgs(omega: f64) -> f64 {
    let k0 = omega / C;
    2.0 / 3.0 * k0 * k0 * k0
}

/// Upper cut of the evanescent axis, cm^-1.
pub(crate) fn evanescent_cutoff(p: &Point, quad: &QuadratureSpec) -> f64 {
    quad.tail_cutoff / (2.0 * p.nearest_wall())
}

fn evanescent_breaks(start: f64, q_max: f64, a: f64) -> Vec<f64> {
    let lo = (1e-4 / a).min(start.max(1e-12 / a));
    let mut b = vec![0.0];
    if lo < q_max {
        b.extend(geometric_breaks(lo, q_max, 3));
    } else {
        b.push(q_max);
    }
    b
}

/// Real-frequency scattering traces (`Im G^sc`) in cm^-3.
pub(crate) fn split_traces_real(
    setup: &CavitySetup,
    omega: f64,
    p: &Point,
    quad: &QuadratureSpec,
) -> Result<SplitTraces> {
    if !(omega > 0.0) {
        return domain(format!("need omega > 0, got {omega}"));
    }
    let m1 = setup.mirror1.at_real(omega, setup.t);
    let m2 = setup.mirror2.at_real(omega, setup.t);
    let k0 = omega / C;
    let k0sq = Complex64::new(k0 * k0, 0.0);
    let (a, z) = (p.a, p.z);
    let abs_tol = [quad.abs_floor * free_space_trace_cgs(omega); 6];

    let kernel = |kz: Complex64| -> [Complex64; 6] {
        let (s, pp) = bounce_pair(&m1.reflect(kz), &m2.reflect(kz), kz, a, z);
        weighted_components(&s, &pp, k0sq, kz)
    };

    // propagating: int_0^k0 dkz Re[J]; panels of at most pi/2 round-trip phase
    let n_prop = ((2.0 * k0 * a / std::f64::consts::FRAC_PI_2).ceil() as usize).clamp(1, 2000);
    let prop_breaks: Vec<f64> = (0..=n_prop).map(|i| k0 * i as f64 / n_prop as f64).collect();
    let lossless = setup.is_lossless();
    if lossless && omega >= setup.mode_cutoff() {
        return Err(Error::Unsupported(format!(
            "real-frequency traces of a lossless cavity above its first mode ({:.3e} rad/s)",
            setup.mode_cutoff()
        )));
    }
    let prop = integrate(
        |kz| kernel(Complex64::new(kz, 0.0)).map(|c| c.re),
        &prop_breaks,
        quad.rel_tol,
        abs_tol,
        quad.max_panels,
    )?;

    // evanescent: k dk I = q dq I = -i J dq, Im G = Re[-i int J] = int Im J.
    // Lossless mirrors make J real here; only guided-mode poles would
    // contribute, and those are excluded.
    if lossless {
        return Ok(SplitTraces::from_array(prop));
    }
    let q_max = evanescent_cutoff(p, quad);
    let ev_breaks = evanescent_breaks(k0, q_max, a);
    let ev = integrate(
        |q| kernel(Complex64::new(0.0, q)).map(|c| c.im),
        &ev_breaks,
        quad.rel_tol,
        abs_tol,
        quad.max_panels,
    )?;

    let mut out = [Estimate::ZERO; 6];
    for i in 0..6 {
        out[i] = prop[i] + ev[i];
    }
    Ok(SplitTraces::from_array(out))
}

/// Scattering traces at imaginary frequency `i xi`, cm^-3 (real values).
pub(crate) fn split_traces_imag(
    setup: &CavitySetup,
    xi: f64,
    p: &Point,
    quad: &QuadratureSpec,
) -> Result<SplitTraces> {
    let m1 = setup.mirror1.at_imag(xi, setup.t);
    let m2 = setup.mirror2.at_imag(xi, setup.t);
    let k0sq = Complex64::new(-(xi / C) * (xi / C), 0.0);
    let (a, z) = (p.a, p.z);
    let lower = xi / C;
    let k_max = evanescent_cutoff(p, quad);
    if lower >= k_max {
        return Ok(SplitTraces::default());
    }
    let scale = p.nearest_wall().powi(-3);
    let abs_tol = [quad.abs_floor * scale; 6];
    // G = i int k dk I = int J dkappa
    let r = integrate(
        |t| {
            let kz = Complex64::new(0.0, lower + t);
            let (s, pp) = bounce_pair(&m1.reflect(kz), &m2.reflect(kz), kz, a, z);
            weighted_components(&s, &pp, k0sq, kz).map(|c| c.re)
        },
        &evanescent_breaks(lower, k_max - lower, a),
        quad.rel_tol,
        abs_tol,
        quad.max_panels,
    )?;
    Ok(SplitTraces::from_array(r))
}

/// Electric scattering trace `sum_a G^sc_aa(i xi)` and its derivative with
/// respect to the position `z`, in cm^-3 and cm^-4.
pub(crate) fn electric_trace_imag_with_gradient(
    setup: &CavitySetup,
    xi: f64,
    p: &Point,
    quad: &QuadratureSpec,
) -> Result<[Estimate; 2]> {
    let m1 = setup.mirror1.at_imag(xi, setup.t);
    let m2 = setup.mirror2.at_imag(xi, setup.t);
    let k0sq = Complex64::new(-(xi / C) * (xi / C), 0.0);
    let (a, z) = (p.a, p.z);
    let lower = xi / C;
    let k_max = evanescent_cutoff(p, quad);
    if lower >= k_max {
        return Ok([Estimate::ZERO; 2]);
    }
    let scale = p.nearest_wall().powi(-3);
    let trace = |s: &Bounce, pp: &Bounce, kz: Complex64| {
        let c = weighted_components(s, pp, k0sq, kz);
        2.0 * c[idx::E_PERP_S] + 2.0 * c[idx::E_PERP_P] + c[idx::E_PAR_P]
    };
    integrate(
        |t| {
            let kz = Complex64::new(0.0, lower + t);
            let (s, pp) = bounce_pair(&m1.reflect(kz), &m2.reflect(kz), kz, a, z);
            let value = trace(&s, &pp, kz).re;
            // d/dz acts on the single-bounce terms only
            let ds = Bounce { sum: s.db_dz, diff: s.db_dz, ..Bounce::default() };
            let dp = Bounce { sum: pp.db_dz, diff: pp.db_dz, ..Bounce::default() };
            [value, trace(&ds, &dp, kz).re]
        },
        &evanescent_breaks(lower, k_max - lower, a),
        quad.rel_tol,
        // the gradient cancels near the centre of a symmetric cavity
        [quad.abs_floor * scale, quad.rel_tol * scale / p.nearest_wall()],
        quad.max_panels,
    )
}

/// Plain reflection coefficients of both mirrors at real `omega` and
/// normal wave-vector `kz` (cm^-1).
pub(crate) fn reflection_pairs(setup: &CavitySetup, omega: f64, kz: Complex64) -> (ReflectionPair, ReflectionPair) {
    (
        setup.mirror1.at_real(omega, setup.t).reflect(kz).r,
        setup.mirror2.at_real(omega, setup.t).reflect(kz).r,
    )
}

/// `Im` of the scattering and cavity Green traces at a point, SI (m^-3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenCoefficients {
    pub h_perp_sc: Estimate,
    pub h_par_sc: Estimate,
    pub e_perp_sc: Estimate,
    pub e_par_sc: Estimate,
    pub h_perp_cav: Estimate,
    pub h_par_cav: Estimate,
}

fn to_si(e: Estimate) -> Estimate {
    e.scale(per_cm3_to_per_m3(1.0))
}

/// Normal wave-vector `sqrt(w^2/c^2 - k^2)` in rad/m, branch `Im >= 0`.
pub fn kz(omega: f64, k_perp: f64) -> Complex64 {
    kz_of(omega / cm_to_m(C), k_perp)
}

/// `(Im E^sc_xx, Im E^sc_zz)` at `z` (m), in m^-3.
pub fn scattering_e_traces(
    setup: &CavitySetup,
    omega: f64,
    z: f64,
    quad: &QuadratureSpec,
) -> Result<(Estimate, Estimate)> {
    let t = split_traces_real(setup, omega, &Point::new(setup, z)?, quad)?;
    Ok((to_si(t.e_perp()), to_si(t.e_par)))
}

/// `(Im H^sc_xx, Im H^sc_zz)` at `z` (m), in m^-3.
pub fn scattering_h_traces(
    setup: &CavitySetup,
    omega: f64,
    z: f64,
    quad: &QuadratureSpec,
) -> Result<(Estimate, Estimate)> {
    let t = split_traces_real(setup, omega, &Point::new(setup, z)?, quad)?;
    Ok((to_si(t.h_perp()), to_si(t.h_par)))
}

/// Scattering traces plus the free-space limit `2 w^3/3c^3`.
pub fn cavity_traces(
    setup: &CavitySetup,
    omega: f64,
    z: f64,
    quad: &QuadratureSpec,
) -> Result<GreenCoefficients> {
    let t = split_traces_real(setup, omega, &Point::new(setup, z)?, quad)?;
    Ok(green_coefficients(&t, omega))
}

pub(crate) fn green_coefficients(t: &SplitTraces, omega: f64) -> GreenCoefficients {
    let free = Estimate::new(free_space_trace_cgs(omega), 0.0);
    GreenCoefficients {
        h_perp_sc: to_si(t.h_perp()),
        h_par_sc: to_si(t.h_par),
        e_perp_sc: to_si(t.e_perp()),
        e_par_sc: to_si(t.e_par),
        h_perp_cav: to_si(non_negative(t.h_perp() + free)),
        h_par_cav: to_si(non_negative(t.h_par + free)),
    }
}

/// Cavity traces are non-negative; below the first mode of a lossless
/// cavity the scattering part cancels the free-space part to rounding.
pub(crate) fn non_negative(e: Estimate) -> Estimate {
    if e.value < 0.0 && -e.value <= e.error.max(1e-12 * e.value.abs()) {
        Estimate::new(0.0, e.error)
    } else {
        e
    }
}

/// The `k dk` integrand of every trace at one in-plane wave-vector, such
/// that `Im G = int_0^inf dk k Re[I(k)]`, in m^-1. Mainly useful to
/// cross-check the integrated traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceKernel {
    pub e_perp: Complex64,
    pub e_par: Complex64,
    pub h_perp: Complex64,
    pub h_par: Complex64,
    /// TE share of `sum_a (E_aa + H_aa)`.
    pub total_te: Complex64,
    /// TM share of `sum_a (E_aa + H_aa)`.
    pub total_tm: Complex64,
}

/// Evaluates [`TraceKernel`] at `k_perp` (rad/m) and `z` (m).
pub fn trace_kernel(setup: &CavitySetup, omega: f64, k_perp: f64, z: f64) -> Result<TraceKernel> {
    let p = Point::new(setup, z)?;
    if !(omega > 0.0 && k_perp >= 0.0) {
        return domain("need omega > 0 and k_perp >= 0");
    }
    let k0 = omega / C;
    let k = k_perp / 100.0;
    let kzv = kz_of(k0, k);
    if kzv.norm() == 0.0 {
        return Err(Error::Domain("kernel is undefined on the light line".into()));
    }
    let r1 = setup.mirror1.at_real(omega, setup.t).reflect(kzv);
    let r2 = setup.mirror2.at_real(omega, setup.t).reflect(kzv);
    let (s, pp) = bounce_pair(&r1, &r2, kzv, p.a, p.z);
    let j = weighted_components(&s, &pp, Complex64::new(k0 * k0, 0.0), kzv);
    // I = J / kz, cm^-1 -> m^-1
    let c = |x: Complex64| x / kzv * CM_PER_M;
    Ok(TraceKernel {
        e_perp: c(j[idx::E_PERP_S] + j[idx::E_PERP_P]),
        e_par: c(j[idx::E_PAR_P]),
        h_perp: c(j[idx::H_PERP_S] + j[idx::H_PERP_P]),
        h_par: c(j[idx::H_PAR_S]),
        total_te: c(2.0 * j[idx::E_PERP_S] + 2.0 * j[idx::H_PERP_S] + j[idx::H_PAR_S]),
        total_tm: c(2.0 * j[idx::E_PERP_P] + j[idx::E_PAR_P] + 2.0 * j[idx::H_PERP_P]),
    })
}
