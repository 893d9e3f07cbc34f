//! Permittivity models for the mirror metals and the reflection
//! coefficients they produce at a planar interface or a finite slab.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::units::{ev_to_rad_s, C};

/// Temperature at which `gamma` is quoted.
pub const GAMMA_REFERENCE_T: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Drude,
    Plasma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaScaling {
    #[default]
    Constant,
    LinearInT,
}

/// Bound-electron Lorentz oscillator `f w0^2 / (w0^2 - w^2 - i g w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorentzOscillator {
    pub strength: f64,
    /// rad/s.
    #[serde(rename = "omega_0_rad_s")]
    pub omega_0: f64,
    /// rad/s.
    #[serde(rename = "damping_rad_s")]
    pub damping: f64,
}

impl LorentzOscillator {
    fn at(&self, omega: Complex64) -> Complex64 {
        let w02 = self.omega_0 * self.omega_0;
        self.strength * w02 / (w02 - omega * omega - Complex64::i() * self.damping * omega)
    }

    fn at_imag(&self, xi: f64) -> f64 {
        let w02 = self.omega_0 * self.omega_0;
        self.strength * w02 / (w02 + xi * xi + self.damping * xi)
    }
}

/// Permittivity model of a mirror. Frequencies in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub name: String,
    pub kind: ModelKind,
    pub omega_p: f64,
    /// Relaxation rate at [`GAMMA_REFERENCE_T`]; ignored for the plasma model.
    pub gamma: f64,
    pub gamma_scaling: GammaScaling,
    pub core: Vec<LorentzOscillator>,
}

/// Response at imaginary frequency `i xi`.
///
/// `chi_xi2 = (eps(i xi) - 1) xi^2` stays finite at `xi = 0`, where `eps`
/// itself diverges for conductors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagResponse {
    pub eps: f64,
    pub chi_xi2: f64,
}

impl MaterialModel {
    pub fn gold() -> Self {
        Self {
            name: "Au".into(),
            kind: ModelKind::Drude,
            omega_p: 1.37e16,
            gamma: 5.32e13,
            gamma_scaling: GammaScaling::Constant,
            core: Vec::new(),
        }
    }

    pub fn platinum() -> Self {
        Self {
            name: "Pt".into(),
            kind: ModelKind::Drude,
            omega_p: 7.75e15,
            gamma: 1.05e14,
            gamma_scaling: GammaScaling::Constant,
            core: Vec::new(),
        }
    }

    /// Built-in presets by name ("Au", "Pt", case-insensitive).
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "au" | "gold" => Some(Self::gold()),
            "pt" | "platinum" => Some(Self::platinum()),
            _ => None,
        }
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_p > 0.0) {
            return domain(format!("{}: omega_p must be positive", self.name));
        }
        if !(self.gamma >= 0.0) {
            return domain(format!("{}: gamma must be non-negative", self.name));
        }
        for osc in &self.core {
            if !(osc.strength >= 0.0 && osc.omega_0 > 0.0 && osc.damping >= 0.0) {
                return domain(format!("{}: invalid core oscillator {osc:?}", self.name));
            }
        }
        Ok(())
    }

    /// Plasma length c / omega_p in metres.
    pub fn plasma_length(&self) -> f64 {
        crate::units::cm_to_m(C / self.omega_p)
    }

    /// Effective relaxation rate at temperature `t`.
    pub fn gamma_at(&self, t: f64) -> f64 {
        match self.kind {
            ModelKind::Plasma => 0.0,
            ModelKind::Drude => match self.gamma_scaling {
                GammaScaling::Constant => self.gamma,
                GammaScaling::LinearInT => self.gamma * t / GAMMA_REFERENCE_T,
            },
        }
    }

    pub fn is_lossless(&self, t: f64) -> bool {
        self.gamma_at(t) == 0.0 && self.core.iter().all(|o| o.damping == 0.0)
    }

    /// Permittivity at real positive frequency.
    pub fn epsilon(&self, omega: f64, t: f64) -> Result<Complex64> {
        if !(omega > 0.0) {
            return domain(format!("epsilon needs omega > 0, got {omega}"));
        }
        if !(t > 0.0) {
            return domain(format!("epsilon needs T > 0, got {t}"));
        }
        Ok(self.epsilon_unchecked(omega, t))
    }

    pub(crate) fn epsilon_unchecked(&self, omega: f64, t: f64) -> Complex64 {
        let w = Complex64::new(omega, 0.0);
        let gamma = self.gamma_at(t);
        let free = self.omega_p * self.omega_p / (w * (w + Complex64::i() * gamma));
        let core: Complex64 = self.core.iter().map(|o| o.at(w)).sum();
        Complex64::new(1.0, 0.0) - free + core
    }

    /// Permittivity on the whole real axis, using `eps(-w) = conj(eps(w))`.
    pub fn epsilon_extended(&self, omega: f64, t: f64) -> Result<Complex64> {
        if omega < 0.0 {
            self.epsilon(-omega, t).map(|e| e.conj())
        } else {
            self.epsilon(omega, t)
        }
    }

    /// Permittivity at imaginary frequency `i xi`, `xi >= 0`.
    pub fn imag_response(&self, xi: f64, t: f64) -> ImagResponse {
        let gamma = self.gamma_at(t);
        let wp2 = self.omega_p * self.omega_p;
        let core: f64 = self.core.iter().map(|o| o.at_imag(xi)).sum();
        let free_xi2 = if xi == 0.0 {
            if gamma == 0.0 {
                wp2
            } else {
                0.0
            }
        } else {
            wp2 * xi / (xi + gamma)
        };
        let eps = if xi == 0.0 {
            f64::INFINITY
        } else {
            1.0 + wp2 / (xi * (xi + gamma)) + core
        };
        ImagResponse {
            eps,
            chi_xi2: free_xi2 + core * xi * xi,
        }
    }
}

/// TE (s) and TM (p) reflection amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReflectionPair {
    pub r_s: Complex64,
    pub r_p: Complex64,
}

impl ReflectionPair {
    pub fn swapped(self) -> Self {
        Self {
            r_s: self.r_p,
            r_p: self.r_s,
        }
    }
}

/// Square root on the branch `Im >= 0` (and `Re >= 0` on the real axis).
#[inline]
pub(crate) fn upper_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Interface reflection for a given vacuum normal wave-vector `kz` and
/// `chi_k0sq = (eps - 1) w^2/c^2`. Works for any complex frequency.
#[inline]
pub(crate) fn interface(eps: Complex64, chi_k0sq: Complex64, kz: Complex64) -> (ReflectionPair, Complex64) {
    let kzm = upper_sqrt(kz * kz + chi_k0sq);
    let r_s = (kz - kzm) / (kz + kzm);
    let r_p = (eps * kz - kzm) / (eps * kz + kzm);
    (ReflectionPair { r_s, r_p }, kzm)
}

/// `1 + r` and `1 - r` for both polarisations, computed without
/// cancellation where `r -> -1` (grazing incidence) or `r -> +1` (TM on a
/// good conductor).
#[inline]
pub(crate) fn interface_complements(
    eps: Complex64,
    kz: Complex64,
    kzm: Complex64,
) -> (ReflectionPair, ReflectionPair) {
    let ds = kz + kzm;
    let dp = eps * kz + kzm;
    (
        ReflectionPair {
            r_s: 2.0 * kz / ds,
            r_p: 2.0 * eps * kz / dp,
        },
        ReflectionPair {
            r_s: 2.0 * kzm / ds,
            r_p: 2.0 * kzm / dp,
        },
    )
}

/// `1 + r_slab` and `1 - r_slab` from the interface pair, its complements
/// and `kzm`.
#[inline]
pub(crate) fn slab_complements(
    r: ReflectionPair,
    plus: ReflectionPair,
    minus: ReflectionPair,
    kzm: Complex64,
    w: f64,
) -> (ReflectionPair, ReflectionPair) {
    let ph = (Complex64::i() * 2.0 * kzm * w).exp();
    let one = Complex64::new(1.0, 0.0);
    let f = |r: Complex64, c: Complex64, sign: f64| c * (one - sign * r * ph) / (one - r * r * ph);
    (
        ReflectionPair {
            r_s: f(r.r_s, plus.r_s, 1.0),
            r_p: f(r.r_p, plus.r_p, 1.0),
        },
        ReflectionPair {
            r_s: f(r.r_s, minus.r_s, -1.0),
            r_p: f(r.r_p, minus.r_p, -1.0),
        },
    )
}

/// Finite-slab reflection from the single-interface pair and the internal
/// normal wave-vector `kzm`.
#[inline]
pub(crate) fn slab(r: ReflectionPair, kzm: Complex64, w: f64) -> ReflectionPair {
    let ph = (Complex64::i() * 2.0 * kzm * w).exp();
    let one = Complex64::new(1.0, 0.0);
    let f = |r: Complex64| r * (one - ph) / (one - r * r * ph);
    ReflectionPair {
        r_s: f(r.r_s),
        r_p: f(r.r_p),
    }
}

/// Real-axis normal wave-vector `sqrt(w^2/c^2 - k^2)` on the `Im >= 0` branch.
/// Arguments in any consistent unit system.
pub(crate) fn kz_of(k0: f64, k_perp: f64) -> Complex64 {
    let d = (k0 - k_perp) * (k0 + k_perp);
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

fn check_real_axis(omega: f64, k_perp: f64) -> Result<()> {
    if !(omega > 0.0) {
        return domain(format!("need omega > 0, got {omega}"));
    }
    if !(k_perp >= 0.0) {
        return domain(format!("need k_perp >= 0, got {k_perp}"));
    }
    Ok(())
}

/// Fresnel coefficients of a semi-infinite medium. `k_perp` in rad/m.
pub fn fresnel(epsilon: Complex64, omega: f64, k_perp: f64) -> Result<ReflectionPair> {
    check_real_axis(omega, k_perp)?;
    let k0 = omega / crate::units::cm_to_m(C);
    let kz = kz_of(k0, k_perp);
    Ok(interface(epsilon, (epsilon - 1.0) * k0 * k0, kz).0)
}

/// Reflection of a slab of thickness `w` (metres) in vacuum;
/// `None` means semi-infinite.
pub fn slab_reflection(
    epsilon: Complex64,
    omega: f64,
    k_perp: f64,
    w: Option<f64>,
) -> Result<ReflectionPair> {
    check_real_axis(omega, k_perp)?;
    let k0 = omega / crate::units::cm_to_m(C);
    let kz = kz_of(k0, k_perp);
    let (r, kzm) = interface(epsilon, (epsilon - 1.0) * k0 * k0, kz);
    match w {
        None => Ok(r),
        Some(w) if w > 0.0 => Ok(slab(r, kzm, w)),
        Some(w) => domain(format!("slab thickness must be positive, got {w}")),
    }
}

/// On-disk description of a material (see [`MaterialModel::from_spec`]).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub name: String,
    pub kind: Option<ModelKind>,
    pub omega_p_ev: Option<f64>,
    pub omega_p_rad_s: Option<f64>,
    pub gamma_ev: Option<f64>,
    pub gamma_rad_s: Option<f64>,
    pub gamma_scaling: Option<GammaScaling>,
    #[serde(default)]
    pub core: Vec<LorentzOscillator>,
}

impl MaterialModel {
    /// Builds a model from a spec. Missing fields fall back to the preset
    /// of the same name when there is one.
    pub fn from_spec(spec: &MaterialSpec) -> Result<Self> {
        let base = Self::preset(&spec.name);
        let pick = |ev: Option<f64>, rad: Option<f64>, what: &str, fallback: Option<f64>| -> Result<f64> {
            match (ev, rad) {
                (Some(_), Some(_)) => domain(format!("{}: give {what}_ev or {what}_rad_s, not both", spec.name)),
                (Some(e), None) => Ok(ev_to_rad_s(e)),
                (None, Some(r)) => Ok(r),
                (None, None) => fallback
                    .ok_or_else(|| crate::error::Error::Domain(format!("{}: missing {what}", spec.name))),
            }
        };
        let omega_p = pick(spec.omega_p_ev, spec.omega_p_rad_s, "omega_p", base.as_ref().map(|b| b.omega_p))?;
        let kind = spec
            .kind
            .or(base.as_ref().map(|b| b.kind))
            .unwrap_or(ModelKind::Drude);
        let gamma_fallback = match kind {
            ModelKind::Plasma => Some(base.as_ref().map(|b| b.gamma).unwrap_or(0.0)),
            ModelKind::Drude => base.as_ref().map(|b| b.gamma),
        };
        let gamma = pick(spec.gamma_ev, spec.gamma_rad_s, "gamma", gamma_fallback)?;
        let model = Self {
            name: spec.name.clone(),
            kind,
            omega_p,
            gamma,
            gamma_scaling: spec.gamma_scaling.unwrap_or_default(),
            core: spec.core.clone(),
        };
        model.validate()?;
        Ok(model)
    }
}
