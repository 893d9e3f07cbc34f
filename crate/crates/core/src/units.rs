//! Physical constants and unit conversion.
//!
//! All kernels work in Gaussian (CGS) units; the public API speaks SI and
//! converts at the boundary with the helpers below.

/// Speed of light, cm/s.
pub const C: f64 = 2.997_924_58e10;
/// Reduced Planck constant, erg s.
pub const HBAR: f64 = 1.054_571_817e-27;
/// Planck constant, erg s.
pub const H_PLANCK: f64 = 6.626_070_15e-27;
/// Boltzmann constant, erg/K.
pub const K_B: f64 = 1.380_649e-16;
/// Bohr magneton, erg/G.
pub const MU_B: f64 = 9.274_010_078_3e-21;
/// Nuclear magneton, erg/G.
pub const MU_N: f64 = 5.050_783_746_1e-24;
/// Electron volt, erg.
pub const EV: f64 = 1.602_176_634e-12;
/// Bohr radius, cm.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-9;
/// Riemann zeta(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

pub const CM_PER_M: f64 = 100.0;
pub const G_PER_KG: f64 = 1000.0;
/// erg/cm^3 -> J/m^3
pub const ENERGY_DENSITY_TO_SI: f64 = 0.1;
/// dyn/cm^2 -> Pa
pub const PRESSURE_TO_SI: f64 = 0.1;
/// erg -> J
pub const ERG_TO_J: f64 = 1e-7;

#[inline]
pub fn m_to_cm(x: f64) -> f64 {
    x * CM_PER_M
}

#[inline]
pub fn cm_to_m(x: f64) -> f64 {
    x / CM_PER_M
}

/// Converts an inverse volume from cm^-3 to m^-3.
#[inline]
pub fn per_cm3_to_per_m3(x: f64) -> f64 {
    x * 1e6
}

/// Angular frequency (rad/s) of an energy given in eV.
#[inline]
pub fn ev_to_rad_s(e: f64) -> f64 {
    e * EV / HBAR
}

/// Thermal length hbar c / k_B T in metres.
pub fn thermal_length(t: f64) -> f64 {
    cm_to_m(HBAR * C / (K_B * t))
}

/// Bose-Einstein occupation 1/(exp(hbar w / kT) - 1), valid for w > 0.
#[inline]
pub fn bose(omega: f64, t: f64) -> f64 {
    let x = HBAR * omega / (K_B * t);
    1.0 / x.exp_m1()
}
