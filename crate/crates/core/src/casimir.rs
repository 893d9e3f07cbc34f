//! Spectral density of the thermal Casimir pressure built from the magnetic
//! scattering traces, and its small-gap closed form.
//!
//! `T_zz(w) = (hbar / 2 pi) n(w) (2 H_xx - H_zz)` with `H` the imaginary part
//! of the magnetic scattering Green tensor; positive values are repulsive.
//! The pressure is `int T_zz dw / 2 pi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::greens::{split_traces_real, CavitySetup, Point, SplitTraces};
use crate::quadrature::{Estimate, QuadratureSpec};
use crate::spectra::{point_warnings, Route};
use crate::thermal;
use crate::units::{bose, thermal_length, HBAR, K_B, PRESSURE_TO_SI, ZETA3};

/// Above this `a / lambda_T` the magnetic-trace formula is flagged.
pub const MAX_GAP_OVER_THERMAL_LENGTH: f64 = 0.5;
/// Above this `lambda_p / a` the closed form is flagged.
pub const MAX_PLASMA_LENGTH_OVER_GAP: f64 = 0.1;

/// Pressure spectrum at one frequency, Pa s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureSpectrum {
    /// `T_zz` from the magnetic traces.
    pub total: Estimate,
    /// TE share of `total`.
    pub te: Estimate,
    /// TM share of `total`.
    pub tm: Estimate,
    /// Electric counterpart `(hbar / 2 pi) n (2 E_xx - E_zz)`, not part of
    /// `total`; shows that the thermal pressure is magnetic.
    pub electric: Estimate,
}

fn magnetic_te(t: &SplitTraces) -> f64 {
    2.0 * t.h_perp_s.value - t.h_par.value
}

fn magnetic_tm(t: &SplitTraces) -> f64 {
    2.0 * t.h_perp_p.value
}

/// Warnings for setups outside `lambda_p << a << lambda_T`.
pub fn validity_warnings(setup: &CavitySetup) -> Vec<String> {
    let mut w = setup.warnings();
    let lt = thermal_length(setup.t);
    if setup.a > MAX_GAP_OVER_THERMAL_LENGTH * lt {
        w.push(format!(
            "gap {:e} m is not small compared to the thermal length {lt:e} m; the magnetic-trace pressure is approximate",
            setup.a
        ));
    }
    w
}

/// `T_zz(w)` at `z` (default: the cavity centre).
pub fn pressure_spectrum(
    setup: &CavitySetup,
    omega: f64,
    z: Option<f64>,
    quad: &QuadratureSpec,
) -> Result<PressureSpectrum> {
    if !(omega > 0.0) {
        return domain("need omega > 0");
    }
    let z = z.unwrap_or(setup.a / 2.0);
    let t = split_traces_real(setup, omega, &Point::new(setup, z)?, quad)?;
    let s = HBAR / (2.0 * PI) * bose(omega, setup.t) * PRESSURE_TO_SI;
    let te = (t.h_perp_s.scale(2.0) + Estimate::new(-t.h_par.value, t.h_par.error)).scale(s);
    let tm = t.h_perp_p.scale(2.0 * s);
    let electric = (t.e_perp().scale(2.0) + Estimate::new(-t.e_par.value, t.e_par.error)).scale(s);
    Ok(PressureSpectrum {
        total: te + tm,
        te,
        tm,
        electric,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalPressure {
    /// Pa, positive = repulsive.
    pub value: f64,
    pub error_estimate: f64,
    pub te: Estimate,
    pub tm: Estimate,
    pub route: Route,
    pub warnings: Vec<String>,
}

/// `int T_zz dw / 2 pi` at the cavity centre.
pub fn thermal_pressure_integrated(setup: &CavitySetup, quad: &QuadratureSpec) -> Result<ThermalPressure> {
    thermal_pressure_at(setup, setup.a / 2.0, quad, Route::Auto)
}

/// `int T_zz dw / 2 pi` at an arbitrary point and by a chosen route.
pub fn thermal_pressure_at(
    setup: &CavitySetup,
    z: f64,
    quad: &QuadratureSpec,
    route: Route,
) -> Result<ThermalPressure> {
    quad.validate()?;
    let p = Point::new(setup, z)?;
    let f = |t: &SplitTraces| [magnetic_te(t), magnetic_tm(t)];
    let route = route.resolve(setup);
    let [te, tm] = match route {
        Route::Matsubara => thermal::matsubara(setup, &p, quad, f)?,
        _ => thermal::real_axis(setup, &p, quad, f)?,
    }
    .map(|e| e.scale(PRESSURE_TO_SI));
    let total = te + tm;
    let mut warnings = validity_warnings(setup);
    for w in point_warnings(setup, z) {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    Ok(ThermalPressure {
        value: total.value,
        error_estimate: total.error,
        te,
        tm,
        route,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPressure {
    /// Pa, positive = repulsive.
    pub value: f64,
    /// Set when `lambda_p << a << lambda_T` does not hold.
    pub out_of_range: bool,
}

/// `(k T / 8 pi a^3) zeta(3) (1 - 6 lambda_p / a)`.
pub fn thermal_pressure_asymptotic(a: f64, t: f64, lambda_p: f64) -> Result<AsymptoticPressure> {
    if !(a > 0.0 && t > 0.0 && lambda_p >= 0.0) {
        return domain("need a > 0, T > 0 and lambda_p >= 0");
    }
    let kt = K_B * t * 1e-7;
    let value = kt / (8.0 * PI * a.powi(3)) * ZETA3 * (1.0 - 6.0 * lambda_p / a);
    let out_of_range =
        lambda_p > MAX_PLASMA_LENGTH_OVER_GAP * a || a > MAX_GAP_OVER_THERMAL_LENGTH * thermal_length(t);
    Ok(AsymptoticPressure { value, out_of_range })
}
