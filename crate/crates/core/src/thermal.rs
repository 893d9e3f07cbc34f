//! Frequency integration of thermal (Bose-weighted) spectra.
//!
//! For a function `F(w)` analytic in the upper half plane and real on the
//! imaginary axis, the thermal part
//! `(hbar / 4 pi^2) int_0^inf dw n(w) Im F(w)`
//! equals `(1 / 4 pi) [k T sum'_n F(i xi_n) - (hbar / 2 pi) int_0^inf F(i xi) dxi]`
//! with Matsubara frequencies `xi_n = 2 pi n k T / hbar`. Both routes are
//! implemented; the imaginary-axis one is immune to real-axis mode poles.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::greens::{evanescent_cutoff, split_traces_imag, split_traces_real, CavitySetup, Point, SplitTraces};
use crate::quadrature::{geometric_breaks, integrate, Estimate, QuadratureSpec};
use crate::units::{bose, C, HBAR, K_B};

use std::f64::consts::PI;

/// Lowest frequency of the real-axis grid, rad/s.
pub(crate) const REAL_AXIS_FLOOR: f64 = 1e4;
/// The real-axis grid stops at `hbar w / k T` equal to this.
pub(crate) const REAL_AXIS_CEILING: f64 = 40.0;

/// First Matsubara frequency, rad/s.
pub(crate) fn matsubara_step(t: f64) -> f64 {
    2.0 * PI * K_B * t / HBAR
}

/// Thermal part by the Matsubara sum, Gaussian units.
pub(crate) fn matsubara<const N: usize, F>(
    setup: &CavitySetup,
    p: &Point,
    quad: &QuadratureSpec,
    f: F,
) -> Result<[Estimate; N]>
where
    F: Fn(&SplitTraces) -> [f64; N],
{
    let kt = K_B * setup.t;
    let step = matsubara_step(setup.t);
    let xi_max = evanescent_cutoff(p, quad) * C;

    let mut sum = [Estimate::ZERO; N];
    let mut n = 0usize;
    loop {
        let xi = n as f64 * step;
        if xi >= xi_max {
            break;
        }
        let t = split_traces_imag(setup, xi, p, quad)?;
        let v = f(&t);
        let e = f(&error_view(&t));
        let w = if n == 0 { 0.5 } else { 1.0 };
        for k in 0..N {
            sum[k] = sum[k] + Estimate::new(w * v[k], w * e[k].abs());
        }
        n += 1;
    }

    let failure = RefCell::new(None);
    let xi_lo = 1e-8 * step;
    let mut breaks = vec![0.0];
    breaks.extend(geometric_breaks(xi_lo, xi_max, 4));
    let mut abs_tol = [0.0; N];
    for k in 0..N {
        abs_tol[k] = quad.rel_tol * sum[k].value.abs() * step + f64::MIN_POSITIVE;
    }
    let integral = integrate(
        |xi| match split_traces_imag(setup, xi, p, quad) {
            Ok(t) => f(&t),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [0.0; N]
            }
        },
        &breaks,
        quad.rel_tol,
        abs_tol,
        quad.max_panels,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }

    let mut out = [Estimate::ZERO; N];
    for k in 0..N {
        let zp = integral[k].scale(HBAR / (2.0 * PI));
        let inner = quad.rel_tol * zp.value.abs();
        out[k] = (sum[k].scale(kt) - zp + Estimate::new(0.0, inner)).scale(1.0 / (4.0 * PI));
    }
    Ok(out)
}

/// Thermal part by direct integration over real frequencies, Gaussian units.
/// Lossless cavities are rejected: their spectra contain mode poles.
pub(crate) fn real_axis<const N: usize, F>(
    setup: &CavitySetup,
    p: &Point,
    quad: &QuadratureSpec,
    f: F,
) -> Result<[Estimate; N]>
where
    F: Fn(&SplitTraces) -> [f64; N],
{
    let w_hi = REAL_AXIS_CEILING * K_B * setup.t / HBAR;
    if setup.is_lossless() {
        return Err(Error::Unsupported(
            "real-frequency integration of a lossless cavity; use the Matsubara route".into(),
        ));
    }
    if w_hi <= REAL_AXIS_FLOOR {
        return Ok([Estimate::ZERO; N]);
    }
    let failure = RefCell::new(None);
    let mut abs_tol = [0.0; N];
    // scale of the black-body integrand, used only as an absolute floor
    let bb = HBAR / (4.0 * PI * PI) * (K_B * setup.t / HBAR).powi(4) / C.powi(3);
    for k in 0..N {
        abs_tol[k] = quad.abs_floor * bb;
    }
    let r = integrate(
        |w| match split_traces_real(setup, w, p, quad) {
            Ok(t) => {
                let n = bose(w, setup.t);
                f(&t).map(|x| HBAR / (4.0 * PI * PI) * n * x)
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                [0.0; N]
            }
        },
        &geometric_breaks(REAL_AXIS_FLOOR, w_hi, 4),
        quad.rel_tol,
        abs_tol,
        quad.max_panels,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r.map(|e| e + Estimate::new(0.0, quad.rel_tol * e.value.abs())))
}

/// Traces with the error estimates in the value slots, so that a linear
/// combination `f` maps component errors onto a (triangle-inequality) bound.
fn error_view(t: &SplitTraces) -> SplitTraces {
    let e = |x: Estimate| Estimate::new(x.error, 0.0);
    SplitTraces {
        e_perp_s: e(t.e_perp_s),
        e_perp_p: e(t.e_perp_p),
        e_par: e(t.e_par),
        h_perp_s: e(t.h_perp_s),
        h_perp_p: e(t.h_perp_p),
        h_par: e(t.h_par),
    }
}
