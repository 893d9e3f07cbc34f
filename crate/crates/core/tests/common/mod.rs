//! Brute-force reference traces shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use thermocav::{CavitySetup, Mirror};

const C_CGS: f64 = 2.997_924_58e10;

/// `(r_s, r_p)` of a mirror at real frequency, straight from Fresnel.
pub fn fresnel(mirror: &Mirror, omega: f64, t: f64, kz: Complex64) -> (Complex64, Complex64) {
    match mirror {
        Mirror::Constant(r) => (r.r_s, r.r_p),
        Mirror::Material { model, .. } => {
            let k0 = omega / C_CGS;
            let eps = model.epsilon(omega, t).unwrap();
            let mut km = (eps * k0 * k0 - (k0 * k0 - kz * kz)).sqrt();
            if km.im < 0.0 {
                km = -km;
            }
            ((kz - km) / (kz + km), (eps * kz - km) / (eps * kz + km))
        }
    }
}

/// Naive `(B, D)` sums of the multiple-reflection series.
fn bounces(r1: Complex64, r2: Complex64, kz: Complex64, a: f64, z: f64) -> (Complex64, Complex64) {
    let i2 = Complex64::i() * 2.0 * kz;
    let den = 1.0 - r1 * r2 * (i2 * a).exp();
    let b = (r1 * (i2 * z).exp() + r2 * (i2 * (a - z)).exp()) / den;
    let d = 2.0 * r1 * r2 * (i2 * a).exp() / den;
    (b, d)
}

/// `[E_xx, E_zz, H_xx, H_zz]` integrands (times `kz`) at one `kz`.
fn integrand(setup: &CavitySetup, omega: f64, z: f64, kz: Complex64) -> [Complex64; 4] {
    let k0 = omega / C_CGS;
    let a = setup.a * 100.0;
    let (s1, p1) = fresnel(&setup.mirror1, omega, setup.t, kz);
    let (s2, p2) = fresnel(&setup.mirror2, omega, setup.t, kz);
    let (bs, ds) = bounces(s1, s2, kz, a, z);
    let (bp, dp) = bounces(p1, p2, kz, a, z);
    let k2 = k0 * k0 - kz * kz;
    [
        0.5 * k0 * k0 * (bs + ds) - 0.5 * kz * kz * (bp - dp),
        k2 * (bp + dp),
        0.5 * k0 * k0 * (bp + dp) - 0.5 * kz * kz * (bs - ds),
        k2 * (bs + ds),
    ]
}

fn simpson<F: Fn(f64) -> [Complex64; 4]>(f: &F, lo: f64, hi: f64, n: usize) -> [Complex64; 4] {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    for k in 0..=n {
        let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        let v = f(lo + k as f64 * h);
        for j in 0..4 {
            acc[j] += v[j] * w;
        }
    }
    acc.map(|x| x * h / 3.0)
}

/// Simpson panels on `[0, hi]`, geometrically graded towards zero where
/// the TM coefficients of good conductors vary fastest.
fn graded<F: Fn(f64) -> [Complex64; 4]>(f: F, hi: f64) -> [Complex64; 4] {
    let lo = hi * 1e-12;
    // midpoint on the first sliver avoids the 0/0 at grazing incidence
    let mut acc = f(0.5 * lo).map(|x| x * lo);
    let panels = 12 * 40;
    for k in 0..panels {
        let x0 = lo * (hi / lo).powf(k as f64 / panels as f64);
        let x1 = lo * (hi / lo).powf((k + 1) as f64 / panels as f64);
        let v = simpson(&f, x0, x1, 400);
        for j in 0..4 {
            acc[j] += v[j];
        }
    }
    acc
}

/// Scattering `[Im E_xx, Im E_zz, Im H_xx, Im H_zz]` at `z` (m), m^-3, by
/// fixed Simpson rules on both sectors of the wave-vector axis.
pub fn brute_force_traces(setup: &CavitySetup, omega: f64, z: f64) -> [f64; 4] {
    let k0 = omega / C_CGS;
    let zc = z * 100.0;
    let d = zc.min(setup.a * 100.0 - zc);
    let prop = graded(|kz| integrand(setup, omega, zc, Complex64::new(kz, 0.0)), k0);
    let evan = graded(|q| integrand(setup, omega, zc, Complex64::new(0.0, q)), 40.0 / d);
    let mut out = [0.0; 4];
    for j in 0..4 {
        let total = Complex64::i() * (prop[j] - Complex64::i() * evan[j]);
        out[j] = total.im * 1e6;
    }
    out
}
