//! Thermal energy density inside the cavity and its TE/TM, electric/magnetic
//! decomposition.
//!
//! The spectral density is normalized so that `u = int rho(w) dw / 2 pi`.
//! Free space contributes `rho_BB = 2 hbar w^3 n(w) / (pi c^3)`, split evenly
//! over the four (polarization, field) cells.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::greens::{kz, reflection_pairs, split_traces_real, CavitySetup, Point, SplitTraces};
use crate::quadrature::{Estimate, QuadratureSpec};
use crate::special::hurwitz_zeta3;
use crate::thermal;
use crate::units::{bose, thermal_length, C, ENERGY_DENSITY_TO_SI, HBAR, K_B};

/// Points closer than this to a mirror are computed but flagged.
pub const MIN_RELIABLE_DISTANCE: f64 = 50e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Te,
    Tm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Electric,
    Magnetic,
    Both,
}

/// Selects which part of the field energy is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub polarization: Polarization,
    pub field: Field,
}

/// One of the four exclusive (polarization, field) cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub polarization: Polarization,
    pub field: Field,
}

const CELLS: [Cell; 4] = [
    Cell { polarization: Polarization::Te, field: Field::Electric },
    Cell { polarization: Polarization::Te, field: Field::Magnetic },
    Cell { polarization: Polarization::Tm, field: Field::Electric },
    Cell { polarization: Polarization::Tm, field: Field::Magnetic },
];

impl SpectralFilter {
    pub const ALL: SpectralFilter = SpectralFilter {
        polarization: Polarization::Both,
        field: Field::Both,
    };

    pub fn new(polarization: Polarization, field: Field) -> Self {
        Self { polarization, field }
    }

    pub fn te() -> Self {
        Self::new(Polarization::Te, Field::Both)
    }

    pub fn tm() -> Self {
        Self::new(Polarization::Tm, Field::Both)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (self.polarization == Polarization::Both || self.polarization == cell.polarization)
            && (self.field == Field::Both || self.field == cell.field)
    }

    /// Exclusive cells selected by this filter.
    pub fn cells(&self) -> Vec<Cell> {
        CELLS.iter().copied().filter(|c| self.contains(*c)).collect()
    }

    /// Fraction of the black-body density that falls inside the filter.
    pub fn blackbody_share(&self) -> f64 {
        self.cells().len() as f64 / 4.0
    }
}

fn cell_values(t: &SplitTraces) -> [Estimate; 4] {
    [t.te_electric(), t.te_magnetic(), t.tm_electric(), t.tm_magnetic()]
}

fn mask(filter: &SpectralFilter) -> [f64; 4] {
    CELLS.map(|c| if filter.contains(c) { 1.0 } else { 0.0 })
}

/// Black-body energy density `(pi^2/15) (k T)^4 / (hbar c)^3`, J/m^3.
pub fn planck_density(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let kt = K_B * t;
    PI * PI / 15.0 * kt.powi(4) / (HBAR * C).powi(3) * ENERGY_DENSITY_TO_SI
}

/// Black-body spectral density `rho_BB(w)`, J s / m^3.
pub fn planck_spectrum(omega: f64, t: f64) -> f64 {
    if t <= 0.0 || omega <= 0.0 {
        return 0.0;
    }
    2.0 * HBAR * omega.powi(3) * bose(omega, t) / (PI * C.powi(3)) * ENERGY_DENSITY_TO_SI
}

/// Limiting TE energy density between good conductors with
/// `lambda_p << a << lambda_T`:
/// `(k T / 16 pi a^3) [zeta(3, z/a) + zeta(3, 1 - z/a)]`, J/m^3.
pub fn universal_te_density(a: f64, z: f64, t: f64) -> Result<f64> {
    if !(a > 0.0 && z > 0.0 && z < a && t > 0.0) {
        return domain("need 0 < z < a and T > 0");
    }
    let x = z / a;
    // kT in J over a in m gives J/m^3 directly
    let kt = K_B * t * 1e-7;
    Ok(kt / (16.0 * PI * a.powi(3)) * (hurwitz_zeta3(x) + hurwitz_zeta3(1.0 - x)))
}

/// Per-polarization terms of the mode function `g(w, k; z)`, m^-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GKernel {
    pub s: f64,
    pub p: f64,
}

impl GKernel {
    pub fn total(&self) -> f64 {
        self.s + self.p
    }
}

/// The mode function
/// `g = k^2 sum_a Re[(R1 e^{2ikz z} + R2 e^{2ikz(a-z)}) / (A kz)
///   + (2 w^2 / c^2 k^2) R1 R2 e^{2ikz a} / (A kz)]`
/// with `A = 1 - R1 R2 e^{2ikz a}`. The scattering energy density is
/// `u_sc = int dw/2pi 2 hbar n(w) int d^2k/(2pi)^2 g`.
pub fn g_function(setup: &CavitySetup, omega: f64, k_perp: f64, z: f64) -> Result<GKernel> {
    setup.check_z(z)?;
    if !(omega > 0.0 && k_perp >= 0.0) {
        return domain("need omega > 0 and k_perp >= 0");
    }
    let kzv = kz(omega, k_perp);
    if kzv.norm() == 0.0 {
        return domain("g is undefined on the light line");
    }
    let (r1, r2) = reflection_pairs(setup, omega, kzv / 100.0);
    let k0sq = (omega / (C / 100.0)).powi(2);
    let k2 = k_perp * k_perp;
    let i = Complex64::i();
    let e1 = (2.0 * i * kzv * z).exp();
    let e2 = (2.0 * i * kzv * (setup.a - z)).exp();
    let ea = (2.0 * i * kzv * setup.a).exp();
    let term = |a1: Complex64, a2: Complex64| {
        let aa = 1.0 - a1 * a2 * ea;
        let single = k2 * (a1 * e1 + a2 * e2) / (aa * kzv);
        let double = 2.0 * k0sq * a1 * a2 * ea / (aa * kzv);
        (single + double).re
    };
    Ok(GKernel {
        s: term(r1.r_s, r2.r_s),
        p: term(r1.r_p, r2.r_p),
    })
}

/// Spectral energy density at one frequency, J s / m^3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    /// Black-body share plus scattering part, clamped at zero when the
    /// negative value is rounding.
    pub cavity: Estimate,
    pub scattering: Estimate,
    pub blackbody: f64,
}

/// `rho(w; z)` for the selected filter.
pub fn spectral_energy_density(
    setup: &CavitySetup,
    omega: f64,
    z: f64,
    filter: SpectralFilter,
    quad: &QuadratureSpec,
) -> Result<SpectralDensity> {
    if !(omega > 0.0) {
        return domain("need omega > 0");
    }
    let t = split_traces_real(setup, omega, &Point::new(setup, z)?, quad)?;
    let m = mask(&filter);
    let phi = cell_values(&t)
        .iter()
        .zip(m)
        .fold(Estimate::ZERO, |acc, (e, w)| acc + e.scale(w));
    let to_rho = HBAR / (2.0 * PI) * bose(omega, setup.t) * ENERGY_DENSITY_TO_SI;
    let scattering = phi.scale(to_rho);
    let blackbody = planck_spectrum(omega, setup.t) * filter.blackbody_share();
    let mut cavity = scattering + Estimate::new(blackbody, 0.0);
    // each free cell is k^3; the trace kernels lose ~1e-12 of it to rounding
    let floor = 1e-10 * (omega / C).powi(3) * to_rho;
    if cavity.value < 0.0 && -cavity.value <= cavity.error.max(floor) {
        cavity.value = 0.0;
    }
    Ok(SpectralDensity {
        cavity,
        scattering,
        blackbody,
    })
}

/// How the frequency integral is carried out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Real axis for lossy mirrors with `a < lambda_T`, Matsubara sum
    /// otherwise (lossless spectra have poles, wide cavities many modes).
    #[default]
    Auto,
    /// Adaptive integral over real frequencies up to `hbar w = 40 k T`.
    RealAxis,
    /// Sum over imaginary Matsubara frequencies.
    Matsubara,
}

impl Route {
    pub(crate) fn resolve(self, setup: &CavitySetup) -> Route {
        match self {
            Route::Auto if setup.is_lossless() || setup.a >= thermal_length(setup.t) => Route::Matsubara,
            Route::Auto => Route::RealAxis,
            r => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDensity {
    pub polarization: Polarization,
    pub field: Field,
    /// J/m^3, black-body share included.
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDensityResult {
    /// Thermal energy density `u_BB share + u_sc`, J/m^3.
    pub value: f64,
    pub error_estimate: f64,
    /// Black-body share included in `value`.
    pub blackbody: f64,
    pub scattering: Estimate,
    pub components: Vec<ComponentDensity>,
    pub route: Route,
    pub warnings: Vec<String>,
}

pub(crate) fn point_warnings(setup: &CavitySetup, z: f64) -> Vec<String> {
    let mut w = setup.warnings();
    if z.min(setup.a - z) < MIN_RELIABLE_DISTANCE {
        w.push(format!(
            "z = {z:e} m is closer than {MIN_RELIABLE_DISTANCE:e} m to a mirror; macroscopic optics is unreliable there"
        ));
    }
    w
}

/// Thermal energy density at `z` for the selected filter.
pub fn thermal_energy_density(
    setup: &CavitySetup,
    z: f64,
    filter: SpectralFilter,
    quad: &QuadratureSpec,
) -> Result<EnergyDensityResult> {
    thermal_energy_density_with(setup, z, filter, quad, Route::Auto)
}

pub fn thermal_energy_density_with(
    setup: &CavitySetup,
    z: f64,
    filter: SpectralFilter,
    quad: &QuadratureSpec,
    route: Route,
) -> Result<EnergyDensityResult> {
    quad.validate()?;
    let p = Point::new(setup, z)?;
    let m = mask(&filter);
    let f = |t: &SplitTraces| {
        let c = cell_values(t);
        [0, 1, 2, 3].map(|k| c[k].value * m[k])
    };
    let route = route.resolve(setup);
    let sc = match route {
        Route::Matsubara => thermal::matsubara(setup, &p, quad, f)?,
        _ => thermal::real_axis(setup, &p, quad, f)?,
    }
    .map(|e| e.scale(ENERGY_DENSITY_TO_SI));

    let bb_cell = planck_density(setup.t) / 4.0;
    let mut components = Vec::new();
    for (k, cell) in CELLS.iter().enumerate() {
        if m[k] == 0.0 {
            continue;
        }
        components.push(ComponentDensity {
            polarization: cell.polarization,
            field: cell.field,
            value: bb_cell + sc[k].value,
            error: sc[k].error,
        });
    }
    let scattering: Estimate = sc.iter().copied().sum();
    let blackbody = bb_cell * components.len() as f64;
    Ok(EnergyDensityResult {
        value: components.iter().map(|c| c.value).sum(),
        error_estimate: scattering.error,
        blackbody,
        scattering,
        components,
        route,
        warnings: point_warnings(setup, z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{trace_kernel, Mirror};
    use crate::materials::MaterialModel;
    use crate::units::ZETA3;

    fn gold(a: f64) -> CavitySetup {
        CavitySetup::symmetric(a, MaterialModel::gold(), 300.0).unwrap()
    }

    #[test]
    fn planck_matches_stefan_boltzmann() {
        // sigma = 5.670374419e-8 W m^-2 K^-4, u = 4 sigma T^4 / c; the
        // ten-digit hbar limits agreement to ~2e-9
        let u = 4.0 * 5.670_374_419e-8 * 300f64.powi(4) / 2.997_924_58e8;
        assert!((planck_density(300.0) / u - 1.0).abs() < 5e-9);
        let radiation_constant = PI.powi(2) * (1.380_649e-23f64).powi(4)
            / (15.0 * (1.054_571_817e-34f64 * 2.997_924_58e8).powi(3));
        assert!((planck_density(123.4) / (radiation_constant * 123.4f64.powi(4)) - 1.0).abs() < 1e-10);
        assert!((planck_density(300.0) - 6.13e-6).abs() < 0.01e-6);
        assert!((planck_density(600.0) / planck_density(300.0) - 16.0).abs() < 1e-12);
        assert_eq!(planck_density(0.0), 0.0);
    }

    #[test]
    fn planck_spectrum_integrates_to_density() {
        let t = 300.0;
        let wt = K_B * t / HBAR;
        let r = crate::quadrature::integrate_scalar(
            |w| planck_spectrum(w, t) / (2.0 * PI),
            &crate::quadrature::geometric_breaks(1e-6 * wt, 200.0 * wt, 4),
            1e-12,
            0.0,
            4000,
        )
        .unwrap();
        assert!((r.value / planck_density(t) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn universal_formula_values() {
        let a = 2e-6;
        let u = universal_te_density(a, a / 2.0, 300.0).unwrap();
        let kt = K_B * 300.0 * 1e-7;
        let direct = kt / (16.0 * PI * a.powi(3)) * 14.0 * ZETA3;
        assert!((u / direct - 1.0).abs() < 1e-12);
        assert!((u - 1.73e-4).abs() < 0.01e-4);
        assert!((u / planck_density(300.0) - 28.0).abs() < 0.5);
        let u2 = universal_te_density(a, a / 2.0, 600.0).unwrap();
        assert!((u2 / u - 2.0).abs() < 1e-14);
        let off = universal_te_density(a, 0.3 * a, 300.0).unwrap();
        let mirror = universal_te_density(a, 0.7 * a, 300.0).unwrap();
        assert!((off / mirror - 1.0).abs() < 1e-14);
        assert!(universal_te_density(a, a, 300.0).is_err());
    }

    #[test]
    fn filters_partition_cells() {
        assert_eq!(SpectralFilter::ALL.cells().len(), 4);
        assert_eq!(SpectralFilter::te().cells().len(), 2);
        let tm_h = SpectralFilter::new(Polarization::Tm, Field::Magnetic);
        assert_eq!(tm_h.cells(), vec![CELLS[3]]);
        assert_eq!(tm_h.blackbody_share(), 0.25);
    }

    #[test]
    fn g_vanishes_without_reflection() {
        let s = CavitySetup::new(2e-6, Mirror::vacuum(), Mirror::vacuum(), 300.0).unwrap();
        let g = g_function(&s, 1e10, 5e5, 1e-6).unwrap();
        assert_eq!(g.total(), 0.0);
    }

    #[test]
    fn g_is_half_the_trace_kernel() {
        let s = gold(2e-6);
        for (w, k, z) in [(1e10, 5e5, 1e-6), (1e14, 1e5, 0.3e-6), (3e14, 2e5, 1.7e-6)] {
            let g = g_function(&s, w, k, z).unwrap();
            let t = trace_kernel(&s, w, k, z).unwrap();
            assert!((t.total_te.re / (2.0 * g.s) - 1.0).abs() < 1e-8, "{w} {k}");
            assert!((t.total_tm.re / (2.0 * g.p) - 1.0).abs() < 1e-8, "{w} {k}");
        }
    }

    #[test]
    fn g_is_symmetric_between_identical_mirrors() {
        let s = gold(2e-6);
        let a = g_function(&s, 1e10, 5e5, 0.4e-6).unwrap();
        let b = g_function(&s, 1e10, 5e5, 1.6e-6).unwrap();
        assert!((a.total() / b.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn filter_additivity_of_spectrum() {
        let s = gold(2e-6);
        let q = QuadratureSpec::default();
        let w = 1e9;
        let all = spectral_energy_density(&s, w, 1e-6, SpectralFilter::ALL, &q).unwrap();
        let te = spectral_energy_density(&s, w, 1e-6, SpectralFilter::te(), &q).unwrap();
        let tm = spectral_energy_density(&s, w, 1e-6, SpectralFilter::tm(), &q).unwrap();
        let sum = te.scattering.value + tm.scattering.value;
        assert!((sum / all.scattering.value - 1.0).abs() < 1e-12);
        let el = spectral_energy_density(&s, w, 1e-6, SpectralFilter::new(Polarization::Both, Field::Electric), &q)
            .unwrap();
        let mg = spectral_energy_density(&s, w, 1e-6, SpectralFilter::new(Polarization::Both, Field::Magnetic), &q)
            .unwrap();
        assert!(((el.cavity.value + mg.cavity.value) / all.cavity.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn te_spectrum_is_magnetic() {
        let s = gold(2e-6);
        let q = QuadratureSpec::default();
        let te = spectral_energy_density(&s, 1e9, 1e-6, SpectralFilter::te(), &q).unwrap();
        let te_h = spectral_energy_density(&s, 1e9, 1e-6, SpectralFilter::new(Polarization::Te, Field::Magnetic), &q)
            .unwrap();
        assert!(te_h.cavity.value / te.cavity.value > 0.9);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = gold(2e-6);
        let q = QuadratureSpec::default();
        assert!(spectral_energy_density(&s, 0.0, 1e-6, SpectralFilter::ALL, &q).is_err());
        assert!(thermal_energy_density(&s, 3e-6, SpectralFilter::ALL, &q).is_err());
    }

    #[test]
    fn flags_points_near_a_mirror() {
        let s = gold(2e-6);
        assert!(point_warnings(&s, 1e-6).is_empty());
        assert_eq!(point_warnings(&s, 20e-9).len(), 1);
    }
}
