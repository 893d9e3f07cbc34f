//! Casimir-Polder deflection of ground-state atoms crossing the gap, the
//! resulting survival channel, and the end-to-end exit populations.
//!
//! `U(z) = -k T sum'_n alpha(i xi_n) sum_a E^sc_aa(z, z; i xi_n)` with a
//! single-oscillator polarizability `alpha(i xi) = alpha0 / (1 + xi^2/w0^2)`.
//! The potential is tabulated once per setup and interpolated (cubic
//! Hermite on values and slopes); closer than [`TABLE_MIN_DISTANCE`] to a
//! wall it is continued by a power law matched in value and slope.

use std::cell::{Cell, RefCell};

use ode_solvers::{Dopri5, System, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::greens::{electric_trace_imag_with_gradient, evanescent_cutoff, CavitySetup, Point};
use crate::hyperfine::{
    cavity_rate, diagonalize_atom, evolve, AtomConstants, PopulationVector, RateMatrix, StateLabel,
};
use crate::quadrature::{geometric_breaks, integrate, Estimate, QuadratureSpec};
use crate::thermal::matsubara_step;
use crate::units::{ev_to_rad_s, BOHR_RADIUS, HBAR, K_B};

/// Innermost tabulated distance from a wall, m.
pub const TABLE_MIN_DISTANCE: f64 = 50e-9;
/// An atom this close to a wall has stuck to it, m.
pub const CONTACT_DISTANCE: f64 = 1e-9;
/// Matsubara terms summed explicitly; the rest by a midpoint integral.
const EXPLICIT_TERMS: usize = 64;
/// Table nodes per half gap.
const NODES_PER_HALF: usize = 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    /// Longitudinal velocity, m/s.
    pub v: f64,
    /// Mirror length along the beam, m.
    pub length: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Initial transverse velocity, m/s.
    pub v_transverse: f64,
    /// Static polarizability volume, m^3.
    pub alpha0: f64,
    /// Oscillator frequency of the polarizability, rad/s.
    pub omega0: f64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        let a0 = BOHR_RADIUS / 100.0;
        Self {
            v: 20.0,
            length: 1e-2,
            mass: 3.344e-27,
            v_transverse: 0.0,
            alpha0: 4.5 * a0.powi(3),
            omega0: ev_to_rad_s(11.65),
        }
    }
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0 && self.length > 0.0 && self.mass > 0.0) {
            return domain("need v > 0, L > 0 and mass > 0");
        }
        if !(self.alpha0 >= 0.0 && self.omega0 > 0.0 && self.v_transverse.is_finite()) {
            return domain("need alpha0 >= 0, omega0 > 0 and a finite transverse velocity");
        }
        Ok(())
    }

    /// Time of flight `L / v`, s.
    pub fn flight_time(&self) -> f64 {
        self.length / self.v
    }

    /// `alpha(i xi)`, cm^3.
    fn alpha_cgs(&self, xi: f64) -> f64 {
        self.alpha0 * 1e6 / (1.0 + (xi / self.omega0).powi(2))
    }
}

/// `[U, dU/dz]` in erg and erg/cm at a Gaussian point.
fn cp_cgs(setup: &CavitySetup, p: &Point, beam: &BeamConfig, quad: &QuadratureSpec) -> Result<[Estimate; 2]> {
    let step = matsubara_step(setup.t);
    let xi_max = evanescent_cutoff(p, quad) * crate::units::C;
    let term = |xi: f64| -> Result<[Estimate; 2]> {
        let alpha = beam.alpha_cgs(xi);
        let [t, dt] = electric_trace_imag_with_gradient(setup, xi, p, quad)?;
        Ok([t.scale(alpha), dt.scale(alpha)])
    };
    let mut sum = [Estimate::ZERO; 2];
    let mut n = 0;
    while n <= EXPLICIT_TERMS && (n as f64) * step < xi_max {
        let w = if n == 0 { 0.5 } else { 1.0 };
        let r = term(n as f64 * step)?;
        sum[0] = sum[0] + r[0].scale(w);
        sum[1] = sum[1] + r[1].scale(w);
        n += 1;
    }
    let lo = (n as f64 - 0.5) * step;
    if n > EXPLICIT_TERMS && lo < xi_max {
        let failure = RefCell::new(None);
        let abs_tol = [
            quad.rel_tol * sum[0].value.abs() * step + f64::MIN_POSITIVE,
            quad.rel_tol * sum[1].value.abs() * step + f64::MIN_POSITIVE,
        ];
        let tail = integrate(
            |xi| match term(xi) {
                Ok([t, dt]) => [t.value, dt.value],
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    [0.0; 2]
                }
            },
            &geometric_breaks(lo, xi_max, 4),
            quad.rel_tol,
            abs_tol,
            quad.max_panels,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        sum[0] = sum[0] + tail[0].scale(1.0 / step);
        sum[1] = sum[1] + tail[1].scale(1.0 / step);
    }
    let kt = K_B * setup.t;
    Ok([sum[0].scale(-kt), sum[1].scale(-kt)])
}

/// Casimir-Polder potential at `z` (m), J. Negative (attractive).
pub fn cp_potential(setup: &CavitySetup, z: f64, beam: &BeamConfig, quad: &QuadratureSpec) -> Result<Estimate> {
    beam.validate()?;
    let p = Point::new(setup, z)?;
    Ok(cp_cgs(setup, &p, beam, quad)?[0].scale(1e-7))
}

/// `dU/dz` at `z` (m), J/m.
pub fn cp_gradient(setup: &CavitySetup, z: f64, beam: &BeamConfig, quad: &QuadratureSpec) -> Result<Estimate> {
    beam.validate()?;
    let p = Point::new(setup, z)?;
    Ok(cp_cgs(setup, &p, beam, quad)?[1].scale(1e-5))
}

/// Tabulated potential across the gap, SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    pub a: f64,
    pub z: Vec<f64>,
    /// J.
    pub u: Vec<f64>,
    /// J/m.
    pub du: Vec<f64>,
}

impl PotentialTable {
    pub fn build(setup: &CavitySetup, beam: &BeamConfig, quad: &QuadratureSpec) -> Result<Self> {
        beam.validate()?;
        let a = setup.a;
        if a <= 2.0 * TABLE_MIN_DISTANCE {
            return domain("gap too narrow for the potential table");
        }
        // geometric in the distance to the nearer wall
        let half = a / 2.0;
        let d: Vec<f64> = (0..NODES_PER_HALF)
            .map(|k| TABLE_MIN_DISTANCE * (half / TABLE_MIN_DISTANCE).powf(k as f64 / (NODES_PER_HALF - 1) as f64))
            .collect();
        let mut z: Vec<f64> = d.clone();
        z.extend(d.iter().rev().skip(1).map(|x| a - x));
        let mut u = Vec::with_capacity(z.len());
        let mut du = Vec::with_capacity(z.len());
        for &zk in &z {
            let p = Point::new(setup, zk)?;
            let [v, g] = cp_cgs(setup, &p, beam, quad)?;
            u.push(v.value * 1e-7);
            du.push(g.value * 1e-5);
        }
        Ok(Self { a, z, u, du })
    }

    fn wall_law(&self, left: bool) -> (f64, f64, f64) {
        let (d0, u0, slope) = if left {
            (self.z[0], self.u[0], self.du[0])
        } else {
            let n = self.z.len() - 1;
            (self.a - self.z[n], self.u[n], -self.du[n])
        };
        // U(d) = u0 (d0 / d)^p with dU/dd = slope at d0
        (d0, u0, -d0 * slope / u0)
    }

    /// `(U, dU/dz)` at `z`, J and J/m.
    pub fn eval(&self, z: f64) -> (f64, f64) {
        let n = self.z.len();
        if z < self.z[0] || z > self.z[n - 1] {
            let left = z < self.z[0];
            let (d0, u0, p) = self.wall_law(left);
            let d = if left { z } else { self.a - z }.max(f64::MIN_POSITIVE);
            let u = u0 * (d0 / d).powf(p);
            let du_dd = -p * u / d;
            return (u, if left { du_dd } else { -du_dd });
        }
        let k = match self.z.partition_point(|&x| x <= z) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let (z0, z1) = (self.z[k], self.z[k + 1]);
        let h = z1 - z0;
        let t = (z - z0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (u0, u1, m0, m1) = (self.u[k], self.u[k + 1], self.du[k] * h, self.du[k + 1] * h);
        let u = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * m1;
        let du = ((6.0 * t2 - 6.0 * t) * u0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * u1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (u, du)
    }

    /// Curvature at the centre from the tabulated slopes, J/m^2.
    pub fn center_curvature(&self) -> f64 {
        let m = self.z.len() / 2;
        (self.du[m + 1] - self.du[m - 1]) / (self.z[m + 1] - self.z[m - 1])
    }
}

struct Motion<'a> {
    table: &'a PotentialTable,
    mass: f64,
    hit: &'a Cell<Option<f64>>,
}

impl System<f64, Vector2<f64>> for Motion<'_> {
    fn system(&self, _t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        // force frozen inside the contact layer keeps the right-hand side continuous
        let z = y[0].clamp(CONTACT_DISTANCE, self.table.a - CONTACT_DISTANCE);
        dy[0] = y[1];
        dy[1] = -self.table.eval(z).1 / self.mass;
    }

    fn solout(&mut self, t: f64, y: &Vector2<f64>, _dy: &Vector2<f64>) -> bool {
        if y[0].min(self.table.a - y[0]) <= CONTACT_DISTANCE {
            self.hit.set(Some(t));
            return true;
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOutcome {
    pub survived: bool,
    /// Time of wall contact, s.
    pub hit_time: Option<f64>,
    /// Final transverse position, m.
    pub z_final: f64,
    /// `|E_end - E_start| / |E_start|` for surviving atoms.
    pub energy_drift: f64,
}

/// Integrates `m z'' = -dU/dz` over the flight time from `z0`.
pub fn trajectory(table: &PotentialTable, beam: &BeamConfig, z0: f64) -> Result<TrajectoryOutcome> {
    beam.validate()?;
    if !(z0 > 0.0 && z0 < table.a) {
        return domain("launch point must lie inside the gap");
    }
    let tau = beam.flight_time();
    let energy = |z: f64, v: f64| 0.5 * beam.mass * v * v + table.eval(z).0;
    let e0 = energy(z0, beam.v_transverse);
    let hit = Cell::new(None);
    let mut solver = Dopri5::from_param(
        Motion { table, mass: beam.mass, hit: &hit },
        0.0,
        tau,
        tau,
        Vector2::new(z0, beam.v_transverse),
        1e-11,
        1e-18,
        0.9,
        0.04,
        0.2,
        10.0,
        tau / 1e4,
        0.0,
        10_000_000,
        1000,
        ode_solvers::OutputType::Sparse,
    );
    let stats = solver.integrate();
    let hit = hit.get();
    if stats.is_err() && hit.is_none() {
        return Err(Error::Trajectory(format!("integration from z0 = {z0:e} m failed: {:?}", stats.err())));
    }
    let (_, ys) = solver.results().get();
    let y = ys.last().copied().unwrap_or(Vector2::new(z0, beam.v_transverse));
    let survived = hit.is_none();
    let energy_drift = if survived { (energy(y[0], y[1]) - e0).abs() / e0.abs() } else { 0.0 };
    Ok(TrajectoryOutcome {
        survived,
        hit_time: hit,
        z_final: y[0],
        energy_drift,
    })
}

/// Largest offset `d` on one side (`sign = +-1`) such that every launch
/// within `|z0 - a/2| <= d` survives.
/// Relative resolution of the bisection for the channel edge.
pub const CHANNEL_REL_TOL: f64 = 1e-5;

fn survival_offset(table: &PotentialTable, beam: &BeamConfig, sign: f64) -> Result<f64> {
    let half = table.a / 2.0;
    let survives = |d: f64| trajectory(table, beam, half + sign * d).map(|o| o.survived);
    let top = half - 2.0 * CONTACT_DISTANCE;
    if survives(top)? {
        return Ok(half);
    }
    if !survives(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, top);
    while hi - lo > CHANNEL_REL_TOL * hi.max(1e-12) {
        let mid = 0.5 * (lo + hi);
        if survives(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Width `H` of the band around the centre whose atoms cross the cavity.
pub fn channel_width(setup: &CavitySetup, beam: &BeamConfig, quad: &QuadratureSpec) -> Result<f64> {
    let table = PotentialTable::build(setup, beam, quad)?;
    channel_width_from(&table, beam)
}

pub fn channel_width_from(table: &PotentialTable, beam: &BeamConfig) -> Result<f64> {
    let up = survival_offset(table, beam, 1.0)?;
    let down = survival_offset(table, beam, -1.0)?;
    Ok(2.0 * up.min(down))
}

/// Fraction of a uniformly illuminated entrance that survives, `H / a`.
pub fn survival_fraction(setup: &CavitySetup, beam: &BeamConfig, quad: &QuadratureSpec) -> Result<f64> {
    Ok(channel_width(setup, beam, quad)? / setup.a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub labels: Vec<StateLabel>,
    pub populations: PopulationVector,
    pub initial: StateLabel,
    /// `1 - p(initial)`.
    pub transition_probability: f64,
    pub channel_width: f64,
    pub survival_fraction: f64,
    pub flight_time: f64,
    pub rates: RateMatrix,
}

/// Exit populations of atoms prepared in `initial` that cross the cavity,
/// with rates evaluated at the centre.
pub fn run_experiment(
    setup: &CavitySetup,
    beam: &BeamConfig,
    b: f64,
    theta: f64,
    initial: StateLabel,
    quad: &QuadratureSpec,
) -> Result<ExperimentResult> {
    run_experiment_atom(setup, beam, &AtomConstants::deuterium(), b, theta, initial, quad)
}

/// [`run_experiment`] for another hydrogen-like atom.
pub fn run_experiment_atom(
    setup: &CavitySetup,
    beam: &BeamConfig,
    atom: &AtomConstants,
    b: f64,
    theta: f64,
    initial: StateLabel,
    quad: &QuadratureSpec,
) -> Result<ExperimentResult> {
    beam.validate()?;
    let system = diagonalize_atom(atom, b, theta)?;
    let start = system
        .index_of(initial)
        .ok_or_else(|| Error::Domain(format!("no sublevel {initial}")))?;
    let rates = cavity_rate(&system, setup, setup.a / 2.0, quad)?;
    let tau = beam.flight_time();
    let populations = evolve(&rates, &PopulationVector::pure(system.dimension(), start), tau)?;
    let h = channel_width(setup, beam, quad)?;
    Ok(ExperimentResult {
        labels: system.labels.clone(),
        transition_probability: 1.0 - populations.p[start],
        populations,
        initial,
        channel_width: h,
        survival_fraction: h / setup.a,
        flight_time: tau,
        rates,
    })
}

/// Non-retarded coefficient `C3 = (hbar / 4 pi) int alpha(i xi) dxi` of
/// `U = -C3 / d^3` near a perfect mirror, J m^3.
pub fn c3_coefficient(beam: &BeamConfig) -> f64 {
    HBAR * 1e-7 * beam.omega0 * beam.alpha0 / 8.0
}
