//! Hyperfine-Zeeman sublevels of a hydrogen-like ground state (`J = 1/2`),
//! their magnetic-dipole matrix elements, thermal transition rates in free
//! space and inside the cavity, and the rate equation for the populations.
//!
//! The field `B` lies in the (y, z) plane at an angle `theta` from the
//! mirror normal `z`: `zeta = (0, sin theta, cos theta)`. The atom moves
//! along `x`; `eta = (0, cos theta, -sin theta)` completes the right-handed
//! frame `(x, eta, zeta)`. Energies are in erg, moments in erg/G.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::greens::{free_space_trace_cgs, non_negative, split_traces_real, CavitySetup, Point};
use crate::quadrature::{Estimate, QuadratureSpec};
use crate::units::{bose, EV, HBAR, MU_B, MU_N};

/// Level structure constants of a hydrogen-like atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomConstants {
    pub name: String,
    /// Nuclear spin `I` (integer or half-integer).
    pub nuclear_spin: f64,
    /// Nuclear g-factor; the nuclear moment is `g_nuclear mu_N I`.
    pub g_nuclear: f64,
    pub g_electron: f64,
    /// Zero-field splitting between `F = I + 1/2` and `F = I - 1/2`, eV.
    pub w0_ev: f64,
}

impl AtomConstants {
    pub fn deuterium() -> Self {
        Self {
            name: "D".into(),
            nuclear_spin: 1.0,
            g_nuclear: 0.857_407,
            g_electron: 2.0023,
            w0_ev: 1.354e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let two_i = 2.0 * self.nuclear_spin;
        if !(self.nuclear_spin > 0.0 && (two_i - two_i.round()).abs() < 1e-12) {
            return domain("nuclear spin must be a positive multiple of 1/2");
        }
        if !(self.w0_ev > 0.0 && self.g_electron.is_finite() && self.g_nuclear.is_finite()) {
            return domain("need w0 > 0 and finite g-factors");
        }
        Ok(())
    }

    /// Zero-field splitting, erg.
    pub fn w0(&self) -> f64 {
        self.w0_ev * EV
    }

    /// Contact coupling `A` with `A (I + 1/2) = W0`.
    pub fn coupling(&self) -> f64 {
        self.w0() / (self.nuclear_spin + 0.5)
    }

    fn two_i(&self) -> i32 {
        (2.0 * self.nuclear_spin).round() as i32
    }

    /// Number of sublevels `2 (2 I + 1)`.
    pub fn dimension(&self) -> usize {
        2 * (self.two_i() as usize + 1)
    }
}

/// Zero-field quantum numbers `(F, m_F)`, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateLabel {
    pub two_f: i32,
    pub two_m: i32,
}

impl StateLabel {
    pub fn new(f: f64, m: f64) -> Self {
        Self {
            two_f: (2.0 * f).round() as i32,
            two_m: (2.0 * m).round() as i32,
        }
    }

    pub fn f(&self) -> f64 {
        self.two_f as f64 / 2.0
    }

    pub fn m(&self) -> f64 {
        self.two_m as f64 / 2.0
    }
}

fn half(two: i32) -> String {
    if two % 2 == 0 {
        format!("{}", two / 2)
    } else {
        format!("{two}/2")
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", half(self.two_f), half(self.two_m))
    }
}

fn parse_half(s: &str) -> Option<i32> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, "2")) => n.trim().parse().ok(),
        Some(_) => None,
        None => s.parse::<i32>().ok().map(|v| 2 * v),
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    /// Parses `"3/2,-1/2"` or `"(3/2, -1/2)"`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let bad = || Error::Domain(format!("cannot parse state label {s:?}"));
        let (f, m) = t.split_once(',').ok_or_else(bad)?;
        Ok(Self {
            two_f: parse_half(f).ok_or_else(bad)?,
            two_m: parse_half(m).ok_or_else(bad)?,
        })
    }
}

/// Sublevel order: `F = I + 1/2` from `m = F` down to `-F`, then
/// `F = I - 1/2` from `m = -F` up to `F` (top to bottom at weak field for a
/// positive electron g-factor).
fn label_order(two_i: i32) -> Vec<StateLabel> {
    let upper = two_i + 1;
    let lower = two_i - 1;
    let mut v: Vec<StateLabel> = (0..=upper)
        .map(|k| StateLabel { two_f: upper, two_m: upper - 2 * k })
        .collect();
    if lower >= 0 {
        v.extend((0..=lower).map(|k| StateLabel { two_f: lower, two_m: -lower + 2 * k }));
    }
    v
}

/// Uncoupled basis `|m_I, m_S>`, `m_I` from `I` down, `m_S` from `1/2` down.
fn basis(two_i: i32) -> Vec<(i32, i32)> {
    let mut b = Vec::new();
    for k in 0..=two_i {
        for two_ms in [1, -1] {
            b.push((two_i - 2 * k, two_ms));
        }
    }
    b
}

/// Spin operators `(J_z, J_+)` for the nuclear (`which = 0`) or electron
/// (`which = 1`) spin in the uncoupled basis.
fn spin_ops(two_i: i32, which: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let b = basis(two_i);
    let n = b.len();
    let mut jz = DMatrix::zeros(n, n);
    let mut jp = DMatrix::zeros(n, n);
    let (two_j, pick): (i32, fn(&(i32, i32)) -> i32) = if which == 0 {
        (two_i, |s| s.0)
    } else {
        (1, |s| s.1)
    };
    let j = two_j as f64 / 2.0;
    for (c, s) in b.iter().enumerate() {
        let m = pick(s) as f64 / 2.0;
        jz[(c, c)] = m;
        if pick(s) < two_j {
            let raised = if which == 0 { (s.0 + 2, s.1) } else { (s.0, s.1 + 2) };
            let r = b.iter().position(|x| *x == raised).unwrap();
            jp[(r, c)] = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        }
    }
    (jz, jp)
}

/// Eigen-decomposed hyperfine-Zeeman Hamiltonian at one field.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperfineSystem {
    pub constants: AtomConstants,
    /// Field magnitude, G.
    pub b: f64,
    /// Angle between the field and the mirror normal, rad.
    pub theta: f64,
    /// Energies in [`label_order`], erg.
    pub energies: Vec<f64>,
    pub labels: Vec<StateLabel>,
    /// Columns are eigenvectors in the uncoupled basis, in label order.
    pub eigenvectors: DMatrix<f64>,
}

/// Diagonalizes deuterium at field `b` (G) with orientation `theta`.
pub fn diagonalize(b: f64, theta: f64) -> Result<HyperfineSystem> {
    diagonalize_atom(&AtomConstants::deuterium(), b, theta)
}

pub fn diagonalize_atom(atom: &AtomConstants, b: f64, theta: f64) -> Result<HyperfineSystem> {
    atom.validate()?;
    if !(b >= 0.0 && b.is_finite() && theta.is_finite()) {
        return domain("need B >= 0 and finite theta");
    }
    let two_i = atom.two_i();
    let (iz, ip) = spin_ops(two_i, 0);
    let (sz, sp) = spin_ops(two_i, 1);
    // I.S = Iz Sz + (I+ S- + I- S+) / 2
    let i_dot_s = &iz * &sz + (&ip * sp.transpose() + ip.transpose() * &sp) * 0.5;
    let h = i_dot_s * atom.coupling() - &iz * (atom.g_nuclear * MU_N * b) + &sz * (atom.g_electron * MU_B * b);

    let basis = basis(two_i);
    let labels = label_order(two_i);
    let n = basis.len();
    let mut energies = vec![0.0; n];
    let mut vectors = DMatrix::zeros(n, n);
    let mut two_m = two_i + 1;
    while two_m >= -(two_i + 1) {
        let idx: Vec<usize> = (0..n).filter(|&k| basis[k].0 + basis[k].1 == two_m).collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
        let eig = SymmetricEigen::new(block);
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
        // within a block of fixed m the upper state continues from F = I + 1/2
        for (rank, &k) in order.iter().enumerate() {
            let two_f = if rank == 0 {
                two_i + 1
            } else {
                two_i - 1
            };
            let slot = labels
                .iter()
                .position(|l| l.two_f == two_f && l.two_m == two_m)
                .expect("label exists");
            energies[slot] = eig.eigenvalues[k];
            let mut col = eig.eigenvectors.column(k).into_owned();
            // fix the arbitrary sign: largest component positive
            let big = col.iamax();
            if col[big] < 0.0 {
                col = -col;
            }
            for (r, &row) in idx.iter().enumerate() {
                vectors[(row, slot)] = col[r];
            }
        }
        two_m -= 2;
    }
    Ok(HyperfineSystem {
        constants: atom.clone(),
        b,
        theta,
        energies,
        labels,
        eigenvectors: vectors,
    })
}

impl HyperfineSystem {
    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: StateLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    /// `(E_i - E_f) / hbar`, rad/s; positive for downward `i -> f`.
    pub fn frequency(&self, i: usize, f: usize) -> f64 {
        (self.energies[i] - self.energies[f]) / HBAR
    }

    /// The dimensionless field `x = (g_e mu_B + g_N mu_N) B / W0`.
    pub fn field_parameter(&self) -> f64 {
        let c = &self.constants;
        (c.g_electron * MU_B + c.g_nuclear * MU_N) * self.b / c.w0()
    }

    /// Unit vector along the field in the lab frame.
    pub fn zeta(&self) -> [f64; 3] {
        [0.0, self.theta.sin(), self.theta.cos()]
    }
}

/// Pair of states with its transition frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub initial: StateLabel,
    pub final_state: StateLabel,
    /// `(E_i - E_f) / hbar`, rad/s.
    pub omega: f64,
}

/// All `n (n - 1) / 2` pairs `i < f` in label order.
pub fn transition_frequencies(system: &HyperfineSystem) -> Vec<Transition> {
    let n = system.dimension();
    let mut v = Vec::new();
    for i in 0..n {
        for f in i + 1..n {
            v.push(Transition {
                initial: system.labels[i],
                final_state: system.labels[f],
                omega: system.frequency(i, f),
            });
        }
    }
    v
}

/// Breit-Rabi energy of `(F, m)` for `J = 1/2`, erg.
pub fn breit_rabi(atom: &AtomConstants, b: f64, label: StateLabel) -> f64 {
    let w0 = atom.w0();
    let i = atom.nuclear_spin;
    let m = label.m();
    let x = (atom.g_electron * MU_B + atom.g_nuclear * MU_N) * b / w0;
    let upper = label.two_f > atom.two_i();
    let root = if label.two_m.abs() == atom.two_i() + 1 {
        // stretched states: analytic continuation of the square root
        1.0 + x * m.signum()
    } else {
        (1.0 + 4.0 * m * x / (2.0 * i + 1.0) + x * x).sqrt()
    };
    let sign = if upper { 1.0 } else { -1.0 };
    -w0 / (2.0 * (2.0 * i + 1.0)) - atom.g_nuclear * MU_N * b * m + sign * w0 / 2.0 * root
}

/// Matrix elements `<f| mu |i>` in the dressed basis, erg/G.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleMatrices {
    /// Along the beam `x`.
    pub mu_x: DMatrix<Complex64>,
    /// Along `eta`, the transverse direction in the plane of `B` and `z`.
    pub mu_y: DMatrix<Complex64>,
    /// Along the field.
    pub mu_zeta: DMatrix<Complex64>,
}

impl DipoleMatrices {
    pub fn zeros(n: usize) -> Self {
        Self {
            mu_x: DMatrix::zeros(n, n),
            mu_y: DMatrix::zeros(n, n),
            mu_zeta: DMatrix::zeros(n, n),
        }
    }

    /// `(mu_x, mu_eta, mu_zeta)` element `<f|.|i>`.
    pub fn element(&self, f: usize, i: usize) -> [Complex64; 3] {
        [self.mu_x[(f, i)], self.mu_y[(f, i)], self.mu_zeta[(f, i)]]
    }
}

pub fn dipole_matrices(system: &HyperfineSystem) -> DipoleMatrices {
    let c = &system.constants;
    let two_i = c.two_i();
    let (iz, ip) = spin_ops(two_i, 0);
    let (sz, sp) = spin_ops(two_i, 1);
    let gi = c.g_nuclear * MU_N;
    let gs = c.g_electron * MU_B;
    // mu = g_N mu_N I - g_e mu_B S
    let mz = &iz * gi - &sz * gs;
    let mp = &ip * gi - &sp * gs;
    let mm = mp.transpose();
    let v = &system.eigenvectors;
    let dress = |m: DMatrix<f64>| (v.transpose() * m * v).map(|x| Complex64::new(x, 0.0));
    let half_sum = dress((&mp + &mm) * 0.5);
    let half_diff = dress((&mp - &mm) * 0.5);
    DipoleMatrices {
        mu_x: half_sum,
        // J_y = (J+ - J-) / 2i
        mu_y: half_diff.map(|z| z / Complex64::i()),
        mu_zeta: dress(mz),
    }
}

/// Where a rate matrix was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RateContext {
    Free,
    Cavity { a: f64, z0: f64, mirror: String },
}

/// `gamma[(f, i)]` is the rate `i -> f`, s^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub gamma: DMatrix<f64>,
    pub error: DMatrix<f64>,
    pub labels: Vec<StateLabel>,
    pub t: f64,
    pub context: RateContext,
}

impl RateMatrix {
    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    /// Total rate out of state `i`.
    pub fn total_rate(&self, i: usize) -> f64 {
        (0..self.dimension()).filter(|&f| f != i).map(|f| self.gamma[(f, i)]).sum()
    }

    pub fn total_rate_of(&self, label: StateLabel) -> Option<f64> {
        self.labels.iter().position(|l| *l == label).map(|i| self.total_rate(i))
    }

    pub fn max_total_rate(&self) -> f64 {
        (0..self.dimension()).map(|i| self.total_rate(i)).fold(0.0, f64::max)
    }

    /// `G_nn = -sum_k Gamma_kn`, `G_nk = Gamma_nk`.
    pub fn generator(&self) -> DMatrix<f64> {
        let n = self.dimension();
        let mut g = self.gamma.clone();
        for i in 0..n {
            g[(i, i)] = -self.total_rate(i);
        }
        g
    }
}

/// Bose-weighted prefactor `2 / (hbar (1 - e^{-hbar w / k T}))` for either
/// sign of `w`, written with the occupation at `|w|`.
fn thermal_weight(omega: f64, t: f64) -> f64 {
    let n = bose(omega.abs(), t);
    2.0 / HBAR * if omega > 0.0 { n + 1.0 } else { n }
}

/// Pairs closer than this are degenerate and exchange no energy.
const DEGENERATE: f64 = 1.0;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain("need T > 0")
    }
}

/// Free-space rates with `Im H0 = (2/3) (w/c)^3`.
pub fn free_rate(system: &HyperfineSystem, t: f64) -> Result<RateMatrix> {
    free_rate_with(system, &dipole_matrices(system), t)
}

pub fn free_rate_with(system: &HyperfineSystem, mu: &DipoleMatrices, t: f64) -> Result<RateMatrix> {
    check_t(t)?;
    let n = system.dimension();
    let mut gamma = DMatrix::zeros(n, n);
    for i in 0..n {
        for f in 0..n {
            let w = system.frequency(i, f);
            if f == i || w.abs() < DEGENERATE {
                continue;
            }
            let m2: f64 = mu.element(f, i).iter().map(|z| z.norm_sqr()).sum();
            gamma[(f, i)] = thermal_weight(w, t) * free_space_trace_cgs(w.abs()) * m2;
        }
    }
    Ok(RateMatrix {
        gamma,
        error: DMatrix::zeros(n, n),
        labels: system.labels.clone(),
        t,
        context: RateContext::Free,
    })
}

/// The angular contraction of a transition moment with the cavity traces
/// `(H_perp, H_par)`.
pub fn geometric_factor(h_perp: f64, h_par: f64, theta: f64, mu_x2: f64, mu_zeta2: f64) -> f64 {
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    (h_perp * (1.0 + c2) + h_par * s2) * mu_x2 + (h_perp * s2 + h_par * c2) * mu_zeta2
}

/// Rates at `z0` (m) inside the cavity, from the cavity traces at each
/// transition frequency.
pub fn cavity_rate(
    system: &HyperfineSystem,
    setup: &CavitySetup,
    z0: f64,
    quad: &QuadratureSpec,
) -> Result<RateMatrix> {
    cavity_rate_with(system, &dipole_matrices(system), setup, z0, quad)
}

pub fn cavity_rate_with(
    system: &HyperfineSystem,
    mu: &DipoleMatrices,
    setup: &CavitySetup,
    z0: f64,
    quad: &QuadratureSpec,
) -> Result<RateMatrix> {
    check_t(setup.t)?;
    let p = Point::new(setup, z0)?;
    let n = system.dimension();
    let mut gamma = DMatrix::zeros(n, n);
    let mut error = DMatrix::zeros(n, n);
    for i in 0..n {
        for f in i + 1..n {
            let w = system.frequency(i, f);
            if w.abs() < DEGENERATE {
                continue;
            }
            let tr = split_traces_real(setup, w.abs(), &p, quad)?;
            let free = Estimate::new(free_space_trace_cgs(w.abs()), 0.0);
            let hp = non_negative(tr.h_perp() + free);
            let hz = non_negative(tr.h_par + free);
            for (from, to, sign) in [(i, f, 1.0), (f, i, -1.0)] {
                let [mx, _, mz] = mu.element(to, from);
                let (x2, z2) = (mx.norm_sqr(), mz.norm_sqr());
                let k = thermal_weight(sign * w.abs(), setup.t);
                gamma[(to, from)] = k * geometric_factor(hp.value, hz.value, system.theta, x2, z2);
                error[(to, from)] = k * geometric_factor(hp.error, hz.error, system.theta, x2, z2);
            }
        }
    }
    let mirror = setup
        .mirror1
        .model()
        .map(|m| format!("{} {:?}", m.name, m.kind))
        .unwrap_or_else(|| "constant".into());
    Ok(RateMatrix {
        gamma,
        error,
        labels: system.labels.clone(),
        t: setup.t,
        context: RateContext::Cavity {
            a: setup.a,
            z0,
            mirror,
        },
    })
}

/// Occupation probabilities in label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector {
    pub p: Vec<f64>,
}

impl PopulationVector {
    /// All weight in state `index`.
    pub fn pure(n: usize, index: usize) -> Self {
        let mut p = vec![0.0; n];
        p[index] = 1.0;
        Self { p }
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.p.iter().sum();
        if self.p.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > 1e-10 {
            return domain("populations must be non-negative and sum to 1");
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Boltzmann distribution over `energies` at `t`.
    pub fn gibbs(energies: &[f64], t: f64) -> Self {
        let kt = crate::units::K_B * t;
        let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = energies.iter().map(|e| (-(e - e0) / kt).exp()).collect();
        let z: f64 = w.iter().sum();
        Self {
            p: w.into_iter().map(|x| x / z).collect(),
        }
    }
}

/// `p(tau) = exp(tau G) p0`.
pub fn evolve(rates: &RateMatrix, p0: &PopulationVector, tau: f64) -> Result<PopulationVector> {
    if p0.p.len() != rates.dimension() {
        return domain("population vector and rate matrix differ in size");
    }
    p0.validate()?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return domain("need tau >= 0");
    }
    if tau == 0.0 {
        return Ok(p0.clone());
    }
    let prop = (rates.generator() * tau).exp();
    let p = prop * DVector::from_column_slice(&p0.p);
    // exp of a rate generator is stochastic; clip rounding below zero
    Ok(PopulationVector {
        p: p.iter().map(|&x| x.max(0.0)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(f: f64, m: f64) -> StateLabel {
        StateLabel::new(f, m)
    }

    #[test]
    fn zero_field_splitting() {
        let s = diagonalize(0.0, 0.0).unwrap();
        let w0 = AtomConstants::deuterium().w0();
        for k in 0..4 {
            assert!((s.energies[k] - w0 / 3.0).abs() < 1e-12 * w0);
        }
        for k in 4..6 {
            assert!((s.energies[k] + 2.0 * w0 / 3.0).abs() < 1e-12 * w0);
        }
        let f = s.frequency(0, 5) / (2.0 * std::f64::consts::PI);
        assert!((f / 327.4e6 - 1.0).abs() < 1e-3, "{f}");
        for t in transition_frequencies(&s) {
            assert!(t.omega.abs() < 1e-3 || (t.omega / (w0 / HBAR) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn labels_and_order() {
        let s = diagonalize(10.0, 0.0).unwrap();
        let want = [l(1.5, 1.5), l(1.5, 0.5), l(1.5, -0.5), l(1.5, -1.5), l(0.5, -0.5), l(0.5, 0.5)];
        assert_eq!(s.labels, want);
        for w in s.energies.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert_eq!(l(1.5, -0.5).to_string(), "(3/2,-1/2)");
        assert_eq!("(3/2, -1/2)".parse::<StateLabel>().unwrap(), l(1.5, -0.5));
        assert_eq!("1,0".parse::<StateLabel>().unwrap(), l(1.0, 0.0));
        assert!("3/4,1".parse::<StateLabel>().is_err());
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_conserve_m() {
        let s = diagonalize(137.0, 0.3).unwrap();
        let v = &s.eigenvectors;
        let id = v.transpose() * v;
        assert!((id - DMatrix::identity(6, 6)).amax() < 1e-12);
        let b = basis(2);
        for (k, lab) in s.labels.iter().enumerate() {
            for (r, (mi, ms)) in b.iter().enumerate() {
                if mi + ms != lab.two_m {
                    assert_eq!(v[(r, k)], 0.0);
                }
            }
        }
    }

    #[test]
    fn matches_breit_rabi() {
        let atom = AtomConstants::deuterium();
        let unit = (atom.g_electron * MU_B + atom.g_nuclear * MU_N) / atom.w0();
        for k in 0..=40 {
            let x = 4.0 * k as f64 / 40.0;
            let s = diagonalize(x / unit, 0.0).unwrap();
            assert!((s.field_parameter() - x).abs() < 1e-12);
            for (e, lab) in s.energies.iter().zip(&s.labels) {
                let br = breit_rabi(&atom, s.b, *lab);
                assert!((e - br).abs() <= 1e-10 * br.abs().max(atom.w0()), "{lab} x={x}");
            }
        }
    }

    #[test]
    fn dipoles_hermitian_and_selection_rules() {
        let s = diagonalize(20.0, 0.7).unwrap();
        let d = dipole_matrices(&s);
        for m in [&d.mu_x, &d.mu_y, &d.mu_zeta] {
            let diff = (m - m.adjoint()).map(|z| z.norm()).max();
            let norm = m.map(|z| z.norm()).max();
            assert!(diff < 1e-14 * norm);
        }
        for f in 0..6 {
            for i in 0..6 {
                let dm = (s.labels[f].two_m - s.labels[i].two_m).abs();
                if dm != 2 {
                    assert_eq!(d.mu_x[(f, i)].norm(), 0.0);
                    assert_eq!(d.mu_y[(f, i)].norm(), 0.0);
                }
                if dm != 0 {
                    assert_eq!(d.mu_zeta[(f, i)].norm(), 0.0);
                }
                // |mu_x| = |mu_eta| for every pair
                assert!((d.mu_x[(f, i)].norm() - d.mu_y[(f, i)].norm()).abs() < 1e-14 * MU_B);
            }
        }
        // from (3/2,3/2) only the two m = 1/2 states are reachable transversally
        let reach: Vec<_> = (0..6).filter(|&f| d.mu_x[(f, 0)].norm() > 0.0).map(|f| s.labels[f]).collect();
        assert_eq!(reach, vec![l(1.5, 0.5), l(0.5, 0.5)]);
    }

    #[test]
    fn stretched_moment_is_field_independent() {
        let atom = AtomConstants::deuterium();
        let want = atom.g_nuclear * MU_N - atom.g_electron * MU_B / 2.0;
        for b in [0.0, 10.0, 1e3, 1e5] {
            let d = dipole_matrices(&diagonalize(b, 0.0).unwrap());
            assert!((d.mu_zeta[(0, 0)].re - want).abs() < 1e-13 * want.abs());
        }
    }

    #[test]
    fn free_rates_obey_detailed_balance() {
        for b in [0.5, 10.0, 100.0, 1e3, 1e4] {
            let s = diagonalize(b, 0.4).unwrap();
            let r = free_rate(&s, 300.0).unwrap();
            for i in 0..6 {
                for f in i + 1..6 {
                    let down = r.gamma[(f, i)];
                    let up = r.gamma[(i, f)];
                    if down == 0.0 {
                        assert_eq!(up, 0.0);
                        continue;
                    }
                    let x = HBAR * s.frequency(i, f) / (crate::units::K_B * 300.0);
                    assert!((up / down / (-x).exp() - 1.0).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn zeroed_moments_give_no_rates() {
        let s = diagonalize(10.0, 0.0).unwrap();
        let r = free_rate_with(&s, &DipoleMatrices::zeros(6), 300.0).unwrap();
        assert_eq!(r.gamma.amax(), 0.0);
    }

    #[test]
    fn geometric_factor_is_a_tensor_contraction() {
        let s = diagonalize(20.0, 0.0).unwrap();
        let d = dipole_matrices(&s);
        let (hp, hz) = (3.0, 7.0);
        for theta in [0.0, 0.3, 1.2, std::f64::consts::FRAC_PI_2, 2.5] {
            let (st, ct) = (f64::sin(theta), f64::cos(theta));
            for i in 0..6 {
                for f in 0..6 {
                    let [mx, me, mz] = d.element(f, i);
                    // lab components of x mu_x + eta mu_eta + zeta mu_zeta
                    let lab = [mx, me * ct + mz * st, -me * st + mz * ct];
                    let full = hp * (lab[0].norm_sqr() + lab[1].norm_sqr()) + hz * lab[2].norm_sqr();
                    let g = geometric_factor(hp, hz, theta, mx.norm_sqr(), mz.norm_sqr());
                    assert!((full - g).abs() <= 1e-12 * full.abs().max(1e-60));
                }
            }
        }
    }

    #[test]
    fn evolve_limits() {
        let s = diagonalize(10.0, 0.0).unwrap();
        let r = free_rate(&s, 300.0).unwrap();
        let p0 = PopulationVector::pure(6, 2);
        assert_eq!(evolve(&r, &p0, 0.0).unwrap(), p0);
        let mut zero = r.clone();
        zero.gamma.fill(0.0);
        assert_eq!(evolve(&zero, &p0, 1e6).unwrap().p, p0.p);
        let g = r.generator();
        for i in 0..6 {
            assert!(g.column(i).sum().abs() <= 1e-14 * r.total_rate(i));
        }
    }

    #[test]
    fn long_time_limit_is_gibbs() {
        let s = diagonalize(10.0, 0.0).unwrap();
        let r = free_rate(&s, 300.0).unwrap();
        // the slowest rate sets the relaxation time
        let tau = 1e3 / r.max_total_rate();
        let p = evolve(&r, &PopulationVector::pure(6, 0), 1e3 * tau).unwrap();
        let g = PopulationVector::gibbs(&s.energies, 300.0);
        for (a, b) in p.p.iter().zip(&g.p) {
            assert!((a - b).abs() < 1e-4);
        }
        assert!((p.sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(diagonalize(-1.0, 0.0).is_err());
        let s = diagonalize(10.0, 0.0).unwrap();
        assert!(free_rate(&s, 0.0).is_err());
        let r = free_rate(&s, 300.0).unwrap();
        assert!(evolve(&r, &PopulationVector { p: vec![0.5; 6] }, 1.0).is_err());
        assert!(evolve(&r, &PopulationVector::pure(6, 0), -1.0).is_err());
    }
}
