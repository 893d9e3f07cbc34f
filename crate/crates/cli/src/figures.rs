//! Data behind each figure. Sweeps run in parallel over the abscissa and are
//! assembled in grid order.

use std::f64::consts::PI;

use rayon::prelude::*;
use thermocav::casimir::{pressure_spectrum, validity_warnings};
use thermocav::hyperfine::{breit_rabi, cavity_rate, diagonalize_atom, AtomConstants, RateMatrix, StateLabel};
use thermocav::spectra::{planck_density, planck_spectrum, spectral_energy_density, thermal_energy_density, universal_te_density};
use thermocav::units::{MU_B, MU_N};
use thermocav::{CavitySetup, Field, ModelKind, Polarization, SpectralFilter};

use crate::config::RunConfig;
use crate::output::{Column, Metadata, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureName {
    #[value(name = "energy-vs-z")]
    EnergyVsZ,
    #[value(name = "energy-vs-T", alias = "energy-vs-t")]
    EnergyVsT,
    #[value(name = "te-spectrum")]
    TeSpectrum,
    #[value(name = "casimir-spectrum")]
    CasimirSpectrum,
    #[value(name = "levels")]
    Levels,
    #[value(name = "rate-vs-z")]
    RateVsZ,
    #[value(name = "rates-vs-B", alias = "rates-vs-b")]
    RatesVsB,
    #[value(name = "rates-vs-theta")]
    RatesVsTheta,
}

impl FigureName {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::EnergyVsZ => "energy-vs-z",
            FigureName::EnergyVsT => "energy-vs-T",
            FigureName::TeSpectrum => "te-spectrum",
            FigureName::CasimirSpectrum => "casimir-spectrum",
            FigureName::Levels => "levels",
            FigureName::RateVsZ => "rate-vs-z",
            FigureName::RatesVsB => "rates-vs-B",
            FigureName::RatesVsTheta => "rates-vs-theta",
        }
    }
}

pub fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Drude => "drude",
        ModelKind::Plasma => "plasma",
    }
}

fn fraction(two: i32) -> String {
    if two % 2 == 0 {
        format!("{}", two / 2)
    } else {
        format!("{two}/2")
    }
}

/// Column-safe label, e.g. `3/2:-1/2`.
pub fn label_name(label: StateLabel) -> String {
    format!("{}:{}", fraction(label.two_f), fraction(label.two_m))
}

/// All sublevels, upper multiplet first, `m` descending.
pub fn ordered_labels(atom: &AtomConstants) -> Vec<StateLabel> {
    let upper = (2.0 * atom.nuclear_spin).round() as i32 + 1;
    let mut out = Vec::new();
    for two_f in [upper, upper - 2] {
        if two_f < 0 {
            continue;
        }
        out.extend((0..=two_f).map(|k| StateLabel { two_f, two_m: two_f - 2 * k }));
    }
    out
}

/// Total rate out of state `i` with the summed quadrature error.
pub fn total_with_error(r: &RateMatrix, i: usize) -> (f64, f64) {
    let err = (0..r.dimension()).filter(|&f| f != i).map(|f| r.error[(f, i)]).sum();
    (r.total_rate(i), err)
}

/// Everything a figure needs besides its name.
pub struct Context<'a> {
    pub config: &'a RunConfig,
    /// `--model`: restricts model comparisons, overrides the mirror model
    /// elsewhere.
    pub model: Option<ModelKind>,
    /// `--points`: number of abscissa points for any grid.
    pub points: Option<usize>,
    pub config_sha256: String,
}

/// One abscissa point: value/error pairs in column order plus warnings.
type Point = (Vec<(f64, f64)>, Vec<String>);

impl Context<'_> {
    fn linear(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.points.unwrap_or(self.config.output.points);
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn logarithmic(&self, lo: f64, hi: f64) -> Vec<f64> {
        let ppd = self.config.output.points_per_decade as f64;
        let n = self
            .points
            .unwrap_or_else(|| ((hi / lo).log10() * ppd - 1e-9).ceil() as usize + 1)
            .max(2);
        (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
    }

    /// Cell-centred points across the gap.
    fn gap_points(&self, a: f64) -> Vec<f64> {
        let n = self.points.unwrap_or(self.config.output.points);
        (0..n).map(|k| a * (k as f64 + 0.5) / n as f64).collect()
    }

    fn models(&self) -> Vec<ModelKind> {
        match self.model {
            Some(k) => vec![k],
            None => vec![ModelKind::Drude, ModelKind::Plasma],
        }
    }

    fn setups(&self) -> Result<Vec<(ModelKind, CavitySetup)>, CliError> {
        self.models()
            .into_iter()
            .map(|k| Ok((k, self.config.setup_with(Some(k))?)))
            .collect()
    }

    /// The configured cavity with the `--model` override applied.
    fn setup(&self) -> Result<CavitySetup, CliError> {
        self.config.setup_with(self.model)
    }

    pub fn figure(&self, name: FigureName) -> Result<Table, CliError> {
        match name {
            FigureName::EnergyVsZ => self.energy_vs_z(),
            FigureName::EnergyVsT => self.energy_vs_t(),
            FigureName::TeSpectrum => self.te_spectrum(),
            FigureName::CasimirSpectrum => self.casimir_spectrum(),
            FigureName::Levels => self.levels(),
            FigureName::RateVsZ => self.rate_vs_z(),
            FigureName::RatesVsB => self.rates_vs_b(),
            FigureName::RatesVsTheta => self.rates_vs_theta(),
        }
    }

    fn assemble(
        &self,
        name: FigureName,
        abscissa: Column,
        curves: Vec<Column>,
        xs: &[f64],
        scale_x: f64,
        mut warnings: Vec<String>,
        points: Vec<Point>,
    ) -> Table {
        let mut columns = vec![abscissa];
        for c in curves {
            columns.push(Column::new(format!("{}_err", c.name), c.unit.clone()));
            columns.insert(columns.len() - 1, c);
        }
        let mut rows = Vec::with_capacity(xs.len());
        for (&x, (values, w)) in xs.iter().zip(points) {
            let mut row = vec![x * scale_x];
            for (v, e) in values {
                row.push(v);
                row.push(e);
            }
            rows.push(row);
            for s in w {
                if !warnings.contains(&s) {
                    warnings.push(s);
                }
            }
        }
        Table {
            metadata: Metadata::new(format!("figure {}", name.as_str()), self.config_sha256.clone(), warnings),
            columns,
            rows,
        }
    }

    fn energy_vs_z(&self) -> Result<Table, CliError> {
        let setups = self.setups()?;
        let (a, t) = (self.config.cavity.gap_m, self.config.cavity.temperature_k);
        let quad = self.config.quadrature_spec();
        let u_bb = planck_density(t);
        let zs = self.gap_points(a);
        let points = zs
            .par_iter()
            .map(|&z| -> Result<Point, CliError> {
                let mut values = Vec::new();
                let mut warnings = Vec::new();
                for (_, setup) in &setups {
                    let r = thermal_energy_density(setup, z, SpectralFilter::ALL, &quad)?;
                    values.push((r.value / u_bb, r.error_estimate / u_bb));
                    warnings.extend(r.warnings);
                }
                values.push((universal_te_density(a, z, t)? / u_bb, 0.0));
                values.push((1.0, 0.0));
                Ok((values, warnings))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut curves: Vec<Column> = setups.iter().map(|(k, _)| Column::new(model_name(*k), "u_BB")).collect();
        curves.push(Column::new("universal", "u_BB"));
        curves.push(Column::new("blackbody", "u_BB"));
        Ok(self.assemble(FigureName::EnergyVsZ, Column::new("z_um", "um"), curves, &zs, 1e6, vec![], points))
    }

    fn energy_vs_t(&self) -> Result<Table, CliError> {
        let s = &self.config.sweep;
        let a = self.config.cavity.gap_m;
        let quad = self.config.quadrature_spec();
        let models = self.models();
        let ts = self.logarithmic(s.temperature_min_k, s.temperature_max_k);
        let points = ts
            .par_iter()
            .map(|&t| -> Result<Point, CliError> {
                let mut values = Vec::new();
                let mut warnings = Vec::new();
                for &k in &models {
                    let setup = self.config.setup_at(Some(k), t)?;
                    for filter in [SpectralFilter::te(), SpectralFilter::tm()] {
                        let r = thermal_energy_density(&setup, a / 2.0, filter, &quad)?;
                        values.push((r.value, r.error_estimate));
                        warnings.extend(r.warnings);
                    }
                }
                values.push((universal_te_density(a, a / 2.0, t)?, 0.0));
                values.push((planck_density(t), 0.0));
                Ok((values, warnings))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut curves = Vec::new();
        for &k in &models {
            curves.push(Column::new(format!("{}_te", model_name(k)), "J/m^3"));
            curves.push(Column::new(format!("{}_tm", model_name(k)), "J/m^3"));
        }
        curves.push(Column::new("universal_te", "J/m^3"));
        curves.push(Column::new("blackbody", "J/m^3"));
        Ok(self.assemble(FigureName::EnergyVsT, Column::new("t_k", "K"), curves, &ts, 1.0, vec![], points))
    }

    fn te_spectrum(&self) -> Result<Table, CliError> {
        let s = &self.config.sweep;
        let setups = self.setups()?;
        let quad = self.config.quadrature_spec();
        let (a, t) = (self.config.cavity.gap_m, self.config.cavity.temperature_k);
        let te = SpectralFilter::te();
        let te_magnetic = SpectralFilter::new(Polarization::Te, Field::Magnetic);
        let omegas = self.logarithmic(s.spectrum_omega_min_rad_s, s.spectrum_omega_max_rad_s);
        let points = omegas
            .par_iter()
            .map(|&w| -> Result<Point, CliError> {
                let mut values = Vec::new();
                for (_, setup) in &setups {
                    for filter in [te, te_magnetic] {
                        let r = spectral_energy_density(setup, w, a / 2.0, filter, &quad)?;
                        values.push((r.cavity.value, r.cavity.error));
                    }
                }
                values.push((planck_spectrum(w, t) * te.blackbody_share(), 0.0));
                Ok((values, vec![]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut curves = Vec::new();
        for (k, _) in &setups {
            curves.push(Column::new(format!("{}_te", model_name(*k)), "J*s/m^3"));
            curves.push(Column::new(format!("{}_te_magnetic", model_name(*k)), "J*s/m^3"));
        }
        curves.push(Column::new("blackbody_te", "J*s/m^3"));
        let warnings = setups[0].1.warnings();
        Ok(self.assemble(FigureName::TeSpectrum, Column::new("omega", "rad/s"), curves, &omegas, 1.0, warnings, points))
    }

    fn casimir_spectrum(&self) -> Result<Table, CliError> {
        let s = &self.config.sweep;
        let setups = self.setups()?;
        let quad = self.config.quadrature_spec();
        let omegas = self.logarithmic(s.casimir_omega_min_rad_s, s.casimir_omega_max_rad_s);
        let points = omegas
            .par_iter()
            .map(|&w| -> Result<Point, CliError> {
                let mut values = Vec::new();
                for (_, setup) in &setups {
                    let r = pressure_spectrum(setup, w, None, &quad)?;
                    values.push((r.total.value, r.total.error));
                }
                Ok((values, vec![]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let curves = setups.iter().map(|(k, _)| Column::new(model_name(*k), "Pa*s")).collect();
        let warnings = validity_warnings(&setups[0].1);
        Ok(self.assemble(FigureName::CasimirSpectrum, Column::new("omega", "rad/s"), curves, &omegas, 1.0, warnings, points))
    }

    fn levels(&self) -> Result<Table, CliError> {
        let atom = self.config.atom_constants()?;
        let labels = ordered_labels(&atom);
        let w0 = atom.w0();
        let field_per_x = w0 / (atom.g_electron * MU_B + atom.g_nuclear * MU_N);
        let xs = self.linear(0.0, self.config.sweep.level_x_max);
        let points = xs
            .par_iter()
            .map(|&x| -> Result<Point, CliError> {
                let b = x * field_per_x;
                let sys = diagonalize_atom(&atom, b, 0.0)?;
                let values = labels
                    .iter()
                    .map(|&l| {
                        let e = sys.index_of(l).map_or(f64::NAN, |i| sys.energies[i]);
                        (e / w0, (e - breit_rabi(&atom, b, l)).abs() / w0)
                    })
                    .collect();
                Ok((values, vec![]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let curves = labels.iter().map(|&l| Column::new(label_name(l), "W0")).collect();
        Ok(self.assemble(FigureName::Levels, Column::new("x", "1"), curves, &xs, 1.0, vec![], points))
    }

    fn rate_vs_z(&self) -> Result<Table, CliError> {
        let setup = self.setup()?;
        let atom = self.config.atom_constants()?;
        let label = self.config.initial_state()?;
        let quad = self.config.quadrature_spec();
        let b = self.config.sweep.field_gauss;
        let systems = [diagonalize_atom(&atom, b, 0.0)?, diagonalize_atom(&atom, b, PI / 2.0)?];
        let zs = self.gap_points(setup.a);
        let points = zs
            .par_iter()
            .map(|&z| -> Result<Point, CliError> {
                let mut values = Vec::new();
                for sys in &systems {
                    let i = sys
                        .index_of(label)
                        .ok_or_else(|| CliError::Config(format!("beam.initial_state: {label} not found")))?;
                    values.push(total_with_error(&cavity_rate(sys, &setup, z, &quad)?, i));
                }
                Ok((values, vec![]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let name = label_name(label);
        let curves = vec![Column::new(format!("{name}_b_along_z"), "1/s"), Column::new(format!("{name}_b_along_y"), "1/s")];
        let warnings = setup.warnings();
        Ok(self.assemble(FigureName::RateVsZ, Column::new("z_um", "um"), curves, &zs, 1e6, warnings, points))
    }

    fn centre_rates(&self, setup: &CavitySetup, atom: &AtomConstants, labels: &[StateLabel], b: f64, theta: f64) -> Result<Vec<(f64, f64)>, CliError> {
        let sys = diagonalize_atom(atom, b, theta)?;
        let r = cavity_rate(&sys, setup, setup.a / 2.0, &self.config.quadrature_spec())?;
        Ok(labels
            .iter()
            .map(|&l| sys.index_of(l).map_or((f64::NAN, f64::NAN), |i| total_with_error(&r, i)))
            .collect())
    }

    fn rates_vs_b(&self) -> Result<Table, CliError> {
        let s = &self.config.sweep;
        let setup = self.setup()?;
        let atom = self.config.atom_constants()?;
        let labels = ordered_labels(&atom);
        let bs = self.logarithmic(s.field_min_gauss, s.field_max_gauss);
        let points = bs
            .par_iter()
            .map(|&b| -> Result<Point, CliError> {
                let mut values = self.centre_rates(&setup, &atom, &labels, b, 0.0)?;
                values.extend(self.centre_rates(&setup, &atom, &labels, b, PI / 2.0)?);
                Ok((values, vec![]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut curves = Vec::new();
        for axis in ["z", "y"] {
            curves.extend(labels.iter().map(|&l| Column::new(format!("{}_b_along_{axis}", label_name(l)), "1/s")));
        }
        let warnings = setup.warnings();
        Ok(self.assemble(FigureName::RatesVsB, Column::new("b_gauss", "G"), curves, &bs, 1.0, warnings, points))
    }

    fn rates_vs_theta(&self) -> Result<Table, CliError> {
        let setup = self.setup()?;
        let atom = self.config.atom_constants()?;
        let labels = ordered_labels(&atom);
        let b = self.config.sweep.theta_sweep_field_gauss;
        let thetas = self.linear(0.0, PI);
        let points = thetas
            .par_iter()
            .map(|&theta| -> Result<Point, CliError> { Ok((self.centre_rates(&setup, &atom, &labels, b, theta)?, vec![])) })
            .collect::<Result<Vec<_>, _>>()?;
        let curves = labels.iter().map(|&l| Column::new(label_name(l), "1/s")).collect();
        let warnings = setup.warnings();
        Ok(self.assemble(FigureName::RatesVsTheta, Column::new("theta_rad", "rad"), curves, &thetas, 1.0, warnings, points))
    }
}
