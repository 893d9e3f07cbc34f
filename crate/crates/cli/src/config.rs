//! Run configuration read from TOML. Every physical key carries its unit in
//! the name; unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thermocav::beam::BeamConfig;
use thermocav::hyperfine::{AtomConstants, StateLabel};
use thermocav::materials::MaterialSpec;
use thermocav::{CavitySetup, MaterialModel, Mirror, ModelKind, QuadratureSpec};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CavityBlock {
    pub gap_m: f64,
    pub temperature_k: f64,
    /// Material name: a preset ("au", "pt") or an entry of `materials`.
    pub mirror1: String,
    pub mirror2: String,
    /// Slab thickness of both mirrors; semi-infinite when absent.
    pub mirror_thickness_m: Option<f64>,
    /// Forces the permittivity model of both mirrors.
    pub model: Option<ModelKind>,
}

impl Default for CavityBlock {
    fn default() -> Self {
        Self {
            gap_m: 2e-6,
            temperature_k: 300.0,
            mirror1: "au".into(),
            mirror2: "au".into(),
            mirror_thickness_m: None,
            model: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomBlock {
    pub name: String,
    pub nuclear_spin: f64,
    pub g_nuclear: f64,
    pub g_electron: f64,
    pub w0_ev: f64,
}

impl Default for AtomBlock {
    fn default() -> Self {
        let d = AtomConstants::deuterium();
        Self {
            name: d.name,
            nuclear_spin: d.nuclear_spin,
            g_nuclear: d.g_nuclear,
            g_electron: d.g_electron,
            w0_ev: d.w0_ev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamBlock {
    pub velocity_m_s: f64,
    pub length_m: f64,
    pub mass_kg: f64,
    pub transverse_velocity_m_s: f64,
    pub alpha0_m3: f64,
    pub omega0_rad_s: f64,
    /// `"F,m"`, e.g. `"3/2,-1/2"`.
    pub initial_state: String,
    pub field_gauss: f64,
    /// Angle between the field and the mirror normal.
    pub theta_rad: f64,
}

impl Default for BeamBlock {
    fn default() -> Self {
        let b = BeamConfig::default();
        Self {
            velocity_m_s: b.v,
            length_m: b.length,
            mass_kg: b.mass,
            transverse_velocity_m_s: b.v_transverse,
            alpha0_m3: b.alpha0,
            omega0_rad_s: b.omega0,
            initial_state: "3/2,-1/2".into(),
            field_gauss: 10.0,
            theta_rad: PI / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub format: Format,
    pub path: Option<PathBuf>,
    /// Density of logarithmic grids.
    pub points_per_decade: usize,
    /// Size of linear grids.
    pub points: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            path: None,
            points_per_decade: 10,
            points: 41,
        }
    }
}

/// Abscissa ranges of the figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub temperature_min_k: f64,
    pub temperature_max_k: f64,
    pub spectrum_omega_min_rad_s: f64,
    pub spectrum_omega_max_rad_s: f64,
    pub casimir_omega_min_rad_s: f64,
    pub casimir_omega_max_rad_s: f64,
    pub field_min_gauss: f64,
    pub field_max_gauss: f64,
    /// Upper end of the dimensionless field `x` in the level diagram.
    pub level_x_max: f64,
    /// Field for rate-vs-z.
    pub field_gauss: f64,
    /// Field for rates-vs-theta.
    pub theta_sweep_field_gauss: f64,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            temperature_min_k: 10.0,
            temperature_max_k: 1000.0,
            spectrum_omega_min_rad_s: 1e7,
            spectrum_omega_max_rad_s: 1e14,
            casimir_omega_min_rad_s: 1e7,
            casimir_omega_max_rad_s: 1e11,
            field_min_gauss: 10.0,
            field_max_gauss: 1000.0,
            level_x_max: 4.0,
            field_gauss: 10.0,
            theta_sweep_field_gauss: 20.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub cavity: CavityBlock,
    pub materials: Vec<MaterialSpec>,
    pub atom: AtomBlock,
    pub beam: BeamBlock,
    pub quadrature: QuadratureSpec,
    pub output: OutputBlock,
    pub sweep: SweepBlock,
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {x}")))
    }
}

fn range(lo_key: &str, lo: f64, hi: f64) -> Result<(), CliError> {
    if lo < hi {
        Ok(())
    } else {
        Err(invalid(lo_key, format!("must be below the matching upper bound ({lo} >= {hi})")))
    }
}

impl RunConfig {
    /// Parses TOML text, reporting the key path of the first problem.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(e.to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner().message().trim()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when there is none.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::from_toml(&text)
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.cavity;
        positive("cavity.gap_m", c.gap_m)?;
        positive("cavity.temperature_k", c.temperature_k)?;
        if let Some(w) = c.mirror_thickness_m {
            positive("cavity.mirror_thickness_m", w)?;
        }
        self.material("cavity.mirror1", &c.mirror1)?;
        self.material("cavity.mirror2", &c.mirror2)?;
        for (k, spec) in self.materials.iter().enumerate() {
            MaterialModel::from_spec(spec).map_err(|e| invalid(&format!("materials[{k}]"), e))?;
        }

        self.atom_constants()?;
        let b = &self.beam;
        positive("beam.velocity_m_s", b.velocity_m_s)?;
        positive("beam.length_m", b.length_m)?;
        positive("beam.mass_kg", b.mass_kg)?;
        positive("beam.omega0_rad_s", b.omega0_rad_s)?;
        if !(b.alpha0_m3 >= 0.0 && b.alpha0_m3.is_finite()) {
            return Err(invalid("beam.alpha0_m3", "must be non-negative"));
        }
        if !b.transverse_velocity_m_s.is_finite() {
            return Err(invalid("beam.transverse_velocity_m_s", "must be finite"));
        }
        if !(b.field_gauss >= 0.0 && b.field_gauss.is_finite()) {
            return Err(invalid("beam.field_gauss", "must be non-negative"));
        }
        if !b.theta_rad.is_finite() {
            return Err(invalid("beam.theta_rad", "must be finite"));
        }
        self.initial_state()?;

        let q = &self.quadrature;
        positive("quadrature.rel_tol", q.rel_tol)?;
        positive("quadrature.tail_cutoff", q.tail_cutoff)?;
        if !(q.abs_floor >= 0.0) {
            return Err(invalid("quadrature.abs_floor", "must be non-negative"));
        }
        if q.max_panels == 0 {
            return Err(invalid("quadrature.max_panels", "must be at least 1"));
        }

        if self.output.points < 2 {
            return Err(invalid("output.points", "must be at least 2"));
        }
        if self.output.points_per_decade == 0 {
            return Err(invalid("output.points_per_decade", "must be at least 1"));
        }

        let s = &self.sweep;
        positive("sweep.temperature_min_k", s.temperature_min_k)?;
        range("sweep.temperature_min_k", s.temperature_min_k, s.temperature_max_k)?;
        positive("sweep.spectrum_omega_min_rad_s", s.spectrum_omega_min_rad_s)?;
        range("sweep.spectrum_omega_min_rad_s", s.spectrum_omega_min_rad_s, s.spectrum_omega_max_rad_s)?;
        positive("sweep.casimir_omega_min_rad_s", s.casimir_omega_min_rad_s)?;
        range("sweep.casimir_omega_min_rad_s", s.casimir_omega_min_rad_s, s.casimir_omega_max_rad_s)?;
        positive("sweep.field_min_gauss", s.field_min_gauss)?;
        range("sweep.field_min_gauss", s.field_min_gauss, s.field_max_gauss)?;
        positive("sweep.level_x_max", s.level_x_max)?;
        if !(s.field_gauss >= 0.0 && s.field_gauss.is_finite()) {
            return Err(invalid("sweep.field_gauss", "must be non-negative"));
        }
        if !(s.theta_sweep_field_gauss >= 0.0 && s.theta_sweep_field_gauss.is_finite()) {
            return Err(invalid("sweep.theta_sweep_field_gauss", "must be non-negative"));
        }
        Ok(())
    }

    fn material(&self, key: &str, name: &str) -> Result<MaterialModel, CliError> {
        if let Some(spec) = self.materials.iter().find(|s| s.name.eq_ignore_ascii_case(name)) {
            return MaterialModel::from_spec(spec).map_err(|e| invalid(key, e));
        }
        MaterialModel::preset(name).ok_or_else(|| invalid(key, format!("unknown material {name:?}")))
    }

    fn mirror(&self, key: &str, name: &str, kind: Option<ModelKind>) -> Result<Mirror, CliError> {
        let mut model = self.material(key, name)?;
        if let Some(k) = kind.or(self.cavity.model) {
            model = model.with_kind(k);
        }
        Ok(Mirror::Material {
            model,
            thickness: self.cavity.mirror_thickness_m,
        })
    }

    /// The cavity, optionally forcing the permittivity model of both mirrors.
    pub fn setup_with(&self, kind: Option<ModelKind>) -> Result<CavitySetup, CliError> {
        self.setup_at(kind, self.cavity.temperature_k)
    }

    /// [`Self::setup_with`] at temperature `t` (K).
    pub fn setup_at(&self, kind: Option<ModelKind>, t: f64) -> Result<CavitySetup, CliError> {
        let c = &self.cavity;
        CavitySetup::new(
            c.gap_m,
            self.mirror("cavity.mirror1", &c.mirror1, kind)?,
            self.mirror("cavity.mirror2", &c.mirror2, kind)?,
            t,
        )
        .map_err(|e| invalid("cavity", e))
    }

    pub fn setup(&self) -> Result<CavitySetup, CliError> {
        self.setup_with(None)
    }

    /// Model of the configured mirrors (that of mirror 1 if they differ).
    pub fn model_kind(&self) -> ModelKind {
        self.cavity
            .model
            .or_else(|| self.material("cavity.mirror1", &self.cavity.mirror1).ok().map(|m| m.kind))
            .unwrap_or(ModelKind::Drude)
    }

    pub fn atom_constants(&self) -> Result<AtomConstants, CliError> {
        let a = &self.atom;
        let atom = AtomConstants {
            name: a.name.clone(),
            nuclear_spin: a.nuclear_spin,
            g_nuclear: a.g_nuclear,
            g_electron: a.g_electron,
            w0_ev: a.w0_ev,
        };
        atom.validate().map_err(|e| invalid("atom", e))?;
        Ok(atom)
    }

    pub fn beam_config(&self) -> BeamConfig {
        let b = &self.beam;
        BeamConfig {
            v: b.velocity_m_s,
            length: b.length_m,
            mass: b.mass_kg,
            v_transverse: b.transverse_velocity_m_s,
            alpha0: b.alpha0_m3,
            omega0: b.omega0_rad_s,
        }
    }

    pub fn initial_state(&self) -> Result<StateLabel, CliError> {
        let label: StateLabel = self
            .beam
            .initial_state
            .parse()
            .map_err(|e| invalid("beam.initial_state", e))?;
        let atom = self.atom_constants()?;
        let upper = (2.0 * atom.nuclear_spin).round() as i32 + 1;
        let f_ok = label.two_f == upper || label.two_f == upper - 2;
        if !(f_ok && label.two_m.abs() <= label.two_f && (label.two_f - label.two_m) % 2 == 0) {
            return Err(invalid("beam.initial_state", format!("{label} is not a sublevel of {}", atom.name)));
        }
        Ok(label)
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        self.quadrature
    }
}
