//! Project configuration and the operations shared by the command line and
//! the HTTP service.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use pidspace_core::analyzer::{self, AnalysisSettings, LoopContext};
use pidspace_core::boundary::{GainPlane, MarginSpec, WeightPair, WeightSpec};
use pidspace_core::grid;
use pidspace_core::region::{self, Classifier, ConstraintSet, GridSpec, MapSettings, RegionMap, SweepBase, SweepResult};
use pidspace_core::{GainScaling, PidGains, Structure, TransferFunction};

use crate::error::{AppError, AppResult};
use crate::parallel;
use crate::schema::{
    self, AnalysisDoc, GainName, ScalingName, SimDoc, StructureName, SweepAxisName, TfDoc, WeightsDoc, SCHEMA_VERSION,
};

/// Units: phase margins in degrees, gain margins in dB, weight corner
/// frequencies in rad/s, sample times in seconds. Gains and plane ranges are
/// in the units selected by `gain_scaling`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub version: u32,
    /// Nominal plant, continuous or discrete.
    pub plant: TfDoc,
    /// Further plants that must meet the same constraints.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plant_family: Vec<TfDoc>,
    /// Required for continuous plants; must agree with discrete ones.
    #[serde(default)]
    pub sample_time: Option<f64>,
    pub controller: StructureName,
    #[serde(default)]
    pub gain_scaling: ScalingName,
    pub plane: PlaneConfig,
    #[serde(default)]
    pub constraints: ConstraintsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneConfig {
    pub x: GainName,
    pub y: GainName,
    /// Value of the third gain; 0 when the structure has none.
    #[serde(default)]
    pub fixed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsConfig {
    #[serde(default = "yes")]
    pub stability: bool,
    #[serde(default)]
    pub pm_min: Option<f64>,
    #[serde(default)]
    pub pm_max: Option<f64>,
    #[serde(default)]
    pub gm_min: Option<f64>,
    #[serde(default)]
    pub weights: Option<WeightsDoc>,
}

fn yes() -> bool {
    true
}

impl Default for ConstraintsConfig {
    fn default() -> Self {
        Self {
            stability: true,
            pm_min: None,
            pm_max: None,
            gm_min: None,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    /// Absent ranges are found by the auto scan.
    pub x_range: Option<[f64; 2]>,
    pub y_range: Option<[f64; 2]>,
    pub auto_initial: f64,
    pub auto_cap: f64,
    pub auto_points: usize,
    pub boundaries: bool,
    pub boundary_points: usize,
    pub ms_frequencies: usize,
    pub theta_l_points: usize,
    pub margin_points: usize,
    pub rp_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let a = AnalysisSettings::default();
        Self {
            nx: region::DEFAULT_GRID,
            ny: region::DEFAULT_GRID,
            x_range: None,
            y_range: None,
            auto_initial: 1.0,
            auto_cap: 1e4,
            auto_points: 41,
            boundaries: true,
            boundary_points: grid::DEFAULT_BOUNDARY_POINTS,
            ms_frequencies: region::DEFAULT_MS_FREQUENCIES,
            theta_l_points: grid::DEFAULT_THETA_L_POINTS,
            margin_points: a.margin_points,
            rp_points: a.rp_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxisName,
    pub values: Vec<f64>,
}

/// Paths written by batch commands; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub discrete: Option<PathBuf>,
    pub region: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub members_csv: Option<PathBuf>,
    pub boundaries_csv: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
    pub analysis: Option<PathBuf>,
    pub simulation: Option<PathBuf>,
}

fn double_option<'de, D, T>(d: D) -> Result<Option<Option<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Option::<T>::deserialize(d).map(Some)
}

/// Changes applied on top of a loaded configuration. For the optional
/// constraints an explicit `null` removes the constraint and an absent key
/// leaves it alone.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default)]
    pub stability: Option<bool>,
    #[serde(default, deserialize_with = "double_option")]
    pub pm_min: Option<Option<f64>>,
    #[serde(default, deserialize_with = "double_option")]
    pub pm_max: Option<Option<f64>>,
    #[serde(default, deserialize_with = "double_option")]
    pub gm_min: Option<Option<f64>>,
    #[serde(default, deserialize_with = "double_option")]
    pub weights: Option<Option<WeightsDoc>>,
    #[serde(default)]
    pub fixed: Option<f64>,
    #[serde(default)]
    pub sample_time: Option<f64>,
    #[serde(default)]
    pub x_range: Option<[f64; 2]>,
    #[serde(default)]
    pub y_range: Option<[f64; 2]>,
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }

    pub fn apply(&self, cfg: &ProjectConfig) -> ProjectConfig {
        let mut c = cfg.clone();
        let k = &mut c.constraints;
        if let Some(v) = self.stability {
            k.stability = v;
        }
        if let Some(v) = self.pm_min {
            k.pm_min = v;
        }
        if let Some(v) = self.pm_max {
            k.pm_max = v;
        }
        if let Some(v) = self.gm_min {
            k.gm_min = v;
        }
        if let Some(v) = self.weights {
            k.weights = v;
        }
        if let Some(v) = self.fixed {
            c.plane.fixed = v;
        }
        if let Some(v) = self.sample_time {
            c.sample_time = Some(v);
        }
        if let Some(v) = self.x_range {
            c.grid.x_range = Some(v);
        }
        if let Some(v) = self.y_range {
            c.grid.y_range = Some(v);
        }
        if let Some(v) = self.nx {
            c.grid.nx = v;
        }
        if let Some(v) = self.ny {
            c.grid.ny = v;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Step,
    Ramp,
}

impl std::str::FromStr for Reference {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        match s {
            "step" => Ok(Reference::Step),
            "ramp" => Ok(Reference::Ramp),
            _ => Err(AppError::Config(format!("reference must be step or ramp, got {s:?}"))),
        }
    }
}

/// A validated configuration with its plants discretized.
#[derive(Debug, Clone)]
pub struct Project {
    pub config: ProjectConfig,
    /// Plants as given, before discretization.
    pub source_plants: Vec<TransferFunction>,
    pub plants: Vec<TransferFunction>,
    pub sample_time: f64,
    pub plane: GainPlane,
    pub margins: Option<MarginSpec>,
    pub weight_specs: Option<(WeightSpec, WeightSpec)>,
    pub weights: Option<WeightPair>,
    pub settings: MapSettings,
}

impl Project {
    pub fn load(path: &Path) -> AppResult<Self> {
        Self::from_config(read_config(path)?)
    }

    pub fn from_config(config: ProjectConfig) -> AppResult<Self> {
        if config.version != SCHEMA_VERSION {
            return Err(AppError::Config(format!(
                "unsupported config version {}, expected {SCHEMA_VERSION}",
                config.version
            )));
        }
        let source_plants = std::iter::once(&config.plant)
            .chain(&config.plant_family)
            .map(TfDoc::to_tf)
            .collect::<AppResult<Vec<_>>>()?;
        let plants = source_plants
            .iter()
            .map(|p| discretize(p, config.sample_time))
            .collect::<AppResult<Vec<_>>>()?;
        let sample_time = plants[0].sample_time().expect("discretized");
        if let Some(p) = plants.iter().find(|p| p.sample_time() != Some(sample_time)) {
            return Err(AppError::Config(format!(
                "plant family mixes sample times {sample_time} and {}",
                p.sample_time().unwrap_or(f64::NAN)
            )));
        }
        let structure: Structure = config.controller.into();
        let plane = GainPlane::new(
            config.plane.x.into(),
            config.plane.y.into(),
            config.plane.fixed,
            structure,
            config.gain_scaling.into(),
        )?;
        let k = &config.constraints;
        let margins = (k.pm_min.is_some() || k.pm_max.is_some() || k.gm_min.is_some()).then_some(MarginSpec {
            pm_min: k.pm_min,
            pm_max: k.pm_max,
            gm_min: k.gm_min,
        });
        if let Some(m) = &margins {
            m.validate()?;
        }
        let weight_specs = k.weights.map(|w| w.specs());
        let weights = match &weight_specs {
            Some((ws, wt)) => Some(WeightPair::from_specs(ws, wt, sample_time)?),
            None => None,
        };
        let g = &config.grid;
        let settings = MapSettings {
            analysis: AnalysisSettings {
                margin_points: g.margin_points,
                rp_points: g.rp_points,
            },
            boundaries: g.boundaries,
            boundary_points: g.boundary_points,
            ms_frequencies: g.ms_frequencies,
            theta_l_points: g.theta_l_points,
        };
        if g.margin_points < 16 || g.rp_points < 16 || g.boundary_points < 2 || g.theta_l_points < 4 {
            return Err(AppError::Config("grid: frequency grids need at least 16 points".into()));
        }
        if !k.stability && margins.is_none() && weights.is_none() {
            return Err(AppError::Config("constraints: nothing to map".into()));
        }
        Ok(Self {
            config,
            source_plants,
            plants,
            sample_time,
            plane,
            margins,
            weight_specs,
            weights,
            settings,
        })
    }

    pub fn with_overrides(&self, o: &Overrides) -> AppResult<Self> {
        if o.is_empty() {
            return Ok(self.clone());
        }
        Self::from_config(o.apply(&self.config))
    }

    pub fn structure(&self) -> Structure {
        self.plane.structure
    }

    pub fn scaling(&self) -> GainScaling {
        self.plane.scaling
    }

    pub fn constraints(&self) -> ConstraintSet {
        ConstraintSet {
            require_stability: self.config.constraints.stability,
            margins: self.margins,
            weights: self.weights.clone(),
            plants: self.plants.clone(),
        }
    }

    /// Grid from the configuration; missing ranges come from the auto scan.
    pub fn grid(&self) -> AppResult<GridSpec> {
        let g = &self.config.grid;
        let (x, y) = match (g.x_range, g.y_range) {
            (Some(x), Some(y)) => (x, y),
            (x, y) => {
                let c = Classifier::new(&self.constraints(), &self.plane, &self.settings.analysis)?;
                let (ax, ay) = region::auto_range(&c, &self.plane, g.auto_initial, g.auto_cap, g.auto_points)?;
                (x.unwrap_or(ax), y.unwrap_or(ay))
            }
        };
        Ok(GridSpec::new(x, y, g.nx, g.ny)?)
    }

    pub fn region_map(&self) -> AppResult<RegionMap> {
        let grid = self.grid()?;
        parallel::region_map(&self.constraints(), &self.plane, grid, &self.settings, self.weight_specs)
    }

    /// Sweep from the configuration's `sweep` section. Every slice uses the
    /// grid of the base project.
    pub fn sweep(&self) -> AppResult<SweepResult> {
        let s = self
            .config
            .sweep
            .as_ref()
            .ok_or_else(|| AppError::Config("no sweep section in the configuration".into()))?;
        let grid = self.grid()?;
        let build = |c: &ConstraintSet, p: &GainPlane| parallel::build(c, p, grid, &self.settings, self.weight_specs);
        let r = match s.axis {
            SweepAxisName::SampleTime => {
                let base = SweepBase {
                    plants: self.source_plants.clone(),
                    require_stability: self.config.constraints.stability,
                    margins: self.margins,
                    weight_specs: self.weight_specs,
                };
                region::sweep_sample_time(&base, &self.plane, &s.values, build)?
            }
            SweepAxisName::ThirdGain => region::sweep_third_gain(&self.constraints(), &self.plane, &s.values, build)?,
        };
        Ok(r)
    }

    /// Gains given in the project's units, converted to standard units.
    pub fn gains(&self, kp: f64, ki: f64, kd: f64) -> AppResult<PidGains> {
        let g = PidGains::new(kp, ki, kd, self.structure())?;
        Ok(g.to_standard(self.scaling(), self.sample_time))
    }

    /// Loop context for the nominal plant.
    pub fn context(&self) -> AppResult<LoopContext> {
        Ok(LoopContext::new(
            &self.plants[0],
            self.structure(),
            self.weights.as_ref(),
            &self.settings.analysis,
        )?)
    }

    /// Report for the nominal plant.
    pub fn analyze(&self, kp: f64, ki: f64, kd: f64) -> AppResult<AnalysisDoc> {
        let gains = self.gains(kp, ki, kd)?;
        let report = analyzer::analyze_with(&self.context()?, &gains, self.margins.as_ref())?;
        Ok(AnalysisDoc::from_report(&report, self.scaling()))
    }

    /// The analysis document as written by `analyze` and served by
    /// `/api/analyze`.
    pub fn analysis_json(&self, kp: f64, ki: f64, kd: f64) -> AppResult<String> {
        Ok(schema::to_json(&self.analyze(kp, ki, kd)?))
    }

    /// Closed-loop response of the nominal plant. Unit step or unit-slope ramp.
    pub fn simulate(&self, kp: f64, ki: f64, kd: f64, reference: Reference, n: usize, force: bool) -> AppResult<SimDoc> {
        if n == 0 {
            return Err(AppError::Config("simulation needs at least one step".into()));
        }
        let gains = self.gains(kp, ki, kd)?;
        let r = match reference {
            Reference::Step => analyzer::step_reference(n, 1.0),
            Reference::Ramp => analyzer::ramp_reference(n, 1.0, self.sample_time),
        };
        let sim = analyzer::simulate_closed_loop(&self.plants[0], &gains, &r, force)?;
        Ok(SimDoc::from_sim(&sim, self.sample_time))
    }

    pub fn simulation_json(&self, kp: f64, ki: f64, kd: f64, reference: Reference, n: usize, force: bool) -> AppResult<String> {
        Ok(schema::to_json(&self.simulate(kp, ki, kd, reference, n, force)?))
    }
}

pub fn read_config(path: &Path) -> AppResult<ProjectConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> AppResult<ProjectConfig> {
    serde_json::from_str(text).map_err(|e| AppError::Config(format!("config: {e}")))
}

/// Discretizes continuous plants at `sample_time`; discrete plants must
/// agree with it when given.
pub fn discretize(plant: &TransferFunction, sample_time: Option<f64>) -> AppResult<TransferFunction> {
    match (plant.sample_time(), sample_time) {
        (None, Some(t)) => Ok(plant.c2d_zoh(t)?),
        (None, None) => Err(AppError::Config("sample_time is required for a continuous plant".into())),
        (Some(tp), Some(t)) if (tp - t).abs() > 1e-12 * t.abs() => Err(AppError::Config(format!(
            "sample_time {t} differs from the discrete plant's {tp}"
        ))),
        (Some(_), _) => Ok(plant.clone()),
    }
}
