//! JSON documents for transfer functions, boundary curves, region maps,
//! analysis reports, simulations and sweeps. Every top-level document
//! carries `version`.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use pidspace_core::analyzer::{AnalysisReport, Check, Crossover, Flags, Margins, RobustPerformance, SimResult};
use pidspace_core::boundary::{
    BoundaryCurve, BoundaryKind, BoundaryPoint, Degeneracy, GainPlane, Line, MarginSpec, SkipReason, WeightRole,
    WeightSpec,
};
use pidspace_core::region::{self, Clipped, GridSpec, RegionMap, RegionMetadata, SweepAxis, SweepResult, SweepSlice};
use pidspace_core::tf::Gain;
use pidspace_core::{Complex, GainScaling, PidGains, Polynomial, Structure, TimeDomain, TransferFunction};

use crate::error::{AppError, AppResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Floats that may be infinite are written as numbers or the strings
/// `"inf"`, `"-inf"`, `"nan"`.
mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainName {
    Kp,
    Ki,
    Kd,
}

impl From<Gain> for GainName {
    fn from(g: Gain) -> Self {
        match g {
            Gain::Kp => GainName::Kp,
            Gain::Ki => GainName::Ki,
            Gain::Kd => GainName::Kd,
        }
    }
}

impl From<GainName> for Gain {
    fn from(g: GainName) -> Self {
        match g {
            GainName::Kp => Gain::Kp,
            GainName::Ki => Gain::Ki,
            GainName::Kd => Gain::Kd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureName {
    P,
    PI,
    PD,
    PID,
}

impl From<Structure> for StructureName {
    fn from(s: Structure) -> Self {
        match s {
            Structure::P => StructureName::P,
            Structure::PI => StructureName::PI,
            Structure::PD => StructureName::PD,
            Structure::PID => StructureName::PID,
        }
    }
}

impl From<StructureName> for Structure {
    fn from(s: StructureName) -> Self {
        match s {
            StructureName::P => Structure::P,
            StructureName::PI => Structure::PI,
            StructureName::PD => Structure::PD,
            StructureName::PID => Structure::PID,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingName {
    #[default]
    Standard,
    SampleTime,
}

impl From<GainScaling> for ScalingName {
    fn from(s: GainScaling) -> Self {
        match s {
            GainScaling::Standard => ScalingName::Standard,
            GainScaling::SampleTime => ScalingName::SampleTime,
        }
    }
}

impl From<ScalingName> for GainScaling {
    fn from(s: ScalingName) -> Self {
        match s {
            ScalingName::Standard => GainScaling::Standard,
            ScalingName::SampleTime => GainScaling::SampleTime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainName {
    Continuous,
    Discrete,
}

/// A transfer function, coefficients highest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfDoc {
    pub domain: DomainName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_time: Option<f64>,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl TfDoc {
    pub fn from_tf(tf: &TransferFunction) -> Self {
        Self {
            domain: if tf.is_discrete() {
                DomainName::Discrete
            } else {
                DomainName::Continuous
            },
            sample_time: tf.sample_time(),
            num: tf.num().coeffs().to_vec(),
            den: tf.den().coeffs().to_vec(),
        }
    }

    pub fn to_tf(&self) -> AppResult<TransferFunction> {
        let tf = match (self.domain, self.sample_time) {
            (DomainName::Continuous, None) => TransferFunction::continuous(&self.num, &self.den)?,
            (DomainName::Continuous, Some(_)) => {
                return Err(AppError::Config("a continuous transfer function has no sample_time".into()))
            }
            (DomainName::Discrete, Some(t)) => TransferFunction::discrete(&self.num, &self.den, t)?,
            (DomainName::Discrete, None) => {
                return Err(AppError::Config("a discrete transfer function needs sample_time".into()))
            }
        };
        tf.ensure_proper()?;
        Ok(tf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneDoc {
    pub x: GainName,
    pub y: GainName,
    pub fixed: f64,
    pub structure: StructureName,
    pub scaling: ScalingName,
}

impl PlaneDoc {
    pub fn from_plane(p: &GainPlane) -> Self {
        Self {
            x: p.x_axis.into(),
            y: p.y_axis.into(),
            fixed: p.fixed_value,
            structure: p.structure.into(),
            scaling: p.scaling.into(),
        }
    }

    pub fn to_plane(&self) -> AppResult<GainPlane> {
        Ok(GainPlane::new(
            self.x.into(),
            self.y.into(),
            self.fixed,
            self.structure.into(),
            self.scaling.into(),
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineDoc {
    pub point: [f64; 2],
    pub direction: [f64; 2],
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipName {
    PlantPole,
    PlantGainZero,
    Singular,
    SmallSine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyName {
    RootAlways,
    RootNever,
}

/// `points` rows are `[x, y, theta]` or `[x, y, theta, theta_L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryDoc {
    pub kind: String,
    pub constraint_value: f64,
    pub points: Vec<Vec<f64>>,
    pub singular_segments: Vec<LineDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<DegeneracyName>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<(f64, SkipName)>,
}

impl BoundaryDoc {
    pub fn from_curve(c: &BoundaryCurve) -> Self {
        Self {
            kind: c.kind.name().to_string(),
            constraint_value: c.constraint_value,
            points: c
                .points
                .iter()
                .map(|p| match p.theta_l {
                    Some(tl) => vec![p.x, p.y, p.theta, tl],
                    None => vec![p.x, p.y, p.theta],
                })
                .collect(),
            singular_segments: c
                .singular_segments
                .iter()
                .map(|l| LineDoc {
                    point: l.point,
                    direction: l.direction,
                    theta: l.theta,
                })
                .collect(),
            degenerate: c.degenerate.map(|d| match d {
                Degeneracy::RootAlways => DegeneracyName::RootAlways,
                Degeneracy::RootNever => DegeneracyName::RootNever,
            }),
            skipped: c
                .skipped
                .iter()
                .map(|(t, r)| {
                    let r = match r {
                        SkipReason::PlantPole => SkipName::PlantPole,
                        SkipReason::PlantGainZero => SkipName::PlantGainZero,
                        SkipReason::Singular => SkipName::Singular,
                        SkipReason::SmallSine => SkipName::SmallSine,
                    };
                    (*t, r)
                })
                .collect(),
        }
    }

    pub fn to_curve(&self) -> AppResult<BoundaryCurve> {
        let kind = BoundaryKind::from_name(&self.kind)
            .ok_or_else(|| AppError::Config(format!("unknown boundary kind {:?}", self.kind)))?;
        let points = self
            .points
            .iter()
            .map(|p| match p.as_slice() {
                [x, y, theta] => Ok(BoundaryPoint { x: *x, y: *y, theta: *theta, theta_l: None }),
                [x, y, theta, tl] => Ok(BoundaryPoint { x: *x, y: *y, theta: *theta, theta_l: Some(*tl) }),
                _ => Err(AppError::Config("boundary point needs 3 or 4 values".into())),
            })
            .collect::<AppResult<Vec<_>>>()?;
        Ok(BoundaryCurve {
            kind,
            constraint_value: self.constraint_value,
            points,
            singular_segments: self
                .singular_segments
                .iter()
                .map(|l| Line {
                    point: l.point,
                    direction: l.direction,
                    theta: l.theta,
                })
                .collect(),
            degenerate: self.degenerate.map(|d| match d {
                DegeneracyName::RootAlways => Degeneracy::RootAlways,
                DegeneracyName::RootNever => Degeneracy::RootNever,
            }),
            skipped: self
                .skipped
                .iter()
                .map(|(t, r)| {
                    let r = match r {
                        SkipName::PlantPole => SkipReason::PlantPole,
                        SkipName::PlantGainZero => SkipReason::PlantGainZero,
                        SkipName::Singular => SkipReason::Singular,
                        SkipName::SmallSine => SkipReason::SmallSine,
                    };
                    (*t, r)
                })
                .collect(),
        })
    }
}

/// First-order weight parameters; the role is given by the enclosing field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightParams {
    pub l: f64,
    pub h: f64,
    /// rad/s
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsDoc {
    pub sensitivity: WeightParams,
    pub complementary: WeightParams,
}

impl WeightsDoc {
    pub fn specs(&self) -> (WeightSpec, WeightSpec) {
        let s = self.sensitivity;
        let t = self.complementary;
        (
            WeightSpec { l: s.l, h: s.h, omega: s.omega, role: WeightRole::Sensitivity },
            WeightSpec { l: t.l, h: t.h, omega: t.omega, role: WeightRole::Complementary },
        )
    }

    pub fn from_specs(ws: &WeightSpec, wt: &WeightSpec) -> Self {
        Self {
            sensitivity: WeightParams { l: ws.l, h: ws.h, omega: ws.omega },
            complementary: WeightParams { l: wt.l, h: wt.h, omega: wt.omega },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitsDoc {
    pub stable: u8,
    pub pm: u8,
    pub gm: u8,
    pub ms: u8,
}

const BITS: BitsDoc = BitsDoc {
    stable: region::STABLE,
    pm: region::PM,
    gm: region::GM,
    ms: region::MS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClippedDoc {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
    pub top: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetadataDoc {
    pub sample_time: f64,
    pub plant_count: usize,
    pub pm_min: Option<f64>,
    pub pm_max: Option<f64>,
    pub gm_min: Option<f64>,
    pub weights: Option<WeightsDoc>,
}

/// Region map. `cells` is base64 of one byte per cell, row-major from the
/// bottom row (`index = j * nx + i`); each byte is a bitmask per `bits`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionMapDoc {
    pub version: u32,
    pub plane: PlaneDoc,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub bits: BitsDoc,
    pub required: u8,
    pub evaluated: u8,
    pub member_count: usize,
    pub cells: String,
    pub clipped: ClippedDoc,
    pub metadata: MetadataDoc,
    pub warnings: Vec<String>,
    pub boundaries: Vec<BoundaryDoc>,
}

impl RegionMapDoc {
    pub fn from_map(m: &RegionMap) -> Self {
        let md = &m.metadata;
        Self {
            version: SCHEMA_VERSION,
            plane: PlaneDoc::from_plane(&m.plane),
            x_range: m.grid.x_range,
            y_range: m.grid.y_range,
            nx: m.grid.nx,
            ny: m.grid.ny,
            bits: BITS,
            required: m.required,
            evaluated: m.evaluated,
            member_count: m.member_count(),
            cells: B64.encode(&m.cells),
            clipped: ClippedDoc {
                left: m.clipped.left,
                right: m.clipped.right,
                bottom: m.clipped.bottom,
                top: m.clipped.top,
            },
            metadata: MetadataDoc {
                sample_time: md.sample_time,
                plant_count: md.plant_count,
                pm_min: md.margins.and_then(|s| s.pm_min),
                pm_max: md.margins.and_then(|s| s.pm_max),
                gm_min: md.margins.and_then(|s| s.gm_min),
                weights: md.weights.as_ref().map(|(s, t)| WeightsDoc::from_specs(s, t)),
            },
            warnings: m.warnings.clone(),
            boundaries: m.boundaries.iter().map(BoundaryDoc::from_curve).collect(),
        }
    }

    pub fn to_map(&self) -> AppResult<RegionMap> {
        check_version(self.version)?;
        let grid = GridSpec::new(self.x_range, self.y_range, self.nx, self.ny)?;
        let cells = B64
            .decode(&self.cells)
            .map_err(|e| AppError::Config(format!("cells: {e}")))?;
        if cells.len() != grid.len() {
            return Err(AppError::Config(format!(
                "cells: {} bytes for a {}x{} grid",
                cells.len(),
                self.nx,
                self.ny
            )));
        }
        let md = &self.metadata;
        let margins = (md.pm_min.is_some() || md.pm_max.is_some() || md.gm_min.is_some()).then_some(MarginSpec {
            pm_min: md.pm_min,
            pm_max: md.pm_max,
            gm_min: md.gm_min,
        });
        Ok(RegionMap {
            plane: self.plane.to_plane()?,
            grid,
            cells,
            required: self.required,
            evaluated: self.evaluated,
            boundaries: self.boundaries.iter().map(BoundaryDoc::to_curve).collect::<AppResult<_>>()?,
            clipped: Clipped {
                left: self.clipped.left,
                right: self.clipped.right,
                bottom: self.clipped.bottom,
                top: self.clipped.top,
            },
            metadata: RegionMetadata {
                sample_time: md.sample_time,
                plant_count: md.plant_count,
                margins,
                weights: md.weights.map(|w| w.specs()),
            },
            warnings: self.warnings.clone(),
        })
    }
}

fn check_version(v: u32) -> AppResult<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(AppError::Config(format!("unsupported schema version {v}, expected {SCHEMA_VERSION}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsDoc {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDoc {
    pub pass: bool,
    pub reason: String,
}

impl From<&Check> for CheckDoc {
    fn from(c: &Check) -> Self {
        Self {
            pass: c.pass,
            reason: c.reason.clone(),
        }
    }
}

impl From<&CheckDoc> for Check {
    fn from(c: &CheckDoc) -> Self {
        Check {
            pass: c.pass,
            reason: c.reason.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagsDoc {
    pub stable: CheckDoc,
    pub pm: Option<CheckDoc>,
    pub gm: Option<CheckDoc>,
    pub ms: Option<CheckDoc>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainCrossoverDoc {
    pub theta: f64,
    pub pm_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseCrossoverDoc {
    pub theta: f64,
    pub gm_db: f64,
}

/// Analysis of one gain point. `gains` are in the project's units,
/// `standard_gains` in the units of `kp + ki z/(z-1) + kd (z-1)/z`.
/// `worst_gm = null` means no phase crossover (infinite gain margin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisDoc {
    pub version: u32,
    pub structure: StructureName,
    pub scaling: ScalingName,
    pub gains: GainsDoc,
    pub standard_gains: GainsDoc,
    pub sample_time: f64,
    pub char_poly: Vec<f64>,
    /// `[re, im]` pairs.
    pub poles: Vec<[f64; 2]>,
    pub spectral_radius: f64,
    pub gain_crossovers: Vec<GainCrossoverDoc>,
    pub phase_crossovers: Vec<PhaseCrossoverDoc>,
    pub worst_pm: Option<f64>,
    pub worst_gm: Option<f64>,
    #[serde(with = "ext_f64_opt")]
    pub rp_supremum: Option<f64>,
    pub rp_arg_theta: Option<f64>,
    pub flags: FlagsDoc,
}

mod ext_f64_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::ext_f64")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl AnalysisDoc {
    pub fn from_report(r: &AnalysisReport, scaling: GainScaling) -> Self {
        let user = r.gains.from_standard(scaling, r.sample_time);
        let flags = &r.flags;
        Self {
            version: SCHEMA_VERSION,
            structure: r.gains.structure.into(),
            scaling: scaling.into(),
            gains: GainsDoc { kp: user.kp, ki: user.ki, kd: user.kd },
            standard_gains: GainsDoc { kp: r.gains.kp, ki: r.gains.ki, kd: r.gains.kd },
            sample_time: r.sample_time,
            char_poly: r.char_poly.coeffs().to_vec(),
            poles: r.poles.iter().map(|p| [p.re, p.im]).collect(),
            spectral_radius: r.spectral_radius,
            gain_crossovers: r
                .margins
                .gain_crossovers
                .iter()
                .map(|c| GainCrossoverDoc { theta: c.theta, pm_deg: c.margin })
                .collect(),
            phase_crossovers: r
                .margins
                .phase_crossovers
                .iter()
                .map(|c| PhaseCrossoverDoc { theta: c.theta, gm_db: c.margin })
                .collect(),
            worst_pm: r.worst_pm,
            worst_gm: r.worst_gm,
            rp_supremum: r.robust_performance.map(|p| p.supremum),
            rp_arg_theta: r.robust_performance.map(|p| p.theta),
            flags: FlagsDoc {
                stable: (&flags.stable).into(),
                pm: flags.pm.as_ref().map(Into::into),
                gm: flags.gm.as_ref().map(Into::into),
                ms: flags.ms.as_ref().map(Into::into),
                all_pass: flags.all_pass(),
            },
        }
    }

    pub fn to_report(&self) -> AppResult<AnalysisReport> {
        check_version(self.version)?;
        let s = self.standard_gains;
        let gains = PidGains::new(s.kp, s.ki, s.kd, self.structure.into())?;
        let robust_performance = match (self.rp_supremum, self.rp_arg_theta) {
            (Some(supremum), Some(theta)) => Some(RobustPerformance { supremum, theta }),
            (None, None) => None,
            _ => return Err(AppError::Config("rp_supremum and rp_arg_theta go together".into())),
        };
        Ok(AnalysisReport {
            gains,
            sample_time: self.sample_time,
            char_poly: Polynomial::new(self.char_poly.clone())?,
            poles: self.poles.iter().map(|p| Complex::new(p[0], p[1])).collect(),
            spectral_radius: self.spectral_radius,
            margins: Margins {
                gain_crossovers: self
                    .gain_crossovers
                    .iter()
                    .map(|c| Crossover { theta: c.theta, margin: c.pm_deg })
                    .collect(),
                phase_crossovers: self
                    .phase_crossovers
                    .iter()
                    .map(|c| Crossover { theta: c.theta, margin: c.gm_db })
                    .collect(),
            },
            worst_pm: self.worst_pm,
            worst_gm: self.worst_gm,
            robust_performance,
            flags: Flags {
                stable: (&self.flags.stable).into(),
                pm: self.flags.pm.as_ref().map(Into::into),
                gm: self.flags.gm.as_ref().map(Into::into),
                ms: self.flags.ms.as_ref().map(Into::into),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDoc {
    pub version: u32,
    pub sample_time: f64,
    pub diverging: bool,
    pub time: Vec<f64>,
    pub reference: Vec<f64>,
    pub output: Vec<f64>,
    pub error: Vec<f64>,
    pub control: Vec<f64>,
}

impl SimDoc {
    pub fn from_sim(s: &SimResult, sample_time: f64) -> Self {
        Self {
            version: SCHEMA_VERSION,
            sample_time,
            diverging: s.diverging,
            time: s.time.clone(),
            reference: s.reference.clone(),
            output: s.output.clone(),
            error: s.error.clone(),
            control: s.control.clone(),
        }
    }

    pub fn to_sim(&self) -> AppResult<SimResult> {
        check_version(self.version)?;
        let n = self.time.len();
        if [&self.reference, &self.output, &self.error, &self.control]
            .iter()
            .any(|v| v.len() != n)
        {
            return Err(AppError::Config("simulation columns differ in length".into()));
        }
        Ok(SimResult {
            time: self.time.clone(),
            reference: self.reference.clone(),
            output: self.output.clone(),
            error: self.error.clone(),
            control: self.control.clone(),
            diverging: self.diverging,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxisName {
    SampleTime,
    ThirdGain,
}

impl From<SweepAxis> for SweepAxisName {
    fn from(a: SweepAxis) -> Self {
        match a {
            SweepAxis::SampleTime => SweepAxisName::SampleTime,
            SweepAxis::ThirdGain => SweepAxisName::ThirdGain,
        }
    }
}

impl From<SweepAxisName> for SweepAxis {
    fn from(a: SweepAxisName) -> Self {
        match a {
            SweepAxisName::SampleTime => SweepAxis::SampleTime,
            SweepAxisName::ThirdGain => SweepAxis::ThirdGain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDoc {
    pub value: f64,
    pub map: Option<RegionMapDoc>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    pub version: u32,
    pub axis: SweepAxisName,
    pub values: Vec<f64>,
    pub slices: Vec<SliceDoc>,
    /// One entry per failed slice.
    pub warnings: Vec<String>,
}

impl SweepDoc {
    pub fn from_sweep(s: &SweepResult) -> Self {
        Self {
            version: SCHEMA_VERSION,
            axis: s.axis.into(),
            values: s.values(),
            slices: s
                .slices
                .iter()
                .map(|sl| SliceDoc {
                    value: sl.value,
                    map: sl.map.as_ref().map(RegionMapDoc::from_map),
                    error: sl.error.clone(),
                })
                .collect(),
            warnings: s
                .slices
                .iter()
                .filter_map(|sl| sl.error.as_ref().map(|e| format!("slice {}: {e}", sl.value)))
                .collect(),
        }
    }

    pub fn to_sweep(&self) -> AppResult<SweepResult> {
        check_version(self.version)?;
        Ok(SweepResult {
            axis: self.axis.into(),
            slices: self
                .slices
                .iter()
                .map(|sl| {
                    Ok(SweepSlice {
                        value: sl.value,
                        map: sl.map.as_ref().map(RegionMapDoc::to_map).transpose()?,
                        error: sl.error.clone(),
                    })
                })
                .collect::<AppResult<_>>()?,
        })
    }
}

/// Pretty JSON with a trailing newline, the form written by every command
/// and returned by the service.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}

pub fn discrete_domain(t: f64) -> TimeDomain {
    TimeDomain::Discrete { sample_time: t }
}
