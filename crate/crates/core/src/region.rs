//! Region maps: every cell of a gain-plane grid classified by the point
//! oracle, with boundary curves attached as overlays.
//!
//! Cells are sampled at their centers. Cell `(i, j)` (column `i` along x,
//! row `j` along y) is stored at `j * nx + i`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::analyzer::{self, AnalysisSettings, LoopContext};
use crate::boundary::{self, BoundaryCurve, GainPlane, MarginSpec, WeightPair, WeightSpec};
use crate::grid;
use crate::tf::TransferFunction;
use crate::{Error, Result};

pub const STABLE: u8 = 1;
pub const PM: u8 = 2;
pub const GM: u8 = 4;
pub const MS: u8 = 8;

pub const DEFAULT_GRID: usize = 201;
pub const DEFAULT_MS_FREQUENCIES: usize = 32;

/// Requirements a gain point must meet for every plant of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub require_stability: bool,
    pub margins: Option<MarginSpec>,
    pub weights: Option<WeightPair>,
    pub plants: Vec<TransferFunction>,
}

impl ConstraintSet {
    pub fn stability(plant: TransferFunction) -> Self {
        Self {
            require_stability: true,
            margins: None,
            weights: None,
            plants: vec![plant],
        }
    }

    pub fn validate(&self) -> Result<f64> {
        if self.plants.is_empty() {
            return Err(Error::InvalidSpec("no plant".into()));
        }
        let t = self.plants[0].ensure_discrete()?;
        for p in &self.plants[1..] {
            let tp = p.ensure_discrete()?;
            if (tp - t).abs() > 1e-12 * t {
                return Err(Error::SampleTimeMismatch(t, tp));
            }
        }
        if let Some(m) = &self.margins {
            m.validate()?;
        }
        if let Some(w) = &self.weights {
            let tw = w.sample_time();
            if (tw - t).abs() > 1e-12 * t {
                return Err(Error::SampleTimeMismatch(t, tw));
            }
        }
        if self.required_mask() == 0 {
            return Err(Error::InvalidSpec("no active constraint".into()));
        }
        Ok(t)
    }

    /// Bits a multi-objective member must have.
    pub fn required_mask(&self) -> u8 {
        let mut m = 0;
        if self.require_stability {
            m |= STABLE;
        }
        if let Some(s) = &self.margins {
            if s.constrains_pm() {
                m |= PM;
            }
            if s.constrains_gm() {
                m |= GM;
            }
        }
        if self.weights.is_some() {
            m |= MS;
        }
        m
    }
}

/// Per-plant cached oracles for one controller structure.
#[derive(Debug, Clone)]
pub struct Classifier {
    contexts: Vec<LoopContext>,
    margins: Option<MarginSpec>,
    mask: u8,
    sample_time: f64,
}

impl Classifier {
    pub fn new(constraints: &ConstraintSet, plane: &GainPlane, settings: &AnalysisSettings) -> Result<Self> {
        let sample_time = constraints.validate()?;
        plane.validate()?;
        let contexts = constraints
            .plants
            .iter()
            .map(|p| LoopContext::new(p, plane.structure, constraints.weights.as_ref(), settings))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            contexts,
            margins: constraints.margins,
            mask: constraints.required_mask(),
            sample_time,
        })
    }

    /// Bits computed for every point. Stability is always evaluated.
    pub fn evaluated_mask(&self) -> u8 {
        self.mask | STABLE
    }

    pub fn required_mask(&self) -> u8 {
        self.mask
    }

    pub fn sample_time(&self) -> f64 {
        self.sample_time
    }

    /// Bitmask of the constraints met at plane coordinates `(x, y)` by
    /// every plant.
    pub fn classify(&self, plane: &GainPlane, x: f64, y: f64) -> Result<u8> {
        let gains = plane.standard_gains_at(x, y, self.sample_time);
        let mut bits = self.evaluated_mask();
        for ctx in &self.contexts {
            let (_, _, rho) = analyzer::closed_loop_poles(ctx.plant(), &gains)?;
            if !analyzer::is_stable(rho) {
                bits &= !STABLE;
            }
            if bits & (PM | GM) != 0 {
                let m = ctx.margins(&gains)?;
                let spec = self.margins.expect("PM/GM bits imply a margin spec");
                if bits & PM != 0 && !analyzer::pm_check(&m, &spec).pass {
                    bits &= !PM;
                }
                if bits & GM != 0 && !analyzer::gm_check(&m, spec.gm_min.expect("GM bit")).pass {
                    bits &= !GM;
                }
            }
            if bits & MS != 0 {
                let rp = ctx.robust_performance(&gains)?.expect("MS bit implies weights");
                if !analyzer::ms_check(&rp).pass {
                    bits &= !MS;
                }
            }
        }
        Ok(bits)
    }
}

/// Bitmask of one point; builds the oracles on every call.
pub fn classify_point(constraints: &ConstraintSet, plane: &GainPlane, x: f64, y: f64) -> Result<u8> {
    Classifier::new(constraints, plane, &AnalysisSettings::default())?.classify(plane, x, y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_range: [f64; 2], y_range: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        let g = Self {
            x_range,
            y_range,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(Error::InvalidSpec("plane ranges must be finite with min < max".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidSpec("grid counts must be at least 2".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_range[1] - self.x_range[0]) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_range[1] - self.y_range[0]) / self.ny as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, index: usize) -> (f64, f64) {
        let (i, j) = (index % self.nx, index / self.nx);
        (
            self.x_range[0] + (i as f64 + 0.5) * self.dx(),
            self.y_range[0] + (j as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell containing a point, if inside the ranges.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<usize> {
        let fi = (x - self.x_range[0]) / self.dx();
        let fj = (y - self.y_range[0]) / self.dy();
        if !(fi >= 0.0 && fj >= 0.0) {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        (i < self.nx && j < self.ny).then_some(j * self.nx + i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSettings {
    pub analysis: AnalysisSettings,
    pub boundaries: bool,
    pub boundary_points: usize,
    /// Frequencies (log-spaced) that get a mixed-sensitivity overlay curve.
    pub ms_frequencies: usize,
    pub theta_l_points: usize,
}

impl Default for MapSettings {
    fn default() -> Self {
        Self {
            analysis: AnalysisSettings::default(),
            boundaries: true,
            boundary_points: grid::DEFAULT_BOUNDARY_POINTS,
            ms_frequencies: DEFAULT_MS_FREQUENCIES,
            theta_l_points: grid::DEFAULT_THETA_L_POINTS,
        }
    }
}

/// Edges of the plane touched by the all-bits region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Clipped {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
    pub top: bool,
}

impl Clipped {
    pub fn any(&self) -> bool {
        self.left || self.right || self.bottom || self.top
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMetadata {
    pub sample_time: f64,
    pub plant_count: usize,
    pub margins: Option<MarginSpec>,
    pub weights: Option<(WeightSpec, WeightSpec)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub plane: GainPlane,
    pub grid: GridSpec,
    pub cells: Vec<u8>,
    /// Bits a cell needs to be a multi-objective member.
    pub required: u8,
    /// Bits that were evaluated.
    pub evaluated: u8,
    pub boundaries: Vec<BoundaryCurve>,
    pub clipped: Clipped,
    pub metadata: RegionMetadata,
    pub warnings: Vec<String>,
}

impl RegionMap {
    pub fn is_member(&self, index: usize) -> bool {
        self.cells[index] & self.required == self.required
    }

    pub fn member_count(&self) -> usize {
        (0..self.cells.len()).filter(|i| self.is_member(*i)).count()
    }

    /// Bits of the cell containing `(x, y)`.
    pub fn bits_at(&self, x: f64, y: f64) -> Option<u8> {
        self.grid.cell_of(x, y).map(|i| self.cells[i])
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.grid.cell_of(x, y).is_some_and(|i| self.is_member(i))
    }

    /// Centers of all member cells in storage order.
    pub fn member_centers(&self) -> Vec<(f64, f64)> {
        (0..self.cells.len())
            .filter(|i| self.is_member(*i))
            .map(|i| self.grid.center(i))
            .collect()
    }

    /// Cells within one cell (including diagonals) of any boundary curve
    /// point, polyline segment or singular line.
    pub fn proximity_mask(&self) -> Vec<bool> {
        let g = &self.grid;
        let mut hit = vec![false; g.len()];
        let (w, h) = (g.x_range[1] - g.x_range[0], g.y_range[1] - g.y_range[0]);
        let step = 0.25 * g.dx().min(g.dy());
        let mut mark = |x: f64, y: f64| {
            if let Some(i) = g.cell_of(x, y) {
                hit[i] = true;
            }
        };
        let segment = |a: (f64, f64), b: (f64, f64), mark: &mut dyn FnMut(f64, f64)| {
            let Some((a, b)) = clip_segment(a, b, g) else { return };
            let len = (b.0 - a.0).hypot(b.1 - a.1);
            let n = (len / step).ceil().max(1.0) as usize;
            for k in 0..=n {
                let t = k as f64 / n as f64;
                mark(a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            }
        };
        for c in &self.boundaries {
            for p in &c.points {
                mark(p.x, p.y);
            }
            // consecutive points far apart are a jump, not a curve
            for pair in c.points.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                if ((b.x - a.x) / w).hypot((b.y - a.y) / h) < 0.25 {
                    segment((a.x, a.y), (b.x, b.y), &mut mark);
                }
            }
            for l in &c.singular_segments {
                let r = 4.0 * w.hypot(h) + l.point[0].hypot(l.point[1]);
                let a = (l.point[0] - r * l.direction[0], l.point[1] - r * l.direction[1]);
                let b = (l.point[0] + r * l.direction[0], l.point[1] + r * l.direction[1]);
                segment(a, b, &mut mark);
            }
        }
        dilate(&hit, g.nx, g.ny)
    }
}

/// Liang-Barsky clip of a segment to the grid rectangle.
fn clip_segment(a: (f64, f64), b: (f64, f64), g: &GridSpec) -> Option<((f64, f64), (f64, f64))> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [
        (-dx, a.0 - g.x_range[0]),
        (dx, g.x_range[1] - a.0),
        (-dy, a.1 - g.y_range[0]),
        (dy, g.y_range[1] - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then(|| ((a.0 + t0 * dx, a.1 + t0 * dy), (a.0 + t1 * dx, a.1 + t1 * dy)))
}

fn dilate(hit: &[bool], nx: usize, ny: usize) -> Vec<bool> {
    let mut out = hit.to_vec();
    for j in 0..ny {
        for i in 0..nx {
            if !hit[j * nx + i] {
                continue;
            }
            for jj in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                for ii in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                    out[jj * nx + ii] = true;
                }
            }
        }
    }
    out
}

/// Fraction of cells outside `near` whose `bit` equals the majority value
/// of their connected component (4-neighbour, cells outside `near` only).
///
/// Membership can only change across a boundary, so each component should
/// be uniform and the fraction should be 1.
pub fn component_agreement(map: &RegionMap, bit: u8, near: &[bool]) -> f64 {
    let (nx, ny) = (map.grid.nx, map.grid.ny);
    let mut label = vec![usize::MAX; nx * ny];
    let mut agree = 0usize;
    let mut total = 0usize;
    let mut stack = Vec::new();
    let mut next = 0;
    for start in 0..nx * ny {
        if near[start] || label[start] != usize::MAX {
            continue;
        }
        let (mut on, mut off) = (0usize, 0usize);
        stack.push(start);
        label[start] = next;
        while let Some(c) = stack.pop() {
            if map.cells[c] & bit != 0 {
                on += 1;
            } else {
                off += 1;
            }
            let (i, j) = (c % nx, c / nx);
            let mut visit = |n: usize| {
                if !near[n] && label[n] == usize::MAX {
                    label[n] = next;
                    stack.push(n);
                }
            };
            if i > 0 {
                visit(c - 1);
            }
            if i + 1 < nx {
                visit(c + 1);
            }
            if j > 0 {
                visit(c - nx);
            }
            if j + 1 < ny {
                visit(c + nx);
            }
        }
        agree += on.max(off);
        total += on + off;
        next += 1;
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}

/// Everything needed to classify cells independently, so callers can run
/// [`RegionJob::classify_cell`] in parallel and hand the results to
/// [`RegionJob::finish`].
#[derive(Debug, Clone)]
pub struct RegionJob {
    constraints: ConstraintSet,
    classifier: Classifier,
    plane: GainPlane,
    grid: GridSpec,
    settings: MapSettings,
    weight_specs: Option<(WeightSpec, WeightSpec)>,
}

impl RegionJob {
    pub fn new(constraints: &ConstraintSet, plane: &GainPlane, grid: GridSpec, settings: &MapSettings) -> Result<Self> {
        grid.validate()?;
        let classifier = Classifier::new(constraints, plane, &settings.analysis)?;
        Ok(Self {
            constraints: constraints.clone(),
            classifier,
            plane: *plane,
            grid,
            settings: *settings,
            weight_specs: None,
        })
    }

    /// Records the weight parameters in the map metadata.
    pub fn with_weight_specs(mut self, specs: Option<(WeightSpec, WeightSpec)>) -> Self {
        self.weight_specs = specs;
        self
    }

    pub fn cell_count(&self) -> usize {
        self.grid.len()
    }

    pub fn classify_cell(&self, index: usize) -> Result<u8> {
        let (x, y) = self.grid.center(index);
        self.classifier.classify(&self.plane, x, y)
    }

    /// Overlay curves for every plant. Failures become warnings.
    pub fn boundaries(&self) -> (Vec<BoundaryCurve>, Vec<String>) {
        let mut curves = Vec::new();
        let mut warnings = Vec::new();
        if !self.settings.boundaries {
            return (curves, warnings);
        }
        let s = &self.settings;
        let theta = grid::open_half_circle(s.boundary_points);
        for (k, plant) in self.constraints.plants.iter().enumerate() {
            let mut note = |what: &str, e: Error| warnings.push(format!("plant {k}: {what} boundary failed: {e}"));
            if self.constraints.require_stability {
                match boundary::stability_crb(plant, &self.plane, &theta) {
                    Ok(c) => curves.push(c),
                    Err(e) => note("CRB", e),
                }
                match boundary::stability_rrb(plant, &self.plane) {
                    Ok(c) => curves.extend(c),
                    Err(e) => note("RRB", e),
                }
            }
            if let Some(m) = &self.constraints.margins {
                for pm in m.pm_levels() {
                    match boundary::pm_boundary(plant, &self.plane, pm, &theta) {
                        Ok(c) => curves.push(c),
                        Err(e) => note("PM", e),
                    }
                }
                if let Some(gm) = m.gm_min {
                    match boundary::gm_boundary(plant, &self.plane, gm, &theta) {
                        Ok(c) => curves.push(c),
                        Err(e) => note("GM", e),
                    }
                }
            }
            if let Some(w) = &self.constraints.weights {
                let freqs = grid::log_spaced(s.ms_frequencies.max(1), 1e-3 * PI, (1.0 - 1e-3) * PI);
                let tl = grid::full_circle(s.theta_l_points);
                match boundary::ms_boundary(plant, w, &self.plane, &freqs, &tl) {
                    Ok(c) => curves.extend(c),
                    Err(e) => note("MS", e),
                }
            }
        }
        (curves, warnings)
    }

    /// Assembles the map from per-cell results in storage order.
    pub fn finish(self, cells: Vec<Result<u8>>, boundaries: (Vec<BoundaryCurve>, Vec<String>)) -> RegionMap {
        let (boundaries, mut warnings) = boundaries;
        let mut failed = 0usize;
        let cells: Vec<u8> = cells
            .into_iter()
            .map(|c| {
                c.unwrap_or_else(|_| {
                    failed += 1;
                    0
                })
            })
            .collect();
        if failed > 0 {
            warnings.push(format!("{failed} cells could not be analyzed and were left empty"));
        }
        let required = self.classifier.required_mask();
        let g = self.grid;
        let member = |i: usize, j: usize| cells[j * g.nx + i] & required == required;
        let clipped = Clipped {
            left: (0..g.ny).any(|j| member(0, j)),
            right: (0..g.ny).any(|j| member(g.nx - 1, j)),
            bottom: (0..g.nx).any(|i| member(i, 0)),
            top: (0..g.nx).any(|i| member(i, g.ny - 1)),
        };
        RegionMap {
            plane: self.plane,
            grid: g,
            cells,
            required,
            evaluated: self.classifier.evaluated_mask(),
            boundaries,
            clipped,
            metadata: RegionMetadata {
                sample_time: self.classifier.sample_time(),
                plant_count: self.constraints.plants.len(),
                margins: self.constraints.margins,
                weights: self.weight_specs,
            },
            warnings,
        }
    }
}

/// Classifies every cell in order on the calling thread.
pub fn build_region_map(
    constraints: &ConstraintSet,
    plane: &GainPlane,
    grid: GridSpec,
    settings: &MapSettings,
) -> Result<RegionMap> {
    let job = RegionJob::new(constraints, plane, grid, settings)?;
    let cells = (0..job.cell_count()).map(|i| job.classify_cell(i)).collect();
    let b = job.boundaries();
    Ok(job.finish(cells, b))
}

/// Symmetric ranges `[-s, s]` around the origin, doubling `s` from
/// `initial` until the members of a coarse `n x n` scan stay off the edges
/// or `s` reaches `cap`.
pub fn auto_range(
    classifier: &Classifier,
    plane: &GainPlane,
    initial: f64,
    cap: f64,
    n: usize,
) -> Result<([f64; 2], [f64; 2])> {
    if !(initial > 0.0 && cap >= initial && n >= 2) {
        return Err(Error::InvalidSpec("auto range needs 0 < initial <= cap and n >= 2".into()));
    }
    let required = classifier.required_mask();
    let mut s = initial;
    loop {
        let g = GridSpec::new([-s, s], [-s, s], n, n)?;
        let mut touches = false;
        let mut any = false;
        for idx in 0..g.len() {
            let (x, y) = g.center(idx);
            let bits = classifier.classify(plane, x, y).unwrap_or(0);
            if bits & required == required {
                any = true;
                let (i, j) = (idx % n, idx / n);
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    touches = true;
                }
            }
        }
        if (any && !touches) || s * 2.0 > cap {
            return Ok(([-s, s], [-s, s]));
        }
        s *= 2.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SampleTime,
    ThirdGain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSlice {
    pub value: f64,
    pub map: Option<RegionMap>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub slices: Vec<SweepSlice>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.value).collect()
    }
}

/// Plants and requirements before discretization, for sample-time sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    /// Continuous plants are rediscretized per slice; discrete plants keep
    /// their own sample time.
    pub plants: Vec<TransferFunction>,
    pub require_stability: bool,
    pub margins: Option<MarginSpec>,
    pub weight_specs: Option<(WeightSpec, WeightSpec)>,
}

impl SweepBase {
    /// Constraint set at sample time `t`. Weights are discretized at the
    /// plants' resulting sample time.
    pub fn at_sample_time(&self, t: f64) -> Result<ConstraintSet> {
        let plants = self
            .plants
            .iter()
            .map(|p| if p.is_discrete() { Ok(p.clone()) } else { p.c2d_zoh(t) })
            .collect::<Result<Vec<_>>>()?;
        let tw = plants
            .first()
            .and_then(|p| p.sample_time())
            .ok_or(Error::InvalidSpec("no plant".into()))?;
        let weights = match &self.weight_specs {
            Some((ws, wt)) => Some(WeightPair::from_specs(ws, wt, tw)?),
            None => None,
        };
        Ok(ConstraintSet {
            require_stability: self.require_stability,
            margins: self.margins,
            weights,
            plants,
        })
    }
}

/// One map per sample time. `build` produces each map, so callers choose
/// how cells are evaluated. A slice that fails is recorded and skipped.
pub fn sweep_sample_time(
    base: &SweepBase,
    plane: &GainPlane,
    values: &[f64],
    mut build: impl FnMut(&ConstraintSet, &GainPlane) -> Result<RegionMap>,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let slices = values
        .iter()
        .map(|&t| {
            let r = base.at_sample_time(t).and_then(|c| build(&c, plane));
            slice(t, r)
        })
        .collect();
    Ok(SweepResult {
        axis: SweepAxis::SampleTime,
        slices,
    })
}

/// One map per value of the gain not on the plane.
pub fn sweep_third_gain(
    constraints: &ConstraintSet,
    plane: &GainPlane,
    values: &[f64],
    mut build: impl FnMut(&ConstraintSet, &GainPlane) -> Result<RegionMap>,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let slices = values
        .iter()
        .map(|&v| {
            let p = GainPlane {
                fixed_value: v,
                ..*plane
            };
            let r = p.validate().and_then(|_| build(constraints, &p));
            slice(v, r)
        })
        .collect();
    Ok(SweepResult {
        axis: SweepAxis::ThirdGain,
        slices,
    })
}

fn slice(value: f64, r: Result<RegionMap>) -> SweepSlice {
    match r {
        Ok(map) => SweepSlice {
            value,
            map: Some(map),
            error: None,
        },
        Err(e) => SweepSlice {
            value,
            map: None,
            error: Some(format!("{e}")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::WeightRole;
    use crate::tf::{Gain, Structure};
    use crate::{GainScaling, PidGains};

    fn g1() -> TransferFunction {
        TransferFunction::discrete(&[1.0], &[1.0, 1.0, 0.0], 1.0).unwrap()
    }

    fn small_settings() -> MapSettings {
        MapSettings {
            analysis: AnalysisSettings {
                margin_points: 1024,
                rp_points: 512,
            },
            boundary_points: 512,
            ms_frequencies: 4,
            theta_l_points: 90,
            ..MapSettings::default()
        }
    }

    #[test]
    fn integrator_with_zero_gains_is_unstable() {
        let c = ConstraintSet::stability(TransferFunction::discrete(&[1.0], &[1.0, -0.5], 1.0).unwrap());
        let plane = GainPlane::pi(GainScaling::Standard);
        assert_eq!(classify_point(&c, &plane, 0.0, 0.0).unwrap() & STABLE, 0);
    }

    #[test]
    fn pd_point_outside_region_has_pole_outside() {
        let c = ConstraintSet::stability(g1());
        let plane = GainPlane::pd(GainScaling::Standard);
        let (kd, kp) = (0.9, 1.5);
        assert_eq!(classify_point(&c, &plane, kd, kp).unwrap() & STABLE, 0);
        // z^3 + z^2 + (kp + kd) z - kd
        let p = crate::Polynomial::from_slice(&[1.0, 1.0, kp + kd, -kd]).unwrap();
        assert!(p.roots().unwrap().iter().any(|r| r.norm() > 1.0));
    }

    #[test]
    fn map_indexing_and_lookup() {
        let g = GridSpec::new([0.0, 2.0], [0.0, 1.0], 4, 2).unwrap();
        assert_eq!(g.center(0), (0.25, 0.25));
        assert_eq!(g.center(5), (0.75, 0.75));
        assert_eq!(g.cell_of(0.75, 0.75), Some(5));
        assert_eq!(g.cell_of(2.5, 0.5), None);
        assert!(GridSpec::new([1.0, 0.0], [0.0, 1.0], 4, 4).is_err());
        assert!(GridSpec::new([0.0, 1.0], [0.0, 1.0], 1, 4).is_err());
    }

    fn pi_map(n: usize) -> RegionMap {
        let c = ConstraintSet::stability(g1());
        let plane = GainPlane::pi(GainScaling::Standard);
        let grid = GridSpec::new([-1.0, 1.5], [-0.5, 1.5], n, n).unwrap();
        build_region_map(&c, &plane, grid, &small_settings()).unwrap()
    }

    #[test]
    fn stability_map_agrees_with_boundaries() {
        let map = pi_map(61);
        assert!(map.member_count() > 0);
        let near = map.proximity_mask();
        assert!(component_agreement(&map, STABLE, &near) == 1.0);
        // flips along rows happen only next to a boundary
        let nx = map.grid.nx;
        for j in 0..map.grid.ny {
            for i in 0..nx - 1 {
                let (a, b) = (j * nx + i, j * nx + i + 1);
                if (map.cells[a] ^ map.cells[b]) & STABLE != 0 {
                    assert!(near[a] || near[b], "row {j} col {i}");
                }
            }
        }
    }

    #[test]
    fn map_is_deterministic() {
        assert_eq!(pi_map(21), pi_map(21));
    }

    #[test]
    fn clipped_flags() {
        let c = ConstraintSet::stability(g1());
        let plane = GainPlane::pi(GainScaling::Standard);
        let s = MapSettings { boundaries: false, ..small_settings() };
        let inner = GridSpec::new([0.1, 0.2], [0.01, 0.02], 5, 5).unwrap();
        let map = build_region_map(&c, &plane, inner, &s).unwrap();
        assert_eq!(map.member_count(), 25);
        assert!(map.clipped.left && map.clipped.right && map.clipped.top && map.clipped.bottom);
        let wide = GridSpec::new([-3.0, 3.0], [-3.0, 3.0], 31, 31).unwrap();
        let map = build_region_map(&c, &plane, wide, &s).unwrap();
        assert!(map.member_count() > 0 && !map.clipped.any());
    }

    #[test]
    fn family_is_cellwise_and() {
        let g2 = TransferFunction::discrete(&[0.5], &[1.0, 0.8, 0.0], 1.0).unwrap();
        let plane = GainPlane::pi(GainScaling::Standard);
        let grid = GridSpec::new([-1.0, 1.5], [-0.5, 1.5], 25, 25).unwrap();
        let s = MapSettings { boundaries: false, ..small_settings() };
        let a = build_region_map(&ConstraintSet::stability(g1()), &plane, grid, &s).unwrap();
        let b = build_region_map(&ConstraintSet::stability(g2.clone()), &plane, grid, &s).unwrap();
        let both = ConstraintSet {
            plants: vec![g1(), g2],
            ..ConstraintSet::stability(g1())
        };
        let ab = build_region_map(&both, &plane, grid, &s).unwrap();
        for i in 0..grid.len() {
            assert_eq!(ab.cells[i], a.cells[i] & b.cells[i]);
        }
    }

    fn steering() -> TransferFunction {
        TransferFunction::continuous(&[227.6, 5536.0, 36260.0], &[1.0, 22.16, 37.92, 0.0, 0.0])
            .unwrap()
            .c2d_zoh(0.01)
            .unwrap()
    }

    fn paper_constraints(margins: MarginSpec) -> ConstraintSet {
        let ws = WeightSpec { l: 0.5, h: 4.0, omega: 5.0, role: WeightRole::Sensitivity };
        let wt = WeightSpec { l: 0.2, h: 1.8, omega: 120.0, role: WeightRole::Complementary };
        ConstraintSet {
            require_stability: true,
            margins: Some(margins),
            weights: Some(WeightPair::from_specs(&ws, &wt, 0.01).unwrap()),
            plants: vec![steering()],
        }
    }

    #[test]
    fn adding_constraints_never_adds_members() {
        let plane = GainPlane::pd(GainScaling::SampleTime);
        let grid = GridSpec::new([0.0, 0.3], [0.0, 1.0], 15, 15).unwrap();
        let s = MapSettings { boundaries: false, ..small_settings() };
        let base = ConstraintSet::stability(steering());
        let a = build_region_map(&base, &plane, grid, &s).unwrap();
        let spec = MarginSpec { pm_min: Some(20.0), pm_max: Some(80.0), gm_min: None };
        let b = build_region_map(&paper_constraints(spec), &plane, grid, &s).unwrap();
        let tight = MarginSpec { pm_min: Some(179.0), pm_max: None, gm_min: None };
        let c = build_region_map(&paper_constraints(tight), &plane, grid, &s).unwrap();
        for i in 0..grid.len() {
            assert!(!b.is_member(i) || a.is_member(i));
            assert!(!c.is_member(i));
        }
        assert!(b.member_count() > 0);
        assert!(b.contains(0.07, 0.2));
    }

    #[test]
    fn oracle_closure() {
        let spec = MarginSpec { pm_min: Some(20.0), pm_max: Some(80.0), gm_min: None };
        let c = paper_constraints(spec);
        let plane = GainPlane::pd(GainScaling::SampleTime);
        let bits = classify_point(&c, &plane, 0.07, 0.2).unwrap();
        assert_eq!(bits, STABLE | PM | MS);
        let k = plane.standard_gains_at(0.07, 0.2, 0.01);
        let r = analyzer::analyze(&c.plants[0], &k, Some(&spec), c.weights.as_ref()).unwrap();
        assert!(r.flags.stable.pass && r.flags.pm.unwrap().pass && r.flags.ms.unwrap().pass);
    }

    #[test]
    fn discrete_plant_sample_time_sweep_is_flat() {
        let base = SweepBase {
            plants: vec![g1()],
            require_stability: true,
            margins: None,
            weight_specs: None,
        };
        let plane = GainPlane::pi(GainScaling::Standard);
        let grid = GridSpec::new([-1.0, 1.5], [-0.5, 1.5], 15, 15).unwrap();
        let s = MapSettings { boundaries: false, ..small_settings() };
        let r = sweep_sample_time(&base, &plane, &[0.01, 0.1, 1.0], |c, p| build_region_map(c, p, grid, &s)).unwrap();
        let first = &r.slices[0].map.as_ref().unwrap().cells;
        for sl in &r.slices {
            assert_eq!(&sl.map.as_ref().unwrap().cells, first);
        }
    }

    #[test]
    fn continuous_sweep_marks_failed_slices() {
        let base = SweepBase {
            plants: vec![TransferFunction::continuous(&[1.0], &[1.0, 1.0]).unwrap()],
            require_stability: true,
            margins: None,
            weight_specs: None,
        };
        let plane = GainPlane::pi(GainScaling::Standard);
        let grid = GridSpec::new([0.0, 1.0], [0.0, 1.0], 5, 5).unwrap();
        let s = MapSettings { boundaries: false, ..small_settings() };
        let r = sweep_sample_time(&base, &plane, &[0.1, -1.0], |c, p| build_region_map(c, p, grid, &s)).unwrap();
        assert!(r.slices[0].map.is_some());
        assert!(r.slices[1].error.is_some());
        assert_eq!(r.values(), vec![0.1, -1.0]);
    }

    #[test]
    fn third_gain_sweep_zero_slice_matches_pd_frequency_bits() {
        let plane = GainPlane::new(Gain::Kd, Gain::Kp, 0.0, Structure::PID, GainScaling::SampleTime).unwrap();
        let pd = GainPlane::pd(GainScaling::SampleTime);
        let spec = MarginSpec { pm_min: Some(20.0), pm_max: Some(80.0), gm_min: None };
        let c = paper_constraints(spec);
        let grid = GridSpec::new([0.0, 0.3], [0.0, 1.0], 8, 8).unwrap();
        let s = MapSettings { boundaries: false, ..small_settings() };
        let r = sweep_third_gain(&c, &plane, &[0.0, 0.5], |c, p| build_region_map(c, p, grid, &s)).unwrap();
        let zero = r.slices[0].map.as_ref().unwrap();
        let pdmap = build_region_map(&c, &pd, grid, &s).unwrap();
        for i in 0..grid.len() {
            // the PID loop keeps its controller pole at z = 1 when ki = 0
            assert_eq!(zero.cells[i] & (PM | MS), pdmap.cells[i] & (PM | MS));
            assert_eq!(zero.cells[i] & STABLE, 0);
        }
        assert_eq!(r.slices.len(), 2);
    }

    #[test]
    fn third_gain_on_pd_plane_fails_slice() {
        let c = ConstraintSet::stability(g1());
        let plane = GainPlane::pd(GainScaling::Standard);
        let grid = GridSpec::new([0.0, 1.0], [0.0, 1.0], 4, 4).unwrap();
        let s = MapSettings { boundaries: false, ..small_settings() };
        let r = sweep_third_gain(&c, &plane, &[0.0, 1.0], |c, p| build_region_map(c, p, grid, &s)).unwrap();
        assert!(r.slices[0].map.is_some());
        assert!(r.slices[1].error.is_some());
    }

    #[test]
    fn auto_range_grows_until_interior() {
        let c = ConstraintSet::stability(g1());
        let plane = GainPlane::pi(GainScaling::Standard);
        let cl = Classifier::new(&c, &plane, &small_settings().analysis).unwrap();
        let (x, y) = auto_range(&cl, &plane, 0.125, 16.0, 21).unwrap();
        assert!(x[1] >= 1.0 && x == y);
    }

    #[test]
    fn validation() {
        let mut c = ConstraintSet::stability(g1());
        c.require_stability = false;
        assert!(c.validate().is_err());
        let bad = ConstraintSet {
            plants: vec![g1(), TransferFunction::discrete(&[1.0], &[1.0, 0.0], 0.5).unwrap()],
            ..ConstraintSet::stability(g1())
        };
        assert!(matches!(bad.validate(), Err(Error::SampleTimeMismatch(..))));
        let k = PidGains::pd(0.0, 0.0);
        assert!(k.validate().is_ok());
    }
}
