//! CSV exports.
//!
//! - boundaries: `kind,constraint_value,x,y,theta,theta_l` (`theta_l` empty
//!   except for mixed-sensitivity curves), one row per point.
//! - members: `x,y`, centers of cells meeting every required constraint.
//! - simulation: `time,reference,output,error,control`.

use std::io::Write;

use pidspace_core::boundary::BoundaryCurve;
use pidspace_core::region::RegionMap;

use crate::error::AppResult;
use crate::schema::SimDoc;

pub fn boundaries_csv<W: Write>(curves: &[BoundaryCurve], w: W) -> AppResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["kind", "constraint_value", "x", "y", "theta", "theta_l"])?;
    for c in curves {
        for p in &c.points {
            out.write_record([
                c.kind.name().to_string(),
                c.constraint_value.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.theta.to_string(),
                p.theta_l.map(|t| t.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn members_csv<W: Write>(map: &RegionMap, w: W) -> AppResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y"])?;
    for (x, y) in map.member_centers() {
        out.write_record([x.to_string(), y.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn simulation_csv<W: Write>(sim: &SimDoc, w: W) -> AppResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time", "reference", "output", "error", "control"])?;
    for k in 0..sim.time.len() {
        out.write_record([
            sim.time[k].to_string(),
            sim.reference[k].to_string(),
            sim.output[k].to_string(),
            sim.error[k].to_string(),
            sim.control[k].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a simulation CSV written by [`simulation_csv`].
pub fn read_simulation_csv<R: std::io::Read>(r: R, sample_time: f64) -> AppResult<SimDoc> {
    let mut rd = csv::Reader::from_reader(r);
    let mut doc = SimDoc {
        version: crate::schema::SCHEMA_VERSION,
        sample_time,
        diverging: false,
        time: vec![],
        reference: vec![],
        output: vec![],
        error: vec![],
        control: vec![],
    };
    for row in rd.deserialize() {
        let (t, r, y, e, u): (f64, f64, f64, f64, f64) = row?;
        doc.time.push(t);
        doc.reference.push(r);
        doc.output.push(y);
        doc.error.push(e);
        doc.control.push(u);
    }
    Ok(doc)
}
