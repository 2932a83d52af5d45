//! CSV export. Every file starts with a `#` line naming its unit system.
//! Floats are written in shortest round-trip form, so values reload
//! bit-exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::decoherence::DecoherenceCurve;
use crate::error::Result;
use crate::feedback::TrajectoryRecord;
use crate::state::{fidelity_bloch, PureStateAngle};
use crate::targeting::ControlLog;

fn writer<W: Write>(mut out: W, comment: &str) -> Result<csv::Writer<W>> {
    writeln!(out, "# {comment}")?;
    Ok(csv::WriterBuilder::new().from_writer(out))
}

fn f(x: f64) -> String {
    x.to_string()
}

pub fn write_curve<W: Write>(out: W, curve: &DecoherenceCurve) -> Result<()> {
    let comment = format!("units: tau in Rabi time (1/Omega_F), g dimensionless; regime={}", curve.regime().name());
    let mut w = writer(out, &comment)?;
    w.write_record(["tau", "g"])?;
    for (k, g) in curve.values().iter().enumerate() {
        w.write_record([f(curve.tau(k)), f(*g)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_control_log<W: Write>(out: W, log: &ControlLog) -> Result<()> {
    let mut w = writer(out, "units: time in Rabi time (1/Omega_F), pulse_area in radians, fidelity against the final target")?;
    w.write_record([
        "step", "time", "cycle", "intermediate", "component", "pulse_area", "residual", "fallback", "fidelity", "x", "y", "z",
    ])?;
    for s in &log.steps {
        w.write_record([
            s.step.to_string(),
            f(s.time),
            s.cycle.to_string(),
            s.intermediate.to_string(),
            s.component.label().to_string(),
            f(s.pulse_area),
            f(s.residual),
            s.fallback.to_string(),
            f(s.fidelity),
            f(s.bloch.x),
            f(s.bloch.y),
            f(s.bloch.z),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Trajectory samples; ensemble records add standard-error columns.
pub fn write_trajectory<W: Write>(out: W, record: &TrajectoryRecord, target: &PureStateAngle) -> Result<()> {
    let n = target.bloch();
    let mut w = writer(out, "units: time in 1/gamma, Bloch components dimensionless")?;
    let mut header = vec!["time", "x", "y", "z", "fidelity"];
    if record.stderr.is_some() {
        header.extend(["stderr_x", "stderr_y", "stderr_z"]);
    }
    w.write_record(&header)?;
    for (k, (t, v)) in record.times.iter().zip(&record.states).enumerate() {
        let mut row = vec![f(*t), f(v.x), f(v.y), f(v.z), f(fidelity_bloch(v, &n))];
        if let Some(se) = &record.stderr {
            row.extend([f(se[k].x), f(se[k].y), f(se[k].z)]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut out = BufWriter::new(File::create(path)?);
    body(&mut out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::Regime;

    #[test]
    fn single_point_curve_row() {
        let curve = DecoherenceCurve::zero(Regime::Thermal, 0.1, 1).unwrap();
        let mut buf = Vec::new();
        write_curve(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# units"));
        assert_eq!(&lines[1..], ["tau,g", "0,0"]);
    }

    #[test]
    fn floats_round_trip() {
        let curve = DecoherenceCurve::new(Regime::Adiabatic, 0.1, vec![0.0, 1.0 / 3.0]).unwrap();
        let mut buf = Vec::new();
        write_curve(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        let g: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(g, 1.0 / 3.0);
    }
}
