//! Per-step energy series as CSV.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::diagnostics::EnergyReport;
use crate::spaces::Discretization;
use crate::model::State;
use crate::timestepping::Sink;

pub const CSV_HEADER: &str =
    "step,t,e_kin,e_ela,e_pen,e_tot,visc_diss,phi_diss,nd_phobic,energy_residual,mass_phi,div_res,picard_iters,lin_res";

fn write_row(w: &mut impl Write, r: &EnergyReport) -> io::Result<()> {
    // {:.16e} keeps 17 significant digits, enough to round-trip any f64.
    writeln!(
        w,
        "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
        r.step,
        r.t,
        r.e_kin,
        r.e_ela,
        r.e_pen,
        r.e_tot,
        r.visc_diss,
        r.phi_diss,
        r.nd_phobic,
        r.energy_residual,
        r.mass_phi,
        r.div_res,
        r.picard_iters,
        r.lin_res
    )
}

pub fn write_energy_csv(reports: &[EnergyReport], path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        write_row(&mut w, r)?;
    }
    w.flush()
}

/// Parses a file written by [`write_energy_csv`]. `de_tot` is not stored
/// and comes back as NaN.
pub fn parse_energy_csv(reader: impl BufRead) -> io::Result<Vec<EnergyReport>> {
    let bad = |n: usize, m: String| io::Error::new(io::ErrorKind::InvalidData, format!("line {n}: {m}"));
    let mut lines = reader.lines();
    if lines.next().transpose()?.as_deref() != Some(CSV_HEADER) {
        return Err(bad(1, "missing or unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(bad(n, format!("expected 14 fields, got {}", f.len())));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|e| bad(n, format!("field {k}: {e}")));
        let int = |k: usize| f[k].parse::<usize>().map_err(|e| bad(n, format!("field {k}: {e}")));
        out.push(EnergyReport {
            step: int(0)?,
            t: num(1)?,
            e_kin: num(2)?,
            e_ela: num(3)?,
            e_pen: num(4)?,
            e_tot: num(5)?,
            visc_diss: num(6)?,
            phi_diss: num(7)?,
            nd_phobic: num(8)?,
            energy_residual: num(9)?,
            mass_phi: num(10)?,
            div_res: num(11)?,
            picard_iters: int(12)?,
            lin_res: num(13)?,
            de_tot: f64::NAN,
        });
    }
    Ok(out)
}

pub fn read_energy_csv(path: &Path) -> io::Result<Vec<EnergyReport>> {
    parse_energy_csv(BufReader::new(File::open(path)?))
}

/// Streams reports to a CSV file as they arrive.
pub struct CsvSink {
    w: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path) -> io::Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{CSV_HEADER}")?;
        Ok(Self { w })
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.w.flush()
    }
}

impl Sink for CsvSink {
    fn report(&mut self, r: &EnergyReport) -> io::Result<()> {
        write_row(&mut self.w, r)
    }

    fn snapshot(&mut self, _disc: &Discretization, _state: &State) -> io::Result<()> {
        self.w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_has_fourteen_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), 14);
    }

    #[test]
    fn rejects_wrong_header() {
        let err = parse_energy_csv("step,t\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 1"));
        assert!(parse_energy_csv("".as_bytes()).is_err());
    }

    #[test]
    fn rejects_short_row_and_bad_number() {
        let short = format!("{CSV_HEADER}\n1,2\n");
        assert!(parse_energy_csv(short.as_bytes()).unwrap_err().to_string().contains("line 2"));
        let bad = format!("{CSV_HEADER}\n1,x,0,0,0,0,0,0,0,0,0,0,1,0\n");
        assert!(parse_energy_csv(bad.as_bytes()).unwrap_err().to_string().contains("field 1"));
    }

    #[test]
    fn row_formats_integers_plainly() {
        let mut buf = Vec::new();
        let r = EnergyReport {
            step: 7,
            t: 0.5,
            e_kin: 0.0,
            e_ela: 0.0,
            e_pen: 0.0,
            e_tot: 0.0,
            visc_diss: 0.0,
            phi_diss: 0.0,
            nd_phobic: -1.0,
            energy_residual: 0.0,
            mass_phi: 0.0,
            div_res: 0.0,
            picard_iters: 3,
            lin_res: 0.0,
            de_tot: 0.0,
        };
        write_row(&mut buf, &r).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let f: Vec<&str> = s.trim_end().split(',').collect();
        assert_eq!(f[0], "7");
        assert_eq!(f[1], "5.0000000000000000e-1");
        assert_eq!(f[8], "-1.0000000000000000e0");
        assert_eq!(f[12], "3");
        assert!(s.ends_with('\n') && !s.contains('\r'));
    }
}
