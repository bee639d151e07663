//! CSV datasets: a header row `x1,...,x{p-1},y` followed by one observation
//! per line.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{DepthError, Result};
use crate::types::{Observation, ObservationSet};

pub fn read_csv<R: Read>(reader: R) -> Result<ObservationSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| DepthError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let width = header.len();
    if width < 2 || header.get(width - 1) != Some("y") {
        return Err(DepthError::Parse {
            line: 1,
            message: format!("header must be x1,...,y; found '{}'", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut obs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| DepthError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(DepthError::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let mut vals = Vec::with_capacity(width);
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| DepthError::Parse {
                line,
                message: format!("'{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(DepthError::Parse {
                    line,
                    message: format!("'{field}' is not finite"),
                });
            }
            vals.push(v);
        }
        let y = vals.pop().expect("width >= 2");
        obs.push(Observation::new(vals, y)?);
    }
    if obs.is_empty() {
        return Err(DepthError::Empty);
    }
    ObservationSet::new(obs)
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<ObservationSet> {
    let f = std::fs::File::open(path.as_ref())
        .map_err(|e| DepthError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(std::io::BufReader::new(f))
}

/// Writes with the shortest representation that parses back to the same
/// value, so a written set reads back identical.
pub fn write_csv<W: Write>(set: &ObservationSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| DepthError::Io(e.to_string());
    let mut header: Vec<String> = (1..set.p()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(io)?;
    for o in set.iter() {
        let mut row: Vec<String> = o.x().iter().map(|v| v.to_string()).collect();
        row.push(o.y().to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(set: &ObservationSet, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path.as_ref())
        .map_err(|e| DepthError::Io(format!("{}: {e}", path.as_ref().display())))?;
    write_csv(set, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::four_point_example;

    #[test]
    fn round_trip() {
        let set = four_point_example();
        let mut buf = Vec::new();
        write_csv(&set, &mut buf).unwrap();
        assert!(buf.starts_with(b"x1,y\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), set);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_csv("x1,y\n1,2\n3,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DepthError::Parse { line: 3, .. }), "{err:?}");
        let err = read_csv("x1,y\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DepthError::Parse { line: 3, .. }), "{err:?}");
        assert!(matches!(read_csv("x1,y\n".as_bytes()), Err(DepthError::Empty)));
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_csv("x1,y\n1,inf\n".as_bytes()).is_err());
    }

    #[test]
    fn multiple_covariates() {
        let set = read_csv("x1,x2,y\n1,2,3\n4,5,6\n".as_bytes()).unwrap();
        assert_eq!(set.p(), 3);
        assert_eq!(set.observations()[1].x(), &[4.0, 5.0]);
    }
}
