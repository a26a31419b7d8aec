//! CSV ingestion of point clouds, distance matrices and maps, and writers
//! that emit every float with 17 significant digits.

use std::io::{Read, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::holder::MapSample;
use crate::metric::{BaseMetric, FiniteMetricSpace};

/// `x` with 17 significant digits, `NaN`/`inf` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Rows of numbers, with 1-based row numbers in errors. A first row that
/// fails to parse entirely is taken as a header and skipped.
fn numeric_rows<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, record) in reader(input).into_records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if i == 0 && parsed.iter().all(|p| p.is_err()) {
            continue;
        }
        let values = parsed
            .into_iter()
            .zip(record.iter())
            .enumerate()
            .map(|(col, (p, text))| {
                p.map_err(|_| Error::Parse {
                    row,
                    message: format!("column {}: {text:?} is not a number", col + 1),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(rows)
}

/// One point per row, columns are coordinates.
pub fn read_point_cloud<R: Read>(input: R, base: BaseMetric) -> Result<FiniteMetricSpace> {
    let rows = numeric_rows(input)?;
    if rows.is_empty() {
        return Err(Error::Parse { row: 1, message: "no points".into() });
    }
    let dim = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != dim) {
        return Err(Error::Parse {
            row: i + 1,
            message: format!("expected {dim} columns, found {}", rows[i].len()),
        });
    }
    FiniteMetricSpace::from_points(&rows, base)
}

/// A square, symmetric distance matrix.
pub fn read_distance_matrix<R: Read>(input: R) -> Result<FiniteMetricSpace> {
    let rows = numeric_rows(input)?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse { row: 1, message: "empty matrix".into() });
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Parse {
            row: i + 1,
            message: format!("matrix has {n} rows but this row has {} entries", rows[i].len()),
        });
    }
    FiniteMetricSpace::from_matrix(n, rows.into_iter().flatten().collect())
}

/// `(source id, target id)` rows; every source id must appear exactly once.
pub fn read_map<R: Read>(input: R, source: FiniteMetricSpace, target: FiniteMetricSpace) -> Result<MapSample> {
    let mut assignment = vec![usize::MAX; source.len()];
    for (i, record) in reader(input).into_records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse { row, message: e.to_string() })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                row,
                message: format!("expected 2 columns (source id, target id), found {}", record.len()),
            });
        }
        let ids: Vec<std::result::Result<usize, _>> = record.iter().map(str::parse::<usize>).collect();
        if i == 0 && ids.iter().all(|p| p.is_err()) {
            continue;
        }
        let (x, y) = match (&ids[0], &ids[1]) {
            (Ok(x), Ok(y)) => (*x, *y),
            _ => {
                return Err(Error::Parse {
                    row,
                    message: format!("ids must be nonnegative integers, found {:?}", record.iter().collect::<Vec<_>>()),
                })
            }
        };
        if x >= source.len() {
            return Err(Error::Parse { row, message: format!("source id {x} out of range (0..{})", source.len()) });
        }
        if assignment[x] != usize::MAX {
            return Err(Error::Parse { row, message: format!("source id {x} assigned twice") });
        }
        assignment[x] = y;
    }
    if let Some(x) = assignment.iter().position(|&y| y == usize::MAX) {
        return Err(Error::domain(format!("source id {x} has no image")));
    }
    MapSample::new(source, target, assignment)
}

/// Writes rows of floats under a header.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::domain(format!("{other:?}")),
    }
}

/// Coordinates of a coordinate space, one point per row.
pub fn write_point_cloud<W: Write>(out: W, space: &FiniteMetricSpace) -> Result<()> {
    let dim = space
        .ambient_dim()
        .ok_or_else(|| Error::domain("space has no coordinates to write"))?;
    let header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        out,
        &header,
        (0..space.len()).map(|i| space.coords(i).expect("coordinate space").to_vec()),
    )
}

/// Pretty JSON whose floats carry 17 significant digits.
struct DigitsFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident $(($arg:ident: $ty:ty))?;)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> std::io::Result<()> {
                self.0.$name(w $(, $arg)?)
            }
        )*
    };
}

impl Formatter for DigitsFormatter {
    delegate! {
        begin_array;
        end_array;
        begin_array_value(first: bool);
        end_array_value;
        begin_object;
        end_object;
        begin_object_key(first: bool);
        begin_object_value;
        end_object_value;
    }

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, DigitsFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}
