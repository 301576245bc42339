//! Serialization: field, curve and coefficient CSV, report JSON and PGM heatmaps.
//!
//! Field CSV has a header `x,y,u` (or `tau,y,u` for tau fields) and one row
//! per node in storage order, `x` outer and `y` inner. Numbers are written
//! with 17 significant digits, enough to round-trip every `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::characteristics::CharacteristicCurve;
use crate::epd::TauField;
use crate::equation::KTable;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

/// Relative tolerance when matching loaded coordinates to a uniform grid.
const COORD_TOL: f64 = 1e-12;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn field_csv(field: &Field, x_name: &str) -> String {
    let g = &field.grid;
    let mut out = String::with_capacity(g.len() * 72 + 16);
    out.push_str(x_name);
    out.push_str(",y,u\n");
    for i in 0..g.nx {
        let x = num(g.x(i));
        for j in 0..g.ny {
            out.push_str(&x);
            out.push(',');
            out.push_str(&num(g.y(j)));
            out.push(',');
            out.push_str(&num(field.at(i, j)));
            out.push('\n');
        }
    }
    out
}

pub fn field_to_csv(field: &Field) -> String {
    field_csv(field, "x")
}

pub fn tau_field_to_csv(tf: &TauField) -> String {
    field_csv(&tf.field, "tau")
}

pub fn curve_to_csv(curve: &CharacteristicCurve) -> String {
    let mut out = String::from("x,y\n");
    for &(x, y) in &curve.samples {
        out.push_str(&format!("{},{}\n", num(x), num(y)));
    }
    out
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedCsv { line, reason: reason.into() }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes())
}

/// Parses numeric rows of a fixed width after a header whose first column
/// is one of `first`. Returns `(line, values)` pairs; blank lines are skipped.
fn numeric_rows(text: &str, first: &[&str], rest: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rdr = reader(text);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| malformed(1, e.to_string()))?,
        None => return Err(malformed(1, "empty file")),
    };
    let names: Vec<&str> = header.iter().collect();
    let width = 1 + rest.len();
    let ok = names.len() == width
        && first.iter().any(|f| f.eq_ignore_ascii_case(names[0]))
        && rest.iter().zip(&names[1..]).all(|(a, b)| a.eq_ignore_ascii_case(b));
    if !ok {
        let want = format!("{},{}", first.join("|"), rest.join(","));
        return Err(malformed(1, format!("expected header {want}, got {}", names.join(","))));
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| malformed(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != width {
            return Err(malformed(line, format!("expected {width} fields, found {}", rec.len())));
        }
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| malformed(line, "non-numeric or non-finite value"))?;
        rows.push((line, vals));
    }
    Ok(rows)
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= COORD_TOL * scale.max(1.0)
}

/// Rebuilds a uniform grid from node rows, checking order and completeness.
fn field_from_rows(rows: &[(usize, Vec<f64>)], after_last: usize) -> Result<Field> {
    if rows.is_empty() {
        return Err(malformed(after_last, "no data rows"));
    }
    let x0 = rows[0].1[0];
    let ny = rows.iter().take_while(|(_, r)| r[0] == x0).count();
    if ny < 3 {
        return Err(malformed(rows[ny.min(rows.len() - 1)].0, format!("need at least 3 y values per x, found {ny}")));
    }
    if rows.len() % ny != 0 {
        let line = rows[rows.len() - rows.len() % ny].0;
        return Err(malformed(line, format!("incomplete grid: {} rows is not a multiple of {ny}", rows.len())));
    }
    let nx = rows.len() / ny;
    let ys: Vec<f64> = rows[..ny].iter().map(|(_, r)| r[1]).collect();
    let xs: Vec<f64> = (0..nx).map(|i| rows[i * ny].1[0]).collect();
    for (k, (line, r)) in rows.iter().enumerate() {
        let (i, j) = (k / ny, k % ny);
        if r[0] != xs[i] {
            return Err(malformed(*line, format!("x = {} breaks the block of x = {}", r[0], xs[i])));
        }
        if r[1] != ys[j] {
            return Err(malformed(*line, format!("y = {} does not repeat the first block (expected {})", r[1], ys[j])));
        }
        if j > 0 && !(ys[j] > ys[j - 1]) {
            return Err(malformed(*line, "y values must increase within a block"));
        }
        if j == 0 && i > 0 && !(xs[i] > xs[i - 1]) {
            return Err(malformed(*line, "x values must increase between blocks"));
        }
    }
    let grid = Grid2D::new(nx, ny, (xs[0], xs[nx - 1]), (ys[0], ys[ny - 1]))
        .map_err(|e| malformed(rows[0].0, e.to_string()))?;
    let sx = xs[0].abs().max(xs[nx - 1].abs());
    let sy = ys[0].abs().max(ys[ny - 1].abs());
    for i in 0..nx {
        if !close(xs[i], grid.x(i), sx) {
            return Err(malformed(rows[i * ny].0, format!("x = {} is not on a uniform grid", xs[i])));
        }
    }
    for j in 0..ny {
        if !close(ys[j], grid.y(j), sy) {
            return Err(malformed(rows[j].0, format!("y = {} is not on a uniform grid", ys[j])));
        }
    }
    Field::new(grid, rows.iter().map(|(_, r)| r[2]).collect())
}

fn line_count(text: &str) -> usize {
    text.lines().count() + 1
}

pub fn parse_field_csv(text: &str) -> Result<Field> {
    let rows = numeric_rows(text, &["x"], &["y", "u"])?;
    field_from_rows(&rows, line_count(text))
}

pub fn parse_tau_field_csv(text: &str, provenance: &str) -> Result<TauField> {
    let rows = numeric_rows(text, &["tau"], &["y", "u"])?;
    let field = field_from_rows(&rows, line_count(text))?;
    if field.grid.x_min <= 0.0 {
        return Err(malformed(2, "tau coordinates must be positive"));
    }
    Ok(TauField { field, provenance: provenance.to_string() })
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let rows = numeric_rows(text, &["x"], &["y"])?;
    Ok(rows.into_iter().map(|(_, r)| (r[0], r[1])).collect())
}

/// Tabulated coefficient with header `x,K`.
pub fn parse_k_table(text: &str) -> Result<KTable> {
    let rows = numeric_rows(text, &["x"], &["K"])?;
    for w in rows.windows(2) {
        if !(w[1].1[0] > w[0].1[0]) {
            return Err(malformed(w[1].0, "x values must be strictly increasing"));
        }
    }
    let (xs, ks) = rows.into_iter().map(|(_, r)| (r[0], r[1])).unzip();
    KTable::new(xs, ks)
}

pub fn k_table_to_csv(table: &KTable) -> String {
    let mut out = String::from("x,K\n");
    for (x, k) in table.xs().iter().zip(table.ks()) {
        out.push_str(&format!("{},{}\n", num(*x), num(*k)));
    }
    out
}

/// Plain PGM (P2) with 255 levels, min -> 0 and max -> 255, one image row
/// per `y` from `y_max` down. A constant field maps to all zeros.
pub fn field_to_pgm(field: &Field) -> String {
    let g = &field.grid;
    let (lo, hi) = field.min_max();
    let span = hi - lo;
    let mut out = format!("P2\n{} {}\n255\n", g.nx, g.ny);
    for j in (0..g.ny).rev() {
        let row: Vec<String> = (0..g.nx)
            .map(|i| {
                let level = if span > 0.0 { (255.0 * (field.at(i, j) - lo) / span).round() } else { 0.0 };
                (level.clamp(0.0, 255.0) as u8).to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn save_field(field: &Field, path: &Path) -> Result<()> {
    write_text(path, &field_to_csv(field))
}

pub fn load_field(path: &Path) -> Result<Field> {
    parse_field_csv(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::lookup;
    use proptest::prelude::*;

    fn bilin() -> Field {
        let sol = lookup("bilin").unwrap();
        let g = Grid2D::new(7, 5, (-0.3, 1.1), (-1.0, 1.0)).unwrap();
        Field::try_from_fn(g, |x, y| sol.eval(x, y)).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let f = bilin();
        let back = parse_field_csv(&field_to_csv(&f)).unwrap();
        assert_eq!(back.grid, f.grid);
        assert!(back.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncated_file_reports_first_incomplete_row() {
        let text = field_to_csv(&bilin());
        let lines: Vec<&str> = text.lines().collect();
        // cut line 12 (1-based) in the middle of its last field
        let mut cut: String = lines[..11].join("\n");
        cut.push('\n');
        let row = lines[11];
        cut.push_str(&row[..row.rfind(',').unwrap()]);
        match parse_field_csv(&cut) {
            Err(Error::MalformedCsv { line, .. }) => assert_eq!(line, 12),
            other => panic!("{other:?}"),
        }
        // cut at a row boundary: the grid is incomplete
        let cut = lines[..12].join("\n");
        assert!(matches!(parse_field_csv(&cut), Err(Error::MalformedCsv { .. })));
    }

    #[test]
    fn rejects_bad_headers_and_values() {
        assert!(matches!(parse_field_csv("a,b,c\n1,2,3\n"), Err(Error::MalformedCsv { line: 1, .. })));
        assert!(matches!(parse_field_csv(""), Err(Error::MalformedCsv { line: 1, .. })));
        let full = field_to_csv(&bilin());
        let mut lines: Vec<&str> = full.lines().collect();
        lines[1] = "-0.3,-1,abc";
        let text = lines.join("\n");
        assert!(matches!(parse_field_csv(&text), Err(Error::MalformedCsv { line: 2, .. })));
    }

    #[test]
    fn rejects_non_uniform_or_unordered_grids() {
        let text = "x,y,u\n0,0,1\n0,1,1\n0,3,1\n1,0,1\n1,1,1\n1,3,1\n2,0,1\n2,1,1\n2,3,1\n";
        assert!(matches!(parse_field_csv(text), Err(Error::MalformedCsv { .. })));
        let text = "x,y,u\n0,0,1\n0,1,1\n0,2,1\n1,0,1\n1,2,1\n1,1,1\n2,0,1\n2,1,1\n2,2,1\n";
        assert!(matches!(parse_field_csv(text), Err(Error::MalformedCsv { line: 6, .. })));
    }

    #[test]
    fn pgm_conventions() {
        let g = Grid2D::new(3, 3, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let pgm = field_to_pgm(&Field::constant(g, 4.2));
        assert_eq!(pgm, "P2\n3 3\n255\n0 0 0\n0 0 0\n0 0 0\n");
        let f = Field::from_fn(g, |_, y| y);
        // first image row is y_max
        assert_eq!(field_to_pgm(&f), "P2\n3 3\n255\n255 255 255\n128 128 128\n0 0 0\n");
    }

    #[test]
    fn tau_header_and_k_table() {
        let g = Grid2D::new(4, 3, (0.5, 2.0), (0.0, 1.0)).unwrap();
        let tf = TauField { field: Field::from_fn(g, |t, y| t + y), provenance: "p".into() };
        let text = tau_field_to_csv(&tf);
        assert!(text.starts_with("tau,y,u\n"));
        assert_eq!(parse_tau_field_csv(&text, "p").unwrap(), tf);
        assert!(parse_field_csv(&text).is_err());
        let table = parse_k_table("x,K\n-1,-1\n0,0\n2,2\n").unwrap();
        assert_eq!(table.eval(1.0).unwrap(), 1.0);
        assert_eq!(parse_k_table(&k_table_to_csv(&table)).unwrap(), table);
        assert!(matches!(parse_k_table("x,K\n0,0\n0,1\n"), Err(Error::MalformedCsv { line: 3, .. })));
    }

    proptest! {
        #[test]
        fn arbitrary_values_round_trip(vals in prop::collection::vec(-1e300f64..1e300, 9)) {
            let g = Grid2D::new(3, 3, (0.1, 0.7), (-2.5, 3.0)).unwrap();
            let f = Field::new(g, vals).unwrap();
            let back = parse_field_csv(&field_to_csv(&f)).unwrap();
            prop_assert!(back.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
