//! Trajectory CSV files: one row per node of the candidate grid, halo
//! included, with `t`, `re_y`, `im_y` and the real and imaginary parts of
//! `□ᵏy` for `k = 1..n`. Derivative cells are blank near the grid ends,
//! where the stencil runs out of halo.

use std::path::Path;

use num_complex::Complex64;
use scalecalc::scale_ops::hscale_derivative_n;
use scalecalc::SampledFn;

use crate::Failure;

fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write(path: &Path, y: &SampledFn, order: usize) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
    let derivs = (1..=order)
        .map(|k| hscale_derivative_n(y, k))
        .collect::<scalecalc::Result<Vec<_>>>()
        .map_err(|e| Failure::Numerical(e.to_string()))?;
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["t".to_string(), "re_y".into(), "im_y".into()];
    for k in 1..=order {
        header.push(format!("re_dy{k}"));
        header.push(format!("im_dy{k}"));
    }
    w.write_record(&header).map_err(io)?;
    let g = y.grid();
    for (j, z) in y.values().iter().enumerate() {
        let mut row = vec![cell(g.node(j)), cell(z.re), cell(z.im)];
        for (k, d) in derivs.iter().enumerate() {
            let shift = k + 1;
            match j.checked_sub(shift).and_then(|i| d.values().get(i)) {
                Some(v) => {
                    row.push(cell(v.re));
                    row.push(cell(v.im));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Rows `(t, y)` from the `t`, `re_y`, `im_y` columns.
pub fn read(path: &Path) -> Result<Vec<(f64, Complex64)>, Failure> {
    let bad = |msg: String| Failure::Input(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let (ct, cre, cim) = (column("t")?, column("re_y")?, column("im_y")?);
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |c: usize| -> Result<f64, Failure> {
            let s = rec.get(c).unwrap_or("").trim();
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("row {}: `{s}` is not a finite number", line + 2)))
        };
        rows.push((num(ct)?, Complex64::new(num(cre)?, num(cim)?)));
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use scalecalc::Grid;

    #[test]
    fn round_trip_keeps_values_and_blanks_the_edges() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        let g = Grid::new(0.0, 1.0, 0.25, 2).unwrap();
        let y = SampledFn::sample(|t: f64| Complex64::new(t * t, -t), &g).unwrap();
        write(&path, &y, 2).unwrap();
        let rows = read(&path).unwrap();
        assert_eq!(rows.len(), g.len());
        for ((t, z), (j, v)) in rows.iter().zip(y.values().iter().enumerate()) {
            assert_eq!(*t, g.node(j));
            assert_eq!(z, v);
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,re_y,im_y,re_dy1,im_dy1,re_dy2,im_dy2");
        assert!(lines[1].ends_with(",,,,"), "{}", lines[1]);
        assert!(lines[2].ends_with(",,"), "{}", lines[2]);
        assert!(!lines[3].ends_with(','), "{}", lines[3]);
    }

    #[test]
    fn missing_column_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        std::fs::write(&path, "t,re_y\n0,1\n").unwrap();
        assert!(matches!(read(&path), Err(Failure::Input(_))));
    }
}
