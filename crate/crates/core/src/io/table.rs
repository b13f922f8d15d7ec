//! Result tables, polylines and density grids as CSV/JSON.

use std::fmt::Write as _;

use crate::contour::Polyline;
use crate::density::DensityField;
use crate::experiments::ResultTable;
use crate::Result;

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

/// One row per `(h, delta1)`, one column per `delta2`, cells
/// `mean (median)`.
pub fn table_csv(table: &ResultTable) -> String {
    let mut d2: Vec<usize> = table.cells.iter().map(|c| c.cell.delta2).collect();
    d2.sort_unstable();
    d2.dedup();
    let mut rows: Vec<(f64, usize)> = Vec::new();
    for c in &table.cells {
        if !rows.contains(&(c.cell.h, c.cell.delta1)) {
            rows.push((c.cell.h, c.cell.delta1));
        }
    }
    let mut out = String::from("h,delta1");
    for d in &d2 {
        write!(out, ",{d}").unwrap();
    }
    out.push('\n');
    for (h, d1) in rows {
        write!(out, "{h},{d1}").unwrap();
        for &d in &d2 {
            match table.cell(h, d1, d) {
                Some(c) => write!(out, ",{} ({})", fmt_opt(c.mean), fmt_opt(c.median)).unwrap(),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn table_json(table: &ResultTable) -> Result<String> {
    Ok(serde_json::to_string_pretty(table)?)
}

/// `loop_id,x,y`, one row per vertex. Closed loops do not repeat their
/// first vertex.
pub fn polylines_csv(lines: &[Polyline]) -> String {
    let mut out = String::from("loop_id,x,y\n");
    for (k, line) in lines.iter().enumerate() {
        for p in &line.points {
            writeln!(out, "{k},{:.16e},{:.16e}", p.x, p.y).unwrap();
        }
    }
    out
}

/// `level,loop_id,x,y` for several level sets.
pub fn level_sets_csv(sets: &[(f64, Vec<Polyline>)]) -> String {
    let mut out = String::from("level,loop_id,x,y\n");
    for (level, lines) in sets {
        for (k, line) in lines.iter().enumerate() {
            for p in &line.points {
                writeln!(out, "{level:.16e},{k},{:.16e},{:.16e}", p.x, p.y).unwrap();
            }
        }
    }
    out
}

/// `x,y,value` at every cell center, rows bottom to top.
pub fn density_csv(field: &DensityField) -> String {
    let mut out = String::from("x,y,value\n");
    for (idx, v) in field.values.iter().enumerate() {
        let c = field.grid.center_of(idx);
        writeln!(out, "{:.16e},{:.16e},{v:.16e}", c.x, c.y).unwrap();
    }
    out
}
