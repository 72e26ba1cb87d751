//! Static SVG figures drawn from result tables.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::CliError;
use crate::table::{format_value, write_atomic, ResultTable};

const SIZE: (u32, u32) = (900, 600);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// One curve per y column against a shared x column.
    Line,
    /// Single polyline in the (x, y) plane with markers at both ends.
    Boundary,
    /// Long-form table `(group, x, y)`: one labeled curve per group value.
    Profile,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub kind: PlotKind,
    /// Output file stem.
    pub name: String,
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    /// Grouping column for `Profile`.
    pub group: Option<String>,
}

impl PlotSpec {
    pub fn line(name: &str, title: &str, x: &str, ys: &[&str]) -> Self {
        Self {
            kind: PlotKind::Line,
            name: name.into(),
            title: title.into(),
            x: x.into(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            group: None,
        }
    }

    pub fn boundary(name: &str, title: &str, x: &str, y: &str) -> Self {
        Self {
            kind: PlotKind::Boundary,
            ..Self::line(name, title, x, &[y])
        }
    }

    pub fn profile(name: &str, title: &str, group: &str, x: &str, y: &str) -> Self {
        Self {
            kind: PlotKind::Profile,
            group: Some(group.into()),
            ..Self::line(name, title, x, &[y])
        }
    }
}

type Series = (String, Vec<(f64, f64)>);

fn axis_label(table: &ResultTable, header: &str) -> String {
    match table.column_index(header).map(|k| &table.columns[k]) {
        Some(c) if !c.unit.is_empty() => format!("{} [{}]", c.name, c.unit),
        Some(c) => c.name.clone(),
        None => header.into(),
    }
}

fn column(table: &ResultTable, header: &str) -> Result<Vec<f64>, CliError> {
    table
        .column(header)
        .ok_or_else(|| CliError::Plot(format!("table `{}` has no column `{header}`", table.name)))
}

fn finite_pairs(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .collect()
}

fn series(table: &ResultTable, spec: &PlotSpec) -> Result<Vec<Series>, CliError> {
    let xs = column(table, &spec.x)?;
    match spec.kind {
        PlotKind::Line | PlotKind::Boundary => spec
            .ys
            .iter()
            .map(|y| Ok((y.clone(), finite_pairs(&xs, &column(table, y)?))))
            .collect(),
        PlotKind::Profile => {
            let group = spec
                .group
                .as_deref()
                .ok_or_else(|| CliError::Plot("profile plot needs a group column".into()))?;
            let gs = column(table, group)?;
            let ys = column(table, &spec.ys[0])?;
            let unit = table
                .column_index(group)
                .map(|k| table.columns[k].unit.clone())
                .unwrap_or_default();
            let mut out: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
            for ((g, x), y) in gs.iter().zip(&xs).zip(&ys) {
                if !(x.is_finite() && y.is_finite()) {
                    continue;
                }
                match out.iter_mut().find(|(v, _)| v == g) {
                    Some((_, pts)) => pts.push((*x, *y)),
                    None => out.push((*g, vec![(*x, *y)])),
                }
            }
            let name = table
                .column_index(group)
                .map(|k| table.columns[k].name.clone())
                .unwrap_or_default();
            Ok(out
                .into_iter()
                .map(|(g, pts)| {
                    (
                        format!("{name} = {} {unit}", format_value(g)).trim_end().to_owned(),
                        pts,
                    )
                })
                .collect())
        }
    }
}

fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return None;
    }
    let pad = if hi > lo {
        0.04 * (hi - lo)
    } else {
        0.5 * lo.abs().max(1e-12)
    };
    Some((lo - pad, hi + pad))
}

fn plot_err(e: impl std::fmt::Display) -> CliError {
    CliError::Plot(e.to_string())
}

/// Render `spec` from `table` to an SVG string.
pub fn render(table: &ResultTable, spec: &PlotSpec) -> Result<String, CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Plot(format!("table `{}` is empty", table.name)));
    }
    let data = series(table, spec)?;
    let all = || data.iter().flat_map(|(_, pts)| pts.iter());
    let (x0, x1) = span(all().map(|p| p.0)).ok_or_else(|| CliError::Plot("no finite points".into()))?;
    let (y0, y1) = span(all().map(|p| p.1)).expect("x and y finite together");

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(&spec.title, ("sans-serif", 22))
            .margin(16)
            .x_label_area_size(48)
            .y_label_area_size(80)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc(axis_label(table, &spec.x))
            .y_desc(match spec.kind {
                PlotKind::Line if spec.ys.len() > 1 => spec.ys.join(", "),
                _ => axis_label(table, &spec.ys[0]),
            })
            .draw()
            .map_err(plot_err)?;
        for (i, (label, pts)) in data.iter().enumerate() {
            let color = Palette99::pick(i).mix(1.0);
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                .map_err(plot_err)?
                .label(label.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            if spec.kind == PlotKind::Boundary {
                let ends = [pts.first(), pts.last()].into_iter().flatten().copied();
                chart
                    .draw_series(ends.map(|p| Circle::new(p, 6, color.filled())))
                    .map_err(plot_err)?;
            }
        }
        if data.len() > 1 || spec.kind != PlotKind::Boundary {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.9))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
        }
        root.present().map_err(plot_err)?;
    }
    Ok(svg)
}

/// Render and write `<dir>/<spec.name>.svg`.
pub fn emit_plot(table: &ResultTable, spec: &PlotSpec, dir: &Path) -> Result<PathBuf, CliError> {
    let svg = render(table, spec)?;
    let path = dir.join(format!("{}.svg", spec.name));
    write_atomic(&path, svg.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Column;

    fn profile_table() -> ResultTable {
        let mut t = ResultTable::new(
            "p",
            vec![Column::new("d", "m"), Column::new("z", "m"), Column::new("w00", "m")],
        );
        for d in 1..=6 {
            for k in 0..10 {
                t.push(vec![
                    d as f64,
                    k as f64 * 0.01,
                    1e-3 * (1.0 + (k as f64 * 0.3 * d as f64).sin().abs()),
                ]);
            }
        }
        t
    }

    #[test]
    fn profile_has_six_labeled_curves() {
        let svg = render(
            &profile_table(),
            &PlotSpec::profile("p", "w00 on axis", "d_m", "z_m", "w00_m"),
        )
        .unwrap();
        assert!(svg.starts_with("<svg"));
        for d in 1..=6 {
            assert!(svg.contains(&format!("d = {d} m")), "missing curve {d}");
        }
        // axis ticks are 1 px; data curves and legend swatches are 2 px
        assert_eq!(svg.matches("stroke-width=\"2\" points").count(), 6 + 6);
        assert!(svg.contains("z [m]") && svg.contains("w00 [m]"));
    }

    #[test]
    fn boundary_is_one_polyline_with_end_markers() {
        let mut t = ResultTable::new("b", vec![Column::new("p_chg", "W"), Column::new("r_b", "bit_per_s_hz")]);
        for k in 0..8 {
            t.push(vec![3.0 - 0.2 * k as f64, k as f64 * 1.5]);
        }
        let svg = render(
            &t,
            &PlotSpec::boundary("b", "P-R boundary", "p_chg_W", "r_b_bit_per_s_hz"),
        )
        .unwrap();
        assert_eq!(svg.matches("stroke-width=\"2\" points").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn empty_table_rejected() {
        let t = ResultTable::new("e", vec![Column::new("d", "m"), Column::new("w", "m")]);
        assert!(matches!(
            render(&t, &PlotSpec::line("e", "", "d_m", &["w_m"])),
            Err(CliError::Plot(_))
        ));
    }
}
