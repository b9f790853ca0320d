//! Column-labelled result tables with deterministic CSV/JSON/SVG emission.
//! Determinism contract: same rows in, same bytes out. Floats print with
//! Rust's shortest round-trip formatting, '.' decimal, '\n' line ends;
//! the SVG filename carries a content hash instead of a timestamp.

use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    B(bool),
    S(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::F(v) => write!(f, "{v}"),
            Cell::B(v) => write!(f, "{v}"),
            Cell::S(v) => f.write_str(v),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::F(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::B(v) => Value::Bool(*v),
            Cell::S(v) => Value::String(v.clone()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::F(v) => Some(*v),
            _ => None,
        }
    }
}

/// How a sweep wants to be plotted.
#[derive(Debug, Clone, PartialEq)]
pub enum PlotSpec {
    /// Polylines of the listed y columns against the x column.
    Lines { x: usize, ys: Vec<usize>, logy: bool },
    /// One bar per row of the given value column, labelled by a text column.
    Bars { label: usize, value: usize },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: PlotSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: Option<PathBuf>,
}

impl Table {
    pub fn new(experiment: &str, columns: &[&str], plot: PlotSpec) -> Table {
        Table {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            plot,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row arity");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column by name; panics on missing column or non-numeric
    /// cell (tables are built by this crate, so that is a programming
    /// error, not input error).
    pub fn f64_column(&self, name: &str) -> Vec<f64> {
        let i = self.column(name).expect("column");
        self.rows
            .iter()
            .map(|r| r[i].as_f64().expect("numeric cell"))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let arr: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert(name.clone(), cell.to_json());
                }
                Value::Object(obj)
            })
            .collect();
        serde_json::to_string_pretty(&arr).expect("serialize") + "\n"
    }

    pub fn to_svg(&self) -> Option<String> {
        match &self.plot {
            PlotSpec::Lines { x, ys, logy } => Some(self.svg_lines(*x, ys, *logy)),
            PlotSpec::Bars { label, value } => Some(self.svg_bars(*label, *value)),
            PlotSpec::None => None,
        }
    }

    /// Write `<experiment>.csv`, `<experiment>.json`, and (when a plot is
    /// defined) `<experiment>-<hash>.svg` into `dir`. The hash is the
    /// first 16 hex chars of the SHA-256 of the CSV bytes.
    pub fn write_artifacts(&self, dir: &Path) -> std::io::Result<ArtifactPaths> {
        std::fs::create_dir_all(dir)?;
        let csv = self.to_csv();
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        std::fs::write(&csv_path, &csv)?;
        let json_path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&json_path, self.to_json())?;
        let svg = self.to_svg().map(|body| {
            let digest = Sha256::digest(csv.as_bytes());
            let hash: String = digest[..8].iter().fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            });
            (dir.join(format!("{}-{hash}.svg", self.experiment)), body)
        });
        let svg_path = match svg {
            Some((path, body)) => {
                std::fs::write(&path, body)?;
                Some(path)
            }
            None => None,
        };
        Ok(ArtifactPaths { csv: csv_path, json: json_path, svg: svg_path })
    }

    fn svg_lines(&self, xi: usize, ys: &[usize], logy: bool) -> String {
        const W: f64 = 640.0;
        const H: f64 = 420.0;
        const ML: f64 = 70.0;
        const MR: f64 = 20.0;
        const MT: f64 = 20.0;
        const MB: f64 = 50.0;
        let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

        let xs: Vec<f64> = self
            .rows
            .iter()
            .filter_map(|r| r[xi].as_f64())
            .collect();
        let tf = |v: f64| if logy { v.max(1e-300).log10() } else { v };
        let mut ymin = f64::INFINITY;
        let mut ymax = f64::NEG_INFINITY;
        for &c in ys {
            for r in &self.rows {
                if let Some(v) = r[c].as_f64() {
                    ymin = ymin.min(tf(v));
                    ymax = ymax.max(tf(v));
                }
            }
        }
        let (xmin, xmax) = xs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let xspan = (xmax - xmin).max(1e-12);
        let yspan = (ymax - ymin).max(1e-12);
        let px = |v: f64| ML + (v - xmin) / xspan * (W - ML - MR);
        let py = |v: f64| H - MB - (tf(v) - ymin) / yspan * (H - MT - MB);

        let mut s = svg_header(W, H, &self.experiment);
        let _ = write!(
            s,
            "<rect x='{ML}' y='{MT}' width='{}' height='{}' fill='none' stroke='#888'/>\n",
            W - ML - MR,
            H - MT - MB
        );
        for k in 0..=4 {
            let fx = xmin + xspan * k as f64 / 4.0;
            let fyt = ymin + yspan * k as f64 / 4.0;
            let fy = if logy { 10f64.powf(fyt) } else { fyt };
            let _ = write!(
                s,
                "<text x='{:.2}' y='{:.2}' font-size='11' text-anchor='middle'>{fx:.4}</text>\n",
                px(fx),
                H - MB + 16.0
            );
            let _ = write!(
                s,
                "<text x='{:.2}' y='{:.2}' font-size='11' text-anchor='end'>{fy:.4}</text>\n",
                ML - 6.0,
                H - MB - (H - MT - MB) * k as f64 / 4.0 + 4.0
            );
        }
        for (j, &c) in ys.iter().enumerate() {
            let mut pts = String::new();
            for r in &self.rows {
                if let (Some(x), Some(y)) = (r[xi].as_f64(), r[c].as_f64()) {
                    let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
                }
            }
            let color = palette[j % palette.len()];
            let _ = write!(
                s,
                "<polyline points='{}' fill='none' stroke='{color}' stroke-width='1.6'/>\n",
                pts.trim_end()
            );
            let _ = write!(
                s,
                "<text x='{:.2}' y='{:.2}' font-size='12' fill='{color}'>{}</text>\n",
                ML + 8.0,
                MT + 16.0 + 16.0 * j as f64,
                xml_escape(&self.columns[c])
            );
        }
        let _ = write!(
            s,
            "<text x='{:.2}' y='{:.2}' font-size='12' text-anchor='middle'>{}</text>\n",
            (ML + W - MR) / 2.0,
            H - 12.0,
            xml_escape(&self.columns[xi])
        );
        s.push_str("</svg>\n");
        s
    }

    fn svg_bars(&self, label: usize, value: usize) -> String {
        const W: f64 = 640.0;
        const H: f64 = 420.0;
        const ML: f64 = 70.0;
        const MR: f64 = 20.0;
        const MT: f64 = 20.0;
        const MB: f64 = 90.0;
        let n = self.rows.len().max(1);
        let vmax = self
            .rows
            .iter()
            .filter_map(|r| r[value].as_f64())
            .fold(0.0_f64, f64::max)
            .max(1e-12);
        let bw = (W - ML - MR) / n as f64;
        let mut s = svg_header(W, H, &self.experiment);
        for (i, r) in self.rows.iter().enumerate() {
            let v = r[value].as_f64().unwrap_or(0.0);
            let bh = v / vmax * (H - MT - MB);
            let x = ML + bw * i as f64;
            let _ = write!(
                s,
                "<rect x='{:.2}' y='{:.2}' width='{:.2}' height='{:.2}' fill='#1f77b4' stroke='#fff'/>\n",
                x,
                H - MB - bh,
                bw,
                bh
            );
            let _ = write!(
                s,
                "<text x='{:.2}' y='{:.2}' font-size='10' text-anchor='end' transform='rotate(-45 {:.2} {:.2})'>{}</text>\n",
                x + bw / 2.0,
                H - MB + 12.0,
                x + bw / 2.0,
                H - MB + 12.0,
                xml_escape(&r[label].to_string())
            );
            let _ = write!(
                s,
                "<text x='{:.2}' y='{:.2}' font-size='10' text-anchor='middle'>{v:.4}</text>\n",
                x + bw / 2.0,
                (H - MB - bh - 4.0).max(10.0)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn svg_header(w: f64, h: f64, title: &str) -> String {
    format!(
        "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 {w} {h}' width='{w}' height='{h}'>\n\
         <title>{}</title>\n<rect width='100%' height='100%' fill='white'/>\n",
        xml_escape(title)
    )
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('\'', "&apos;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(
            "demo",
            &["x", "y", "ok", "note"],
            PlotSpec::Lines { x: 0, ys: vec![1], logy: false },
        );
        t.push(vec![
            Cell::F(1.0),
            Cell::F(2.5),
            Cell::B(true),
            Cell::S("a".into()),
        ]);
        t.push(vec![
            Cell::F(2.0),
            Cell::F(1.25),
            Cell::B(false),
            Cell::S("b".into()),
        ]);
        t
    }

    #[test]
    fn csv_is_deterministic_and_well_formed() {
        let t = sample();
        let csv = t.to_csv();
        assert_eq!(csv, t.to_csv());
        assert_eq!(csv, "x,y,ok,note\n1,2.5,true,a\n2,1.25,false,b\n");
    }

    #[test]
    fn json_rows_carry_column_names() {
        let t = sample();
        let parsed: Vec<serde_json::Value> = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0]["y"], 2.5);
        assert_eq!(parsed[1]["ok"], false);
        assert_eq!(parsed[0]["note"], "a");
    }

    #[test]
    fn artifacts_on_disk_with_hashed_svg_name() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        let paths = t.write_artifacts(dir.path()).unwrap();
        assert!(paths.csv.exists() && paths.json.exists());
        let svg = paths.svg.unwrap();
        assert!(svg.exists());
        let name = svg.file_name().unwrap().to_str().unwrap();
        assert!(name.starts_with("demo-") && name.ends_with(".svg"));
        // hash chunk is 16 hex chars, no timestamp
        let hash = &name["demo-".len()..name.len() - ".svg".len()];
        assert_eq!(hash.len(), 16);
        assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
        // byte-identical on rerun
        let again = t.write_artifacts(dir.path()).unwrap();
        assert_eq!(again.svg.unwrap(), svg);
        let body = std::fs::read_to_string(&svg).unwrap();
        assert!(body.starts_with("<svg"));
        assert!(body.contains("polyline"));
    }

    #[test]
    fn bar_chart_renders() {
        let mut t = Table::new("bars", &["name", "v"], PlotSpec::Bars { label: 0, value: 1 });
        t.push(vec![Cell::S("alpha".into()), Cell::F(3.0)]);
        t.push(vec![Cell::S("beta".into()), Cell::F(1.5)]);
        let svg = t.to_svg().unwrap();
        assert_eq!(svg.matches("<rect").count(), 3); // background + 2 bars
        assert!(svg.contains("alpha"));
    }
}
