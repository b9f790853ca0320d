//! `pfreq`: eigenvalue solves, closed-form bounds, and sharpness sweeps
//! from the command line. Exit code 0 means every verdict passed and
//! every solve converged; anything else is nonzero.

use clap::{Parser, Subcommand, ValueEnum};
use pfreq::bounds::{self, ball_reference, PiP};
use pfreq::eigensolver::{minimize_lambda_p, minimize_lambda_pq, SolverConfig};
use pfreq::experiments::{
    run_bounds_report, run_sweep, Cell, OutputFormat, PlotSpec, SweepSpec, Table,
};
use pfreq::geometry::{chebyshev_center, regular_polygon, ConvexPolygon, ShapeFamily};
use pfreq::io;
use pfreq::poincare1d::{pi_p_estimate, pi_p_reference};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pfreq", version, about = "p-Laplacian eigenvalues, bounds, and sweeps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the one-dimensional Poincare constant pi_p on an n-point grid
    #[command(name = "pi-p")]
    PiP {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the Rayleigh quotient on a shape
    Solve {
        /// square | box:LxW | disk[:R] | ngon:K[:R] | pyramid:A | slab:L | <file.json>
        shape: String,
        #[arg(long)]
        p: f64,
        /// denominator exponent; defaults to p
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form bound values from exact geometry; no eigensolve
    Bounds {
        shape: String,
        #[arg(long)]
        p: f64,
        /// grid size for the pi_p estimate
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sharpness sweeps: pyramid | slab | subhom | pinfty | hardy
    Sweep {
        which: String,
        /// exponent; repeat to set the pinfty grid
        #[arg(long = "p")]
        ps: Vec<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// pyramid apex heights, strictly decreasing
        #[arg(long = "alpha")]
        alphas: Vec<f64>,
        /// box lengths, strictly increasing
        #[arg(long = "L")]
        lengths: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, evaluate every applicable bound, and grade each verdict
    Report {
        shape: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A shape argument is either an analytic family or a raw polygon file.
enum ShapeArg {
    Family(ShapeFamily),
    Poly(ConvexPolygon),
}

impl ShapeArg {
    fn polygon(&self) -> Result<ConvexPolygon, String> {
        match self {
            ShapeArg::Poly(pg) => Ok(pg.clone()),
            ShapeArg::Family(ShapeFamily::Disk { radius }) => Ok(regular_polygon(256, *radius)),
            ShapeArg::Family(f) => f
                .polygon()
                .ok_or_else(|| format!("{f:?} has no two-dimensional polygon realization")),
        }
    }
}

fn parse_shape(s: &str) -> Result<ShapeArg, String> {
    if s.ends_with(".json") || std::path::Path::new(s).is_file() {
        let text = std::fs::read_to_string(s).map_err(|e| format!("{s}: {e}"))?;
        if let Ok(fam) = io::shape_from_json(&text) {
            return Ok(ShapeArg::Family(fam));
        }
        return io::polygon_from_json(&text)
            .map(ShapeArg::Poly)
            .map_err(|e| format!("{s}: neither a shape nor a polygon: {e}"));
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number {t:?} in {s:?}"));
    match parts[0] {
        "square" => Ok(ShapeArg::Family(ShapeFamily::Box { lengths: vec![1.0, 1.0] })),
        "box" if parts.len() == 2 => {
            let dims: Vec<&str> = parts[1].split('x').collect();
            if dims.len() != 2 {
                return Err(format!("box wants LxW, got {:?}", parts[1]));
            }
            Ok(ShapeArg::Family(ShapeFamily::Box {
                lengths: vec![num(dims[0])?, num(dims[1])?],
            }))
        }
        "disk" => {
            let radius = if parts.len() > 1 { num(parts[1])? } else { 1.0 };
            Ok(ShapeArg::Family(ShapeFamily::Disk { radius }))
        }
        "ngon" if parts.len() >= 2 => {
            let sides = parts[1]
                .parse::<usize>()
                .map_err(|_| format!("bad side count {:?}", parts[1]))?;
            let circumradius = if parts.len() > 2 { num(parts[2])? } else { 1.0 };
            Ok(ShapeArg::Family(ShapeFamily::RegularPolygon { sides, circumradius }))
        }
        "pyramid" if parts.len() == 2 => Ok(ShapeArg::Family(ShapeFamily::CollapsingPyramid {
            dim: 2,
            alpha: num(parts[1])?,
        })),
        "slab" if parts.len() == 2 => Ok(ShapeArg::Family(ShapeFamily::SlabBox {
            dim: 2,
            length: num(parts[1])?,
        })),
        _ => Err(format!(
            "unknown shape {s:?}; try square, box:LxW, disk[:R], ngon:K[:R], pyramid:A, slab:L, or a JSON file"
        )),
    }
}

/// Print to stdout in the chosen format; `--out DIR` also writes the
/// CSV/JSON/SVG artifact set there.
fn emit(table: &Table, format: Format, out: &Option<PathBuf>) -> Result<(), String> {
    match format {
        Format::Csv => print!("{}", table.to_csv()),
        Format::Json => print!("{}", table.to_json()),
    }
    if let Some(dir) = out {
        let paths = table.write_artifacts(dir).map_err(|e| e.to_string())?;
        eprintln!("wrote {}", paths.csv.display());
        eprintln!("wrote {}", paths.json.display());
        if let Some(svg) = paths.svg {
            eprintln!("wrote {svg}", svg = svg.display());
        }
    }
    Ok(())
}

/// Any boolean cell that reads false marks the run as failed.
fn all_flags_true(table: &Table) -> bool {
    table
        .rows
        .iter()
        .flatten()
        .all(|c| !matches!(c, Cell::B(false)))
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::PiP { p, n, format, out } => {
            let est = pi_p_estimate(p, n).map_err(|e| e.to_string())?;
            let exact = pi_p_reference(p).map_err(|e| e.to_string())?;
            let mut t = Table::new(
                "pi_p",
                &["p", "n", "estimate", "reference", "rel_gap", "converged"],
                PlotSpec::None,
            );
            t.push(vec![
                Cell::F(p),
                Cell::F(n as f64),
                Cell::F(est.value),
                Cell::F(exact),
                Cell::F((est.value - exact) / exact),
                Cell::B(est.converged),
            ]);
            emit(&t, format, &out)?;
            Ok(est.converged)
        }
        Cmd::Solve { shape, p, q, h, tol, seed, format, out } => {
            let pg = parse_shape(&shape)?.polygon()?;
            let mut cfg = SolverConfig::new(p).with_seed(seed);
            cfg.h = h;
            if let Some(tol) = tol {
                cfg.tol = tol;
            }
            let res = match q {
                Some(q) => minimize_lambda_pq(&pg, p, q, &cfg),
                None => minimize_lambda_p(&pg, p, &cfg),
            }
            .map_err(|e| e.to_string())?;
            let mut t = Table::new(
                "solve",
                &["p", "q", "lambda", "iterations", "residual", "converged"],
                PlotSpec::None,
            );
            t.push(vec![
                Cell::F(p),
                Cell::F(q.unwrap_or(p)),
                Cell::F(res.value),
                Cell::F(res.iterations as f64),
                Cell::F(res.residual),
                Cell::B(res.converged),
            ]);
            emit(&t, format, &out)?;
            Ok(res.converged)
        }
        Cmd::Bounds { shape, p, n, format, out } => {
            let arg = parse_shape(&shape)?;
            let pg = arg.polygon()?;
            // exact quantities when the family knows them, otherwise measured
            // off the polygon
            let (r, per, vol) = match &arg {
                ShapeArg::Family(f) => (f.inradius(), f.perimeter().value, f.measure()),
                ShapeArg::Poly(pg) => {
                    let ball =
                        chebyshev_center(&pg.to_halfspaces()).map_err(|e| e.to_string())?;
                    (ball.radius, pg.perimeter(), pg.measure())
                }
            };
            let _ = &pg;
            let pip = PiP::estimate_with_n(p, n).map_err(|e| e.to_string())?;
            let ball = ball_reference(p).map_err(|e| e.to_string())?;
            let dim = 2.0;
            let reports = [
                bounds::hardy_lower(p, r),
                bounds::hersch_protter_lower(p, r, &pip),
                bounds::faber_krahn_lower(p, dim, vol, ball.lambda, ball.volume),
                bounds::isoperimetric_lower(p, dim, per, vol, &pip),
                bounds::ball_upper(p, r, ball.lambda),
                bounds::isoperimetric_upper(p, per, vol, &pip),
                bounds::cheeger_lower(dim, per, vol),
            ];
            let mut t = Table::new(
                "bounds",
                &["name", "side", "value", "citation"],
                PlotSpec::Bars { label: 0, value: 2 },
            );
            for rep in reports {
                let rep = rep.map_err(|e| e.to_string())?;
                t.push(vec![
                    Cell::S(rep.name),
                    Cell::S(rep.side.to_string()),
                    Cell::F(rep.value),
                    Cell::S(rep.citation),
                ]);
            }
            let geo = bounds::geometric_check(r, dim, per, vol).map_err(|e| e.to_string())?;
            t.push(vec![
                Cell::S(geo.report.name),
                Cell::S(geo.report.side.to_string()),
                Cell::F(geo.margin),
                Cell::S(if geo.pass { "pass".into() } else { "FAIL".into() }),
            ]);
            emit(&t, format, &out)?;
            Ok(geo.pass)
        }
        Cmd::Sweep { which, ps, q, alphas, lengths, seed, format, out } => {
            let scalar_p = ps.first().copied().unwrap_or(2.0);
            let mut spec = SweepSpec::new(&which, scalar_p);
            spec.q = q;
            if !alphas.is_empty() {
                spec.alphas = alphas;
            }
            if !lengths.is_empty() {
                spec.lengths = lengths;
            }
            if ps.len() > 1 {
                spec.ps = ps;
            }
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            spec.format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
            spec.out = out.clone();
            let t = run_sweep(&spec).map_err(|e| e.to_string())?;
            emit(&t, format, &out)?;
            Ok(all_flags_true(&t))
        }
        Cmd::Report { shape, p, h, format, out } => {
            let fam = match parse_shape(&shape)? {
                ShapeArg::Family(f) => f,
                ShapeArg::Poly(_) => {
                    return Err("report wants an analytic shape; use bounds/solve for raw polygons"
                        .to_string())
                }
            };
            let outcome = run_bounds_report(&fam, p, h, None).map_err(|e| e.to_string())?;
            emit(&outcome.table, format, &out)?;
            Ok(outcome.all_pass && outcome.converged)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pfreq::geometry::{collapsing_pyramid, rectangle};

    #[test]
    fn shape_strings_parse() {
        assert!(matches!(
            parse_shape("square").unwrap(),
            ShapeArg::Family(ShapeFamily::Box { .. })
        ));
        assert!(matches!(
            parse_shape("box:8x1").unwrap(),
            ShapeArg::Family(ShapeFamily::Box { .. })
        ));
        assert!(matches!(
            parse_shape("disk:0.5").unwrap(),
            ShapeArg::Family(ShapeFamily::Disk { .. })
        ));
        assert!(matches!(
            parse_shape("ngon:6").unwrap(),
            ShapeArg::Family(ShapeFamily::RegularPolygon { sides: 6, .. })
        ));
        assert!(matches!(
            parse_shape("pyramid:0.4").unwrap(),
            ShapeArg::Family(ShapeFamily::CollapsingPyramid { .. })
        ));
        assert!(parse_shape("blob").is_err());
        assert!(parse_shape("box:8").is_err());
    }

    #[test]
    fn shape_files_parse() {
        let dir = tempfile::tempdir().unwrap();
        let pg_path = dir.path().join("tri.json");
        let pg = collapsing_pyramid(2, 0.5).unwrap().polygon.unwrap();
        std::fs::write(&pg_path, io::polygon_to_json(&pg)).unwrap();
        let parsed = parse_shape(pg_path.to_str().unwrap()).unwrap();
        assert!(matches!(parsed, ShapeArg::Poly(_)));

        let fam_path = dir.path().join("fam.json");
        let fam = ShapeFamily::SlabBox { dim: 2, length: 4.0 };
        std::fs::write(&fam_path, io::shape_to_json(&fam)).unwrap();
        assert!(matches!(
            parse_shape(fam_path.to_str().unwrap()).unwrap(),
            ShapeArg::Family(ShapeFamily::SlabBox { .. })
        ));
    }

    #[test]
    fn disk_arg_realizes_as_inscribed_polygon() {
        let pg = parse_shape("disk").unwrap().polygon().unwrap();
        assert_eq!(pg.len(), 256);
        let ball = chebyshev_center(&pg.to_halfspaces()).unwrap();
        assert!((ball.radius - 1.0).abs() < 1e-3);
    }

    #[test]
    fn flag_scan_catches_false_cells() {
        let mut t = Table::new("x", &["a", "ok"], PlotSpec::None);
        t.push(vec![Cell::F(1.0), Cell::B(true)]);
        assert!(all_flags_true(&t));
        t.push(vec![Cell::F(2.0), Cell::B(false)]);
        assert!(!all_flags_true(&t));
    }

    #[test]
    fn square_shorthand_matches_rectangle() {
        let pg = parse_shape("square").unwrap().polygon().unwrap();
        let want = rectangle(1.0, 1.0);
        assert_eq!(pg.measure(), want.measure());
        assert_eq!(pg.perimeter(), want.perimeter());
    }
}
