use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::{PlotData, ResultRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 13] = [
    "problem",
    "scheme",
    "magnus",
    "quadrature",
    "reconstruction",
    "correction_ic",
    "dt",
    "dx",
    "norm",
    "relative",
    "error",
    "rate",
    "seconds",
];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// Serialises rows as CSV with a fixed header. An empty slice gives the
/// header line alone.
pub fn emit_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io {
        path: PathBuf::from("<csv>"),
        source: std::io::Error::other(e),
    };
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.scheme.clone(),
            r.magnus.clone(),
            r.quadrature.clone(),
            r.reconstruction.clone(),
            r.correction_ic.clone(),
            float(r.dt),
            optional(r.dx),
            r.norm.clone(),
            r.relative.to_string(),
            float(r.error),
            optional(r.rate),
            float(r.seconds),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| io(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Inverse of [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let path = PathBuf::from("<csv>");
    let bad = |message: String| Error::Parse {
        path: path.clone(),
        message,
    };
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |i: usize| rec.get(i).unwrap_or_default();
        rows.push(ResultRow {
            problem: f(0).into(),
            scheme: f(1).into(),
            magnus: f(2).into(),
            quadrature: f(3).into(),
            reconstruction: f(4).into(),
            correction_ic: f(5).into(),
            dt: num(f(6))?,
            dx: opt(f(7))?,
            norm: f(8).into(),
            relative: f(9).parse().map_err(|_| bad(format!("`{}` is not a boolean", f(9))))?,
            error: num(f(10))?,
            rate: opt(f(11))?,
            seconds: num(f(12))?,
        });
    }
    Ok(rows)
}

/// Text of one plot-data file: a `#` header naming the columns, then one
/// whitespace-separated row per line.
pub fn render_plotdata(plot: &PlotData) -> String {
    let mut s = format!("# {}\n", plot.columns.join(" "));
    for row in &plot.rows {
        let line: Vec<String> = row.iter().map(|x| float(*x)).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

/// Writes every plot to `<dir>/<name>.dat`. Names must be distinct.
pub fn emit_plotdata(plots: &[PlotData], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut seen = HashSet::new();
    for p in plots {
        if !seen.insert(p.name.as_str()) {
            return Err(Error::InvalidConfig(format!("two plot files named `{}`", p.name)));
        }
    }
    create_dir(dir)?;
    plots
        .iter()
        .map(|p| {
            let path = dir.join(format!("{}.dat", p.name));
            write_file(&path, &render_plotdata(p))?;
            Ok(path)
        })
        .collect()
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
