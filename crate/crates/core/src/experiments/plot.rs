//! Generates a standalone matplotlib script over the emitted CSV tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub format: String,
    pub dpi: u32,
    /// Guide-line slopes drawn on every error panel.
    pub guide_slopes: Vec<f64>,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            format: "png".into(),
            dpi: 150,
            guide_slopes: vec![-1.0, -2.0],
        }
    }
}

/// One case: its error table and, optionally, a solution/composite overlay file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    pub name: String,
    pub errors_csv: PathBuf,
    pub profile_csv: Option<PathBuf>,
}

/// Two points of `e = e0 (β/β0)^slope`, exact in log-log coordinates.
pub fn guide_line(beta0: f64, beta1: f64, e0: f64, slope: f64) -> [(f64, f64); 2] {
    [(beta0, e0), (beta1, e0 * (beta1 / beta0).powf(slope))]
}

fn py_str(p: &Path) -> String {
    format!("{:?}", p.to_string_lossy())
}

/// Writes `plot.py` into `dir`: one figure per table plus a combined figure.
pub fn emit_plot_script(dir: &Path, tables: &[PlotTable], style: Option<&PlotStyle>) -> Result<PathBuf> {
    if tables.is_empty() {
        return Err(Error::Config("no tables to plot".into()));
    }
    let default = PlotStyle::default();
    let style = style.unwrap_or(&default);
    let mut s = String::new();
    let slopes: Vec<String> = style.guide_slopes.iter().map(|x| format!("{x:?}")).collect();
    let _ = writeln!(
        s,
        r#"import csv
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

FORMAT = {fmt:?}
DPI = {dpi}
SLOPES = [{slopes}]


def load(path):
    curves = defaultdict(list)
    with open(path) as f:
        for row in csv.DictReader(f):
            curves[float(row["r"])].append((float(row["beta"]), float(row["error_inf"])))
    return {{r: sorted(v) for r, v in sorted(curves.items())}}


def guides(ax, curves):
    pts = [p for v in curves.values() for p in v]
    b0, b1 = min(p[0] for p in pts), max(p[0] for p in pts)
    e0 = max(p[1] for p in pts)
    for s in SLOPES:
        ax.loglog([b0, b1], [e0, e0 * (b1 / b0) ** s], "k--", lw=0.8, label=f"slope {{s:g}}")


def panel(ax, curves, label=""):
    for r, v in curves.items():
        ax.loglog([p[0] for p in v], [p[1] for p in v], "o-", ms=3, label=f"{{label}}R={{r:g}}")
    ax.set_xlabel("beta")
    ax.set_ylabel("max |u - u0|")


def overlay(path, out):
    t, u, u0 = [], [], []
    with open(path) as f:
        for row in csv.DictReader(f):
            t.append(float(row["t"]))
            u.append(float(row["u"]))
            u0.append(float(row["u0"]))
    fig, ax = plt.subplots()
    ax.plot(t, u, label="u")
    ax.plot(t, u0, "--", label="u0")
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig(out, dpi=DPI)
    plt.close(fig)


TABLES = ["#,
        fmt = style.format,
        dpi = style.dpi,
        slopes = slopes.join(", ")
    );
    for t in tables {
        let prof = t.profile_csv.as_deref().map(py_str).unwrap_or_else(|| "None".into());
        let _ = writeln!(s, "    ({:?}, {}, {}),", t.name, py_str(&t.errors_csv), prof);
    }
    s.push_str(
        r#"]

combined, cax = plt.subplots()
for name, errors, profile in TABLES:
    curves = load(errors)
    fig, ax = plt.subplots()
    panel(ax, curves)
    guides(ax, curves)
    ax.set_title(name)
    ax.legend()
    fig.savefig(f"{name}_errors.{FORMAT}", dpi=DPI)
    plt.close(fig)
    panel(cax, curves, label=f"{name} ")
    if profile is not None:
        overlay(profile, f"{name}_profile.{FORMAT}")
guides(cax, load(TABLES[0][1]))
cax.legend(fontsize="small")
combined.savefig(f"combined_errors.{FORMAT}", dpi=DPI)
"#,
    );
    std::fs::create_dir_all(dir)?;
    let path = dir.join("plot.py");
    std::fs::write(&path, s)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guide_slopes_are_exact() {
        for slope in [-1.0, -2.0] {
            let [(b0, e0), (b1, e1)] = guide_line(90.0, 6000.0, 3e-3, slope);
            let measured = (e1 / e0).ln() / (b1 / b0).ln();
            assert!((measured - slope).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_style_uses_defaults_and_lists_every_case() {
        let dir = tempfile::tempdir().unwrap();
        let tables: Vec<PlotTable> = ["n20", "n40"]
            .iter()
            .map(|n| PlotTable {
                name: n.to_string(),
                errors_csv: PathBuf::from(format!("{n}/errors.csv")),
                profile_csv: None,
            })
            .collect();
        let path = emit_plot_script(dir.path(), &tables, None).unwrap();
        let s = std::fs::read_to_string(path).unwrap();
        assert!(s.contains("FORMAT = \"png\""));
        assert!(s.contains("SLOPES = [-1.0, -2.0]"));
        assert!(s.contains("(\"n20\", \"n20/errors.csv\", None)"));
        assert!(s.contains("(\"n40\", \"n40/errors.csv\", None)"));
        assert!(s.contains("combined_errors"));
        assert_eq!(s.matches("fig.savefig(f\"{name}_errors").count(), 1);
    }

    #[test]
    fn empty_tables_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plot_script(dir.path(), &[], None).is_err());
    }
}
