//! File formats: distribution JSON, height-field and profile CSV,
//! configuration/trajectory dumps, comparison-report JSON, and the
//! experiment spec. All text is UTF-8 with '.' as the decimal separator
//! (Rust float formatting is locale-independent); floats in CSV carry
//! 12 significant digits.

use std::fmt::Write as _;

use qdem_core::cylinder::ComparisonReport;
use qdem_core::demazure::Law;
use qdem_core::height::HeightField;
use qdem_core::lattice::TriangleConfig;
use serde::{Deserialize, Serialize};

use crate::analysis::CylinderHydroSummary;

/// Distribution JSON: array of `{"perm": "images", "prob": number}`
/// sorted by descending probability, then lexicographically by images.
/// The mass is validated to sum to 1 within 1e-12 before emission.
pub fn law_json(law: &Law) -> Result<String, String> {
    let total: f64 = law.values().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(format!("law mass {total} differs from 1 by more than 1e-12"));
    }
    let mut entries: Vec<(String, f64)> = law
        .iter()
        .map(|(perm, &prob)| (perm.to_string(), prob))
        .collect();
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("probabilities are finite")
            .then_with(|| a.0.cmp(&b.0))
    });

    #[derive(Serialize)]
    struct Entry<'a> {
        perm: &'a str,
        prob: f64,
    }
    let rows: Vec<Entry> = entries
        .iter()
        .map(|(perm, prob)| Entry { perm, prob: *prob })
        .collect();
    Ok(serde_json::to_string_pretty(&rows).expect("law serializes"))
}

/// Height-field CSV: header `coord1,coord2,value`, one row per grid node.
pub fn field_csv(field: &HeightField) -> String {
    let mut out = String::from("coord1,coord2,value\n");
    for (i, &c1) in field.coords1().iter().enumerate() {
        for (j, &c2) in field.coords2().iter().enumerate() {
            writeln!(out, "{c1:.11e},{c2:.11e},{:.11e}", field.value(i, j)).unwrap();
        }
    }
    out
}

/// Per-point comparison CSV: the field next to a limit evaluator.
pub fn comparison_csv(field: &HeightField, limit: impl Fn(f64, f64) -> f64) -> String {
    let mut out = String::from("coord1,coord2,value,limit,abs_error\n");
    for (i, &c1) in field.coords1().iter().enumerate() {
        for (j, &c2) in field.coords2().iter().enumerate() {
            let v = field.value(i, j);
            let l = limit(c1, c2);
            writeln!(out, "{c1:.11e},{c2:.11e},{v:.11e},{l:.11e},{:.11e}", (v - l).abs())
                .unwrap();
        }
    }
    out
}

/// 1D profile CSV with a caller-chosen abscissa name (`u`, `y`, `z`, `v`).
pub fn profile_csv(abscissa: &str, rows: &[(f64, f64)]) -> String {
    let mut out = format!("{abscissa},value\n");
    for &(a, v) in rows {
        writeln!(out, "{a:.11e},{v:.11e}").unwrap();
    }
    out
}

/// Colored-configuration dump: `S,Y,top_color,right_color` in box scan
/// order (rows `S = 2..=n`, boxes `Y = 1..S`).
pub fn config_csv(config: &TriangleConfig) -> String {
    let mut out = String::from("S,Y,top_color,right_color\n");
    let outputs = config.box_outputs();
    let mut k = 0;
    for s in 2..=config.n {
        for y in 1..s {
            let (top, right) = outputs[k];
            k += 1;
            writeln!(out, "{s},{y},{top},{right}").unwrap();
        }
    }
    out
}

/// Trajectory dump: `system,V,U,occupied` with occupancy as 0/1.
pub fn trajectory_csv(rows: &[(&str, usize, usize, bool)]) -> String {
    let mut out = String::from("system,V,U,occupied\n");
    for &(system, v, u, occ) in rows {
        writeln!(out, "{system},{v},{u},{}", u8::from(occ)).unwrap();
    }
    out
}

/// Cylinder-hydrodynamics block table.
pub fn blocks_csv(summary: &CylinderHydroSummary) -> String {
    let mut out = String::from("u_lo,u_hi,v_lo,v_hi,empirical,exact,godunov\n");
    for b in &summary.blocks {
        writeln!(
            out,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            b.u_lo, b.u_hi, b.v_lo, b.v_hi, b.empirical, b.exact, b.godunov
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct ReportPoint {
    #[serde(rename = "V")]
    v: usize,
    #[serde(rename = "U")]
    u: usize,
    refl: f64,
    act: f64,
    dstep: f64,
    quad: f64,
    ci: f64,
}

#[derive(Serialize)]
struct ReportJson {
    n: usize,
    x: usize,
    m: usize,
    v_levels: usize,
    samples: u64,
    points: Vec<ReportPoint>,
    violations_lower: u64,
    violations_upper: u64,
}

/// Comparison-report JSON: per-point mean heights of the three systems
/// with a shared confidence half-width `ci` (three standard errors of the
/// widest of the four estimates), plus pathwise violation counts.
pub fn report_json(report: &ComparisonReport) -> String {
    let mut points = Vec::with_capacity(report.v_levels * report.m);
    for v in 0..report.v_levels {
        for u in 0..report.m {
            let i = report.idx(v, u);
            let widest = report.se_refl[i]
                .max(report.se_act[i])
                .max(report.se_dstep[i])
                .max(report.se_quad[i]);
            points.push(ReportPoint {
                v,
                u,
                refl: report.mean_refl[i],
                act: report.mean_act[i],
                dstep: report.mean_dstep[i],
                quad: report.mean_quad[i],
                ci: 3.0 * widest,
            });
        }
    }
    let doc = ReportJson {
        n: report.n,
        x: report.x,
        m: report.m,
        v_levels: report.v_levels,
        samples: report.samples,
        points,
        violations_lower: report.violations_lower,
        violations_upper: report.violations_upper,
    };
    serde_json::to_string(&doc).expect("report serializes")
}

/// Summary JSON for field-vs-limit experiments.
#[derive(Serialize)]
pub struct LimitSummaryJson<'a> {
    pub sup_interior: f64,
    pub sup_near: f64,
    pub l1: f64,
    pub per_point_csv: &'a str,
}

/// Summary JSON for the paired p' experiment.
#[derive(Serialize)]
pub struct PairedSummaryJson<'a> {
    pub p_prime: f64,
    pub sup_difference: f64,
    pub per_point_csv: &'a str,
}

/// Summary JSON for the cylinder hydrodynamics experiment.
#[derive(Serialize)]
pub struct CylinderSummaryJson<'a> {
    pub kappa: f64,
    pub max_vs_exact: f64,
    pub max_vs_godunov: f64,
    pub per_point_csv: &'a str,
}

/// Experiment kinds accepted in spec files.
#[derive(Deserialize, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    #[serde(rename = "triangleLimit")]
    TriangleLimit,
    #[serde(rename = "cylinderHydro")]
    CylinderHydro,
    #[serde(rename = "quadrantHydro")]
    QuadrantHydro,
    #[serde(rename = "pprimeEquivalence")]
    PprimeEquivalence,
    #[serde(rename = "couplingOrder")]
    CouplingOrder,
}

/// Experiment spec file. Unknown keys are hard errors (the parse error
/// names the offending key); which optional keys are required depends on
/// the kind and is validated by the runner.
#[derive(Deserialize, Serialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Model size: permutation size, cylinder circumference `M`, or
    /// quadrant depth `V_max` depending on the kind.
    pub n: Option<u64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    /// Aspect/slice parameter: `triangleLimit` restricts the field to the
    /// single slice `coord1 = x`; `couplingOrder` uses `X = floor(x n)`.
    pub x: Option<f64>,
    /// Cylinder density parameter (`cylinderHydro` only).
    pub lambda: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    /// Grid points per axis for field experiments (default 101),
    /// blocks per axis for `cylinderHydro` (default 20).
    pub grid: Option<u64>,
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, serde_json::Error> {
    serde_json::from_str(text)
}
