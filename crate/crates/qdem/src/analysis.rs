//! Monte Carlo height-field estimation and statistical comparison against
//! the closed-form limit profiles.
//!
//! Aggregation is order-independent by construction: every sample reduces
//! to integer count vectors (heights are arrow/point counts), and only the
//! final summary converts to floating point. Identical `(params, seed)`
//! therefore give bit-identical results at any thread count.

use qdem_core::coins::CoinStream;
use qdem_core::cylinder::{self, ComparisonReport, CylinderState};
use qdem_core::demazure;
use qdem_core::godunov::{godunov_solve, PdeGrid};
use qdem_core::height::{Chart, FieldMeta, HeightField};
use qdem_core::hydro;
use qdem_core::lattice::{self, TriangleConfig};
use qdem_core::perm::Permutation;
use rayon::prelude::*;

/// Interior/near-curve split margin for limit comparisons: convergence is
/// slower at fan edges and the shock, so tolerances differ by zone.
pub const CURVE_MARGIN: f64 = 0.05;

/// Every how many samples the colored-vertex sampler replaces the word
/// sampler to cross-check the height identity (the two are bit-coupled,
/// so the estimate is unaffected).
const SPOT_CHECK_EVERY: u64 = 100;

/// A mean field with per-point standard errors (indexed like `values`).
#[derive(Debug, Clone)]
pub struct FieldEstimate {
    pub mean: HeightField,
    pub se: Vec<f64>,
}

/// Integer accumulator: per-point sums and sums of squares of raw counts.
struct CountAccum {
    sum: Vec<u64>,
    sq: Vec<u64>,
}

impl CountAccum {
    fn new(points: usize) -> Self {
        CountAccum { sum: vec![0; points], sq: vec![0; points] }
    }

    fn absorb(&mut self, counts: &[u32]) {
        debug_assert_eq!(counts.len(), self.sum.len());
        for (i, &c) in counts.iter().enumerate() {
            self.sum[i] += u64::from(c);
            self.sq[i] += u64::from(c) * u64::from(c);
        }
    }

    fn merge(mut self, other: CountAccum) -> CountAccum {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sq.iter_mut().zip(&other.sq) {
            *a += b;
        }
        self
    }

    /// Scaled means and standard errors: counts are divided by `scale`.
    fn finish(&self, samples: u64, scale: f64) -> (Vec<f64>, Vec<f64>) {
        let n = samples as f64;
        let mut means = Vec::with_capacity(self.sum.len());
        let mut ses = Vec::with_capacity(self.sum.len());
        for (&s, &sq) in self.sum.iter().zip(&self.sq) {
            let mean = s as f64 / n;
            let se = if samples < 2 {
                0.0
            } else {
                let var = ((sq as f64) - n * mean * mean).max(0.0) / (n - 1.0);
                (var / n).sqrt()
            };
            means.push(mean / scale);
            ses.push(se / scale);
        }
        (means, ses)
    }
}

fn check_grid(axis: &[f64]) {
    assert!(!axis.is_empty(), "empty grid axis");
    assert!(
        axis.iter().all(|c| (0.0..=1.0).contains(c)),
        "grid coordinates must lie in [0, 1]"
    );
}

/// `counts[t * marks.len() + m] = #{pos <= marks[m] : sigma(pos) > thresholds[t]}`,
/// computed in one left-to-right pass — threshold-major, so the layout
/// matches a field with thresholds on the first axis and prefix marks on
/// the second. `marks` must be nondecreasing.
fn prefix_exceed_grid(sigma: &Permutation, marks: &[usize], thresholds: &[u32], out: &mut [u32]) {
    let m_len = marks.len();
    debug_assert_eq!(out.len(), m_len * thresholds.len());
    let mut exceed = vec![0u32; thresholds.len()];
    let mut mi = 0;
    let store = |mi: usize, exceed: &[u32], out: &mut [u32]| {
        for (t, &e) in exceed.iter().enumerate() {
            out[t * m_len + mi] = e;
        }
    };
    while mi < m_len && marks[mi] == 0 {
        store(mi, &exceed, out);
        mi += 1;
    }
    for pos in 1..=sigma.n() {
        let val = sigma.image(pos);
        let idx = thresholds.partition_point(|&t| t < val);
        for e in &mut exceed[..idx] {
            *e += 1;
        }
        while mi < m_len && marks[mi] == pos {
            store(mi, &exceed, out);
            mi += 1;
        }
    }
    debug_assert_eq!(mi, m_len, "marks beyond n");
}

/// Asserts the discrete height identity
/// `H(c; n, Y) = c - Y + 1 + #{i <= Y-1 : sigma(i) > c}`
/// on a spread of `(c, Y)` probes of a retained configuration.
fn spot_check_height_identity(config: &TriangleConfig, sigma: &Permutation) {
    let n = config.n;
    let probes = [1, n / 3 + 1, n / 2 + 1, (2 * n) / 3 + 1, n];
    for &c in &probes {
        for &y in &probes {
            let lhs = config.colored_height(n, c as u32, y) as i64;
            let rhs = c as i64 - y as i64 + 1 + sigma.prefix_exceed(y - 1, c as u32) as i64;
            assert_eq!(lhs, rhs, "height identity broken at (c, Y) = ({c}, {y})");
        }
    }
}

/// Estimates the mean permutation height field on `xs x ys` (unit-square
/// chart) from `samples` draws of the staircase sampler: `value(i, j)`
/// estimates `E #{pos <= n*ys[j] : sigma(pos) > n*xs[i]} / n`, so `xs` are
/// value thresholds (first coordinate, the slice parameter of
/// `limit_h_sigma`) and `ys` prefix fractions (second coordinate, where the
/// critical curves live). One sample in `SPOT_CHECK_EVERY` is drawn through
/// the colored-vertex sampler instead and its height identity asserted; the
/// two samplers are bit-coupled, so the estimate is unchanged.
pub fn triangle_height_field(
    n: usize,
    p: f64,
    q: f64,
    xs: &[f64],
    ys: &[f64],
    seed: u64,
    samples: u64,
) -> FieldEstimate {
    assert!(n >= 2 && samples >= 1, "need n >= 2 and samples >= 1");
    check_grid(xs);
    check_grid(ys);
    let nf = n as f64;
    let thresholds: Vec<u32> = xs.iter().map(|&x| (nf * x) as u32).collect();
    let marks: Vec<usize> = ys.iter().map(|&y| (nf * y) as usize).collect();
    let points = marks.len() * thresholds.len();

    let base = CoinStream::new(seed);
    let acc = (0..samples)
        .into_par_iter()
        .fold(
            || (CountAccum::new(points), vec![0u32; points]),
            |(mut acc, mut counts), s| {
                let coins = base.substream(s);
                let sigma = if s % SPOT_CHECK_EVERY == 0 {
                    let sample = lattice::sample_colored_triangle(n, p, q, &coins, true);
                    let config = sample.config.as_ref().expect("retained configuration");
                    spot_check_height_identity(config, &sample.sigma);
                    sample.sigma
                } else {
                    demazure::sample_sigma_word(n, p, q, &coins, None)
                };
                prefix_exceed_grid(&sigma, &marks, &thresholds, &mut counts);
                acc.absorb(&counts);
                (acc, counts)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| CountAccum::new(points), CountAccum::merge);

    let (means, se) = acc.finish(samples, nf);
    let meta = FieldMeta {
        chart: Chart::UnitSquare,
        n: Some(n as u64),
        samples: Some(samples),
        p: Some(p),
        q: Some(q),
    };
    let mean = HeightField::new(xs.to_vec(), ys.to_vec(), means, meta)
        .expect("estimated field within [0, 1]");
    FieldEstimate { mean, se }
}

/// Estimates the quadrant height field `H(V, U) / N` on the grid
/// `vs x us` (cylinder chart, coordinates `(v, u)` scaled by `N = v_max`).
pub fn quadrant_height_field(
    v_max: usize,
    p: f64,
    q: f64,
    vs: &[f64],
    us: &[f64],
    seed: u64,
    samples: u64,
) -> FieldEstimate {
    assert!(v_max >= 1 && samples >= 1, "need v_max >= 1 and samples >= 1");
    check_grid(vs);
    check_grid(us);
    let nf = v_max as f64;
    let v_marks: Vec<usize> = vs.iter().map(|&v| (nf * v) as usize).collect();
    let u_marks: Vec<usize> = us.iter().map(|&u| (nf * u) as usize).collect();
    let points = v_marks.len() * u_marks.len();

    let base = CoinStream::new(seed);
    let acc = (0..samples)
        .into_par_iter()
        .fold(
            || CountAccum::new(points),
            |mut acc, s| {
                let coins = base.substream(s);
                let mut state = cylinder::init_quadrant(v_max, p, q);
                let mut counts = vec![0u32; points];
                for level in 0..=v_max {
                    if level > 0 {
                        state.step_row(p, q, &coins);
                    }
                    if v_marks.iter().all(|&m| m != level) {
                        continue;
                    }
                    let suffix = cylinder::suffix_counts(&state.occupancy);
                    for (i, &vm) in v_marks.iter().enumerate() {
                        if vm != level {
                            continue;
                        }
                        for (j, &um) in u_marks.iter().enumerate() {
                            counts[i * u_marks.len() + j] =
                                suffix.get(um).copied().unwrap_or(0);
                        }
                    }
                }
                acc.absorb(&counts);
                acc
            },
        )
        .reduce(|| CountAccum::new(points), CountAccum::merge);

    let (means, se) = acc.finish(samples, nf);
    let meta = FieldMeta {
        chart: Chart::Cylinder,
        n: Some(v_max as u64),
        samples: Some(samples),
        p: Some(p),
        q: Some(q),
    };
    let mean = HeightField::new(vs.to_vec(), us.to_vec(), means, meta)
        .expect("estimated field within [0, 1]");
    FieldEstimate { mean, se }
}

/// Sup/L1 deviation summary, split by distance to the critical curves.
/// `l1` is the mean absolute deviation over the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub sup_interior: f64,
    pub sup_near: f64,
    pub l1: f64,
}

/// Compares a field against a limit evaluator `(c1, c2) -> value`,
/// splitting the sup by whether `c2` is within [`CURVE_MARGIN`] of any
/// critical second coordinate returned by `curves(c1)`.
pub fn compare_to_limit(
    field: &HeightField,
    limit: impl Fn(f64, f64) -> f64,
    curves: impl Fn(f64) -> Vec<f64>,
) -> ErrorSummary {
    let mut sup_interior: f64 = 0.0;
    let mut sup_near: f64 = 0.0;
    let mut l1 = 0.0;
    for (i, &c1) in field.coords1().iter().enumerate() {
        let crit = curves(c1);
        for (j, &c2) in field.coords2().iter().enumerate() {
            let diff = (field.value(i, j) - limit(c1, c2)).abs();
            l1 += diff;
            let near = crit.iter().any(|&c| (c2 - c).abs() < CURVE_MARGIN);
            if near {
                sup_near = sup_near.max(diff);
            } else {
                sup_interior = sup_interior.max(diff);
            }
        }
    }
    let points = (field.coords1().len() * field.coords2().len()) as f64;
    ErrorSummary { sup_interior, sup_near, l1: l1 / points }
}

/// [`compare_to_limit`] against the permuton height `limit_h_sigma`,
/// with critical curves `y = x/kappa`, `y = x kappa`, `y = y*(x)`.
pub fn triangle_limit_summary(field: &HeightField, kappa: f64) -> ErrorSummary {
    assert_eq!(field.meta().chart, Chart::UnitSquare, "chart mismatch");
    compare_to_limit(
        field,
        |x, y| hydro::limit_h_sigma(y, x, kappa),
        |x| hydro::critical_curves(x, kappa).to_vec(),
    )
}

/// [`compare_to_limit`] against the rarefaction height `h_bcg`, with the
/// fan edges `u = v/kappa`, `u = v kappa` as critical curves.
pub fn quadrant_limit_summary(field: &HeightField, kappa: f64) -> ErrorSummary {
    assert_eq!(field.meta().chart, Chart::Cylinder, "chart mismatch");
    compare_to_limit(
        field,
        |v, u| hydro::h_bcg(u, v, kappa),
        |v| vec![v / kappa, v * kappa],
    )
}

/// Paired comparison of the `(p, q)` field against the adjusted
/// `(p'(p, q), 0)` field, estimated with independent seeds.
#[derive(Debug, Clone)]
pub struct PairedSummary {
    pub p_prime: f64,
    pub sup_difference: f64,
    pub base: FieldEstimate,
    pub adjusted: FieldEstimate,
}

pub fn pprime_equivalence(
    n: usize,
    p: f64,
    q: f64,
    xs: &[f64],
    ys: &[f64],
    samples: u64,
    seeds: (u64, u64),
) -> PairedSummary {
    assert!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0, "p' needs p, q in (0, 1)");
    let p_prime = hydro::p_prime(p, q);
    let base = triangle_height_field(n, p, q, xs, ys, seeds.0, samples);
    let adjusted = triangle_height_field(n, p_prime, 0.0, xs, ys, seeds.1, samples);
    let sup_difference = base
        .mean
        .sup_distance(&adjusted.mean)
        .expect("fields share the grid");
    PairedSummary { p_prime, sup_difference, base, adjusted }
}

/// One block of the cylinder hydrodynamics check: the window
/// `[u_lo, u_hi) x (v_lo, v_hi]` with its three block-averaged height
/// estimates.
#[derive(Debug, Clone, Copy)]
pub struct HydroBlock {
    pub u_lo: f64,
    pub u_hi: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    pub empirical: f64,
    pub exact: f64,
    pub godunov: f64,
}

#[derive(Debug, Clone)]
pub struct CylinderHydroSummary {
    pub m: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub samples: u64,
    pub blocks_u: usize,
    pub blocks_v: usize,
    /// Row-major `vb * blocks_u + ub`.
    pub blocks: Vec<HydroBlock>,
    pub max_vs_exact: f64,
    pub max_vs_godunov: f64,
}

/// Block-averaged empirical height of the double-step cylinder run
/// against the exact shock height `h_shock` and the Godunov oracle
/// integrated on the same blocks. The height at `(u, v)` is the suffix
/// arrow count `#{sites >= u}/m` after `v m` sweeps; block averages of the
/// height (unlike densities) are insensitive to the `O(m^{1/3})` shock
/// position fluctuations, so the discrepancy decays like `1/m`. Block
/// edges must align with sites and levels; zero blocks in either
/// direction yields statistic 0.
pub fn cylinder_hydro_check(
    m: usize,
    lambda: f64,
    p: f64,
    q: f64,
    samples: u64,
    seed: u64,
    blocks_u: usize,
    blocks_v: usize,
) -> CylinderHydroSummary {
    assert!(samples >= 1, "need samples >= 1");
    let kappa = hydro::kappa(p, q);
    let levels = cylinder::init_double_step(m, lambda).arrow_count() / 2;
    let empty = CylinderHydroSummary {
        m,
        lambda,
        kappa,
        samples,
        blocks_u,
        blocks_v,
        blocks: Vec::new(),
        max_vs_exact: 0.0,
        max_vs_godunov: 0.0,
    };
    if blocks_u == 0 || blocks_v == 0 || levels == 0 {
        return empty;
    }
    assert!(
        m % blocks_u == 0 && levels % blocks_v == 0,
        "block edges must align with the {m} sites and {levels} levels"
    );
    let su = m / blocks_u;
    let lv = levels / blocks_v;
    let n_blocks = blocks_u * blocks_v;

    let base = CoinStream::new(seed);
    // Per-(sample, level) integer block sums of the suffix counts; exact
    // integers keep the reduce order-independent and bit-identical.
    let counts = (0..samples)
        .into_par_iter()
        .fold(
            || (vec![0u64; n_blocks], vec![0u32; m]),
            |(mut acc, mut suffix), s| {
                let coins = base.substream(s);
                let mut state = cylinder::init_double_step(m, lambda);
                for level in 1..=levels {
                    state.step_row(p, q, &coins);
                    let mut run = 0u32;
                    for (u, &occ) in state.occupancy.iter().enumerate().rev() {
                        run += u32::from(occ);
                        suffix[u] = run;
                    }
                    let row_base = (level - 1) / lv * blocks_u;
                    for (ub, chunk) in suffix.chunks_exact(su).enumerate() {
                        acc[row_base + ub] += chunk.iter().map(|&s| s as u64).sum::<u64>();
                    }
                }
                (acc, suffix)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(
            || vec![0u64; n_blocks],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

    let mf = m as f64;
    let mut exact_acc = vec![0.0; n_blocks];
    let mut god_acc = vec![0.0; n_blocks];
    let mut pde_suffix = vec![0.0; m];
    let mut grid = PdeGrid::double_step(m, lambda, kappa).expect("double-step grid");
    for level in 1..=levels {
        grid = godunov_solve(&grid, lambda, kappa, 1.0 / mf).expect("godunov step");
        let v = level as f64 / mf;
        // PDE height at the left edge of cell u: the suffix integral of
        // the cell densities, matching the lattice suffix counts.
        let mut run = 0.0;
        for (u, &rho) in grid.values.iter().enumerate().rev() {
            run += rho / mf;
            pde_suffix[u] = run;
        }
        let row_base = (level - 1) / lv * blocks_u;
        for ub in 0..blocks_u {
            let exact_sum: f64 = (ub * su..(ub + 1) * su)
                .map(|u| hydro::h_shock(u as f64 / mf, v, lambda, kappa))
                .sum();
            exact_acc[row_base + ub] += exact_sum / su as f64;
            let cells = &pde_suffix[ub * su..(ub + 1) * su];
            god_acc[row_base + ub] += cells.iter().sum::<f64>() / su as f64;
        }
    }

    let per_block = (samples * lv as u64 * su as u64 * m as u64) as f64;
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut max_vs_exact: f64 = 0.0;
    let mut max_vs_godunov: f64 = 0.0;
    for vb in 0..blocks_v {
        for ub in 0..blocks_u {
            let i = vb * blocks_u + ub;
            let empirical = counts[i] as f64 / per_block;
            let exact = exact_acc[i] / lv as f64;
            let godunov = god_acc[i] / lv as f64;
            max_vs_exact = max_vs_exact.max((empirical - exact).abs());
            max_vs_godunov = max_vs_godunov.max((empirical - godunov).abs());
            blocks.push(HydroBlock {
                u_lo: (ub * su) as f64 / mf,
                u_hi: ((ub + 1) * su) as f64 / mf,
                v_lo: (vb * lv) as f64 / mf,
                v_hi: ((vb + 1) * lv) as f64 / mf,
                empirical,
                exact,
                godunov,
            });
        }
    }
    CylinderHydroSummary {
        m,
        lambda,
        kappa,
        samples,
        blocks_u,
        blocks_v,
        blocks,
        max_vs_exact,
        max_vs_godunov,
    }
}

/// Worst 3-sigma margins of the mean-height sandwich
/// `E[H_dstep] <= E[H_refl]` and `E[H_act] <= E[H_quad]`; a margin is
/// `mean difference + 3 SE`, nonnegative when the ordering holds.
#[derive(Debug, Clone, Copy)]
pub struct SandwichSummary {
    pub worst_lower: f64,
    pub worst_upper: f64,
    pub ok: bool,
}

pub fn check_sandwich(report: &ComparisonReport) -> SandwichSummary {
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for i in 0..report.mean_diff_lower.len() {
        worst_lower =
            worst_lower.min(report.mean_diff_lower[i] + 3.0 * report.se_diff_lower[i]);
        worst_upper =
            worst_upper.min(report.mean_diff_upper[i] + 3.0 * report.se_diff_upper[i]);
    }
    SandwichSummary {
        worst_lower,
        worst_upper,
        ok: worst_lower >= 0.0 && worst_upper >= 0.0,
    }
}

/// One coupled trajectory of the three systems, flattened for the
/// trajectory CSV: rows `(system, V, U, occupied)`.
pub fn coupled_trajectories(
    n: usize,
    x: usize,
    p: f64,
    q: f64,
    seed: u64,
) -> Vec<(&'static str, usize, usize, bool)> {
    let m = n + x;
    let coins = CoinStream::new(seed);
    let mut refl = cylinder::init_reflective(n, x);
    let mut dstep = cylinder::init_double_step_exact(m, x);
    let mut quad = cylinder::init_quadrant(x, p, q);
    let mut rows = Vec::new();
    let record = |state: &CylinderState, name: &'static str, v: usize, rows: &mut Vec<_>| {
        for (u, &occ) in state.occupancy.iter().enumerate() {
            rows.push((name, v, u, occ));
        }
    };
    for v in 0..=x {
        if v > 0 {
            refl.step_row(p, q, &coins);
            dstep.step_row(p, q, &coins);
            quad.step_row(p, q, &coins);
        }
        record(&refl, "refl", v, &mut rows);
        record(&dstep, "dstep", v, &mut rows);
        record(&quad, "quad", v, &mut rows);
    }
    rows
}
