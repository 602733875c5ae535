//! Uncolored stochastic six-vertex dynamics on the discrete cylinder, the
//! reflective trapezoid with its frozen block, and the step-initial quadrant,
//! plus the shared-coin three-system comparison.
//!
//! Vertex law, inputs (site, flying) -> outputs (site', flying'):
//! `(0,0) -> (0,0)`; `(1,1) -> (1,1)`; `(1,0)` stays with probability `qp`,
//! else the arrow takes off; `(0,1)` keeps flying with probability `p`, else
//! it lands. Rows are swept in increasing `U` from the cut at `U = 0`.

use crate::coins::CoinStream;
use crate::hydro;
use alloc::vec;
use alloc::vec::Vec;

/// A row whose wrap arrow survives this many resample attempts aborts: the
/// survival probability per attempt is at most `p^(empty sites)`, so hitting
/// the cap indicates `p` pathologically close to 1 or a bug.
pub const RESAMPLE_CAP: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Periodic row of fixed arrow count, double-step initial data.
    DoubleStep,
    /// Trapezoid in a cylinder of circumference `n + x`: a frozen block of
    /// `2x - V` occupied sites whose left edge melts one site per level,
    /// re-injecting an arrow at the cut.
    Reflective { x: usize },
    /// Step-initial quadrant on a finite window; one arrow enters at the
    /// cut per level.
    Quadrant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderState {
    pub m: usize,
    pub level: usize,
    pub occupancy: Vec<bool>,
    pub kind: BoundaryKind,
}

/// Floor of `f` that forgives downward float noise within `1e-9` of the
/// next integer (`(1/3)*300` evaluates just under 100).
fn stable_floor(f: f64) -> usize {
    let fl = f as usize;
    if f - fl as f64 > 1.0 - 1e-9 {
        fl + 1
    } else {
        fl
    }
}

/// Double-step initial data: exactly `2X` arrows, `X = floor(lambda m)`,
/// right-aligned against the cut (occupied iff `i >= m - 2X`).
pub fn init_double_step(m: usize, lambda: f64) -> CylinderState {
    assert!(lambda > 0.0 && lambda <= 0.5, "lambda outside (0, 1/2]");
    let x = stable_floor(lambda * m as f64);
    assert!(x >= 1, "m too small for this lambda");
    CylinderState {
        m,
        level: 0,
        occupancy: block_occupancy(m, x),
        kind: BoundaryKind::DoubleStep,
    }
}

fn block_occupancy(m: usize, x: usize) -> Vec<bool> {
    assert!(2 * x <= m, "block of 2x arrows does not fit");
    (0..m).map(|u| u >= m - 2 * x).collect()
}

/// Double-step state with exactly `2x` arrows against the cut — the
/// rounding-free form used when coupling against the reflective system on
/// `m = n + x`.
pub fn init_double_step_exact(m: usize, x: usize) -> CylinderState {
    assert!(x >= 1, "need at least one arrow pair");
    CylinderState {
        m,
        level: 0,
        occupancy: block_occupancy(m, x),
        kind: BoundaryKind::DoubleStep,
    }
}

/// Reflective trapezoid start: same occupancy as the double-step system on
/// `m = n + x`, with the whole block frozen at level 0. At level `V` the
/// active region is `[0, R_V)` with `R_V = m - 2x + V` the melting left
/// edge of the frozen block, where the reflecting (diagonal) vertex of the
/// next row sits.
pub fn init_reflective(n: usize, x: usize) -> CylinderState {
    assert!(x >= 1 && x <= n, "need 1 <= x <= n");
    let m = n + x;
    CylinderState {
        m,
        level: 0,
        occupancy: block_occupancy(m, x),
        kind: BoundaryKind::Reflective { x },
    }
}

/// Empty quadrant window sized by the rarefaction speed bound
/// `U_max = V_max ceil(kappa) + 10`; the window widens on demand if the
/// front particle outruns it (see `step_quadrant`).
pub fn init_quadrant(v_max: usize, p: f64, q: f64) -> CylinderState {
    assert!(p < 1.0, "quadrant needs p < 1 (injected arrows must land)");
    let kappa = hydro::kappa(p, q);
    let ceil_kappa = kappa as usize + usize::from((kappa as usize as f64) < kappa);
    let m = v_max * ceil_kappa + 10;
    CylinderState {
        m,
        level: 0,
        occupancy: vec![false; m],
        kind: BoundaryKind::Quadrant,
    }
}

fn vertex(
    site: bool,
    flying: bool,
    p: f64,
    q: f64,
    coin: impl FnOnce() -> f64,
) -> (bool, bool) {
    match (site, flying) {
        (false, false) => (false, false),
        (true, true) => (true, true),
        (true, false) => {
            if coin() < q * p {
                (true, false)
            } else {
                (false, true)
            }
        }
        (false, true) => {
            if coin() < p {
                (false, true)
            } else {
                (true, false)
            }
        }
    }
}

impl CylinderState {
    pub fn arrow_count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    /// Melting left edge `R_V` of the frozen block at the current level;
    /// the reflecting (diagonal) vertex of the next row sits here
    /// (reflective only).
    pub fn reflect_position(&self) -> usize {
        match self.kind {
            BoundaryKind::Reflective { x } => self.m - 2 * x + self.level,
            _ => panic!("reflect_position on a non-reflective state"),
        }
    }

    /// Advance one level. Coins are addressed by `(new level, U, round)`,
    /// so the three boundary kinds driven by one stream share per-site
    /// randomness (the monotone coupling).
    pub fn step_row(&mut self, p: f64, q: f64, coins: &CoinStream) {
        assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        match self.kind {
            BoundaryKind::DoubleStep => self.step_double(p, q, coins),
            BoundaryKind::Reflective { x } => self.step_reflective(x, p, q, coins),
            BoundaryKind::Quadrant => self.step_quadrant(p, q, coins),
        }
        self.level += 1;
    }

    fn step_double(&mut self, p: f64, q: f64, coins: &CoinStream) {
        let m = self.m;
        let v = (self.level + 1) as u64;
        let before = self.arrow_count();
        if before == m {
            // Exclusion saturation: a fully packed row cannot move, but the
            // rejection sweep below would never terminate on it.
            return;
        }
        for attempt in 0..RESAMPLE_CAP {
            let mut new = vec![false; m];
            let mut flying = false;
            for u in 0..m {
                let (s, f) = vertex(self.occupancy[u], flying, p, q, || {
                    coins.site(v, u as u64, 2 * attempt)
                });
                new[u] = s;
                flying = f;
            }
            if flying {
                // The wrap arrow crosses the cut and travels the updated row
                // on fresh coins until it lands; surviving a full wrap
                // resamples the row.
                for u in 0..m {
                    if new[u] {
                        continue;
                    }
                    if coins.site(v, u as u64, 2 * attempt + 1) >= p {
                        new[u] = true;
                        flying = false;
                        break;
                    }
                }
            }
            if !flying {
                debug_assert_eq!(
                    new.iter().filter(|&&b| b).count(),
                    before,
                    "arrow count not conserved"
                );
                self.occupancy = new;
                return;
            }
        }
        panic!("double-step row resampled {RESAMPLE_CAP} times (p too close to 1?)");
    }

    fn step_reflective(&mut self, x: usize, p: f64, q: f64, coins: &CoinStream) {
        let m = self.m;
        // Reflecting (diagonal) vertex of this row: the melting left edge of
        // the frozen block. Active boxes of the incoming level sit at [0, r).
        let r = m - 2 * x + self.level;
        assert!(r < m, "stepped past the trapezoid (level >= 2x)");
        debug_assert!(self.occupancy[r], "melting site must be frozen");
        let v = (self.level + 1) as u64;
        for attempt in 0..RESAMPLE_CAP {
            let mut new = vec![false; m];
            let mut flying = false;
            for u in 0..r {
                let (s, f) = vertex(self.occupancy[u], flying, p, q, || {
                    coins.site(v, u as u64, 2 * attempt)
                });
                new[u] = s;
                flying = f;
            }
            // A horizontal arrow reaching the diagonal turns upward and
            // parks; either way the frozen arrow beneath exits rightward,
            // rides the packed block across the cut, and travels the updated
            // row on fresh coins — the injected arrow. Reaching the diagonal
            // again it is forced upward; colliding with a parked arrow there
            // resamples the row, like a double-step wrap survival.
            new[r] = flying;
            for (u, slot) in new.iter_mut().enumerate().skip(r + 1) {
                debug_assert!(self.occupancy[u], "frozen block broken at {u}");
                *slot = true;
            }
            let mut landed = false;
            for u in 0..r {
                if new[u] {
                    continue;
                }
                if coins.site(v, u as u64, 2 * attempt + 1) >= p {
                    new[u] = true;
                    landed = true;
                    break;
                }
            }
            if !landed && !new[r] {
                new[r] = true;
                landed = true;
            }
            if landed {
                debug_assert_eq!(
                    new[..=r].iter().filter(|&&b| b).count(),
                    self.level + 1,
                    "active region must hold V arrows at level V"
                );
                self.occupancy = new;
                return;
            }
        }
        panic!("reflective row resampled {RESAMPLE_CAP} times (p too close to 1?)");
    }

    fn step_quadrant(&mut self, p: f64, q: f64, coins: &CoinStream) {
        let v = (self.level + 1) as u64;
        loop {
            let m = self.m;
            let mut new = vec![false; m];
            let mut flying = false;
            for u in 0..m {
                let (s, f) = vertex(self.occupancy[u], flying, p, q, || {
                    coins.site(v, u as u64, 0)
                });
                new[u] = s;
                flying = f;
            }
            // The injected arrow enters at the cut after the sweep, exactly
            // like the reflective system's, and lands on the same fresh
            // coins; with no diagonal in the way it may need a wider window.
            let mut landed_at = None;
            if !flying && !new[m - 1] {
                for u in 0..m {
                    if new[u] {
                        continue;
                    }
                    if coins.site(v, u as u64, 1) >= p {
                        landed_at = Some(u);
                        break;
                    }
                }
            }
            match landed_at {
                // Keep a margin so heights near the recorded window are exact.
                Some(u) if u + 1 < m => {
                    new[u] = true;
                    self.occupancy = new;
                    return;
                }
                _ => {
                    // The sweep or the injected arrow touched the window edge.
                    // Coins are site-addressed, so widening the window and
                    // redoing the row yields the exact same outcomes at every
                    // site already swept; growth is indistinguishable from
                    // having allocated the larger window up front.
                    assert!(m < 1 << 20, "quadrant window grew implausibly large");
                    self.occupancy.resize(2 * m, false);
                    self.m = 2 * m;
                }
            }
        }
    }
}

/// Suffix arrow counts of one row: `out[u] = #{u' >= u : row[u']}`.
pub fn suffix_counts(row: &[bool]) -> Vec<u32> {
    let mut out = vec![0u32; row.len()];
    let mut acc = 0u32;
    for u in (0..row.len()).rev() {
        acc += u32::from(row[u]);
        out[u] = acc;
    }
    out
}

/// A completed run: occupancy of every level `0..=v_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderRun {
    pub m: usize,
    pub levels: Vec<Vec<bool>>,
    pub kind: BoundaryKind,
}

impl CylinderRun {
    /// Height `H(V, U)`: arrows weakly right of `U` at level `V`. Quadrant
    /// rows recorded before a window growth may be shorter than the final
    /// `m`; sites past a row's end are empty.
    pub fn height(&self, v: usize, u: usize) -> usize {
        let row = &self.levels[v];
        row[u.min(row.len())..].iter().filter(|&&b| b).count()
    }

    /// Frozen-block height contribution `F_V(U)`: frozen arrows at
    /// positions `>= U`. The block is `[R_V, m - 1]`, so
    /// `F_V(U) = min(2x - V, m - U)` (reflective runs only).
    pub fn frozen_height(&self, v: usize, u: usize) -> usize {
        match self.kind {
            BoundaryKind::Reflective { x } => (2 * x - v).min(self.m - u.min(self.m)),
            _ => panic!("frozen_height on a non-reflective run"),
        }
    }

    /// Active height `H^act(V, U)`: active arrows at positions `>= U`;
    /// they live in `[0, R_V)` (reflective runs only).
    pub fn active_height(&self, v: usize, u: usize) -> usize {
        let r = match self.kind {
            BoundaryKind::Reflective { x } => self.m - 2 * x + v,
            _ => panic!("active_height on a non-reflective run"),
        };
        self.levels[v][u.min(r)..r].iter().filter(|&&b| b).count()
    }
}

fn record_run(mut state: CylinderState, p: f64, q: f64, seed: u64, v_max: usize) -> CylinderRun {
    let coins = CoinStream::new(seed);
    let mut levels = Vec::with_capacity(v_max + 1);
    levels.push(state.occupancy.clone());
    for _ in 0..v_max {
        state.step_row(p, q, &coins);
        levels.push(state.occupancy.clone());
    }
    CylinderRun { m: state.m, levels, kind: state.kind }
}

pub fn run_double_step(
    m: usize,
    lambda: f64,
    p: f64,
    q: f64,
    seed: u64,
    v_max: usize,
) -> CylinderRun {
    record_run(init_double_step(m, lambda), p, q, seed, v_max)
}

pub fn run_reflective(
    n: usize,
    x: usize,
    p: f64,
    q: f64,
    seed: u64,
    v_max: usize,
) -> CylinderRun {
    assert!(v_max <= x, "reflective run limited to V_max <= X");
    record_run(init_reflective(n, x), p, q, seed, v_max)
}

pub fn run_quadrant(v_max: usize, p: f64, q: f64, seed: u64) -> CylinderRun {
    record_run(init_quadrant(v_max, p, q), p, q, seed, v_max)
}

/// Monte Carlo summary of the three-system sandwich
/// `H^dstep <= H^refl = H^act + F_V` and `H^act <= H^quad` under shared
/// site-addressed coins. Grid: levels `0..=x` by positions `0..m`,
/// row-major `v * m + u`. Heights are raw arrow counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub n: usize,
    pub x: usize,
    pub m: usize,
    pub v_levels: usize,
    pub samples: u64,
    pub mean_refl: Vec<f64>,
    pub mean_act: Vec<f64>,
    pub mean_dstep: Vec<f64>,
    pub mean_quad: Vec<f64>,
    pub se_refl: Vec<f64>,
    pub se_act: Vec<f64>,
    pub se_dstep: Vec<f64>,
    pub se_quad: Vec<f64>,
    /// Mean and standard error of the paired difference `refl - dstep`.
    pub mean_diff_lower: Vec<f64>,
    pub se_diff_lower: Vec<f64>,
    /// Mean and standard error of the paired difference `quad - act`.
    pub mean_diff_upper: Vec<f64>,
    pub se_diff_upper: Vec<f64>,
    /// Point-instances with `H^refl < H^dstep`, resp. `H^act > H^quad`.
    pub violations_lower: u64,
    pub violations_upper: u64,
}

impl ComparisonReport {
    pub fn idx(&self, v: usize, u: usize) -> usize {
        debug_assert!(v < self.v_levels && u < self.m);
        v * self.m + u
    }
}

struct Welford {
    sum: Vec<i64>,
    sq: Vec<i64>,
}

impl Welford {
    fn new(points: usize) -> Self {
        Welford { sum: vec![0; points], sq: vec![0; points] }
    }

    fn push(&mut self, i: usize, value: i64) {
        self.sum[i] += value;
        self.sq[i] += value * value;
    }

    fn finish(&self, samples: u64) -> (Vec<f64>, Vec<f64>) {
        let n = samples as f64;
        let mut means = Vec::with_capacity(self.sum.len());
        let mut ses = Vec::with_capacity(self.sum.len());
        for (&s, &sq) in self.sum.iter().zip(&self.sq) {
            let mean = s as f64 / n;
            let var = ((sq as f64) - n * mean * mean).max(0.0) / (n - 1.0);
            means.push(mean);
            ses.push(libm::sqrt(var / n));
        }
        (means, ses)
    }
}

/// Run `samples` coupled triples on `m = n + x` up to level `x`; sample `s`
/// uses the coin stream seeded by `substream(s)` of the base seed, shared
/// across the three systems.
pub fn coupled_run(
    n: usize,
    x: usize,
    p: f64,
    q: f64,
    seed: u64,
    samples: u64,
) -> ComparisonReport {
    assert!(x >= 1 && x <= n && samples >= 2);
    let m = n + x;
    let v_levels = x + 1;
    let points = v_levels * m;
    let mut refl_acc = Welford::new(points);
    let mut act_acc = Welford::new(points);
    let mut dstep_acc = Welford::new(points);
    let mut quad_acc = Welford::new(points);
    let mut lower_acc = Welford::new(points);
    let mut upper_acc = Welford::new(points);
    let mut violations_lower = 0u64;
    let mut violations_upper = 0u64;

    let base = CoinStream::new(seed);
    for s in 0..samples {
        let coins = base.substream(s);
        let mut refl = init_reflective(n, x);
        let mut dstep = init_double_step_exact(m, x);
        let mut quad = init_quadrant(x, p, q);
        for v in 0..v_levels {
            if v > 0 {
                refl.step_row(p, q, &coins);
                dstep.step_row(p, q, &coins);
                quad.step_row(p, q, &coins);
            }
            let h_refl = suffix_counts(&refl.occupancy);
            let h_dstep = suffix_counts(&dstep.occupancy);
            let h_quad = suffix_counts(&quad.occupancy);
            let r = m - 2 * x + v;
            // Active suffix counts: arrows in [u, R_v).
            let mut act = vec![0u32; m];
            let mut acc = 0u32;
            for u in (0..r).rev() {
                acc += u32::from(refl.occupancy[u]);
                act[u] = acc;
            }
            for u in 0..m {
                let i = v * m + u;
                let hr = i64::from(h_refl[u]);
                let ha = i64::from(act[u]);
                let hd = i64::from(h_dstep[u]);
                let hq = i64::from(if u < quad.m { h_quad[u] } else { 0 });
                let frozen = (2 * x - v).min(m - u);
                debug_assert_eq!(hr, ha + frozen as i64, "height decomposition broken");
                refl_acc.push(i, hr);
                act_acc.push(i, ha);
                dstep_acc.push(i, hd);
                quad_acc.push(i, hq);
                lower_acc.push(i, hr - hd);
                upper_acc.push(i, hq - ha);
                if hr < hd {
                    violations_lower += 1;
                }
                if ha > hq {
                    violations_upper += 1;
                }
            }
        }
    }

    let (mean_refl, se_refl) = refl_acc.finish(samples);
    let (mean_act, se_act) = act_acc.finish(samples);
    let (mean_dstep, se_dstep) = dstep_acc.finish(samples);
    let (mean_quad, se_quad) = quad_acc.finish(samples);
    let (mean_diff_lower, se_diff_lower) = lower_acc.finish(samples);
    let (mean_diff_upper, se_diff_upper) = upper_acc.finish(samples);
    ComparisonReport {
        n,
        x,
        m,
        v_levels,
        samples,
        mean_refl,
        mean_act,
        mean_dstep,
        mean_quad,
        se_refl,
        se_act,
        se_dstep,
        se_quad,
        mean_diff_lower,
        se_diff_lower,
        mean_diff_upper,
        se_diff_upper,
        violations_lower,
        violations_upper,
    }
}
