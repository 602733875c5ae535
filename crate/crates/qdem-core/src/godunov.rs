//! First-order Godunov (upwind) finite-volume oracle for the scalar
//! conservation law with the concave flux `flux(z, kappa)` on the periodic
//! unit interval. Because the flux is strictly increasing, the upwind flux
//! `phi(left cell)` is the exact Godunov flux and no entropy fix is needed.

use crate::hydro::{flux, MIN_KAPPA_GAP};
use alloc::vec::Vec;

/// Cell-averaged density profile on the periodic unit interval together
/// with the time step it is marched with. Invariants: `dv <= (1/cells)/kappa`
/// (CFL) and all values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeGrid {
    pub cells: usize,
    pub dv: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GodunovError {
    /// Time step exceeds the CFL bound `(1/cells)/kappa`.
    CflViolation { dv: f64, limit: f64 },
    BadInput(&'static str),
}

impl core::fmt::Display for GodunovError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GodunovError::CflViolation { dv, limit } => {
                write!(f, "CFL violation: dv = {dv} exceeds limit {limit}")
            }
            GodunovError::BadInput(msg) => write!(f, "bad input: {msg}"),
        }
    }
}

/// CFL factor applied by the default constructors: `dv = 0.9 * du / kappa`.
pub const CFL_FACTOR: f64 = 0.9;

impl PdeGrid {
    /// Grid from explicit values with the default CFL-safe step.
    pub fn from_values(values: Vec<f64>, kappa: f64) -> Result<Self, GodunovError> {
        if values.is_empty() {
            return Err(GodunovError::BadInput("empty grid"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(GodunovError::BadInput("values outside [0, 1]"));
        }
        if !(kappa > 1.0 + MIN_KAPPA_GAP) {
            return Err(GodunovError::BadInput("kappa too close to 1"));
        }
        let cells = values.len();
        let dv = CFL_FACTOR / (cells as f64 * kappa);
        Ok(PdeGrid { cells, dv, values })
    }

    /// Cell averages of the double-step data `1{u >= 1 - 2 lambda}`.
    pub fn double_step(cells: usize, lambda: f64, kappa: f64) -> Result<Self, GodunovError> {
        if !(lambda > 0.0 && lambda <= 0.5) {
            return Err(GodunovError::BadInput("lambda outside (0, 1/2]"));
        }
        // Overlap of each cell with [1 - 2 lambda, 1], measured in cell
        // units so fully covered cells come out exactly 1.0.
        let edge = (1.0 - 2.0 * lambda) * cells as f64;
        let values = (0..cells)
            .map(|i| {
                let lo = i as f64;
                ((lo + 1.0 - lo.max(edge)).max(0.0)).min(1.0)
            })
            .collect();
        Self::from_values(values, kappa)
    }

    pub fn du(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Midpoint of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.du()
    }

    /// Total mass `sum of values * du` (conserved by the periodic scheme).
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.du()
    }

    /// `integral of |G(u) - f(u)| du` with `f` sampled at cell centers.
    pub fn l1_distance<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let du = self.du();
        self.values
            .iter()
            .enumerate()
            .map(|(i, g)| (g - f(self.center(i))).abs() * du)
            .sum::<f64>()
    }
}

/// One upwind update `G_i <- G_i - (dv/du)(phi(G_i) - phi(G_{i-1}))` on the
/// periodic grid, with `prev` the incoming row. `dv` may be shorter than the
/// grid's nominal step (partial final step) but never longer than CFL allows.
fn upwind_step(prev: &[f64], next: &mut [f64], dv: f64, kappa: f64) {
    let cells = prev.len();
    let ratio = dv * cells as f64; // dv / du
    debug_assert!(ratio <= 1.0 / kappa + 1e-12, "CFL violated inside step");
    let mut left_flux = flux(prev[cells - 1], kappa);
    for i in 0..cells {
        let here_flux = flux(prev[i], kappa);
        next[i] = prev[i] - ratio * (here_flux - left_flux);
        debug_assert!((-1e-12..=1.0 + 1e-12).contains(&next[i]));
        left_flux = here_flux;
    }
}

/// March the initial profile to time `v_end` with the grid's own step
/// (a shorter final step lands exactly on `v_end`). The scheme is monotone
/// under the CFL condition, so values remain in `[0, 1]` without clamping.
pub fn godunov_solve(
    initial: &PdeGrid,
    lambda: f64,
    kappa: f64,
    v_end: f64,
) -> Result<PdeGrid, GodunovError> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(GodunovError::BadInput("lambda outside (0, 1/2]"));
    }
    if !(kappa > 1.0 + MIN_KAPPA_GAP) {
        return Err(GodunovError::BadInput("kappa too close to 1"));
    }
    if !(v_end >= 0.0) {
        return Err(GodunovError::BadInput("v_end must be nonnegative"));
    }
    let limit = initial.du() / kappa;
    if initial.dv > limit {
        return Err(GodunovError::CflViolation { dv: initial.dv, limit });
    }

    let mut prev = initial.values.clone();
    let mut next = prev.clone();
    let mut v = 0.0;
    while v + 1e-15 < v_end {
        let h = initial.dv.min(v_end - v);
        upwind_step(&prev, &mut next, h, kappa);
        core::mem::swap(&mut prev, &mut next);
        v += h;
    }
    Ok(PdeGrid { cells: initial.cells, dv: initial.dv, values: prev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::{g_bcg, g_shock};

    #[test]
    fn double_step_initial_data() {
        let g = PdeGrid::double_step(8, 0.25, 4.0).unwrap();
        assert_eq!(g.values, alloc::vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        assert!((g.mass() - 0.5).abs() < 1e-15);
        // Misaligned edge splits one cell.
        let g = PdeGrid::double_step(10, 0.225, 4.0).unwrap();
        assert!((g.mass() - 0.45).abs() < 1e-15);
        assert!((g.values[5] - 0.5).abs() < 1e-12);
        // Fully packed at lambda = 1/2.
        let g = PdeGrid::double_step(6, 0.5, 4.0).unwrap();
        assert!(g.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn constant_data_stays_constant() {
        let init = PdeGrid::from_values(alloc::vec![0.37; 64], 2.5).unwrap();
        let out = godunov_solve(&init, 0.25, 2.5, 0.2).unwrap();
        for v in &out.values {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn fully_packed_stays_packed() {
        let init = PdeGrid::double_step(32, 0.5, 4.0).unwrap();
        let out = godunov_solve(&init, 0.5, 4.0, 0.3).unwrap();
        assert!(out.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn mass_conserved_and_range_preserved() {
        let init = PdeGrid::double_step(200, 0.25, 4.0).unwrap();
        let out = godunov_solve(&init, 0.25, 4.0, 0.25).unwrap();
        assert!((out.mass() - init.mass()).abs() < 1e-10);
        assert!(out.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn cfl_violation_reported() {
        let mut init = PdeGrid::double_step(100, 0.25, 4.0).unwrap();
        init.dv = 10.0 / (100.0 * 4.0);
        match godunov_solve(&init, 0.25, 4.0, 0.1) {
            Err(GodunovError::CflViolation { .. }) => {}
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn rarefaction_matches_fan_profile() {
        // Down-jump at u = 0 (block on [1/2, 1)); by v = 0.1 the fan from the
        // cut and the shock from the up-jump at 1/2 have not met.
        let kappa = 4.0;
        let v = 0.1;
        let cells = 2000;
        let values = (0..cells).map(|i| if i >= cells / 2 { 1.0 } else { 0.0 }).collect();
        let init = PdeGrid::from_values(values, kappa).unwrap();
        let out = godunov_solve(&init, 0.25, kappa, v).unwrap();
        let exact = |u: f64| {
            if u <= 0.5 {
                g_bcg(u, v, kappa)
            } else if u <= 0.5 + v {
                0.0
            } else {
                1.0
            }
        };
        let err = out.l1_distance(exact);
        assert!(err <= 0.01, "L1 error {err}");
    }

    #[test]
    fn double_step_short_time_tracks_entropy_solution() {
        let (lambda, kappa) = (0.25, 4.0);
        let init = PdeGrid::double_step(1000, lambda, kappa).unwrap();
        let v = 0.1;
        let out = godunov_solve(&init, lambda, kappa, v).unwrap();
        let err = out.l1_distance(|u| g_shock(u, v, lambda, kappa));
        assert!(err <= 0.02, "L1 error {err}");
    }

    #[test]
    fn zero_time_returns_initial_profile() {
        let init = PdeGrid::double_step(50, 0.3, 2.0).unwrap();
        let out = godunov_solve(&init, 0.3, 2.0, 0.0).unwrap();
        assert_eq!(out.values, init.values);
    }
}
