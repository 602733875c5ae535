//! Closed-form hydrodynamic-limit objects: the flux, the rarefaction fan,
//! the shock curve, the active/torus height profiles, and the limiting
//! permutation height, together with the parameter maps `kappa` and
//! `p_prime` that connect them to the samplers.
//!
//! Piecewise formulas evaluate ties by closed-interval inclusion on the
//! smaller-coordinate branch; every junction is continuous, so the choice
//! only pins golden files.

use libm::sqrt;

/// Evaluators reject the degenerate regime `kappa <= 1 + MIN_KAPPA_GAP`
/// (the `q -> 1` symmetric point, where the fan formulas blow up).
pub const MIN_KAPPA_GAP: f64 = 1e-9;

/// `kappa = (1 - q p) / (1 - p)`. Requires `p in [0, 1)`, `q in [0, 1]`.
pub fn kappa(p: f64, q: f64) -> f64 {
    assert!((0.0..1.0).contains(&p), "kappa needs p in [0, 1)");
    assert!((0.0..=1.0).contains(&q), "kappa needs q in [0, 1]");
    (1.0 - q * p) / (1.0 - p)
}

/// Adjusted retention probability `p' = p(1 - q) / (1 - q p)`, the `q = 0`
/// parameter with the same `kappa`: `kappa(p', 0) = 1/(1 - p') = kappa(p, q)`.
pub fn p_prime(p: f64, q: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q) && q * p < 1.0);
    p * (1.0 - q) / (1.0 - q * p)
}

fn check_kappa(kappa: f64) {
    assert!(
        kappa > 1.0 + MIN_KAPPA_GAP,
        "kappa = {kappa} too close to 1 for hydrodynamic formulas"
    );
}

fn check_lambda(lambda: f64) {
    assert!(
        lambda > 0.0 && lambda <= 0.5,
        "lambda = {lambda} outside (0, 1/2]"
    );
}

/// Particle flux `phi(z) = kappa z / ((kappa - 1) z + 1)` on `z in [0, 1]`;
/// increasing and strictly concave, `phi(0) = 0`, `phi(1) = 1`.
pub fn flux(z: f64, kappa: f64) -> f64 {
    check_kappa(kappa);
    assert!((0.0..=1.0).contains(&z), "flux needs z in [0, 1]");
    kappa * z / ((kappa - 1.0) * z + 1.0)
}

/// Reflection point `v_RP = (1 - 2 lambda) / (kappa - 1)`: the time at which
/// the fan first touches the moving block edge. May exceed `lambda`, in
/// which case the shock curve stays on its linear piece throughout.
pub fn v_rp(lambda: f64, kappa: f64) -> f64 {
    check_kappa(kappa);
    check_lambda(lambda);
    (1.0 - 2.0 * lambda) / (kappa - 1.0)
}

/// Shock position at time `v in [0, lambda]`:
/// `v + 1 - 2 lambda` up to the reflection point, then the detached branch
/// `(sqrt(v/kappa) + sqrt((1 - 2 lambda)(kappa - 1)/kappa))^2`.
pub fn shock_curve(v: f64, lambda: f64, kappa: f64) -> f64 {
    check_kappa(kappa);
    check_lambda(lambda);
    assert!(
        v >= 0.0 && v <= lambda + 1e-12,
        "shock_curve needs v in [0, lambda]"
    );
    if v <= v_rp(lambda, kappa) {
        v + 1.0 - 2.0 * lambda
    } else {
        let root = sqrt(v / kappa) + sqrt((1.0 - 2.0 * lambda) * (kappa - 1.0) / kappa);
        root * root
    }
}

/// Rarefaction-fan density from step initial data `1{u <= 0}`:
/// `1` for `u <= v/kappa`, `0` for `u > v kappa`, and
/// `(sqrt(v kappa) - sqrt(u)) / ((kappa - 1) sqrt(u))` between.
pub fn g_bcg(u: f64, v: f64, kappa: f64) -> f64 {
    check_kappa(kappa);
    assert!(u >= 0.0 && v >= 0.0, "g_bcg needs u, v >= 0");
    if u <= v / kappa {
        1.0
    } else if u <= v * kappa {
        (sqrt(v * kappa) - sqrt(u)) / ((kappa - 1.0) * sqrt(u))
    } else {
        0.0
    }
}

/// Fan height `h_BCG(u, v) = integral of g_BCG over [u, infinity)`:
/// `v - u` for `u <= v/kappa`, `(sqrt(v kappa) - sqrt(u))^2 / (kappa - 1)`
/// in the fan, `0` beyond it. Continuous, with `h_BCG(0, v) = v`.
pub fn h_bcg(u: f64, v: f64, kappa: f64) -> f64 {
    check_kappa(kappa);
    assert!(u >= 0.0 && v >= 0.0, "h_bcg needs u, v >= 0");
    if u <= v / kappa {
        v - u
    } else if u <= v * kappa {
        let d = sqrt(v * kappa) - sqrt(u);
        d * d / (kappa - 1.0)
    } else {
        0.0
    }
}

/// Density of the torus entropy solution started from double-step data:
/// the fan left of the shock, fully packed right of it. `u in [0, 1]`.
pub fn g_shock(u: f64, v: f64, lambda: f64, kappa: f64) -> f64 {
    assert!((0.0..=1.0).contains(&u), "g_shock needs u in [0, 1]");
    if u <= shock_curve(v, lambda, kappa) {
        g_bcg(u, v, kappa)
    } else {
        1.0
    }
}

/// Height of the torus entropy solution, `integral of g_shock over [u, 1]`.
pub fn h_shock(u: f64, v: f64, lambda: f64, kappa: f64) -> f64 {
    assert!((0.0..=1.0).contains(&u), "h_shock needs u in [0, 1]");
    if u <= shock_curve(v, lambda, kappa) {
        h_bcg(u, v, kappa) + 2.0 * lambda - v
    } else {
        1.0 - u
    }
}

/// Active height of the reflective system: `h_BCG` left of the shock and a
/// slope `-1` packed wedge from the shock to the block edge `v + 1 - 2 lambda`.
/// Boundary values `h_active(0, v) = v` and `h_active(v + 1 - 2 lambda, v) = 0`.
pub fn h_active(u: f64, v: f64, lambda: f64, kappa: f64) -> f64 {
    let edge = v + 1.0 - 2.0 * lambda;
    assert!(
        u >= 0.0 && u <= edge + 1e-12,
        "h_active needs u in the active region [0, v + 1 - 2 lambda]"
    );
    let shock = shock_curve(v, lambda, kappa);
    if u <= shock {
        h_bcg(u, v, kappa)
    } else {
        (edge - u).max(0.0)
    }
}

/// `lambda = x / (1 + x)` for the triangle-to-cylinder rescaling.
pub fn lambda_of_x(x: f64) -> f64 {
    assert!(x > 0.0 && x < 1.0, "lambda_of_x needs x in (0, 1)");
    x / (1.0 + x)
}

/// Limiting normalized colored height of the triangle at threshold fraction
/// `x`, level fraction `s`, column fraction `y`:
/// `(1 + x) * h_active(y/(1+x), (s - (1 - x))/(1 + x))`, and `0` below the
/// level `s = 1 - x` where colors `<= xn` have not yet entered.
pub fn limit_height_triangle(s: f64, y: f64, x: f64, p: f64, q: f64) -> f64 {
    assert!(
        0.0 <= y && y <= s && s <= 1.0,
        "limit_height_triangle needs 0 <= y <= s <= 1"
    );
    let kap = kappa(p, q);
    check_kappa(kap);
    let lambda = lambda_of_x(x);
    let v = (s - (1.0 - x)) / (1.0 + x);
    if v <= 0.0 {
        return 0.0;
    }
    let u = y / (1.0 + x);
    let edge = v + 1.0 - 2.0 * lambda;
    if u >= edge {
        return 0.0;
    }
    (1.0 + x) * h_active(u, v, lambda, kap)
}

/// Location (in the `y` coordinate, at threshold `x`) where the limiting
/// permutation height flattens to `1 - x`: the rescaled image
/// `(1 + x) * shock_curve(lambda)` of the shock at the top boundary.
/// Equals `1` when `x <= 1/kappa` (the shock has not detached by the top)
/// and `(sqrt(x) + sqrt((1 - x)(kappa - 1)))^2 / kappa` otherwise.
pub fn y_star(x: f64, kappa: f64) -> f64 {
    check_kappa(kappa);
    assert!((0.0..=1.0).contains(&x), "y_star needs x in [0, 1]");
    if x * kappa <= 1.0 {
        1.0
    } else {
        let root = sqrt(x) + sqrt((1.0 - x) * (kappa - 1.0));
        root * root / kappa
    }
}

/// Limiting permutation height: `y` is the prefix fraction (first argument
/// of the permutation height function), `x` the value threshold. Piecewise:
/// `0` for `y <= x/kappa`; the fan value `(sqrt(kappa y) - sqrt(x))^2 /
/// (kappa - 1)` up to `x kappa` (when `x <= 1/kappa`) or up to
/// `y_star(x, kappa)` (when `x > 1/kappa`); then `y - x`, respectively
/// `1 - x`, beyond.
pub fn limit_h_sigma(y: f64, x: f64, kappa: f64) -> f64 {
    check_kappa(kappa);
    assert!(
        (0.0..=1.0).contains(&y) && (0.0..=1.0).contains(&x),
        "limit_h_sigma needs x, y in [0, 1]"
    );
    if y <= x / kappa {
        return 0.0;
    }
    let fan = |y: f64| {
        let d = sqrt(kappa * y) - sqrt(x);
        d * d / (kappa - 1.0)
    };
    if x * kappa <= 1.0 {
        if y <= x * kappa {
            fan(y)
        } else {
            y - x
        }
    } else {
        let ys = y_star(x, kappa);
        if y <= ys {
            fan(y)
        } else {
            1.0 - x
        }
    }
}

/// The three `y`-locations (fan edges and shock image) at threshold `x`
/// where `limit_h_sigma` changes branch; convergence is slowest near them.
pub fn critical_curves(x: f64, kappa: f64) -> [f64; 3] {
    [x / kappa, x * kappa, y_star(x, kappa)]
}
