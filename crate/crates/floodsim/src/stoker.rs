//! Exact similarity solution of the frictionless wet-bed dam-break problem,
//! used as an independent verification reference for both solvers.
//!
//! Left state `(h_l, 0)`, right state `(h_r, 0)`, `h_l > h_r > 0`. The
//! solution is a left rarefaction, a constant middle state and a right
//! shock. The middle depth solves a scalar equation matching the rarefaction
//! invariant `u + 2c` against the shock jump relation.

use crate::GRAVITY;

#[derive(Debug, Clone, Copy)]
pub struct StokerSolution {
    pub h_l: f64,
    pub h_r: f64,
    pub h_m: f64,
    pub u_m: f64,
    pub c_l: f64,
    pub c_m: f64,
    pub shock_speed: f64,
}

impl StokerSolution {
    pub fn new(h_l: f64, h_r: f64) -> Self {
        assert!(h_l > h_r && h_r > 0.0, "wet-bed dam break requires h_l > h_r > 0");
        let c_l = (GRAVITY * h_l).sqrt();
        // Shock-side velocity of the middle state as a function of depth.
        let shock_u = |h: f64| (h - h_r) * (GRAVITY * (h + h_r) / (2.0 * h * h_r)).sqrt();
        // Rarefaction-side velocity of the middle state.
        let fan_u = |h: f64| 2.0 * (c_l - (GRAVITY * h).sqrt());
        let mut lo = h_r;
        let mut hi = h_l;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fan_u(mid) > shock_u(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h_m = 0.5 * (lo + hi);
        let u_m = fan_u(h_m);
        let c_m = (GRAVITY * h_m).sqrt();
        let shock_speed = h_m * u_m / (h_m - h_r);
        StokerSolution { h_l, h_r, h_m, u_m, c_l, c_m, shock_speed }
    }

    /// Depth at similarity coordinate `xi = (x - x_dam) / t`.
    pub fn depth(&self, xi: f64) -> f64 {
        if xi <= -self.c_l {
            self.h_l
        } else if xi < self.u_m - self.c_m {
            let c = (2.0 * self.c_l - xi) / 3.0;
            c * c / GRAVITY
        } else if xi < self.shock_speed {
            self.h_m
        } else {
            self.h_r
        }
    }

    /// Velocity at similarity coordinate `xi`.
    pub fn velocity(&self, xi: f64) -> f64 {
        if xi <= -self.c_l {
            0.0
        } else if xi < self.u_m - self.c_m {
            2.0 / 3.0 * (xi + self.c_l)
        } else if xi < self.shock_speed {
            self.u_m
        } else {
            0.0
        }
    }

    /// Exact average depth over `[xi0, xi1]`: the finite-volume reference
    /// (the profile is piecewise polynomial, so the integral is closed-form).
    pub fn depth_average(&self, xi0: f64, xi1: f64) -> f64 {
        assert!(xi1 > xi0);
        // Antiderivative of the depth, piecewise.
        let fan = |xi: f64| {
            let w = 2.0 * self.c_l - xi;
            -w * w * w / (27.0 * GRAVITY)
        };
        let breaks = [-self.c_l, self.u_m - self.c_m, self.shock_speed];
        let values = |lo: f64, hi: f64, region: usize| -> f64 {
            match region {
                0 => self.h_l * (hi - lo),
                1 => fan(hi) - fan(lo),
                2 => self.h_m * (hi - lo),
                _ => self.h_r * (hi - lo),
            }
        };
        let mut total = 0.0;
        let mut lo = xi0;
        for (region, end) in breaks.iter().copied().chain([xi1]).enumerate() {
            let hi = end.clamp(lo, xi1);
            if hi > lo {
                total += values(lo, hi, region);
                lo = hi;
            }
        }
        total / (xi1 - xi0)
    }
}
