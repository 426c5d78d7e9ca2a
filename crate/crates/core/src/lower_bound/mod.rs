//! Square-counting lower bound: `f(s)`, its root, the limiting densities of
//! the counted structures, and exact counts on recorded histories.

mod count;
mod quadrature;

pub use count::{claim_check, count_structures, CirclePolicy, ClaimVerdict, History, StructureCounts};
pub use quadrature::{quadrature_oracle, Quad, QuadError, Structure};

use serde::Serialize;

/// Limit of `(Z - |W1| - |W2| + |T1| + |T2|) / n` at `t = sn`.
pub fn f_eval(s: f64) -> f64 {
    let e1 = (-s).exp();
    let e2 = (-2.0 * s).exp();
    let e3 = (-3.0 * s).exp();
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    2.0 + e3 * (s + 1.0) * (1.0 - s2 / 2.0 - s3 / 3.0 - s4 / 8.0) + e2 * (2.0 * s + 2.5 * s2 + s3 / 2.0)
        - e1 * (3.0 + 2.0 * s)
}

/// Per-vertex limiting densities at `s = t / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForms {
    pub z: f64,
    pub w1: f64,
    pub w2: f64,
    pub t1: f64,
    pub t2: f64,
    pub f: f64,
}

impl ClosedForms {
    pub fn get(&self, which: Structure) -> f64 {
        match which {
            Structure::W1 => self.w1,
            Structure::W2 => self.w2,
            Structure::T1 => self.t1,
            Structure::T2 => self.t2,
        }
    }

    pub fn bound(&self) -> f64 {
        self.z - self.w1 - self.w2 + self.t1 + self.t2
    }
}

pub fn closed_forms(s: f64) -> ClosedForms {
    let e = (-s).exp();
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    ClosedForms {
        z: 2.0 - 2.0 * e - s * e,
        w1: e * (1.0 - e * s2 / 2.0 - e * s - e),
        w2: e * (s - e * s2 - e * s3 / 2.0 - e * s),
        t1: e * e * (-1.0 + s - e * s3 / 3.0 - e * s2 / 2.0 - e * s4 / 8.0 + e),
        t2: e * e * (-s + s2 - e * s * (s4 / 8.0 + s3 / 3.0 + s2 / 2.0 - 1.0)),
        f: f_eval(s),
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("f(s) - 1 does not change sign on [{lo}, {hi}]")]
pub struct NoBracket {
    pub lo: f64,
    pub hi: f64,
}

/// Positive root of `f(s) = 1`, bisected on `[0.5, 2.5]`.
pub fn beta_root() -> Result<f64, NoBracket> {
    let g = |s: f64| f_eval(s) - 1.0;
    let (mut lo, mut hi) = (0.5, 2.5);
    if g(lo).signum() == g(hi).signum() {
        return Err(NoBracket { lo, hi });
    }
    let rising = g(lo) < 0.0;
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimum-degree-2 threshold `ln 2 + ln(1 + ln 2)`.
pub fn mindeg2_bound() -> f64 {
    let l2 = std::f64::consts::LN_2;
    l2 + (1.0 + l2).ln()
}
