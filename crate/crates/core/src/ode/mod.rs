//! Adaptive Dormand–Prince 5(4) integration with dense output and terminal
//! events, plus the trajectory systems of the two strategies.

mod systems;

pub use systems::{
    dg_phase_rhs, dg_phase_system, fr_drift, fr_system, run_pipeline, DgPhaseLayout, Extrapolation,
    PipelineConfig, PipelineReport, StageSolution,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("initial point lies outside the domain")]
    InitOutsideDomain,
    #[error("step size underflow at s = {s}")]
    StepUnderflow { s: f64 },
    #[error("no terminal event before s = {s}")]
    NoEvent { s: f64 },
    #[error("cannot extrapolate phase {phase} exit: d' = {slope} is not negative")]
    BadExtrapolation { phase: u32, slope: f64 },
}

pub type Rhs<'a> = Box<dyn Fn(f64, &[f64], &mut [f64]) + 'a>;
pub type Scalar<'a> = Box<dyn Fn(f64, &[f64]) -> f64 + 'a>;

pub type Domain<'a> = Box<dyn Fn(f64, &[f64]) -> bool + 'a>;

/// Terminal event: fires when `g` moves from positive to non-positive.
pub struct Event<'a> {
    pub name: String,
    pub g: Scalar<'a>,
}

pub struct OdeSystem<'a> {
    pub names: Vec<String>,
    pub rhs: Rhs<'a>,
    /// Points where the drift may be evaluated.
    pub domain: Domain<'a>,
    pub events: Vec<Event<'a>>,
}

impl OdeSystem<'_> {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn eval(&self, s: f64, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        (self.rhs)(s, y, &mut out);
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub s_max: f64,
    /// Width in `s` to which event times are bisected.
    pub event_tol: f64,
    /// Keep every accepted step in the solution (otherwise only the ends).
    pub dense: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-10,
            atol: 1e-13,
            h_init: 1e-4,
            h_max: 0.05,
            h_min: 1e-15,
            s_max: 10.0,
            event_tol: 1e-10,
            dense: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub names: Vec<String>,
    pub s: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub event: Option<String>,
    pub s_end: f64,
    pub y_end: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates (max norm).
    pub err_bound: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One Dormand–Prince step from `(s, y)` with first stage `k1`.
struct Step {
    y1: Vec<f64>,
    k7: Vec<f64>,
    err: Vec<f64>,
    /// Continuous extension coefficients.
    cont: [Vec<f64>; 5],
}

fn dopri_step(sys: &OdeSystem, s: f64, y: &[f64], k1: &[f64], h: f64) -> Option<Step> {
    let n = y.len();
    let mut tmp = vec![0.0; n];
    let mut k = vec![vec![0.0; n]; 6];
    let stage = |tmp: &mut Vec<f64>, coef: &[(f64, &[f64])]| {
        for i in 0..n {
            let mut acc = y[i];
            for (a, kk) in coef {
                acc += h * a * kk[i];
            }
            tmp[i] = acc;
        }
    };
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    stage(&mut tmp, &[(A21, k1)]);
    if !(sys.domain)(s + C2 * h, &tmp) {
        return None;
    }
    (sys.rhs)(s + C2 * h, &tmp, &mut k[0]);
    let k2 = k[0].clone();
    stage(&mut tmp, &[(A31, k1), (A32, &k2)]);
    if !(sys.domain)(s + C3 * h, &tmp) {
        return None;
    }
    (sys.rhs)(s + C3 * h, &tmp, &mut k[1]);
    let k3 = k[1].clone();
    stage(&mut tmp, &[(A41, k1), (A42, &k2), (A43, &k3)]);
    if !(sys.domain)(s + C4 * h, &tmp) {
        return None;
    }
    (sys.rhs)(s + C4 * h, &tmp, &mut k[2]);
    let k4 = k[2].clone();
    stage(&mut tmp, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
    if !(sys.domain)(s + C5 * h, &tmp) {
        return None;
    }
    (sys.rhs)(s + C5 * h, &tmp, &mut k[3]);
    let k5 = k[3].clone();
    stage(&mut tmp, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
    if !(sys.domain)(s + h, &tmp) {
        return None;
    }
    (sys.rhs)(s + h, &tmp, &mut k[4]);
    let k6 = k[4].clone();
    let mut y1 = vec![0.0; n];
    stage(&mut y1, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    if !(sys.domain)(s + h, &y1) {
        return None;
    }
    let mut k7 = vec![0.0; n];
    (sys.rhs)(s + h, &y1, &mut k7);
    if !finite(&y1) || !finite(&k7) {
        return None;
    }
    let mut err = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    let mut c3 = vec![0.0; n];
    let mut c4 = vec![0.0; n];
    let mut c5 = vec![0.0; n];
    for i in 0..n {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let ydiff = y1[i] - y[i];
        let bspl = h * k1[i] - ydiff;
        c2[i] = ydiff;
        c3[i] = bspl;
        c4[i] = ydiff - h * k7[i] - bspl;
        c5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Some(Step { y1, k7, err, cont: [y.to_vec(), c2, c3, c4, c5] })
}

fn dense_at(cont: &[Vec<f64>; 5], theta: f64) -> Vec<f64> {
    let s1 = 1.0 - theta;
    (0..cont[0].len())
        .map(|i| cont[0][i] + theta * (cont[1][i] + s1 * (cont[2][i] + theta * (cont[3][i] + s1 * cont[4][i]))))
        .collect()
}

/// Integrate from `(s0, y0)` until a terminal event or `opts.s_max`.
pub fn integrate(sys: &OdeSystem, s0: f64, y0: &[f64], opts: &Options) -> Result<Solution, OdeError> {
    if !(sys.domain)(s0, y0) {
        return Err(OdeError::InitOutsideDomain);
    }
    let mut s = s0;
    let mut y = y0.to_vec();
    let mut k1 = sys.eval(s, &y);
    let mut h = opts.h_init.min(opts.h_max);
    let mut sol = Solution {
        names: sys.names.clone(),
        s: vec![s0],
        y: vec![y0.to_vec()],
        event: None,
        s_end: s0,
        y_end: y0.to_vec(),
        steps: 0,
        rejected: 0,
        err_bound: 0.0,
    };
    let mut g_prev: Vec<f64> = sys.events.iter().map(|e| (e.g)(s, &y)).collect();
    if let Some(i) = g_prev.iter().position(|&g| g <= 0.0) {
        sol.event = Some(sys.events[i].name.clone());
        return Ok(sol);
    }
    while s < opts.s_max {
        if h < opts.h_min {
            return Err(OdeError::StepUnderflow { s });
        }
        let h_try = h.min(opts.s_max - s);
        let Some(st) = dopri_step(sys, s, &y, &k1, h_try) else {
            sol.rejected += 1;
            h *= 0.25;
            continue;
        };
        let mut norm = 0.0;
        for ((a, b), e) in y.iter().zip(&st.y1).zip(&st.err) {
            let sc = opts.atol + opts.rtol * a.abs().max(b.abs());
            norm += (e / sc).powi(2);
        }
        let norm = (norm / y.len() as f64).sqrt();
        if norm > 1.0 {
            sol.rejected += 1;
            h = h_try * (0.9 * norm.powf(-0.2)).max(0.2);
            continue;
        }
        sol.steps += 1;
        sol.err_bound += st.err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let s_new = s + h_try;
        // events
        let g_new: Vec<f64> = sys.events.iter().map(|e| (e.g)(s_new, &st.y1)).collect();
        let hit = (0..g_new.len()).filter(|&i| g_prev[i] > 0.0 && g_new[i] <= 0.0).min_by(|&a, &b| {
            let ta = g_prev[a] / (g_prev[a] - g_new[a]);
            let tb = g_prev[b] / (g_prev[b] - g_new[b]);
            ta.partial_cmp(&tb).unwrap()
        });
        if let Some(i) = hit {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            while (hi - lo) * h_try > opts.event_tol {
                let mid = 0.5 * (lo + hi);
                let ym = dense_at(&st.cont, mid);
                if (sys.events[i].g)(s + mid * h_try, &ym) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s_ev = s + hi * h_try;
            let y_ev = dense_at(&st.cont, hi);
            sol.s.push(s_ev);
            sol.y.push(y_ev.clone());
            sol.event = Some(sys.events[i].name.clone());
            sol.s_end = s_ev;
            sol.y_end = y_ev;
            return Ok(sol);
        }
        s = s_new;
        y = st.y1;
        k1 = st.k7;
        g_prev = g_new;
        if opts.dense {
            sol.s.push(s);
            sol.y.push(y.clone());
        }
        h = (h_try * (0.9 * norm.max(1e-10).powf(-0.2)).min(5.0)).min(opts.h_max);
    }
    if !opts.dense {
        sol.s.push(s);
        sol.y.push(y.clone());
    }
    sol.s_end = s;
    sol.y_end = y;
    Ok(sol)
}

/// Fixed-step fifth-order integration to `s_end` (used for order checks).
pub fn integrate_fixed(sys: &OdeSystem, s0: f64, y0: &[f64], s_end: f64, steps: usize) -> Option<Vec<f64>> {
    let h = (s_end - s0) / steps as f64;
    let mut y = y0.to_vec();
    let mut k1 = sys.eval(s0, &y);
    for i in 0..steps {
        let st = dopri_step(sys, s0 + i as f64 * h, &y, &k1, h)?;
        y = st.y1;
        k1 = st.k7;
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(stop_at: Option<f64>, half: bool) -> OdeSystem<'static> {
        let mut events = Vec::new();
        if let Some(s1) = stop_at {
            events.push(Event { name: "s".into(), g: Box::new(move |s, _| s1 - s) });
        }
        if half {
            events.push(Event { name: "half".into(), g: Box::new(|_, y| y[0] - 0.5) });
        }
        OdeSystem {
            names: vec!["v".into()],
            rhs: Box::new(|_, y, out| out[0] = -y[0]),
            domain: Box::new(|_, y| y[0].is_finite()),
            events,
        }
    }

    #[test]
    fn exponential_decay_to_one() {
        let sol = integrate(&decay(Some(1.0), false), 0.0, &[1.0], &Options::default()).unwrap();
        assert!((sol.s_end - 1.0).abs() < 1e-9);
        assert!((sol.y_end[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn event_located_at_ln2() {
        let sol = integrate(&decay(None, true), 0.0, &[1.0], &Options::default()).unwrap();
        assert_eq!(sol.event.as_deref(), Some("half"));
        assert!((sol.s_end - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn fifth_order_convergence() {
        let sys = decay(None, false);
        let exact = (-2.0f64).exp();
        let e1 = (integrate_fixed(&sys, 0.0, &[1.0], 2.0, 10).unwrap()[0] - exact).abs();
        let e2 = (integrate_fixed(&sys, 0.0, &[1.0], 2.0, 20).unwrap()[0] - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order >= 4.0, "observed order {order}");
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let sys = decay(Some(3.0), false);
        let exact = (-3.0f64).exp();
        let err = |tol: f64| {
            let o = Options { rtol: tol, atol: tol * 1e-3, h_max: 10.0, ..Options::default() };
            (integrate(&sys, 0.0, &[1.0], &o).unwrap().y_end[0] - exact).abs()
        };
        let (coarse, fine) = (err(1e-4), err(1e-8));
        assert!(fine < coarse && fine < 1e-7, "{coarse} {fine}");
    }

    #[test]
    fn init_outside_domain_is_rejected() {
        let sys = decay(None, false);
        assert_eq!(
            integrate(&sys, 0.0, &[f64::NAN], &Options::default()).unwrap_err(),
            OdeError::InitOutsideDomain
        );
    }
}
