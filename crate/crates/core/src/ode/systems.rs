//! Trajectory systems for the fully randomised and degree-greedy strategies,
//! and the chained degree-greedy → fully-randomised pipeline.

use super::{integrate, Event, OdeError, OdeSystem, Options, Solution};
use serde::Serialize;

/// Drift of `(x, y, l1, l2)` under the fully randomised strategy.
pub fn fr_drift(v: &[f64], out: &mut [f64]) {
    let (x, y, l1, l2) = (v[0], v[1], v[2], v[3]);
    let k = 1.0 - x;
    let lam = 1.0 + y / k;
    let a = 2.0 * y / k;
    let l = l1 + l2;
    out[0] = 2.0 * y + 2.0 * l * lam;
    out[1] = -2.0 * y + 2.0 * (1.0 - x - y) - 2.0 * l * a;
    out[2] = x - 5.0 * l - 2.0 * l1 + (2.0 * l1 * lam + 2.0 * l2 * lam + 2.0 * y) * (2.0 * l2 - l1) / k + 2.0 * l2 - l1;
    out[3] = l1 - 2.0 * l2 * a - (2.0 * l1 + 2.0 * l2) * lam * 2.0 * l2 / k - 2.0 * l2;
}

/// Fully randomised system, stopping when `1 - x <= eps_stop`.
pub fn fr_system<'a>(eps_stop: f64) -> OdeSystem<'a> {
    OdeSystem {
        names: ["x", "y", "l1", "l2"].iter().map(|s| s.to_string()).collect(),
        rhs: Box::new(|_, v, out| fr_drift(v, out)),
        domain: Box::new(|_, v| v[0] < 1.0 && v.iter().all(|z| z.is_finite())),
        events: vec![Event { name: "saturated".into(), g: Box::new(move |_, v| 1.0 - v[0] - eps_stop) }],
    }
}

/// Index layout of the phase-`q` system: `x, y, r`, then the `q` minimum
/// types `(j, q-1-j)`, then the `q+1` maximum types `(j, q-j)`.
#[derive(Clone, Copy, Debug)]
pub struct DgPhaseLayout {
    pub q: u32,
}

impl DgPhaseLayout {
    pub fn dim(&self) -> usize {
        3 + 2 * self.q as usize + 1
    }
    pub fn min_index(&self, j: usize) -> usize {
        3 + j
    }
    pub fn max_index(&self, j: usize) -> usize {
        3 + self.q as usize + j
    }
    pub fn names(&self) -> Vec<String> {
        let q = self.q as usize;
        let mut v: Vec<String> = ["x", "y", "r"].iter().map(|s| s.to_string()).collect();
        v.extend((0..q).map(|j| format!("c_{}_{}", j, q - 1 - j)));
        v.extend((0..=q).map(|j| format!("c_{}_{}", j, q - j)));
        v
    }
    /// `d`, the mass of minimum types.
    pub fn d(&self, v: &[f64]) -> f64 {
        v[3..3 + self.q as usize].iter().sum()
    }
    /// `(b, m)` for the current values.
    pub fn b_m(&self, v: &[f64]) -> (f64, f64) {
        let q = self.q as usize;
        let (mut b, mut m) = (0.0, 0.0);
        for j in 0..q {
            let c = v[self.min_index(j)];
            b += j as f64 * c;
            m += (q - 1 - j) as f64 * c;
        }
        for j in 0..=q {
            let c = v[self.max_index(j)];
            b += j as f64 * c;
            m += (q - j) as f64 * c;
        }
        (b, m)
    }
}

/// Drift of the phase-`q` degree-greedy system.
pub fn dg_phase_rhs(q: u32, v: &[f64], out: &mut [f64]) {
    let lay = DgPhaseLayout { q };
    let qu = q as usize;
    let (x, y, r) = (v[0], v[1], v[2]);
    let c = |k1: isize, k2: isize| -> f64 {
        if k1 < 0 || k2 < 0 {
            return 0.0;
        }
        let s = (k1 + k2) as usize;
        if s + 1 == qu {
            v[lay.min_index(k1 as usize)]
        } else if s == qu {
            v[lay.max_index(k1 as usize)]
        } else {
            0.0
        }
    };
    let bb = |k1: isize, k2: isize| k1 as f64 * c(k1, k2);
    let mm = |k1: isize, k2: isize| k2 as f64 * c(k1, k2);
    let (b, m) = lay.b_m(v);
    let l = b + m + r;
    let d = lay.d(v);
    let k = 1.0 - x;
    let g = 1.0 + y / k;
    let a = 2.0 * y / k;
    out[0] = 2.0 * (y + l * g);
    out[1] = -2.0 * y + 2.0 * (1.0 - x - y) - 2.0 * a * l;
    let mut ssum = 0.0;
    let types = (0..qu)
        .map(|j| (j as isize, (qu - 1 - j) as isize, true))
        .chain((0..=qu).map(|j| (j as isize, (qu - j) as isize, false)));
    for (j, h, _) in types.clone() {
        ssum += 2.0 * (bb(j, h) + mm(j, h)) * (h as f64 + y / k * m / k);
    }
    out[2] = y * (2.0 * m / k - 2.0 * r / k) - 2.0 * (b + m) * r * g / k + ssum - 2.0 * r * (1.0 + r * g / k)
        + 2.0 * r * m * g / k
        - r;
    for (k1, k2, is_min) in types {
        let mprev = if k1 > 0 { mm(k1 - 1, k2 + 1) } else { 0.0 };
        let cc = c(k1, k2);
        let mk = mm(k1, k2);
        let mut e = y * (2.0 * mprev / k - 2.0 * cc / k - 2.0 * mk / k);
        e += 2.0 * (b + m) * (mprev / k - mk / k) * g;
        e += -2.0 * (b + m) * (a / 2.0) * cc / k - 2.0 * bb(k1, k2) - 2.0 * mk;
        e += 2.0 * r * (mprev / k - mk / k - cc / k) * g;
        if is_min {
            e += -(x - 5.0 * l) * cc / d - r * cc / d;
        } else {
            e += (x - 5.0 * l) * c(k1 - 1, k2) / d + r * c(k1, k2 - 1) / d;
        }
        if k2 > 0 {
            e += bb(k1 + 1, k2 - 1);
        }
        e -= bb(k1, k2);
        let idx = if is_min { lay.min_index(k1 as usize) } else { lay.max_index(k1 as usize) };
        out[idx] = e;
    }
}

/// Phase-`q` system, stopping when `d <= delta_stop`.
pub fn dg_phase_system<'a>(q: u32, delta_stop: f64) -> OdeSystem<'a> {
    let lay = DgPhaseLayout { q };
    OdeSystem {
        names: lay.names(),
        rhs: Box::new(move |_, v, out| dg_phase_rhs(q, v, out)),
        domain: Box::new(move |_, v| v[0] < 1.0 && lay.d(v) > 0.0 && v.iter().all(|z| z.is_finite())),
        events: vec![Event { name: format!("phase_{q}_done"), g: Box::new(move |_, v| lay.d(v) - delta_stop) }],
    }
}

/// Exit-time estimate past a stopping cut-off.
#[derive(Clone, Debug, Serialize)]
pub struct Extrapolation {
    /// Where integration stopped.
    pub s_cut: f64,
    /// Estimated boundary time.
    pub sigma: f64,
    /// Exponent of the local power law `κ ∝ (σ - s)^p` used.
    pub p: f64,
    /// State advanced linearly to `sigma`.
    pub state: Vec<f64>,
}

/// Boundary time of a quantity `κ` vanishing like `(σ - s)^p`, with `p`
/// read off `κ κ'' / κ'^2 = (p - 1) / p`.
fn power_law_exit(kappa: f64, dk: f64, ddk: f64) -> (f64, f64) {
    let ratio = kappa * ddk / (dk * dk);
    let p = if ratio.is_finite() && ratio < 1.0 { 1.0 / (1.0 - ratio) } else { 1.0 };
    (p, p * kappa / dk.abs())
}

/// Second derivative along the flow of the first component, by a central
/// difference in the flow direction.
fn flow_second_derivative(rhs: impl Fn(&[f64], &mut [f64]), v: &[f64], comp: usize, hs: f64) -> f64 {
    let n = v.len();
    let mut f = vec![0.0; n];
    rhs(v, &mut f);
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    let vp: Vec<f64> = (0..n).map(|i| v[i] + hs * f[i]).collect();
    let vm: Vec<f64> = (0..n).map(|i| v[i] - hs * f[i]).collect();
    rhs(&vp, &mut fp);
    rhs(&vm, &mut fm);
    (fp[comp] - fm[comp]) / (2.0 * hs)
}

/// Integrate the fully randomised system from `(s0, v0)` and extrapolate the
/// time at which `x` reaches 1.
pub fn fr_exit(s0: f64, v0: &[f64], eps_stop: f64, opts: &Options) -> Result<(Solution, Extrapolation), OdeError> {
    let sys = fr_system(eps_stop);
    let sol = integrate(&sys, s0, v0, opts)?;
    if sol.event.is_none() {
        return Err(OdeError::NoEvent { s: sol.s_end });
    }
    let v = &sol.y_end;
    let f = sys.eval(sol.s_end, v);
    let kappa = 1.0 - v[0];
    let dk = -f[0];
    let hs = 1e-3 * kappa / dk.abs();
    let ddk = -flow_second_derivative(fr_drift, v, 0, hs);
    let (p, ds) = power_law_exit(kappa, dk, ddk);
    let state = v.iter().zip(&f).map(|(a, b)| a + ds * b).collect();
    Ok((sol.clone(), Extrapolation { s_cut: sol.s_end, sigma: sol.s_end + ds, p, state }))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PipelineConfig {
    pub phases: u32,
    pub eps_stop: f64,
    pub delta_stop: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Keep dense trajectories of every stage.
    pub keep_trajectories: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { phases: 100, eps_stop: 1e-6, delta_stop: 1e-8, rtol: 1e-10, atol: 1e-14, keep_trajectories: false }
    }
}

/// One integrated stage with its stage label.
#[derive(Clone, Debug)]
pub struct StageSolution {
    pub label: String,
    pub solution: Solution,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    /// `sigma[q-1]` = σ_q.
    pub sigma: Vec<f64>,
    pub x_hat: f64,
    pub y_hat: f64,
    pub r_hat: f64,
    pub m_hat: f64,
    pub l1_hat: f64,
    pub alpha_star: f64,
    pub alpha: f64,
    pub exit_exponent: f64,
    #[serde(skip)]
    pub stages: Vec<StageSolution>,
}

/// Degree-greedy phases `1..=N`, then the fully randomised system started from
/// `(x̂, ŷ, m + r, 0)`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport, OdeError> {
    let opts = Options { rtol: cfg.rtol, atol: cfg.atol, dense: cfg.keep_trajectories, ..Options::default() };
    let mut s = 0.0;
    let (mut x, mut y, mut r) = (0.0, 0.0, 0.0);
    let mut carry = vec![1.0];
    let mut sigma = Vec::with_capacity(cfg.phases as usize);
    let mut stages = Vec::new();
    let mut m_hat = 0.0;
    for q in 1..=cfg.phases {
        let lay = DgPhaseLayout { q };
        let mut v0 = vec![0.0; lay.dim()];
        v0[0] = x;
        v0[1] = y;
        v0[2] = r;
        for (j, &c) in carry.iter().enumerate() {
            v0[lay.min_index(j)] = c;
        }
        let sys = dg_phase_system(q, cfg.delta_stop);
        let sol = integrate(&sys, s, &v0, &opts)?;
        if sol.event.is_none() {
            return Err(OdeError::NoEvent { s: sol.s_end });
        }
        let v = &sol.y_end;
        let f = sys.eval(sol.s_end, v);
        let dd: f64 = (0..q as usize).map(|j| f[lay.min_index(j)]).sum();
        if dd >= 0.0 {
            return Err(OdeError::BadExtrapolation { phase: q, slope: dd });
        }
        let h = -lay.d(v) / dd;
        let w: Vec<f64> = v.iter().zip(&f).map(|(a, b)| a + h * b).collect();
        s = sol.s_end + h;
        sigma.push(s);
        x = w[0];
        y = w[1];
        r = w[2];
        carry = (0..=q as usize).map(|j| w[lay.max_index(j)]).collect();
        m_hat = carry.iter().enumerate().map(|(j, c)| (q as usize - j) as f64 * c).sum();
        if cfg.keep_trajectories {
            stages.push(StageSolution { label: format!("dg_phase_{q}"), solution: sol });
        }
    }
    let l1 = m_hat + r;
    let (sol, ex) = fr_exit(s, &[x, y, l1, 0.0], cfg.eps_stop, &opts)?;
    if cfg.keep_trajectories {
        stages.push(StageSolution { label: "fr".into(), solution: sol });
    }
    let alpha_star = ex.sigma - s;
    Ok(PipelineReport {
        sigma,
        x_hat: x,
        y_hat: y,
        r_hat: r,
        m_hat,
        l1_hat: l1,
        alpha_star,
        alpha: ex.sigma,
        exit_exponent: ex.p,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fr_drift_at_origin() {
        let mut out = [0.0; 4];
        fr_drift(&[0.0; 4], &mut out);
        assert_eq!(out, [0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn fr_l2_drift_at_stage_two_start() {
        let mut out = [0.0; 4];
        let v = [0.9, 0.0, 0.01, 0.0];
        fr_drift(&v, &mut out);
        assert!((out[3] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn power_law_recovers_exponent() {
        // κ = (σ - s)^p at s = 0 with σ = 0.3
        for p in [1.0, 2.0, 3.0] {
            let sig: f64 = 0.3;
            let k = sig.powf(p);
            let dk = -p * sig.powf(p - 1.0);
            let ddk = p * (p - 1.0) * sig.powf(p - 2.0);
            let (pp, ds) = power_law_exit(k, dk, ddk);
            assert!((pp - p).abs() < 1e-12 && (ds - sig).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_one_conserves_unsaturated_mass() {
        let lay = DgPhaseLayout { q: 1 };
        let mut v = vec![0.0; lay.dim()];
        v[lay.min_index(0)] = 1.0;
        let sys = dg_phase_system(1, 1e-8);
        let sol = integrate(&sys, 0.0, &v, &Options::default()).unwrap();
        for w in &sol.y {
            let c: f64 = w[3..].iter().sum();
            assert!((c + w[0] - 1.0).abs() < 1e-8, "{}", c + w[0]);
        }
    }
}
