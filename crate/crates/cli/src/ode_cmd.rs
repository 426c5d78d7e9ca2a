use crate::output::{num, OutDir, Summary};
use crate::{Cli, OdeArgs, SystemId};
use anyhow::{Context, Result};
use semiham::ode::{run_pipeline, PipelineConfig, PipelineReport};
use serde_json::json;

pub fn pipeline_config(a: &OdeArgs, keep: bool) -> PipelineConfig {
    PipelineConfig {
        phases: if a.system == SystemId::Fr { 0 } else { a.phases },
        eps_stop: a.eps_stop,
        delta_stop: a.delta_stop,
        rtol: a.rtol,
        atol: a.atol,
        keep_trajectories: keep,
    }
}

pub fn report_summary(rep: &PipelineReport) -> Summary {
    let mut s = Summary::new("ok");
    s.constants.alpha_star = Some(rep.alpha_star);
    s.constants.sigma = rep.sigma.clone();
    for (q, sig) in rep.sigma.iter().enumerate() {
        s.hitting_times.insert(format!("sigma_{:03}", q + 1), *sig);
    }
    s.hitting_times.insert("alpha".into(), rep.alpha);
    s.details = json!({
        "x_hat": rep.x_hat,
        "y_hat": rep.y_hat,
        "r_hat": rep.r_hat,
        "m_hat": rep.m_hat,
        "l1_hat": rep.l1_hat,
        "alpha_star": rep.alpha_star,
        "alpha": rep.alpha,
        "exit_exponent": rep.exit_exponent,
    });
    s
}

pub fn cmd_ode(cli: &Cli, a: &OdeArgs) -> Result<()> {
    let mut out = OutDir::create(&cli.common.out)?;
    let rep = run_pipeline(&pipeline_config(a, true)).with_context(|| format!("integrating {:?}", a.system))?;
    let mut plot = Vec::new();
    for st in &rep.stages {
        let sol = &st.solution;
        let mut header = vec!["s"];
        header.extend(sol.names.iter().map(String::as_str));
        let rows = sol.s.iter().zip(&sol.y).map(|(s, y)| {
            let mut r = vec![num(*s)];
            r.extend(y.iter().map(|v| num(*v)));
            r
        });
        out.csv(&format!("ode_{}.csv", st.label), &header, rows)?;
        let thin = sol.s.len().div_ceil(2000).max(1);
        for (s, y) in sol.s.iter().zip(&sol.y).step_by(thin) {
            for (name, v) in sol.names.iter().zip(y) {
                plot.push(vec![format!("{}:{name}", st.label), num(*s), num(*v)]);
            }
        }
    }
    out.csv("plot.csv", &["series", "s_or_t", "value"], plot)?;
    let summary = report_summary(&rep);
    out.json("summary.json", &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary.details)?);
    out.manifest(cli, &summary)
}
