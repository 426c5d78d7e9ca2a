//! Output directory, CSV and JSON writers, summary and manifest.
//!
//! CSV schemas (version 1, first line is the header):
//!
//! | file                   | columns                                   |
//! |------------------------|-------------------------------------------|
//! | `trace_fr_*.csv`       | `t,X,Y,L1,L2`                             |
//! | `trace_dg_*.csv`       | `t,phase,X,Y,R,B,M,D`                     |
//! | `trace_plain_*.csv`    | `t,X,Y`                                   |
//! | `ode_*.csv`            | `s` then the system's state names         |
//! | `plot.csv`             | `series,s_or_t,value` (long format)       |
//! | `f_table.csv`          | `s,f,z,w1,w2,t1,t2,bound`                 |
//! | `quadrature.csv`       | `s,structure,closed_form,oracle,delta`    |
//! | `montecarlo.csv`       | `seed,structure,count_over_n,closed_form,rel_err` |

use anyhow::{Context, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;

pub struct OutDir {
    pub root: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        let probe = root.join(".write-probe");
        std::fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", root.display()))?;
        let _ = std::fs::remove_file(probe);
        Ok(OutDir { root: root.to_path_buf(), files: Vec::new(), started: Instant::now() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Write `manifest.json` through a temporary file and a rename.
    pub fn manifest(self, cli: &crate::Cli, summary: &Summary) -> Result<()> {
        let m = Manifest {
            schema_version: SCHEMA_VERSION,
            tool: concat!("semiham ", env!("CARGO_PKG_VERSION")),
            config: ResolvedConfig { command: cli.cmd.name(), flags: crate::config::flat_flags(cli) },
            wall_time_s: self.started.elapsed().as_secs_f64(),
            files: self.files.clone(),
            summary_scalars: summary.scalars(),
        };
        let tmp = self.path(".manifest.json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(&m)? + "\n")?;
        std::fs::rename(&tmp, self.path("manifest.json"))?;
        Ok(())
    }
}

#[derive(Serialize)]
struct ResolvedConfig {
    command: &'static str,
    flags: serde_json::Map<String, serde_json::Value>,
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    tool: &'static str,
    config: ResolvedConfig,
    wall_time_s: f64,
    files: Vec<String>,
    summary_scalars: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Constants {
    pub alpha_star: Option<f64>,
    pub sigma: Vec<f64>,
    pub beta: Option<f64>,
}

/// `summary.json`; see `docs/summary.schema.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub status: String,
    /// Hitting times in units of `n`.
    pub hitting_times: BTreeMap<String, f64>,
    pub constants: Constants,
    /// Command-specific details.
    pub details: serde_json::Value,
}

impl Summary {
    pub fn new(status: impl Into<String>) -> Self {
        Summary {
            schema_version: SCHEMA_VERSION,
            status: status.into(),
            hitting_times: BTreeMap::new(),
            constants: Constants::default(),
            details: serde_json::Value::Null,
        }
    }

    fn scalars(&self) -> BTreeMap<String, f64> {
        let mut m: BTreeMap<String, f64> =
            self.hitting_times.iter().map(|(k, v)| (format!("hitting_times.{k}"), *v)).collect();
        if let Some(a) = self.constants.alpha_star {
            m.insert("constants.alpha_star".into(), a);
        }
        if let Some(b) = self.constants.beta {
            m.insert("constants.beta".into(), b);
        }
        if let Some(s) = self.constants.sigma.last() {
            m.insert("constants.sigma_last".into(), *s);
        }
        m
    }
}

/// Shortest round-trip decimal form, so CSVs are byte-stable.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
