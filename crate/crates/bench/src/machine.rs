use std::fmt;

use serde::Serialize;

/// Where a report was measured.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Machine {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub cpu_model: Option<String>,
    /// Core the measurement thread was pinned to, if any.
    pub pinned_core: Option<usize>,
    pub optimized: bool,
    pub version: String,
}

impl Machine {
    pub fn detect(pinned_core: Option<usize>) -> Self {
        Machine {
            os: std::env::consts::OS.to_owned(),
            arch: std::env::consts::ARCH.to_owned(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cpu_model: cpu_model(),
            pinned_core,
            optimized: !cfg!(debug_assertions),
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }
}

fn cpu_model() -> Option<String> {
    let info = std::fs::read_to_string("/proc/cpuinfo").ok()?;
    info.lines()
        .find(|l| l.starts_with("model name") || l.starts_with("Model"))
        .and_then(|l| l.split_once(':'))
        .map(|(_, v)| v.trim().to_owned())
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "os={} arch={} cpus={} model={} pinned={} optimized={} ibrs={}",
            self.os,
            self.arch,
            self.logical_cpus,
            self.cpu_model.as_deref().unwrap_or("unknown"),
            self.pinned_core.map_or("no".to_owned(), |c| c.to_string()),
            self.optimized,
            self.version,
        )
    }
}
