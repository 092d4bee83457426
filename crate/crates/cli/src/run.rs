use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{analysis, compose, filters, metrics, synth};
use crate::{Cli, Command};

/// Inputs read and outputs written by one invocation.
pub struct RunContext {
    pub seed: u64,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl RunContext {
    fn new(seed: u64) -> Self {
        Self {
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Records `path` for the input digest list.
    pub fn input(&mut self, path: &Path) -> PathBuf {
        if !self.inputs.iter().any(|p| p == path) {
            self.inputs.push(path.to_path_buf());
        }
        path.to_path_buf()
    }

    pub fn write_bytes(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(path, text.as_bytes())
    }

    /// Writes to `out`, or to standard output when no path is given.
    pub fn emit_json<T: Serialize>(&mut self, out: Option<&Path>, value: &T) -> Result<()> {
        match out {
            Some(path) => self.write_json(path, value),
            None => {
                println!("{}", serde_json::to_string_pretty(value)?);
                Ok(())
            }
        }
    }

    /// Marks a file written by library code.
    pub fn wrote(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut ctx = RunContext::new(cli.seed);
    match &cli.command {
        Command::Synth(a) => synth::run(a, &mut ctx),
        Command::Metrics(a) => metrics::run_metrics(a, &mut ctx),
        Command::Softrank(a) => metrics::run_softrank(a, &mut ctx),
        Command::Topdims(a) => metrics::run_topdims(a, &mut ctx),
        Command::Commondims(a) => metrics::run_commondims(a, &mut ctx),
        Command::Zeroshot(a) => compose::run_zeroshot(a, &mut ctx),
        Command::Retrieve(a) => compose::run_retrieve(a, &mut ctx),
        Command::Switchdims(a) => compose::run_switch(a, &mut ctx),
        Command::Decompose(a) => compose::run_decompose(a, &mut ctx),
        Command::FilterCaptions(a) => filters::run_captions(a, &mut ctx),
        Command::FilterKnn(a) => filters::run_knn(a, &mut ctx),
        Command::Correlate(a) => analysis::run_correlate(a, &mut ctx),
        Command::Report(a) => analysis::run_report(a, &mut ctx),
        Command::Scatter(a) => analysis::run_scatter(a, &mut ctx),
    }?;
    write_run_record(cli, &ctx)
}

/// Options of the invocation as one JSON object, global ones included.
pub fn config_value(cli: &Cli) -> Value {
    let mut config = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut config {
        map.insert("seed".into(), json!(cli.seed));
    }
    config
}

fn write_run_record(cli: &Cli, ctx: &RunContext) -> Result<()> {
    let path = match &cli.run_json {
        Some(p) => p.clone(),
        None => ctx
            .outputs
            .first()
            .and_then(|p| p.parent())
            .map_or_else(|| PathBuf::from("run.json"), |d| d.join("run.json")),
    };
    let mut inputs = Vec::with_capacity(ctx.inputs.len());
    for p in &ctx.inputs {
        let bytes = std::fs::read(p).with_context(|| format!("hashing {}", p.display()))?;
        inputs.push(json!({
            "path": p.display().to_string(),
            "fnv1a64": format!("{:016x}", disbench_core::fnv1a64(&bytes)),
        }));
    }
    let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    // pretty printing puts the timestamp alone on its line
    let record = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "seed": cli.seed,
        "config": config_value(cli),
        "inputs": inputs,
        "outputs": ctx.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "timestamp": stamp,
    });
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}
