//! Phase-diagram sweeps over `(alpha, beta)` at fixed `m`.

use std::collections::BTreeMap;
use std::time::Instant;

use frontlab::regimes::{classify, RegimeKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::emit;
use crate::error::{CliError, Result};
use crate::output::{write_csv, RunManifest};
use crate::Cli;

/// `lo:hi:n` with `n` equally spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn parse(name: &str, s: &str) -> Result<Axis> {
        let bad = || CliError::Usage(format!("--{name} expects lo:hi:n, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad());
        };
        let axis = Axis {
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            n: n.trim().parse().map_err(|_| bad())?,
        };
        if !(axis.lo.is_finite() && axis.hi.is_finite() && axis.lo <= axis.hi) {
            return Err(CliError::Usage(format!("--{name}: bounds must satisfy lo <= hi, got {s:?}")));
        }
        Ok(axis)
    }

    pub fn points(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub alpha: f64,
    pub beta: f64,
    pub regime: String,
    pub gamma: Option<f64>,
    pub exponent: Option<f64>,
    pub boundary: Option<String>,
    /// Set when classification failed; the sweep carries on.
    pub error: Option<String>,
}

pub fn classify_cell(m: f64, alpha: f64, beta: f64) -> Cell {
    match classify(m, alpha, beta) {
        Ok(k) => Cell {
            alpha,
            beta,
            regime: k.name().to_string(),
            gamma: k.gamma(),
            exponent: k.exponent(),
            boundary: match k {
                RegimeKind::Boundary { label } => Some(label),
                _ => None,
            },
            error: None,
        },
        Err(e) => Cell {
            alpha,
            beta,
            regime: "Error".into(),
            gamma: None,
            exponent: None,
            boundary: None,
            error: Some(e.to_string()),
        },
    }
}

/// Cells in row-major order (alpha outer), classified on `jobs` workers.
pub fn sweep(m: f64, alpha: &Axis, beta: &Axis, jobs: Option<usize>) -> Result<Vec<Cell>> {
    let pairs: Vec<(f64, f64)> = alpha
        .points()
        .into_iter()
        .flat_map(|a| beta.points().into_iter().map(move |b| (a, b)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| pairs.par_iter().map(|&(a, b)| classify_cell(m, a, b)).collect()))
}

#[derive(Serialize)]
struct SweepSummary {
    m: f64,
    cells: usize,
    failed: usize,
    counts: BTreeMap<String, usize>,
}

pub fn run(cli: &Cli, m: f64, alpha: &str, beta: &str) -> Result<()> {
    let start = Instant::now();
    let (a, b) = (Axis::parse("alpha", alpha)?, Axis::parse("beta", beta)?);
    let cells = sweep(m, &a, &b, cli.jobs)?;
    let dir = cli.out.clone().unwrap_or_else(|| format!("out/sweep_m{m}").into());
    let path = dir.join("phase.csv");
    let rows = cells.iter().map(|c| {
        (
            c.alpha,
            c.beta,
            c.regime.as_str(),
            c.gamma,
            c.exponent,
            c.boundary.as_deref(),
            c.error.as_deref(),
        )
    });
    write_csv(&path, &["alpha", "beta", "regime", "gamma", "exponent", "boundary", "error"], rows)?;
    let echo = serde_json::json!({ "m": m, "alpha": a, "beta": b });
    RunManifest::write(&dir, "sweep", echo, &[path.clone()], start.elapsed())?;

    let mut counts = BTreeMap::new();
    for c in &cells {
        *counts.entry(c.regime.clone()).or_insert(0) += 1;
    }
    let summary = SweepSummary {
        m,
        cells: cells.len(),
        failed: cells.iter().filter(|c| c.error.is_some()).count(),
        counts,
    };
    if cli.json {
        return emit(&summary);
    }
    println!("m = {m}: {} cells -> {}", summary.cells, path.display());
    for (name, n) in &summary.counts {
        println!("  {name:<26} {n}");
    }
    Ok(())
}
