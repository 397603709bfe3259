//! Scheme × ε × σ sweeps on a bounded rayon pool.

use std::collections::BTreeMap;

use phasestep_core::bench::{fit_loglog, richardson_reference, run_benchmark, BenchmarkResult, BenchmarkSpec};
use phasestep_core::SchemeId;
use rayon::prelude::*;

use crate::config::Config;
use crate::engine::RustFftEngine;
use crate::error::{LabError, LabResult};
use crate::io::{CellFailure, Fit, TableDocument, TableRow};

/// Tolerances of the reference runs.
pub const REFERENCE_SIGMAS: (f64, f64) = (1e-6, 1e-7);

/// Cells in scheme-major, then σ, then ε order.
pub fn plan(config: &Config) -> LabResult<Vec<BenchmarkSpec>> {
    let g = &config.sweep;
    if g.schemes.is_empty() || g.eps.is_empty() || g.sigma.is_empty() {
        return Err(LabError::Invalid("sweep grid is empty: schemes, eps and sigma each need a value".into()));
    }
    let mut cells = Vec::with_capacity(g.schemes.len() * g.eps.len() * g.sigma.len());
    for &scheme in &g.schemes {
        for &sigma in &g.sigma {
            for &eps in &g.eps {
                cells.push(config.spec_for(scheme, eps, sigma)?);
            }
        }
    }
    Ok(cells)
}

/// Runs one cell with the `rustfft` engine.
pub fn run_cell(spec: &BenchmarkSpec) -> phasestep_core::Result<BenchmarkResult> {
    run_benchmark(spec, Some(RustFftEngine::shared(spec.n)))
}

/// Runs `cells` on `threads` workers. Results keep the cell order.
pub fn run_cells(cells: &[BenchmarkSpec], threads: usize) -> LabResult<Vec<phasestep_core::Result<BenchmarkResult>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Invalid(e.to_string()))?;
    Ok(pool.install(|| cells.par_iter().map(run_cell).collect()))
}

/// Richardson limit of TR benchmark times at [`REFERENCE_SIGMAS`].
pub fn reference_time(template: &BenchmarkSpec) -> phasestep_core::Result<f64> {
    let (coarse, fine) = REFERENCE_SIGMAS;
    let run = |sigma| run_cell(&BenchmarkSpec { scheme: SchemeId::Tr, sigma, ..*template });
    let (a, b) = (run(coarse)?, run(fine)?);
    Ok(richardson_reference(a.t_bench, coarse, b.t_bench, fine))
}

/// Executes the configured sweep. Failed cells are reported, not fatal.
pub fn sweep(config: &Config) -> LabResult<TableDocument> {
    let cells = plan(config)?;
    let threads = config.threads()?;

    let mut references = Vec::new();
    if config.sweep.reference {
        let mut eps: Vec<f64> = config.sweep.eps.clone();
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
        let templates: Vec<BenchmarkSpec> =
            eps.iter().map(|&e| config.spec_for(SchemeId::Tr, e, REFERENCE_SIGMAS.0)).collect::<LabResult<_>>()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| LabError::Invalid(e.to_string()))?;
        let times: Vec<_> = pool.install(|| templates.par_iter().map(reference_time).collect());
        for (e, t) in eps.into_iter().zip(times) {
            references.push((e, t?));
        }
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (spec, outcome) in cells.iter().zip(run_cells(&cells, threads)?) {
        match outcome {
            Ok(mut r) => {
                if let Some(&(_, t_ref)) = references.iter().find(|(e, _)| *e == spec.epsilon) {
                    r.error = Some((r.t_bench - t_ref).abs());
                }
                rows.push(TableRow::from(&r));
            }
            Err(e) => failures.push(CellFailure {
                scheme: spec.scheme,
                eps: spec.epsilon,
                sigma: spec.sigma,
                message: e.to_string(),
            }),
        }
    }
    let fits = fits(&rows);
    Ok(TableDocument { problem: config.problem(), reaction: config.reaction(), rows, failures, fits, references })
}

/// Log-log exponents of `M` along each axis with at least two points.
pub fn fits(rows: &[TableRow]) -> Vec<Fit> {
    let key = |x: f64| x.to_bits();
    let mut by_eps: BTreeMap<(SchemeId, u64), Vec<(f64, f64)>> = BTreeMap::new();
    let mut by_sigma: BTreeMap<(SchemeId, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        by_eps.entry((r.scheme, key(r.sigma))).or_default().push((r.eps, r.m as f64));
        by_sigma.entry((r.scheme, key(r.eps))).or_default().push((r.sigma, r.m as f64));
    }
    let mut out = Vec::new();
    for (axis, groups) in [("eps", by_eps), ("sigma", by_sigma)] {
        for ((scheme, fixed), pts) in groups {
            if pts.len() < 2 {
                continue;
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            out.push(Fit {
                scheme,
                axis: axis.to_string(),
                fixed: f64::from_bits(fixed),
                exponent: fit_loglog(&xs, &ys).0,
                points: xs.len(),
            });
        }
    }
    out
}
