//! Sample, instantiate, solve and accumulate.
//!
//! Bounds come from a pilot pass over the first `min(10^5, count)` samples
//! unless the config fixes them. The pilot's roots are binned directly; the
//! remaining samples are binned against the frozen bounds on per-worker grids
//! that are summed at the end, so the result does not depend on the worker
//! count.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::config::RunConfig;
use crate::density::{compute_bounds, Bounds, DensityError, DensityGrid};
use crate::family::{FamilySpec, Instance, Rejection};
use crate::parallel::{fold_chunks, resolve_workers};
use crate::render::{render, Image, RenderError};
use crate::solver::{polish, roots_aberth, roots_companion_capped, Engine, SolverError};

pub const PILOT_SAMPLES: u64 = 100_000;
pub const CHUNK: u64 = 64;

/// Used when the pilot produced no finite roots at all.
const FALLBACK_BOUNDS: Bounds = Bounds {
    re_min: -1.0,
    re_max: 1.0,
    im_min: -1.0,
    im_max: 1.0,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot write {0}: {1}")]
    Io(PathBuf, std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampleOutcome {
    Roots(Vec<Complex64>),
    Rejected(RejectReason),
    Failed(SolverError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    LeadingVanishes,
    NonFinite,
    /// A coefficient expression could not be evaluated (division by zero, log 0).
    Evaluation,
}

/// Instantiates and solves sample `index`.
pub fn solve_sample(cfg: &RunConfig, index: u64) -> SampleOutcome {
    let (t1, t2) = match cfg.family {
        FamilySpec::Explicit(_) => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        _ => cfg.plan.draw_pair(index),
    };
    let p = match cfg.family.instantiate(t1, t2, index) {
        Ok(Instance::Poly(p)) => p,
        Ok(Instance::Rejected(Rejection::LeadingVanishes)) => return SampleOutcome::Rejected(RejectReason::LeadingVanishes),
        Ok(Instance::Rejected(Rejection::NonFinite)) => return SampleOutcome::Rejected(RejectReason::NonFinite),
        Err(_) => return SampleOutcome::Rejected(RejectReason::Evaluation),
    };
    let solved = match cfg.solver.engine {
        Engine::CompanionQr => roots_companion_capped(&p, cfg.solver.degree_cap),
        Engine::Aberth => roots_aberth(&p, &cfg.solver.precision()),
    };
    match solved {
        Ok(rs) => {
            let rs = if cfg.solver.polish { polish(rs, &p) } else { rs };
            SampleOutcome::Roots(rs.roots)
        }
        Err(e) => SampleOutcome::Failed(e),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub samples: u64,
    pub solved: u64,
    pub rejected_leading: u64,
    pub rejected_nonfinite: u64,
    pub rejected_eval: u64,
    pub failed: u64,
    pub no_convergence: u64,
}

impl Tally {
    fn record(&mut self, outcome: &SampleOutcome) {
        self.samples += 1;
        match outcome {
            SampleOutcome::Roots(_) => self.solved += 1,
            SampleOutcome::Rejected(RejectReason::LeadingVanishes) => self.rejected_leading += 1,
            SampleOutcome::Rejected(RejectReason::NonFinite) => self.rejected_nonfinite += 1,
            SampleOutcome::Rejected(RejectReason::Evaluation) => self.rejected_eval += 1,
            SampleOutcome::Failed(e) => {
                self.failed += 1;
                if matches!(e, SolverError::NoConvergence { .. }) {
                    self.no_convergence += 1;
                }
            }
        }
    }

    fn merge(&mut self, o: &Tally) {
        self.samples += o.samples;
        self.solved += o.solved;
        self.rejected_leading += o.rejected_leading;
        self.rejected_nonfinite += o.rejected_nonfinite;
        self.rejected_eval += o.rejected_eval;
        self.failed += o.failed;
        self.no_convergence += o.no_convergence;
    }

    pub fn rejected(&self) -> u64 {
        self.rejected_leading + self.rejected_nonfinite + self.rejected_eval
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub tally: Tally,
    pub roots_offered: u64,
    pub roots_binned: u64,
    pub roots_dropped: u64,
    pub bounds: Bounds,
    /// Bounds came from the pilot pass (not the config).
    pub bounds_from_pilot: bool,
    pub bounds_degenerate: bool,
    pub pilot_samples: u64,
    pub workers: usize,
    pub wall_time: Duration,
}

impl RunSummary {
    /// More than 0.1% of samples failed to converge.
    pub fn excessive_no_convergence(&self) -> bool {
        self.tally.no_convergence * 1000 > self.tally.samples
    }

    /// Stable `key=value` lines.
    pub fn lines(&self) -> Vec<String> {
        let t = &self.tally;
        let b = &self.bounds;
        vec![
            format!("samples={}", t.samples),
            format!("solved={}", t.solved),
            format!("rejected={}", t.rejected()),
            format!("rejected_leading={}", t.rejected_leading),
            format!("rejected_nonfinite={}", t.rejected_nonfinite),
            format!("rejected_eval={}", t.rejected_eval),
            format!("failed={}", t.failed),
            format!("no_convergence={}", t.no_convergence),
            format!("roots_offered={}", self.roots_offered),
            format!("roots_binned={}", self.roots_binned),
            format!("dropped_roots={}", self.roots_dropped),
            format!("bounds={:?},{:?},{:?},{:?}", b.re_min, b.re_max, b.im_min, b.im_max),
            format!("bounds_source={}", if self.bounds_from_pilot { "pilot" } else { "config" }),
            format!("bounds_degenerate={}", self.bounds_degenerate),
            format!("pilot_samples={}", self.pilot_samples),
            format!("workers={}", self.workers),
            format!("wall_time_s={:.3}", self.wall_time.as_secs_f64()),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub grid: DensityGrid,
    pub summary: RunSummary,
}

/// Runs the whole sweep and returns the merged grid.
pub fn sweep(cfg: &RunConfig) -> Result<SweepResult, PipelineError> {
    let start = Instant::now();
    let workers = resolve_workers(cfg.workers);
    let total = cfg.plan.count;
    let (w, h) = (cfg.grid.width, cfg.grid.height);

    let mut tally = Tally::default();
    let (mut grid, pilot_n, from_pilot, degenerate) = match cfg.grid.bounds {
        Some(b) => (DensityGrid::new(w, h, b)?, 0, false, false),
        None => {
            let pilot_n = total.min(PILOT_SAMPLES);
            let parts = fold_chunks(
                0..pilot_n,
                CHUNK,
                workers,
                || (Tally::default(), Vec::new()),
                |(t, roots): &mut (Tally, Vec<Complex64>), range| {
                    for i in range {
                        let o = solve_sample(cfg, i);
                        t.record(&o);
                        if let SampleOutcome::Roots(r) = o {
                            roots.extend(r);
                        }
                    }
                },
            );
            let mut roots = Vec::new();
            for (t, r) in parts {
                tally.merge(&t);
                roots.extend(r);
            }
            let (bounds, degenerate) = match compute_bounds(&roots, cfg.grid.margin_fraction) {
                Ok(cb) => (cb.bounds, cb.degenerate),
                Err(DensityError::EmptyCloud) => (FALLBACK_BOUNDS, true),
                Err(e) => return Err(e.into()),
            };
            let mut grid = DensityGrid::new(w, h, bounds)?;
            grid.accumulate(roots);
            (grid, pilot_n, true, degenerate)
        }
    };

    let template = grid.empty_like();
    let parts = fold_chunks(
        pilot_n..total,
        CHUNK,
        workers,
        || (Tally::default(), template.clone()),
        |(t, g): &mut (Tally, DensityGrid), range| {
            for i in range {
                let o = solve_sample(cfg, i);
                t.record(&o);
                if let SampleOutcome::Roots(r) = o {
                    g.accumulate(r);
                }
            }
        },
    );
    for (t, g) in &parts {
        tally.merge(t);
        grid.merge_from(g)?;
    }

    let summary = RunSummary {
        tally,
        roots_offered: grid.total_offered(),
        roots_binned: grid.total_in(),
        roots_dropped: grid.total_dropped(),
        bounds: grid.bounds(),
        bounds_from_pilot: from_pilot,
        bounds_degenerate: degenerate,
        pilot_samples: pilot_n,
        workers,
        wall_time: start.elapsed(),
    };
    Ok(SweepResult { grid, summary })
}

/// Writes `re,im,sample_index` rows in sample order, at most `cap` rows.
/// Returns the number of rows written.
pub fn write_roots_csv<W: Write>(cfg: &RunConfig, out: W, cap: u64) -> std::io::Result<u64> {
    let mut out = BufWriter::new(out);
    writeln!(out, "re,im,sample_index")?;
    let mut rows = 0u64;
    'outer: for i in 0..cfg.plan.count {
        if let SampleOutcome::Roots(roots) = solve_sample(cfg, i) {
            for z in roots {
                if rows >= cap {
                    break 'outer;
                }
                writeln!(out, "{:?},{:?},{}", z.re, z.im, i)?;
                rows += 1;
            }
        }
    }
    out.flush()?;
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub grid: DensityGrid,
    pub image: Image,
    pub summary: RunSummary,
    pub csv_rows: Option<u64>,
}

/// Sweep, render and write every configured output.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    let SweepResult { grid, summary } = sweep(cfg)?;
    let image = render(&grid, &cfg.render);
    let out = &cfg.output;
    if let Some(path) = &out.image {
        image.save_png(path).map_err(|e| match e {
            RenderError::Io(io) => PipelineError::Io(path.clone(), io),
            other => PipelineError::Render(other),
        })?;
    }
    if let Some(path) = &out.grid_dump {
        std::fs::write(path, grid.dump()).map_err(|e| PipelineError::Io(path.clone(), e))?;
    }
    let csv_rows = match &out.roots_csv {
        Some(path) => {
            let f = File::create(path).map_err(|e| PipelineError::Io(path.clone(), e))?;
            Some(write_roots_csv(cfg, f, out.csv_cap).map_err(|e| PipelineError::Io(path.clone(), e))?)
        }
        None => None,
    };
    Ok(RunOutput {
        grid,
        image,
        summary,
        csv_rows,
    })
}
