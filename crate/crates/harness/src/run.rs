//! Point evaluation and parallel sweeps along tetrahedron edges.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use qrl_core::capacity::{self, OptimizerConfig};
use qrl_core::fisher::{self, Classification, FisherConfig};
use qrl_core::unitary::{edge_point, EdgeId};
use qrl_core::Params;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::report::{sort_rows, MeritRow, Metric, Status};

/// Everything that shapes a numerical run besides the point itself.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
    /// Random probe starts added to the grid at every point.
    pub extra_starts: usize,
    pub epsilon: f64,
    pub n: u64,
    pub capacity: OptimizerConfig<f64>,
    pub fisher: FisherConfig<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            extra_starts: 4,
            epsilon: 0.05,
            n: 1000,
            capacity: OptimizerConfig::default(),
            fisher: FisherConfig::default(),
        }
    }
}

impl Settings {
    /// Random probe starts for the point identified by `key`. Each point owns
    /// its own stream, so results do not depend on scheduling.
    pub fn probe_starts(&self, key: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(key);
        (0..self.extra_starts)
            .map(|_| [rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)])
            .collect()
    }

    pub fn capacity_for(&self, key: u64) -> OptimizerConfig<f64> {
        OptimizerConfig {
            extra_probe_starts: self.probe_starts(key),
            ..self.capacity.clone()
        }
    }

    pub fn fisher_for(&self, key: u64) -> FisherConfig<f64> {
        FisherConfig {
            extra_probe_starts: self.probe_starts(key),
            ..self.fisher.clone()
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| HarnessError::Usage(format!("cannot start {} workers: {e}", self.workers)))
    }
}

/// Stream key of an edge point.
pub fn point_key(edge: EdgeId, t: f64) -> u64 {
    let e = EdgeId::ALL.iter().position(|x| *x == edge).unwrap_or(0) as u64;
    ((e + 1) << 56) ^ (t.to_bits() >> 8)
}

/// `k` equally spaced values of `t` on `[0, 1]`.
pub fn sample_ts(k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..k).map(|i| i as f64 / (k - 1) as f64).collect(),
    }
}

/// Evaluates one metric at one point. Optimizer trouble is recorded in the
/// row status rather than raised, so a sweep always completes.
pub fn evaluate(label: &str, t: Option<f64>, params: &Params, metric: Metric, settings: &Settings, key: u64) -> MeritRow {
    let start = Instant::now();
    let mut row = MeritRow {
        edge: label.to_string(),
        t,
        alpha: params.as_array(),
        alpha_norm: params.norm(),
        metric,
        value: None,
        status: Status::NonConverged,
        probe: None,
        sigma: None,
        wall_time_ms: 0.0,
    };
    let outcome = match metric {
        Metric::H2 => capacity::best_probe_h2(params, &settings.capacity_for(key)).map(|b| {
            row.value = Some(b.h2);
            row.probe = Some([b.probe.phi1, b.probe.phi2]);
            row.sigma = Some(b.sigma.bloch());
            row.status = if b.trace.converged { Status::Ok } else { Status::NonConverged };
        }),
        Metric::Bound => {
            capacity::capacity_bound(params, settings.epsilon, settings.n, &settings.capacity_for(key)).map(|b| {
                row.value = Some(b.clamped_bound);
                row.probe = b.probe_opt.map(|p| [p.phi1, p.phi2]);
                row.sigma = b.sigma_opt.map(|s| s.bloch());
                row.status = if !b.optimizer_trace.converged {
                    Status::NonConverged
                } else if b.raw_bound < 0.0 {
                    Status::Clamped
                } else {
                    Status::Ok
                };
            })
        }
        Metric::Qfi => fisher::maximize_over_probe(params, &settings.fisher_for(key)).map(|q| {
            row.value = q.value;
            row.probe = Some([q.probe_opt.phi1, q.probe_opt.phi2]);
            row.status = match (q.classification, q.converged) {
                (Classification::Divergent, _) => Status::Divergent,
                (Classification::Finite, true) => Status::Ok,
                (Classification::Finite, false) => Status::NonConverged,
            };
        }),
    };
    if let Err(e) = outcome {
        log::error!("{label} t={t:?} {metric}: {e}");
        row.value = None;
        row.status = Status::NonConverged;
    }
    row.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    log::info!(
        "{label} t={} {metric} = {:?} ({}, {:.0} ms)",
        t.map(|t| format!("{t:.4}")).unwrap_or_default(),
        row.value,
        row.status.as_str(),
        row.wall_time_ms
    );
    row
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub edges: Vec<EdgeId>,
    pub metric: Metric,
    pub samples: usize,
}

/// Evaluates every `(edge, t)` point of the plan on the worker pool; rows
/// come back sorted by edge and `t`.
pub fn run_sweep(plan: &SweepPlan, settings: &Settings) -> Result<Vec<MeritRow>> {
    let ts = sample_ts(plan.samples);
    let mut points = Vec::with_capacity(plan.edges.len() * ts.len());
    for &edge in &plan.edges {
        for &t in &ts {
            points.push((edge, t, edge_point::<f64>(edge, t)?.params));
        }
    }
    let pool = settings.pool()?;
    let mut rows: Vec<MeritRow> = pool.install(|| {
        points
            .par_iter()
            .map(|(edge, t, p)| evaluate(edge.name(), Some(*t), p, plan.metric, settings, point_key(*edge, *t)))
            .collect()
    });
    sort_rows(&mut rows);
    Ok(rows)
}

/// Converts a row's `t` to the edge coordinate `t * pi/2`.
pub fn coordinate(t: f64) -> f64 {
    t * FRAC_PI_2
}

/// Locates the first sign change of `H2` along `edge` from sweep rows, then
/// refines it by bisection in `t` to width `tol`. Returns the edge
/// coordinate of the crossing.
pub fn h2_zero_crossing(edge: EdgeId, rows: &[MeritRow], settings: &Settings, tol: f64) -> Result<Option<f64>> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.edge == edge.name() && r.metric == Metric::H2)
        .filter_map(|r| Some((r.t?, r.value?)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let Some(w) = pts.windows(2).find(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0)) else {
        return Ok(None);
    };
    let h2_at = |t: f64| -> Result<f64> {
        let p = edge_point::<f64>(edge, t)?.params;
        Ok(capacity::best_probe_h2(&p, &settings.capacity_for(point_key(edge, t)))?.h2)
    };
    let (mut lo, mut hi) = (w[0].0, w[1].0);
    let lo_negative = w[0].1 < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let v = h2_at(mid)?;
        if !v.is_finite() {
            return Err(HarnessError::Numerical(format!("H2 not finite on {edge} at t={mid}")));
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(coordinate(0.5 * (lo + hi))))
}
