//! Vertex reports, bound tables and single-point QFI reports.

use std::io::Write;

use qrl_core::capacity::{self, BoundParams};
use qrl_core::channel::ProbeState;
use qrl_core::fisher::{self, AvgQfiResult, Classification};
use qrl_core::unitary::{UnitaryParams, Vertex};
use qrl_core::Params;

use crate::error::Result;
use crate::report::{MeritRow, Metric, Status};
use crate::run::{evaluate, Settings};

fn vertex_key(v: Vertex) -> u64 {
    Vertex::ALL.iter().position(|x| *x == v).unwrap_or(0) as u64 + 1
}

/// `h2`, `bound` and `qfi` rows for one vertex.
pub fn vertex_rows(v: Vertex, settings: &Settings) -> Vec<MeritRow> {
    let p = v.params::<f64>();
    let key = vertex_key(v);
    [Metric::H2, Metric::Bound, Metric::Qfi]
        .into_iter()
        .map(|m| evaluate(v.name(), None, &p, m, settings, key))
        .collect()
}

/// One line per `(epsilon, n)`: the optimal `delta`, the correction and the
/// raw and clamped bounds for a fixed unitary.
pub fn bound_table<W: Write>(
    out: W,
    params: &Params,
    probe: Option<[f64; 2]>,
    epsilons: &[f64],
    ns: &[u64],
    settings: &Settings,
) -> Result<()> {
    let cfg = settings.capacity_for(0);
    let (h2, probe) = match probe {
        Some([a, b]) => {
            let probe = ProbeState::new(a, b)?;
            let iso = qrl_core::channel::stinespring_isometry(params, &probe)?;
            let rho = qrl_core::channel::choi_bf(&iso);
            (capacity::h2_conditional(&rho, &cfg)?.value, probe)
        }
        None => {
            let best = capacity::best_probe_h2(params, &cfg)?;
            (best.h2, best.probe)
        }
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha_x",
        "alpha_y",
        "alpha_z",
        "probe_phi1",
        "probe_phi2",
        "h2",
        "epsilon",
        "n",
        "delta_star",
        "correction",
        "raw_bound",
        "clamped_bound",
        "status",
    ])?;
    let a = params.as_array();
    for &eps in epsilons {
        for &n in ns {
            let b = capacity::one_shot_lower_bound(h2, eps, n)?;
            let status = if b.raw_bound < 0.0 { Status::Clamped } else { Status::Ok };
            w.write_record([
                format!("{:?}", a[0]),
                format!("{:?}", a[1]),
                format!("{:?}", a[2]),
                format!("{:?}", probe.phi1),
                format!("{:?}", probe.phi2),
                format!("{h2:?}"),
                format!("{eps:?}"),
                n.to_string(),
                format!("{:?}", b.delta_star),
                format!("{:?}", b.correction),
                format!("{:?}", b.raw_bound),
                format!("{:?}", b.clamped_bound),
                status.as_str().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Correction term of the bound at the optimal `delta`.
pub fn correction(epsilon: f64, n: u64) -> Result<f64> {
    Ok(BoundParams::optimal(epsilon, n)?.correction()?)
}

/// Averaged QFI at a fixed probe, or maximized over the probe when none is
/// given.
pub fn qfi_result(params: &UnitaryParams<f64>, probe: Option<[f64; 2]>, settings: &Settings) -> Result<AvgQfiResult<f64>> {
    let cfg = settings.fisher_for(0);
    Ok(match probe {
        Some([a, b]) => fisher::evaluate_schedule(params, &ProbeState::new(a, b)?, &cfg)?,
        None => fisher::maximize_over_probe(params, &cfg)?,
    })
}

/// One line per cutoff, with the classification and extrapolation repeated
/// on every line.
pub fn qfi_table<W: Write>(out: W, params: &Params, result: &AvgQfiResult<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha_x",
        "alpha_y",
        "alpha_z",
        "probe_phi1",
        "probe_phi2",
        "eta",
        "avg_trace_qfi",
        "slope",
        "classification",
        "extrapolated",
        "cr_scalar",
    ])?;
    let a = params.as_array();
    let class = match result.classification {
        Classification::Finite => "finite",
        Classification::Divergent => "divergent",
    };
    for &(eta, v) in &result.eta_trace {
        w.write_record([
            format!("{:?}", a[0]),
            format!("{:?}", a[1]),
            format!("{:?}", a[2]),
            format!("{:?}", result.probe_opt.phi1),
            format!("{:?}", result.probe_opt.phi2),
            format!("{eta:?}"),
            format!("{v:?}"),
            format!("{:?}", result.slope),
            class.to_string(),
            result.value.map(|v| format!("{v:?}")).unwrap_or_default(),
            format!("{:?}", result.cr_scalar),
        ])?;
    }
    w.flush()?;
    Ok(())
}
