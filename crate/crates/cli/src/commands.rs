use serde_json::json;
use svqkd::keyrate::{dw_rate, dw_rate_werner};
use svqkd::mcsim::{simulate, SimConfig, Source};
use svqkd::noise::{accuracy_from_detector, Accuracy, DetectorParams};
use svqkd::thresholds::{critical_accuracy, threshold_accuracy, thresholds_table, werner_boundary};

use crate::args::{
    DetectorArgs, KeyrateArgs, SimulateArgs, SourceKind, ThresholdsArgs, WernerArgs, WernerTable,
};
use crate::error::{usage, CliError};
use crate::output::{Cell, OutputRecord, Table};

/// `steps` evenly spaced points from `lo` to `hi`, both ends exact.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn require_steps(name: &str, steps: usize) -> Result<(), CliError> {
    if steps < 2 {
        return usage(format!("--{name} must be at least 2, got {steps}"));
    }
    Ok(())
}

pub fn thresholds(args: &ThresholdsArgs) -> Result<OutputRecord, CliError> {
    let (lo, hi, cap) = (args.n_min, args.n_max, args.max_parties);
    if lo < 3 || lo > hi || hi > cap {
        return usage(format!(
            "party range must satisfy 3 <= n-min <= n-max <= {cap}, got {lo}..={hi}"
        ));
    }
    let mut table = Table::new("thresholds", &["n", "p_cr", "p_th"]);
    for row in thresholds_table(lo, hi)? {
        table.push(vec![row.n.into(), row.p_cr.into(), row.p_th.into()]);
    }
    let params = json!({ "n_min": lo, "n_max": hi, "max_parties": cap });
    Ok(OutputRecord::new("thresholds", None, params, vec![table]))
}

pub fn keyrate_curve(args: &KeyrateArgs) -> Result<OutputRecord, CliError> {
    let (start, end) = (args.p_start, args.p_end);
    if !(0.5 <= start && start < end && end <= 1.0) {
        return usage(format!(
            "accuracy grid must satisfy 1/2 <= p-start < p-end <= 1, got [{start}, {end}]"
        ));
    }
    require_steps("steps", args.steps)?;
    let mut table = Table::new(
        "keyrate",
        &["p", "q_L_raw", "q_L", "H_A_given_E", "H_A_given_rest", "r_dw", "abort_flag"],
    );
    for p in linspace(start, end, args.steps) {
        let r = dw_rate(Accuracy::new(p)?, args.n)?;
        table.push(vec![
            p.into(),
            r.q_l_raw.into(),
            r.q_l.into(),
            r.h_a_given_e.into(),
            r.h_a_given_rest.into(),
            r.r_dw.into(),
            r.aborted.into(),
        ]);
    }
    let params = json!({ "n": args.n, "p_start": start, "p_end": end, "steps": args.steps });
    Ok(OutputRecord::new("keyrate-curve", None, params, vec![table]))
}

pub fn werner_grid(args: &WernerArgs) -> Result<OutputRecord, CliError> {
    require_steps("v-steps", args.v_steps)?;
    require_steps("p-steps", args.p_steps)?;
    let vs = linspace(0.0, 1.0, args.v_steps);
    let ps = linspace(0.5, 1.0, args.p_steps);

    let mut grid = Table::new("grid", &["v", "p", "r_dw"]);
    for &v in &vs {
        for &p in &ps {
            let r = dw_rate_werner(Accuracy::new(p)?, v)?;
            grid.push(vec![v.into(), p.into(), r.r_dw.into()]);
        }
    }

    // the boundary is undefined at p = 1/2, where no visibility helps
    let boundary_ps: Vec<f64> = ps.iter().copied().filter(|&p| p > 0.5).collect();
    let mut boundary = Table::new("boundary", &["p", "v_threshold"]);
    for pt in werner_boundary(&boundary_ps)? {
        boundary.push(vec![pt.p.into(), pt.v_threshold.into()]);
    }

    let table_name = match args.table {
        WernerTable::Grid => "grid",
        WernerTable::Boundary => "boundary",
    };
    let params = json!({ "v_steps": args.v_steps, "p_steps": args.p_steps, "table": table_name });
    let mut rec = OutputRecord::new("werner-grid", None, params, vec![grid, boundary]);
    rec.csv_table = match args.table {
        WernerTable::Grid => 0,
        WernerTable::Boundary => 1,
    };
    Ok(rec)
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<OutputRecord, CliError> {
    let source = match (args.source, args.v) {
        (SourceKind::Ghz, None) => Source::Ghz,
        (SourceKind::Ghz, Some(_)) => return usage("--v applies only to --source werner"),
        (SourceKind::Werner, Some(v)) => Source::Werner { v },
        (SourceKind::Werner, None) => return usage("--source werner requires --v"),
    };
    let mut cfg = SimConfig::new(args.n, args.rounds, Accuracy::new(args.p)?, source, args.seed);
    cfg.first_party_weights = match args.setting_weights[..] {
        [a, b, c, d] => [a, b, c, d],
        _ => return usage("--setting-weights takes exactly four values"),
    };
    cfg.workers = args.workers;
    cfg.retain_raw_keys = args.retain_keys;
    cfg.validate()?;

    let report = simulate(&cfg)?;
    let mut table = Table::new(
        "estimates",
        &["quantity", "estimate", "std_error", "analytic", "z_score"],
    );
    table.push(vec![
        "si".into(),
        report.si.value.into(),
        report.si.std_error.into(),
        report.si_predicted.into(),
        report.si_z.into(),
    ]);
    let key = &report.key_consistency;
    table.push(vec![
        "key_consistency".into(),
        key.pooled.value.into(),
        key.pooled.std_error.into(),
        report.key_predicted.into(),
        report.key_z.into(),
    ]);
    for s in &key.per_setting {
        let label: String = s.setting.iter().map(|b| char::from(b'0' + b)).collect();
        table.push(vec![
            Cell::Text(format!("key_consistency:{label}")),
            s.estimate.value.into(),
            s.estimate.std_error.into(),
            report.key_predicted.into(),
            s.estimate.z_score(report.key_predicted).into(),
        ]);
    }

    let params = json!({
        "n": args.n,
        "p": args.p,
        "rounds": args.rounds,
        "source": match args.source { SourceKind::Ghz => "ghz", SourceKind::Werner => "werner" },
        "v": args.v,
        "setting_weights": args.setting_weights,
        "retain_keys": args.retain_keys,
    });
    let mut rec = OutputRecord::new("simulate", Some(args.seed), params, vec![table]);
    rec.report = Some(serde_json::to_value(&report)?);
    Ok(rec)
}

pub fn detector(args: &DetectorArgs) -> Result<OutputRecord, CliError> {
    let params = DetectorParams::new(args.q1, args.q2, args.policy.into())?;
    let p = accuracy_from_detector(&params)?.value();
    let policy = match args.policy {
        crate::args::PolicyArg::FairSampling => "fair-sampling",
        crate::args::PolicyArg::BindUndetected => "bind-undetected",
    };
    let mut table = Table::new(
        "detector",
        &["q1", "q2", "policy", "p", "n", "p_cr", "p_th", "violates_si", "positive_key"],
    );
    for &n in &args.n {
        let p_cr = critical_accuracy(n)?;
        let p_th = threshold_accuracy(n)?;
        let (violates, positive) = (p > p_cr, p > p_th);
        eprintln!(
            "p = {p:.6}: {} at n={n}; {} at n={n}",
            if violates { "violates SI" } else { "no SI violation" },
            if positive { "positive key" } else { "no positive key" },
        );
        table.push(vec![
            args.q1.into(),
            args.q2.into(),
            policy.into(),
            p.into(),
            n.into(),
            p_cr.into(),
            p_th.into(),
            violates.into(),
            positive.into(),
        ]);
    }
    let echo = json!({ "q1": args.q1, "q2": args.q2, "policy": policy, "n": args.n });
    Ok(OutputRecord::new("detector", None, echo, vec![table]))
}
