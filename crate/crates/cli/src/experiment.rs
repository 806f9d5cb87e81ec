//! Running experiment specs and writing their CSV outputs.
//!
//! Results CSV columns, in order:
//!
//! `strategy, n, runs, seed, regret_mean, regret_stderr, rescaled_regret,
//! global_loss`, then `loss_k, loss_stderr_k, mean_pulls_k` for each arm
//! `k = 1..K`, then `instance, inv_lambda_min`, and finally
//! `ch_event_freq, b_event_freq` when event checking is enabled.
//!
//! Reals are written with 12 significant digits; files are UTF-8 with LF
//! line endings.

use std::io::Write;

use alloc_bandit::{
    aggregate, bound_report, run_episodes, with_workers, AggregateStats, BanditInstance, EventCheck,
    StrategyKind, StrategyParams,
};

use crate::config::ExperimentSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub strategy: String,
    pub seed: u64,
    pub instance: String,
    pub inv_lambda_min: f64,
    pub stats: AggregateStats,
    /// Frequencies of the CH and B concentration events.
    pub events: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub instance: String,
    pub n: u64,
    pub bound: &'static str,
    pub arm: Option<usize>,
    pub value: f64,
    pub flags: String,
}

/// Event confidence levels for a strategy: its own `delta` (and `a`) where it
/// defines them, the defaults otherwise.
fn event_check(instance: &BanditInstance, params: &StrategyParams, n: u64) -> alloc_bandit::Result<EventCheck> {
    let as_kind = |kind| StrategyParams {
        kind,
        ..params.clone()
    };
    let ch = as_kind(StrategyKind::ChAs).resolve(instance.arms(), n)?;
    let b = as_kind(StrategyKind::BAs).resolve(instance.arms(), n)?;
    Ok(EventCheck {
        ch_delta: ch.delta.expect("ch-as delta"),
        b_delta: b.delta.expect("b-as delta"),
        b_a: b.a.expect("b-as a"),
    })
}

fn instance_label(instance: &BanditInstance) -> String {
    instance.arms().iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

/// Runs every (strategy, n) pair of `spec` with `workers` threads.
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> anyhow::Result<Vec<ResultRow>> {
    let seed = spec.seed()?;
    let label = instance_label(&spec.instance);
    let inv_lambda_min = 1.0 / spec.instance.summary().lambda_min;
    let mut rows = Vec::new();
    for params in &spec.strategies {
        for &n in &spec.n_grid {
            let check = if spec.check_events {
                Some(event_check(&spec.instance, params, n)?)
            } else {
                None
            };
            let results = with_workers(workers, || {
                run_episodes(&spec.instance, params, n, spec.runs, seed, check)
            })?;
            let stats = aggregate(&spec.instance, n, &results);
            let events = check.map(|_| {
                let runs = results.len() as f64;
                let freq = |f: fn(&alloc_bandit::EventOutcome) -> bool| {
                    results.iter().filter(|r| r.events.as_ref().is_some_and(f)).count() as f64 / runs
                };
                (freq(|e| e.ch), freq(|e| e.b))
            });
            log::info!(
                "{params} n={n}: rescaled regret {:.4} (stderr {:.4})",
                stats.rescaled_regret,
                stats.rescaled_regret_stderr()
            );
            rows.push(ResultRow {
                strategy: params.to_string(),
                seed,
                instance: label.clone(),
                inv_lambda_min,
                stats,
                events,
            });
        }
    }
    Ok(rows)
}

/// Bound values for every budget of `spec`.
pub fn bounds_rows(spec: &ExperimentSpec) -> anyhow::Result<Vec<BoundsRow>> {
    let label = instance_label(&spec.instance);
    let mut rows = Vec::new();
    for &n in &spec.n_grid {
        for r in bound_report(spec.instance.summary(), n, spec.instance.all_gaussian())? {
            rows.push(BoundsRow {
                instance: label.clone(),
                n,
                bound: r.name,
                arm: r.arm.map(|a| a + 1),
                value: r.value,
                flags: r.flags_label(),
            });
        }
    }
    Ok(rows)
}

/// Formats like C's `%.12g`.
pub fn fmt_real(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..SIG).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn results_header(k: usize, with_events: bool) -> Vec<String> {
    let mut h: Vec<String> = [
        "strategy",
        "n",
        "runs",
        "seed",
        "regret_mean",
        "regret_stderr",
        "rescaled_regret",
        "global_loss",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for arm in 1..=k {
        h.push(format!("loss_{arm}"));
        h.push(format!("loss_stderr_{arm}"));
        h.push(format!("mean_pulls_{arm}"));
    }
    h.push("instance".into());
    h.push("inv_lambda_min".into());
    if with_events {
        h.push("ch_event_freq".into());
        h.push("b_event_freq".into());
    }
    h
}

/// Writes rows that share one arm count.
pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> anyhow::Result<()> {
    let Some(first) = rows.first() else {
        anyhow::bail!("no result rows to write");
    };
    let k = first.stats.loss.len();
    if rows.iter().any(|r| r.stats.loss.len() != k) {
        anyhow::bail!("rows with different arm counts cannot share one CSV");
    }
    let with_events = rows.iter().any(|r| r.events.is_some());
    let mut w = csv_writer(out);
    w.write_record(results_header(k, with_events))?;
    for r in rows {
        let s = &r.stats;
        let mut rec = vec![
            r.strategy.clone(),
            s.n.to_string(),
            s.runs.to_string(),
            r.seed.to_string(),
            fmt_real(s.regret),
            fmt_real(s.regret_stderr),
            fmt_real(s.rescaled_regret),
            fmt_real(s.global_loss),
        ];
        for arm in 0..k {
            rec.push(fmt_real(s.loss[arm]));
            rec.push(fmt_real(s.loss_stderr[arm]));
            rec.push(fmt_real(s.mean_pulls[arm]));
        }
        rec.push(r.instance.clone());
        rec.push(fmt_real(r.inv_lambda_min));
        if with_events {
            let (ch, b) = r.events.unwrap_or((f64::NAN, f64::NAN));
            rec.push(fmt_real(ch));
            rec.push(fmt_real(b));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bounds<W: Write>(rows: &[BoundsRow], out: W) -> anyhow::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["instance", "n", "bound", "arm", "value", "flags"])?;
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.bound.to_string(),
            r.arm.map(|a| a.to_string()).unwrap_or_default(),
            fmt_real(r.value),
            r.flags.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable bounds table.
pub fn format_bounds_table(rows: &[BoundsRow]) -> String {
    let mut s = format!("{:<22} {:>4} {:>7} {:>20}  {}\n", "bound", "arm", "n", "value", "flags");
    for r in rows {
        s.push_str(&format!(
            "{:<22} {:>4} {:>7} {:>20}  {}\n",
            r.bound,
            r.arm.map(|a| a.to_string()).unwrap_or_else(|| "-".into()),
            r.n,
            fmt_real(r.value),
            r.flags
        ));
    }
    s
}
