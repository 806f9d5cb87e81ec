//! Allocation policies.
//!
//! CH-AS and B-AS pull each arm twice and then always pull the arm with the
//! largest upper-confidence index on its variance-per-pull. The other three
//! policies are baselines: a GAFS-MAX reconstruction, round-robin, and the
//! static allocation that knows the true variances.
//!
//! The GAFS-MAX baseline here is rebuilt from a one-line description of the
//! original algorithm (proportional to empirical variances, with a forced
//! minimum of `ceil(sqrt(t))` pulls per arm at round `t`). It is not the
//! published algorithm and should not be cited as such.

use std::fmt;
use std::str::FromStr;

use crate::dists::ArmSpec;
use crate::error::{Error, Result};
use crate::stats::RunningStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    ChAs,
    BAs,
    GafsMax,
    Uniform,
    Oracle,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::ChAs,
        StrategyKind::BAs,
        StrategyKind::GafsMax,
        StrategyKind::Uniform,
        StrategyKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::ChAs => "ch-as",
            StrategyKind::BAs => "b-as",
            StrategyKind::GafsMax => "gafs-max",
            StrategyKind::Uniform => "uniform",
            StrategyKind::Oracle => "oracle",
        }
    }

    /// Smallest budget an episode of this kind can run with.
    pub fn min_budget(self, k: usize) -> u64 {
        match self {
            StrategyKind::Uniform | StrategyKind::Oracle => k as u64,
            _ => 2 * k as u64,
        }
    }

    /// Whether the policy starts by pulling every arm twice.
    pub fn has_init_phase(self) -> bool {
        matches!(self, StrategyKind::ChAs | StrategyKind::BAs | StrategyKind::GafsMax)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy `{}`", s.trim())))
    }
}

/// Which leading term to use for the B-AS constant `a`.
///
/// `Appendix` uses `2 sqrt(c1 log(c2/delta))`, which the B-AS pull and regret
/// constants are built on. `MainText` uses the smaller `sqrt(2 c1 log(c2/delta))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AFormula {
    MainText,
    #[default]
    Appendix,
}

impl fmt::Display for AFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AFormula::MainText => "main",
            AFormula::Appendix => "appendix",
        })
    }
}

impl FromStr for AFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "main" | "main-text" => Ok(AFormula::MainText),
            "appendix" => Ok(AFormula::Appendix),
            other => Err(Error::InvalidParameter(format!("unknown a-formula `{other}`"))),
        }
    }
}

/// User-facing strategy configuration. `None` fields are filled in per
/// episode by [`StrategyParams::resolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    pub kind: StrategyKind,
    pub delta: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub a_override: Option<f64>,
    pub a_formula: AFormula,
    /// Known upper bound on the sum of variances. When set (and no explicit
    /// `a`), B-AS runs in single-knob mode with `a = sqrt(2 sigma_bar ln n)`.
    pub sigma_bar: Option<f64>,
}

impl StrategyParams {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            delta: None,
            c1: None,
            c2: None,
            a_override: None,
            a_formula: AFormula::default(),
            sigma_bar: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a_override = Some(a);
        self
    }

    pub fn with_subgaussian(mut self, c1: f64, c2: f64) -> Self {
        self.c1 = Some(c1);
        self.c2 = Some(c2);
        self
    }

    pub fn with_sigma_bar(mut self, sigma_bar: f64) -> Self {
        self.sigma_bar = Some(sigma_bar);
        self
    }

    pub fn with_a_formula(mut self, formula: AFormula) -> Self {
        self.a_formula = formula;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("delta must lie in (0, 1), got {d}"));
            }
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 1.0) {
                    return bad(format!("{name} must be >= 1, got {v}"));
                }
            }
        }
        if let Some(a) = self.a_override {
            if !(a.is_finite() && a > 0.0) {
                return bad(format!("a must be > 0, got {a}"));
            }
        }
        if let Some(s) = self.sigma_bar {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("sigma_bar must be > 0, got {s}"));
            }
        }
        Ok(())
    }

    /// Default confidence level: `n^(-5/2)` for CH-AS, `n^(-7/2)` for B-AS.
    pub fn default_delta(kind: StrategyKind, n: u64) -> Option<f64> {
        match kind {
            StrategyKind::ChAs => Some((n as f64).powf(-2.5)),
            StrategyKind::BAs => Some((n as f64).powf(-3.5)),
            _ => None,
        }
    }

    /// Fill in every defaulted parameter for an episode of budget `n` on `arms`.
    /// Unset sub-Gaussian constants come from [`instance_subgaussian`].
    pub fn resolve(&self, arms: &[ArmSpec], n: u64) -> Result<ResolvedParams> {
        self.validate()?;
        if arms.is_empty() {
            return Err(Error::InvalidInstance("no arms".into()));
        }
        let delta = self.delta.or(Self::default_delta(self.kind, n));
        let mut a = None;
        let (mut c1, mut c2) = (None, None);
        if self.kind == StrategyKind::BAs {
            let delta = delta.expect("b-as always has a delta");
            let (auto1, auto2) = instance_subgaussian(arms, self.sigma_bar);
            let r1 = self.c1.unwrap_or(auto1);
            let r2 = self.c2.unwrap_or(auto2);
            c1 = Some(r1);
            c2 = Some(r2);
            a = Some(match (self.a_override, self.sigma_bar) {
                (Some(a), _) => a,
                (None, Some(sb)) => single_knob_a(sb, n),
                (None, None) => compute_a(r1, r2, delta, n, self.a_formula)?,
            });
        }
        Ok(ResolvedParams {
            kind: self.kind,
            delta,
            c1,
            c2,
            a,
        })
    }
}

impl fmt::Display for StrategyParams {
    /// Renders as `kind` or `kind(key=value, ...)` listing only explicit fields.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut opts = Vec::new();
        if let Some(d) = self.delta {
            opts.push(format!("delta={d}"));
        }
        if let Some(c) = self.c1 {
            opts.push(format!("c1={c}"));
        }
        if let Some(c) = self.c2 {
            opts.push(format!("c2={c}"));
        }
        if let Some(a) = self.a_override {
            opts.push(format!("a={a}"));
        }
        if self.a_formula != AFormula::default() {
            opts.push(format!("a_formula={}", self.a_formula));
        }
        if let Some(s) = self.sigma_bar {
            opts.push(format!("sigma_bar={s}"));
        }
        if opts.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}({})", self.kind, opts.join(", "))
        }
    }
}

impl FromStr for StrategyParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, body) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(')').ok_or_else(|| {
                    Error::InvalidParameter(format!("missing ')' in strategy `{s}`"))
                })?;
                (&s[..open], Some(inner))
            }
            None => (s, None),
        };
        let mut p = StrategyParams::new(name.parse()?);
        for opt in body.into_iter().flat_map(|b| b.split(',')).map(str::trim) {
            if opt.is_empty() {
                continue;
            }
            let (key, value) = opt
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{opt}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("`{key}` expects a number, got `{value}`")))
            };
            match key {
                "delta" => p.delta = Some(num()?),
                "c1" => p.c1 = Some(num()?),
                "c2" => p.c2 = Some(num()?),
                "a" => p.a_override = Some(num()?),
                "a_formula" => p.a_formula = value.parse()?,
                "sigma_bar" => p.sigma_bar = Some(num()?),
                other => {
                    return Err(Error::InvalidParameter(format!("unknown strategy option `{other}`")))
                }
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// One `(c1, c2)` pair valid for every arm of an instance.
///
/// Takes the largest per-arm constants, except that Gaussian arms contribute
/// `c1 = 2 * sigma_bar` (twice the true sum of variances when no bound is
/// given). Both are floored at 1; enlarging either constant keeps the tail
/// bound valid.
pub fn instance_subgaussian(arms: &[ArmSpec], sigma_bar: Option<f64>) -> (f64, f64) {
    let cover = sigma_bar.unwrap_or_else(|| arms.iter().map(ArmSpec::variance).sum());
    arms.iter()
        .map(|arm| {
            if arm.is_gaussian() {
                (2.0 * cover, 1.0)
            } else {
                arm.subgaussian_params()
            }
        })
        .fold((1.0f64, 1.0f64), |(c1, c2), (p1, p2)| (c1.max(p1), c2.max(p2)))
}

/// Fully determined parameters for one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedParams {
    pub kind: StrategyKind,
    pub delta: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub a: Option<f64>,
}

/// Single-knob B-AS exploration constant: `sqrt(2 sigma_bar ln n)`.
pub fn single_knob_a(sigma_bar: f64, n: u64) -> f64 {
    (2.0 * sigma_bar * (n as f64).ln()).sqrt()
}

/// CH-AS index: `(var + 3 sqrt(log(1/delta) / (2 T))) / T`.
pub fn ch_index(var_biased: f64, pulls: u64, delta: f64) -> f64 {
    ch_index_with_log(var_biased, pulls, (1.0 / delta).ln())
}

fn ch_index_with_log(var_biased: f64, pulls: u64, log_inv_delta: f64) -> f64 {
    let t = pulls as f64;
    (var_biased + 3.0 * (log_inv_delta / (2.0 * t)).sqrt()) / t
}

/// B-AS index:
/// `(sd^2 + 4 a sd sqrt(log(2/delta)/T) + 4 a^2 log(2/delta)/T) / T`.
pub fn b_index(sd_unbiased: f64, pulls: u64, delta: f64, a: f64) -> f64 {
    b_index_with_log(sd_unbiased, pulls, (2.0 / delta).ln(), a)
}

fn b_index_with_log(sd: f64, pulls: u64, log_two_delta: f64, a: f64) -> f64 {
    let t = pulls as f64;
    (sd * sd + 4.0 * a * sd * (log_two_delta / t).sqrt() + 4.0 * a * a * log_two_delta / t) / t
}

/// The B-AS exploration constant `a` for budget `n`.
///
/// Both variants share the second term
/// `sqrt(c1 delta (1 + c2 + log(c2/delta))) / ((1 - delta) sqrt(2 log(2/delta))) * sqrt(n)`.
pub fn compute_a(c1: f64, c2: f64, delta: f64, n: u64, formula: AFormula) -> Result<f64> {
    if !(c1 >= 1.0 && c2 >= 1.0) {
        return Err(Error::Domain(format!("need c1, c2 >= 1, got ({c1}, {c2})")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if delta >= c2 {
        return Err(Error::Domain(format!("delta = {delta} must be below c2 = {c2}")));
    }
    if n == 0 {
        return Err(Error::Domain("budget must be positive".into()));
    }
    let log_c2 = (c2 / delta).ln();
    let lead = match formula {
        AFormula::Appendix => 2.0 * (c1 * log_c2).sqrt(),
        AFormula::MainText => (2.0 * c1 * log_c2).sqrt(),
    };
    let tail = (c1 * delta * (1.0 + c2 + log_c2)).sqrt()
        / ((1.0 - delta) * (2.0 * (2.0 / delta).ln()).sqrt())
        * (n as f64).sqrt();
    Ok(lead + tail)
}

/// Integer pull counts proportional to `variances`, summing to `n`, rounded
/// by largest remainder (ties to the lower index).
pub fn optimal_static_allocation(variances: &[f64], n: u64) -> Result<Vec<u64>> {
    if variances.is_empty() {
        return Err(Error::InvalidInstance("no arms".into()));
    }
    if let Some(v) = variances.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidInstance(format!("variance must be > 0, got {v}")));
    }
    if n < variances.len() as u64 {
        return Err(Error::InvalidInstance(format!(
            "budget {n} is below the number of arms {}",
            variances.len()
        )));
    }
    let total: f64 = variances.iter().sum();
    let targets: Vec<f64> = variances.iter().map(|v| v / total * n as f64).collect();
    // Snap targets that sit within rounding noise of an integer so that
    // rescaling the variances cannot flip a floor.
    let snapped: Vec<u64> = targets
        .iter()
        .map(|t| {
            let r = t.round();
            if (t - r).abs() <= 1e-9 * t.max(1.0) {
                r as u64
            } else {
                t.floor() as u64
            }
        })
        .collect();
    let mut base = if snapped.iter().sum::<u64>() <= n {
        snapped
    } else {
        targets.iter().map(|t| t.floor() as u64).collect()
    };
    let rest = n - base.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = targets[i] - base[i] as f64;
        let rj = targets[j] - base[j] as f64;
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for &i in order.iter().take(rest as usize) {
        base[i] += 1;
    }
    Ok(base)
}

/// Per-episode state of an allocation policy.
#[derive(Debug, Clone)]
pub struct StrategyState {
    params: ResolvedParams,
    n: u64,
    t: u64,
    stats: Vec<RunningStats>,
    targets: Option<Vec<u64>>,
    log_term: f64,
}

impl StrategyState {
    /// `true_variances` is required by the oracle and ignored otherwise.
    pub fn new(
        params: ResolvedParams,
        k: usize,
        n: u64,
        true_variances: Option<&[f64]>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("no arms".into()));
        }
        let min = params.kind.min_budget(k);
        if n < min {
            return Err(Error::InfeasibleBudget {
                n,
                k,
                min,
                kind: params.kind.name(),
            });
        }
        let targets = match params.kind {
            StrategyKind::Oracle => {
                let vars = true_variances.ok_or_else(|| {
                    Error::InvalidParameter("the oracle needs the true variances".into())
                })?;
                if vars.len() != k {
                    return Err(Error::InvalidInstance(format!(
                        "{} variances for {k} arms",
                        vars.len()
                    )));
                }
                let targets = optimal_static_allocation(vars, n)?;
                if let Some(arm) = targets.iter().position(|&c| c == 0) {
                    return Err(Error::InvalidInstance(format!(
                        "budget {n} leaves arm {arm} with no oracle pulls"
                    )));
                }
                Some(targets)
            }
            _ => None,
        };
        let log_term = match (params.kind, params.delta) {
            (StrategyKind::ChAs, Some(d)) => (1.0 / d).ln(),
            (StrategyKind::BAs, Some(d)) => (2.0 / d).ln(),
            (StrategyKind::ChAs | StrategyKind::BAs, None) => {
                return Err(Error::InvalidParameter("delta is required".into()))
            }
            _ => 0.0,
        };
        if params.kind == StrategyKind::BAs && params.a.is_none() {
            return Err(Error::InvalidParameter("b-as needs a resolved `a`".into()));
        }
        Ok(Self {
            params,
            n,
            t: 0,
            stats: vec![RunningStats::new(); k],
            targets,
            log_term,
        })
    }

    pub fn params(&self) -> &ResolvedParams {
        &self.params
    }

    pub fn budget(&self) -> u64 {
        self.n
    }

    /// Number of pulls made so far.
    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn stats(&self) -> &[RunningStats] {
        &self.stats
    }

    pub fn pulls(&self) -> Vec<u64> {
        self.stats.iter().map(RunningStats::count).collect()
    }

    /// The oracle's per-arm target counts.
    pub fn targets(&self) -> Option<&[u64]> {
        self.targets.as_deref()
    }

    /// Index of the arm to pull next (0-based).
    pub fn select_arm(&self) -> Result<usize> {
        if self.t >= self.n {
            return Err(Error::BudgetExhausted { t: self.t, n: self.n });
        }
        let k = self.stats.len() as u64;
        match self.params.kind {
            StrategyKind::Uniform => Ok((self.t % k) as usize),
            StrategyKind::Oracle => {
                let targets = self.targets.as_ref().expect("oracle targets");
                Ok(self
                    .stats
                    .iter()
                    .zip(targets)
                    .position(|(s, &target)| s.count() < target)
                    .expect("targets sum to n"))
            }
            _ if self.t < 2 * k => Ok((self.t / 2) as usize),
            StrategyKind::ChAs => Ok(argmax(self.stats.iter().map(|s| {
                ch_index_with_log(s.variance_biased().unwrap_or(0.0), s.count(), self.log_term)
            }))),
            StrategyKind::BAs => {
                let a = self.params.a.expect("checked in new");
                Ok(argmax(self.stats.iter().map(|s| {
                    b_index_with_log(s.sd_unbiased().unwrap_or(0.0), s.count(), self.log_term, a)
                })))
            }
            StrategyKind::GafsMax => Ok(self.gafs_select()),
        }
    }

    /// GAFS-MAX reconstruction: force-pull the least-pulled arm below
    /// `ceil(sqrt(t))`, otherwise the arm with the largest `var / T`.
    pub fn gafs_select(&self) -> usize {
        let threshold = ceil_sqrt(self.t);
        let starved = self
            .stats
            .iter()
            .enumerate()
            .filter(|(_, s)| s.count() < threshold)
            .min_by_key(|(i, s)| (s.count(), *i));
        match starved {
            Some((i, _)) => i,
            None => argmax(
                self.stats
                    .iter()
                    .map(|s| s.variance_biased().unwrap_or(0.0) / s.count() as f64),
            ),
        }
    }

    pub fn observe(&mut self, arm: usize, x: f64) {
        self.stats[arm].update(x);
        self.t += 1;
    }
}

/// Smallest integer `r` with `r * r >= t`.
fn ceil_sqrt(t: u64) -> u64 {
    let mut r = (t as f64).sqrt() as u64;
    while r * r < t {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= t {
        r -= 1;
    }
    r
}

/// First index of the maximum.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}
