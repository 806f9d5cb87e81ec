//! Arm distributions: sampling, exact moments and sub-Gaussian tail constants.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::RngState;

/// The distribution families an arm can follow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmKind {
    Gaussian { mean: f64, variance: f64 },
    /// Uniform on `{-1, +1}`.
    Rademacher,
    Bernoulli { p: f64 },
    Uniform01,
    /// Takes `hi` with probability `p`, otherwise `lo`.
    ShiftedScaledBernoulli { lo: f64, hi: f64, p: f64 },
}

/// A validated arm distribution. Every constructible value has strictly
/// positive variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmSpec {
    kind: ArmKind,
}

impl ArmSpec {
    pub fn new(kind: ArmKind) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match kind {
            ArmKind::Gaussian { mean, variance } => {
                if !mean.is_finite() {
                    return bad(format!("gaussian mean must be finite, got {mean}"));
                }
                if !(variance.is_finite() && variance > 0.0) {
                    return bad(format!("gaussian variance must be > 0, got {variance}"));
                }
            }
            ArmKind::Bernoulli { p } => {
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("bernoulli p must lie in (0, 1), got {p}"));
                }
            }
            ArmKind::ShiftedScaledBernoulli { lo, hi, p } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("scaledbern needs finite lo < hi, got ({lo}, {hi})"));
                }
                if !(p > 0.0 && p < 1.0) {
                    return bad(format!("scaledbern p must lie in (0, 1), got {p}"));
                }
            }
            ArmKind::Rademacher | ArmKind::Uniform01 => {}
        }
        Ok(Self { kind })
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::new(ArmKind::Gaussian { mean, variance })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(ArmKind::Bernoulli { p })
    }

    pub fn scaled_bernoulli(lo: f64, hi: f64, p: f64) -> Result<Self> {
        Self::new(ArmKind::ShiftedScaledBernoulli { lo, hi, p })
    }

    pub fn rademacher() -> Self {
        Self {
            kind: ArmKind::Rademacher,
        }
    }

    pub fn uniform01() -> Self {
        Self {
            kind: ArmKind::Uniform01,
        }
    }

    pub fn kind(&self) -> ArmKind {
        self.kind
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, ArmKind::Gaussian { .. })
    }

    /// Closed support interval; infinite for the Gaussian.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            ArmKind::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ArmKind::Rademacher => (-1.0, 1.0),
            ArmKind::Bernoulli { .. } | ArmKind::Uniform01 => (0.0, 1.0),
            ArmKind::ShiftedScaledBernoulli { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn is_bounded(&self) -> bool {
        let (lo, hi) = self.support();
        lo.is_finite() && hi.is_finite()
    }

    /// One i.i.d. draw.
    ///
    /// Gaussian draws use the Marsaglia polar method, discarding the second
    /// variate of each accepted pair so that a draw consumes state only
    /// through the stream itself.
    pub fn sample(&self, rng: &mut RngState) -> f64 {
        match self.kind {
            ArmKind::Gaussian { mean, variance } => mean + variance.sqrt() * standard_normal(rng),
            ArmKind::Rademacher => {
                if rng.uniform() < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            ArmKind::Bernoulli { p } => {
                if rng.uniform() < p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmKind::Uniform01 => rng.uniform(),
            ArmKind::ShiftedScaledBernoulli { lo, hi, p } => {
                if rng.uniform() < p {
                    hi
                } else {
                    lo
                }
            }
        }
    }

    /// Exact `(mean, variance)`.
    pub fn true_moments(&self) -> (f64, f64) {
        match self.kind {
            ArmKind::Gaussian { mean, variance } => (mean, variance),
            ArmKind::Rademacher => (0.0, 1.0),
            ArmKind::Bernoulli { p } => (p, p * (1.0 - p)),
            ArmKind::Uniform01 => (0.5, 1.0 / 12.0),
            ArmKind::ShiftedScaledBernoulli { lo, hi, p } => {
                let w = hi - lo;
                (lo + p * w, p * (1.0 - p) * w * w)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.true_moments().0
    }

    pub fn variance(&self) -> f64 {
        self.true_moments().1
    }

    /// Constants `(c1, c2)` with `P(|X - mean| >= eps) <= c2 * exp(-eps^2 / c1)`.
    ///
    /// A variable confined to an interval of width `w` has `|X - mean| <= w`,
    /// so `(w^2, e)` works: the right side is at least 1 whenever `eps <= w`.
    /// That gives `(1, e)` on `[0, 1]` and `(4, e)` for Rademacher. A single
    /// Gaussian uses `(2 variance, 1)` from the bound `erfc(x) <= exp(-x^2)`.
    pub fn subgaussian_params(&self) -> (f64, f64) {
        match self.kind {
            ArmKind::Gaussian { variance, .. } => (2.0 * variance, 1.0),
            _ => {
                let (lo, hi) = self.support();
                let w = hi - lo;
                (w * w, std::f64::consts::E)
            }
        }
    }
}

fn standard_normal(rng: &mut RngState) -> f64 {
    loop {
        let u = 2.0 * rng.uniform() - 1.0;
        let v = 2.0 * rng.uniform() - 1.0;
        let s = u * u + v * v;
        if s < 1.0 && s > 0.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

impl fmt::Display for ArmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ArmKind::Gaussian { mean, variance } => write!(f, "gaussian({mean},{variance})"),
            ArmKind::Rademacher => f.write_str("rademacher"),
            ArmKind::Bernoulli { p } => write!(f, "bernoulli({p})"),
            ArmKind::Uniform01 => f.write_str("uniform01"),
            ArmKind::ShiftedScaledBernoulli { lo, hi, p } => write!(f, "scaledbern({lo},{hi},{p})"),
        }
    }
}

impl FromStr for ArmSpec {
    type Err = Error;

    /// Parses the literals `gaussian(mean,var)`, `rademacher`, `bernoulli(p)`,
    /// `uniform01` and `scaledbern(lo,hi,p)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) => {
                let close = s
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidDistribution(format!("missing ')' in `{s}`")))?;
                let args = close[open + 1..]
                    .split(',')
                    .map(|a| {
                        a.trim().parse::<f64>().map_err(|_| {
                            Error::InvalidDistribution(format!("bad number `{}` in `{s}`", a.trim()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (s[..open].trim(), args)
            }
            None => (s, Vec::new()),
        };
        let arity = |want: usize| {
            if args.len() == want {
                Ok(())
            } else {
                Err(Error::InvalidDistribution(format!(
                    "`{name}` takes {want} argument(s), got {}",
                    args.len()
                )))
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "gaussian" => {
                arity(2)?;
                Self::gaussian(args[0], args[1])
            }
            "rademacher" => {
                arity(0)?;
                Ok(Self::rademacher())
            }
            "bernoulli" => {
                arity(1)?;
                Self::bernoulli(args[0])
            }
            "uniform01" => {
                arity(0)?;
                Ok(Self::uniform01())
            }
            "scaledbern" => {
                arity(3)?;
                Self::scaled_bernoulli(args[0], args[1], args[2])
            }
            other => Err(Error::InvalidDistribution(format!("unknown distribution `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_support() {
        let d = ArmSpec::rademacher();
        for seed in 0..50 {
            let mut rng = RngState::from_seed(seed);
            let x = d.sample(&mut rng);
            assert!(x == -1.0 || x == 1.0);
        }
    }

    #[test]
    fn near_certain_bernoulli() {
        // 1e4 draws at p = 0.999: mean below 0.99 needs > 100 zeros where 10
        // are expected; the binomial tail for that is astronomically small.
        let d = ArmSpec::bernoulli(0.999).unwrap();
        let mut rng = RngState::from_seed(5);
        let m = (0..10_000).map(|_| d.sample(&mut rng)).sum::<f64>() / 1e4;
        assert!((0.99..=1.0).contains(&m), "{m}");
    }

    #[test]
    fn gaussian_moments_from_draws() {
        let d = ArmSpec::gaussian(0.0, 4.0).unwrap();
        let mut rng = RngState::from_seed(11);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(m.abs() < 0.01, "mean {m}");
        assert!((v - 4.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn exact_moments() {
        assert_eq!(ArmSpec::gaussian(0.0, 4.0).unwrap().true_moments(), (0.0, 4.0));
        assert_eq!(ArmSpec::rademacher().true_moments(), (0.0, 1.0));
        assert_eq!(ArmSpec::bernoulli(0.5).unwrap().true_moments(), (0.5, 0.25));
        let (m, v) = ArmSpec::scaled_bernoulli(-1.0, 3.0, 0.25).unwrap().true_moments();
        assert_eq!(m, 0.0);
        assert_eq!(v, 3.0);
    }

    #[test]
    fn subgaussian_constants() {
        let e = std::f64::consts::E;
        assert_eq!(ArmSpec::bernoulli(0.3).unwrap().subgaussian_params(), (1.0, e));
        assert_eq!(ArmSpec::uniform01().subgaussian_params(), (1.0, e));
        assert_eq!(ArmSpec::gaussian(0.0, 1.0).unwrap().subgaussian_params(), (2.0, 1.0));
        assert_eq!(ArmSpec::rademacher().subgaussian_params(), (4.0, e));
    }

    #[test]
    fn rademacher_constants_hold_on_grid() {
        // |X| = 1 surely: the tail probability is 1 up to eps = 1, then 0.
        let (c1, c2) = ArmSpec::rademacher().subgaussian_params();
        for i in 0..=4000 {
            let eps = i as f64 / 1000.0;
            let p = if eps <= 1.0 { 1.0 } else { 0.0 };
            assert!(p <= c2 * (-eps * eps / c1).exp() + 1e-15, "eps = {eps}");
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(ArmSpec::gaussian(0.0, 0.0).is_err());
        assert!(ArmSpec::gaussian(0.0, -1.0).is_err());
        assert!(ArmSpec::bernoulli(0.0).is_err());
        assert!(ArmSpec::bernoulli(1.0).is_err());
        assert!(ArmSpec::scaled_bernoulli(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn literals_round_trip() {
        for lit in [
            "gaussian(0,4)",
            "rademacher",
            "bernoulli(0.25)",
            "uniform01",
            "scaledbern(-2,0.5,0.125)",
        ] {
            let d: ArmSpec = lit.parse().unwrap();
            assert_eq!(d.to_string(), lit);
            assert_eq!(d.to_string().parse::<ArmSpec>().unwrap(), d);
        }
        assert_eq!(
            " gaussian( 1.5 , 2 ) ".parse::<ArmSpec>().unwrap(),
            ArmSpec::gaussian(1.5, 2.0).unwrap()
        );
        assert!("gaussian(0)".parse::<ArmSpec>().is_err());
        assert!("gaussian(0,-4)".parse::<ArmSpec>().is_err());
        assert!("cauchy(0,1)".parse::<ArmSpec>().is_err());
    }
}
