//! Randomized verification batteries.
//!
//! Each check draws its instances from a ChaCha8 stream keyed by the seed, the
//! check id and the instance index, so results do not depend on the thread
//! count. Instances run on the current rayon pool.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::smoothness::PsiMode;

mod derivatives;
mod duality;
pub mod gen;
mod hilbert;
mod projections;
mod smoothness;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Duality,
    Smoothness,
    Projections,
    Derivatives,
    Hilbert,
    All,
}

impl Suite {
    pub const BATTERIES: [Suite; 5] = [
        Suite::Duality,
        Suite::Smoothness,
        Suite::Projections,
        Suite::Derivatives,
        Suite::Hilbert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Smoothness => "smoothness",
            Suite::Projections => "projections",
            Suite::Derivatives => "derivatives",
            Suite::Hilbert => "hilbert",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownSuite(pub String);

impl fmt::Display for UnknownSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown suite {:?} (expected duality, smoothness, projections, derivatives, hilbert or all)",
            self.0
        )
    }
}

impl std::error::Error for UnknownSuite {}

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Suite::All]
            .into_iter()
            .chain(Suite::BATTERIES)
            .find(|x| x.as_str() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides the per-check instance counts; `None` keeps the defaults.
    pub instances: Option<usize>,
    pub psi: PsiModeName,
    pub audit_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: None,
            psi: PsiModeName::Analytic,
            audit_samples: 10_000,
        }
    }
}

/// Serializable mirror of [`PsiMode`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiModeName {
    #[default]
    Analytic,
    Numeric,
}

impl From<PsiModeName> for PsiMode {
    fn from(m: PsiModeName) -> Self {
        match m {
            PsiModeName::Analytic => PsiMode::Analytic,
            PsiModeName::Numeric => PsiMode::Numeric,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    /// The statement being checked.
    pub anchor: String,
    #[serde(with = "extended_float")]
    pub max_error: f64,
    #[serde(with = "extended_float")]
    pub tolerance: f64,
    pub pass: bool,
    pub instances: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// JSON has no infinities or NaN; those are written as `"inf"`, `"-inf"` and `"nan"`.
mod extended_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *x {
            x if x.is_finite() => s.serialize_f64(x),
            x if x.is_nan() => s.serialize_str("nan"),
            x if x > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Number(f64),
        Tag(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Wire::deserialize(d)? {
            Wire::Number(x) => Ok(x),
            Wire::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!(
                    "expected a number, \"inf\", \"-inf\" or \"nan\", got {other:?}"
                ))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub instances: Option<usize>,
    pub psi: PsiModeName,
    pub audit_samples: usize,
    pub total_instances: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub suites: Vec<SuiteReport>,
    pub environment: Environment,
    pub pass: bool,
}

impl VerificationReport {
    pub fn checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.suites.iter().flat_map(|s| s.checks.iter())
    }

    /// `(id, pass)` for every check, in order.
    pub fn decisions(&self) -> Vec<(String, bool)> {
        self.checks().map(|c| (c.id.clone(), c.pass)).collect()
    }
}

/// Key for a check's random streams.
pub(crate) struct Ctx {
    pub cfg: VerifyConfig,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl Ctx {
    pub fn rng(&self, check: &str, index: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.cfg.seed.to_le_bytes());
        key[8..16].copy_from_slice(&fnv1a(check).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index as u64);
        rng
    }

    pub fn count(&self, default: usize) -> usize {
        self.cfg.instances.unwrap_or(default).max(1)
    }

    /// Scaled count for checks whose default is a multiple of the base count.
    pub fn scaled(&self, default: usize, base: usize) -> usize {
        match self.cfg.instances {
            None => default,
            Some(n) => (n * default).div_ceil(base).max(1),
        }
    }

    pub fn psi(&self) -> PsiMode {
        self.cfg.psi.into()
    }

    /// Runs `n` instances of `f` and keeps the `Some` outputs in index order.
    pub fn samples<T, F>(&self, id: &str, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng) -> Result<Option<T>> + Sync,
    {
        let out: Vec<Result<Option<T>>> = (0..n).into_par_iter().map(|i| f(&mut self.rng(id, i))).collect();
        let mut kept = Vec::with_capacity(n);
        for r in out {
            if let Some(v) = r? {
                kept.push(v);
            }
        }
        Ok(kept)
    }

    /// A check whose error is the largest per-instance error.
    pub fn max_check<F>(&self, id: &str, anchor: &str, tolerance: f64, n: usize, f: F) -> CheckResult
    where
        F: Fn(&mut ChaCha8Rng) -> Result<Option<f64>> + Sync,
    {
        finish(id, anchor, tolerance, self.samples(id, n, f))
    }
}

/// Folds per-instance errors into a check; a NaN error fails the check.
pub(crate) fn finish(id: &str, anchor: &str, tolerance: f64, errors: Result<Vec<f64>>) -> CheckResult {
    match errors {
        Ok(errs) => {
            let nan = errs.iter().any(|e| e.is_nan());
            let max_error = if nan {
                f64::NAN
            } else {
                errs.iter().fold(0.0_f64, |m, e| m.max(*e))
            };
            CheckResult {
                id: id.to_string(),
                anchor: anchor.to_string(),
                max_error,
                tolerance,
                pass: !errs.is_empty() && !nan && max_error <= tolerance,
                instances: errs.len(),
                note: errs.is_empty().then(|| "no instances evaluated".to_string()),
            }
        }
        Err(e) => CheckResult {
            id: id.to_string(),
            anchor: anchor.to_string(),
            max_error: f64::INFINITY,
            tolerance,
            pass: false,
            instances: 0,
            note: Some(e.to_string()),
        },
    }
}

fn run_battery(ctx: &Ctx, suite: Suite) -> SuiteReport {
    let checks = match suite {
        Suite::Duality => duality::run(ctx),
        Suite::Smoothness => smoothness::run(ctx),
        Suite::Projections => projections::run(ctx),
        Suite::Derivatives => derivatives::run(ctx),
        Suite::Hilbert => hilbert::run(ctx),
        Suite::All => unreachable!("expanded by run"),
    };
    let pass = checks.iter().all(|c| c.pass);
    SuiteReport { suite, checks, pass }
}

/// Runs one battery, or all of them, on the current rayon pool.
pub fn run(suite: Suite, cfg: VerifyConfig) -> VerificationReport {
    let ctx = Ctx { cfg };
    let batteries: Vec<Suite> = match suite {
        Suite::All => Suite::BATTERIES.to_vec(),
        s => vec![s],
    };
    let suites: Vec<SuiteReport> = batteries.into_iter().map(|s| run_battery(&ctx, s)).collect();
    let pass = suites.iter().all(|s| s.pass);
    let total_instances = suites.iter().flat_map(|s| &s.checks).map(|c| c.instances).sum();
    VerificationReport {
        suite,
        suites,
        environment: Environment {
            seed: cfg.seed,
            instances: cfg.instances,
            psi: cfg.psi,
            audit_samples: cfg.audit_samples,
            total_instances,
        },
        pass,
    }
}
