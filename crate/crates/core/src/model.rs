//! Core model vocabulary: attention-utility shapes, economy parameters, club
//! partitions, and per-ability outcome records shared by every solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Concave utility of receiving attention, as a function of follower mass.
///
/// Every admitted shape satisfies I(0) = 0, I' > 0 and I'' < 0 on (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AttentionConfig", into = "AttentionConfig")]
pub enum AttentionSpec {
    /// I(x) = sqrt(x) / 2
    SqrtHalf,
    /// I(x) = ln(1 + x)
    Log1p,
    /// I(x) = coefficient * x^exponent, coefficient > 0, 0 < exponent < 1
    Power { coefficient: f64, exponent: f64 },
}

/// Flat config-file form of [`AttentionSpec`]: a `kind` plus optional shape
/// parameters. Strict — keys that do not apply to the chosen kind are errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttentionConfig {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
}

impl TryFrom<AttentionConfig> for AttentionSpec {
    type Error = Error;

    fn try_from(cfg: AttentionConfig) -> Result<Self> {
        let spec = match cfg.kind.as_str() {
            "sqrt_half" | "log1p" => {
                if cfg.coefficient.is_some() || cfg.exponent.is_some() {
                    return Err(Error::config(format!(
                        "attention kind `{}` takes no coefficient or exponent",
                        cfg.kind
                    )));
                }
                if cfg.kind == "sqrt_half" {
                    AttentionSpec::SqrtHalf
                } else {
                    AttentionSpec::Log1p
                }
            }
            "power" => {
                let coefficient = cfg.coefficient.ok_or_else(|| {
                    Error::config("attention kind `power` requires `coefficient`")
                })?;
                let exponent = cfg.exponent.ok_or_else(|| {
                    Error::config("attention kind `power` requires `exponent`")
                })?;
                AttentionSpec::Power { coefficient, exponent }
            }
            other => {
                return Err(Error::config(format!(
                    "unknown attention kind `{other}` (expected sqrt_half, log1p, or power)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<AttentionSpec> for AttentionConfig {
    fn from(spec: AttentionSpec) -> Self {
        match spec {
            AttentionSpec::SqrtHalf => AttentionConfig {
                kind: "sqrt_half".into(),
                coefficient: None,
                exponent: None,
            },
            AttentionSpec::Log1p => AttentionConfig {
                kind: "log1p".into(),
                coefficient: None,
                exponent: None,
            },
            AttentionSpec::Power { coefficient, exponent } => AttentionConfig {
                kind: "power".into(),
                coefficient: Some(coefficient),
                exponent: Some(exponent),
            },
        }
    }
}

impl AttentionSpec {
    pub fn validate(&self) -> Result<()> {
        if let AttentionSpec::Power { coefficient, exponent } = self {
            if !(coefficient.is_finite() && *coefficient > 0.0) {
                return Err(Error::config(format!(
                    "power attention coefficient must be positive and finite, got {coefficient}"
                )));
            }
            if !(exponent.is_finite() && *exponent > 0.0 && *exponent < 1.0) {
                return Err(Error::config(format!(
                    "power attention exponent must lie strictly inside (0, 1), got {exponent}"
                )));
            }
        }
        Ok(())
    }

    /// Utility of holding follower mass `x`, for `x` in [0, 1].
    pub fn value(&self, x: f64) -> Result<f64> {
        check_mass(x)?;
        Ok(self.value_raw(x))
    }

    /// Marginal utility at follower mass `x` in [0, 1]. Shapes whose slope
    /// diverges at zero return `f64::INFINITY` at x = 0 (sentinel value).
    pub fn derivative(&self, x: f64) -> Result<f64> {
        check_mass(x)?;
        Ok(self.derivative_raw(x))
    }

    #[inline]
    pub(crate) fn value_raw(&self, x: f64) -> f64 {
        match self {
            AttentionSpec::SqrtHalf => x.sqrt() / 2.0,
            AttentionSpec::Log1p => x.ln_1p(),
            AttentionSpec::Power { coefficient, exponent } => coefficient * x.powf(*exponent),
        }
    }

    #[inline]
    pub(crate) fn derivative_raw(&self, x: f64) -> f64 {
        match self {
            AttentionSpec::SqrtHalf => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    0.25 / x.sqrt()
                }
            }
            AttentionSpec::Log1p => 1.0 / (1.0 + x),
            AttentionSpec::Power { coefficient, exponent } => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    coefficient * exponent * x.powf(exponent - 1.0)
                }
            }
        }
    }

    /// Whether marginal utility grows without bound as mass approaches zero.
    pub fn derivative_diverges_at_zero(&self) -> bool {
        matches!(self, AttentionSpec::SqrtHalf | AttentionSpec::Power { .. })
    }
}

fn check_mass(x: f64) -> Result<()> {
    if x.is_nan() || !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("follower mass {x} outside [0, 1]")));
    }
    Ok(())
}

/// Economy parameters: content opportunity cost, monitoring cost, and the
/// attention-utility shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Quality threshold below which a feed is not worth following on content
    /// alone (the opportunity cost of consuming it).
    pub q0: f64,
    /// Cost of monitoring one reciprocal relationship.
    pub c: f64,
    /// Attention-utility shape.
    pub attention: AttentionSpec,
}

impl ModelParams {
    pub fn new(q0: f64, c: f64, attention: AttentionSpec) -> Result<Self> {
        let params = ModelParams { q0, c, attention };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q0.is_finite() && (0.0..=1.0).contains(&self.q0)) {
            return Err(Error::config(format!("q0 must lie in [0, 1], got {}", self.q0)));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::config(format!(
                "c must be non-negative and finite, got {}",
                self.c
            )));
        }
        self.attention.validate()
    }

    /// Parse from a TOML document with keys `q0`, `c`, `attention.kind`, and
    /// (for the power shape) `attention.coefficient` / `attention.exponent`.
    /// Unknown keys are rejected with the offending key named.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let params: ModelParams =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("model params always serialize")
    }
}

/// One mutual-following club: the half-open ability interval (lower, upper].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Club {
    pub lower: f64,
    pub upper: f64,
}

impl Club {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && 0.0 <= lower && lower < upper) {
            return Err(Error::domain(format!(
                "club bounds must satisfy 0 <= lower < upper, got ({lower}, {upper}]"
            )));
        }
        Ok(Club { lower, upper })
    }

    pub fn size(&self) -> f64 {
        self.upper - self.lower
    }

    /// Half-open membership test: lower < ability <= upper.
    pub fn contains(&self, ability: f64) -> bool {
        self.lower < ability && ability <= self.upper
    }
}

/// How an equilibrium object was constructed, including the stopping rule the
/// club iteration used. Recorded in every serialized equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Stopping {
    /// Benchmark profile with no reciprocal following at all.
    NoBarter,
    /// Iterate until the marginal club is empty or reaches ability zero.
    Literal,
    /// Like `Literal`, but additionally stop before appending a club whose
    /// formation gain falls below `min_gain`.
    GainFloor { min_gain: f64 },
    /// Hand-assembled candidate partition (not solver output).
    Candidate,
}

/// A partition of sub-threshold abilities into mutual-following clubs,
/// ordered from the highest-ability club downward. Abilities above `q0`
/// are followed organically and never barter; abilities at or below the
/// lurker threshold (and outside every club) produce nothing and lurk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousEquilibrium {
    pub params: ModelParams,
    /// Clubs in descending ability order; contiguous from q0 for solver output.
    pub clubs: Vec<Club>,
    /// Lowest club lower bound, or q0 when no clubs form.
    pub lurker_threshold: f64,
    pub stopping: Stopping,
}

/// Role of one ability level under a club partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Ability above q0: followed by everyone, never barters.
    Star,
    /// Member of `clubs[k]`.
    Member(usize),
    /// Neither organic content producer nor club member.
    Lurker,
}

impl HomogeneousEquilibrium {
    /// Assemble a candidate partition for verification studies. Checks only
    /// basic shape (bounds inside [0, q0], descending, disjoint); solver
    /// invariants are deliberately not required so perturbed partitions can
    /// be scored by the verifier.
    pub fn candidate(params: ModelParams, clubs: Vec<Club>) -> Result<Self> {
        params.validate()?;
        for club in &clubs {
            if !(club.lower.is_finite() && club.upper.is_finite()) {
                return Err(Error::domain("club bounds must be finite".to_string()));
            }
            if club.lower < 0.0 || club.lower >= club.upper || club.upper > params.q0 + 1e-12 {
                return Err(Error::domain(format!(
                    "club ({}, {}] must satisfy 0 <= lower < upper <= q0 = {}",
                    club.lower, club.upper, params.q0
                )));
            }
        }
        for pair in clubs.windows(2) {
            if pair[1].upper > pair[0].lower + 1e-12 {
                return Err(Error::domain(
                    "clubs must be disjoint and ordered from high to low ability".to_string(),
                ));
            }
        }
        let lurker_threshold = clubs.last().map_or(params.q0, |c| c.lower);
        Ok(HomogeneousEquilibrium { params, clubs, lurker_threshold, stopping: Stopping::Candidate })
    }

    /// Role of one ability under this partition (half-open club membership).
    pub fn classify(&self, ability: f64) -> Role {
        if ability > self.params.q0 {
            return Role::Star;
        }
        for (k, club) in self.clubs.iter().enumerate() {
            if club.contains(ability) {
                return Role::Member(k);
            }
        }
        Role::Lurker
    }
}

/// Per-ability equilibrium outcomes. Relationship quantities are masses in
/// [0, 1]; the last four fields are utility components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomePoint {
    pub ability: f64,
    pub followers: f64,
    pub followees: f64,
    /// Reciprocal (bartered) relationship mass.
    pub bartered: f64,
    /// Mass of mutual relationships of any origin.
    pub bidirectional: f64,
    /// followers / followees; 0 when there are no followers.
    pub ratio: f64,
    pub consumption_u: f64,
    pub attention_u: f64,
    pub monitoring_c: f64,
    /// consumption_u + attention_u − monitoring_c.
    pub total_v: f64,
}

impl OutcomePoint {
    /// Ratio convention shared by all solvers: no followers means ratio 0
    /// (this also covers the q0 = 1 economy where followees are 0 too).
    pub fn ratio_of(followers: f64, followees: f64) -> f64 {
        if followers == 0.0 {
            0.0
        } else {
            followers / followees
        }
    }
}

/// Outcomes evaluated on an ability grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeCurve {
    pub points: Vec<OutcomePoint>,
}
