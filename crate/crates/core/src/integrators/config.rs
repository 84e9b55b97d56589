use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expaction::ExpBackend;
use crate::magnus::MagnusOrder;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// B-subflow, then the A-flow.
    Ab,
    /// A-flow, then the B-subflow anchored at the propagated state.
    Ba,
    /// `BA(dt/2)` after `AB(dt/2)`.
    Strang,
    SuccessiveStandard,
    SuccessiveMultiA,
    SuccessiveMultiB,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Ab,
        Scheme::Ba,
        Scheme::Strang,
        Scheme::SuccessiveStandard,
        Scheme::SuccessiveMultiA,
        Scheme::SuccessiveMultiB,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Ab => "ab",
            Scheme::Ba => "ba",
            Scheme::Strang => "strang",
            Scheme::SuccessiveStandard => "successive-standard",
            Scheme::SuccessiveMultiA => "successive-multi-a",
            Scheme::SuccessiveMultiB => "successive-multi-b",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.label() == s)
    }

    pub fn is_splitting(self) -> bool {
        matches!(self, Scheme::Ab | Scheme::Ba | Scheme::Strang)
    }
}

/// Quadrature rule for the correction integrals of the successive schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    #[default]
    Trapezoid,
    Midpoint,
    Simpson,
}

impl Quadrature {
    pub fn label(self) -> &'static str {
        match self {
            Quadrature::Trapezoid => "trapezoid",
            Quadrature::Midpoint => "midpoint",
            Quadrature::Simpson => "simpson",
        }
    }
}

/// Left-endpoint value of the first multiscale correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionStart {
    /// `u1(t) = 0`, consistent with the epsilon expansion.
    #[default]
    Zero,
    /// `u1(t) = u(t)`.
    Restart,
}

impl CorrectionStart {
    pub fn label(self) -> &'static str {
        match self {
            CorrectionStart::Zero => "zero",
            CorrectionStart::Restart => "restart",
        }
    }
}

/// How the standard successive scheme assembles its step result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Reconstruction {
    /// `u0 + u~_J`, the last Picard iterate.
    #[default]
    FinalIterate,
    /// `u0 + sum_j u~_j`.
    PaperSum,
}

impl Reconstruction {
    pub fn label(self) -> &'static str {
        match self {
            Reconstruction::FinalIterate => "final-iterate",
            Reconstruction::PaperSum => "paper-sum",
        }
    }
}

/// Configuration of one scheme. When read from a document, omitted fields
/// take the defaults of [`SchemeConfig::new`] for the named scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PartialSchemeConfig")]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Magnus exponent of the B-subflow inside the AB kernel.
    pub magnus_ab: MagnusOrder,
    /// Magnus exponent of the B-subflow inside the BA kernel.
    pub magnus_ba: MagnusOrder,
    pub quadrature: Quadrature,
    /// Number of corrections `J`.
    pub iterations: usize,
    pub epsilon: f64,
    pub correction_start: CorrectionStart,
    pub reconstruction: Reconstruction,
    pub backend: ExpBackend,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialSchemeConfig {
    #[serde(default = "default_scheme")]
    scheme: Scheme,
    magnus_ab: Option<MagnusOrder>,
    magnus_ba: Option<MagnusOrder>,
    quadrature: Option<Quadrature>,
    iterations: Option<usize>,
    epsilon: Option<f64>,
    correction_start: Option<CorrectionStart>,
    reconstruction: Option<Reconstruction>,
    backend: Option<ExpBackend>,
}

fn default_scheme() -> Scheme {
    Scheme::Strang
}

impl From<PartialSchemeConfig> for SchemeConfig {
    fn from(p: PartialSchemeConfig) -> Self {
        let d = SchemeConfig::new(p.scheme);
        SchemeConfig {
            scheme: p.scheme,
            magnus_ab: p.magnus_ab.unwrap_or(d.magnus_ab),
            magnus_ba: p.magnus_ba.unwrap_or(d.magnus_ba),
            quadrature: p.quadrature.unwrap_or(d.quadrature),
            iterations: p.iterations.unwrap_or(d.iterations),
            epsilon: p.epsilon.unwrap_or(d.epsilon),
            correction_start: p.correction_start.unwrap_or(d.correction_start),
            reconstruction: p.reconstruction.unwrap_or(d.reconstruction),
            backend: p.backend.unwrap_or(d.backend),
        }
    }
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self::new(Scheme::Strang)
    }
}

impl SchemeConfig {
    /// Defaults for `scheme`. Lie kernels use the first-order exponent in AB
    /// and the trapezoidal second-order exponent in BA; Strang uses the
    /// second-order exponent in both halves.
    pub fn new(scheme: Scheme) -> Self {
        let magnus_ab = match scheme {
            Scheme::Strang => MagnusOrder::SecondTrapezoid,
            _ => MagnusOrder::First,
        };
        let iterations = match scheme {
            Scheme::SuccessiveStandard => 3,
            Scheme::SuccessiveMultiA => 2,
            _ => 1,
        };
        Self {
            scheme,
            magnus_ab,
            magnus_ba: MagnusOrder::SecondTrapezoid,
            quadrature: Quadrature::Trapezoid,
            iterations,
            epsilon: 1.0,
            correction_start: CorrectionStart::Zero,
            reconstruction: Reconstruction::FinalIterate,
            backend: ExpBackend::default(),
        }
    }

    pub fn with_magnus(mut self, ab: MagnusOrder, ba: MagnusOrder) -> Self {
        self.magnus_ab = ab;
        self.magnus_ba = ba;
        self
    }

    pub fn with_iterations(mut self, j: usize) -> Self {
        self.iterations = j;
        self
    }

    pub fn with_quadrature(mut self, q: Quadrature) -> Self {
        self.quadrature = q;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_correction_start(mut self, c: CorrectionStart) -> Self {
        self.correction_start = c;
        self
    }

    pub fn with_reconstruction(mut self, r: Reconstruction) -> Self {
        self.reconstruction = r;
        self
    }

    pub fn with_backend(mut self, backend: ExpBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.backend.validate()?;
        if self.iterations < 1 {
            return Err(Error::InvalidConfig("iteration depth J must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidConfig(format!("epsilon must lie in (0, 1], got {}", self.epsilon)));
        }
        match self.scheme {
            Scheme::SuccessiveMultiA if self.iterations > 2 => Err(Error::InvalidConfig(
                "the multiscale-A hierarchy is available for J = 1 and J = 2 only".into(),
            )),
            Scheme::SuccessiveMultiB if self.iterations != 1 => Err(Error::InvalidConfig(
                "the multiscale-B scheme has a single correction (J = 1)".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Magnus column of the output tables.
    pub fn magnus_label(&self) -> String {
        match self.scheme {
            Scheme::Ab => self.magnus_ab.label().to_string(),
            Scheme::Ba => self.magnus_ba.label().to_string(),
            Scheme::Strang => format!("{}+{}", self.magnus_ab.label(), self.magnus_ba.label()),
            _ => "none".to_string(),
        }
    }

    pub fn quadrature_label(&self) -> &'static str {
        if self.scheme.is_splitting() {
            "none"
        } else {
            self.quadrature.label()
        }
    }

    pub fn reconstruction_label(&self) -> String {
        match self.scheme {
            Scheme::SuccessiveStandard => format!("{}-j{}", self.reconstruction.label(), self.iterations),
            Scheme::SuccessiveMultiA => format!("sum-j{}", self.iterations),
            Scheme::SuccessiveMultiB => "sum-j1".to_string(),
            _ => "none".to_string(),
        }
    }

    pub fn correction_label(&self) -> &'static str {
        match self.scheme {
            Scheme::SuccessiveMultiA => self.correction_start.label(),
            _ => "none",
        }
    }

    /// Human-readable identification of the whole configuration.
    pub fn describe(&self) -> String {
        let mut s = self.scheme.label().to_string();
        if self.scheme.is_splitting() {
            s.push_str(&format!("[{}]", self.magnus_label()));
        } else {
            s.push_str(&format!(
                "[{},{},{}",
                self.quadrature_label(),
                self.reconstruction_label(),
                self.correction_label()
            ));
            if self.epsilon != 1.0 {
                s.push_str(&format!(",eps={}", self.epsilon));
            }
            s.push(']');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_scheme() {
        assert_eq!(SchemeConfig::new(Scheme::SuccessiveStandard).iterations, 3);
        assert_eq!(SchemeConfig::new(Scheme::SuccessiveMultiA).iterations, 2);
        assert_eq!(SchemeConfig::new(Scheme::Ab).magnus_ab, MagnusOrder::First);
        assert_eq!(SchemeConfig::new(Scheme::Ba).magnus_ba, MagnusOrder::SecondTrapezoid);
        assert_eq!(SchemeConfig::new(Scheme::Strang).magnus_ab, MagnusOrder::SecondTrapezoid);
        for s in Scheme::ALL {
            SchemeConfig::new(s).validate().unwrap();
            assert_eq!(Scheme::parse(s.label()), Some(s));
        }
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let bad = [
            SchemeConfig::new(Scheme::SuccessiveStandard).with_iterations(0),
            SchemeConfig::new(Scheme::SuccessiveMultiA).with_iterations(3),
            SchemeConfig::new(Scheme::SuccessiveMultiB).with_iterations(2),
            SchemeConfig::new(Scheme::SuccessiveMultiA).with_epsilon(0.0),
            SchemeConfig::new(Scheme::SuccessiveMultiA).with_epsilon(1.5),
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))), "{cfg:?}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SchemeConfig::new(Scheme::SuccessiveStandard)
            .with_reconstruction(Reconstruction::PaperSum)
            .with_quadrature(Quadrature::Simpson);
        let text = toml::to_string(&cfg).unwrap();
        let back: SchemeConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: SchemeConfig = toml::from_str("scheme = \"ba\"\nmagnus_ba = \"omega1\"").unwrap();
        assert_eq!(partial.scheme, Scheme::Ba);
        assert_eq!(partial.magnus_ba, MagnusOrder::First);
        assert!(toml::from_str::<SchemeConfig>("schema = 1").is_err());
    }
}
