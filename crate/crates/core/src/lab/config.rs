use serde::{Deserialize, Deserializer, Serialize};

use crate::cell::CellResolution;
use crate::forms::BcFamily;
use crate::geometry::{Interval, PeriodicProfile};

use super::LabError;

/// Which limit behaviour the exponent `α` predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `α > 5/2`: weak conditions survive.
    Stability,
    /// `α = 5/2`: weak conditions plus the `K1` boundary energy.
    Strange,
    /// `3/2 < α < 5/2`: strong conditions on `Γ`.
    Mild,
    /// `α ≤ 1`: Dirichlet conditions on `Γ`.
    Strong,
    /// `1 < α ≤ 3/2`: no prediction.
    Exploratory,
}

impl Regime {
    pub fn for_alpha(alpha: f64) -> Regime {
        if (alpha - 2.5).abs() < 1e-12 {
            Regime::Strange
        } else if alpha > 2.5 {
            Regime::Stability
        } else if alpha > 1.5 {
            Regime::Mild
        } else if alpha <= 1.0 {
            Regime::Strong
        } else {
            Regime::Exploratory
        }
    }

    /// The limit operator predicted for this regime, if any.
    pub fn expected(self) -> Option<Reference> {
        match self {
            Regime::Stability => Some(Reference::A),
            Regime::Strange => Some(Reference::Ahat),
            Regime::Mild => Some(Reference::S),
            Regime::Strong => Some(Reference::D),
            Regime::Exploratory => None,
        }
    }
}

/// The four flat limit operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    A,
    Ahat,
    S,
    D,
}

impl Reference {
    pub const ALL: [Reference; 4] = [Reference::A, Reference::Ahat, Reference::S, Reference::D];

    pub fn label(self) -> &'static str {
        match self {
            Reference::A => "A",
            Reference::Ahat => "Ahat",
            Reference::S => "S",
            Reference::D => "D",
        }
    }
}

/// Boundary family named in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BcName {
    #[default]
    Wbc,
    Sbc,
    Dbc,
    Strange,
}

impl BcName {
    pub fn family(self, k1: f64) -> BcFamily {
        match self {
            BcName::Wbc => BcFamily::Wbc,
            BcName::Sbc => BcFamily::Sbc,
            BcName::Dbc => BcFamily::Dbc,
            BcName::Strange => BcFamily::Strange { k1 },
        }
    }
}

/// Reference chart used on `Ω_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    /// Oscillation confined to the boundary layer of the mesh.
    #[default]
    Layered,
    /// Vertical graph chart `-1 + t (g + 1)`.
    Graph,
}

/// `k1 = <real>` or `k1 = "auto"` (from the cell problem).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum K1Setting {
    #[default]
    Auto,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum K1Repr {
    Value(f64),
    Word(String),
}

impl Serialize for K1Setting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            K1Setting::Auto => K1Repr::Word("auto".into()).serialize(s),
            K1Setting::Value(v) => K1Repr::Value(*v).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for K1Setting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match K1Repr::deserialize(d)? {
            K1Repr::Value(v) => Ok(K1Setting::Value(v)),
            K1Repr::Word(w) if w == "auto" => Ok(K1Setting::Auto),
            K1Repr::Word(w) => Err(serde::de::Error::custom(format!("k1 must be a number or \"auto\", got {w:?}"))),
        }
    }
}

impl std::str::FromStr for K1Setting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(K1Setting::Auto);
        }
        s.parse::<f64>().map(K1Setting::Value).map_err(|e| format!("k1 must be a number or \"auto\": {e}"))
    }
}

/// Accepts `epsilon = 0.25` as well as `epsilons = [...]`.
fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn default_width() -> [f64; 2] {
    [0.0, 1.0]
}
fn default_degree() -> usize {
    5
}
fn default_elements() -> usize {
    16
}
fn default_quad() -> usize {
    6
}
fn default_bulk() -> usize {
    12
}
fn default_per_period() -> usize {
    10
}
fn default_layer_elements() -> usize {
    8
}
fn default_layer_width() -> f64 {
    2.0
}
fn default_layer_grading() -> f64 {
    1.0
}
fn default_k() -> usize {
    3
}
fn default_max_dofs() -> usize {
    4000
}
fn default_cell_depth() -> f64 {
    4.0
}

/// A sweep over `ε` at fixed `α`, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Inferred from `alpha` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    pub alpha: f64,
    #[serde(alias = "epsilon", deserialize_with = "one_or_many", default)]
    pub epsilons: Vec<f64>,
    pub profile: PeriodicProfile,
    #[serde(rename = "W", default = "default_width")]
    pub width: [f64; 2],
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Lateral elements of the flat limit mesh, and the floor for the `Ω_ε` meshes.
    #[serde(default = "default_elements")]
    pub elements_x: usize,
    /// Vertical elements of the flat limit mesh.
    #[serde(default = "default_elements")]
    pub elements_y: usize,
    /// Vertical elements per unit depth below the boundary layer on `Ω_ε`.
    #[serde(default = "default_bulk")]
    pub bulk_elements: usize,
    #[serde(default = "default_quad")]
    pub quad_points: usize,
    /// Lateral elements per oscillation period on `Ω_ε`.
    #[serde(default = "default_per_period")]
    pub elements_per_period: usize,
    /// Vertical elements in the layer below `Γ_ε`.
    #[serde(default = "default_layer_elements")]
    pub layer_elements: usize,
    /// Layer thickness in units of `ε` (reference coordinate).
    #[serde(default = "default_layer_width")]
    pub layer_width: f64,
    /// Ratio of successive layer element heights toward `Γ_ε` (1 = uniform).
    #[serde(default = "default_layer_grading")]
    pub layer_grading: f64,
    #[serde(default)]
    pub chart: ChartKind,
    /// Boundary family on `Γ_ε` of the perturbed problem.
    #[serde(default)]
    pub bc: BcName,
    #[serde(default)]
    pub k1: K1Setting,
    #[serde(default = "default_k")]
    pub num_eigenvalues: usize,
    #[serde(default = "default_max_dofs")]
    pub max_dofs: usize,
    #[serde(default = "default_cell_depth")]
    pub cell_depth: f64,
    #[serde(default)]
    pub cell: CellResolution,
    /// Output prefix; `<output>.csv` and `<output>.json` are written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn regime(&self) -> Regime {
        self.regime.unwrap_or_else(|| Regime::for_alpha(self.alpha))
    }

    pub fn interval(&self) -> Result<Interval, LabError> {
        Interval::new(self.width[0], self.width[1]).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Lateral elements of the `Ω_ε` mesh.
    pub fn elements_x_for(&self, epsilon: f64) -> usize {
        let per_width = (self.elements_per_period as f64 * (self.width[1] - self.width[0]) / epsilon).ceil() as usize;
        per_width.max(self.elements_x)
    }

    /// Reference-coordinate breakpoints in `t ∈ [0, 1]` for the `Ω_ε` mesh.
    pub fn t_breaks_for(&self, epsilon: f64) -> Vec<f64> {
        let layer = (self.layer_width * epsilon).min(0.5);
        let bulk = ((self.bulk_elements as f64 * (1.0 - layer)).ceil() as usize).max(1);
        let mut b: Vec<f64> = (0..bulk).map(|i| (1.0 - layer) * i as f64 / bulk as f64).collect();
        // element k of the layer has height ∝ q^k
        let q = self.layer_grading;
        let n = self.layer_elements;
        let total: f64 = (0..n).map(|k| q.powi(k as i32)).sum();
        let mut acc = 0.0;
        b.push(1.0 - layer);
        for k in 0..n {
            acc += q.powi(k as i32);
            b.push(1.0 - layer + layer * acc / total);
        }
        *b.last_mut().unwrap() = 1.0;
        b
    }

    /// Free unknowns of the `Ω_ε` problem (before boundary constraints).
    pub fn dofs_for(&self, epsilon: f64) -> usize {
        (self.elements_x_for(epsilon) + self.degree) * (self.t_breaks_for(epsilon).len() - 1 + self.degree)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if let Some(r) = self.regime {
            if r != Regime::for_alpha(self.alpha) {
                return bad(format!("regime {r:?} is inconsistent with alpha = {}", self.alpha));
            }
        }
        self.interval()?;
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilons must be strictly decreasing".into());
        }
        let width = self.width[1] - self.width[0];
        for &e in &self.epsilons {
            if !(e > 0.0 && e <= 1.0) {
                return bad(format!("epsilon {e} not in (0, 1]"));
            }
            if e > width {
                return bad(format!("epsilon {e} admits no whole cell in W"));
            }
            if self.dofs_for(e) > self.max_dofs {
                return bad(format!("epsilon {e} needs {} unknowns, above max_dofs = {}", self.dofs_for(e), self.max_dofs));
            }
        }
        if self.elements_per_period < 4 {
            return bad(format!("elements_per_period {} < 4 does not resolve the oscillation", self.elements_per_period));
        }
        if self.degree < 3 || self.quad_points == 0 || self.elements_y == 0 || self.bulk_elements == 0 || self.layer_elements == 0 || !(self.layer_width > 0.0) || !(self.layer_grading > 0.0 && self.layer_grading <= 1.0) {
            return bad("degree >= 3 and positive mesh and quadrature settings required".into());
        }
        if self.num_eigenvalues == 0 {
            return bad("num_eigenvalues must be positive".into());
        }
        if let K1Setting::Value(k) = self.k1 {
            if !(k >= 0.0 && k.is_finite()) {
                return bad(format!("k1 must be nonnegative, got {k}"));
            }
        }
        if !(self.cell_depth > 1.0) {
            return bad(format!("cell_depth must exceed 1, got {}", self.cell_depth));
        }
        Ok(())
    }

    /// Canonical sweep for `α` with `b = 1.5 + cos(2πy)` and `ε ∈ {1/4, 1/8, 1/16}`.
    pub fn canonical(alpha: f64) -> Self {
        ExperimentConfig {
            regime: None,
            alpha,
            epsilons: vec![0.25, 0.125, 0.0625],
            profile: PeriodicProfile::cosine(1.5, 1.0).expect("positive profile"),
            width: default_width(),
            degree: default_degree(),
            elements_x: default_elements(),
            elements_y: default_elements(),
            bulk_elements: default_bulk(),
            quad_points: default_quad(),
            elements_per_period: default_per_period(),
            layer_elements: default_layer_elements(),
            layer_width: default_layer_width(),
            layer_grading: default_layer_grading(),
            chart: ChartKind::Layered,
            bc: BcName::Wbc,
            k1: K1Setting::Auto,
            num_eigenvalues: default_k(),
            max_dofs: default_max_dofs(),
            cell_depth: default_cell_depth(),
            cell: CellResolution::default(),
            output: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes_follow_alpha() {
        assert_eq!(Regime::for_alpha(3.0), Regime::Stability);
        assert_eq!(Regime::for_alpha(2.5), Regime::Strange);
        assert_eq!(Regime::for_alpha(2.0), Regime::Mild);
        assert_eq!(Regime::for_alpha(1.25), Regime::Exploratory);
        assert_eq!(Regime::for_alpha(1.5), Regime::Exploratory);
        assert_eq!(Regime::for_alpha(1.0), Regime::Strong);
        assert_eq!(Regime::for_alpha(0.5), Regime::Strong);
        assert_eq!(Regime::Exploratory.expected(), None);
    }

    #[test]
    fn toml_keys_parse() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            alpha = 3.0
            epsilon = 0.25
            profile = { offset = 1.5, modes = [[1, 1.0, 0.0]] }
            W = [0.0, 1.0]
            degree = 5
            elements_x = 16
            elements_y = 16
            quad_points = 6
            bc = "wbc"
            k1 = "auto"
            num_eigenvalues = 3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.epsilons, vec![0.25]);
        assert_eq!(cfg.k1, K1Setting::Auto);
        let cfg = ExperimentConfig::from_toml("alpha = 2.5\nepsilons = [0.25, 0.125]\nk1 = 12.5\nprofile = { offset = 2.0 }\nregime = \"strange\"").unwrap();
        assert_eq!(cfg.k1, K1Setting::Value(12.5));
        assert_eq!(cfg.regime(), Regime::Strange);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = "profile = { offset = 1.5, modes = [[1, 1.0, 0.0]] }\n";
        for extra in [
            "alpha = 3.0\nregime = \"strong\"",
            "alpha = 3.0\nepsilons = [0.125, 0.25]",
            "alpha = 3.0\nelements_per_period = 3",
            "alpha = 3.0\nk1 = \"often\"",
            "alpha = -1.0",
            "alpha = 3.0\nepsilons = [0.001]",
            "alpha = 3.0\nunknown_key = 1",
        ] {
            assert!(ExperimentConfig::from_toml(&format!("{base}{extra}")).is_err(), "{extra}");
        }
    }

    #[test]
    fn layer_mesh_is_graded() {
        let cfg = ExperimentConfig::canonical(3.0);
        let b = cfg.t_breaks_for(0.0625);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        let top = b[b.len() - 1] - b[b.len() - 2];
        assert!((top - 0.125 / 8.0).abs() < 1e-14);
        assert_eq!(cfg.dofs_for(0.0625), 165 * 24);
        assert!(cfg.dofs_for(0.0625) <= cfg.max_dofs);
    }
}
