//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{Shape, SpaceModel};
use crate::laplacian::Variant;
use crate::sampling::{SamplerConfig, Strategy, DEFAULT_MC_PROBES};
use crate::spectra::SolverOptions;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub kind: String,
    pub length: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub first: Option<f64>,
    pub second: Option<f64>,
    pub circle: Option<f64>,
    pub segment: Option<f64>,
    pub pages: Option<usize>,
    pub parts: Option<Vec<PartSpec>>,
    /// Per vertex: `[part, position]` pairs.
    pub vertices: Option<Vec<Vec<(usize, f64)>>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub shape: String,
    pub length: f64,
}

impl SpaceSpec {
    pub fn build(&self, reflect_at_gluing: bool) -> Result<SpaceModel> {
        let allowed: &[&str] = match self.kind.as_str() {
            "interval" | "circle" => &["length"],
            "rectangle" | "torus" => &["width", "height"],
            "two_circles" => &["first", "second"],
            "circle_with_segment" => &["circle", "segment"],
            "book_pages" => &["pages", "width", "height"],
            "metric_graph" => &["parts", "vertices"],
            other => {
                return Err(Error::Config(format!(
                    "unknown space kind `{other}` (expected interval, circle, rectangle, torus, two_circles, \
                     circle_with_segment, book_pages or metric_graph)"
                )))
            }
        };
        let present = [
            ("length", self.length.is_some()),
            ("width", self.width.is_some()),
            ("height", self.height.is_some()),
            ("first", self.first.is_some()),
            ("second", self.second.is_some()),
            ("circle", self.circle.is_some()),
            ("segment", self.segment.is_some()),
            ("pages", self.pages.is_some()),
            ("parts", self.parts.is_some()),
            ("vertices", self.vertices.is_some()),
        ];
        let stray: Vec<&str> = present
            .iter()
            .filter(|(k, p)| *p && !allowed.contains(k))
            .map(|(k, _)| *k)
            .collect();
        if !stray.is_empty() {
            return Err(Error::Config(format!(
                "space kind `{}` does not take key(s): {}",
                self.kind,
                stray.join(", ")
            )));
        }
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::Config(format!("space kind `{}` needs `{name}`", self.kind)))
        };
        let space = match self.kind.as_str() {
            "interval" => SpaceModel::interval(need("length", self.length)?),
            "circle" => SpaceModel::circle(need("length", self.length)?),
            "rectangle" => SpaceModel::rectangle(need("width", self.width)?, need("height", self.height)?),
            "torus" => SpaceModel::torus(need("width", self.width)?, need("height", self.height)?),
            "two_circles" => SpaceModel::two_circles(need("first", self.first)?, need("second", self.second)?),
            "circle_with_segment" => {
                SpaceModel::circle_with_segment(need("circle", self.circle)?, need("segment", self.segment)?)
            }
            "book_pages" => SpaceModel::book_pages(
                self.pages
                    .ok_or_else(|| Error::Config("space kind `book_pages` needs `pages`".into()))?,
                need("width", self.width)?,
                need("height", self.height)?,
            ),
            _ => {
                let parts = self
                    .parts
                    .as_ref()
                    .ok_or_else(|| Error::Config("space kind `metric_graph` needs `parts`".into()))?;
                let shapes = parts
                    .iter()
                    .map(|p| match p.shape.as_str() {
                        "segment" => Ok(Shape::Segment { length: p.length }),
                        "circle" => Ok(Shape::Circle { length: p.length }),
                        other => Err(Error::Config(format!(
                            "metric graph part shape `{other}` (expected segment or circle)"
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                SpaceModel::metric_graph(shapes, self.vertices.clone().unwrap_or_default())
            }
        };
        let space = space.map_err(|e| match e {
            Error::Usage(m) => Error::Config(m),
            other => other,
        })?;
        Ok(space.with_reflect_at_gluing(reflect_at_gluing))
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default = "default_bias")]
    pub locus_bias: f64,
    #[serde(default)]
    pub seed: u64,
    pub count: Option<usize>,
    #[serde(default = "default_probes")]
    pub mc_probes: usize,
}

fn default_strategy() -> String {
    "grid".into()
}

fn default_bias() -> f64 {
    10.0
}

fn default_probes() -> usize {
    DEFAULT_MC_PROBES
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            strategy: default_strategy(),
            locus_bias: default_bias(),
            seed: 0,
            count: None,
            mc_probes: default_probes(),
        }
    }
}

impl SamplerSpec {
    pub fn strategy(&self) -> Result<Strategy> {
        match self.strategy.as_str() {
            "grid" => Ok(Strategy::Grid),
            "uniform_random" => Ok(Strategy::UniformRandom),
            "clustered" => Ok(Strategy::Clustered {
                locus_bias: self.locus_bias,
            }),
            other => Err(Error::Config(format!(
                "unknown sampler strategy `{other}` (expected grid, uniform_random or clustered)"
            ))),
        }
    }

    pub fn config(&self, eps: f64) -> Result<SamplerConfig> {
        let mut cfg = SamplerConfig::new(self.strategy()?, self.seed, eps);
        cfg.count = self.count;
        cfg.mc_probes = self.mc_probes;
        Ok(cfg)
    }
}

/// `rho` values, listed or geometric `start * ratio^i`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub rho: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub ratio: Option<f64>,
    pub count: Option<usize>,
}

impl ScheduleSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match (&self.rho, self.start, self.ratio, self.count) {
            (Some(list), None, None, None) => list.clone(),
            (None, Some(s), Some(r), Some(n)) => (0..n).map(|i| s * r.powi(i as i32)).collect(),
            _ => {
                return Err(Error::Config(
                    "schedule needs either `rho = [...]` or all of `start`, `ratio`, `count`".into(),
                ))
            }
        };
        if v.is_empty() {
            return Err(Error::Config("schedule is empty".into()));
        }
        if let Some(bad) = v.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Config(format!("schedule value {bad} is not positive")));
        }
        Ok(v)
    }
}

/// `eps` as a fixed value or `c * rho^a`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSpec {
    #[serde(default = "default_rule")]
    pub rule: String,
    pub value: Option<f64>,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "two")]
    pub a: f64,
}

fn default_rule() -> String {
    "power".into()
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl Default for EpsilonSpec {
    fn default() -> Self {
        EpsilonSpec {
            rule: default_rule(),
            value: None,
            c: 1.0,
            a: 2.0,
        }
    }
}

impl EpsilonSpec {
    pub fn epsilon(&self, rho: f64) -> Result<f64> {
        let eps = match self.rule.as_str() {
            "fixed" => self
                .value
                .ok_or_else(|| Error::Config("epsilon rule `fixed` needs `value`".into()))?,
            "power" => self.c * rho.powf(self.a),
            other => {
                return Err(Error::Config(format!(
                    "unknown epsilon rule `{other}` (expected fixed or power)"
                )))
            }
        };
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::Config(format!("epsilon {eps} for rho {rho} is not positive")));
        }
        Ok(eps)
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_solver_seed")]
    pub seed: u64,
    #[serde(default = "default_cutoff")]
    pub dense_cutoff: usize,
    #[serde(default)]
    pub max_iter: usize,
    #[serde(default = "default_restarts")]
    pub max_restarts: usize,
}

fn default_tol() -> f64 {
    SolverOptions::default().tol
}

fn default_solver_seed() -> u64 {
    SolverOptions::default().seed
}

fn default_cutoff() -> usize {
    SolverOptions::default().dense_cutoff
}

fn default_restarts() -> usize {
    SolverOptions::default().max_restarts
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            tol: default_tol(),
            seed: default_solver_seed(),
            dense_cutoff: default_cutoff(),
            max_iter: 0,
            max_restarts: default_restarts(),
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            seed: self.seed,
            dense_cutoff: self.dense_cutoff,
            max_iter: self.max_iter,
            max_restarts: self.max_restarts,
        }
    }
}

/// What `compare` runs side by side.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    #[serde(default = "default_variants")]
    pub variants: Vec<String>,
    /// When set, both runs use the main variant and differ in this flag.
    pub reflect_at_gluing: Option<Vec<bool>>,
}

fn default_variants() -> Vec<String> {
    vec!["closed".into(), "boundary".into()]
}

impl Default for CompareSpec {
    fn default() -> Self {
        CompareSpec {
            variants: default_variants(),
            reflect_at_gluing: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_boundary_step")]
    pub boundary_step: f64,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_oracle_probes")]
    pub mc_probes: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_fd_step() -> f64 {
    1e-3
}

fn default_boundary_step() -> f64 {
    1e-4
}

fn default_pairs() -> usize {
    1000
}

fn default_oracle_probes() -> usize {
    100_000
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            fd_step: default_fd_step(),
            boundary_step: default_boundary_step(),
            pairs: default_pairs(),
            mc_probes: default_oracle_probes(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSpec,
    #[serde(default)]
    pub sampler: SamplerSpec,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub epsilon: EpsilonSpec,
    #[serde(default = "default_variant")]
    pub variant: String,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "yes")]
    pub reflect_at_gluing: bool,
    /// Compute eigenfunction errors for captured clusters.
    #[serde(default = "yes")]
    pub eigfn_errors: bool,
    /// Fill `wall_ms`; off keeps reports byte-identical across runs.
    #[serde(default)]
    pub record_timing: bool,
    /// Also write the assembled Laplacian as triplets.
    #[serde(default)]
    pub export_matrix: bool,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub compare: CompareSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
}

fn default_variant() -> String {
    "boundary".into()
}

fn default_k_max() -> usize {
    5
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn variant(&self) -> Result<Variant> {
        self.variant.parse()
    }

    pub fn space_model(&self) -> Result<SpaceModel> {
        self.space.build(self.reflect_at_gluing)
    }

    /// `(eps, rho)` for every schedule point.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        self.schedule
            .values()?
            .into_iter()
            .map(|rho| Ok((self.epsilon.epsilon(rho)?, rho)))
            .collect()
    }

    /// Non-fatal problems with the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.epsilon.rule == "power" && self.epsilon.a <= 1.0 {
            out.push(format!(
                "epsilon exponent a = {} does not send eps/rho to 0",
                self.epsilon.a
            ));
        }
        if let Ok(points) = self.points() {
            for (eps, rho) in points {
                if eps >= rho / 4.0 {
                    out.push(format!("eps = {eps} is not below rho/4 at rho = {rho}"));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        self.space_model()?;
        self.sampler.strategy()?;
        self.points()?;
        self.variant()?;
        for v in &self.compare.variants {
            v.parse::<Variant>()?;
        }
        if self.compare.variants.len() != 2 {
            return Err(Error::Config("compare.variants needs exactly two entries".into()));
        }
        if let Some(r) = &self.compare.reflect_at_gluing {
            if r.len() != 2 {
                return Err(Error::Config("compare.reflect_at_gluing needs exactly two entries".into()));
            }
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config(format!("solver.tol must be positive, got {}", self.solver.tol)));
        }
        let o = &self.oracle;
        if !(o.fd_step > 0.0 && o.boundary_step > 0.0 && o.pairs > 0 && o.mc_probes > 0) {
            return Err(Error::Config("oracle steps and counts must be positive".into()));
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [space]
        kind = "interval"
        length = 1.0

        [schedule]
        rho = [0.1, 0.05]
    "#;

    #[test]
    fn minimal_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.k_max, 5);
        assert_eq!(c.variant().unwrap(), Variant::Boundary);
        assert!(c.reflect_at_gluing);
        let pts = c.points().unwrap();
        assert!((pts[0].0 - 0.01).abs() < 1e-15);
        assert!(c.warnings().is_empty());
    }

    #[test]
    fn unknown_key_named() {
        let text = format!("{MINIMAL}\nbogus_key = 3\n");
        let err = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("bogus_key"), "{err}");
        let err = ExperimentConfig::parse(&MINIMAL.replace("length = 1.0", "length = 1.0\nwidth = 2.0"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("width"), "{err}");
    }

    #[test]
    fn weak_epsilon_rule_warns() {
        let text = format!("{MINIMAL}\n[epsilon]\nrule = \"power\"\na = 1.0\nc = 0.1\n");
        let c = ExperimentConfig::parse(&text).unwrap();
        assert!(c.warnings().iter().any(|w| w.contains("a = 1")));
    }

    #[test]
    fn geometric_schedule_and_graph() {
        let text = r#"
            variant = "glued"
            [space]
            kind = "metric_graph"
            parts = [{ shape = "segment", length = 1.0 }, { shape = "segment", length = 0.5 }]
            vertices = [[[0, 1.0], [1, 0.0]]]
            [schedule]
            start = 0.1
            ratio = 0.5
            count = 3
        "#;
        let c = ExperimentConfig::parse(text).unwrap();
        let rho: Vec<f64> = c.points().unwrap().iter().map(|p| p.1).collect();
        assert_eq!(rho, vec![0.1, 0.05, 0.025]);
        assert_eq!(c.space_model().unwrap().parts.len(), 2);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(ExperimentConfig::parse(&MINIMAL.replace("interval", "sphere")).is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("[0.1, 0.05]", "[]")).is_err());
        assert!(ExperimentConfig::parse("[space]\nkind = \"interval\"\nlength = 1.0\n").is_err());
    }
}
