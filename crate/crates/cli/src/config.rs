//! Job configuration files (TOML).

use std::path::{Path, PathBuf};

use flatfront_core::{
    ClassifyOptions, Domain, EvalCtx, Expr, FrameOptions, TraceOptions, WeierstrassData, C64,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub data: DataSpec,
    /// Working region; defaults to the data domain.
    #[serde(default)]
    pub region: Option<RegionSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub trace: TraceSpec,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Seed for randomized probes.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    7
}

/// Either `family` or both `alpha` and `beta`.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// `e1`, `e2`, `constants(a, b)` or `schwarz(<expr>)`.
    pub family: Option<String>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub domain: Option<RegionSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Rectangle { u: [f64; 2], v: [f64; 2] },
    Sector { r: [f64; 2], theta: [f64; 2] },
    Annulus { r: [f64; 2] },
}

impl From<RegionSpec> for Domain {
    fn from(r: RegionSpec) -> Domain {
        match r {
            RegionSpec::Rectangle { u, v } => Domain::rectangle(u[0], u[1], v[0], v[1]),
            RegionSpec::Sector { r, theta } => Domain::sector(r[0], r[1], theta[0], theta[1]),
            RegionSpec::Annulus { r } => Domain::annulus(r[0], r[1]),
        }
    }
}

impl From<Domain> for RegionSpec {
    fn from(d: Domain) -> RegionSpec {
        match d {
            Domain::Rectangle { u, v } => RegionSpec::Rectangle { u, v },
            Domain::Sector { r, theta } => RegionSpec::Sector { r, theta },
            Domain::Annulus { r } => RegionSpec::Annulus { r },
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub step_tol: f64,
    pub det_tol: f64,
    pub trace_step: f64,
    pub class_tol: f64,
    pub lc_tol: f64,
    /// Finite-difference step for first and second partials; third order uses `5 h_fd`.
    pub h_fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            step_tol: 1e-10,
            det_tol: 1e-9,
            trace_step: 1e-2,
            class_tol: 1e-7,
            lc_tol: 1e-7,
            h_fd: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSpec {
    pub grid_n: usize,
    pub max_length: f64,
}

impl Default for TraceSpec {
    fn default() -> Self {
        TraceSpec {
            grid_n: 101,
            max_length: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSpec {
    /// Lattice nodes along the two region coordinates.
    pub resolution: [usize; 2],
    /// Emit the raw 4-coordinates of every vertex as a comment.
    pub raw_comments: bool,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            resolution: [41, 41],
            raw_comments: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    /// Cuspidal-edge samples per surface compared against the oracle.
    pub oracle_samples: usize,
    pub lemma_samples: usize,
    /// Random off-curve probe points.
    pub probes: usize,
    /// Random nodes checked for path independence of the frame.
    pub path_checks: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            oracle_samples: 60,
            lemma_samples: 20,
            probes: 50,
            path_checks: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Relative to the config file; overridden by `--out-dir`.
    pub dir: Option<PathBuf>,
    pub curves: String,
    pub classify: String,
    pub invariants: String,
    pub summary: String,
    pub mesh_h: String,
    pub mesh_s: String,
    pub mesh_meta: String,
    pub report: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            curves: "curves.csv".into(),
            classify: "classify.csv".into(),
            invariants: "invariants.csv".into(),
            summary: "curves_summary.json".into(),
            mesh_h: "front_h.obj".into(),
            mesh_s: "front_s.obj".into(),
            mesh_meta: "mesh_meta.json".into(),
            report: "report.json".into(),
        }
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Job {
    pub data: WeierstrassData,
    pub region: Domain,
    pub tol: Tolerances,
    pub trace: TraceSpec,
    pub mesh: MeshSpec,
    pub verify: VerifySpec,
    pub output: OutputSpec,
    pub seed: u64,
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn resolve(&self) -> Result<Job, CliError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("step_tol", t.step_tol),
            ("det_tol", t.det_tol),
            ("trace_step", t.trace_step),
            ("class_tol", t.class_tol),
            ("lc_tol", t.lc_tol),
            ("h_fd", t.h_fd),
            ("trace.max_length", self.trace.max_length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.trace.grid_n < 2 || self.mesh.resolution.iter().any(|&n| n < 2) {
            return Err(CliError::Config("grid sizes must be at least 2".into()));
        }
        let data = build_data(&self.data)?;
        let region: Domain = self.region.map(Into::into).unwrap_or(data.domain);
        region
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !data.domain.contains_region(&region) {
            return Err(CliError::Config(format!(
                "region {region} is not inside the data domain {}",
                data.domain
            )));
        }
        Ok(Job {
            data,
            region,
            tol: *t,
            trace: self.trace,
            mesh: self.mesh,
            verify: self.verify,
            output: self.output.clone(),
            seed: self.seed,
        })
    }
}

fn config_err(e: flatfront_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Splits `name(a, b, ...)` at top-level commas.
fn call_args<'a>(s: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = s.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(inner[start..].trim());
    Some(out)
}

fn constant(s: &str) -> Result<C64, CliError> {
    let e = Expr::parse(s).map_err(config_err)?;
    let ctx = EvalCtx::default();
    let a = e.value(C64::new(0.0, 0.0), &ctx).map_err(config_err)?;
    let b = e.value(C64::new(0.5, 0.7), &ctx).map_err(config_err)?;
    if a != b {
        return Err(CliError::Config(format!("`{s}` is not a constant")));
    }
    Ok(a)
}

pub fn build_data(spec: &DataSpec) -> Result<WeierstrassData, CliError> {
    let domain: Option<Domain> = spec.domain.map(Into::into);
    let with_domain = |d: WeierstrassData| match domain {
        Some(dom) => d.with_domain(dom).map_err(config_err),
        None => Ok(d),
    };
    match (&spec.family, &spec.alpha, &spec.beta) {
        (Some(f), None, None) => {
            let f = f.trim();
            if f == "e1" {
                with_domain(WeierstrassData::e1())
            } else if f == "e2" {
                with_domain(WeierstrassData::e2())
            } else if let Some(args) = call_args(f, "constants") {
                if args.len() != 2 {
                    return Err(CliError::Config("constants(a, b) takes two arguments".into()));
                }
                let d = WeierstrassData::constants(constant(args[0])?, constant(args[1])?)
                    .map_err(config_err)?;
                with_domain(d)
            } else if let Some(args) = call_args(f, "schwarz") {
                if args.len() != 1 {
                    return Err(CliError::Config("schwarz(alpha) takes one argument".into()));
                }
                let dom = domain.ok_or_else(|| {
                    CliError::Config("schwarz(...) needs data.domain".into())
                })?;
                WeierstrassData::schwarz(Expr::parse(args[0]).map_err(config_err)?, dom)
                    .map_err(config_err)
            } else {
                Err(CliError::Config(format!("unknown family `{f}`")))
            }
        }
        (None, Some(a), Some(b)) => {
            let dom = domain.ok_or_else(|| {
                CliError::Config("explicit alpha/beta need data.domain".into())
            })?;
            WeierstrassData::parse(a, b, dom).map_err(config_err)
        }
        _ => Err(CliError::Config(
            "data needs either `family` or both `alpha` and `beta`".into(),
        )),
    }
}

impl Job {
    pub fn frame_options(&self) -> FrameOptions {
        FrameOptions {
            step_tol: self.tol.step_tol,
            det_tol: self.tol.det_tol,
            ..Default::default()
        }
    }

    pub fn trace_options(&self) -> TraceOptions {
        TraceOptions {
            trace_step: self.tol.trace_step,
            max_length: self.trace.max_length,
            region: Some(self.region),
            ..Default::default()
        }
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions {
            class_tol: self.tol.class_tol,
            lc_tol: self.tol.lc_tol,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(s: &str) -> Result<Job, CliError> {
        JobConfig::from_toml(s)?.resolve()
    }

    #[test]
    fn families() {
        assert_eq!(job("[data]\nfamily = \"e1\"").unwrap().data.name(), "e1");
        let j = job("[data]\nfamily = \"constants(2, 1+i)\"").unwrap();
        assert!(j.data.name().starts_with("constants"));
        let j = job(
            "[data]\nfamily = \"schwarz(exp(z))\"\ndomain = { kind = \"rectangle\", u = [-1, 1], v = [-2, 2] }",
        )
        .unwrap();
        assert_eq!(j.region, Domain::rectangle(-1.0, 1.0, -2.0, 2.0));
        let j = job(
            "[data]\nalpha = \"-1\"\nbeta = \"pow(z,-2)\"\n[data.domain]\nkind = \"annulus\"\nr = [0.5, 2]",
        )
        .unwrap();
        assert!(matches!(j.region, Domain::Annulus { .. }));
    }

    #[test]
    fn rejects_bad_configs() {
        for s in [
            "[data]\nfamily = \"e3\"",
            "[data]\nfamily = \"e1\"\nalpha = \"z\"",
            "[data]\nalpha = \"exp(z)\"\nbeta = \"exp(z)\"\ndomain = { kind = \"rectangle\", u = [-1, 1], v = [-1, 1] }",
            "[data]\nfamily = \"e1\"\n[tolerances]\nstep_tol = -1",
            "[data]\nfamily = \"e1\"\n[region]\nkind = \"rectangle\"\nu = [-5, 1]\nv = [0, 1]",
            "[data]\nfamily = \"constants(z, 1)\"",
            "[data]\nfamily = \"e1\"\ntypo = 1",
        ] {
            assert!(matches!(job(s), Err(CliError::Config(_))), "{s}");
        }
        let e = job("[data]\nalpha = \"exp(z)\"\nbeta = \"exp(z)\"\ndomain = { kind = \"rectangle\", u = [-1, 1], v = [-1, 1] }")
            .unwrap_err();
        assert!(e.to_string().contains("identifier vanishes identically"));
    }
}
