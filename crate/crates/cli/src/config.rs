//! Run configuration: one TOML file with nested sections.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use su2seq::basis::{Sector, Truncation};
use su2seq::hamiltonian::HamiltonianParams;
use su2seq::lattice::{build_maximal_tree, LatticeSpec, LatticeTree, TreeConvention};
use su2seq::oracle::QuadratureSpec;
use su2seq::radial::Stencil;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub lattice: LatticeSection,
    #[serde(default = "default_tree")]
    pub tree: TreeConvention,
    #[serde(default)]
    pub rods: RodsSection,
    pub truncation: TruncationSection,
    pub coupling: CouplingSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub resources: ResourcesSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub dims: Vec<usize>,
    /// Open in every dimension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<Vec<bool>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RodsSection {
    /// `roles[κ − 1]` is the rod role of physical link κ; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub l_max: i32,
    pub n_max: i32,
    pub n_omega: usize,
    pub sector: Sector,
    #[serde(default)]
    pub stencil: Stencil,
    #[serde(default = "default_max_nonzeros")]
    pub max_nonzeros: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub g: f64,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub frames: f64,
    pub chain_rule: f64,
    pub multiplicative: f64,
    pub differential: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { frames: 1e-10, chain_rule: 1e-6, multiplicative: 1e-10, differential: 1e-6 }
    }
}

impl Tolerances {
    pub fn uniform(t: f64) -> Self {
        Self { frames: t, chain_rule: t, multiplicative: t, differential: t }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSection {
    pub seed: u64,
    /// Random configurations for the closed-form frame identities.
    pub frame_trials: usize,
    /// Random configurations for the chain-rule comparison.
    pub chain_configs: usize,
    /// Rod counts whose catalog is compared against quadrature.
    pub oracle_rods: Vec<usize>,
    pub polar_nodes: usize,
    pub azimuth_nodes: usize,
    /// Rod count for `check counts`; the lattice's physical links when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_links: Option<usize>,
}

impl Default for ChecksSection {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            seed: 7,
            frame_trials: 10_000,
            chain_configs: 1_000,
            oracle_rods: vec![3, 4],
            polar_nodes: q.polar_nodes,
            azimuth_nodes: q.azimuth_nodes,
            count_links: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub k: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResourcesSection {
    /// Product-formula order.
    pub p: u32,
    pub t: f64,
    pub epsilon: f64,
    /// Measure the commutator sum on the assembled summands when small enough.
    pub measure_alpha: bool,
}

impl Default for ResourcesSection {
    fn default() -> Self {
        Self { p: 1, t: 1.0, epsilon: 1e-2, measure_alpha: true }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("su2seq-out")
}

fn default_tree() -> TreeConvention {
    TreeConvention::Comb
}

fn default_max_nonzeros() -> usize {
    50_000_000
}

fn field(name: &str, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow::anyhow!("config error: field `{name}`: {msg}")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("config error: cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("config error: {e}"))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice_spec().validate().map_err(|e| field("lattice", e))?;
        let t = &self.truncation;
        if t.l_max < 0 || t.n_max < 0 {
            return Err(field("truncation.l_max / n_max", "cutoffs must be non-negative"));
        }
        if t.n_omega < 1 {
            return Err(field("truncation.n_omega", "at least one radial node is required"));
        }
        let sector_ok = match t.sector {
            Sector::Fixed { l, m, n } => l >= 0 && m.abs() <= l && n.abs() <= l,
            Sector::Lm { l, m } => l >= 0 && m.abs() <= l,
            Sector::Sweep { l_max } => l_max >= 0,
        };
        if !sector_ok {
            return Err(field("truncation.sector", format!("{:?} needs L ≥ 0 and |M|, |N| ≤ L", t.sector)));
        }
        if !(self.coupling.g > 0.0 && self.coupling.a > 0.0) {
            return Err(field("coupling", "g and a must be positive"));
        }
        let tol = &self.tolerances;
        if [tol.frames, tol.chain_rule, tol.multiplicative, tol.differential].iter().any(|&x| x.is_nan() || x <= 0.0) {
            return Err(field("tolerances", "every tolerance must be positive"));
        }
        if self.spectrum.k == 0 {
            return Err(field("spectrum.k", "ask for at least one level"));
        }
        if self.checks.oracle_rods.iter().any(|&n| n < 2) {
            return Err(field("checks.oracle_rods", "each entry needs at least 2 rods"));
        }
        if let Some(roles) = &self.rods.roles {
            let n = self.tree()?.n_physical();
            let mut sorted = roles.clone();
            sorted.sort_unstable();
            if sorted != (1..=n).collect::<Vec<_>>() {
                return Err(field("rods.roles", format!("{roles:?} is not a permutation of 1..={n}")));
            }
        }
        Ok(())
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        let periodic = self.lattice.periodic.clone().unwrap_or_else(|| vec![false; self.lattice.dims.len()]);
        LatticeSpec { dims: self.lattice.dims.clone(), periodic }
    }

    pub fn tree(&self) -> Result<LatticeTree> {
        build_maximal_tree(&self.lattice_spec(), &self.tree).map_err(|e| field("tree", e))
    }

    pub fn params(&self) -> HamiltonianParams {
        let t = &self.truncation;
        let truncation = Truncation { l_max: t.l_max, n_max: t.n_max, sector: t.sector };
        HamiltonianParams {
            stencil: t.stencil,
            rod_roles: self.rods.roles.clone(),
            max_nonzeros: t.max_nonzeros,
            ..HamiltonianParams::new(self.coupling.g, self.coupling.a, truncation, t.n_omega)
        }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            polar_nodes: self.checks.polar_nodes,
            azimuth_nodes: self.checks.azimuth_nodes,
            ..QuadratureSpec::default()
        }
    }
}
