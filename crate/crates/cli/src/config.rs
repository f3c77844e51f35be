//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Master seed; every randomized step derives its seed from this one.
    pub seed: u64,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub generators: Option<GeneratorSpec>,
    #[serde(default)]
    pub codes: Option<CodePairSpec>,
    /// Subcommands run in order by `run`.
    #[serde(default)]
    pub experiments: Vec<String>,
    #[serde(default)]
    pub tester: TesterSpec,
    #[serde(default)]
    pub montecarlo: Option<MonteCarloSpec>,
    #[serde(default)]
    pub decode: Option<DecodeSpec>,
    #[serde(default)]
    pub oracles: Option<OracleSpec>,
    #[serde(default)]
    pub plan: Option<PlanSpec>,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub caps: Caps,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic { n: u32 },
    Dihedral { n: u32 },
    /// PSL₂ over the field with q^i elements, q a prime power.
    Psl2 { q: u32, i: u32 },
    /// Closure of explicit permutations of {0, …, m−1}.
    Permutations { generators: Vec<Vec<u32>> },
    /// Permutation generators read from a file, one per line.
    PermutationFile { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MorgensternSet {
    /// {b₀b_j, b_jb₀}
    #[default]
    APrime,
    /// {b_t b_s : t ≠ s}
    A,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Explicit {
        a: Vec<u32>,
        b: Vec<u32>,
    },
    Morgenstern {
        #[serde(default)]
        a_set: MorgensternSet,
        /// Keep this many elements of A by degree reduction.
        #[serde(default)]
        reduce_a_to: Option<usize>,
    },
    Search {
        size_a: usize,
        size_b: usize,
        #[serde(default = "default_attempts")]
        attempts: usize,
    },
}

fn default_attempts() -> usize {
    1000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSpec {
    Repetition { n: usize },
    Parity { n: usize },
    Full { n: usize },
    /// Generator rows as 0/1 strings.
    Explicit { generator: Vec<String> },
    RandomLdpc {
        c: usize,
        d: usize,
        n: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodePairSpec {
    pub a: CodeSpec,
    pub b: CodeSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TesterSpec {
    #[serde(default = "default_samples")]
    pub codewords: usize,
    #[serde(default = "default_samples")]
    pub non_codewords: usize,
}

fn default_samples() -> usize {
    100
}

impl Default for TesterSpec {
    fn default() -> Self {
        Self { codewords: 100, non_codewords: 100 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    pub trials: usize,
    /// Error weights, cycled over the trials.
    pub weights: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeSpec {
    /// Received word as a 0/1 string in square order.
    #[serde(default)]
    pub word: Option<String>,
    /// Otherwise a random codeword plus an error of this weight.
    #[serde(default)]
    pub weight: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DswSpec {
    pub c: usize,
    pub d: usize,
    pub n: usize,
    pub partner: CodeSpec,
    pub delta: f64,
    pub gamma: f64,
    /// Half-open seed range scanned for certified expanders.
    pub seeds: [u64; 2],
    pub count: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub pairs: Vec<[CodeSpec; 2]>,
    #[serde(default)]
    pub dsw: Vec<DswSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    /// Base-code rates r₀.
    #[serde(default)]
    pub base_rates: Vec<f64>,
    /// Target code rates r.
    #[serde(default)]
    pub rates: Vec<f64>,
    /// Powers i for the reported group orders |PSL₂(q^i)|.
    #[serde(default = "default_orders")]
    pub group_powers: Vec<u32>,
    /// ε grid for the δ₀ scaling sweep.
    #[serde(default)]
    pub scaling: Vec<f64>,
}

fn default_orders() -> Vec<u32> {
    vec![1, 2, 3]
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    /// Also compute λ₂ of the square-complex walks.
    #[serde(default)]
    pub complex_walks: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_exact_dim")]
    pub exact_distance_dim: usize,
    #[serde(default = "default_order_cap")]
    pub group_order: usize,
    #[serde(default = "default_subset_budget")]
    pub subset_budget: u128,
    #[serde(default = "default_matvecs")]
    pub eigen_matvecs: usize,
    #[serde(default)]
    pub eigen_method: EigenMethod,
    #[serde(default = "default_heuristic_iters")]
    pub heuristic_iterations: usize,
}

fn default_exact_dim() -> usize {
    cayley_ltc::gf2::DEFAULT_EXACT_DIM_CAP
}

fn default_order_cap() -> usize {
    cayley_ltc::groups::DEFAULT_ORDER_CAP
}

fn default_subset_budget() -> u128 {
    cayley_ltc::codes::ldpc::DEFAULT_SUBSET_BUDGET
}

fn default_matvecs() -> usize {
    10_000
}

fn default_heuristic_iters() -> usize {
    200
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            exact_distance_dim: default_exact_dim(),
            group_order: default_order_cap(),
            subset_budget: default_subset_budget(),
            eigen_matvecs: default_matvecs(),
            eigen_method: EigenMethod::Auto,
            heuristic_iterations: default_heuristic_iters(),
        }
    }
}

pub const COMMANDS: [&str; 7] = ["build", "code", "oracles", "montecarlo", "decode", "plan", "spectrum"];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate(None)?;
        Ok(cfg)
    }

    /// Reads a config; relative file references resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(GroupSpec::PermutationFile { path: p }) = &mut cfg.group {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.validate(Some(path))?;
        Ok(cfg)
    }

    pub fn validate(&self, origin: Option<&Path>) -> Result<(), CliError> {
        let at = |msg: String| match origin {
            Some(p) => CliError::Config(format!("{}: {msg}", p.display())),
            None => CliError::Config(msg),
        };
        let c = &self.caps;
        if c.exact_distance_dim == 0 || c.group_order == 0 || c.subset_budget == 0 || c.eigen_matvecs == 0 || c.heuristic_iterations == 0 {
            return Err(at("caps must be positive".into()));
        }
        for e in &self.experiments {
            if !COMMANDS.contains(&e.as_str()) {
                return Err(at(format!("unknown experiment {e:?}; expected one of {}", COMMANDS.join(", "))));
            }
        }
        if let Some(GroupSpec::PermutationFile { path }) = &self.group {
            if !path.exists() {
                return Err(at(format!("group file {} does not exist", path.display())));
            }
        }
        if let Some(mc) = &self.montecarlo {
            if mc.weights.is_empty() {
                return Err(at("montecarlo.weights must not be empty".into()));
            }
        }
        if let Some(d) = &self.decode {
            if d.word.is_some() == d.weight.is_some() {
                return Err(at("decode needs exactly one of word or weight".into()));
            }
        }
        if let Some(o) = &self.oracles {
            for s in &o.dsw {
                if s.seeds[0] >= s.seeds[1] {
                    return Err(at("dsw.seeds must be a nonempty range".into()));
                }
            }
        }
        Ok(())
    }
}
