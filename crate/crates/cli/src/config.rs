//! Scenario files: INI sections with flat `key = value` pairs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dyadic_core::integrator::PicardConfig;
use dyadic_core::{AveragedState, GFamily, ModelParams, PhiSpec, ShellState, StepControl};
use ini::Ini;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checks::{Applies, CheckName};

/// Overrides the directory that relative `[output] dir` entries resolve against.
pub const OUTPUT_ROOT_ENV: &str = "DYADIC_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Scalar,
    Averaged { constants: [f64; 5], weights: [f64; 4], alpha: f64, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    UnitMode(usize),
    Geometric { ratio: f64, support: usize },
    Custom(Vec<f64>),
}

impl InitialData {
    pub fn amplitudes(&self, shells: usize) -> Result<Vec<f64>> {
        let x = match self {
            InitialData::UnitMode(n) => {
                if *n == 0 || *n > shells {
                    bail!("[x0] mode {n} outside 1..={shells}");
                }
                ShellState::unit_mode(shells, *n).x
            }
            InitialData::Geometric { ratio, support } => {
                ShellState::geometric(shells, *ratio, (*support).min(shells)).x
            }
            InitialData::Custom(values) => {
                if values.len() > shells {
                    bail!("[x0] has {} values for {shells} shells", values.len());
                }
                let mut x = values.clone();
                x.resize(shells, 0.0);
                x
            }
        };
        Ok(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSettings {
    pub slack: f64,
    /// Levels of the special subsequence for the ladder check.
    pub levels: usize,
    /// Length of the `g` table scanned by the subsequence.
    pub table_len: usize,
    pub n0: Option<usize>,
    pub theta: Option<f64>,
    /// `K` values for the adjacent-pair count.
    pub pair_levels: Vec<usize>,
    pub pair_n0: usize,
    pub pair_theta: f64,
    pub pair_s: f64,
}

impl Default for EnvelopeSettings {
    fn default() -> Self {
        EnvelopeSettings {
            slack: 1e-8,
            levels: 2,
            table_len: 1 << 16,
            n0: None,
            theta: None,
            pair_levels: vec![10, 20, 40],
            pair_n0: 1,
            pair_theta: 1.0,
            pair_s: 1.0,
        }
    }
}

/// Bounds used by the named checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSettings {
    pub energy_tol: f64,
    pub dn_slack: f64,
    pub summability_share: f64,
    pub vanishing_ratio: f64,
    pub product_slack: f64,
    pub picard: PicardConfig,
    pub picard_tol: f64,
    pub picard_rate_slack: f64,
    pub reduction_tol: f64,
    pub smoothing_s2: Option<f64>,
    pub smoothing_rel: f64,
    pub tao_slack: f64,
    pub galerkin_tol: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            energy_tol: 1e-6,
            dn_slack: 1e-6,
            summability_share: 1e-2,
            vanishing_ratio: 1e-3,
            product_slack: 1e-14,
            picard: PicardConfig::default(),
            picard_tol: 1e-6,
            picard_rate_slack: 0.05,
            reduction_tol: 1e-8,
            smoothing_s2: None,
            smoothing_rel: 0.05,
            tao_slack: 1e-12,
            galerkin_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelChoice,
    pub beta: f64,
    pub shells: usize,
    pub t_end: f64,
    pub s: f64,
    pub g: GFamily,
    pub phi: PhiSpec,
    pub x0: InitialData,
    pub step: StepControl,
    pub envelope: EnvelopeSettings,
    pub checks: Vec<CheckName>,
    pub settings: CheckSettings,
    pub output: PathBuf,
    pub snapshots: usize,
}

impl ScenarioConfig {
    pub fn params(&self) -> Result<ModelParams> {
        self.params_with_shells(self.shells)
    }

    pub fn params_with_shells(&self, shells: usize) -> Result<ModelParams> {
        let p = ModelParams::new(self.beta, shells, self.g.clone(), self.phi.clone())?.with_sobolev_index(self.s)?;
        Ok(match &self.model {
            ModelChoice::Scalar => p,
            ModelChoice::Averaged { alpha, gamma, .. } => p.with_exponents(*alpha, *gamma)?,
        })
    }

    pub fn scalar_state(&self, shells: usize) -> Result<ShellState> {
        Ok(ShellState::new(0.0, self.x0.amplitudes(shells)?)?)
    }

    /// Component `i` of shell `n` starts at `weights[i] * x0_n`.
    pub fn averaged_state(&self, shells: usize) -> Result<AveragedState> {
        let ModelChoice::Averaged { constants, weights, .. } = &self.model else {
            bail!("scenario is not an averaged model");
        };
        let x = self.x0.amplitudes(shells)?;
        let flat = weights.iter().flat_map(|w| x.iter().map(move |v| w * v)).collect();
        Ok(AveragedState::new(0.0, flat, *constants)?)
    }

    pub fn is_averaged(&self) -> bool {
        matches!(self.model, ModelChoice::Averaged { .. })
    }

    /// `output` resolved against the override root, if set.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output.is_relative() => Path::new(&root).join(&self.output),
            _ => self.output.clone(),
        }
    }
}

/// Five coupling constants drawn uniformly from `[-1, 1]`.
pub fn random_constants(seed: u64) -> [f64; 5] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| rng.gen_range(-1.0..=1.0))
}

const KNOWN: &[(&str, &[&str])] = &[
    ("scenario", &["name"]),
    ("model", &["kind", "beta", "shells", "t_end", "s", "alpha", "gamma"]),
    ("g", &["family", "value", "power", "values", "n1", "levels"]),
    ("phi", &["kind", "value", "values", "name", "half_width", "bound"]),
    ("x0", &["kind", "mode", "ratio", "support", "values"]),
    ("averaged", &["constants", "seed", "weights"]),
    ("step", &["rtol", "atol", "dt_init", "dt_min", "dt_max", "max_steps", "sample_dt"]),
    ("envelope", &["slack", "levels", "table_len", "n0", "theta", "pair_levels", "pair_n0", "pair_theta", "pair_s"]),
    (
        "checks",
        &[
            "run",
            "energy_tol",
            "dn_slack",
            "summability_share",
            "vanishing_ratio",
            "product_slack",
            "picard_theta",
            "picard_iter_tol",
            "picard_tol",
            "picard_rate_slack",
            "reduction_tol",
            "smoothing_s2",
            "smoothing_rel",
            "tao_slack",
            "galerkin_tol",
        ],
    ),
    ("output", &["dir", "snapshots"]),
];

struct Section<'a> {
    name: &'static str,
    values: BTreeMap<&'a str, &'a str>,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.values.get(key).copied()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| v.parse::<T>().map_err(|e| anyhow!("[{}] {key} = {v:?}: {e}", self.name))).transpose()
    }

    fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| anyhow!("[{}] is missing `{key}`", self.name))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.raw(key) else { return Ok(None) };
        raw.split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("[{}] {key}: {v:?}: {e}", self.name)))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get_or(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            bail!("[{}] {key} must be positive, got {v}", self.name);
        }
        Ok(v)
    }
}

pub fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse(&text, stem).with_context(|| format!("in {}", path.display()))
}

/// Drop a trailing `# ...` or `; ...` that follows whitespace.
fn strip_comment(v: &str) -> &str {
    let cut = v
        .char_indices()
        .find(|&(i, c)| (c == '#' || c == ';') && v[..i].ends_with(char::is_whitespace))
        .map_or(v.len(), |(i, _)| i);
    v[..cut].trim_end()
}

/// Parse a scenario; `default_name` names it when `[scenario] name` is absent.
pub fn parse(text: &str, default_name: &str) -> Result<ScenarioConfig> {
    let ini = Ini::load_from_str(text).map_err(|e| anyhow!("malformed config: {e}"))?;
    let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if props.iter().next().is_some() {
                bail!("keys outside any section");
            }
            continue;
        };
        let (known, keys) =
            KNOWN.iter().find(|(s, _)| *s == name).ok_or_else(|| anyhow!("unknown section [{name}]"))?;
        let mut values = BTreeMap::new();
        for (k, v) in props.iter() {
            if !keys.contains(&k) {
                bail!("unknown key `{k}` in [{name}]");
            }
            values.insert(k, strip_comment(v));
        }
        sections.insert(known, Section { name: known, values });
    }
    let empty = |name: &'static str| Section { name, values: BTreeMap::new() };
    let take = |name: &'static str| sections.get(name).map(|s| Section { name, values: s.values.clone() });
    let sec = |name: &'static str| take(name).unwrap_or_else(|| empty(name));

    let scenario = sec("scenario");
    let name = scenario.raw("name").unwrap_or(default_name).to_string();

    let m = take("model").ok_or_else(|| anyhow!("missing [model] section"))?;
    let beta = m.positive("beta", 1.0)?;
    let shells: usize = m.require("shells")?;
    if shells < 3 {
        bail!("[model] shells must be at least 3");
    }
    let t_end = m.positive("t_end", 1.0)?;
    let s = m.positive("s", 1.0)?;

    let g = parse_family(&sec("g"))?;
    let phi = parse_phi(&sec("phi"), shells)?;
    let x0 = parse_x0(&sec("x0"))?;

    let model = match m.raw("kind").unwrap_or("scalar") {
        "scalar" => ModelChoice::Scalar,
        "averaged" => {
            let a = sec("averaged");
            let constants = match (a.list::<f64>("constants")?, a.parse::<u64>("seed")?) {
                (Some(c), None) => c
                    .try_into()
                    .map_err(|c: Vec<f64>| anyhow!("[averaged] constants needs 5 values, got {}", c.len()))?,
                (None, Some(seed)) => random_constants(seed),
                (None, None) => bail!("[averaged] needs `constants` or `seed`"),
                (Some(_), Some(_)) => bail!("[averaged] takes `constants` or `seed`, not both"),
            };
            let weights = match a.list::<f64>("weights")? {
                Some(w) => {
                    w.try_into().map_err(|w: Vec<f64>| anyhow!("[averaged] weights needs 4 values, got {}", w.len()))?
                }
                None => [0.5, 0.5, 0.5, 0.5],
            };
            ModelChoice::Averaged {
                constants,
                weights,
                alpha: m.positive("alpha", 1.0)?,
                gamma: m.positive("gamma", 1.0)?,
            }
        }
        other => bail!("[model] kind must be scalar or averaged, got {other:?}"),
    };

    let st = sec("step");
    let d = StepControl::default();
    let step = StepControl {
        rtol: st.positive("rtol", d.rtol)?,
        atol: st.positive("atol", d.atol)?,
        dt_init: st.positive("dt_init", d.dt_init)?,
        dt_min: st.positive("dt_min", d.dt_min)?,
        dt_max: st.positive("dt_max", d.dt_max)?,
        max_steps: st.get_or("max_steps", d.max_steps)?,
        sample_dt: match st.parse::<f64>("sample_dt")? {
            Some(v) if v.is_nan() || v <= 0.0 => bail!("[step] sample_dt must be positive"),
            v => v,
        },
    };
    step.validate()?;

    let e = sec("envelope");
    let de = EnvelopeSettings::default();
    let envelope = EnvelopeSettings {
        slack: e.get_or("slack", de.slack)?,
        levels: e.get_or("levels", de.levels)?,
        table_len: e.get_or("table_len", de.table_len)?,
        n0: e.parse("n0")?,
        theta: e.parse("theta")?,
        pair_levels: e.list("pair_levels")?.unwrap_or(de.pair_levels),
        pair_n0: e.get_or("pair_n0", de.pair_n0)?,
        pair_theta: e.positive("pair_theta", de.pair_theta)?,
        pair_s: e.positive("pair_s", de.pair_s)?,
    };

    let c = sec("checks");
    let checks = match c.raw("run") {
        Some(raw) => raw
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| CheckName::lookup(v).ok_or_else(|| anyhow!("unknown check `{v}`")))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let averaged = matches!(model, ModelChoice::Averaged { .. });
    for check in &checks {
        match (check.applies(), averaged) {
            (Applies::ScalarOnly, true) => bail!("check `{}` needs a scalar model", check.name()),
            (Applies::AveragedOnly, false) => bail!("check `{}` needs an averaged model", check.name()),
            _ => {}
        }
    }
    let ds = CheckSettings::default();
    let settings = CheckSettings {
        energy_tol: c.positive("energy_tol", ds.energy_tol)?,
        dn_slack: c.get_or("dn_slack", ds.dn_slack)?,
        summability_share: c.positive("summability_share", ds.summability_share)?,
        vanishing_ratio: c.positive("vanishing_ratio", ds.vanishing_ratio)?,
        product_slack: c.get_or("product_slack", ds.product_slack)?,
        picard: PicardConfig {
            s,
            theta: c.positive("picard_theta", ds.picard.theta)?,
            iter_tol: c.positive("picard_iter_tol", ds.picard.iter_tol)?,
            ..ds.picard
        },
        picard_tol: c.positive("picard_tol", ds.picard_tol)?,
        picard_rate_slack: c.get_or("picard_rate_slack", ds.picard_rate_slack)?,
        reduction_tol: c.positive("reduction_tol", ds.reduction_tol)?,
        smoothing_s2: c.parse("smoothing_s2")?,
        smoothing_rel: c.positive("smoothing_rel", ds.smoothing_rel)?,
        tao_slack: c.get_or("tao_slack", ds.tao_slack)?,
        galerkin_tol: c.positive("galerkin_tol", ds.galerkin_tol)?,
    };

    let o = sec("output");
    let output = PathBuf::from(o.raw("dir").map(str::to_string).unwrap_or_else(|| format!("runs/{name}")));
    let snapshots = o.get_or("snapshots", 5usize)?;

    let cfg = ScenarioConfig {
        name,
        model,
        beta,
        shells,
        t_end,
        s,
        g,
        phi,
        x0,
        step,
        envelope,
        checks,
        settings,
        output,
        snapshots,
    };
    cfg.params().context("building model parameters")?;
    cfg.x0.amplitudes(shells)?;
    Ok(cfg)
}

fn parse_family(sec: &Section) -> Result<GFamily> {
    Ok(match sec.raw("family").unwrap_or("constant") {
        "constant" => GFamily::Constant(sec.positive("value", 1.0)?),
        "sqrt" => GFamily::Sqrt,
        "linear" => GFamily::Linear,
        "nlogn" => GFamily::NLog { power: sec.get_or("power", 1.0)? },
        "custom" => GFamily::Custom(sec.list("values")?.ok_or_else(|| anyhow!("[g] custom needs `values`"))?),
        "counterexample" => GFamily::Counterexample { n1: sec.get_or("n1", 2)?, levels: sec.get_or("levels", 2)? },
        other => bail!("unknown g family {other:?}"),
    })
}

fn parse_phi(sec: &Section, shells: usize) -> Result<PhiSpec> {
    Ok(match sec.raw("kind").unwrap_or("constant") {
        "constant" => PhiSpec::constant(sec.get_or("value", 1.0)?),
        "per_shell" => {
            let mut v: Vec<f64> = sec.list("values")?.ok_or_else(|| anyhow!("[phi] per_shell needs `values`"))?;
            let last = *v.last().ok_or_else(|| anyhow!("[phi] values is empty"))?;
            v.resize(shells, last);
            PhiSpec::per_shell(v)?
        }
        "windowed" => {
            let name: String = sec.require("name")?;
            PhiSpec::windowed(&name, sec.get_or("half_width", 1)?, sec.positive("bound", 1.0)?)?
        }
        other => bail!("unknown phi kind {other:?}"),
    })
}

fn parse_x0(sec: &Section) -> Result<InitialData> {
    Ok(match sec.raw("kind").unwrap_or("unit_mode") {
        "unit_mode" => InitialData::UnitMode(sec.get_or("mode", 1)?),
        "geometric" => {
            InitialData::Geometric { ratio: sec.positive("ratio", 0.5)?, support: sec.get_or("support", usize::MAX)? }
        }
        "custom" => InitialData::Custom(sec.list("values")?.ok_or_else(|| anyhow!("[x0] custom needs `values`"))?),
        other => bail!("unknown x0 kind {other:?}"),
    })
}
