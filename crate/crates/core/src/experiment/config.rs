//! Flat `key = value` experiment files with `[section]` headers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::assembly::MassMode;
use crate::coefficients::CoefficientSpec;
use crate::mesh::Side;
use crate::solver::{InitialProfile, SolverConfig};

/// Conductivity choices expressible in a config file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Identity,
    /// `diag(a1, a2)`.
    Diagonal(f64, f64),
    /// Constant symmetric `[[a11, a12], [a12, a22]]`.
    Full(f64, f64, f64),
    /// `(a0 + slope·x) I`.
    Affine(f64, f64),
}

impl Coefficient {
    pub fn spec(self) -> CoefficientSpec {
        match self {
            Coefficient::Identity => CoefficientSpec::Identity,
            Coefficient::Diagonal(a, b) => CoefficientSpec::constant_diagonal(a, b),
            Coefficient::Full(a, b, c) => CoefficientSpec::constant_full(a, b, c),
            Coefficient::Affine(a, b) => CoefficientSpec::affine_scalar(a, b),
        }
    }

    fn violation(self) -> Option<String> {
        let ok = match self {
            Coefficient::Identity => true,
            Coefficient::Diagonal(a, b) => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            Coefficient::Full(a, b, c) => {
                [a, b, c].iter().all(|v| v.is_finite()) && a > 0.0 && a * c - b * b > 0.0
            }
            Coefficient::Affine(a, b) => a.is_finite() && b.is_finite() && a > 0.0 && a + b > 0.0,
        };
        (!ok).then(|| format!("coefficient {self} is not uniformly elliptic on the unit domain"))
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Coefficient::Identity => f.write_str("identity"),
            Coefficient::Diagonal(a, b) => write!(f, "diagonal({a:?}, {b:?})"),
            Coefficient::Full(a, b, c) => write!(f, "full({a:?}, {b:?}, {c:?})"),
            Coefficient::Affine(a, b) => write!(f, "affine({a:?}, {b:?})"),
        }
    }
}

impl FromStr for Coefficient {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| format!("coefficient '{s}' is missing ')'"))?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad coefficient argument '{}'", a.trim())))
                    .collect::<Result<Vec<_>, _>>()?;
                (name.trim(), args)
            }
            None => (s, Vec::new()),
        };
        match (name, args.as_slice()) {
            ("identity", []) => Ok(Coefficient::Identity),
            ("diagonal", &[a, b]) => Ok(Coefficient::Diagonal(a, b)),
            ("full", &[a, b, c]) => Ok(Coefficient::Full(a, b, c)),
            ("affine", &[a, b]) => Ok(Coefficient::Affine(a, b)),
            _ => Err(format!(
                "unknown coefficient '{s}' (expected identity | diagonal(a1, a2) | full(a11, a12, a22) | affine(a0, slope))"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainBlock {
    pub dimension: usize,
    pub resolution: usize,
    pub gamma0: Vec<Side>,
    pub coefficient: Coefficient,
    pub initial: InitialProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock {
    pub s: f64,
    pub mass_mode: MassMode,
    /// Random fields per exponent in the operator-law suite.
    pub law_trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverBlock {
    pub delta: f64,
    pub mu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub picard_iters: usize,
    pub picard_tol: f64,
    pub adapt: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub delta_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    pub directory: String,
    /// Empty means the final time only.
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: DomainBlock,
    pub operator: OperatorBlock,
    pub solver: SolverBlock,
    pub sweep: SweepBlock,
    pub output: OutputBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let base = SolverConfig::default();
        let halvings = vec![1e-2, 5e-3, 2.5e-3, 1.25e-3];
        ExperimentConfig {
            domain: DomainBlock {
                dimension: 1,
                resolution: 100,
                gamma0: vec![Side::Left],
                coefficient: Coefficient::Identity,
                initial: InitialProfile::SineCompatible,
            },
            operator: OperatorBlock {
                s: base.s,
                mass_mode: base.mass_mode,
                law_trials: 20,
                seed: 7,
            },
            solver: SolverBlock {
                delta: base.delta,
                mu: base.mu,
                dt: base.dt,
                t_end: base.t_end,
                picard_iters: base.picard_iters,
                picard_tol: base.picard_tol,
                adapt: base.adapt,
            },
            sweep: SweepBlock {
                delta_grid: halvings.clone(),
                mu_grid: halvings,
            },
            output: OutputBlock {
                directory: "out".into(),
                snapshot_times: Vec::new(),
            },
        }
    }
}

/// Every recognised key, in serialization order.
pub const KEYS: [(&str, &str); 20] = [
    ("domain", "dimension"),
    ("domain", "resolution"),
    ("domain", "gamma0"),
    ("domain", "coefficient"),
    ("domain", "initial"),
    ("operator", "s"),
    ("operator", "mass_mode"),
    ("operator", "law_trials"),
    ("operator", "seed"),
    ("solver", "delta"),
    ("solver", "mu"),
    ("solver", "dt"),
    ("solver", "t_end"),
    ("solver", "picard_iters"),
    ("solver", "picard_tol"),
    ("solver", "adapt"),
    ("sweep", "delta_grid"),
    ("sweep", "mu_grid"),
    ("output", "directory"),
    ("output", "snapshot_times"),
];

const SECTIONS: [&str; 5] = ["domain", "operator", "solver", "sweep", "output"];

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn join_f64(items: &[f64]) -> String {
    items.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            s: self.operator.s,
            delta: self.solver.delta,
            mu: self.solver.mu,
            dt: self.solver.dt,
            t_end: self.solver.t_end,
            picard_iters: self.solver.picard_iters,
            picard_tol: self.solver.picard_tol,
            adapt: self.solver.adapt,
            mass_mode: self.operator.mass_mode,
            ..SolverConfig::default()
        }
    }

    /// Value of one key in file syntax.
    pub fn value_of(&self, section: &str, key: &str) -> String {
        let d = &self.domain;
        let o = &self.operator;
        let s = &self.solver;
        match (section, key) {
            ("domain", "dimension") => d.dimension.to_string(),
            ("domain", "resolution") => d.resolution.to_string(),
            ("domain", "gamma0") => join(&d.gamma0),
            ("domain", "coefficient") => d.coefficient.to_string(),
            ("domain", "initial") => d.initial.to_string(),
            ("operator", "s") => format!("{:?}", o.s),
            ("operator", "mass_mode") => o.mass_mode.to_string(),
            ("operator", "law_trials") => o.law_trials.to_string(),
            ("operator", "seed") => o.seed.to_string(),
            ("solver", "delta") => format!("{:?}", s.delta),
            ("solver", "mu") => format!("{:?}", s.mu),
            ("solver", "dt") => format!("{:?}", s.dt),
            ("solver", "t_end") => format!("{:?}", s.t_end),
            ("solver", "picard_iters") => s.picard_iters.to_string(),
            ("solver", "picard_tol") => format!("{:?}", s.picard_tol),
            ("solver", "adapt") => s.adapt.to_string(),
            ("sweep", "delta_grid") => join_f64(&self.sweep.delta_grid),
            ("sweep", "mu_grid") => join_f64(&self.sweep.mu_grid),
            ("output", "directory") => self.output.directory.clone(),
            ("output", "snapshot_times") => join_f64(&self.output.snapshot_times),
            _ => unreachable!("unknown key {section}.{key}"),
        }
    }

    /// Canonical text form; `parse_config(&c.serialize()) == Ok(c)`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for (section, key) in KEYS {
            if section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{section}]\n"));
                current = section;
            }
            out.push_str(&format!("{key} = {}\n", self.value_of(section, key)));
        }
        out
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.serialize().as_bytes()))
    }
}

/// One problem found in a config file. `line` is `None` when the offending
/// value was defaulted or the file could not be read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// A parsed config and the keys that fell back to defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub defaulted: Vec<(&'static str, &'static str)>,
}

impl ParsedConfig {
    /// `[section] key = value` lines for every defaulted key.
    pub fn defaults_echo(&self) -> Vec<String> {
        self.defaulted
            .iter()
            .map(|(s, k)| format!("[{s}] {k} = {}", self.config.value_of(s, k)))
            .collect()
    }
}

fn parse_num<T: FromStr>(v: &str, what: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("expects {what}, got '{v}'"))
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_num(x.trim(), "a comma-separated list of numbers")).collect()
}

fn assign(cfg: &mut ExperimentConfig, section: &str, key: &str, v: &str) -> Result<(), String> {
    const REAL: &str = "a number";
    const COUNT: &str = "a nonnegative integer";
    match (section, key) {
        ("domain", "dimension") => cfg.domain.dimension = parse_num(v, COUNT)?,
        ("domain", "resolution") => cfg.domain.resolution = parse_num(v, COUNT)?,
        ("domain", "gamma0") => {
            cfg.domain.gamma0 = v
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(Side::from_str)
                .collect::<Result<_, _>>()?
        }
        ("domain", "coefficient") => cfg.domain.coefficient = v.parse()?,
        ("domain", "initial") => cfg.domain.initial = v.parse()?,
        ("operator", "s") => cfg.operator.s = parse_num(v, REAL)?,
        ("operator", "mass_mode") => cfg.operator.mass_mode = v.parse()?,
        ("operator", "law_trials") => cfg.operator.law_trials = parse_num(v, COUNT)?,
        ("operator", "seed") => cfg.operator.seed = parse_num(v, COUNT)?,
        ("solver", "delta") => cfg.solver.delta = parse_num(v, REAL)?,
        ("solver", "mu") => cfg.solver.mu = parse_num(v, REAL)?,
        ("solver", "dt") => cfg.solver.dt = parse_num(v, REAL)?,
        ("solver", "t_end") => cfg.solver.t_end = parse_num(v, REAL)?,
        ("solver", "picard_iters") => cfg.solver.picard_iters = parse_num(v, COUNT)?,
        ("solver", "picard_tol") => cfg.solver.picard_tol = parse_num(v, REAL)?,
        ("solver", "adapt") => cfg.solver.adapt = parse_num(v, "true or false")?,
        ("sweep", "delta_grid") => cfg.sweep.delta_grid = parse_list(v)?,
        ("sweep", "mu_grid") => cfg.sweep.mu_grid = parse_list(v)?,
        ("output", "directory") => {
            if v.is_empty() {
                return Err("expects a path".into());
            }
            cfg.output.directory = v.to_string()
        }
        ("output", "snapshot_times") => cfg.output.snapshot_times = parse_list(v)?,
        _ => return Err(format!("unknown key '{key}' in [{section}]")),
    }
    Ok(())
}

fn grid_violation(name: &str, grid: &[f64]) -> Option<String> {
    if grid.is_empty() {
        Some(format!("{name} must not be empty"))
    } else if grid.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
        Some(format!("{name} entries must lie in (0,1]"))
    } else if grid.windows(2).any(|w| w[1] >= w[0]) {
        Some(format!("{name} must be strictly decreasing"))
    } else {
        None
    }
}

/// Constraint breaches, each tagged with the key it belongs to.
fn violations(cfg: &ExperimentConfig) -> Vec<(&'static str, &'static str, String)> {
    let mut out = Vec::new();
    let d = &cfg.domain;
    if !(1..=2).contains(&d.dimension) {
        out.push(("domain", "dimension", format!("dimension must be 1 or 2, got {}", d.dimension)));
    }
    if d.resolution < 4 {
        out.push(("domain", "resolution", format!("resolution must be at least 4, got {}", d.resolution)));
    }
    if d.gamma0.is_empty() {
        out.push(("domain", "gamma0", "gamma0 must name at least one side".into()));
    } else if (1..=2).contains(&d.dimension) {
        let allowed = Side::sides_for(d.dimension);
        for side in &d.gamma0 {
            if !allowed.contains(side) {
                out.push(("domain", "gamma0", format!("side '{side}' does not exist in dimension {}", d.dimension)));
            }
        }
    }
    if let Some(msg) = d.coefficient.violation() {
        out.push(("domain", "coefficient", msg));
    }
    if cfg.operator.law_trials == 0 {
        out.push(("operator", "law_trials", "law_trials must be at least 1".into()));
    }
    for msg in cfg.solver_config().violations() {
        let key = match msg.split_whitespace().next().unwrap_or("") {
            "s" => ("operator", "s"),
            "delta" => ("solver", "delta"),
            "mu" => ("solver", "mu"),
            "dt" => ("solver", "dt"),
            "t_end" => ("solver", "t_end"),
            "picard_tol" => ("solver", "picard_tol"),
            _ => ("solver", "picard_iters"),
        };
        out.push((key.0, key.1, msg));
    }
    for (key, grid) in [("delta_grid", &cfg.sweep.delta_grid), ("mu_grid", &cfg.sweep.mu_grid)] {
        if let Some(msg) = grid_violation(key, grid) {
            out.push(("sweep", key, msg));
        }
    }
    let t_end = cfg.solver.t_end;
    if cfg.output.snapshot_times.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
        out.push(("output", "snapshot_times", format!("snapshot_times must lie in [0, {t_end}]")));
    }
    out
}

/// Parses and validates; all problems are reported, not just the first.
pub fn parse_config_detailed(text: &str) -> Result<ParsedConfig, ConfigErrors> {
    let mut cfg = ExperimentConfig::default();
    let mut issues = Vec::new();
    let mut seen: BTreeMap<(&'static str, &'static str), usize> = BTreeMap::new();
    let mut section: Option<&'static str> = None;
    let mut unparsed: Vec<(&'static str, &'static str)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut issue = |message: String| issues.push(ConfigIssue { line: Some(line_no), message });
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            match SECTIONS.iter().find(|s| **s == name.trim()) {
                Some(s) => section = Some(s),
                None => {
                    issue(format!("unknown section [{}]", name.trim()));
                    section = None;
                }
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            issue(format!("expected 'key = value', got '{line}'"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            issue(format!("key '{key}' outside a known section"));
            continue;
        };
        let Some(&(s, k)) = KEYS.iter().find(|(s, k)| *s == sec && *k == key) else {
            issue(format!("unknown key '{key}' in [{sec}]"));
            continue;
        };
        if let Some(prev) = seen.insert((s, k), line_no) {
            issue(format!("duplicate key '{key}' in [{sec}] (first set on line {prev})"));
            continue;
        }
        if let Err(msg) = assign(&mut cfg, s, k, value) {
            issue(format!("{key} {msg}"));
            unparsed.push((s, k));
        }
    }

    // values that failed to parse are still defaults; don't blame them twice
    for (s, k, message) in violations(&cfg) {
        if !unparsed.contains(&(s, k)) {
            let line = seen.get(&(s, k)).copied();
            let message = if line.is_none() {
                format!("{message} (default for [{s}] {k})")
            } else {
                message
            };
            issues.push(ConfigIssue { line, message });
        }
    }
    if !issues.is_empty() {
        issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        return Err(ConfigErrors(issues));
    }
    let defaulted = KEYS.iter().copied().filter(|sk| !seen.contains_key(sk)).collect();
    Ok(ParsedConfig { config: cfg, defaulted })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    parse_config_detailed(text).map(|p| p.config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "\
[domain]
dimension = 1
resolution = 100
gamma0 = left

[operator]
s = 0.5

[solver]
delta = 1e-2
mu = 1e-2
dt = 1e-4
t_end = 0.1
";

    #[test]
    fn minimal_file() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.domain.resolution, 100);
        assert_eq!(c.domain.gamma0, vec![Side::Left]);
        assert_eq!(c.solver.dt, 1e-4);
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn exponent_out_of_range_cites_line() {
        let text = MINIMAL.replace("s = 0.5", "s = 1.5");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, Some(7));
        assert!(err.0[0].message.contains("s must lie in (0,1)"), "{err}");
    }

    #[test]
    fn every_problem_is_reported() {
        let text = "\
[domain]
dimension = two
colour = red
[physics]
x = 1
[solver]
dt 1e-4
dt = 1e-4
dt = 2e-4
";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.0.iter().map(|i| i.line.unwrap()).collect();
        assert_eq!(lines, vec![2, 3, 4, 5, 7, 9], "{err}");
        assert!(err.0[0].message.contains("dimension expects"));
        assert!(err.0[5].message.contains("duplicate"));
    }

    #[test]
    fn all_constraint_breaches_reported() {
        let text = "[domain]\nresolution = 2\n[solver]\ndt = -1\nmu = 0\n[sweep]\nmu_grid = 0.1, 0.2\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.0.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![Some(2), Some(4), Some(5), Some(7)], "{err}");
    }

    #[test]
    fn syntax_and_constraint_problems_together() {
        let err = parse_config("[operator]\ns = 1.5\nfoo = 1\n[solver]\ndt = fast\n").unwrap_err();
        let lines: Vec<_> = err.0.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![Some(2), Some(3), Some(5)], "{err}");
        assert!(err.0[0].message.contains("s must lie in (0,1)"));
    }

    #[test]
    fn sweep_only_file_echoes_solver_defaults() {
        let parsed = parse_config_detailed("[sweep]\ndelta_grid = 0.1, 0.05\nmu_grid = 0.01\n").unwrap();
        assert_eq!(parsed.config.solver, ExperimentConfig::default().solver);
        let echo = parsed.defaults_echo();
        assert!(echo.contains(&"[solver] dt = 0.0001".to_string()), "{echo:?}");
        assert!(!echo.iter().any(|l| l.contains("delta_grid")));
    }

    #[test]
    fn side_must_exist_in_dimension() {
        let err = parse_config("[domain]\ngamma0 = left, top\n").unwrap_err();
        assert_eq!(err.0[0].line, Some(2));
        assert!(err.0[0].message.contains("top"));
    }

    #[test]
    fn coefficient_syntax() {
        assert_eq!("identity".parse::<Coefficient>(), Ok(Coefficient::Identity));
        assert_eq!("full(2, 0.5, 1)".parse::<Coefficient>(), Ok(Coefficient::Full(2.0, 0.5, 1.0)));
        assert!("diagonal(1)".parse::<Coefficient>().is_err());
        assert!(Coefficient::Full(1.0, 2.0, 1.0).violation().is_some());
        assert!(Coefficient::Affine(1.0, -1.0).violation().is_some());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.solver.dt = 5e-5;
        assert_ne!(a.hash(), b.hash());
    }

    fn side_set(dim: usize) -> impl Strategy<Value = Vec<Side>> {
        let all = Side::sides_for(dim).to_vec();
        proptest::sample::subsequence(all.clone(), 1..=all.len())
    }

    fn grid() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.05f64..0.95, 1..5).prop_map(|mut v| {
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v.dedup();
            v
        })
    }

    fn config() -> impl Strategy<Value = ExperimentConfig> {
        let coeff = prop_oneof![
            Just(Coefficient::Identity),
            (0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b)| Coefficient::Diagonal(a, b)),
            (1.0f64..5.0, -0.5f64..0.5, 1.0f64..5.0).prop_map(|(a, b, c)| Coefficient::Full(a, b, c)),
            (0.5f64..2.0, -0.4f64..1.0).prop_map(|(a, b)| Coefficient::Affine(a, b)),
        ];
        let profile = prop_oneof![
            Just(InitialProfile::SineCompatible),
            Just(InitialProfile::Bump),
            Just(InitialProfile::Plateau),
            Just(InitialProfile::Zero),
        ];
        let domain = (1usize..=2)
            .prop_flat_map(|dim| (Just(dim), 4usize..300, side_set(dim)))
            .prop_flat_map(move |(dim, res, g0)| (Just(dim), Just(res), Just(g0), coeff.clone(), profile.clone()))
            .prop_map(|(dimension, resolution, gamma0, coefficient, initial)| DomainBlock {
                dimension,
                resolution,
                gamma0,
                coefficient,
                initial,
            });
        let operator = (0.001f64..0.999, any::<bool>(), 1usize..500, any::<u64>()).prop_map(|(s, c, law_trials, seed)| {
            OperatorBlock {
                s,
                mass_mode: if c { MassMode::Consistent } else { MassMode::Lumped },
                law_trials,
                seed,
            }
        });
        let solver = (1e-6f64..1.0, 1e-6f64..1.0, 1e-7f64..1e-2, 1e-3f64..10.0, 0usize..20, 1e-14f64..1e-4, any::<bool>())
            .prop_map(|(delta, mu, dt, t_end, picard_iters, picard_tol, adapt)| SolverBlock {
                delta,
                mu,
                dt,
                t_end,
                picard_iters,
                picard_tol,
                adapt,
            });
        (domain, operator, solver, grid(), grid(), "[a-z][a-z0-9_/]{0,12}", proptest::collection::vec(0.0f64..1.0, 0..4))
            .prop_map(|(domain, operator, solver, delta_grid, mu_grid, directory, fracs)| {
                let snapshot_times = fracs.iter().map(|f| f * solver.t_end).collect();
                ExperimentConfig {
                    domain,
                    operator,
                    solver,
                    sweep: SweepBlock { delta_grid, mu_grid },
                    output: OutputBlock { directory, snapshot_times },
                }
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(c in config()) {
            let text = c.serialize();
            let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(back.hash(), c.hash());
        }
    }
}
