//! Experiment configuration: presets, policy specs and the key=value file
//! format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lsi_update::ingest::WeightingScheme;
use lsi_update::{SolverOptions, UpdatePolicy};

use crate::Error;

/// Where the term-document matrix, queries and judgments come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Files {
        matrix: PathBuf,
        queries: PathBuf,
        qrels: PathBuf,
    },
    /// Seeded random collection of raw counts with `nq` queries and
    /// `relevant` judged documents per query.
    Synthetic {
        m: usize,
        n: usize,
        nq: usize,
        relevant: usize,
        density: f64,
    },
}

/// Everything [`run_experiment`](crate::run_experiment) needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub k: usize,
    pub t: usize,
    pub p: usize,
    pub policies: Vec<PolicySpec>,
    pub alpha: f64,
    pub normalize: bool,
    pub n_points: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub max_docs: Option<usize>,
    pub weighting: WeightingScheme,
    /// Write zero for every timing column so repeated runs are byte-identical.
    pub deterministic: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Preset::Synthetic.config()
    }
}

/// A configured updating policy, as written on the command line:
/// `zs`, `ob`, `sv:l=10`, `gkl:l=20` or `gkl:l1=4,l2=8`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec(pub UpdatePolicy);

impl PolicySpec {
    pub fn policy(&self) -> &UpdatePolicy {
        &self.0
    }

    pub fn label(&self) -> String {
        self.0.label()
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("bad policy {s:?}; expected zs, ob, sv:l=N or gkl:l=N"));
        let s = s.trim().to_ascii_lowercase();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.as_str(), None),
        };
        let mut l = None;
        let mut l1 = None;
        let mut l2 = None;
        if let Some(args) = args {
            for part in args.split(',') {
                let (key, value) = part.split_once('=').ok_or_else(bad)?;
                let value: usize = value.trim().parse().map_err(|_| bad())?;
                match key.trim() {
                    "l" => l = Some(value),
                    "l1" => l1 = Some(value),
                    "l2" => l2 = Some(value),
                    _ => return Err(bad()),
                }
            }
        }
        let first = l.or(l1);
        let policy = match name {
            "zs" if args.is_none() => UpdatePolicy::ZhaSimon,
            "ob" if args.is_none() => UpdatePolicy::OBrien,
            "sv" => UpdatePolicy::SingularVectors {
                l: first.ok_or_else(bad)?,
                l2,
                solver: SolverOptions::default(),
            },
            "gkl" => UpdatePolicy::Gkl {
                l: first.ok_or_else(bad)?,
                l2,
            },
            _ => return Err(bad()),
        };
        if l.is_some() && l1.is_some() {
            return Err(bad());
        }
        Ok(PolicySpec(policy))
    }
}

/// Shipped configurations. The paper collections only fix the parameters;
/// the data paths still have to be given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Synthetic,
    Medline,
    MedlineP50,
    Npl,
    NplP500,
    /// Far beyond a desktop run; listed for completeness.
    Trec8,
    Trec8P1000,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Synthetic,
        Preset::Medline,
        Preset::MedlineP50,
        Preset::Npl,
        Preset::NplP500,
        Preset::Trec8,
        Preset::Trec8P1000,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Synthetic => "synthetic",
            Preset::Medline => "medline",
            Preset::MedlineP50 => "medline-p50",
            Preset::Npl => "npl",
            Preset::NplP500 => "npl-p500",
            Preset::Trec8 => "trec8",
            Preset::Trec8P1000 => "trec8-p1000",
        }
    }

    pub fn desk_scale(self) -> bool {
        !matches!(self, Preset::Trec8 | Preset::Trec8P1000)
    }

    pub fn config(self) -> ExperimentConfig {
        let pol = |specs: &[&str]| -> Vec<PolicySpec> {
            specs.iter().map(|s| s.parse().expect("preset policy")).collect()
        };
        let (k, t, p, policies) = match self {
            Preset::Synthetic => (4, 10, 5, pol(&["zs", "sv:l=2", "gkl:l=3", "ob"])),
            Preset::Medline => (75, 533, 25, pol(&["zs", "sv:l=2", "gkl:l=3"])),
            Preset::MedlineP50 => (75, 533, 50, pol(&["zs", "sv:l=4", "gkl:l=5"])),
            Preset::Npl => (550, 4000, 300, pol(&["zs", "sv:l=10", "gkl:l=20"])),
            Preset::NplP500 => (550, 4000, 500, pol(&["zs", "sv:l=10", "gkl:l=20"])),
            Preset::Trec8 => (400, 90_000, 500, pol(&["zs", "sv:l=10", "gkl:l=20", "ob"])),
            Preset::Trec8P1000 => (400, 90_000, 1000, pol(&["zs", "sv:l=10", "gkl:l=20", "ob"])),
        };
        let source = match self {
            Preset::Synthetic => DataSource::Synthetic {
                m: 20,
                n: 30,
                nq: 5,
                relevant: 4,
                density: 0.3,
            },
            _ => DataSource::Files {
                matrix: PathBuf::new(),
                queries: PathBuf::new(),
                qrels: PathBuf::new(),
            },
        };
        ExperimentConfig {
            source,
            k,
            t,
            p,
            policies,
            alpha: 0.0,
            normalize: true,
            n_points: lsi_update::eval::DEFAULT_POINTS,
            seed: 1,
            out: None,
            max_docs: None,
            weighting: WeightingScheme::default(),
            deterministic: false,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!("unknown preset {s:?}; known: {}", names.join(", ")))
            })
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl ExperimentConfig {
    /// Sets one key. Keys mirror the command-line flags without dashes:
    /// `matrix`, `queries`, `qrels`, `k`, `t`, `p`, `policy` (repeatable or
    /// comma separated), `alpha`, `normalize`, `no-normalize`, `n-points`,
    /// `seed`, `out`, `max-docs`, `weighting`, `deterministic`.
    /// `policy` entries append; call [`clear_policies`](Self::clear_policies)
    /// first to replace.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let value = value.trim();
        match key.trim() {
            "matrix" | "queries" | "qrels" => {
                if matches!(self.source, DataSource::Synthetic { .. }) {
                    self.source = DataSource::Files {
                        matrix: PathBuf::new(),
                        queries: PathBuf::new(),
                        qrels: PathBuf::new(),
                    };
                }
                if let DataSource::Files { matrix, queries, qrels } = &mut self.source {
                    let slot = match key.trim() {
                        "matrix" => matrix,
                        "queries" => queries,
                        _ => qrels,
                    };
                    *slot = PathBuf::from(value);
                }
            }
            "k" => self.k = parse_num("k", value)?,
            "t" => self.t = parse_num("t", value)?,
            "p" => self.p = parse_num("p", value)?,
            "policy" => {
                for part in split_policies(value) {
                    self.policies.push(part.parse()?);
                }
            }
            "alpha" => self.alpha = parse_num("alpha", value)?,
            "normalize" => self.normalize = parse_bool("normalize", value)?,
            "no-normalize" => self.normalize = !parse_bool("no-normalize", value)?,
            "n-points" => self.n_points = parse_num("n-points", value)?,
            "seed" => self.seed = parse_num("seed", value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "max-docs" => self.max_docs = Some(parse_num("max-docs", value)?),
            "weighting" => self.weighting = value.parse()?,
            "deterministic" => self.deterministic = parse_bool("deterministic", value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn clear_policies(&mut self) {
        self.policies.clear();
    }

    /// Applies a key=value file on top of `self`. Blank lines and lines
    /// starting with `#` are ignored. A `preset` key, if present, must come
    /// first and resets everything before it. Policies in the file replace
    /// those of the preset.
    pub fn apply_file(&mut self, text: &str) -> Result<(), Error> {
        let mut replaced_policies = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", idx + 1)))?;
            let key = key.trim();
            let result = if key == "preset" {
                value.trim().parse::<Preset>().map(|p| *self = p.config())
            } else {
                if key == "policy" && !replaced_policies {
                    self.clear_policies();
                    replaced_policies = true;
                }
                self.set(key, value)
            };
            result.map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        let mut config = ExperimentConfig::default();
        config.apply_file(&text)?;
        Ok(config)
    }

    /// The config in the key=value form accepted by [`apply_file`](Self::apply_file).
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        if let DataSource::Files { matrix, queries, qrels } = &self.source {
            out += &format!("matrix = {}\n", matrix.display());
            out += &format!("queries = {}\n", queries.display());
            out += &format!("qrels = {}\n", qrels.display());
        }
        out += &format!("k = {}\nt = {}\np = {}\n", self.k, self.t, self.p);
        for p in &self.policies {
            out += &format!("policy = {p}\n");
        }
        out += &format!(
            "alpha = {}\nnormalize = {}\nn-points = {}\nseed = {}\n",
            self.alpha, self.normalize, self.n_points, self.seed
        );
        if let Some(o) = &self.out {
            out += &format!("out = {}\n", o.display());
        }
        if let Some(m) = self.max_docs {
            out += &format!("max-docs = {m}\n");
        }
        out += &format!("weighting = {}\ndeterministic = {}\n", self.weighting, self.deterministic);
        out
    }

    /// Checks the parameter constraints that do not depend on the data.
    pub fn validate(&self) -> Result<(), Error> {
        if self.policies.is_empty() {
            return Err(Error::Config("no policies configured".into()));
        }
        if self.p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if self.k == 0 || self.k > self.t {
            return Err(Error::Config(format!("k = {} must be in 1..=t ({})", self.k, self.t)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        if self.n_points < 2 {
            return Err(Error::Config("n-points must be at least 2".into()));
        }
        if let DataSource::Files { matrix, queries, qrels } = &self.source {
            for (name, path) in [("matrix", matrix), ("queries", queries), ("qrels", qrels)] {
                if path.as_os_str().is_empty() {
                    return Err(Error::Config(format!("missing {name} path")));
                }
            }
        }
        Ok(())
    }
}

/// Splits `sv:l=2, gkl:l1=1,l2=3` into policies; commas inside a policy's
/// argument list stay with it.
fn split_policies(value: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let continues_args = !part.contains(':') && part.contains('=') && !out.is_empty();
        if continues_args {
            let last = out.last_mut().expect("checked nonempty");
            last.push(',');
            last.push_str(part);
        } else {
            out.push(part.to_string());
        }
    }
    out
}
