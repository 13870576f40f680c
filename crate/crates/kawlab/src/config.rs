//! Sectioned `key = value` experiment configuration.
//!
//! Files may set any subset of keys; the rest come from the experiment's
//! catalog defaults. Unknown sections, unknown keys, duplicates and malformed
//! values are errors carrying the offending line.

use std::fmt::Write as _;
use std::str::FromStr;

use kawlab_core::operators::Transform;

use crate::catalog::{self, ParamKind};
use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Per-level budgets from the level structure and `c`, `nu`.
    Multilevel,
    /// The first `m` rows.
    Lowpass,
    /// The rows listed in `omega`.
    Explicit,
}

impl Sampling {
    pub fn name(&self) -> &'static str {
        match self {
            Sampling::Multilevel => "multilevel",
            Sampling::Lowpass => "lowpass",
            Sampling::Explicit => "explicit",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "multilevel" => Some(Sampling::Multilevel),
            "lowpass" => Some(Sampling::Lowpass),
            "explicit" => Some(Sampling::Explicit),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    pub kind: Transform,
    /// `N = 2^(r-1)` with `r` dyadic levels.
    pub r: usize,
    pub sampling: Sampling,
    pub c: f64,
    pub nu: f64,
    pub m: usize,
    /// 0-based rows.
    pub omega: Vec<usize>,
}

impl OperatorSpec {
    pub fn n(&self) -> usize {
        1 << (self.r - 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSpec {
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSpec {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Hidden width; 0 picks a size from the data.
    pub hidden: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    /// Output directory; empty selects `kawlab-out/<slug>`.
    pub out: String,
    pub operator: OperatorSpec,
    pub sparsities: Vec<usize>,
    pub solver: SolverSpec,
    pub train: TrainSpec,
    /// Experiment parameters in catalog order.
    pub params: Vec<(String, String)>,
}

/// One `key = value` line of a parsed file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

const SECTIONS: [&str; 6] = [
    "experiment",
    "operator",
    "levels",
    "solver",
    "train",
    "params",
];

/// Splits a file into entries, rejecting unknown sections and duplicate keys.
pub fn parse_ini(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| HarnessError::config(line, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(HarnessError::config(
                    line,
                    format!("unknown section [{name}]"),
                ));
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| HarnessError::config(line, "expected key = value"))?;
        let sec = section
            .clone()
            .ok_or_else(|| HarnessError::config(line, "key outside of any section"))?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(HarnessError::config(line, "empty key"));
        }
        if let Some(prev) = out.iter().find(|e| e.section == sec && e.key == key) {
            return Err(HarnessError::config(
                line,
                format!(
                    "duplicate key {sec}.{key} (first set on line {})",
                    prev.line
                ),
            ));
        }
        out.push(Entry {
            section: sec,
            key,
            value: v.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

fn value<T: FromStr>(e: &Entry) -> Result<T> {
    e.value.parse::<T>().map_err(|_| {
        HarnessError::config(
            e.line,
            format!("bad value {:?} for {}.{}", e.value, e.section, e.key),
        )
    })
}

fn parse_list<T: FromStr>(s: &str) -> Option<Vec<T>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<T>().ok()).collect()
}

fn list<T: FromStr>(e: &Entry) -> Result<Vec<T>> {
    parse_list(&e.value).ok_or_else(|| {
        HarnessError::config(
            e.line,
            format!("bad list {:?} for {}.{}", e.value, e.section, e.key),
        )
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Checks a parameter value against its declared kind.
pub fn check_param(kind: ParamKind, v: &str) -> bool {
    match kind {
        ParamKind::Int => v.parse::<u64>().is_ok(),
        ParamKind::Float => v.parse::<f64>().is_ok_and(f64::is_finite),
        ParamKind::FloatList => parse_list::<f64>(v).is_some(),
        ParamKind::Bool => matches!(v, "true" | "false"),
        ParamKind::Text => !v.contains('\n'),
    }
}

impl ExperimentConfig {
    /// Catalog defaults for the named experiment.
    pub fn defaults(name: &str, seed: u64) -> Result<Self> {
        let exp = catalog::find(name).ok_or_else(|| {
            HarnessError::Usage(format!("unknown experiment {name:?}; see `kawlab list`"))
        })?;
        let mut cfg = ExperimentConfig {
            name: exp.name.to_string(),
            seed,
            out: String::new(),
            operator: OperatorSpec {
                kind: Transform::Walsh,
                r: 6,
                sampling: Sampling::Multilevel,
                c: 1.0,
                nu: 0.1,
                m: 0,
                omega: Vec::new(),
            },
            sparsities: vec![1, 1, 1, 1, 1, 2],
            solver: SolverSpec {
                max_iter: 100_000,
                tol: 1e-9,
            },
            train: TrainSpec {
                epochs: 300,
                batch_size: 16,
                lr: 1e-3,
                hidden: 0,
            },
            params: exp
                .params
                .iter()
                .map(|p| (p.name.to_string(), p.default.to_string()))
                .collect(),
        };
        (exp.setup)(&mut cfg);
        Ok(cfg)
    }

    /// Parses a file; `[experiment] name` selects the defaults unless `name` is given.
    pub fn from_ini(text: &str, name: Option<&str>) -> Result<Self> {
        let entries = parse_ini(text)?;
        let file_name = entries
            .iter()
            .find(|e| e.section == "experiment" && e.key == "name");
        let chosen = match (name, file_name) {
            (Some(n), Some(e)) if e.value != n => {
                return Err(HarnessError::config(
                    e.line,
                    format!("config is for {:?}, not {n:?}", e.value),
                ))
            }
            (Some(n), _) => n.to_string(),
            (None, Some(e)) => e.value.clone(),
            (None, None) => return Err(HarnessError::config(1, "missing [experiment] name")),
        };
        let mut cfg = ExperimentConfig::defaults(&chosen, 0).map_err(|e| match (e, file_name) {
            (HarnessError::Usage(m), Some(f)) => HarnessError::config(f.line, m),
            (e, _) => e,
        })?;
        for e in &entries {
            cfg.apply(e)?;
        }
        cfg.validate().map_err(|m| HarnessError::config(0, m))?;
        Ok(cfg)
    }

    fn apply(&mut self, e: &Entry) -> Result<()> {
        let unknown =
            || HarnessError::config(e.line, format!("unknown key {}.{}", e.section, e.key));
        match (e.section.as_str(), e.key.as_str()) {
            ("experiment", "name") => {}
            ("experiment", "seed") => self.seed = value(e)?,
            ("experiment", "out") => self.out = e.value.clone(),
            ("operator", "kind") => {
                self.operator.kind = Transform::parse(&e.value).ok_or_else(|| {
                    HarnessError::config(e.line, format!("unknown transform {:?}", e.value))
                })?
            }
            ("operator", "r") => self.operator.r = value(e)?,
            ("operator", "sampling") => {
                self.operator.sampling = Sampling::parse(&e.value).ok_or_else(|| {
                    HarnessError::config(e.line, format!("unknown sampling {:?}", e.value))
                })?
            }
            ("operator", "c") => self.operator.c = value(e)?,
            ("operator", "nu") => self.operator.nu = value(e)?,
            ("operator", "m") => self.operator.m = value(e)?,
            ("operator", "omega") => self.operator.omega = list(e)?,
            ("levels", "sparsities") => self.sparsities = list(e)?,
            ("solver", "max_iter") => self.solver.max_iter = value(e)?,
            ("solver", "tol") => self.solver.tol = value(e)?,
            ("train", "epochs") => self.train.epochs = value(e)?,
            ("train", "batch_size") => self.train.batch_size = value(e)?,
            ("train", "lr") => self.train.lr = value(e)?,
            ("train", "hidden") => self.train.hidden = value(e)?,
            ("params", key) => {
                let exp = catalog::find(&self.name).expect("validated experiment");
                let p = exp
                    .params
                    .iter()
                    .find(|p| p.name == key)
                    .ok_or_else(unknown)?;
                if !check_param(p.kind, &e.value) {
                    return Err(HarnessError::config(
                        e.line,
                        format!(
                            "bad value {:?} for params.{key} ({})",
                            e.value,
                            p.kind.name()
                        ),
                    ));
                }
                self.set_param(key, &e.value);
            }
            _ => return Err(unknown()),
        }
        Ok(())
    }

    /// Applies `section.key=value` overrides, as given on the command line.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, v) = assignment.split_once('=').ok_or_else(|| {
            HarnessError::Usage(format!("expected section.key=value, got {assignment:?}"))
        })?;
        let (section, key) = path
            .split_once('.')
            .ok_or_else(|| HarnessError::Usage(format!("expected section.key, got {path:?}")))?;
        if !SECTIONS.contains(&section) {
            return Err(HarnessError::Usage(format!("unknown section {section:?}")));
        }
        self.apply(&Entry {
            section: section.to_string(),
            key: key.to_string(),
            value: v.trim().to_string(),
            line: 0,
        })?;
        self.validate().map_err(HarnessError::Usage)
    }

    pub(crate) fn set_param(&mut self, key: &str, v: &str) {
        match self.params.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = v.to_string(),
            None => self.params.push((key.to_string(), v.to_string())),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let op = &self.operator;
        if !(2..=13).contains(&op.r) {
            return Err(format!("operator.r = {} must lie in 2..=13", op.r));
        }
        let n = op.n();
        if op.omega.iter().any(|&i| i >= n) {
            return Err(format!("operator.omega has a row outside 0..{n}"));
        }
        if op.m > n {
            return Err(format!("operator.m = {} exceeds N = {n}", op.m));
        }
        if self.train.batch_size == 0 {
            return Err("train.batch_size must be positive".into());
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> &str {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("parameter {key} is not declared for {}", self.name))
    }

    pub fn real(&self, key: &str) -> f64 {
        self.param(key).parse().expect("validated float")
    }

    pub fn int(&self, key: &str) -> usize {
        self.param(key).parse().expect("validated integer")
    }

    pub fn flag(&self, key: &str) -> bool {
        self.param(key) == "true"
    }

    pub fn reals(&self, key: &str) -> Vec<f64> {
        parse_list(self.param(key)).expect("validated list")
    }

    /// Directory-safe experiment name.
    pub fn slug(&self) -> String {
        self.name.replace(' ', "-")
    }

    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let op = &self.operator;
        let _ = writeln!(
            s,
            "[experiment]\nname = {}\nseed = {}\nout = {}",
            self.name, self.seed, self.out
        );
        let _ = writeln!(
            s,
            "\n[operator]\nkind = {}\nr = {}\nsampling = {}\nc = {}\nnu = {}\nm = {}\nomega = {}",
            op.kind.name(),
            op.r,
            op.sampling.name(),
            op.c,
            op.nu,
            op.m,
            join(&op.omega)
        );
        let _ = writeln!(s, "\n[levels]\nsparsities = {}", join(&self.sparsities));
        let _ = writeln!(
            s,
            "\n[solver]\nmax_iter = {}\ntol = {}",
            self.solver.max_iter, self.solver.tol
        );
        let t = &self.train;
        let _ = writeln!(
            s,
            "\n[train]\nepochs = {}\nbatch_size = {}\nlr = {}\nhidden = {}",
            t.epochs, t.batch_size, t.lr, t.hidden
        );
        s.push_str("\n[params]\n");
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
