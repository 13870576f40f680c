use std::fmt::Write;

use super::mc::{wilson, Estimate};
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Serializable record of an instability probe.
///
/// Text form: a `key = value` header, then `[estimates]` and one
/// `[witness <name>]` CSV section per stored vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbeReport {
    pub config: Vec<(String, String)>,
    pub d_xxp: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub lipschitz_lower: f64,
    pub empirical_lipschitz: Option<f64>,
    pub seeds: Vec<u64>,
    pub estimates: Vec<(String, Estimate)>,
    pub witnesses: Vec<(String, CVector)>,
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

impl ProbeReport {
    pub fn new(d_xxp: f64, eta: f64, epsilon: f64) -> Result<Self> {
        Ok(ProbeReport {
            d_xxp,
            eta,
            epsilon,
            lipschitz_lower: super::lipschitz_lower_bound(d_xxp, eta, epsilon)?,
            ..Default::default()
        })
    }

    /// Re-evaluates the formula bound, the Wilson intervals and the
    /// empirical-versus-formula inequality from the stored raw values.
    pub fn verify(&self) -> Result<()> {
        let f = super::lipschitz_lower_bound(self.d_xxp, self.eta, self.epsilon)?;
        if f != self.lipschitz_lower {
            return Err(Error::Argument(format!(
                "stored bound {} differs from {f}",
                self.lipschitz_lower
            )));
        }
        for (name, e) in &self.estimates {
            if wilson(e.successes, e.trials) != *e {
                return Err(Error::Argument(format!(
                    "estimate {name} does not match its counts"
                )));
            }
        }
        if let Some(emp) = self.empirical_lipschitz {
            if emp < self.lipschitz_lower {
                return Err(Error::Argument(format!(
                    "empirical constant {emp} is below the bound {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("PROBE-REPORT 1\n");
        for (k, v) in &self.config {
            let _ = writeln!(s, "config.{k} = {v}");
        }
        let _ = writeln!(s, "d_xxp = {}", self.d_xxp);
        let _ = writeln!(s, "eta = {}", self.eta);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "lipschitz_lower = {}", self.lipschitz_lower);
        if let Some(e) = self.empirical_lipschitz {
            let _ = writeln!(s, "empirical_lipschitz = {e}");
        }
        let seeds: Vec<String> = self.seeds.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "seeds = {}", seeds.join(","));
        s.push_str("[estimates]\nevent,successes,trials,p,lower,upper\n");
        for (name, e) in &self.estimates {
            let _ = writeln!(
                s,
                "{name},{},{},{},{},{}",
                e.successes, e.trials, e.p, e.lower, e.upper
            );
        }
        for (name, v) in &self.witnesses {
            let _ = writeln!(s, "[witness {name}]\nindex,re,im");
            for (i, z) in v.iter().enumerate() {
                let _ = writeln!(s, "{i},{},{}", z.re, z.im);
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "PROBE-REPORT 1")) => {}
            _ => return parse_err(1, "missing PROBE-REPORT header"),
        }
        let mut rep = ProbeReport::default();
        let mut section: Option<String> = None;
        let num = |line: usize, v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .or_else(|_| parse_err(line, format!("bad number {v:?}")))
        };
        for (ln, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if let Some(w) = name.strip_prefix("witness ") {
                    rep.witnesses.push((w.to_string(), CVector::zeros(0)));
                } else if name != "estimates" {
                    return parse_err(ln, format!("unknown section {name}"));
                }
                section = Some(name.to_string());
                continue;
            }
            match section.as_deref() {
                None => {
                    let (k, v) = line
                        .split_once('=')
                        .map(|(k, v)| (k.trim(), v.trim()))
                        .ok_or(Error::Parse {
                            line: ln,
                            msg: "expected key = value".into(),
                        })?;
                    if let Some(c) = k.strip_prefix("config.") {
                        rep.config.push((c.to_string(), v.to_string()));
                        continue;
                    }
                    match k {
                        "d_xxp" => rep.d_xxp = num(ln, v)?,
                        "eta" => rep.eta = num(ln, v)?,
                        "epsilon" => rep.epsilon = num(ln, v)?,
                        "lipschitz_lower" => rep.lipschitz_lower = num(ln, v)?,
                        "empirical_lipschitz" => rep.empirical_lipschitz = Some(num(ln, v)?),
                        "seeds" => {
                            rep.seeds = v
                                .split(',')
                                .filter(|s| !s.is_empty())
                                .map(|s| {
                                    s.trim()
                                        .parse::<u64>()
                                        .or_else(|_| parse_err(ln, "bad seed"))
                                })
                                .collect::<Result<_>>()?
                        }
                        _ => return parse_err(ln, format!("unknown key {k}")),
                    }
                }
                Some(_) if line.starts_with("event,") || line.starts_with("index,") => {}
                Some("estimates") => {
                    let f: Vec<&str> = line.split(',').collect();
                    if f.len() != 6 {
                        return parse_err(ln, "estimate rows have six fields");
                    }
                    let int = |v: &str| v.parse::<usize>().or_else(|_| parse_err(ln, "bad count"));
                    rep.estimates.push((
                        f[0].to_string(),
                        Estimate {
                            successes: int(f[1])?,
                            trials: int(f[2])?,
                            p: num(ln, f[3])?,
                            lower: num(ln, f[4])?,
                            upper: num(ln, f[5])?,
                        },
                    ));
                }
                Some(_) => {
                    let f: Vec<&str> = line.split(',').collect();
                    if f.len() != 3 {
                        return parse_err(ln, "witness rows have three fields");
                    }
                    let v = &mut rep.witnesses.last_mut().expect("witness section open").1;
                    v.0.push(C64::new(num(ln, f[1])?, num(ln, f[2])?));
                }
            }
        }
        Ok(rep)
    }
}
