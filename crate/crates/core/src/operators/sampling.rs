use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng as _;

use super::levels::{check_bounds, dyadic_bounds, level_ranges_of};
use crate::error::{arg_err, Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrawMode {
    /// Distinct indices per level, duplicates are redrawn.
    Dedup,
    /// Independent uniform draws; repeated indices become repeated rows.
    AllowRepeats,
}

/// Multilevel random sampling pattern. Indices are 0-based and sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingScheme {
    pub n: usize,
    pub bounds: Vec<usize>,
    pub counts: Vec<usize>,
    pub omega: Vec<usize>,
    pub seed: u64,
}

/// Draws `m[k]` indices uniformly from each level `(N_{k-1}, N_k]`.
pub fn draw_multilevel_scheme(
    m: &[usize],
    bounds: &[usize],
    seed: u64,
    mode: DrawMode,
) -> Result<SamplingScheme> {
    let n = *bounds
        .last()
        .ok_or_else(|| Error::Argument("no levels".into()))?;
    check_bounds(bounds, n)?;
    if m.len() != bounds.len() {
        return arg_err("one budget per level is required");
    }
    let mut r = rng::seeded(seed);
    let mut omega = Vec::with_capacity(m.iter().sum());
    for (range, &mk) in level_ranges_of(bounds).iter().zip(m) {
        let size = range.len();
        match mode {
            DrawMode::Dedup => {
                if mk > size {
                    return arg_err(format!("budget {mk} exceeds level size {size}"));
                }
                if mk == size {
                    omega.extend(range.clone());
                    continue;
                }
                let mut picked = BTreeSet::new();
                while picked.len() < mk {
                    picked.insert(r.random_range(range.clone()));
                }
                omega.extend(picked);
            }
            DrawMode::AllowRepeats => {
                let mut picks: Vec<usize> =
                    (0..mk).map(|_| r.random_range(range.clone())).collect();
                picks.sort_unstable();
                omega.extend(picks);
            }
        }
    }
    Ok(SamplingScheme {
        n,
        bounds: bounds.to_vec(),
        counts: m.to_vec(),
        omega,
        seed,
    })
}

impl SamplingScheme {
    /// Scheme from an explicit index set (0-based); counts are tallied.
    pub fn from_indices(bounds: &[usize], mut omega: Vec<usize>, seed: u64) -> Result<Self> {
        let n = *bounds
            .last()
            .ok_or_else(|| Error::Argument("no levels".into()))?;
        check_bounds(bounds, n)?;
        omega.sort_unstable();
        if omega.iter().any(|&i| i >= n) {
            return arg_err("index out of range");
        }
        let mut counts = vec![0; bounds.len()];
        for &i in &omega {
            counts[bounds.iter().position(|&b| i < b).unwrap()] += 1;
        }
        Ok(SamplingScheme {
            n,
            bounds: bounds.to_vec(),
            counts,
            omega,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.omega.len()
    }

    pub fn r(&self) -> usize {
        self.bounds.len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        level_ranges_of(&self.bounds)
            .iter()
            .map(|r| r.len())
            .collect()
    }

    pub fn fully_sampled(&self, k: usize) -> bool {
        self.counts[k] == self.level_sizes()[k]
    }

    /// Diagonal scaling `sqrt((N_k - N_{k-1}) / m_k)` for each sampled row.
    pub fn row_scaling(&self) -> Vec<f64> {
        let sizes = self.level_sizes();
        self.omega
            .iter()
            .map(|&i| {
                let k = self.bounds.iter().position(|&b| i < b).unwrap();
                (sizes[k] as f64 / self.counts[k] as f64).sqrt()
            })
            .collect()
    }

    fn is_dyadic(&self) -> bool {
        self.bounds == dyadic_bounds(self.r())
    }

    /// `OMEGA r=<r> seed=<seed>` header, then sorted 1-based indices.
    pub fn to_text(&self) -> String {
        let mut s = format!("OMEGA r={} seed={}", self.r(), self.seed);
        if !self.is_dyadic() {
            let b: Vec<String> = self.bounds.iter().map(|b| b.to_string()).collect();
            write!(s, " bounds={}", b.join(",")).unwrap();
        }
        s.push('\n');
        for &i in &self.omega {
            writeln!(s, "{}", i + 1).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| perr(1, "empty scheme file"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("OMEGA") {
            return Err(perr(1, "expected OMEGA header"));
        }
        let (mut r, mut seed, mut bounds) = (None, 0u64, None);
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| perr(1, "expected key=value"))?;
            match k {
                "r" => r = Some(v.parse::<usize>().map_err(|_| perr(1, "bad r"))?),
                "seed" => seed = v.parse().map_err(|_| perr(1, "bad seed"))?,
                "bounds" => {
                    bounds = Some(
                        v.split(',')
                            .map(|b| b.parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| perr(1, "bad bounds"))?,
                    )
                }
                _ => return Err(perr(1, "unknown header key")),
            }
        }
        let r = r.ok_or_else(|| perr(1, "missing r"))?;
        if r == 0 || r > 31 {
            return Err(perr(1, "r out of range"));
        }
        let bounds = bounds.unwrap_or_else(|| dyadic_bounds(r));
        if bounds.len() != r {
            return Err(perr(1, "bounds do not match r"));
        }
        let mut omega = Vec::new();
        for (no, l) in lines {
            let i: usize = l.trim().parse().map_err(|_| perr(no + 1, "bad index"))?;
            if i == 0 {
                return Err(perr(no + 1, "indices are 1-based"));
            }
            omega.push(i - 1);
        }
        if omega.windows(2).any(|w| w[0] > w[1]) {
            return Err(perr(0, "indices must be sorted"));
        }
        Self::from_indices(&bounds, omega, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_empty_levels() {
        let s =
            draw_multilevel_scheme(&[1, 1, 2, 0], &dyadic_bounds(4), 42, DrawMode::Dedup).unwrap();
        assert_eq!(s.omega, vec![0, 1, 2, 3]);
        assert!(s.fully_sampled(2));
        assert_eq!(s.row_scaling(), vec![1.0; 4]);
    }

    #[test]
    fn determinism_and_golden_fixture() {
        let bounds = dyadic_bounds(4);
        let a = draw_multilevel_scheme(&[1, 1, 1, 2], &bounds, 42, DrawMode::Dedup).unwrap();
        let b = draw_multilevel_scheme(&[1, 1, 1, 2], &bounds, 42, DrawMode::Dedup).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), GOLDEN_R4_SEED42);
    }

    const GOLDEN_R4_SEED42: &str = "OMEGA r=4 seed=42\n1\n2\n3\n5\n7\n";

    #[test]
    fn text_round_trip() {
        let s = draw_multilevel_scheme(&[1, 1, 2, 3, 4], &dyadic_bounds(5), 7, DrawMode::Dedup)
            .unwrap();
        assert_eq!(SamplingScheme::from_text(&s.to_text()).unwrap(), s);
        let t = SamplingScheme::from_indices(&[2, 5, 8], vec![0, 4, 6], 3).unwrap();
        assert_eq!(SamplingScheme::from_text(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn repeats_mode_keeps_multiplicity() {
        let s = draw_multilevel_scheme(
            &[0, 0, 0, 0, 40],
            &dyadic_bounds(5),
            1,
            DrawMode::AllowRepeats,
        )
        .unwrap();
        assert_eq!(s.m(), 40);
        assert!(s.omega.windows(2).any(|w| w[0] == w[1]));
    }

    #[test]
    fn parse_errors() {
        assert!(SamplingScheme::from_text("OMEGA r=3 seed=1\n0\n").is_err());
        assert!(SamplingScheme::from_text("OMEGA r=3 seed=1\n3\n2\n").is_err());
        assert!(SamplingScheme::from_text("OMEGA seed=1\n").is_err());
    }
}
