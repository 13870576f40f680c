use crate::error::{Error, Result};

/// Comparison asserted between two stored values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    /// `|lhs - rhs| <= tol`.
    Near(f64),
}

impl Rel {
    pub fn holds(&self, lhs: f64, rhs: f64) -> bool {
        match self {
            Rel::Le => lhs <= rhs,
            Rel::Lt => lhs < rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
            Rel::Near(tol) => (lhs - rhs).abs() <= *tol,
        }
    }

    fn token(&self) -> String {
        match self {
            Rel::Le => "<=".into(),
            Rel::Lt => "<".into(),
            Rel::Ge => ">=".into(),
            Rel::Gt => ">".into(),
            Rel::Near(t) => format!("~{t:e}"),
        }
    }

    fn parse(s: &str) -> Option<Rel> {
        match s {
            "<=" => Some(Rel::Le),
            "<" => Some(Rel::Lt),
            ">=" => Some(Rel::Ge),
            ">" => Some(Rel::Gt),
            _ => s
                .strip_prefix('~')
                .and_then(|t| t.parse().ok())
                .map(Rel::Near),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Claim {
    pub label: String,
    pub lhs: String,
    pub rel: Rel,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(
                &r.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            s.push('\n');
        }
        s
    }
}

/// Stored raw values plus the inequalities they are claimed to satisfy.
/// Every claim is re-evaluated from the values by [`DemoReport::verify`].
#[derive(Clone, Debug, PartialEq)]
pub struct DemoReport {
    pub name: String,
    pub values: Vec<(String, f64)>,
    pub claims: Vec<Claim>,
    pub tables: Vec<Table>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimOutcome {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl DemoReport {
    pub fn new(name: impl Into<String>) -> Self {
        DemoReport {
            name: name.into(),
            values: Vec::new(),
            claims: Vec::new(),
            tables: Vec::new(),
        }
    }

    /// Inserts or replaces a value.
    pub fn set(&mut self, key: &str, v: f64) {
        match self.values.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = v,
            None => self.values.push((key.to_string(), v)),
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn claim(&mut self, label: &str, lhs: &str, rel: Rel, rhs: &str) {
        self.claims.push(Claim {
            label: label.into(),
            lhs: lhs.into(),
            rel,
            rhs: rhs.into(),
        });
    }

    pub fn verify(&self) -> Result<Vec<ClaimOutcome>> {
        self.claims
            .iter()
            .map(|c| {
                let look = |k: &str| {
                    self.get(k).ok_or_else(|| {
                        Error::Argument(format!(
                            "claim '{}' refers to unknown value '{k}'",
                            c.label
                        ))
                    })
                };
                let (l, r) = (look(&c.lhs)?, look(&c.rhs)?);
                Ok(ClaimOutcome {
                    label: c.label.clone(),
                    lhs: l,
                    rhs: r,
                    holds: c.rel.holds(l, r),
                })
            })
            .collect()
    }

    pub fn all_hold(&self) -> bool {
        self.verify()
            .map(|v| v.iter().all(|c| c.holds))
            .unwrap_or(false)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("DEMO-REPORT 1\nname = {}\n[values]\n", self.name);
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v:?}\n"));
        }
        s.push_str("[claims]\n");
        for c in &self.claims {
            s.push_str(&format!(
                "{} | {} | {} | {}\n",
                c.label,
                c.lhs,
                c.rel.token(),
                c.rhs
            ));
        }
        for t in &self.tables {
            s.push_str(&format!("[table {}]\n", t.name));
            s.push_str(&t.to_csv());
        }
        s
    }

    pub fn from_text(text: &str) -> Result<DemoReport> {
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.into(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "DEMO-REPORT 1")) => {}
            _ => return Err(perr(1, "missing DEMO-REPORT 1 header")),
        }
        let name = match lines.next() {
            Some((_, l)) if l.starts_with("name = ") => l["name = ".len()..].to_string(),
            Some((n, _)) => return Err(perr(n, "expected name")),
            None => return Err(perr(2, "expected name")),
        };
        let mut rep = DemoReport::new(name);
        enum Section {
            None,
            Values,
            Claims,
            Table,
        }
        let mut sec = Section::None;
        for (n, l) in lines {
            if l.is_empty() {
                continue;
            }
            if l == "[values]" {
                sec = Section::Values;
                continue;
            }
            if l == "[claims]" {
                sec = Section::Claims;
                continue;
            }
            if let Some(t) = l.strip_prefix("[table ").and_then(|t| t.strip_suffix(']')) {
                rep.tables.push(Table {
                    name: t.to_string(),
                    header: Vec::new(),
                    rows: Vec::new(),
                });
                sec = Section::Table;
                continue;
            }
            match sec {
                Section::None => return Err(perr(n, "content outside a section")),
                Section::Values => {
                    let (k, v) = l
                        .split_once(" = ")
                        .ok_or_else(|| perr(n, "expected key = value"))?;
                    let v: f64 = v.trim().parse().map_err(|_| perr(n, "invalid number"))?;
                    rep.values.push((k.trim().to_string(), v));
                }
                Section::Claims => {
                    let parts: Vec<&str> = l.split(" | ").collect();
                    if parts.len() != 4 {
                        return Err(perr(n, "expected label | lhs | rel | rhs"));
                    }
                    let rel = Rel::parse(parts[2]).ok_or_else(|| perr(n, "unknown relation"))?;
                    rep.claim(parts[0], parts[1], rel, parts[3]);
                }
                Section::Table => {
                    let t = rep.tables.last_mut().unwrap();
                    if t.header.is_empty() {
                        t.header = l.split(',').map(String::from).collect();
                    } else {
                        let row = l
                            .split(',')
                            .map(|v| v.parse::<f64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| perr(n, "invalid table entry"))?;
                        if row.len() != t.header.len() {
                            return Err(perr(n, "row width differs from the header"));
                        }
                        t.rows.push(row);
                    }
                }
            }
        }
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DemoReport {
        let mut r = DemoReport::new("toy");
        r.set("a", 0.3);
        r.set("b", 0.25);
        r.set("tiny", 1e-17);
        r.set("zero", 0.0);
        r.claim("a beats b", "a", Rel::Gt, "b");
        r.claim("tiny is zero", "tiny", Rel::Near(1e-9), "zero");
        r.tables.push(Table {
            name: "curve".into(),
            header: vec!["x".into(), "y".into()],
            rows: vec![vec![1.0, 0.1], vec![2.0, 1.0 / 3.0]],
        });
        r
    }

    #[test]
    fn round_trip_and_verify() {
        let r = sample();
        let back = DemoReport::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert!(back.all_hold());
    }

    #[test]
    fn tampered_values_fail_verification() {
        let text = sample().to_text().replace("a = 0.3", "a = 0.2");
        let r = DemoReport::from_text(&text).unwrap();
        assert!(!r.all_hold());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let text = sample().to_text().replace("b = 0.25", "b = x");
        match DemoReport::from_text(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }
}
