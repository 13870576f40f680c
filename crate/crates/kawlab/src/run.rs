//! Runs an experiment and writes its artifacts with a SHA-256 manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use kawlab_core::optimal::{ClaimOutcome, DemoReport, Table};
use sha2::{Digest, Sha256};

use crate::catalog;
use crate::config::ExperimentConfig;
use crate::error::{stage, HarnessError, Result};

pub const REPORT_FILE: &str = "report.txt";
pub const MANIFEST_FILE: &str = "MANIFEST";
const RUN_HEADER: &str = "KAWLAB-RUN 1";
const CONFIG_MARK: &str = "--- config\n";
const REPORT_MARK: &str = "--- report\n";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Manifest timestamp; falls back to `SOURCE_DATE_EPOCH`, then the clock.
    pub created: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub claims: Vec<ClaimOutcome>,
    pub files: Vec<String>,
}

impl RunSummary {
    pub fn failures(&self) -> Vec<String> {
        self.claims
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.label.clone())
            .collect()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

/// Applies `KAWLAB_THREADS` to the global thread pool once.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("KAWLAB_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| {
            HarnessError::Usage(format!("KAWLAB_THREADS={v:?} is not a thread count"))
        })?;
        // a pool built earlier in the same process is kept
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn created(opts: &RunOptions) -> u64 {
    opts.created
        .or_else(|| std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

fn gnuplot_script(t: &Table) -> String {
    let cols = t.header.len().max(2);
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 800,600\n\
         set output '{0}.png'\nset xlabel '{1}'\nplot for [i=2:{2}] '{0}.csv' using 1:i with linespoints\n",
        t.name,
        t.header.first().map(String::as_str).unwrap_or(""),
        cols
    )
}

pub fn report_text(cfg: &ExperimentConfig, rep: &DemoReport) -> String {
    format!(
        "{RUN_HEADER}\nexperiment = {}\nseed = {}\n{CONFIG_MARK}{}{REPORT_MARK}{}",
        cfg.name,
        cfg.seed,
        cfg.to_ini(),
        rep.to_text()
    )
}

/// Splits a `report.txt` into its config and report parts.
pub fn parse_report_text(text: &str) -> Result<(ExperimentConfig, DemoReport)> {
    if !text.starts_with(RUN_HEADER) {
        return Err(HarnessError::config(
            1,
            format!("missing {RUN_HEADER} header"),
        ));
    }
    let c = text
        .find(CONFIG_MARK)
        .ok_or_else(|| HarnessError::config(0, "missing config section"))?;
    let r = text
        .find(REPORT_MARK)
        .ok_or_else(|| HarnessError::config(0, "missing report section"))?;
    let cfg = ExperimentConfig::from_ini(&text[c + CONFIG_MARK.len()..r], None)?;
    let rep = stage(
        "report",
        DemoReport::from_text(&text[r + REPORT_MARK.len()..]),
    )?;
    Ok((cfg, rep))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest(created: u64, files: &[(String, Vec<u8>)]) -> String {
    let mut entries: Vec<&(String, Vec<u8>)> = files.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut s = format!("kawlab-manifest 1\ncreated = {created}\n");
    for (name, bytes) in entries {
        let _ = writeln!(s, "{}  {}  {}", sha256_hex(bytes), bytes.len(), name);
    }
    s
}

/// Runs the configured experiment and writes every artifact under `cfg.out`.
/// Claim failures are reported in the summary, not as errors.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    configure_threads()?;
    let exp = catalog::find(&cfg.name)
        .ok_or_else(|| HarnessError::Usage(format!("unknown experiment {:?}", cfg.name)))?;
    let outcome = (exp.run)(cfg)?;
    let claims = stage("verify", outcome.report.verify())?;
    let dir = PathBuf::from(&cfg.out);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut files: Vec<(String, Vec<u8>)> = vec![(
        REPORT_FILE.into(),
        report_text(cfg, &outcome.report).into_bytes(),
    )];
    for t in &outcome.report.tables {
        files.push((format!("{}.csv", t.name), t.to_csv().into_bytes()));
        files.push((format!("{}.gp", t.name), gnuplot_script(t).into_bytes()));
    }
    files.extend(outcome.files);
    for (name, bytes) in &files {
        if name == MANIFEST_FILE
            || name.contains('/')
            || files.iter().filter(|f| &f.0 == name).count() > 1
        {
            return Err(HarnessError::Usage(format!(
                "bad or repeated artifact name {name:?}"
            )));
        }
        write_atomic(&dir, name, bytes)?;
    }
    write_atomic(
        &dir,
        MANIFEST_FILE,
        manifest(created(opts), &files).as_bytes(),
    )?;
    let mut names: Vec<String> = files.into_iter().map(|f| f.0).collect();
    names.push(MANIFEST_FILE.into());
    Ok(RunSummary {
        dir,
        claims,
        files: names,
    })
}

/// Checks the manifest hashes and re-evaluates the stored claims.
pub fn verify_dir(dir: &Path) -> Result<Vec<ClaimOutcome>> {
    let mpath = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    let mut lines = text.lines();
    if lines.next() != Some("kawlab-manifest 1") {
        return Err(HarnessError::config(1, "not a kawlab manifest"));
    }
    let mut problems = Vec::new();
    for (i, line) in lines.enumerate().skip(1) {
        let parts: Vec<&str> = line.splitn(3, "  ").collect();
        if parts.len() != 3 {
            return Err(HarnessError::config(i + 2, "malformed manifest entry"));
        }
        let path = dir.join(parts[2]);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        if sha256_hex(&bytes) != parts[0] || bytes.len().to_string() != parts[1] {
            problems.push(format!("{} does not match the manifest", parts[2]));
        }
    }
    if !problems.is_empty() {
        return Err(HarnessError::Check(problems));
    }
    let rpath = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&rpath).map_err(io_err(&rpath))?;
    let (_, rep) = parse_report_text(&text)?;
    stage("verify", rep.verify())
}
