use kawlab_core::operators::{
    dyadic_bounds, level_ranges_of, local_coherence, Sparsifier, Transform,
};
use kawlab_core::optimal::{DemoReport, Rel};

use super::{table, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{stage, Result};

/// `2^-(k-l)` below the diagonal and `2^-3(l-k)` above it.
pub fn fourier_profile(k: usize, l: usize) -> f64 {
    if l <= k {
        2f64.powi(-((k - l) as i32))
    } else {
        2f64.powi(-3 * (l - k) as i32)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = cfg.operator.r;
    let kind = cfg.operator.kind;
    let b = dyadic_bounds(r);
    let t = stage(
        "coherence",
        local_coherence(kind, &Sparsifier::Haar, &b, &b),
    )?;
    let sizes: Vec<usize> = level_ranges_of(&b).iter().map(|x| x.len()).collect();
    let mut rep = DemoReport::new("coherence");
    rep.set("n", b[r - 1] as f64);
    rep.set("r", r as f64);
    let mut rows = Vec::new();
    let (mut diag, mut off, mut constant) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..r {
        for l in 0..r {
            let mu = t.mu[k][l];
            let scaled = mu * sizes[k] as f64;
            let profile = fourier_profile(k, l);
            rows.push(vec![(k + 1) as f64, (l + 1) as f64, mu, scaled, profile]);
            if k == l {
                diag = diag.max((mu - 1.0 / sizes[k] as f64).abs());
            } else {
                off = off.max(mu);
            }
            constant = constant.max(scaled / profile);
        }
    }
    rep.set("diagonal_defect", diag);
    rep.set("off_diagonal_max", off);
    rep.set("decay_constant", constant);
    rep.set("tol", cfg.real("tol"));
    rep.set("max_constant", cfg.real("max_constant"));
    match kind {
        Transform::Walsh => {
            rep.claim(
                "mu_kk = 1/(N_k - N_(k-1))",
                "diagonal_defect",
                Rel::Le,
                "tol",
            );
            rep.claim(
                "off-diagonal blocks vanish",
                "off_diagonal_max",
                Rel::Le,
                "tol",
            );
        }
        _ => rep.claim(
            "scaled coherence follows the decay profile",
            "decay_constant",
            Rel::Le,
            "max_constant",
        ),
    }
    rep.tables.push(table(
        "coherence",
        &["k", "l", "mu", "mu_times_level_size", "profile"],
        rows,
    ));
    Ok(Outcome::new(rep))
}
