//! The experiment catalog: names, descriptions, parameters and defaults.

use kawlab_core::operators::Transform;

use crate::config::{ExperimentConfig, Sampling};
use crate::error::Result;
use crate::experiments::{self, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Int,
    Float,
    FloatList,
    Bool,
    Text,
}

impl ParamKind {
    pub fn name(&self) -> &'static str {
        match self {
            ParamKind::Int => "integer",
            ParamKind::Float => "float",
            ParamKind::FloatList => "list of floats",
            ParamKind::Bool => "true or false",
            ParamKind::Text => "text",
        }
    }
}

pub struct Param {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub help: &'static str,
}

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    /// Result the experiment reproduces.
    pub topic: &'static str,
    pub params: &'static [Param],
    pub setup: fn(&mut ExperimentConfig),
    pub run: fn(&ExperimentConfig) -> Result<Outcome>,
}

const fn p(
    name: &'static str,
    kind: ParamKind,
    default: &'static str,
    help: &'static str,
) -> Param {
    Param {
        name,
        kind,
        default,
        help,
    }
}

use ParamKind::*;

fn no_setup(_: &mut ExperimentConfig) {}

fn fourier_lowpass(cfg: &mut ExperimentConfig, r: usize, m: usize) {
    cfg.operator.kind = Transform::Fourier;
    cfg.operator.r = r;
    cfg.operator.sampling = Sampling::Lowpass;
    cfg.operator.m = m;
}

fn tumor_setup(cfg: &mut ExperimentConfig) {
    fourier_lowpass(cfg, 8, 21);
    cfg.sparsities = vec![1; 8];
    cfg.train.batch_size = 12;
    cfg.train.hidden = 128;
}

const TUMOR_PARAMS: &[Param] = &[
    p(
        "signals",
        Int,
        "32",
        "piecewise-polynomial training signals",
    ),
    p(
        "tumor_pairs",
        Int,
        "4",
        "signals also trained with the tumor added",
    ),
    p("tumor_norm", Float, "0.4", "norm of the tumor"),
    p(
        "tumor_sigma",
        Float,
        "1",
        "spatial width of the modulated bump",
    ),
    p("tumor_center", Int, "40", "spatial centre of the tumor"),
    p("ridge", Float, "1e-10", "ridge of the output-layer refit"),
    p("delta_max", Float, "1e-2", "required training accuracy"),
    p(
        "lipschitz_trials",
        Int,
        "20",
        "random perturbations per Lipschitz probe",
    ),
];

pub static EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "transforms-check",
        summary: "unitarity and inversion of DFT, Walsh and Haar transforms; DFT against the naive sum",
        topic: "transform correctness",
        params: &[
            p("max_n", Int, "1024", "largest length checked"),
            p("naive_max_n", Int, "64", "largest length compared with the O(N^2) DFT"),
            p("tol", Float, "1e-12", "unitarity and round-trip tolerance"),
            p("naive_tol", Float, "1e-10", "tolerance against the naive DFT"),
        ],
        setup: no_setup,
        run: experiments::transforms::run,
    },
    Experiment {
        name: "coherence",
        summary: "local coherence of U H^* for Walsh or Fourier against Haar, with the decay profile",
        topic: "local coherence lemmas for Walsh/Haar and Fourier/Haar",
        params: &[
            p("tol", Float, "1e-12", "tolerance for the Walsh block structure"),
            p("max_constant", Float, "10", "largest accepted Fourier decay constant"),
        ],
        setup: |c| c.operator.r = 7,
        run: experiments::coherence::run,
    },
    Experiment {
        name: "recovery",
        summary: "QCBP recovery of sparse-in-levels Haar signals under RIPL-certified Walsh schemes",
        topic: "stable and accurate recovery from the RIPL",
        params: &[
            p("trials", Int, "100", "signals recovered"),
            p("required", Int, "95", "exact recoveries required"),
            p("exact_tol", Float, "1e-6", "error counted as exact recovery"),
            p("ripl_retries", Int, "50", "scheme draws per trial before giving up"),
            p("ripl_delta", Float, "0.5", "RIPL constant required of a scheme"),
        ],
        setup: |c| c.operator.c = 0.006,
        run: experiments::recovery::run,
    },
    Experiment {
        name: "certify-ripl",
        summary: "RIPL constants of repeatedly drawn multilevel schemes",
        topic: "RIPL of multilevel random sampling",
        params: &[
            p("draws", Int, "100", "schemes drawn"),
            p("order", Text, "auto", "comma separated per-level order, 'auto' or 'double'"),
            p("sampled", Int, "0", "random supports per draw; 0 enumerates all"),
            p("ripl_delta", Float, "0.5", "certification threshold"),
        ],
        setup: no_setup,
        run: experiments::certify::run,
    },
    Experiment {
        name: "witness",
        summary: "false positive and negative witnesses of a net trained on a near-kernel pair",
        topic: "the cardinal sin: recovering elements close to each other in the kernel",
        params: TUMOR_PARAMS,
        setup: tumor_setup,
        run: experiments::tumor::witness,
    },
    Experiment {
        name: "tumor-demo",
        summary: "Monte Carlo probabilities of damaging perturbations on the trained tumor network",
        topic: "probability of bad perturbations in practice",
        params: &[
            p("signals", Int, "32", "piecewise-polynomial training signals"),
            p("tumor_pairs", Int, "4", "signals also trained with the tumor added"),
            p("tumor_norm", Float, "0.4", "norm of the tumor"),
            p("tumor_sigma", Float, "1", "spatial width of the modulated bump"),
            p("tumor_center", Int, "40", "spatial centre of the tumor"),
            p("ridge", Float, "1e-10", "ridge of the output-layer refit"),
            p("delta_max", Float, "1e-2", "required training accuracy"),
            p("lipschitz_trials", Int, "20", "random perturbations per Lipschitz probe"),
            p("trials", Int, "1000", "Monte Carlo trials"),
            p("noise_sigma", Float, "1e-3", "std of each part of the generic noise"),
            p("generic_sigma", Float, "2e-5", "std of the generic noise added to Az"),
            p("eta", Float, "1e-2", "accuracy threshold of the events"),
            p("epsilon_factor", Float, "2", "Lipschitz radius in units of ||Az||"),
            p("min_lower", Float, "0.01", "required Wilson lower bound of the Lipschitz event"),
            p("min_conditional", Float, "0.9", "required conditional probability"),
        ],
        setup: tumor_setup,
        run: experiments::tumor::monte_carlo,
    },
    Experiment {
        name: "constructive",
        summary: "exact ReLU networks: identity gadget, pseudoinverse and corrected decoders",
        topic: "explicit ReLU network constructions",
        params: &[
            p("depth", Int, "4", "layers of the decoders"),
            p("tol", Float, "1e-10", "exactness tolerance"),
            p("loss_tol", Float, "1e-9", "tolerance on the predicted loss values"),
        ],
        setup: |c| fourier_lowpass(c, 6, 9),
        run: experiments::constructive::run,
    },
    Experiment {
        name: "optimal-map",
        summary: "optimality constant and witness map of a finite domain",
        topic: "the optimality constant",
        params: &[
            p("operator", Text, "", "operator file; empty builds a kernel-pair example"),
            p("domain", Text, "", "domain file of vectors; empty builds a kernel-pair example"),
            p("mode", Text, "ambient", "ambient or restricted codomain"),
            p("tau", Float, "1e-10", "fiber grouping tolerance"),
        ],
        setup: |c| fourier_lowpass(c, 5, 5),
        run: experiments::optimal::optimal_map,
    },
    Experiment {
        name: "thm-demo not-optimal",
        summary: "training may not yield optimal maps: sup-error 3/10 against c_opt = 1/4",
        topic: "training may not yield optimal maps",
        params: &[
            p("k", Int, "5", "training points"),
            p("delta", Float, "0.2", "fitting accuracy, at most 1/5"),
        ],
        setup: |c| fourier_lowpass(c, 6, 9),
        run: experiments::optimal::not_optimal,
    },
    Experiment {
        name: "thm-demo lambda",
        summary: "setting lambda is delicate: one extra pair breaks or keeps the optimality of lambda = 0",
        topic: "setting lambda is delicate",
        params: &[
            p("k", Int, "6", "elements of the domain"),
            p("sweep", FloatList, "0,1e-4,1e-3,1e-2,1e-1", "regularisation weights of the sweep"),
            p("sweep_epochs", Int, "200", "epochs per sweep point"),
        ],
        setup: |c| fourier_lowpass(c, 6, 0),
        run: experiments::optimal::lambda,
    },
    Experiment {
        name: "thm-demo dl-vs-cs",
        summary: "DL beats CS on an enlarged domain and pays with instability (Walsh)",
        topic: "CS is stable and optimal; DL outperforms CS at the cost of instability",
        params: &[
            p("k", Int, "5", "vanishing level, 1-based"),
            p("p", Float, "4", "performance ratio, greater than 2"),
            p("domain_size", Int, "6", "sparse elements of the base domain"),
            p("retries", Int, "5", "extra scheme draws if the RIPL check fails"),
            p("lipschitz_trials", Int, "12", "random perturbations per Lipschitz probe"),
        ],
        setup: |c| c.sparsities = vec![1, 1, 1, 2, 0, 2],
        run: experiments::optimal::dl_vs_cs,
    },
    Experiment {
        name: "thm-demo destabilize",
        summary: "two extra training points make the retrained minimiser unstable (Fourier)",
        topic: "additional training data may destabilize",
        params: &[
            p("k", Int, "6", "original training points"),
            p("gamma", Float, "0.1", "size of the added perturbations"),
            p("lipschitz_trials", Int, "16", "random perturbations per Lipschitz probe"),
        ],
        setup: |c| {
            c.operator.kind = Transform::Fourier;
            c.operator.c = 0.004;
        },
        run: experiments::optimal::destabilize,
    },
    Experiment {
        name: "probe",
        summary: "empirical Lipschitz constant of the pseudoinverse or CS decoder at a sparse signal",
        topic: "the local epsilon-Lipschitz constant",
        params: &[
            p("map", Text, "cs", "cs or pinv"),
            p("epsilon", Float, "0.01", "perturbation radius"),
            p("trials", Int, "20", "random perturbations"),
        ],
        setup: |c| c.operator.c = 0.006,
        run: experiments::probe::run,
    },
    Experiment {
        name: "train",
        summary: "trains a network on piecewise-polynomial signals and saves it",
        topic: "training on piecewise-polynomial signals",
        params: &[
            p("signals", Int, "32", "training signals"),
            p("jumps", Bool, "true", "add Heaviside steps"),
            p("masks", Int, "1", "sampling masks; more than one trains on zero-filled measurements"),
            p("refit", Bool, "true", "refit the output layer after gradient training"),
        ],
        setup: |c| {
            fourier_lowpass(c, 7, 21);
            c.sparsities = vec![1; 7];
            c.train.hidden = 128;
        },
        run: experiments::train::run,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

/// One line per experiment, in catalog order.
pub fn listing() -> String {
    let width = EXPERIMENTS.iter().map(|e| e.name.len()).max().unwrap_or(0);
    EXPERIMENTS
        .iter()
        .map(|e| format!("{:width$}  {} [{}]\n", e.name, e.summary, e.topic))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contents() {
        assert!(EXPERIMENTS.len() >= 10);
        assert!(find("tumor-demo").is_some());
        assert!(find("thm-demo dl-vs-cs").is_some());
        for e in EXPERIMENTS {
            for q in e.params {
                assert!(
                    crate::config::check_param(q.kind, q.default),
                    "{}.{}",
                    e.name,
                    q.name
                );
            }
        }
        let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name).collect();
        let mut dedup = names.clone();
        dedup.dedup();
        assert_eq!(names, dedup);
        assert_eq!(listing().lines().count(), EXPERIMENTS.len());
    }
}
