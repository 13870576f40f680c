use rand::seq::index::sample;
use rand::Rng;

use super::domain::{optimality_constant, Codomain, FiniteDomain};
use super::report::{DemoReport, Rel, Table};
use crate::certify::{ripl_constant, ripl_order_auto, RiplMode};
use crate::error::{arg_err, Error, Result};
use crate::instability::{
    destabilizing_pair, empirical_lipschitz, overperformance_domain, BestEffortDecoder, CsDecoder,
    LipschitzProbe, Metric, ReconstructionMap,
};
use crate::linalg::{CVector, C64};
use crate::neural::{
    corrected_decoder_network, interpolatory_network, least_squares_interpolant, mlp,
    pinv_decoder_network, refit_output_layer, train, train_regularized, Network, Regularizer,
    Sample, TrainConfig,
};
use crate::operators::{
    draw_multilevel_scheme, fourier_budgets, walsh_budgets, BudgetParams, DrawMode, LevelStructure,
    MeasurementOperator, Sparsifier, Transform,
};
use crate::rng;
use crate::solver::{Model, SolverConfig};

fn sup_error(map: &dyn ReconstructionMap, a: &MeasurementOperator, xs: &[CVector]) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in xs {
        worst = worst.max(map.eval(&a.apply(x)?)?.dist(x));
    }
    Ok(worst)
}

/// `(1/|T|) sum ½ ||x - Psi(y)||²`.
fn objective(map: &dyn ReconstructionMap, pairs: &[(CVector, CVector)]) -> Result<f64> {
    let mut s = 0.0;
    for (y, x) in pairs {
        s += 0.5 * map.eval(y)?.sub(x).norm_sqr();
    }
    Ok(s / pairs.len() as f64)
}

fn scaled(v: CVector, norm: f64, what: &str) -> Result<CVector> {
    let n = v.norm();
    if n < 1e-10 {
        return arg_err(format!("{what} is trivial"));
    }
    Ok(v.scale(norm / n))
}

fn random_sparse_in_levels(levels: &LevelStructure, r: &mut rng::Rng) -> Result<CVector> {
    let mut c = CVector::zeros(levels.n);
    for (range, &s) in levels.ranges().iter().zip(&levels.sparsities) {
        for i in sample(r, range.len(), s).into_iter() {
            c[range.start + i] = C64::new(rng::gaussian(r), 0.0);
        }
    }
    Sparsifier::Haar.inverse(&c)
}

fn samples(pairs: &[(CVector, CVector)], complex: bool) -> Vec<Sample> {
    pairs
        .iter()
        .map(|(y, x)| Sample::from_complex(y, x, complex))
        .collect()
}

/// Adam on a one-hidden-layer network followed by a least-squares refit of the
/// output layer.
fn fit_network(
    pairs: &[(CVector, CVector)],
    hidden: usize,
    epochs: usize,
    seed: u64,
) -> Result<(Network, f64)> {
    let (m, n) = (pairs[0].0.len(), pairs[0].1.len());
    let mut net = mlp(&[2 * m, hidden, 2 * n], true, seed)?.with_label("trained-mlp");
    let data = samples(pairs, true);
    let batch = data.len().min(16);
    train(
        &mut net,
        &data,
        &TrainConfig::new(epochs, batch, seed ^ 0x5eed).with_lr(1e-3),
    )?;
    let err = refit_output_layer(&mut net, &data, 1e-12)?;
    Ok((net, err))
}

/// Training may not yield optimal maps: `M_1 = {x_1 + z_1, x_1, ..., x_K}` with
/// `z_1` in the kernel and `||x_1|| = ||z_1|| = 1/2`.
pub fn demo_not_optimal(
    a: &MeasurementOperator,
    k: usize,
    delta: f64,
    seed: u64,
) -> Result<DemoReport> {
    if !(delta > 0.0 && delta <= 0.2) {
        return arg_err("delta must lie in (0, 1/5]");
    }
    if k < 2 {
        return arg_err("at least two training points are required");
    }
    let n = a.n();
    let mut r = rng::seeded(seed);
    let x1 = scaled(
        a.project_cokernel(&rng::gaussian_cvector(&mut r, n, 1.0))?,
        0.5,
        "range of the adjoint",
    )?;
    let z1 = scaled(
        a.project_kernel(&rng::gaussian_cvector(&mut r, n, 1.0))?,
        0.5,
        "kernel",
    )?;
    let mut xs = vec![x1.clone()];
    for _ in 1..k {
        let norm = r.random_range(0.2..=1.0);
        xs.push(scaled(
            a.project_cokernel(&rng::gaussian_cvector(&mut r, n, 1.0))?,
            norm,
            "range of the adjoint",
        )?);
    }
    let mut elements = vec![x1.add(&z1)];
    elements.extend(xs.iter().cloned());
    let domain = FiniteDomain::new(elements.clone(), Metric::L2)?;
    let opt = optimality_constant(a, &domain, Codomain::Ambient)?;
    let pairs: Vec<(CVector, CVector)> = xs
        .iter()
        .map(|x| Ok((a.apply(x)?, x.clone())))
        .collect::<Result<_>>()?;

    let mut rep = DemoReport::new("not-optimal");
    rep.set("delta", delta);
    rep.set("norm_z1", z1.norm());
    rep.set("kernel_residual", a.apply(&z1)?.norm());
    rep.set("zero", 0.0);
    rep.set("quarter", 0.25);
    rep.set("three_tenths", 0.3);
    rep.set("three_tenths_tol", 0.3 - 1e-6);
    rep.set("c_opt", opt.c_opt);
    rep.set("witness_sup_error", opt.sup_error(a, &domain)?);
    rep.set("lower_bound", z1.norm() - delta);
    rep.claim(
        "z_1 lies in the kernel",
        "kernel_residual",
        Rel::Near(1e-10),
        "zero",
    );
    rep.claim("c_opt equals 1/4", "c_opt", Rel::Near(1e-12), "quarter");
    rep.claim(
        "witness map attains c_opt",
        "witness_sup_error",
        Rel::Le,
        "c_opt",
    );
    rep.claim(
        "any delta-fit has sup-error at least 3/10",
        "lower_bound",
        Rel::Ge,
        "three_tenths_tol",
    );
    rep.claim("3/10 exceeds c_opt", "three_tenths", Rel::Gt, "c_opt");
    rep.claim("no map fits all of M_1 to delta", "c_opt", Rel::Gt, "delta");

    let interp = interpolatory_network(&pairs, seed)?;
    rep.set("interpolatory_fit", sup_error(&interp, a, &xs)?);
    rep.set("interpolatory_sup_error", sup_error(&interp, a, &elements)?);
    rep.claim(
        "interpolatory net fits the training pairs",
        "interpolatory_fit",
        Rel::Le,
        "delta",
    );
    rep.claim(
        "interpolatory net is not optimal",
        "interpolatory_sup_error",
        Rel::Ge,
        "three_tenths_tol",
    );

    let (trained, _) = fit_network(&pairs, 4 * (k + a.m()), 300, seed)?;
    rep.set("trained_fit", sup_error(&trained, a, &xs)?);
    rep.set("trained_sup_error", sup_error(&trained, a, &elements)?);
    rep.claim(
        "trained net fits the training pairs",
        "trained_fit",
        Rel::Le,
        "delta",
    );
    rep.claim(
        "trained net is not optimal",
        "trained_sup_error",
        Rel::Ge,
        "three_tenths_tol",
    );

    let phase = C64::from_polar(1.0, 0.7);
    let rotated = FiniteDomain::new(
        elements.iter().map(|x| x.scale_c(phase)).collect(),
        Metric::L2,
    )?;
    rep.set(
        "c_opt_rotated",
        optimality_constant(a, &rotated, Codomain::Ambient)?.c_opt,
    );
    rep.claim(
        "c_opt is invariant under a global phase",
        "c_opt_rotated",
        Rel::Near(1e-12),
        "c_opt",
    );

    rep.tables.push(Table {
        name: "fibers".into(),
        header: vec!["fiber".into(), "size".into(), "radius".into()],
        rows: opt
            .partition
            .groups
            .iter()
            .zip(&opt.radii)
            .enumerate()
            .map(|(i, (g, r))| vec![i as f64, g.len() as f64, *r])
            .collect(),
    });
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaConfig {
    pub transform: Transform,
    pub n: usize,
    /// `|M_1|`.
    pub k: usize,
    pub seed: u64,
    /// Regularisation weights of the optional sweep; empty skips it.
    pub sweep: Vec<f64>,
    pub sweep_epochs: usize,
}

impl LambdaConfig {
    pub fn new(transform: Transform, n: usize, k: usize, seed: u64) -> Self {
        LambdaConfig {
            transform,
            n,
            k,
            seed,
            sweep: vec![0.0, 1e-4, 1e-3, 1e-2, 1e-1],
            sweep_epochs: 200,
        }
    }
}

/// Setting lambda is delicate: the same extra training pair breaks the
/// optimality of `lambda = 0` under `Omega~` but not under `Omega = Omega~ u {j}`.
pub fn lambda_sensitivity_demo(cfg: &LambdaConfig) -> Result<DemoReport> {
    let n = cfg.n;
    if n < 4 {
        return arg_err("N must be at least 4");
    }
    if cfg.k < 2 {
        return arg_err("the domain needs at least two elements");
    }
    let mut r = rng::seeded(cfg.seed);
    let size = (n / 2).clamp(2, n - 2);
    let picked = sample(&mut r, n, size + 1).into_vec();
    let j = picked[size];
    let mut omega_t: Vec<usize> = picked[..size].to_vec();
    omega_t.sort_unstable();
    let mut omega = omega_t.clone();
    omega.push(j);
    omega.sort_unstable();
    let at = MeasurementOperator::unscaled(cfg.transform, n, omega_t.clone())?;
    let a = MeasurementOperator::unscaled(cfg.transform, n, omega.clone())?;
    let mt = at.m();
    let i = 0usize;

    let mut y_hat = CVector::zeros(mt);
    y_hat[i] = C64::new(1.0, 0.5);
    let x_hat = at.pinv_apply(&y_hat)?;
    let mut m1 = vec![x_hat.clone()];
    for _ in 1..cfg.k {
        let mut v = rng::gaussian_cvector(&mut r, mt, 0.5);
        v[i] = C64::new(0.0, 0.0);
        m1.push(at.pinv_apply(&v)?);
    }
    let jpos = omega.iter().position(|&w| w == j).unwrap();
    let v = a.adjoint(&CVector::basis(a.m(), jpos))?;
    let x = scaled(
        v.sub(&at.pinv_apply(&at.apply(&v)?)?),
        1.0,
        "kernel direction",
    )?;
    let z = x_hat.add(&x);

    let depth = 3;
    let psi_t = pinv_decoder_network(&at, depth, 4 * mt)?;
    let psi = pinv_decoder_network(&a, depth, 4 * a.m())?;
    let t_tilde: Vec<(CVector, CVector)> = m1
        .iter()
        .map(|x| Ok((at.apply(x)?, x.clone())))
        .collect::<Result<_>>()?;
    let t_full: Vec<(CVector, CVector)> = m1
        .iter()
        .map(|x| Ok((a.apply(x)?, x.clone())))
        .collect::<Result<_>>()?;
    let domain = FiniteDomain::new(m1.clone(), Metric::L2)?;

    let mut rep = DemoReport::new("lambda");
    rep.set("zero", 0.0);
    rep.set("n", n as f64);
    rep.set("omega_tilde_size", mt as f64);
    rep.set("omega_size", a.m() as f64);
    rep.set(
        "special_other_rows",
        y_hat
            .iter()
            .enumerate()
            .filter(|(q, _)| *q != i)
            .map(|(_, v)| v.norm())
            .sum(),
    );
    rep.set("kernel_residual_tilde", at.apply(&x)?.norm());
    rep.set("cokernel_residual", a.project_kernel(&x)?.norm());
    rep.set("norm_x", x.norm());
    rep.claim(
        "special pair vanishes off row i",
        "special_other_rows",
        Rel::Near(0.0),
        "zero",
    );
    rep.claim(
        "x lies in the kernel of A~",
        "kernel_residual_tilde",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "x lies in the cokernel of A",
        "cokernel_residual",
        Rel::Near(1e-9),
        "zero",
    );

    rep.set(
        "c_opt_tilde",
        optimality_constant(&at, &domain, Codomain::Ambient)?.c_opt,
    );
    rep.set("psi_tilde_objective", objective(&psi_t, &t_tilde)?);
    rep.set("psi_tilde_sup_error", sup_error(&psi_t, &at, &m1)?);
    rep.claim(
        "c_opt(A~, M_1) is zero",
        "c_opt_tilde",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "lambda = 0 reaches zero objective on T~",
        "psi_tilde_objective",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "the pinv network is optimal under A~",
        "psi_tilde_sup_error",
        Rel::Near(1e-9),
        "zero",
    );

    // replacement of (y_hat, x_hat) by (y_hat, x_hat + x)
    let phi = corrected_decoder_network(&at, i, &y_hat, &z, depth, 4 * mt)?;
    let mut t_rep = t_tilde.clone();
    t_rep[0] = (y_hat.clone(), z.clone());
    rep.set("phi_objective", objective(&phi, &t_rep)?);
    rep.set("phi_target_error", phi.eval(&y_hat)?.dist(&z));
    rep.set("phi_sup_error", sup_error(&phi, &at, &m1)?);
    rep.claim(
        "replaced set: corrected net has zero objective",
        "phi_objective",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "replaced set: corrected net hits x_hat + x",
        "phi_target_error",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "replaced set: every minimiser misses x_hat by ||x||",
        "phi_sup_error",
        Rel::Near(1e-9),
        "norm_x",
    );
    rep.claim(
        "replaced set: the minimiser is not optimal",
        "phi_sup_error",
        Rel::Gt,
        "zero",
    );

    // addition of (y_hat, x_hat + x)
    let mid = x_hat.add(&x.scale(0.5));
    let phi_mid = corrected_decoder_network(&at, i, &y_hat, &mid, depth, 4 * mt)?;
    let mut t_add = t_tilde.clone();
    t_add.push((y_hat.clone(), z.clone()));
    let size_add = t_add.len() as f64;
    rep.set("midpoint_objective", objective(&phi_mid, &t_add)?);
    rep.set("midpoint_predicted", x.norm_sqr() / (4.0 * size_add));
    rep.set("optimal_map_objective", objective(&psi_t, &t_add)?);
    rep.set("optimal_map_predicted", x.norm_sqr() / (2.0 * size_add));
    rep.claim(
        "added set: midpoint net objective is ||x||^2/(4|T~|)",
        "midpoint_objective",
        Rel::Near(1e-9),
        "midpoint_predicted",
    );
    rep.claim(
        "added set: optimal maps pay ||x||^2/(2|T~|)",
        "optimal_map_objective",
        Rel::Near(1e-9),
        "optimal_map_predicted",
    );
    rep.claim(
        "added set: no minimiser is optimal",
        "midpoint_objective",
        Rel::Lt,
        "optimal_map_objective",
    );

    // part (ii) under Omega
    rep.set(
        "c_opt_full",
        optimality_constant(&a, &domain, Codomain::Ambient)?.c_opt,
    );
    rep.set("psi_objective", objective(&psi, &t_full)?);
    let mut worst_add = 0.0f64;
    let mut worst_rep = 0.0f64;
    for t in [0.5, 1.0, -2.0] {
        let s = z.scale(t);
        let pair = (a.apply(&s)?, s);
        let mut added = t_full.clone();
        added.push(pair.clone());
        worst_add = worst_add.max(objective(&psi, &added)?);
        let mut replaced = t_full.clone();
        replaced[0] = pair;
        worst_rep = worst_rep.max(objective(&psi, &replaced)?);
    }
    rep.set("psi_objective_added", worst_add);
    rep.set("psi_objective_replaced", worst_rep);
    rep.set("psi_sup_error", sup_error(&psi, &a, &m1)?);
    rep.claim(
        "c_opt(A, M_1) is zero",
        "c_opt_full",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "Omega: zero objective on T",
        "psi_objective",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "Omega: zero objective after adding multiples of z",
        "psi_objective_added",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "Omega: zero objective after replacing by multiples of z",
        "psi_objective_replaced",
        Rel::Near(1e-9),
        "zero",
    );
    rep.claim(
        "Omega: lambda = 0 stays optimal",
        "psi_sup_error",
        Rel::Near(1e-9),
        "zero",
    );

    if !cfg.sweep.is_empty() {
        let data = samples(&t_add, true);
        let mut rows = Vec::new();
        for &lambda in &cfg.sweep {
            let mut net = psi_t.clone();
            let tc = TrainConfig::new(cfg.sweep_epochs, data.len(), cfg.seed);
            train_regularized(&mut net, &data, lambda, &Regularizer::WeightNorm, &tc)?;
            let obj = objective(&net, &t_add)?;
            let miss = net.eval(&y_hat)?.dist(&x_hat);
            rows.push(vec![lambda, obj, miss, sup_error(&net, &at, &m1)?]);
        }
        rep.tables.push(Table {
            name: "lambda-sweep".into(),
            header: vec![
                "lambda".into(),
                "objective".into(),
                "miss_at_x_hat".into(),
                "sup_error".into(),
            ],
            rows,
        });
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DlVsCsConfig {
    pub levels: LevelStructure,
    /// Vanishing level (0-based).
    pub k: usize,
    pub p: f64,
    pub budget: BudgetParams,
    pub domain_size: usize,
    pub seed: u64,
    pub retries: usize,
    pub lipschitz_trials: usize,
    pub epochs: usize,
}

impl DlVsCsConfig {
    pub fn walsh_default(seed: u64) -> Result<Self> {
        Ok(DlVsCsConfig {
            levels: LevelStructure::dyadic(6, vec![1, 1, 1, 2, 0, 2])?,
            k: 4,
            p: 4.0,
            budget: BudgetParams::default(),
            domain_size: 6,
            seed,
            retries: 5,
            lipschitz_trials: 12,
            epochs: 300,
        })
    }
}

/// DL outperforms CS on an enlarged domain at the cost of instability (Walsh sampling).
pub fn dl_vs_cs_demo(cfg: &DlVsCsConfig) -> Result<DemoReport> {
    let levels = &cfg.levels;
    if cfg.k >= levels.r() || levels.sparsities[cfg.k] != 0 {
        return arg_err("the selected level must have zero sparsity");
    }
    if levels.total_sparsity() == 0 {
        return arg_err("some other level must be nonzero");
    }
    let m = walsh_budgets(levels, cfg.budget)?;
    let h = Sparsifier::Haar;
    let t = ripl_order_auto(levels);
    let mut chosen = None;
    for attempt in 0..=cfg.retries {
        let sch = draw_multilevel_scheme(
            &m,
            &levels.bounds,
            cfg.seed + attempt as u64,
            DrawMode::Dedup,
        )?;
        let a = MeasurementOperator::from_scheme(Transform::Walsh, &sch)?;
        let res = ripl_constant(&a, &h, levels, &t, RiplMode::Exhaustive)?;
        if res.delta <= 0.5 {
            chosen = Some((a, res.delta, attempt));
            break;
        }
    }
    let (a, delta_ripl, attempt) = chosen.ok_or_else(|| {
        Error::Argument(format!(
            "RIPL not certified after {} draws",
            cfg.retries + 1
        ))
    })?;

    let mut r = rng::seeded(cfg.seed ^ 0xd1);
    let base: Vec<CVector> = (0..cfg.domain_size)
        .map(|_| random_sparse_in_levels(levels, &mut r))
        .collect::<Result<_>>()?;
    let od = overperformance_domain(levels, cfg.k, cfg.p, &base)?;
    let weights = levels.coefficient_weights();
    let cs = BestEffortDecoder::new(CsDecoder {
        a: &a,
        h: &h,
        weights,
        model: Model::SparseInLevels(levels),
        config: SolverConfig {
            max_iter: 200_000,
            tol: 1e-7,
            ..SolverConfig::default()
        },
    });

    let mut rep = DemoReport::new("dl-vs-cs");
    rep.set("zero", 0.0);
    rep.set("p", cfg.p);
    rep.set("m", a.m() as f64);
    rep.set("rows_in_vanishing_level", m[cfg.k] as f64);
    rep.set("ripl_delta", delta_ripl);
    rep.set("ripl_attempt", attempt as f64);
    rep.set("half", 0.5);
    rep.set("kernel_residual_z1", a.apply(&od.z1)?.norm());
    rep.claim(
        "RIPL constant is at most 1/2",
        "ripl_delta",
        Rel::Le,
        "half",
    );
    rep.claim(
        "z_1 lies in the kernel",
        "kernel_residual_z1",
        Rel::Near(1e-10),
        "zero",
    );

    let domain = FiniteDomain::new(base.clone(), Metric::L2)?;
    rep.set(
        "c_opt",
        optimality_constant(&a, &domain, Codomain::Ambient)?.c_opt,
    );
    rep.set("cs_sup_error_m1", sup_error(&cs, &a, &base)?);
    rep.set("cs_exact_tol", 1e-5);
    rep.claim("c_opt(A, M_1) is zero", "c_opt", Rel::Near(1e-9), "zero");
    rep.claim(
        "CS recovers M_1",
        "cs_sup_error_m1",
        Rel::Le,
        "cs_exact_tol",
    );

    let cs_sup = sup_error(&cs, &a, &od.elements)?;
    rep.set("cs_sup_error", cs_sup);
    rep.set("cs_sup_error_over_p", cs_sup / cfg.p);
    rep.set("one", 1.0);
    rep.set("cs_sup_error_tol", 1.0 - 1e-6);
    rep.claim(
        "CS misses z by at least ||z_1||",
        "cs_sup_error",
        Rel::Ge,
        "cs_sup_error_tol",
    );

    let pairs: Vec<(CVector, CVector)> = od
        .elements
        .iter()
        .map(|x| Ok((a.apply(x)?, x.clone())))
        .collect::<Result<_>>()?;
    let delta_target = 1.0 / cfg.p;
    let (net, _) = fit_network(&pairs, 8 * pairs.len(), cfg.epochs, cfg.seed)?;
    let net_sup = sup_error(&net, &a, &od.elements)?;
    rep.set("delta", delta_target);
    rep.set("net_sup_error", net_sup);
    rep.claim(
        "trained net is delta-accurate",
        "net_sup_error",
        Rel::Le,
        "delta",
    );
    rep.claim(
        "trained net is p times closer than CS",
        "net_sup_error",
        Rel::Le,
        "cs_sup_error_over_p",
    );

    let eps = 1.0 / cfg.p;
    let az = a.apply(&od.z)?;
    let zero_y = CVector::zeros(a.m());
    let probe =
        LipschitzProbe::new(eps, cfg.lipschitz_trials, cfg.seed).with_candidates(vec![az.clone()]);
    let net_lip = empirical_lipschitz(&net, &zero_y, &probe)?;
    rep.set("epsilon", eps);
    rep.set("az_norm", az.norm());
    rep.set("net_lipschitz", net_lip.value);
    rep.set("net_lipschitz_floor", 0.95 * cfg.p);
    rep.set("inverse_epsilon", 1.0 / eps);
    rep.claim("||A z|| is within epsilon", "az_norm", Rel::Le, "epsilon");
    rep.claim(
        "trained net is unstable: L >= 0.95 p",
        "net_lipschitz",
        Rel::Ge,
        "net_lipschitz_floor",
    );

    let mut cs_lip = 0.0f64;
    let mut rows = Vec::new();
    let mut points: Vec<(String, CVector)> =
        vec![("0".into(), zero_y.clone()), ("Az".into(), az.clone())];
    for (q, x) in base.iter().enumerate().take(2) {
        points.push((format!("Ax{q}"), a.apply(x)?));
    }
    for (q, (_, y)) in points.iter().enumerate() {
        let probe = LipschitzProbe::new(eps, cfg.lipschitz_trials, cfg.seed + q as u64)
            .with_candidates(vec![az.clone()]);
        let est = empirical_lipschitz(&cs, y, &probe)?;
        cs_lip = cs_lip.max(est.value);
        let nl = empirical_lipschitz(&net, y, &probe)?;
        rows.push(vec![q as f64, est.value, nl.value]);
    }
    rep.set("cs_lipschitz", cs_lip);
    rep.set("cs_lipschitz_cap", od.cs_cap);
    rep.set("cs_unconverged_solves", cs.fallbacks() as f64);
    rep.claim(
        "CS Lipschitz stays below the cap",
        "cs_lipschitz",
        Rel::Le,
        "cs_lipschitz_cap",
    );
    rep.claim(
        "the net is less stable than CS",
        "net_lipschitz",
        Rel::Gt,
        "cs_lipschitz",
    );
    rep.tables.push(Table {
        name: "lipschitz".into(),
        header: vec!["point".into(), "cs".into(), "net".into()],
        rows,
    });
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DestabilizeConfig {
    pub levels: LevelStructure,
    pub budget: BudgetParams,
    /// Training points `x_1, ..., x_K`.
    pub k: usize,
    pub gamma: f64,
    pub seed: u64,
    pub epochs: usize,
    pub lipschitz_trials: usize,
}

impl DestabilizeConfig {
    pub fn fourier_default(seed: u64) -> Result<Self> {
        Ok(DestabilizeConfig {
            levels: LevelStructure::dyadic(6, vec![1, 1, 1, 1, 1, 2])?,
            budget: BudgetParams { nu: 0.1, c: 0.004 },
            k: 6,
            gamma: 0.1,
            seed,
            epochs: 300,
            lipschitz_trials: 16,
        })
    }
}

/// Additional training data may destabilise (Fourier sampling).
pub fn destabilize_demo(cfg: &DestabilizeConfig) -> Result<DemoReport> {
    let levels = &cfg.levels;
    let m = fourier_budgets(levels, cfg.budget)?;
    if m.iter().sum::<usize>() >= levels.n {
        return arg_err("the budgets sample every row; the kernel is trivial");
    }
    let sch = draw_multilevel_scheme(&m, &levels.bounds, cfg.seed, DrawMode::Dedup)?;
    let a = MeasurementOperator::from_scheme(Transform::Fourier, &sch)?;
    let mut r = rng::seeded(cfg.seed ^ 0xde);
    let xs: Vec<CVector> = (0..cfg.k)
        .map(|_| random_sparse_in_levels(levels, &mut r))
        .collect::<Result<_>>()?;
    let pairs: Vec<(CVector, CVector)> = xs
        .iter()
        .map(|x| Ok((a.apply(x)?, x.clone())))
        .collect::<Result<_>>()?;

    let mut rep = DemoReport::new("destabilize");
    rep.set("zero", 0.0);
    rep.set("m", a.m() as f64);
    rep.set("n", levels.n as f64);
    rep.set("gamma", cfg.gamma);
    rep.set("fit_tol", 1e-3);
    rep.claim("m < N", "m", Rel::Lt, "n");

    let before = interpolatory_network(&pairs, cfg.seed)?;
    rep.set("before_fit", sup_error(&before, &a, &xs)?);
    rep.claim(
        "constructive net interpolates before addition",
        "before_fit",
        Rel::Le,
        "fit_tol",
    );
    let (trained, _) = fit_network(&pairs, 8 * (cfg.k + 2), cfg.epochs, cfg.seed)?;
    rep.set("trained_before_fit", sup_error(&trained, &a, &xs)?);
    rep.claim(
        "trained net interpolates before addition",
        "trained_before_fit",
        Rel::Le,
        "fit_tol",
    );

    let pair = destabilizing_pair(&a, &xs, cfg.gamma, cfg.seed ^ 0xab)?;
    let az1 = a.apply(&pair.z1)?;
    rep.set("norm_z1", pair.z1.norm());
    rep.set("norm_z2", pair.z2.norm());
    rep.set("az1_norm", az1.norm());
    rep.set("az1_cap", cfg.gamma * cfg.gamma / 2.0);
    rep.set("az2_norm", a.apply(&pair.z2)?.norm());
    rep.claim("||A z_1|| <= gamma^2 / 2", "az1_norm", Rel::Le, "az1_cap");
    rep.claim(
        "z_2 lies in the kernel",
        "az2_norm",
        Rel::Near(1e-10),
        "zero",
    );

    let mut extended = pairs.clone();
    extended.push((a.apply(&pair.first)?, pair.first.clone()));
    extended.push((a.apply(&pair.second)?, pair.second.clone()));
    let scale = extended.iter().map(|(y, _)| y.norm()).fold(1.0, f64::max);
    let after = least_squares_interpolant(&extended, 1e-9 * scale, cfg.seed)?;
    let y1 = a.apply(&xs[0])?;
    let probe = LipschitzProbe::new(cfg.gamma, cfg.lipschitz_trials, cfg.seed)
        .with_candidates(vec![az1.clone()]);
    let lip = empirical_lipschitz(&after, &y1, &probe)?;
    rep.set("after_lipschitz", lip.value);
    rep.set("inverse_gamma", 1.0 / cfg.gamma);
    rep.set("after_lipschitz_floor", 0.9 / cfg.gamma);
    rep.set("after_objective", objective(&after, &extended)?);
    rep.set(
        "analytic_objective",
        pair.z2.norm_sqr() / (4.0 * extended.len() as f64),
    );
    rep.claim(
        "retrained minimiser reaches the least-squares optimum",
        "after_objective",
        Rel::Near(1e-9),
        "analytic_objective",
    );
    rep.claim(
        "retrained minimiser: L >= 0.9 / gamma",
        "after_lipschitz",
        Rel::Ge,
        "after_lipschitz_floor",
    );
    rep.claim(
        "retrained minimiser: L >= 1 / gamma",
        "after_lipschitz",
        Rel::Ge,
        "inverse_gamma",
    );

    let (trained_after, _) = fit_network(&extended, 8 * (cfg.k + 2), cfg.epochs, cfg.seed)?;
    let lip_t = empirical_lipschitz(&trained_after, &y1, &probe)?;
    rep.set("trained_after_lipschitz", lip_t.value);
    rep.set(
        "trained_after_objective",
        objective(&trained_after, &extended)?,
    );
    Ok(rep)
}
