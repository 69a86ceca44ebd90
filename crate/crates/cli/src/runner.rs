//! Executes one scenario.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkhs_purity::ball::{chen_identity_residual, defect_identity_residual};
use rkhs_purity::dilation::{
    bcl_dilation_certify, bcl_pair, colligation_from_defects, schur_agler_purity, transfer_eval, BCLReport,
    BCLTolerances, BCLTriple, Colligation,
};
use rkhs_purity::kernels::cnp_certificate;
use rkhs_purity::linalg;
use rkhs_purity::operators::{
    adjoint_compression, generated_invariant_subspace, shift_tuple, wandering_witness, MultiplierSymbol,
    WitnessOutcome,
};
use rkhs_purity::purity::{
    a_operator_monotonicity, decay_curve, invariant_restriction_test, multiplier_purity_verdict,
    slice_purity_consistency, Verdict,
};
use rkhs_purity::random::{
    forced_unitary_symbol, random_bcl_triple, random_colligation, random_contractive_symbol,
    random_homogeneous_vector, random_polydisc_point,
};
use rkhs_purity::spaces::{Domain, MultiIndex, SpaceVector};
use rkhs_purity::wire::SymbolLiteral;
use rkhs_purity::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{KernelRef, ScenarioConfig, SweepConfig, Task, Tolerances, SCHEMA_VERSION};
use crate::error::CliError;
use crate::report::{RunReport, Timing, EXIT_INVALID, EXIT_PASS, EXIT_VIOLATION};

/// Sample points for transfer-function contractivity.
const TRANSFER_SAMPLES: usize = 200;
const DEFAULT_STEPS: usize = 20;

#[derive(Default)]
struct Outcome {
    verdicts: BTreeMap<String, String>,
    payload: Value,
    violations: Vec<String>,
}

impl Outcome {
    fn verdict(&mut self, name: &str, value: impl ToString) {
        self.verdicts.insert(name.to_string(), value.to_string());
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(message());
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pure => "pure",
        Verdict::NotPure => "not_pure",
        Verdict::Inconsistent => "inconsistent",
    }
}

pub fn run(config: &ScenarioConfig) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        library_version: rkhs_purity::VERSION.to_string(),
        scenario_id: config.scenario_id.clone(),
        task: Some(config.task),
        seed: config.seed,
        tolerances: BTreeMap::new(),
        pass: false,
        exit_code: EXIT_INVALID,
        verdicts: BTreeMap::new(),
        violations: Vec::new(),
        payload: Value::Null,
        error: None,
        timing: Timing { elapsed_ms: 0.0 },
    };
    let expected_refusal = config.expect.as_ref().and_then(|e| e.refused.clone());
    let result = Tolerances::resolve(&config.tolerances).and_then(|tol| {
        report.tolerances = tol.as_map();
        execute(config, &tol)
    });
    match result {
        Ok(mut outcome) => {
            if let Some(kind) = &expected_refusal {
                outcome.violations.push(format!("expected refusal `{kind}`, but the task ran"));
            }
            report.pass = outcome.violations.is_empty();
            report.exit_code = if report.pass { EXIT_PASS } else { EXIT_VIOLATION };
            report.verdicts = outcome.verdicts;
            report.violations = outcome.violations;
            report.payload = outcome.payload;
        }
        Err(e) if expected_refusal.as_deref() == Some(e.kind()) => {
            report.pass = true;
            report.exit_code = EXIT_PASS;
            report.verdicts.insert("refused".into(), e.kind().into());
            report.payload = json!({ "refusal": e.to_object() });
        }
        Err(e) => report.error = Some(e.to_object()),
    }
    report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// Report for a scenario that could not be loaded.
pub fn invalid(scenario_id: &str, task: Option<Task>, error: &CliError) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        library_version: rkhs_purity::VERSION.to_string(),
        scenario_id: scenario_id.to_string(),
        task,
        seed: None,
        tolerances: BTreeMap::new(),
        pass: false,
        exit_code: EXIT_INVALID,
        verdicts: BTreeMap::new(),
        violations: Vec::new(),
        payload: Value::Null,
        error: Some(error.to_object()),
        timing: Timing { elapsed_ms: 0.0 },
    }
}

fn execute(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    match cfg.task {
        Task::Purity => match cfg.mode.as_deref() {
            None => purity(cfg, tol),
            Some("slice") => slice(cfg, tol),
            Some(m) => Err(bad_mode(cfg.task, m)),
        },
        Task::Identity => identity(cfg, tol),
        Task::Cnp => no_mode(cfg).and_then(|_| cnp(cfg, tol)),
        Task::Bcl => no_mode(cfg).and_then(|_| bcl(cfg, tol)),
        Task::Colligation => no_mode(cfg).and_then(|_| colligation(cfg, tol)),
        Task::Decay => match cfg.mode.as_deref() {
            None => decay(cfg, tol),
            Some("restriction") => restriction(cfg, tol),
            Some(m) => Err(bad_mode(cfg.task, m)),
        },
        Task::Witness => no_mode(cfg).and_then(|_| witness(cfg, tol)),
    }
}

fn bad_mode(task: Task, mode: &str) -> CliError {
    CliError::Config(format!("task {task} has no mode `{mode}`"))
}

fn no_mode(cfg: &ScenarioConfig) -> Result<(), CliError> {
    match &cfg.mode {
        Some(m) => Err(bad_mode(cfg.task, m)),
        None => Ok(()),
    }
}

fn rng(cfg: &ScenarioConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0))
}

fn require_hardy(cfg: &ScenarioConfig) -> Result<(), CliError> {
    if cfg.space.is_hardy_polydisc() {
        Ok(())
    } else {
        Err(CliError::Config(format!("task {} runs on the Hardy polydisc", cfg.task)))
    }
}

fn symbol(lit: &SymbolLiteral, n: usize, k: usize) -> Result<MultiplierSymbol, CliError> {
    if lit.n != n || lit.coeff_dim != k {
        return Err(CliError::Config(format!(
            "symbol on {} variables with {}x{} coefficients for a space with n = {n}, coeff_dim = {k}",
            lit.n, lit.coeff_dim, lit.coeff_dim
        )));
    }
    Ok(lit.to_symbol()?)
}

fn sweep_or_input<'a>(cfg: &'a ScenarioConfig, what: &str, present: bool) -> Result<Option<&'a SweepConfig>, CliError> {
    match (present, &cfg.sweep) {
        (true, None) => Ok(None),
        (false, Some(s)) => Ok(Some(s)),
        (true, Some(_)) => Err(CliError::Config(format!("give either {what} or sweep, not both"))),
        (false, None) => Err(CliError::Config(format!("task {} needs {what} or sweep", cfg.task))),
    }
}

/// Explicit symbol, or seeded random contractive symbols followed by forced
/// unitary ones. The flag marks forced symbols.
fn symbols(cfg: &ScenarioConfig, domain: &Domain) -> Result<Vec<(MultiplierSymbol, bool)>, CliError> {
    let (n, k, d) = (cfg.space.n, cfg.space.coeff_dim, cfg.space.degree_cap);
    match sweep_or_input(cfg, "symbol", cfg.symbol.is_some())? {
        None => Ok(vec![(symbol(cfg.symbol.as_ref().expect("checked"), n, k)?, false)]),
        Some(s) => {
            let mut rng = rng(cfg);
            let mut out = Vec::with_capacity(s.count + s.forced_unitary);
            for _ in 0..s.count {
                out.push((random_contractive_symbol(&mut rng, domain, k, s.symbol_degree, d)?, false));
            }
            for _ in 0..s.forced_unitary {
                out.push((forced_unitary_symbol(&mut rng, domain, k, s.symbol_degree, d)?, true));
            }
            Ok(out)
        }
    }
}

fn purity(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    let domain = cfg.space.domain()?;
    let d = cfg.space.degree_cap;
    let t = tol.get("purity");
    let mut out = Outcome::default();
    let cases = symbols(cfg, &domain)?;
    if cases.len() == 1 && cfg.sweep.is_none() {
        let r = multiplier_purity_verdict(&cases[0].0, &domain, d, t)?;
        out.verdict("verdict", verdict_name(r.verdict));
        out.check(r.verdict != Verdict::Inconsistent, || "inconsistent verdict".into());
        if let Some(expected) = cfg.expect.as_ref().and_then(|e| e.verdict) {
            out.check(r.verdict == expected, || {
                format!("verdict {} differs from expected {}", verdict_name(r.verdict), verdict_name(expected))
            });
        }
        out.payload = to_value(&r);
        return Ok(out);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut near_boundary = 0;
    let mut max_norm = 0.0_f64;
    for (i, (phi, forced)) in cases.iter().enumerate() {
        let r = multiplier_purity_verdict(phi, &domain, d, t)?;
        *counts.entry(verdict_name(r.verdict)).or_default() += 1;
        near_boundary += usize::from(r.near_boundary);
        max_norm = max_norm.max(r.contractivity_norm);
        out.check(r.verdict != Verdict::Inconsistent, || format!("symbol {i}: inconsistent verdict"));
        if *forced {
            out.check(r.verdict == Verdict::NotPure, || format!("symbol {i}: unitary constant term judged pure"));
        }
    }
    let inconsistent = counts.get("inconsistent").copied().unwrap_or(0);
    out.verdict("inconsistent", inconsistent);
    out.payload = json!({
        "symbols": cases.len(),
        "verdict_counts": counts,
        "near_boundary": near_boundary,
        "max_contractivity_norm": max_norm,
    });
    Ok(out)
}

fn slice(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    require_hardy(cfg)?;
    let domain = cfg.space.domain()?;
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for (i, (phi, _)) in symbols(cfg, &domain)?.iter().enumerate() {
        let r = slice_purity_consistency(phi, cfg.space.degree_cap, tol.get("purity"))?;
        out.check(r.pass, || format!("symbol {i}: slice verdicts {:?} against {:?}", r.slice_verdicts, r.verdict));
        reports.push(r);
    }
    out.verdict("consistent", out.violations.is_empty());
    out.payload = json!({ "symbols": reports.len(), "reports": reports });
    Ok(out)
}

fn identity(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    let basis = Arc::new(cfg.space.basis()?);
    let residual_tol = tol.get("residual");
    let default = match cfg.space.kernel()? {
        KernelRef::Ball(k) if k.hm_parameter().is_some() => "defect",
        _ => "chen",
    };
    let mut out = Outcome::default();
    match cfg.mode.as_deref().unwrap_or(default) {
        "defect" => {
            let r = defect_identity_residual(&basis)?;
            out.check(r.residual_norm <= residual_tol, || format!("defect residual {:e}", r.residual_norm));
            out.verdict("identity_holds", r.residual_norm <= residual_tol);
            out.payload = to_value(&r);
        }
        "chen" => {
            let r = chen_identity_residual(&basis, tol.get("cnp"))?;
            let ok = r.residual.residual_norm <= residual_tol;
            out.check(ok, || format!("Chen residual {:e}", r.residual.residual_norm));
            out.check(r.max_increase <= tol.get("monotone"), || format!("partial sums increase by {:e}", r.max_increase));
            out.verdict("identity_holds", ok);
            out.verdict("monotone", r.monotone);
            out.payload = to_value(&r);
        }
        m => return Err(bad_mode(cfg.task, m)),
    }
    Ok(out)
}

fn cnp(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    let order = cfg.space.degree_cap;
    let cert = match cfg.space.kernel()? {
        KernelRef::Factor(f) => cnp_certificate(&f, order, tol.get("cnp"))?,
        KernelRef::Ball(b) => cnp_certificate(&b, order, tol.get("cnp"))?,
    };
    let mut out = Outcome::default();
    out.verdict("is_cnp", cert.is_cnp_to_order);
    if let Some(e) = &cfg.expect {
        if let Some(expected) = e.is_cnp {
            out.check(cert.is_cnp_to_order == expected, || format!("is_cnp = {}, expected {expected}", cert.is_cnp_to_order));
        }
        if let Some(expected) = e.first_violation {
            out.check(cert.first_violation == Some(expected), || {
                format!("first violation {:?}, expected {expected}", cert.first_violation)
            });
        }
    }
    out.payload = to_value(&cert);
    Ok(out)
}

fn bcl_tolerances(tol: &Tolerances) -> BCLTolerances {
    BCLTolerances { identity: tol.get("identity"), residual: tol.get("residual"), purity: tol.get("purity") }
}

fn bcl(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    require_hardy(cfg)?;
    let vars = cfg.space.n;
    let d = cfg.space.degree_cap;
    let bt = bcl_tolerances(tol);
    let mut out = Outcome::default();
    let triples: Vec<BCLTriple> = match sweep_or_input(cfg, "triple", cfg.triple.is_some())? {
        None => vec![cfg.triple.clone().expect("checked")],
        Some(s) => {
            let e_max = s.e_dim_max.unwrap_or(4).max(1);
            let mut rng = rng(cfg);
            (0..s.count)
                .map(|i| {
                    let e = rng.random_range(1..=e_max);
                    let rank = rng.random_range(0..=e);
                    let axis = rng.random_range(0..vars);
                    random_bcl_triple(&mut rng, e, rank, axis, i % 2 == 1)
                })
                .collect::<Result<_, _>>()?
        }
    };
    let mut reports: Vec<BCLReport> = Vec::with_capacity(triples.len());
    for (i, t) in triples.iter().enumerate() {
        let r = bcl_dilation_certify(t, vars + 1, d, &bt)?;
        for f in &r.failures {
            out.violations.push(format!("triple {i}: {f}"));
        }
        reports.push(r);
    }
    if cfg.sweep.is_none() {
        let r = &reports[0];
        out.verdict("phi_p", verdict_name(r.phi_p.verdict));
        out.verdict("phi_q", verdict_name(r.phi_q.verdict));
        out.payload = to_value(r);
    } else {
        let max = |f: fn(&BCLReport) -> f64| reports.iter().map(f).fold(0.0_f64, f64::max);
        let pure = |f: fn(&BCLReport) -> Verdict| reports.iter().filter(|r| f(r) == Verdict::Pure).count();
        out.verdict("exceptions", out.violations.len());
        out.payload = json!({
            "triples": reports.len(),
            "max_identity_error": max(|r| r.identity_error),
            "max_commutator_residual": max(|r| r.commutator_residual),
            "max_isometry_residual": max(|r| r.isometry_residual),
            "phi_p_pure": pure(|r| r.phi_p.verdict),
            "phi_q_pure": pure(|r| r.phi_q.verdict),
        });
    }
    Ok(out)
}

fn colligation_checks(
    col: &Colligation,
    cfg: &ScenarioConfig,
    tol: &Tolerances,
    rng: &mut ChaCha8Rng,
    label: &str,
    out: &mut Outcome,
) -> Result<Value, CliError> {
    col.validate()?;
    if col.num_vars() != cfg.space.n {
        return Err(CliError::Config(format!(
            "colligation in {} variables for a space with n = {}",
            col.num_vars(),
            cfg.space.n
        )));
    }
    let t = tol.get("purity");
    let r = schur_agler_purity(col, cfg.space.degree_cap, t)?;
    let rho_a = linalg::spectral_radius(&col.a)?;
    out.check(r.verdict != Verdict::Inconsistent, || format!("{label}: inconsistent verdict"));
    out.check((r.verdict == Verdict::Pure) == (rho_a < 1.0 - t), || {
        format!("{label}: verdict {} against rho(A) = {rho_a}", verdict_name(r.verdict))
    });
    let mut max_norm = 0.0_f64;
    for _ in 0..TRANSFER_SAMPLES {
        let z = random_polydisc_point(rng, col.num_vars(), 0.999);
        max_norm = max_norm.max(linalg::spectral_norm(&transfer_eval(col, &z)?));
    }
    out.check(max_norm <= 1.0 + tol.get("contractivity"), || format!("{label}: transfer norm {max_norm}"));
    Ok(json!({ "purity": r, "rho_a": rho_a, "max_transfer_norm": max_norm }))
}

fn colligation(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    require_hardy(cfg)?;
    let mut rng = rng(cfg);
    let mut out = Outcome::default();
    let given = [cfg.colligation.is_some(), cfg.defects.is_some(), cfg.sweep.is_some()];
    if given.iter().filter(|&&x| x).count() != 1 {
        return Err(CliError::Config("colligation task needs exactly one of colligation, defects, sweep".into()));
    }
    if let Some(col) = &cfg.colligation {
        let payload = colligation_checks(col, cfg, tol, &mut rng, "colligation", &mut out)?;
        out.verdict("verdict", payload["purity"]["verdict"].as_str().unwrap_or_default());
        out.payload = payload;
    } else if let Some(defects) = &cfg.defects {
        let x: Vec<DMatrix<C64>> = defects.x.iter().map(|m| m.0.clone()).collect();
        let g: Vec<DMatrix<C64>> = defects.g.iter().map(|m| m.0.clone()).collect();
        let model = colligation_from_defects(&x, &g, tol.get("residual"))?;
        let mut payload = colligation_checks(&model.colligation, cfg, tol, &mut rng, "model", &mut out)?;
        payload["graph_residual"] = json!(model.graph_residual);
        payload["e_dim"] = json!(model.colligation.e_dim);
        payload["h_dims"] = json!(model.colligation.h_dims);
        out.verdict("verdict", payload["purity"]["verdict"].as_str().unwrap_or_default());
        out.payload = payload;
    } else {
        let s = cfg.sweep.as_ref().expect("checked");
        let h_dims = s.h_dims.clone().unwrap_or_else(|| vec![1; cfg.space.n]);
        let e_max = s.e_dim_max.unwrap_or(2).max(1);
        let mut pure = 0;
        for i in 0..s.count {
            let e = rng.random_range(1..=e_max);
            let col = random_colligation(&mut rng, e, &h_dims)?;
            let v = colligation_checks(&col, cfg, tol, &mut rng, &format!("colligation {i}"), &mut out)?;
            pure += usize::from(v["purity"]["verdict"] == "pure");
        }
        out.verdict("exceptions", out.violations.len());
        out.payload = json!({ "colligations": s.count, "pure": pure });
    }
    Ok(out)
}

fn decay(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    let domain = cfg.space.domain()?;
    let basis = Arc::new(cfg.space.basis()?);
    let phi = symbol(
        cfg.symbol.as_ref().ok_or_else(|| CliError::Config("decay needs a symbol".into()))?,
        cfg.space.n,
        cfg.space.coeff_dim,
    )?;
    let steps = cfg.steps.unwrap_or(DEFAULT_STEPS);
    let verdict = multiplier_purity_verdict(&phi, &domain, cfg.space.degree_cap, tol.get("purity"))?;
    let t = adjoint_compression(&basis, &phi)?;
    let mut xi = vec![C64::new(0.0, 0.0); cfg.space.coeff_dim];
    xi[0] = C64::new(1.0, 0.0);
    let h = SpaceVector::constant(Arc::clone(&basis), &xi)?;
    let curve = decay_curve(&t, &h, steps)?;
    let max_increase = curve.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let loewner = a_operator_monotonicity(&t.data, steps)?;
    let mut out = Outcome::default();
    out.check(!(max_increase > tol.get("monotone")), || format!("decay curve increases by {max_increase:e}"));
    out.check(loewner.monotone, || format!("T^m T^*m not decreasing: {:e}", loewner.min_gap_eigenvalue));
    out.verdict("verdict", verdict_name(verdict.verdict));
    out.verdict("monotone", out.violations.is_empty());
    out.payload = json!({ "curve": curve, "purity": verdict, "loewner": loewner });
    Ok(out)
}

fn restriction(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    require_hardy(cfg)?;
    let n = cfg.space.n;
    let d = cfg.space.degree_cap;
    let steps = cfg.steps.unwrap_or(DEFAULT_STEPS);
    let mut pairs = Vec::new();
    match &cfg.sweep {
        None => {
            let phi = symbol(cfg.symbol.as_ref().ok_or_else(|| CliError::Config("restriction needs a symbol".into()))?, n, 1)?;
            let theta = match (&cfg.theta, &cfg.triple) {
                (Some(lit), None) => lit.to_symbol()?,
                (None, Some(t)) => bcl_pair(t, n)?.1,
                _ => return Err(CliError::Config("restriction needs exactly one of theta, triple".into())),
            };
            pairs.push((phi, theta));
        }
        Some(s) => {
            let mut rng = rng(cfg);
            let e_max = s.e_dim_max.unwrap_or(3).max(2);
            let hardy = cfg.space.domain()?;
            for _ in 0..s.count {
                let e = rng.random_range(2..=e_max);
                let rank = rng.random_range(0..e);
                let axis = rng.random_range(0..n);
                let t = random_bcl_triple(&mut rng, e, rank, axis, false)?;
                let phi = random_contractive_symbol(&mut rng, &hardy, 1, s.symbol_degree, d)?;
                pairs.push((phi, bcl_pair(&t, n)?.1));
            }
        }
    }
    let mut out = Outcome::default();
    let mut reports = Vec::new();
    for (i, (phi, theta)) in pairs.iter().enumerate() {
        let r = invariant_restriction_test(phi, theta, d, steps, tol.get("ratio"))?;
        out.check(r.pass, || format!("pair {i}: ratio error {:e}", r.max_ratio_error));
        reports.push(r);
    }
    out.verdict("ratio_holds", out.violations.is_empty());
    out.payload = if cfg.sweep.is_none() {
        to_value(&reports[0])
    } else {
        let worst = reports.iter().map(|r| r.max_ratio_error).fold(0.0_f64, f64::max);
        json!({ "pairs": reports.len(), "max_ratio_error": worst })
    };
    Ok(out)
}

fn witness(cfg: &ScenarioConfig, tol: &Tolerances) -> Result<Outcome, CliError> {
    let basis = Arc::new(cfg.space.basis()?);
    let shifts = shift_tuple(&basis)?;
    let mut generators = Vec::new();
    match sweep_or_input(cfg, "generators", cfg.generators.is_some())? {
        None => {
            let gens = cfg.generators.as_ref().expect("checked");
            let mut g = DMatrix::zeros(basis.dim(), gens.len());
            for (j, alpha) in gens.iter().enumerate() {
                let pos = basis
                    .position(&MultiIndex(alpha.clone()))
                    .ok_or_else(|| CliError::Config(format!("generator {alpha:?} is not a monomial of the truncation")))?;
                g[(basis.flat(pos, 0), j)] = C64::new(1.0, 0.0);
            }
            generators.push(g);
        }
        Some(s) => {
            let mut rng = rng(cfg);
            let top = cfg.space.degree_cap.min(2);
            if top == 0 {
                return Err(CliError::Config("witness sweep needs degree_cap >= 1".into()));
            }
            for _ in 0..s.count {
                let count = rng.random_range(1..=2);
                let mut g = DMatrix::zeros(basis.dim(), count);
                for j in 0..count {
                    let deg = rng.random_range(1..=top);
                    g.set_column(j, &random_homogeneous_vector(&mut rng, &basis, deg).column(0));
                }
                generators.push(g);
            }
        }
    }
    let t = tol.get("witness");
    let mut out = Outcome::default();
    let mut found = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        let m = generated_invariant_subspace(&basis, g)?;
        match wandering_witness(&shifts, &m, cfg.space.degree_cap, t)? {
            WitnessOutcome::Found(w) => {
                out.check(w.max_residual() <= t, || format!("subspace {i}: witness residual {:e}", w.max_residual()));
                found.push(json!({
                    "subspace_dim": m.dim(),
                    "h_index": w.h_index,
                    "multi_index": w.multi_index,
                    "residuals": w.residuals,
                    "eta_norm": w.eta.norm(),
                }));
            }
            WitnessOutcome::BudgetExhausted { budget } => {
                out.violations.push(format!("subspace {i}: no witness within degree {budget}"));
                found.push(Value::Null);
            }
        }
    }
    out.verdict("witnesses_found", found.iter().filter(|v| !v.is_null()).count());
    out.payload = if cfg.sweep.is_none() { found.swap_remove(0) } else { json!({ "witnesses": found }) };
    Ok(out)
}
