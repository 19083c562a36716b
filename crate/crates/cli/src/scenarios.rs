//! Scenario runners: both sides of each inequality over the test family.

use std::f64::consts::PI;

use anyhow::{anyhow, bail, Result};
use lplab_core::calderon::{build_partition, decompose_psi, find_intervals, PartitionSystem};
use lplab_core::constants::{c_const, check_conditions, fit_scale_exponent, ConstantsReport};
use lplab_core::field::{lp_norm, weighted_lp_norm, Grid, PreparedSpectrum, SampledField, ScaleGrid};
use lplab_core::kernel::{KernelFamily, KernelSpec};
use lplab_core::maximal::{grand_max, GrandMaxConfig};
use lplab_core::transforms::{
    calderon_normalized, directional_energy, g_discrete, g_function, make_atom, synthesize, validate_atom, Cube,
};
use lplab_core::weights::{ap_characteristic, Weight, WeightSpec};
use lplab_core::LabError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Scenario};
use crate::family::{members, translates, Member};
use crate::report::{Diagnostic, PlotTable, Report, Row};

/// Largest `j` probed by the condition checks that gate a run.
const CONDITION_J_MAX: i64 = 8;
/// Relative ratio change tolerated across translates.
const TRANSLATION_TOL: f64 = 1e-9;
const ORACLE_ANGLES: usize = 720;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Prop23 | Scenario::Thm210 => square_function_comparison(cfg),
        Scenario::Cor31 => hardy_comparison(cfg),
        Scenario::Prop36 => discrete_comparison(cfg),
        Scenario::Lemma33 => atom_uniformity(cfg),
        Scenario::ConstantsAudit => constants_audit(cfg),
    }
}

/// Partition system of the single kernel `phi` at base `b`.
pub fn partition_for(phi: &KernelSpec, dimension: usize, b: f64) -> Result<PartitionSystem> {
    let fam = KernelFamily::single(phi.clone(), dimension)?;
    let cover = find_intervals(&fam, 64, &ScaleGrid::log_range(1e-4, 1e4, 801)?)?;
    Ok(build_partition(&fam, b, &cover)?)
}

pub fn default_constants_grid(dimension: usize) -> Grid {
    if dimension == 1 {
        Grid::line(1 << 14, 1024.0).expect("valid grid")
    } else {
        Grid::plane(256, 32.0).expect("valid grid")
    }
}

fn decomposition_residual(p: &PartitionSystem, psi: &KernelSpec, theta: &KernelSpec, big_a: f64) -> Result<f64> {
    let mut truncation = 16;
    loop {
        match decompose_psi(p, psi, theta, big_a, truncation) {
            Ok(d) => return Ok(d.residual()),
            Err(LabError::TruncationTooShort(_)) if truncation < 1 << 14 => truncation *= 2,
            Err(e) => bail!("config error: {e}"),
        }
    }
}

/// Base of the partition behind the condition checks: `b` itself, or its
/// smallest power not above 1/2 so that the probed `j` span several octaves.
pub fn gate_base(b: f64) -> f64 {
    let mut base = b;
    while base > 0.5 {
        base *= b;
    }
    base
}

/// Gate shared by the inequality scenarios: the near-origin relation and
/// the condition checks for `(phi, psi, Theta)`.
fn gate(cfg: &ExperimentConfig, phi: &KernelSpec, psi: &KernelSpec) -> Result<Option<(ConstantsReport, f64)>> {
    if !cfg.check_conditions {
        return Ok(None);
    }
    let n = cfg.dimension();
    let part = partition_for(phi, n, gate_base(cfg.b))?;
    let theta = cfg.theta().build();
    let residual = decomposition_residual(&part, psi, &theta, cfg.big_a)?;
    let g = cfg.constants_grid.unwrap_or_else(|| default_constants_grid(n));
    let rep = check_conditions(&part, phi, psi, &theta, cfg.big_a, cfg.n_exp, &g, CONDITION_J_MAX)
        .map_err(|e| anyhow!("config error: condition checks could not run: {e}"))?;
    if !rep.all_pass() {
        let failed: Vec<&String> = rep
            .condition_verdicts
            .iter()
            .filter(|(_, v)| !v.pass)
            .map(|(k, _)| k)
            .collect();
        bail!("config error: condition checks failed: {failed:?}");
    }
    Ok(Some((rep, residual)))
}

fn attach_gate(report: &mut Report, gate: Option<(ConstantsReport, f64)>) {
    if let Some((rep, residual)) = gate {
        report
            .diagnostics
            .push(Diagnostic::info("decomposition_residual", "psi", residual));
        report.conditions = Some(rep);
    }
}

fn grand_max_config(cfg: &ExperimentConfig) -> Result<GrandMaxConfig> {
    let scales = match &cfg.max_scales {
        Some(s) => s.build()?,
        None => GrandMaxConfig::default_for(&cfg.grid).scales().clone(),
    };
    Ok(GrandMaxConfig::new(cfg.mollifier.build()?, scales)?)
}

/// Both sides for one sampled function, plus an optional per-function error
/// compared against the scenario tolerance.
#[derive(Debug, Clone, Copy)]
struct Measured {
    lhs: f64,
    rhs: f64,
    check: Option<f64>,
}

impl Measured {
    fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

struct Evaluated {
    member: Member,
    /// One entry per translate, the first being the reported one.
    results: Vec<Measured>,
}

fn evaluate_family<F>(cfg: &ExperimentConfig, measure: F) -> Result<Vec<Evaluated>>
where
    F: Fn(&SampledField) -> Result<Measured> + Sync,
{
    let shifts = translates(&cfg.test_family);
    members(&cfg.test_family, cfg.dimension())
        .par_iter()
        .map(|(member, profile)| {
            let results = shifts
                .iter()
                .map(|&t| measure(&profile.sample(&cfg.grid, member.lambda, t)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Evaluated {
                member: *member,
                results,
            })
        })
        .collect()
}

fn subject(m: &Member) -> String {
    format!("{}@{}", m.shape.label(), m.lambda)
}

/// Rows, spread, dilation and translation diagnostics, and the ratio-vs-lambda plot.
fn family_report(
    cfg: &ExperimentConfig,
    evals: &[Evaluated],
    translation_exact: bool,
    check: Option<(&str, f64)>,
) -> Report {
    let rows: Vec<Row> = evals
        .iter()
        .map(|e| Row {
            fname: e.member.shape.label().to_string(),
            lambda: e.member.lambda,
            lhs: e.results[0].lhs,
            rhs: e.results[0].rhs,
            ratio: e.results[0].ratio(),
        })
        .collect();
    let mut report = Report::new(cfg, rows);
    if let Some(spread) = report.spread {
        report
            .diagnostics
            .push(Diagnostic::bounded("spread", "family", spread, cfg.spread_bound));
    }

    let mut plot = Vec::new();
    for &shape in &cfg.test_family.shapes {
        let of_shape: Vec<&Evaluated> = evals.iter().filter(|e| e.member.shape == shape).collect();
        let Some(reference) = of_shape
            .iter()
            .min_by(|a, b| a.member.lambda.ln().abs().total_cmp(&b.member.lambda.ln().abs()))
        else {
            continue;
        };
        let r0 = reference.results[0].ratio();
        let mut worst: f64 = 0.0;
        for e in &of_shape {
            let rel = e.results[0].ratio() / r0;
            worst = worst.max((rel - 1.0).abs());
            plot.push(vec![
                shape.label().to_string(),
                e.member.lambda.to_string(),
                e.results[0].ratio().to_string(),
                rel.to_string(),
            ]);
        }
        report
            .diagnostics
            .push(Diagnostic::bounded("dilation", shape.label(), worst, cfg.dilation_tolerance));
    }

    if evals.iter().any(|e| e.results.len() > 1) {
        let worst = evals
            .iter()
            .flat_map(|e| {
                let r0 = e.results[0].ratio();
                e.results[1..].iter().map(move |m| (m.ratio() / r0 - 1.0).abs())
            })
            .fold(0.0, f64::max);
        report.diagnostics.push(if translation_exact {
            Diagnostic::bounded("translation", "family", worst, TRANSLATION_TOL)
        } else {
            Diagnostic::info("translation", "family", worst)
        });
    }

    if let Some((name, tol)) = check {
        for e in evals {
            if let Some(v) = e.results[0].check {
                report.diagnostics.push(Diagnostic::bounded(name, &subject(&e.member), v, tol));
            }
        }
    }

    report.plots.push(PlotTable {
        name: "ratio_vs_lambda".into(),
        header: ["fname", "lambda", "ratio", "relative"].map(String::from).to_vec(),
        rows: plot,
    });
    report
}

/// `m(xi) = int_0^inf |k^(t xi)|^2 dt/t`, which depends on the direction of `xi` only.
struct DirectionalMultiplier {
    dimension: usize,
    table: Vec<f64>,
}

impl DirectionalMultiplier {
    fn new(k: &KernelSpec, dimension: usize) -> Self {
        let table = if dimension == 1 {
            vec![directional_energy(k, &[1.0]), directional_energy(k, &[-1.0])]
        } else {
            (0..ORACLE_ANGLES)
                .into_par_iter()
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / ORACLE_ANGLES as f64;
                    directional_energy(k, &[a.cos(), a.sin()])
                })
                .collect()
        };
        DirectionalMultiplier { dimension, table }
    }

    fn at(&self, xi: &[f64]) -> f64 {
        if xi.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        if self.dimension == 1 {
            return if xi[0] > 0.0 { self.table[0] } else { self.table[1] };
        }
        let a = xi[1].atan2(xi[0]).rem_euclid(2.0 * PI);
        let i = (a / (2.0 * PI) * ORACLE_ANGLES as f64).round() as usize % ORACLE_ANGLES;
        self.table[i]
    }
}

fn square_function_comparison(cfg: &ExperimentConfig) -> Result<Report> {
    let phi = cfg.phi.build()?;
    let psi = cfg
        .psi
        .as_ref()
        .ok_or_else(|| anyhow!("config error: scenario needs a psi kernel"))?
        .build()?;
    let gate = gate(cfg, &phi, &psi)?;
    let scales = cfg.scales.build()?;
    let weight = Weight::from(cfg.weight);
    let ap_index = admissible_weight(cfg)?;
    let w = weight.samples(&cfg.grid)?;
    let constant_weight = matches!(cfg.weight, WeightSpec::Constant { .. });
    let oracle = (cfg.scenario == Scenario::Thm210 && cfg.p == 2.0 && cfg.q == 2.0 && constant_weight).then(|| {
        (
            DirectionalMultiplier::new(&psi, cfg.dimension()),
            DirectionalMultiplier::new(&phi, cfg.dimension()),
        )
    });
    let evals = evaluate_family(cfg, |f| {
        let lhs = weighted_lp_norm(&g_function(f, &psi, &scales, cfg.q)?, &w, cfg.p)?;
        let rhs = weighted_lp_norm(&g_function(f, &phi, &scales, cfg.q)?, &w, cfg.p)?;
        let check = oracle.as_ref().map(|(m_psi, m_phi)| {
            let spec = PreparedSpectrum::new(f);
            let predicted = (spec.weighted_energy(|xi| m_psi.at(xi)) / spec.weighted_energy(|xi| m_phi.at(xi))).sqrt();
            (lhs / rhs / predicted - 1.0).abs()
        });
        Ok(Measured { lhs, rhs, check })
    })?;
    let check = oracle.is_some().then(|| ("oracle_error", cfg.tolerance.unwrap_or(0.02)));
    let mut report = family_report(cfg, &evals, constant_weight, check);
    let h = cfg.grid.spacing();
    let radii: Vec<f64> = (0..)
        .map(|k| h * 4f64.powi(k))
        .take_while(|&r| r <= 0.5 * cfg.grid.half_extent())
        .collect();
    let ap = ap_characteristic(&weight, &cfg.grid, ap_index, &radii)?;
    report
        .diagnostics
        .push(Diagnostic::info("ap_characteristic", &format!("A_{ap_index}"), ap.value));
    attach_gate(&mut report, gate);
    Ok(report.finish())
}

/// The weight class required for the weighted inequality is `A_s` with
/// `s = p N / n`; a power weight `|x|^a` lies in it iff `-n < a < n (s - 1)`.
fn admissible_weight(cfg: &ExperimentConfig) -> Result<f64> {
    let n = cfg.dimension() as f64;
    let s = cfg.p * cfg.n_exp / n;
    if s <= 1.0 {
        bail!("config error: p N / n = {s} must exceed 1");
    }
    match cfg.weight {
        WeightSpec::Power { a } if !(a > -n && a < n * (s - 1.0)) => {
            bail!("config error: |x|^{a} is not in A_{s}; need {} < a < {}", -n, n * (s - 1.0))
        }
        WeightSpec::Constant { c } if !(c > 0.0) => bail!("config error: constant weight must be positive"),
        _ => Ok(s),
    }
}

fn hardy_comparison(cfg: &ExperimentConfig) -> Result<Report> {
    let phi = cfg.phi.build()?;
    let psi = match &cfg.psi {
        Some(k) => k.build()?,
        None => phi.clone(),
    };
    let gate = gate(cfg, &phi, &psi)?;
    let scales = cfg.scales.build()?;
    let gm = grand_max_config(cfg)?;
    let evals = evaluate_family(cfg, |f| {
        Ok(Measured {
            lhs: lp_norm(&grand_max(f, &gm), cfg.p)?,
            rhs: lp_norm(&g_function(f, &phi, &scales, cfg.q)?, cfg.p)?,
            check: None,
        })
    })?;
    let mut report = family_report(cfg, &evals, true, None);
    attach_gate(&mut report, gate);
    Ok(report.finish())
}

/// `j` with `t_min <= b^j <= t_max`.
pub fn discrete_range(b: f64, scales: &ScaleGrid) -> (i64, i64) {
    let lb = b.ln();
    let j0 = (scales.t_max().ln() / lb - 1e-9).ceil() as i64;
    let j1 = (scales.t_min().ln() / lb + 1e-9).floor() as i64;
    (j0, j1)
}

fn discrete_comparison(cfg: &ExperimentConfig) -> Result<Report> {
    let phi = cfg.phi.build()?;
    let psi = match &cfg.psi {
        Some(k) => k.build()?,
        None => phi.clone(),
    };
    let gate = gate(cfg, &phi, &psi)?;
    let scales = cfg.scales.build()?;
    let range = discrete_range(cfg.b, &scales);
    if range.1 < range.0 {
        bail!("config error: no b^j inside the scale range");
    }
    let norm = (1.0 / cfg.b).ln().powf(1.0 / cfg.q);
    let evals = evaluate_family(cfg, |f| {
        let gd: Vec<f64> = g_discrete(f, &psi, cfg.b, range, cfg.q)?
            .real_parts()
            .into_iter()
            .map(|v| v * norm)
            .collect();
        let gc = g_function(f, &psi, &scales, cfg.q)?.real_parts();
        let diff: f64 = gd.iter().zip(&gc).map(|(a, b)| (a - b).powi(2)).sum();
        let base: f64 = gc.iter().map(|b| b * b).sum();
        let gd = SampledField::from_real(cfg.grid, &gd)?;
        let gc = SampledField::from_real(cfg.grid, &gc)?;
        Ok(Measured {
            lhs: lp_norm(&gd, cfg.p)?,
            rhs: lp_norm(&gc, cfg.p)?,
            check: Some((diff / base).sqrt()),
        })
    })?;
    let check = Some(("riemann_error", cfg.tolerance.unwrap_or(0.02)));
    let mut report = family_report(cfg, &evals, true, check);
    attach_gate(&mut report, gate);
    Ok(report.finish())
}

/// Seeded cube inside the middle half of the box: side in `[1, 3]`.
fn seeded_cube(g: &Grid, seed: u64) -> Cube {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = rng.gen_range(1.0..3.0);
    let reach = 0.25 * g.half_extent();
    let mut center = [0.0; 2];
    for c in center.iter_mut().take(g.dimension()) {
        *c = rng.gen_range(-reach..reach);
    }
    Cube { center, side }
}

fn atom_uniformity(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.dimension();
    let base = match &cfg.psi {
        Some(k) => k.build()?,
        None => KernelSpec::annulus_bump(),
    };
    let psi = calderon_normalized(&base, n)?;
    let scales = cfg.scales.build()?;
    let epsilons = cfg.epsilons.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]);
    let smallest = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > 0.0 && smallest < 1.0) {
        bail!("config error: epsilons must lie in (0, 1)");
    }
    if scales.t_min() > smallest || scales.t_max() < 1.0 / smallest {
        bail!(
            "config error: scales [{}, {}] do not cover [{smallest}, {}]",
            scales.t_min(),
            scales.t_max(),
            1.0 / smallest
        );
    }
    let gm = grand_max_config(cfg)?;
    let count = cfg.count.unwrap_or(20);
    let seed = cfg.test_family.seed;
    let per_atom = (0..count)
        .into_par_iter()
        .map(|k| {
            let s = seed.wrapping_add(k as u64);
            let atom = make_atom(&cfg.grid, &scales, seeded_cube(&cfg.grid, s), cfg.p, s)?;
            let verdict = validate_atom(&atom)?;
            let norms = epsilons
                .iter()
                .map(|&e| Ok(lp_norm(&grand_max(&synthesize(&atom.values, &psi, e)?, &gm), cfg.p)?))
                .collect::<Result<Vec<f64>>>()?;
            Ok((verdict, norms))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (k, (_, norms)) in per_atom.iter().enumerate() {
        let hi = norms.iter().copied().fold(0.0, f64::max);
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(Row {
            fname: format!("atom{k:02}"),
            lambda: 1.0,
            lhs: hi,
            rhs: lo,
            ratio: hi / lo,
        });
        for (e, v) in epsilons.iter().zip(norms) {
            table.push(vec![format!("atom{k:02}"), e.to_string(), v.to_string()]);
        }
    }
    let mut report = Report::new(cfg, rows);
    let tol = cfg.tolerance.unwrap_or(1.5);
    for (k, (verdict, _)) in per_atom.iter().enumerate() {
        let name = format!("atom{k:02}");
        let d = &mut report.diagnostics;
        d.push(Diagnostic::bounded("epsilon_spread", &name, report.rows[k].ratio, tol));
        d.push(Diagnostic::bounded("support_residual", &name, verdict.support_residual, 1e-14));
        d.push(Diagnostic::bounded("size_ratio", &name, verdict.size_ratio, 1.0 + 1e-12));
        d.push(Diagnostic::bounded("moment_residual", &name, verdict.moment_residual, 1e-10));
    }
    let across = per_atom
        .iter()
        .flat_map(|(_, n)| n.iter().copied())
        .fold(0.0, f64::max);
    report.diagnostics.push(Diagnostic {
        pass: across.is_finite(),
        ..Diagnostic::info("across_atom_max", "atoms", across)
    });
    report.plots.push(PlotTable {
        name: "atom_norms".into(),
        header: ["atom", "epsilon", "norm"].map(String::from).to_vec(),
        rows: table,
    });
    Ok(report.finish())
}

/// `C(psi, j, L)` for `j = 0..=j_max`, stopping at the first scale whose
/// profile leaves the box.
pub fn constant_sequence(p: &PartitionSystem, psi: &KernelSpec, l: f64, g: &Grid, j_max: i64) -> Result<Vec<(i64, f64)>> {
    let mut out = Vec::new();
    for j in 0..=j_max {
        match c_const(p, psi, j, l, g) {
            Ok(est) => out.push((j, est.value)),
            Err(LabError::BoundaryTail { .. }) if j > 0 => break,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

fn constants_audit(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.dimension();
    let phi = cfg.phi.build()?;
    let part = partition_for(&phi, n, cfg.b)?;
    let kernels = match &cfg.psi {
        Some(k) => vec![k.build()?],
        None => [1.0, 2.0, 3.0]
            .iter()
            .map(|&tau| KernelSpec::poisson_power_derivative(tau))
            .collect::<lplab_core::Result<Vec<_>>>()?,
    };
    let mut jobs = Vec::new();
    for k in &kernels {
        let tau = k
            .claimed_decay()
            .ok_or_else(|| anyhow!("config error: kernel {} claims no decay class", k.name()))?
            .tau;
        for l in [0.0, cfg.n_exp] {
            jobs.push((k, tau, l));
        }
    }
    let g = cfg.constants_grid.unwrap_or(cfg.grid);
    let j_max = cfg.count.unwrap_or(20) as i64;
    let sequences = jobs
        .par_iter()
        .map(|&(k, _, l)| constant_sequence(&part, k, l, &g, j_max))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (&(k, tau, l), seq) in jobs.iter().zip(&sequences) {
        let js: Vec<i64> = seq.iter().map(|s| s.0).collect();
        let vs: Vec<f64> = seq.iter().map(|s| s.1).collect();
        let fit = fit_scale_exponent(part.b(), &js, &vs).unwrap_or(f64::NAN);
        rows.push(Row {
            fname: k.name().to_string(),
            lambda: l,
            lhs: fit,
            rhs: tau,
            ratio: fit / tau,
        });
        for &(j, v) in seq {
            table.push(vec![k.name().to_string(), l.to_string(), j.to_string(), v.to_string()]);
        }
    }
    let mut report = Report::new(cfg, rows);
    let tol = cfg.tolerance.unwrap_or(0.15);
    for r in &report.rows.clone() {
        let subject = format!("{} L={}", r.fname, r.lambda);
        report
            .diagnostics
            .push(Diagnostic::bounded("decay_slope_error", &subject, (r.ratio - 1.0).abs(), tol));
    }
    if cfg.check_conditions {
        let theta = KernelSpec::constant_multiplier(1.0);
        let rep = check_conditions(&part, &phi, &phi, &theta, cfg.big_a, cfg.n_exp, &g, CONDITION_J_MAX)?;
        for (key, v) in &rep.condition_verdicts {
            report.diagnostics.push(Diagnostic {
                pass: v.pass,
                ..Diagnostic::info(key, "phi", v.measured)
            });
        }
        report.conditions = Some(rep);
    }
    report.plots.push(PlotTable {
        name: "constant_decay".into(),
        header: ["kernel", "L", "j", "value"].map(String::from).to_vec(),
        rows: table,
    });
    Ok(report.finish())
}
