//! One runner per subcommand. Each trial draws from its own RNG stream, so
//! the parallel map followed by an in-order reduce gives the same output for
//! any thread count.

use std::f64::consts::FRAC_PI_2;

use finsler_core::geodesic::{
    convexity_probe_with_radius, convexity_radius, random_probe_in_ball, Verdict,
};
use finsler_core::io::{format_matrix, parse_matrix, read_matrix};
use finsler_core::nilpotent::{build_context, kernel_norm_slack, spectral_asymmetry, AntiSymTangent};
use finsler_core::norms::operator_norm;
use finsler_core::orbit::{
    certify, dkw_complete, minimal_lifting, minimality_probe, quotient_solve, LiftingPipeline, OrbitTangent,
    QuotientOptions, SpectralDecomposition,
};
use finsler_core::projection::{
    assemble_with_decomposition, codiagonal_residual, conjugation_residual, direct_rotation,
};
use finsler_core::sampling::{
    gaussian_matrix, random_anti_herm, random_anti_herm_with_norm, random_herm, random_projection, random_unitary,
    trial_rng, uniform,
};
use finsler_core::{CMat, Error, FinslerNorm, HermMatrix, NormKind, UnitaryMatrix, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, RadiusPolicy, Suite};
use crate::table::{Cell, RunSummary, Status, Table};

/// Rows and summary contributions of one trial.
struct Trial {
    rows: Vec<Vec<Cell>>,
    status: Status,
    label: String,
    min: Vec<(&'static str, f64)>,
    max: Vec<(&'static str, f64)>,
}

impl Trial {
    fn new(status: Status, label: impl Into<String>) -> Self {
        Trial { rows: Vec::new(), status, label: label.into(), min: Vec::new(), max: Vec::new() }
    }

    fn error(t: usize, e: Error, width: usize) -> Self {
        let mut row = vec![Cell::from(t)];
        row.resize(width - 1, Cell::Empty);
        row.push(Cell::from(format!("error: {e}")));
        let mut trial = Trial::new(Status::Fail, "error");
        trial.rows.push(row);
        trial
    }
}

fn run_trials<F>(cfg: &ExperimentConfig, columns: &[&'static str], f: F) -> (Table, RunSummary)
where
    F: Fn(usize) -> Trial + Sync,
{
    let trials: Vec<Trial> = (0..cfg.trials).into_par_iter().map(&f).collect();
    let mut table = Table::new(columns);
    let mut summary = RunSummary::new(cfg);
    for t in trials {
        summary.record(t.status);
        summary.count(&t.label);
        for (k, v) in t.min {
            summary.worst_min(k, v);
        }
        for (k, v) in t.max {
            summary.worst_max(k, v);
        }
        for r in t.rows {
            table.push(r);
        }
    }
    (table, summary)
}

pub fn run(suite: Suite, cfg: &ExperimentConfig) -> Result<(Table, RunSummary), String> {
    match suite {
        Suite::Convexity => Ok(convexity(cfg)),
        Suite::Lifting => lifting(cfg),
        Suite::Projection => Ok(projection(cfg)),
        Suite::Nilpotent => nilpotent(cfg),
        Suite::Completion => Ok(completion(cfg)),
        Suite::IoCheck => io_check(cfg),
    }
}

fn rng_for(cfg: &ExperimentConfig, t: usize) -> ChaCha8Rng {
    trial_rng(cfg.seed, t as u64)
}

/// Ball radius for the probes and the norm it is measured in.
fn probe_ball(cfg: &ExperimentConfig) -> (f64, FinslerNorm) {
    let norm = cfg.finsler;
    if norm.kind == NormKind::Operator || norm.p == 2 {
        return (FRAC_PI_2, FinslerNorm::operator());
    }
    let r = convexity_radius(norm.p).expect("validated exponent");
    let radius = match cfg.radius_policy {
        RadiusPolicy::Paper => r.paper,
        RadiusPolicy::Conservative => r.conservative,
    };
    let ball = if norm.kind == NormKind::SchattenP { norm } else { FinslerNorm::operator() };
    (radius, ball)
}

fn convexity(cfg: &ExperimentConfig) -> (Table, RunSummary) {
    const COLUMNS: [&str; 7] = ["trial", "s", "g", "second_difference", "chain_left_slack", "chain_right_slack", "verdict"];
    let (radius, ball) = probe_ball(cfg);
    run_trials(cfg, &COLUMNS, |t| {
        let mut rng = rng_for(cfg, t);
        let Some(probe) = random_probe_in_ball(cfg.dim, radius, ball, cfg.grid, &mut rng) else {
            return Trial::new(Status::Skipped, "no_probe");
        };
        let u = UnitaryMatrix::identity(cfg.dim);
        let report = match convexity_probe_with_radius(&u, &probe, cfg.finsler, cfg.grid, radius) {
            Ok(r) => r,
            Err(Error::OutOfDomain(_)) => return Trial::new(Status::Skipped, Verdict::OutOfDomain.as_str()),
            Err(e) => return Trial::error(t, e, COLUMNS.len()),
        };
        let chain_ok = report.inequality_slacks.iter().all(|c| c.holds());
        let status = if report.verdict == Verdict::Violated || !chain_ok { Status::Fail } else { Status::Pass };
        let mut trial = Trial::new(status, report.verdict.as_str());
        trial.min.push(("min_second_difference", report.min_second_difference));
        for c in &report.inequality_slacks {
            trial.min.push(("chain_left_slack", c.left_slack()));
            trial.min.push(("chain_right_slack", c.right_slack()));
        }
        let last = report.grid.len() - 1;
        for (i, (&s, &g)) in report.grid.iter().zip(&report.g_values).enumerate() {
            let d2 = (i > 0 && i < last).then(|| report.second_differences[i - 1]);
            let chain = report.inequality_slacks.get(i);
            trial.rows.push(vec![
                t.into(),
                s.into(),
                g.into(),
                d2.into(),
                chain.map(|c| c.left_slack()).into(),
                chain.map(|c| c.right_slack()).into(),
                report.verdict.as_str().into(),
            ]);
        }
        trial
    })
}

fn pipeline_name(p: LiftingPipeline) -> &'static str {
    match p {
        LiftingPipeline::Zero => "zero",
        LiftingPipeline::Codiagonal => "codiagonal",
        LiftingPipeline::Completion => "completion",
        LiftingPipeline::General => "general",
    }
}

/// Random partition of `n` into at least two parts with distinct eigenvalues.
fn random_spectrum<R: Rng>(n: usize, rng: &mut R) -> SpectralDecomposition {
    let parts = 2 + (rng.random_range(0..3usize)).min(n - 2);
    let mut sizes = vec![1; parts];
    for _ in parts..n {
        let k = rng.random_range(0..parts);
        sizes[k] += 1;
    }
    let mut eigenvalues = Vec::with_capacity(parts);
    let mut acc = uniform(-1.0, 1.0, rng);
    for _ in 0..parts {
        eigenvalues.push(acc);
        acc += uniform(0.3, 1.5, rng);
    }
    let base = SpectralDecomposition::diagonal(&eigenvalues, &sizes).expect("valid partition");
    base.conjugated(&random_unitary(n, rng))
}

fn lifting(cfg: &ExperimentConfig) -> Result<(Table, RunSummary), String> {
    const COLUMNS: [&str; 10] = [
        "trial",
        "blocks",
        "pipeline",
        "quotient_norm",
        "lifting_norm",
        "general_norm",
        "agreement",
        "norm_slack",
        "distance_slack",
        "certified",
    ];
    let fixed = match &cfg.input {
        Some(path) => {
            let m = read_matrix(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let h = HermMatrix::new(m).map_err(|e| format!("{}: {e}", path.display()))?;
            let spec = SpectralDecomposition::from_hermitian(&h, 1e-8).map_err(|e| e.to_string())?;
            if spec.len() < 2 {
                return Err(format!("{}: the base point needs at least two eigenvalues", path.display()));
            }
            Some(spec)
        }
        None => None,
    };
    Ok(run_trials(cfg, &COLUMNS, |t| {
        let mut rng = rng_for(cfg, t);
        let spec = fixed.clone().unwrap_or_else(|| random_spectrum(cfg.dim, &mut rng));
        let n = spec.dim();
        let blocks = spec.block_sizes().iter().map(usize::to_string).collect::<Vec<_>>().join("+");
        let z = random_anti_herm_with_norm(n, uniform(0.2, 1.4, &mut rng), &mut rng);
        let outcome = (|| {
            let tangent = OrbitTangent::from_lifting(&spec, &z)?;
            let mut ml = minimal_lifting(&spec, &tangent)?;
            let general = quotient_solve(&spec, &tangent, &QuotientOptions::default())?.norm;
            let certified = certify(&spec, &mut ml, 100, &mut rng)?;
            Ok::<_, Error>((ml, general, certified))
        })();
        let (ml, general, certified) = match outcome {
            Ok(v) => v,
            Err(e) => return Trial::error(t, e, COLUMNS.len()),
        };
        let q = ml.quotient_norm;
        let lifting_norm = operator_norm(ml.z_c.as_mat());
        let agreement = (q - general).abs();
        let cert = ml.certificate.as_ref().expect("certified above");
        let ok = certified && agreement <= 1e-7 * q.max(1.0) && (lifting_norm - q).abs() <= 1e-8 * q.max(1.0);
        let pipeline = pipeline_name(ml.pipeline);
        let mut trial = Trial::new(if ok { Status::Pass } else { Status::Fail }, pipeline);
        trial.max.push(("agreement", agreement));
        trial.min.push(("norm_slack", cert.min_norm_slack));
        trial.min.push(("distance_slack", cert.min_distance_slack));
        trial.rows.push(vec![
            t.into(),
            blocks.into(),
            pipeline.into(),
            q.into(),
            lifting_norm.into(),
            general.into(),
            agreement.into(),
            cert.min_norm_slack.into(),
            cert.min_distance_slack.into(),
            certified.into(),
        ]);
        trial
    }))
}

/// Projection pair with a swap corner of dimension `k`, so `‖p₀ − p₁‖ = 1`.
fn distance_one_pair<R: Rng>(n: usize, rng: &mut R) -> (HermMatrix, HermMatrix) {
    let k = 1 + rng.random_range(0..(n / 2));
    let rest = n - 2 * k;
    let generic = rng.random_range(0..=(rest / 2));
    let h11 = rng.random_range(0..=(rest - 2 * generic));
    let mut p0 = CMat::zeros(n, n);
    let mut p1 = CMat::zeros(n, n);
    let one = C64::new(1.0, 0.0);
    let mut i = 0;
    for _ in 0..k {
        p0[(i, i)] = one;
        p1[(i + 1, i + 1)] = one;
        i += 2;
    }
    for _ in 0..generic {
        let x = uniform(0.05, FRAC_PI_2 - 0.05, rng);
        let (c, s) = (x.cos(), x.sin());
        p0[(i, i)] = one;
        p1[(i, i)] = C64::new(c * c, 0.0);
        p1[(i, i + 1)] = C64::new(c * s, 0.0);
        p1[(i + 1, i)] = C64::new(c * s, 0.0);
        p1[(i + 1, i + 1)] = C64::new(s * s, 0.0);
        i += 2;
    }
    for _ in 0..h11 {
        p0[(i, i)] = one;
        p1[(i, i)] = one;
        i += 1;
    }
    let u = random_unitary(n, rng);
    (HermMatrix::symmetrized(u.conjugate(&p0)), HermMatrix::symmetrized(u.conjugate(&p1)))
}

fn projection(cfg: &ExperimentConfig) -> (Table, RunSummary) {
    const COLUMNS: [&str; 14] = [
        "trial",
        "forced_distance_one",
        "h00",
        "h01",
        "h10",
        "h11",
        "generic",
        "distance",
        "z_norm",
        "direct_rotation_norm",
        "conjugation_residual",
        "codiagonal_residual",
        "near_orthogonal",
        "status",
    ];
    run_trials(cfg, &COLUMNS, |t| {
        let mut rng = rng_for(cfg, t);
        let n = cfg.dim;
        let forced = t % 3 == 0;
        let (p0, p1) = if forced {
            distance_one_pair(n, &mut rng)
        } else {
            let r = 1 + rng.random_range(0..n - 1);
            (random_projection(n, r, &mut rng), random_projection(n, r, &mut rng))
        };
        let (z, d) = match assemble_with_decomposition(&p0, &p1) {
            Ok(v) => v,
            Err(e) => return Trial::error(t, e, COLUMNS.len()),
        };
        let direct = match direct_rotation(&p0, &p1) {
            Ok(zd) => Some(operator_norm(zd.as_mat())),
            Err(Error::NormOne) => None,
            Err(e) => return Trial::error(t, e, COLUMNS.len()),
        };
        let z_norm = operator_norm(z.as_mat());
        let conj = conjugation_residual(&p0, &p1, &z);
        let codiag = codiagonal_residual(&p0, &z);
        let dims = d.dims();
        let swap_ok = dims[1] == 0 || (z_norm - FRAC_PI_2).abs() <= 1e-9;
        let ok = conj <= 1e-8 && codiag <= 1e-9 && z_norm <= FRAC_PI_2 + 1e-9 && swap_ok && forced == (dims[1] > 0);
        let label = if dims[1] > 0 { "assembled" } else { "direct" };
        let mut trial = Trial::new(if ok { Status::Pass } else { Status::Fail }, label);
        trial.max.push(("conjugation_residual", conj));
        trial.max.push(("codiagonal_residual", codiag));
        trial.max.push(("z_norm", z_norm));
        let mut row: Vec<Cell> = vec![t.into(), forced.into()];
        row.extend(dims.iter().map(|&k| Cell::from(k)));
        row.extend([
            operator_norm(&(p0.as_mat() - p1.as_mat())).into(),
            z_norm.into(),
            direct.into(),
            conj.into(),
            codiag.into(),
            d.near_orthogonal.into(),
            (if ok { "pass" } else { "fail" }).into(),
        ]);
        trial.rows.push(row);
        trial
    })
}

fn nilpotent(cfg: &ExperimentConfig) -> Result<(Table, RunSummary), String> {
    const COLUMNS: [&str; 7] =
        ["trial", "half_dim", "lifting_norm", "kernel_slack", "distance_slack", "spectral_asymmetry", "certified"];
    if cfg.dim % 2 != 0 {
        return Err(format!("nilpotent needs an even --dim, got {}", cfg.dim));
    }
    let n = cfg.dim / 2;
    let ctx = build_context(n).map_err(|e| e.to_string())?;
    Ok(run_trials(cfg, &COLUMNS, |t| {
        let mut rng = rng_for(cfg, t);
        let (x0, x1) = (random_anti_herm(n, &mut rng), random_anti_herm(n, &mut rng));
        let raw = operator_norm(AntiSymTangent { x0: x0.clone(), x1: x1.clone() }.minimal_lifting().as_mat());
        let c = uniform(0.2, 1.4, &mut rng) / raw.max(1e-300);
        let tangent = AntiSymTangent { x0: x0.scale(c), x1: x1.scale(c) };
        let z0 = tangent.minimal_lifting();
        let outcome = (|| {
            let slack = kernel_norm_slack(&ctx, &z0, 200, &mut rng)?;
            let cert = minimality_probe(&ctx, &z0, 50, &[], 21, &mut rng)?;
            Ok::<_, Error>((slack, cert))
        })();
        let (slack, cert) = match outcome {
            Ok(v) => v,
            Err(e) => return Trial::error(t, e, COLUMNS.len()),
        };
        let asym = spectral_asymmetry(&z0);
        let ok = slack.min_slack >= -1e-9 && asym < 1e-10 && cert.passed;
        let mut trial = Trial::new(if ok { Status::Pass } else { Status::Fail }, if ok { "certified" } else { "failed" });
        trial.min.push(("kernel_slack", slack.min_slack));
        trial.min.push(("distance_slack", cert.min_distance_slack));
        trial.max.push(("spectral_asymmetry", asym));
        trial.rows.push(vec![
            t.into(),
            n.into(),
            operator_norm(z0.as_mat()).into(),
            slack.min_slack.into(),
            cert.min_distance_slack.into(),
            asym.into(),
            cert.passed.into(),
        ]);
        trial
    }))
}

fn completion(cfg: &ExperimentConfig) -> (Table, RunSummary) {
    const COLUMNS: [&str; 7] = ["trial", "rows", "cols", "row_norm", "column_norm", "completed_norm", "gap"];
    run_trials(cfg, &COLUMNS, |t| {
        let mut rng = rng_for(cfg, t);
        let k = 1 + t % (cfg.dim - 1);
        let m = cfg.dim - k;
        let x = random_herm(k, &mut rng);
        let y = gaussian_matrix(k, m, &mut rng);
        let r = match dkw_complete(&x, &y) {
            Ok(r) => r,
            Err(e) => return Trial::error(t, e, COLUMNS.len()),
        };
        let mut row_block = CMat::zeros(k, k + m);
        row_block.view_mut((0, 0), (k, k)).copy_from(x.as_mat());
        row_block.view_mut((0, k), (k, m)).copy_from(&y);
        let row_norm = operator_norm(&row_block);
        let column_norm = operator_norm(&row_block.adjoint());
        let bound = row_norm.max(column_norm);
        let gap = r.completed_norm - bound;
        let ok = gap.abs() <= 1e-9 * bound.max(1.0);
        let mut trial = Trial::new(if ok { Status::Pass } else { Status::Fail }, if ok { "optimal" } else { "suboptimal" });
        trial.max.push(("gap", gap.abs()));
        trial.rows.push(vec![t.into(), k.into(), m.into(), row_norm.into(), column_norm.into(), r.completed_norm.into(), gap.into()]);
        trial
    })
}

fn io_check(cfg: &ExperimentConfig) -> Result<(Table, RunSummary), String> {
    let path = cfg.input.as_ref().expect("validated");
    let m = read_matrix(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let n = m.nrows();
    let id = CMat::identity(n, n);
    let fro = |a: &CMat| a.norm();
    let back = format_matrix(&m).and_then(|s| parse_matrix(&s)).map_err(|e| e.to_string())?;
    let exact = m.iter().zip(back.iter()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    let entries: Vec<(&str, Cell)> = vec![
        ("dim", n.into()),
        ("operator_norm", operator_norm(&m).into()),
        ("hermitian_residual", fro(&(&m - m.adjoint())).into()),
        ("anti_hermitian_residual", fro(&(&m + m.adjoint())).into()),
        ("unitarity_residual", fro(&(m.adjoint() * &m - &id)).into()),
        ("projection_residual", (fro(&(&m * &m - &m)) + fro(&(&m - m.adjoint()))).into()),
        ("round_trip_exact", exact.into()),
    ];
    let mut table = Table::new(&["property", "value"]);
    for (k, v) in entries {
        table.push(vec![k.into(), v]);
    }
    let mut summary = RunSummary::new(cfg);
    summary.trials = 0;
    summary.record(if exact { Status::Pass } else { Status::Fail });
    summary.count(if exact { "round_trip" } else { "mismatch" });
    Ok((table, summary))
}
