use std::io::Write;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use spectral_atlas::ak::{decompose_cofactor, AKDecomposition, LowRankProblem};
use spectral_atlas::continuum::{continuum_envelope, quadrant_sign_check, BranchKind, ContinuumSpec};
use spectral_atlas::curves::{
    constant_eigenvalue_curve, envelope, hopf_curve, standard_curves, triple_candidates, write_curves_csv,
    AtlasSampling, CandidateStatus,
};
use spectral_atlas::integrator::{
    constant_tau_rho1, gain, gains_along_curve, impulse_response, measured_gain, Preset, DEFAULT_MARGIN,
};
use spectral_atlas::io::{read_decomposition, read_problem, verify, DecompositionFile};
use spectral_atlas::phase::{example1_letter, phase_grid, Window};
use spectral_atlas::rs::{lambda1, trace_family, CubicFront, Ends, FamilyPoint};
use spectral_atlas::Error;

use crate::args::*;

fn preset(p: PresetName) -> Preset {
    match p {
        PresetName::Example1 => Preset::Example1,
        PresetName::AgNormal => Preset::AgNormal,
        PresetName::AgIn => Preset::AgIn,
    }
}

fn problem(src: &Source) -> Result<LowRankProblem> {
    if let Some(p) = src.preset {
        return Ok(preset(p).problem()?);
    }
    if let Some(path) = &src.spec {
        return read_problem(path).with_context(|| format!("reading {}", path.display()));
    }
    let why = if src.decomposition.is_some() {
        "this command needs the matrix, not only a decomposition"
    } else {
        "no input"
    };
    Err(Error::Invalid(format!("{why}; pass --preset or --spec")).into())
}

fn decomposition(src: &Source) -> Result<AKDecomposition> {
    match &src.decomposition {
        Some(path) => read_decomposition(path).with_context(|| format!("reading {}", path.display())),
        None => Ok(decompose_cofactor(&problem(src)?)?),
    }
}

fn json_out(v: &Value, out: &mut Vec<u8>) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    out.push(b'\n');
    Ok(())
}

pub fn run(cli: &Cli, out: &mut Vec<u8>) -> Result<()> {
    let src = &cli.source;
    match &cli.command {
        Command::Decompose => {
            let p = problem(src)?;
            let d = decompose_cofactor(&p)?;
            let report = json!({
                "n": p.n(),
                "rank_one": p.is_rank_one(),
                "coefficient_order": "ascending powers of lambda",
                "decomposition": DecompositionFile::from(&d),
                "p2_zero": d.p2.is_zero(),
                "q_zero": d.is_q_zero(),
                "verification": verify(&p, &d)?,
            });
            json_out(&report, out)?;
        }
        Command::Curve { lambda, rho2_range } => {
            let d = decomposition(src)?;
            let c = constant_eigenvalue_curve(&d, *lambda, &rho2_range.samples())?;
            write_curves_csv(&[c], out)?;
        }
        Command::Envelope { lambda_range } => {
            let d = decomposition(src)?;
            write_curves_csv(&envelope(&d, &lambda_range.samples()), out)?;
        }
        Command::Hopf { omega_range } => {
            let d = decomposition(src)?;
            write_curves_csv(&hopf_curve(&d, &omega_range.samples())?, out)?;
        }
        Command::Triples { lambda_interval } => {
            let d = decomposition(src)?;
            let cands = triple_candidates(&d, lambda_interval.0, lambda_interval.1)?;
            let points: Vec<_> = cands
                .iter()
                .filter_map(|c| match &c.status {
                    CandidateStatus::Accepted(p) => Some(p.clone()),
                    _ => None,
                })
                .flatten()
                .collect();
            json_out(&json!({ "points": points, "candidates": cands }), out)?;
        }
        Command::Phase { window, grid, format, tol, lambda_range } => {
            let p = problem(src)?;
            let [a, b, c, e] = window.0;
            let win = Window { rho1_min: a, rho1_max: b, rho2_min: c, rho2_max: e };
            let n = *grid as usize;
            let g = phase_grid(&p, win, n, n, *tol)?;
            match format {
                Format::Csv => g.write_csv(out)?,
                Format::Json => {
                    let example = src.preset == Some(PresetName::Example1);
                    let counts: Vec<Value> = g
                        .census_counts()
                        .into_iter()
                        .map(|((r, h), k)| {
                            let letter =
                                if example { example1_letter((r, h)).map(String::from) } else { None };
                            json!({ "n_real": r, "n_rhp": h, "count": k, "region": letter })
                        })
                        .collect();
                    json_out(&json!({ "counts": counts, "grid": g }), out)?;
                }
                Format::Svg => {
                    let d = decompose_cofactor(&p)?;
                    let s = AtlasSampling {
                        lambda: (lambda_range.a, lambda_range.b),
                        omega_max: 4.0 * a.abs().max(b.abs()).max(c.abs()).max(e.abs()).max(1.0),
                        rho: (a.min(c), b.max(e)),
                        samples: lambda_range.n,
                    };
                    g.write_svg(&standard_curves(&d, s)?, out)?;
                }
            }
        }
        Command::Integrator { action } => integrator(src, action, out)?,
        Command::Continuum { action } => continuum(action, out)?,
        Command::Rs { action } => rs(action, out)?,
    }
    Ok(())
}

fn network(src: &Source) -> Result<(LowRankProblem, Vec<f64>)> {
    let spec = src.preset.and_then(|p| preset(p).spec()).ok_or_else(|| {
        Error::Invalid("integrator commands need --preset ag_normal or --preset ag_in".into())
    })?;
    let p = spectral_atlas::integrator::build_network(&spec)?;
    Ok((p, spec.b))
}

fn operating_point(p: &LowRankProblem, op: &OperatingArgs, rho2: f64) -> Result<f64> {
    match op.rho1 {
        Some(r) => Ok(r),
        None => Ok(constant_tau_rho1(&decompose_cofactor(p)?, op.lambda, rho2)?),
    }
}

fn integrator(src: &Source, action: &IntegratorCmd, out: &mut Vec<u8>) -> Result<()> {
    let (p, b) = network(src)?;
    match action {
        IntegratorCmd::Gain { rho2, op, sim } => {
            let r1 = operating_point(&p, op, *rho2)?;
            let g = gain(&p, r1, *rho2, &b, DEFAULT_MARGIN)?;
            let series = impulse_response(&p, r1, *rho2, &b, sim.t_end, sim.dt)?;
            let report = json!({
                "rho1": r1,
                "rho2": rho2,
                "lambda": op.lambda,
                "gamma_predicted": g.gamma_predicted.value(),
                "gamma_measured": measured_gain(&series, &b),
                "dominant_lambda": g.dominant_lambda,
                "t_end": sim.t_end,
                "dt": sim.dt,
            });
            json_out(&report, out)?;
        }
        IntegratorCmd::Impulse { rho2, op, sim } => {
            let r1 = operating_point(&p, op, *rho2)?;
            let series = impulse_response(&p, r1, *rho2, &b, sim.t_end, sim.dt)?;
            writeln!(
                out,
                "# impulse response <b, v(t)> at rho1 = {r1:.15e}, rho2 = {rho2:.15e}; t in time units"
            )?;
            writeln!(out, "t,response")?;
            for (t, v) in series {
                writeln!(out, "{t:.6e},{v:.15e}")?;
            }
        }
        IntegratorCmd::Curve { lambda, rho2_range, sim } => {
            let d = decompose_cofactor(&p)?;
            let pts = gains_along_curve(&p, &d, *lambda, &rho2_range.samples(), &b, sim.t_end, sim.dt)?;
            writeln!(out, "# parameter: rho2 along the curve lambda = {lambda} (1/time); rho1, rho2, gains dimensionless")?;
            writeln!(out, "rho1,rho2,gamma_predicted,gamma_measured")?;
            for pt in pts {
                let g = pt.gamma.map_or("inf".to_string(), |g| format!("{g:.15e}"));
                writeln!(out, "{:.15e},{:.15e},{g},{:.15e}", pt.rho1, pt.rho2, pt.measured)?;
            }
        }
    }
    Ok(())
}

fn continuum(action: &ContinuumCmd, out: &mut Vec<u8>) -> Result<()> {
    match action {
        ContinuumCmd::Envelope { model, branch, omega_range } => {
            let spec = ContinuumSpec::new(model.n, model.x1, model.x2)?;
            let kinds = match branch {
                BranchArg::Trig => vec![BranchKind::Trig],
                BranchArg::Hyper => vec![BranchKind::Hyper],
                BranchArg::Both => vec![BranchKind::Hyper, BranchKind::Trig],
            };
            let ws = omega_range.samples();
            let curves = kinds
                .into_iter()
                .map(|k| continuum_envelope(&spec, &ws, k))
                .collect::<Result<Vec<_>, _>>()?;
            write_curves_csv(&curves, out)?;
        }
        ContinuumCmd::LemmaCheck { n, grid, omega_range } => {
            let spec = ContinuumSpec::new(*n, 0.25, 0.5)?;
            let xs: Vec<f64> = (1..=*grid).map(|i| spec.l * i as f64 / (*grid + 1) as f64).collect();
            let mut failures = Vec::new();
            let mut checked = 0usize;
            for &w in &omega_range.samples() {
                for &x1 in &xs {
                    for &x2 in &xs {
                        let q = quadrant_sign_check(&spec, w, x1, x2)?;
                        checked += 1;
                        if !(q.sign_ratio < 0.0 && q.endpoints_vanish && q.interior_positive) {
                            failures
                                .push(json!({ "omega": w, "x1": x1, "x2": x2, "sign_ratio": q.sign_ratio }));
                        }
                    }
                }
            }
            let report =
                json!({ "n": n, "checked": checked, "holds": failures.is_empty(), "failures": failures });
            json_out(&report, out)?;
        }
    }
    Ok(())
}

fn rs(action: &RsCmd, out: &mut Vec<u8>) -> Result<()> {
    match action {
        RsCmd::Lambda1 { front } => {
            let f = CubicFront::new(front.k)?;
            let l1 = lambda1(front.k)?;
            let op = f.operator(front.n, Ends::Neumann)?;
            let fd = op.perturbed_eigenvalue_near(1.0, l1 + 0.01)?;
            let report = json!({ "k": front.k, "lambda1": l1, "lambda1_discrete": fd, "n": front.n });
            json_out(&report, out)?;
        }
        RsCmd::Index { front } => {
            let f = CubicFront::new(front.k)?;
            let si = f.operator(front.n, Ends::Neumann)?.stability_index()?;
            let report = json!({
                "k": front.k,
                "lambda1": lambda1(front.k)?,
                "n_plus_H": si.n_plus_h,
                "inner": si.inner,
                "n_plus_perturbed": si.n_plus_perturbed,
                "singular_h": si.singular_h,
                "simple_kernel": si.has_simple_kernel,
                "n": front.n,
            });
            json_out(&report, out)?;
        }
        RsCmd::Family { k, steps, ds } => {
            let f = CubicFront::new(*k)?;
            let nl = f.nonlinearity();
            let start = FamilyPoint::at(&nl, 0.5, 0.0, 0.0)?;
            let fam = trace_family(&nl, &start, *steps, *ds)?;
            writeln!(
                out,
                "# s arclength in (E, kappa); P length, M mass, R reaction integral; cubic front k = {k}"
            )?;
            writeln!(out, "s,E,kappa,mu_minus,mu_plus,P,M,R,tau")?;
            for q in fam {
                writeln!(
                    out,
                    "{:.6e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                    q.s, q.e, q.kappa, q.mu_minus, q.mu_plus, q.p, q.m, q.r, q.tau
                )?;
            }
        }
    }
    Ok(())
}
