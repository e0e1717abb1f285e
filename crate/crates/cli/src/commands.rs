//! Subcommand pipelines. Each writes its artifacts and returns whether every
//! check passed; library errors are recorded in `report.json` before they
//! are propagated.

use std::fmt::Write as _;

use isodeform::algebra::{dist_identity, Mat, PolyMatrix, QuotMatrix, C64};
use isodeform::Error;
use isodeform::connection::{connection_from_n, local_data, random_n, ConnectionJson, SpecInput, UnfoldedConnection};
use isodeform::demo::{hypergeometric_demo, tol, DemoReport};
use isodeform::flows::{
    big_loop_monodromy, big_loop_radius, convergence_rate_check, default_delta, integrate_flow, local_monodromy,
    monodromy_invariance_check, sample_region, transport, FlowOptions, Path, SectorParams,
};
use isodeform::random::rng;
use isodeform::unfolding::{
    adjusted_report, annulus_grid, build_lifts, build_xi, curvature_check, default_gauge_order, family_json,
    gauge_diagonalize_eps0, irregular_lift_eps0, isomonodromy_direction, solve_adjusting_data, xi_report,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{error_json, Failure, OutDir};

type Outcome = Result<bool, Failure>;

fn spec_input(cfg: &RunConfig, cmd: &str) -> Result<SpecInput, Failure> {
    cfg.spec.clone().ok_or_else(|| Failure::Usage(format!("{cmd} needs a \"spec\" section in the config")))
}

fn build_connection(cfg: &RunConfig, input: &SpecInput) -> isodeform::Result<UnfoldedConnection> {
    let spec = input.build()?;
    let ring = spec.ring();
    let n = match &cfg.n {
        Some(coeffs) => {
            if coeffs.iter().any(|c| c.len() != spec.r || c.iter().any(|row| row.len() != spec.r)) {
                return Err(Error::ShapeMismatch(format!("n must be a list of {0}x{0} matrices", spec.r)));
            }
            let mats = coeffs.iter().map(|c| Mat::from_rows(c)).collect();
            QuotMatrix::from_poly(&ring, &PolyMatrix::new(spec.r, mats))
        }
        None => random_n(&ring, &spec.mu, &mut rng(cfg.seed())),
    };
    connection_from_n(&n, &spec)
}

/// Writes `report.json` from `body` plus the outcome, then returns it.
fn finish(out: &OutDir, mut body: Value, res: isodeform::Result<bool>) -> Outcome {
    let (pass, err) = match &res {
        Ok(p) => (*p, Value::Null),
        Err(e) => (false, error_json(e)),
    };
    body["pass"] = json!(pass);
    body["error"] = err;
    out.write_json("report.json", &body)?;
    res.map_err(Failure::Lib)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn validate(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let input = spec_input(cfg, "validate")?;
    let mut body = json!({ "command": "validate", "seed": cfg.seed(), "spec": input });
    let mut checks = Vec::new();
    let res = (|| {
        let spec = input.build()?;
        checks.push(json!({ "name": "spec", "lambda": spec.lambda, "pass": true }));
        let conn = build_connection(cfg, &input)?;
        let local = local_data(&conn);
        let local_pass = local.pass;
        checks.push(json!({ "name": "local_data", "report": local, "pass": local_pass }));
        let xi = xi_report(&build_xi(&conn)?);
        let xi_pass = xi.reconstruction <= tol::RECONSTRUCTION && xi.trace_residue <= tol::TRACE_RESIDUE;
        checks.push(json!({ "name": "xi", "report": xi, "pass": xi_pass }));
        Ok(local_pass && xi_pass)
    })();
    body["checks"] = json!(checks);
    finish(out, body, res)
}

pub fn unfold(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let input = spec_input(cfg, "unfold")?;
    let curvature_tol = cfg.tol.unwrap_or(cfg.unfold.tol);
    let order = cfg.order();
    let mut body = json!({
        "command": "unfold",
        "seed": cfg.seed(),
        "order": order,
        "curvature_tol": curvature_tol,
        "spec": input,
    });
    let res = (|| {
        let conn = build_connection(cfg, &input)?;
        body["connection"] = json!(ConnectionJson::from(&conn));
        let fam = build_xi(&conn)?;
        let xi = xi_report(&fam);
        let adj = solve_adjusting_data(&fam)?;
        let adjusted = adjusted_report(&adj);
        let mut pass = xi.reconstruction <= tol::RECONSTRUCTION
            && xi.trace_residue <= tol::TRACE_RESIDUE
            && adjusted.commutator_residual <= tol::COMMUTATOR
            && adjusted.residue <= tol::RESIDUE;
        body["xi"] = json!(xi);
        body["adjusted"] = json!(adjusted);
        body["kernel_dim"] = json!(adj.kernel_dim);
        body["family"] = json!(family_json(&adj));

        let (r, m) = (fam.r(), fam.m());
        let mut lifts_json = Vec::new();
        if conn.spec.is_irregular() {
            if m >= 2 {
                let gauge = gauge_diagonalize_eps0(&adj, cfg.order.unwrap_or_else(|| default_gauge_order(m)))?;
                for l in 0..r {
                    for j in 0..m - 1 {
                        let lift = irregular_lift_eps0(&adj, &gauge, l, j)?;
                        let ok = lift.residuals.identity <= tol::SERIES_IDENTITY
                            && lift.residuals.polar <= tol::SERIES_IDENTITY;
                        pass &= ok;
                        lifts_json.push(json!({
                            "l": l,
                            "j": j,
                            "gauge_order": gauge.order(),
                            "b_low": lift.b.low(),
                            "b": lift.b.coeffs(),
                            "residuals": lift.residuals,
                            "pass": ok,
                        }));
                    }
                }
            }
        } else {
            let lifts = build_lifts(&adj, order)?;
            for (l, row) in lifts.iter().enumerate() {
                for (j, lift) in row.iter().enumerate() {
                    let Some(lift) = lift else { continue };
                    let curv = curvature_check(lift, &annulus_grid(lift, cfg.unfold.grid_angles))?;
                    let ok = curv.h0 <= curvature_tol;
                    pass &= ok;
                    lifts_json.push(json!({
                        "l": l,
                        "j": j,
                        "order": lift.order,
                        "rho1": lift.rho1,
                        "rho2": lift.rho2,
                        "b_low": lift.b.low(),
                        "b": lift.b.coeffs(),
                        "series_agreement": lift.series_agreement,
                        "curvature": curv,
                        "pass": ok,
                    }));
                }
            }
        }
        body["lifts"] = json!(lifts_json);
        Ok(pass)
    })();
    finish(out, body, res)
}

pub fn flow(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let f = &cfg.flow;
    let m = f.m.or(cfg.spec.as_ref().map(|s| s.m)).unwrap_or(2);
    let delta = f.delta.unwrap_or_else(|| default_delta(m));
    let conv_tol = cfg.tol.unwrap_or(f.tol);
    let mut body = json!({
        "command": "flow",
        "seed": cfg.seed(),
        "m": m,
        "j": f.j,
        "psi0": f.psi0,
        "xi": f.xi,
        "delta": delta,
        "starts": f.starts,
        "tol": conv_tol,
    });
    let params = match SectorParams::new(m, f.j, f.psi0, f.xi, delta) {
        Ok(p) => p,
        Err(e) => return finish(out, body, Err(e)),
    };
    body["theta"] = json!(params.theta);
    body["eta"] = json!(params.eta);

    let mut r = rng(cfg.seed());
    let samples: Vec<_> = (0..f.starts).map(|_| sample_region(&params, &mut r, f.s_min, f.s_max, f.margin)).collect();
    let opts = FlowOptions { tol: conv_tol, ..FlowOptions::default() };
    let runs: Vec<_> = samples
        .par_iter()
        .map(|smp| {
            let field = params.field(smp.eps());
            let traj = integrate_flow(smp.z, &field, &opts);
            let rate = traj.as_ref().ok().and_then(|t| {
                (t.converged_to() == Some(params.j)).then(|| convergence_rate_check(t, &field, params.j))
            });
            (traj, rate)
        })
        .collect();

    let path = out.path("trajectories.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(["start", "t", "re", "im", "dist"]).map_err(io)?;
    let mut per_start = Vec::new();
    let (mut hits, mut rate_ok) = (0usize, 0usize);
    for (i, (smp, (traj, rate))) in samples.iter().zip(&runs).enumerate() {
        let target = params.target(smp.eps());
        let mut entry = json!({
            "start": i,
            "z0": smp.z,
            "epsilon": smp.eps(),
            "region": format!("{:?}", smp.region),
        });
        match traj {
            Ok(t) => {
                for &(time, z) in &t.samples {
                    w.write_record(&[
                        i.to_string(),
                        format!("{time:.16e}"),
                        format!("{:.16e}", z.re),
                        format!("{:.16e}", z.im),
                        format!("{:.16e}", (z - target).norm()),
                    ])
                    .map_err(io)?;
                }
                let (t_end, z_end) = t.end();
                let hit = t.converged_to() == Some(params.j) && (z_end - target).norm() <= conv_tol;
                hits += hit as usize;
                entry["status"] = json!(t.status);
                entry["t_end"] = json!(t_end);
                entry["distance"] = json!((z_end - target).norm());
                entry["converged"] = json!(hit);
            }
            Err(e) => {
                entry["error"] = error_json(e);
                entry["converged"] = json!(false);
            }
        }
        match rate {
            Some(Ok(rep)) => {
                rate_ok += rep.pass as usize;
                entry["rate"] = json!(rep);
            }
            Some(Err(e)) => entry["rate_error"] = error_json(e),
            None => {}
        }
        per_start.push(entry);
    }
    w.flush().map_err(|e| Failure::Io(e.to_string()))?;

    let fraction = hits as f64 / f.starts as f64;
    let converged_rate = runs.iter().filter(|(_, r)| r.is_some()).count();
    body["summary"] = json!({
        "converged": hits,
        "fraction": fraction,
        "required": f.min_fraction,
        "rate_checked": converged_rate,
        "rate_pass": rate_ok,
    });
    body["trajectories"] = json!(per_start);
    finish(out, body, Ok(fraction >= f.min_fraction && rate_ok == converged_rate))
}

pub fn monodromy(cfg: &RunConfig, out: &OutDir) -> Outcome {
    let input = spec_input(cfg, "monodromy")?;
    let ms = &cfg.monodromy;
    let ttol = cfg.tol.unwrap_or(ms.tol);
    let mut body = json!({ "command": "monodromy", "seed": cfg.seed(), "tol": ttol, "spec": input });
    let mut mono = json!({});
    let res = (|| {
        let conn = build_connection(cfg, &input)?;
        let (m, eps) = (conn.spec.m, conn.spec.epsilon);
        let big = big_loop_monodromy(&conn.a, m, eps, ttol)?;
        let powers = trace_powers(&big.matrix);
        mono["big_loop"] = json!({
            "radius": big_loop_radius(eps),
            "matrix": big.matrix,
            "traces": powers,
            "det": big.matrix.det(),
            "error": big.error,
        });

        // the loop followed by its reversal
        let circle = Path::circle(zero(), big_loop_radius(eps));
        let back = transport(&conn.a, m, eps, &circle.reversed(), ttol)?;
        let product = &back.matrix * &big.matrix;
        let defect = dist_identity(&product);
        let bound = (2.0 * (big.error + back.error) * big.matrix.max_abs() * back.matrix.max_abs()).max(1e-12);
        let mut pass = defect <= bound;
        mono["reversed_loop"] = json!({ "defect": defect, "bound": bound, "pass": defect <= bound });

        let mut locals = Vec::new();
        if !conn.spec.is_irregular() {
            for j in 0..m {
                let lm = local_monodromy(&conn, j, ttol)?;
                pass &= lm.deviation <= ms.local_tol;
                locals.push(lm);
            }
        }
        mono["local"] = json!(locals);

        if let Some(v) = &ms.direction {
            let adj = solve_adjusting_data(&build_xi(&conn)?)?;
            let lifts = build_lifts(&adj, cfg.order())?;
            let rep = monodromy_invariance_check(&isomonodromy_direction(&adj, &lifts, v)?, ttol, ms.trace_tol)?;
            pass &= rep.pass;
            mono["deformation"] = json!({
                "direction": v,
                "m0": rep.m0,
                "m1": rep.m1,
                "traces": rep.traces.iter().map(|(a, b)| json!({ "h0": a, "h1": b })).collect::<Vec<_>>(),
                "max_trace_h": rep.max_trace_h,
                "max_trace_h_rel": rep.max_trace_h_rel,
                "gauge_defect": rep.gauge_defect,
                "gauge_radius": rep.gauge_radius,
                "error": rep.error,
                "pass": rep.pass,
            });
        }
        Ok(pass)
    })();
    mono["pass"] = json!(*res.as_ref().unwrap_or(&false));
    out.write_json("monodromy.json", &mono)?;
    body["monodromy"] = json!("monodromy.json");
    finish(out, body, res)
}

/// `Tr(M^k)` for `k = 1..r`.
fn trace_powers(m: &Mat<C64>) -> Vec<C64> {
    let mut p = m.clone();
    let mut out = Vec::new();
    for _ in 0..m.rows() {
        out.push(p.trace());
        p = &p * m;
    }
    out
}

pub fn hypergeom_demo(cfg: &RunConfig, out: &OutDir) -> Result<(bool, String), Failure> {
    let mut demo = cfg.hypergeom_demo.clone();
    if let Some(seed) = cfg.seed {
        demo.seed = seed;
    }
    let body = json!({ "command": "hypergeom-demo", "config": demo });
    match hypergeometric_demo(&demo) {
        Ok(rep) => {
            let mut full = body;
            full["runs"] = json!(rep.runs);
            let pass = finish(out, full, Ok(rep.pass))?;
            Ok((pass, narrative(&rep)))
        }
        Err(e) => finish(out, body, Err(e)).map(|p| (p, String::new())),
    }
}

fn fmt_c(z: C64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn fmt_mat(m: &Mat<C64>) -> String {
    m.to_rows().iter().map(|row| row.iter().map(|&z| fmt_c(z)).collect::<Vec<_>>().join("  ")).collect::<Vec<_>>().join("\n      ")
}

fn narrative(rep: &DemoReport) -> String {
    let mut s = String::new();
    for run in &rep.runs {
        let _ = writeln!(s, "eps = {}", fmt_c(run.epsilon));
        for p in &run.local.points {
            let ev: Vec<String> = p.eigenvalues.iter().map(|&z| fmt_c(z)).collect();
            let _ = writeln!(s, "  exponents at {}: {}", fmt_c(p.point), ev.join(", "));
        }
        let inf: Vec<String> = run.infinity_exponents.iter().map(|&z| fmt_c(z)).collect();
        let _ = writeln!(s, "  eigenvalues of A1: {}", inf.join(", "));
        for x in run.family.iter().filter(|x| x.adjusted) {
            for (k, c) in x.xitilde.iter().enumerate() {
                let _ = writeln!(s, "  Xi~[{}][{}] z^{k}: {}", x.l, x.j, fmt_mat(&Mat::from_rows(c)));
            }
        }
        if run.epsilon == zero() {
            for (l, r) in run.irregular.iter().enumerate() {
                let _ = writeln!(s, "  series identity (l = {l}): {:.3e}, polar {:.3e}", r.identity, r.polar);
            }
        } else {
            let _ = writeln!(s, "  curvature residuals: {:?}", run.curvature.iter().map(|c| format!("{c:.3e}")).collect::<Vec<_>>());
            let _ = writeln!(s, "  local monodromy deviations: {:?}", run.local_monodromy.iter().map(|c| format!("{c:.3e}")).collect::<Vec<_>>());
        }
        let _ = writeln!(s, "  big loop: trace {}, det {}", fmt_c(run.big_loop.trace), fmt_c(run.big_loop.det));
        let _ = writeln!(s, "  h-parts of Tr(M^k): {:.3e} (relative {:.3e})", run.invariance.max_trace_h, run.invariance.max_trace_h_rel);
        for g in &run.gauge {
            let _ = writeln!(
                s,
                "  gauge l = {}: kappa {}, difference {:.3e}, conjugation {:.3e}",
                g.l,
                fmt_c(g.kappa),
                g.difference,
                g.conjugation
            );
        }
        let _ = writeln!(s, "  pass: {}", run.pass);
    }
    let _ = writeln!(s, "overall: {}", if rep.pass { "PASS" } else { "FAIL" });
    s
}
