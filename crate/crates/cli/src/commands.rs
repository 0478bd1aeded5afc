//! Dispatch from parsed arguments to the library.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use rhcap::beltrami::{
    regularity_audit, rh_beltrami, BeltramiCoefficient, BeltramiOptions, Lattice, MuBuiltin, QcOptions,
    DEFAULT_EXTENT,
};
use rhcap::cantor::{cantor_capacity, cantor_stage, is_zero_capacity, singular_value, CantorRule, CantorSpec};
use rhcap::capacity::{
    capacity_via_potential, density_ratio, fekete_points, is_log_thin, transfinite_diameter, CapacityEstimate,
};
use rhcap::dimension::{
    basis_spec, family_member, independence_probe, remainder_bound_check, GammaSequence,
};
use rhcap::harmonic::{
    gehring_audit, gehring_solution, hp_norm, poisson_extend, probe_limit, probe_sector, StolzProbe,
};
use rhcap::lusin::{lusin_antiderivative, Grid};
use rhcap::rh::{audit_solution, rh_solve, RhOptions};

use crate::inputs::{numbers, parse_boundary, parse_lambda, parse_lusin_phi, parse_set, LusinPhi};
use crate::output::{RunRecord, Table};
use crate::{
    BeltramiCommand, CantorCommand, CapCommand, CapMethod, Cli, Command, DimensionCommand, DirichletCommand,
    GlobalArgs, LusinCommand, RhCommand,
};

const DEFAULT_GRID: usize = 4096;
const DEFAULT_NMAX: usize = 64;

struct Outcome {
    name: &'static str,
    outputs: Value,
    tables: Vec<Table>,
}

fn outcome(name: &'static str, outputs: impl Serialize, tables: Vec<Table>) -> Result<Outcome> {
    Ok(Outcome { name, outputs: serde_json::to_value(outputs)?, tables })
}

/// Runs one command. The record does not depend on the output location or
/// the clock.
pub fn run(cli: &Cli) -> Result<RunRecord> {
    let g = &cli.global;
    let o = match &cli.command {
        Command::Cap(c) => cap(c, g)?,
        Command::Cantor(c) => cantor(c)?,
        Command::Lusin(c) => lusin(c, g)?,
        Command::Dirichlet(c) => dirichlet(c, g)?,
        Command::Rh(c) => rh(c, g)?,
        Command::Beltrami(c) => beltrami(c, g)?,
        Command::Dimension(c) => dimension(c, g)?,
        Command::Ops => outcome("ops", ops_table(), Vec::new())?,
    };
    Ok(RunRecord {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        name: o.name.to_string(),
        config: serde_json::to_value(cli)?,
        outputs: o.outputs,
        tables: o.tables.iter().map(|t| t.name.clone()).collect(),
        csv: o.tables,
    })
}

fn grid_size(g: &GlobalArgs) -> Result<usize> {
    let m = g.grid.unwrap_or(DEFAULT_GRID);
    if m < 4 || !m.is_power_of_two() {
        bail!("--grid must be a power of two >= 4, got {m}");
    }
    Ok(m)
}

fn cap(c: &CapCommand, g: &GlobalArgs) -> Result<Outcome> {
    let nmax = g.nmax.unwrap_or(DEFAULT_NMAX);
    match c {
        CapCommand::Estimate { set, method, nodes } => {
            let s = parse_set(set)?;
            let est: CapacityEstimate = match method {
                CapMethod::Transfinite => transfinite_diameter(&s, nmax)?,
                CapMethod::Potential => capacity_via_potential(&s, *nodes)?,
            };
            let rows = est.n_sequence.iter().zip(&est.diameter_sequence).map(|(&n, &d)| vec![n as f64, d]).collect();
            outcome("cap_estimate", &est, vec![Table::new("diameters", &["n", "diameter"], rows)])
        }
        CapCommand::Density { set, x0, eps } => {
            outcome("cap_density", density_ratio(&parse_set(set)?, *x0, *eps, nmax)?, Vec::new())
        }
        CapCommand::Thin { set, theta0, deltas } => {
            let rep = is_log_thin(&parse_set(set)?, *theta0, &numbers(deltas)?, nmax)?;
            let rows = (0..rep.deltas.len()).map(|k| vec![rep.deltas[k], rep.capacities[k], rep.terms[k]]).collect();
            outcome("cap_thin", &rep, vec![Table::new("terms", &["delta", "capacity", "term"], rows)])
        }
        CapCommand::Fekete { set, n } => {
            let res = fekete_points(&parse_set(set)?, *n)?;
            let rows = res.points.iter().zip(&res.params).map(|(z, &t)| vec![t, z.re, z.im]).collect();
            outcome("cap_fekete", &res, vec![Table::new("points", &["param", "re", "im"], rows)])
        }
    }
}

fn cantor(c: &CantorCommand) -> Result<Outcome> {
    let CantorCommand::Build { pk, depth, stage, samples, capacity_gens } = c;
    let rule: CantorRule = pk.parse()?;
    let spec = CantorSpec::new(rule, *depth)?;
    if *stage > 12 || *stage > *depth {
        bail!("--stage must be at most 12 and at most --depth");
    }
    if *samples < 2 {
        bail!("--samples must be at least 2");
    }
    let series = is_zero_capacity(&spec, *depth)?;
    let st = cantor_stage(&spec, *stage)?;
    let psi: Vec<Vec<f64>> = (0..*samples)
        .map(|j| {
            let (l, r) = (j as f64 / (samples - 1) as f64, (samples - 1 - j) as f64 / (samples - 1) as f64);
            vec![l, singular_value(&spec, l, r)]
        })
        .collect();
    let capacities = (1..=*capacity_gens)
        .map(|n| cantor_capacity(&spec, n, 12))
        .collect::<rhcap::Result<Vec<_>>>()?;
    let interval_rows = st.intervals.iter().map(|&(a, b)| vec![a, b]).collect();
    outcome(
        "cantor_build",
        json!({
            "spec": spec,
            "zero_capacity": series,
            "stage": st.n,
            "stage_total_length": st.total_length(),
            "intervals": st.intervals,
            "capacities": capacities,
        }),
        vec![Table::new("intervals", &["a", "b"], interval_rows), Table::new("psi", &["x", "psi"], psi)],
    )
}

fn lusin(c: &LusinCommand, g: &GlobalArgs) -> Result<Outcome> {
    let LusinCommand::Run { phi, eps, stages, a, b, cells } = c;
    let tol = g.tol.unwrap_or(0.1);
    let (grid, samples) = match parse_lusin_phi(phi)? {
        LusinPhi::Builtin(src) => {
            let grid = Grid::new(*a, *b, cells.unwrap_or(DEFAULT_GRID))?;
            (grid, src.sample(&grid))
        }
        LusinPhi::Table(v) => (Grid::new(*a, *b, v.len())?, v),
    };
    let res = lusin_antiderivative(&grid, &samples, *eps, *stages)?;
    let audits = (1..=res.stages.len())
        .map(|n| res.quotient_audit(n, tol))
        .collect::<rhcap::Result<Vec<_>>>()?;
    let capacity: Vec<_> = res.stages.iter().map(|s| json!({"n": s.n, "capacity": s.capacity})).collect();
    let q: Vec<_> = res.stages.iter().map(|s| json!({"n": s.n, "pieces": s.q.pieces(), "sup_g": s.sup_g})).collect();
    let rows = (0..=grid.cells).map(|i| vec![grid.node(i), res.phi[i]]).collect();
    outcome(
        "lusin_run",
        json!({
            "grid": grid,
            "eps": eps,
            "sup_norm": res.sup_norm(),
            "end_values": [res.phi[0], res.phi[grid.cells]],
            "stages": q,
            "capacity_audit": capacity,
            "quotient_audit": audits,
        }),
        vec![Table::new("phi", &["x", "phi"], rows)],
    )
}

fn dirichlet(c: &DirichletCommand, g: &GlobalArgs) -> Result<Outcome> {
    let m = grid_size(g)?;
    match c {
        DirichletCommand::Solve { phi, probe, radii } => {
            let f = parse_boundary(phi, m)?;
            let u = poisson_extend(&f);
            let (theta, aperture) = match numbers(probe)?.as_slice() {
                [t, a] => (*t, *a),
                _ => bail!("--probe expects theta,aperture"),
            };
            let radial = probe_limit(&u, &StolzProbe::for_order(u.order(), theta, aperture, 0.0)?)?;
            let sector = probe_sector(&u, theta, aperture, &[-0.5, 0.0, 0.5])?;
            let radii = numbers(radii)?;
            let hp = json!({
                "radii": radii,
                "p1": hp_norm(&u, 1.0, &radii)?,
                "p2": hp_norm(&u, 2.0, &radii)?,
            });
            let rows = u.coeffs().iter().enumerate().map(|(k, c)| vec![k as f64 - u.order() as f64, c.re, c.im]).collect();
            outcome(
                "dirichlet_solve",
                json!({
                    "order": u.order(),
                    "target": f.nearest(theta),
                    "probe": radial,
                    "sector": sector,
                    "hp_norms": hp,
                }),
                vec![Table::new("coefficients", &["n", "re", "im"], rows)],
            )
        }
        DirichletCommand::Gehring { phi, eps, stages } => {
            let tol = g.tol.unwrap_or(1e-2);
            let f = parse_boundary(phi, m)?;
            let sol = gehring_solution(&f, *eps, *stages)?;
            let audit = gehring_audit(&sol, 64, tol)?;
            let sup = sol.antiderivative.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let rows = (0..m).map(|j| vec![f.angle(j), sol.antiderivative.samples()[j]]).collect();
            let audit_rows = audit.entries.iter().map(|e| vec![e.theta, e.target, e.limit, e.converged as u8 as f64]).collect();
            outcome(
                "dirichlet_gehring",
                json!({
                    "antiderivative_sup": sup,
                    "capacity_audit": sol.lusin.stages.iter().map(|s| s.capacity).collect::<Vec<_>>(),
                    "singular_atoms": sol.singular.atoms.len(),
                    "limit_audit": {"tolerance": tol, "angles": audit.entries.len(), "passed": audit.passed, "pass_fraction": audit.pass_fraction},
                }),
                vec![
                    Table::new("boundary", &["theta", "antiderivative"], rows),
                    Table::new("limits", &["theta", "target", "limit", "converged"], audit_rows),
                ],
            )
        }
    }
}

fn rh(c: &RhCommand, g: &GlobalArgs) -> Result<Outcome> {
    let RhCommand::Solve { lambda, phi, stages, eps, clamp, audit } = c;
    let m = grid_size(g)?;
    let tol = g.tol.unwrap_or(1e-2);
    let lam = parse_lambda(lambda, m)?;
    let f = parse_boundary(phi, m)?;
    let mut opts = RhOptions { eps: *eps, stages: *stages, ..RhOptions::default() };
    if let Some(cl) = clamp {
        opts.clamp = *cl;
    }
    let sol = rh_solve(&lam, &f, &opts)?;
    let report = audit_solution(&sol, &lam, &f, *audit, tol, opts.jump_threshold)?;
    let n = sol.order() as f64;
    let coeff_rows = (0..sol.g.coeffs().len())
        .map(|k| {
            let (a, b) = (sol.g.coeffs()[k], sol.b.coeffs()[k]);
            vec![k as f64 - n, a.re, a.im, b.re, b.im]
        })
        .collect();
    let table_rows = (0..m)
        .map(|j| {
            vec![
                f.angle(j),
                sol.argument.alpha[j],
                sol.beta.beta[j],
                if sol.beta.converged[j] { 0.0 } else { 1.0 },
                sol.b_boundary[j],
            ]
        })
        .collect();
    outcome(
        "rh_solve",
        json!({
            "options": opts,
            "argument": {
                "jumps": sol.argument.jumps,
                "variation": sol.argument.variation,
                "winding": sol.argument.winding,
                "lambda_variation": lam.variation(),
            },
            "beta": {
                "flagged": sol.beta.flagged,
                "flagged_capacity": sol.beta.flagged_capacity,
            },
            "residual": report,
        }),
        vec![
            Table::new("coefficients", &["n", "g_re", "g_im", "b_re", "b_im"], coeff_rows),
            Table::new("boundary", &["theta", "alpha", "beta", "beta_flagged", "b_boundary"], table_rows),
        ],
    )
}

fn beltrami(c: &BeltramiCommand, g: &GlobalArgs) -> Result<Outcome> {
    let BeltramiCommand::Solve { mu, lambda, phi, lattice, qc_tol, decimate, audit, seed } = c;
    let m = grid_size(g)?;
    let builtin: MuBuiltin = mu.strip_prefix("builtin:").unwrap_or(mu).parse()?;
    let lat = Lattice::new(*lattice, DEFAULT_EXTENT)?;
    let coeff = BeltramiCoefficient::builtin(lat, builtin)?;
    let lam = parse_lambda(lambda, m)?;
    let f = parse_boundary(phi, m)?;
    let opts = BeltramiOptions {
        qc: QcOptions { tol: *qc_tol, ..QcOptions::default() },
        audit_count: *audit,
        audit_tolerance: g.tol.unwrap_or(1e-2),
        ..BeltramiOptions::default()
    };
    let sol = rh_beltrami(&coeff, &lam, &f, &opts).context("composed solve")?;
    let qc = &sol.map.qc;
    let step = (*decimate).max(1);
    let h_rows: Vec<Vec<f64>> = (0..lat.len())
        .filter(|&i| (i / lat.n) % step == 0 && (i % lat.n) % step == 0)
        .map(|i| {
            let z = lat.point(i);
            vec![z.re, z.im, qc.h[i].re, qc.h[i].im]
        })
        .collect();
    let exact_error = rhcap::beltrami::relative_l2_error(qc, |z| builtin.exact_solution(z), |z| z.norm() < 1.0);
    let corr: Vec<Vec<f64>> = sol.map.correspondence(256).into_iter().map(|(a, b)| vec![a, b]).collect();
    let regularity = regularity_audit(&sol, *seed)?;
    outcome(
        "beltrami_solve",
        json!({
            "lattice": lat,
            "k_bound": coeff.k_bound,
            "iterations": qc.increments.len(),
            "contraction": qc.contraction,
            "increments": qc.increments,
            "equation_residual": qc.equation_residual(&coeff),
            "exact_relative_l2_error": exact_error,
            "beltrami_residual": sol.beltrami,
            "boundary_audit": sol.boundary,
            "pulled_back_angles": sol.pulled_back,
            "regularity": regularity,
        }),
        vec![
            Table::new("h", &["x", "y", "h_re", "h_im"], h_rows),
            Table::new("correspondence", &["phi", "angle"], corr),
        ],
    )
}

fn dimension(c: &DimensionCommand, g: &GlobalArgs) -> Result<Outcome> {
    let DimensionCommand::Demo { gamma, m, r, tail } = c;
    let grid = grid_size(g)?;
    let spec = basis_spec();
    let gamma = GammaSequence::new(numbers(gamma)?, *tail)?;
    let radii = numbers(r)?;
    let remainder = remainder_bound_check(&gamma, &spec, *m, &radii)?;
    let member = family_member(&gamma, &spec, grid)?;
    let witnesses = (1..=gamma.gamma.len())
        .map(|n| independence_probe(&member, &spec, n))
        .collect::<rhcap::Result<Vec<_>>>()?;
    // h^2 norm of the spectral u on growing circles.
    let cap = member.u.max_radius();
    let growth: Vec<Vec<f64>> = [0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99]
        .into_iter()
        .filter(|&r| r <= cap)
        .map(|r| Ok(vec![r, hp_norm(&member.u, 2.0, &[r])?]))
        .collect::<Result<_>>()?;
    let rows = remainder.rows.iter().map(|row| vec![row.r, row.measured, row.bound]).collect();
    outcome(
        "dimension_demo",
        json!({
            "gamma": gamma,
            "partition": member.partition,
            "remainder": remainder,
            "independence": witnesses,
            "h2_growth": growth,
        }),
        vec![
            Table::new("remainder", &["r", "measured", "bound"], rows),
            Table::new("h2_growth", &["r", "h2_norm"], growth),
        ],
    )
}

#[derive(Serialize)]
struct OpEntry {
    module: &'static str,
    operation: &'static str,
    command: &'static str,
}

/// Every library operation with the command that exercises it.
fn ops_table() -> Vec<OpEntry> {
    const OPS: &[(&str, &str, &str)] = &[
        ("capacity", "transfinite_diameter", "cap estimate --method transfinite"),
        ("capacity", "fekete_points", "cap fekete"),
        ("capacity", "capacity_via_potential", "cap estimate --method potential"),
        ("capacity", "equilibrium_measure", "cap estimate --method potential"),
        ("capacity", "density_ratio", "cap density"),
        ("capacity", "is_log_thin", "cap thin"),
        ("cantor", "cantor_stage", "cantor build"),
        ("cantor", "is_zero_capacity", "cantor build"),
        ("cantor", "singular_value", "cantor build"),
        ("cantor", "cantor_capacity", "cantor build --capacity-gens"),
        ("lusin", "lusin_antiderivative", "lusin run"),
        ("lusin", "quotient_audit", "lusin run"),
        ("harmonic", "poisson_extend", "dirichlet solve"),
        ("harmonic", "probe_limit", "dirichlet solve"),
        ("harmonic", "probe_sector", "dirichlet solve"),
        ("harmonic", "hp_norm", "dirichlet solve"),
        ("harmonic", "gehring_solution", "dirichlet gehring"),
        ("harmonic", "gehring_audit", "dirichlet gehring"),
        ("harmonic", "conjugate", "rh solve"),
        ("harmonic", "analytic_completion", "rh solve"),
        ("rh", "bv_argument", "rh solve"),
        ("rh", "schwarz_analytic", "rh solve"),
        ("rh", "conjugate_boundary_data", "rh solve"),
        ("rh", "rh_solve", "rh solve"),
        ("rh", "audit_solution", "rh solve"),
        ("rh", "verify_boundary", "rh solve"),
        ("beltrami", "solve_qc", "beltrami solve"),
        ("beltrami", "distortion_quotient", "beltrami solve"),
        ("beltrami", "disk_normalize", "beltrami solve"),
        ("beltrami", "rh_beltrami", "beltrami solve"),
        ("beltrami", "regularity_audit", "beltrami solve"),
        ("beltrami", "relative_l2_error", "beltrami solve"),
        ("dimension", "basis_member", "dimension demo"),
        ("dimension", "family_member", "dimension demo"),
        ("dimension", "remainder_bound_check", "dimension demo"),
        ("dimension", "independence_probe", "dimension demo"),
        ("dimension", "rh_family", "library only (see the acceptance suite)"),
    ];
    OPS.iter().map(|&(module, operation, command)| OpEntry { module, operation, command }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn run_args(args: &[&str]) -> Result<RunRecord> {
        run(&Cli::try_parse_from(std::iter::once("rhcap").chain(args.iter().copied()))?)
    }

    #[test]
    fn capacity_of_the_unit_interval() {
        let rec = run_args(&["cap", "estimate", "--set", "interval:0,1", "--nmax", "32"]).unwrap();
        let v = rec.outputs["value"].as_f64().unwrap();
        assert!((v - 0.25).abs() < 5e-3, "{v}");
        assert_eq!(rec.tables, vec!["diameters"]);
    }

    #[test]
    fn constant_coefficient_solve_passes_everywhere() {
        let rec =
            run_args(&["rh", "solve", "--lambda", "builtin:const", "--phi", "builtin:cos", "--grid", "1024"]).unwrap();
        let res = &rec.outputs["residual"];
        assert_eq!(res["passed"], res["entries"].as_array().unwrap().len());
    }

    #[test]
    fn bad_input_names_the_problem() {
        assert!(Cli::try_parse_from(["rhcap"]).is_err());
        assert!(Cli::try_parse_from(["rhcap", "cap", "estimate", "--set", "interval:0,1", "--bogus", "1"]).is_err());
        let e = run_args(&["rh", "solve", "--lambda", "builtin:spiral", "--phi", "builtin:cos"]).unwrap_err();
        assert!(e.to_string().contains("spiral"), "{e}");
        let e = run_args(&["dirichlet", "solve", "--phi", "builtin:cos", "--grid", "100"]).unwrap_err();
        assert!(e.to_string().contains("--grid"), "{e}");
    }

    #[test]
    fn ops_cover_every_module() {
        let rec = run_args(&["ops"]).unwrap();
        let ops = rec.outputs.as_array().unwrap();
        for module in ["capacity", "cantor", "lusin", "harmonic", "rh", "beltrami", "dimension"] {
            assert!(ops.iter().any(|o| o["module"] == module));
        }
    }
}
