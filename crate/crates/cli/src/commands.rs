use dirac_point::approx::{converge_table, BoxSpec};
use dirac_point::kernel::{
    build_k, check_eta_pole, coupling_solution, eta_closed, k_eigenvalue, k_spectrum,
};
use dirac_point::lambda::scalar_multiple;
use dirac_point::profile::PotentialProfile;
use dirac_point::{
    check_admissible, coupling_scale, exp2, log_branches, w_matrix, AdmissibleLambda,
    BranchSelector, Error, GeneratorA, NuBranch,
};
use serde_json::{json, Value};

use crate::config::{ConvergeArgs, ConvertArgs, Direction, EtaArgs, RenormArgs, SpectrumArgs};
use crate::output::{cnum, jcomplex, jmatrix, jnum, num, pretty, Table};
use crate::parse::{self, ListArg};
use crate::CliError;

const NEAR_POLE: &str = "NEAR_POLE";

fn core(field: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| CliError::from_core(field, e)
}

fn profile_of(
    kind: &Option<String>,
    center: Option<f64>,
    width: Option<f64>,
    cutoff: Option<f64>,
) -> Result<PotentialProfile, CliError> {
    parse::profile(
        kind.as_deref().unwrap_or("indicator"),
        center.unwrap_or(0.5),
        width.unwrap_or(0.1),
        cutoff.unwrap_or(6.0),
    )
}

fn grid_size(field: &str, n: Option<usize>, default: usize) -> Result<usize, CliError> {
    let n = n.unwrap_or(default);
    if n < 2 {
        return Err(CliError::Validation(format!(
            "field `{field}`: need at least 2 cells, got {n}"
        )));
    }
    Ok(n)
}

fn reals(field: &str, list: &Option<ListArg>, default: &str) -> Result<Vec<f64>, CliError> {
    let items = list
        .clone()
        .unwrap_or(ListArg::Text(default.into()))
        .items();
    if items.is_empty() {
        return Err(CliError::Validation(format!("field `{field}`: empty list")));
    }
    items.iter().map(|s| parse::real(field, s)).collect()
}

fn generator_of(
    a: &Option<String>,
    phase: Option<f64>,
    default: &str,
) -> Result<GeneratorA, CliError> {
    match (a, phase) {
        (Some(_), Some(_)) => Err(CliError::Validation(
            "fields `a` and `phase` are mutually exclusive".into(),
        )),
        (None, Some(phi)) => Ok(GeneratorA::phase(phi)),
        (Some(text), None) => parse::generator(text),
        (None, None) => parse::generator(default),
    }
}

fn generator_json(a: &GeneratorA) -> Value {
    json!({
        "a": jcomplex(a.a),
        "b": jnum(a.b),
        "c": jnum(a.c),
        "class": a.class.name(),
        "nu_squared": jnum(a.nu.nu_squared),
    })
}

fn lambda_json(l: &AdmissibleLambda) -> Value {
    json!({
        "phi": jnum(l.phi),
        "alpha": jnum(l.alpha),
        "beta": jnum(l.beta),
        "gamma": jnum(l.gamma),
        "delta": jnum(l.delta),
        "matrix": jmatrix(&l.matrix()),
    })
}

pub fn convert(args: &ConvertArgs, seed: Option<u64>) -> Result<String, CliError> {
    let lambda_text = match (&args.lambda, args.lambda_identity) {
        (Some(_), true) => {
            return Err(CliError::Validation(
                "fields `lambda` and `lambda-identity` are mutually exclusive".into(),
            ))
        }
        (Some(t), false) => Some(t.clone()),
        (None, true) => Some("identity".into()),
        (None, false) => None,
    };
    let direction = match (args.direction, &lambda_text, &args.a) {
        (_, Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "give either a boundary matrix or a generator, not both".into(),
            ))
        }
        (Some(d), _, _) => d,
        (None, None, Some(_)) => Direction::Exp,
        (None, _, None) => Direction::Log,
    };
    let record = match direction {
        Direction::Exp => {
            let text = args.a.as_deref().ok_or_else(|| {
                CliError::Validation("field `a`: required for --direction exp".into())
            })?;
            let a = parse::generator(text)?;
            let l = exp2(&a.matrix());
            let lambda = check_admissible(&l).map_err(core("a"))?;
            json!({
                "direction": "exp",
                "generator": generator_json(&a),
                "lambda": lambda_json(&lambda),
                "residual": jnum(lambda.matrix().max_diff(&l)),
                "seed": seed,
            })
        }
        Direction::Log => {
            let text = lambda_text.ok_or_else(|| {
                CliError::Validation("field `lambda`: required for --direction log".into())
            })?;
            let l = parse::lambda(&text, args.phi.unwrap_or(0.0))?;
            let branches: Vec<i64> = match &args.branch {
                None => vec![0],
                Some(list) => list
                    .items()
                    .iter()
                    .map(|s| {
                        s.parse::<i64>().map_err(|_| {
                            CliError::Validation(format!("field `branch`: `{s}` is not an integer"))
                        })
                    })
                    .collect::<Result<_, _>>()?,
            };
            let root = args.root.unwrap_or(0);
            let m = args.m.unwrap_or(0);
            let mut results = Vec::new();
            for n in branches {
                let sel = BranchSelector::n(n)
                    .with_root(root)
                    .with_m(m, args.family_param);
                let a = log_branches(&l, sel).map_err(core("branch"))?;
                results.push(json!({
                    "n": n,
                    "root": root,
                    "m": m,
                    "family_param": args.family_param.map(jnum),
                    "generator": generator_json(&a),
                    "residual": jnum(exp2(&a.matrix()).max_diff(&l.matrix())),
                }));
            }
            json!({
                "direction": "log",
                "lambda": lambda_json(&l),
                "branches": results,
                "seed": seed,
            })
        }
    };
    Ok(pretty(&record))
}

pub fn eta(args: &EtaArgs, seed: Option<u64>) -> Result<String, CliError> {
    let prof = profile_of(&args.profile, args.center, args.width, args.cutoff)?;
    let grid = prof.midpoint_grid(grid_size("n-grid", args.n_grid, 4096)?);
    let c = prof.integral();
    let items = args
        .nu
        .clone()
        .unwrap_or(ListArg::Text("0,0.5,1,2,i".into()))
        .items();
    let mut table = Table::new(
        &["nu", "eta_numeric", "eta_closed", "abs_err", "odd_term"],
        seed,
    );
    for item in &items {
        let nu = parse::complex("nu", item)?;
        if nu.re != 0.0 && nu.im != 0.0 {
            return Err(CliError::Validation(format!(
                "field `nu`: `{item}` must be real or purely imaginary"
            )));
        }
        let branch = NuBranch::from_nu(nu);
        let closed = check_eta_pole(branch.nu_squared, c).and_then(|_| eta_closed(&branch, c));
        let numeric = closed
            .clone()
            .and_then(|_| coupling_solution(&prof, &branch, &grid));
        match (closed, numeric) {
            (Ok(closed), Ok(sol)) => table.row(&[
                cnum(nu),
                cnum(sol.eta),
                cnum(closed),
                num((sol.eta - closed).norm()),
                cnum(sol.tau),
            ]),
            (Err(Error::NearPole { .. } | Error::PoleOfTan { .. }), _) => table.row(&[
                cnum(nu),
                NEAR_POLE.into(),
                NEAR_POLE.into(),
                NEAR_POLE.into(),
                NEAR_POLE.into(),
            ]),
            (Err(e), _) | (_, Err(e)) => return Err(CliError::from_core("nu", e)),
        }
    }
    Ok(table.into_string())
}

pub fn spectrum(args: &SpectrumArgs, seed: Option<u64>) -> Result<String, CliError> {
    let prof = profile_of(&args.profile, args.center, args.width, args.cutoff)?;
    let grid = prof.midpoint_grid(grid_size("n-grid", args.n_grid, 4096)?);
    let pairs = args.pairs.unwrap_or(2);
    if pairs == 0 {
        return Err(CliError::Validation(
            "field `pairs`: must be positive".into(),
        ));
    }
    let op = build_k(&prof, &grid).map_err(core("profile"))?;
    let eigs = k_spectrum(&op, 2 * pairs).map_err(core("spectrum"))?;
    let c = prof.integral().abs();
    let mut table = Table::new(
        &[
            "index",
            "eigenvalue_re",
            "eigenvalue_im",
            "target",
            "abs_err",
        ],
        seed,
    );
    for (i, lam) in eigs.iter().enumerate() {
        // pairs come out as +lambda_k, -lambda_k
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let target = sign * k_eigenvalue((i / 2) as i64, c);
        table.row(&[
            i.to_string(),
            num(lam.re),
            num(lam.im),
            num(target),
            num((lam - target).norm()),
        ]);
    }
    Ok(table.into_string())
}

pub fn converge(args: &ConvergeArgs, seed: Option<u64>) -> Result<String, CliError> {
    let prof = profile_of(&args.profile, args.center, args.width, args.cutoff)?;
    let a = generator_of(&args.a, args.phase, "0,-1,-1")?;
    let point = parse::spectral_point(args.z.as_deref().unwrap_or("0,1"))?;
    let eps = reals("eps", &args.eps, "1/2,1/4,1/8,1/16,1/32,1/64")?;
    let mut bx = BoxSpec::default_for(&point);
    if let Some(l) = args.box_l {
        if !(l > 0.0 && l.is_finite()) {
            return Err(CliError::Validation(format!(
                "field `box-l`: must be positive, got {l}"
            )));
        }
        bx.half_width = l;
    }
    bx.n_box = grid_size("n-box", args.n_box, bx.n_box)?;
    let grid = prof.midpoint_grid(grid_size("n-grid", args.n_grid, 1024)?);
    let rows = converge_table(point, &a, &prof, &eps, bx, &grid).map_err(core("eps"))?;
    let mut table = Table::new(
        &[
            "eps",
            "hs_distance",
            "box_L",
            "n_box",
            "N_grid",
            "z_re",
            "z_im",
            "tail_estimate",
        ],
        seed,
    );
    for row in rows {
        let (dist, tail) = match &row.outcome {
            Ok(d) => (num(d.value), num(d.tail_estimate)),
            Err(Error::NearPole { .. }) => (NEAR_POLE.into(), NEAR_POLE.into()),
            Err(e) => return Err(CliError::from_core("eps", e.clone())),
        };
        table.row(&[
            num(row.eps),
            dist,
            num(row.box_half_width),
            row.n_box.to_string(),
            row.n_grid.to_string(),
            num(row.z.re),
            num(row.z.im),
            tail,
        ]);
    }
    Ok(table.into_string())
}

pub fn renorm(args: &RenormArgs, seed: Option<u64>) -> Result<String, CliError> {
    let a = generator_of(&args.a, args.phase, "0,-1,-1")?;
    let w = w_matrix(&a).map_err(core("a"))?;
    let (multiple, residual) = scalar_multiple(&w, &a.matrix());
    let ts = reals("t", &args.t, "0,0.5,1,1.5,2")?;
    let scaling: Vec<Value> = ts
        .iter()
        .map(|&t| match coupling_scale(&a, t) {
            Ok(v) => json!({ "t": jnum(t), "value": jnum(v) }),
            Err(e) => json!({ "t": jnum(t), "value": Value::Null, "error": e.to_string() }),
        })
        .collect();
    let record = json!({
        "generator": generator_json(&a),
        "w": jmatrix(&w),
        "scalar_multiple": jcomplex(multiple),
        "residual": jnum(residual),
        "coupling_scale": scaling,
        "seed": seed,
    });
    Ok(pretty(&record))
}
