use std::path::PathBuf;

use gramspec::linalg::{
    complexify, condition_number, min_hermitian_eigenvalue, plaid_zero_violation, CMatrix,
};
use gramspec::random::{seeded, simple_spectrum, SpectrumBox};
use gramspec::{
    energy_partition, finite_inverse_defect, optimal_control, orthogonality_certificate,
    Coordinates, Decomposition, EigenStructure, Flavor, Polynomial, Spectrum, Tolerances,
};
use gramspec_oracle::{
    integrate_lyapunov, residual_lyapunov, residual_riccati, solve_lyapunov_dense,
    DEFAULT_ORACLE_CAP,
};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::document::{
    parse_initial, parse_system, rows_to_matrix, validate_with_initial, SystemDocument,
};
use crate::error::{CliError, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use crate::model::{component_residuals, Expect, Model, SpectralData};
use crate::report::{complex, component_set, real_rows, render, spectrum, Obj};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every command.
#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// System document (JSON)
    pub system: PathBuf,
    #[arg(long)]
    pub tol_root: Option<f64>,
    #[arg(long)]
    pub tol_cluster: Option<f64>,
    #[arg(long)]
    pub tol_solve: Option<f64>,
    /// Write the report here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, clap::Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also emit pair-indexed components
    #[arg(long)]
    pub pairs: bool,
    /// Finite horizon t
    #[arg(long, value_name = "T")]
    pub finite: Option<f64>,
    /// Also emit the inverse Gramian components
    #[arg(long)]
    pub inverse: bool,
    /// P0 file, overriding the document's initial condition
    #[arg(long, value_name = "P0_FILE")]
    pub initial: Option<PathBuf>,
    /// Emit raw components instead of their Hermitian parts
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Clone, clap::Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Run a randomized property sweep from this seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "T")]
    pub finite: Option<f64>,
    #[arg(long, value_name = "P0_FILE")]
    pub initial: Option<PathBuf>,
    /// Target state for the energy closure check, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Target state, comma separated
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub x0: Vec<f64>,
    /// Sample û(t) and its modes on a grid (CSV output)
    #[arg(long, num_args = 3, value_names = ["T0", "T1", "STEPS"], allow_negative_numbers = true)]
    pub time_series: Option<Vec<f64>>,
}

/// Text to write plus the exit status.
#[derive(Debug, Clone)]
pub struct Output {
    pub text: String,
    pub exit: i32,
}

impl Output {
    fn ok(v: &Value) -> Self {
        Output {
            text: render(v),
            exit: EXIT_OK,
        }
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn load(common: &Common) -> Result<(SystemDocument, Tolerances), CliError> {
    let doc = parse_system(&read(&common.system)?)?;
    let mut tol = doc.tolerances.to_tolerances();
    for (name, flag, slot) in [
        ("--tol-root", common.tol_root, &mut tol.root),
        ("--tol-cluster", common.tol_cluster, &mut tol.cluster),
        ("--tol-solve", common.tol_solve, &mut tol.solve),
    ] {
        if let Some(v) = flag {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
            *slot = v;
        }
    }
    Ok((doc, tol))
}

fn initial_condition(
    doc: &SystemDocument,
    file: &Option<PathBuf>,
) -> Result<Option<DMatrix<f64>>, CliError> {
    match file {
        Some(path) => {
            let rows = parse_initial(&read(path)?)?;
            validate_with_initial(doc, &rows)?;
            Ok(Some(rows_to_matrix(&rows)))
        }
        None => Ok(doc.initial_matrix()),
    }
}

fn json_only(common: &Common) -> Result<(), CliError> {
    if common.format == Format::Csv {
        return Err(CliError::Usage(
            "CSV output is only available for `energy --time-series`".into(),
        ));
    }
    Ok(())
}

fn tolerances_json(t: &Tolerances) -> Value {
    json!({ "root": t.root, "cluster": t.cluster, "solve": t.solve, "condition_limit": t.condition_limit })
}

fn coordinates_name(c: Coordinates) -> &'static str {
    match c {
        Coordinates::Companion => "companion",
        Coordinates::Original => "original",
    }
}

fn spectrum_section(data: &SpectralData, tol: &Tolerances) -> Value {
    let spec = &data.spec;
    let solv = gramspec::check_solvability(spec, tol.solve);
    json!({
        "char_poly": data.poly.coeffs(),
        "eigenvalues": spectrum(spec),
        "root_residuals": spec.values().iter().map(|&l| data.poly.relative_residual(l)).collect::<Vec<_>>(),
        "root_condition": spec.root_condition(&data.poly).into_iter().map(finite_or_null).collect::<Vec<_>>(),
        "path": if spec.is_simple() { "simple" } else { "multiple" },
        "stable": spec.is_stable(),
        "max_real_part": spec.max_real_part(),
        "spectral_radius": spec.spectral_radius(),
        "min_separation": finite_or_null(spec.min_separation()),
        "solvability": {
            "ok": solv.ok,
            "violating_pairs": solv.violating_pairs.iter().map(|&(i, j)| json!([i, j])).collect::<Vec<_>>(),
            "min_pair_magnitude": solv.min_pair_magnitude,
        },
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn header(command: &str, doc: &SystemDocument, data: &SpectralData, tol: &Tolerances) -> Obj {
    let mut o = Obj::new();
    o.put("schema", crate::document::SCHEMA)
        .put("command", command)
        .put("label", doc.label.clone())
        .put("tolerances", tolerances_json(tol))
        .put("spectrum", spectrum_section(data, tol));
    o
}

fn system_json(model: &Model) -> Value {
    json!({
        "source": model.data.source,
        "n": model.n(),
        "m": model.m(),
        "coordinates": coordinates_name(model.coordinates),
    })
}

const ROOT_CONDITION_WARNING: f64 = 1e6;

fn common_warnings(model: &Model, warnings: &mut Vec<String>) {
    let spec = &model.data.spec;
    if !spec.is_stable() {
        warnings.push(format!(
            "spectrum is not stable (largest real part {}): the infinite-horizon Gramian is the Lyapunov solution, not a controllability integral, and need not be positive definite",
            spec.max_real_part()
        ));
    }
    let (worst, condition) = model.data.worst_root_condition();
    if condition > ROOT_CONDITION_WARNING {
        warnings.push(format!(
            "eigenvalue {} has root condition {condition:.1e}: rounding the polynomial coefficients alone moves it by about {:.1e} relative",
            crate::error::fmt_c(worst),
            condition * f64::EPSILON
        ));
    }
    if model.coordinates == Coordinates::Companion {
        warnings.push(
            "matrices are in companion coordinates: superdiagonal ones, last row −a_0 … −a_{n−1}, b = e_n".into(),
        );
    }
}

/// Kronecker-solve oracle for `A P + P Aᵀ + B Bᵀ = 0`, or `None` past the size cap.
fn oracle_gramian(
    model: &Model,
    warnings: &mut Vec<String>,
) -> Result<Option<DMatrix<f64>>, CliError> {
    if model.n() > DEFAULT_ORACLE_CAP {
        warnings.push(format!(
            "n = {} exceeds the oracle cap {DEFAULT_ORACLE_CAP}; component residuals are omitted",
            model.n()
        ));
        return Ok(None);
    }
    Ok(Some(
        solve_lyapunov_dense(&model.a, &model.input_gram())?.matrix,
    ))
}

fn rk4_steps(a: &DMatrix<f64>, t: f64) -> usize {
    ((t * a.norm() * 400.0).ceil() as usize).clamp(1000, 400_000)
}

/// `P(t)` from `P₀` by Runge–Kutta.
fn oracle_finite(model: &Model, t: f64) -> Result<Option<DMatrix<f64>>, CliError> {
    if model.n() > DEFAULT_ORACLE_CAP {
        return Ok(None);
    }
    let p0 = model
        .p0
        .clone()
        .unwrap_or_else(|| DMatrix::zeros(model.n(), model.n()));
    Ok(Some(
        integrate_lyapunov(
            &model.a,
            &model.input_gram(),
            &p0,
            t,
            rk4_steps(&model.a, t),
        )?
        .matrix,
    ))
}

fn rel(got: &DMatrix<f64>, want: &DMatrix<f64>) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

fn emit_set(
    dec: &Decomposition,
    flavor: Flavor,
    proj: &[CMatrix],
    expect: Option<Expect>,
) -> Value {
    let set = dec.flavor(flavor);
    let residuals = expect
        .map(|e| component_residuals(set, proj, &e))
        .unwrap_or_default();
    component_set(set, &residuals)
}

fn with_sum(mut set: Value, sum: Value) -> Value {
    set["sum"] = sum;
    set
}

/// `Σ‖X_i‖ / ‖Σ X_i‖`; a sum of components loses about `log10` of this many digits.
fn cancellation(dec: &Decomposition, sum: &DMatrix<f64>) -> f64 {
    let mags: f64 = dec.raw.components.iter().map(|(_, m)| m.norm()).sum();
    mags / sum.norm().max(f64::MIN_POSITIVE)
}

const CANCELLATION_WARNING: f64 = 1e6;

fn note_cancellation(what: &str, factor: f64, warnings: &mut Vec<String>) {
    if factor > CANCELLATION_WARNING {
        warnings.push(format!(
            "{what} components cancel by a factor of {factor:.1e}; expect about {:.0} fewer correct digits in individual components",
            factor.log10()
        ));
    }
}

/// Sum of the components; the double-double sum replaces the `f64` one when available.
fn gramian_sum_json(
    model: &Model,
    dec: &Decomposition,
    precise: Option<DMatrix<f64>>,
    oracle: Option<&DMatrix<f64>>,
) -> (Value, f64) {
    let summation = if precise.is_some() {
        "double-double"
    } else {
        "f64"
    };
    let sum = precise.unwrap_or_else(|| dec.symmetrized.real_sum());
    let factor = cancellation(dec, &sum);
    (
        json!({
            "matrix": real_rows(&sum),
            "residual": residual_lyapunov(&model.a, &model.input_gram(), &sum),
            "oracle_deviation": oracle.map(|p| rel(&sum, p)),
            "summation": summation,
            "cancellation": factor,
        }),
        factor,
    )
}

fn inverse_sum_json(
    model: &Model,
    dec: &Decomposition,
    gram: Option<&DMatrix<f64>>,
) -> (Value, f64) {
    let n = model.n();
    let sum = dec.symmetrized.real_sum();
    let factor = cancellation(dec, &sum);
    (
        json!({
            "matrix": real_rows(&sum),
            "residual": model.b_vector().map(|b| residual_riccati(&model.a, &b, &sum)),
            "product_defect": gram.map(|p| (&sum * p - DMatrix::identity(n, n)).norm()),
            "summation": "f64",
            "cancellation": factor,
        }),
        factor,
    )
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Output, CliError> {
    json_only(&args.common)?;
    let (doc, tol) = load(&args.common)?;
    let p0 = initial_condition(&doc, &args.initial)?;
    let data = SpectralData::resolve(&doc, &tol)?;
    let mut report = header("analyze", &doc, &data, &tol);
    let model = Model::build(data, tol, p0)?;
    let mut warnings = Vec::new();
    common_warnings(&model, &mut warnings);
    if model.p0.is_some() && args.finite.is_none() {
        warnings.push(
            "the initial condition only affects finite-horizon results and was ignored".into(),
        );
    }
    let flavor = if args.raw {
        warnings.push(
            "raw components are not Hermitian; only their sum is the (symmetric) Gramian".into(),
        );
        Flavor::Raw
    } else {
        Flavor::Symmetrized
    };
    report.put("system", system_json(&model));

    let oracle = oracle_gramian(&model, &mut warnings)?;
    let proj = model.projectors()?;
    let gram = model.gramian()?;
    let (sum, factor) = gramian_sum_json(
        &model,
        &gram,
        model.gramian_sum_precise(None)?,
        oracle.as_ref(),
    );
    note_cancellation("Gramian", factor, &mut warnings);
    report.put(
        "gramian",
        with_sum(
            emit_set(&gram, flavor, &proj, oracle.as_ref().map(Expect::Gramian)),
            sum,
        ),
    );
    if args.pairs {
        let pairs = model.gramian_pairs()?;
        let (sum, _) = gramian_sum_json(&model, &pairs, None, oracle.as_ref());
        report.put(
            "gramian_pairs",
            with_sum(
                emit_set(
                    &pairs,
                    flavor,
                    &proj,
                    oracle.as_ref().map(Expect::GramianPair),
                ),
                sum,
            ),
        );
    }

    let oracle_inv = oracle.as_ref().and_then(|p| p.clone().try_inverse());
    if args.inverse {
        let inv = model.inverse()?;
        let (sum, factor) = inverse_sum_json(&model, &inv, oracle.as_ref());
        note_cancellation("inverse", factor, &mut warnings);
        let mut section = with_sum(
            emit_set(
                &inv,
                flavor,
                &proj,
                oracle_inv.as_ref().map(Expect::Inverse),
            ),
            sum,
        );
        let cert = orthogonality_certificate(&gram.raw, &inv.raw, &proj)?;
        section["orthogonality"] = json!({
            "max_violation": cert.max_violation,
            "max_off_diagonal": cert.max_off_diagonal,
            "worst_pair": [cert.worst_pair.0, cert.worst_pair.1],
        });
        report.put("inverse", section);
        if args.pairs {
            let ip = model.inverse_pairs()?;
            let (sum, _) = inverse_sum_json(&model, &ip, oracle.as_ref());
            report.put(
                "inverse_pairs",
                with_sum(
                    emit_set(
                        &ip,
                        flavor,
                        &proj,
                        oracle_inv.as_ref().map(Expect::InversePair),
                    ),
                    sum,
                ),
            );
        }
    }

    if let Some(t) = args.finite {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage(format!(
                "--finite needs a non-negative horizon, got {t}"
            )));
        }
        let pt = oracle_finite(&model, t)?;
        let (fin, _) = model.finite(t)?;
        let precise = model.gramian_sum_precise(Some(t))?;
        let summation = if precise.is_some() {
            "double-double"
        } else {
            "f64"
        };
        let fsum = precise.unwrap_or_else(|| fin.symmetrized.real_sum());
        let factor = cancellation(&fin, &fsum);
        note_cancellation("finite-horizon Gramian", factor, &mut warnings);
        let mut section = with_sum(
            emit_set(&fin, flavor, &proj, pt.as_ref().map(Expect::Gramian)),
            json!({
                "matrix": real_rows(&fsum),
                "oracle": "rk4",
                "oracle_deviation": pt.as_ref().map(|p| rel(&fsum, p)),
                "summation": summation,
                "cancellation": factor,
            }),
        );
        section["horizon"] = json!(t);
        section["initial_condition"] = json!(model.p0.is_some());
        report.put("finite", section);
        if args.pairs {
            let (fp, expansion) = model.finite_pairs(t)?;
            for (a, b) in
                expansion.rate_collisions(1e-9 * (1.0 + model.data.spec.spectral_radius()))
            {
                warnings.push(format!(
                    "pair components {} and {} share the exponent λ_i + λ_j*; only their sum is unique",
                    crate::report::index_value(a),
                    crate::report::index_value(b)
                ));
            }
            let fpsum = fp.symmetrized.real_sum();
            let mut section = with_sum(
                emit_set(&fp, flavor, &proj, pt.as_ref().map(Expect::GramianPair)),
                json!({
                    "matrix": real_rows(&fpsum),
                    "oracle": "rk4",
                    "oracle_deviation": pt.as_ref().map(|p| rel(&fpsum, p)),
                    "summation": "f64",
                    "cancellation": cancellation(&fp, &fpsum),
                }),
            );
            section["horizon"] = json!(t);
            report.put("finite_pairs", section);
        }
        if args.inverse {
            let (state, finv) = model.finite_inverse(t)?;
            let pt_inv = pt.as_ref().and_then(|p| p.clone().try_inverse());
            let fisum = finv.symmetrized.real_sum();
            let factor = cancellation(&finv, &fisum);
            note_cancellation("finite-horizon inverse", factor, &mut warnings);
            let n = model.n();
            let es = model
                .eigenstructure()
                .expect("finite inverse implies a simple spectrum");
            let precise = finite_inverse_defect(es, &model.initial_condition_companion()?, t).ok();
            let mut section = with_sum(
                emit_set(&finv, flavor, &proj, pt_inv.as_ref().map(Expect::Inverse)),
                json!({
                    "matrix": real_rows(&fisum),
                    "product_defect": pt.as_ref().map(|p| (&fisum * p - DMatrix::identity(n, n)).norm()),
                    "precise_product_defect": precise,
                    "summation": "f64",
                    "cancellation": factor,
                }),
            );
            section["horizon"] = json!(t);
            section["normalization_condition"] = json!(state.condition);
            report.put("finite_inverse", section);
        }
    }

    report.put("warnings", warnings);
    Ok(Output::ok(&report.into_value()))
}

/// One named check with its tolerance.
struct Checks(Vec<Value>);

impl Checks {
    fn add(&mut self, name: &str, value: f64, tolerance: f64) {
        let pass = value <= tolerance;
        self.0.push(json!({
            "name": name,
            "value": value,
            "tolerance": tolerance,
            "margin": tolerance - value,
            "pass": pass,
        }));
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|c| c["pass"] == json!(true))
    }
}

fn max_residual(r: &[Option<f64>]) -> f64 {
    r.iter().flatten().copied().fold(0.0, f64::max)
}

pub fn verify(args: &VerifyArgs) -> Result<Output, CliError> {
    json_only(&args.common)?;
    let (doc, tol) = load(&args.common)?;
    let p0 = initial_condition(&doc, &args.initial)?;
    let data = SpectralData::resolve(&doc, &tol)?;
    if data.n() > DEFAULT_ORACLE_CAP {
        return Err(CliError::Oracle(
            gramspec_oracle::OracleError::CapExceeded {
                n: data.n(),
                cap: DEFAULT_ORACLE_CAP,
            },
        ));
    }
    let mut report = header("verify", &doc, &data, &tol);
    let model = Model::build(data, tol, p0)?;
    report.put("system", system_json(&model));
    let mut warnings = Vec::new();
    common_warnings(&model, &mut warnings);
    let mut checks = Checks(Vec::new());

    let q = model.input_gram();
    let p = solve_lyapunov_dense(&model.a, &q)?.matrix;
    let proj = model.projectors()?;
    let gram = model.gramian()?;
    let sum = match model.gramian_sum_precise(None)? {
        Some(s) => s,
        None => gram.symmetrized.real_sum(),
    };
    let factor = cancellation(&gram, &sum);
    note_cancellation("Gramian", factor, &mut warnings);
    report.put("cancellation", factor);
    checks.add(
        "gramian_lyapunov_residual",
        residual_lyapunov(&model.a, &q, &sum),
        1e-10,
    );
    checks.add("gramian_vs_oracle", rel(&sum, &p), 1e-8);
    checks.add(
        "gramian_components_vs_projector_identity",
        max_residual(&component_residuals(&gram.raw, &proj, &Expect::Gramian(&p))),
        1e-8,
    );
    let imag = gram
        .symmetrized
        .sum()
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    checks.add(
        "gramian_sum_is_real",
        imag / p.norm().max(f64::MIN_POSITIVE),
        1e-10,
    );
    if model.coordinates == Coordinates::Companion {
        let worst = gram
            .symmetrized
            .merge_conjugates(1e-9 * (1.0 + model.data.spec.spectral_radius()))
            .iter()
            .map(|(_, m, _)| plaid_zero_violation(&complexify(m)))
            .fold(0.0, f64::max);
        checks.add("gramian_plaid_pattern", worst, 1e-10);
    }
    if model.data.spec.is_stable() {
        let lo = min_hermitian_eigenvalue(&complexify(&sum));
        checks.add(
            "gramian_positive_semidefinite",
            (-lo).max(0.0) / p.norm(),
            1e-10,
        );
    }
    if model.is_simple() {
        let pairs = model.gramian_pairs()?;
        let mags: f64 = pairs.raw.components.iter().map(|(_, m)| m.norm()).sum();
        let psum = pairs.symmetrized.real_sum();
        checks.add(
            "pair_partition",
            rel(&psum, &p),
            1e-8 + 1e-13 * mags / p.norm(),
        );
        checks.add(
            "pair_components_vs_projector_identity",
            max_residual(&component_residuals(
                &pairs.raw,
                &proj,
                &Expect::GramianPair(&p),
            )),
            1e-8,
        );
    }

    if model.m() == 1 {
        let inv = model.inverse()?;
        let isum = inv.symmetrized.real_sum();
        let cond = condition_number(&p);
        let b = model.b_vector().expect("single input");
        checks.add(
            "inverse_riccati_residual",
            residual_riccati(&model.a, &b, &isum),
            1e-8,
        );
        let n = model.n();
        checks.add(
            "inverse_product",
            (&isum * &p - DMatrix::identity(n, n)).norm(),
            1e-8 + 1e-13 * cond,
        );
        let cert = orthogonality_certificate(&gram.raw, &inv.raw, &proj)?;
        checks.add("orthogonality", cert.max_violation, 1e-8 + 1e-15 * cond);
        if let Some(pinv) = p.clone().try_inverse() {
            let worst = max_residual(&component_residuals(
                &inv.raw,
                &proj,
                &Expect::Inverse(&pinv),
            ));
            checks.add(
                "inverse_components_vs_projector_identity",
                worst,
                1e-8 + 1e-15 * cond,
            );
        }
    } else {
        warnings
            .push("inverse checks skipped: the inverse decomposition needs a single input".into());
    }

    if let Some(t) = args.finite {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage(format!(
                "--finite needs a non-negative horizon, got {t}"
            )));
        }
        let pt = oracle_finite(&model, t)?.expect("size checked above");
        let (fin, _) = model.finite(t)?;
        let fsum = match model.gramian_sum_precise(Some(t))? {
            Some(s) => s,
            None => fin.symmetrized.real_sum(),
        };
        checks.add("finite_vs_rk4", rel(&fsum, &pt), 1e-6);
        if let (Some(es), 1) = (model.eigenstructure(), model.m()) {
            let d = finite_inverse_defect(es, &model.initial_condition_companion()?, t)?;
            checks.add("finite_inverse_product_precise", d, 1e-6);
        }
    } else if model.p0.is_some() {
        warnings.push("the initial condition is only checked together with --finite".into());
    }

    if let Some(x0) = &args.x0 {
        let es = model
            .eigenstructure()
            .ok_or_else(|| CliError::Usage("the energy check needs simple eigenvalues".into()))?;
        let x0 = target_vector(x0, model.n())?;
        let part = energy_partition(&model.to_companion_vector(&x0)?, es)?;
        checks.add(
            "energy_closure",
            part.closure_defect(),
            1e-9 + 1e-15 * part.cancellation,
        );
        if let Some(pinv) = p.clone().try_inverse() {
            let e = x0.dot(&(&pinv * &x0));
            checks.add(
                "energy_vs_oracle",
                (e - part.total).abs() / e.abs().max(f64::MIN_POSITIVE),
                1e-7,
            );
        }
    }

    if let Some(seed) = args.seed {
        let sweep = random_sweep(seed, model.n(), &model.tol)?;
        report.put("random", sweep.0);
        for c in sweep.1 .0 {
            checks.0.push(c);
        }
    }

    let passed = checks.passed();
    report
        .put("checks", Value::Array(checks.0))
        .put("passed", passed)
        .put("warnings", warnings);
    Ok(Output {
        text: render(&report.into_value()),
        exit: if passed { EXIT_OK } else { EXIT_VERIFY },
    })
}

const SWEEP_SYSTEMS: usize = 16;

/// Seeded companion systems of the document's size with random stable spectra.
fn random_sweep(seed: u64, n: usize, tol: &Tolerances) -> Result<(Value, Checks), CliError> {
    let n = n.clamp(1, 8);
    let mut rng = seeded(seed);
    let b = SpectrumBox::default();
    let mut gram_worst: f64 = 0.0;
    let mut inv_worst: f64 = 0.0;
    for _ in 0..SWEEP_SYSTEMS {
        let roots = simple_spectrum(&mut rng, n, &b);
        let poly = Polynomial::from_roots(&roots)?;
        let spec = Spectrum::simple(&roots)?;
        let cr = gramspec::build_companion(&poly);
        let es = EigenStructure::new(&cr, &spec, tol)?;
        let p = solve_lyapunov_dense(&cr.a, &cr.input_gram())?.matrix;
        let got = gramspec::infinite_subgramians(&es)?.symmetrized.real_sum();
        gram_worst = gram_worst.max(rel(&got, &p));
        if let Some(pinv) = p.clone().try_inverse() {
            let inv = gramspec::inverse_eigenparts(&es)?.symmetrized.real_sum();
            inv_worst = inv_worst.max(rel(&inv, &pinv));
        }
    }
    let mut checks = Checks(Vec::new());
    checks.add("random_gramian_vs_oracle", gram_worst, 1e-8);
    checks.add("random_inverse_vs_oracle", inv_worst, 1e-7);
    Ok((
        json!({ "seed": seed, "systems": SWEEP_SYSTEMS, "n": n }),
        checks,
    ))
}

fn target_vector(x0: &[f64], n: usize) -> Result<DVector<f64>, CliError> {
    if x0.len() != n {
        return Err(CliError::Usage(format!(
            "--x0 has {} entries, the system has n = {n}",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage("--x0 entries must be finite".into()));
    }
    Ok(DVector::from_column_slice(x0))
}

fn quad_form(x: &DVector<f64>, m: &CMatrix) -> f64 {
    let xc = complexify(&DMatrix::from_column_slice(x.len(), 1, x.as_slice()));
    (xc.transpose() * m * &xc)[(0, 0)].re
}

pub fn energy(args: &EnergyArgs) -> Result<Output, CliError> {
    let (doc, tol) = load(&args.common)?;
    if args.common.format == Format::Csv && args.time_series.is_none() {
        return Err(CliError::Usage("--format csv needs --time-series".into()));
    }
    if args.time_series.is_some() && args.common.format != Format::Csv {
        return Err(CliError::Usage(
            "time series are written as CSV; add --format csv".into(),
        ));
    }
    if doc.m() != 1 {
        return Err(CliError::Usage(format!(
            "energy analysis needs a single-input system, this one has {} inputs",
            doc.m()
        )));
    }
    let x0 = target_vector(&args.x0, doc.n())?;
    let data = SpectralData::resolve(&doc, &tol)?;
    let mut report = header("energy", &doc, &data, &tol);
    let model = Model::build(data, tol, None)?;
    report.put("system", system_json(&model));
    let mut warnings = Vec::new();
    common_warnings(&model, &mut warnings);
    let z0 = model.to_companion_vector(&x0)?;
    let stable = model.data.spec.is_stable();

    let oracle_energy = if model.n() <= DEFAULT_ORACLE_CAP {
        let p = solve_lyapunov_dense(&model.a, &model.input_gram())?.matrix;
        p.try_inverse().map(|pinv| x0.dot(&(&pinv * &x0)))
    } else {
        None
    };

    let mut section = match model.eigenstructure() {
        Some(es) => {
            let part = energy_partition(&z0, es)?;
            json!({
                "total": part.total,
                "linear": part.linear,
                "quadratic": real_rows(&part.quadratic),
                "interpretation_valid": part.interpretation_valid,
                "closure_defect": part.closure_defect(),
                "cancellation": part.cancellation,
                "max_imag": part.max_imag,
                "eigenvalues": part.eigenvalues.iter().map(|&l| complex(l)).collect::<Vec<_>>(),
            })
        }
        None => {
            warnings.push(
                "repeated eigenvalues: only the eigen-indexed (linear) partition is available"
                    .into(),
            );
            let inv = gramspec::inverse_multiple_eig(match &model.path {
                crate::model::Path::Multiple(ch) => ch,
                crate::model::Path::Simple(_) => unreachable!(),
            })?;
            let linear: Vec<f64> = inv
                .symmetrized
                .components
                .iter()
                .map(|(_, m)| quad_form(&z0, m))
                .collect();
            json!({
                "total": quad_form(&z0, &inv.symmetrized.sum()),
                "linear": linear,
                "quadratic": Value::Null,
                "interpretation_valid": stable,
                "eigenvalues": inv.symmetrized.eigenvalues.iter().map(|&l| complex(l)).collect::<Vec<_>>(),
            })
        }
    };
    let total = section["total"].as_f64().unwrap_or(f64::NAN);
    section["target"] = json!(x0.as_slice());
    section["oracle_energy"] = json!(oracle_energy);
    section["oracle_deviation"] =
        json!(oracle_energy.map(|e| (e - total).abs() / e.abs().max(f64::MIN_POSITIVE)));
    if !stable {
        warnings.push("the system is unstable: x0ᵀP⁻¹x0 is not a minimum control energy".into());
    }
    let signal = match (stable, model.eigenstructure()) {
        (true, Some(es)) => Some(optimal_control(&z0, es)?),
        _ => None,
    };
    if let Some(sig) = &signal {
        let e = sig.energy_by_quadrature();
        section["quadrature"] = json!({
            "energy": e,
            "points": sig.quadrature_points(),
            "horizon": sig.horizon,
            "deviation": (e - total).abs() / total.abs().max(f64::MIN_POSITIVE),
        });
    }

    if let Some(ts) = &args.time_series {
        let (t0, t1, steps) = (ts[0], ts[1], ts[2]);
        if !(t0.is_finite() && t1.is_finite() && steps >= 1.0 && steps.fract() == 0.0) {
            return Err(CliError::Usage(
                "--time-series needs finite T0 T1 and a positive integer STEPS".into(),
            ));
        }
        let Some(sig) = signal else {
            let why = if stable {
                "time series need simple eigenvalues"
            } else {
                "time series need a stable spectrum; the partition is reported with interpretation_valid = false"
            };
            warnings.push(why.into());
            report.put("energy", section).put("warnings", warnings);
            return Ok(Output {
                text: render(&report.into_value()),
                exit: EXIT_USAGE,
            });
        };
        return Ok(Output {
            text: time_series_csv(&sig, t0, t1, steps as usize),
            exit: EXIT_OK,
        });
    }

    report.put("energy", section).put("warnings", warnings);
    Ok(Output::ok(&report.into_value()))
}

/// Columns `t, u, re_u<i>, im_u<i>` with 0-based mode indices.
pub fn time_series_csv(
    sig: &gramspec::OptimalControlSignal,
    t0: f64,
    t1: f64,
    steps: usize,
) -> String {
    let k = sig.eigenvalues.len();
    let mut out = String::from("t,u");
    for i in 0..k {
        out.push_str(&format!(",re_u{i},im_u{i}"));
    }
    out.push('\n');
    for (t, u, modes) in sig.sample(t0, t1, steps) {
        out.push_str(&format!("{},{}", csv_num(t), csv_num(u)));
        for m in &modes {
            out.push_str(&format!(",{},{}", csv_num(m.re), csv_num(m.im)));
        }
        out.push('\n');
    }
    out
}

// shortest round-trip form, exponent notation outside [1e-4, 1e15)
fn csv_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn roots(common: &Common) -> Result<Output, CliError> {
    json_only(common)?;
    let (doc, tol) = load(common)?;
    let data = SpectralData::resolve(&doc, &tol)?;
    let mut report = header("roots", &doc, &data, &tol);
    report.put(
        "system",
        json!({ "source": data.source, "n": doc.n(), "m": doc.m() }),
    );
    Ok(Output::ok(&report.into_value()))
}
