//! `gsp` — command-line front end for the companion-model graph signal
//! processing library.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical-assumption violation
//! (e.g. repeated eigenvalues, band leakage), 4 internal invariant failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gsp_core::graph_model::{delayed_impulses, delayed_spectral_impulses};
use gsp_core::io;
use gsp_core::{
    companion, fftpoly, graphs, interp, modulation, sampling, ConvMethod, Error, GraphSignal,
    Model, MultiplexPlan, Rep, Tolerances, C64,
};

#[derive(Parser)]
#[command(
    name = "gsp",
    version,
    about = "Companion-model graph signal processing toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Eigensolver residual tolerance override.
    #[arg(long, global = true)]
    eig_tol: Option<f64>,
    /// Conversion/convolution agreement tolerance override.
    #[arg(long, global = true)]
    conv_tol: Option<f64>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral report for a graph: eigenvalues, characteristic polynomial,
    /// companion matrix, conditioning, connectivity flags.
    Analyze {
        graph: PathBuf,
        /// Also emit the companion graph in DOT format.
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Convert a signal between the four representations.
    Transform {
        graph: PathBuf,
        signal: PathBuf,
        /// Target representation: s | hat | p | q.
        #[arg(long)]
        to: String,
        /// Representation of the input signal (default: vertex domain).
        #[arg(long, default_value = "s")]
        from: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Graph circular convolution of two vertex-domain signals.
    Convolve {
        graph: PathBuf,
        s: PathBuf,
        t: PathBuf,
        /// fft | matrix | spectral | all (cross-checks the three paths).
        #[arg(long, default_value = "fft")]
        method: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Multiplex vertex-domain signals with spectral-frequency carriers.
    Modulate {
        graph: PathBuf,
        /// Input signals, one file per multiplexing slot.
        signals: Vec<PathBuf>,
        /// Plan as JSON: {"B": bandwidth, "K": slot count}.
        #[arg(long)]
        plan: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Recover one slot from a multiplexed signal.
    Demodulate {
        graph: PathBuf,
        signal: PathBuf,
        /// Plan as JSON: {"B": bandwidth, "K": slot count}.
        #[arg(long)]
        plan: String,
        /// Slot index to recover.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Decimate a model onto a kept-vertex set.
    Sample {
        graph: PathBuf,
        /// JSON 0/1 vertex indicator array.
        delta: PathBuf,
        /// Kept-eigenvalue rule: "delta" (same indices as the kept
        /// vertices), "lowest" (first K canonical), or a JSON index array.
        #[arg(long, default_value = "delta")]
        eigs: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the built-in invariant suites and emit a JSON report.
    Selfcheck {
        /// Largest cycle size exercised by the suites.
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Seed for the random-graph cases.
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::MalformedInput(_)
        | Error::DimensionMismatch(_)
        | Error::IndexOutOfRange { .. }
        | Error::ModelMismatch
        | Error::InvalidPlan(_) => 2,
        Error::RepeatedEigenvalues { .. }
        | Error::BandLeakage { .. }
        | Error::SingularBlock { .. }
        | Error::NonMonicModulus => 3,
        Error::EigensolverFailure(_)
        | Error::NumericalInvariant(_)
        | Error::InterpolationFailure(_) => 4,
    }
}

fn tolerances(common: &CommonOpts) -> Result<Tolerances, Error> {
    let mut tol = Tolerances::default();
    if let Some(e) = common.eig_tol {
        if !(e > 0.0) {
            return Err(Error::MalformedInput("--eig-tol must be positive".into()));
        }
        tol.eig_tol = e;
    }
    if let Some(c) = common.conv_tol {
        if !(c > 0.0) {
            return Err(Error::MalformedInput("--conv-tol must be positive".into()));
        }
        tol.conv_tol = c;
    }
    Ok(tol)
}

fn read_file(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::MalformedInput(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &PathBuf, common: &CommonOpts) -> Result<Model, Error> {
    let tol = tolerances(common)?;
    let graph = io::graph_from_text(&read_file(path)?)?;
    Model::build(&graph, tol)
}

fn load_signal(model: &Model, path: &PathBuf, rep: Rep) -> Result<GraphSignal, Error> {
    let values = io::signal_from_text(&read_file(path)?)?;
    model.signal(values, rep)
}

fn parse_rep(text: &str) -> Result<Rep, Error> {
    text.parse::<Rep>()
}

fn parse_method(text: &str) -> Result<Option<ConvMethod>, Error> {
    if text == "all" {
        return Ok(None);
    }
    text.parse::<ConvMethod>().map(Some)
}

fn parse_plan(model: &Model, text: &str) -> Result<MultiplexPlan, Error> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::MalformedInput(format!("bad plan JSON: {e}")))?;
    let b = v
        .get("B")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::MalformedInput("plan needs integer field \"B\"".into()))?;
    let k = v
        .get("K")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::MalformedInput("plan needs integer field \"K\"".into()))?;
    MultiplexPlan::new(model, b as usize, k as usize)
}

fn print_signal(sig: &GraphSignal, format: Format, extra: Option<(&str, Value)>) {
    match format {
        Format::Json => {
            let mut obj = json!({
                "rep": sig.rep.as_str(),
                "values": io::signal_to_value(&sig.values),
            });
            if let Some((key, value)) = extra {
                obj[key] = value;
            }
            println!("{obj}");
        }
        Format::Csv => {
            for z in sig.values.iter() {
                if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
                    println!("{},{}", z.re, z.im);
                } else {
                    println!("{}", z.re);
                }
            }
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, Error> {
    match cmd {
        Command::Analyze { graph, dot, common } => cmd_analyze(&graph, dot, &common),
        Command::Transform {
            graph,
            signal,
            to,
            from,
            common,
        } => cmd_transform(&graph, &signal, &to, &from, &common),
        Command::Convolve {
            graph,
            s,
            t,
            method,
            common,
        } => cmd_convolve(&graph, &s, &t, &method, &common),
        Command::Modulate {
            graph,
            signals,
            plan,
            common,
        } => cmd_modulate(&graph, &signals, &plan, &common),
        Command::Demodulate {
            graph,
            signal,
            plan,
            index,
            common,
        } => cmd_demodulate(&graph, &signal, &plan, index, &common),
        Command::Sample {
            graph,
            delta,
            eigs,
            common,
        } => cmd_sample(&graph, &delta, &eigs, &common),
        Command::Selfcheck {
            n_max,
            seed,
            common,
        } => cmd_selfcheck(n_max, seed, &common),
    }
}

fn cmd_analyze(graph: &PathBuf, dot: bool, common: &CommonOpts) -> Result<ExitCode, Error> {
    let model = load_model(graph, common)?;
    let d = model.decomp();
    let comp = model.companion();
    match common.format {
        Format::Json => {
            let mut obj = json!({
                "n": model.n(),
                "eigenvalues": io::signal_to_value(&d.lambda),
                "charpoly": model.charpoly().coeffs,
                "companion": io::real_matrix_to_value(&comp.c_comp),
                "cond_vand": comp.cond_vand,
                "min_gap": d.min_gap,
                "strongly_connected": model.graph().is_strongly_connected(),
                "zero_eigenvalue": model.has_zero_eigenvalue(),
            });
            if dot {
                obj["companion_dot"] = Value::String(companion::companion_graph_dot(comp));
            }
            println!("{obj}");
        }
        Format::Csv => {
            println!("{}", io::real_matrix_to_csv(&comp.c_comp));
            if dot {
                println!("{}", companion::companion_graph_dot(comp));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_transform(
    graph: &PathBuf,
    signal: &PathBuf,
    to: &str,
    from: &str,
    common: &CommonOpts,
) -> Result<ExitCode, Error> {
    let model = load_model(graph, common)?;
    let target = parse_rep(to)?;
    let source = parse_rep(from)?;
    let sig = load_signal(&model, signal, source)?;
    // surface the interpolation residual when the conversion runs through
    // a coefficient recovery
    let mse = match target {
        Rep::ImpulseP => {
            let shat = model.to_representation(&sig, Rep::SpectrumHat)?;
            Some(interp::recover_coeffs(&model, &shat)?.mse)
        }
        Rep::SpectralImpulseQ => {
            let s = model.to_representation(&sig, Rep::VertexS)?;
            Some(interp::recover_q(&model, &s)?.mse)
        }
        _ => None,
    };
    let out = model.to_representation(&sig, target)?;
    if let Some(m) = mse {
        eprintln!("recovery mse: {m:.6e}");
    }
    print_signal(&out, common.format, mse.map(|m| ("mse", json!(m))));
    Ok(ExitCode::SUCCESS)
}

fn cmd_convolve(
    graph: &PathBuf,
    s_path: &PathBuf,
    t_path: &PathBuf,
    method: &str,
    common: &CommonOpts,
) -> Result<ExitCode, Error> {
    let model = load_model(graph, common)?;
    let s = load_signal(&model, s_path, Rep::VertexS)?;
    let t = load_signal(&model, t_path, Rep::VertexS)?;
    match parse_method(method)? {
        Some(m) => {
            let out = fftpoly::convolve(&model, &s, &t, m)?;
            print_signal(&out, common.format, None);
        }
        None => {
            let outs = [
                fftpoly::convolve(&model, &s, &t, ConvMethod::Fft)?,
                fftpoly::convolve(&model, &s, &t, ConvMethod::Matrix)?,
                fftpoly::convolve(&model, &s, &t, ConvMethod::Spectral)?,
            ];
            let mut disc: f64 = 0.0;
            for i in 0..3 {
                for j in i + 1..3 {
                    disc = disc.max((&outs[i].values - &outs[j].values).norm());
                }
            }
            eprintln!("three-path max discrepancy: {disc:.6e}");
            print_signal(&outs[0], common.format, Some(("discrepancy", json!(disc))));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_modulate(
    graph: &PathBuf,
    signal_paths: &[PathBuf],
    plan_text: &str,
    common: &CommonOpts,
) -> Result<ExitCode, Error> {
    let model = load_model(graph, common)?;
    let plan = parse_plan(&model, plan_text)?;
    if signal_paths.is_empty() {
        return Err(Error::MalformedInput("no input signals given".into()));
    }
    let mut signals = Vec::with_capacity(signal_paths.len());
    for p in signal_paths {
        signals.push(load_signal(&model, p, Rep::VertexS)?);
    }
    let out = modulation::multiplex(&model, &plan, &signals)?;
    print_signal(&out, common.format, None);
    Ok(ExitCode::SUCCESS)
}

fn cmd_demodulate(
    graph: &PathBuf,
    signal: &PathBuf,
    plan_text: &str,
    index: usize,
    common: &CommonOpts,
) -> Result<ExitCode, Error> {
    let model = load_model(graph, common)?;
    let plan = parse_plan(&model, plan_text)?;
    let d = load_signal(&model, signal, Rep::VertexS)?;
    let out = modulation::demultiplex(&model, &plan, &d, index)?;
    print_signal(&out, common.format, None);
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(
    graph: &PathBuf,
    delta_path: &PathBuf,
    eigs: &str,
    common: &CommonOpts,
) -> Result<ExitCode, Error> {
    let model = load_model(graph, common)?;
    let delta_values = io::signal_from_text(&read_file(delta_path)?)?;
    let mut delta = Vec::with_capacity(delta_values.len());
    for z in &delta_values {
        if z.im != 0.0 || (z.re != 0.0 && z.re != 1.0) {
            return Err(Error::MalformedInput(
                "vertex indicator entries must be 0 or 1".into(),
            ));
        }
        delta.push(z.re as u8);
    }
    let plan = match eigs {
        "delta" => sampling::DecimationPlan::new(&model, &delta)?,
        "lowest" => sampling::DecimationPlan::lowest_band(&model, &delta)?,
        text => {
            let idx: Vec<usize> = serde_json::from_str(text).map_err(|e| {
                Error::MalformedInput(format!(
                    "--eigs must be \"delta\", \"lowest\", or a JSON index array: {e}"
                ))
            })?;
            sampling::DecimationPlan::with_eigenvalues(&model, &delta, &idx)?
        }
    };
    let dec = sampling::decimate(&model, &plan)?;
    match common.format {
        Format::Json => {
            let mut obj = json!({
                "kept_vertices": plan.kept_vertices,
                "eig_indices": plan.eig_indices,
                "eigenvalues": io::signal_to_value(&dec.lambda_d),
                "conjugation_closed": plan.conj_closed,
                "a_d": io::matrix_to_value(&dec.a_d),
                "m_d": io::matrix_to_value(&dec.m_d),
                "c_d": io::matrix_to_value(&dec.c_d),
                "c_d_max_imag": dec.c_d_imag,
                "cond_block": dec.cond_block,
            });
            if let Some(real) = &dec.c_d_real {
                obj["c_d_real"] = io::real_matrix_to_value(real);
            }
            println!("{obj}");
        }
        Format::Csv => {
            if let Some(real) = &dec.c_d_real {
                println!("{}", io::real_matrix_to_csv(real));
            } else {
                return Err(Error::MalformedInput(
                    "csv output requires a conjugation-closed (real) decimated companion; use --format json".into(),
                ));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// selfcheck
// ---------------------------------------------------------------------------

struct Case {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(cases: &mut Vec<Case>, name: &'static str, worst: f64, bound: f64) {
    cases.push(Case {
        name,
        pass: worst <= bound,
        detail: format!("max residual {worst:.3e} (bound {bound:.0e})"),
    });
}

fn cmd_selfcheck(n_max: usize, seed: u64, common: &CommonOpts) -> Result<ExitCode, Error> {
    let tol = tolerances(common)?;
    let mut cases: Vec<Case> = Vec::new();

    // 1. DSP reduction: on cycles the model collapses to classical DSP.
    let mut worst = 0.0f64;
    for n in 2..=n_max.max(2) {
        let model = Model::build(&graphs::cycle(n), tol)?;
        let d = model.decomp();
        let root_n = (n as f64).sqrt();
        for k in 0..n {
            for v in 0..n {
                let ang = -std::f64::consts::TAU * (k as f64) * (v as f64) / n as f64;
                let want = C64::new(ang.cos(), ang.sin()) / root_n;
                worst = worst.max((d.gft[(k, v)] - want).norm());
            }
        }
        let cp = model.charpoly();
        worst = worst.max((cp.coeffs[0] + 1.0).abs());
        for c in &cp.coeffs[1..n] {
            worst = worst.max(c.abs());
        }
        let values: Vec<f64> = (0..n).map(|v| ((seed + v as u64) as f64).sin()).collect();
        let s = model.signal_real(&values, Rep::VertexS)?;
        let p = model.to_representation(&s, Rep::ImpulseP)?;
        let shat = model.to_representation(&s, Rep::SpectrumHat)?;
        let q = model.to_representation(&s, Rep::SpectralImpulseQ)?;
        worst = worst.max((&p.values - &s.values).norm());
        worst = worst.max((&q.values - &shat.values).norm());
    }
    check(&mut cases, "dsp_reduction_on_cycles", worst, 1e-8);

    // 2. FFT against the naive DFT, all lengths 1..32.
    let mut worst = 0.0f64;
    for len in 1..=32usize {
        let x: Vec<C64> = (0..len)
            .map(|k| {
                let t = (seed as f64 + 1.0) * (k as f64 + 0.5);
                C64::new(t.sin(), (1.7 * t).cos())
            })
            .collect();
        let got = fftpoly::fft(&x, false);
        let scale: f64 = x.iter().map(|z| z.norm()).sum::<f64>().max(1.0);
        for k in 0..len {
            let mut acc = C64::new(0.0, 0.0);
            for (n, &xn) in x.iter().enumerate() {
                let ang = -std::f64::consts::TAU * (k * n) as f64 / len as f64;
                acc += xn * C64::new(ang.cos(), ang.sin());
            }
            worst = worst.max((got[k] - acc).norm() / scale);
        }
    }
    check(&mut cases, "fft_naive_dft_oracle", worst, 1e-10);

    // Seeded random corpus shared by the remaining suites.
    let mut models = Vec::new();
    for (i, n) in (4..=n_max.max(4)).enumerate() {
        let (g, _) = graphs::random_strongly_connected(n, seed + i as u64, 1e-3)?;
        models.push(Model::build(&g, tol)?);
    }

    // 3. Companion diagonalization V^-1 Lambda V = C_comp.
    let mut worst = 0.0f64;
    for model in &models {
        let comp = model.companion();
        let n = model.n();
        let vand = &comp.vand;
        let lam = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                model.decomp().lambda[i]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let lhs = vand
            .clone()
            .lu()
            .solve(&(lam * vand))
            .ok_or_else(|| Error::NumericalInvariant("singular Vandermonde".into()))?;
        let c_complex = comp.c_comp.map(|x| C64::new(x, 0.0));
        worst = worst.max((lhs - c_complex).norm() / comp.cond_vand);
    }
    check(&mut cases, "companion_diagonalization", worst, 1e-6);

    // 4. Impulse-matrix identities GFT D_imp = (1/sqrt N) V and its dual.
    let mut worst = 0.0f64;
    for model in &models {
        let d = model.decomp();
        let n = model.n();
        let root_n = (n as f64).sqrt();
        let d_imp = delayed_impulses(d, n - 1)?;
        let d_sp = delayed_spectral_impulses(d, n - 1)?;
        let vand = &model.companion().vand;
        worst = worst.max((&d.gft * &d_imp - vand.unscale(root_n)).norm());
        worst = worst.max((&d.gft_inv * &d_sp - vand.conjugate().unscale(root_n)).norm());
    }
    check(&mut cases, "impulse_vandermonde_identity", worst, 1e-7);

    // 5. Interpolation residual of the p-recovery.
    let mut worst = 0.0f64;
    for model in &models {
        let values: Vec<f64> = (0..model.n())
            .map(|v| ((seed + 3 * v as u64) as f64).cos())
            .collect();
        let s = model.signal_real(&values, Rep::VertexS)?;
        let shat = model.to_representation(&s, Rep::SpectrumHat)?;
        worst = worst.max(interp::recover_coeffs(model, &shat)?.mse);
    }
    check(&mut cases, "interpolation_residual", worst, 1e-6);

    // 6. Three-path convolution agreement.
    let mut worst = 0.0f64;
    for model in &models {
        let n = model.n();
        let sv: Vec<f64> = (0..n).map(|v| ((seed + v as u64) as f64).sin()).collect();
        let tv: Vec<f64> = (0..n).map(|v| ((seed + 7 + v as u64) as f64).cos()).collect();
        let s = model.signal_real(&sv, Rep::VertexS)?;
        let t = model.signal_real(&tv, Rep::VertexS)?;
        let outs = [
            fftpoly::convolve(model, &s, &t, ConvMethod::Fft)?,
            fftpoly::convolve(model, &s, &t, ConvMethod::Matrix)?,
            fftpoly::convolve(model, &s, &t, ConvMethod::Spectral)?,
        ];
        let scale = model.cond_vand() * s.norm().max(t.norm());
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((&outs[i].values - &outs[j].values).norm() / scale);
            }
        }
    }
    check(&mut cases, "three_path_convolution", worst, 1e-6);

    // 7. Multiplex round trip on cycles with B=2, K=2.
    let mut worst = 0.0f64;
    for n in [4usize, 8].into_iter().filter(|&n| n <= n_max.max(4)) {
        let model = Model::build(&graphs::cycle(n), tol)?;
        let plan = MultiplexPlan::new(&model, 2, 2)?;
        let mut slots = Vec::new();
        for i in 0..2usize {
            let mut q = vec![C64::new(0.0, 0.0); n];
            q[0] = C64::new(((seed + i as u64) as f64).sin(), 0.0);
            q[1] = C64::new(((seed + 5 + i as u64) as f64).cos(), 0.0);
            let qs = model.signal(q, Rep::SpectralImpulseQ)?;
            slots.push(model.to_representation(&qs, Rep::VertexS)?);
        }
        let muxed = modulation::multiplex(&model, &plan, &slots)?;
        for (i, slot) in slots.iter().enumerate() {
            let back = modulation::demultiplex(&model, &plan, &muxed, i)?;
            let scale = model.cond_vand() * slot.norm().max(1e-12);
            worst = worst.max((&back.values - &slot.values).norm() / scale);
        }
    }
    check(&mut cases, "multiplex_round_trip", worst, 1e-6);

    // 8. Ladder-12 decimation onto its conjugation-closed 4-eigenvalue band.
    if n_max >= 12 {
        let model = Model::build(&graphs::ladder(12)?, tol)?;
        let delta = [0u8, 0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0];
        let targets = [
            C64::new(0.767, 0.538),
            C64::new(0.767, -0.538),
            C64::new(0.403, 0.864),
            C64::new(0.403, -0.864),
        ];
        let mut idx = Vec::new();
        for t in targets {
            let (best, _) = model
                .decomp()
                .lambda
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - t).norm().partial_cmp(&(b.1 - t).norm()).unwrap()
                })
                .unwrap();
            idx.push(best);
        }
        let plan = sampling::DecimationPlan::with_eigenvalues(&model, &delta, &idx)?;
        let dec = sampling::decimate(&model, &plan)?;
        let mut worst = dec.c_d_imag;
        let exact = sampling::companion_of_roots(dec.lambda_d.as_slice());
        worst = worst.max((&dec.c_d - exact).norm());
        check(&mut cases, "ladder12_decimation", worst, 1e-6);
    }

    let all_pass = cases.iter().all(|c| c.pass);
    let report = json!({
        "seed": seed,
        "n_max": n_max,
        "pass": all_pass,
        "cases": cases
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
            .collect::<Vec<_>>(),
    });
    println!("{report}");
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}
