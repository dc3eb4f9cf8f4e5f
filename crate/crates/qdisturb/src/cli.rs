//! Command-line front end: file loading, dispatch, reports, exit codes.
//!
//! Exit codes: 0 success/valid, 1 semantic failure (invalid object or
//! rejected certificate), 2 input error (usage, parse, unknown name),
//! 3 solver failure.

use serde::Serialize;

use crate::disturbance::{
    self, disturbance_measure, joint_measurability, verify_dual_certificate, DisturbanceError,
    DisturbanceOptions,
};
use crate::document::{CertificateDocument, Document, DocumentError};
use crate::instruments;
use crate::observables;
use crate::tol;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SEMANTIC: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

const USAGE: &str = "usage: qdisturb <command> <file> [names...] [flags]

commands:
  validate    <file>                check every observable and instrument
  disturb     <file> <A> <B>        least disturbance D_A(B) with certificate
  joint       <file> <A> <B>        joint measurability with margin
  firstkind   <file> <A>            D_A(A), first-kind admissibility
  repeatable  <file> <instrument>   repeatability / first-kind predicates
  fixedpoints <file> <instrument>   fixed-point space of the channel
  verify      <file> <certificate>  recheck a disturbance certificate

flags:
  --tol T            decision tolerance (default 1e-6)
  --json             machine-readable report on stdout
  --certificate P    (disturb) write the certificate to P";

#[derive(Serialize)]
struct JsonReport {
    command: String,
    inputs: Vec<String>,
    value: Option<f64>,
    decision: Option<bool>,
    dual_bound: Option<f64>,
    gap: Option<f64>,
    status: String,
}

impl JsonReport {
    fn new(command: &str, inputs: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            value: None,
            decision: None,
            dual_bound: None,
            gap: None,
            status: "ok".to_string(),
        }
    }

    fn print(&self) {
        println!("{}", serde_json::to_string_pretty(self).expect("report serializes"));
    }
}

struct Flags {
    positional: Vec<String>,
    tol: Option<f64>,
    json: bool,
    certificate: Option<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags { positional: Vec::new(), tol: None, json: false, certificate: None };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--json" => flags.json = true,
            "--tol" => {
                let value = it.next().ok_or("--tol needs a value")?;
                flags.tol =
                    Some(value.parse().map_err(|_| format!("invalid --tol value '{value}'"))?);
            }
            "--certificate" => {
                let value = it.next().ok_or("--certificate needs a path")?;
                flags.certificate = Some(value.clone());
            }
            other if other.starts_with("--") => {
                return Err(format!("unknown flag '{other}'"));
            }
            other => flags.positional.push(other.to_string()),
        }
    }
    Ok(flags)
}

fn input_error(message: &str) -> i32 {
    eprintln!("error: {message}");
    EXIT_INPUT
}

fn document_exit(err: &DocumentError) -> i32 {
    eprintln!("error: {err}");
    EXIT_INPUT
}

fn disturbance_exit(err: &DisturbanceError) -> i32 {
    eprintln!("error: {err}");
    match err {
        DisturbanceError::SolverFailed { .. } => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

fn options_with(tol: Option<f64>) -> DisturbanceOptions {
    let mut options = DisturbanceOptions::default();
    if let Some(t) = tol {
        options.decision_tol = t;
    }
    options
}

pub fn run(args: &[String]) -> i32 {
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return EXIT_INPUT;
    };
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(message) => return input_error(&message),
    };
    match command.as_str() {
        "validate" => cmd_validate(&flags),
        "disturb" => cmd_disturb(&flags),
        "joint" => cmd_joint(&flags),
        "firstkind" => cmd_firstkind(&flags),
        "repeatable" => cmd_repeatable(&flags),
        "fixedpoints" => cmd_fixedpoints(&flags),
        "verify" => cmd_verify(&flags),
        "--help" | "help" | "-h" => {
            println!("{USAGE}");
            EXIT_OK
        }
        other => input_error(&format!("unknown command '{other}'\n{USAGE}")),
    }
}

fn load_document(flags: &Flags) -> Result<Document, i32> {
    let path = flags.positional.first().ok_or_else(|| input_error("missing input file"))?;
    Document::load(path).map_err(|e| document_exit(&e))
}

fn cmd_validate(flags: &Flags) -> i32 {
    let doc = match load_document(flags) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let tolerance = flags.tol.unwrap_or(tol::EIGENVALUE);
    let mut all_valid = true;
    for name in doc.observables.keys() {
        match doc.observable(name) {
            Ok(obs) => {
                let report = observables::validate(&obs, tolerance);
                if report.passed {
                    println!(
                        "observable '{name}': ok ({} outcomes, normalization residual {:.2e})",
                        obs.outcome_count(),
                        report.normalization_residual
                    );
                } else {
                    all_valid = false;
                    println!("observable '{name}': INVALID");
                    for failure in report.failures() {
                        println!("  - {failure}");
                    }
                }
            }
            Err(err) => {
                all_valid = false;
                println!("observable '{name}': INVALID\n  - {err}");
            }
        }
    }
    for name in doc.instruments.keys() {
        match doc.instrument(name) {
            Ok(instrument) => {
                let induced = instruments::induced_observable(&instrument);
                let report = observables::validate(&induced, tolerance);
                if report.passed {
                    println!(
                        "instrument '{name}': ok ({} outcomes, completeness residual {:.2e})",
                        instrument.outcome_count(),
                        instrument.completeness_residual()
                    );
                } else {
                    all_valid = false;
                    println!("instrument '{name}': INVALID (induced observable fails)");
                    for failure in report.failures() {
                        println!("  - {failure}");
                    }
                }
            }
            Err(err) => {
                all_valid = false;
                println!("instrument '{name}': INVALID\n  - {err}");
            }
        }
    }
    if flags.json {
        let mut report = JsonReport::new("validate", &[&flags.positional[0]]);
        report.decision = Some(all_valid);
        report.status = if all_valid { "valid" } else { "invalid" }.to_string();
        report.print();
    }
    if all_valid {
        EXIT_OK
    } else {
        EXIT_SEMANTIC
    }
}

fn resolve_pair(
    doc: &Document,
    flags: &Flags,
) -> Result<(crate::Observable, crate::Observable, String, String), i32> {
    if flags.positional.len() < 3 {
        return Err(input_error("expected <file> <A> <B>"));
    }
    let name_a = flags.positional[1].clone();
    let name_b = flags.positional[2].clone();
    let a = doc.observable(&name_a).map_err(|e| document_exit(&e))?;
    let b = doc.observable(&name_b).map_err(|e| document_exit(&e))?;
    Ok((a, b, name_a, name_b))
}

fn cmd_disturb(flags: &Flags) -> i32 {
    let doc = match load_document(flags) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let (a, b, name_a, name_b) = match resolve_pair(&doc, flags) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let options = options_with(flags.tol);
    let report = match disturbance_measure(&a, &b, &options) {
        Ok(r) => r,
        Err(e) => return disturbance_exit(&e),
    };
    println!("D_{name_a}({name_b}) = {:.9}", report.value);
    println!("non-disturbing: {} (tolerance {:.1e})", report.non_disturbing, options.decision_tol);
    println!("certified lower bound: {:.9} (gap {:.2e})", report.dual_bound, report.gap);
    if let Some(path) = &flags.certificate {
        let cert = CertificateDocument::from_report(&report, a.dim(), &name_a, &name_b);
        if let Err(e) = std::fs::write(path, cert.to_json()) {
            eprintln!("error: cannot write certificate to {path}: {e}");
            return EXIT_INPUT;
        }
        println!("certificate written to {path}");
    }
    if flags.json {
        let mut json = JsonReport::new("disturb", &[&name_a, &name_b]);
        json.value = Some(report.value);
        json.decision = Some(report.non_disturbing);
        json.dual_bound = Some(report.dual_bound);
        json.gap = Some(report.gap);
        json.status = "optimal".to_string();
        json.print();
    }
    EXIT_OK
}

fn cmd_joint(flags: &Flags) -> i32 {
    let doc = match load_document(flags) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let (a, b, name_a, name_b) = match resolve_pair(&doc, flags) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let options = options_with(flags.tol);
    let report = match joint_measurability(&a, &b, &options) {
        Ok(r) => r,
        Err(e) => return disturbance_exit(&e),
    };
    println!("jointly measurable: {}", report.feasible);
    println!("margin (smallest eigenvalue slack): {:.9}", report.margin);
    if report.feasible {
        println!("joint observable marginal residual: {:.2e}", report.marginal_residual);
    }
    if flags.json {
        let mut json = JsonReport::new("joint", &[&name_a, &name_b]);
        json.value = Some(report.margin);
        json.decision = Some(report.feasible);
        json.status = "optimal".to_string();
        json.print();
    }
    EXIT_OK
}

fn cmd_firstkind(flags: &Flags) -> i32 {
    let doc = match load_document(flags) {
        Ok(d) => d,
        Err(code) => return code,
    };
    if flags.positional.len() < 2 {
        return input_error("expected <file> <A>");
    }
    let name = flags.positional[1].clone();
    let a = match doc.observable(&name) {
        Ok(a) => a,
        Err(e) => return document_exit(&e),
    };
    let options = options_with(flags.tol);
    let report = match disturbance::first_kind_measure(&a, &options) {
        Ok(r) => r,
        Err(e) => return disturbance_exit(&e),
    };
    println!("D_{name}({name}) = {:.9}", report.value);
    println!(
        "admits a first-kind measurement: {} (tolerance {:.1e})",
        report.non_disturbing, options.decision_tol
    );
    println!("certified lower bound: {:.9} (gap {:.2e})", report.dual_bound, report.gap);
    if flags.json {
        let mut json = JsonReport::new("firstkind", &[&name]);
        json.value = Some(report.value);
        json.decision = Some(report.non_disturbing);
        json.dual_bound = Some(report.dual_bound);
        json.gap = Some(report.gap);
        json.status = "optimal".to_string();
        json.print();
    }
    EXIT_OK
}

fn cmd_repeatable(flags: &Flags) -> i32 {
    let doc = match load_document(flags) {
        Ok(d) => d,
        Err(code) => return code,
    };
    if flags.positional.len() < 2 {
        return input_error("expected <file> <instrument>");
    }
    let name = flags.positional[1].clone();
    let instrument = match doc.instrument(&name) {
        Ok(i) => i,
        Err(e) => return document_exit(&e),
    };
    let tolerance = flags.tol.unwrap_or(tol::NORMALIZATION);
    let repeatable = instruments::is_repeatable(&instrument, tolerance);
    let first_kind = instruments::is_first_kind(&instrument, tolerance);
    println!("instrument '{name}' ({} outcomes):", instrument.outcome_count());
    println!("repeatable: {repeatable}");
    println!("first kind: {first_kind}");
    if flags.json {
        let mut json = JsonReport::new("repeatable", &[&name]);
        json.decision = Some(repeatable);
        json.status = "ok".to_string();
        json.print();
    }
    EXIT_OK
}

fn cmd_fixedpoints(flags: &Flags) -> i32 {
    let doc = match load_document(flags) {
        Ok(d) => d,
        Err(code) => return code,
    };
    if flags.positional.len() < 2 {
        return input_error("expected <file> <instrument>");
    }
    let name = flags.positional[1].clone();
    let instrument = match doc.instrument(&name) {
        Ok(i) => i,
        Err(e) => return document_exit(&e),
    };
    let channel = instruments::total_channel(&instrument);
    let space = instruments::fixed_point_space(&channel);
    let full_rank = instruments::full_rank_fixed_state(&channel);
    println!("fixed-point space of the dual channel: dimension {}", space.dim());
    println!("identity membership residual: {:.2e}", space.identity_residual());
    println!("full-rank fixed state exists: {}", full_rank.is_some());
    for obs_name in doc.observables.keys() {
        if let Ok(obs) = doc.observable(obs_name) {
            if obs.dim() != channel.dim() {
                continue;
            }
            for (x, effect) in obs.effects().iter().enumerate() {
                let residual = space.membership_residual(effect);
                let fixed = residual <= tol::FIXED_POINT_RESIDUAL;
                println!(
                    "effect {obs_name}[{}]: fixed={fixed} (membership residual {:.2e})",
                    x + 1,
                    residual
                );
            }
        }
    }
    if flags.json {
        let mut json = JsonReport::new("fixedpoints", &[&name]);
        json.value = Some(space.dim() as f64);
        json.decision = Some(full_rank.is_some());
        json.status = "ok".to_string();
        json.print();
    }
    EXIT_OK
}

fn cmd_verify(flags: &Flags) -> i32 {
    if flags.positional.len() < 2 {
        return input_error("expected <file> <certificate>");
    }
    let doc = match load_document(flags) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let cert = match CertificateDocument::load(&flags.positional[1]) {
        Ok(c) => c,
        Err(e) => return document_exit(&e),
    };
    let a = match doc.observable(&cert.observable_a) {
        Ok(a) => a,
        Err(e) => return document_exit(&e),
    };
    let b = match doc.observable(&cert.observable_b) {
        Ok(b) => b,
        Err(e) => return document_exit(&e),
    };
    let (h, k, choi) = match (cert.h_matrices(), cert.k_matrices(), cert.choi_matrices()) {
        (Ok(h), Ok(k), Ok(c)) => (h, k, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return document_exit(&e),
    };
    let feas_tol = flags.tol.unwrap_or(1e-7);

    // Dual side: the certified lower bound.
    let bound = match verify_dual_certificate(&a, &b, &h, &k, feas_tol) {
        Ok(bound) => bound,
        Err(e) => {
            println!("certificate rejected: {e}");
            if flags.json {
                let mut json = JsonReport::new(
                    "verify",
                    &[&cert.observable_a, &cert.observable_b],
                );
                json.decision = Some(false);
                json.status = format!("rejected: {e}");
                json.print();
            }
            return EXIT_SEMANTIC;
        }
    };

    // Primal side: the reported instrument really implements A and achieves
    // the claimed disturbance.
    let d = a.dim();
    let mut primal_ok = choi.len() == a.outcome_count();
    let mut upper = f64::INFINITY;
    if primal_ok {
        let mut choi_min = f64::INFINITY;
        let mut marginal = 0.0f64;
        for (j, ax) in choi.iter().zip(a.effects()) {
            match crate::matrix::min_eigenvalue(&j.hermitian_part()) {
                Ok(min) => choi_min = choi_min.min(min),
                Err(_) => {
                    choi_min = f64::NEG_INFINITY;
                }
            }
            if let Ok(traced) =
                crate::matrix::partial_trace(j, d, d, crate::matrix::Subsystem::First)
            {
                marginal = marginal.max((&traced - ax).max_abs());
            } else {
                marginal = f64::INFINITY;
            }
        }
        let mut achieved = 0.0f64;
        for by in b.effects() {
            let mut moved = crate::ComplexMatrix::zeros(d, d);
            for j in &choi {
                moved = &moved + &disturbance::heisenberg_apply(j, by, d);
            }
            achieved =
                achieved.max(crate::matrix::operator_norm(&(by - &moved.hermitian_part())));
        }
        upper = achieved;
        primal_ok = choi_min >= -feas_tol && marginal <= feas_tol.max(1e-7);
        println!("instrument check: min Choi eigenvalue {choi_min:.2e}, marginal residual {marginal:.2e}");
    }

    println!("certified lower bound: {bound:.9}");
    if upper.is_finite() {
        println!("primal upper bound:    {upper:.9}");
    }
    let valid = primal_ok;
    println!("certificate valid: {valid}");
    if flags.json {
        let mut json = JsonReport::new("verify", &[&cert.observable_a, &cert.observable_b]);
        json.value = Some(upper);
        json.decision = Some(valid);
        json.dual_bound = Some(bound);
        json.gap = Some((upper - bound).abs());
        json.status = if valid { "valid" } else { "rejected" }.to_string();
        json.print();
    }
    if valid {
        EXIT_OK
    } else {
        EXIT_SEMANTIC
    }
}
