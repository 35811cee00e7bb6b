//! Subcommand implementations. Each returns the bytes of its main artifact.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use carpet_lab::carpet::{CarpetSpec, HpValue};
use carpet_lab::classify::{compare, profile, CompareOptions, Outcome};
use carpet_lab::coding::codings_of_point;
use carpet_lab::hp::bits_for_digits;
use carpet_lab::index::{
    curve_coding, delta_lower_report, delta_rows, delta_upper, delta_upper_stream, empirical, gamma_bounds,
    gamma_coding, gamma_stream, monte_carlo_delta, CurveCoding, Gauge, MonteCarloReport, SLimit,
};
use carpet_lab::measure::{check_lemmas, k_of_r, LemmaReport, OracleConfig};
use carpet_lab::report::{DecimalValue, SCHEMA};
use carpet_lab::runlength::BetaSequence;
use carpet_lab::scalar::parse_ratio;
use carpet_lab::{Carpet, Coding, ExactPoint, Rational};

use crate::render::{render_carpet, TooDeep};
use crate::{Artifact, Cli, CliError, Command, IndexKind, YesNo};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new("cli.io", format!("{}: {e}", path.display())))
}

fn write_side(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::new("cli.io", format!("{}: {e}", path.display())))
}

pub fn load_carpet(path: &Path) -> Result<Carpet, CliError> {
    let spec: CarpetSpec = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::new("cli.bad_json", format!("{}: {e}", path.display())))?;
    Ok(spec.validate()?)
}

pub fn load_coding(path: &Path, carpet: &Carpet) -> Result<Coding, CliError> {
    let coding: Coding = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::new("cli.bad_json", format!("{}: {e}", path.display())))?;
    coding.validate(carpet)?;
    Ok(coding)
}

fn ratio(s: &str, what: &str) -> Result<Rational, CliError> {
    parse_ratio(s).ok_or_else(|| CliError::new("cli.bad_number", format!("{what}: cannot parse {s:?}")))
}

fn json<T: Serialize>(v: &T) -> Artifact {
    let mut bytes = serde_json::to_vec_pretty(v).expect("reports serialize");
    bytes.push(b'\n');
    Artifact { bytes, status: 0 }
}

fn gauge_from(carpet: &Carpet, name: &str, table: Option<&Path>, s: Option<&str>) -> Result<Gauge, CliError> {
    match name {
        "neglog" => Ok(Gauge::neg_log()),
        "loglog" => Ok(Gauge::log_log()),
        "file" => {
            let path = table.ok_or_else(|| CliError::new("cli.usage", "--gauge file needs --table"))?;
            let s = s.ok_or_else(|| CliError::new("cli.usage", "--gauge file needs --s"))?;
            let rows = Gauge::parse_table(&read(path)?)?;
            Ok(Gauge::tabulated(rows, SLimit::parse(s)?, carpet.n())?)
        }
        other => Err(CliError::new("cli.usage", format!("unknown gauge {other:?}; use neglog, loglog or file"))),
    }
}

pub fn dispatch(cli: &Cli) -> Result<Artifact, CliError> {
    let digits = cli.precision;
    match &cli.command {
        Command::Analyze { carpet, topology_depth } => {
            let c = load_carpet(carpet)?;
            Ok(json(&profile(&c, digits, *topology_depth)))
        }
        Command::Index { carpet, coding, gauge, table, s, depth, index, csv } => {
            let c = load_carpet(carpet)?;
            let w = load_coding(coding, &c)?;
            let g = gauge_from(&c, gauge, table.as_deref(), s.as_deref())?;
            if *depth == 0 {
                return Err(CliError::new("cli.bad_depth", "depth must be at least 1"));
            }
            if let Some(path) = csv {
                let mut out = String::from("k,beta,value\n");
                delta_rows(&c, &w, &g, *depth, |p, v| {
                    let _ = writeln!(out, "{},{},{v:e}", p.k, p.beta);
                });
                write_side(path, &out)?;
            }
            match index {
                IndexKind::DeltaUpper => Ok(json(&delta_upper::<f64>(&c, &w, &g, *depth, digits)?)),
                IndexKind::DeltaLower => Ok(json(&delta_lower_report(&c, &w, &g, digits)?)),
                IndexKind::Gamma => Ok(json(&gamma_bounds::<f64>(&c, &w, *depth, digits)?)),
            }
        }
        Command::Beta { carpet, coding, depth } => {
            let c = load_carpet(carpet)?;
            let w = load_coding(coding, &c)?;
            let mut out = String::from("k,ell,beta_zero,beta_top,beta\n");
            for p in BetaSequence::new(&c, (1..).map(|t| w.y(t))).take(*depth as usize) {
                let _ = writeln!(out, "{},{},{},{},{}", p.k, p.ell, p.beta_zero, p.beta_top, p.beta);
            }
            Ok(Artifact { bytes: out.into_bytes(), status: 0 })
        }
        Command::Oracle { carpet, coding, point, r, rho, depth } => {
            let c = load_carpet(carpet)?;
            let w = match (coding, point) {
                (Some(path), _) => load_coding(path, &c)?,
                (None, Some(p)) => {
                    let z = ExactPoint::parse(p)?;
                    codings_of_point(&c, &z)
                        .into_iter()
                        .next()
                        .ok_or_else(|| CliError::new("measure.out_of_range", format!("point {p} is not in the carpet")))?
                }
                (None, None) => return Err(CliError::new("cli.usage", "give --coding or --point")),
            };
            oracle(&c, &w, &ratio(r, "r")?, &ratio(rho, "rho")?, *depth, digits)
        }
        Command::Compare { first, second, assume_t, topology_depth, strict } => {
            let e = load_carpet(first)?;
            let f = load_carpet(second)?;
            let opts = CompareOptions {
                digits,
                assume_t: assume_t.map(|a| a == YesNo::Yes),
                topology_depth: *topology_depth,
            };
            let verdict = compare(&e, &f, &opts)?;
            let mut art = json(&verdict);
            if *strict && verdict.outcome == Outcome::Indeterminate {
                art.status = 2;
            }
            Ok(art)
        }
        Command::Sample { carpet, trials, depth, seed } => {
            let c = load_carpet(carpet)?;
            let report = monte_carlo_delta(&c, *trials, *depth, *seed)?;
            let (oriented, _) = c.normalize_orientation()?;
            let form = oriented.delta_aver_form()?;
            let reference = DecimalValue::from_hp(&HpValue::new(form, bits_for_digits(digits)), digits);
            Ok(json(&SampleDoc { report, delta_aver_closed: reference }))
        }
        Command::Curve { carpet, t, gamma, depth, p1, csv } => {
            let c = load_carpet(carpet)?;
            curve(&c, t.as_deref(), *gamma, *depth, *p1, csv.as_deref(), digits)
        }
        Command::Render { carpet, depth, overlay, places } => {
            let c = load_carpet(carpet)?;
            if *depth == 0 {
                return Err(CliError::new("cli.bad_depth", "depth must be at least 1"));
            }
            let svg = render_carpet(&c, *depth, *places, *overlay).map_err(|TooDeep(d)| {
                CliError::new("cli.too_deep", format!("render depth {d} exceeds {}", crate::render::MAX_RENDER_DEPTH))
            })?;
            Ok(Artifact { bytes: svg.into_bytes(), status: 0 })
        }
    }
}

#[derive(Serialize)]
struct SampleDoc {
    #[serde(flatten)]
    report: MonteCarloReport,
    /// Closed-form average index the `delta_aver` column estimates.
    delta_aver_closed: DecimalValue,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OracleDoc {
    schema: &'static str,
    lower: DecimalValue,
    upper: DecimalValue,
    k_of_r: u64,
    xi_size: usize,
    depth: u64,
    lemma31: &'static str,
    lemma32: &'static str,
    detail: LemmaReport,
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn oracle(c: &Carpet, w: &Coding, r: &Rational, rho: &Rational, depth: Option<u64>, digits: u32) -> Result<Artifact, CliError> {
    let depth = match depth {
        Some(d) => d,
        None => k_of_r(c, &(rho * r))? + 6,
    };
    let cfg = OracleConfig { digits, ..OracleConfig::default() };
    let rep = check_lemmas(c, w, r, rho, depth, &cfg)?;
    Ok(json(&OracleDoc {
        schema: SCHEMA,
        lower: DecimalValue::from_rational(&rep.u.lower, digits),
        upper: DecimalValue::from_rational(&rep.u.upper, digits),
        k_of_r: rep.u.k_of_r,
        xi_size: rep.u.xi.len(),
        depth,
        lemma31: pass(rep.ratio_pass()),
        lemma32: pass(rep.beta_pass()),
        detail: rep,
    }))
}

#[derive(Serialize)]
struct Checkpoint {
    p: u64,
    beta: u64,
    predicted: u64,
}

#[derive(Serialize)]
struct CurveDoc<R: Serialize> {
    schema: &'static str,
    /// The carpet was flipped to put the larger end row at the bottom.
    flipped: bool,
    coding: CurveCoding,
    checkpoints: Vec<Checkpoint>,
    checkpoints_match: bool,
    report: R,
}

fn curve(
    carpet: &Carpet,
    t: Option<&str>,
    gamma: bool,
    depth: u64,
    p1: Option<u64>,
    csv: Option<&Path>,
    digits: u32,
) -> Result<Artifact, CliError> {
    if depth == 0 {
        return Err(CliError::new("cli.bad_depth", "depth must be at least 1"));
    }
    let (c, flipped) = carpet.normalize_orientation()?;
    let cc = match (t, gamma) {
        (_, true) => gamma_coding(&c, depth, p1)?,
        (Some(t), false) => curve_coding(&c, &ratio(t, "t")?, depth, p1)?,
        (None, false) => return Err(CliError::new("cli.usage", "give --t or --gamma")),
    };
    let mut checkpoints = Vec::with_capacity(cc.checkpoints.len());
    let mut next = cc.checkpoints.iter().peekable();
    for parts in BetaSequence::new(&c, cc.y_letters()).take(depth as usize) {
        if next.peek() == Some(&&parts.k) {
            next.next();
            checkpoints.push(Checkpoint { p: parts.k, beta: parts.beta, predicted: cc.predicted_beta(&c, parts.k) });
        }
    }
    let checkpoints_match = checkpoints.iter().all(|k| k.beta == k.predicted);
    let gauge = Gauge::neg_log();
    if let Some(path) = csv {
        let mut out = String::from("k,beta,value\n");
        if gamma {
            let e = carpet_lab::index::gamma_empirical::<f64, _>(&c, cc.y_letters(), depth);
            for s in &e.samples {
                let _ = writeln!(out, "{},{},{:e}", s.k, s.beta, s.value);
            }
        } else {
            empirical::<f64, _>(&c, cc.y_letters(), &gauge, depth, |p, v| {
                let _ = writeln!(out, "{},{},{v:e}", p.k, p.beta);
            });
        }
        write_side(path, &out)?;
    }
    if gamma {
        let report = gamma_stream::<f64, _>(&c, cc.y_letters(), depth, digits)?;
        Ok(json(&CurveDoc { schema: SCHEMA, flipped, coding: cc, checkpoints, checkpoints_match, report }))
    } else {
        let report = delta_upper_stream::<f64, _>(&c, cc.y_letters(), &gauge, depth)?;
        Ok(json(&CurveDoc { schema: SCHEMA, flipped, coding: cc, checkpoints, checkpoints_match, report }))
    }
}
