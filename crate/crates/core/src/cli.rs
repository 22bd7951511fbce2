//! Command-line front end. Hit records go to stdout (or `--out`) as JSON
//! lines, progress goes to stderr, and `--cert` writes a scan certificate.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use crate::angle::{classify_cos, rational_cosine_sweep};
use crate::error::{Error, Result};
use crate::forms::{self, FormScanCertificate};
use crate::kernel::{format_rational, parse_rational, Integer, Rational};
use crate::report::{self, CertificateKind, Counters, ScanCertificate};
use crate::square::{self, SixtyDegreePredicate};
use crate::triangle::{self, FamilyForm, FamilyParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "steinhaus",
    version,
    about = "Exact searches for integer-distance points of squares and equilateral triangles"
)]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write a scan certificate to this path.
    #[arg(long, global = true)]
    cert: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search squares with side up to --p-max for points at integer distances.
    ScanSquare {
        #[arg(long)]
        p_max: u64,
        /// Largest distance to A as a multiple of the side, as num/den.
        #[arg(long, default_value = "3", value_parser = parse_ratio)]
        ratio: Rational,
    },
    /// Search equilateral triangles with side up to --a-max.
    ScanTriangle {
        #[arg(long)]
        a_max: u64,
        /// Largest distance as a multiple of the side, as num/den.
        #[arg(long, default_value = "3", value_parser = parse_ratio)]
        ratio: Rational,
    },
    /// Emit one member of the circumcircle family.
    GenFamily {
        #[arg(long)]
        l: Integer,
        #[arg(long)]
        m: Integer,
        #[arg(long)]
        n: Integer,
        #[arg(long, value_enum, default_value_t = FormArg::SideFirst)]
        form: FormArg,
    },
    /// Emit the triple for (x, y, scale), or every primitive triple up to --z-max.
    GenEisenstein {
        #[arg(long, required_unless_present = "z_max", requires = "y")]
        x: Option<Integer>,
        #[arg(long, requires = "x")]
        y: Option<Integer>,
        #[arg(long, default_value = "1")]
        scale: Integer,
        #[arg(long, conflicts_with_all = ["x", "y"])]
        z_max: Option<u64>,
    },
    /// Classify a rational cosine, given as num/den.
    ClassifyCos {
        #[arg(allow_hyphen_values = true, value_parser = parse_ratio)]
        cos: Rational,
    },
    /// Look for rational cosines among all mπ/n with n up to --n-max.
    AngleSweep {
        #[arg(long, default_value_t = 120)]
        n_max: u64,
    },
    /// Bounded scan of one of the quadratic or quartic form equations.
    ScanForms {
        #[arg(long, value_enum)]
        equation: EquationArg,
        #[arg(long)]
        bound: u64,
    },
    /// Run the sixty-degree exclusion sweeps and the right-angle search.
    Exclusions {
        /// Grid size per variable for the sixty-degree predicates.
        #[arg(long, default_value_t = 500)]
        max: u64,
        /// Side bound for the right-angle search.
        #[arg(long, default_value_t = 100)]
        p_max: u64,
        /// Extra random triples per predicate, drawn below 10⁹.
        #[arg(long, default_value_t = 0)]
        random: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a certificate's digest and re-validate its hits.
    VerifyCert { path: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EquationArg {
    /// a² + ab + b² and a² − ab + b² both square.
    ConcordantPair,
    /// a⁴ + a²b² + b⁴ square.
    QuarticNorm,
    /// a⁴ + a²b² + b⁴ square with a < b.
    InnerQuartic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    SideFirst,
    DistanceFirst,
    AsPrinted,
}

impl From<FormArg> for FamilyForm {
    fn from(form: FormArg) -> Self {
        match form {
            FormArg::SideFirst => FamilyForm::SideFirst,
            FormArg::DistanceFirst => FamilyForm::DistanceFirst,
            FormArg::AsPrinted => FamilyForm::AsPrinted,
        }
    }
}

fn parse_ratio(text: &str) -> std::result::Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::CertificateParse(_) => EXIT_USAGE,
        Error::Consistency(_) => EXIT_CONSISTENCY,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
    }
}

/// Parses `argv` (program name first) and runs the command against the
/// process's stdout and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let outcome = match &cli.out {
        Some(path) => File::create(path).map_err(Error::from).and_then(|file| {
            let mut out = BufWriter::new(file);
            let code = execute(&cli, &mut out, stderr)?;
            out.flush()?;
            Ok(code)
        }),
        None => execute(&cli, stdout, stderr),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Finished {
    kind: CertificateKind,
    bounds: BTreeMap<String, String>,
    counters: Counters,
    hits: Vec<Value>,
}

fn to_values<T: Serialize>(items: &[T]) -> Result<Vec<Value>> {
    items
        .iter()
        .map(|i| serde_json::to_value(i).map_err(Error::from))
        .collect()
}

fn bounds(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| ((*k).to_owned(), v.clone()))
        .collect()
}

fn form_finished(cert: &FormScanCertificate) -> Result<Finished> {
    Ok(Finished {
        kind: CertificateKind::for_equation(cert.equation),
        bounds: bounds(&[("bound", cert.bound.to_string())]),
        counters: Counters {
            enumerated: cert.enumerated_count,
            exact_hits: cert.solutions_found.len() as u64,
            near_misses: 0,
        },
        hits: to_values(&cert.solutions_found)?,
    })
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let started_at = SystemTime::now();
    let clock = Instant::now();
    let finished = match &cli.command {
        Command::VerifyCert { path } => return verify(path, out),
        Command::ClassifyCos { cos } => {
            let class = classify_cos(cos)?;
            report::write_jsonl(
                out,
                [json!({ "cos": format_rational(cos), "tag": class.tag })],
            )?;
            return Ok(EXIT_OK);
        }
        Command::GenFamily { l, m, n, form } => {
            let params =
                FamilyParams::new(l.clone(), m.clone(), n.clone()).with_form((*form).into());
            let cfg = triangle::gen_circumcircle_family(&params)?;
            report::write_jsonl(out, [cfg])?;
            return Ok(EXIT_OK);
        }
        Command::GenEisenstein { x, y, scale, z_max } => {
            match (x, y, z_max) {
                (Some(x), Some(y), _) => {
                    report::write_jsonl(out, [forms::gen_eisenstein(x, y, scale)?])?
                }
                (_, _, Some(z_max)) => {
                    report::write_jsonl(out, forms::enumerate_primitive_eisenstein(*z_max))?
                }
                _ => return Err(Error::Domain("give --x and --y, or --z-max".into())),
            }
            return Ok(EXIT_OK);
        }
        Command::ScanSquare { p_max, ratio } => {
            let result = report::with_jobs(cli.jobs, || square::scan_squares(*p_max, ratio))??;
            report::write_jsonl(out, &result.records)?;
            let exact = result.exact_hits().count() as u64;
            let near = result.near_misses().count() as u64;
            writeln!(
                err,
                "scan-square: p <= {p_max}, {exact} exact, {near} near misses"
            )?;
            Finished {
                kind: CertificateKind::SquareScan,
                bounds: bounds(&[
                    ("p_max", p_max.to_string()),
                    ("ratio", format_rational(ratio)),
                ]),
                counters: Counters {
                    enumerated: result.pairs_enumerated,
                    exact_hits: exact,
                    near_misses: near,
                },
                hits: to_values(&result.records)?,
            }
        }
        Command::ScanTriangle { a_max, ratio } => {
            let result = report::with_jobs(cli.jobs, || triangle::scan_triangles(*a_max, ratio))??;
            report::write_jsonl(out, &result.records)?;
            writeln!(
                err,
                "scan-triangle: a <= {a_max}, {} hits",
                result.records.len()
            )?;
            Finished {
                kind: CertificateKind::TriangleScan,
                bounds: bounds(&[
                    ("a_max", a_max.to_string()),
                    ("ratio", format_rational(ratio)),
                ]),
                counters: Counters {
                    enumerated: result.enumerated,
                    exact_hits: result.records.len() as u64,
                    near_misses: 0,
                },
                hits: to_values(&result.records)?,
            }
        }
        Command::AngleSweep { n_max } => {
            let sweep = rational_cosine_sweep(*n_max)?;
            if !sweep.confirms_classification() {
                return Err(Error::Consistency(
                    "a rational cosine outside the admissible five".into(),
                ));
            }
            report::write_jsonl(out, &sweep.rational_hits)?;
            writeln!(
                err,
                "angle-sweep: {} angles, {} rational",
                sweep.angles_checked,
                sweep.rational_hits.len()
            )?;
            Finished {
                kind: CertificateKind::AngleSweep,
                bounds: bounds(&[("n_max", n_max.to_string())]),
                counters: Counters {
                    enumerated: sweep.angles_checked,
                    exact_hits: sweep.rational_hits.len() as u64,
                    near_misses: 0,
                },
                hits: to_values(&sweep.rational_hits)?,
            }
        }
        Command::ScanForms { equation, bound } => {
            let scan: fn(u64) -> FormScanCertificate = match equation {
                EquationArg::ConcordantPair => forms::scan_concordant_pair,
                EquationArg::QuarticNorm => forms::scan_quartic_norm,
                EquationArg::InnerQuartic => forms::scan_inner_quartic,
            };
            let cert = report::with_jobs(cli.jobs, || scan(*bound))?;
            report::write_jsonl(out, &cert.solutions_found)?;
            writeln!(
                err,
                "scan-forms: {equation:?}, bound {bound}, {} pairs, {} solutions",
                cert.enumerated_count,
                cert.solutions_found.len()
            )?;
            form_finished(&cert)?
        }
        Command::Exclusions {
            max,
            p_max,
            random,
            seed,
        } => {
            let (sweeps, right) = report::with_jobs(cli.jobs, || {
                let sweeps: Vec<_> = SixtyDegreePredicate::ALL
                    .into_iter()
                    .map(|pred| square::sweep_exclusion(pred, *max))
                    .collect();
                (sweeps, square::exclusion_angle_pi2(*p_max))
            })?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut random_defeats = Vec::new();
            for pred in SixtyDegreePredicate::ALL {
                for _ in 0..*random {
                    let v: [u64; 3] = [(); 3].map(|_| rng.gen_range(1..1_000_000_000));
                    let [x, y, z] = v.map(Integer::from);
                    if !pred.excluded(&x, &y, &z) {
                        random_defeats.push(json!({ "predicate": pred.name(), "input": v }));
                    }
                }
            }
            for sweep in &sweeps {
                report::write_jsonl(out, [sweep])?;
            }
            report::write_jsonl(
                out,
                [json!({
                    "predicate": "random",
                    "seed": seed,
                    "checked": random * 3,
                    "defeats": random_defeats,
                })],
            )?;
            report::write_jsonl(
                out,
                [json!({
                    "predicate": "exclusion_angle_pi2",
                    "p_max": p_max,
                    "checked": right.enumerated_count,
                    "configurations": right.solutions_found,
                })],
            )?;
            let defeats: u64 = sweeps.iter().map(|s| s.defeats.len() as u64).sum::<u64>()
                + random_defeats.len() as u64;
            writeln!(
                err,
                "exclusions: grid {max}, {defeats} inputs not excluded, {} right-angle configurations",
                right.solutions_found.len()
            )?;
            let mut finished = form_finished(&right)?;
            finished.bounds = bounds(&[
                ("max", max.to_string()),
                ("p_max", p_max.to_string()),
                ("random", random.to_string()),
                ("seed", seed.to_string()),
            ]);
            finished.counters.enumerated +=
                sweeps.iter().map(|s| s.checked).sum::<u64>() + random * 3;
            finished.counters.near_misses = defeats;
            finished
        }
    };
    if let Some(path) = &cli.cert {
        let cert = ScanCertificate::new(
            finished.kind,
            finished.bounds,
            finished.counters,
            finished.hits,
            started_at,
            clock.elapsed(),
        );
        cert.write_to(path)?;
        writeln!(
            err,
            "certificate {} written to {}",
            cert.content_digest,
            path.display()
        )?;
    }
    Ok(EXIT_OK)
}

fn verify(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(path)?;
    let cert = ScanCertificate::from_json(&text)?;
    let digest_ok = cert.digest_matches();
    let hits_ok = cert.hits_revalidate();
    report::write_jsonl(
        out,
        [json!({
            "path": path.display().to_string(),
            "kind": cert.kind,
            "digest_ok": digest_ok,
            "hits_ok": hits_ok,
            "valid": digest_ok && hits_ok,
        })],
    )?;
    Ok(if digest_ok && hits_ok {
        EXIT_OK
    } else {
        EXIT_CONSISTENCY
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("steinhaus").chain(args.iter().copied());
        let code = run_cli_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn classify_prints_tag() {
        let (code, out, _) = run(&["classify-cos", "1/2"]);
        assert_eq!(code, 0);
        assert!(out.contains("PiOver3"));
        let (code, out, _) = run(&["classify-cos", "-1/2"]);
        assert_eq!(code, 0);
        assert!(out.contains("TwoPiOver3"));
        assert_eq!(run(&["classify-cos", "3/2"]).0, EXIT_USAGE);
    }

    #[test]
    fn family_record_and_printed_form() {
        let (code, out, _) = run(&["gen-family", "--l", "1", "--m", "2", "--n", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), r#"{"a":"3","p":"5","q":"8","k":"7"}"#);
        let (code, _, err) = run(&[
            "gen-family",
            "--l",
            "1",
            "--m",
            "2",
            "--n",
            "1",
            "--form",
            "as-printed",
        ]);
        assert_eq!(code, EXIT_CONSISTENCY);
        assert!(err.contains("consistency"));
        assert_eq!(
            run(&["gen-family", "--l", "1", "--m", "1", "--n", "2"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn square_scan_output() {
        let (code, out, _) = run(&["scan-square", "--p-max", "3"]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains(r#""a":"4","b":"1","d":"5","c_squared":"10""#));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["scan-square"]).0, EXIT_USAGE);
        assert_eq!(
            run(&["scan-forms", "--equation", "cubic", "--bound", "5"]).0,
            EXIT_USAGE
        );
        assert_eq!(run(&["--help"]).0, EXIT_OK);
        assert_eq!(run(&["scan-square", "--p-max", "0"]).0, EXIT_USAGE);
    }

    #[test]
    fn eisenstein_modes() {
        let (code, out, _) = run(&["gen-eisenstein", "--x", "1", "--y", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains(r#""z":"7""#));
        let (code, out, _) = run(&["gen-eisenstein", "--z-max", "20"]);
        assert_eq!(code, 0);
        assert!(out.lines().count() >= 2);
        assert_eq!(run(&["gen-eisenstein"]).0, EXIT_USAGE);
    }
}
