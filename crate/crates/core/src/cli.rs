//! Command-line front end.
//!
//! Exit codes: 0 success (or Feasible / UnitaryRelated), 1 negative outcome
//! (Infeasible, NotFeasible, Decohering), 2 input or usage error, 3 verdict
//! that is only necessary or undetermined.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::coherence::{coherence_roundtrip, purity, CoherenceVerdict};
use crate::error::{Error, Result};
use crate::feasibility::{assess, build_m, Verdict};
use crate::io::{
    load_state_set, read_json, to_json, write_atomic, ApplyInput, CoherenceFile, DensityFile,
    KrausFile, StateSetFile, SweepTemplate, Verification,
};
use crate::numerics::Tolerances;
use crate::states::{random_state_set, superpose, RandomMode};
use crate::synthesis::{
    apply_channel, synthesize, transform_report, verify_completeness, DensityMatrix,
};

#[derive(Debug, Parser)]
#[command(
    name = "detmap",
    version,
    about = "Deterministic transformations between sets of pure states"
)]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Flags {
    /// Tolerance for PSD tests and zero overlaps.
    #[arg(long, global = true, default_value_t = crate::numerics::DEFAULT_PSD_TOL)]
    pub tol: f64,
    /// Relative cutoff for numerical rank.
    #[arg(long, global = true, default_value_t = crate::numerics::DEFAULT_RANK_TOL)]
    pub rank_tol: f64,
    /// Allowed deficit `1 - Tr(rho^2)` for a pure output.
    #[arg(long, global = true, default_value_t = crate::numerics::DEFAULT_PURITY_TOL)]
    pub purity_tol: f64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Flags {
    fn tolerances(&self) -> Result<Tolerances> {
        for (name, v) in [
            ("--tol", self.tol),
            ("--rank-tol", self.rank_tol),
            ("--purity-tol", self.purity_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Tolerances {
            psd: self.tol,
            rank: self.rank_tol,
            purity: self.purity_tol,
            ..Tolerances::default()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenMode {
    Generic,
    Independent,
    UnitaryImage,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the initial states can be mapped to the final states.
    Check { initial: PathBuf, r#final: PathBuf },
    /// Build Kraus operators for a feasible pair.
    Synth { initial: PathBuf, r#final: PathBuf },
    /// Apply a Kraus set to a state, state-set member or density matrix.
    Apply {
        kraus: PathBuf,
        input: PathBuf,
        /// Member of a state-set input to use.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Probe purity of a superposition and test for a unitary relation.
    Coherence {
        initial: PathBuf,
        r#final: PathBuf,
        /// Coefficients: a JSON array of reals or [re, im] pairs, or
        /// comma-separated reals.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
    },
    /// Evaluate a one-parameter family on an inclusive grid, as CSV.
    Sweep {
        template: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, allow_hyphen_values = true)]
        stop: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Generate a seeded random state set.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = GenMode::Generic)]
        mode: GenMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Set to rotate in `unitary-image` mode.
        #[arg(long)]
        base: Option<PathBuf>,
    },
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub output: Option<String>,
    pub message: Option<String>,
}

impl Outcome {
    fn emit(code: i32, output: String) -> Self {
        Self {
            code,
            output: Some(output),
            message: None,
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.flags.tolerances()?;
    match &cli.command {
        Command::Check { initial, r#final } => check(initial, r#final, &tol),
        Command::Synth { initial, r#final } => synth(initial, r#final, &tol),
        Command::Apply {
            kraus,
            input,
            index,
        } => apply(kraus, input, *index, &tol),
        Command::Coherence {
            initial,
            r#final,
            coeffs,
        } => coherence(initial, r#final, coeffs, &tol),
        Command::Sweep {
            template,
            start,
            stop,
            steps,
        } => sweep(template, *start, *stop, *steps, &tol),
        Command::Gen {
            dim,
            count,
            mode,
            seed,
            base,
        } => gen(*dim, *count, *mode, *seed, base.as_deref()),
    }
}

fn check(initial: &Path, target: &Path, tol: &Tolerances) -> Result<Outcome> {
    let a = assess(&load_state_set(initial)?, &load_state_set(target)?, tol)?;
    let code = match a.report.verdict {
        Verdict::Feasible => 0,
        Verdict::Infeasible => 1,
        Verdict::NecessaryOnly | Verdict::Undetermined => 3,
    };
    Ok(Outcome::emit(code, to_json(&a.report)))
}

fn synth(initial: &Path, target: &Path, tol: &Tolerances) -> Result<Outcome> {
    let i = load_state_set(initial)?;
    let f = load_state_set(target)?;
    let ks = match synthesize(&i, &f, tol) {
        Ok(ks) => ks,
        Err(Error::NotFeasible(verdict)) => {
            return Ok(Outcome {
                code: 1,
                output: None,
                message: Some(format!("no channel synthesized: verdict is {verdict}")),
            })
        }
        Err(e) => return Err(e),
    };
    let records = transform_report(&ks, &i, &f)?;
    let verification = Verification::from_records(verify_completeness(&ks), &records);
    Ok(Outcome::emit(
        0,
        to_json(&KrausFile::from_set(&ks, Some(verification))),
    ))
}

fn apply(kraus: &Path, input: &Path, index: usize, tol: &Tolerances) -> Result<Outcome> {
    let ks = read_json::<KrausFile>(kraus, "Kraus set")?.into_set()?;
    let rho =
        read_json::<ApplyInput>(input, "state or density matrix")?.into_density(index, tol.psd)?;
    let out = apply_channel(&ks, &rho)?;
    let p = purity(&out);
    Ok(Outcome::emit(
        0,
        to_json(&DensityFile::from_density(&out, Some(p))),
    ))
}

/// Parses `--coeffs`: a JSON array whose items are reals or `[re, im]`
/// pairs, or a comma-separated list of reals.
pub fn parse_coefficients(text: &str) -> Result<Vec<Complex64>> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Item {
        Real(f64),
        Pair([f64; 2]),
    }
    let trimmed = text.trim();
    let out: Vec<Complex64> = if trimmed.starts_with('[') {
        crate::io::parse_json::<Vec<Item>>(trimmed, "coefficient list")?
            .into_iter()
            .map(|it| match it {
                Item::Real(x) => Complex64::new(x, 0.0),
                Item::Pair([re, im]) => Complex64::new(re, im),
            })
            .collect()
    } else {
        trimmed
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map(|x| Complex64::new(x, 0.0))
                    .map_err(|e| Error::Input(format!("bad coefficient {s:?}: {e}")))
            })
            .collect::<Result<_>>()?
    };
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NotFinite);
    }
    Ok(out)
}

fn coherence(initial: &Path, target: &Path, coeffs: &str, tol: &Tolerances) -> Result<Outcome> {
    let i = load_state_set(initial)?;
    let f = load_state_set(target)?;
    let q = parse_coefficients(coeffs)?;
    let rt = coherence_roundtrip(&i, &f, &q, tol).map_err(|e| match e {
        Error::NotIndependent { rank, count } => Error::Input(format!(
            "states must be linearly independent (rank {rank} for {count} states); \
             dual states and the unitary relation are undefined otherwise"
        )),
        other => other,
    })?;
    let code = match rt.verdict() {
        CoherenceVerdict::UnitaryRelated => 0,
        CoherenceVerdict::Decohering => 1,
    };
    Ok(Outcome::emit(
        code,
        to_json(&CoherenceFile::from_roundtrip(&rt)),
    ))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn sweep(
    template: &Path,
    start: f64,
    stop: f64,
    steps: usize,
    tol: &Tolerances,
) -> Result<Outcome> {
    if steps < 2 {
        return Err(Error::Input(format!(
            "--steps must be at least 2, got {steps}"
        )));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::Input("grid bounds must be finite".into()));
    }
    let t: SweepTemplate = read_json(template, "sweep template")?;
    let mut csv = String::from("theta,min_eigenvalue,verdict,max_abs_mu,uniform_purity\n");
    for k in 0..steps {
        let theta = if k == steps - 1 {
            stop
        } else {
            start + k as f64 * (stop - start) / (steps - 1) as f64
        };
        let i = t.initial.instantiate(theta)?;
        let f = t.target.instantiate(theta)?;
        let a = assess(&i, &f, tol)?;
        let m = build_m(&i, &f, tol)?;
        let mut max_mu: Option<f64> = None;
        for j in 0..m.len() {
            for l in j + 1..m.len() {
                let v = if m.forced_infeasible.contains(&(j, l)) {
                    f64::INFINITY
                } else if m.is_defined(j, l) {
                    m.entries[(j, l)].norm()
                } else {
                    continue;
                };
                max_mu = Some(max_mu.map_or(v, |x| x.max(v)));
            }
        }
        let uniform = if a.report.verdict == Verdict::Feasible {
            let ones = vec![Complex64::new(1.0, 0.0); i.len()];
            match superpose(&i, &ones, 1e-12) {
                Ok(sp) => {
                    let ks = synthesize(&i, &f, tol)?;
                    Some(purity(&apply_channel(
                        &ks,
                        &DensityMatrix::pure(&sp.vector)?,
                    )?))
                }
                Err(Error::ZeroVector { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let max_mu = max_mu.map(|v| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                v.to_string()
            }
        });
        writeln!(
            csv,
            "{},{},{},{},{}",
            theta,
            fmt_opt(a.report.min_eigenvalue),
            a.report.verdict.as_str(),
            max_mu.unwrap_or_default(),
            fmt_opt(uniform)
        )
        .expect("writing to a String cannot fail");
    }
    Ok(Outcome::emit(0, csv))
}

fn gen(dim: usize, count: usize, mode: GenMode, seed: u64, base: Option<&Path>) -> Result<Outcome> {
    let mode = match (mode, base) {
        (GenMode::Generic, None) => RandomMode::Generic,
        (GenMode::Independent, None) => RandomMode::Independent,
        (GenMode::UnitaryImage, Some(path)) => RandomMode::UnitaryImageOf(load_state_set(path)?),
        (GenMode::UnitaryImage, None) => {
            return Err(Error::Input("--mode unitary-image needs --base".into()))
        }
        (_, Some(_)) => {
            return Err(Error::Input(
                "--base is only used with --mode unitary-image".into(),
            ))
        }
    };
    let s = random_state_set(dim, count, seed, &mode)?;
    Ok(Outcome::emit(0, to_json(&StateSetFile::from_set(&s))))
}

/// Parses `args`, runs the command and writes results. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Some(msg) = &outcome.message {
                let _ = writeln!(stderr, "detmap: {msg}");
            }
            if let Some(text) = &outcome.output {
                match &cli.flags.out {
                    Some(path) => {
                        if let Err(e) = write_atomic(path, text) {
                            let _ = writeln!(stderr, "detmap: {e}");
                            return 2;
                        }
                    }
                    None => {
                        let _ = stdout.write_all(text.as_bytes());
                    }
                }
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "detmap: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_formats() {
        let a = parse_coefficients("1, -0.5,2").unwrap();
        assert_eq!(
            a,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-0.5, 0.0),
                Complex64::new(2.0, 0.0)
            ]
        );
        let b = parse_coefficients("[1, [0, 1]]").unwrap();
        assert_eq!(b, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        assert!(parse_coefficients("1,x").is_err());
        assert!(parse_coefficients("[1, [0]]").is_err());
    }

    #[test]
    fn rejects_bad_tolerances() {
        let cli = Cli::try_parse_from(["detmap", "--tol=-1", "gen", "--dim", "2", "--count", "1"])
            .unwrap();
        assert!(matches!(execute(&cli), Err(Error::Input(_))));
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["detmap", "frobnicate"], &mut out, &mut err), 2);
        assert!(out.is_empty());
        assert!(!err.is_empty());
    }

    #[test]
    fn gen_writes_to_stdout() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            [
                "detmap",
                "gen",
                "--dim",
                "2",
                "--count",
                "2",
                "--mode",
                "independent",
                "--seed",
                "1",
            ],
            &mut out,
            &mut err,
        );
        assert_eq!(code, 0);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\"dimension\": 2"));
        let (mut out2, mut err2) = (Vec::new(), Vec::new());
        run(
            [
                "detmap",
                "gen",
                "--dim",
                "2",
                "--count",
                "2",
                "--mode",
                "independent",
                "--seed",
                "1",
            ],
            &mut out2,
            &mut err2,
        );
        assert_eq!(text.as_bytes(), out2.as_slice());
    }

    #[test]
    fn gen_rejects_oversized_independent_sets() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            [
                "detmap",
                "gen",
                "--dim",
                "2",
                "--count",
                "3",
                "--mode",
                "independent",
            ],
            &mut out,
            &mut err,
        );
        assert_eq!(code, 2);
        assert!(out.is_empty());
    }
}
