//! Command-line front end: `roc`, `profile` and `audit`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use glrt_core::{
    amplify_profile, asymptotic_gdp_mu, symmetrize, MechanismParams, PrivacyProfile, RocCurve,
};

use crate::audit::{self, Adversary, AuditConfig, Direction, EmpiricalRoc};
use crate::table::{CurvePointTable, Report, TableMeta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "glrt",
    version,
    about = "Gaussian mechanism privacy against magnitude-testing adversaries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample an ROC curve.
    Roc(RocArgs),
    /// Compute the (ε, δ) privacy profile of a curve.
    Profile(ProfileArgs),
    /// Run the Monte Carlo membership-inference game and compare to theory.
    Audit(AuditArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MechanismArgs {
    /// ℓ₂ sensitivity Δ of the query.
    #[arg(long, default_value_t = 1.0)]
    pub sensitivity: f64,
    /// Noise variance σ².
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Query dimension d.
    #[arg(long, default_value_t = 1)]
    pub dim: u32,
    /// Number of composed releases N.
    #[arg(long, default_value_t = 1)]
    pub rounds: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveChoice {
    Glrt,
    GlrtPrime,
    GlrtSym,
    Npo,
    GdpAsymptotic,
}

impl CurveChoice {
    fn name(self) -> &'static str {
        match self {
            CurveChoice::Glrt => "glrt",
            CurveChoice::GlrtPrime => "glrt-prime",
            CurveChoice::GlrtSym => "glrt-sym",
            CurveChoice::Npo => "npo",
            CurveChoice::GdpAsymptotic => "gdp-asymptotic",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AuditAdversary {
    Glrt,
    Npo,
}

#[derive(Args, Debug)]
pub struct RocArgs {
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    #[arg(long, value_enum, default_value_t = CurveChoice::GlrtSym)]
    pub adversary: CurveChoice,
    /// Number of evenly spaced x values, endpoints included.
    #[arg(long, default_value_t = 512)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    /// Curve to convert; must be symmetric (glrt-sym, npo or gdp-asymptotic).
    #[arg(long, value_enum, default_value_t = CurveChoice::GlrtSym)]
    pub adversary: CurveChoice,
    #[arg(long, default_value_t = 0.0)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 100)]
    pub eps_points: usize,
    /// Poisson subsampling rate applied to the profile.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    #[arg(long, value_enum, default_value_t = AuditAdversary::Glrt)]
    pub adversary: AuditAdversary,
    #[arg(long, default_value_t = audit::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = audit::DEFAULT_CUTOFFS)]
    pub cutoffs: usize,
    #[arg(long, default_value_t = audit::DEFAULT_SEED)]
    pub seed: u64,
    /// Largest accepted sup-distance between empirical and theoretical curves.
    #[arg(long, default_value_t = 0.04)]
    pub tolerance: f64,
    /// δ at which the theoretical ε is reported.
    #[arg(long, default_value_t = 1e-2)]
    pub delta: f64,
    /// Samples of each theoretical curve in the output.
    #[arg(long, default_value_t = 512)]
    pub points: usize,
}

/// Captured result of one invocation.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Outcome {
            stderr: format!("error: {msg}\n"),
            code: EXIT_USAGE,
            ..Default::default()
        }
    }

    fn failure(msg: impl std::fmt::Display) -> Self {
        Outcome {
            stderr: format!("error: {msg}\n"),
            code: EXIT_FAILURE,
            ..Default::default()
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome {
                    stdout: text,
                    ..Default::default()
                }
            } else {
                Outcome {
                    stderr: text,
                    code,
                    ..Default::default()
                }
            }
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Roc(a) => cmd_roc(&a),
        Command::Profile(a) => cmd_profile(&a),
        Command::Audit(a) => cmd_audit(&a),
    }
}

impl MechanismArgs {
    fn params(&self) -> Result<MechanismParams, Outcome> {
        MechanismParams::new(self.sensitivity, self.sigma2, self.dim, self.rounds)
            .map_err(Outcome::usage)
    }

    fn meta(&self, kind: String) -> TableMeta {
        TableMeta {
            kind,
            sensitivity: self.sensitivity,
            sigma2: self.sigma2,
            dim: self.dim,
            rounds: self.rounds,
            gamma: None,
            seed: None,
        }
    }

    fn render_table(&self, table: &CurvePointTable) -> String {
        match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json() + "\n",
        }
    }

    fn render_report(&self, report: &Report) -> String {
        match self.format {
            Format::Csv => report.to_csv(),
            Format::Json => report.to_json() + "\n",
        }
    }
}

fn build_curve(params: &MechanismParams, choice: CurveChoice) -> Result<RocCurve, Outcome> {
    Ok(match choice {
        CurveChoice::Glrt => RocCurve::glrt(params),
        CurveChoice::GlrtPrime => RocCurve::glrt_prime(params),
        CurveChoice::GlrtSym => symmetrize(&RocCurve::glrt(params), &RocCurve::glrt_prime(params))
            .map_err(Outcome::failure)?,
        CurveChoice::Npo => RocCurve::npo(params),
        CurveChoice::GdpAsymptotic => RocCurve::asymptotic_gdp(asymptotic_gdp_mu(params)),
    })
}

/// Largest gap between the exact GLRT curve and its Gaussian limit.
pub fn clt_gap(params: &MechanismParams, n: usize) -> f64 {
    let exact = RocCurve::glrt(params);
    let limit = RocCurve::asymptotic_gdp(asymptotic_gdp_mu(params));
    (0..=n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (exact.eval(x) - limit.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

fn clt_diagnostic(params: &MechanismParams) -> String {
    format!(
        "note: sup-distance between the exact GLRT curve and its asymptotic GDP limit is {:.6}\n",
        clt_gap(params, 1000)
    )
}

pub fn cmd_roc(args: &RocArgs) -> Outcome {
    let params = match args.mechanism.params() {
        Ok(p) => p,
        Err(o) => return o,
    };
    if args.points < 2 {
        return Outcome::usage("--points must be at least 2");
    }
    let curve = match build_curve(&params, args.adversary) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let table = CurvePointTable::new(
        args.mechanism.meta(args.adversary.name().into()),
        ["x", "y"],
        curve.sample(args.points),
    );
    let stderr = if args.adversary == CurveChoice::GdpAsymptotic {
        clt_diagnostic(&params)
    } else {
        String::new()
    };
    Outcome {
        stdout: args.mechanism.render_table(&table),
        stderr,
        code: EXIT_OK,
    }
}

pub fn cmd_profile(args: &ProfileArgs) -> Outcome {
    let params = match args.mechanism.params() {
        Ok(p) => p,
        Err(o) => return o,
    };
    if matches!(args.adversary, CurveChoice::Glrt | CurveChoice::GlrtPrime) {
        return Outcome::usage(format!(
            "--adversary {} is one-sided; profiles need a symmetric curve (use glrt-sym)",
            args.adversary.name()
        ));
    }
    if !(args.eps_min >= 0.0) || !(args.eps_max > args.eps_min) || !args.eps_max.is_finite() {
        return Outcome::usage("need 0 <= --eps-min < --eps-max");
    }
    if args.eps_points < 2 {
        return Outcome::usage("--eps-points must be at least 2");
    }
    if let Some(g) = args.gamma {
        if !(g > 0.0 && g <= 1.0) {
            return Outcome::usage("--gamma must lie in (0, 1]");
        }
    }
    let curve = match build_curve(&params, args.adversary) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let profile = match PrivacyProfile::new(curve) {
        Ok(p) => p,
        Err(e) => return Outcome::failure(e),
    };
    let mut grid = match profile.grid(args.eps_min, args.eps_max, args.eps_points) {
        Ok(g) => g,
        Err(e) => return Outcome::failure(e),
    };
    let mut meta = args
        .mechanism
        .meta(format!("profile-{}", args.adversary.name()));
    // γ = 1 is the identity and produces the same output as no --gamma.
    if let Some(g) = args.gamma.filter(|&g| g < 1.0) {
        grid = match amplify_profile(&grid, g) {
            Ok(a) => a,
            Err(e) => return Outcome::failure(e),
        };
        meta.gamma = Some(g);
    }
    let table = CurvePointTable::new(
        meta,
        ["epsilon", "delta"],
        grid.iter().map(|p| (p.epsilon, p.delta)),
    );
    let stderr = if args.adversary == CurveChoice::GdpAsymptotic {
        clt_diagnostic(&params)
    } else {
        String::new()
    };
    Outcome {
        stdout: args.mechanism.render_table(&table),
        stderr,
        code: EXIT_OK,
    }
}

/// Half-width of a 2.5-standard-error binomial band at `p = ½`.
pub fn binomial_band(trials: usize) -> f64 {
    2.5 * (0.25 / trials as f64).sqrt()
}

pub fn cmd_audit(args: &AuditArgs) -> Outcome {
    let params = match args.mechanism.params() {
        Ok(p) => p,
        Err(o) => return o,
    };
    if args.trials == 0 {
        return Outcome::usage("--trials must be at least 1");
    }
    if args.cutoffs < 2 {
        return Outcome::usage("--cutoffs must be at least 2");
    }
    if !(args.tolerance >= 0.0) {
        return Outcome::usage("--tolerance must be nonnegative");
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Outcome::usage("--delta must lie in (0, 1)");
    }
    if args.points < 2 {
        return Outcome::usage("--points must be at least 2");
    }
    let adversary = match args.adversary {
        AuditAdversary::Glrt => Adversary::GlrtMagnitude,
        AuditAdversary::Npo => Adversary::NpoLikelihood,
    };
    let config = AuditConfig {
        params,
        trials: args.trials,
        cutoffs: args.cutoffs,
        seed: args.seed,
        adversary,
    };

    let mut stderr = String::new();
    let band = binomial_band(args.trials);
    if band > args.tolerance {
        stderr.push_str(&format!(
            "warning: with {} trials the sampling band (±{band:.3}) is wider than the tolerance {}\n",
            args.trials, args.tolerance
        ));
    }

    let name = match args.adversary {
        AuditAdversary::Glrt => "glrt",
        AuditAdversary::Npo => "npo",
    };
    let mut report = Report::default();
    let sup = match audit::run_game(&config) {
        Ok((forward, reverse)) => {
            let mut worst: f64 = 0.0;
            for (emp, label) in [(&forward, "forward"), (&reverse, "reverse")] {
                let theory = audit::theory_for(&params, adversary, emp.direction);
                let d = audit::compare_to_theory(emp, &theory);
                worst = worst.max(d);
                report.tables.push(empirical_table(args, name, label, emp));
                let mut meta = args.mechanism.meta(format!("theory-{name}-{label}"));
                meta.seed = None;
                report.tables.push(CurvePointTable::new(
                    meta,
                    ["x", "y"],
                    theory.sample(args.points),
                ));
                report.number(&format!("sup_distance_{label}"), d);
            }
            report.number("negatives", forward.negatives as f64);
            report.number("positives", forward.positives as f64);
            worst
        }
        Err(e) => {
            stderr.push_str(&format!(
                "warning: {e}; reporting the largest possible distance\n"
            ));
            1.0
        }
    };
    report.number("sup_distance", sup);
    report.number("tolerance", args.tolerance);

    let curve = match adversary {
        Adversary::GlrtMagnitude => build_curve(&params, CurveChoice::GlrtSym),
        Adversary::NpoLikelihood => build_curve(&params, CurveChoice::Npo),
    };
    let eps = curve
        .and_then(|c| PrivacyProfile::new(c).map_err(Outcome::failure))
        .and_then(|p| p.epsilon(args.delta).map_err(Outcome::failure));
    report.number("delta", args.delta);
    match eps {
        Ok(e) => report.number("epsilon", e.epsilon),
        Err(o) => {
            stderr.push_str(o.stderr.replace("error:", "warning: no epsilon:").as_str());
            report.text("epsilon", "none");
        }
    }
    let pass = sup <= args.tolerance;
    report.text("status", if pass { "pass" } else { "fail" });

    Outcome {
        stdout: args.mechanism.render_report(&report),
        stderr,
        code: if pass { EXIT_OK } else { EXIT_TOLERANCE },
    }
}

fn empirical_table(
    args: &AuditArgs,
    name: &str,
    label: &str,
    emp: &EmpiricalRoc,
) -> CurvePointTable {
    let mut meta = args.mechanism.meta(format!("empirical-{name}-{label}"));
    meta.seed = Some(args.seed);
    debug_assert!(matches!(
        (label, emp.direction),
        ("forward", Direction::NullIsZero) | ("reverse", Direction::NullIsDelta)
    ));
    CurvePointTable::new(
        meta,
        ["x", "y"],
        emp.points.iter().map(|p| (p.p_false, p.p_detect)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Outcome {
        run_from(std::iter::once("glrt").chain(args.iter().copied()))
    }

    #[test]
    fn two_points_are_the_corners() {
        let o = run(&["roc", "--points", "2", "--adversary", "npo"]);
        assert_eq!(o.code, 0);
        let rows: Vec<&str> = o.stdout.lines().skip(2).collect();
        assert_eq!(rows, ["0.0,0.0", "1.0,1.0"]);
    }

    #[test]
    fn zero_sensitivity_is_the_diagonal() {
        let o = run(&["roc", "--sensitivity", "0", "--points", "5"]);
        assert_eq!(o.code, 0);
        for row in o.stdout.lines().skip(2) {
            let (x, y) = row.split_once(',').unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(&["roc", "--sigma2", "-1"]).code, EXIT_USAGE);
        assert_eq!(run(&["roc", "--points", "1"]).code, EXIT_USAGE);
        assert_eq!(run(&["roc", "--adversary", "bogus"]).code, EXIT_USAGE);
        assert_eq!(run(&["profile", "--adversary", "glrt"]).code, EXIT_USAGE);
        assert_eq!(run(&["profile", "--gamma", "0"]).code, EXIT_USAGE);
        assert_eq!(run(&["audit", "--trials", "0"]).code, EXIT_USAGE);
        assert_eq!(run(&["audit", "--adversary", "glrt-sym"]).code, EXIT_USAGE);
        let o = run(&["roc", "--dim", "0"]);
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stdout.is_empty());
    }

    #[test]
    fn gamma_one_changes_nothing() {
        let base = ["profile", "--sensitivity", "0.5", "--eps-points", "12"];
        let a = run(&base);
        let mut with = base.to_vec();
        with.extend(["--gamma", "1"]);
        assert_eq!(a, run(&with));
    }

    #[test]
    fn asymptotic_curve_prints_diagnostic() {
        let o = run(&[
            "roc",
            "--adversary",
            "gdp-asymptotic",
            "--dim",
            "30",
            "--rounds",
            "10",
            "--sigma2",
            "10",
        ]);
        assert_eq!(o.code, 0);
        assert!(o.stderr.contains("sup-distance"));
    }

    #[test]
    fn single_trial_audit_warns_and_fails_tolerance() {
        let o = run(&["audit", "--trials", "1"]);
        assert_eq!(o.code, EXIT_TOLERANCE);
        assert!(o.stderr.contains("warning"));
        assert!(o.stdout.contains("sup_distance=1.0"));
    }
}
