//! Command-line front end.
//!
//! One binary, seven subcommands: `compute` runs a scheme on a profile,
//! `compare` ranks two lotteries under one weak order, `verify` checks a
//! lottery for efficiency, `audit` / `audit-sp` check one agent's incentives,
//! `search` sweeps every small profile for violations, and `paper-check`
//! replays the embedded worked examples.
//!
//! Exit codes: [`EXIT_OK`] when the command succeeds and any checked property
//! holds, [`EXIT_VIOLATION`] when a checked property is violated (a witness is
//! printed), [`EXIT_ERROR`] on usage or input errors.

use std::ffi::OsString;
use std::io::Read;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{
    audit_participation, audit_strategyproofness, AuditVerdict, ParticipationLevel,
    ParticipationNotion,
};
use crate::efficiency::{ex_post_efficient, sd_efficient};
use crate::esr::esr;
use crate::extensions::Extension;
use crate::fixtures::fixtures;
use crate::mr::mr;
use crate::prefs::{AgentId, Lottery, Profile};
use crate::rules::Rule;
use crate::search::{search, Property, RuleFamily, SearchSpec, Shard};
use crate::Budgets;

/// Command ran; any checked property holds.
pub const EXIT_OK: u8 = 0;
/// Usage or input error (bad flags, unreadable profile, malformed literal).
pub const EXIT_ERROR: u8 = 1;
/// Command ran; the checked property is violated and a witness was printed.
pub const EXIT_VIOLATION: u8 = 2;

/// Parse `args` (including the program name) and run the selected command,
/// printing to stdout/stderr. Returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // `--help` and `--version` arrive as errors but are not failures.
            let code = if err.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli.command, &Budgets::from_env()) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            outcome.code
        }
        Err(message) => {
            eprintln!("error: {message}");
            EXIT_ERROR
        }
    }
}

/// Everything a command produces, separated from the printing so tests can
/// assert on it directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: EXIT_OK }
    }

    fn checked(stdout: String, holds: bool) -> Self {
        Outcome { stdout, code: if holds { EXIT_OK } else { EXIT_VIOLATION } }
    }
}

#[derive(Parser)]
#[command(
    name = "sds",
    version,
    about = "Exact-arithmetic social decision schemes: compute, compare, verify, audit, search."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scheme on a profile and print the resulting lottery.
    Compute(ComputeArgs),
    /// Rank two lotteries under one weak order.
    Compare(CompareArgs),
    /// Check a lottery for efficiency on a profile.
    Verify(VerifyArgs),
    /// Check whether voting beats abstaining for an agent.
    Audit(AuditArgs),
    /// Check whether any misreport beats the truth for an agent.
    AuditSp(AuditSpArgs),
    /// Sweep every profile up to a size bound, hunting violations.
    Search(SearchArgs),
    /// Replay the embedded worked examples.
    PaperCheck(PaperCheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Exact fractions, re-parseable by `--lottery` and `compare`.
    Rational,
    /// Six decimal places, for eyeballing.
    Decimal,
    /// One machine-readable JSON document.
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExtensionArg {
    /// Stochastic dominance (partial: incomparable is a possible answer).
    Sd,
    /// Downward lexicographic (complete).
    Dl,
}

impl From<ExtensionArg> for Extension {
    fn from(arg: ExtensionArg) -> Extension {
        match arg {
            ExtensionArg::Sd => Extension::Sd,
            ExtensionArg::Dl => Extension::Dl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NotionArg {
    /// Abstaining is never strictly better than voting.
    Participation,
    /// Voting is always at least as good as abstaining.
    Strong,
    /// Strong, plus a strict gain whenever any strict gain is possible.
    VeryStrong,
}

impl From<NotionArg> for ParticipationLevel {
    fn from(arg: NotionArg) -> ParticipationLevel {
        match arg {
            NotionArg::Participation => ParticipationLevel::Participation,
            NotionArg::Strong => ParticipationLevel::Strong,
            NotionArg::VeryStrong => ParticipationLevel::VeryStrong,
        }
    }
}

/// Rule selection shared by `compute`, `audit`, and `audit-sp`.
#[derive(Debug, Args)]
struct RuleSelection {
    /// Scheme: constant | sd | rsd | pp | bo | mr | esr (sd takes a
    /// permutation, either via --permutation or inline as sd:1,2,3).
    #[arg(long)]
    rule: String,

    /// Picking order for sd, e.g. 1,2,3.
    #[arg(long)]
    permutation: Option<String>,
}

impl RuleSelection {
    fn resolve(&self) -> Result<Rule, String> {
        match &self.permutation {
            Some(perm) => {
                if self.rule != "sd" {
                    return Err(format!(
                        "--permutation only applies to --rule sd, not {:?}",
                        self.rule
                    ));
                }
                Rule::from_spec(&format!("sd:{perm}")).map_err(|e| e.to_string())
            }
            None => {
                if self.rule == "sd" {
                    return Err(
                        "serial dictatorship needs a picking order: \
                         --permutation 1,2,3 (or --rule sd:1,2,3)"
                            .to_string(),
                    );
                }
                Rule::from_spec(&self.rule).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    rule: RuleSelection,

    /// Profile file, or - for stdin.
    #[arg(long)]
    profile: String,

    /// Also print the recursion tree (mr only).
    #[arg(long)]
    tree: bool,

    /// Also print the event trace (esr only).
    #[arg(long)]
    trace: bool,

    #[arg(long, value_enum, default_value = "rational")]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    /// Weak order literal, best class first, e.g. "a, {b,c}, d".
    #[arg(long)]
    order: String,

    #[arg(long, value_enum)]
    extension: ExtensionArg,

    /// First lottery literal, e.g. "a:1/2,b:1/2".
    #[arg(long)]
    left: String,

    /// Second lottery literal.
    #[arg(long)]
    right: String,

    #[arg(long, value_enum, default_value = "rational")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Profile file, or - for stdin.
    #[arg(long)]
    profile: String,

    /// Lottery literal to check, e.g. "a:1/2,b:1/2".
    #[arg(long)]
    lottery: String,

    /// expost: support is Pareto-optimal; sd: no lottery sd-dominates it.
    #[arg(long, value_enum)]
    property: EfficiencyProperty,

    #[arg(long, value_enum, default_value = "rational")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EfficiencyProperty {
    Expost,
    Sd,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    rule: RuleSelection,

    /// Profile file, or - for stdin.
    #[arg(long)]
    profile: String,

    /// Agent to audit.
    #[arg(long, conflicts_with = "all_agents")]
    agent: Option<u32>,

    /// Audit every agent in turn.
    #[arg(long)]
    all_agents: bool,

    #[arg(long, value_enum)]
    notion: NotionArg,

    #[arg(long, value_enum)]
    extension: ExtensionArg,

    #[arg(long, value_enum, default_value = "rational")]
    format: Format,
}

#[derive(Args)]
struct AuditSpArgs {
    #[command(flatten)]
    rule: RuleSelection,

    /// Profile file, or - for stdin.
    #[arg(long)]
    profile: String,

    /// Agent to audit.
    #[arg(long)]
    agent: u32,

    #[arg(long, value_enum)]
    extension: ExtensionArg,

    #[arg(long, value_enum, default_value = "rational")]
    format: Format,
}

#[derive(Args)]
struct SearchArgs {
    /// Rule family: a rule spec, or sd (all permutations at each size) or
    /// sd:identity.
    #[arg(long)]
    rule: String,

    /// Property to check on every instance.
    #[arg(long, value_enum)]
    property: PropertyArg,

    /// Preference extension (required for the participation and
    /// strategyproofness properties, rejected for the efficiency ones).
    #[arg(long, value_enum)]
    extension: Option<ExtensionArg>,

    #[arg(long)]
    max_agents: usize,

    #[arg(long)]
    max_alts: usize,

    /// Check only the k-th of K interleaved slices, e.g. 2/4.
    #[arg(long)]
    shard: Option<String>,

    /// Stop after this many instances.
    #[arg(long)]
    budget: Option<u64>,

    /// Iterate order tuples even for anonymous rules (the default quotients
    /// anonymous searches by agent renaming).
    #[arg(long)]
    tuples: bool,

    #[arg(long, value_enum, default_value = "rational")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Participation,
    StrongParticipation,
    VeryStrongParticipation,
    Strategyproofness,
    ExPostEfficiency,
    SdEfficiency,
}

#[derive(Args)]
struct PaperCheckArgs {
    /// List the fixture ids and descriptions instead of running them.
    #[arg(long)]
    list: bool,
}

fn execute(command: Command, budgets: &Budgets) -> Result<Outcome, String> {
    match command {
        Command::Compute(args) => compute_command(args, budgets),
        Command::Compare(args) => compare_command(args),
        Command::Verify(args) => verify_command(args),
        Command::Audit(args) => audit_command(args, budgets),
        Command::AuditSp(args) => audit_sp_command(args, budgets),
        Command::Search(args) => search_command(args, budgets),
        Command::PaperCheck(args) => paper_check_command(args, budgets),
    }
}

/// Read a profile from a file path, or from stdin when the path is `-`.
fn load_profile(path: &str) -> Result<Profile, String> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        buf
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?
    };
    Profile::parse(&text).map_err(|e| format!("{path}: {e}"))
}

fn parse_agent(id: u32) -> Result<AgentId, String> {
    AgentId::new(id).map_err(|e| e.to_string())
}

fn render_lottery(lottery: &Lottery, profile: &Profile, format: Format) -> String {
    match format {
        Format::Rational | Format::Json => lottery.render_rational(profile),
        Format::Decimal => lottery.render_decimal(profile),
    }
}

fn compute_command(args: ComputeArgs, budgets: &Budgets) -> Result<Outcome, String> {
    let rule = args.rule.resolve()?;
    let profile = load_profile(&args.profile)?;
    if args.tree && rule != Rule::MaximalRecursive {
        return Err("--tree only applies to --rule mr".to_string());
    }
    if args.trace && rule != Rule::EgalitarianReservation {
        return Err("--trace only applies to --rule esr".to_string());
    }
    let (lottery, extra) = if args.tree {
        let (lottery, tree) = mr(&profile);
        (lottery, Some(("tree", tree.render_tree(&profile))))
    } else if args.trace {
        let (lottery, trace) = esr(&profile);
        (lottery, Some(("trace", trace.render(&profile))))
    } else {
        (rule.compute(&profile, budgets).map_err(|e| e.to_string())?, None)
    };
    let stdout = match args.format {
        Format::Rational | Format::Decimal => {
            let mut out = render_lottery(&lottery, &profile, args.format);
            out.push('\n');
            if let Some((_, text)) = &extra {
                out.push_str(text);
            }
            out
        }
        Format::Json => {
            let mut value = serde_json::json!({
                "rule": rule.to_string(),
                "lottery": lottery.to_json(&profile),
            });
            if let Some((key, text)) = &extra {
                value
                    .as_object_mut()
                    .expect("object literal")
                    .insert((*key).to_string(), (*text).clone().into());
            }
            format!("{value}\n")
        }
    };
    Ok(Outcome::ok(stdout))
}

fn compare_command(args: CompareArgs) -> Result<Outcome, String> {
    // The order literal doubles as the alternative universe for the two
    // lottery literals.
    let profile = Profile::parse(&format!("1: {}\n", args.order))
        .map_err(|e| format!("--order: {e}"))?;
    let agent = profile.agents().next().expect("one agent by construction");
    let order = profile.order(agent).expect("agent just listed");
    let left = Lottery::parse(&args.left, &profile).map_err(|e| format!("--left: {e}"))?;
    let right = Lottery::parse(&args.right, &profile).map_err(|e| format!("--right: {e}"))?;
    let extension = Extension::from(args.extension);
    let comparison = extension.compare(order, &left, &right).map_err(|e| e.to_string())?;
    let stdout = match args.format {
        Format::Rational | Format::Decimal => format!("{comparison}\n"),
        Format::Json => {
            let value = serde_json::json!({
                "extension": extension.to_string(),
                "left": left.to_json(&profile),
                "right": right.to_json(&profile),
                "comparison": comparison.to_string(),
            });
            format!("{value}\n")
        }
    };
    Ok(Outcome::ok(stdout))
}

fn verify_command(args: VerifyArgs) -> Result<Outcome, String> {
    let profile = load_profile(&args.profile)?;
    let lottery = Lottery::parse(&args.lottery, &profile).map_err(|e| format!("--lottery: {e}"))?;
    let verdict = match args.property {
        EfficiencyProperty::Expost => ex_post_efficient(&profile, &lottery),
        EfficiencyProperty::Sd => sd_efficient(&profile, &lottery),
    }
    .map_err(|e| e.to_string())?;
    let stdout = match args.format {
        Format::Rational | Format::Decimal => verdict.describe(&profile),
        Format::Json => format!("{}\n", verdict.to_json(&profile)),
    };
    Ok(Outcome::checked(stdout, verdict.efficient))
}

/// Render one or many audit verdicts and fold their outcomes into one code.
fn render_verdicts(
    verdicts: &[AuditVerdict],
    profile: &Profile,
    format: Format,
) -> Outcome {
    let holds = verdicts.iter().all(|v| v.holds);
    let stdout = match format {
        Format::Rational | Format::Decimal => {
            verdicts.iter().map(|v| v.describe(profile)).collect::<Vec<_>>().join("")
        }
        Format::Json => {
            let items: Vec<serde_json::Value> =
                verdicts.iter().map(|v| v.to_json(profile)).collect();
            if items.len() == 1 {
                format!("{}\n", items[0])
            } else {
                format!("{}\n", serde_json::Value::Array(items))
            }
        }
    };
    Outcome::checked(stdout, holds)
}

fn audit_command(args: AuditArgs, budgets: &Budgets) -> Result<Outcome, String> {
    let rule = args.rule.resolve()?;
    let profile = load_profile(&args.profile)?;
    let notion = ParticipationNotion {
        level: args.notion.into(),
        extension: args.extension.into(),
    };
    let agents: Vec<AgentId> = match (args.agent, args.all_agents) {
        (Some(id), false) => vec![parse_agent(id)?],
        (None, true) => profile.agents().collect(),
        (None, false) => return Err("pass --agent <i> or --all-agents".to_string()),
        (Some(_), true) => unreachable!("clap rejects the conflict"),
    };
    let mut verdicts = Vec::new();
    for agent in agents {
        verdicts
            .push(audit_participation(&rule, &profile, agent, notion, budgets)
                .map_err(|e| e.to_string())?);
    }
    Ok(render_verdicts(&verdicts, &profile, args.format))
}

fn audit_sp_command(args: AuditSpArgs, budgets: &Budgets) -> Result<Outcome, String> {
    let rule = args.rule.resolve()?;
    let profile = load_profile(&args.profile)?;
    let agent = parse_agent(args.agent)?;
    let extension = Extension::from(args.extension);
    let verdict = audit_strategyproofness(&rule, &profile, agent, extension, budgets)
        .map_err(|e| e.to_string())?;
    Ok(render_verdicts(&[verdict], &profile, args.format))
}

fn build_property(arg: PropertyArg, extension: Option<Extension>) -> Result<Property, String> {
    let lifted = |level: ParticipationLevel| -> Result<Property, String> {
        let extension = extension.ok_or_else(|| {
            "this property needs --extension sd or --extension dl".to_string()
        })?;
        Ok(Property::Participation(ParticipationNotion { level, extension }))
    };
    match arg {
        PropertyArg::Participation => lifted(ParticipationLevel::Participation),
        PropertyArg::StrongParticipation => lifted(ParticipationLevel::Strong),
        PropertyArg::VeryStrongParticipation => lifted(ParticipationLevel::VeryStrong),
        PropertyArg::Strategyproofness => {
            let extension = extension.ok_or_else(|| {
                "this property needs --extension sd or --extension dl".to_string()
            })?;
            Ok(Property::Strategyproofness(extension))
        }
        PropertyArg::ExPostEfficiency | PropertyArg::SdEfficiency => {
            if extension.is_some() {
                return Err("--extension does not apply to the efficiency properties".to_string());
            }
            Ok(match arg {
                PropertyArg::ExPostEfficiency => Property::ExPostEfficiency,
                _ => Property::SdEfficiency,
            })
        }
    }
}

fn search_command(args: SearchArgs, budgets: &Budgets) -> Result<Outcome, String> {
    let family = RuleFamily::from_spec(&args.rule).map_err(|e| e.to_string())?;
    let property = build_property(args.property, args.extension.map(Extension::from))?;
    let mut spec = SearchSpec::new(family, property, args.max_agents, args.max_alts);
    if let Some(shard) = &args.shard {
        spec.shard = shard.parse::<Shard>().map_err(|e| format!("--shard: {e}"))?;
    }
    spec.budget = args.budget;
    if args.tuples {
        spec.canonicalize = false;
    }
    let report = search(&spec, budgets).map_err(|e| e.to_string())?;
    let stdout = match args.format {
        Format::Rational | Format::Decimal => report.render(&spec),
        Format::Json => format!("{}\n", report.to_json(&spec)),
    };
    Ok(Outcome::checked(stdout, report.violations.is_empty()))
}

fn paper_check_command(args: PaperCheckArgs, budgets: &Budgets) -> Result<Outcome, String> {
    let fixtures = fixtures();
    let mut stdout = String::new();
    if args.list {
        for fixture in &fixtures {
            stdout.push_str(&format!("{:<24} {}\n", fixture.id, fixture.description));
        }
        return Ok(Outcome::ok(stdout));
    }
    let mut failed = 0usize;
    for fixture in &fixtures {
        let outcome = (fixture.run)(budgets);
        let status = if outcome.passed() { "PASS" } else { "FAIL" };
        stdout.push_str(&format!("{status} {}: {}\n", fixture.id, fixture.description));
        for note in &outcome.notes {
            stdout.push_str(&format!("  note: {note}\n"));
        }
        for failure in &outcome.failures {
            stdout.push_str(&format!("  mismatch: {failure}\n"));
        }
        if !outcome.passed() {
            failed += 1;
        }
    }
    stdout.push_str(&format!(
        "{} of {} fixtures passed\n",
        fixtures.len() - failed,
        fixtures.len()
    ));
    Ok(Outcome::checked(stdout, failed == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<Outcome, String> {
        let cli = Cli::try_parse_from(args).map_err(|e| e.to_string())?;
        execute(cli.command, &Budgets::default())
    }

    fn profile_file(text: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut file = tempfile::NamedTempFile::new().expect("temp file");
        file.write_all(text.as_bytes()).expect("write profile");
        file
    }

    #[test]
    fn compute_prints_reparseable_rational_lottery() {
        let file = profile_file("1: a, b\n2: b, a\n");
        let path = file.path().to_str().unwrap();
        let out = exec(&["sds", "compute", "--rule", "pp", "--profile", path]).unwrap();
        assert_eq!(out.code, EXIT_OK);
        assert_eq!(out.stdout, "a: 1/2, b: 1/2\n");
        let profile = Profile::parse("1: a, b\n2: b, a\n").unwrap();
        let reparsed = Lottery::parse(out.stdout.trim(), &profile).unwrap();
        assert_eq!(reparsed, Rule::ProportionalPlurality.compute(&profile, &Budgets::default()).unwrap());
    }

    #[test]
    fn compute_serial_dictatorship_requires_permutation() {
        let file = profile_file("1: a, b\n2: b, a\n");
        let path = file.path().to_str().unwrap();
        let err = exec(&["sds", "compute", "--rule", "sd", "--profile", path]).unwrap_err();
        assert!(err.contains("--permutation"), "unexpected message: {err}");

        let out = exec(&[
            "sds", "compute", "--rule", "sd", "--permutation", "2,1", "--profile", path,
        ])
        .unwrap();
        assert_eq!(out.stdout, "a: 0, b: 1\n");

        // The inline form is equivalent.
        let inline = exec(&["sds", "compute", "--rule", "sd:2,1", "--profile", path]).unwrap();
        assert_eq!(inline.stdout, out.stdout);
    }

    #[test]
    fn compute_rejects_permutation_for_other_rules() {
        let file = profile_file("1: a, b\n");
        let path = file.path().to_str().unwrap();
        let err = exec(&[
            "sds", "compute", "--rule", "pp", "--permutation", "1", "--profile", path,
        ])
        .unwrap_err();
        assert!(err.contains("only applies to --rule sd"), "unexpected message: {err}");
    }

    #[test]
    fn compute_tree_and_trace_are_rule_specific() {
        let file = profile_file(crate::fixtures::MR_THREE_AGENT);
        let path = file.path().to_str().unwrap();
        let out = exec(&["sds", "compute", "--rule", "mr", "--tree", "--profile", path]).unwrap();
        assert!(out.stdout.starts_with("a: 5/9, b: 0, c: 4/9, d: 0, e: 0\n"));
        assert!(out.stdout.contains("└─"), "tree missing: {}", out.stdout);

        let err =
            exec(&["sds", "compute", "--rule", "pp", "--tree", "--profile", path]).unwrap_err();
        assert!(err.contains("--tree only applies"), "unexpected message: {err}");

        let trace =
            exec(&["sds", "compute", "--rule", "esr", "--trace", "--profile", path]).unwrap();
        assert!(trace.stdout.contains("t="), "trace missing: {}", trace.stdout);

        let err =
            exec(&["sds", "compute", "--rule", "mr", "--trace", "--profile", path]).unwrap_err();
        assert!(err.contains("--trace only applies"), "unexpected message: {err}");
    }

    #[test]
    fn compute_json_carries_rule_and_lottery() {
        let file = profile_file("1: a, b\n2: b, a\n");
        let path = file.path().to_str().unwrap();
        let out = exec(&[
            "sds", "compute", "--rule", "rsd", "--profile", path, "--format", "json",
        ])
        .unwrap();
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["rule"], "rsd");
        assert_eq!(value["lottery"]["a"], "1/2");
    }

    #[test]
    fn compare_ranks_lotteries_under_an_order_literal() {
        let out = exec(&[
            "sds", "compare", "--order", "a, {b,c}", "--extension", "sd", "--left", "a:1",
            "--right", "b:1/2,c:1/2",
        ])
        .unwrap();
        assert_eq!(out.stdout, "strictly-prefers\n");
        assert_eq!(out.code, EXIT_OK);

        let incomparable = exec(&[
            "sds", "compare", "--order", "a, b, c", "--extension", "sd", "--left",
            "a:1/2,c:1/2", "--right", "b:1", "--format", "json",
        ])
        .unwrap();
        let value: serde_json::Value = serde_json::from_str(&incomparable.stdout).unwrap();
        assert_eq!(value["comparison"], "incomparable");
        assert_eq!(incomparable.code, EXIT_OK);

        let dl = exec(&[
            "sds", "compare", "--order", "a, b, c", "--extension", "dl", "--left",
            "a:1/2,c:1/2", "--right", "b:1",
        ])
        .unwrap();
        assert_eq!(dl.stdout, "strictly-prefers\n");
    }

    #[test]
    fn verify_reports_witness_and_violation_code() {
        let file = profile_file("1: a, b\n2: a, b\n");
        let path = file.path().to_str().unwrap();
        let bad = exec(&[
            "sds", "verify", "--profile", path, "--lottery", "a:1/2,b:1/2", "--property",
            "expost",
        ])
        .unwrap();
        assert_eq!(bad.code, EXIT_VIOLATION);
        assert!(bad.stdout.contains("inefficient"), "missing witness: {}", bad.stdout);

        let good = exec(&[
            "sds", "verify", "--profile", path, "--lottery", "a:1", "--property", "sd",
        ])
        .unwrap();
        assert_eq!(good.code, EXIT_OK);
        assert_eq!(good.stdout, "efficient\n");
    }

    #[test]
    fn audit_single_agent_and_all_agents() {
        let file = profile_file(crate::fixtures::ESR_FOUR_AGENT);
        let path = file.path().to_str().unwrap();
        let violated = exec(&[
            "sds", "audit", "--rule", "esr", "--profile", path, "--agent", "1", "--notion",
            "very-strong", "--extension", "sd",
        ])
        .unwrap();
        assert_eq!(violated.code, EXIT_VIOLATION);
        assert!(violated.stdout.contains("violated"), "missing verdict: {}", violated.stdout);

        let all = exec(&[
            "sds", "audit", "--rule", "esr", "--profile", path, "--all-agents", "--notion",
            "strong", "--extension", "sd", "--format", "json",
        ])
        .unwrap();
        assert_eq!(all.code, EXIT_OK);
        let value: serde_json::Value = serde_json::from_str(&all.stdout).unwrap();
        assert_eq!(value.as_array().map(|a| a.len()), Some(4));

        let neither = exec(&[
            "sds", "audit", "--rule", "esr", "--profile", path, "--notion", "strong",
            "--extension", "sd",
        ])
        .unwrap_err();
        assert!(neither.contains("--agent"), "unexpected message: {neither}");
    }

    #[test]
    fn audit_sp_finds_borda_manipulation() {
        let file = profile_file("1: a, b, c\n2: b, a, c\n");
        let path = file.path().to_str().unwrap();
        let out = exec(&[
            "sds", "audit-sp", "--rule", "bo", "--profile", path, "--agent", "1",
            "--extension", "sd",
        ])
        .unwrap();
        assert_eq!(out.code, EXIT_VIOLATION);
        assert!(out.stdout.contains("beneficial misreport"), "missing witness: {}", out.stdout);
    }

    #[test]
    fn search_clean_and_violating_sweeps() {
        let clean = exec(&[
            "sds", "search", "--rule", "mr", "--property", "very-strong-participation",
            "--extension", "sd", "--max-agents", "2", "--max-alts", "2",
        ])
        .unwrap();
        assert_eq!(clean.code, EXIT_OK);
        assert!(clean.stdout.contains("no violations"), "unexpected report: {}", clean.stdout);

        let dirty = exec(&[
            "sds", "search", "--rule", "pp", "--property", "ex-post-efficiency",
            "--max-agents", "2", "--max-alts", "2",
        ])
        .unwrap();
        assert_eq!(dirty.code, EXIT_VIOLATION);
        assert!(dirty.stdout.contains("violation"), "unexpected report: {}", dirty.stdout);
    }

    #[test]
    fn search_property_extension_pairing_is_enforced() {
        let missing = exec(&[
            "sds", "search", "--rule", "pp", "--property", "strategyproofness",
            "--max-agents", "2", "--max-alts", "2",
        ])
        .unwrap_err();
        assert!(missing.contains("--extension"), "unexpected message: {missing}");

        let extra = exec(&[
            "sds", "search", "--rule", "pp", "--property", "sd-efficiency", "--extension",
            "sd", "--max-agents", "2", "--max-alts", "2",
        ])
        .unwrap_err();
        assert!(extra.contains("does not apply"), "unexpected message: {extra}");
    }

    #[test]
    fn search_accepts_shard_and_budget() {
        let out = exec(&[
            "sds", "search", "--rule", "constant", "--property", "strong-participation",
            "--extension", "dl", "--max-agents", "2", "--max-alts", "2", "--shard", "1/2",
            "--budget", "3", "--format", "json",
        ])
        .unwrap();
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["instances_checked"], 3);
        assert_eq!(value["exhausted"], false);

        let err = exec(&[
            "sds", "search", "--rule", "constant", "--property", "participation",
            "--extension", "sd", "--max-agents", "2", "--max-alts", "2", "--shard", "5/2",
        ])
        .unwrap_err();
        assert!(err.contains("--shard"), "unexpected message: {err}");
    }

    #[test]
    fn paper_check_lists_and_passes() {
        let list = exec(&["sds", "paper-check", "--list"]).unwrap();
        assert_eq!(list.code, EXIT_OK);
        assert!(list.stdout.lines().count() >= 8, "too few fixtures: {}", list.stdout);
        assert!(list.stdout.contains("mr-three-agent"));

        let run = exec(&["sds", "paper-check"]).unwrap();
        assert_eq!(run.code, EXIT_OK, "fixtures failed:\n{}", run.stdout);
        assert!(run.stdout.contains("PASS mr-three-agent"));
        assert!(!run.stdout.contains("FAIL"), "unexpected failure:\n{}", run.stdout);
        assert!(run.stdout.contains("fixtures passed"));
    }

    #[test]
    fn run_maps_parse_failures_to_error_code() {
        assert_eq!(run(["sds", "no-such-command"]), EXIT_ERROR);
        assert_eq!(run(["sds", "compute", "--rule"]), EXIT_ERROR);
        assert_eq!(run(["sds", "--help"]), EXIT_OK);
        assert_eq!(run(["sds", "compute", "--help"]), EXIT_OK);
    }
}
