//! C ABI over the `sds` library.
//!
//! The surface is deliberately string-based: profiles, rules, lotteries, and
//! weak orders cross the boundary in the same literal syntax the CLI uses, and
//! results come back as freshly allocated C strings (free them with
//! [`sds_string_free`]). The only stateful object is the parsed profile,
//! handled through an opaque pointer.
//!
//! Every function returns an [`SdsStatus`]; on any non-OK status a
//! human-readable message is stored in thread-local storage and can be read
//! with [`sds_last_error`]. Out-parameters are written only on `SDS_STATUS_OK`.

// Pointer contracts are spelled out in each function's doc comment as plain
// prose, which cbindgen copies into the generated C header; a markdown
// "# Safety" heading would read as noise there.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use sds::audit::{
    audit_participation, audit_strategyproofness, AuditError, ParticipationLevel,
    ParticipationNotion,
};
use sds::efficiency::{ex_post_efficient, sd_efficient, EfficiencyError};
use sds::extensions::Extension;
use sds::prefs::{AgentId, Lottery, Profile};
use sds::rules::{Rule, RuleError};
use sds::search::SearchError;
use sds::Budgets;

/// Result of every call. `SDS_STATUS_OK` covers "the check ran", whether or
/// not the checked property holds — audit outcomes come back through the
/// `holds` out-parameter, not the status.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdsStatus {
    /// The call succeeded and all out-parameters are filled in.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A profile or lottery literal failed to parse.
    ParseError = 3,
    /// A rule spec, extension, level, or property name was not recognized.
    InvalidArgument = 4,
    /// The inputs parse but do not fit together (unknown agent, lottery over
    /// a different alternative set, audit on a one-agent profile).
    DomainError = 5,
    /// The operation exceeds a configured resource budget.
    BudgetExceeded = 6,
    /// A bug: an invariant failed inside the library.
    InternalError = 7,
}

/// A parsed preference profile. Create with [`sds_profile_parse`], release
/// with [`sds_profile_free`].
pub struct SdsProfile {
    inner: Profile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let mut message = message.into();
    message.retain(|c| c != '\0');
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(message).expect("nul bytes stripped"));
    });
}

fn fail<E: std::fmt::Display>(status: SdsStatus, error: &E) -> SdsStatus {
    set_error(error.to_string());
    status
}

fn rule_status(error: &RuleError) -> SdsStatus {
    match error {
        RuleError::UnknownRule(_) | RuleError::BadPermutation => SdsStatus::InvalidArgument,
        RuleError::RsdBudget { .. } => SdsStatus::BudgetExceeded,
        RuleError::Prefs(_) => SdsStatus::DomainError,
    }
}

fn audit_status(error: &AuditError) -> SdsStatus {
    match error {
        AuditError::Rule(rule) => rule_status(rule),
        AuditError::Enumeration(SearchError::EnumBudget { .. }) => SdsStatus::BudgetExceeded,
        AuditError::Enumeration(_) => SdsStatus::InternalError,
        AuditError::TooFewAgents | AuditError::Prefs(_) | AuditError::Extension(_) => {
            SdsStatus::DomainError
        }
    }
}

fn efficiency_status(_error: &EfficiencyError) -> SdsStatus {
    SdsStatus::DomainError
}

/// Shared prologue: catch panics so they never unwind across the boundary.
fn guarded(body: impl FnOnce() -> Result<(), SdsStatus>) -> SdsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SdsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            SdsStatus::InternalError
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, SdsStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        return Err(SdsStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        SdsStatus::InvalidUtf8
    })
}

unsafe fn profile_arg<'a>(ptr: *const SdsProfile) -> Result<&'a Profile, SdsStatus> {
    if ptr.is_null() {
        set_error("profile is null");
        return Err(SdsStatus::NullPointer);
    }
    Ok(&(*ptr).inner)
}

unsafe fn out_arg<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, SdsStatus> {
    if ptr.is_null() {
        set_error(format!("{name} is null"));
        return Err(SdsStatus::NullPointer);
    }
    Ok(&mut *ptr)
}

fn new_c_string(text: String) -> Result<*mut c_char, SdsStatus> {
    CString::new(text).map(CString::into_raw).map_err(|_| {
        set_error("output contained an interior nul byte");
        SdsStatus::InternalError
    })
}

fn parse_rule(spec: &str) -> Result<Rule, SdsStatus> {
    Rule::from_spec(spec).map_err(|e| fail(rule_status(&e), &e))
}

fn parse_extension(text: &str) -> Result<Extension, SdsStatus> {
    text.parse::<Extension>().map_err(|e| fail(SdsStatus::InvalidArgument, &e))
}

fn parse_agent(id: u32) -> Result<AgentId, SdsStatus> {
    AgentId::new(id).map_err(|e| fail(SdsStatus::DomainError, &e))
}

fn parse_lottery(text: &str, profile: &Profile) -> Result<Lottery, SdsStatus> {
    Lottery::parse(text, profile).map_err(|e| fail(SdsStatus::ParseError, &e))
}

/// Parse a profile literal (one agent per line, `id: best, {tied,...}, worst`)
/// into a handle. On success `*profile_out` owns the profile; release it with
/// `sds_profile_free`.
#[no_mangle]
pub unsafe extern "C" fn sds_profile_parse(
    text: *const c_char,
    profile_out: *mut *mut SdsProfile,
) -> SdsStatus {
    guarded(|| {
        let out = out_arg(profile_out, "profile_out")?;
        let text = str_arg(text, "text")?;
        let profile = Profile::parse(text).map_err(|e| fail(SdsStatus::ParseError, &e))?;
        *out = Box::into_raw(Box::new(SdsProfile { inner: profile }));
        Ok(())
    })
}

/// Release a profile handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sds_profile_free(profile: *mut SdsProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Render the profile back to its canonical literal form.
#[no_mangle]
pub unsafe extern "C" fn sds_profile_render(
    profile: *const SdsProfile,
    text_out: *mut *mut c_char,
) -> SdsStatus {
    guarded(|| {
        let out = out_arg(text_out, "text_out")?;
        let profile = profile_arg(profile)?;
        *out = new_c_string(profile.render())?;
        Ok(())
    })
}

/// Number of agents and alternatives in the profile.
#[no_mangle]
pub unsafe extern "C" fn sds_profile_counts(
    profile: *const SdsProfile,
    agents_out: *mut u32,
    alts_out: *mut u32,
) -> SdsStatus {
    guarded(|| {
        let agents = out_arg(agents_out, "agents_out")?;
        let alts = out_arg(alts_out, "alts_out")?;
        let profile = profile_arg(profile)?;
        *agents = profile.num_agents() as u32;
        *alts = profile.num_alts() as u32;
        Ok(())
    })
}

/// Run a scheme on the profile. `rule_spec` is `constant`, `rsd`, `pp`, `bo`,
/// `mr`, `esr`, or `sd:1,2,3`. The lottery comes back as an exact rational
/// literal like `a: 1/2, b: 1/2`, re-parseable by the other calls.
#[no_mangle]
pub unsafe extern "C" fn sds_compute(
    profile: *const SdsProfile,
    rule_spec: *const c_char,
    lottery_out: *mut *mut c_char,
) -> SdsStatus {
    guarded(|| {
        let out = out_arg(lottery_out, "lottery_out")?;
        let profile = profile_arg(profile)?;
        let rule = parse_rule(str_arg(rule_spec, "rule_spec")?)?;
        let lottery = rule
            .compute(profile, &Budgets::from_env())
            .map_err(|e| fail(rule_status(&e), &e))?;
        *out = new_c_string(lottery.render_rational(profile))?;
        Ok(())
    })
}

/// Rank two lottery literals under a weak-order literal (best class first,
/// e.g. `a, {b,c}, d`). `extension` is `sd` or `dl`; the result is one of
/// `strictly-prefers`, `indifferent`, `strictly-dispreferred`, `incomparable`.
#[no_mangle]
pub unsafe extern "C" fn sds_compare(
    order: *const c_char,
    extension: *const c_char,
    left: *const c_char,
    right: *const c_char,
    comparison_out: *mut *mut c_char,
) -> SdsStatus {
    guarded(|| {
        let out = out_arg(comparison_out, "comparison_out")?;
        let order_text = str_arg(order, "order")?;
        let extension = parse_extension(str_arg(extension, "extension")?)?;
        // The order literal doubles as the alternative universe.
        let profile = Profile::parse(&format!("1: {order_text}\n"))
            .map_err(|e| fail(SdsStatus::ParseError, &e))?;
        let agent = profile.agents().next().expect("one agent by construction");
        let weak_order = profile.order(agent).expect("agent just listed");
        let left = parse_lottery(str_arg(left, "left")?, &profile)?;
        let right = parse_lottery(str_arg(right, "right")?, &profile)?;
        let comparison = extension
            .compare(weak_order, &left, &right)
            .map_err(|e| fail(SdsStatus::DomainError, &e))?;
        *out = new_c_string(comparison.to_string())?;
        Ok(())
    })
}

/// Check a lottery literal for efficiency on the profile. `property` is
/// `expost` (support is Pareto-optimal) or `sd` (no lottery sd-dominates it).
/// `*efficient_out` gets the verdict and `*report_out` a one-line explanation
/// with the witness when inefficient.
#[no_mangle]
pub unsafe extern "C" fn sds_verify_efficiency(
    profile: *const SdsProfile,
    lottery: *const c_char,
    property: *const c_char,
    efficient_out: *mut bool,
    report_out: *mut *mut c_char,
) -> SdsStatus {
    guarded(|| {
        let efficient = out_arg(efficient_out, "efficient_out")?;
        let report = out_arg(report_out, "report_out")?;
        let profile = profile_arg(profile)?;
        let lottery = parse_lottery(str_arg(lottery, "lottery")?, profile)?;
        let verdict = match str_arg(property, "property")? {
            "expost" => ex_post_efficient(profile, &lottery),
            "sd" => sd_efficient(profile, &lottery),
            other => {
                set_error(format!("unknown property {other:?} (expected expost or sd)"));
                return Err(SdsStatus::InvalidArgument);
            }
        }
        .map_err(|e| fail(efficiency_status(&e), &e))?;
        *efficient = verdict.efficient;
        *report = new_c_string(verdict.describe(profile))?;
        Ok(())
    })
}

/// Check one participation notion for one agent: does joining the electorate
/// beat abstaining under the rule? `level` is `participation`, `strong`, or
/// `very-strong`; `extension` is `sd` or `dl`. `*holds_out` gets the verdict
/// and `*report_out` both lotteries and the comparison.
#[no_mangle]
pub unsafe extern "C" fn sds_audit_participation(
    profile: *const SdsProfile,
    rule_spec: *const c_char,
    agent: u32,
    level: *const c_char,
    extension: *const c_char,
    holds_out: *mut bool,
    report_out: *mut *mut c_char,
) -> SdsStatus {
    guarded(|| {
        let holds = out_arg(holds_out, "holds_out")?;
        let report = out_arg(report_out, "report_out")?;
        let profile = profile_arg(profile)?;
        let rule = parse_rule(str_arg(rule_spec, "rule_spec")?)?;
        let agent = parse_agent(agent)?;
        let level = str_arg(level, "level")?
            .parse::<ParticipationLevel>()
            .map_err(|e| fail(SdsStatus::InvalidArgument, &e))?;
        let extension = parse_extension(str_arg(extension, "extension")?)?;
        let notion = ParticipationNotion { level, extension };
        let verdict = audit_participation(&rule, profile, agent, notion, &Budgets::from_env())
            .map_err(|e| fail(audit_status(&e), &e))?;
        *holds = verdict.holds;
        *report = new_c_string(verdict.describe(profile))?;
        Ok(())
    })
}

/// Check one agent's incentive to misreport: enumerate every weak order over
/// the alternatives and compare each outcome against the truthful one under
/// the agent's true order. `*holds_out` is true when no misreport is strictly
/// better; the report names a beneficial misreport when one exists.
#[no_mangle]
pub unsafe extern "C" fn sds_audit_strategyproofness(
    profile: *const SdsProfile,
    rule_spec: *const c_char,
    agent: u32,
    extension: *const c_char,
    holds_out: *mut bool,
    report_out: *mut *mut c_char,
) -> SdsStatus {
    guarded(|| {
        let holds = out_arg(holds_out, "holds_out")?;
        let report = out_arg(report_out, "report_out")?;
        let profile = profile_arg(profile)?;
        let rule = parse_rule(str_arg(rule_spec, "rule_spec")?)?;
        let agent = parse_agent(agent)?;
        let extension = parse_extension(str_arg(extension, "extension")?)?;
        let verdict =
            audit_strategyproofness(&rule, profile, agent, extension, &Budgets::from_env())
                .map_err(|e| fail(audit_status(&e), &e))?;
        *holds = verdict.holds;
        *report = new_c_string(verdict.describe(profile))?;
        Ok(())
    })
}

/// Free a string returned through any `*_out` parameter. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn sds_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Message from the most recent failing call on this thread, or null if none
/// has failed yet. The pointer is owned by the library and stays valid until
/// the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn sds_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(message) => message.as_ptr(),
        None => std::ptr::null(),
    })
}
