//! Exercises the library strictly through the exported C ABI: raw pointers
//! in, status codes and heap strings out.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use sds_ffi::{
    sds_audit_participation, sds_audit_strategyproofness, sds_compare, sds_compute,
    sds_last_error, sds_profile_counts, sds_profile_free, sds_profile_parse, sds_profile_render,
    sds_string_free, sds_verify_efficiency, SdsProfile, SdsStatus,
};

fn parse_profile(text: &str) -> *mut SdsProfile {
    let text = CString::new(text).unwrap();
    let mut profile: *mut SdsProfile = ptr::null_mut();
    let status = unsafe { sds_profile_parse(text.as_ptr(), &mut profile) };
    assert_eq!(status, SdsStatus::Ok, "parse failed: {}", last_error());
    assert!(!profile.is_null());
    profile
}

/// Copy an out-string into Rust and free the C allocation.
fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { sds_string_free(ptr) };
    text
}

fn last_error() -> String {
    let ptr = sds_last_error();
    if ptr.is_null() {
        return String::new();
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string()
}

#[test]
fn parse_render_roundtrip_and_counts() {
    let profile = parse_profile("1: a, b\n2: {a,b}\n");
    let mut rendered: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { sds_profile_render(profile, &mut rendered) }, SdsStatus::Ok);
    let text = take_string(rendered);
    assert_eq!(text, "alternatives: a, b\n1: a, b\n2: {a,b}\n");

    // The canonical form is a fixed point of parse-then-render.
    let reparsed = parse_profile(&text);
    let mut rendered: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { sds_profile_render(reparsed, &mut rendered) }, SdsStatus::Ok);
    assert_eq!(take_string(rendered), text);
    unsafe { sds_profile_free(reparsed) };

    let (mut agents, mut alts) = (0u32, 0u32);
    assert_eq!(
        unsafe { sds_profile_counts(profile, &mut agents, &mut alts) },
        SdsStatus::Ok
    );
    assert_eq!((agents, alts), (2, 2));
    unsafe { sds_profile_free(profile) };
}

#[test]
fn compute_returns_reparseable_rational_lotteries() {
    let profile = parse_profile("1: a, b\n2: b, a\n");
    for (spec, want) in [("rsd", "a: 1/2, b: 1/2"), ("sd:2,1", "a: 0, b: 1")] {
        let spec_c = CString::new(spec).unwrap();
        let mut lottery: *mut c_char = ptr::null_mut();
        let status = unsafe { sds_compute(profile, spec_c.as_ptr(), &mut lottery) };
        assert_eq!(status, SdsStatus::Ok, "{spec}: {}", last_error());
        assert_eq!(take_string(lottery), want, "rule {spec}");
    }
    unsafe { sds_profile_free(profile) };
}

#[test]
fn participation_audit_levels_split_as_expected() {
    // Under picking order 1,2,3 the third agent's vote never matters: the
    // strong level holds (abstaining changes nothing) but very-strong fails
    // (a strict gain was available and the rule paid none of it).
    let profile = parse_profile("1: {a,b}, c\n2: c, b, a\n3: c, b, a\n");
    let rule = CString::new("sd:1,2,3").unwrap();
    let dl = CString::new("dl").unwrap();

    let mut holds = true;
    let mut report: *mut c_char = ptr::null_mut();
    let very_strong = CString::new("very-strong").unwrap();
    let status = unsafe {
        sds_audit_participation(
            profile,
            rule.as_ptr(),
            3,
            very_strong.as_ptr(),
            dl.as_ptr(),
            &mut holds,
            &mut report,
        )
    };
    assert_eq!(status, SdsStatus::Ok, "{}", last_error());
    assert!(!holds);
    let report = take_string(report);
    assert!(report.contains("violated"), "unexpected report: {report}");

    let strong = CString::new("strong").unwrap();
    let mut report: *mut c_char = ptr::null_mut();
    let status = unsafe {
        sds_audit_participation(
            profile,
            rule.as_ptr(),
            3,
            strong.as_ptr(),
            dl.as_ptr(),
            &mut holds,
            &mut report,
        )
    };
    assert_eq!(status, SdsStatus::Ok);
    assert!(holds);
    take_string(report);
    unsafe { sds_profile_free(profile) };
}

#[test]
fn strategyproofness_audit_finds_borda_manipulation() {
    let profile = parse_profile("1: a, b, c\n2: b, a, c\n");
    let rule = CString::new("bo").unwrap();
    let sd = CString::new("sd").unwrap();
    let mut holds = true;
    let mut report: *mut c_char = ptr::null_mut();
    let status = unsafe {
        sds_audit_strategyproofness(
            profile,
            rule.as_ptr(),
            1,
            sd.as_ptr(),
            &mut holds,
            &mut report,
        )
    };
    assert_eq!(status, SdsStatus::Ok, "{}", last_error());
    assert!(!holds);
    let report = take_string(report);
    assert!(report.contains("beneficial misreport"), "unexpected report: {report}");
    unsafe { sds_profile_free(profile) };
}

#[test]
fn efficiency_verification_reports_witnesses() {
    let profile = parse_profile("1: a, b\n2: a, b\n");
    let expost = CString::new("expost").unwrap();
    let sd = CString::new("sd").unwrap();

    let bad = CString::new("a:1/2,b:1/2").unwrap();
    let mut efficient = true;
    let mut report: *mut c_char = ptr::null_mut();
    let status = unsafe {
        sds_verify_efficiency(profile, bad.as_ptr(), expost.as_ptr(), &mut efficient, &mut report)
    };
    assert_eq!(status, SdsStatus::Ok, "{}", last_error());
    assert!(!efficient);
    let report = take_string(report);
    assert!(report.contains("Pareto-dominates"), "unexpected report: {report}");

    let good = CString::new("a:1").unwrap();
    let mut report: *mut c_char = ptr::null_mut();
    let status = unsafe {
        sds_verify_efficiency(profile, good.as_ptr(), sd.as_ptr(), &mut efficient, &mut report)
    };
    assert_eq!(status, SdsStatus::Ok);
    assert!(efficient);
    assert_eq!(take_string(report), "efficient\n");
    unsafe { sds_profile_free(profile) };
}

#[test]
fn compare_ranks_under_both_extensions() {
    let order = CString::new("a, b, c").unwrap();
    let left = CString::new("a:1/2,c:1/2").unwrap();
    let right = CString::new("b:1").unwrap();
    for (extension, want) in [("sd", "incomparable"), ("dl", "strictly-prefers")] {
        let extension_c = CString::new(extension).unwrap();
        let mut comparison: *mut c_char = ptr::null_mut();
        let status = unsafe {
            sds_compare(
                order.as_ptr(),
                extension_c.as_ptr(),
                left.as_ptr(),
                right.as_ptr(),
                &mut comparison,
            )
        };
        assert_eq!(status, SdsStatus::Ok, "{extension}: {}", last_error());
        assert_eq!(take_string(comparison), want, "extension {extension}");
    }
}

#[test]
fn every_failure_mode_has_a_status_and_message() {
    // Null pointer.
    let mut profile: *mut SdsProfile = ptr::null_mut();
    assert_eq!(
        unsafe { sds_profile_parse(ptr::null(), &mut profile) },
        SdsStatus::NullPointer
    );
    assert!(last_error().contains("null"));

    // Invalid UTF-8.
    let bytes: [c_char; 3] = [0x66, -1i8 as c_char, 0];
    assert_eq!(
        unsafe { sds_profile_parse(bytes.as_ptr(), &mut profile) },
        SdsStatus::InvalidUtf8
    );

    // Malformed profile.
    let garbage = CString::new("not a profile").unwrap();
    assert_eq!(
        unsafe { sds_profile_parse(garbage.as_ptr(), &mut profile) },
        SdsStatus::ParseError
    );
    assert!(!last_error().is_empty());

    let profile = parse_profile("1: a, b\n2: b, a\n");

    // Unknown rule.
    let bogus = CString::new("approval").unwrap();
    let mut lottery: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { sds_compute(profile, bogus.as_ptr(), &mut lottery) },
        SdsStatus::InvalidArgument
    );
    assert!(last_error().contains("unknown rule"), "got: {}", last_error());

    // Agent outside the profile.
    let rule = CString::new("pp").unwrap();
    let sd = CString::new("sd").unwrap();
    let strong = CString::new("strong").unwrap();
    let mut holds = false;
    let mut report: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe {
            sds_audit_participation(
                profile,
                rule.as_ptr(),
                9,
                strong.as_ptr(),
                sd.as_ptr(),
                &mut holds,
                &mut report,
            )
        },
        SdsStatus::DomainError
    );

    // Lottery over the wrong alternatives.
    let alien = CString::new("z:1").unwrap();
    let expost = CString::new("expost").unwrap();
    let mut efficient = false;
    assert_eq!(
        unsafe {
            sds_verify_efficiency(
                profile,
                alien.as_ptr(),
                expost.as_ptr(),
                &mut efficient,
                &mut report,
            )
        },
        SdsStatus::ParseError
    );

    unsafe { sds_profile_free(profile) };
}

#[test]
fn rsd_over_too_many_agents_reports_the_budget() {
    let mut text = String::new();
    for agent in 1..=11 {
        text.push_str(&format!("{agent}: a, b\n"));
    }
    let profile = parse_profile(&text);
    let rule = CString::new("rsd").unwrap();
    let mut lottery: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { sds_compute(profile, rule.as_ptr(), &mut lottery) },
        SdsStatus::BudgetExceeded
    );
    assert!(last_error().contains("budget"), "got: {}", last_error());
    unsafe { sds_profile_free(profile) };
}

#[test]
fn generated_header_declares_the_full_surface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sds.h"))
        .expect("header generated at build time");
    assert!(header.contains("typedef struct SdsProfile SdsProfile;"), "opaque handle missing");
    for symbol in [
        "SDS_STATUS_OK",
        "sds_profile_parse",
        "sds_profile_render",
        "sds_profile_counts",
        "sds_profile_free",
        "sds_compute",
        "sds_compare",
        "sds_verify_efficiency",
        "sds_audit_participation",
        "sds_audit_strategyproofness",
        "sds_string_free",
        "sds_last_error",
    ] {
        assert!(header.contains(symbol), "header missing {symbol}");
    }
}
