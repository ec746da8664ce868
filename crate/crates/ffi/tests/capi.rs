use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use polyblind_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn catalog(name: &str) -> *mut PbMachine {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pb_machine_from_catalog(c(name).as_ptr(), &mut m) }, PbStatus::Ok);
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(pb_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn eval_catalog_machines() {
    let m = catalog("nb_ab");
    let mut v = 0u64;
    assert_eq!(unsafe { pb_machine_eval(m, c("aabab").as_ptr(), &mut v) }, PbStatus::Ok);
    assert_eq!(v, 6);
    assert_eq!(unsafe { pb_machine_level(m) }, 2);
    let mut kind = 9;
    assert_eq!(unsafe { pb_machine_kind(m, &mut kind) }, PbStatus::Ok);
    assert_eq!(kind, 0);
    unsafe { pb_machine_free(m) };
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pb_machine_from_catalog(c("nope").as_ptr(), &mut m) }, PbStatus::Invalid);
    assert!(last_error().contains("nope"));
    assert!(m.is_null());
    assert_eq!(unsafe { pb_machine_from_catalog(ptr::null(), &mut m) }, PbStatus::NullPointer);
    let it = catalog("itpow2");
    let mut v = 0;
    assert_eq!(unsafe { pb_machine_eval(it, c("abz").as_ptr(), &mut v) }, PbStatus::Invalid);
    assert_eq!(unsafe { pb_machine_eval(it, c("ab").as_ptr(), ptr::null_mut()) }, PbStatus::NullPointer);
    assert_eq!(unsafe { pb_machine_from_json(c("{").as_ptr(), &mut m) }, PbStatus::Parse);
    unsafe { pb_machine_free(it) };
    unsafe { pb_machine_free(ptr::null_mut()) };
}

#[test]
fn machine_from_json() {
    let doc = r#"{"kind": "marble", "k": 1,
        "morphism": {"elements": ["1"], "identity": "1", "table": [["1"]], "letters": {"a": "1", "b": "1"}},
        "lambda": {"a": 2, "b": 0}}"#;
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { pb_machine_from_json(c(doc).as_ptr(), &mut m) }, PbStatus::Ok, "{}", last_error());
    let mut v = 0;
    assert_eq!(unsafe { pb_machine_eval(m, c("abba").as_ptr(), &mut v) }, PbStatus::Ok);
    assert_eq!(v, 4);
    unsafe { pb_machine_free(m) };
}

#[test]
fn permutability_and_forests() {
    let (nb, it) = (catalog("nb_ab"), catalog("itpow2"));
    let mut p = -1;
    assert_eq!(unsafe { pb_check_permutable(nb, 2, 1_000_000, &mut p) }, PbStatus::Ok);
    assert_eq!(p, 1);
    assert_eq!(unsafe { pb_check_permutable(it, 1, 1_000_000, &mut p) }, PbStatus::Ok);
    assert_eq!(p, 0);
    assert_eq!(unsafe { pb_check_permutable(it, 3, 10, &mut p) }, PbStatus::BudgetExceeded);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pb_machine_forest(it, c("aabaa").as_ptr(), &mut s) }, PbStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { pb_string_free(s) };
    assert_eq!(text.chars().filter(|ch| ch.is_alphabetic()).collect::<String>(), "aabaa");
    unsafe {
        pb_machine_free(nb);
        pb_machine_free(it);
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "polyblind.h"
int main(void) {
    PbMachine *m = NULL;
    uint64_t v = 0;
    if (pb_machine_from_catalog("itpow2", &m) != PB_STATUS_OK) return 1;
    if (pb_machine_eval(m, "aaabaa", &v) != PB_STATUS_OK) return 2;
    pb_machine_free(m);
    printf("%llu\n", (unsigned long long)v);
    return v == 13 ? 0 : 3;
}
"#;

/// Compiles a C program against the generated header and the static
/// library. Skipped when no C compiler is installed.
#[test]
fn header_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/polyblind.h");
    assert!(header.is_file(), "the build script writes the header");
    let target =
        std::env::var_os("CARGO_TARGET_DIR").map(PathBuf::from).unwrap_or_else(|| manifest.join("../../target"));
    let exe_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib =
        [exe_dir.join("libpolyblind_ffi.a"), target.join("debug/libpolyblind_ffi.a")].into_iter().find(|p| p.is_file());
    let Some(lib) = lib else {
        eprintln!("skipped: static library not found");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "13");
}
