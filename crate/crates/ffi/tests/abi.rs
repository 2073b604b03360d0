use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use unstyle::attrib::{train_model, TrainConfig};
use unstyle::synth::{synthetic_corpus, SynthConfig};
use unstyle_ffi::*;

const PROGRAM: &str = "int main(){int n; cin>>n; int s=0; for(int i=0;i<n;i++){s+=i;} cout<<s<<endl; return 0;}";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    unstyle_string_free(p);
    s
}

unsafe fn last_error() -> String {
    let p = unstyle_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

fn small_model() -> (*mut UnstyleModel, Vec<unstyle::corpus::SourceUnit>) {
    let corpus = synthetic_corpus(&SynthConfig { authors: 3, challenges: 3, tests_per_unit: 2, ..Default::default() });
    let mut cfg = TrainConfig::default();
    cfg.forest.n_trees = 20;
    let json = c(&train_model(&corpus.units, &cfg).unwrap().to_json());
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { unstyle_model_from_json(json.as_ptr(), &mut model) }, UnstyleStatus::Ok);
    (model, corpus.units)
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(unstyle_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn encode_round_trips_through_json() {
    let src = c(PROGRAM);
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(unstyle_encode(src.as_ptr(), &mut out), UnstyleStatus::Ok);
        assert!(unstyle_last_error().is_null());
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["tokens"].as_array().unwrap().len(), v["leaf_paths"].as_array().unwrap().len());
    }
}

#[test]
fn failures_map_to_status_codes_and_messages() {
    let bad = c("int main( {");
    let mut out = ptr::null_mut();
    let mut count = 0usize;
    unsafe {
        assert_eq!(unstyle_encode(ptr::null(), &mut out), UnstyleStatus::NullArgument);
        assert!(last_error().contains("source"));
        assert_eq!(unstyle_encode(bad.as_ptr(), ptr::null_mut()), UnstyleStatus::NullArgument);
        assert_eq!(unstyle_encode(bad.as_ptr(), &mut out), UnstyleStatus::Syntax);
        assert!(out.is_null());
        assert_eq!(unstyle_action_count(bad.as_ptr(), &mut count), UnstyleStatus::Syntax);

        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(unstyle_encode(invalid.as_ptr().cast(), &mut out), UnstyleStatus::InvalidUtf8);

        let mut model = ptr::null_mut();
        let garbage = c("{\"not\": \"a model\"}");
        assert_eq!(unstyle_model_from_json(garbage.as_ptr(), &mut model), UnstyleStatus::Model);
        assert!(model.is_null());
        let missing = c("/nonexistent/model.json");
        assert_eq!(unstyle_model_load(missing.as_ptr(), &mut model), UnstyleStatus::Io);

        // A successful call clears the previous message.
        let ok = c(PROGRAM);
        assert_eq!(unstyle_action_count(ok.as_ptr(), &mut count), UnstyleStatus::Ok);
        assert!(count > 0);
        assert!(unstyle_last_error().is_null());

        unstyle_model_free(ptr::null_mut());
        unstyle_string_free(ptr::null_mut());
        assert_eq!(unstyle_model_author_count(ptr::null()), 0);
    }
}

#[test]
fn model_predicts_and_evades() {
    let (model, units) = small_model();
    unsafe {
        assert_eq!(unstyle_model_author_count(model), 3);
        let unit = &units[0];
        let src = c(&unit.code);
        let mut out = ptr::null_mut();
        assert_eq!(unstyle_model_predict(model, src.as_ptr(), &mut out), UnstyleStatus::Ok);
        let predicted = take(out);
        assert!(units.iter().any(|u| u.author == predicted));

        let author = c(&predicted);
        assert_eq!(unstyle_evade(model, src.as_ptr(), author.as_ptr(), 30, 7, &mut out), UnstyleStatus::Ok);
        let r: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert!(r["iterations_used"].as_u64().unwrap() <= 30);

        let tests = c(&serde_json::to_string(&unit.tests).unwrap());
        let final_code = c(r["final_code"].as_str().unwrap());
        let mut eq = -1;
        assert_eq!(
            unstyle_check_equivalence(src.as_ptr(), final_code.as_ptr(), tests.as_ptr(), &mut eq),
            UnstyleStatus::Ok
        );
        assert_eq!(eq, 1);
        let wrong = c("int main(){cout<<12345; return 0;}");
        assert_eq!(unstyle_check_equivalence(src.as_ptr(), wrong.as_ptr(), tests.as_ptr(), &mut eq), UnstyleStatus::Ok);
        assert_eq!(eq, 0);
        let bad_tests = c("[1,2]");
        assert_eq!(
            unstyle_check_equivalence(src.as_ptr(), wrong.as_ptr(), bad_tests.as_ptr(), &mut eq),
            UnstyleStatus::Format
        );

        assert_eq!(
            unstyle_evade(ptr::null(), src.as_ptr(), author.as_ptr(), 5, 0, &mut out),
            UnstyleStatus::NullArgument
        );
        unstyle_model_free(model);
    }
}

#[test]
fn model_loads_from_disk() {
    let corpus = synthetic_corpus(&SynthConfig { authors: 2, challenges: 2, tests_per_unit: 1, ..Default::default() });
    let mut cfg = TrainConfig::default();
    cfg.forest.n_trees = 5;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    train_model(&corpus.units, &cfg).unwrap().save(&path).unwrap();
    let p = c(path.to_str().unwrap());
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(unstyle_model_load(p.as_ptr(), &mut model), UnstyleStatus::Ok);
        assert_eq!(unstyle_model_author_count(model), 2);
        unstyle_model_free(model);
    }
}

fn header() -> String {
    std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/unstyle.h")).unwrap()
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for name in [
        "unstyle_version",
        "unstyle_last_error",
        "unstyle_string_free",
        "unstyle_model_load",
        "unstyle_model_from_json",
        "unstyle_model_free",
        "unstyle_model_author_count",
        "unstyle_model_predict",
        "unstyle_encode",
        "unstyle_action_count",
        "unstyle_evade",
        "unstyle_check_equivalence",
    ] {
        assert!(h.contains(&format!("{name}(")), "{name} missing");
    }
    assert!(h.contains("typedef struct UnstyleModel UnstyleModel;"));
    assert!(h.contains("UNSTYLE_STATUS_PANIC = 8"));
}

#[test]
fn c_program_links_against_the_static_library() {
    let Ok(cc) = which_cc() else { return };
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libunstyle_ffi.a");
    if !lib.exists() {
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}

fn which_cc() -> Result<&'static str, ()> {
    Command::new("cc").arg("--version").output().map(|_| "cc").map_err(|_| ())
}
