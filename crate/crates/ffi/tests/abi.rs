use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use chantopo::fixture::planted_blobs;
use chantopo::ingest::{write_projects, Schema};
use chantopo_ffi::*;

fn last_error() -> String {
    let p = chantopo_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fixture_csv(dir: &Path) -> CString {
    let path = dir.join("blobs.csv");
    write_projects(&planted_blobs(150, 2).unwrap().table, &path, &Schema::libraries_io()).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

#[test]
fn load_build_export_free() {
    let tmp = tempfile::tempdir().unwrap();
    let path = fixture_csv(tmp.path());
    unsafe {
        let mut table = ptr::null_mut();
        assert_eq!(chantopo_table_load(path.as_ptr(), ptr::null(), ptr::null(), &mut table), ChantopoStatus::Ok);
        assert_eq!(chantopo_table_len(table), 150);

        let params = CString::new("filter = \"pca\"\n").unwrap();
        let mut topo = ptr::null_mut();
        assert_eq!(chantopo_topology_build(table, params.as_ptr(), &mut topo), ChantopoStatus::Ok);
        let (mut nodes, mut comps) = (0usize, 0usize);
        assert_eq!(chantopo_topology_counts(topo, &mut nodes, ptr::null_mut(), &mut comps), ChantopoStatus::Ok);
        assert!(nodes > 0 && comps > 0);

        let mut pts = 0usize;
        assert_eq!(chantopo_topology_component_points(topo, 1, &mut pts), ChantopoStatus::Ok);
        assert!(pts > 0);
        assert_eq!(chantopo_topology_component_points(topo, 0, &mut pts), ChantopoStatus::OutOfRange);
        assert!(last_error().contains("rank 0"));

        for (fmt, head) in [
            (ChantopoFormat::Json, "{"),
            (ChantopoFormat::GraphMl, "<?xml"),
            (ChantopoFormat::Svg, "<svg"),
        ] {
            let mut s = ptr::null_mut();
            assert_eq!(chantopo_topology_export(topo, fmt, &mut s), ChantopoStatus::Ok);
            assert!(CStr::from_ptr(s).to_str().unwrap().starts_with(head), "{fmt:?}");
            chantopo_string_free(s);
        }
        chantopo_topology_free(topo);
        chantopo_table_free(table);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut table = ptr::null_mut();
        assert_eq!(
            chantopo_table_load(ptr::null(), ptr::null(), ptr::null(), &mut table),
            ChantopoStatus::NullArgument
        );
        assert!(last_error().contains("path"));

        let missing = CString::new("/nonexistent/projects.csv").unwrap();
        let st = chantopo_table_load(missing.as_ptr(), ptr::null(), ptr::null(), &mut table);
        assert!(matches!(st, ChantopoStatus::Io | ChantopoStatus::Parse), "{st:?}");
        assert!(table.is_null());

        let bad = [0xffu8, 0];
        let st = chantopo_table_load(bad.as_ptr().cast(), ptr::null(), ptr::null(), &mut table);
        assert_eq!(st, ChantopoStatus::InvalidUtf8);

        let mut s = ptr::null_mut();
        assert_eq!(chantopo_params_default(&mut s), ChantopoStatus::Ok);
        assert!(chantopo_last_error().is_null());
        assert!(CStr::from_ptr(s).to_str().unwrap().contains("perplexity"));
        chantopo_string_free(s);

        assert_eq!(chantopo_topology_counts(ptr::null(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), ChantopoStatus::NullArgument);
        chantopo_table_free(ptr::null_mut());
        chantopo_topology_free(ptr::null_mut());
        chantopo_string_free(ptr::null_mut());
    }
}

#[test]
fn bad_params_are_parse_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let path = fixture_csv(tmp.path());
    unsafe {
        let mut table = ptr::null_mut();
        assert_eq!(chantopo_table_load(path.as_ptr(), ptr::null(), ptr::null(), &mut table), ChantopoStatus::Ok);
        let params = CString::new("no_such_key = 1\n").unwrap();
        let mut topo = ptr::null_mut();
        assert_eq!(chantopo_topology_build(table, params.as_ptr(), &mut topo), ChantopoStatus::Parse);
        let params = CString::new("components = 0\n").unwrap();
        assert_eq!(chantopo_topology_build(table, params.as_ptr(), &mut topo), ChantopoStatus::InvalidArgument);
        assert!(last_error().starts_with("configure stage failed"));
        chantopo_table_free(table);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(chantopo_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn static_lib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    let lib = deps.parent()?.join("libchantopo_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_compiles_and_links_from_c() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not built; skipping C link check");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "chantopo.h"
int main(void) {
    ChantopoTable *t = NULL;
    if (chantopo_table_load(NULL, NULL, NULL, &t) != CHANTOPO_STATUS_NULL_ARGUMENT) return 1;
    if (chantopo_last_error() == NULL) return 2;
    char *p = NULL;
    if (chantopo_params_default(&p) != CHANTOPO_STATUS_OK) return 3;
    int ok = strstr(p, "perplexity") != NULL;
    chantopo_string_free(p);
    printf("%s\n", chantopo_version());
    return ok ? 0 : 4;
}
"#,
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let exe = tmp.path().join("main");
    let cc = std::process::Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output();
    let Ok(cc) = cc else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = std::process::Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
