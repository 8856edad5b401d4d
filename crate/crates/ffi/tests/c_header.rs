// SPDX-License-Identifier: Apache-2.0

//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "carbon_housing.h"

int main(void) {
    ChScenario *s = NULL;
    ChBuilding *b = NULL;
    if (ch_scenario_new("toy", 0.0, 10.0, 1.0, log(2.0), &s) != CH_STATUS_OK) return 10;
    if (ch_building_new("toy", 1.0, 1.0, 1.0, 0.0, 4.0, &b) != CH_STATUS_OK) return 11;
    ChEnergy e = {1.0, 0.0};
    ChCosts c = {1.0, 0.0};
    ChDecision kind;
    double date;
    if (ch_optimal_renovation_date(b, s, e, c, 0.0, &kind, &date) != CH_STATUS_OK) return 12;
    if (kind != CH_DECISION_AT || fabs(date - 2.0) > 1e-12) return 13;
    if (ch_building_new(NULL, 1.0, 1.0, 1.0, 0.0, 4.0, &b) != CH_STATUS_NULL) return 14;
    if (ch_last_error() == NULL) return 15;
    printf("renovate_at %.6f\n", date);
    ch_building_free(b);
    ch_scenario_free(s);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libcarbon_housing_ffi.a");
    assert!(lib.is_file(), "static library not found at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler is available as `cc`");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "renovate_at 2.000000");
}
