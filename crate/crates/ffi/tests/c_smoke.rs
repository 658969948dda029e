//! Builds the static library, compiles a C program against the generated
//! header and runs it.

use std::env;
use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let cargo = env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let status = Command::new(cargo)
        .args(["build", "-p", "spsmc-ffi", "--message-format=short"])
        .status()
        .expect("cargo runs");
    assert!(status.success());

    // tests run from target/<profile>/deps
    let exe = env::current_exe().unwrap();
    let target = exe.ancestors().nth(3).unwrap().join("debug");
    let lib = target.join("libspsmc_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());

    let out = target.join("spsmc_ffi_smoke");
    let cc = env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler runs");
    assert!(status.success());

    let fixture = manifest.join("../core/fixtures/two_state.spsml");
    let run = Command::new(&out).arg(fixture).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(
        String::from_utf8(run.stdout).unwrap(),
        "u0: r=1 n=4\nverdict: violated\nparse status: 2\n"
    );
}
