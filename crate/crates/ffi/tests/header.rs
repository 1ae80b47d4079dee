use std::path::Path;
use std::process::Command;

fn dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let src = std::fs::read_to_string(dir().join("src/lib.rs")).unwrap();
    let header = std::fs::read_to_string(dir().join("include/capres.h")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() >= 10, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from capres.h");
    }
    for ty in ["CapresStatus", "CapresConfig", "CapresContour", "CapresComplexList", "CapresDtnCount"] {
        assert!(header.contains(ty), "{ty} missing from capres.h");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c"])
        .arg(dir().join("include/capres.h"))
        .output()
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
