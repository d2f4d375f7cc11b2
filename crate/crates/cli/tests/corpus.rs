//! The checked-in fuzz seeds are valid inputs for their parsers.

use std::path::PathBuf;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn seeds_parse() {
    for (p, t) in seeds("point_list") {
        assert!(discode::formats::parse_point_list(&t).is_ok(), "{}", p.display());
    }
    for (p, t) in seeds("points_json") {
        assert!(discode::formats::parse_points_json(&t).is_ok(), "{}", p.display());
        assert!(discode::formats::read_disc_points(&t).is_ok(), "{}", p.display());
    }
    for (p, t) in seeds("fixed_point_spec") {
        assert!(discode::formats::parse_fixed_point_spec(&t).is_ok(), "{}", p.display());
    }
    for (p, t) in seeds("exclusions") {
        assert!(discode::formats::parse_exclusions(&t).is_ok(), "{}", p.display());
    }
    for (p, t) in seeds("config") {
        assert!(discode_cli::config::parse_config(&t).is_ok(), "{}", p.display());
    }
    for (p, t) in seeds("complex_arg") {
        assert!(discode_cli::parse_complex(&t).is_ok(), "{}", p.display());
    }
}
