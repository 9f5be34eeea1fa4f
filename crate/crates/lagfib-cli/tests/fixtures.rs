//! The shipped spec files must stay in sync with the library presets.

use std::path::PathBuf;

use lagfib::potential::PotentialSpec;
use lagfib::presets;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn preset_specs() -> Vec<(&'static str, PotentialSpec)> {
    vec![
        ("construction1.json", presets::cubic()),
        ("construction2.json", presets::rational_coupling(4)),
        ("construction3.json", presets::irrational_coupling()),
    ]
}

#[test]
#[ignore = "writes into fixtures/; run explicitly to regenerate"]
fn regenerate_fixtures() {
    let dir = fixture_dir();
    std::fs::create_dir_all(&dir).unwrap();
    for (name, spec) in preset_specs() {
        std::fs::write(dir.join(name), spec.to_json()).unwrap();
    }
}

#[test]
fn fixtures_match_presets() {
    for (name, preset) in preset_specs() {
        let path = fixture_dir().join(name);
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("missing fixture {}: {e}", path.display()));
        let on_disk = PotentialSpec::from_json(&text).unwrap();
        assert_eq!(on_disk.to_json(), preset.to_json(), "{name} drifted");
    }
}
