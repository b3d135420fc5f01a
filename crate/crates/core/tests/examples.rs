use std::path::Path;

use lgpac::constructions::catalog;
use lgpac::dsl::{parse, print};

fn shipped(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.lgpac"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn shipped_files_match_the_catalog() {
    for c in catalog() {
        assert_eq!(shipped(c.name), print(&c.document), "{} is stale; rerun export-examples", c.name);
    }
}

#[test]
fn shipped_files_round_trip() {
    for c in catalog() {
        let text = shipped(c.name);
        let doc = parse(&text).unwrap();
        assert_eq!(print(&doc), text, "{}", c.name);
        assert_eq!(parse(&print(&doc)).unwrap(), doc, "{}", c.name);
    }
}

#[test]
fn shipped_gamma_compiles_to_six_integrators_per_grid_point() {
    let doc = parse(&shipped("gamma")).unwrap();
    let bound = doc.bound().unwrap();
    let points = bound.system().grid().unwrap().len();
    assert_eq!(doc.network.integrator_count(), 6);
    assert_eq!(bound.system().state_count(), 6 * points);
}
