//! Goal-file parser and row assembly: must never panic on arbitrary
//! bytes, against a representative scene.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sharegrasp::files::{parse_goal, parse_scene};
use sharegrasp::geometry::Scene;
use std::sync::OnceLock;

fn scene() -> &'static Scene {
    static SCENE: OnceLock<Scene> = OnceLock::new();
    SCENE.get_or_init(|| {
        parse_scene(include_str!("../../crates/sharegrasp/data/scenes/cube_palm.json"))
            .expect("bundled scene parses")
            .to_scene()
            .expect("bundled scene loads")
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse_goal(text) else { return };
    let Ok(goal) = file.to_goal(scene()) else { return };
    // Assembled goals satisfy the constructor's invariants.
    assert!(goal.g.nrows() >= 1);
    assert_eq!(goal.g.ncols(), 6);
    assert_eq!(goal.b.len(), goal.g.nrows());
    // Re-emission of an accepted goal file parses back identically.
    let again = parse_goal(&file.to_json()).expect("emitted goal files parse");
    assert_eq!(file, again);
});
