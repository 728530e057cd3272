//! Scene-file parser: must never panic on arbitrary bytes, and every
//! successfully loaded scene must survive the emit → parse → load round
//! trip it promises.

#![no_main]

use libfuzzer_sys::fuzz_target;
use sharegrasp::files::{parse_scene, SceneFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse_scene(text) else { return };
    let Ok(scene) = file.to_scene() else { return };
    let emitted = SceneFile::from_scene(&scene).to_json();
    let again = parse_scene(&emitted).expect("emitted scene files parse");
    again.to_scene().expect("emitted scene files load");
});
