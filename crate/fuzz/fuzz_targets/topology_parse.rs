#![no_main]

use arcnc::topology::{load_topology, save_topology};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(topo) = load_topology(text) {
        let again = load_topology(&save_topology(&topo)).expect("canonical form reparses");
        assert_eq!(topo, again);
    }
});
