#![no_main]

use arcnc::engine::KernelScript;
use arcnc::gf::Field;
use arcnc::topology::combination_network;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(script) = KernelScript::parse(text) {
        // binding checks adjacency and value ranges against a real network
        let topo = combination_network(4, 2).unwrap();
        let _ = script.bind(&topo, &Field::with_order(4).unwrap());
    }
});
