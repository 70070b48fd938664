#![no_main]

use libfuzzer_sys::fuzz_target;
use numid_core::sim::{SimConfig, Simulation};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for parsed in [SimConfig::from_toml_str(text), SimConfig::from_json_str(text)] {
        let Ok(cfg) = parsed else { continue };
        if let Ok(sim) = Simulation::new(cfg) {
            let echo = sim.config().to_json().unwrap();
            let again = Simulation::new(SimConfig::from_json_str(&echo).unwrap()).unwrap();
            assert_eq!(again.config(), sim.config());
        }
    }
});
