#![no_main]

use arcnc_cli::CampaignConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = CampaignConfig::parse(text) {
        let _ = cfg.validate();
    }
});
