#![no_main]
use consensus_lab_harness::{ExperimentConfig, Recipe};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for recipe in Recipe::ALL {
        if let Ok(config) = ExperimentConfig::parse(recipe, text) {
            let _ = config.validate();
            let again = ExperimentConfig::parse(recipe, &config.to_toml()).expect("canonical config parses");
            assert_eq!(again.hash(), config.hash());
        }
    }
});
