#![no_main]

use libfuzzer_sys::fuzz_target;
use trailaug_cli::PipelineConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = PipelineConfig::parse(text) else { return };
    let _ = cfg.synth.validate();
    let _ = cfg.embed.validate();
    let _ = cfg.lsh.validate();
    let _ = cfg.expansion.validate();
    let again = PipelineConfig::parse(&cfg.to_toml()).expect("written config parses");
    // Debug output so NaN compares equal to itself
    assert_eq!(format!("{again:?}"), format!("{cfg:?}"));
});
