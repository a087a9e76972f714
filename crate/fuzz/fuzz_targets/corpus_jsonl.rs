#![no_main]

use libfuzzer_sys::fuzz_target;
use trailaug::datamodel::{read_corpus, write_corpus};

fuzz_target!(|data: &[u8]| {
    let Ok(corpus) = read_corpus(data) else { return };
    let mut out = Vec::new();
    write_corpus(&corpus, &mut out).unwrap();
    let again = read_corpus(&out[..]).expect("written corpus parses");
    assert_eq!(again, corpus);
});
