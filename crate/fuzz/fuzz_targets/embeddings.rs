#![no_main]

use libfuzzer_sys::fuzz_target;
use trailaug::embed::{parse_embeddings, write_embeddings};

fuzz_target!(|data: &[u8]| {
    let Ok(table) = parse_embeddings(data) else { return };
    let mut out = Vec::new();
    write_embeddings(&table, &mut out).unwrap();
    let again = parse_embeddings(&out[..]).expect("written table parses");
    assert_eq!(again.ids(), table.ids());
    for (i, _) in table.ids().iter().enumerate() {
        assert_eq!(again.row(i), table.row(i));
    }
});
