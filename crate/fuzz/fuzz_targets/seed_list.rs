#![no_main]

use libfuzzer_sys::fuzz_target;
use trailaug::convmodel::SeedList;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(list) = SeedList::parse(text) else { return };
    let again = SeedList::parse(&list.to_text()).expect("written list parses");
    assert_eq!(again.activities(), list.activities());
});
