#![no_main]

use aor_precond::mtx::{read_matrix_market_limited, read_matrix_market_str, to_matrix_market_string};
use libfuzzer_sys::fuzz_target;

// small enough that dense allocation stays cheap
const MAX_ENTRIES: usize = 1 << 12;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = read_matrix_market_limited(data, MAX_ENTRIES) {
        // anything accepted must survive a write/read round trip
        let text = to_matrix_market_string(&m);
        let back = read_matrix_market_str(&text).expect("re-reading written matrix");
        assert_eq!(back, m);
    }
});
