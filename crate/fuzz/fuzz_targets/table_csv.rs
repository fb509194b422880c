#![no_main]

use libfuzzer_sys::fuzz_target;
use precond_bench::output::{read_gmres_csv, read_spectral_csv};

fuzz_target!(|data: &[u8]| {
    let _ = read_spectral_csv(data);
    let _ = read_gmres_csv(data);
});
