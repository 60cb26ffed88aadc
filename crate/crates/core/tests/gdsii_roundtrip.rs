// SPDX-License-Identifier: Apache-2.0

mod common;

use artistic_core::gdsii::{parse_library, real8, write_library};
use common::{random_library, rng};
use proptest::prelude::*;

#[test]
fn random_libraries_roundtrip() {
    let mut r = rng(1);
    for _ in 0..100 {
        let lib = random_library(&mut r, 2_000);
        let bytes = write_library(&lib).unwrap();
        let back = parse_library(&bytes).unwrap();
        assert_eq!(back, lib);
        assert_eq!(write_library(&back).unwrap(), bytes);
    }
}

#[test]
fn truncated_streams_are_errors() {
    let mut r = rng(2);
    let lib = random_library(&mut r, 200);
    let bytes = write_library(&lib).unwrap();
    for cut in (0..bytes.len()).step_by(7) {
        assert!(
            parse_library(&bytes[..cut]).is_err(),
            "prefix of {cut} bytes parsed"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn real8_roundtrips(m in 1.0f64..16.0, e in -60i32..60, neg: bool) {
        let v = if neg { -m } else { m } * 16f64.powi(e);
        let bits = real8::encode(v).unwrap();
        prop_assert_eq!(real8::decode(bits), v);
    }

    #[test]
    fn mutated_streams_never_panic(seed: u64, flips in prop::collection::vec((any::<usize>(), any::<u8>()), 1..16)) {
        let lib = random_library(&mut rng(seed), 60);
        let mut bytes = write_library(&lib).unwrap();
        let n = bytes.len();
        for (at, v) in flips {
            bytes[at % n] = v;
        }
        let _ = parse_library(&bytes);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_library(&bytes);
    }
}
