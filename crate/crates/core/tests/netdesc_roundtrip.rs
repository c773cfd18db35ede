// SPDX-License-Identifier: Apache-2.0

mod common;

use darwin3::mapper::NetworkDescription;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_form_roundtrips(seed: u64) {
        let net = common::random_network(seed, 600);
        let text = net.to_text();
        prop_assert_eq!(NetworkDescription::parse(&text).unwrap(), net);
    }
}
