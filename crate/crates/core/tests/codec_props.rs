mod support;

use proptest::prelude::*;

use appaudit::container::encode::{encode_axml, encode_string_pool};
use appaudit::container::{decode_axml, parse_string_pool, StringEncoding};

fn encoding() -> impl Strategy<Value = StringEncoding> {
    prop_oneof![Just(StringEncoding::Utf8), Just(StringEncoding::Utf16)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn axml_round_trip(doc in support::document(), enc in encoding()) {
        let bytes = encode_axml(&doc, enc);
        prop_assert_eq!(decode_axml(&bytes).unwrap(), doc);
    }

    #[test]
    fn string_pool_round_trip(strings in support::pool_strings(), enc in encoding(), sorted in any::<bool>()) {
        let refs: Vec<&str> = strings.iter().map(String::as_str).collect();
        let pool = parse_string_pool(&encode_string_pool(&refs, enc, sorted)).unwrap();
        prop_assert_eq!(pool.strings, strings);
        prop_assert_eq!(pool.encoding, enc);
        prop_assert_eq!(pool.sorted, sorted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn truncated_documents_are_errors(doc in support::document(), enc in encoding(), cut in any::<prop::sample::Index>()) {
        let bytes = encode_axml(&doc, enc);
        let len = cut.index(bytes.len());
        prop_assert!(decode_axml(&bytes[..len]).is_err());
    }

    #[test]
    fn mutated_documents_never_panic(
        doc in support::document(),
        enc in encoding(),
        flips in prop::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..8),
    ) {
        let mut bytes = encode_axml(&doc, enc);
        for (i, b) in flips {
            let at = i.index(bytes.len());
            bytes[at] = b;
        }
        let _ = decode_axml(&bytes);
        let _ = parse_string_pool(&bytes[8.min(bytes.len())..]);
    }

    #[test]
    fn random_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = decode_axml(&bytes);
        let _ = parse_string_pool(&bytes);
    }
}
