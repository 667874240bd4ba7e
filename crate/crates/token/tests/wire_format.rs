//! Golden-file tests pinning the token wire format.
//!
//! The fixtures were produced by an independent HMAC-SHA256 chain
//! implementation; any drift in the JSON layout, base64 alphabet, or chain
//! computation shows up as a byte-level mismatch here.

use tpc_token::TransferToken;

const ROOT_KEY: &[u8] = b"golden-root-key";
const ISSUER: &str = "https://ep.example:8443";

fn golden(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap().trim().to_owned()
}

#[test]
fn base_token_serializes_to_golden_bytes() {
    let token = TransferToken::build(
        ROOT_KEY,
        ISSUER,
        "k1",
        vec![
            "scope:DOWNLOAD:/data".to_owned(),
            "before:2030-01-01T00:00:00Z".to_owned(),
        ],
    );
    assert_eq!(token.serialize(), golden("golden_base.token"));
}

#[test]
fn attenuated_token_serializes_to_golden_bytes() {
    let token = TransferToken::build(
        ROOT_KEY,
        ISSUER,
        "k1",
        vec![
            "scope:DOWNLOAD:/data".to_owned(),
            "before:2030-01-01T00:00:00Z".to_owned(),
        ],
    )
    .attenuate("scope:DOWNLOAD:/data/run1")
    .unwrap();
    assert_eq!(token.serialize(), golden("golden_attenuated.token"));
}

#[test]
fn golden_tokens_parse_and_verify() {
    let token = TransferToken::parse(&golden("golden_base.token")).unwrap();
    assert_eq!(token.issuer_location(), ISSUER);
    assert_eq!(token.key_id(), "k1");
    let outcome = tpc_token::verify(
        &golden("golden_base.token"),
        ROOT_KEY,
        1700000000,
        &"DOWNLOAD:/data/x".parse().unwrap(),
        ISSUER,
    );
    assert!(outcome.is_pass());

    // The attenuated golden token denies what its narrow group excludes.
    let outcome = tpc_token::verify(
        &golden("golden_attenuated.token"),
        ROOT_KEY,
        1700000000,
        &"DOWNLOAD:/data/run2".parse().unwrap(),
        ISSUER,
    );
    assert_eq!(
        outcome,
        tpc_token::VerifyOutcome::Fail(tpc_token::VerifyFailure::ScopeDenied)
    );
}

mod attenuation_monotonicity {
    use proptest::prelude::*;
    use tpc_token::{verify, TransferToken, VerifyOutcome};

    fn path_strategy() -> impl Strategy<Value = String> {
        proptest::collection::vec("[a-c]{1,2}", 0..4).prop_map(|p| format!("/{}", p.join("/")))
    }

    fn caveat_strategy() -> impl Strategy<Value = String> {
        prop_oneof![
            path_strategy().prop_map(|p| format!("scope:DOWNLOAD:{p}")),
            path_strategy().prop_map(|p| format!("scope:UPLOAD:{p}")),
            Just("before:2029-06-01T00:00:00Z".to_owned()),
            Just("audience:https://ep:1".to_owned()),
        ]
    }

    proptest! {
        /// Whatever an attenuated token authorizes, the original authorized
        /// too: appending caveats never grows the authorized set.
        #[test]
        fn attenuation_never_grows_authority(
            issued_paths in proptest::collection::vec(path_strategy(), 1..3),
            caveats in proptest::collection::vec(caveat_strategy(), 1..4),
            needed_path in path_strategy(),
            needed_upload in any::<bool>(),
        ) {
            let key = b"monotonicity-key";
            let mut caveat_list: Vec<String> = issued_paths
                .iter()
                .map(|p| format!("scope:DOWNLOAD:{p}"))
                .collect();
            caveat_list.push("before:2030-01-01T00:00:00Z".to_owned());
            let original = TransferToken::build(key, "https://ep:1", "k", caveat_list);
            let mut attenuated = original.clone();
            for caveat in &caveats {
                attenuated = attenuated.attenuate(caveat).unwrap();
            }
            let activity = if needed_upload { "UPLOAD" } else { "DOWNLOAD" };
            let needed = format!("{activity}:{needed_path}").parse().unwrap();
            let now = 1700000000;
            let after = verify(&attenuated.serialize(), key, now, &needed, "https://ep:1");
            if after == VerifyOutcome::Pass {
                prop_assert_eq!(
                    verify(&original.serialize(), key, now, &needed, "https://ep:1"),
                    VerifyOutcome::Pass
                );
            }
        }
    }
}
