#![no_main]

use libfuzzer_sys::fuzz_target;
use rmrl_core::harness::Checkpoint;
use sha2::{Digest, Sha256};

fuzz_target!(|data: &[u8]| {
    let _ = Checkpoint::decode(data);

    // Most mutations break the digest; re-seal the body so the field parser
    // is exercised as well.
    if data.len() >= 32 {
        let body = &data[..data.len() - 32];
        let mut sealed = body.to_vec();
        sealed.extend_from_slice(&Sha256::digest(body));
        if let Ok(ckpt) = Checkpoint::decode(&sealed) {
            let again = Checkpoint::decode(&ckpt.encode()).expect("encoded checkpoint decodes");
            assert_eq!(again.encode(), ckpt.encode());
        }
    }
});
