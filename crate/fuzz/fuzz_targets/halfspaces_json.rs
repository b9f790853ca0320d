#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(hs) = pfreq::io::halfspaces_from_json(text) {
        let again = pfreq::io::halfspaces_from_json(&pfreq::io::halfspaces_to_json(&hs))
            .expect("serialized halfspace set must re-parse");
        assert_eq!(hs.dim(), again.dim());
        assert_eq!(hs.rows().len(), again.rows().len());
        // the inball solve must not panic on any accepted set
        let _ = pfreq::geometry::chebyshev_center(&hs);
    }
});
