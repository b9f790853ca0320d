#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(pg) = pfreq::io::polygon_from_json(text) {
        // accepted polygons must round-trip and support the basic queries
        let again = pfreq::io::polygon_from_json(&pfreq::io::polygon_to_json(&pg))
            .expect("serialized polygon must re-parse");
        assert_eq!(pg.vertices(), again.vertices());
        assert!(pg.measure() > 0.0);
        assert!(pg.perimeter().is_finite());
    }
});
