#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(shape) = pfreq::io::shape_from_json(text) {
        let again = pfreq::io::shape_from_json(&pfreq::io::shape_to_json(&shape))
            .expect("serialized shape must re-parse");
        assert_eq!(shape, again);
        // accepted shapes answer every analytic query with finite values
        assert!(shape.inradius().is_finite() && shape.inradius() > 0.0);
        assert!(shape.measure().is_finite() && shape.measure() > 0.0);
        assert!(shape.perimeter().value.is_finite());
        if let Some(pg) = shape.polygon() {
            assert!(pg.measure() > 0.0);
        }
    }
});
