#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 18 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mesh) = pfreq::io::mesh_from_json(text) {
        let again = pfreq::io::mesh_to_json(&mesh);
        let mesh2 = pfreq::io::mesh_from_json(&again).expect("serialized mesh must re-parse");
        assert_eq!(mesh.nodes(), mesh2.nodes());
        assert_eq!(mesh.triangles(), mesh2.triangles());
        assert_eq!(mesh.marks(), mesh2.marks());
        assert!(mesh.area() > 0.0);
    }
});
