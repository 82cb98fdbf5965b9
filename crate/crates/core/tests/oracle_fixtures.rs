//! The stored fixtures must still be what the generator and the oracles
//! produce today.

mod common;

use outcome_bnb::io::{emit_instance, generate, GenParams, OracleFile};
use outcome_bnb::oracle::{grid_search, vertex_enumerate_box, OracleMethod};

use common::{gen_params, load_fixtures};

#[test]
fn instances_regenerate_byte_for_byte() {
    let fixtures = load_fixtures();
    assert!(fixtures.len() >= 25);
    for f in fixtures {
        let (n, r, p, seed) = gen_params(&f.name);
        let inst = generate(&GenParams { n, r, p, seed }).unwrap();
        assert_eq!(emit_instance(&inst), f.text, "{}", f.name);
    }
}

#[test]
fn oracle_values_are_reproduced() {
    for f in load_fixtures() {
        let fresh = match vertex_enumerate_box(&f.instance) {
            Ok(res) => res,
            Err(_) => grid_search(&f.instance, 0.01, None).unwrap(),
        };
        let stored = &f.oracle;
        assert_eq!(OracleFile::from(&fresh), *stored, "{}", f.name);
        if fresh.method == OracleMethod::VertexEnum {
            // the grid brackets the exact corner value from above
            let grid = grid_search(&f.instance, 0.01, None).unwrap();
            assert!(grid.value >= fresh.value - 1e-12);
            assert!(grid.value - fresh.value <= grid.tolerance, "{}", f.name);
        }
    }
}
