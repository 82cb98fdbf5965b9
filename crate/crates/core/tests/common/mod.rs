#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DVector;
use outcome_bnb::instance::{QcqpInstance, TOL_FEAS};
use outcome_bnb::io::{parse_instance, OracleFile};
use outcome_bnb::oracle::box_hint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/oracle")
}

pub struct Fixture {
    pub name: String,
    pub path: PathBuf,
    pub text: String,
    pub instance: QcqpInstance,
    pub oracle: OracleFile,
}

/// Seeded instances with their stored brute-force minima, sorted by name.
pub fn load_fixtures() -> Vec<Fixture> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .expect("fixture directory")
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name.ends_with(".json") && !name.ends_with(".oracle.json")
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).unwrap();
            let instance = parse_instance(&text).unwrap();
            let oracle_path = path.with_extension("oracle.json");
            let oracle: OracleFile =
                serde_json::from_str(&std::fs::read_to_string(&oracle_path).unwrap()).unwrap();
            Fixture {
                name: path.file_stem().unwrap().to_string_lossy().into_owned(),
                path,
                text,
                instance,
                oracle,
            }
        })
        .collect()
}

/// `(n, r, p, seed)` from a name like `g_n3_r2_p1_s1011`.
pub fn gen_params(name: &str) -> (usize, usize, usize, u64) {
    let field = |tag: char| -> u64 {
        name.split('_')
            .find_map(|part| part.strip_prefix(tag))
            .and_then(|v| v.parse().ok())
            .unwrap()
    };
    (field('n') as usize, field('r') as usize, field('p') as usize, field('s'))
}

/// Uniform samples of the feasible set by rejection from its bounding box.
pub fn sample_feasible(inst: &QcqpInstance, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let (lo, hi) = box_hint(inst).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        assert!(tries < 10_000_000, "feasible set too thin to sample");
        let x = DVector::from_fn(inst.n(), |i, _| rng.random_range(lo[i]..=hi[i]));
        if inst.is_feasible(&x, TOL_FEAS) {
            out.push(x);
        }
    }
    out
}
