//! Seeded generator output frozen on disk. Set `QSOT_BLESS=1` to rewrite.

use std::path::PathBuf;

use qsot_core::linops::random_unitary;
use qsot_core::ComplexMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn golden(name: &str, got: &ComplexMatrix) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    if std::env::var_os("QSOT_BLESS").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(got).unwrap() + "\n").unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let want: ComplexMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(want.dims(), got.dims());
    assert_eq!(want.data(), got.data(), "{name} drifted");
}

#[test]
fn random_unitary_is_reproducible() {
    for d in [2, 3] {
        let u = random_unitary(d, &mut ChaCha8Rng::seed_from_u64(20240601));
        golden(&format!("random_unitary_d{d}.json"), u.matrix());
    }
}

#[test]
fn random_unitary_of_dimension_one_is_a_phase() {
    let u = random_unitary(1, &mut ChaCha8Rng::seed_from_u64(1));
    assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-15);
}
