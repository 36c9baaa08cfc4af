//! Network checkpoints: a versioned JSON dump of spec, scalers, and
//! row-major weight matrices. JSON float serialization round-trips f64
//! exactly, so a loaded network reproduces bit-identical predictions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SurrogateError, SurrogateNet};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    net: SurrogateNet,
}

pub fn save_net(net: &SurrogateNet, path: &Path) -> Result<(), SurrogateError> {
    let doc = Checkpoint {
        format_version: CHECKPOINT_FORMAT_VERSION,
        net: net.clone(),
    };
    fs::write(path, serde_json::to_string(&doc)?)?;
    Ok(())
}

pub fn load_net(path: &Path) -> Result<SurrogateNet, SurrogateError> {
    let doc: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if doc.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(SurrogateError::Version {
            got: doc.format_version,
            supported: CHECKPOINT_FORMAT_VERSION,
        });
    }
    Ok(doc.net)
}

#[cfg(test)]
mod tests {
    use super::super::{build, train, NetSpec, TrainConfig};
    use super::*;
    use crate::traffic::Solution;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::fs;

    #[test]
    fn checkpoint_round_trip_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let dataset: Vec<(Solution, f64)> = (0..64)
            .map(|_| {
                let xs: Vec<i64> = (0..3).map(|_| rng.gen_range(5..=60)).collect();
                let y = xs.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
                (Solution::new(xs), y)
            })
            .collect();
        let mut net = build(NetSpec::for_dimensionality(3, 17)).unwrap();
        let cfg = TrainConfig {
            epochs: 10,
            ..TrainConfig::default()
        };
        train(&mut net, &dataset, &cfg, 5).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_net(&net, &path).unwrap();
        let loaded = load_net(&path).unwrap();

        for (s, _) in &dataset {
            let a = net.predict(s).unwrap();
            let b = loaded.predict(s).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let net = build(NetSpec::for_dimensionality(2, 0)).unwrap();
        save_net(&net, &path).unwrap();
        let tampered = fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\":1", "\"format_version\":9");
        fs::write(&path, tampered).unwrap();
        assert!(matches!(
            load_net(&path),
            Err(SurrogateError::Version { got: 9, .. })
        ));
    }
}
