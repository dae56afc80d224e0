//! Versioned JSON model files: `{version, params, attributes, n_trained, nodes, splits}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tree::{HoeffdingTree, Node, SplitRecord, TreeParams};
use super::{AttributeSpec, TreeError};

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize)]
struct ModelFileRef<'a> {
    version: u32,
    params: &'a TreeParams,
    attributes: &'a [AttributeSpec],
    n_trained: u64,
    nodes: &'a [Node],
    splits: &'a [SplitRecord],
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

#[derive(Deserialize)]
struct ModelFile {
    #[allow(dead_code)]
    version: u32,
    params: TreeParams,
    attributes: Vec<AttributeSpec>,
    n_trained: u64,
    nodes: Vec<Node>,
    splits: Vec<SplitRecord>,
}

impl HoeffdingTree {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFileRef {
            version: MODEL_VERSION,
            params: &self.params,
            attributes: &self.attributes,
            n_trained: self.n_trained,
            nodes: &self.nodes,
            splits: &self.splits,
        })
        .expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, TreeError> {
        let probe: VersionProbe =
            serde_json::from_str(s).map_err(|e| TreeError::Corrupt(e.to_string()))?;
        if probe.version != MODEL_VERSION {
            return Err(TreeError::VersionMismatch {
                found: probe.version,
                expected: MODEL_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(s).map_err(|e| TreeError::Corrupt(e.to_string()))?;
        let mut tree = HoeffdingTree::new(file.attributes, file.params)
            .map_err(|e| TreeError::Corrupt(e.to_string()))?;
        if file.nodes.is_empty() {
            return Err(TreeError::Corrupt("no nodes".into()));
        }
        tree.nodes = file.nodes;
        tree.n_trained = file.n_trained;
        tree.splits = file.splits;
        tree.validate().map_err(TreeError::Corrupt)?;
        Ok(tree)
    }
}

pub fn save(tree: &HoeffdingTree, path: &Path) -> Result<(), TreeError> {
    std::fs::write(path, tree.to_json()).map_err(|e| TreeError::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<HoeffdingTree, TreeError> {
    let s = std::fs::read_to_string(path).map_err(|e| TreeError::Io(format!("{}: {e}", path.display())))?;
    HoeffdingTree::from_json(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::review::Domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_tree() -> HoeffdingTree {
        let attrs = vec![
            AttributeSpec::rating("overall", Domain::OVERALL),
            AttributeSpec::equal_width("sentiment", -1.0, 1.0, 20).unwrap(),
        ];
        let mut t = HoeffdingTree::new(attrs, TreeParams { grace: 20, ..TreeParams::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3_000 {
            let o = rng.gen_range(1..=10);
            let s: f64 = rng.gen_range(-1.0..1.0);
            t.train_one(&[Some(o as f64), Some(s)], Some(o >= 6 || s > 0.7)).unwrap();
        }
        t
    }

    #[test]
    fn roundtrip_preserves_predictions_and_counters() {
        let t = small_tree();
        assert!(t.node_count() > 1);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("model.json");
        save(&t, &p).unwrap();
        let back = load(&p).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.n_trained(), t.n_trained());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let v = [
                if rng.gen_bool(0.9) { Some(rng.gen_range(1..=10) as f64) } else { None },
                Some(rng.gen_range(-1.0..1.0)),
            ];
            let a = t.predict(&v).unwrap();
            let b = back.predict(&v).unwrap();
            assert_eq!(a.probability.to_bits(), b.probability.to_bits());
            assert_eq!(a.class, b.class);
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let json = small_tree().to_json();
        let cut = &json[..json.len() / 2];
        assert!(matches!(HoeffdingTree::from_json(cut), Err(TreeError::Corrupt(_))));
    }

    #[test]
    fn version_mismatch() {
        let json = small_tree().to_json().replacen("\"version\": 1", "\"version\": 99", 1);
        assert_eq!(
            HoeffdingTree::from_json(&json),
            Err(TreeError::VersionMismatch { found: 99, expected: MODEL_VERSION })
        );
    }

    #[test]
    fn structurally_broken_file_is_corrupt() {
        let t = small_tree();
        let json = t.to_json();
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["nodes"].as_array_mut().unwrap().pop();
        assert!(matches!(
            HoeffdingTree::from_json(&v.to_string()),
            Err(TreeError::Corrupt(_))
        ));
    }

    #[test]
    fn field_order_is_stable() {
        let json = small_tree().to_json();
        let keys: Vec<usize> = ["\"version\"", "\"params\"", "\"attributes\"", "\"n_trained\"", "\"nodes\"", "\"splits\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
