//! Versioned JSON snapshots of an [`MvdIndex`].
//!
//! Layout (version 1):
//!
//! ```text
//! {
//!   "format": "mvd-snapshot",
//!   "version": 1,
//!   "k": 100,                 construction parameter
//!   "seed": 20201231,         random seed
//!   "demotion": true,         deletion demotion switch
//!   "revision": 0,            number of updates applied since build
//!   "next_id": 4,             smallest id never issued
//!   "points": [[id, x, y], ...],     sorted by id
//!   "layers": [[id, ...], ...]       layer 0 first, ids sorted
//! }
//! ```
//!
//! Only per-layer id sets are stored. Triangulations are rebuilt on load,
//! which is deterministic because cocircular ties are broken by id.
//! Maintenance after loading a snapshot at revision `r` draws from random
//! stream `r + 1` of the stored seed, so replaying the same update on the
//! same snapshot gives the same result.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointId};
use crate::mvd::{MvdConfig, MvdIndex};

pub const SNAPSHOT_FORMAT: &str = "mvd-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub format: String,
    pub version: u32,
    pub k: usize,
    pub seed: u64,
    pub demotion: bool,
    pub revision: u64,
    pub next_id: u64,
    pub points: Vec<(u64, f64, f64)>,
    pub layers: Vec<Vec<u64>>,
}

impl Snapshot {
    pub fn capture(index: &MvdIndex, revision: u64) -> Self {
        let config = index.config();
        Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            k: config.k,
            seed: config.seed,
            demotion: config.demotion,
            revision,
            next_id: index.next_id(),
            points: index.points().into_iter().map(|(id, p)| (id.0, p.x, p.y)).collect(),
            layers: index
                .layers()
                .iter()
                .map(|l| {
                    let mut ids: Vec<u64> = l.ids().map(|id| id.0).collect();
                    ids.sort_unstable();
                    ids
                })
                .collect(),
        }
    }

    pub fn restore(&self) -> Result<MvdIndex> {
        if self.format != SNAPSHOT_FORMAT {
            return Err(Error::Snapshot(format!("unexpected format {:?}", self.format)));
        }
        if self.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {}", self.version)));
        }
        let points = self
            .points
            .iter()
            .map(|&(id, x, y)| Ok((PointId(id), Point::try_new(x, y)?)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(max) = self.points.iter().map(|e| e.0).max() {
            if self.next_id <= max {
                return Err(Error::Snapshot(format!(
                    "next_id {} does not exceed id {max}",
                    self.next_id
                )));
            }
        }
        if points.is_empty() != self.layers.is_empty() {
            return Err(Error::Snapshot("layers do not match the point table".into()));
        }
        let layers: Vec<Vec<PointId>> = self
            .layers
            .iter()
            .map(|l| l.iter().map(|&id| PointId(id)).collect())
            .collect();
        let config = MvdConfig {
            k: self.k,
            seed: self.seed,
            demotion: self.demotion,
        };
        MvdIndex::from_parts(config, &points, &layers, self.next_id, self.revision + 1)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("snapshot serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))
    }
}

pub fn save_snapshot(path: &Path, index: &MvdIndex, revision: u64) -> Result<()> {
    fs::write(path, Snapshot::capture(index, revision).to_json()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a snapshot, returning the index and its revision.
pub fn load_snapshot(path: &Path) -> Result<(MvdIndex, u64)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let snap: Snapshot =
        serde_json::from_str(&text).map_err(|e| Error::Snapshot(format!("{}: {e}", path.display())))?;
    let index = snap.restore()?;
    Ok((index, snap.revision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_index() -> MvdIndex {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<_> = (0..3000u64)
            .map(|i| (PointId(i), Point::new(rng.random(), rng.random())))
            .collect();
        MvdIndex::build(&pts, 8, 2).unwrap()
    }

    #[test]
    fn capture_restore_round_trip() {
        let idx = sample_index();
        let snap = Snapshot::capture(&idx, 3);
        let back = Snapshot::from_json(&snap.to_json()).unwrap();
        assert_eq!(back, snap);
        let restored = back.restore().unwrap();
        assert_eq!(Snapshot::capture(&restored, 3), snap);
        assert_eq!(restored.layer_sizes(), idx.layer_sizes());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let q = Point::new(rng.random(), rng.random());
            assert_eq!(restored.knn(q, 5).unwrap(), idx.knn(q, 5).unwrap());
        }
    }

    #[test]
    fn empty_index_round_trips() {
        let idx = MvdIndex::new(MvdConfig::default()).unwrap();
        let snap = Snapshot::capture(&idx, 0);
        assert!(snap.points.is_empty() && snap.layers.is_empty());
        assert!(snap.restore().unwrap().is_empty());
    }

    #[test]
    fn rejects_inconsistent_snapshots() {
        let good = Snapshot::capture(&sample_index(), 0);
        let mut bad = good.clone();
        bad.version = 2;
        assert!(matches!(bad.restore(), Err(Error::Snapshot(_))));
        let mut bad = good.clone();
        bad.format = "other".into();
        assert!(bad.restore().is_err());
        let mut bad = good.clone();
        bad.layers[1].push(999_999);
        assert!(bad.restore().is_err());
        let mut bad = good.clone();
        bad.layers[0].pop();
        assert!(bad.restore().is_err());
        let mut bad = good.clone();
        bad.next_id = 5;
        assert!(bad.restore().is_err());
        let mut bad = good.clone();
        bad.k = 1;
        assert!(matches!(bad.restore(), Err(Error::InvalidParameter(_))));
        assert!(Snapshot::from_json("{\"format\": 1}").is_err());
    }
}
