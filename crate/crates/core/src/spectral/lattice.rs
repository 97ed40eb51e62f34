//! Integer frequency lattice on the 3-torus.
//!
//! The real trigonometric basis {cos(n.x), sin(n.x)} is indexed by half of
//! Z^3 \ {0}: since cos(-n.x) = cos(n.x), storing both n and -n would double
//! count every degree of freedom. We keep the representative whose first
//! nonzero component is positive.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

/// One nonzero lattice frequency, restricted to the canonical half-lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeIndex(pub [i32; 3]);

impl LatticeIndex {
    /// True when the first nonzero component is strictly positive.
    pub fn is_canonical(&self) -> bool {
        let [x, y, z] = self.0;
        if x != 0 {
            return x > 0;
        }
        if y != 0 {
            return y > 0;
        }
        z > 0
    }

    pub fn norm_sq(&self) -> i64 {
        let [x, y, z] = self.0;
        (x as i64) * (x as i64) + (y as i64) * (y as i64) + (z as i64) * (z as i64)
    }

    /// Euclidean length |n|.
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Japanese bracket squared, 1 + |n|^2.
    pub fn bracket_sq(&self) -> f64 {
        1.0 + self.norm_sq() as f64
    }

    pub fn negated(&self) -> [i32; 3] {
        let [x, y, z] = self.0;
        [-x, -y, -z]
    }
}

/// The canonical half-lattice ball {n : 0 < |n| <= n_max}, in a fixed
/// lexicographic order. All spectra truncated at the same radius share one
/// `ModeSet` through an `Arc`, which makes index-set equality checks cheap.
#[derive(Debug)]
pub struct ModeSet {
    n_max: u32,
    modes: Vec<LatticeIndex>,
}

impl ModeSet {
    /// The shared half-lattice ball of radius `n_max`.
    pub fn ball(n_max: u32) -> Arc<ModeSet> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ModeSet>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("mode set cache poisoned");
        guard
            .entry(n_max)
            .or_insert_with(|| Arc::new(Self::build(n_max)))
            .clone()
    }

    fn build(n_max: u32) -> ModeSet {
        let r = n_max as i32;
        let r2 = (n_max as i64) * (n_max as i64);
        let mut modes = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let n = LatticeIndex([x, y, z]);
                    if n.norm_sq() == 0 || n.norm_sq() > r2 || !n.is_canonical() {
                        continue;
                    }
                    modes.push(n);
                }
            }
        }
        modes.sort();
        ModeSet { n_max, modes }
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LatticeIndex> {
        self.modes.iter()
    }

    pub fn modes(&self) -> &[LatticeIndex] {
        &self.modes
    }

    /// Position of a canonical index in the set, if within the ball.
    pub fn position(&self, n: &LatticeIndex) -> Option<usize> {
        self.modes.binary_search(n).ok()
    }
}
