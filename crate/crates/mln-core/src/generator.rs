//! Seeded Erdős–Rényi multilayer network generation.
//!
//! Layers are node-aligned: the same actor set appears in every layer. Each
//! layer is wired as an independent G(n, p) with p = k/(n−1), so the expected
//! mean degree is k. Optionally, node-layer pairs across adjacent layers are
//! wired with probability q (q = 0 gives the plain multiplex input the
//! benchmark uses; q > 0 produces interlayer edges for projection).
//!
//! Sampling walks the linearized pair-index space with geometric skips, so a
//! layer costs O(edges) draws rather than O(n²) trials. The RNG is ChaCha8
//! seeded directly from the config seed, and the skip logarithm goes through
//! libm, keeping output bit-identical across platforms. A conformance test
//! pins the exact output so the sampling algorithm cannot drift silently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, StoreError};
use crate::model::LayerCoordinate;
use crate::store::MultilayerStore;

/// Parameters for [`generate_er`].
#[derive(Debug, Clone)]
pub struct ErConfig {
    /// Number of layers in the generated dimension (≥ 1).
    pub layers: usize,
    /// Actors per layer, n (≥ 1).
    pub nodes: usize,
    /// Target mean intralayer degree, k (≥ 0, with k/(n−1) ≤ 1).
    pub mean_degree: f64,
    /// Probability of wiring each cross-layer node pair in adjacent layers.
    pub interlayer_prob: f64,
    pub seed: u64,
    /// Name of the generated dimension.
    pub dimension: String,
}

impl ErConfig {
    /// Two node-aligned layers, no interlayer edges: the benchmark input.
    pub fn benchmark(nodes: usize, mean_degree: f64, seed: u64) -> Self {
        ErConfig {
            layers: 2,
            nodes,
            mean_degree,
            interlayer_prob: 0.0,
            seed,
            dimension: "layer".to_owned(),
        }
    }

    /// Intralayer wiring probability p = k/(n−1).
    fn edge_probability(&self) -> Result<f64> {
        if self.nodes == 1 {
            return if self.mean_degree == 0.0 {
                Ok(0.0)
            } else {
                Err(StoreError::InvalidConfig(
                    "mean degree must be 0 when there is a single node".into(),
                ))
            };
        }
        let p = self.mean_degree / (self.nodes as f64 - 1.0);
        if !(0.0..=1.0).contains(&p) {
            return Err(StoreError::InvalidConfig(format!(
                "edge probability k/(n-1) = {p} outside [0, 1]"
            )));
        }
        Ok(p)
    }

    fn validate(&self) -> Result<f64> {
        if self.layers < 1 {
            return Err(StoreError::InvalidConfig("layer count must be >= 1".into()));
        }
        if self.nodes < 1 {
            return Err(StoreError::InvalidConfig(
                "nodes per layer must be >= 1".into(),
            ));
        }
        if !self.mean_degree.is_finite() || self.mean_degree < 0.0 {
            return Err(StoreError::InvalidConfig(
                "mean degree must be finite and >= 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.interlayer_prob) {
            return Err(StoreError::InvalidConfig(
                "interlayer probability must lie in [0, 1]".into(),
            ));
        }
        if self.dimension.is_empty() {
            return Err(StoreError::InvalidConfig(
                "dimension name must be non-empty".into(),
            ));
        }
        self.edge_probability()
    }
}

/// Name of the i-th generated layer.
pub fn layer_name(i: usize) -> String {
    format!("l{i}")
}

/// Name of the v-th generated actor.
pub fn actor_name(v: usize) -> String {
    format!("a{v}")
}

/// Geometric skip: how many candidate pairs to pass over before the next
/// edge, for wiring probability `p`. Uses libm so the stream of skips is
/// bit-identical everywhere.
fn skip(rng: &mut ChaCha8Rng, p: f64) -> u64 {
    debug_assert!(p > 0.0);
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = rng.gen();
    let s = libm::log(1.0 - u) / libm::log(1.0 - p);
    if s >= u64::MAX as f64 {
        u64::MAX
    } else {
        s as u64
    }
}

/// First row of the upper-triangle pair list for row `u` (0-based, n nodes).
fn row_start(u: u64, n: u64) -> u64 {
    u * n - u * (u + 1) / 2
}

/// Maps a linear index t ∈ [0, n(n−1)/2) to the pair (u, v), u < v, in
/// lexicographic order. Float estimate plus integer correction, so it stays
/// exact even when t approaches 5·10⁹.
fn unrank_pair(t: u64, n: u64) -> (u64, u64) {
    let nf = n as f64 - 0.5;
    let est = nf - libm::sqrt(nf * nf - 2.0 * t as f64);
    let mut u = (est.max(0.0) as u64).min(n - 2);
    while row_start(u + 1, n) <= t {
        u += 1;
    }
    while row_start(u, n) > t {
        u -= 1;
    }
    let v = u + 1 + (t - row_start(u, n));
    (u, v)
}

/// Visits each index of `[0, space)` independently with probability `p`,
/// in increasing order, with expected O(p·space) work.
fn sample_indices(rng: &mut ChaCha8Rng, space: u64, p: f64, mut visit: impl FnMut(u64) -> Result<()>) -> Result<()> {
    if p <= 0.0 || space == 0 {
        return Ok(());
    }
    let mut t = skip(rng, p);
    while t < space {
        visit(t)?;
        t = t.saturating_add(1).saturating_add(skip(rng, p));
    }
    Ok(())
}

/// Fills an empty store with a seeded random multilayer network.
pub fn generate_er(config: &ErConfig, store: &mut dyn MultilayerStore) -> Result<()> {
    let p = config.validate()?;
    if !store.is_empty() {
        return Err(StoreError::NonEmptyStore);
    }
    let n = config.nodes as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    store.create_dimension(&config.dimension, &layer_name(0))?;
    for i in 1..config.layers {
        store.create_layer(&config.dimension, &layer_name(i))?;
    }

    let coords: Vec<LayerCoordinate> = (0..config.layers)
        .map(|i| LayerCoordinate::new(vec![layer_name(i)]))
        .collect();
    let actors: Vec<String> = (0..config.nodes).map(actor_name).collect();
    for coord in &coords {
        for actor in &actors {
            store.add_node(actor, coord)?;
        }
    }

    // intralayer wiring: upper-triangle pair space per layer
    let pair_space = n * (n - 1) / 2;
    for coord in &coords {
        sample_indices(&mut rng, pair_space, p, |t| {
            let (u, v) = unrank_pair(t, n);
            store.add_edge(&actors[u as usize], coord, &actors[v as usize], coord)?;
            Ok(())
        })?;
    }

    // interlayer wiring between adjacent layer pairs: full n×n space,
    // including same-actor pairs (distinct node-layers)
    for window in coords.windows(2) {
        sample_indices(&mut rng, n * n, config.interlayer_prob, |t| {
            let (u, v) = (t / n, t % n);
            store.add_edge(
                &actors[u as usize],
                &window[0],
                &actors[v as usize],
                &window[1],
            )?;
            Ok(())
        })?;
    }
    Ok(())
}
