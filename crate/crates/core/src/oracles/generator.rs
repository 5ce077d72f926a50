use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{aspect_ratio, all_pairs, Graph, ScaleValue};
use crate::par::{self, Execution};
use crate::spcover::{verify_hd1, Hd1Certificate};

/// Recursive star-of-stars. A cluster at depth `t` hangs its children on
/// spokes of length in `[s_t, 2 s_t)` with `s_t = base * growth^(depth-1-t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub seed: u64,
    pub depth: usize,
    /// Inclusive range for the number of children of a cluster.
    pub branching: (usize, usize),
    pub base_weight: u64,
    /// Ratio between spoke scales of consecutive depths; at least 8.
    pub growth: u64,
    /// Link the children of a cluster into an ultrametric clique: spokes
    /// grow fourfold from child to child and child `i` meets a later child
    /// `j` by an edge as long as `j`'s spoke.
    pub sibling_links: bool,
    pub max_vertices: usize,
    pub retries: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 0,
            depth: 2,
            branching: (2, 4),
            base_weight: 3,
            growth: 8,
            sibling_links: false,
            max_vertices: 40,
            retries: 32,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub graph: Graph,
    pub certificate: Hd1Certificate,
    pub attempts: usize,
}

pub fn gen_hd1_instance(p: &GeneratorParams) -> Result<GeneratedInstance> {
    if p.depth == 0 || p.branching.0 == 0 || p.branching.0 > p.branching.1 {
        return Err(Error::InvalidArgument("depth and branching must be positive".into()));
    }
    if p.growth < 8 || p.base_weight == 0 || p.max_vertices < 2 {
        return Err(Error::InvalidArgument(
            "growth must be at least 8, weights positive, room for two vertices".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    for attempt in 1..=p.retries.max(1) {
        let g = draw(p, &mut rng)?;
        if let Some(cert) = verify_hd1(&g).certificate() {
            return Ok(GeneratedInstance {
                graph: g,
                certificate: cert.clone(),
                attempts: attempt,
            });
        }
    }
    Err(Error::RetriesExhausted(p.retries.max(1)))
}

fn draw(p: &GeneratorParams, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let mut edges: Vec<(usize, usize, BigUint)> = Vec::new();
    let mut n = 1usize;
    // (vertex, depth) clusters still to expand, breadth first.
    let mut queue = std::collections::VecDeque::from([(0usize, 0usize)]);
    while let Some((center, t)) = queue.pop_front() {
        if t == p.depth {
            continue;
        }
        let scale = BigUint::from(p.base_weight)
            * BigUint::from(p.growth).pow((p.depth - 1 - t) as u32);
        let want = rng.gen_range(p.branching.0..=p.branching.1);
        let room = p.max_vertices.saturating_sub(n);
        let count = want.min(room);
        let mut spokes: Vec<(usize, BigUint)> = Vec::with_capacity(count);
        for j in 0..count {
            let child = n;
            n += 1;
            let mut w = &scale + rng.gen_range(0..=u64::MAX >> 1) % &scale;
            if p.sibling_links {
                w *= BigUint::from(4u32).pow(j as u32);
            }
            edges.push((center, child, w.clone()));
            spokes.push((child, w));
            queue.push_back((child, t + 1));
        }
        if p.sibling_links {
            for (j, (cj, wj)) in spokes.iter().enumerate() {
                for (ci, _) in &spokes[..j] {
                    edges.push((*ci, *cj, wj.clone()));
                }
            }
        }
    }
    Graph::new(n, edges)
}

/// The standard seeded corpus: parameters cycle through depths 1 to 3,
/// growth 8 and 16, and every fourth instance links siblings with growth
/// 512 so the fourfold spokes stay below the parent scale.
pub fn corpus_params(count: usize, max_vertices: usize) -> Vec<GeneratorParams> {
    (0..count as u64)
        .map(|seed| GeneratorParams {
            seed,
            depth: 1 + (seed % 3) as usize,
            branching: (2, 3 + (seed % 3) as usize),
            base_weight: 2 + seed % 5,
            growth: if seed % 4 == 3 { 512 } else { 8 * (1 + seed % 2) },
            sibling_links: seed % 4 == 3,
            max_vertices,
            retries: 32,
        })
        .collect()
}

/// One generated corpus graph with its provenance.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub params: GeneratorParams,
    pub instance: GeneratedInstance,
    pub aspect_ratio: ScaleValue,
    /// SHA-256 of the certificate JSON, hex.
    pub certificate_digest: String,
}

impl CorpusEntry {
    pub fn manifest_json(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.params.seed,
            "params": self.params,
            "n": self.instance.graph.n(),
            "alpha": self.aspect_ratio.to_string(),
            "attempts": self.instance.attempts,
            "certificate_digest": self.certificate_digest,
        })
    }
}

/// Generates one instance per parameter set, in order.
pub fn build_corpus(params: &[GeneratorParams], exec: Execution) -> Result<Vec<CorpusEntry>> {
    par::map(exec, params, |p| {
        let instance = gen_hd1_instance(p)?;
        let d = all_pairs(&instance.graph);
        let aspect_ratio = aspect_ratio(&d)?;
        let digest = Sha256::digest(instance.certificate.to_json().as_bytes());
        let certificate_digest = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(CorpusEntry {
            params: p.clone(),
            instance,
            aspect_ratio,
            certificate_digest,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_is_a_certified_star() {
        let p = GeneratorParams {
            depth: 1,
            branching: (5, 5),
            ..GeneratorParams::default()
        };
        let inst = gen_hd1_instance(&p).unwrap();
        assert_eq!(inst.graph.n(), 6);
        assert!(inst.graph.edges().iter().all(|e| e.u == 0));
    }

    #[test]
    fn depth_two_seed_42() {
        let p = GeneratorParams {
            seed: 42,
            depth: 2,
            branching: (3, 3),
            ..GeneratorParams::default()
        };
        let inst = gen_hd1_instance(&p).unwrap();
        assert_eq!(inst.graph.n(), 13);
        assert!(verify_hd1(&inst.graph).is_certified());
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GeneratorParams {
            seed: 7,
            sibling_links: true,
            growth: 512,
            ..GeneratorParams::default()
        };
        let a = gen_hd1_instance(&p).unwrap().graph;
        let b = gen_hd1_instance(&p).unwrap().graph;
        assert_eq!(a, b);
    }
}
