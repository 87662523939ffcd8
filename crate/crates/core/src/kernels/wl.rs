//! Weisfeiler-Lehman subtree features.
//!
//! Labels are 64-bit hashes rather than dictionary indices, so every graph
//! hashed with the same function shares one implicit dictionary. The label of
//! `v` at round `r` hashes `(r, own label, multiset of neighbour labels)`; the
//! multiset enters through a sum of mixed labels, which is order-free and so
//! needs no sort.

use crate::graph::{pair_of_unchecked, Graph};

/// Round-0 label shared by every vertex.
const INITIAL_LABEL: u64 = 0x243f_6a88_85a3_08d3;

#[inline]
fn mix(mut z: u64) -> u64 {
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn relabel(round: usize, own: u64, neighbour_sum: u64, degree: usize) -> u64 {
    let mut h = mix(round as u64 ^ 0x9e37_79b9_7f4a_7c15);
    h = mix(h ^ own);
    h = mix(h ^ neighbour_sum);
    mix(h ^ degree as u64)
}

/// Sparse label histograms, one block per round `0..=levels`, each sorted by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlFeature {
    pub blocks: Vec<Vec<(u64, u64)>>,
}

impl WlFeature {
    pub fn levels(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn dot(&self, other: &WlFeature) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| sorted_dot(a, b))
            .sum()
    }

    /// `(label, count)` over all blocks; labels of different rounds never coincide.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.blocks.iter().flatten().copied()
    }
}

fn sorted_dot(a: &[(u64, u64)], b: &[(u64, u64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc as f64
}

/// Per-round vertex labels of one graph.
#[derive(Debug, Clone)]
pub(crate) struct WlLabels {
    rounds: Vec<Vec<u64>>,
}

impl WlLabels {
    pub(crate) fn new(g: &Graph, levels: usize) -> Self {
        let n = g.n();
        let mut rounds = vec![vec![INITIAL_LABEL; n]];
        let mut mixed: Vec<u64> = Vec::with_capacity(n);
        for r in 1..=levels {
            let prev = &rounds[r - 1];
            mixed.clear();
            mixed.extend(prev.iter().map(|&l| mix(l)));
            let next = (0..n)
                .map(|v| {
                    let sum = g.neighbours(v).fold(0u64, |acc, u| acc.wrapping_add(mixed[u]));
                    relabel(r, prev[v], sum, g.degree(v))
                })
                .collect();
            rounds.push(next);
        }
        Self { rounds }
    }

    pub(crate) fn levels(&self) -> usize {
        self.rounds.len() - 1
    }

    pub(crate) fn features(&self) -> WlFeature {
        let blocks = self
            .rounds
            .iter()
            .map(|labels| {
                let mut sorted = labels.clone();
                sorted.sort_unstable();
                let mut block: Vec<(u64, u64)> = Vec::new();
                for l in sorted {
                    match block.last_mut() {
                        Some((last, c)) if *last == l => *c += 1,
                        _ => block.push((l, 1)),
                    }
                }
                block
            })
            .collect();
        WlFeature { blocks }
    }

    /// `φ(y) - φ(x)` as unmerged `(label, ±1)` entries, where `y` is `g` with
    /// pair `s` toggled. Only vertices within `r - 1` hops of the pair can
    /// change their round-`r` label.
    pub(crate) fn toggle_diff(&self, g: &Graph, s: usize, out: &mut Vec<(u64, f64)>) {
        let n = g.n();
        let (i, j) = pair_of_unchecked(s, n);
        let adding = !g.edge(s);
        let levels = self.rounds.len() - 1;
        if levels == 0 {
            return;
        }
        let mut in_ball = vec![false; n];
        let mut ball = vec![i, j];
        in_ball[i] = true;
        in_ball[j] = true;
        // labels of y at the previous round for vertices in the ball
        let mut prev_patch: Vec<u64> = vec![0; n];
        let mut patched = vec![false; n];
        let mut next_patch: Vec<(usize, u64)> = Vec::new();
        let mut frontier_start = 0;

        for r in 1..=levels {
            if r > 1 {
                let frontier_end = ball.len();
                for idx in frontier_start..frontier_end {
                    let v = ball[idx];
                    for u in g.neighbours(v) {
                        if !in_ball[u] {
                            in_ball[u] = true;
                            ball.push(u);
                        }
                    }
                }
                frontier_start = frontier_end;
            }
            let prev = &self.rounds[r - 1];
            let label_y = |u: usize| if patched[u] { prev_patch[u] } else { prev[u] };
            next_patch.clear();
            for &v in &ball {
                let mut sum = 0u64;
                let mut deg = 0usize;
                for u in g.neighbours(v) {
                    if (v == i && u == j) || (v == j && u == i) {
                        continue;
                    }
                    sum = sum.wrapping_add(mix(label_y(u)));
                    deg += 1;
                }
                if adding && (v == i || v == j) {
                    let other = if v == i { j } else { i };
                    sum = sum.wrapping_add(mix(label_y(other)));
                    deg += 1;
                }
                let new = relabel(r, label_y(v), sum, deg);
                let old = self.rounds[r][v];
                if new != old {
                    out.push((old, -1.0));
                    out.push((new, 1.0));
                }
                next_patch.push((v, new));
            }
            for &(v, l) in &next_patch {
                prev_patch[v] = l;
                patched[v] = true;
            }
        }
    }
}

pub fn wl_features(g: &Graph, levels: usize) -> WlFeature {
    WlLabels::new(g, levels).features()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeMap, HashMap};

    /// Textbook WL with an explicit compression dictionary shared by both graphs.
    fn naive_wl_kernel(g: &Graph, h: &Graph, levels: usize) -> f64 {
        let mut labels: Vec<Vec<usize>> = vec![vec![0; g.n()], vec![0; h.n()]];
        let graphs = [g, h];
        let count = |labels: &Vec<Vec<usize>>| -> f64 {
            let mut hist: [HashMap<usize, u64>; 2] = Default::default();
            for k in 0..2 {
                for &l in &labels[k] {
                    *hist[k].entry(l).or_default() += 1;
                }
            }
            hist[0]
                .iter()
                .map(|(l, c)| (c * hist[1].get(l).copied().unwrap_or(0)) as f64)
                .sum()
        };
        let mut total = count(&labels);
        for _ in 0..levels {
            let mut dict: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut next = vec![Vec::new(), Vec::new()];
            for k in 0..2 {
                for v in 0..graphs[k].n() {
                    let mut neigh: Vec<usize> =
                        graphs[k].neighbours(v).map(|u| labels[k][u]).collect();
                    neigh.sort_unstable();
                    let fresh = dict.len();
                    let id = *dict.entry((labels[k][v], neigh)).or_insert(fresh);
                    next[k].push(id);
                }
            }
            labels = next;
            total += count(&labels);
        }
        total
    }

    #[test]
    fn matches_dictionary_compression() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let p = rng.gen_range(0.1..0.9);
            let g = Graph::erdos_renyi(n, p, &mut rng);
            let h = Graph::erdos_renyi(rng.gen_range(2..=8), p, &mut rng);
            for levels in [0, 1, 3, 5] {
                let fast = wl_features(&g, levels).dot(&wl_features(&h, levels));
                assert_eq!(fast, naive_wl_kernel(&g, &h, levels));
            }
        }
    }

    #[test]
    fn triangle_and_star_examples() {
        let k3 = wl_features(&Graph::complete(3), 1);
        assert!(k3.blocks.iter().all(|b| b.len() == 1 && b[0].1 == 3));

        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let tri = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let (a, b) = (wl_features(&star, 1), wl_features(&tri, 1));
        assert_eq!(a.blocks[0], b.blocks[0]);
        assert_ne!(a.blocks[1], b.blocks[1]);
        assert_eq!(a.blocks[0][0].1, 4);
    }

    #[test]
    fn toggle_diff_matches_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..60 {
            let n = rng.gen_range(2..=12);
            let g = Graph::erdos_renyi(n, rng.gen_range(0.05..0.6), &mut rng);
            let s = rng.gen_range(0..g.num_pairs());
            let levels = rng.gen_range(0..=5);
            let base = WlLabels::new(&g, levels);
            let mut diff = Vec::new();
            base.toggle_diff(&g, s, &mut diff);

            let mut expected: HashMap<u64, f64> = HashMap::new();
            for (l, c) in wl_features(&g.with_edge(s, !g.edge(s)).unwrap(), levels).entries() {
                *expected.entry(l).or_default() += c as f64;
            }
            for (l, c) in base.features().entries() {
                *expected.entry(l).or_default() -= c as f64;
            }
            let mut got: HashMap<u64, f64> = HashMap::new();
            for (l, c) in diff {
                *got.entry(l).or_default() += c;
            }
            expected.retain(|_, v| *v != 0.0);
            got.retain(|_, v| *v != 0.0);
            assert_eq!(got, expected);
        }
    }
}
