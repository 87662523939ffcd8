//! Network summaries used by the graphical baselines and the shortest-path kernel.

use std::collections::VecDeque;

use super::Graph;

/// Distance between vertices in different components.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryKind {
    Degree,
    EdgewiseSharedPartners,
    DyadwiseSharedPartners,
    TriadCensus,
    GeodesicDistance,
}

/// Integer-indexed counts.
///
/// For [`SummaryKind::GeodesicDistance`] index `d` counts pairs at distance `d`
/// (`1 <= d <= n-1`, index 0 is always empty) and the final index `n` counts
/// unreachable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts divided by their total; all zeros for an empty histogram.
    pub fn normalized(&self) -> Vec<f64> {
        let t = self.total();
        if t == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / t as f64).collect()
    }

    /// Total variation distance `½ Σ |P(k) - Q(k)|` over the union of both supports.
    pub fn tv_distance(&self, other: &Histogram) -> f64 {
        let p = self.normalized();
        let q = other.normalized();
        let len = p.len().max(q.len());
        0.5 * (0..len)
            .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
            .sum::<f64>()
    }
}

/// All-pairs shortest path lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }
}

/// Breadth-first search from every vertex.
pub fn shortest_path_matrix(g: &Graph) -> DistanceMatrix {
    let n = g.n();
    let mut d = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for src in 0..n {
        let row = &mut d[src * n..(src + 1) * n];
        row[src] = 0;
        queue.clear();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for v in g.neighbours(u) {
                if row[v] == UNREACHABLE {
                    row[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceMatrix { n, d }
}

pub fn summary_distribution(g: &Graph, which: SummaryKind) -> Histogram {
    let n = g.n();
    let counts = match which {
        SummaryKind::Degree => {
            let mut c = vec![0u64; n];
            for &d in g.degrees() {
                c[d as usize] += 1;
            }
            c
        }
        SummaryKind::EdgewiseSharedPartners | SummaryKind::DyadwiseSharedPartners => {
            let edgewise = which == SummaryKind::EdgewiseSharedPartners;
            let mut c = vec![0u64; n.saturating_sub(1).max(1)];
            for i in 0..n {
                for j in i + 1..n {
                    if edgewise && !g.has_edge(i, j) {
                        continue;
                    }
                    c[g.common_neighbours(i, j)] += 1;
                }
            }
            c
        }
        SummaryKind::TriadCensus => triad_census(g).to_vec(),
        SummaryKind::GeodesicDistance => {
            let dm = shortest_path_matrix(g);
            let mut c = vec![0u64; n + 1];
            for i in 0..n {
                for j in i + 1..n {
                    match dm.get(i, j) {
                        UNREACHABLE => c[n] += 1,
                        d => c[d as usize] += 1,
                    }
                }
            }
            c
        }
    };
    Histogram { counts }
}

/// Number of vertex triples spanning 0, 1, 2 and 3 edges.
fn triad_census(g: &Graph) -> [u64; 4] {
    let n = g.n() as u64;
    let all = if n >= 3 { n * (n - 1) * (n - 2) / 6 } else { 0 };
    let mut closed = 0u64;
    let mut one = 0u64;
    for (i, j) in g.edge_list() {
        let cn = g.common_neighbours(i, j) as u64;
        closed += cn;
        // third vertices adjacent to neither endpoint
        let touched = (g.degree(i) - 1 + g.degree(j) - 1) as u64 - cn;
        one += n - 2 - touched;
    }
    let three = closed / 3;
    let wedges: u64 = g.degrees().iter().map(|&d| d as u64 * (d as u64).saturating_sub(1) / 2).sum();
    let two = wedges - 3 * three;
    [all - one - two - three, one, two, three]
}
