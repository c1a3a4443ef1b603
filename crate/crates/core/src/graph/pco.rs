use serde::{Deserialize, Serialize};

use super::MixedGraph;
use crate::error::{Error, Result};

/// Ordered bucket decomposition of a vertex set. Edges between different
/// buckets point from the earlier bucket to the later one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketOrdering {
    pub buckets: Vec<Vec<usize>>,
}

impl BucketOrdering {
    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.buckets.iter()
    }
}

/// Partial causal ordering of `s` in the MPDAG `m`.
///
/// Chain components of the whole graph are peeled off from the sink side:
/// a component qualifies once every edge to the remaining components points
/// into it. Its intersection with `s` is prepended to the output.
pub fn pco(m: &MixedGraph, s: &[usize]) -> Result<BucketOrdering> {
    let n = m.n();
    if let Some(&bad) = s.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange(bad));
    }
    let mut in_s = vec![false; n];
    for &v in s {
        in_s[v] = true;
    }
    let mut remaining = m.chain_components();
    let mut comp_of = vec![0; n];
    let mut buckets = Vec::new();
    while !remaining.is_empty() {
        for (i, c) in remaining.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        let pick = (0..remaining.len()).find(|&i| {
            remaining[i].iter().all(|&v| {
                m.children(v)
                    .iter()
                    .all(|&w| comp_of[w] == i || !alive(&remaining, w))
            })
        });
        let Some(i) = pick else {
            return Err(Error::InvalidGraph(
                "chain components admit no ordering".into(),
            ));
        };
        let c = remaining.remove(i);
        let bucket: Vec<usize> = c.into_iter().filter(|&v| in_s[v]).collect();
        if !bucket.is_empty() {
            buckets.push(bucket);
        }
    }
    buckets.reverse();
    Ok(BucketOrdering { buckets })
}

fn alive(remaining: &[Vec<usize>], v: usize) -> bool {
    remaining.iter().any(|c| c.contains(&v))
}
