use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1};

use crate::error::{Error, Result};
use crate::graph::{chordalize, GraphKind, MixedGraph};
use crate::net::DiscreteNet;

/// Random connected DAG without v-structures whose skeleton is chordal.
///
/// Vertices are put in a random order σ. Every vertex after the first draws
/// `max(1, Binomial(i, rho))` parents uniformly among its `i` predecessors;
/// the skeleton is then chordalized by eliminating vertices in reverse σ and
/// every edge is oriented along σ.
pub fn random_chordal_dag<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Result<MixedGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in (0, 1], got {rho}"
        )));
    }
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    let mut pos = vec![0; n];
    for (i, &v) in sigma.iter().enumerate() {
        pos[v] = i;
    }
    let mut skeleton = MixedGraph::with_nodes(n, GraphKind::Pdag);
    for i in 1..n {
        let drawn = Binomial::new(i as u64, rho)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sample(rng) as usize;
        let k = drawn.max(1);
        for j in index::sample(rng, i, k) {
            skeleton.add_undirected(sigma[j], sigma[i])?;
        }
    }
    let reverse: Vec<usize> = sigma.iter().rev().copied().collect();
    let chordal = chordalize(&skeleton, &reverse);
    let mut dag = MixedGraph::with_nodes(n, GraphKind::Dag);
    for (a, b) in chordal.undirected_edges() {
        if pos[a] < pos[b] {
            dag.add_directed(a, b)?;
        } else {
            dag.add_directed(b, a)?;
        }
    }
    Ok(dag)
}

/// Network over `dag` with every CPT row drawn from the flat Dirichlet law.
pub fn random_cpts<R: Rng + ?Sized>(
    dag: &MixedGraph,
    card: &[usize],
    rng: &mut R,
) -> Result<DiscreteNet> {
    if card.len() != dag.n() {
        return Err(Error::InvalidArgument(
            "one cardinality per vertex required".into(),
        ));
    }
    let tables = (0..dag.n())
        .map(|v| {
            let rows: usize = dag.parents(v).iter().map(|&p| card[p]).product();
            let mut table = Vec::with_capacity(rows * card[v]);
            for _ in 0..rows {
                table.extend(dirichlet_row(card[v], rng));
            }
            table
        })
        .collect();
    DiscreteNet::new(dag.clone(), card.to_vec(), tables)
}

fn dirichlet_row<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = draws.iter().sum();
        if s > 0.0 && draws.iter().all(|&x| x > 0.0) {
            return draws.into_iter().map(|x| x / s).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_chordal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn connected(g: &MixedGraph) -> bool {
        let mut seen = vec![false; g.n()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in g.adjacent(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    #[test]
    fn full_density_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_chordal_dag(6, 1.0, &mut rng).unwrap();
        assert_eq!(g.n_directed(), 15);
        assert!(g.is_dag());
    }

    #[test]
    fn draws_are_chordal_connected_moral() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..500 {
            let n = 2 + i % 7;
            let rho = [0.1, 0.3, 0.6, 1.0][i % 4];
            let g = random_chordal_dag(n, rho, &mut rng).unwrap();
            assert!(g.is_dag());
            assert!(connected(&g));
            assert!(is_chordal(&g.skeleton()));
            assert!(g.v_structures().is_empty());
        }
    }

    #[test]
    fn bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_chordal_dag(1, 0.5, &mut rng).is_err());
        assert!(random_chordal_dag(4, 0.0, &mut rng).is_err());
        assert!(random_chordal_dag(4, 1.5, &mut rng).is_err());
    }

    #[test]
    fn cpts_positive_normalized_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_chordal_dag(5, 0.8, &mut rng).unwrap();
        let a = random_cpts(&g, &[2, 3, 2, 4, 2], &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_cpts(&g, &[2, 3, 2, 4, 2], &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        for v in 0..5 {
            for row in a.cpt(v).table.chunks(a.card()[v]) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let mut rows = 0;
        while rows < 10_000 {
            let row = dirichlet_row(3, &mut rng);
            assert!(row.iter().all(|&p| p > 0.0));
            rows += 1;
        }
    }
}
