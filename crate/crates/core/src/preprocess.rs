//! Graph transforms for real networks: giant components, iterated
//! degree filtering, and restriction to nodes present on both axes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::BiAdjacency;

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: alloc::vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Subgraph induced by the largest weakly connected component of a square,
/// label-aligned adjacency. Equal sizes go to the component holding the
/// smallest label.
pub fn largest_weak_component(a: &BiAdjacency) -> Result<BiAdjacency> {
    if !a.is_square_aligned() {
        return Err(Error::NotSquare);
    }
    let mut sets = DisjointSets::new(a.nrows());
    for (i, j) in a.edges() {
        sets.union(i, j);
    }
    let ids: Vec<usize> = (0..a.nrows()).map(|i| sets.find(i)).collect();
    Ok(keep_largest(a, &ids))
}

/// Like [`largest_weak_component`], but nodes must reach each other along
/// edge directions.
pub fn largest_strong_component(a: &BiAdjacency) -> Result<BiAdjacency> {
    if !a.is_square_aligned() {
        return Err(Error::NotSquare);
    }
    Ok(keep_largest(a, &strong_component_ids(a)))
}

/// Kosaraju's two passes with explicit stacks.
fn strong_component_ids(a: &BiAdjacency) -> Vec<usize> {
    let n = a.nrows();
    let mut finished = Vec::with_capacity(n);
    let mut seen = alloc::vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = alloc::vec![(root, 0usize)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = a.row(v).get(*next) {
                *next += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                finished.push(v);
                stack.pop();
            }
        }
    }
    let mut reverse: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (i, j) in a.edges() {
        reverse[j].push(i);
    }
    let mut ids = alloc::vec![usize::MAX; n];
    for &root in finished.iter().rev() {
        if ids[root] != usize::MAX {
            continue;
        }
        ids[root] = root;
        let mut stack = alloc::vec![root];
        while let Some(v) = stack.pop() {
            for &w in &reverse[v] {
                if ids[w] == usize::MAX {
                    ids[w] = root;
                    stack.push(w);
                }
            }
        }
    }
    ids
}

/// Keeps the nodes whose component id is the most common one; ties go to
/// the component holding the smallest label.
fn keep_largest(a: &BiAdjacency, ids: &[usize]) -> BiAdjacency {
    if ids.is_empty() {
        return a.clone();
    }
    // id -> (size, smallest label)
    let mut summary: BTreeMap<usize, (usize, &str)> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        let label = a.row_labels()[i].as_str();
        let entry = summary.entry(id).or_insert((0, label));
        entry.0 += 1;
        if label < entry.1 {
            entry.1 = label;
        }
    }
    let (&best, _) =
        summary.iter().max_by(|x, y| x.1 .0.cmp(&y.1 .0).then_with(|| y.1 .1.cmp(x.1 .1))).expect("nonempty");
    let keep: Vec<usize> = (0..ids.len()).filter(|&i| ids[i] == best).collect();
    a.submatrix(&keep, &keep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeFilterOutcome {
    pub adjacency: BiAdjacency,
    /// Filtering passes that removed at least one node.
    pub passes: usize,
    /// Set when filtering removed every row or every column.
    pub emptied: bool,
}

/// Keeps rows with out-degree and columns with in-degree at least
/// `min_degree`, repeating until nothing changes.
pub fn degree_filter(a: &BiAdjacency, min_degree: usize) -> DegreeFilterOutcome {
    let mut current = a.clone();
    let mut passes = 0;
    loop {
        let rows: Vec<usize> = (0..current.nrows()).filter(|&i| current.row(i).len() >= min_degree).collect();
        let in_deg = current.in_degrees();
        let cols: Vec<usize> = (0..current.ncols()).filter(|&j| in_deg[j] >= min_degree).collect();
        if rows.len() == current.nrows() && cols.len() == current.ncols() {
            break;
        }
        current = current.submatrix(&rows, &cols);
        passes += 1;
    }
    let emptied = current.is_empty();
    DegreeFilterOutcome { adjacency: current, passes, emptied }
}

/// Restricts to labels present among both rows and columns. The result is
/// square, ordered by first appearance among the rows.
pub fn common_submatrix(a: &BiAdjacency) -> Result<BiAdjacency> {
    let col_pos: BTreeMap<&str, usize> = a.col_labels().iter().enumerate().map(|(j, l)| (l.as_str(), j)).collect();
    let (rows, cols): (Vec<usize>, Vec<usize>) =
        a.row_labels().iter().enumerate().filter_map(|(i, l)| col_pos.get(l.as_str()).map(|&j| (i, j))).unzip();
    if rows.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(a.submatrix(&rows, &cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};
    use alloc::vec;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn giant_component_picks_three_cycle() {
        // 3-cycle on {1,2,3}, 2-cycle on {4,5}
        let a = BiAdjacency::with_index_labels(5, 5, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 3)]).unwrap();
        let g = largest_weak_component(&a).unwrap();
        assert_eq!(g.row_labels(), &labels(&["1", "2", "3"])[..]);
        assert_eq!(g.nnz(), 3);
        assert!(g.is_square_aligned());
    }

    #[test]
    fn giant_component_tie_and_identity() {
        let a = BiAdjacency::new(4, 4, [(0, 1), (2, 3)], labels(&["d", "c", "b", "a"]), labels(&["d", "c", "b", "a"]))
            .unwrap();
        let g = largest_weak_component(&a).unwrap();
        assert_eq!(g.row_labels(), &labels(&["b", "a"])[..]);
        let connected = BiAdjacency::with_index_labels(3, 3, [(0, 1), (2, 1)]).unwrap();
        assert_eq!(largest_weak_component(&connected).unwrap(), connected);
        let rect = BiAdjacency::with_index_labels(2, 3, [(0, 1)]).unwrap();
        assert_eq!(largest_weak_component(&rect).unwrap_err(), Error::NotSquare);
    }

    #[test]
    fn strong_component_follows_directions() {
        // 3-cycle on {1,2,3} feeding the 2-cycle {4,5} and a sink 6
        let edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 3), (4, 5)];
        let a = BiAdjacency::with_index_labels(6, 6, edges).unwrap();
        assert_eq!(largest_weak_component(&a).unwrap(), a);
        let g = largest_strong_component(&a).unwrap();
        assert_eq!(g.row_labels(), &labels(&["1", "2", "3"])[..]);
        assert_eq!(g.nnz(), 3);
        let dag = BiAdjacency::with_index_labels(3, 3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(largest_strong_component(&dag).unwrap().row_labels(), &labels(&["1"])[..]);
    }

    #[test]
    fn filter_unchanged_when_degrees_suffice() {
        let a = BiAdjacency::with_index_labels(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let out = degree_filter(&a, 2);
        assert_eq!(out.adjacency, a);
        assert_eq!(out.passes, 0);
        assert!(!out.emptied);
    }

    #[test]
    fn filter_cascades() {
        // Column 3 has in-degree 1; removing it leaves row 3 with out-degree 1.
        let a = BiAdjacency::with_index_labels(3, 3, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 1), (2, 2)]).unwrap();
        let out = degree_filter(&a, 2);
        assert_eq!(out.adjacency.row_labels(), &labels(&["1", "2"])[..]);
        assert_eq!(out.adjacency.col_labels(), &labels(&["1", "2"])[..]);
        assert_eq!(out.passes, 2);
        let gone = degree_filter(&a, 5);
        assert!(gone.emptied);
    }

    #[test]
    fn common_nodes() {
        let a = BiAdjacency::new(
            3,
            3,
            [(0, 0), (1, 1), (2, 2), (1, 0)],
            labels(&["a", "b", "c"]),
            labels(&["b", "c", "d"]),
        )
        .unwrap();
        let c = common_submatrix(&a).unwrap();
        assert_eq!(c.row_labels(), &labels(&["b", "c"])[..]);
        assert!(c.is_square_aligned());
        // b->b and b->c survive; a->b and c->d lose an endpoint
        assert_eq!(c.edges().collect::<Vec<_>>(), vec![(0, 0), (0, 1)]);

        let same = BiAdjacency::new(2, 2, [(0, 1)], labels(&["x", "y"]), labels(&["y", "x"])).unwrap();
        let c = common_submatrix(&same).unwrap();
        assert_eq!(c.col_labels(), &labels(&["x", "y"])[..]);
        assert_eq!(c.edges().collect::<Vec<_>>(), vec![(0, 0)]);

        let disjoint = BiAdjacency::new(1, 1, [], labels(&["a"]), labels(&["b"])).unwrap();
        assert_eq!(common_submatrix(&disjoint).unwrap_err(), Error::EmptyIntersection);
    }
}
