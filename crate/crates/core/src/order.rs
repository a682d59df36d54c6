//! Quotient of a dominance preorder by its ties, reduced to covering edges.

use crate::bitset::{ones, BitMatrix};

/// Samples grouped into tie classes, with the Hasse diagram of the strict
/// order between classes.
#[derive(Clone, Debug)]
pub(crate) struct OrderGraph {
    pub members: Vec<Vec<usize>>,
    /// `(u, v)`: class `u` is covered by class `v` (u strictly below v, nothing in between).
    pub edges: Vec<(usize, usize)>,
}

impl OrderGraph {
    /// `succ` row `i` holds every `j` with sample `i` below sample `j` (reflexive, transitive).
    pub fn from_successors(succ: &BitMatrix) -> Self {
        let n = succ.rows();
        let mut class_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            if class_of[i] != usize::MAX {
                continue;
            }
            let c = members.len();
            let mut group = Vec::new();
            for j in succ.row_ones(i) {
                if j >= i && class_of[j] == usize::MAX && succ.get(j, i) {
                    class_of[j] = c;
                    group.push(j);
                }
            }
            members.push(group);
        }
        let classes = members.len();
        let mut csucc = BitMatrix::new(classes, classes);
        for (c, group) in members.iter().enumerate() {
            for j in succ.row_ones(group[0]) {
                let cj = class_of[j];
                if cj != c {
                    csucc.set(c, cj, true);
                }
            }
        }
        let words = csucc.row(0).len();
        let mut reach2 = vec![0u64; words];
        let mut edges = Vec::new();
        for c in 0..classes {
            reach2.iter_mut().for_each(|w| *w = 0);
            for v in csucc.row_ones(c) {
                for (acc, w) in reach2.iter_mut().zip(csucc.row(v)) {
                    *acc |= w;
                }
            }
            let row = csucc.row(c);
            let reduced: Vec<u64> = row.iter().zip(&reach2).map(|(a, b)| a & !b).collect();
            edges.extend(ones(&reduced).map(|v| (c, v)));
        }
        Self { members, edges }
    }

    pub fn classes(&self) -> usize {
        self.members.len()
    }
}
