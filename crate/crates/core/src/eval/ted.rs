//! Ordered tree edit distance with unit costs (Zhang–Shasha keyroot
//! dynamic program).

use crate::ir::LabeledTree;

/// Postorder view of a tree: labels, leftmost-leaf descendants and
/// keyroots, all 1-based as in the classic formulation.
struct Postorder<'a> {
    labels: Vec<&'a str>,
    leftmost: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Postorder<'a> {
    fn new(tree: &'a LabeledTree) -> Self {
        let n = tree.node_count();
        let mut labels = vec![""; n + 1];
        let mut leftmost = vec![0; n + 1];
        let mut counter = 0;
        // Iterative postorder: (node, next child index, leftmost leaf so far).
        let mut stack: Vec<(usize, usize, usize)> = vec![(LabeledTree::ROOT, 0, 0)];
        while let Some(top) = stack.last_mut() {
            let (node, next, _) = *top;
            let kids = tree.children(node);
            if next < kids.len() {
                top.1 += 1;
                stack.push((kids[next], 0, 0));
                continue;
            }
            let (_, _, lm) = stack.pop().expect("non-empty");
            counter += 1;
            labels[counter] = tree.label(node);
            let own_lm = if lm == 0 { counter } else { lm };
            leftmost[counter] = own_lm;
            if let Some(parent) = stack.last_mut() {
                // The first finished child fixes the parent's leftmost leaf.
                if parent.2 == 0 {
                    parent.2 = own_lm;
                }
            }
        }
        // A keyroot is the highest node with a given leftmost leaf.
        let mut keyroots: Vec<usize> = Vec::new();
        let mut seen = vec![false; n + 1];
        for i in (1..=n).rev() {
            if !seen[leftmost[i]] {
                seen[leftmost[i]] = true;
                keyroots.push(i);
            }
        }
        keyroots.sort_unstable();
        Postorder {
            labels,
            leftmost,
            keyroots,
        }
    }

    fn len(&self) -> usize {
        self.labels.len() - 1
    }
}

/// Minimum number of node insertions, deletions and relabelings turning
/// `a` into `b`.
pub fn ted(a: &LabeledTree, b: &LabeledTree) -> usize {
    let pa = Postorder::new(a);
    let pb = Postorder::new(b);
    let (n, m) = (pa.len(), pb.len());
    let mut treedist = vec![vec![0usize; m + 1]; n + 1];
    let mut forest = vec![vec![0usize; m + 2]; n + 2];

    for &i in &pa.keyroots {
        for &j in &pb.keyroots {
            let li = pa.leftmost[i];
            let lj = pb.leftmost[j];
            // forest[x][y] holds the distance between forests
            // a[li..x-1+li] and b[lj..y-1+lj], offset so index 0 is empty.
            let rows = i - li + 2;
            let cols = j - lj + 2;
            forest[0][0] = 0;
            for x in 1..rows {
                forest[x][0] = forest[x - 1][0] + 1;
            }
            for y in 1..cols {
                forest[0][y] = forest[0][y - 1] + 1;
            }
            for x in 1..rows {
                let ai = li + x - 1;
                for y in 1..cols {
                    let bj = lj + y - 1;
                    let delete = forest[x - 1][y] + 1;
                    let insert = forest[x][y - 1] + 1;
                    if pa.leftmost[ai] == li && pb.leftmost[bj] == lj {
                        let relabel =
                            forest[x - 1][y - 1] + usize::from(pa.labels[ai] != pb.labels[bj]);
                        let d = delete.min(insert).min(relabel);
                        forest[x][y] = d;
                        treedist[ai][bj] = d;
                    } else {
                        let px = pa.leftmost[ai] - li;
                        let py = pb.leftmost[bj] - lj;
                        let subtree = forest[px][py] + treedist[ai][bj];
                        forest[x][y] = delete.min(insert).min(subtree);
                    }
                }
            }
        }
    }
    treedist[n][m]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> LabeledTree {
        LabeledTree::from_brackets(s).unwrap()
    }

    #[test]
    fn identical_trees_are_zero() {
        let a = t("{a{b{c}}{d}}");
        assert_eq!(ted(&a, &a.clone()), 0);
    }

    #[test]
    fn root_only_tree_costs_the_rest() {
        let a = t("{a{b{c}}{d}{e{f}{g}}}");
        assert_eq!(ted(&a, &t("{a}")), a.node_count() - 1);
        assert_eq!(ted(&t("{a}"), &a), a.node_count() - 1);
    }

    #[test]
    fn classic_zhang_shasha_example() {
        // The textbook example for the keyroot algorithm:
        // f(d(a c(b)) e) vs f(c(d(a b)) e) has distance 2.
        let a = t("{f{d{a}{c{b}}}{e}}");
        let b = t("{f{c{d{a}{b}}}{e}}");
        assert_eq!(ted(&a, &b), 2);
    }

    #[test]
    fn single_relabel() {
        assert_eq!(ted(&t("{a{b}{c}}"), &t("{a{b}{x}}")), 1);
        assert_eq!(ted(&t("{a}"), &t("{b}")), 1);
    }

    #[test]
    fn sibling_order_matters() {
        assert_eq!(ted(&t("{r{a}{b}}"), &t("{r{b}{a}}")), 2);
    }
}
