//! Independent tree-edit-distance oracles. Neither shares code with the
//! keyroot dynamic program in the library.

use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;
use scenario_forge::ir::LabeledTree;

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub label: String,
    pub kids: Vec<Rc<Node>>,
}

pub fn to_nodes(t: &LabeledTree, n: usize) -> Rc<Node> {
    Rc::new(Node {
        label: t.label(n).to_string(),
        kids: t.children(n).iter().map(|&c| to_nodes(t, c)).collect(),
    })
}

fn size(forest: &[Rc<Node>]) -> usize {
    forest.iter().map(|n| 1 + size(&n.kids)).sum()
}

/// Exhaustive search over edit operations on forests: at every step the
/// rightmost roots are either deleted, inserted, or matched (with their
/// subtrees matched recursively). Memoized on the forest pair, so every
/// edit script is considered once.
pub fn forest_search(a: &LabeledTree, b: &LabeledTree) -> usize {
    let fa = vec![to_nodes(a, LabeledTree::ROOT)];
    let fb = vec![to_nodes(b, LabeledTree::ROOT)];
    let mut memo = HashMap::new();
    forest_dist(&fa, &fb, &mut memo)
}

type Memo = HashMap<(Vec<Rc<Node>>, Vec<Rc<Node>>), usize>;

fn forest_dist(f: &[Rc<Node>], g: &[Rc<Node>], memo: &mut Memo) -> usize {
    if f.is_empty() {
        return size(g);
    }
    if g.is_empty() {
        return size(f);
    }
    let key = (f.to_vec(), g.to_vec());
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let v = f.last().unwrap();
    let w = g.last().unwrap();
    let mut f_minus_v: Vec<Rc<Node>> = f[..f.len() - 1].to_vec();
    f_minus_v.extend(v.kids.iter().cloned());
    let mut g_minus_w: Vec<Rc<Node>> = g[..g.len() - 1].to_vec();
    g_minus_w.extend(w.kids.iter().cloned());

    let delete = forest_dist(&f_minus_v, g, memo) + 1;
    let insert = forest_dist(f, &g_minus_w, memo) + 1;
    let matched = forest_dist(&f[..f.len() - 1], &g[..g.len() - 1], memo)
        + forest_dist(&v.kids, &w.kids, memo)
        + usize::from(v.label != w.label);
    let d = delete.min(insert).min(matched);
    memo.insert(key, d);
    d
}

struct Flat {
    labels: Vec<String>,
    /// ancestor[i][j]: i is a proper ancestor of j (preorder ids).
    ancestor: Vec<Vec<bool>>,
}

fn flatten(t: &LabeledTree) -> Flat {
    let order = t.preorder();
    let mut pos = vec![0; t.node_count()];
    for (i, &n) in order.iter().enumerate() {
        pos[n] = i;
    }
    let n = order.len();
    let mut ancestor = vec![vec![false; n]; n];
    fn mark(t: &LabeledTree, node: usize, pos: &[usize], anc: &mut Vec<Vec<bool>>, stack: &mut Vec<usize>) {
        for &a in stack.iter() {
            anc[pos[a]][pos[node]] = true;
        }
        stack.push(node);
        for &c in t.children(node) {
            mark(t, c, pos, anc, stack);
        }
        stack.pop();
    }
    mark(t, LabeledTree::ROOT, &pos, &mut ancestor, &mut Vec::new());
    Flat {
        labels: order.iter().map(|&x| t.label(x).to_string()).collect(),
        ancestor,
    }
}

/// Enumerates every valid ordered edit mapping (one-to-one, ancestor- and
/// sibling-order preserving) and returns the cheapest. Exponential; only
/// for trees of a handful of nodes.
pub fn mapping_enumeration(a: &LabeledTree, b: &LabeledTree) -> usize {
    let fa = flatten(a);
    let fb = flatten(b);
    let mut assigned: Vec<Option<usize>> = Vec::new();
    let mut used = vec![false; fb.labels.len()];
    let mut best = usize::MAX;
    enumerate(&fa, &fb, &mut assigned, &mut used, &mut best);
    best
}

fn consistent(fa: &Flat, fb: &Flat, assigned: &[Option<usize>], i: usize, j: usize) -> bool {
    for (k, m) in assigned.iter().enumerate() {
        let Some(l) = *m else { continue };
        // k precedes i in preorder; ancestry and left-of must agree.
        let anc_a = fa.ancestor[k][i];
        let anc_b = fb.ancestor[l][j];
        if anc_a != anc_b {
            return false;
        }
        if fb.ancestor[j][l] {
            return false;
        }
        // k before i in preorder and not an ancestor means k is left of i,
        // so l must be before j in preorder too.
        if !anc_a && l > j {
            return false;
        }
        if anc_a && l > j {
            return false;
        }
    }
    true
}

fn enumerate(fa: &Flat, fb: &Flat, assigned: &mut Vec<Option<usize>>, used: &mut [bool], best: &mut usize) {
    let i = assigned.len();
    if i == fa.labels.len() {
        let mut cost = 0;
        let mut mapped = 0;
        for (k, m) in assigned.iter().enumerate() {
            if let Some(l) = m {
                mapped += 1;
                cost += usize::from(fa.labels[k] != fb.labels[*l]);
            }
        }
        cost += (fa.labels.len() - mapped) + (fb.labels.len() - mapped);
        *best = (*best).min(cost);
        return;
    }
    assigned.push(None);
    enumerate(fa, fb, assigned, used, best);
    assigned.pop();
    for j in 0..fb.labels.len() {
        if used[j] || !consistent(fa, fb, assigned, i, j) {
            continue;
        }
        used[j] = true;
        assigned.push(Some(j));
        enumerate(fa, fb, assigned, used, best);
        assigned.pop();
        used[j] = false;
    }
}

/// Random ordered tree with 1..=`max_nodes` nodes and labels from
/// `alphabet`.
pub fn random_tree(rng: &mut impl Rng, max_nodes: usize, alphabet: &[&str]) -> LabeledTree {
    let n = rng.random_range(1..=max_nodes);
    let pick = |rng: &mut dyn rand::RngCore| alphabet[rng.random_range(0..alphabet.len())];
    let mut t = LabeledTree::new(pick(rng));
    for i in 1..n {
        let parent = rng.random_range(0..i);
        t.add_child(parent, pick(rng));
    }
    t
}
