//! Ancestry labels built from a heavy/light path decomposition.
//!
//! A label is a sequence of `(path head id, offset along the path)` pairs.
//! Ordering is lexicographic with a proper prefix preceding its extensions,
//! which is exactly the derived `Ord` on `Vec`.

use std::fmt;

use crate::graph::NodeId;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LcaLabel(pub Vec<(NodeId, usize)>);

impl LcaLabel {
    pub fn root(id: NodeId) -> Self {
        LcaLabel(vec![(id, 0)])
    }

    /// Label of the heavy child: last pair's offset incremented.
    pub fn heavy_child(&self) -> Self {
        let mut pairs = self.0.clone();
        if let Some(last) = pairs.last_mut() {
            last.1 += 1;
        }
        LcaLabel(pairs)
    }

    /// Label of a light child: a fresh `(id, 0)` pair appended.
    pub fn light_child(&self, id: NodeId) -> Self {
        let mut pairs = self.0.clone();
        pairs.push((id, 0));
        LcaLabel(pairs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Depth of the labelled node: offsets plus one hop per light edge.
    pub fn depth(&self) -> usize {
        self.0.iter().map(|p| p.1).sum::<usize>() + self.0.len().saturating_sub(1)
    }

    pub fn fragment(&self) -> Option<NodeId> {
        self.0.first().map(|p| p.0)
    }

    /// True iff `self` labels an ancestor of (or the same node as) `other`.
    pub fn is_ancestor_of(&self, other: &LcaLabel) -> bool {
        lca_of_labels(self, other).as_ref() == Some(self)
    }
}

impl fmt::Debug for LcaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (a, d)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({a},{d})")?;
        }
        write!(f, "]")
    }
}

/// Nearest common ancestor from two labels alone; `None` when they belong to
/// different trees.
///
/// Labels are split at the first position where their pairs differ. Equal path
/// heads there mean both nodes hang off the same path and the ancestor is the
/// shallower of the two offsets. Different heads mean two light branches
/// leaving the node named by the common prefix. A label that is a prefix of
/// the other names the ancestor directly.
pub fn lca_of_labels(u: &LcaLabel, v: &LcaLabel) -> Option<LcaLabel> {
    let (a, b) = (&u.0, &v.0);
    let i = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
    if i == a.len() {
        return if a.is_empty() { None } else { Some(u.clone()) };
    }
    if i == b.len() {
        return if b.is_empty() { None } else { Some(v.clone()) };
    }
    let (pa, pb) = (a[i], b[i]);
    let mut prefix = a[..i].to_vec();
    if pa.0 == pb.0 {
        prefix.push((pa.0, pa.1.min(pb.1)));
        Some(LcaLabel(prefix))
    } else if i == 0 {
        None
    } else {
        Some(LcaLabel(prefix))
    }
}

/// Labels of a rooted forest given by parent pointers. The heavy child is the
/// one with the largest subtree, smaller id on ties. `None` if the pointers
/// contain a cycle.
pub fn heavy_light_labels(parents: &[Option<NodeId>]) -> Option<Vec<LcaLabel>> {
    let n = parents.len();
    let mut children = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for (u, p) in parents.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(u),
            None => roots.push(u),
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut stack = roots.clone();
    while let Some(u) = stack.pop() {
        order.push(u);
        stack.extend(children[u].iter().copied());
    }
    if order.len() != n {
        return None;
    }
    let mut size = vec![1usize; n];
    for &u in order.iter().rev() {
        if let Some(p) = parents[u] {
            size[p] += size[u];
        }
    }
    let mut labels = vec![LcaLabel::default(); n];
    for &u in &order {
        labels[u] = match parents[u] {
            None => LcaLabel::root(u),
            Some(p) => {
                let heavy = children[p].iter().copied().max_by_key(|&c| (size[c], std::cmp::Reverse(c)));
                if heavy == Some(u) {
                    labels[p].heavy_child()
                } else {
                    labels[p].light_child(u)
                }
            }
        };
    }
    Some(labels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleVerdict {
    Ok,
    BecomeRoot,
}

/// A node whose label does not strictly follow its parent's is on a cycle or
/// stale; it detaches. Equal labels also detach.
pub fn label_cycle_detect(own: &LcaLabel, parent: &LcaLabel) -> CycleVerdict {
    if own > parent {
        CycleVerdict::Ok
    } else {
        CycleVerdict::BecomeRoot
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(p: &[(NodeId, usize)]) -> LcaLabel {
        LcaLabel(p.to_vec())
    }

    #[test]
    fn spider_labels() {
        // 0 has children 1 (with child 3) and 2.
        let labels = heavy_light_labels(&[None, Some(0), Some(0), Some(1)]).unwrap();
        assert_eq!(labels[1], l(&[(0, 1)]));
        assert_eq!(labels[3], l(&[(0, 2)]));
        assert_eq!(labels[2], l(&[(0, 0), (2, 0)]));
        assert!(heavy_light_labels(&[Some(1), Some(0)]).is_none());
    }

    #[test]
    fn assignment_rules() {
        assert_eq!(LcaLabel::root(7), l(&[(7, 0)]));
        assert_eq!(l(&[(7, 0)]).heavy_child(), l(&[(7, 1)]));
        assert_eq!(l(&[(7, 1)]).light_child(5), l(&[(7, 1), (5, 0)]));
    }

    #[test]
    fn lca_cases() {
        assert_eq!(lca_of_labels(&l(&[(7, 2)]), &l(&[(7, 1), (5, 0)])), Some(l(&[(7, 1)])));
        assert_eq!(lca_of_labels(&l(&[(7, 2)]), &l(&[(7, 2)])), Some(l(&[(7, 2)])));
        assert_eq!(lca_of_labels(&l(&[(7, 2)]), &l(&[(9, 1)])), None);
        // two light siblings
        assert_eq!(lca_of_labels(&l(&[(7, 1), (5, 0)]), &l(&[(7, 1), (6, 3)])), Some(l(&[(7, 1)])));
        // ancestor given as prefix
        assert_eq!(lca_of_labels(&l(&[(7, 1)]), &l(&[(7, 1), (5, 2)])), Some(l(&[(7, 1)])));
    }

    #[test]
    fn cycle_detection() {
        assert_eq!(label_cycle_detect(&l(&[(7, 1)]), &l(&[(7, 0)])), CycleVerdict::Ok);
        assert_eq!(label_cycle_detect(&l(&[(3, 0)]), &l(&[(7, 2)])), CycleVerdict::BecomeRoot);
        assert_eq!(label_cycle_detect(&l(&[(7, 2)]), &l(&[(7, 2)])), CycleVerdict::BecomeRoot);
    }

    #[test]
    fn depth_counts_light_hops() {
        assert_eq!(l(&[(7, 2), (5, 1)]).depth(), 4);
        assert_eq!(LcaLabel::root(0).depth(), 0);
    }
}
