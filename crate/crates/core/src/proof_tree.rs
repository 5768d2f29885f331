//! Flat list encoding of proof trees.
//!
//! Nodes are stored in postorder, so every subtree occupies a contiguous
//! block that ends at its root and the whole tree's root is the last node.
//! Indices are 1-based. Each node records the distance back to its child
//! roots:
//!
//! * a unary node's child ends immediately below it: `One(1)`;
//! * a conjunction laid out as `[G0 block, G1 block, node]` stores
//!   `Two(1, |G1 block| + 1)`, the distances to the G1 root and the G0 root.
//!
//! Reading the array from the root down gives the head-is-root cons list.

use std::fmt::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::builtins::Residual;
use crate::prover::{Rule, Sequent, StructuredProof};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Offsets {
    Leaf,
    One(usize),
    /// Distances to the second and the first conjunct's roots.
    Two(usize, usize),
}

impl Offsets {
    pub fn arity(self) -> usize {
        match self {
            Offsets::Leaf => 0,
            Offsets::One(_) => 1,
            Offsets::Two(..) => 2,
        }
    }
}

impl fmt::Display for Offsets {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Offsets::Leaf => f.write_str("−"),
            Offsets::One(d) => write!(f, "{d}"),
            Offsets::Two(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatNode {
    pub sequent: Sequent,
    pub rule: Rule,
    pub offsets: Offsets,
    pub residual: Option<Residual>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatProofTree {
    nodes: Vec<FlatNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("node index {index} outside 1..={len}")]
pub struct IndexOutOfBounds {
    pub index: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TreeViolation {
    #[error("tree is empty")]
    Empty,
    #[error("node {index}: offset {offset} points outside the tree")]
    OutOfBounds { index: usize, offset: usize },
    #[error("node {index}: rule {rule} does not match offsets {offsets}")]
    Arity { index: usize, rule: String, offsets: Offsets },
    #[error("node {index}: offsets {offsets} do not match the child block layout")]
    Layout { index: usize, offsets: Offsets },
    #[error("node {child} is claimed by more than one parent")]
    Overlap { child: usize },
    #[error("node {index} is not reachable from the root")]
    Unreachable { index: usize },
}

impl FlatProofTree {
    pub fn from_nodes(nodes: Vec<FlatNode>) -> FlatProofTree {
        FlatProofTree { nodes }
    }

    pub fn flatten(proof: &StructuredProof) -> FlatProofTree {
        fn go(p: &StructuredProof, out: &mut Vec<FlatNode>) -> usize {
            assert_eq!(p.children.len(), p.rule.arity(), "rule arity violated at {}", p.node);
            let offsets = match p.children.as_slice() {
                [] => Offsets::Leaf,
                [c] => {
                    go(c, out);
                    Offsets::One(1)
                }
                [first, second] => {
                    go(first, out);
                    let second_size = go(second, out);
                    Offsets::Two(1, second_size + 1)
                }
                _ => unreachable!("at most two premises"),
            };
            out.push(FlatNode { sequent: p.node.clone(), rule: p.rule.clone(), offsets, residual: p.residual.clone() });
            p.size()
        }
        let mut nodes = Vec::with_capacity(proof.size());
        go(proof, &mut nodes);
        FlatProofTree { nodes }
    }

    pub fn unflatten(&self) -> Option<StructuredProof> {
        if self.nodes.is_empty() {
            return None;
        }
        self.subtree(self.len())
    }

    fn subtree(&self, i: usize) -> Option<StructuredProof> {
        let n = self.nodes.get(i.checked_sub(1)?)?;
        let children = self.children(i).ok()?.into_iter().map(|c| self.subtree(c)).collect::<Option<Vec<_>>>()?;
        Some(StructuredProof { node: n.sequent.clone(), rule: n.rule.clone(), children, residual: n.residual.clone() })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[FlatNode] {
        &self.nodes
    }

    /// Node at 1-based index `i`.
    pub fn node(&self, i: usize) -> Result<&FlatNode, IndexOutOfBounds> {
        i.checked_sub(1).and_then(|k| self.nodes.get(k)).ok_or(IndexOutOfBounds { index: i, len: self.len() })
    }

    pub fn root(&self) -> Option<&FlatNode> {
        self.nodes.last()
    }

    /// Child roots of node `i`, first conjunct before second.
    pub fn children(&self, i: usize) -> Result<Vec<usize>, IndexOutOfBounds> {
        let oob = |index| IndexOutOfBounds { index, len: self.len() };
        let n = self.node(i)?;
        let back = |d: usize| i.checked_sub(d).filter(|j| *j >= 1).ok_or(oob(i));
        Ok(match n.offsets {
            Offsets::Leaf => vec![],
            Offsets::One(d) => vec![back(d)?],
            Offsets::Two(d_second, d_first) => vec![back(d_first)?, back(d_second)?],
        })
    }

    /// Size of the subtree rooted at `i`, following offsets. `None` if the
    /// offsets are inconsistent.
    pub fn subtree_size(&self, i: usize) -> Option<usize> {
        let mut total = 1;
        for c in self.children(i).ok()? {
            if c >= i {
                return None;
            }
            total += self.subtree_size(c)?;
        }
        Some(total)
    }

    /// The index range `[start, i]` of the block rooted at `i`.
    pub fn block(&self, i: usize) -> Option<std::ops::RangeInclusive<usize>> {
        let size = self.subtree_size(i)?;
        Some(i + 1 - size..=i)
    }

    pub fn validate(&self) -> Result<(), Vec<TreeViolation>> {
        let n = self.len();
        if n == 0 {
            return Err(vec![TreeViolation::Empty]);
        }
        let mut violations = Vec::new();
        let mut parent_of = vec![None::<usize>; n + 1];
        for i in 1..=n {
            let node = &self.nodes[i - 1];
            if node.rule.arity() != node.offsets.arity() || node.residual.is_some() != (node.rule == Rule::Builtin) {
                violations.push(TreeViolation::Arity { index: i, rule: node.rule.tag(), offsets: node.offsets });
            }
            let dists: Vec<usize> = match node.offsets {
                Offsets::Leaf => vec![],
                Offsets::One(d) => vec![d],
                Offsets::Two(a, b) => vec![a, b],
            };
            let mut in_bounds = true;
            for d in dists {
                match i.checked_sub(d) {
                    Some(j) if j >= 1 && d >= 1 => {
                        if let Some(prev) = parent_of[j] {
                            if prev != i {
                                violations.push(TreeViolation::Overlap { child: j });
                            }
                        }
                        parent_of[j] = Some(i);
                    }
                    _ => {
                        in_bounds = false;
                        violations.push(TreeViolation::OutOfBounds { index: i, offset: d });
                    }
                }
            }
            if !in_bounds {
                continue;
            }
            // Child blocks must sit directly below the node, back to back.
            let layout_ok = match node.offsets {
                Offsets::Leaf => true,
                Offsets::One(d) => d == 1,
                Offsets::Two(d_second, d_first) => {
                    d_second == 1 && self.subtree_size(i - 1).is_some_and(|s| d_first == s + 1)
                }
            };
            if !layout_ok {
                violations.push(TreeViolation::Layout { index: i, offsets: node.offsets });
            }
        }
        // Blocks tile [1, n]: the root's block is everything.
        let mut reachable = vec![false; n + 1];
        let mut stack = vec![n];
        while let Some(i) = stack.pop() {
            if reachable[i] {
                continue;
            }
            reachable[i] = true;
            if let Ok(cs) = self.children(i) {
                stack.extend(cs.into_iter().filter(|c| *c < i));
            }
        }
        for (i, seen) in reachable.iter().enumerate().skip(1) {
            if !seen {
                violations.push(TreeViolation::Unreachable { index: i });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// `⟨E,i⟩::…::nil`, root first.
    pub fn to_paper_list(&self) -> String {
        let mut out = String::new();
        for node in self.nodes.iter().rev() {
            let _ = write!(out, "⟨{},{}⟩::", node.sequent, node.offsets);
        }
        out.push_str("nil");
        out
    }

    pub fn records(&self) -> Vec<NodeRecord> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(k, n)| NodeRecord {
                index: k + 1,
                rule: n.rule.tag(),
                offsets: match n.offsets {
                    Offsets::Leaf => vec![],
                    Offsets::One(d) => vec![d],
                    Offsets::Two(a, b) => vec![a, b],
                },
                sequent: n.sequent.to_string(),
            })
            .collect()
    }

    /// One node per line: `index<TAB>rule<TAB>offsets<TAB>sequent`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (node, r) in self.nodes.iter().zip(self.records()) {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.index, r.rule, node.offsets, r.sequent);
        }
        out
    }

    pub fn count(&self, pred: impl Fn(&FlatNode) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(n)).count()
    }
}

/// Per-node record of the serialized tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeRecord {
    pub index: usize,
    pub rule: String,
    pub offsets: Vec<usize>,
    pub sequent: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{DFormula, GFormula, Program};
    use crate::prover::{prove_tree, Context, SearchLimits};
    use crate::term::Term;
    use std::sync::Arc;

    fn leaf(goal: &str) -> StructuredProof {
        let ctx = Context::new(Arc::new(Program::empty()));
        let a = Term::constant(goal);
        StructuredProof {
            node: Sequent { context: ctx, focus: Some(DFormula::Fact(a.clone())), goal: GFormula::Atom(a) },
            rule: Rule::Axiom,
            children: vec![],
            residual: None,
        }
    }

    #[test]
    fn single_leaf() {
        let t = FlatProofTree::flatten(&leaf("p"));
        assert_eq!(t.len(), 1);
        assert_eq!(t.nodes()[0].offsets, Offsets::Leaf);
        assert_eq!(t.to_paper_list(), "⟨p ; P ⊢ p,−⟩::nil");
        assert!(t.validate().is_ok());
    }

    #[test]
    fn smallest_derivation() {
        let p = crate::parser::parse_program("p.").unwrap();
        let g = crate::parser::parse_goal("p").unwrap();
        let t = prove_tree(&p, &g, SearchLimits::default()).unwrap().tree;
        assert_eq!(t.len(), 2);
        assert_eq!(t.to_paper_list(), "⟨P ⊢ p,1⟩::⟨p ; P ⊢ p,−⟩::nil");
    }

    #[test]
    fn children_errors_out_of_range() {
        let t = FlatProofTree::flatten(&leaf("p"));
        assert!(t.children(0).is_err());
        assert!(t.children(2).is_err());
        assert_eq!(t.children(1), Ok(vec![]));
    }

    #[test]
    fn out_of_bounds_offset_is_reported() {
        let mut nodes = FlatProofTree::flatten(&leaf("p")).nodes;
        nodes[0].offsets = Offsets::One(1);
        nodes[0].rule = Rule::Select;
        let t = FlatProofTree::from_nodes(nodes);
        let v = t.validate().unwrap_err();
        assert!(v.iter().any(|v| matches!(v, TreeViolation::OutOfBounds { index: 1, offset: 1 })));
    }

    #[test]
    fn shared_child_is_an_overlap() {
        let l = leaf("p");
        let parent = |c: StructuredProof| StructuredProof {
            node: c.node.clone(),
            rule: Rule::Select,
            children: vec![c],
            residual: None,
        };
        let mut nodes = FlatProofTree::flatten(&parent(parent(l))).nodes;
        // Node 3 now also claims node 1.
        nodes[2].offsets = Offsets::One(2);
        let t = FlatProofTree::from_nodes(nodes);
        let v = t.validate().unwrap_err();
        assert!(v.iter().any(|v| matches!(v, TreeViolation::Overlap { child: 1 })), "{v:?}");
    }
}
