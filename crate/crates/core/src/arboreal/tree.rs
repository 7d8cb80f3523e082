use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::ArborealError;
use crate::model::Key;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChildSide {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Links {
    pub left: Option<Key>,
    pub right: Option<Key>,
    pub parent: Option<Key>,
}

/// Binary search tree over distinct keys with parent links.
///
/// Text form: `.` for the empty tree, `(L k R)` for a node with key `k` and
/// subtrees `L` and `R`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BSTree {
    pub(crate) nodes: BTreeMap<Key, Links>,
    pub(crate) root: Option<Key>,
}

impl BSTree {
    pub fn new() -> Self {
        BSTree::default()
    }

    pub fn root(&self) -> Option<Key> {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, k: Key) -> bool {
        self.nodes.contains_key(&k)
    }

    /// Keys in increasing order.
    pub fn keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.nodes.keys().copied()
    }

    pub fn key_set(&self) -> BTreeSet<Key> {
        self.nodes.keys().copied().collect()
    }

    pub fn links(&self, k: Key) -> Option<Links> {
        self.nodes.get(&k).copied()
    }

    pub fn left(&self, k: Key) -> Option<Key> {
        self.nodes.get(&k).and_then(|l| l.left)
    }

    pub fn right(&self, k: Key) -> Option<Key> {
        self.nodes.get(&k).and_then(|l| l.right)
    }

    pub fn parent(&self, k: Key) -> Option<Key> {
        self.nodes.get(&k).and_then(|l| l.parent)
    }

    pub fn child(&self, k: Key, side: ChildSide) -> Option<Key> {
        match side {
            ChildSide::Left => self.left(k),
            ChildSide::Right => self.right(k),
        }
    }

    /// Largest key of the tree below `k`; `k` itself need not be present.
    pub fn pred(&self, k: Key) -> Option<Key> {
        self.nodes.range(..k).next_back().map(|(&k, _)| k)
    }

    pub fn succ(&self, k: Key) -> Option<Key> {
        self.nodes.range(Key(k.0 + 1)..).next().map(|(&k, _)| k)
    }

    pub fn min(&self) -> Option<Key> {
        self.nodes.keys().next().copied()
    }

    pub fn max(&self) -> Option<Key> {
        self.nodes.keys().next_back().copied()
    }

    /// Whether `a` is a proper ancestor of `b`.
    pub fn is_ancestor(&self, a: Key, b: Key) -> bool {
        let mut cur = self.parent(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    pub fn depth(&self, k: Key) -> usize {
        let mut d = 0;
        let mut cur = self.parent(k);
        while let Some(c) = cur {
            d += 1;
            cur = self.parent(c);
        }
        d
    }

    /// Keys met by an in-order walk of the links.
    pub fn in_order(&self) -> Vec<Key> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur.is_some() || !stack.is_empty() {
            while let Some(c) = cur {
                stack.push(c);
                cur = self.left(c);
            }
            let c = stack.pop().expect("non-empty");
            out.push(c);
            cur = self.right(c);
        }
        out
    }

    /// Checks links, reachability and search order.
    pub fn check(&self) -> Result<(), ArborealError> {
        let bad = |m: String| Err(ArborealError::InvalidShape(m));
        match self.root {
            None if !self.nodes.is_empty() => return bad("nodes without a root".into()),
            Some(r) if self.parent(r).is_some() || !self.contains(r) => {
                return bad(format!("root {r} is not a parentless node"))
            }
            _ => {}
        }
        for (&k, l) in &self.nodes {
            for c in [l.left, l.right].into_iter().flatten() {
                if self.parent(c) != Some(k) {
                    return bad(format!("child {c} of {k} does not point back"));
                }
            }
            if let Some(p) = l.parent {
                if self.left(p) != Some(k) && self.right(p) != Some(k) {
                    return bad(format!("{k} is not a child of its parent {p}"));
                }
            }
        }
        let order = self.in_order();
        if order.len() != self.len() {
            return bad("some nodes are unreachable from the root".into());
        }
        if order.windows(2).any(|w| w[0] >= w[1]) {
            return bad("in-order walk is not increasing".into());
        }
        Ok(())
    }

    /// Builds a tree from `(key, left, right)` records rooted at `root`.
    pub fn from_links(
        root: Option<Key>,
        records: impl IntoIterator<Item = (Key, Option<Key>, Option<Key>)>,
    ) -> Result<Self, ArborealError> {
        let mut nodes: BTreeMap<Key, Links> = BTreeMap::new();
        for (k, left, right) in records {
            let l = nodes.entry(k).or_default();
            if l.left.is_some() || l.right.is_some() {
                return Err(ArborealError::InvalidShape(format!("key {k} listed twice")));
            }
            l.left = left;
            l.right = right;
        }
        let edges: Vec<(Key, Key)> = nodes
            .iter()
            .flat_map(|(&k, l)| [l.left, l.right].into_iter().flatten().map(move |c| (k, c)))
            .collect();
        for (p, c) in edges {
            let l = nodes
                .get_mut(&c)
                .ok_or_else(|| ArborealError::InvalidShape(format!("child {c} has no record")))?;
            if l.parent.is_some() {
                return Err(ArborealError::InvalidShape(format!("{c} has two parents")));
            }
            l.parent = Some(p);
        }
        let t = BSTree { nodes, root };
        t.check()?;
        Ok(t)
    }

    /// Treap over `keys` (any order) where a smaller priority sits closer to
    /// the root; equal priorities put the smaller key higher.
    pub fn treap<P: Ord + Copy>(keys: impl IntoIterator<Item = Key>, prio: impl Fn(Key) -> P) -> Self {
        let mut sorted: Vec<Key> = keys.into_iter().collect();
        sorted.sort_unstable();
        sorted.dedup();
        let rank = |k: Key| (prio(k), k);
        let mut nodes: BTreeMap<Key, Links> = sorted.iter().map(|&k| (k, Links::default())).collect();
        // right spine of the tree built so far
        let mut spine: Vec<Key> = Vec::new();
        for &k in &sorted {
            let mut last = None;
            while let Some(&top) = spine.last() {
                if rank(top) > rank(k) {
                    last = spine.pop();
                } else {
                    break;
                }
            }
            if let Some(c) = last {
                nodes.get_mut(&k).unwrap().left = Some(c);
                nodes.get_mut(&c).unwrap().parent = Some(k);
            }
            if let Some(&p) = spine.last() {
                nodes.get_mut(&p).unwrap().right = Some(k);
                nodes.get_mut(&k).unwrap().parent = Some(p);
            }
            spine.push(k);
        }
        BSTree {
            root: spine.first().copied(),
            nodes,
        }
    }

    /// Path-shaped tree on `keys`, each key the right child of the previous.
    pub fn right_path(keys: impl IntoIterator<Item = Key>) -> Self {
        BSTree::treap(keys, |k| k)
    }

    /// The subtree induced by a root-connected key set.
    pub fn induced(&self, set: &BTreeSet<Key>) -> Self {
        let keep = |c: Option<Key>| c.filter(|c| set.contains(c));
        let nodes = set
            .iter()
            .filter_map(|&k| {
                let l = self.nodes.get(&k)?;
                Some((
                    k,
                    Links {
                        left: keep(l.left),
                        right: keep(l.right),
                        parent: keep(l.parent),
                    },
                ))
            })
            .collect();
        BSTree {
            nodes,
            root: self.root.filter(|r| set.contains(r)),
        }
    }

    pub fn to_text(&self) -> String {
        enum Item {
            Node(Option<Key>),
            Close,
            Key(Key),
        }
        let mut out = String::new();
        let mut stack = vec![Item::Node(self.root)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Node(None) => out.push('.'),
                Item::Node(Some(k)) => {
                    out.push('(');
                    stack.push(Item::Close);
                    stack.push(Item::Node(self.right(k)));
                    stack.push(Item::Key(k));
                    stack.push(Item::Node(self.left(k)));
                }
                Item::Key(k) => {
                    let _ = write!(out, " {k} ");
                }
                Item::Close => out.push(')'),
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ArborealError> {
        #[derive(Default)]
        struct Frame {
            left: Option<Key>,
            key: Option<Key>,
            right: Option<Key>,
            stage: u8,
        }
        let err = |m: &str| ArborealError::InvalidShape(format!("{m} in `{}`", text.trim()));
        let mut records = Vec::new();
        let mut frames: Vec<Frame> = Vec::new();
        let mut root: Option<Option<Key>> = None;
        let mut deliver = |frames: &mut Vec<Frame>, v: Option<Key>| -> Result<(), ArborealError> {
            match frames.last_mut() {
                None if root.is_none() => {
                    root = Some(v);
                    Ok(())
                }
                None => Err(err("trailing input")),
                Some(f) if f.stage == 0 => {
                    f.left = v;
                    f.stage = 1;
                    Ok(())
                }
                Some(f) if f.stage == 2 => {
                    f.right = v;
                    f.stage = 3;
                    Ok(())
                }
                Some(_) => Err(err("misplaced subtree")),
            }
        };
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            match c {
                c if c.is_whitespace() => {
                    chars.next();
                }
                '(' => {
                    chars.next();
                    frames.push(Frame::default());
                }
                '.' => {
                    chars.next();
                    deliver(&mut frames, None)?;
                }
                ')' => {
                    chars.next();
                    let f = frames.pop().ok_or_else(|| err("unbalanced `)`"))?;
                    if f.stage != 3 {
                        return Err(err("incomplete node"));
                    }
                    let k = f.key.expect("stage 3 has a key");
                    records.push((k, f.left, f.right));
                    deliver(&mut frames, Some(k))?;
                }
                c if c.is_ascii_digit() => {
                    let mut v: u64 = 0;
                    while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                        v = v * 10 + d.to_digit(10).unwrap() as u64;
                        if v > u32::MAX as u64 {
                            return Err(err("key too large"));
                        }
                        chars.next();
                    }
                    match frames.last_mut() {
                        Some(f) if f.stage == 1 => {
                            f.key = Some(Key(v as u32));
                            f.stage = 2;
                        }
                        _ => return Err(err("misplaced key")),
                    }
                }
                _ => return Err(err("unexpected character")),
            }
        }
        if !frames.is_empty() {
            return Err(err("unbalanced `(`"));
        }
        let root = root.ok_or_else(|| err("empty input"))?;
        BSTree::from_links(root, records)
    }
}
