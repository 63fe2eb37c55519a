//! Order restrictions on an index set, encoded as maximally linked subgraphs.
//!
//! A restriction over `p` elements is a collection of chains; the chain
//! `[a, b, c]` states `value[a] <= value[b] <= value[c]`. Two elements are
//! linked when the union of chain relations orders them, directly or by
//! transitivity. An element linked to every other element is *nodal*.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single chain of linked elements, listed in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedSubgraph {
    chain: Vec<usize>,
}

impl LinkedSubgraph {
    pub fn new(chain: Vec<usize>) -> Result<Self> {
        if chain.len() < 2 {
            return Err(Error::InvalidSubgraph(format!(
                "a chain needs at least two elements, got {:?}",
                chain
            )));
        }
        let mut seen = BTreeSet::new();
        for &i in &chain {
            if !seen.insert(i) {
                return Err(Error::InvalidSubgraph(format!(
                    "element {i} appears twice in chain {:?}",
                    chain
                )));
            }
        }
        Ok(Self { chain })
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires two elements
    }

    pub fn contains(&self, i: usize) -> bool {
        self.chain.contains(&i)
    }

    pub fn position(&self, i: usize) -> Option<usize> {
        self.chain.iter().position(|&e| e == i)
    }

    /// The endpoints `(low, high)` of the chain, its farthest linked pair.
    pub fn farthest_pair(&self) -> (usize, usize) {
        (self.chain[0], *self.chain.last().unwrap())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictionKind {
    SimpleOrder,
    Umbrella { peak: usize },
    SimpleTree { root: usize },
    Custom,
}

/// An order restriction over indices `0..p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRestriction {
    p: usize,
    kind: RestrictionKind,
    subgraphs: Vec<LinkedSubgraph>,
}

impl OrderRestriction {
    /// `value[0] <= value[1] <= ... <= value[p-1]`.
    pub fn simple_order(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension("simple order needs p >= 1".into()));
        }
        let subgraphs = if p >= 2 {
            vec![LinkedSubgraph::new((0..p).collect())?]
        } else {
            Vec::new()
        };
        Ok(Self { p, kind: RestrictionKind::SimpleOrder, subgraphs })
    }

    /// Ascending up to `peak`, descending after it. The descending run is
    /// stored as the ascending chain `[p-1, p-2, ..., peak]`.
    pub fn umbrella(p: usize, peak: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension("umbrella needs p >= 1".into()));
        }
        if peak >= p {
            return Err(Error::IndexOutOfRange { index: peak, len: p });
        }
        let mut subgraphs = Vec::new();
        if peak >= 1 {
            subgraphs.push(LinkedSubgraph::new((0..=peak).collect())?);
        }
        if peak + 2 <= p {
            subgraphs.push(LinkedSubgraph::new((peak..p).rev().collect())?);
        }
        Ok(Self { p, kind: RestrictionKind::Umbrella { peak }, subgraphs })
    }

    /// `value[root] <= value[i]` for every other `i`.
    pub fn simple_tree(p: usize, root: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidDimension("simple tree needs p >= 2".into()));
        }
        if root >= p {
            return Err(Error::IndexOutOfRange { index: root, len: p });
        }
        let subgraphs = (0..p)
            .filter(|&i| i != root)
            .map(|i| LinkedSubgraph::new(vec![root, i]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { p, kind: RestrictionKind::SimpleTree { root }, subgraphs })
    }

    /// No constraints.
    pub fn trivial(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension("restriction needs p >= 1".into()));
        }
        Ok(Self { p, kind: RestrictionKind::Custom, subgraphs: Vec::new() })
    }

    /// An explicit chain list. Validated on construction.
    pub fn custom(p: usize, chains: Vec<Vec<usize>>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension("restriction needs p >= 1".into()));
        }
        let subgraphs = chains
            .into_iter()
            .map(LinkedSubgraph::new)
            .collect::<Result<Vec<_>>>()?;
        let r = Self { p, kind: RestrictionKind::Custom, subgraphs };
        r.validate()?;
        Ok(r)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn kind(&self) -> RestrictionKind {
        self.kind
    }

    pub fn subgraphs(&self) -> &[LinkedSubgraph] {
        &self.subgraphs
    }

    pub fn is_trivial(&self) -> bool {
        self.subgraphs.is_empty()
    }

    /// All subgraphs whose chain contains `i`.
    ///
    /// Panics if `i >= p`.
    pub fn subgraphs_for(&self, i: usize) -> Vec<&LinkedSubgraph> {
        assert!(i < self.p, "index {i} out of range for {} elements", self.p);
        self.subgraphs.iter().filter(|g| g.contains(i)).collect()
    }

    /// Indices linked (directly or transitively) to every other index.
    pub fn nodal_indices(&self) -> BTreeSet<usize> {
        let le = self.closure();
        (0..self.p)
            .filter(|&i| (0..self.p).all(|j| j == i || le.le(i, j) || le.le(j, i)))
            .collect()
    }

    /// Checks index bounds, acyclicity and maximality; reports the first
    /// violation found instead of panicking.
    pub fn validate(&self) -> Result<()> {
        for g in &self.subgraphs {
            for &i in g.chain() {
                if i >= self.p {
                    return Err(Error::IndexOutOfRange { index: i, len: self.p });
                }
            }
        }
        let le = self.closure();
        for a in 0..self.p {
            for b in (a + 1)..self.p {
                if le.le(a, b) && le.le(b, a) {
                    return Err(Error::Cycle { a, b });
                }
            }
        }
        // Maximality: a chain implied entirely by another chain is redundant.
        for (x, gx) in self.subgraphs.iter().enumerate() {
            for (y, gy) in self.subgraphs.iter().enumerate() {
                if x == y {
                    continue;
                }
                let implied = gx.chain().windows(2).all(|w| {
                    match (gy.position(w[0]), gy.position(w[1])) {
                        (Some(a), Some(b)) => a < b,
                        _ => false,
                    }
                });
                if implied {
                    return Err(Error::SubsumedChain {
                        subsumed: gx.chain().to_vec(),
                        by: gy.chain().to_vec(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Transitive closure of the union of chain relations.
    pub(crate) fn closure(&self) -> Comparability {
        let p = self.p;
        let mut le = vec![false; p * p];
        for g in &self.subgraphs {
            let c = g.chain();
            for a in 0..c.len() {
                for b in (a + 1)..c.len() {
                    if c[a] < p && c[b] < p {
                        le[c[a] * p + c[b]] = true;
                    }
                }
            }
        }
        for k in 0..p {
            for i in 0..p {
                if le[i * p + k] {
                    for j in 0..p {
                        if le[k * p + j] {
                            le[i * p + j] = true;
                        }
                    }
                }
            }
        }
        Comparability { p, le }
    }

    /// Indices grouped by chain connectivity; unconstrained indices form
    /// singleton components. Components and their members are sorted.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.p).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            let mut c = i;
            while parent[c] != c {
                let next = parent[c];
                parent[c] = r;
                c = next;
            }
            r
        }
        for g in &self.subgraphs {
            let first = g.chain()[0];
            for &e in &g.chain()[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, e));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.p];
        for i in 0..self.p {
            let r = find(&mut parent, i);
            groups[r].push(i);
        }
        groups.retain(|g| !g.is_empty());
        groups.sort_by_key(|g| g[0]);
        groups
    }
}

/// Pairwise `<=` relation derived from a restriction's chains.
pub(crate) struct Comparability {
    p: usize,
    le: Vec<bool>,
}

impl Comparability {
    pub fn le(&self, a: usize, b: usize) -> bool {
        self.le[a * self.p + b]
    }
}

/// Textual restriction description, resolved against a dimension with
/// [`RestrictionSpec::build`]. Syntax: `none`, `simple`, `umbrella:PEAK`,
/// `tree:ROOT`, or `chains:0<1<2,4<3<2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestrictionSpec {
    None,
    SimpleOrder,
    Umbrella { peak: usize },
    SimpleTree { root: usize },
    Chains(Vec<Vec<usize>>),
}

impl RestrictionSpec {
    pub fn build(&self, p: usize) -> Result<OrderRestriction> {
        match self {
            RestrictionSpec::None => OrderRestriction::trivial(p),
            RestrictionSpec::SimpleOrder => OrderRestriction::simple_order(p),
            RestrictionSpec::Umbrella { peak } => OrderRestriction::umbrella(p, *peak),
            RestrictionSpec::SimpleTree { root } => OrderRestriction::simple_tree(p, *root),
            RestrictionSpec::Chains(chains) => OrderRestriction::custom(p, chains.clone()),
        }
    }
}

impl FromStr for RestrictionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(RestrictionSpec::None);
        }
        if s.eq_ignore_ascii_case("simple") {
            return Ok(RestrictionSpec::SimpleOrder);
        }
        if let Some(rest) = s.strip_prefix("umbrella:") {
            let peak = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad umbrella peak {rest:?}")))?;
            return Ok(RestrictionSpec::Umbrella { peak });
        }
        if let Some(rest) = s.strip_prefix("tree:") {
            let root = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad tree root {rest:?}")))?;
            return Ok(RestrictionSpec::SimpleTree { root });
        }
        if let Some(rest) = s.strip_prefix("chains:") {
            let chains = rest
                .split(',')
                .map(|chain| {
                    chain
                        .split('<')
                        .map(|e| {
                            e.trim()
                                .parse()
                                .map_err(|_| Error::Parse(format!("bad chain element {e:?}")))
                        })
                        .collect::<Result<Vec<usize>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(RestrictionSpec::Chains(chains));
        }
        Err(Error::Parse(format!(
            "unknown restriction {s:?}; expected none, simple, umbrella:K, tree:K or chains:..."
        )))
    }
}

impl fmt::Display for RestrictionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestrictionSpec::None => write!(f, "none"),
            RestrictionSpec::SimpleOrder => write!(f, "simple"),
            RestrictionSpec::Umbrella { peak } => write!(f, "umbrella:{peak}"),
            RestrictionSpec::SimpleTree { root } => write!(f, "tree:{root}"),
            RestrictionSpec::Chains(chains) => {
                write!(f, "chains:")?;
                for (k, chain) in chains.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    for (e, i) in chain.iter().enumerate() {
                        if e > 0 {
                            write!(f, "<")?;
                        }
                        write!(f, "{i}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Joint restriction for an `I x J` matrix: one restriction applied to every
/// row and one applied to every column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixOrderSpec {
    rows: usize,
    cols: usize,
    row_restriction: OrderRestriction,
    col_restriction: OrderRestriction,
}

impl MatrixOrderSpec {
    pub fn new(
        rows: usize,
        cols: usize,
        row_restriction: OrderRestriction,
        col_restriction: OrderRestriction,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension("matrix needs rows >= 1 and cols >= 1".into()));
        }
        if row_restriction.p() != cols {
            return Err(Error::LengthMismatch(format!(
                "row restriction covers {} elements but the matrix has {} columns",
                row_restriction.p(),
                cols
            )));
        }
        if col_restriction.p() != rows {
            return Err(Error::LengthMismatch(format!(
                "column restriction covers {} elements but the matrix has {} rows",
                col_restriction.p(),
                rows
            )));
        }
        Ok(Self { rows, cols, row_restriction, col_restriction })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_restriction(&self) -> &OrderRestriction {
        &self.row_restriction
    }

    pub fn col_restriction(&self) -> &OrderRestriction {
        &self.col_restriction
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_order_examples() {
        let r = OrderRestriction::simple_order(4).unwrap();
        assert_eq!(r.subgraphs().len(), 1);
        assert_eq!(r.subgraphs()[0].chain(), &[0, 1, 2, 3]);

        let r = OrderRestriction::simple_order(1).unwrap();
        assert!(r.is_trivial());

        let r = OrderRestriction::simple_order(2).unwrap();
        assert_eq!(r.subgraphs()[0].chain(), &[0, 1]);

        assert!(OrderRestriction::simple_order(0).is_err());
    }

    #[test]
    fn umbrella_examples() {
        let r = OrderRestriction::umbrella(5, 2).unwrap();
        let chains: Vec<_> = r.subgraphs().iter().map(|g| g.chain().to_vec()).collect();
        assert_eq!(chains, vec![vec![0, 1, 2], vec![4, 3, 2]]);

        let r = OrderRestriction::umbrella(5, 4).unwrap();
        assert_eq!(r.subgraphs().len(), 1);
        assert_eq!(r.subgraphs()[0].chain(), &[0, 1, 2, 3, 4]);

        let r = OrderRestriction::umbrella(3, 0).unwrap();
        assert_eq!(r.subgraphs().len(), 1);
        assert_eq!(r.subgraphs()[0].chain(), &[2, 1, 0]);

        assert!(matches!(
            OrderRestriction::umbrella(3, 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn simple_tree_examples() {
        let r = OrderRestriction::simple_tree(4, 0).unwrap();
        let chains: Vec<_> = r.subgraphs().iter().map(|g| g.chain().to_vec()).collect();
        assert_eq!(chains, vec![vec![0, 1], vec![0, 2], vec![0, 3]]);

        let r = OrderRestriction::simple_tree(2, 0).unwrap();
        assert_eq!(r.subgraphs()[0].chain(), &[0, 1]);

        let r = OrderRestriction::simple_tree(4, 2).unwrap();
        let chains: Vec<_> = r.subgraphs().iter().map(|g| g.chain().to_vec()).collect();
        assert_eq!(chains, vec![vec![2, 0], vec![2, 1], vec![2, 3]]);

        assert!(OrderRestriction::simple_tree(1, 0).is_err());
        assert!(OrderRestriction::simple_tree(4, 4).is_err());
    }

    #[test]
    fn nodal_examples() {
        let r = OrderRestriction::simple_order(5).unwrap();
        assert_eq!(r.nodal_indices(), (0..5).collect());

        let r = OrderRestriction::umbrella(5, 2).unwrap();
        assert_eq!(r.nodal_indices(), [2].into_iter().collect());

        let r = OrderRestriction::simple_tree(4, 0).unwrap();
        assert_eq!(r.nodal_indices(), [0].into_iter().collect());
    }

    #[test]
    fn nodal_uses_transitivity_across_chains() {
        // 0<=1 and 1<=2 makes 0 and 2 linked through 1.
        let r = OrderRestriction::custom(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(r.nodal_indices(), (0..3).collect());
    }

    #[test]
    fn subgraphs_for_examples() {
        let r = OrderRestriction::umbrella(5, 2).unwrap();
        assert_eq!(r.subgraphs_for(2).len(), 2);
        let for_one = r.subgraphs_for(1);
        assert_eq!(for_one.len(), 1);
        assert_eq!(for_one[0].chain(), &[0, 1, 2]);

        let r = OrderRestriction::simple_order(3).unwrap();
        assert_eq!(r.subgraphs_for(1).len(), 1);
    }

    #[test]
    fn farthest_pair_examples() {
        assert_eq!(LinkedSubgraph::new(vec![0, 1, 2, 3]).unwrap().farthest_pair(), (0, 3));
        assert_eq!(LinkedSubgraph::new(vec![4, 3, 2]).unwrap().farthest_pair(), (4, 2));
        assert_eq!(LinkedSubgraph::new(vec![0, 3]).unwrap().farthest_pair(), (0, 3));
        assert!(LinkedSubgraph::new(vec![1]).is_err());
        assert!(LinkedSubgraph::new(vec![1, 1]).is_err());
    }

    #[test]
    fn validate_examples() {
        assert!(matches!(
            OrderRestriction::custom(2, vec![vec![0, 1], vec![1, 0]]),
            Err(Error::Cycle { a: 0, b: 1 })
        ));
        assert!(matches!(
            OrderRestriction::custom(3, vec![vec![0, 1, 2], vec![0, 1]]),
            Err(Error::SubsumedChain { .. })
        ));
        assert!(OrderRestriction::custom(3, vec![vec![0, 1, 2]]).is_ok());
        assert!(matches!(
            OrderRestriction::custom(2, vec![vec![0, 5]]),
            Err(Error::IndexOutOfRange { index: 5, len: 2 })
        ));
    }

    #[test]
    fn builders_validate_clean() {
        for p in 1..8 {
            assert!(OrderRestriction::simple_order(p).unwrap().validate().is_ok());
            for peak in 0..p {
                assert!(OrderRestriction::umbrella(p, peak).unwrap().validate().is_ok());
            }
            if p >= 2 {
                for root in 0..p {
                    assert!(OrderRestriction::simple_tree(p, root).unwrap().validate().is_ok());
                }
            }
        }
    }

    #[test]
    fn nodal_counts_for_families() {
        for p in 2..8 {
            assert_eq!(OrderRestriction::simple_order(p).unwrap().nodal_indices().len(), p);
            for peak in 1..p - 1 {
                let n = OrderRestriction::umbrella(p, peak).unwrap().nodal_indices();
                assert_eq!(n.len(), 1, "umbrella p={p} peak={peak}");
                assert!(n.contains(&peak));
            }
        }
    }

    #[test]
    fn every_index_covered_by_builtin_families() {
        for p in 2..8 {
            for r in [
                OrderRestriction::simple_order(p).unwrap(),
                OrderRestriction::umbrella(p, p / 2).unwrap(),
                OrderRestriction::simple_tree(p, 0).unwrap(),
            ] {
                for i in 0..p {
                    assert!(!r.subgraphs_for(i).is_empty(), "p={p} i={i}");
                }
            }
        }
    }

    #[test]
    fn components() {
        let r = OrderRestriction::custom(5, vec![vec![0, 1], vec![3, 4]]).unwrap();
        assert_eq!(r.connected_components(), vec![vec![0, 1], vec![2], vec![3, 4]]);
        let r = OrderRestriction::umbrella(5, 2).unwrap();
        assert_eq!(r.connected_components(), vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn spec_parse_round_trip() {
        for s in ["none", "simple", "umbrella:2", "tree:0", "chains:0<1<2,4<3<2"] {
            let spec: RestrictionSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            let back: RestrictionSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, back);
        }
        assert!("umbrella:".parse::<RestrictionSpec>().is_err());
        assert!("pyramid:1".parse::<RestrictionSpec>().is_err());
    }

    #[test]
    fn spec_build_matches_constructors() {
        let spec: RestrictionSpec = "umbrella:2".parse().unwrap();
        assert_eq!(spec.build(5).unwrap(), OrderRestriction::umbrella(5, 2).unwrap());
        let spec: RestrictionSpec = "chains:0<1<2,4<3<2".parse().unwrap();
        assert_eq!(
            spec.build(5).unwrap(),
            OrderRestriction::custom(5, vec![vec![0, 1, 2], vec![4, 3, 2]]).unwrap()
        );
    }

    #[test]
    fn matrix_spec_checks_dimensions() {
        let rows = OrderRestriction::simple_order(4).unwrap();
        let cols = OrderRestriction::simple_order(3).unwrap();
        assert!(MatrixOrderSpec::new(3, 4, rows.clone(), cols.clone()).is_ok());
        assert!(MatrixOrderSpec::new(4, 3, rows, cols).is_err());
    }
}
