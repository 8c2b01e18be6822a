use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Enumeration guard on the total number of variables.
pub const MAX_VARIABLES: usize = 16;

/// A partition of the variables `z_j^{(l)}` (`l` the factor, `j` the
/// position within it) of a product of `m` functions.
///
/// Indices are zero-based in memory and one-based in the text form
/// `[(l,j)(l,j)|(l,j)...]`. Blocks are kept sorted, and the block list is
/// sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionDiagram {
    sizes: Vec<usize>,
    blocks: Vec<Vec<(usize, usize)>>,
}

impl PartitionDiagram {
    /// Validates and canonicalises a diagram.
    pub fn new(sizes: Vec<usize>, mut blocks: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        let mut seen = vec![vec![false; 0]; sizes.len()];
        for (l, s) in sizes.iter().enumerate() {
            seen[l] = vec![false; *s];
        }
        let mut count = 0;
        for block in &mut blocks {
            block.sort_unstable();
            if block.len() < 2 {
                return Err(Error::ArityMismatch(format!(
                    "block {block:?} has fewer than 2 variables"
                )));
            }
            for w in block.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::ArityMismatch(format!(
                        "block {block:?} holds two variables of factor {}",
                        w[0].0 + 1
                    )));
                }
            }
            for &(l, j) in block.iter() {
                let slot = seen.get_mut(l).and_then(|s| s.get_mut(j)).ok_or_else(|| {
                    Error::ArityMismatch(format!("variable ({}, {}) out of range", l + 1, j + 1))
                })?;
                if std::mem::replace(slot, true) {
                    return Err(Error::ArityMismatch(format!(
                        "variable ({}, {}) repeated",
                        l + 1,
                        j + 1
                    )));
                }
                count += 1;
            }
        }
        if count != total {
            return Err(Error::ArityMismatch(format!(
                "{count} of {total} variables covered"
            )));
        }
        blocks.sort();
        Ok(PartitionDiagram { sizes, blocks })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn blocks(&self) -> &[Vec<(usize, usize)>] {
        &self.blocks
    }

    /// `|π|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `slots[l][j]` is the block holding variable `(l, j)`.
    pub fn slots(&self) -> Vec<Vec<usize>> {
        let mut slots: Vec<Vec<usize>> = self.sizes.iter().map(|&s| vec![0; s]).collect();
        for (b, block) in self.blocks.iter().enumerate() {
            for &(l, j) in block {
                slots[l][j] = b;
            }
        }
        slots
    }
}

impl fmt::Display for PartitionDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (b, block) in self.blocks.iter().enumerate() {
            if b > 0 {
                f.write_str("|")?;
            }
            for (l, j) in block {
                write!(f, "({},{})", l + 1, j + 1)?;
            }
        }
        f.write_str("]")
    }
}

impl FromStr for PartitionDiagram {
    type Err = Error;

    /// Parses the text form; factor sizes are inferred from the largest
    /// position seen for each factor.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ArityMismatch(format!("malformed diagram {s:?}"));
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let mut blocks = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        if !inner.is_empty() {
            for part in inner.split('|') {
                let mut block = Vec::new();
                for var in part.split(')').filter(|v| !v.trim().is_empty()) {
                    let body = var.trim().strip_prefix('(').ok_or_else(bad)?;
                    let (l, j) = body.split_once(',').ok_or_else(bad)?;
                    let l: usize = l.trim().parse().map_err(|_| bad())?;
                    let j: usize = j.trim().parse().map_err(|_| bad())?;
                    if l == 0 || j == 0 {
                        return Err(bad());
                    }
                    if sizes.len() < l {
                        sizes.resize(l, 0);
                    }
                    sizes[l - 1] = sizes[l - 1].max(j);
                    block.push((l - 1, j - 1));
                }
                blocks.push(block);
            }
        }
        PartitionDiagram::new(sizes, blocks)
    }
}

/// All partitions in `Π(sizes)`: no block joins two variables of the same
/// factor and every block has at least two variables.
pub fn enumerate_pi(sizes: &[usize]) -> Result<Vec<PartitionDiagram>> {
    let total: usize = sizes.iter().sum();
    if total > MAX_VARIABLES {
        return Err(Error::Capacity {
            total,
            limit: MAX_VARIABLES,
        });
    }
    let vars: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(l, &s)| (0..s).map(move |j| (l, j)))
        .collect();
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<(usize, usize)>> = Vec::new();
    assign(&vars, 0, &mut blocks, &mut out);
    let mut diagrams: Vec<PartitionDiagram> = out
        .into_iter()
        .map(|mut blocks| {
            blocks.sort();
            PartitionDiagram {
                sizes: sizes.to_vec(),
                blocks,
            }
        })
        .collect();
    diagrams.sort();
    Ok(diagrams)
}

fn assign(
    vars: &[(usize, usize)],
    next: usize,
    blocks: &mut Vec<Vec<(usize, usize)>>,
    out: &mut Vec<Vec<Vec<(usize, usize)>>>,
) {
    let singletons = blocks.iter().filter(|b| b.len() == 1).count();
    if singletons > vars.len() - next {
        return;
    }
    if next == vars.len() {
        out.push(blocks.clone());
        return;
    }
    let v = vars[next];
    for b in 0..blocks.len() {
        if blocks[b].iter().any(|&(l, _)| l == v.0) {
            continue;
        }
        blocks[b].push(v);
        assign(vars, next + 1, blocks, out);
        blocks[b].pop();
    }
    blocks.push(vec![v]);
    assign(vars, next + 1, blocks, out);
    blocks.pop();
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut x = x;
    while parent[x] != r {
        let up = parent[x];
        parent[x] = r;
        x = up;
    }
    r
}

/// True iff the blocks, read as hyperedges on the factor indices, connect
/// all factors.
pub fn is_connected(diagram: &PartitionDiagram) -> bool {
    let m = diagram.sizes.len();
    let mut parent: Vec<usize> = (0..m).collect();
    for block in &diagram.blocks {
        let first = find(&mut parent, block[0].0);
        for &(l, _) in &block[1..] {
            let r = find(&mut parent, l);
            parent[r] = first;
        }
    }
    let mut roots = (0..m).map(|l| find(&mut parent, l));
    match roots.next() {
        Some(r0) => roots.all(|r| r == r0),
        None => true,
    }
}

/// `Π̄(sizes)`: the connected members of `Π(sizes)`.
pub fn enumerate_pi_bar(sizes: &[usize]) -> Result<Vec<PartitionDiagram>> {
    Ok(enumerate_pi(sizes)?
        .into_iter()
        .filter(is_connected)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_pi(&[1, 1]).unwrap().len(), 1);
        assert_eq!(enumerate_pi(&[1, 1, 1, 1]).unwrap().len(), 4);
        assert_eq!(enumerate_pi(&[2, 2]).unwrap().len(), 2);
        assert_eq!(enumerate_pi_bar(&[1, 1, 1, 1]).unwrap().len(), 1);
        assert_eq!(enumerate_pi_bar(&[2, 2]).unwrap().len(), 2);
        assert_eq!(enumerate_pi_bar(&[1, 1]).unwrap().len(), 1);
        assert!(enumerate_pi(&[1]).unwrap().is_empty());
        assert_eq!(enumerate_pi(&[]).unwrap().len(), 1);
    }

    #[test]
    fn guard_rejects_large_sizes() {
        assert!(matches!(
            enumerate_pi(&[5, 5, 5, 2]),
            Err(Error::Capacity {
                total: 17,
                limit: 16
            })
        ));
    }

    #[test]
    fn connectivity_examples() {
        let all: PartitionDiagram = "[(1,1)(2,1)(3,1)(4,1)]".parse().unwrap();
        assert!(is_connected(&all));
        let pairs: PartitionDiagram = "[(1,1)(2,1)|(3,1)(4,1)]".parse().unwrap();
        assert!(!is_connected(&pairs));
        let single = PartitionDiagram::new(vec![0], vec![]).unwrap();
        assert!(is_connected(&single));
    }

    #[test]
    fn text_form_round_trip() {
        for d in enumerate_pi(&[2, 1, 2]).unwrap() {
            let s = d.to_string();
            assert_eq!(s.parse::<PartitionDiagram>().unwrap(), d, "{s}");
        }
        let d = &enumerate_pi(&[1, 1, 1, 1]).unwrap()[0];
        assert_eq!(d.to_string(), "[(1,1)(2,1)|(3,1)(4,1)]");
    }

    #[test]
    fn invalid_diagrams_rejected() {
        assert!("[(1,1)(1,2)]".parse::<PartitionDiagram>().is_err());
        assert!("[(1,1)|(2,1)]".parse::<PartitionDiagram>().is_err());
        assert!("(1,1)(2,1)".parse::<PartitionDiagram>().is_err());
        assert!(PartitionDiagram::new(
            vec![1, 1],
            vec![vec![(0, 0), (1, 0)], vec![(0, 0), (1, 0)]]
        )
        .is_err());
    }
}
