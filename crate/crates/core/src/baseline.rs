//! Fixed scan orders that unroll the grid into a 1D sequence, and a chain
//! recurrence run along such an order. These are the comparison points for
//! the tree scan.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::real::Real;
use crate::scan::ScanParams;

pub const DEFAULT_BLOCK: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Row-major.
    Raster,
    /// Boustrophedon: even rows left to right, odd rows right to left.
    Continuous,
    /// Anti-diagonals `r + c` ascending, each by ascending row.
    Diagonal,
    /// Boustrophedon over `block x block` tiles, boustrophedon inside each.
    NestedS,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Raster, Strategy::Continuous, Strategy::Diagonal, Strategy::NestedS];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Raster => "raster",
            Strategy::Continuous => "continuous",
            Strategy::Diagonal => "diagonal",
            Strategy::NestedS => "nesteds",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Data(format!("unknown scan strategy {s:?}")))
    }
}

/// A bijection from sequence position to grid node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanPermutation {
    pub order: Vec<usize>,
    pub strategy: Strategy,
    pub block: usize,
    pub height: usize,
    pub width: usize,
}

impl ScanPermutation {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.height * self.width];
        self.order.len() == seen.len()
            && self.order.iter().all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
    }

    /// Positions where consecutive entries are not 4-neighbours.
    pub fn adjacency_violations(&self) -> usize {
        let w = self.width;
        self.order
            .windows(2)
            .filter(|p| {
                let (r0, c0) = (p[0] / w, p[0] % w);
                let (r1, c1) = (p[1] / w, p[1] % w);
                r0.abs_diff(r1) + c0.abs_diff(c1) != 1
            })
            .count()
    }
}

fn snake_row(order: &mut Vec<usize>, width: usize, row: usize, cols: std::ops::Range<usize>, reverse: bool) {
    if reverse {
        order.extend(cols.rev().map(|c| row * width + c));
    } else {
        order.extend(cols.map(|c| row * width + c));
    }
}

pub fn make_permutation(strategy: Strategy, height: usize, width: usize, block: usize) -> Result<ScanPermutation> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension(format!("grid must be non-empty, got {height}x{width}")));
    }
    if strategy == Strategy::NestedS && block == 0 {
        return Err(Error::Dimension("nested scan block must be positive".into()));
    }
    let mut order = Vec::with_capacity(height * width);
    match strategy {
        Strategy::Raster => order.extend(0..height * width),
        Strategy::Continuous => {
            for r in 0..height {
                snake_row(&mut order, width, r, 0..width, r % 2 == 1);
            }
        }
        Strategy::Diagonal => {
            for d in 0..height + width - 1 {
                let r_lo = d.saturating_sub(width - 1);
                for r in r_lo..=d.min(height - 1) {
                    order.push(r * width + (d - r));
                }
            }
        }
        Strategy::NestedS => {
            let tile_rows = height.div_ceil(block);
            let tile_cols = width.div_ceil(block);
            for tr in 0..tile_rows {
                let cols: Box<dyn Iterator<Item = usize>> =
                    if tr % 2 == 0 { Box::new(0..tile_cols) } else { Box::new((0..tile_cols).rev()) };
                for tc in cols {
                    let rows = tr * block..((tr + 1) * block).min(height);
                    let col_span = tc * block..((tc + 1) * block).min(width);
                    for (local, r) in rows.enumerate() {
                        snake_row(&mut order, width, r, col_span.clone(), local % 2 == 1);
                    }
                }
            }
        }
    }
    Ok(ScanPermutation { order, strategy, block, height, width })
}

/// Chain recurrence along `perm`: `h_k = a_k h_{k-1} + b_k x_k`, `y_k = c_k h_k`,
/// with coefficients indexed by the node at position `k`. The output is laid
/// back out on the grid.
pub fn sequence_scan<T: Real>(
    map: &FeatureMap<T>,
    perm: &ScanPermutation,
    params: &ScanParams<T>,
) -> Result<FeatureMap<T>> {
    let n = map.node_count();
    if perm.height != map.height() || perm.width != map.width() || perm.len() != n {
        return Err(Error::Dimension(format!(
            "permutation covers {}x{}, map is {}x{}",
            perm.height,
            perm.width,
            map.height(),
            map.width()
        )));
    }
    params.check_nodes(n)?;
    let ch = map.channels();
    let x = map.data();
    let mut y = vec![T::zero(); n * ch];
    let mut state = vec![T::zero(); ch];
    for &i in &perm.order {
        let (a, b, c) = (params.a_bar[i], params.b_bar[i], params.c_out[i]);
        for k in 0..ch {
            state[k] = a * state[k] + b * x[i * ch + k];
            y[i * ch + k] = c * state[k];
        }
    }
    FeatureMap::new(map.height(), map.width(), ch, y)
}
