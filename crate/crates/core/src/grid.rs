//! Uniform Cartesian grids with interior/boundary masks.
//!
//! Every problem in this crate lives on a tensor grid with spacing `h`,
//! identical along all axes. A node is one of
//!
//! * `Interior` — carries an unknown,
//! * `Boundary` — carries the imposed Dirichlet value (0 for every problem
//!   solved here), or
//! * `Exterior` — padding outside the domain; fields store a 0 there and no
//!   stencil ever reads it as data.
//!
//! The structural invariant that every operator in this crate relies on:
//! **each axis neighbor of an interior node is interior or boundary**, so a
//! centered three-point stencil applied at an interior node only ever touches
//! nodes that carry values. Constructors establish the invariant and
//! `validate` rechecks it; domains are immutable afterwards — derived domains
//! (`scale_domain`, `shrink_domain`) are new values.
//!
//! Domains remember an optional `star_center`: a point from which every
//! interior node is visible through the domain. It is set when the discrete
//! star-shapedness test passes and is the fixed point of `scale_domain`.

use crate::error::{Error, Result};

/// Classification of one grid node. Masks are a partition by construction:
/// a node has exactly one kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// An immutable uniform-grid domain in one or two dimensions.
#[derive(Debug, Clone)]
pub struct GridDomain {
    dim: usize,
    h: f64,
    /// Nodes per axis, row-major with x fastest; `shape[1] == 1` in 1D.
    shape: [usize; 2],
    /// Coordinates of node `(0, 0)`.
    origin: [f64; 2],
    kinds: Vec<NodeKind>,
    star_center: Option<[f64; 2]>,
}

impl GridDomain {
    /// Discretize the open interval `(a, b)` with `n` cells (`n + 1` nodes).
    ///
    /// The endpoints become boundary nodes, everything between is interior,
    /// and the spacing is `h = (b - a) / n`. Requires `a < b` and `n >= 3`
    /// so that at least one genuinely interior stencil exists. The midpoint
    /// is recorded as the star center (an interval is star-shaped about any
    /// of its points).
    pub fn build_interval(a: f64, b: f64, n: usize) -> Result<GridDomain> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "interval endpoints must satisfy a < b, got a = {a}, b = {b}"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidDomain(format!(
                "interval needs at least 3 cells, got n = {n}"
            )));
        }
        let h = (b - a) / n as f64;
        let mut kinds = vec![NodeKind::Interior; n + 1];
        kinds[0] = NodeKind::Boundary;
        kinds[n] = NodeKind::Boundary;
        let d = GridDomain {
            dim: 1,
            h,
            shape: [n + 1, 1],
            origin: [a, 0.0],
            kinds,
            star_center: Some([0.5 * (a + b), 0.0]),
        };
        d.validate()?;
        Ok(d)
    }

    /// Discretize the region where `indicator` holds inside the bounding box
    /// `[x0, x1] x [y0, y1]`, with `n` cells along x (the y spacing is the
    /// same `h`, so the box height is rounded to a whole number of cells).
    ///
    /// Nodes satisfying the indicator become interior; nodes that fail it but
    /// sit next to an interior node become boundary. Indicator nodes on the
    /// edge of the bounding array are demoted (they cannot support a full
    /// stencil), which keeps the neighbor invariant. Fails if no interior
    /// node survives.
    ///
    /// The box center is recorded as `star_center` when the discrete
    /// star-shapedness test passes; irregular masks simply get `None`.
    pub fn build_masked(
        indicator: impl Fn(f64, f64) -> bool,
        bbox: [f64; 4],
        n: usize,
    ) -> Result<GridDomain> {
        let [x0, x1, y0, y1] = bbox;
        if !(x0 < x1) || !(y0 < y1) {
            return Err(Error::InvalidDomain(format!(
                "bounding box must have positive extent, got [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidDomain(format!(
                "masked build needs at least 3 cells across, got n = {n}"
            )));
        }
        let h = (x1 - x0) / n as f64;
        let ny = ((y1 - y0) / h).round().max(3.0) as usize;
        let shape = [n + 1, ny + 1];
        let origin = [x0, y0];

        let total = shape[0] * shape[1];
        let mut kinds = vec![NodeKind::Exterior; total];
        // First pass: candidate interior where the indicator holds, away from
        // the array edge.
        for iy in 0..shape[1] {
            for ix in 0..shape[0] {
                let on_edge = ix == 0 || iy == 0 || ix + 1 == shape[0] || iy + 1 == shape[1];
                let (x, y) = (x0 + ix as f64 * h, y0 + iy as f64 * h);
                if !on_edge && indicator(x, y) {
                    kinds[iy * shape[0] + ix] = NodeKind::Interior;
                }
            }
        }
        promote_boundary(&mut kinds, shape);

        let center = [0.5 * (x0 + x1), 0.5 * (y0 + y1)];
        let mut d = GridDomain {
            dim: 2,
            h,
            shape,
            origin,
            kinds,
            star_center: None,
        };
        if d.interior_count() == 0 {
            return Err(Error::InvalidDomain(
                "indicator leaves no interior node at this resolution".into(),
            ));
        }
        if d.is_star_shaped_about(center) {
            d.star_center = Some(center);
        }
        d.validate()?;
        Ok(d)
    }

    /// Expand the domain about its star center: node positions map through
    /// `x -> c + (x - c) / alpha`, regridded at the *same* spacing `h`.
    ///
    /// Requires `alpha` in `(0, 1]` (these domains only ever grow toward an
    /// exhaustion limit) and a recorded star center. `alpha = 1` returns an
    /// identical copy. Membership of a new node is decided by whether its
    /// preimage `c + alpha (x - c)` lies in the old domain region, so e.g.
    /// the interval `(0, 1)` at `alpha = 0.5` becomes `(-0.5, 1.5)`.
    pub fn scale_domain(&self, alpha: f64) -> Result<GridDomain> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("scaling factor must lie in (0, 1], got {alpha}"),
            });
        }
        let c = self.star_center.ok_or_else(|| {
            Error::InvalidDomain("scale_domain requires a star-shaped domain".into())
        })?;
        if alpha == 1.0 {
            return Ok(self.clone());
        }

        // New nodes sit on the lattice anchored at the (fixed) star center.
        // Work out the index range covering the scaled node bounding box plus
        // one cell of padding for the new boundary ring.
        let h = self.h;
        let (lo, hi) = self.node_bbox();
        let mut k_lo = [0i64; 2];
        let mut k_hi = [0i64; 2];
        for ax in 0..self.dim {
            let lo_s = c[ax] + (lo[ax] - c[ax]) / alpha;
            let hi_s = c[ax] + (hi[ax] - c[ax]) / alpha;
            k_lo[ax] = ((lo_s - c[ax]) / h).floor() as i64 - 1;
            k_hi[ax] = ((hi_s - c[ax]) / h).ceil() as i64 + 1;
        }
        let shape = [
            (k_hi[0] - k_lo[0] + 1) as usize,
            if self.dim == 2 {
                (k_hi[1] - k_lo[1] + 1) as usize
            } else {
                1
            },
        ];
        let origin = [
            c[0] + k_lo[0] as f64 * h,
            if self.dim == 2 {
                c[1] + k_lo[1] as f64 * h
            } else {
                0.0
            },
        ];

        let mut kinds = vec![NodeKind::Exterior; shape[0] * shape[1]];
        for iy in 0..shape[1] {
            for ix in 0..shape[0] {
                let on_edge = ix == 0
                    || ix + 1 == shape[0]
                    || (self.dim == 2 && (iy == 0 || iy + 1 == shape[1]));
                if on_edge {
                    continue;
                }
                let x = origin[0] + ix as f64 * h;
                let y = origin[1] + iy as f64 * h;
                // Preimage under the expansion.
                let px = c[0] + alpha * (x - c[0]);
                let py = c[1] + alpha * (y - c[1]);
                if self.region_contains_strictly(px, py) {
                    kinds[iy * shape[0] + ix] = NodeKind::Interior;
                }
            }
        }
        promote_boundary(&mut kinds, shape);

        let mut d = GridDomain {
            dim: self.dim,
            h,
            shape,
            origin,
            kinds,
            star_center: None,
        };
        if d.interior_count() == 0 {
            return Err(Error::InvalidDomain(
                "scaled domain has no interior node".into(),
            ));
        }
        if d.is_star_shaped_about(c) {
            d.star_center = Some(c);
        }
        d.validate()?;
        Ok(d)
    }

    /// Erode `j` layers of interior nodes, producing the inner approximating
    /// domain on the *same* array (node indices stay aligned, which is what
    /// makes pointwise ratios between eigenfields of nested domains trivial).
    ///
    /// One erosion step keeps an interior node only if all its axis neighbors
    /// are interior. `j = 0` returns an identical copy; eroding the interior
    /// away entirely is an error.
    pub fn shrink_domain(&self, j: usize) -> Result<GridDomain> {
        let mut kinds = self.kinds.clone();
        for _ in 0..j {
            let snapshot = kinds.clone();
            for iy in 0..self.shape[1] {
                for ix in 0..self.shape[0] {
                    let idx = iy * self.shape[0] + ix;
                    if snapshot[idx] != NodeKind::Interior {
                        continue;
                    }
                    let keep = self
                        .neighbor_indices(ix, iy)
                        .into_iter()
                        .flatten()
                        .all(|nb| snapshot[nb] == NodeKind::Interior);
                    if !keep {
                        kinds[idx] = NodeKind::Exterior;
                    }
                }
            }
            // Old boundary nodes are no longer adjacent to the eroded
            // interior; recompute the ring from scratch.
            for k in kinds.iter_mut() {
                if *k == NodeKind::Boundary {
                    *k = NodeKind::Exterior;
                }
            }
            promote_boundary(&mut kinds, self.shape);
            if !kinds.contains(&NodeKind::Interior) {
                return Err(Error::InvalidDomain(format!(
                    "shrinking by {j} layers erodes the interior away"
                )));
            }
        }
        let mut d = GridDomain {
            kinds,
            star_center: None,
            ..self.clone()
        };
        if let Some(c) = self.star_center {
            if d.is_star_shaped_about(c) {
                d.star_center = Some(c);
            }
        }
        d.validate()?;
        Ok(d)
    }

    /// Re-check every structural invariant. Constructors call this; it is
    /// public so long-lived code can assert domains it was handed are sane.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidDomain(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidDomain(format!("spacing must be positive, got {}", self.h)));
        }
        if self.dim == 1 && self.shape[1] != 1 {
            return Err(Error::InvalidDomain("1D domains must have shape[1] == 1".into()));
        }
        if self.kinds.len() != self.shape[0] * self.shape[1] {
            return Err(Error::InvalidDomain("mask length does not match shape".into()));
        }
        if self.interior_count() == 0 {
            return Err(Error::InvalidDomain("domain has no interior node".into()));
        }
        for iy in 0..self.shape[1] {
            for ix in 0..self.shape[0] {
                if self.kinds[iy * self.shape[0] + ix] != NodeKind::Interior {
                    continue;
                }
                // Only the axes that exist in this dimension are required:
                // slots 2 and 3 are always None on an interval.
                for nb in &self.neighbor_indices(ix, iy)[..2 * self.dim] {
                    match nb {
                        Some(n) if self.kinds[*n] != NodeKind::Exterior => {}
                        _ => {
                            return Err(Error::InvalidDomain(format!(
                                "interior node ({ix}, {iy}) is missing a neighbor with values"
                            )))
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Structured text rendering: a key-value header followed by the mask,
    /// one text row per y-line (`I` interior, `B` boundary, `.` exterior).
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("dim = {}\n", self.dim));
        out.push_str(&format!("h = {:.16e}\n", self.h));
        out.push_str(&format!("shape = {} {}\n", self.shape[0], self.shape[1]));
        for iy in 0..self.shape[1] {
            for ix in 0..self.shape[0] {
                out.push(match self.kinds[iy * self.shape[0] + ix] {
                    NodeKind::Interior => 'I',
                    NodeKind::Boundary => 'B',
                    NodeKind::Exterior => '.',
                });
            }
            out.push('\n');
        }
        out
    }

    // ------------------------------------------------------------------
    // Accessors and index helpers
    // ------------------------------------------------------------------

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn star_center(&self) -> Option<[f64; 2]> {
        self.star_center
    }

    /// Total number of nodes in the bounding array (all kinds).
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// Cell volume `h^dim` used by every quadrature in this crate.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.shape[0] && iy < self.shape[1]);
        iy * self.shape[0] + ix
    }

    #[inline]
    pub fn ixy(&self, idx: usize) -> (usize, usize) {
        (idx % self.shape[0], idx / self.shape[0])
    }

    #[inline]
    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kinds[idx]
    }

    #[inline]
    pub fn is_interior(&self, idx: usize) -> bool {
        self.kinds[idx] == NodeKind::Interior
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        self.kinds[idx] == NodeKind::Boundary
    }

    /// Coordinates of a node by flat index.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (ix, iy) = self.ixy(idx);
        [
            self.origin[0] + ix as f64 * self.h,
            self.origin[1] + iy as f64 * self.h,
        ]
    }

    /// Flat indices of the (up to `2 dim`) axis neighbors, `None` where the
    /// array ends. Order: -x, +x, then -y, +y in 2D.
    pub fn neighbor_indices(&self, ix: usize, iy: usize) -> [Option<usize>; 4] {
        let mut out = [None; 4];
        if ix > 0 {
            out[0] = Some(self.idx(ix - 1, iy));
        }
        if ix + 1 < self.shape[0] {
            out[1] = Some(self.idx(ix + 1, iy));
        }
        if self.dim == 2 {
            if iy > 0 {
                out[2] = Some(self.idx(ix, iy - 1));
            }
            if iy + 1 < self.shape[1] {
                out[3] = Some(self.idx(ix, iy + 1));
            }
        }
        out
    }

    /// Flat indices of all interior nodes, in row-major order. The fixed
    /// order matters: summations in this crate accumulate in it, so results
    /// are reproducible run to run.
    pub fn interior_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == NodeKind::Interior)
            .map(|(i, _)| i)
    }

    pub fn interior_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == NodeKind::Interior).count()
    }

    pub fn boundary_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == NodeKind::Boundary).count()
    }

    /// Longest distance between two domain nodes (interior or boundary);
    /// used to bound information-propagation times in tests.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.node_bbox();
        let mut d2 = 0.0f64;
        for ax in 0..self.dim {
            d2 += (hi[ax] - lo[ax]).powi(2);
        }
        d2.sqrt()
    }

    /// True when two domains share the same array geometry and masks, which
    /// is the precondition for comparing fields node by node.
    pub fn same_layout(&self, other: &GridDomain) -> bool {
        self.dim == other.dim
            && self.shape == other.shape
            && (self.h - other.h).abs() <= 1e-12 * self.h.abs()
            && (self.origin[0] - other.origin[0]).abs() <= 1e-9 * self.h
            && (self.origin[1] - other.origin[1]).abs() <= 1e-9 * self.h
            && self.kinds == other.kinds
    }

    // ------------------------------------------------------------------
    // Internals
    // ------------------------------------------------------------------

    /// Bounding box of nodes that carry values (interior or boundary).
    fn node_bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for (idx, k) in self.kinds.iter().enumerate() {
            if *k == NodeKind::Exterior {
                continue;
            }
            let c = self.coords(idx);
            for ax in 0..2 {
                lo[ax] = lo[ax].min(c[ax]);
                hi[ax] = hi[ax].max(c[ax]);
            }
        }
        (lo, hi)
    }

    /// Whether the point lies strictly inside the continuum region the mask
    /// approximates: on a node, that node must be interior; between nodes,
    /// every enclosing cell corner must carry values and at least one must
    /// be interior.
    fn region_contains_strictly(&self, x: f64, y: f64) -> bool {
        let fx = (x - self.origin[0]) / self.h;
        let fy = if self.dim == 2 {
            (y - self.origin[1]) / self.h
        } else {
            0.0
        };
        let snap = 1e-9;
        let on_node =
            |f: f64| (f - f.round()).abs() <= snap && f.round() >= 0.0;
        if fx < -snap || fy < -snap {
            return false;
        }
        let corners_x: Vec<usize> = if on_node(fx) {
            vec![fx.round() as usize]
        } else if fx > 0.0 {
            vec![fx.floor() as usize, fx.ceil() as usize]
        } else {
            return false;
        };
        let corners_y: Vec<usize> = if self.dim == 1 {
            vec![0]
        } else if on_node(fy) {
            vec![fy.round() as usize]
        } else if fy > 0.0 {
            vec![fy.floor() as usize, fy.ceil() as usize]
        } else {
            return false;
        };
        let mut any_interior = false;
        for &cy in &corners_y {
            for &cx in &corners_x {
                if cx >= self.shape[0] || cy >= self.shape[1] {
                    return false;
                }
                match self.kinds[self.idx(cx, cy)] {
                    NodeKind::Exterior => return false,
                    NodeKind::Interior => any_interior = true,
                    NodeKind::Boundary => {}
                }
            }
        }
        // A point pinned exactly on boundary nodes only is *on* the edge of
        // the region, not strictly inside it.
        any_interior
    }

    /// Discrete star-shapedness: the segment from `c` to every interior node,
    /// sampled every `h / 2`, must stay inside the region (interior or
    /// boundary nodes around every sample).
    fn is_star_shaped_about(&self, c: [f64; 2]) -> bool {
        for idx in 0..self.kinds.len() {
            if self.kinds[idx] != NodeKind::Interior {
                continue;
            }
            let p = self.coords(idx);
            let dist = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
            let steps = (dist / (self.h / 2.0)).ceil().max(1.0) as usize;
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                let x = c[0] + t * (p[0] - c[0]);
                let y = c[1] + t * (p[1] - c[1]);
                if !self.region_contains_loosely(x, y) {
                    return false;
                }
            }
        }
        true
    }

    /// Like `region_contains_strictly` but accepting boundary membership
    /// (segments are allowed to graze the staircase edge).
    fn region_contains_loosely(&self, x: f64, y: f64) -> bool {
        let fx = (x - self.origin[0]) / self.h;
        let fy = if self.dim == 2 {
            (y - self.origin[1]) / self.h
        } else {
            0.0
        };
        if fx < -1e-9 || fy < -1e-9 {
            return false;
        }
        // Nearest node carrying values is enough for the loose test.
        let cx = fx.round().clamp(0.0, (self.shape[0] - 1) as f64) as usize;
        let cy = fy.round().clamp(0.0, (self.shape[1] - 1) as f64) as usize;
        if (fx - cx as f64).abs() > 0.5 + 1e-9 || (fy - cy as f64).abs() > 0.5 + 1e-9 {
            return false;
        }
        self.kinds[self.idx(cx, cy)] != NodeKind::Exterior
    }
}

/// Promote exterior nodes adjacent to an interior node into boundary nodes.
/// Also demotes stranded interior nodes on the array edge beforehand is not
/// needed here: callers guarantee interior nodes are off-edge.
fn promote_boundary(kinds: &mut [NodeKind], shape: [usize; 2]) {
    let idx = |ix: usize, iy: usize| iy * shape[0] + ix;
    let mut ring = Vec::new();
    for iy in 0..shape[1] {
        for ix in 0..shape[0] {
            if kinds[idx(ix, iy)] != NodeKind::Interior {
                continue;
            }
            let mut push = |ok: bool, jx: usize, jy: usize| {
                if ok && kinds[idx(jx, jy)] == NodeKind::Exterior {
                    ring.push(idx(jx, jy));
                }
            };
            push(ix > 0, ix.wrapping_sub(1), iy);
            push(ix + 1 < shape[0], ix + 1, iy);
            if shape[1] > 1 {
                push(iy > 0, ix, iy.wrapping_sub(1));
                push(iy + 1 < shape[1], ix, iy + 1);
            }
        }
    }
    for r in ring {
        kinds[r] = NodeKind::Boundary;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_layout_matches_hand_count() {
        let d = GridDomain::build_interval(0.0, 1.0, 8).unwrap();
        assert_eq!(d.dim(), 1);
        assert_eq!(d.shape(), [9, 1]);
        assert!((d.h() - 0.125).abs() < 1e-15);
        assert_eq!(d.interior_count(), 7);
        assert_eq!(d.boundary_count(), 2);
        assert!(d.is_boundary(0) && d.is_boundary(8));
        let c = d.star_center().unwrap();
        assert!((c[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interval_rejects_degenerate_input() {
        assert!(GridDomain::build_interval(1.0, 0.0, 8).is_err());
        assert!(GridDomain::build_interval(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn masked_unit_square_counts() {
        let d = GridDomain::build_masked(|_, _| true, [0.0, 1.0, 0.0, 1.0], 32).unwrap();
        assert_eq!(d.shape(), [33, 33]);
        // Indicator nodes on the array edge are demoted, leaving the familiar
        // (n - 1)^2 interior block and its ring (corners excluded: they touch
        // no interior node).
        assert_eq!(d.interior_count(), 31 * 31);
        assert_eq!(d.boundary_count(), 4 * 31);
        assert!(d.star_center().is_some());
        d.validate().unwrap();
    }

    #[test]
    fn masked_disk_is_a_staircase_within_h_of_the_circle() {
        let r = 1.0;
        let d = GridDomain::build_masked(
            |x, y| x * x + y * y < r * r,
            [-1.1, 1.1, -1.1, 1.1],
            64,
        )
        .unwrap();
        d.validate().unwrap();
        // Every interior node is strictly inside the disk; every boundary
        // node is within h of the circle or outside by less than one cell.
        for idx in 0..d.len() {
            let [x, y] = d.coords(idx);
            let rho = (x * x + y * y).sqrt();
            match d.kind(idx) {
                NodeKind::Interior => assert!(rho < r),
                NodeKind::Boundary => assert!(rho < r + d.h() * 1.5,
                    "boundary node at rho = {rho} strays from the circle"),
                NodeKind::Exterior => {}
            }
        }
        assert!(d.star_center().is_some(), "a disk is star-shaped about its center");
    }

    #[test]
    fn masked_empty_interior_is_an_error() {
        let e = GridDomain::build_masked(|_, _| false, [0.0, 1.0, 0.0, 1.0], 8);
        assert!(e.is_err());
    }

    #[test]
    fn scale_identity_returns_same_domain() {
        let d = GridDomain::build_interval(0.0, 1.0, 8).unwrap();
        let s = d.scale_domain(1.0).unwrap();
        assert!(d.same_layout(&s));
    }

    #[test]
    fn scale_half_doubles_the_interval() {
        let d = GridDomain::build_interval(0.0, 1.0, 8).unwrap();
        let s = d.scale_domain(0.5).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.h() - d.h()).abs() < 1e-15, "spacing is preserved");
        // (0,1) about center 0.5 at alpha = 0.5 maps to (-0.5, 1.5):
        // 17 nodes, 15 interior.
        assert_eq!(s.interior_count(), 15);
        let (lo, hi) = {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for idx in 0..s.len() {
                if s.kind(idx) == NodeKind::Boundary {
                    lo = lo.min(s.coords(idx)[0]);
                    hi = hi.max(s.coords(idx)[0]);
                }
            }
            (lo, hi)
        };
        assert!((lo + 0.5).abs() < 1e-12 && (hi - 1.5).abs() < 1e-12,
            "expected boundary at -0.5 and 1.5, got {lo} and {hi}");
    }

    #[test]
    fn scale_rejects_out_of_range_alpha() {
        let d = GridDomain::build_interval(0.0, 1.0, 8).unwrap();
        assert!(d.scale_domain(0.0).is_err());
        assert!(d.scale_domain(1.5).is_err());
        assert!(d.scale_domain(-0.5).is_err());
    }

    #[test]
    fn shrink_peels_one_layer_of_the_interval() {
        let d = GridDomain::build_interval(0.0, 1.0, 8).unwrap();
        let s = d.shrink_domain(1).unwrap();
        assert_eq!(s.shape(), d.shape(), "erosion stays on the same array");
        assert_eq!(s.interior_count(), 5);
        assert!(s.is_boundary(1) && s.is_boundary(7));
        // Remaining domain spans 0.125 .. 0.875.
        let width: f64 = 0.875 - 0.125;
        assert!((width - 0.75).abs() < 1e-15);
        // j = 0 is the identity.
        assert!(d.shrink_domain(0).unwrap().same_layout(&d));
    }

    #[test]
    fn shrink_to_nothing_is_an_error() {
        let d = GridDomain::build_interval(0.0, 1.0, 8).unwrap();
        assert!(d.shrink_domain(4).is_err());
    }

    #[test]
    fn snapshot_round_trips_the_mask_by_eye() {
        let d = GridDomain::build_interval(0.0, 1.0, 4).unwrap();
        let snap = d.snapshot();
        let lines: Vec<&str> = snap.lines().collect();
        assert_eq!(lines[0], "dim = 1");
        assert!(lines[1].starts_with("h = 2.5"));
        assert_eq!(lines[2], "shape = 5 1");
        assert_eq!(lines[3], "BIIIB");
    }

    #[test]
    fn masks_partition_every_node() {
        let d = GridDomain::build_masked(
            |x, y| x * x + y * y < 1.0,
            [-1.2, 1.2, -1.2, 1.2],
            24,
        )
        .unwrap();
        // NodeKind is a single enum per node, so disjointness is structural;
        // what needs checking is that counts add up and the invariant holds.
        let total = d.len();
        let ext = total - d.interior_count() - d.boundary_count();
        assert_eq!(d.interior_count() + d.boundary_count() + ext, total);
        d.validate().unwrap();
    }
}
