//! Spatial primitives: Poisson point process sampling inside a square window,
//! nearest-neighbour queries and nearest-BS association.
//!
//! Distance ties are always broken towards the lower point index so that the
//! brute-force scans and the grid-accelerated queries agree exactly.

use rand::Rng;
use rand_distr::{Distribution, Poisson, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Square observation window `[-half_width, half_width]²` centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    half_width: f64,
}

impl Window {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::param(
                "half_width",
                format!("must be finite and positive, got {half_width}"),
            ));
        }
        Ok(Window { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn area(&self) -> f64 {
        self.side() * self.side()
    }

    pub fn center(&self) -> Point {
        Point::ORIGIN
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x.abs() <= self.half_width && p.y.abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    positions: Vec<Point>,
}

impl PointSet {
    pub fn new(positions: Vec<Point>) -> Self {
        PointSet { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn get(&self, index: usize) -> Option<&Point> {
        self.positions.get(index)
    }

    pub fn push(&mut self, p: Point) {
        self.positions.push(p);
    }

    pub fn insert(&mut self, index: usize, p: Point) {
        self.positions.insert(index, p);
    }
}

impl std::ops::Index<usize> for PointSet {
    type Output = Point;

    fn index(&self, index: usize) -> &Point {
        &self.positions[index]
    }
}

/// Samples a homogeneous PPP of the given intensity (points per m²) on `window`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window: &Window, rng: &mut R) -> Result<PointSet> {
    if !(density.is_finite() && density >= 0.0) {
        return Err(Error::param(
            "density",
            format!("must be finite and non-negative, got {density}"),
        ));
    }
    let mean = density * window.area();
    if mean == 0.0 {
        return Ok(PointSet::default());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::param("density", e.to_string()))?
        .sample(rng) as usize;
    let h = window.half_width();
    let side = Uniform::new(-h, h).map_err(|e| Error::param("window", e.to_string()))?;
    let positions = (0..count)
        .map(|_| Point::new(side.sample(rng), side.sample(rng)))
        .collect();
    Ok(PointSet { positions })
}

/// The two closest base stations to a location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestTwo {
    pub first: usize,
    pub r1: f64,
    pub second: usize,
    pub r2: f64,
}

/// Running "best two" under the `(distance², index)` order.
#[derive(Clone, Copy)]
struct BestTwo {
    best: [(f64, usize); 2],
    filled: usize,
}

impl BestTwo {
    fn new() -> Self {
        BestTwo {
            best: [(f64::INFINITY, usize::MAX); 2],
            filled: 0,
        }
    }

    #[inline]
    fn offer(&mut self, d2: f64, index: usize) {
        let cand = (d2, index);
        if lex_less(cand, self.best[0]) {
            self.best[1] = self.best[0];
            self.best[0] = cand;
        } else if lex_less(cand, self.best[1]) {
            self.best[1] = cand;
        }
        self.filled = (self.filled + 1).min(2);
    }

    fn into_result(self) -> Option<NearestTwo> {
        (self.filled == 2).then(|| NearestTwo {
            first: self.best[0].1,
            r1: self.best[0].0.sqrt(),
            second: self.best[1].1,
            r2: self.best[1].0.sqrt(),
        })
    }
}

/// Squared distance from `p` to the farthest point of `(x0, x1, y0, y1)`.
#[inline]
fn max_dist_sq(r: (f64, f64, f64, f64), p: &Point) -> f64 {
    let dx = (p.x - r.0).abs().max((p.x - r.1).abs());
    let dy = (p.y - r.2).abs().max((p.y - r.3).abs());
    dx * dx + dy * dy
}

/// Squared distance from `p` to the closest point of `(x0, x1, y0, y1)`.
#[inline]
fn min_dist_sq(r: (f64, f64, f64, f64), p: &Point) -> f64 {
    let dx = (r.0 - p.x).max(p.x - r.1).max(0.0);
    let dy = (r.2 - p.y).max(p.y - r.3).max(0.0);
    dx * dx + dy * dy
}

#[inline]
fn lex_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Brute-force nearest and second-nearest base station to `origin`.
pub fn nearest_two(origin: &Point, bss: &PointSet) -> Result<NearestTwo> {
    let mut best = BestTwo::new();
    for (i, p) in bss.positions.iter().enumerate() {
        best.offer(origin.distance_sq(p), i);
    }
    best.into_result().ok_or_else(|| {
        Error::DegenerateScenario(format!(
            "need at least 2 base stations, found {}",
            bss.len()
        ))
    })
}

/// Brute-force nearest base station.
pub fn nearest(origin: &Point, bss: &PointSet) -> Option<(usize, f64)> {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, p) in bss.positions.iter().enumerate() {
        let cand = (origin.distance_sq(p), i);
        if lex_less(cand, best) {
            best = cand;
        }
    }
    (best.1 != usize::MAX).then(|| (best.1, best.0.sqrt()))
}

/// Uniform bucket grid over a point set, used to answer nearest-neighbour
/// queries in roughly constant time for homogeneous deployments.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point>,
    min: f64,
    cell: f64,
    cells_per_side: usize,
    // CSR layout: points of cell c are order[start[c]..start[c + 1]], ascending index.
    start: Vec<u32>,
    order: Vec<u32>,
}

impl SpatialIndex {
    /// Builds an index sized for about one point per cell.
    pub fn new(set: &PointSet) -> Self {
        Self::covering(set, &[])
    }

    /// Like [`SpatialIndex::new`], with the grid stretched to also cover
    /// `extent`, so that queries inside it are never clamped to edge cells.
    pub fn covering(set: &PointSet, extent: &[Point]) -> Self {
        let points = set.positions().to_vec();
        let (mut min, mut max) = (0.0f64, 0.0f64);
        for p in points.iter().chain(extent) {
            min = min.min(p.x).min(p.y);
            max = max.max(p.x).max(p.y);
        }
        let span = (max - min).max(1e-9);
        let cells_per_side = ((points.len() as f64).sqrt().ceil() as usize).clamp(1, 4096);
        let cell = span / cells_per_side as f64 * (1.0 + 1e-12);

        let n_cells = cells_per_side * cells_per_side;
        let n_points = points.len();
        let mut index = SpatialIndex {
            points,
            min,
            cell,
            cells_per_side,
            start: vec![0; n_cells + 1],
            order: vec![0; n_points],
        };
        let cell_of: Vec<usize> = index.points.iter().map(|p| index.cell_id(p)).collect();
        for &c in &cell_of {
            index.start[c + 1] += 1;
        }
        for c in 0..n_cells {
            index.start[c + 1] += index.start[c];
        }
        let mut fill = index.start.clone();
        for (i, &c) in cell_of.iter().enumerate() {
            index.order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        index
    }

    #[inline]
    fn coord(&self, v: f64) -> usize {
        let c = (v - self.min) / self.cell;
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(self.cells_per_side - 1)
        }
    }

    #[inline]
    fn cell_id(&self, p: &Point) -> usize {
        self.coord(p.y) * self.cells_per_side + self.coord(p.x)
    }

    #[inline]
    fn scan_cell(&self, cx: usize, cy: usize, origin: &Point, best: &mut BestTwo, want_two: bool) {
        let c = cy * self.cells_per_side + cx;
        for &i in &self.order[self.start[c] as usize..self.start[c + 1] as usize] {
            let d2 = origin.distance_sq(&self.points[i as usize]);
            if want_two {
                best.offer(d2, i as usize);
            } else if lex_less((d2, i as usize), best.best[0]) {
                best.best[0] = (d2, i as usize);
                best.filled = 1;
            }
        }
    }

    fn search(&self, origin: &Point, want_two: bool) -> BestTwo {
        let mut best = BestTwo::new();
        let n = self.cells_per_side as isize;
        let cx = self.coord(origin.x) as isize;
        let cy = self.coord(origin.y) as isize;
        let slot = if want_two { 1 } else { 0 };
        // Distance from the origin to the nearest cell boundary; points in
        // ring d + 1 are at least d·cell + margin away.
        let margin = {
            let lx = origin.x - (self.min + cx as f64 * self.cell);
            let ly = origin.y - (self.min + cy as f64 * self.cell);
            lx.min(self.cell - lx).min(ly).min(self.cell - ly).max(0.0)
        };
        for ring in 0..=n {
            if ring == 0 {
                self.scan_cell(cx as usize, cy as usize, origin, &mut best, want_two);
            } else {
                let (x0, x1, y0, y1) = (cx - ring, cx + ring, cy - ring, cy + ring);
                if x0 < 0 && y0 < 0 && x1 >= n && y1 >= n {
                    break;
                }
                for x in x0.max(0)..=x1.min(n - 1) {
                    if y0 >= 0 {
                        self.scan_cell(x as usize, y0 as usize, origin, &mut best, want_two);
                    }
                    if y1 < n {
                        self.scan_cell(x as usize, y1 as usize, origin, &mut best, want_two);
                    }
                }
                for y in (y0 + 1).max(0)..=(y1 - 1).min(n - 1) {
                    if x0 >= 0 {
                        self.scan_cell(x0 as usize, y as usize, origin, &mut best, want_two);
                    }
                    if x1 < n {
                        self.scan_cell(x1 as usize, y as usize, origin, &mut best, want_two);
                    }
                }
            }
            let bound = ring as f64 * self.cell + margin;
            if best.best[slot].0 < bound * bound {
                break;
            }
        }
        best
    }

    fn cell_rect(&self, cx: usize, cy: usize) -> (f64, f64, f64, f64) {
        let x0 = self.min + cx as f64 * self.cell;
        let y0 = self.min + cy as f64 * self.cell;
        (x0, x0 + self.cell, y0, y0 + self.cell)
    }

    /// Nearest point for every query, ties to the lower index.
    ///
    /// Queries are bucketed by cell. Each occupied cell gathers once the
    /// points that can be nearest to anything inside it, narrows them against
    /// the bounding box of its queries, and its queries scan only the
    /// survivors.
    pub fn nearest_batch(&self, queries: &[Point]) -> Vec<u32> {
        let n_cells = self.cells_per_side * self.cells_per_side;
        let cell_of: Vec<usize> = queries.iter().map(|q| self.cell_id(q)).collect();
        let mut start = vec![0u32; n_cells + 1];
        for &c in &cell_of {
            start[c + 1] += 1;
        }
        for c in 0..n_cells {
            start[c + 1] += start[c];
        }
        let mut fill = start.clone();
        let mut order = vec![0u32; queries.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }

        let mut out = vec![0u32; queries.len()];
        let mut near_cell: Vec<(Point, u32)> = Vec::new();
        let mut candidates: Vec<(Point, u32)> = Vec::new();
        for c in 0..n_cells {
            let members = &order[start[c] as usize..start[c + 1] as usize];
            if members.is_empty() {
                continue;
            }
            let (cx, cy) = (c % self.cells_per_side, c / self.cells_per_side);
            let rect = self.cell_rect(cx, cy);
            let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for &q in members {
                let p = queries[q as usize];
                x0 = x0.min(p.x);
                x1 = x1.max(p.x);
                y0 = y0.min(p.y);
                y1 = y1.max(p.y);
            }
            if !(x0 >= rect.0 && x1 <= rect.1 && y0 >= rect.2 && y1 <= rect.3) {
                // Clamped queries outside the indexed extent.
                for &q in members {
                    out[q as usize] = self.search(&queries[q as usize], false).best[0].1 as u32;
                }
                continue;
            }
            self.gather_near(cx, cy, rect, &mut near_cell);
            let bbox = (x0, x1, y0, y1);
            let upper = near_cell.iter().map(|(p, _)| max_dist_sq(bbox, p)).fold(f64::INFINITY, f64::min);
            candidates.clear();
            candidates.extend(
                near_cell
                    .iter()
                    .filter(|(p, _)| min_dist_sq(bbox, p) <= upper * (1.0 + 1e-9)),
            );
            if let [(_, only)] = candidates[..] {
                for &q in members {
                    out[q as usize] = only;
                }
                continue;
            }
            for &q in members {
                let origin = queries[q as usize];
                let mut best = (f64::INFINITY, u32::MAX);
                for &(p, i) in &candidates {
                    let d2 = origin.distance_sq(&p);
                    if d2 < best.0 || (d2 == best.0 && i < best.1) {
                        best = (d2, i);
                    }
                }
                out[q as usize] = best.1;
            }
        }
        out
    }

    /// Every indexed point that can be the nearest one to some location in
    /// `rect`, the rectangle of cell `(cx, cy)`.
    fn gather_near(&self, cx: usize, cy: usize, rect: (f64, f64, f64, f64), out: &mut Vec<(Point, u32)>) {
        out.clear();
        let n = self.cells_per_side as isize;
        let (cx, cy) = (cx as isize, cy as isize);
        let mut upper = f64::INFINITY;
        self.take_row(cy, cx, cx, rect, &mut upper, out);
        for ring in 1..=n {
            // Anything beyond the previous ring is at least (ring − 1)·cell away.
            let reach = (ring - 1) as f64 * self.cell;
            if reach * reach > upper * (1.0 + 1e-9) {
                break;
            }
            let (x0, x1, y0, y1) = (cx - ring, cx + ring, cy - ring, cy + ring);
            if x0 < 0 && y0 < 0 && x1 >= n && y1 >= n {
                break;
            }
            self.take_row(y0, x0, x1, rect, &mut upper, out);
            self.take_row(y1, x0, x1, rect, &mut upper, out);
            for y in (y0 + 1).max(0)..y1.min(n) {
                self.take_row(y, x0, x0, rect, &mut upper, out);
                self.take_row(y, x1, x1, rect, &mut upper, out);
            }
        }
        out.retain(|(p, _)| min_dist_sq(rect, p) <= upper * (1.0 + 1e-9));
    }

    /// Appends the points of cells `x0..=x1` of row `y`, clipped to the grid.
    /// Cells of one row are contiguous in `order`.
    #[inline]
    fn take_row(
        &self,
        y: isize,
        x0: isize,
        x1: isize,
        rect: (f64, f64, f64, f64),
        upper: &mut f64,
        out: &mut Vec<(Point, u32)>,
    ) {
        let n = self.cells_per_side as isize;
        let (x0, x1) = (x0.max(0), x1.min(n - 1));
        if y < 0 || y >= n || x0 > x1 {
            return;
        }
        let row = y as usize * self.cells_per_side;
        let span = self.start[row + x0 as usize] as usize..self.start[row + x1 as usize + 1] as usize;
        for &i in &self.order[span] {
            let p = self.points[i as usize];
            *upper = upper.min(max_dist_sq(rect, &p));
            out.push((p, i));
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest point to `origin`, `None` when the set is empty.
    pub fn nearest(&self, origin: &Point) -> Option<(usize, f64)> {
        let best = self.search(origin, false);
        (best.filled > 0).then(|| (best.best[0].1, best.best[0].0.sqrt()))
    }

    /// Nearest and second-nearest points to `origin`.
    pub fn nearest_two(&self, origin: &Point) -> Result<NearestTwo> {
        self.search(origin, true).into_result().ok_or_else(|| {
            Error::DegenerateScenario(format!(
                "need at least 2 base stations, found {}",
                self.points.len()
            ))
        })
    }
}

/// Nearest-BS association of a user population.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    serving: Vec<u32>,
    load: Vec<u32>,
    member_start: Vec<u32>,
    members: Vec<u32>,
}

impl Association {
    fn from_serving(serving: Vec<u32>, n_bss: usize) -> Self {
        let mut member_start = vec![0u32; n_bss + 1];
        for &b in &serving {
            member_start[b as usize + 1] += 1;
        }
        let load: Vec<u32> = member_start[1..].to_vec();
        for b in 0..n_bss {
            member_start[b + 1] += member_start[b];
        }
        let mut fill = member_start.clone();
        let mut members = vec![0u32; serving.len()];
        for (u, &b) in serving.iter().enumerate() {
            members[fill[b as usize] as usize] = u as u32;
            fill[b as usize] += 1;
        }
        Association {
            serving,
            load,
            member_start,
            members,
        }
    }

    /// Serving BS of user `user`.
    pub fn serving(&self, user: usize) -> usize {
        self.serving[user] as usize
    }

    /// Number of users `N_u` associated with BS `bs`.
    pub fn load(&self, bs: usize) -> u32 {
        self.load[bs]
    }

    pub fn loads(&self) -> &[u32] {
        &self.load
    }

    /// Users served by `bs`, in ascending user index.
    pub fn users_of(&self, bs: usize) -> &[u32] {
        &self.members[self.member_start[bs] as usize..self.member_start[bs + 1] as usize]
    }

    pub fn n_users(&self) -> usize {
        self.serving.len()
    }
}

/// Associates every user with its nearest base station.
pub fn associate(users: &PointSet, bss: &PointSet) -> Result<Association> {
    if bss.is_empty() {
        return Err(Error::DegenerateScenario(
            "cannot associate users without base stations".into(),
        ));
    }
    let index = SpatialIndex::new(bss);
    associate_with(users, &index)
}

pub(crate) fn associate_with(users: &PointSet, index: &SpatialIndex) -> Result<Association> {
    if index.is_empty() {
        return Err(Error::DegenerateScenario(
            "cannot associate users without base stations".into(),
        ));
    }
    let serving = index.nearest_batch(users.positions());
    Ok(Association::from_serving(serving, index.points.len()))
}

/// All-pairs reference association.
pub fn associate_brute_force(users: &PointSet, bss: &PointSet) -> Result<Association> {
    let serving = users
        .positions()
        .iter()
        .map(|u| {
            nearest(u, bss).map(|(b, _)| b as u32).ok_or_else(|| {
                Error::DegenerateScenario("cannot associate users without base stations".into())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Association::from_serving(serving, bss.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(points: &[(f64, f64)]) -> PointSet {
        PointSet::new(points.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    #[test]
    fn window_rejects_non_positive_width() {
        assert!(Window::new(0.0).is_err());
        assert!(Window::new(-1.0).is_err());
        assert!(Window::new(f64::NAN).is_err());
        assert_eq!(Window::new(100.0).unwrap().area(), 40_000.0);
    }

    #[test]
    fn zero_density_gives_empty_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Window::new(100.0).unwrap();
        assert!(sample_ppp(0.0, &w, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn negative_density_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Window::new(10.0).unwrap();
        assert!(matches!(
            sample_ppp(-1e-3, &w, &mut rng),
            Err(Error::Parameter { name: "density", .. })
        ));
    }

    #[test]
    fn samples_stay_inside_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = Window::new(50.0).unwrap();
        let s = sample_ppp(0.05, &w, &mut rng).unwrap();
        assert!(!s.is_empty());
        assert!(s.positions().iter().all(|p| w.contains(p)));
    }

    #[test]
    fn ppp_count_mean_and_variance() {
        // λ·area = 1e-2 · 200² = 400; Poisson variance equals the mean.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = Window::new(100.0).unwrap();
        let n = 10_000;
        let counts: Vec<f64> = (0..n)
            .map(|_| sample_ppp(1e-2, &w, &mut rng).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (400.0 / n as f64).sqrt();
        assert!((mean - 400.0).abs() < 3.0 * se, "mean {mean}");
        assert!((var / 400.0 - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn nearest_two_simple() {
        let bss = set(&[(3.0, 0.0), (0.0, 4.0)]);
        let n = nearest_two(&Point::ORIGIN, &bss).unwrap();
        assert_eq!((n.first, n.second), (0, 1));
        assert_eq!((n.r1, n.r2), (3.0, 4.0));
    }

    #[test]
    fn nearest_two_tie_prefers_lower_index() {
        let bss = set(&[(5.0, 0.0), (0.0, 5.0)]);
        let n = nearest_two(&Point::ORIGIN, &bss).unwrap();
        assert_eq!((n.first, n.second), (0, 1));
        assert_eq!(n.r1, 5.0);
        assert_eq!(n.r2, 5.0);
        let swapped = set(&[(0.0, 5.0), (5.0, 0.0)]);
        let n = nearest_two(&Point::ORIGIN, &swapped).unwrap();
        assert_eq!((n.first, n.second), (0, 1));
    }

    #[test]
    fn nearest_two_needs_two_points() {
        let bss = set(&[(1.0, 1.0)]);
        assert!(matches!(
            nearest_two(&Point::ORIGIN, &bss),
            Err(Error::DegenerateScenario(_))
        ));
        let index = SpatialIndex::new(&bss);
        assert!(index.nearest_two(&Point::ORIGIN).is_err());
        assert_eq!(index.nearest(&Point::ORIGIN).unwrap().0, 0);
    }

    #[test]
    fn single_user_single_bs() {
        let a = associate(&set(&[(1.0, 2.0)]), &set(&[(-3.0, 7.0)])).unwrap();
        assert_eq!(a.serving(0), 0);
        assert_eq!(a.load(0), 1);
        assert_eq!(a.users_of(0), &[0]);
    }

    #[test]
    fn equidistant_user_goes_to_lower_index() {
        let a = associate(&set(&[(0.0, 0.0)]), &set(&[(2.0, 0.0), (-2.0, 0.0)])).unwrap();
        assert_eq!(a.serving(0), 0);
        assert_eq!(a.loads(), &[1, 0]);
    }

    #[test]
    fn empty_bs_set_is_degenerate() {
        assert!(matches!(
            associate(&set(&[(0.0, 0.0)]), &PointSet::default()),
            Err(Error::DegenerateScenario(_))
        ));
    }

    #[test]
    fn grid_association_matches_brute_force() {
        let w = Window::new(100.0).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bss = sample_ppp(1e-2, &w, &mut rng).unwrap();
            let users = sample_ppp(0.1, &w, &mut rng).unwrap();
            let fast = associate(&users, &bss).unwrap();
            let slow = associate_brute_force(&users, &bss).unwrap();
            assert_eq!(fast, slow);
            assert_eq!(fast.loads().iter().map(|&l| l as usize).sum::<usize>(), users.len());
            let index = SpatialIndex::new(&bss);
            for u in users.positions().iter().take(200) {
                assert_eq!(index.nearest_two(u).unwrap(), nearest_two(u, &bss).unwrap());
            }
        }
    }

    #[test]
    fn grid_handles_lattice_ties() {
        // Integer lattice produces many exact distance ties.
        let mut pts = Vec::new();
        for i in -5..=5 {
            for j in -5..=5 {
                pts.push((i as f64 * 4.0, j as f64 * 4.0));
            }
        }
        let bss = set(&pts);
        let index = SpatialIndex::new(&bss);
        for i in -10..=10 {
            for j in -10..=10 {
                let q = Point::new(i as f64 * 2.0, j as f64 * 2.0);
                assert_eq!(index.nearest_two(&q).unwrap(), nearest_two(&q, &bss).unwrap());
                assert_eq!(index.nearest(&q), nearest(&q, &bss));
            }
        }
    }

    proptest! {
        #[test]
        fn serving_bs_is_closest(seed in any::<u64>(), users in 1usize..60, bss in 1usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gen = |rng: &mut ChaCha8Rng, n| PointSet::new(
                (0..n).map(|_| Point::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0))).collect());
            let u = gen(&mut rng, users);
            let b = gen(&mut rng, bss);
            let a = associate(&u, &b).unwrap();
            for (i, p) in u.positions().iter().enumerate() {
                let d = p.distance(&b[a.serving(i)]);
                prop_assert!(b.positions().iter().all(|q| d <= p.distance(q)));
            }
            prop_assert_eq!(a.loads().iter().sum::<u32>() as usize, users);
        }

        #[test]
        fn nearest_two_is_permutation_invariant(seed in any::<u64>(), n in 2usize..30, rot in 0usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Point> = (0..n)
                .map(|_| Point::new(rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0)))
                .collect();
            let mut permuted = pts.clone();
            permuted.rotate_left(rot % n);
            let a = nearest_two(&Point::ORIGIN, &PointSet::new(pts.clone())).unwrap();
            let b = nearest_two(&Point::ORIGIN, &PointSet::new(permuted.clone())).unwrap();
            prop_assert_eq!(a.r1, b.r1);
            prop_assert_eq!(a.r2, b.r2);
            prop_assert_eq!(pts[a.first], permuted[b.first]);
            prop_assert!(a.r1 <= a.r2 && a.first != a.second);
        }
    }
}
