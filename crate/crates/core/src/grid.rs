//! Sample grids over open intervals, clustered toward singular endpoints.

use crate::feller::Domain;

/// How a scan grid treats the ends of the domain.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct GridPolicy {
    /// Closest point to a finite endpoint, relative to the span (or 1 when unbounded).
    pub endpoint_offset: f64,
    /// Where an infinite endpoint is cut off.
    pub infinite_cutoff: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { endpoint_offset: 1e-6, infinite_cutoff: 1e3 }
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` geometrically spaced points from `a` to `b` inclusive; both positive.
pub fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    uniform(la, lb, n).into_iter().map(f64::exp).collect()
}

/// Scan grid with geometric clustering at finite endpoints, geometric growth
/// toward infinite ones and a uniform interior on bounded intervals.
pub fn scan_grid(dom: &Domain, n: usize, policy: &GridPolicy) -> Vec<f64> {
    let n = n.max(8);
    let (l, r) = (dom.l, dom.r);
    let cut = policy.infinite_cutoff;
    let mut pts = Vec::with_capacity(n);
    match (l.is_finite(), r.is_finite()) {
        (true, true) => {
            let span = r - l;
            let delta = policy.endpoint_offset * span;
            let quarter = 0.25 * span;
            let side = n / 4;
            let mut mid = n - 2 * side;
            if mid.is_multiple_of(2) {
                mid -= 1;
            }
            let cluster = geometric(delta, quarter, side + 1);
            for &t in &cluster[..side] {
                pts.push(l + t);
                pts.push(r - t);
            }
            pts.extend(uniform(l + quarter, r - quarter, mid));
        }
        (true, false) => {
            let half = n / 2;
            let delta = policy.endpoint_offset;
            let near = geometric(delta, 1.0, half + 1);
            pts.extend(near[..half].iter().map(|t| l + t));
            let start = l + 1.0;
            let end = cut.max(start + 1.0);
            if start > 0.0 {
                pts.extend(geometric(start, end, n - half));
            } else {
                pts.extend(uniform(start, end, n - half));
            }
        }
        (false, true) => {
            let mirrored = Domain { l: -r, r: f64::INFINITY, d: dom.d };
            pts.extend(scan_grid(&mirrored, n, policy).into_iter().map(|x| -x));
        }
        (false, false) => {
            let side = n / 3;
            let mut mid = n - 2 * side;
            if mid.is_multiple_of(2) {
                mid -= 1;
            }
            let outer = geometric(1.0, cut, side + 1);
            for &t in &outer[1..] {
                pts.push(t);
                pts.push(-t);
            }
            pts.extend(uniform(-1.0, 1.0, mid));
        }
    }
    pts.retain(|x| *x > l && *x < r && x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Golden-section refinement of a grid minimum at `grid[i]` over the
/// neighbouring cell pair. Returns the better of the refined and grid values.
pub fn refine_min<F>(f: F, grid: &[f64], i: usize) -> (f64, f64)
where
    F: Fn(f64) -> Option<f64>,
{
    let best = (grid[i], f(grid[i]).unwrap_or(f64::INFINITY));
    if i == 0 || i + 1 >= grid.len() {
        return best;
    }
    let (mut a, mut b) = (grid[i - 1], grid[i + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let val = |x: f64| f(x).unwrap_or(f64::INFINITY);
    let (mut fc, mut fd) = (val(c), val(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = val(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = val(d);
        }
    }
    let (x, v) = if fc < fd { (c, fc) } else { (d, fd) };
    if v < best.1 {
        (x, v)
    } else {
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(l: f64, r: f64) -> Domain {
        Domain { l, r, d: 1.0 }
    }

    #[test]
    fn bounded_grid_hugs_both_ends_and_hits_the_middle() {
        let g = scan_grid(&dom(-1.0, 1.0), 256, &GridPolicy::default());
        assert!((g[0] + 1.0 - 2e-6).abs() < 1e-15);
        assert!((g[g.len() - 1] - 1.0 + 2e-6).abs() < 1e-15);
        assert!(g.contains(&0.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn half_line_grid_spans_decades() {
        let g = scan_grid(&dom(0.0, f64::INFINITY), 128, &GridPolicy::default());
        assert!(g[0] <= 1.000001e-6 && g[0] > 0.0);
        assert!((g[g.len() - 1] - 1e3).abs() < 1e-9);
        let neg = scan_grid(&dom(f64::NEG_INFINITY, 0.0), 128, &GridPolicy::default());
        assert!(neg.iter().all(|x| *x < 0.0));
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let grid = uniform(-1.0, 1.0, 10);
        let f = |x: f64| Some((x - 0.123).powi(2) + 2.0);
        let i = (0..grid.len()).min_by(|&a, &b| f(grid[a]).partial_cmp(&f(grid[b])).unwrap()).unwrap();
        let (x, v) = refine_min(f, &grid, i);
        assert!((x - 0.123).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
