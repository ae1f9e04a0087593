//! Sweeps over a plane of coupling space, labelling each point by which
//! formula gives its speed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, ModelSpec};
use crate::solver::{solve_speed, SpeedForm};

/// One sweep axis. The value at each node multiplies the base coupling of
/// every listed label, so an axis can move several couplings together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub labels: Vec<String>,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(labels: &[&str], min: f64, max: f64, steps: usize) -> Self {
        Axis {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            min,
            max,
            steps,
        }
    }

    pub fn values(&self, log: bool) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let f = i as f64 / last;
                if i + 1 == self.steps {
                    self.max
                } else if log {
                    self.min * (self.max / self.min).powf(f)
                } else {
                    self.min + (self.max - self.min) * f
                }
            })
            .collect()
    }

    fn check(&self, name: &str, base: &ModelSpec, other: &Axis) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSweep(format!("{name}: {msg}")));
        if self.labels.is_empty() {
            return bad("no labels".into());
        }
        if self.steps < 2 {
            return bad(format!("needs at least 2 steps, got {}", self.steps));
        }
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return bad(format!(
                "range must satisfy 0 < min < max, got {}..{}",
                self.min, self.max
            ));
        }
        for label in &self.labels {
            if !base.interactions.iter().any(|i| &i.label == label) {
                return Err(Error::UnknownLabel(label.clone()));
            }
            if other.labels.contains(label) {
                return bad(format!("`{label}` is on both axes"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ModelSpec,
    pub x: Axis,
    pub y: Axis,
    #[serde(default)]
    pub log: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.x.check("x axis", &self.base, &self.y)?;
        self.y.check("y axis", &self.base, &self.x)?;
        validate(&self.base).map(|_| ())
    }

    /// The base model with both axes applied.
    pub fn model_at(&self, x: f64, y: f64) -> ModelSpec {
        let mut spec = self.base.clone();
        for (axis, value) in [(&self.x, x), (&self.y, y)] {
            for label in &axis.labels {
                if let Some(c) = spec.coupling_mut(label) {
                    *c *= value;
                }
            }
        }
        spec
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionPoint {
    pub x: f64,
    pub y: f64,
    pub v_lr: f64,
    pub lambda_star: f64,
    pub form: SpeedForm,
    pub region_id: String,
}

/// `form:` followed by the sorted names of the active cycles, joined by `+`.
pub fn region_id(form: SpeedForm, mut names: Vec<String>) -> String {
    names.sort();
    format!("{}:{}", form.as_str(), names.join("+"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major with `y` outer: point `(i, j)` is at `j * xs.len() + i`.
    pub points: Vec<RegionPoint>,
}

impl RegionGrid {
    pub fn at(&self, i: usize, j: usize) -> &RegionPoint {
        &self.points[j * self.xs.len() + i]
    }

    /// Distinct region ids in order of first appearance.
    pub fn regions(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for p in &self.points {
            if !seen.contains(&p.region_id.as_str()) {
                seen.push(&p.region_id);
            }
        }
        seen
    }
}

fn solve_point(spec: &SweepSpec, x: f64, y: f64) -> Result<RegionPoint> {
    let model = validate(&spec.model_at(x, y))?;
    let r = solve_speed(&model)?;
    let names = r.active.iter().map(|c| c.name(&model)).collect();
    Ok(RegionPoint {
        x,
        y,
        v_lr: r.v_lr,
        lambda_star: r.lambda_star,
        form: r.form,
        region_id: region_id(r.form, names),
    })
}

pub fn sweep(spec: &SweepSpec) -> Result<RegionGrid> {
    spec.validate()?;
    let xs = spec.x.values(spec.log);
    let ys = spec.y.values(spec.log);
    let nx = xs.len();
    let points = (0..nx * ys.len())
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (xs[idx % nx], ys[idx / nx]);
            solve_point(spec, x, y).map_err(|e| Error::GridPoint {
                x,
                y,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionGrid { xs, ys, points })
}

/// A straight piece of the border between two regions. `between` holds the
/// two region ids in sorted order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundarySegment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub between: [String; 2],
}

fn midpoints(values: &[f64], log: bool) -> Vec<f64> {
    values
        .windows(2)
        .map(|w| {
            if log {
                (w[0] * w[1]).sqrt()
            } else {
                0.5 * (w[0] + w[1])
            }
        })
        .collect()
}

/// Edges of the cell around node `k`, clipped to the grid.
fn cell_span(values: &[f64], mids: &[f64], k: usize) -> (f64, f64) {
    let lo = if k == 0 { values[0] } else { mids[k - 1] };
    let hi = if k + 1 == values.len() {
        values[k]
    } else {
        mids[k]
    };
    (lo, hi)
}

/// Places a segment halfway between every pair of neighbouring nodes whose
/// region ids differ, then joins segments that continue each other.
pub fn find_boundaries(grid: &RegionGrid, log: bool) -> Vec<BoundarySegment> {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let mx = midpoints(&grid.xs, log);
    let my = midpoints(&grid.ys, log);
    let pair = |a: &RegionPoint, b: &RegionPoint| {
        let mut p = [a.region_id.clone(), b.region_id.clone()];
        p.sort();
        p
    };

    // Vertical pieces come from horizontal neighbours; scanning column by
    // column keeps pieces of one line adjacent.
    let mut vertical = Vec::new();
    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny {
            let (a, b) = (grid.at(i, j), grid.at(i + 1, j));
            if a.region_id != b.region_id {
                let (y0, y1) = cell_span(&grid.ys, &my, j);
                vertical.push(BoundarySegment {
                    x0: mx[i],
                    y0,
                    x1: mx[i],
                    y1,
                    between: pair(a, b),
                });
            }
        }
    }
    let mut horizontal = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx {
            let (a, b) = (grid.at(i, j), grid.at(i, j + 1));
            if a.region_id != b.region_id {
                let (x0, x1) = cell_span(&grid.xs, &mx, i);
                horizontal.push(BoundarySegment {
                    x0,
                    y0: my[j],
                    x1,
                    y1: my[j],
                    between: pair(a, b),
                });
            }
        }
    }

    let mut merged: Vec<BoundarySegment> = Vec::new();
    for seg in vertical.into_iter().chain(horizontal) {
        if let Some(last) = merged.last_mut() {
            let continues = last.between == seg.between
                && ((last.x0 == last.x1 && seg.x0 == last.x0 && seg.y0 == last.y1)
                    || (last.y0 == last.y1 && seg.y0 == last.y0 && seg.x0 == last.x1));
            if continues {
                last.x1 = seg.x1;
                last.y1 = seg.y1;
                continue;
            }
        }
        merged.push(seg);
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::solver::SpeedForm::*;

    fn xy_sweep(n: usize, max: f64) -> SweepSpec {
        SweepSpec {
            base: xy(1.0, 1.0, 0.5),
            x: Axis::new(&["X", "Y"], 0.1, max, n),
            y: Axis::new(&["Z"], 0.1, max, n),
            log: false,
        }
    }

    #[test]
    fn axis_values() {
        assert_eq!(
            Axis::new(&["a"], 1.0, 3.0, 3).values(false),
            vec![1.0, 2.0, 3.0]
        );
        let log = Axis::new(&["a"], 1.0, 100.0, 3).values(true);
        assert!((log[1] - 10.0).abs() < 1e-12);
        assert_eq!(log[2], 100.0);
    }

    #[test]
    fn sweep_rejects_bad_axes() {
        let mut s = xy_sweep(4, 30.0);
        s.x.steps = 1;
        assert!(matches!(sweep(&s), Err(Error::InvalidSweep(_))));
        let mut s = xy_sweep(4, 30.0);
        s.y.min = 0.0;
        assert!(matches!(sweep(&s), Err(Error::InvalidSweep(_))));
        let mut s = xy_sweep(4, 30.0);
        s.y.labels = vec!["W".into()];
        assert!(matches!(sweep(&s), Err(Error::UnknownLabel(_))));
        let mut s = xy_sweep(4, 30.0);
        s.y.labels = vec!["X".into()];
        assert!(matches!(sweep(&s), Err(Error::InvalidSweep(_))));
    }

    #[test]
    fn sweep_is_row_major() {
        let grid = sweep(&xy_sweep(3, 30.0)).unwrap();
        assert_eq!(grid.points.len(), 9);
        assert_eq!(grid.points[1].x, grid.xs[1]);
        assert_eq!(grid.points[1].y, grid.ys[0]);
        assert_eq!(grid.points[3].y, grid.ys[1]);
    }

    #[test]
    fn two_types_give_one_region() {
        let spec = SweepSpec {
            base: ising(1.0, 1.0),
            x: Axis::new(&["X"], 0.1, 10.0, 12),
            y: Axis::new(&["ZZ"], 0.1, 10.0, 12),
            log: true,
        };
        let grid = sweep(&spec).unwrap();
        assert_eq!(grid.regions(), vec!["single-term:X-ZZ"]);
        assert!(find_boundaries(&grid, true).is_empty());
    }

    #[test]
    fn xy_has_three_regions() {
        let grid = sweep(&xy_sweep(40, 30.0)).unwrap();
        let mut regions = grid.regions();
        regions.sort();
        assert_eq!(
            regions,
            vec!["breakpoint:X-Y+X-Z", "single-term:X-Y", "single-term:X-Z"]
        );
        for p in &grid.points {
            let ratio = p.y / (2.0 * p.x);
            let c = 49.0 / 16.0 * std::f64::consts::E;
            let expected = if ratio < c {
                SingleTerm
            } else if ratio < c * std::f64::consts::E {
                Breakpoint
            } else {
                SingleTerm
            };
            assert_eq!(p.form, expected, "J = {}, D = {}", p.x, p.y);
        }
    }

    #[test]
    fn region_changes_across_the_upper_ray() {
        let spec = xy_sweep(2, 30.0);
        let c = 49.0 / 16.0 * std::f64::consts::E * std::f64::consts::E;
        let below = solve_point(&spec, 1.0, 2.0 * c * 0.999).unwrap();
        let above = solve_point(&spec, 1.0, 2.0 * c * 1.001).unwrap();
        assert_eq!(below.region_id, "breakpoint:X-Y+X-Z");
        assert_eq!(above.region_id, "single-term:X-Z");
    }

    fn tiny_grid(ids: [&str; 4]) -> RegionGrid {
        let points = ids
            .iter()
            .enumerate()
            .map(|(k, id)| RegionPoint {
                x: (k % 2) as f64,
                y: (k / 2) as f64,
                v_lr: 1.0,
                lambda_star: 1.0,
                form: SingleTerm,
                region_id: id.to_string(),
            })
            .collect();
        RegionGrid {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
            points,
        }
    }

    #[test]
    fn two_by_two_split_gives_one_segment() {
        let segs = find_boundaries(&tiny_grid(["a", "b", "a", "b"]), false);
        assert_eq!(segs.len(), 1);
        assert_eq!(
            (segs[0].x0, segs[0].y0, segs[0].x1, segs[0].y1),
            (0.5, 0.0, 0.5, 1.0)
        );
        assert!(find_boundaries(&tiny_grid(["a"; 4]), false).is_empty());
        let corner = find_boundaries(&tiny_grid(["a", "a", "a", "b"]), false);
        assert_eq!(corner.len(), 2);
    }

    #[test]
    fn speed_is_continuous_across_boundaries() {
        let grid = sweep(&xy_sweep(30, 30.0)).unwrap();
        let (nx, ny) = (grid.xs.len(), grid.ys.len());
        let spacing = (30.0 - 0.1) / 29.0;
        for j in 0..ny {
            for i in 0..nx {
                let a = grid.at(i, j);
                for b in [
                    (i + 1 < nx).then(|| grid.at(i + 1, j)),
                    (j + 1 < ny).then(|| grid.at(i, j + 1)),
                ]
                .into_iter()
                .flatten()
                {
                    if a.region_id != b.region_id {
                        let rel_step = spacing / a.x.min(a.y).min(b.x).min(b.y);
                        assert!((a.v_lr - b.v_lr).abs() / a.v_lr <= 10.0 * rel_step);
                    }
                }
            }
        }
    }
}
