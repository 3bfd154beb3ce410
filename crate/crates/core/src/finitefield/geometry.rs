//! Points, lines, striations and translations of the phase space `F_d x F_d`.

use serde_json::{json, Value};

use super::FieldCtx;

/// A point `(q, p)` given by field-element indices.
pub type Point = (usize, usize);

/// The solutions of `a q + b p = c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub striation: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    /// Sorted by `(q, p)` index.
    pub points: Vec<Point>,
}

/// `d` parallel lines sharing the direction `(a, b)`, one per offset `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Striation {
    pub a: usize,
    pub b: usize,
    /// Line indices ordered by `c`.
    pub lines: Vec<usize>,
    /// Index of the line through the origin.
    pub ray: usize,
}

/// The full incidence structure of `F_d x F_d`.
///
/// Directions are normalized so the first nonzero of `(a, b)` is one:
/// striation `k < d` is `(1, k)`, striation `d` is `(0, 1)`. Striation 0
/// holds the vertical lines `q = c`, striation `d` the horizontal lines `p = c`.
#[derive(Clone, Debug)]
pub struct Geometry {
    ctx: FieldCtx,
    lines: Vec<Line>,
    striations: Vec<Striation>,
    /// `line_of[s][q * d + p]`: line of striation `s` through the point.
    line_of: Vec<Vec<usize>>,
}

impl Geometry {
    pub fn new(ctx: FieldCtx) -> Self {
        let d = ctx.order();
        let mut lines = Vec::with_capacity(d * (d + 1));
        let mut striations = Vec::with_capacity(d + 1);
        let mut line_of = Vec::with_capacity(d + 1);
        let directions: Vec<(usize, usize)> = (0..d).map(|k| (1, k)).chain(std::iter::once((0, 1))).collect();
        for (s, &(a, b)) in directions.iter().enumerate() {
            let mut ids = Vec::with_capacity(d);
            let mut lookup = vec![0; d * d];
            for c in 0..d {
                let mut points = Vec::with_capacity(d);
                for q in 0..d {
                    for p in 0..d {
                        if ctx.add_i(ctx.mul_i(a, q), ctx.mul_i(b, p)) == c {
                            points.push((q, p));
                            lookup[q * d + p] = lines.len();
                        }
                    }
                }
                ids.push(lines.len());
                lines.push(Line { striation: s, a, b, c, points });
            }
            striations.push(Striation { a, b, ray: ids[0], lines: ids });
            line_of.push(lookup);
        }
        Geometry { ctx, lines, striations, line_of }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn order(&self) -> usize {
        self.ctx.order()
    }

    pub fn points(&self) -> Vec<Point> {
        let d = self.order();
        (0..d * d).map(|i| (i / d, i % d)).collect()
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn line(&self, i: usize) -> &Line {
        &self.lines[i]
    }

    pub fn striations(&self) -> &[Striation] {
        &self.striations
    }

    /// Line of striation `s` containing `pt`.
    pub fn line_through(&self, s: usize, pt: Point) -> usize {
        self.line_of[s][pt.0 * self.order() + pt.1]
    }

    /// Lines containing `pt`, one per striation.
    pub fn lines_through(&self, pt: Point) -> Vec<usize> {
        (0..self.striations.len()).map(|s| self.line_through(s, pt)).collect()
    }

    /// The unique line through two distinct points.
    pub fn line_joining(&self, x: Point, y: Point) -> Option<usize> {
        if x == y {
            return None;
        }
        (0..self.striations.len()).map(|s| self.line_through(s, x)).find(|&l| self.line_through(self.lines[l].striation, y) == l)
    }

    pub fn translate_point(&self, pt: Point, by: Point) -> Point {
        (self.ctx.add_i(pt.0, by.0), self.ctx.add_i(pt.1, by.1))
    }

    /// Index of the line `{x + α : x ∈ λ}`.
    pub fn translate(&self, line: usize, by: Point) -> usize {
        let l = &self.lines[line];
        let shift = self.ctx.add_i(self.ctx.mul_i(l.a, by.0), self.ctx.mul_i(l.b, by.1));
        let c = self.ctx.add_i(l.c, shift);
        self.striations[l.striation].lines[c]
    }

    /// Nested striations → lines → points dump with elements in string form.
    pub fn to_json(&self) -> Value {
        let el = |i: usize| self.ctx.element(i).to_string();
        json!({
            "p": self.ctx.p(),
            "n": self.ctx.n(),
            "modulus": self.ctx.modulus(),
            "striations": self.striations.iter().map(|s| json!({
                "a": el(s.a),
                "b": el(s.b),
                "ray": s.ray,
                "lines": s.lines.iter().map(|&li| {
                    let l = &self.lines[li];
                    json!({
                        "index": li,
                        "c": el(l.c),
                        "points": l.points.iter().map(|&(q, p)| json!([el(q), el(p)])).collect::<Vec<_>>(),
                    })
                }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(d: usize) -> Geometry {
        Geometry::new(FieldCtx::of_order(d).unwrap())
    }

    #[test]
    fn counts() {
        for d in [2usize, 3, 4, 5, 7, 8, 9] {
            let g = geo(d);
            assert_eq!(g.points().len(), d * d);
            assert_eq!(g.lines().len(), d * (d + 1));
            assert_eq!(g.striations().len(), d + 1);
            assert!(g.lines().iter().all(|l| l.points.len() == d));
        }
    }

    #[test]
    fn two_points_one_line() {
        for d in [2usize, 3, 4, 5] {
            let g = geo(d);
            let pts = g.points();
            for &x in &pts {
                for &y in &pts {
                    if x == y {
                        continue;
                    }
                    let n = g.lines().iter().filter(|l| l.points.contains(&x) && l.points.contains(&y)).count();
                    assert_eq!(n, 1);
                    let l = g.line_joining(x, y).unwrap();
                    assert!(g.line(l).points.contains(&x) && g.line(l).points.contains(&y));
                }
            }
        }
    }

    #[test]
    fn nonparallel_lines_meet_once_parallel_never() {
        for d in [2usize, 3, 4, 5] {
            let g = geo(d);
            for l1 in g.lines() {
                for l2 in g.lines() {
                    let common = l1.points.iter().filter(|p| l2.points.contains(p)).count();
                    if l1 == l2 {
                        continue;
                    }
                    let want = if l1.striation == l2.striation { 0 } else { 1 };
                    assert_eq!(common, want);
                }
            }
        }
    }

    #[test]
    fn parallel_through_each_point() {
        // for a line and a point off it, exactly one parallel line passes through the point
        for d in [2usize, 3, 4, 5] {
            let g = geo(d);
            for l in g.lines() {
                for pt in g.points() {
                    let n = g.lines().iter().filter(|m| m.striation == l.striation && m.points.contains(&pt)).count();
                    assert_eq!(n, 1);
                }
            }
        }
    }

    #[test]
    fn striations_partition() {
        for d in [2usize, 3, 4, 8, 9] {
            let g = geo(d);
            for s in g.striations() {
                let mut seen = vec![0; d * d];
                for &li in &s.lines {
                    for &(q, p) in &g.line(li).points {
                        seen[q * d + p] += 1;
                    }
                }
                assert!(seen.iter().all(|&c| c == 1));
                assert!(g.line(s.ray).points.contains(&(0, 0)));
            }
        }
    }

    #[test]
    fn translation_properties() {
        for d in [2usize, 3, 4] {
            let g = geo(d);
            for (li, l) in g.lines().iter().enumerate() {
                assert_eq!(g.translate(li, (0, 0)), li);
                // pointwise image agrees with the computed line
                for by in g.points() {
                    let t = g.translate(li, by);
                    let mut img: Vec<Point> = l.points.iter().map(|&x| g.translate_point(x, by)).collect();
                    img.sort();
                    assert_eq!(img, g.line(t).points);
                    let ray = &g.line(g.striations()[l.striation].ray).points;
                    if ray.contains(&by) {
                        assert_eq!(t, li, "ray invariance");
                    } else {
                        assert_ne!(t, li);
                        assert_eq!(g.line(t).striation, l.striation);
                    }
                }
            }
        }
    }

    #[test]
    fn dump_shape() {
        let j = geo(4).to_json();
        assert_eq!(j["striations"].as_array().unwrap().len(), 5);
        assert_eq!(j["striations"][0]["lines"][0]["points"].as_array().unwrap().len(), 4);
    }
}
