//! Generators for the experiment families.
//!
//! | name             | params (defaults)                                   |
//! |------------------|-----------------------------------------------------|
//! | `disk`           | `radius` (1), `sides` (256)                         |
//! | `half-plane-box` | `L` (10): the box `[-L, L] x (0, L]`                |
//! | `square`         | `side` (1)                                          |
//! | `slit-square`    | `side` (1), `slit_len` (0.6), `slit_width` (0.01)   |
//! | `punctured-box`  | `L` (10), `hole` (1e-3)                             |
//! | `comb`           | `n` (4), `aspect` (20), `width` (4), `height` (2), `tooth` (0.05) |
//! | `cusp`           | `alpha` (2), `L` (1), `steps` (128)                 |
//!
//! The comb is a rectangle with `n` thin bar-shaped teeth cut out of its
//! interior, spread evenly over the middle half of its width. Each tooth is
//! `tooth` wide and `aspect * tooth` tall. The region between consecutive
//! teeth is a cell whose quasihyperbolic crossing cost grows with `n`, while
//! the wide end regions keep a cheap detour open.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

pub const FAMILIES: [&str; 7] = [
    "disk",
    "half-plane-box",
    "square",
    "slit-square",
    "punctured-box",
    "comb",
    "cusp",
];

struct Params<'a> {
    given: &'a BTreeMap<String, f64>,
    used: BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    fn new(given: &'a BTreeMap<String, f64>) -> Self {
        Self {
            given,
            used: BTreeMap::new(),
        }
    }

    fn get(&mut self, key: &str, default: f64) -> f64 {
        let v = self.given.get(key).copied().unwrap_or(default);
        self.used.insert(key.to_string(), v);
        v
    }

    fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(key, "must be positive and finite"))
        }
    }

    fn count(&mut self, key: &str, default: f64, min: usize) -> Result<usize> {
        let v = self.get(key, default);
        if v.fract() != 0.0 || v < min as f64 || !v.is_finite() {
            return Err(invalid(key, &format!("must be an integer >= {min}")));
        }
        Ok(v as usize)
    }

    fn finish(self) -> Result<BTreeMap<String, f64>> {
        if let Some(k) = self.given.keys().find(|k| !self.used.contains_key(*k)) {
            return Err(invalid(k, "not a parameter of this family"));
        }
        Ok(self.used)
    }
}

fn invalid(name: &str, reason: &str) -> Error {
    Error::InvalidParam {
        name: name.to_string(),
        reason: reason.to_string(),
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::new(vec![
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ])
}

/// Builds a named corpus domain. Missing parameters take their defaults;
/// the effective values are recorded in the domain's `params`.
pub fn corpus(name: &str, params: &BTreeMap<String, f64>) -> Result<DomainSpec> {
    let mut p = Params::new(params);
    let (outer, holes, h) = match name {
        "disk" => {
            let r = p.positive("radius", 1.0)?;
            let sides = p.count("sides", 256.0, 3)?;
            let verts = (0..sides)
                .map(|i| {
                    let t = TAU * i as f64 / sides as f64;
                    Point::new(r * t.cos(), r * t.sin())
                })
                .collect();
            (Polygon::new(verts), vec![], r / 50.0)
        }
        "half-plane-box" => {
            let l = p.positive("L", 10.0)?;
            (rect(-l, 0.0, l, l), vec![], l / 500.0)
        }
        "square" => {
            let s = p.positive("side", 1.0)?;
            (rect(0.0, 0.0, s, s), vec![], s / 50.0)
        }
        "slit-square" => {
            let s = p.positive("side", 1.0)?;
            let len = p.positive("slit_len", 0.6)?;
            let w = p.positive("slit_width", 0.01)?;
            if len >= s || w >= s / 2.0 {
                return Err(invalid("slit_len", "slit must fit inside the square"));
            }
            let (a, b) = (s / 2.0 - w / 2.0, s / 2.0 + w / 2.0);
            let outer = Polygon::new(vec![
                Point::new(0.0, 0.0),
                Point::new(a, 0.0),
                Point::new(a, len),
                Point::new(b, len),
                Point::new(b, 0.0),
                Point::new(s, 0.0),
                Point::new(s, s),
                Point::new(0.0, s),
            ]);
            (outer, vec![], s / 100.0)
        }
        "punctured-box" => {
            let l = p.positive("L", 10.0)?;
            let hole = p.positive("hole", 1e-3)?;
            if hole >= l {
                return Err(invalid("hole", "must be smaller than the box"));
            }
            let s = hole / 2.0;
            (rect(-l, -l, l, l), vec![rect(-s, -s, s, s).reversed()], l / 500.0)
        }
        "comb" => {
            let n = p.count("n", 4.0, 1)?;
            let aspect = p.positive("aspect", 20.0)?;
            let w = p.positive("width", 4.0)?;
            let hgt = p.positive("height", 2.0)?;
            let t = p.positive("tooth", 0.05)?;
            let a = aspect * t;
            if a >= 0.9 * hgt {
                return Err(invalid("aspect", "teeth must leave corridors above and below"));
            }
            let centers: Vec<f64> = if n == 1 {
                vec![w / 2.0]
            } else {
                (0..n)
                    .map(|j| w / 4.0 + j as f64 * (w / 2.0) / (n - 1) as f64)
                    .collect()
            };
            if n > 1 && (w / 2.0) / (n - 1) as f64 <= 2.0 * t {
                return Err(invalid("n", "teeth too dense for their width"));
            }
            let (y0, y1) = (hgt / 2.0 - a / 2.0, hgt / 2.0 + a / 2.0);
            let holes = centers
                .iter()
                .map(|&c| rect(c - t / 2.0, y0, c + t / 2.0, y1).reversed())
                .collect();
            (rect(0.0, 0.0, w, hgt), holes, hgt / 100.0)
        }
        "cusp" => {
            let alpha = p.positive("alpha", 2.0)?;
            if alpha <= 1.0 {
                return Err(invalid("alpha", "must exceed 1"));
            }
            let l = p.positive("L", 1.0)?;
            let steps = p.count("steps", 128.0, 2)?;
            let ys: Vec<f64> = (1..=steps).map(|i| l * i as f64 / steps as f64).collect();
            let mut verts = vec![Point::new(0.0, 0.0)];
            verts.extend(ys.iter().map(|&y| Point::new(y.powf(alpha), y)));
            verts.extend(ys.iter().rev().map(|&y| Point::new(-y.powf(alpha), y)));
            (Polygon::new(verts), vec![], l / 100.0)
        }
        other => return Err(Error::UnknownCorpus(other.to_string())),
    };
    let used = p.finish()?;
    DomainSpec::new(name, outer, holes, used, h)
}

/// Fixed probe configuration on a comb: a pair `(x, y)` on opposite sides
/// of the middle of the tooth row, one in the upper corridor and one in the
/// lower, at horizontal offset `0.15·width`, plus a triangle apex `z` at the
/// left end of the tooth row. Every extra tooth lengthens the detour that
/// joins them. `None` for other domains.
pub fn comb_probe_points(dom: &DomainSpec) -> Option<[Point; 3]> {
    if dom.name() != "comb" {
        return None;
    }
    let p = dom.params();
    let (w, hgt) = (p["width"], p["height"]);
    let corridor = (hgt - p["aspect"] * p["tooth"]) / 2.0;
    let dx = 0.075 * w;
    Some([
        Point::new(w / 2.0 - dx, hgt - corridor / 2.0),
        Point::new(w / 2.0 + dx, corridor / 2.0),
        Point::new(w / 8.0, hgt / 2.0),
    ])
}
