//! Marching-squares isolines over raster fields.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::sip::{Bounds, Raster};
use crate::error::{Error, Result};

/// Default contour levels.
pub const DEFAULT_LEVELS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Closed curves bounding the region where the field exceeds `level`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isoline {
    pub level: f64,
    pub rings: Vec<Vec<[f64; 2]>>,
}

/// Contours at each level. The raster is padded with zeros, so every ring
/// closes, and the inside is where the value is strictly greater than the
/// level.
pub fn extract_isolines(raster: &Raster, levels: &[f64]) -> Result<Vec<Isoline>> {
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::param("levels", format!("levels must lie in (0, 1), got {l}")));
    }
    Ok(levels.iter().map(|&l| contour(raster, l)).collect())
}

fn contour(r: &Raster, level: f64) -> Isoline {
    let (pw, ph) = (r.width + 2, r.height + 2);
    let dx = r.bounds.width() / r.width as f64;
    let dy = r.bounds.height() / r.height as f64;
    let value = |c: usize, row: usize| -> f64 {
        if c == 0 || row == 0 || c > r.width || row > r.height {
            0.0
        } else {
            r.get(c - 1, row - 1)
        }
    };
    let pos = |c: usize, row: usize| [r.bounds.x0 + (c as f64 - 0.5) * dx, r.bounds.y1 - (row as f64 - 0.5) * dy];
    // Edge ids: horizontal edge right of node (c, row) and vertical edge
    // below it.
    let h = |c: usize, row: usize| 2 * (row * pw + c);
    let v = |c: usize, row: usize| 2 * (row * pw + c) + 1;
    let crossing = |id: usize| -> [f64; 2] {
        let node = id / 2;
        let (c, row) = (node % pw, node / pw);
        let (c2, row2) = if id.is_multiple_of(2) { (c + 1, row) } else { (c, row + 1) };
        let (va, vb) = (value(c, row), value(c2, row2));
        let t = (level - va) / (vb - va);
        let (a, b) = (pos(c, row), pos(c2, row2));
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    };
    let mut links: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut link = |a: usize, b: usize| {
        links.entry(a).or_default().push(b);
        links.entry(b).or_default().push(a);
    };
    for row in 0..ph - 1 {
        for c in 0..pw - 1 {
            let tl = value(c, row);
            let tr = value(c + 1, row);
            let br = value(c + 1, row + 1);
            let bl = value(c, row + 1);
            let case = ((tl > level) as u8) << 3 | ((tr > level) as u8) << 2 | ((br > level) as u8) << 1 | (bl > level) as u8;
            let (top, right, bottom, left) = (h(c, row), v(c + 1, row), h(c, row + 1), v(c, row));
            let center_in = (tl + tr + br + bl) / 4.0 > level;
            match case {
                0 | 15 => {}
                1 | 14 => link(left, bottom),
                2 | 13 => link(bottom, right),
                3 | 12 => link(left, right),
                4 | 11 => link(top, right),
                6 | 9 => link(top, bottom),
                7 | 8 => link(top, left),
                5 => {
                    if center_in {
                        link(top, left);
                        link(bottom, right);
                    } else {
                        link(top, right);
                        link(left, bottom);
                    }
                }
                10 => {
                    if center_in {
                        link(top, right);
                        link(left, bottom);
                    } else {
                        link(top, left);
                        link(bottom, right);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    let mut starts: Vec<usize> = links.keys().copied().collect();
    starts.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    let mut rings = Vec::new();
    for start in starts {
        if !seen.insert(start) {
            continue;
        }
        let mut ring = vec![crossing(start)];
        let (mut prev, mut cur) = (start, links[&start][0]);
        while cur != start {
            seen.insert(cur);
            ring.push(crossing(cur));
            let next = links[&cur].iter().copied().find(|&n| n != prev).unwrap_or(prev);
            prev = cur;
            cur = next;
        }
        rings.push(ring);
    }
    Isoline { level, rings }
}

/// Standalone SVG document; the viewBox equals `bounds` and `y` points up.
pub fn isolines_to_svg(lines: &[Isoline], bounds: &Bounds) -> String {
    let mut s = String::new();
    let stroke = bounds.width().max(bounds.height()) / 400.0;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        bounds.x0,
        bounds.y0,
        bounds.width(),
        bounds.height()
    );
    let _ = writeln!(
        s,
        r#"<g transform="matrix(1 0 0 -1 0 {})" fill="none" stroke="black" stroke-width="{stroke}">"#,
        bounds.y0 + bounds.y1
    );
    for line in lines {
        let mut d = String::new();
        for ring in &line.rings {
            for (i, p) in ring.iter().enumerate() {
                let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, p[0], p[1]);
            }
            d.push_str("Z ");
        }
        let _ = writeln!(s, r#"<path data-level="{}" d="{}"/>"#, line.level, d.trim_end());
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(n: usize) -> Raster {
        let b = Bounds::new(-2.0, -2.0, 2.0, 2.0).unwrap();
        let mut values = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                let c = super::super::sip::cell_center(&b, n, n, col, row);
                values.push((1.0 - (c[0] * c[0] + c[1] * c[1]).sqrt() / 2.0).max(0.0));
            }
        }
        Raster::new(n, n, b, values).unwrap()
    }

    fn area_perimeter(ring: &[[f64; 2]]) -> (f64, f64) {
        let mut a = 0.0;
        let mut p = 0.0;
        for i in 0..ring.len() {
            let (u, v) = (ring[i], ring[(i + 1) % ring.len()]);
            a += u[0] * v[1] - v[0] * u[1];
            p += ((v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2)).sqrt();
        }
        (a.abs() / 2.0, p)
    }

    #[test]
    fn constant_field_has_no_contour() {
        let b = Bounds::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let r = Raster::new(5, 5, b, vec![0.5; 25]).unwrap();
        let lines = extract_isolines(&r, &[0.5]).unwrap();
        assert!(lines[0].rings.is_empty());
    }

    #[test]
    fn radial_contours_are_round() {
        let r = radial(101);
        for line in extract_isolines(&r, &DEFAULT_LEVELS).unwrap() {
            assert_eq!(line.rings.len(), 1);
            let (a, p) = area_perimeter(&line.rings[0]);
            let ratio = 4.0 * std::f64::consts::PI * a / (p * p);
            assert!(ratio > 0.95, "level {}: {ratio}", line.level);
            let expect = 2.0 * (1.0 - line.level);
            assert!((a / std::f64::consts::PI).sqrt() - expect < 0.05);
        }
    }

    #[test]
    fn levels_are_validated() {
        let r = radial(4);
        assert!(extract_isolines(&r, &[0.0]).is_err());
        assert!(extract_isolines(&r, &[1.2]).is_err());
    }

    #[test]
    fn border_regions_close() {
        let b = Bounds::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let r = Raster::new(3, 3, b, vec![1.0; 9]).unwrap();
        let lines = extract_isolines(&r, &[0.5]).unwrap();
        assert_eq!(lines[0].rings.len(), 1);
        let svg = isolines_to_svg(&lines, &b);
        assert!(svg.contains(r#"viewBox="0 0 1 1""#));
        assert!(svg.contains("Z"));
    }

    #[test]
    fn saddles_do_not_break_rings() {
        let b = Bounds::new(0.0, 0.0, 4.0, 4.0).unwrap();
        #[rustfmt::skip]
        let v = vec![
            1.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 1.0,
            1.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 1.0,
        ];
        let r = Raster::new(4, 4, b, v).unwrap();
        let line = &extract_isolines(&r, &[0.3]).unwrap()[0];
        let total: usize = line.rings.iter().map(Vec::len).sum();
        assert!(total > 0);
        for ring in &line.rings {
            assert!(ring.len() >= 3);
        }
    }
}
