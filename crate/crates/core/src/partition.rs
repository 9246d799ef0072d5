//! Lattice regions: belts, rectangles, disks and arbitrary masks, with the set
//! algebra used by strong-subadditivity constructions.
//!
//! Regions are immutable values. Sites are stored as sorted lexicographic
//! indices, which is also the canonical order of rows in correlation matrices.
//! Offsets and translations wrap periodically.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kspace::{Coord, LatticeGeometry, MAX_DIMS};

/// How a region was constructed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeTag {
    Belt { axis: usize, offset: usize, width: usize },
    Rectangle { origin: [usize; 2], widths: [usize; 2] },
    Disk { center: Vec<f64>, radius: f64 },
    Mask,
    Union(Box<ShapeTag>, Box<ShapeTag>),
    Intersection(Box<ShapeTag>, Box<ShapeTag>),
    Complement(Box<ShapeTag>),
    Translated { base: Box<ShapeTag>, shift: Vec<i64> },
    Mirrored { base: Box<ShapeTag>, axis: usize },
}

/// A belt recognised from a region's sites: `width` consecutive layers
/// perpendicular to `axis`, starting at `offset` (cyclically).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BeltShape {
    pub axis: usize,
    pub offset: usize,
    pub width: usize,
}

#[derive(Debug, Clone)]
pub struct Region {
    geometry: LatticeGeometry,
    sites: Vec<usize>,
    tag: ShapeTag,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.geometry == other.geometry && self.sites == other.sites
    }
}

impl Region {
    fn from_sites(geometry: &LatticeGeometry, sites: impl IntoIterator<Item = usize>, tag: ShapeTag) -> Self {
        let set: BTreeSet<usize> = sites.into_iter().collect();
        Region {
            geometry: geometry.clone(),
            sites: set.into_iter().collect(),
            tag,
        }
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    /// Site indices in canonical (lexicographic) order.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.sites.iter().map(|&i| self.geometry.coord(i))
    }

    pub fn tag(&self) -> &ShapeTag {
        &self.tag
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.sites.len() == self.geometry.sites()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    /// Recognises a belt from the site set alone, whatever the provenance.
    pub fn as_belt(&self) -> Option<BeltShape> {
        let g = &self.geometry;
        if self.is_empty() || self.is_full() {
            return None;
        }
        for axis in 0..g.dims() {
            let n = g.extent(axis);
            let mut present = vec![false; n];
            for c in self.coords() {
                present[c[axis]] = true;
            }
            let width = present.iter().filter(|&&p| p).count();
            if width == n || self.len() != width * (g.sites() / n) {
                continue;
            }
            let Some(offset) = (0..n).find(|&x| present[x] && !present[(x + n - 1) % n]) else {
                continue;
            };
            if (0..width).all(|j| present[(offset + j) % n]) {
                return Some(BeltShape { axis, offset, width });
            }
        }
        None
    }

    /// Number of nearest-neighbour bonds from the region to its complement.
    pub fn boundary_bonds(&self) -> usize {
        let g = &self.geometry;
        let mut count = 0;
        for c in self.coords() {
            for axis in 0..g.dims() {
                let n = g.extent(axis);
                for step in [1, n - 1] {
                    let mut nb = c;
                    nb[axis] = (c[axis] + step) % n;
                    if !self.contains(g.index(&nb)) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// Parses a region literal: `belt:<axis>,<offset>,<width>` (axis `x`, `y`
    /// or `z`), `rect:x0,y0,Lx,Ly`, `disk:cx,cy,r` or `mask:<path>`.
    pub fn parse(geom: &LatticeGeometry, literal: &str) -> Result<Region> {
        let (kind, args) = literal
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("region literal {literal:?} has no kind prefix")))?;
        let fields: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer {s:?} in region {literal:?}")))
        };
        let float = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {s:?} in region {literal:?}")))
        };
        let expect = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "region {literal:?} needs {n} comma-separated fields"
                )))
            }
        };
        match kind {
            "belt" => {
                expect(3)?;
                let axis = match fields[0] {
                    "x" | "0" => 0,
                    "y" | "1" => 1,
                    "z" | "2" => 2,
                    other => return Err(Error::Parse(format!("bad belt axis {other:?}"))),
                };
                belt(geom, axis, int(fields[1])?, int(fields[2])?)
            }
            "rect" => {
                expect(4)?;
                rectangle(
                    geom,
                    [int(fields[0])?, int(fields[1])?],
                    int(fields[2])?,
                    int(fields[3])?,
                )
            }
            "disk" => {
                expect(3)?;
                disk(geom, &[float(fields[0])?, float(fields[1])?], float(fields[2])?)
            }
            "mask" => from_mask_file(geom, Path::new(args)),
            other => Err(Error::Parse(format!("unknown region kind {other:?}"))),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} sites on {} ({:?})", self.len(), self.geometry, self.tag)
    }
}

fn check_same(a: &Region, b: &Region) -> Result<()> {
    if a.geometry != b.geometry {
        return Err(Error::GeometryMismatch(format!(
            "regions on {} and {}",
            a.geometry, b.geometry
        )));
    }
    Ok(())
}

pub fn belt(geom: &LatticeGeometry, axis: usize, offset: usize, width: usize) -> Result<Region> {
    if axis >= geom.dims() {
        return Err(Error::InvalidRegion(format!(
            "belt axis {axis} out of range for {geom}"
        )));
    }
    let n = geom.extent(axis);
    if width < 1 || width >= n {
        return Err(Error::InvalidRegion(format!(
            "belt width L = {width} must satisfy 1 <= L <= N - 1 = {}",
            n - 1
        )));
    }
    let offset = offset % n;
    let sites = (0..geom.sites()).filter(|&i| (geom.coord(i)[axis] + n - offset) % n < width);
    Ok(Region::from_sites(geom, sites, ShapeTag::Belt { axis, offset, width }))
}

/// `Lx x Ly` rectangle at `origin`, spanning all remaining axes; the overlap of
/// an x-belt and a y-belt.
pub fn rectangle(geom: &LatticeGeometry, origin: [usize; 2], lx: usize, ly: usize) -> Result<Region> {
    if geom.dims() < 2 {
        return Err(Error::InvalidRegion(format!(
            "rectangle needs d >= 2, lattice is {geom}"
        )));
    }
    let a = belt(geom, 0, origin[0], lx)?;
    let b = belt(geom, 1, origin[1], ly)?;
    let mut r = intersect(&a, &b)?;
    r.tag = ShapeTag::Rectangle {
        origin: [origin[0] % geom.extent(0), origin[1] % geom.extent(1)],
        widths: [lx, ly],
    };
    Ok(r)
}

pub fn union(a: &Region, b: &Region) -> Result<Region> {
    check_same(a, b)?;
    let tag = ShapeTag::Union(Box::new(a.tag.clone()), Box::new(b.tag.clone()));
    Ok(Region::from_sites(
        &a.geometry,
        a.sites.iter().chain(&b.sites).copied(),
        tag,
    ))
}

pub fn intersect(a: &Region, b: &Region) -> Result<Region> {
    check_same(a, b)?;
    let tag = ShapeTag::Intersection(Box::new(a.tag.clone()), Box::new(b.tag.clone()));
    let sites = a.sites.iter().copied().filter(|&s| b.contains(s));
    Ok(Region::from_sites(&a.geometry, sites, tag))
}

pub fn complement(a: &Region) -> Region {
    let sites = (0..a.geometry.sites()).filter(|&s| !a.contains(s));
    Region::from_sites(&a.geometry, sites, ShapeTag::Complement(Box::new(a.tag.clone())))
}

pub fn translate(a: &Region, shift: &[i64]) -> Result<Region> {
    let g = &a.geometry;
    if shift.len() != g.dims() {
        return Err(Error::InvalidRegion(format!(
            "shift {shift:?} has wrong dimension for {g}"
        )));
    }
    let sites = a.coords().map(|c| {
        let mut t = [0; MAX_DIMS];
        for axis in 0..g.dims() {
            let n = g.extent(axis) as i64;
            t[axis] = (c[axis] as i64 + shift[axis]).rem_euclid(n) as usize;
        }
        g.index(&t)
    });
    let tag = ShapeTag::Translated {
        base: Box::new(a.tag.clone()),
        shift: shift.to_vec(),
    };
    Ok(Region::from_sites(g, sites, tag))
}

/// Reflection `x -> N - 1 - x` along `axis`.
pub fn mirror(a: &Region, axis: usize) -> Result<Region> {
    let g = &a.geometry;
    if axis >= g.dims() {
        return Err(Error::InvalidRegion(format!("mirror axis {axis} out of range for {g}")));
    }
    let sites = a.coords().map(|mut c| {
        c[axis] = g.extent(axis) - 1 - c[axis];
        g.index(&c)
    });
    let tag = ShapeTag::Mirrored {
        base: Box::new(a.tag.clone()),
        axis,
    };
    Ok(Region::from_sites(g, sites, tag))
}

/// All sites whose coordinates (length `d`) satisfy `predicate`.
pub fn mask_from_predicate(geom: &LatticeGeometry, predicate: impl Fn(&[usize]) -> bool) -> Region {
    let d = geom.dims();
    let sites = (0..geom.sites()).filter(|&i| predicate(&geom.coord(i)[..d]));
    Region::from_sites(geom, sites, ShapeTag::Mask)
}

/// Sites within `radius` of `center`, distances measured the short way around
/// each periodic axis.
pub fn disk(geom: &LatticeGeometry, center: &[f64], radius: f64) -> Result<Region> {
    if center.len() != geom.dims() {
        return Err(Error::InvalidRegion(format!(
            "disk center {center:?} has wrong dimension for {geom}"
        )));
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidRegion(format!(
            "disk radius {radius} must be finite and >= 0"
        )));
    }
    let extents = geom.extents().to_vec();
    let mut r = mask_from_predicate(geom, |c| {
        let dist2: f64 = c
            .iter()
            .zip(center)
            .zip(&extents)
            .map(|((&x, &cx), &n)| {
                let dx = (x as f64 - cx).rem_euclid(n as f64);
                let dx = dx.min(n as f64 - dx);
                dx * dx
            })
            .sum();
        dist2 <= radius * radius
    });
    r.tag = ShapeTag::Disk {
        center: center.to_vec(),
        radius,
    };
    Ok(r)
}

/// Reads a 0/1 grid file with `N^d` entries in lexicographic order (rows of a
/// 2D grid run along `y`). Entries may be whitespace separated or packed;
/// lines starting with `#` are ignored.
pub fn from_mask_file(geom: &LatticeGeometry, path: &Path) -> Result<Region> {
    let text = std::fs::read_to_string(path)?;
    let bits: Vec<bool> = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::chars)
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!(
                "{}: unexpected character {other:?} in mask",
                path.display()
            ))),
        })
        .collect::<Result<_>>()?;
    if bits.len() != geom.sites() {
        return Err(Error::InvalidRegion(format!(
            "{}: mask has {} entries, lattice {geom} has {}",
            path.display(),
            bits.len(),
            geom.sites()
        )));
    }
    let sites = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i);
    Ok(Region::from_sites(geom, sites, ShapeTag::Mask))
}

/// Region with the given site indices (deduplicated, sorted).
pub fn from_sites(geom: &LatticeGeometry, sites: impl IntoIterator<Item = usize>) -> Result<Region> {
    let r = Region::from_sites(geom, sites, ShapeTag::Mask);
    if let Some(&last) = r.sites.last() {
        if last >= geom.sites() {
            return Err(Error::InvalidRegion(format!("site {last} outside lattice {geom}")));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn g(d: usize, n: usize) -> LatticeGeometry {
        LatticeGeometry::new(d, n).unwrap()
    }

    #[test]
    fn belt_sizes() {
        assert!(belt(&g(2, 8), 0, 0, 8).is_err());
        assert!(belt(&g(2, 8), 0, 0, 0).is_err());
        assert!(belt(&g(2, 8), 2, 0, 3).is_err());
        assert_eq!(belt(&g(2, 8), 0, 0, 3).unwrap().len(), 24);
        assert_eq!(belt(&g(3, 4), 0, 0, 2).unwrap().len(), 32);
    }

    #[test]
    fn belt_wraps_and_spans_transverse_axes() {
        let geom = g(2, 6);
        let b = belt(&geom, 1, 4, 3).unwrap();
        for c in b.coords() {
            assert!([4, 5, 0].contains(&c[1]));
        }
        assert_eq!(b.len(), 18);
        assert_eq!(
            b.as_belt(),
            Some(BeltShape {
                axis: 1,
                offset: 4,
                width: 3
            })
        );
    }

    #[test]
    fn rectangle_is_crossed_belt_overlap() {
        let geom = g(2, 10);
        let a = belt(&geom, 0, 2, 4).unwrap();
        let b = belt(&geom, 1, 7, 5).unwrap();
        let r = rectangle(&geom, [2, 7], 4, 5).unwrap();
        assert_eq!(intersect(&a, &b).unwrap(), r);
        assert_eq!(r.len(), 20);
        assert!(matches!(r.tag(), ShapeTag::Rectangle { .. }));
        assert!(rectangle(&g(1, 10), [0, 0], 2, 2).is_err());
    }

    #[test]
    fn set_algebra_basics() {
        let geom = g(2, 7);
        let a = rectangle(&geom, [1, 1], 3, 2).unwrap();
        assert_eq!(complement(&complement(&a)), a);
        assert_eq!(translate(&a, &[7, 0]).unwrap(), a);
        assert_eq!(translate(&a, &[-14, 21]).unwrap(), a);
        assert_eq!(a.len() + complement(&a).len(), geom.sites());
        let other = LatticeGeometry::new(2, 8).unwrap();
        let b = belt(&other, 0, 0, 2).unwrap();
        assert!(matches!(union(&a, &b), Err(Error::GeometryMismatch(_))));
        assert!(intersect(&a, &b).is_err());
    }

    #[test]
    fn mirror_reflects_coordinates() {
        let geom = g(2, 5);
        let a = from_sites(&geom, [geom.index(&[0, 1, 0])]).unwrap();
        let m = mirror(&a, 0).unwrap();
        assert_eq!(m.sites(), &[geom.index(&[4, 1, 0])]);
        assert_eq!(mirror(&m, 0).unwrap(), a);
    }

    #[test]
    fn predicates() {
        let geom = g(2, 16);
        assert!(mask_from_predicate(&geom, |_| false).is_empty());
        let via_mask = mask_from_predicate(&geom, |c| (2..5).contains(&c[1]));
        assert_eq!(via_mask, belt(&geom, 1, 2, 3).unwrap());
        assert_eq!(
            via_mask.as_belt(),
            Some(BeltShape {
                axis: 1,
                offset: 2,
                width: 3
            })
        );
    }

    #[test]
    fn disk_site_count() {
        let geom = g(2, 16);
        let d = disk(&geom, &[8.0, 8.0], 4.0).unwrap();
        // Direct count of integer points with (x-8)^2 + (y-8)^2 <= 16.
        let mut direct = 0;
        for x in 0..16i32 {
            for y in 0..16i32 {
                if (x - 8).pow(2) + (y - 8).pow(2) <= 16 {
                    direct += 1;
                }
            }
        }
        assert_eq!(d.len(), direct);
        let area = PI * 16.0;
        assert!((d.len() as f64 - area).abs() / area < 0.08);
        assert!(d.as_belt().is_none());
    }

    #[test]
    fn literals() {
        let geom = g(2, 12);
        assert_eq!(
            Region::parse(&geom, "belt:x,0,6").unwrap(),
            belt(&geom, 0, 0, 6).unwrap()
        );
        assert_eq!(
            Region::parse(&geom, "rect:1,2,3,4").unwrap(),
            rectangle(&geom, [1, 2], 3, 4).unwrap()
        );
        assert_eq!(Region::parse(&geom, "disk:6,6,3").unwrap().len(), 29);
        for bad in ["belt:x,0", "belt:w,0,3", "rect:a,0,1,1", "blob:1", "belt:x,0,12"] {
            assert!(Region::parse(&geom, bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn mask_file() {
        let dir = std::env::temp_dir().join(format!("ee-core-mask-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mask.txt");
        std::fs::write(&path, "# 3x3\n110\n0 1 0\n000\n").unwrap();
        let geom = g(2, 3);
        let r = Region::parse(&geom, &format!("mask:{}", path.display())).unwrap();
        assert_eq!(r.sites(), &[0, 1, 4]);
        std::fs::write(&path, "1101\n").unwrap();
        assert!(from_mask_file(&geom, &path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn boundary_bonds_of_belt() {
        let geom = g(2, 8);
        assert_eq!(belt(&geom, 0, 0, 3).unwrap().boundary_bonds(), 16);
        assert_eq!(rectangle(&geom, [0, 0], 2, 2).unwrap().boundary_bonds(), 8);
    }

    proptest! {
        #[test]
        fn complement_partitions_lattice(bits in proptest::collection::vec(any::<bool>(), 36)) {
            let geom = g(2, 6);
            let a = from_sites(&geom, bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)).unwrap();
            let c = complement(&a);
            prop_assert_eq!(a.len() + c.len(), 36);
            prop_assert!(intersect(&a, &c).unwrap().is_empty());
            prop_assert!(union(&a, &c).unwrap().is_full());
            prop_assert_eq!(complement(&c), a);
        }

        #[test]
        fn translation_is_a_bijection(
            bits in proptest::collection::vec(any::<bool>(), 30),
            sx in -20i64..20, sy in -20i64..20,
        ) {
            let geom = LatticeGeometry::with_extents(vec![5, 6]).unwrap();
            let a = from_sites(&geom, bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)).unwrap();
            let t = translate(&a, &[sx, sy]).unwrap();
            prop_assert_eq!(t.len(), a.len());
            prop_assert_eq!(translate(&t, &[-sx, -sy]).unwrap(), a);
        }
    }
}
