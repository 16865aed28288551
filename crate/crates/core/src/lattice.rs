//! Open-boundary hypercubic lattices in one and two dimensions.
//!
//! Directions are numbered from 0; direction `k` increments coordinate `k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which end of a virtual boundary link touches the lattice site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Link `(x - k, k)` entering site `x` from outside.
    In,
    /// Link `(x, k)` leaving site `x` to outside.
    Out,
}

/// A link that would cross the open boundary; its flux is a fixed constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VirtualLink {
    pub site: usize,
    pub dir: usize,
    pub side: Side,
}

/// One boundary assignment in serialized form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub site: Vec<usize>,
    pub dir: usize,
    pub side: Side,
    pub flux: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub site: usize,
    pub dir: usize,
    /// Site at `site + e_dir`.
    pub head: usize,
}

/// One step of a lattice path. `forward` means traversal along `+e_dir`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub link: usize,
    pub forward: bool,
}

/// Plaquette `(x,k), (x+k,l), (x+l,k)^dagger, (x,l)^dagger` with `k < l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub corner: usize,
    pub steps: [Step; 4],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    dim: usize,
    extents: Vec<usize>,
    sites: Vec<Vec<usize>>,
    links: Vec<Link>,
    plaquettes: Vec<Plaquette>,
    boundary: BTreeMap<VirtualLink, i32>,
}

/// Serializable description sufficient to rebuild a lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeManifest {
    pub dim: usize,
    pub extents: Vec<usize>,
    pub boundary: Vec<BoundaryEntry>,
}

impl Lattice {
    /// Builds the lattice. `boundary` must contain every virtual link exactly.
    pub fn new(dim: usize, extents: &[usize], boundary: &BTreeMap<VirtualLink, i32>) -> Result<Self> {
        let mut lat = Self::geometry(dim, extents)?;
        let want = lat.virtual_links();
        if let Some(v) = want.iter().find(|v| !boundary.contains_key(v)) {
            return Err(Error::Boundary(format!(
                "missing entry for site {:?} direction {} side {:?}",
                lat.sites[v.site], v.dir, v.side
            )));
        }
        if let Some(v) = boundary.keys().find(|v| !want.contains(v)) {
            return Err(Error::Boundary(format!(
                "entry for site {} direction {} side {:?} is not a boundary link",
                v.site, v.dir, v.side
            )));
        }
        lat.boundary = boundary.clone();
        Ok(lat)
    }

    /// Builds the lattice with the default boundary fluxes.
    ///
    /// d=1: one unit enters the first site and one leaves the last.
    /// d=2: every boundary link at the lower-left corner carries one unit
    /// inwards and every boundary link at the upper-right corner one unit
    /// outwards; all others carry zero.
    pub fn with_default_boundary(dim: usize, extents: &[usize]) -> Result<Self> {
        let geo = Self::geometry(dim, extents)?;
        let first = 0;
        let last = geo.sites.len() - 1;
        let boundary = geo
            .virtual_links()
            .into_iter()
            .map(|v| {
                let on = match v.side {
                    Side::In => v.site == first,
                    Side::Out => v.site == last,
                };
                (v, i32::from(on))
            })
            .collect();
        Self::new(dim, extents, &boundary)
    }

    /// Builds the lattice with every boundary flux set to `flux`.
    pub fn with_uniform_boundary(dim: usize, extents: &[usize], flux: i32) -> Result<Self> {
        let geo = Self::geometry(dim, extents)?;
        let boundary = geo.virtual_links().into_iter().map(|v| (v, flux)).collect();
        Self::new(dim, extents, &boundary)
    }

    fn geometry(dim: usize, extents: &[usize]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::UnsupportedDim(dim));
        }
        if extents.len() != dim {
            return Err(Error::InvalidExtents(format!(
                "{} extents for dimension {dim}",
                extents.len()
            )));
        }
        if extents.contains(&0) {
            return Err(Error::InvalidExtents("extents must be positive".into()));
        }
        let mut sites: Vec<Vec<usize>> = vec![vec![]];
        for &e in extents {
            sites = sites
                .into_iter()
                .flat_map(|s| {
                    (0..e).map(move |c| {
                        let mut t = s.clone();
                        t.push(c);
                        t
                    })
                })
                .collect();
        }
        let mut lat = Self {
            dim,
            extents: extents.to_vec(),
            sites,
            links: vec![],
            plaquettes: vec![],
            boundary: BTreeMap::new(),
        };
        for s in 0..lat.sites.len() {
            for k in 0..dim {
                if let Some(h) = lat.shift(s, k) {
                    lat.links.push(Link {
                        site: s,
                        dir: k,
                        head: h,
                    });
                }
            }
        }
        for s in 0..lat.sites.len() {
            for k in 0..dim {
                for l in k + 1..dim {
                    let (Some(xk), Some(xl)) = (lat.shift(s, k), lat.shift(s, l)) else {
                        continue;
                    };
                    if lat.shift(xk, l).is_none() {
                        continue;
                    }
                    let f = |site, dir, forward| Step {
                        link: lat.link_index(site, dir).expect("interior link"),
                        forward,
                    };
                    let steps = [f(s, k, true), f(xk, l, true), f(xl, k, false), f(s, l, false)];
                    lat.plaquettes.push(Plaquette { corner: s, steps });
                }
            }
        }
        Ok(lat)
    }

    fn virtual_links(&self) -> Vec<VirtualLink> {
        let mut out = vec![];
        for s in 0..self.sites.len() {
            for k in 0..self.dim {
                if self.unshift(s, k).is_none() {
                    out.push(VirtualLink { site: s, dir: k, side: Side::In });
                }
                if self.shift(s, k).is_none() {
                    out.push(VirtualLink { site: s, dir: k, side: Side::Out });
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, i: usize) -> &[usize] {
        &self.sites[i]
    }

    pub fn sites(&self) -> &[Vec<usize>] {
        &self.sites
    }

    pub fn site_index(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.dim || coords.iter().zip(&self.extents).any(|(c, e)| c >= e) {
            return None;
        }
        Some(coords.iter().zip(&self.extents).fold(0, |acc, (c, e)| acc * e + c))
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, l: usize) -> Result<&Link> {
        self.links.get(l).ok_or(Error::UnknownLink(l))
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    pub fn boundary(&self) -> &BTreeMap<VirtualLink, i32> {
        &self.boundary
    }

    /// Site at `s + e_k`, if inside the lattice.
    pub fn shift(&self, s: usize, k: usize) -> Option<usize> {
        let mut c = self.sites.get(s)?.clone();
        c[k] += 1;
        self.site_index(&c)
    }

    /// Site at `s - e_k`, if inside the lattice.
    pub fn unshift(&self, s: usize, k: usize) -> Option<usize> {
        let mut c = self.sites.get(s)?.clone();
        c[k] = c[k].checked_sub(1)?;
        self.site_index(&c)
    }

    /// Index of the dynamical link `(s, k)`.
    pub fn link_index(&self, s: usize, k: usize) -> Option<usize> {
        self.links.iter().position(|l| l.site == s && l.dir == k)
    }

    /// Links touching site `s`, split into outgoing and incoming per direction.
    /// `None` marks a virtual boundary link.
    pub fn site_links(&self, s: usize, k: usize) -> (Option<usize>, Option<usize>) {
        let out = self.link_index(s, k);
        let inc = self.unshift(s, k).and_then(|t| self.link_index(t, k));
        (out, inc)
    }

    /// All simple paths from `from` to `to` using at most `max_len` links.
    ///
    /// Paths are listed in depth-first order with directions tried as
    /// `+e_0, -e_0, +e_1, -e_1`.
    pub fn enumerate_paths(&self, from: usize, to: usize, max_len: usize) -> Result<Vec<Vec<Step>>> {
        for s in [from, to] {
            if s >= self.n_sites() {
                return Err(Error::UnknownSite(s));
            }
        }
        let mut out = vec![];
        let mut visited = vec![false; self.n_sites()];
        visited[from] = true;
        self.dfs(from, to, max_len, &mut visited, &mut vec![], &mut out);
        Ok(out)
    }

    fn dfs(
        &self,
        at: usize,
        to: usize,
        budget: usize,
        visited: &mut [bool],
        path: &mut Vec<Step>,
        out: &mut Vec<Vec<Step>>,
    ) {
        if at == to {
            out.push(path.clone());
            return;
        }
        if budget == 0 {
            return;
        }
        for k in 0..self.dim {
            let moves = [
                (self.shift(at, k), self.link_index(at, k), true),
                (
                    self.unshift(at, k),
                    self.unshift(at, k).and_then(|t| self.link_index(t, k)),
                    false,
                ),
            ];
            for (next, link, forward) in moves {
                let (Some(next), Some(link)) = (next, link) else {
                    continue;
                };
                if visited[next] {
                    continue;
                }
                visited[next] = true;
                path.push(Step { link, forward });
                self.dfs(next, to, budget - 1, visited, path, out);
                path.pop();
                visited[next] = false;
            }
        }
    }

    /// Start and end sites of a step.
    pub fn step_ends(&self, s: Step) -> (usize, usize) {
        let l = self.links[s.link];
        if s.forward {
            (l.site, l.head)
        } else {
            (l.head, l.site)
        }
    }

    /// Checks that consecutive steps share endpoints; returns `(start, end)`.
    pub fn check_path(&self, steps: &[Step]) -> Result<(usize, usize)> {
        let mut ends: Option<(usize, usize)> = None;
        for (i, s) in steps.iter().enumerate() {
            if s.link >= self.n_links() {
                return Err(Error::InvalidPath(format!("step {i} uses unknown link {}", s.link)));
            }
            let (a, b) = self.step_ends(*s);
            ends = match ends {
                None => Some((a, b)),
                Some((start, end)) if end == a => Some((start, b)),
                Some(_) => {
                    return Err(Error::InvalidPath(format!("step {i} is not edge-connected")))
                }
            };
        }
        ends.ok_or_else(|| Error::InvalidPath("empty path".into()))
    }

    pub fn manifest(&self) -> LatticeManifest {
        LatticeManifest {
            dim: self.dim,
            extents: self.extents.clone(),
            boundary: self
                .boundary
                .iter()
                .map(|(v, f)| BoundaryEntry {
                    site: self.sites[v.site].clone(),
                    dir: v.dir,
                    side: v.side,
                    flux: *f,
                })
                .collect(),
        }
    }

    pub fn from_manifest(m: &LatticeManifest) -> Result<Self> {
        let geo = Self::geometry(m.dim, &m.extents)?;
        let mut boundary = BTreeMap::new();
        for e in &m.boundary {
            let site = geo
                .site_index(&e.site)
                .ok_or_else(|| Error::Boundary(format!("site {:?} outside lattice", e.site)))?;
            let key = VirtualLink { site, dir: e.dir, side: e.side };
            if boundary.insert(key, e.flux).is_some() {
                return Err(Error::Boundary(format!("duplicate entry for site {:?}", e.site)));
            }
        }
        Self::new(m.dim, &m.extents, &boundary)
    }
}
