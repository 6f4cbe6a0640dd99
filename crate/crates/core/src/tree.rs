//! The tree `X` a catalog group acts on.
//!
//! Free groups act on their Cayley tree. A free product `A_0 * … * A_{k-1}`
//! acts on the Bass-Serre tree of the star-shaped graph of groups with a
//! trivial central vertex: one "trivial" vertex per group element `g`, one
//! coset vertex `gA_i` per coset of each factor, and an edge `g - gA_i`.
//! The basepoint `x₀` is the coset vertex `A_0`.
//!
//! Both trees are 0-hyperbolic and all stabilisers of trivial vertices are
//! trivial, so the action is acylindrical and every loxodromic element is WPD.
//! Closest-point projections to axes are single vertices.
//!
//! Every vertex is encoded by its path from a fixed root (the identity, or the
//! trivial vertex at the identity): distances reduce to common-prefix lengths.

use std::cmp::Ordering;

use thiserror::Error;

use crate::group::{common_prefix, Element, Group, GroupError, Letter, Syllable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("element {0} is not loxodromic")]
    NotLoxodromic(String),
    #[error("cannot parse vertex `{0}`")]
    Vertex(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeKind {
    Cayley,
    BassSerre,
}

/// A vertex of the tree.
///
/// Cayley vertices and trivial Bass-Serre vertices are `Element`s. A coset
/// vertex `rA_block` always stores the representative with no trailing
/// syllable from `block`, so equality of vertices is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Element(Element),
    Coset { block: usize, rep: Element },
}

/// Invariant line of a loxodromic element.
///
/// The line is `shift · L` where `L` is the standard line of the cyclically
/// reduced `core`: index `0` is the trivial vertex at the identity and the
/// positive direction reads `core` repeatedly. `core` acts on `L` by
/// translating indices by `period`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    pub germ: Element,
    pub shift: Element,
    pub core: Element,
    shift_inv: Element,
    core_inv: Element,
    pub period: u64,
}

/// Where a vertex sits relative to an axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisFoot {
    /// Index of the closest point on the axis.
    pub index: i64,
    /// Distance from the vertex to that closest point.
    pub distance: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeModel {
    group: Group,
    kind: TreeKind,
}

/// Root-path view of a vertex: syllables (or letters) plus an optional coset tag.
enum RootPath<'a> {
    Word(&'a [Letter]),
    Syllables(&'a [Syllable], Option<usize>),
}

impl TreeModel {
    pub fn new(group: Group) -> Self {
        let kind = if group.is_free() { TreeKind::Cayley } else { TreeKind::BassSerre };
        TreeModel { group, kind }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    /// Hyperbolicity constant; trees are 0-hyperbolic.
    pub fn delta(&self) -> u64 {
        0
    }

    pub fn basepoint(&self) -> Vertex {
        self.orbit_point(&self.group.identity())
    }

    /// `g · x₀`.
    pub fn orbit_point(&self, g: &Element) -> Vertex {
        match self.kind {
            TreeKind::Cayley => Vertex::Element(g.clone()),
            TreeKind::BassSerre => self.coset(0, g.clone()),
        }
    }

    fn coset(&self, block: usize, mut rep: Element) -> Vertex {
        if let Element::Syllables(s) = &mut rep {
            if s.last().is_some_and(|l| l.block == block) {
                s.pop();
            }
        }
        Vertex::Coset { block, rep }
    }

    /// Left action `g · v`.
    pub fn act(&self, g: &Element, v: &Vertex) -> Vertex {
        match v {
            Vertex::Element(h) => Vertex::Element(self.group.mul(g, h)),
            Vertex::Coset { block, rep } => self.coset(*block, self.group.mul(g, rep)),
        }
    }

    fn root_path<'a>(&self, v: &'a Vertex) -> RootPath<'a> {
        match v {
            Vertex::Element(Element::Word(w)) => RootPath::Word(w),
            Vertex::Element(Element::Syllables(s)) => RootPath::Syllables(s, None),
            Vertex::Coset { block, rep: Element::Syllables(s) } => {
                RootPath::Syllables(s, Some(*block))
            }
            Vertex::Coset { .. } => panic!("coset vertex in a Cayley tree"),
        }
    }

    /// Distance from the root (identity, or the trivial vertex at the identity).
    pub fn depth(&self, v: &Vertex) -> u64 {
        match self.root_path(v) {
            RootPath::Word(w) => w.len() as u64,
            RootPath::Syllables(s, tag) => 2 * s.len() as u64 + u64::from(tag.is_some()),
        }
    }

    /// Depth of the last common vertex of the root paths of `u` and `v`.
    fn common_depth(&self, u: &Vertex, v: &Vertex) -> u64 {
        match (self.root_path(u), self.root_path(v)) {
            (RootPath::Word(a), RootPath::Word(b)) => common_prefix(a, b) as u64,
            (RootPath::Syllables(a, ta), RootPath::Syllables(b, tb)) => {
                let c = common_prefix(a, b);
                let next = |s: &[Syllable], t: Option<usize>| s.get(c).map(|x| x.block).or(t);
                let bonus = match (next(a, ta), next(b, tb)) {
                    (Some(p), Some(q)) if p == q => 1,
                    _ => 0,
                };
                2 * c as u64 + bonus
            }
            _ => panic!("vertices from different tree kinds"),
        }
    }

    pub fn distance(&self, u: &Vertex, v: &Vertex) -> u64 {
        self.depth(u) + self.depth(v) - 2 * self.common_depth(u, v)
    }

    /// `d_X(g·x₀, h·x₀)`.
    pub fn orbit_distance(&self, g: &Element, h: &Element) -> u64 {
        match self.kind {
            TreeKind::Cayley => self.group.distance(g, h),
            TreeKind::BassSerre => self.distance(&self.orbit_point(g), &self.orbit_point(h)),
        }
    }

    /// The vertex at depth `d` on the root path of `v`.
    pub fn ancestor(&self, v: &Vertex, d: u64) -> Vertex {
        let d = d as usize;
        match self.root_path(v) {
            RootPath::Word(w) => Vertex::Element(Element::Word(w[..d].to_vec())),
            RootPath::Syllables(s, tag) => {
                let j = d / 2;
                let prefix = Element::Syllables(s[..j.min(s.len())].to_vec());
                if d % 2 == 0 {
                    Vertex::Element(prefix)
                } else {
                    let block = s.get(j).map(|x| x.block).or(tag).expect("depth within path");
                    Vertex::Coset { block, rep: prefix }
                }
            }
        }
    }

    /// Vertices of the unique geodesic from `u` to `v`, both included.
    pub fn geodesic(&self, u: &Vertex, v: &Vertex) -> Vec<Vertex> {
        let c = self.common_depth(u, v);
        let (du, dv) = (self.depth(u), self.depth(v));
        let mut out: Vec<Vertex> = (c..=du).rev().map(|d| self.ancestor(u, d)).collect();
        out.extend((c + 1..=dv).map(|d| self.ancestor(v, d)));
        out
    }

    /// `(x, y)_z = (d(x,z) + d(z,y) − d(x,y)) / 2`, an integer in a tree.
    pub fn gromov_product(&self, x: &Vertex, y: &Vertex, z: &Vertex) -> u64 {
        let twice = self.distance(x, z) + self.distance(z, y) - self.distance(x, y);
        debug_assert!(twice % 2 == 0);
        twice / 2
    }

    /// Neighbours of `v`. Coset vertices have infinitely many neighbours when
    /// the factor is infinite, so only those `r·a` with `|a| ≤ reach` are listed.
    pub fn neighbors(&self, v: &Vertex, reach: u64) -> Vec<Vertex> {
        match (self.kind, v) {
            (TreeKind::Cayley, Vertex::Element(g)) => self
                .group
                .generators()
                .iter()
                .map(|s| Vertex::Element(self.group.mul(g, &s.element)))
                .collect(),
            (_, Vertex::Element(g)) => (0..self.group.blocks().len())
                .map(|b| self.coset(b, g.clone()))
                .collect(),
            (_, Vertex::Coset { block, rep }) => {
                let mut out = vec![Vertex::Element(rep.clone())];
                for a in self.block_elements(*block, reach) {
                    out.push(Vertex::Element(self.group.mul(rep, &a)));
                }
                out
            }
        }
    }

    /// Nontrivial elements of factor `block` of length at most `reach`.
    fn block_elements(&self, block: usize, reach: u64) -> Vec<Element> {
        use crate::group::Block;
        let mut out = Vec::new();
        match self.group.blocks()[block] {
            Block::Cyclic { order } => {
                for j in 1..order {
                    let s = Syllable { block, value: vec![j] };
                    if self.group.syllable_length(&s) <= reach {
                        out.push(Element::Syllables(vec![s]));
                    }
                }
            }
            Block::Lattice { rank } => {
                let r = reach as i64;
                let mut value = vec![-r; rank];
                loop {
                    let len: i64 = value.iter().map(|v: &i64| v.abs()).sum();
                    if len > 0 && len <= r {
                        out.push(Element::Syllables(vec![Syllable { block, value: value.clone() }]));
                    }
                    let mut k = 0;
                    while k < rank && value[k] == r {
                        value[k] = -r;
                        k += 1;
                    }
                    if k == rank {
                        break;
                    }
                    value[k] += 1;
                }
            }
        }
        out
    }

    pub fn is_loxodromic(&self, g: &Element) -> bool {
        self.translation_length(g) > 0
    }

    /// Translation length `τ(g)`; 0 exactly for elliptic elements.
    pub fn translation_length(&self, g: &Element) -> u64 {
        let (_, core) = self.group.cyclic_reduction(g);
        match self.kind {
            TreeKind::Cayley => core.len() as u64,
            TreeKind::BassSerre if core.len() >= 2 => 2 * core.len() as u64,
            TreeKind::BassSerre => 0,
        }
    }

    pub fn axis_of(&self, g: &Element) -> Result<Axis, TreeError> {
        self.group.validate(g)?;
        if !self.is_loxodromic(g) {
            return Err(TreeError::NotLoxodromic(self.group.format(g)));
        }
        let (shift, core) = self.group.cyclic_reduction(g);
        Ok(self.axis_from_parts(g.clone(), shift, core))
    }

    /// Axis `shift · L(core)`; `core` must be cyclically reduced and loxodromic.
    pub fn axis_from_parts(&self, germ: Element, shift: Element, core: Element) -> Axis {
        let period = match self.kind {
            TreeKind::Cayley => core.len() as u64,
            TreeKind::BassSerre => 2 * core.len() as u64,
        };
        Axis {
            shift_inv: self.group.invert(&shift),
            core_inv: self.group.invert(&core),
            germ,
            shift,
            core,
            period,
        }
    }

    /// `g · axis`, the axis of `g·germ·g⁻¹`.
    pub fn translate_axis(&self, g: &Element, axis: &Axis) -> Axis {
        let germ = self.group.mul(&self.group.mul(g, &axis.germ), &self.group.invert(g));
        self.axis_from_parts(germ, self.group.mul(g, &axis.shift), axis.core.clone())
    }

    /// Element `P` with `L(2j) = P` (Bass-Serre) or `L(j) = P` (Cayley): the
    /// first `j` units of `core^∞` (or of `core⁻¹^∞` for negative `j`).
    pub fn line_prefix(&self, axis: &Axis, j: i64) -> Element {
        let (src, n) = if j >= 0 { (&axis.core, j) } else { (&axis.core_inv, -j) };
        let m = src.len() as i64;
        let whole = self.group.power(src, n / m);
        let part = src.prefix((n % m) as usize);
        self.group.mul(&whole, &part)
    }

    /// Vertex `i` of the axis.
    pub fn axis_vertex(&self, axis: &Axis, i: i64) -> Vertex {
        let local = match self.kind {
            TreeKind::Cayley => Vertex::Element(self.line_prefix(axis, i)),
            TreeKind::BassSerre => {
                let j = i.div_euclid(2);
                let p = self.line_prefix(axis, j);
                if i.rem_euclid(2) == 0 {
                    Vertex::Element(p)
                } else {
                    let s = axis.core.syllables().expect("syllable core");
                    let block = s[j.rem_euclid(s.len() as i64) as usize].block;
                    self.coset(block, p)
                }
            }
        };
        self.act(&axis.shift, &local)
    }

    /// Index of the closest point of `axis` to `v`, and the distance to it.
    pub fn locate(&self, v: &Vertex, axis: &Axis) -> AxisFoot {
        let local = self.act(&axis.shift_inv, v);
        let depth = self.depth(&local);
        let forward = self.ray_overlap(&local, &axis.core);
        let backward = self.ray_overlap(&local, &axis.core_inv);
        debug_assert!(forward == 0 || backward == 0);
        let (index, common) = if forward > 0 {
            (forward as i64, forward)
        } else {
            (-(backward as i64), backward)
        };
        AxisFoot { index, distance: depth - common }
    }

    /// Length of the common part of the root path of `v` and the ray reading `src^∞`.
    fn ray_overlap(&self, v: &Vertex, src: &Element) -> u64 {
        match (self.root_path(v), src) {
            (RootPath::Word(w), Element::Word(c)) => {
                w.iter().zip(c.iter().cycle()).take_while(|(x, y)| x == y).count() as u64
            }
            (RootPath::Syllables(s, tag), Element::Syllables(c)) => {
                let k = s.iter().zip(c.iter().cycle()).take_while(|(x, y)| x == y).count();
                let next = s.get(k).map(|x| x.block).or(tag);
                let bonus = next == Some(c[k % c.len()].block);
                2 * k as u64 + u64::from(bonus)
            }
            _ => panic!("vertex and axis from different tree kinds"),
        }
    }

    /// Closest point of `axis` to `v`.
    pub fn project_to_axis(&self, v: &Vertex, axis: &Axis) -> Vertex {
        self.axis_vertex(axis, self.locate(v, axis).index)
    }

    /// Canonical string form of a vertex.
    ///
    /// Cayley vertices print as their element; Bass-Serre vertices print as
    /// `elem:<element>` or `coset:<factor index>:<representative>`.
    pub fn format_vertex(&self, v: &Vertex) -> String {
        match (self.kind, v) {
            (TreeKind::Cayley, Vertex::Element(g)) => self.group.format(g),
            (_, Vertex::Element(g)) => format!("elem:{}", self.group.format(g)),
            (_, Vertex::Coset { block, rep }) => {
                format!("coset:{block}:{}", self.group.format(rep))
            }
        }
    }

    pub fn parse_vertex(&self, s: &str) -> Result<Vertex, TreeError> {
        let bad = || TreeError::Vertex(s.to_string());
        match self.kind {
            TreeKind::Cayley => Ok(Vertex::Element(self.group.parse_element(s)?)),
            TreeKind::BassSerre => {
                if let Some(rest) = s.strip_prefix("elem:") {
                    Ok(Vertex::Element(self.group.parse_element(rest)?))
                } else if let Some(rest) = s.strip_prefix("coset:") {
                    let (block, rep) = rest.split_once(':').ok_or_else(bad)?;
                    let block: usize = block.parse().map_err(|_| bad())?;
                    if block >= self.group.blocks().len() {
                        return Err(bad());
                    }
                    let v = self.coset(block, self.group.parse_element(rep)?);
                    if self.format_vertex(&v) != s {
                        return Err(bad());
                    }
                    Ok(v)
                } else {
                    Err(bad())
                }
            }
        }
    }

    /// Order vertices by depth, then structurally; used for deterministic output.
    pub fn vertex_cmp(&self, u: &Vertex, v: &Vertex) -> Ordering {
        self.depth(u).cmp(&self.depth(v)).then_with(|| u.cmp(v))
    }
}
