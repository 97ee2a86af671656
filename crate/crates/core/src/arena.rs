use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Diagnostic, Error, Result};

/// Index of a point inside an [`ArenaTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(usize);

impl PointId {
    pub const ORIGIN: PointId = PointId(0);

    pub fn index(self) -> usize {
        self.0
    }

    pub fn from_index(i: usize) -> Self {
        PointId(i)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Identity of an arena lineage. Clones share it; ids stay meaningful across
/// clones because arenas only ever grow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArenaTag(u64);

static NEXT_TAG: AtomicU64 = AtomicU64::new(1);

impl ArenaTag {
    fn fresh() -> Self {
        ArenaTag(NEXT_TAG.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointRecord {
    pub id: PointId,
    pub label: Option<String>,
    pub parent: Option<PointId>,
    pub second_proximity: Option<PointId>,
}

impl PointRecord {
    pub fn is_satellite(&self) -> bool {
        self.second_proximity.is_some()
    }

    pub fn is_free(&self) -> bool {
        self.second_proximity.is_none()
    }
}

/// Append-only tree of infinitely near points rooted at the origin.
///
/// A point is satellite exactly when it carries a second proximity, which
/// must be one of the proximities of its parent.
#[derive(Clone, Debug)]
pub struct ArenaTree {
    tag: ArenaTag,
    records: Vec<PointRecord>,
    children: Vec<Vec<PointId>>,
    // points proximate to a given point: its children plus later satellites
    proximate: Vec<Vec<PointId>>,
}

impl Default for ArenaTree {
    fn default() -> Self {
        Self::new()
    }
}

impl ArenaTree {
    pub fn new() -> Self {
        ArenaTree {
            tag: ArenaTag::fresh(),
            records: Vec::new(),
            children: Vec::new(),
            proximate: Vec::new(),
        }
    }

    /// Arena holding only the origin.
    pub fn with_origin() -> Self {
        let mut t = Self::new();
        t.add_origin(None).expect("fresh arena");
        t
    }

    pub fn tag(&self) -> ArenaTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn add_origin(&mut self, label: Option<String>) -> Result<PointId> {
        if !self.records.is_empty() {
            return Err(Error::DuplicateOrigin);
        }
        Ok(self.push(label, None, None))
    }

    pub fn add_point(
        &mut self,
        parent: PointId,
        second_proximity: Option<PointId>,
        label: Option<String>,
    ) -> Result<PointId> {
        if parent.0 >= self.records.len() {
            return Err(Error::UnknownParent(parent));
        }
        if let Some(s) = second_proximity {
            if s == parent {
                return Err(Error::SelfReference(parent));
            }
            if !self.proximities(parent).contains(&s) {
                return Err(Error::IllegalProximity { parent, second: s });
            }
            if let Some(&existing) = self.children[parent.0].iter().find(|&&c| self.records[c.0].second_proximity == Some(s)) {
                return Err(Error::DuplicateSatellite { parent, second: s, existing });
            }
        }
        Ok(self.push(label, Some(parent), second_proximity))
    }

    pub fn add_free(&mut self, parent: PointId) -> Result<PointId> {
        self.add_point(parent, None, None)
    }

    pub fn add_satellite(&mut self, parent: PointId, second: PointId) -> Result<PointId> {
        self.add_point(parent, Some(second), None)
    }

    fn push(
        &mut self,
        label: Option<String>,
        parent: Option<PointId>,
        second_proximity: Option<PointId>,
    ) -> PointId {
        let id = PointId(self.records.len());
        self.records.push(PointRecord { id, label, parent, second_proximity });
        self.children.push(Vec::new());
        self.proximate.push(Vec::new());
        if let Some(p) = parent {
            self.children[p.0].push(id);
            self.proximate[p.0].push(id);
        }
        if let Some(s) = second_proximity {
            self.proximate[s.0].push(id);
        }
        id
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.0 < self.records.len()
    }

    pub fn check(&self, p: PointId) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::UnknownPoint(p))
        }
    }

    pub fn record(&self, p: PointId) -> &PointRecord {
        &self.records[p.0]
    }

    pub fn records(&self) -> &[PointRecord] {
        &self.records
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.records.len()).map(PointId)
    }

    pub fn parent(&self, p: PointId) -> Option<PointId> {
        self.records[p.0].parent
    }

    pub fn second_proximity(&self, p: PointId) -> Option<PointId> {
        self.records[p.0].second_proximity
    }

    pub fn is_origin(&self, p: PointId) -> bool {
        self.records[p.0].parent.is_none()
    }

    /// The origin counts as free.
    pub fn is_free(&self, p: PointId) -> bool {
        self.records[p.0].is_free()
    }

    pub fn is_satellite(&self, p: PointId) -> bool {
        self.records[p.0].is_satellite()
    }

    pub fn children(&self, p: PointId) -> &[PointId] {
        &self.children[p.0]
    }

    /// Points proximate to `p`, in creation order.
    pub fn proximate_to(&self, p: PointId) -> &[PointId] {
        &self.proximate[p.0]
    }

    /// Parent followed by the second proximity, if any.
    pub fn proximities(&self, p: PointId) -> Vec<PointId> {
        let r = &self.records[p.0];
        r.parent.into_iter().chain(r.second_proximity).collect()
    }

    pub fn is_proximate(&self, p: PointId, q: PointId) -> bool {
        let r = &self.records[p.0];
        r.parent == Some(q) || r.second_proximity == Some(q)
    }

    /// Root-to-`p` path, both ends included.
    pub fn ancestors(&self, p: PointId) -> Vec<PointId> {
        let mut path = vec![p];
        let mut cur = p;
        while let Some(q) = self.records[cur.0].parent {
            path.push(q);
            cur = q;
        }
        path.reverse();
        path
    }

    pub fn depth(&self, p: PointId) -> usize {
        let mut d = 0;
        let mut cur = p;
        while let Some(q) = self.records[cur.0].parent {
            d += 1;
            cur = q;
        }
        d
    }

    /// `a` precedes or equals `b`.
    pub fn precedes_or_eq(&self, a: PointId, b: PointId) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            if c.0 < a.0 {
                return false;
            }
            cur = self.records[c.0].parent;
        }
        false
    }

    /// Last free point on the path to `p`, `p` included.
    pub fn defining_free_point(&self, p: PointId) -> Result<PointId> {
        self.check(p)?;
        if self.is_origin(p) {
            return Err(Error::OriginHasNoFreePoint);
        }
        let mut cur = p;
        while self.is_satellite(cur) {
            cur = self.parent(cur).expect("satellites have parents");
        }
        if self.is_origin(cur) {
            // a satellite chain cannot reach the origin directly
            return Err(Error::OriginHasNoFreePoint);
        }
        Ok(cur)
    }

    /// `q` is a satellite whose defining free point is `p`.
    pub fn is_satellite_of(&self, q: PointId, p: PointId) -> bool {
        self.is_satellite(q) && self.defining_free_point(q).ok() == Some(p)
    }

    /// Structural diagnostics. Always empty for arenas built through
    /// `add_point`; kept so that imported arenas can be re-checked.
    pub fn validate(&self) -> Vec<Diagnostic> {
        RawArena {
            points: self
                .records
                .iter()
                .map(|r| RawPoint {
                    parent: r.parent.map(PointId::index),
                    second_proximity: r.second_proximity.map(PointId::index),
                    label: r.label.clone(),
                })
                .collect(),
        }
        .validate()
    }
}

/// Unchecked point description, indexed by position.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawPoint {
    pub parent: Option<usize>,
    pub second_proximity: Option<usize>,
    pub label: Option<String>,
}

/// Unchecked list of points, the form in which external input arrives.
#[derive(Clone, Debug, Default)]
pub struct RawArena {
    pub points: Vec<RawPoint>,
}

impl RawArena {
    /// Every structural problem, not just the first.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut origin_seen = false;
        // (parent, second proximity) of each satellite seen so far
        let mut satellites: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, p) in self.points.iter().enumerate() {
            let id = PointId(i);
            match p.parent {
                None => {
                    if origin_seen || i != 0 {
                        out.push(Diagnostic::DuplicateOrigin { point: id });
                    }
                    origin_seen = true;
                    if p.second_proximity.is_some() {
                        out.push(Diagnostic::UnknownParent { point: id });
                    }
                }
                Some(par) if par >= i => out.push(Diagnostic::UnknownParent { point: id }),
                Some(par) => {
                    if let Some(s) = p.second_proximity {
                        if s == par {
                            out.push(Diagnostic::SelfReference { point: id });
                        } else {
                            let pp = &self.points[par];
                            if pp.parent != Some(s) && pp.second_proximity != Some(s) {
                                out.push(Diagnostic::IllegalProximity {
                                    point: id,
                                    second: PointId(s),
                                });
                            }
                            if let Some(&e) = satellites.get(&(par, s)) {
                                out.push(Diagnostic::DuplicateSatellite { point: id, existing: PointId(e) });
                            } else {
                                satellites.insert((par, s), i);
                            }
                        }
                    }
                }
            }
        }
        if !origin_seen {
            out.push(Diagnostic::MissingOrigin);
        }
        out
    }

    pub fn build(self) -> std::result::Result<ArenaTree, Vec<Diagnostic>> {
        let diags = self.validate();
        if !diags.is_empty() {
            return Err(diags);
        }
        let mut t = ArenaTree::new();
        for p in self.points {
            match p.parent {
                None => {
                    t.add_origin(p.label).expect("validated");
                }
                Some(par) => {
                    t.add_point(PointId(par), p.second_proximity.map(PointId), p.label)
                        .expect("validated");
                }
            }
        }
        Ok(t)
    }
}
