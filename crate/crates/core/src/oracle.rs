//! Brute-force referee: backtracking over explicit finite windows.
//!
//! Vertex windows are cell sets and every 2×2 block fully inside the set is
//! checked. Edge windows are cell sets whose variables are the cell edges and
//! every cell carries one tile constraint. Search is plain backtracking with
//! forward checking, nothing cleverer.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::basic_set::{code, pow, BasicSet, Mode, Symbol};
use crate::error::{domain, resource, Result};
use crate::transfer::pattern_count;

/// Largest number of variables a single search may branch on.
pub const MAX_SITES: usize = 256;

/// A variable of a window: a cell (vertex mode) or a unit edge (edge mode).
///
/// `HEdge(x, y)` is the bottom edge of cell `(x, y)`, `VEdge(x, y)` its left edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Site {
    Cell(i32, i32),
    HEdge(i32, i32),
    VEdge(i32, i32),
}

pub type Pattern = BTreeMap<Site, Symbol>;

/// One assigned site, the serialized form of a [`Pattern`] entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteValue {
    pub site: Site,
    pub value: Symbol,
}

pub fn pattern_to_list(pat: &Pattern) -> Vec<SiteValue> {
    pat.iter().map(|(&site, &value)| SiteValue { site, value }).collect()
}

pub fn pattern_from_list(list: &[SiteValue]) -> Pattern {
    list.iter().map(|sv| (sv.site, sv.value)).collect()
}

/// A finite set of cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Window {
    cells: BTreeSet<(i32, i32)>,
}

impl Window {
    pub fn from_cells(cells: impl IntoIterator<Item = (i32, i32)>) -> Window {
        Window { cells: cells.into_iter().collect() }
    }

    /// `w×h` cells with lower-left corner `(x0, y0)`.
    pub fn rect(x0: i32, y0: i32, w: i32, h: i32) -> Window {
        Window::from_cells((y0..y0 + h).flat_map(|y| (x0..x0 + w).map(move |x| (x, y))))
    }

    /// The `d`-wide annulus around the `w×h` hole at `(x0, y0)`.
    pub fn annulus(x0: i32, y0: i32, w: i32, h: i32, d: i32) -> Window {
        Window::rect(x0 - d, y0 - d, w + 2 * d, h + 2 * d).minus(&Window::rect(x0, y0, w, h))
    }

    pub fn union(&self, other: &Window) -> Window {
        Window { cells: self.cells.union(&other.cells).copied().collect() }
    }

    pub fn minus(&self, other: &Window) -> Window {
        Window { cells: self.cells.difference(&other.cells).copied().collect() }
    }

    pub fn contains(&self, c: (i32, i32)) -> bool {
        self.cells.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells in raster order (row by row from the bottom).
    pub fn cells(&self) -> Vec<(i32, i32)> {
        let mut v: Vec<_> = self.cells.iter().copied().collect();
        v.sort_by_key(|&(x, y)| (y, x));
        v
    }

    /// Constraint units: 2×2 blocks inside the window (vertex) or cells (edge), as site quadruples.
    pub fn units(&self, mode: Mode) -> Vec<[Site; 4]> {
        match mode {
            Mode::Vertex => self
                .cells()
                .into_iter()
                .filter(|&(x, y)| self.contains((x + 1, y)) && self.contains((x, y + 1)) && self.contains((x + 1, y + 1)))
                .map(|(x, y)| [Site::Cell(x, y), Site::Cell(x + 1, y), Site::Cell(x, y + 1), Site::Cell(x + 1, y + 1)])
                .collect(),
            Mode::Edge => self.cells().into_iter().map(|(x, y)| tile_sites(x, y)).collect(),
        }
    }

    /// Every variable of the window, in raster order.
    pub fn sites(&self, mode: Mode) -> Vec<Site> {
        match mode {
            Mode::Vertex => self.cells().into_iter().map(|(x, y)| Site::Cell(x, y)).collect(),
            Mode::Edge => {
                let set: BTreeSet<Site> = self.cells().into_iter().flat_map(|(x, y)| tile_sites(x, y)).collect();
                let mut v: Vec<Site> = set.into_iter().collect();
                v.sort_by_key(|s| site_key(*s));
                v
            }
        }
    }
}

/// `[bottom, top, left, right]` edges of cell `(x, y)`.
pub fn tile_sites(x: i32, y: i32) -> [Site; 4] {
    [Site::HEdge(x, y), Site::HEdge(x, y + 1), Site::VEdge(x, y), Site::VEdge(x + 1, y)]
}

fn site_key(s: Site) -> (i32, i32, u8) {
    match s {
        Site::Cell(x, y) => (y, x, 0),
        Site::HEdge(x, y) => (y, x, 1),
        Site::VEdge(x, y) => (y, x, 2),
    }
}

/// A constraint problem: sites indexed `0..n`, each unit a quadruple checked against `B`.
pub(crate) struct Csp<'a> {
    b: &'a BasicSet,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    units: Vec<[usize; 4]>,
    by_site: Vec<Vec<usize>>,
}

impl<'a> Csp<'a> {
    pub(crate) fn new(b: &'a BasicSet, units: &[[Site; 4]], extra_sites: &[Site]) -> Csp<'a> {
        let mut sites: Vec<Site> = Vec::new();
        let mut index = HashMap::new();
        let mut add = |s: Site, sites: &mut Vec<Site>| -> usize {
            *index.entry(s).or_insert_with(|| {
                sites.push(s);
                sites.len() - 1
            })
        };
        let mut idx_units = Vec::with_capacity(units.len());
        for u in units {
            idx_units.push(u.map(|s| add(s, &mut sites)));
        }
        for &s in extra_sites {
            add(s, &mut sites);
        }
        let mut by_site = vec![Vec::new(); sites.len()];
        for (k, u) in idx_units.iter().enumerate() {
            for &v in u {
                if !by_site[v].contains(&k) {
                    by_site[v].push(k);
                }
            }
        }
        Csp { b, sites, index, units: idx_units, by_site }
    }

    pub(crate) fn for_window(b: &'a BasicSet, w: &Window) -> Csp<'a> {
        Csp::new(b, &w.units(b.mode()), &w.sites(b.mode()))
    }

    fn full_domain(&self) -> u16 {
        ((1u32 << self.b.p()) - 1) as u16
    }

    /// Initial domains with `fixed` applied; fixed sites outside the problem are ignored.
    fn domains(&self, fixed: &Pattern) -> Result<Vec<u16>> {
        let mut dom = vec![self.full_domain(); self.sites.len()];
        for (s, &v) in fixed {
            if v as usize >= self.b.p() {
                return domain(format!("symbol {v} not below {}", self.b.p()));
            }
            if let Some(&i) = self.index.get(s) {
                dom[i] = 1 << v;
            }
        }
        Ok(dom)
    }

    fn unit_ok(&self, vals: &[Symbol; 4]) -> bool {
        self.b.contains_code(code(vals, self.b.p()))
    }

    /// Removes unsupported values from the single free site of each touched unit.
    fn propagate(&self, dom: &mut [u16], touched: &[usize]) -> bool {
        let p = self.b.p();
        let mut queue: Vec<usize> = touched.to_vec();
        while let Some(k) = queue.pop() {
            let u = &self.units[k];
            let free: Vec<usize> = (0..4).filter(|&t| dom[u[t]].count_ones() != 1).collect();
            match free.len() {
                0 => {
                    let vals = u.map(|v| dom[v].trailing_zeros() as Symbol);
                    if !self.unit_ok(&vals) {
                        return false;
                    }
                }
                1 => {
                    let t = free[0];
                    let site = u[t];
                    let mut keep = 0u16;
                    for c in 0..p {
                        if dom[site] & (1 << c) == 0 {
                            continue;
                        }
                        let vals: [Symbol; 4] =
                            std::array::from_fn(|q| if q == t { c as Symbol } else { dom[u[q]].trailing_zeros() as Symbol });
                        if self.unit_ok(&vals) {
                            keep |= 1 << c;
                        }
                    }
                    if keep == 0 {
                        return false;
                    }
                    if keep != dom[site] {
                        dom[site] = keep;
                        if keep.count_ones() == 1 {
                            queue.extend(self.by_site[site].iter().copied());
                        }
                    }
                }
                _ => {}
            }
        }
        true
    }

    fn order(&self, reverse: bool) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.sites.len()).collect();
        order.sort_by_key(|&i| site_key(self.sites[i]));
        if reverse {
            order.reverse();
        }
        order
    }

    /// Visits solutions in branching order until `visit` returns false; returns whether it stopped early.
    fn search(&self, fixed: &Pattern, reverse: bool, visit: &mut dyn FnMut(&[u16]) -> bool) -> Result<bool> {
        let free = self.sites.iter().filter(|s| !fixed.contains_key(s)).count();
        if free > MAX_SITES {
            return resource(format!("window has {free} free sites, cap is {MAX_SITES}"));
        }
        let mut dom = self.domains(fixed)?;
        let all: Vec<usize> = (0..self.units.len()).collect();
        if !self.propagate(&mut dom, &all) {
            return Ok(false);
        }
        let order = self.order(reverse);
        Ok(self.descend(&mut dom, &order, 0, visit))
    }

    fn descend(&self, dom: &mut Vec<u16>, order: &[usize], pos: usize, visit: &mut dyn FnMut(&[u16]) -> bool) -> bool {
        let mut pos = pos;
        while pos < order.len() && dom[order[pos]].count_ones() == 1 {
            pos += 1;
        }
        if pos == order.len() {
            return !visit(dom);
        }
        let site = order[pos];
        let choices = dom[site];
        for c in 0..self.b.p() {
            if choices & (1 << c) == 0 {
                continue;
            }
            let mut next = dom.clone();
            next[site] = 1 << c;
            if self.propagate(&mut next, &self.by_site[site]) && self.descend(&mut next, order, pos + 1, visit) {
                return true;
            }
        }
        false
    }

    fn decode(&self, dom: &[u16]) -> Pattern {
        self.sites.iter().zip(dom).map(|(&s, &d)| (s, d.trailing_zeros() as Symbol)).collect()
    }

    /// First solution in raster branching order.
    pub(crate) fn solve(&self, fixed: &Pattern) -> Result<Option<Pattern>> {
        let mut found = None;
        self.search(fixed, false, &mut |dom| {
            found = Some(self.decode(dom));
            false
        })?;
        Ok(found)
    }

    pub(crate) fn satisfiable(&self, fixed: &Pattern) -> Result<bool> {
        Ok(self.solve(fixed)?.is_some())
    }

    /// Number of solutions, stopping at `limit`; the flag reports truncation.
    pub(crate) fn count(&self, fixed: &Pattern, limit: u64, reverse: bool) -> Result<(u64, bool)> {
        let mut n = 0u64;
        let stopped = self.search(fixed, reverse, &mut |_| {
            n += 1;
            n < limit
        })?;
        Ok((n, stopped))
    }

    pub(crate) fn collect(&self, fixed: &Pattern, limit: usize) -> Result<(Vec<Pattern>, bool)> {
        let mut out = Vec::new();
        let stopped = self.search(fixed, false, &mut |dom| {
            out.push(self.decode(dom));
            out.len() < limit
        })?;
        Ok((out, stopped))
    }
}

/// Result of an exhaustive count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Enumeration {
    pub count: u64,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub patterns: Vec<Pattern>,
}

/// Counts admissible patterns on `window`; `limit` stops the count and sets `truncated`.
pub fn enumerate_admissible(b: &BasicSet, window: &Window, limit: u64) -> Result<Enumeration> {
    let (count, truncated) = Csp::for_window(b, window).count(&Pattern::new(), limit, false)?;
    Ok(Enumeration { count, truncated, patterns: Vec::new() })
}

/// Like [`enumerate_admissible`] but also returns the patterns, at most `limit` of them.
pub fn admissible_patterns(b: &BasicSet, window: &Window, limit: usize) -> Result<Enumeration> {
    let (patterns, truncated) = Csp::for_window(b, window).collect(&Pattern::new(), limit)?;
    Ok(Enumeration { count: patterns.len() as u64, truncated, patterns })
}

/// Count with the branching order reversed; used to check order independence.
pub fn enumerate_admissible_reversed(b: &BasicSet, window: &Window, limit: u64) -> Result<Enumeration> {
    let (count, truncated) = Csp::for_window(b, window).count(&Pattern::new(), limit, true)?;
    Ok(Enumeration { count, truncated, patterns: Vec::new() })
}

/// Whether a fully assigned pattern satisfies every unit of `window`.
pub fn is_admissible(b: &BasicSet, window: &Window, pattern: &Pattern) -> bool {
    let p = b.p();
    window.units(b.mode()).iter().all(|u| {
        let vals: Option<Vec<Symbol>> = u.iter().map(|s| pattern.get(s).copied()).collect();
        vals.is_some_and(|v| v.iter().all(|&c| (c as usize) < p) && b.contains_code(code(&v, p)))
    })
}

/// Whether some admissible pattern on `window` agrees with `fixed`.
pub fn extends(b: &BasicSet, window: &Window, fixed: &Pattern) -> Result<bool> {
    Csp::for_window(b, window).satisfiable(fixed)
}

pub fn extension(b: &BasicSet, window: &Window, fixed: &Pattern) -> Result<Option<Pattern>> {
    Csp::for_window(b, window).solve(fixed)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrosscheckRow {
    pub m: usize,
    pub n: usize,
    pub matrix: u64,
    pub oracle: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrosscheckReport {
    pub rows: Vec<CrosscheckRow>,
    pub mismatches: Vec<CrosscheckRow>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares matrix pattern counts of `m×n` rectangles with direct enumeration.
///
/// Vertex sets use the entry sum of `H_n^{m-1}`; edge sets use the edge strip transfer.
pub fn transfer_count_crosscheck(b: &BasicSet, m_max: usize, n_max: usize) -> Result<CrosscheckReport> {
    let mut rows = Vec::new();
    for m in 2..=m_max {
        for n in 2..=n_max {
            // Edge colorings of an m×n vertex lattice live on (m-1)×(n-1) tiles.
            let (cells_w, cells_h) = match b.mode() {
                Mode::Vertex => (m, n),
                Mode::Edge => (m - 1, n - 1),
            };
            let window = Window::rect(0, 0, cells_w as i32, cells_h as i32);
            let matrix = match b.mode() {
                Mode::Vertex => pattern_count(b, m, n)?,
                Mode::Edge => crate::edge::edge_pattern_count(b, m - 1, n - 1)?,
            };
            let oracle = enumerate_admissible(b, &window, u64::MAX)?.count;
            rows.push(CrosscheckRow { m, n, matrix, oracle });
        }
    }
    let mismatches = rows.iter().filter(|r| r.matrix != r.oracle).cloned().collect();
    Ok(CrosscheckReport { rows, mismatches })
}

/// Outcome of the direct hole-filling search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BruteFill {
    pub holds: bool,
    /// A width-`k` annulus pattern that cannot be filled, when `holds` is false.
    pub witness: Option<Pattern>,
    /// Boundary assignments examined.
    pub examined: u64,
}

/// The cell sets of a hole-filling instance around the `M×N` hole at the origin.
pub(crate) struct HoleGeometry {
    /// `Z_{(M+4)×(N+4)}((-2,-2))`.
    pub(crate) rect: Window,
    /// The width-2 annulus that must be kept.
    pub(crate) kept: Window,
    /// The width-`k` annulus that must be admissible.
    pub(crate) thick: Window,
}

impl HoleGeometry {
    pub(crate) fn new(k: usize, m: usize, n: usize) -> Result<HoleGeometry> {
        if k < 2 || m < 1 || n < 1 || m + 3 < 2 * k || n + 3 < 2 * k {
            return domain(format!("hole-filling needs k ≥ 2 and M, N ≥ 2k-3, got k={k}, ({m},{n})"));
        }
        let (m, n, k) = (m as i32, n as i32, k as i32);
        let rect = Window::rect(-2, -2, m + 4, n + 4);
        let kept = Window::annulus(0, 0, m, n, 2);
        let thick = rect.minus(&Window::rect(k - 2, k - 2, m + 4 - 2 * k, n + 4 - 2 * k));
        Ok(HoleGeometry { rect, kept, thick })
    }

    /// Units of the full rectangle that are not inside the kept annulus.
    pub(crate) fn fill_units(&self, mode: Mode) -> Vec<[Site; 4]> {
        let kept: BTreeSet<[Site; 4]> = self.kept.units(mode).into_iter().collect();
        self.rect.units(mode).into_iter().filter(|u| !kept.contains(u)).collect()
    }

    /// Sites shared by the fill units and the kept annulus.
    pub(crate) fn interface(&self, mode: Mode) -> Vec<Site> {
        let kept: BTreeSet<Site> = self.kept.sites(mode).into_iter().collect();
        let mut out: BTreeSet<Site> = BTreeSet::new();
        for u in self.fill_units(mode) {
            out.extend(u.into_iter().filter(|s| kept.contains(s)));
        }
        let mut v: Vec<Site> = out.into_iter().collect();
        v.sort_by_key(|s| site_key(*s));
        v
    }
}

/// Direct check of `k` hole-filling with size `(M, N)`.
///
/// Enumerates every assignment of the sites where the hole meets the kept
/// annulus; an assignment fails when it extends to an admissible width-`k`
/// annulus but not to a filled rectangle.
pub fn brute_fill_annulus(b: &BasicSet, k: usize, m: usize, n: usize) -> Result<BruteFill> {
    let geo = HoleGeometry::new(k, m, n)?;
    let mode = b.mode();
    let interface = geo.interface(mode);
    if interface.len() > 24 {
        return resource(format!("hole boundary has {} sites, cap is 24", interface.len()));
    }
    let fill = Csp::new(b, &geo.fill_units(mode), &[]);
    let annulus = Csp::for_window(b, &geo.thick);
    let p = b.p();
    let total = pow(p, interface.len());
    let mut fixed = Pattern::new();
    for idx in 0..total {
        let mut c = idx;
        for s in interface.iter().rev() {
            fixed.insert(*s, (c % p) as Symbol);
            c /= p;
        }
        if fill.satisfiable(&fixed)? {
            continue;
        }
        if let Some(w) = annulus.solve(&fixed)? {
            return Ok(BruteFill { holds: false, witness: Some(w), examined: idx as u64 + 1 });
        }
    }
    Ok(BruteFill { holds: true, witness: None, examined: total as u64 })
}

/// Whether a width-`k` annulus pattern is admissible and cannot be filled.
pub fn annulus_is_unfillable(b: &BasicSet, k: usize, m: usize, n: usize, annulus: &Pattern) -> Result<bool> {
    let geo = HoleGeometry::new(k, m, n)?;
    if !is_admissible(b, &geo.thick, annulus) {
        return Ok(false);
    }
    let kept_sites: BTreeSet<Site> = geo.kept.sites(b.mode()).into_iter().collect();
    let kept: Pattern = annulus.iter().filter(|(s, _)| kept_sites.contains(s)).map(|(&s, &v)| (s, v)).collect();
    if kept.len() != kept_sites.len() {
        return Ok(false);
    }
    Ok(!extends(b, &geo.rect, &kept)?)
}

/// Whether an admissible pattern on `window` restricts to both `u1` and `u2`.
pub fn brute_glue_window(b: &BasicSet, u1: &Pattern, u2: &Pattern, window: &Window) -> Result<bool> {
    let mut fixed = u1.clone();
    for (s, &v) in u2 {
        if fixed.get(s).is_some_and(|&w| w != v) {
            return Ok(false);
        }
        fixed.insert(*s, v);
    }
    let sites: BTreeSet<Site> = window.sites(b.mode()).into_iter().collect();
    if fixed.keys().any(|s| !sites.contains(s)) {
        return domain("glued patterns must lie inside the window");
    }
    extends(b, window, &fixed)
}

/// A constant vertex pattern on the `w×h` rectangle at `(x0, y0)`.
pub fn constant_block(x0: i32, y0: i32, w: i32, h: i32, symbol: Symbol) -> Pattern {
    Window::rect(x0, y0, w, h).cells().into_iter().map(|(x, y)| (Site::Cell(x, y), symbol)).collect()
}
