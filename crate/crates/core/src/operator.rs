//! Operator model: half-line and whole-line tridiagonal operators as finitely
//! supported perturbations of the free operator, their finite truncations, the
//! diagonal sandwich transform, the spectral flip, and lattice assemblies.

use std::collections::BTreeMap;
use std::fmt;

use crate::dense::SymMatrix;
use crate::error::{Error, Result};

/// Which lattice line the operator lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    /// Sites 1, 2, 3, ...; bond n couples sites n and n+1 (n >= 1).
    HalfLine,
    /// Sites in Z; bond n couples sites n and n+1.
    WholeLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Finitely supported perturbation of the free operator: off-diagonal weights
/// `a` (free value 1) and diagonal values `b` (free value 0). Queries outside
/// the stored support return the free values, so specs compose without
/// storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    kind: LineKind,
    a: BTreeMap<i64, f64>,
    b: BTreeMap<i64, f64>,
}

impl Perturbation {
    pub fn new(
        kind: LineKind,
        a: impl IntoIterator<Item = (i64, f64)>,
        b: impl IntoIterator<Item = (i64, f64)>,
    ) -> Result<Self> {
        let mut am = BTreeMap::new();
        for (n, v) in a {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Input(format!(
                    "off-diagonal weight a[{n}] = {v} must be a positive finite real"
                )));
            }
            if kind == LineKind::HalfLine && n < 1 {
                return Err(Error::Input(format!(
                    "half-line bonds are indexed from 1, got a[{n}]"
                )));
            }
            if v != 1.0 {
                am.insert(n, v);
            }
        }
        let mut bm = BTreeMap::new();
        for (n, v) in b {
            if !v.is_finite() {
                return Err(Error::Input(format!("diagonal b[{n}] = {v} is not finite")));
            }
            if kind == LineKind::HalfLine && n < 1 {
                return Err(Error::Input(format!(
                    "half-line sites are indexed from 1, got b[{n}]"
                )));
            }
            if v != 0.0 {
                bm.insert(n, v);
            }
        }
        Ok(Perturbation {
            kind,
            a: am,
            b: bm,
        })
    }

    pub fn free(kind: LineKind) -> Self {
        Perturbation {
            kind,
            a: BTreeMap::new(),
            b: BTreeMap::new(),
        }
    }

    pub fn half_line(
        a: impl IntoIterator<Item = (i64, f64)>,
        b: impl IntoIterator<Item = (i64, f64)>,
    ) -> Result<Self> {
        Perturbation::new(LineKind::HalfLine, a, b)
    }

    pub fn whole_line(
        a: impl IntoIterator<Item = (i64, f64)>,
        b: impl IntoIterator<Item = (i64, f64)>,
    ) -> Result<Self> {
        Perturbation::new(LineKind::WholeLine, a, b)
    }

    pub fn kind(&self) -> LineKind {
        self.kind
    }

    /// Off-diagonal weight of the bond joining sites n and n+1.
    pub fn a(&self, n: i64) -> f64 {
        *self.a.get(&n).unwrap_or(&1.0)
    }

    /// Diagonal value at site n.
    pub fn b(&self, n: i64) -> f64 {
        *self.b.get(&n).unwrap_or(&0.0)
    }

    pub fn a_entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.a.iter().map(|(&n, &v)| (n, v))
    }

    pub fn b_entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.b.iter().map(|(&n, &v)| (n, v))
    }

    pub fn is_free(&self) -> bool {
        self.a.is_empty() && self.b.is_empty()
    }

    pub fn is_diagonal(&self) -> bool {
        self.a.is_empty()
    }

    pub fn has_nonnegative_b(&self) -> bool {
        self.b.values().all(|&v| v >= 0.0)
    }

    /// Smallest and largest site touched by the perturbation (a bond at n
    /// touches sites n and n+1). None for the free operator.
    pub fn support(&self) -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for &n in self.b.keys() {
            lo = lo.min(n);
            hi = hi.max(n);
        }
        for &n in self.a.keys() {
            lo = lo.min(n);
            hi = hi.max(n + 1);
        }
        if lo > hi {
            None
        } else {
            Some((lo, hi))
        }
    }

    /// Diagonal-only perturbation b_n +/- (|a_{n-1} - 1| + |a_n - 1|). The
    /// two signs bracket the original operator in quadratic-form order.
    pub fn sandwich(&self, sign: Sign) -> Perturbation {
        let mut b = self.b.clone();
        for (&n, &an) in &self.a {
            let c = sign.factor() * (an - 1.0).abs();
            // bond n touches the diagonal at sites n and n+1
            *b.entry(n).or_insert(0.0) += c;
            *b.entry(n + 1).or_insert(0.0) += c;
        }
        b.retain(|_, v| *v != 0.0);
        Perturbation {
            kind: self.kind,
            a: BTreeMap::new(),
            b,
        }
    }

    /// b -> -b. The spectrum of the flipped operator is the negated, reversed
    /// spectrum of the original.
    pub fn flipped(&self) -> Perturbation {
        Perturbation {
            kind: self.kind,
            a: self.a.clone(),
            b: self.b.iter().map(|(&n, &v)| (n, -v)).collect(),
        }
    }

    /// Diagonal scaled by lambda, off-diagonal untouched.
    pub fn with_coupling(&self, lambda: f64) -> Perturbation {
        let mut out = self.clone();
        out.b = self.b.iter().map(|(&n, &v)| (n, lambda * v)).collect();
        out.b.retain(|_, v| *v != 0.0);
        out
    }

    fn window_floor(&self) -> Option<i64> {
        match self.kind {
            LineKind::HalfLine => Some(1),
            LineKind::WholeLine => None,
        }
    }

    /// Finite symmetric truncation with a hard cutoff at the window ends.
    /// Errors when the window misses part of the support (strict mode).
    pub fn truncated(&self, window: Window) -> Result<Tridiagonal> {
        self.check_window(window)?;
        if let Some((lo, hi)) = self.support() {
            if lo < window.lo || hi > window.hi {
                return Err(Error::Input(format!(
                    "window [{}, {}] does not cover the support [{lo}, {hi}]",
                    window.lo, window.hi
                )));
            }
        }
        Ok(self.assemble(window))
    }

    /// Like `truncated`, but extends the window to cover the support instead
    /// of failing; returns whether it had to extend.
    pub fn truncated_covering(&self, window: Window) -> Result<(Tridiagonal, bool)> {
        self.check_window(window)?;
        let mut w = window;
        let mut extended = false;
        if let Some((lo, hi)) = self.support() {
            if lo < w.lo {
                w.lo = lo;
                extended = true;
            }
            if hi > w.hi {
                w.hi = hi;
                extended = true;
            }
        }
        if let Some(floor) = self.window_floor() {
            w.lo = w.lo.max(floor);
        }
        Ok((self.assemble(w), extended))
    }

    fn check_window(&self, window: Window) -> Result<()> {
        if window.lo > window.hi {
            return Err(Error::Input(format!(
                "empty window [{}, {}]",
                window.lo, window.hi
            )));
        }
        if window.len() < 2 {
            return Err(Error::Input("window must span at least 2 sites".into()));
        }
        if let Some(floor) = self.window_floor() {
            if window.lo < floor {
                return Err(Error::Input(format!(
                    "half-line window must start at site >= 1, got {}",
                    window.lo
                )));
            }
        }
        Ok(())
    }

    fn assemble(&self, window: Window) -> Tridiagonal {
        let n = window.len();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n - 1);
        for site in window.lo..=window.hi {
            diag.push(self.b(site));
            if site < window.hi {
                off.push(self.a(site));
            }
        }
        Tridiagonal {
            lo: window.lo,
            diag,
            off,
        }
    }
}

/// Inclusive range of chain sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        Window { lo, hi }
    }

    pub fn len(&self) -> usize {
        if self.lo > self.hi {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Symmetric tridiagonal matrix over a contiguous window of sites.
/// `off[k]` couples sites `lo + k` and `lo + k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lo: i64,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn window(&self) -> Window {
        Window::new(self.lo, self.lo + self.diag.len() as i64 - 1)
    }

    /// Matrix entry addressed by site labels.
    pub fn entry_at_sites(&self, n: i64, m: i64) -> f64 {
        let w = self.window();
        assert!(n >= w.lo && n <= w.hi && m >= w.lo && m <= w.hi);
        let i = (n - self.lo) as usize;
        let j = (m - self.lo) as usize;
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> SymMatrix {
        let n = self.dim();
        SymMatrix::from_fn(n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i.abs_diff(j) == 1 {
                self.off[i.min(j)]
            } else {
                0.0
            }
        })
    }
}

/// Essential-spectrum band [-half_width, half_width] plus the margin below
/// which an eigenvalue is numerically indistinguishable from the band edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub half_width: f64,
    pub delta_edge: f64,
}

impl Band {
    pub const DEFAULT_DELTA_EDGE: f64 = 1e-8;

    /// Band of the free chain operator: [-2, 2].
    pub fn chain() -> Self {
        Band {
            half_width: 2.0,
            delta_edge: Self::DEFAULT_DELTA_EDGE,
        }
    }

    /// Band of the free nu-dimensional lattice operator: [-2 nu, 2 nu],
    /// with the edge margin scaled by nu.
    pub fn lattice(nu: usize) -> Self {
        Band {
            half_width: 2.0 * nu as f64,
            delta_edge: Self::DEFAULT_DELTA_EDGE * nu as f64,
        }
    }

    pub fn with_delta_edge(mut self, delta: f64) -> Self {
        assert!(delta > 0.0);
        self.delta_edge = delta;
        self
    }
}

/// Window-growth schedule for converging truncated eigenvalues. The hard
/// cutoff makes every round a compression of the next, so eigenvalues
/// approach their limits monotonically from inside the band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPlan {
    /// Margin (in sites) added beyond the support for the first round, and
    /// minimum total size of the first window.
    pub initial: usize,
    /// Multiplicative window growth per round, > 1.
    pub growth: f64,
    /// Absolute eigenvalue increment below which a round counts as converged.
    pub tolerance: f64,
    /// Hard cap on the window size in sites.
    pub max_size: usize,
}

impl Default for TruncationPlan {
    fn default() -> Self {
        TruncationPlan {
            initial: 128,
            growth: 1.5,
            tolerance: 1e-10,
            max_size: 1 << 20,
        }
    }
}

impl TruncationPlan {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        assert!(tol > 0.0);
        self.tolerance = tol;
        self
    }

    pub fn with_max_size(mut self, max: usize) -> Self {
        self.max_size = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial == 0 || self.initial > self.max_size {
            return Err(Error::Input(format!(
                "initial window {} must be in 1..=max ({})",
                self.initial, self.max_size
            )));
        }
        if !(self.growth > 1.0) {
            return Err(Error::Input("growth factor must exceed 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Input("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// A lattice site, one coordinate per axis.
pub type Site = Vec<i64>;

/// Unordered pair of adjacent lattice sites, stored with the smaller site
/// first so bonds have one canonical key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bond(pub Site, pub Site);

impl Bond {
    pub fn new(x: Site, y: Site) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Input("bond endpoints have mixed dimensions".into()));
        }
        let dist: i64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        if dist != 1 {
            return Err(Error::Input(format!(
                "bond endpoints {x:?}, {y:?} are not nearest neighbors"
            )));
        }
        if x <= y {
            Ok(Bond(x, y))
        } else {
            Ok(Bond(y, x))
        }
    }
}

impl fmt::Display for Bond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}-{:?}", self.0, self.1)
    }
}

/// Finite-box tight-binding model on Z^nu: site potential V (free value 0)
/// and bond weights (free value 1), both finitely supported.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    nu: usize,
    box_ranges: Vec<(i64, i64)>,
    v: BTreeMap<Site, f64>,
    bonds: BTreeMap<Bond, f64>,
}

impl LatticeSpec {
    pub fn new(
        nu: usize,
        box_ranges: Vec<(i64, i64)>,
        v: impl IntoIterator<Item = (Site, f64)>,
        bonds: impl IntoIterator<Item = (Bond, f64)>,
    ) -> Result<Self> {
        if nu < 1 {
            return Err(Error::Input("lattice dimension nu must be >= 1".into()));
        }
        if box_ranges.len() != nu {
            return Err(Error::Input(format!(
                "box has {} axis ranges, expected nu = {nu}",
                box_ranges.len()
            )));
        }
        for &(lo, hi) in &box_ranges {
            if lo > hi {
                return Err(Error::Input(format!("empty box axis [{lo}, {hi}]")));
            }
        }
        let inside = |s: &Site| -> bool {
            s.iter()
                .zip(&box_ranges)
                .all(|(&c, &(lo, hi))| c >= lo && c <= hi)
        };
        let mut vm = BTreeMap::new();
        for (s, val) in v {
            if s.len() != nu {
                return Err(Error::Input(format!(
                    "site {s:?} has {} coordinates, expected {nu}",
                    s.len()
                )));
            }
            if !val.is_finite() {
                return Err(Error::Input(format!("V{s:?} = {val} is not finite")));
            }
            if !inside(&s) {
                return Err(Error::Input(format!("V support site {s:?} outside box")));
            }
            if val != 0.0 {
                vm.insert(s, val);
            }
        }
        let mut bm = BTreeMap::new();
        for (bond, w) in bonds {
            if bond.0.len() != nu {
                return Err(Error::Input(format!(
                    "bond {bond} lives in dimension {}, expected {nu}",
                    bond.0.len()
                )));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Input(format!(
                    "bond weight {bond} = {w} must be a nonnegative finite real"
                )));
            }
            if !inside(&bond.0) || !inside(&bond.1) {
                return Err(Error::BondOutsideBox(bond.to_string()));
            }
            if w != 1.0 {
                bm.insert(bond, w);
            }
        }
        Ok(LatticeSpec {
            nu,
            box_ranges,
            v: vm,
            bonds: bm,
        })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn box_ranges(&self) -> &[(i64, i64)] {
        &self.box_ranges
    }

    pub fn v(&self, site: &Site) -> f64 {
        *self.v.get(site).unwrap_or(&0.0)
    }

    pub fn v_entries(&self) -> impl Iterator<Item = (&Site, f64)> + '_ {
        self.v.iter().map(|(s, &v)| (s, v))
    }

    pub fn bond_entries(&self) -> impl Iterator<Item = (&Bond, f64)> + '_ {
        self.bonds.iter().map(|(b, &v)| (b, v))
    }

    pub fn bond_weight(&self, bond: &Bond) -> f64 {
        *self.bonds.get(bond).unwrap_or(&1.0)
    }

    pub fn total_sites(&self) -> usize {
        self.box_ranges
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as usize)
            .product()
    }

    /// Sites of the box in lexicographic order. This fixed enumeration is
    /// what ties matrix indices to sites everywhere.
    pub fn sites(&self) -> Vec<Site> {
        let mut out = Vec::with_capacity(self.total_sites());
        let mut cur: Site = self.box_ranges.iter().map(|&(lo, _)| lo).collect();
        loop {
            out.push(cur.clone());
            let mut axis = self.nu;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < self.box_ranges[axis].1 {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = self.box_ranges[axis].0;
            }
        }
    }

    /// Minimum distance from any support site (V != 0 or bond weight != 1)
    /// to the box boundary; `i64::MAX` for a free box.
    pub fn support_buffer(&self) -> i64 {
        let site_margin = |s: &Site| -> i64 {
            s.iter()
                .zip(&self.box_ranges)
                .map(|(&c, &(lo, hi))| (c - lo).min(hi - c))
                .min()
                .unwrap_or(i64::MAX)
        };
        let mut buffer = i64::MAX;
        for s in self.v.keys() {
            buffer = buffer.min(site_margin(s));
        }
        for bond in self.bonds.keys() {
            buffer = buffer.min(site_margin(&bond.0));
            buffer = buffer.min(site_margin(&bond.1));
        }
        buffer
    }

    /// H0(a_b) + V on the box with a hard cutoff at the boundary.
    pub fn matrix(&self) -> SymMatrix {
        let sites = self.sites();
        let index: BTreeMap<&Site, usize> =
            sites.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut m = SymMatrix::zeros(sites.len());
        for (i, s) in sites.iter().enumerate() {
            let v = self.v(s);
            if v != 0.0 {
                m.set(i, i, v);
            }
            for axis in 0..self.nu {
                let mut t = s.clone();
                t[axis] += 1;
                if let Some(&j) = index.get(&t) {
                    let bond = Bond::new(s.clone(), t.clone()).expect("neighbors");
                    m.set(i, j, self.bond_weight(&bond));
                }
            }
        }
        m
    }

    /// Diagonal corrections V(n) +/- sum over incident bonds of |a_b - 1|,
    /// bracketing H0(a_b) + V between free-bond operators.
    pub fn sandwich_potential(&self, sign: Sign) -> BTreeMap<Site, f64> {
        let mut out = self.v.clone();
        for (bond, &w) in &self.bonds {
            let c = sign.factor() * (w - 1.0).abs();
            *out.entry(bond.0.clone()).or_insert(0.0) += c;
            *out.entry(bond.1.clone()).or_insert(0.0) += c;
        }
        out.retain(|_, v| *v != 0.0);
        out
    }

    /// The same box with V replaced by the sandwich potential and all bonds
    /// free.
    pub fn sandwiched(&self, sign: Sign) -> LatticeSpec {
        LatticeSpec {
            nu: self.nu,
            box_ranges: self.box_ranges.clone(),
            v: self.sandwich_potential(sign),
            bonds: BTreeMap::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_transcribes_entries() {
        // half-line, b_1 = 2, window {1,2,3} -> [[2,1,0],[1,0,1],[0,1,0]]
        let p = Perturbation::half_line([], [(1, 2.0)]).unwrap();
        let t = p.truncated(Window::new(1, 3)).unwrap();
        assert_eq!(t.diag, vec![2.0, 0.0, 0.0]);
        assert_eq!(t.off, vec![1.0, 1.0]);
        assert_eq!(t.entry_at_sites(1, 1), 2.0);
        assert_eq!(t.entry_at_sites(1, 2), 1.0);
        assert_eq!(t.entry_at_sites(1, 3), 0.0);
    }

    #[test]
    fn off_diagonal_bond_lands_between_its_sites() {
        // whole-line a_0 = 2 couples sites 0 and 1
        let p = Perturbation::whole_line([(0, 2.0)], []).unwrap();
        let t = p.truncated(Window::new(-2, 3)).unwrap();
        assert_eq!(t.entry_at_sites(0, 1), 2.0);
        for n in -2..3 {
            if n != 0 {
                assert_eq!(t.entry_at_sites(n, n + 1), 1.0);
            }
        }
    }

    #[test]
    fn free_truncation_matches_chebyshev_eigenvalues() {
        use crate::dense::dense_eigs_oracle;
        use std::f64::consts::PI;
        let p = Perturbation::free(LineKind::WholeLine);
        let t = p.truncated(Window::new(-49, 50)).unwrap();
        let n = 100;
        let dense = dense_eigs_oracle(&t.to_dense()).unwrap();
        let mut expect: Vec<f64> = (1..=n)
            .map(|j| 2.0 * (j as f64 * PI / (n as f64 + 1.0)).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (got, want) in dense.iter().zip(&expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn sandwich_spreads_bond_defects() {
        let p = Perturbation::whole_line([(0, 2.0)], []).unwrap();
        let plus = p.sandwich(Sign::Plus);
        assert_eq!(plus.b(0), 1.0);
        assert_eq!(plus.b(1), 1.0);
        assert_eq!(plus.b(2), 0.0);
        assert!(plus.is_diagonal());

        let q = Perturbation::whole_line([(0, 0.5), (1, 1.5)], [(1, 1.0)]).unwrap();
        let minus = q.sandwich(Sign::Minus);
        assert_eq!(minus.b(0), -0.5);
        assert_eq!(minus.b(1), 0.0);
        assert_eq!(minus.b(2), -0.5);

        // a == 1 leaves any b unchanged
        let r = Perturbation::whole_line([], [(3, -0.7)]).unwrap();
        assert_eq!(r.sandwich(Sign::Plus), r);
        assert_eq!(r.sandwich(Sign::Minus), r);
    }

    #[test]
    fn flip_negates_diagonal_only() {
        let p = Perturbation::whole_line([(2, 1.3)], [(0, 1.5)]).unwrap();
        let f = p.flipped();
        assert_eq!(f.b(0), -1.5);
        assert_eq!(f.a(2), 1.3);
        assert_eq!(f.flipped(), p);
        let free = Perturbation::free(LineKind::WholeLine);
        assert_eq!(free.flipped(), free);
    }

    #[test]
    fn strict_window_must_cover_support() {
        let p = Perturbation::whole_line([], [(10, 1.0)]).unwrap();
        assert!(p.truncated(Window::new(-5, 5)).is_err());
        let (t, extended) = p.truncated_covering(Window::new(-5, 5)).unwrap();
        assert!(extended);
        assert_eq!(t.window(), Window::new(-5, 10));
    }

    #[test]
    fn lattice_nu1_matches_chain_truncation() {
        let spec = LatticeSpec::new(
            1,
            vec![(-3, 3)],
            [(vec![0], 1.5), (vec![2], -0.5)],
            [(Bond::new(vec![0], vec![1]).unwrap(), 2.0)],
        )
        .unwrap();
        let chain = Perturbation::whole_line([(0, 2.0)], [(0, 1.5), (2, -0.5)]).unwrap();
        let t = chain.truncated(Window::new(-3, 3)).unwrap().to_dense();
        let m = spec.matrix();
        assert_eq!(m.dim(), t.dim());
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                assert_eq!(m.get(i, j), t.get(i, j));
            }
        }
    }

    #[test]
    fn lattice_adjacency_row_sums() {
        let spec = LatticeSpec::new(2, vec![(0, 2), (0, 2)], [], []).unwrap();
        let m = spec.matrix();
        assert_eq!(m.dim(), 9);
        let mut counts = BTreeMap::new();
        for i in 0..9 {
            let deg: f64 = (0..9).filter(|&j| j != i).map(|j| m.get(i, j)).sum();
            *counts.entry(deg as i64).or_insert(0) += 1;
        }
        // corners have 2 neighbors, edges 3, the center 4
        assert_eq!(counts.get(&2), Some(&4));
        assert_eq!(counts.get(&3), Some(&4));
        assert_eq!(counts.get(&4), Some(&1));
    }

    #[test]
    fn bond_outside_box_rejected() {
        let err = LatticeSpec::new(
            2,
            vec![(0, 2), (0, 2)],
            [],
            [(Bond::new(vec![2, 2], vec![3, 2]).unwrap(), 0.5)],
        );
        assert!(matches!(err, Err(Error::BondOutsideBox(_))));
    }

    #[test]
    fn support_buffer_measures_distance_to_boundary() {
        let spec = LatticeSpec::new(2, vec![(-10, 10), (-10, 10)], [(vec![1, -2], 3.0)], [])
            .unwrap();
        assert_eq!(spec.support_buffer(), 8);
    }
}
