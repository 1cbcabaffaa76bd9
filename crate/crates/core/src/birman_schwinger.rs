//! Free resolvents and Birman-Schwinger-type kernels, plus the structural
//! checks built on them: the fixed-point identity, monotonicity of partial
//! eigenvalue sums in the kernel decay parameter, and entrywise resolvent
//! domination on the half line.

use std::collections::BTreeMap;

use crate::dense::SymMatrix;
use crate::error::{Error, Result};
use crate::operator::{Band, LineKind, Perturbation, Sign, TruncationPlan};

/// Energy parametrization beta = mu + 1/mu outside the band, with the
/// Wronskian w = 1/mu - mu = sqrt(beta^2 - 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParameter {
    pub beta: f64,
    pub mu: f64,
    pub w: f64,
}

impl BandParameter {
    /// From an energy beta > 2.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 2.0) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "band parameter requires beta > 2, got {beta}"
            )));
        }
        let root = (beta * beta - 4.0).sqrt();
        // mu = (beta - root)/2 rewritten to avoid cancellation near beta = 2
        let mu = 2.0 / (beta + root);
        Ok(BandParameter { beta, mu, w: root })
    }

    /// From the decay rate mu in (0, 1).
    pub fn from_mu(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::Domain(format!(
                "band parameter requires mu in (0, 1), got {mu}"
            )));
        }
        let beta = mu + 1.0 / mu;
        Ok(BandParameter {
            beta,
            mu,
            w: 1.0 / mu - mu,
        })
    }

    /// Exponential decay rate t with mu = e^{-t} (beta = 2 cosh t).
    pub fn decay_rate(&self) -> f64 {
        (self.beta / 2.0).acosh()
    }
}

/// Entry (n, m) of (beta - H0)^{-1} for the free operator on the given line,
/// beta > 2. The half-line form is evaluated through sinh to stay accurate
/// as beta approaches the band edge; the beta = 2 limit itself is
/// `half_line_resolvent_edge`.
pub fn free_resolvent_entry(line: LineKind, beta: f64, n: i64, m: i64) -> Result<f64> {
    let bp = BandParameter::from_beta(beta)?;
    let t = bp.decay_rate();
    match line {
        LineKind::WholeLine => Ok((-t * (n - m).abs() as f64).exp() / (2.0 * t.sinh())),
        LineKind::HalfLine => {
            if n < 1 || m < 1 {
                return Err(Error::Domain(format!(
                    "half-line resolvent needs sites >= 1, got ({n}, {m})"
                )));
            }
            // sinh(min t) e^{-max t} / sinh t, rearranged so neither factor
            // overflows for distant sites and nothing cancels as beta -> 2
            let d = (n - m).abs() as f64;
            let s = (n + m) as f64;
            Ok(((-d * t).exp_m1() - (-s * t).exp_m1()) / (2.0 * t.sinh()))
        }
    }
}

/// beta -> 2 limit of the half-line resolvent: exactly min(n, m).
pub fn half_line_resolvent_edge(n: i64, m: i64) -> Result<f64> {
    if n < 1 || m < 1 {
        return Err(Error::Domain(format!(
            "half-line resolvent needs sites >= 1, got ({n}, {m})"
        )));
    }
    Ok(n.min(m) as f64)
}

/// Which Birman-Schwinger-type kernel a matrix represents.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// (L_mu)_{nm} = sqrt(b_n) mu^{|n-m|} sqrt(b_m)
    LMu { mu: f64 },
    /// Per-bond decay rates instead of one mu.
    LGeneral,
    /// B^{1/2} (beta - H0)^{-1} B^{1/2} on the given line.
    KBeta { line: LineKind, beta: f64 },
    /// Half-line edge kernel min(n, m) sqrt(b_n b_m).
    K2Bargmann,
}

/// Dense symmetric kernel over the support sites of a nonnegative diagonal
/// perturbation. Off-support rows of the infinite kernel vanish, so this
/// finite section carries the whole nonzero spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct BsKernel {
    pub kind: KernelKind,
    pub sites: Vec<i64>,
    pub matrix: SymMatrix,
}

fn support_sites(b: &BTreeMap<i64, f64>) -> Result<Vec<i64>> {
    let mut sites = Vec::new();
    for (&n, &v) in b {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Input(format!(
                "kernel weight b[{n}] = {v} must be nonnegative"
            )));
        }
        if v > 0.0 {
            sites.push(n);
        }
    }
    Ok(sites)
}

impl BsKernel {
    pub fn l_mu(b: &BTreeMap<i64, f64>, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Domain(format!("L_mu requires mu in (0, 1], got {mu}")));
        }
        let sites = support_sites(b)?;
        let matrix = SymMatrix::from_fn(sites.len(), |i, j| {
            if i == j {
                b[&sites[i]]
            } else {
                (b[&sites[i]] * b[&sites[j]]).sqrt()
                    * mu.powi((sites[i] - sites[j]).unsigned_abs() as i32)
            }
        });
        Ok(BsKernel {
            kind: KernelKind::LMu { mu },
            sites,
            matrix,
        })
    }

    /// Generalized kernel with one decay factor per bond: the (k, l) entry
    /// carries the product of `mu_of_bond(j)` over the bonds j between the
    /// two sites.
    pub fn l_general(b: &BTreeMap<i64, f64>, mu_of_bond: impl Fn(i64) -> f64) -> Result<Self> {
        let sites = support_sites(b)?;
        let matrix = SymMatrix::from_fn(sites.len(), |i, j| {
            if i == j {
                b[&sites[i]]
            } else {
                let (lo, hi) = (sites[i].min(sites[j]), sites[i].max(sites[j]));
                let decay: f64 = (lo..hi).map(&mu_of_bond).product();
                (b[&sites[i]] * b[&sites[j]]).sqrt() * decay
            }
        });
        Ok(BsKernel {
            kind: KernelKind::LGeneral,
            sites,
            matrix,
        })
    }

    pub fn k_beta(line: LineKind, b: &BTreeMap<i64, f64>, beta: f64) -> Result<Self> {
        let sites = support_sites(b)?;
        if line == LineKind::HalfLine {
            if let Some(&n) = sites.first() {
                if n < 1 {
                    return Err(Error::Domain(format!(
                        "half-line kernel weights start at site 1, got {n}"
                    )));
                }
            }
        }
        let mut entries = Vec::new();
        for i in 0..sites.len() {
            for j in 0..=i {
                entries.push(free_resolvent_entry(line, beta, sites[i], sites[j])?);
            }
        }
        let mut it = entries.into_iter();
        let matrix = SymMatrix::from_fn(sites.len(), |i, j| {
            let g = it.next().expect("entry");
            if i == j {
                b[&sites[i]] * g
            } else {
                (b[&sites[i]] * b[&sites[j]]).sqrt() * g
            }
        });
        Ok(BsKernel {
            kind: KernelKind::KBeta { line, beta },
            sites,
            matrix,
        })
    }

    /// Half-line edge kernel. The trace reproduces sum_n n b_n with the same
    /// arithmetic, term by term.
    pub fn k2_bargmann(b: &BTreeMap<i64, f64>) -> Result<Self> {
        let sites = support_sites(b)?;
        if let Some(&n) = sites.first() {
            if n < 1 {
                return Err(Error::Domain(format!(
                    "half-line kernel weights start at site 1, got {n}"
                )));
            }
        }
        let matrix = SymMatrix::from_fn(sites.len(), |i, j| {
            let g = sites[i].min(sites[j]) as f64;
            if i == j {
                g * b[&sites[i]]
            } else {
                g * (b[&sites[i]] * b[&sites[j]]).sqrt()
            }
        });
        Ok(BsKernel {
            kind: KernelKind::K2Bargmann,
            sites,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eigenvalues_desc(&self) -> Result<Vec<f64>> {
        let mut v = self.matrix.eigenvalues()?;
        v.reverse();
        Ok(v)
    }
}

/// S_n^{+/-}: sum of the n largest (Plus) or smallest (Minus) eigenvalues.
pub fn partial_sums(m: &SymMatrix, n: usize, sign: Sign) -> Result<f64> {
    let dim = m.dim();
    if n < 1 || n > dim {
        return Err(Error::IndexRange {
            index: n,
            available: dim,
        });
    }
    let ev = m.eigenvalues()?;
    Ok(match sign {
        Sign::Plus => ev[dim - n..].iter().sum(),
        Sign::Minus => ev[..n].iter().sum(),
    })
}

/// Minimum forward difference of S_n^+(L_mu) over all n and all adjacent
/// pairs of the ascending mu grid. Nonnegative when the partial sums are
/// monotone in mu, which is the structural claim under test.
pub fn check_monotone_s(b: &BTreeMap<i64, f64>, mu_grid: &[f64]) -> Result<f64> {
    if mu_grid.len() < 2 {
        return Err(Error::Input("mu grid needs at least two points".into()));
    }
    for pair in mu_grid.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::Input("mu grid must be strictly ascending".into()));
        }
    }
    let mut prefix_sums = Vec::with_capacity(mu_grid.len());
    let mut dim = 0;
    for &mu in mu_grid {
        let kernel = BsKernel::l_mu(b, mu)?;
        dim = kernel.dim();
        let desc = kernel.eigenvalues_desc()?;
        let sums: Vec<f64> = desc
            .iter()
            .scan(0.0, |acc, &e| {
                *acc += e;
                Some(*acc)
            })
            .collect();
        prefix_sums.push(sums);
    }
    if dim == 0 {
        return Err(Error::Input("kernel support is empty".into()));
    }
    let mut min_diff = f64::INFINITY;
    for pair in prefix_sums.windows(2) {
        for n in 0..dim {
            min_diff = min_diff.min(pair[1][n] - pair[0][n]);
        }
    }
    Ok(min_diff)
}

/// Fixed-point residuals: for each eigenvalue E_j of W0 + lambda B above the
/// band, the j-th largest eigenvalue of the kernel at energy E_j must be
/// exactly 1/lambda. Returns the maximum of |lambda * e_j(K_{E_j}) - 1|.
pub fn check_fixed_point(b: &BTreeMap<i64, f64>, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("coupling must be positive, got {lambda}")));
    }
    let sites = support_sites(b)?;
    if sites.is_empty() {
        return Err(Error::NoEigenvalues);
    }
    let coupled: BTreeMap<i64, f64> = b
        .iter()
        .filter(|&(_, &v)| v > 0.0)
        .map(|(&n, &v)| (n, lambda * v))
        .collect();
    let spec = Perturbation::whole_line([], coupled)?;
    // kernel residuals should be dominated by the kernel eigensolve, not by
    // the energy error, so the spectrum is driven tighter than usual
    let plan = TruncationPlan::default().with_tolerance(1e-11);
    let report = crate::eigen::discrete_spectrum(&spec, &plan, &Band::chain())?;
    if report.e_plus.is_empty() {
        return Err(Error::NoEigenvalues);
    }
    let mut worst = 0.0f64;
    for (j, &energy) in report.e_plus.iter().enumerate() {
        let kernel = BsKernel::k_beta(LineKind::WholeLine, b, energy)?;
        let desc = kernel.eigenvalues_desc()?;
        let e_j = *desc.get(j).ok_or(Error::IndexRange {
            index: j,
            available: desc.len(),
        })?;
        worst = worst.max((lambda * e_j - 1.0).abs());
    }
    Ok(worst)
}

/// Cholesky-style solve of the SPD tridiagonal system with constant diagonal
/// structure (diag, off); `rhs` is overwritten by the solution.
fn solve_spd_tridiagonal(diag: &[f64], off: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    debug_assert_eq!(off.len() + 1, n);
    debug_assert_eq!(rhs.len(), n);
    // LDL^T factorization
    let mut dd = vec![0.0; n];
    let mut l = vec![0.0; n.saturating_sub(1)];
    dd[0] = diag[0];
    for i in 0..n - 1 {
        l[i] = off[i] / dd[i];
        dd[i + 1] = diag[i + 1] - off[i] * l[i];
    }
    for i in 1..n {
        rhs[i] -= l[i - 1] * rhs[i - 1];
    }
    for i in 0..n {
        rhs[i] /= dd[i];
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= l[i] * rhs[i + 1];
    }
}

/// Entrywise gap between the free half-line resolvent and the resolvent of
/// the weakened-bond operator (all a_n in (0, 1]), minimized over the probe
/// window [1, probe_hi]^2. Both inverses come from direct solves on a window
/// padded until the boundary contribution is below 1e-12.
pub fn resolvent_domination_check(
    a: &BTreeMap<i64, f64>,
    beta: f64,
    probe_hi: i64,
) -> Result<f64> {
    let bp = BandParameter::from_beta(beta)?;
    if probe_hi < 1 {
        return Err(Error::Input("probe window must reach site 1".into()));
    }
    let mut support_hi = 1i64;
    for (&n, &v) in a {
        if n < 1 {
            return Err(Error::Input(format!("half-line bond index {n} < 1")));
        }
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::Domain(format!(
                "domination is only claimed for a_n in (0, 1], got a[{n}] = {v}"
            )));
        }
        support_hi = support_hi.max(n + 1);
    }
    let t = bp.decay_rate();
    let margin = (34.0 / t).ceil() as i64 + 16;
    let m_hi = probe_hi.max(support_hi) + margin;
    let n = m_hi as usize;

    let diag = vec![beta; n];
    let off_free = vec![-1.0; n - 1];
    let off_pert: Vec<f64> = (1..m_hi)
        .map(|site| -a.get(&site).copied().unwrap_or(1.0))
        .collect();

    let k = probe_hi as usize;
    let mut min_gap = f64::INFINITY;
    for col in 0..k {
        let mut free_col = vec![0.0; n];
        free_col[col] = 1.0;
        solve_spd_tridiagonal(&diag, &off_free, &mut free_col);
        let mut pert_col = vec![0.0; n];
        pert_col[col] = 1.0;
        solve_spd_tridiagonal(&diag, &off_pert, &mut pert_col);
        for row in 0..k {
            min_gap = min_gap.min(free_col[row] - pert_col[row]);
        }
    }
    Ok(min_gap)
}
