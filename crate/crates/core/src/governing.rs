//! Governing densities.
//!
//! Every density is exposed only through `log f`. Walks need nothing more than
//! `K * (log f(y) - log f(x))`, and `f^K` itself overflows long before the
//! exponents used here (`K = n = 100` with `f(c) ~ 7`).

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;

use crate::math::{binary_entropy, ln_binomial, normalize_log_weights, xlogx};
use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Slack allowed when checking that a continuous point lies in a closed domain.
const DOMAIN_EPS: f64 = 1e-12;

/// A positive density on (a subset of) `[0,1]^d`, evaluated in log domain.
///
/// Implementations must be deterministic and return a finite value for every
/// point of their domain; points outside the domain yield [`Error::OutsideDomain`].
pub trait Density: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn log_f(&self, x: &[f64]) -> Result<f64>;
}

/// Shared handle to a density; densities are immutable once built.
pub type GoverningFunction = Arc<dyn Density>;

fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

fn check_unit_box(x: &[f64]) -> Result<()> {
    if x
        .iter()
        .any(|&v| !v.is_finite() || !(-DOMAIN_EPS..=1.0 + DOMAIN_EPS).contains(&v))
    {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    Ok(())
}

/// A point of the box `B_n^d = {0, 1/n, ..., 1}^d`, stored as integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPoint {
    coords: Vec<usize>,
    n: usize,
}

impl GridPoint {
    pub fn new(coords: Vec<usize>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid resolution must be positive".into()));
        }
        if coords.is_empty() {
            return Err(Error::InvalidParameter("grid point needs at least one coordinate".into()));
        }
        if let Some(&c) = coords.iter().find(|&&c| c > n) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {c} outside 0..={n}"
            )));
        }
        Ok(Self { coords, n })
    }

    pub fn origin(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![0; d], n)
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The continuous point `coords / n` in `[0,1]^d`.
    pub fn to_unit(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.coords.iter().map(|&c| c as f64 / n).collect()
    }

    /// Nearest point of `B_m^d` to this point (coordinate rescaling with rounding).
    pub fn rescale(&self, m: usize) -> Result<Self> {
        let coords = self
            .coords
            .iter()
            .map(|&c| ((c as f64) * (m as f64) / (self.n as f64)).round() as usize)
            .map(|c| c.min(m))
            .collect();
        Self::new(coords, m)
    }
}

/// Index arithmetic for the full lattice `B_n^d` (first coordinate fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    pub d: usize,
    pub n: usize,
}

impl Lattice {
    pub fn new(d: usize, n: usize) -> Self {
        Self { d, n }
    }

    /// Number of lattice points, `None` on overflow.
    pub fn len(&self) -> Option<usize> {
        (self.n + 1).checked_pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        let side = self.n + 1;
        coords.iter().rev().fold(0, |acc, &c| acc * side + c)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let side = self.n + 1;
        (0..self.d)
            .map(|_| {
                let c = index % side;
                index /= side;
                c
            })
            .collect()
    }

    pub fn point(&self, index: usize) -> GridPoint {
        GridPoint {
            coords: self.coords(index),
            n: self.n,
        }
    }
}

/// `log f` at a lattice point: evaluates the density at `p / n`.
pub fn log_f(density: &dyn Density, p: &GridPoint) -> Result<f64> {
    density.log_f(&p.to_unit())
}

/// `log f` over the whole lattice; points outside the density's domain map to `-inf`.
pub fn lattice_log_f(density: &dyn Density, lattice: Lattice) -> Result<Vec<f64>> {
    if density.dim() != lattice.d {
        return Err(Error::DimensionMismatch {
            expected: density.dim(),
            got: lattice.d,
        });
    }
    let len = lattice.len().ok_or(Error::StateSpaceTooLarge {
        states: usize::MAX,
        cap: usize::MAX,
    })?;
    (0..len)
        .map(|i| match log_f(density, &lattice.point(i)) {
            Ok(v) => Ok(v),
            Err(Error::OutsideDomain(_)) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        })
        .collect()
}

/// `log(max f / min f)` over the lattice points inside the domain, i.e. `log f(c)`
/// after rescaling `f` so that its minimum is 1.
pub fn log_peak_ratio(density: &dyn Density, lattice: Lattice) -> Result<f64> {
    let values = lattice_log_f(density, lattice)?;
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return Err(Error::InvalidParameter("density has no point in the lattice".into()));
    }
    Ok(hi - lo)
}

/// Mean-field Ising projection: `log f(x) = -x log x - (1-x) log(1-x) + a x - b x (1-x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingDensity {
    pub alpha: f64,
    pub beta: f64,
}

impl IsingDensity {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha < 0.0 || beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Ising parameters must be finite and non-negative (alpha={alpha}, beta={beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    #[inline]
    pub fn log_f_scalar(&self, x: f64) -> f64 {
        binary_entropy(x) + self.alpha * x - self.beta * x * (1.0 - x)
    }
}

impl Density for IsingDensity {
    fn dim(&self) -> usize {
        1
    }

    fn log_f(&self, x: &[f64]) -> Result<f64> {
        check_dim(1, x)?;
        check_unit_box(x)?;
        Ok(self.log_f_scalar(x[0].clamp(0.0, 1.0)))
    }
}

/// How the last Potts fraction is derived from the `q - 1` free coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LastFraction {
    /// `x_q = 1 - sum z_i`.
    #[default]
    Complement,
    /// `x_q = sum z_i`, as literally printed in the source derivation.
    Sum,
}

/// Mean-field `q`-state Potts projection on the simplex `{z in [0,1]^(q-1) : sum z <= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsDensity {
    q: usize,
    alpha: Vec<f64>,
    beta: Vec<Vec<f64>>,
    last: LastFraction,
}

impl PottsDensity {
    /// `beta` is a `q x q` array; only entries with `i < j` are read.
    pub fn new(alpha: Vec<f64>, beta: Vec<Vec<f64>>, last: LastFraction) -> Result<Self> {
        let q = alpha.len();
        if q < 2 {
            return Err(Error::InvalidParameter("Potts model needs q >= 2".into()));
        }
        if beta.len() != q || beta.iter().any(|row| row.len() != q) {
            return Err(Error::InvalidParameter(format!("beta must be {q}x{q}")));
        }
        let bad = |v: &f64| !v.is_finite() || *v < 0.0;
        if alpha.iter().any(bad) || beta.iter().flatten().any(bad) {
            return Err(Error::InvalidParameter(
                "Potts parameters must be finite and non-negative".into(),
            ));
        }
        Ok(Self { q, alpha, beta, last })
    }

    pub fn q(&self) -> usize {
        self.q
    }
}

impl Density for PottsDensity {
    fn dim(&self) -> usize {
        self.q - 1
    }

    fn log_f(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.q - 1, z)?;
        check_unit_box(z)?;
        let total: f64 = z.iter().sum();
        if total > 1.0 + DOMAIN_EPS {
            return Err(Error::OutsideDomain(z.to_vec()));
        }
        let mut x: Vec<f64> = z.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        x.push(match self.last {
            LastFraction::Complement => (1.0 - total).max(0.0),
            LastFraction::Sum => total.min(1.0),
        });
        let mut value = 0.0;
        for i in 0..self.q {
            value += -xlogx(x[i]) + self.alpha[i] * x[i];
            for j in (i + 1)..self.q {
                value -= self.beta[i][j] * x[i] * x[j];
            }
        }
        Ok(value)
    }
}

/// The continuum limit of the two-topic LDA posterior projected onto the
/// topic-1 fractions `x_dj in [0, c_dj]`.
///
/// Coordinates are the cells with `c_dj > 0`, in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaToyDensity {
    cells: Vec<(usize, usize, f64)>,
    row_mass: Vec<f64>,
    col_mass: Vec<f64>,
}

impl LdaToyDensity {
    pub fn new(c: &[Vec<f64>]) -> Result<Self> {
        let docs = c.len();
        let vocab = c.first().map_or(0, Vec::len);
        if docs == 0 || vocab == 0 || c.iter().any(|row| row.len() != vocab) {
            return Err(Error::InvalidParameter("c must be a non-empty D x V matrix".into()));
        }
        if c.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("token fractions must be non-negative".into()));
        }
        let total: f64 = c.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "token fractions must sum to 1 (got {total})"
            )));
        }
        let mut cells = Vec::new();
        let mut row_mass = vec![0.0; docs];
        let mut col_mass = vec![0.0; vocab];
        for (d, row) in c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                row_mass[d] += v;
                col_mass[j] += v;
                if v > 0.0 {
                    cells.push((d, j, v));
                }
            }
        }
        Ok(Self {
            cells,
            row_mass,
            col_mass,
        })
    }

    /// `(document, word, c_dj)` for each coordinate.
    pub fn cells(&self) -> &[(usize, usize, f64)] {
        &self.cells
    }

    /// The point `c - x`, i.e. the same state with the two topics swapped.
    pub fn swap_topics(&self, x: &[f64]) -> Vec<f64> {
        self.cells.iter().zip(x).map(|(&(_, _, c), &v)| c - v).collect()
    }
}

impl Density for LdaToyDensity {
    fn dim(&self) -> usize {
        self.cells.len()
    }

    fn log_f(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.cells.len(), x)?;
        let mut row = vec![0.0; self.row_mass.len()];
        let mut col = vec![0.0; self.col_mass.len()];
        let mut value = 0.0;
        let mut total = 0.0;
        for (&(d, j, c), &v) in self.cells.iter().zip(x) {
            if !v.is_finite() || v < -DOMAIN_EPS || v > c + DOMAIN_EPS {
                return Err(Error::OutsideDomain(x.to_vec()));
            }
            let v = v.clamp(0.0, c);
            row[d] += v;
            col[j] += v;
            total += v;
            value += c * binary_entropy(v / c);
        }
        value += binary_entropy(total.clamp(0.0, 1.0));
        for (mass, sum) in self.row_mass.iter().zip(&row) {
            if *mass > 0.0 {
                value -= mass * binary_entropy((sum / mass).clamp(0.0, 1.0));
            }
        }
        for (mass, sum) in self.col_mass.iter().zip(&col) {
            if *mass > 0.0 {
                value -= mass * binary_entropy((sum / mass).clamp(0.0, 1.0));
            }
        }
        Ok(value)
    }
}

/// Log values on an `N_1 x ... x N_d` grid spanning `[0,1]^d`, looked up at the
/// nearest grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl TabulatedDensity {
    /// `values` are row-major: the last axis varies fastest.
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidParameter("grid dimensions must be positive".into()));
        }
        let expected: usize = dims.iter().product();
        if values.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} grid values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid value #{i} is not finite")));
        }
        Ok(Self { dims, values })
    }

    /// Parses the text format: a `dims N1 ... Nd` header then whitespace separated values.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `dims` header".into(),
        })?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("dims") {
            return Err(Error::Parse {
                line,
                msg: "header must start with `dims`".into(),
            });
        }
        let dims = fields
            .map(|f| {
                f.parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad dimension `{f}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::new();
        for (line, l) in lines {
            for f in l.split_whitespace() {
                let v: f64 = f.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("bad value `{f}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("non-finite value `{f}`"),
                    });
                }
                values.push(v);
            }
        }
        Self::new(dims, values)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn nearest_index(&self, x: &[f64]) -> usize {
        self.dims.iter().zip(x).fold(0, |acc, (&n, &v)| {
            let i = (v.clamp(0.0, 1.0) * (n - 1) as f64).round() as usize;
            acc * n + i.min(n - 1)
        })
    }
}

impl Density for TabulatedDensity {
    fn dim(&self) -> usize {
        self.dims.len()
    }

    fn log_f(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dims.len(), x)?;
        check_unit_box(x)?;
        Ok(self.values[self.nearest_index(x)])
    }
}

/// Isotropic log-quadratic bump `log f(x) = -a |x - c|^2`; unimodal with its
/// maximum at `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub curvature: f64,
}

impl GaussianBump {
    pub fn new(center: Vec<f64>, curvature: f64) -> Result<Self> {
        if center.is_empty() || !curvature.is_finite() || curvature <= 0.0 {
            return Err(Error::InvalidParameter("bump needs a centre and positive curvature".into()));
        }
        Ok(Self { center, curvature })
    }
}

impl Density for GaussianBump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn log_f(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.center.len(), x)?;
        check_unit_box(x)?;
        let r2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(-self.curvature * r2)
    }
}

/// Density from an arbitrary log-evaluator. `-inf` marks points outside the domain.
pub struct FnDensity {
    dim: usize,
    eval: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl FnDensity {
    pub fn new(dim: usize, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Box::new(eval),
        }
    }
}

impl fmt::Debug for FnDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnDensity").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl Density for FnDensity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_f(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        check_unit_box(x)?;
        let v = (self.eval)(x);
        if v == f64::NEG_INFINITY {
            Err(Error::OutsideDomain(x.to_vec()))
        } else if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("log density is {v} at {x:?}")))
        }
    }
}

/// `max(g, M)` with `M` given as `log M`.
#[derive(Debug, Clone)]
pub struct FlooredDensity {
    inner: GoverningFunction,
    log_floor: f64,
}

impl FlooredDensity {
    pub fn log_floor(&self) -> f64 {
        self.log_floor
    }
}

impl Density for FlooredDensity {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn log_f(&self, x: &[f64]) -> Result<f64> {
        Ok(self.inner.log_f(x)?.max(self.log_floor))
    }
}

/// Replaces `g` by `max(g, M)`; keeps thin peaks reachable from the flat floor.
pub fn floor_density(density: GoverningFunction, log_floor: f64) -> Result<GoverningFunction> {
    if !log_floor.is_finite() {
        return Err(Error::InvalidParameter("floor must be a finite log value".into()));
    }
    Ok(Arc::new(FlooredDensity {
        inner: density,
        log_floor,
    }))
}

/// Draws `sample_size` uniform points of the domain and returns the
/// `rank`-th largest `log g` among them (rank 1 is the maximum).
pub fn quantile_floor(
    density: &dyn Density,
    sample_size: usize,
    rank: usize,
    seed: u64,
) -> Result<f64> {
    if rank == 0 || rank > sample_size {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} outside 1..={sample_size}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let d = density.dim();
    let mut values = Vec::with_capacity(sample_size);
    let max_attempts = sample_size.saturating_mul(1000);
    let mut attempts = 0usize;
    let mut x = vec![0.0; d];
    while values.len() < sample_size {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InvalidParameter(
                "domain too small for uniform rejection sampling".into(),
            ));
        }
        x.iter_mut().for_each(|v| *v = rng.gen::<f64>());
        match density.log_f(&x) {
            Ok(v) => values.push(v),
            Err(Error::OutsideDomain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let (_, kth, _) = values.select_nth_unstable_by(rank - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}

/// Exact lumped Curie-Weiss measure on `{0, 1/n, ..., 1}`:
/// `mu(k) ∝ C(n,k) exp(n (a x - b x (1-x)))`, `x = k / n`.
///
/// Uses the same sign of the interaction as [`IsingDensity`], so that it is the
/// measure `f^n` approximates.
pub fn lumped_ising_reference(n: usize, alpha: f64, beta: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let nf = n as f64;
    let log_w: Vec<f64> = (0..=n)
        .map(|k| {
            let x = k as f64 / nf;
            ln_binomial(n as u64, k as u64) + nf * (alpha * x - beta * x * (1.0 - x))
        })
        .collect();
    Ok(normalize_log_weights(&log_w))
}

/// The stationary law `pi ∝ f^K` on `B_n^1` of an Ising density.
pub fn ising_power_law(density: &IsingDensity, n: usize, exponent: f64) -> Vec<f64> {
    let log_w: Vec<f64> = (0..=n)
        .map(|k| exponent * density.log_f_scalar(k as f64 / n as f64))
        .collect();
    normalize_log_weights(&log_w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::tv_distance;
    use proptest::prelude::*;

    fn ising(a: f64, b: f64) -> IsingDensity {
        IsingDensity::new(a, b).unwrap()
    }

    #[test]
    fn ising_hand_values() {
        let f = ising(0.0, 0.0);
        assert!((f.log_f(&[0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(f.log_f(&[0.0]).unwrap(), 0.0);
        assert_eq!(f.log_f(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn ising_rejects_outside_and_bad_params() {
        assert!(matches!(ising(0.0, 1.0).log_f(&[1.5]), Err(Error::OutsideDomain(_))));
        assert!(matches!(ising(0.0, 1.0).log_f(&[0.1, 0.2]), Err(Error::DimensionMismatch { .. })));
        assert!(IsingDensity::new(-1.0, 0.0).is_err());
        assert!(IsingDensity::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn ising_half_five_peak_ratio() {
        // max f / min f for (0.5, 5) on a fine lattice. The interior minimum sits
        // near x = 0.416 and the maximum near x = 0.9958.
        let lattice = Lattice::new(1, 200_000);
        let ratio = log_peak_ratio(&ising(0.5, 5.0), lattice).unwrap().exp();
        assert!((ratio - 0.831_916_84f64.exp()).abs() < 1e-6, "ratio {ratio}");
    }

    #[test]
    fn log_domain_matches_direct_evaluation() {
        for &(a, b) in &[(0.0, 0.0), (0.5, 5.0), (0.2, 1.5)] {
            let f = ising(a, b);
            for k in 0..=50 {
                let x = k as f64 / 50.0;
                let direct = 1.0 / (x.powf(x) * (1.0 - x).powf(1.0 - x))
                    * (a * x - b * x * (1.0 - x)).exp();
                let via_log = f.log_f(&[x]).unwrap().exp();
                assert!((direct - via_log).abs() <= 1e-14 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn potts_reduces_to_ising() {
        for &(a, b) in &[(0.0, 0.0), (0.5, 5.0), (1.3, 2.2)] {
            let potts = PottsDensity::new(
                vec![a, 0.0],
                vec![vec![0.0, b], vec![b, 0.0]],
                LastFraction::Complement,
            )
            .unwrap();
            let f = ising(a, b);
            for k in 0..=40 {
                let x = [k as f64 / 40.0];
                assert!((potts.log_f(&x).unwrap() - f.log_f(&x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn potts_simplex_domain() {
        let p = PottsDensity::new(vec![0.0; 3], vec![vec![1.0; 3]; 3], LastFraction::Complement)
            .unwrap();
        assert!(p.log_f(&[0.3, 0.3]).is_ok());
        assert!(matches!(p.log_f(&[0.7, 0.6]), Err(Error::OutsideDomain(_))));
        // uniform fractions give log 3 minus the three pairwise couplings at 1/9
        let v = p.log_f(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((v - (3f64.ln() - 3.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn potts_last_fraction_conventions_differ() {
        let beta = vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let c = PottsDensity::new(vec![0.0; 3], beta.clone(), LastFraction::Complement).unwrap();
        let s = PottsDensity::new(vec![0.0; 3], beta, LastFraction::Sum).unwrap();
        let z = [0.1, 0.2];
        // Sum convention: x3 = 0.3
        let expected = -(xlogx(0.1) + xlogx(0.2) + xlogx(0.3)) - (0.02 + 0.03 + 0.06);
        assert!((s.log_f(&z).unwrap() - expected).abs() < 1e-14);
        assert!((c.log_f(&z).unwrap() - expected).abs() > 1e-3);
    }

    fn toy_c() -> Vec<Vec<f64>> {
        vec![
            vec![9.0 / 30.0, 1.0 / 30.0, 0.0],
            vec![0.0, 1.0 / 3.0, 0.0],
            vec![0.0, 0.0, 1.0 / 3.0],
        ]
    }

    #[test]
    fn lda_toy_modes_are_ordered() {
        let f = LdaToyDensity::new(&toy_c()).unwrap();
        assert_eq!(f.dim(), 4);
        let a = f.log_f(&[0.3, 1.0 / 30.0, 1.0 / 3.0, 0.0]).unwrap();
        let b = f.log_f(&[0.3, 0.0, 0.0, 1.0 / 3.0]).unwrap();
        let c = f.log_f(&[0.0, 1.0 / 30.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(a > b && b > c, "{a} {b} {c}");
        assert!(f.log_f(&[0.31, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn tabulated_parse_and_lookup() {
        let t = TabulatedDensity::parse("dims 2 3\n0 1 2\n3 4 5\n").unwrap();
        assert_eq!(t.log_f(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(t.log_f(&[1.0, 0.5]).unwrap(), 4.0);
        assert_eq!(t.log_f(&[0.2, 0.9]).unwrap(), 2.0);
        assert!(TabulatedDensity::parse("dims 2\n1 NaN\n").is_err());
        assert!(TabulatedDensity::parse("dims 2\n1 inf\n").is_err());
        assert!(TabulatedDensity::parse("dims 3\n1 2\n").is_err());
        assert!(TabulatedDensity::parse("size 2\n1 2\n").is_err());
    }

    fn tenths() -> GoverningFunction {
        let values = (1..=10).map(|i| (i as f64 / 10.0).ln()).collect();
        Arc::new(TabulatedDensity::new(vec![10], values).unwrap())
    }

    #[test]
    fn floor_below_min_is_identity() {
        let g = tenths();
        let floored = floor_density(g.clone(), 0.05f64.ln()).unwrap();
        for i in 0..10 {
            let x = [i as f64 / 9.0];
            assert_eq!(floored.log_f(&x).unwrap(), g.log_f(&x).unwrap());
        }
    }

    #[test]
    fn floor_pointwise_max() {
        let floored = floor_density(tenths(), 0.5f64.ln()).unwrap();
        let got: Vec<f64> = (0..10)
            .map(|i| floored.log_f(&[i as f64 / 9.0]).unwrap().exp())
            .collect();
        let expected = [0.5, 0.5, 0.5, 0.5, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_floor_cases() {
        let constant = FnDensity::new(2, |_| 1.25);
        assert_eq!(quantile_floor(&constant, 1000, 17, 3).unwrap(), 1.25);
        let linear = FnDensity::new(1, |x| x[0].ln());
        let m = quantile_floor(&linear, 100_000, 10_000, 11).unwrap();
        assert!((m - 0.9f64.ln()).abs() < 0.01, "{m}");
        assert!(quantile_floor(&linear, 10, 0, 1).is_err());
        assert!(quantile_floor(&linear, 10, 11, 1).is_err());
    }

    #[test]
    fn quantile_floor_respects_simplex() {
        let p = PottsDensity::new(vec![0.0; 3], vec![vec![0.0; 3]; 3], LastFraction::Complement)
            .unwrap();
        let top = quantile_floor(&p, 5000, 1, 5).unwrap();
        assert!(top <= 3f64.ln() + 1e-12);
    }

    #[test]
    fn lumped_reference_small_cases() {
        let one = lumped_ising_reference(1, 0.0, 0.0).unwrap();
        assert!((one[0] - 0.5).abs() < 1e-15 && (one[1] - 0.5).abs() < 1e-15);
        let two = lumped_ising_reference(2, 0.0, 0.0).unwrap();
        for (g, e) in two.iter().zip([0.25, 0.5, 0.25]) {
            assert!((g - e).abs() < 1e-15);
        }
        assert!(lumped_ising_reference(0, 0.0, 0.0).is_err());
    }

    #[test]
    fn lumped_reference_converges_to_power_law() {
        let f = ising(0.0, 1.0);
        let tv = |n: usize| {
            let mu = lumped_ising_reference(n, 0.0, 1.0).unwrap();
            tv_distance(&mu, &ising_power_law(&f, n, n as f64)).unwrap()
        };
        assert!(tv(200) < tv(50));
    }

    #[test]
    fn grid_point_rescale_rounds() {
        let p = GridPoint::new(vec![5, 12], 12).unwrap();
        assert_eq!(p.rescale(100).unwrap().coords(), &[42, 100]);
        assert!(GridPoint::new(vec![3], 2).is_err());
        let lattice = Lattice::new(3, 4);
        for i in 0..lattice.len().unwrap() {
            assert_eq!(lattice.index(&lattice.coords(i)), i);
        }
    }

    proptest! {
        #[test]
        fn ising_symmetric_without_field(beta in 0.0f64..10.0, k in 0usize..=64) {
            let f = ising(0.0, beta);
            let x = k as f64 / 64.0;
            prop_assert!((f.log_f(&[x]).unwrap() - f.log_f(&[1.0 - x]).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn lda_toy_swap_symmetry(u in proptest::collection::vec(0.0f64..=1.0, 4)) {
            let f = LdaToyDensity::new(&toy_c()).unwrap();
            let x: Vec<f64> = f.cells().iter().zip(&u).map(|(&(_, _, c), &t)| c * t).collect();
            let swapped = f.swap_topics(&x);
            prop_assert!((f.log_f(&x).unwrap() - f.log_f(&swapped).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn floor_is_monotone_and_keeps_argmax(log_m in -3.0f64..-0.11) {
            let g = tenths();
            let floored = floor_density(g.clone(), log_m).unwrap();
            let mut best = (0, f64::NEG_INFINITY);
            for i in 0..10 {
                let x = [i as f64 / 9.0];
                let (a, b) = (g.log_f(&x).unwrap(), floored.log_f(&x).unwrap());
                prop_assert!(b >= a);
                if b > best.1 { best = (i, b); }
            }
            prop_assert_eq!(best.0, 9);
        }
    }
}
