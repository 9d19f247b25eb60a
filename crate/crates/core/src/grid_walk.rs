//! The lazy Metropolis walk on `B_n^d` governed by `f^K`.
//!
//! Each step picks one of the `2d` directions uniformly. A direction leading out
//! of the box is a loop. Otherwise the walk moves with probability
//! `(1/2) f(y)^K / (f(x)^K + f(y)^K)`, computed as a logistic of the log ratio.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;

use crate::diagnostics::ExactChain;
use crate::governing::{lattice_log_f, GoverningFunction, GridPoint, Lattice};
use crate::math::logistic;
use crate::seed::{rng_from_seed, ChainRng};
use crate::{Error, Result};

/// Default cap on the number of states enumerated by [`GridChain::exact_kernel`].
pub const DEFAULT_KERNEL_CAP: usize = 20_000;
/// Lattices up to this size get their `log f` values cached.
pub const TABLE_CAP: usize = 1 << 22;

/// A density on a fixed lattice `B_n^d`, with an optional cache of `log f`.
///
/// Cheap to clone; replicas of a schedule share one landscape.
#[derive(Debug, Clone)]
pub struct GridLandscape {
    density: GoverningFunction,
    lattice: Lattice,
    table: Option<Arc<Vec<f64>>>,
}

impl GridLandscape {
    pub fn new(density: GoverningFunction, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid resolution must be positive".into()));
        }
        let lattice = Lattice::new(density.dim(), n);
        let table = match lattice.len() {
            Some(len) if len <= TABLE_CAP => Some(Arc::new(lattice_log_f(density.as_ref(), lattice)?)),
            _ => None,
        };
        Ok(Self {
            density,
            lattice,
            table,
        })
    }

    pub fn density(&self) -> &GoverningFunction {
        &self.density
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n
    }

    pub fn d(&self) -> usize {
        self.lattice.d
    }

    /// `log f` at integer coordinates; `-inf` outside the density's domain.
    pub fn log_f_at(&self, coords: &[usize]) -> f64 {
        match &self.table {
            Some(t) => t[self.lattice.index(coords)],
            None => {
                let n = self.lattice.n as f64;
                let x: Vec<f64> = coords.iter().map(|&c| c as f64 / n).collect();
                self.density.log_f(&x).unwrap_or(f64::NEG_INFINITY)
            }
        }
    }
}

/// Optional record of visited states, kept in a ring buffer.
#[derive(Debug, Clone)]
pub struct StepTrace {
    every: u64,
    capacity: usize,
    entries: VecDeque<(u64, Vec<usize>)>,
}

impl StepTrace {
    /// Records the state after every `every`-th step, keeping the latest `capacity`.
    pub fn new(every: u64, capacity: usize) -> Result<Self> {
        if every == 0 || capacity == 0 {
            return Err(Error::InvalidParameter("trace interval and capacity must be positive".into()));
        }
        Ok(Self {
            every,
            capacity,
            entries: VecDeque::new(),
        })
    }

    fn record(&mut self, step: u64, state: &[usize]) {
        if !step.is_multiple_of(self.every) {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((step, state.to_vec()));
    }

    pub fn entries(&self) -> impl Iterator<Item = &(u64, Vec<usize>)> {
        self.entries.iter()
    }

    /// CSV with a `step,coord_0,...` header.
    pub fn to_csv(&self, d: usize) -> String {
        let mut out = String::from("step");
        for i in 0..d {
            out.push_str(&format!(",coord_{i}"));
        }
        out.push('\n');
        for (step, coords) in &self.entries {
            out.push_str(&step.to_string());
            for c in coords {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// An exact kernel together with the lattice point of each state.
#[derive(Debug, Clone)]
pub struct GridKernel {
    pub chain: ExactChain,
    pub states: Vec<GridPoint>,
}

/// A walk on `B_n^d` governed by `f^K`.
#[derive(Debug, Clone)]
pub struct GridChain {
    landscape: GridLandscape,
    exponent: f64,
    state: Vec<usize>,
    current: f64,
    rng: ChainRng,
    steps: u64,
    trace: Option<StepTrace>,
}

fn check_exponent(exponent: f64) -> Result<()> {
    if !exponent.is_finite() || exponent < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "exponent must be finite and non-negative, got {exponent}"
        )));
    }
    Ok(())
}

impl GridChain {
    pub fn new(landscape: GridLandscape, exponent: f64, start: &GridPoint, seed: u64) -> Result<Self> {
        check_exponent(exponent)?;
        if start.dim() != landscape.d() || start.resolution() != landscape.n() {
            return Err(Error::InvalidParameter(format!(
                "start point lives on B_{}^{}, walk on B_{}^{}",
                start.resolution(),
                start.dim(),
                landscape.n(),
                landscape.d()
            )));
        }
        let current = landscape.log_f_at(start.coords());
        if current == f64::NEG_INFINITY {
            return Err(Error::OutsideDomain(start.to_unit()));
        }
        Ok(Self {
            landscape,
            exponent,
            state: start.coords().to_vec(),
            current,
            rng: rng_from_seed(seed),
            steps: 0,
            trace: None,
        })
    }

    /// Convenience constructor building a fresh landscape.
    pub fn from_density(
        density: GoverningFunction,
        n: usize,
        exponent: f64,
        start: &GridPoint,
        seed: u64,
    ) -> Result<Self> {
        Self::new(GridLandscape::new(density, n)?, exponent, start, seed)
    }

    pub fn with_trace(mut self, trace: StepTrace) -> Self {
        let mut trace = trace;
        trace.record(self.steps, &self.state);
        self.trace = Some(trace);
        self
    }

    pub fn trace(&self) -> Option<&StepTrace> {
        self.trace.as_ref()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn set_exponent(&mut self, exponent: f64) -> Result<()> {
        check_exponent(exponent)?;
        self.exponent = exponent;
        Ok(())
    }

    pub fn landscape(&self) -> &GridLandscape {
        &self.landscape
    }

    /// Moves the chain onto another lattice, rounding the state to the nearest point.
    /// The generator and step counter carry over.
    pub fn switch_landscape(&mut self, landscape: GridLandscape) -> Result<()> {
        if landscape.d() != self.landscape.d() {
            return Err(Error::DimensionMismatch {
                expected: self.landscape.d(),
                got: landscape.d(),
            });
        }
        let point = self.state().rescale(landscape.n())?;
        let current = landscape.log_f_at(point.coords());
        if current == f64::NEG_INFINITY {
            return Err(Error::OutsideDomain(point.to_unit()));
        }
        self.state = point.coords().to_vec();
        self.current = current;
        self.landscape = landscape;
        Ok(())
    }

    pub fn state(&self) -> GridPoint {
        GridPoint::new(self.state.clone(), self.landscape.n()).expect("state stays in the box")
    }

    pub fn coords(&self) -> &[usize] {
        &self.state
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// `(1/2) sigma(K (log f(to) - log f(from)))` for a lattice neighbour `to`;
    /// 0 when `to` lies outside the box or the domain.
    pub fn acceptance_probability(&self, from: &GridPoint, to: &[i64]) -> Result<f64> {
        let n = self.landscape.n() as i64;
        let from_i: Vec<i64> = from.coords().iter().map(|&c| c as i64).collect();
        let adjacent = to.len() == from_i.len()
            && from_i.iter().zip(to).map(|(a, b)| (a - b).abs()).sum::<i64>() == 1;
        if !adjacent || from.resolution() != self.landscape.n() {
            return Err(Error::NotAdjacent {
                from: from_i,
                to: to.to_vec(),
            });
        }
        if to.iter().any(|&c| c < 0 || c > n) {
            return Ok(0.0);
        }
        let to_u: Vec<usize> = to.iter().map(|&c| c as usize).collect();
        let (lf_from, lf_to) = (
            self.landscape.log_f_at(from.coords()),
            self.landscape.log_f_at(&to_u),
        );
        if lf_to == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok(0.5 * logistic(self.exponent * (lf_to - lf_from)))
    }

    /// One step; always consumes exactly two uniforms.
    pub fn step(&mut self) -> &[usize] {
        let d = self.state.len();
        let u_dir: f64 = self.rng.gen();
        let u_acc: f64 = self.rng.gen();
        let dir = ((u_dir * (2 * d) as f64) as usize).min(2 * d - 1);
        let (axis, up) = (dir / 2, dir % 2 == 1);
        let c = self.state[axis];
        let blocked = if up { c == self.landscape.n() } else { c == 0 };
        if !blocked {
            let next = if up { c + 1 } else { c - 1 };
            self.state[axis] = next;
            let lf = self.landscape.log_f_at(&self.state);
            let accept = lf != f64::NEG_INFINITY
                && u_acc < 0.5 * logistic(self.exponent * (lf - self.current));
            if accept {
                self.current = lf;
            } else {
                self.state[axis] = c;
            }
        }
        self.steps += 1;
        if let Some(trace) = self.trace.as_mut() {
            trace.record(self.steps, &self.state);
        }
        &self.state
    }

    pub fn run(&mut self, steps: u64) -> GridPoint {
        for _ in 0..steps {
            self.step();
        }
        self.state()
    }

    /// Enumerates the step law over all lattice points inside the density's domain.
    pub fn exact_kernel(&self, cap: usize) -> Result<GridKernel> {
        exact_grid_kernel(&self.landscape, self.exponent, cap)
    }
}

/// Exact kernel of the walk governed by `f^K` on a landscape.
pub fn exact_grid_kernel(landscape: &GridLandscape, exponent: f64, cap: usize) -> Result<GridKernel> {
    check_exponent(exponent)?;
    let lattice = landscape.lattice();
    let len = lattice.len().filter(|&l| l <= cap).ok_or(Error::StateSpaceTooLarge {
        states: lattice.len().unwrap_or(usize::MAX),
        cap,
    })?;
    let values: Vec<f64> = (0..len).map(|i| landscape.log_f_at(&lattice.coords(i))).collect();
    let mut index = vec![usize::MAX; len];
    let mut states = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if v.is_finite() {
            index[i] = states.len();
            states.push(lattice.point(i));
        }
    }
    if states.is_empty() {
        return Err(Error::InvalidParameter("no lattice point lies in the domain".into()));
    }
    let d = lattice.d;
    let step_weight = 1.0 / (2 * d) as f64;
    let mut rows = Vec::with_capacity(states.len());
    let mut log_weights = Vec::with_capacity(states.len());
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        let coords = lattice.coords(i);
        let mut row = Vec::with_capacity(2 * d + 1);
        let mut moved = 0.0;
        for axis in 0..d {
            for up in [false, true] {
                let c = coords[axis];
                if (up && c == lattice.n) || (!up && c == 0) {
                    continue;
                }
                let mut to = coords.clone();
                to[axis] = if up { c + 1 } else { c - 1 };
                let j = lattice.index(&to);
                if !values[j].is_finite() {
                    continue;
                }
                let p = step_weight * 0.5 * logistic(exponent * (values[j] - v));
                moved += p;
                row.push((index[j], p));
            }
        }
        row.push((index[i], 1.0 - moved));
        rows.push(row);
        log_weights.push(exponent * v);
    }
    let chain = ExactChain::from_rows_with_log_weights(rows, &log_weights)?;
    Ok(GridKernel { chain, states })
}

/// `pi ∝ f^K` over the lattice points of the domain, in lattice order.
pub fn grid_stationary(landscape: &GridLandscape, exponent: f64) -> Result<Vec<f64>> {
    let lattice = landscape.lattice();
    let len = lattice.len().ok_or(Error::StateSpaceTooLarge {
        states: usize::MAX,
        cap: usize::MAX,
    })?;
    let w: Vec<f64> = (0..len)
        .map(|i| exponent * landscape.log_f_at(&lattice.coords(i)))
        .filter(|v| v.is_finite())
        .collect();
    Ok(crate::math::normalize_log_weights(&w))
}
