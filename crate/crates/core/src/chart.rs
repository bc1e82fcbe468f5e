//! Single-chart description of the base manifold and seeded sampling of it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, Scope};
use crate::Error;

/// Attempts per sample before rejection sampling gives up.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
}

/// Region `lhs < rhs` (or `lhs > rhs`) removed from the sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub lhs: Expr,
    pub cmp: Comparison,
    pub rhs: Expr,
}

impl Exclusion {
    pub fn contains(&self, x: &[f64]) -> bool {
        let (Ok(l), Ok(r)) = (self.lhs.eval::<f64>(x), self.rhs.eval::<f64>(x)) else {
            // Points where the inequality cannot be evaluated are excluded too.
            return true;
        };
        match self.cmp {
            Comparison::Less => l < r,
            Comparison::Greater => l > r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    coord_names: Vec<String>,
    domain: Vec<(f64, f64)>,
    constants: Vec<(String, f64)>,
    excluded: Vec<Exclusion>,
}

impl Chart {
    pub fn new(coord_names: Vec<String>, domain: Vec<(f64, f64)>) -> Result<Self, Error> {
        if coord_names.is_empty() || coord_names.len() != domain.len() {
            return Err(Error::InvalidChart(format!(
                "{} coordinates but {} domain intervals",
                coord_names.len(),
                domain.len()
            )));
        }
        for (name, (lo, hi)) in coord_names.iter().zip(&domain) {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidChart(format!(
                    "empty or non-finite domain [{lo}, {hi}] for {name}"
                )));
            }
        }
        for (i, name) in coord_names.iter().enumerate() {
            if coord_names[..i].contains(name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate {name}")));
            }
        }
        Ok(Chart {
            coord_names,
            domain,
            constants: Vec::new(),
            excluded: Vec::new(),
        })
    }

    pub fn with_constants(mut self, constants: Vec<(String, f64)>) -> Self {
        self.constants = constants;
        self
    }

    pub fn with_exclusions(mut self, excluded: Vec<Exclusion>) -> Self {
        self.excluded = excluded;
        self
    }

    pub fn dim(&self) -> usize {
        self.coord_names.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn constants(&self) -> &[(String, f64)] {
        &self.constants
    }

    pub fn exclusions(&self) -> &[Exclusion] {
        &self.excluded
    }

    /// Scope for component expressions: the coordinates plus bound constants.
    pub fn scope(&self) -> Scope {
        Scope::new(self.coord_names.clone(), self.constants.clone())
    }

    /// Scope for Finsler functions: coordinates followed by velocities `d<coord>`.
    pub fn tangent_scope(&self) -> Scope {
        let mut vars = self.coord_names.clone();
        vars.extend(self.coord_names.iter().map(|c| format!("d{c}")));
        Scope::new(vars, self.constants.clone())
    }

    /// Same coordinate names in the same order.
    pub fn same_coordinates(&self, other: &Chart) -> bool {
        self.coord_names == other.coord_names
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.domain)
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
            && !self.excluded.iter().any(|e| e.contains(x))
    }

    /// `count` points drawn uniformly from the domain box minus exclusions.
    /// Point `i` depends only on `(seed, i)`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, Error> {
        self.sample_points_within(count, seed, 0.0)
    }

    /// Like [`Chart::sample_points`] but draws from the box shrunk by
    /// `margin` (a fraction of each interval width) on every side.
    pub fn sample_points_within(
        &self,
        count: usize,
        seed: u64,
        margin: f64,
    ) -> Result<Vec<Vec<f64>>, Error> {
        (0..count)
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                for _ in 0..MAX_REJECTIONS {
                    let x: Vec<f64> = self
                        .domain
                        .iter()
                        .map(|&(lo, hi)| {
                            let w = hi - lo;
                            let (a, b) = (lo + margin * w, hi - margin * w);
                            if a >= b {
                                0.5 * (lo + hi)
                            } else {
                                rng.gen_range(a..=b)
                            }
                        })
                        .collect();
                    if !self.excluded.iter().any(|e| e.contains(&x)) {
                        return Ok(x);
                    }
                }
                Err(Error::Sampling(format!(
                    "no admissible point after {MAX_REJECTIONS} draws"
                )))
            })
            .collect()
    }
}

/// Independent deterministic RNG stream for `(seed, index)`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
