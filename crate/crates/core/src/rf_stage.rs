//! Analog RF beamformer built from quantized angle pairs.
//!
//! The `M` grid pairs `(lambda_x[m], lambda_y[n])` give mutually orthogonal
//! steering vectors. Each group gets the pairs whose cells touch its own
//! angular support and no other group's, so `F` has constant-modulus entries
//! and orthonormal columns by construction.

use std::collections::BTreeSet;
use std::ops::Range;

use thiserror::Error;

use crate::channel::{angle_to_gamma, steering_vector, ArrayGeometry, ChannelError, GroupAngularSpec};
use crate::numerics::{norm, CMatrix, CVector, NumericsError};

/// Samples per axis when mapping an angle box into direction-cosine space.
pub const COVERAGE_LATTICE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RfError {
    #[error("group {group}: {available} qualifying angle pairs, {requested} requested")]
    InsufficientBeams {
        group: usize,
        requested: usize,
        available: usize,
    },
    #[error("angle pair ({m}, {n}) selected by more than one group")]
    Overlap { m: usize, n: usize },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedGrid {
    pub lambda_x: Vec<f64>,
    pub lambda_y: Vec<f64>,
}

/// `lambda[m] = -1 + (2m - 1) / n` for `m = 1..=n`.
fn grid_axis(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|m| -1.0 + (2 * m - 1) as f64 / n as f64)
        .collect()
}

pub fn build_grid(geom: ArrayGeometry) -> QuantizedGrid {
    QuantizedGrid {
        lambda_x: grid_axis(geom.m_x),
        lambda_y: grid_axis(geom.m_y),
    }
}

/// A grid point, with zero-based indices along x and y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPair {
    pub m: usize,
    pub n: usize,
    pub lambda_x: f64,
    pub lambda_y: f64,
}

impl GridPair {
    pub fn new(geom: ArrayGeometry, m: usize, n: usize) -> Self {
        let grid_x = -1.0 + (2 * m + 1) as f64 / geom.m_x as f64;
        let grid_y = -1.0 + (2 * n + 1) as f64 / geom.m_y as f64;
        Self {
            m,
            n,
            lambda_x: grid_x,
            lambda_y: grid_y,
        }
    }
}

/// Angular support of one group: its EAoD and AAoD intervals in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AodSupport {
    pub group: usize,
    pub eaod_deg: (f64, f64),
    pub aaod_deg: (f64, f64),
}

impl AodSupport {
    pub fn from_group(group: usize, spec: &GroupAngularSpec) -> Self {
        Self {
            group,
            eaod_deg: spec.eaod_interval_deg(),
            aaod_deg: spec.aaod_interval_deg(),
        }
    }

    pub fn mean_gamma(&self) -> (f64, f64) {
        angle_to_gamma(
            0.5 * (self.eaod_deg.0 + self.eaod_deg.1),
            0.5 * (self.aaod_deg.0 + self.aaod_deg.1),
        )
    }

    fn validate(&self) -> Result<(), RfError> {
        if !(self.eaod_deg.0 <= self.eaod_deg.1 && self.aaod_deg.0 <= self.aaod_deg.1) {
            return Err(RfError::Config(format!(
                "empty angular interval for group {}",
                self.group
            )));
        }
        Ok(())
    }

    /// Direction cosines of an `n x n` lattice over the angle box.
    fn gamma_samples(&self, n: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let at = move |(lo, hi): (f64, f64), i: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| angle_to_gamma(at(self.eaod_deg, i), at(self.aaod_deg, j)))
        })
    }
}

/// Cells along one axis whose closed interval contains `gamma`.
fn axis_cells(gamma: f64, n: usize) -> impl Iterator<Item = usize> {
    const EDGE: f64 = 1e-12;
    let pos = (gamma + 1.0) * n as f64 / 2.0;
    let lo = (pos - EDGE).floor().max(0.0) as usize;
    let hi = ((pos + EDGE).floor() as usize).min(n - 1);
    lo.min(n - 1)..=hi
}

/// Grid cells hit by the support's image, sampled on a `lattice x lattice`
/// grid of angles.
pub fn coverage_with_lattice(
    support: &AodSupport,
    geom: ArrayGeometry,
    lattice: usize,
) -> BTreeSet<(usize, usize)> {
    let mut cells = BTreeSet::new();
    for (gx, gy) in support.gamma_samples(lattice) {
        for m in axis_cells(gx, geom.m_x) {
            for n in axis_cells(gy, geom.m_y) {
                cells.insert((m, n));
            }
        }
    }
    cells
}

pub fn coverage(support: &AodSupport, geom: ArrayGeometry) -> BTreeSet<(usize, usize)> {
    coverage_with_lattice(support, geom, COVERAGE_LATTICE)
}

/// Whether the pair's cell `[lx +- 1/m_x] x [ly +- 1/m_y]` meets the
/// support's image in direction-cosine space.
pub fn pair_covers(pair: &GridPair, support: &AodSupport, geom: ArrayGeometry) -> bool {
    let half_x = 1.0 / geom.m_x as f64 + 1e-12;
    let half_y = 1.0 / geom.m_y as f64 + 1e-12;
    support
        .gamma_samples(COVERAGE_LATTICE)
        .any(|(gx, gy)| (gx - pair.lambda_x).abs() <= half_x && (gy - pair.lambda_y).abs() <= half_y)
}

/// Picks `n_rf_per_group[g]` pairs for each group that cover group `g` and
/// no other group. Surplus pairs are trimmed by distance to the group's mean
/// direction, ties by grid index.
pub fn select_angle_pairs(
    supports: &[AodSupport],
    geom: ArrayGeometry,
    n_rf_per_group: &[usize],
) -> Result<Vec<Vec<GridPair>>, RfError> {
    if supports.len() != n_rf_per_group.len() {
        return Err(RfError::Config(format!(
            "{} supports but {} RF chain counts",
            supports.len(),
            n_rf_per_group.len()
        )));
    }
    for s in supports {
        s.validate()?;
    }
    let covered: Vec<_> = supports.iter().map(|s| coverage(s, geom)).collect();

    let mut selected = Vec::with_capacity(supports.len());
    for (g, support) in supports.iter().enumerate() {
        let requested = n_rf_per_group[g];
        if requested == 0 {
            return Err(RfError::Config(format!("group {g} needs at least one RF chain")));
        }
        let (cx, cy) = support.mean_gamma();
        let mut candidates: Vec<(f64, GridPair)> = covered[g]
            .iter()
            .filter(|cell| {
                covered
                    .iter()
                    .enumerate()
                    .all(|(t, other)| t == g || !other.contains(cell))
            })
            .map(|&(m, n)| {
                let p = GridPair::new(geom, m, n);
                ((p.lambda_x - cx).hypot(p.lambda_y - cy), p)
            })
            .collect();
        if candidates.len() < requested {
            return Err(RfError::InsufficientBeams {
                group: g,
                requested,
                available: candidates.len(),
            });
        }
        candidates.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| (a.1.m, a.1.n).cmp(&(b.1.m, b.1.n)))
        });
        selected.push(candidates.into_iter().take(requested).map(|(_, p)| p).collect());
    }
    Ok(selected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfBeamformer {
    /// `M x N_RF`.
    pub f: CMatrix,
    pub pairs: Vec<Vec<GridPair>>,
    /// Columns of `f` owned by each group.
    pub columns: Vec<Range<usize>>,
}

impl RfBeamformer {
    pub fn n_rf(&self) -> usize {
        self.f.cols()
    }

    pub fn n_rf_per_group(&self) -> Vec<usize> {
        self.columns.iter().map(Range::len).collect()
    }
}

/// Stacks `F = [F_1 ... F_G]`, one steering vector per selected pair.
pub fn build_rf_beamformer(
    selected: &[Vec<GridPair>],
    geom: ArrayGeometry,
) -> Result<RfBeamformer, RfError> {
    let mut seen = BTreeSet::new();
    let mut columns = Vec::with_capacity(selected.len());
    let mut vectors: Vec<CVector> = Vec::new();
    for pairs in selected {
        let start = vectors.len();
        for p in pairs {
            if !seen.insert((p.m, p.n)) {
                return Err(RfError::Overlap { m: p.m, n: p.n });
            }
            vectors.push(steering_vector(geom, p.lambda_x, p.lambda_y)?);
        }
        columns.push(start..vectors.len());
    }
    let f = CMatrix::from_columns(&vectors)?;
    Ok(RfBeamformer {
        f,
        pairs: selected.to_vec(),
        columns,
    })
}

/// Full RF stage for a list of groups.
pub fn design_rf_beamformer(
    groups: &[GroupAngularSpec],
    geom: ArrayGeometry,
    n_rf_per_group: &[usize],
) -> Result<RfBeamformer, RfError> {
    let supports: Vec<_> = groups
        .iter()
        .enumerate()
        .map(|(g, s)| AodSupport::from_group(g, s))
        .collect();
    let selected = select_angle_pairs(&supports, geom, n_rf_per_group)?;
    build_rf_beamformer(&selected, geom)
}

/// `||Phi_t f||`, the energy a beam leaks into another group's paths.
pub fn leakage(phi_t: &CMatrix, f_col: &CVector) -> Result<f64, RfError> {
    Ok(norm(&phi_t.mul_vec(f_col.as_slice())?))
}
