//! Geometric mmWave channel generation for a uniform rectangular array.
//!
//! A UE channel is a superposition of `L` paths, each a path gain times the
//! array phase response toward the path's departure angles. UEs in one group
//! share the group's path angles, so the group channel factors as
//! `H_g = Z_g * Phi_g` with `Z_g` the (path-loss scaled) gains and `Phi_g`
//! the `L x M` phase responses.
//!
//! Angles are taken in degrees at every public boundary.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::dbm_to_watts;
use crate::numerics::{kronecker, CMatrix, CVector, NumericsError, C64};

/// Inter-element spacing in wavelengths.
pub const ELEMENT_SPACING: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("direction cosine out of [-1, 1]: gamma_x={gamma_x}, gamma_y={gamma_y}")]
    Domain { gamma_x: f64, gamma_y: f64 },
    #[error("invalid array geometry: {0}")]
    Geometry(String),
    #[error("invalid group {index}: {reason}")]
    Group { index: usize, reason: String },
    #[error("invalid placement bounds: {0}")]
    Bounds(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// URA with `m_x * m_y` elements at half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub m_x: usize,
    pub m_y: usize,
}

impl ArrayGeometry {
    pub fn new(m_x: usize, m_y: usize) -> Result<Self, ChannelError> {
        let g = Self { m_x, m_y };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.m_x == 0 || self.m_y == 0 {
            return Err(ChannelError::Geometry(format!(
                "need at least one element per axis, got {}x{}",
                self.m_x, self.m_y
            )));
        }
        Ok(())
    }

    pub fn n_antennas(&self) -> usize {
        self.m_x * self.m_y
    }
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self { m_x: 16, m_y: 16 }
    }
}

/// Angular box of one UE group plus its UE count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupAngularSpec {
    pub mean_eaod_deg: f64,
    pub eaod_spread_deg: f64,
    pub mean_aaod_deg: f64,
    pub aaod_spread_deg: f64,
    pub ue_count: usize,
}

impl GroupAngularSpec {
    pub fn validate(&self, index: usize) -> Result<(), ChannelError> {
        let fail = |reason: String| Err(ChannelError::Group { index, reason });
        let values = [
            self.mean_eaod_deg,
            self.eaod_spread_deg,
            self.mean_aaod_deg,
            self.aaod_spread_deg,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return fail("non-finite angle".into());
        }
        if self.eaod_spread_deg <= 0.0 || self.aaod_spread_deg <= 0.0 {
            return fail("angular spreads must be positive".into());
        }
        if self.ue_count == 0 {
            return fail("group needs at least one UE".into());
        }
        let (lo, hi) = self.eaod_interval_deg();
        if lo <= 0.0 || hi >= 180.0 {
            return fail(format!("EAoD interval [{lo}, {hi}] leaves (0, 180)"));
        }
        Ok(())
    }

    pub fn eaod_interval_deg(&self) -> (f64, f64) {
        (
            self.mean_eaod_deg - self.eaod_spread_deg,
            self.mean_eaod_deg + self.eaod_spread_deg,
        )
    }

    pub fn aaod_interval_deg(&self) -> (f64, f64) {
        (
            self.mean_aaod_deg - self.aaod_spread_deg,
            self.mean_aaod_deg + self.aaod_spread_deg,
        )
    }

    pub fn contains(&self, eaod_deg: f64, aaod_deg: f64) -> bool {
        let (t0, t1) = self.eaod_interval_deg();
        let (p0, p1) = self.aaod_interval_deg();
        (t0..=t1).contains(&eaod_deg) && (p0..=p1).contains(&aaod_deg)
    }
}

/// Bounds for random UE drops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryBounds {
    pub min_horizontal_m: f64,
    pub max_horizontal_m: f64,
    pub bs_height_m: f64,
    pub min_ue_height_m: f64,
    pub max_ue_height_m: f64,
}

impl Default for GeometryBounds {
    fn default() -> Self {
        Self {
            min_horizontal_m: 10.0,
            max_horizontal_m: 100.0,
            bs_height_m: 10.0,
            min_ue_height_m: 1.5,
            max_ue_height_m: 2.5,
        }
    }
}

impl GeometryBounds {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let ok = self.min_horizontal_m >= 0.0
            && self.min_horizontal_m < self.max_horizontal_m
            && self.min_ue_height_m >= 0.0
            && self.min_ue_height_m < self.max_ue_height_m
            && self.bs_height_m >= 0.0
            && [
                self.min_horizontal_m,
                self.max_horizontal_m,
                self.bs_height_m,
                self.min_ue_height_m,
                self.max_ue_height_m,
            ]
            .iter()
            .all(|v| v.is_finite());
        if !ok {
            return Err(ChannelError::Bounds(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UePlacement {
    pub horizontal_m: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub distance_3d_m: f64,
}

impl UePlacement {
    pub fn new(horizontal_m: f64, bs_height_m: f64, ue_height_m: f64) -> Self {
        let dh = bs_height_m - ue_height_m;
        Self {
            horizontal_m,
            bs_height_m,
            ue_height_m,
            distance_3d_m: (horizontal_m * horizontal_m + dh * dh).sqrt(),
        }
    }
}

/// How `tau^-eta` enters the path gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathlossConvention {
    /// Amplitude scaled by `tau^-eta` (power by `tau^-2eta`).
    #[default]
    Amplitude,
    /// Power scaled by `tau^-eta`.
    Power,
}

impl PathlossConvention {
    pub fn amplitude_scale(self, distance_m: f64, exponent: f64) -> f64 {
        match self {
            Self::Amplitude => distance_m.powf(-exponent),
            Self::Power => distance_m.powf(-exponent / 2.0),
        }
    }
}

/// Everything `generate_channel` needs from the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub array: ArrayGeometry,
    pub groups: Vec<GroupAngularSpec>,
    pub n_paths: usize,
    pub pathloss_exponent: f64,
    pub convention: PathlossConvention,
}

impl ChannelModel {
    pub fn n_ues(&self) -> usize {
        self.groups.iter().map(|g| g.ue_count).sum()
    }

    /// Index range of each group's UEs (contiguous blocks).
    pub fn group_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.groups
            .iter()
            .map(|g| {
                let r = start..start + g.ue_count;
                start = r.end;
                r
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupChannel {
    /// `K_g x L` path gains, path loss included.
    pub gains: CMatrix,
    /// `L x M`, row `l` is the phase response of path `l`.
    pub phase_responses: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `K x M`, row `k` is `h_k^T`.
    pub h: CMatrix,
    pub per_group: Vec<GroupChannel>,
    /// Per UE, the `L` (EAoD, AAoD) pairs in degrees.
    pub path_angles: Vec<Vec<(f64, f64)>>,
}

/// `(sin t cos p, sin t sin p)` for EAoD `t` and AAoD `p` in degrees.
pub fn angle_to_gamma(eaod_deg: f64, aaod_deg: f64) -> (f64, f64) {
    let t = eaod_deg.to_radians();
    let p = aaod_deg.to_radians();
    (t.sin() * p.cos(), t.sin() * p.sin())
}

fn check_gamma(gamma_x: f64, gamma_y: f64) -> Result<(), ChannelError> {
    if !(-1.0..=1.0).contains(&gamma_x) || !(-1.0..=1.0).contains(&gamma_y) {
        return Err(ChannelError::Domain { gamma_x, gamma_y });
    }
    Ok(())
}

fn axis_response(n: usize, gamma: f64, sign: f64) -> CVector {
    CVector::from_vec_unchecked(
        (0..n)
            .map(|i| C64::from_polar(1.0, sign * 2.0 * PI * ELEMENT_SPACING * i as f64 * gamma))
            .collect(),
    )
}

/// Array phase response `a_x(gx) (x) a_y(gy)` with unit-modulus entries.
pub fn phase_response(geom: ArrayGeometry, gamma_x: f64, gamma_y: f64) -> Result<CVector, ChannelError> {
    check_gamma(gamma_x, gamma_y)?;
    Ok(kronecker(
        &axis_response(geom.m_x, gamma_x, -1.0),
        &axis_response(geom.m_y, gamma_y, -1.0),
    ))
}

/// Unit-norm steering vector, the conjugate phase response over `sqrt(M)`.
pub fn steering_vector(geom: ArrayGeometry, gamma_x: f64, gamma_y: f64) -> Result<CVector, ChannelError> {
    let scale = 1.0 / (geom.n_antennas() as f64).sqrt();
    Ok(phase_response(geom, gamma_x, gamma_y)?
        .conj()
        .scale(C64::new(scale, 0.0)))
}

pub fn draw_placement<R: Rng + ?Sized>(rng: &mut R, bounds: &GeometryBounds) -> UePlacement {
    let horizontal = rng.random_range(bounds.min_horizontal_m..=bounds.max_horizontal_m);
    let ue_height = rng.random_range(bounds.min_ue_height_m..=bounds.max_ue_height_m);
    UePlacement::new(horizontal, bounds.bs_height_m, ue_height)
}

/// Noise power in watts from a PSD in dBm/Hz over `bandwidth_hz`.
pub fn noise_power_watts(psd_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(psd_dbm_hz + 10.0 * bandwidth_hz.log10())
}

/// Builds a realization from explicit per-group path angles and unscaled
/// complex gains (`gains[g]` is `K_g x L`). Path loss is applied here.
pub fn assemble_channel(
    model: &ChannelModel,
    placements: &[UePlacement],
    group_angles: &[Vec<(f64, f64)>],
    raw_gains: &[CMatrix],
) -> Result<ChannelRealization, ChannelError> {
    let m = model.array.n_antennas();
    let k_total = model.n_ues();
    if placements.len() != k_total {
        return Err(ChannelError::Bounds(format!(
            "{} placements for {} UEs",
            placements.len(),
            k_total
        )));
    }
    let mut h = CMatrix::zeros(k_total, m);
    let mut per_group = Vec::with_capacity(model.groups.len());
    let mut path_angles = Vec::with_capacity(k_total);

    for (g, range) in model.group_ranges().into_iter().enumerate() {
        let angles = &group_angles[g];
        let raw = &raw_gains[g];
        if angles.len() != model.n_paths || raw.dims() != (range.len(), model.n_paths) {
            return Err(ChannelError::Numerics(NumericsError::Dimension {
                op: "assemble_channel",
                lhs: (range.len(), model.n_paths),
                rhs: raw.dims(),
            }));
        }
        let responses = angles
            .iter()
            .map(|&(t, p)| {
                let (gx, gy) = angle_to_gamma(t, p);
                phase_response(model.array, gx.clamp(-1.0, 1.0), gy.clamp(-1.0, 1.0))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let phase_responses = CMatrix::from_fn(model.n_paths, m, |l, col| responses[l][col]);

        let mut gains = CMatrix::zeros(range.len(), model.n_paths);
        for (row, k) in range.clone().enumerate() {
            let scale = model
                .convention
                .amplitude_scale(placements[k].distance_3d_m, model.pathloss_exponent);
            for l in 0..model.n_paths {
                let z = raw[(row, l)] * scale;
                gains[(row, l)] = z;
                for (col, phi) in responses[l].as_slice().iter().enumerate() {
                    h[(k, col)] += z * phi;
                }
            }
            path_angles.push(angles.clone());
        }
        per_group.push(GroupChannel {
            gains,
            phase_responses,
        });
    }
    Ok(ChannelRealization {
        h,
        per_group,
        path_angles,
    })
}

/// Draws one realization: per group, `L` path angles uniform inside the
/// group's box; per UE and path, a `CN(0, 1/L)` gain.
pub fn generate_channel<R: Rng + ?Sized>(
    model: &ChannelModel,
    placements: &[UePlacement],
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    let l = model.n_paths;
    let std = (1.0 / (2.0 * l as f64)).sqrt();
    let mut group_angles = Vec::with_capacity(model.groups.len());
    let mut raw_gains = Vec::with_capacity(model.groups.len());
    for g in &model.groups {
        let (t0, t1) = g.eaod_interval_deg();
        let (p0, p1) = g.aaod_interval_deg();
        let angles: Vec<(f64, f64)> = (0..l)
            .map(|_| (rng.random_range(t0..=t1), rng.random_range(p0..=p1)))
            .collect();
        let gains = CMatrix::from_fn(g.ue_count, l, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * std, im * std)
        });
        group_angles.push(angles);
        raw_gains.push(gains);
    }
    assemble_channel(model, placements, &group_angles, &raw_gains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matmul;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn table_model(k_per_group: usize) -> ChannelModel {
        ChannelModel {
            array: ArrayGeometry::default(),
            groups: (0..2)
                .map(|g| GroupAngularSpec {
                    mean_eaod_deg: 50.0,
                    eaod_spread_deg: 10.0,
                    mean_aaod_deg: 25.0 + 180.0 * g as f64,
                    aaod_spread_deg: 10.0,
                    ue_count: k_per_group,
                })
                .collect(),
            n_paths: 20,
            pathloss_exponent: 3.76,
            convention: PathlossConvention::Amplitude,
        }
    }

    #[test]
    fn phase_response_examples() {
        let g22 = ArrayGeometry::new(2, 2).unwrap();
        let v = phase_response(g22, 0.0, 0.0).unwrap();
        assert!(v.as_slice().iter().all(|z| close(*z, C64::new(1.0, 0.0))));

        let g21 = ArrayGeometry::new(2, 1).unwrap();
        let v = phase_response(g21, 1.0, 0.0).unwrap();
        assert!(close(v[0], C64::new(1.0, 0.0)));
        assert!(close(v[1], C64::new(-1.0, 0.0)));

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let v = phase_response(
                ArrayGeometry::default(),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            )
            .unwrap();
            assert!(v.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }
        assert!(matches!(
            phase_response(g22, 1.5, 0.0),
            Err(ChannelError::Domain { .. })
        ));
    }

    #[test]
    fn steering_vector_examples() {
        let g22 = ArrayGeometry::new(2, 2).unwrap();
        let e = steering_vector(g22, 0.0, 0.0).unwrap();
        assert!(e.as_slice().iter().all(|z| close(*z, C64::new(0.5, 0.0))));

        let g21 = ArrayGeometry::new(2, 1).unwrap();
        let e = steering_vector(g21, 1.0, 0.0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!(close(e[0], C64::new(s, 0.0)));
        assert!(close(e[1], C64::new(-s, 0.0)));
        // the conjugate flips the exponent sign
        let e = steering_vector(ArrayGeometry::new(4, 1).unwrap(), 0.5, 0.0).unwrap();
        assert!(close(e[1], C64::new(0.0, 0.5)));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let e = steering_vector(
                ArrayGeometry::new(8, 4).unwrap(),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            )
            .unwrap();
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn angle_to_gamma_examples() {
        let (x, y) = angle_to_gamma(90.0, 0.0);
        assert!((x - 1.0).abs() < 1e-15 && y.abs() < 1e-15);
        let (x, y) = angle_to_gamma(0.0, 123.0);
        assert!(x.abs() < 1e-15 && y.abs() < 1e-15);
        let (x, y) = angle_to_gamma(50.0, 25.0);
        assert!((x - 0.6943).abs() < 5e-5, "{x}");
        assert!((y - 0.3237).abs() < 5e-5, "{y}");
    }

    #[test]
    fn placement_examples() {
        let p = UePlacement::new(10.0, 10.0, 2.5);
        assert!((p.distance_3d_m - 12.5).abs() < 1e-12);

        let bounds = GeometryBounds::default();
        let lo = (10.0f64.powi(2) + 7.5f64.powi(2)).sqrt();
        let hi = (100.0f64.powi(2) + 8.5f64.powi(2)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut sum = 0.0;
        let n = 100_000;
        for i in 0..n {
            let p = draw_placement(&mut rng, &bounds);
            if i < 10_000 {
                assert!(p.distance_3d_m >= lo - 1e-12 && p.distance_3d_m <= hi + 1e-12);
                assert_eq!(p.bs_height_m, 10.0);
                assert!((1.5..=2.5).contains(&p.ue_height_m));
            }
            sum += p.horizontal_m;
        }
        assert!((sum / n as f64 - 55.0).abs() < 1.0);
    }

    #[test]
    fn noise_power_matches_table_values() {
        let w = noise_power_watts(-174.0, 120e3);
        let dbm = 10.0 * (w * 1e3).log10();
        assert!((dbm - (-123.2082)).abs() < 1e-3, "{dbm}");
        assert!((w / 4.77e-16 - 1.0).abs() < 5e-3, "{w}");
    }

    #[test]
    fn single_path_degenerates_to_phase_response() {
        let model = ChannelModel {
            array: ArrayGeometry::new(4, 4).unwrap(),
            groups: vec![GroupAngularSpec {
                mean_eaod_deg: 50.0,
                eaod_spread_deg: 10.0,
                mean_aaod_deg: 25.0,
                aaod_spread_deg: 10.0,
                ue_count: 1,
            }],
            n_paths: 1,
            pathloss_exponent: 3.76,
            convention: PathlossConvention::Amplitude,
        };
        // tau = 1 m makes the path loss factor exactly one
        let placement = UePlacement::new(0.0, 2.0, 1.0);
        let gains = CMatrix::from_rows(&[vec![C64::new(1.0, 0.0)]]).unwrap();
        let r = assemble_channel(&model, &[placement], &[vec![(47.0, 31.0)]], &[gains]).unwrap();
        let (gx, gy) = angle_to_gamma(47.0, 31.0);
        let phi = phase_response(model.array, gx, gy).unwrap();
        for (a, b) in r.h.row(0).iter().zip(phi.as_slice()) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn generated_shapes_and_factorization() {
        let model = table_model(5);
        let bounds = GeometryBounds::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let placements: Vec<_> = (0..10).map(|_| draw_placement(&mut rng, &bounds)).collect();
        let r = generate_channel(&model, &placements, &mut rng).unwrap();
        assert_eq!(r.h.dims(), (10, 256));
        assert_eq!(r.per_group.len(), 2);
        for (g, range) in model.group_ranges().into_iter().enumerate() {
            let gc = &r.per_group[g];
            assert_eq!(gc.gains.dims(), (5, 20));
            assert_eq!(gc.phase_responses.dims(), (20, 256));
            let hg = r.h.row_block(range.start, range.end);
            let zphi = matmul(&gc.gains, &gc.phase_responses).unwrap();
            let rel = hg.sub(&zphi).unwrap().frobenius_norm() / hg.frobenius_norm();
            assert!(rel < 1e-12, "{rel}");
            for k in range {
                assert_eq!(r.path_angles[k].len(), 20);
                for &(t, p) in &r.path_angles[k] {
                    assert!(model.groups[g].contains(t, p));
                }
            }
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        let model = table_model(2);
        let placements = vec![UePlacement::new(30.0, 10.0, 2.0); 4];
        let a = generate_channel(&model, &placements, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_channel(&model, &placements, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_channel_energy_matches_path_loss() {
        // E|z|^2 = 1/L over L paths and |phi|^2 = M give E|h|^2 = M tau^(-2 eta)
        let mut model = table_model(1);
        model.groups.truncate(1);
        let tau = 20.0;
        let placement = UePlacement::new(tau, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| {
                let r = generate_channel(&model, &[placement], &mut rng).unwrap();
                r.h.frobenius_norm().powi(2)
            })
            .sum::<f64>()
            / n as f64;
        let expected = 256.0 * tau.powf(-2.0 * 3.76);
        assert!((mean / expected - 1.0).abs() < 0.05, "{}", mean / expected);
    }

    #[test]
    fn group_validation() {
        let mut g = table_model(1).groups[0];
        assert!(g.validate(0).is_ok());
        g.eaod_spread_deg = 0.0;
        assert!(g.validate(0).is_err());
        g.eaod_spread_deg = 60.0;
        assert!(g.validate(0).is_err());
        assert!(ArrayGeometry::new(0, 4).is_err());
    }
}
