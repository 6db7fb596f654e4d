//! Magnetic (Harper/Hofstadter) bands of the effective lattice at rational flux.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::hopping::EffectiveHoppings;

/// Smallest accepted k-grid resolution.
pub const MIN_K_GRID: usize = 32;
/// Bands closer than this (times `max|κ|`) are treated as touching or overlapping.
pub const MERGE_TOL: f64 = 1e-6;
/// Largest denominator used when approximating an irrational flux.
pub const MAX_APPROXIMANT_Q: i64 = 64;

/// Flux per plaquette `α = p/q` with `gcd(p, q) = 1` and `q ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalFlux {
    pub p: i64,
    pub q: i64,
}

impl RationalFlux {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidArgument(format!("flux denominator must be >= 1, got {q}")));
        }
        if p.gcd(&q) != 1 {
            return Err(Error::NonCoprimeFlux { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Equivalent flux (mod 1) with `|α| ≤ 1/2`.
    pub fn folded(&self) -> Self {
        let mut p = self.p.rem_euclid(self.q);
        if 2 * p > self.q {
            p -= self.q;
        }
        Self { p, q: self.q }
    }

    /// Continued-fraction convergents of `alpha` with denominators up to `max_q`.
    pub fn approximants(alpha: f64, max_q: i64) -> Result<Vec<Self>> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("flux must be finite".to_string()));
        }
        let (mut h0, mut h1) = (0i64, 1i64);
        let (mut k0, mut k1) = (1i64, 0i64);
        let mut x = alpha;
        let mut out = Vec::new();
        loop {
            let a = x.floor();
            let ai = a as i64;
            let h2 = ai * h1 + h0;
            let k2 = ai * k1 + k0;
            if k2 > max_q {
                break;
            }
            out.push(Self::new(h2, k2)?);
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            let frac = x - a;
            if frac < 1e-12 {
                break;
            }
            x = 1.0 / frac;
        }
        Ok(out)
    }

    /// Closest convergent of `alpha` with `q ≤ 64`.
    pub fn approximate(alpha: f64) -> Result<Self> {
        Self::approximants(alpha, MAX_APPROXIMANT_Q)?
            .pop()
            .ok_or_else(|| Error::InvalidArgument(format!("no approximant for {alpha}")))
    }

    /// Farey sequence of order `max_q` on `[0, 1]`, in increasing order.
    pub fn farey(max_q: i64) -> Vec<Self> {
        let mut list: Vec<Self> = (1..=max_q.max(1))
            .flat_map(|q| (0..=q).filter(move |p| p.gcd(&q) == 1).map(move |p| Self { p, q }))
            .collect();
        list.sort_by(|a, b| (a.p * b.q).cmp(&(b.p * a.q)));
        list
    }
}

/// One magnetic band, an eigenvalue range over the Brillouin zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub e_min: f64,
    pub e_max: f64,
    /// Touches the next band up at a single energy.
    pub touches_next: bool,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }
}

/// Sorted, disjoint bands of one flux value.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub flux: RationalFlux,
    pub bands: Vec<Band>,
    pub k_grid: usize,
}

impl BandSet {
    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn total_width(&self) -> f64 {
        self.bands.iter().map(Band::width).sum()
    }
}

/// Bloch matrix of the effective lattice for the ansatz
/// `f_{n,m} = e^{i k_x n + i k_y m} u_{n mod q}`.
pub fn bloch_matrix(h: &EffectiveHoppings, flux: RationalFlux, kx: f64, ky: f64) -> DMatrix<Complex64> {
    let q = flux.q as usize;
    let alpha = flux.alpha();
    let (ky_abs, ky_arg) = (h.kappa_y.norm(), h.kappa_y.arg());
    let hop = -h.kappa_x * Complex64::from_polar(1.0, kx);
    let mut m = DMatrix::from_element(q, q, Complex64::new(0.0, 0.0));
    for j in 0..q {
        m[(j, j)] += -2.0 * ky_abs * (ky + TAU * alpha * j as f64 + ky_arg).cos();
        let next = (j + 1) % q;
        m[(j, next)] += hop;
        m[(next, j)] += hop.conj();
    }
    m
}

/// Eigenvalue ranges of the Bloch matrix over a `k_grid × k_grid` sampling of
/// `[0, 2π/q) × [0, 2π)`, merged into disjoint bands.
pub fn harper_bands(h: &EffectiveHoppings, flux: RationalFlux, k_grid: usize) -> Result<BandSet> {
    let flux = RationalFlux::new(flux.p, flux.q)?;
    if k_grid < MIN_K_GRID {
        return Err(Error::InvalidArgument(format!("k_grid must be >= {MIN_K_GRID}, got {k_grid}")));
    }
    let q = flux.q as usize;
    let mut lo = vec![f64::INFINITY; q];
    let mut hi = vec![f64::NEG_INFINITY; q];
    for i in 0..k_grid {
        let kx = TAU * i as f64 / (flux.q as f64 * k_grid as f64);
        for j in 0..k_grid {
            let ky = TAU * j as f64 / k_grid as f64;
            let mut ev: Vec<f64> = bloch_matrix(h, flux, kx, ky).symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            for (b, e) in ev.into_iter().enumerate() {
                lo[b] = lo[b].min(e);
                hi[b] = hi[b].max(e);
            }
        }
    }

    let tol = MERGE_TOL * h.kappa_x.norm().max(h.kappa_y.norm());
    let mut bands: Vec<Band> = Vec::with_capacity(q);
    for (e_min, e_max) in lo.into_iter().zip(hi) {
        match bands.last_mut() {
            Some(last) if e_min < last.e_max - tol => last.e_max = last.e_max.max(e_max),
            Some(last) if e_min <= last.e_max + tol => {
                last.touches_next = true;
                bands.push(Band { e_min, e_max, touches_next: false });
            }
            _ => bands.push(Band { e_min, e_max, touches_next: false }),
        }
    }
    Ok(BandSet { flux, bands, k_grid })
}

/// Number of disjoint bands; touching bands count separately.
pub fn band_count(h: &EffectiveHoppings, flux: RationalFlux, k_grid: usize) -> Result<usize> {
    Ok(harper_bands(h, flux, k_grid)?.len())
}

/// One band at one flux value of a butterfly dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButterflyBand {
    pub alpha: f64,
    pub band: Band,
}

/// Bands for every flux in `fluxes` with `κ_x = 1` and `κ_y = ratio`.
pub fn butterfly(ratio: f64, fluxes: &[RationalFlux], k_grid: usize) -> Result<Vec<ButterflyBand>> {
    let mut out = Vec::new();
    for &flux in fluxes {
        let h = EffectiveHoppings::with_flux(Complex64::new(1.0, 0.0), Complex64::new(ratio, 0.0), flux.alpha());
        let set = harper_bands(&h, flux, k_grid)?;
        out.extend(set.bands.into_iter().map(|band| ButterflyBand { alpha: flux.alpha(), band }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn half_flux_edges(kappa: f64) -> [f64; 3] {
        let top = 2.0 * (2.0f64).sqrt() * kappa.abs();
        [-top, 0.0, top]
    }

    fn iso(kappa: f64, flux: RationalFlux) -> EffectiveHoppings {
        EffectiveHoppings::with_flux(Complex64::new(kappa, 0.0), Complex64::new(kappa, 0.0), flux.alpha())
    }

    #[test]
    fn flux_validation_and_folding() {
        assert_eq!(RationalFlux::new(2, 4), Err(Error::NonCoprimeFlux { p: 2, q: 4 }));
        assert!(RationalFlux::new(1, 0).is_err());
        assert_eq!(RationalFlux::new(3, 4).unwrap().folded(), RationalFlux { p: -1, q: 4 });
        assert_eq!(RationalFlux::new(-5, 3).unwrap().folded(), RationalFlux { p: 1, q: 3 });
        assert_eq!(RationalFlux::new(1, 2).unwrap().folded().p, 1);
    }

    #[test]
    fn convergents_of_irrational_flux() {
        let alpha = 3.0 / (2.0 * PI);
        let list = RationalFlux::approximants(alpha, 64).unwrap();
        assert!(list.iter().all(|f| f.q <= 64));
        let qs: Vec<i64> = list.iter().map(|f| f.q).collect();
        assert!(qs.windows(2).all(|w| w[1] > w[0]));
        let best = RationalFlux::approximate(alpha).unwrap();
        assert!((best.alpha() - alpha).abs() < 1.0 / (best.q * best.q) as f64);
        assert_eq!(RationalFlux::approximate(0.5).unwrap(), RationalFlux { p: 1, q: 2 });
    }

    #[test]
    fn farey_order_three() {
        let f: Vec<(i64, i64)> = RationalFlux::farey(3).iter().map(|f| (f.p, f.q)).collect();
        assert_eq!(f, vec![(0, 1), (1, 3), (1, 2), (2, 3), (1, 1)]);
    }

    #[test]
    fn zero_flux_is_one_band() {
        let flux = RationalFlux::new(0, 1).unwrap();
        let set = harper_bands(&iso(0.7, flux), flux, 64).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.bands[0].e_min + 2.8).abs() < 1e-12);
        assert!((set.bands[0].e_max - 2.8).abs() < 1e-12);
    }

    #[test]
    fn half_flux_matches_two_by_two_oracle() {
        let kappa = 0.548;
        let flux = RationalFlux::new(1, 2).unwrap();
        let set = harper_bands(&iso(kappa, flux), flux, 64).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.bands[0].touches_next);
        let [lo, mid, hi] = half_flux_edges(kappa);
        assert!((set.bands[0].e_min - lo).abs() < 1e-12);
        assert!((set.bands[0].e_max - mid).abs() < 1e-12);
        assert!((set.bands[1].e_min - mid).abs() < 1e-12);
        assert!((set.bands[1].e_max - hi).abs() < 1e-12);
        assert!((set.total_width() - 4.0 * 2f64.sqrt() * kappa).abs() < 1e-12);
    }

    #[test]
    fn bloch_matrix_is_hermitian_and_diagonalizes() {
        let h = EffectiveHoppings::with_flux(Complex64::from_polar(0.8, 0.3), Complex64::from_polar(1.3, -0.9), 2.0 / 5.0);
        let flux = RationalFlux::new(2, 5).unwrap();
        let m = bloch_matrix(&h, flux, 0.37, 1.91);
        assert!((&m - m.adjoint()).norm() < 1e-15);
        let eig = m.clone().symmetric_eigen();
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::new(e, 0.0)));
        let rebuilt = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        assert!((rebuilt - m).norm() < 1e-12);
    }

    #[test]
    fn third_flux_has_three_bands() {
        let flux = RationalFlux::new(1, 3).unwrap();
        assert_eq!(band_count(&iso(1.0, flux), flux, 64).unwrap(), 3);
    }

    #[test]
    fn bad_grid_rejected() {
        let flux = RationalFlux::new(1, 3).unwrap();
        assert!(harper_bands(&iso(1.0, flux), flux, 8).is_err());
        assert!(harper_bands(&iso(1.0, flux), RationalFlux { p: 2, q: 6 }, 64).is_err());
    }

    #[test]
    fn butterfly_single_zero_flux() {
        let data = butterfly(1.0, &[RationalFlux::new(0, 1).unwrap()], 32).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data[0].alpha, 0.0);
    }
}
