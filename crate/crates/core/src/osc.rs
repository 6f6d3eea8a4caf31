//! Scans of the oscillation ratios
//! `|phi_{i rho + lambda}(g) - e^{i lambda . m_1(g)}| / |lambda|^2` and
//! `|phi_{i rho - lambda}(g) - e^{2 i lambda . ln sigma_sing(g)}| / |lambda|`
//! over a grid of spectral parameters.

use serde::Serialize;

use crate::design::{evaluate, Outer};
use crate::error::{Error, Result};
use crate::haar::McPlan;
use crate::scalar::Real;
use crate::spherical::{expm1i, DoubleCoset, SpectralParameter};

/// Unit scan directions in R^n.
///
/// Direction `j` of `count` is `cos(a_j) w_j + sin(a_j) e`, with `e` the unit
/// diagonal, `a_j` evenly spaced in [-60, 60] degrees and `w_j` a unit vector
/// orthogonal to `e` rotating through the first two Helmert directions. For
/// n = 1 the directions alternate between `1` and `-1`.
pub fn scan_directions<T: Real>(n: usize, count: usize) -> Vec<Vec<T>> {
    if n == 0 || count == 0 {
        return Vec::new();
    }
    if n == 1 {
        return (0..count).map(|j| vec![if j % 2 == 0 { T::one() } else { -T::one() }]).collect();
    }
    let nf = T::from_usize_lossy(n);
    let diag = vec![T::one() / nf.sqrt(); n];
    // Helmert vectors: h_m = (1, ..., 1, -m, 0, ...) / sqrt(m (m + 1)).
    let helmert = |m: usize| -> Vec<T> {
        let mf = T::from_usize_lossy(m);
        let s = (mf * (mf + T::one())).sqrt();
        (0..n)
            .map(|i| {
                if i < m {
                    T::one() / s
                } else if i == m {
                    -mf / s
                } else {
                    T::zero()
                }
            })
            .collect()
    };
    let e1 = helmert(1);
    let e2 = if n >= 3 { Some(helmert(2)) } else { None };
    let deg = T::PI() / T::lit(180.0);
    (0..count)
        .map(|j| {
            let jf = T::from_usize_lossy(j);
            let a = if count == 1 {
                T::zero()
            } else {
                (T::lit(-60.0) + T::lit(120.0) * jf / T::from_usize_lossy(count - 1)) * deg
            };
            let w: Vec<T> = match &e2 {
                Some(e2) => {
                    let psi = T::PI() * jf / T::from_usize_lossy(count);
                    e1.iter().zip(e2).map(|(&p, &q)| psi.cos() * p + psi.sin() * q).collect()
                }
                None => e1.clone(),
            };
            w.iter().zip(&diag).map(|(&wi, &di)| a.cos() * wi + a.sin() * di).collect()
        })
        .collect()
}

/// `radii` log-spaced norms in `[lo, hi]` times [`scan_directions`], radius-major.
pub fn log_polar_grid<T: Real>(n: usize, lo: T, hi: T, radii: usize, directions: usize) -> Result<Vec<SpectralParameter<T>>> {
    if !(lo > T::zero() && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidArgument("log grid needs 0 < lo <= hi".into()));
    }
    if radii == 0 || directions == 0 {
        return Err(Error::InvalidArgument("log grid needs at least one radius and direction".into()));
    }
    let dirs = scan_directions::<T>(n, directions);
    let (a, b) = (lo.ln(), hi.ln());
    let mut out = Vec::with_capacity(radii * directions);
    for i in 0..radii {
        let t = if radii == 1 {
            T::zero()
        } else {
            T::from_usize_lossy(i) / T::from_usize_lossy(radii - 1)
        };
        let r = (a + (b - a) * t).exp();
        for d in &dirs {
            out.push(SpectralParameter::new(d.iter().map(|&v| v * r).collect())?);
        }
    }
    Ok(out)
}

/// Parses `"1,0;0,1"` (explicit list) or `"log:LO:HI:RADII@DIRECTIONS"`.
pub fn parse_lambda_grid<T: Real>(spec: &str, n: usize) -> Result<Vec<SpectralParameter<T>>> {
    let bad = |m: String| Error::InvalidArgument(format!("lambda grid `{spec}`: {m}"));
    let num = |s: &str| -> Result<T> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(T::lit)
            .ok_or_else(|| bad(format!("`{s}` is not a finite number")))
    };
    if let Some(rest) = spec.trim().strip_prefix("log:") {
        let (range, dirs) = rest.split_once('@').ok_or_else(|| bad("missing `@DIRECTIONS`".into()))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected LO:HI:RADII".into()));
        }
        let count = |s: &str| s.trim().parse::<usize>().map_err(|_| bad(format!("`{s}` is not a count")));
        return log_polar_grid(n, num(parts[0])?, num(parts[1])?, count(parts[2])?, count(dirs)?);
    }
    let grid: Vec<SpectralParameter<T>> = spec
        .split(';')
        .map(|p| {
            let v = p.split(',').map(num).collect::<Result<Vec<T>>>()?;
            if v.len() != n {
                return Err(bad(format!("point `{p}` has {} coordinates, expected {n}", v.len())));
            }
            SpectralParameter::new(v)
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(bad("empty grid".into()));
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationScanReport<T> {
    pub grid: Vec<SpectralParameter<T>>,
    pub norms: Vec<T>,
    /// `m_1(g)` from the scan's own draws.
    pub m1: Vec<T>,
    /// `|phi_{i rho + lambda} - e^{i lambda . m_1}| / |lambda|^2`.
    pub ratios2: Vec<T>,
    pub ratios2_se: Vec<T>,
    /// `|phi_{i rho - lambda} - e^{2 i lambda . ln sigma_sing}| / |lambda|`.
    pub ratios1: Vec<T>,
    pub ratios1_se: Vec<T>,
    /// `|phi_{i rho + lambda} - e^{2 i lambda . ln sigma_sing}| / |lambda|`.
    pub ratios1_conjugate: Vec<T>,
    pub ratios1_conjugate_se: Vec<T>,
    pub sup_ratio2: T,
    pub sup_ratio2_se: T,
    pub sup_ratio1: T,
    pub sup_ratio1_se: T,
    pub sup_ratio1_conjugate: T,
    pub sup_ratio1_conjugate_se: T,
    /// Smallest norm on the grid and the infimum of `ratios2` over it.
    pub min_norm: T,
    pub inf_ratio2_small_norm: T,
    pub samples: usize,
}

fn sup<T: Real>(v: &[T], se: &[T]) -> (T, T) {
    let mut best = (T::neg_infinity(), T::zero());
    for (&r, &s) in v.iter().zip(se) {
        if r > best.0 {
            best = (r, s);
        }
    }
    best
}

/// Both ratios on `grid`, all from one set of Haar draws (the first moment
/// comes from the same draws as well).
pub fn oscillation_ratio_scan<T: Real>(
    g: &DoubleCoset<T>,
    grid: &[SpectralParameter<T>],
    plan: &McPlan,
) -> Result<OscillationScanReport<T>> {
    let n = g.n();
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    for l in grid {
        if l.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: l.n() });
        }
        if l.is_zero() {
            return Err(Error::InvalidArgument("the scan grid must exclude lambda = 0".into()));
        }
    }
    let x = g.two_log_singular().to_vec();
    let atoms = vec![(T::one(), x.clone())];
    let first = evaluate(g.field, n, plan, Outer::Atoms(&atoms), n, |p, h| h.copy_from_slice(p.f))?;
    let m1: Vec<T> = (0..n).map(|r| first.mean(r)).collect();

    let dot = |l: &[T], a: &[T]| -> T { l.iter().zip(a).map(|(&u, &v)| u * v).sum() };
    // Per lambda: e^{i l.(f - m1)} - 1, e^{-i l.(f + x)} - 1, e^{i l.(f - x)} - 1.
    let out = evaluate(g.field, n, plan, Outer::Atoms(&atoms), 6 * grid.len(), |p, h| {
        let dm: Vec<T> = p.f.iter().zip(&m1).map(|(&f, &m)| f - m).collect();
        let sx: Vec<T> = p.f.iter().zip(&x).map(|(&f, &v)| f + v).collect();
        let dx: Vec<T> = p.f.iter().zip(&x).map(|(&f, &v)| f - v).collect();
        for (i, l) in grid.iter().enumerate() {
            let l = l.values();
            let o = 6 * i;
            (h[o], h[o + 1]) = expm1i(dot(l, &dm));
            (h[o + 2], h[o + 3]) = expm1i(-dot(l, &sx));
            (h[o + 4], h[o + 5]) = expm1i(dot(l, &dx));
        }
    })?;
    let modulus = |i: usize| -> (T, T) {
        let (re, im) = (out.mean(i), out.mean(i + 1));
        let (a, b) = (out.se(i), out.se(i + 1));
        ((re * re + im * im).sqrt(), (a * a + b * b).sqrt())
    };
    let norms: Vec<T> = grid.iter().map(SpectralParameter::norm).collect();
    let mut r2 = (Vec::new(), Vec::new());
    let mut r1 = (Vec::new(), Vec::new());
    let mut rc = (Vec::new(), Vec::new());
    for (i, &nl) in norms.iter().enumerate() {
        let (v, s) = modulus(6 * i);
        r2.0.push(v / (nl * nl));
        r2.1.push(s / (nl * nl));
        let (v, s) = modulus(6 * i + 2);
        r1.0.push(v / nl);
        r1.1.push(s / nl);
        let (v, s) = modulus(6 * i + 4);
        rc.0.push(v / nl);
        rc.1.push(s / nl);
    }
    let min_norm = norms.iter().copied().fold(T::infinity(), T::min);
    // Points within 1e-9 relative of the smallest norm.
    let inf_ratio2_small_norm = norms
        .iter()
        .zip(&r2.0)
        .filter(|(&nl, _)| nl <= min_norm * T::lit(1.0 + 1e-9))
        .map(|(_, &r)| r)
        .fold(T::infinity(), T::min);
    let (sup_ratio2, sup_ratio2_se) = sup(&r2.0, &r2.1);
    let (sup_ratio1, sup_ratio1_se) = sup(&r1.0, &r1.1);
    let (sup_ratio1_conjugate, sup_ratio1_conjugate_se) = sup(&rc.0, &rc.1);
    Ok(OscillationScanReport {
        grid: grid.to_vec(),
        norms,
        m1,
        ratios2: r2.0,
        ratios2_se: r2.1,
        ratios1: r1.0,
        ratios1_se: r1.1,
        ratios1_conjugate: rc.0,
        ratios1_conjugate_se: rc.1,
        sup_ratio2,
        sup_ratio2_se,
        sup_ratio1,
        sup_ratio1_se,
        sup_ratio1_conjugate,
        sup_ratio1_conjugate_se,
        min_norm,
        inf_ratio2_small_norm,
        samples: out.inner_samples(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldTag;
    use crate::group::WeylChamberPoint;
    use crate::haar::Seed;

    fn coset(field: FieldTag, x: &[f64]) -> DoubleCoset<f64> {
        DoubleCoset::new(field, WeylChamberPoint::new(x.to_vec()).unwrap())
    }

    #[test]
    fn directions_are_unit_and_off_diagonal() {
        for n in 1..5 {
            let d = scan_directions::<f64>(n, 8);
            assert_eq!(d.len(), 8);
            for v in &d {
                let nrm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((nrm - 1.0).abs() < 1e-14);
                if n > 1 {
                    let s: f64 = v.iter().sum::<f64>() / (n as f64).sqrt();
                    assert!(s.abs() <= (60f64).to_radians().sin() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn grid_parsing() {
        let g = parse_lambda_grid::<f64>("log:1e-3:10:5@8", 2).unwrap();
        assert_eq!(g.len(), 40);
        assert!((g[0].norm() - 1e-3).abs() < 1e-15 && (g[39].norm() - 10.0).abs() < 1e-12);
        let g = parse_lambda_grid::<f64>("1,0;0,1", 2).unwrap();
        assert_eq!(g[1].values(), &[0.0, 1.0]);
        for bad in ["1,0;0", "log:1:0:3@2", "log:1e-3:10:5", "a,b", ""] {
            assert!(parse_lambda_grid::<f64>(bad, 2).is_err(), "{bad}");
        }
    }

    #[test]
    fn identity_scan_is_exactly_zero() {
        let g = coset(FieldTag::Complex, &[0.0, 0.0, 0.0]);
        let grid = log_polar_grid(3, 1e-3, 10.0, 3, 4).unwrap();
        let r = oscillation_ratio_scan(&g, &grid, &McPlan::new(100, Seed::new(1))).unwrap();
        assert!(r.ratios2.iter().chain(&r.ratios1).all(|&v| v == 0.0));
        assert_eq!(r.sup_ratio2, 0.0);
    }

    #[test]
    fn generic_scan_is_finite_and_sharp() {
        let g = coset(FieldTag::Real, &[1.5, 0.2, -1.0]);
        let grid = log_polar_grid(3, 1e-3, 10.0, 5, 8).unwrap();
        let r = oscillation_ratio_scan(&g, &grid, &McPlan::new(4000, Seed::new(2))).unwrap();
        assert!(r.sup_ratio2.is_finite() && r.sup_ratio1.is_finite());
        assert!(r.inf_ratio2_small_norm > 1e-3 * r.sup_ratio2);
        assert!(r.ratios2.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_zero_lambda() {
        let g = coset(FieldTag::Real, &[1.0, 0.0]);
        let grid = vec![SpectralParameter::zeros(2)];
        assert!(oscillation_ratio_scan(&g, &grid, &McPlan::new(10, Seed::new(0))).is_err());
    }
}
