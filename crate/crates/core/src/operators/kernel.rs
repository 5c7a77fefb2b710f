//! The smoothing kernel, its normalisation and the continuous energy.

use crate::error::{Error, Result};
use crate::geometry::{PointRef, SpaceModel, COLLAR_EXPONENT};
use crate::sampling::Net;

use super::quadrature::{ball_integral, CellLayout, CellProbes, Profile, Quadrature};

/// Kernel radius and the graph scale it is paired with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelConfig {
    pub r: f64,
    pub rho: f64,
}

impl KernelConfig {
    /// The usual pairing `r = rho - 4 eps`.
    pub fn new(rho: f64, eps: f64) -> Result<Self> {
        Self::with_radius(rho - 4.0 * eps, rho)
    }

    pub fn with_radius(r: f64, rho: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite() && rho > 0.0 && rho.is_finite()) {
            return Err(Error::usage(format!("kernel radius {r} and rho {rho} must be positive")));
        }
        Ok(KernelConfig { r, rho })
    }

    fn check(&self, space: &SpaceModel) -> Result<()> {
        if space.is_glued() && self.r >= self.rho {
            return Err(Error::usage(format!(
                "glued kernel needs r < rho, got r = {} and rho = {}",
                self.r, self.rho
            )));
        }
        Ok(())
    }
}

/// Cut-off weight of the mirror images of `x`: 1 on the locus, falling
/// linearly to 0 at distance `r^(3/4)`.
pub fn alpha(space: &SpaceModel, cfg: &KernelConfig, x: &PointRef) -> f64 {
    if !space.is_glued() {
        return 0.0;
    }
    let d = space.distance_to_gluing(x);
    (1.0 - d / cfg.r.powf(COLLAR_EXPONENT)).clamp(0.0, 1.0)
}

/// `Lambda_r g (x)`.
pub(crate) fn kernel_apply(
    space: &SpaceModel,
    layout: &CellLayout,
    quad: &Quadrature,
    cfg: &KernelConfig,
    x: &PointRef,
    g: &dyn Fn(&PointRef) -> f64,
) -> Result<f64> {
    let own = ball_integral(space, layout, quad, x, cfg.r, Profile::Phi, g);
    let a = alpha(space, cfg, x);
    if a == 0.0 {
        return Ok(own);
    }
    let images = space.mirror_images(x, cfg.rho)?;
    let mut sum = own;
    let mut norm = 1.0;
    for img in images.iter().skip(1) {
        sum += a * ball_integral(space, layout, quad, img, cfg.r, Profile::Phi, g);
        norm += a;
    }
    Ok(sum / norm)
}

/// `theta(x) = Lambda_r 1 (x)`.
pub fn theta(space: &SpaceModel, net: &Net, cfg: &KernelConfig, quad: &Quadrature, x: &PointRef) -> Result<f64> {
    cfg.check(space)?;
    space.check_interior(x)?;
    let layout = CellLayout::new(space, net);
    kernel_apply(space, &layout, quad, cfg, x, &|_| 1.0)
}

/// `I u = Lambda_r(P* u) / theta` at each query point.
pub fn smooth(
    space: &SpaceModel,
    net: &Net,
    cfg: &KernelConfig,
    quad: &Quadrature,
    u: &[f64],
    queries: &[PointRef],
) -> Result<Vec<f64>> {
    cfg.check(space)?;
    check_len(net, u)?;
    let layout = CellLayout::new(space, net);
    let lifted = |p: &PointRef| net.locate(p).map_or(f64::NAN, |i| u[i]);
    let out: Vec<Result<f64>> = quad.exec.map_range(queries.len(), |k| {
        let x = &queries[k];
        space.check_interior(x)?;
        let num = kernel_apply(space, &layout, quad, cfg, x, &lifted)?;
        let den = kernel_apply(space, &layout, quad, cfg, x, &|_| 1.0)?;
        Ok(num / den)
    });
    let out = out.into_iter().collect::<Result<Vec<f64>>>()?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("smoothing hit a point outside every cell"));
    }
    Ok(out)
}

/// `||I u - P* u||^2_{L^2}`.
pub fn smoothing_gap(space: &SpaceModel, net: &Net, cfg: &KernelConfig, quad: &Quadrature, u: &[f64]) -> Result<f64> {
    cfg.check(space)?;
    check_len(net, u)?;
    let layout = CellLayout::new(space, net);
    let probes = CellProbes::build(space, net, &layout, quad, &[])?;
    let smoothed = smooth(space, net, cfg, quad, u, &probes.points)?;
    Ok(smoothed
        .iter()
        .zip(&probes.weights)
        .zip(&probes.cell)
        .map(|((s, w), &c)| w * (s - u[c]).powi(2))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    All,
    /// The `2 rho^(3/4)` collar of the gluing loci.
    Collar,
    /// Everything outside the collar.
    Exterior,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    /// Energy over the requested region.
    pub value: f64,
    pub collar: f64,
    pub exterior: f64,
}

/// `int_V int_{B*_r(x)} |f(y) - f(x)|^2 dy dx` where `B*_r(x)` is the
/// disjoint union of the reflected balls around `x` and its mirror images.
pub fn continuous_energy(
    space: &SpaceModel,
    net: &Net,
    cfg: &KernelConfig,
    quad: &Quadrature,
    f: &(dyn Fn(&PointRef) -> f64 + Sync),
    region: Region,
) -> Result<EnergyReport> {
    cfg.check(space)?;
    let layout = CellLayout::new(space, net);
    let width = 2.0 * cfg.rho.powf(COLLAR_EXPONENT);
    let probes = CellProbes::build(space, net, &layout, quad, &[width])?;
    let parts: Vec<Result<(f64, bool)>> = quad.exec.map_range(probes.len(), |k| {
        let x = &probes.points[k];
        let fx = f(x);
        let g = |y: &PointRef| (f(y) - fx).powi(2);
        let mut inner = 0.0;
        for z in space.mirror_images(x, cfg.rho)? {
            inner += ball_integral(space, &layout, quad, &z, cfg.r, Profile::Flat, &g);
        }
        let in_collar = space.is_glued() && space.distance_to_gluing(x) < width;
        Ok((probes.weights[k] * inner, in_collar))
    });
    let (mut collar, mut exterior) = (0.0, 0.0);
    for p in parts {
        let (e, c) = p?;
        if c {
            collar += e;
        } else {
            exterior += e;
        }
    }
    let value = match region {
        Region::All => collar + exterior,
        Region::Collar => collar,
        Region::Exterior => exterior,
    };
    Ok(EnergyReport { value, collar, exterior })
}

/// [`continuous_energy`] of the lift `P* u`.
pub fn lifted_energy(
    space: &SpaceModel,
    net: &Net,
    cfg: &KernelConfig,
    quad: &Quadrature,
    u: &[f64],
    region: Region,
) -> Result<EnergyReport> {
    check_len(net, u)?;
    let lifted = |p: &PointRef| net.locate(p).map_or(f64::NAN, |i| u[i]);
    let rep = continuous_energy(space, net, cfg, quad, &lifted, region)?;
    if !rep.value.is_finite() {
        return Err(Error::numerical("energy quadrature hit a point outside every cell"));
    }
    Ok(rep)
}

pub(crate) fn check_len(net: &Net, u: &[f64]) -> Result<()> {
    if u.len() != net.len() {
        return Err(Error::usage(format!(
            "function has {} values but the net has {} points",
            u.len(),
            net.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::unit_ball_volume;
    use crate::sampling::{sample_net, SamplerConfig};

    fn interval_net(eps: f64) -> (SpaceModel, Net) {
        let s = SpaceModel::interval(1.0).unwrap();
        let net = sample_net(&s, &SamplerConfig::grid(eps)).unwrap();
        (s, net)
    }

    #[test]
    fn theta_is_one_on_interval() {
        let (s, net) = interval_net(0.01);
        let cfg = KernelConfig::with_radius(0.1, 0.12).unwrap();
        for x in [0.5, 0.03, 0.999] {
            let t = theta(&s, &net, &cfg, &Quadrature::default(), &PointRef::on(0, x)).unwrap();
            assert!((t - 1.0).abs() < 1e-12, "{x}: {t}");
        }
    }

    #[test]
    fn theta_on_glued_circles() {
        let s = SpaceModel::two_circles(1.0, 1.0).unwrap();
        let net = sample_net(&s, &SamplerConfig::grid(0.005)).unwrap();
        let cfg = KernelConfig::with_radius(0.04, 0.05).unwrap();
        let t = theta(&s, &net, &cfg, &Quadrature::default(), &PointRef::on(0, 0.05)).unwrap();
        assert!((t - 1.0).abs() < 1e-12, "{t}");
        assert!(alpha(&s, &cfg, &PointRef::on(0, 0.05)) > 0.0);
    }

    #[test]
    fn glued_kernel_needs_r_below_rho() {
        let s = SpaceModel::two_circles(1.0, 1.0).unwrap();
        let net = sample_net(&s, &SamplerConfig::grid(0.01)).unwrap();
        let cfg = KernelConfig::with_radius(0.05, 0.05).unwrap();
        assert!(smooth(&s, &net, &cfg, &Quadrature::default(), &vec![1.0; net.len()], &[PointRef::on(0, 0.3)]).is_err());
    }

    #[test]
    fn smoothing_preserves_constants() {
        let (s, net) = interval_net(0.01);
        let cfg = KernelConfig::new(0.1, 0.01).unwrap();
        let q = [PointRef::on(0, 0.01), PointRef::on(0, 0.5), PointRef::on(0, 0.77)];
        let v = smooth(&s, &net, &cfg, &Quadrature::default(), &vec![2.5; net.len()], &q).unwrap();
        assert!(v.iter().all(|x| (x - 2.5).abs() < 1e-12));
    }

    #[test]
    fn energy_of_linear_function() {
        let (s, net) = interval_net(0.005);
        let r = 0.05;
        let cfg = KernelConfig::with_radius(r, 0.06).unwrap();
        let rep = continuous_energy(&s, &net, &cfg, &Quadrature::default(), &|p: &PointRef| p.coords[0], Region::All)
            .unwrap();
        let interior = unit_ball_volume(1) / 3.0 * r.powi(3);
        assert!(rep.value > 0.0);
        // interior points carry exactly (2/3) r^3; the reflected part near
        // the ends only adds
        assert!(rep.value >= interior * (1.0 - 2.0 * r) && rep.value <= interior * (1.0 + 10.0 * r));
        let zero = continuous_energy(&s, &net, &cfg, &Quadrature::default(), &|_: &PointRef| 3.0, Region::All).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn collar_split_adds_up() {
        let s = SpaceModel::two_circles(1.0, 1.0).unwrap();
        let net = sample_net(&s, &SamplerConfig::grid(0.005)).unwrap();
        let cfg = KernelConfig::new(0.05, 0.005).unwrap();
        let f = |p: &PointRef| (std::f64::consts::PI * p.coords[0]).sin();
        let q = Quadrature::default();
        let all = continuous_energy(&s, &net, &cfg, &q, &f, Region::All).unwrap();
        let col = continuous_energy(&s, &net, &cfg, &q, &f, Region::Collar).unwrap();
        assert!(col.value > 0.0);
        assert!((all.value - all.collar - all.exterior).abs() <= 1e-14 * all.value);
        assert_eq!(col.value, all.collar);
    }
}
