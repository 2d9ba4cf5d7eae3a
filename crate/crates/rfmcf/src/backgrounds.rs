//! Catalog of evolving ambient spaces.
//!
//! Each background supplies closed-form metric jets (components and
//! coordinate derivatives up to third order, plus the time derivative), a
//! soliton potential jet, the exact scalar curvature for cross-checks, and,
//! for the steady entries, the diffeomorphism that pulls a point back to the
//! frozen initial metric. All charts are global coordinate patches; the
//! stereographic sphere chart additionally enforces a finite chart radius
//! because the conformal factor degenerates far from the origin.

use ndarray::{Array1, Array2, Array3, Array4, Array5};
use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{CurvatureBundle, MetricJet, RawJet, ScalarJet, SolitonClass};

#[derive(Debug, Clone)]
enum Kind {
    Flat,
    Gaussian,
    Translating { vel: Vec<f64> },
    Cigar,
    CigarLine,
    ShrinkingSphere,
}

/// One ambient space from the catalog, at a fixed dimension.
#[derive(Debug, Clone)]
pub struct Background {
    name: String,
    n: usize,
    kind: Kind,
}

/// Conformal factor jet for metrics of the form `w(x, t) * delta` on the
/// leading `block` coordinates (remaining coordinates flat and static).
struct ConfJet {
    w: f64,
    dw: Array1<f64>,
    d2w: Array2<f64>,
    d3w: Array3<f64>,
    dtw: f64,
}

fn conformal_raw(n: usize, block: usize, c: &ConfJet) -> RawJet {
    let mut g = Array2::<f64>::eye(n);
    let mut dg = Array3::<f64>::zeros((n, n, n));
    let mut d2g = Array4::<f64>::zeros((n, n, n, n));
    let mut d3g = Array5::<f64>::zeros((n, n, n, n, n));
    let mut dtg = Array2::<f64>::zeros((n, n));
    for a in 0..block {
        g[[a, a]] = c.w;
        dtg[[a, a]] = c.dtw;
        for cc in 0..n {
            dg[[cc, a, a]] = c.dw[cc];
            for d in 0..n {
                d2g[[d, cc, a, a]] = c.d2w[[d, cc]];
                for e in 0..n {
                    d3g[[e, d, cc, a, a]] = c.d3w[[e, d, cc]];
                }
            }
        }
    }
    RawJet {
        g,
        dg,
        d2g,
        d3g,
        dtg,
    }
}

fn flat_raw(n: usize) -> RawJet {
    RawJet {
        g: Array2::eye(n),
        dg: Array3::zeros((n, n, n)),
        d2g: Array4::zeros((n, n, n, n)),
        d3g: Array5::zeros((n, n, n, n, n)),
        dtg: Array2::zeros((n, n)),
    }
}

/// Jet of `w = a / (1 + a r^2)` with `a = exp(-4t)`, over the first `block`
/// of `n` coordinates.
fn cigar_conf(x: &[f64], t: f64, n: usize, block: usize) -> ConfJet {
    let a = (-4.0 * t).exp();
    let r2: f64 = x[..block].iter().map(|v| v * v).sum();
    let s = 1.0 + a * r2;
    let mut dw = Array1::<f64>::zeros(n);
    let mut d2w = Array2::<f64>::zeros((n, n));
    let mut d3w = Array3::<f64>::zeros((n, n, n));
    for c in 0..block {
        dw[c] = -2.0 * a * a * x[c] / (s * s);
        for d in 0..block {
            let kcd = kron(c, d);
            d2w[[d, c]] =
                -2.0 * a * a * (kcd / (s * s) - 4.0 * a * x[c] * x[d] / (s * s * s));
            for e in 0..block {
                let kce = kron(c, e);
                let kde = kron(d, e);
                d3w[[e, d, c]] = 8.0 * a * a * a * (kcd * x[e] + kce * x[d] + kde * x[c])
                    / (s * s * s)
                    - 48.0 * a * a * a * a * x[c] * x[d] * x[e] / (s * s * s * s);
            }
        }
    }
    ConfJet {
        w: a / s,
        dw,
        d2w,
        d3w,
        dtw: -4.0 * a / (s * s),
    }
}

fn kron(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

impl Background {
    /// Construct a catalog background by name. `velocity` is consumed only
    /// by `translating-steady` (default: unit speed along the last axis,
    /// pointing down).
    pub fn new(name: &str, n: usize, velocity: Option<&[f64]>) -> Result<Self> {
        let dim_ok = |allowed: &[usize]| -> Result<()> {
            if allowed.contains(&n) {
                Ok(())
            } else {
                Err(Error::WrongDimension {
                    expected: allowed[0],
                    got: n,
                })
            }
        };
        let kind = match name {
            "flat-static" => {
                dim_ok(&[2, 3])?;
                Kind::Flat
            }
            "gaussian-shrinker" => {
                dim_ok(&[2, 3])?;
                Kind::Gaussian
            }
            "translating-steady" => {
                dim_ok(&[2, 3])?;
                let vel = match velocity {
                    Some(v) => {
                        if v.len() != n {
                            return Err(Error::BadParams(format!(
                                "velocity needs {n} components, got {}",
                                v.len()
                            )));
                        }
                        v.to_vec()
                    }
                    None => {
                        let mut v = vec![0.0; n];
                        v[n - 1] = -1.0;
                        v
                    }
                };
                Kind::Translating { vel }
            }
            "cigar-steady" => {
                dim_ok(&[2])?;
                Kind::Cigar
            }
            "cigar-line" => {
                dim_ok(&[3])?;
                Kind::CigarLine
            }
            "round-shrinking-sphere" => {
                dim_ok(&[2, 3])?;
                Kind::ShrinkingSphere
            }
            _ => return Err(Error::UnknownBackground(name.to_string())),
        };
        Ok(Self {
            name: name.to_string(),
            n,
            kind,
        })
    }

    /// Every catalog entry at every supported dimension.
    pub fn catalog() -> Vec<Background> {
        let mut out = Vec::new();
        for (name, dims) in [
            ("flat-static", &[2usize, 3][..]),
            ("gaussian-shrinker", &[2, 3][..]),
            ("translating-steady", &[2][..]),
            ("cigar-steady", &[2][..]),
            ("cigar-line", &[3][..]),
            ("round-shrinking-sphere", &[2, 3][..]),
        ] {
            for &n in dims {
                out.push(Background::new(name, n, None).unwrap());
            }
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class(&self) -> SolitonClass {
        match self.kind {
            Kind::Flat | Kind::Translating { .. } | Kind::Cigar | Kind::CigarLine => {
                SolitonClass::Steady
            }
            Kind::Gaussian | Kind::ShrinkingSphere => SolitonClass::Shrinking,
        }
    }

    /// True when the chart metric is the identity at every point and time, so
    /// per-point connection data can be hoisted out of node loops.
    pub fn metric_is_euclidean(&self) -> bool {
        matches!(
            self.kind,
            Kind::Flat | Kind::Gaussian | Kind::Translating { .. }
        )
    }

    /// Open time interval on which the background exists.
    pub fn time_domain(&self) -> (f64, f64) {
        match self.class() {
            SolitonClass::Shrinking => (f64::NEG_INFINITY, 0.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn chart_radius(&self) -> f64 {
        match self.kind {
            Kind::ShrinkingSphere => 100.0,
            _ => f64::INFINITY,
        }
    }

    /// Validate that `(x, t)` lies inside the chart and the time domain.
    pub fn check_point(&self, x: &[f64], t: f64) -> Result<()> {
        let (lo, hi) = self.time_domain();
        if !(t > lo && t < hi) || !t.is_finite() {
            return Err(Error::OutOfChart {
                background: self.name.clone(),
                coords: x.to_vec(),
                time: t,
            });
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if x.len() != self.n || !r.is_finite() || r > self.chart_radius() {
            return Err(Error::OutOfChart {
                background: self.name.clone(),
                coords: x.to_vec(),
                time: t,
            });
        }
        Ok(())
    }

    /// Metric components alone; the finite-difference cross-checks feed on
    /// this closure.
    pub fn metric(&self, x: &[f64], t: f64) -> Array2<f64> {
        match &self.kind {
            Kind::Flat | Kind::Gaussian | Kind::Translating { .. } => Array2::eye(self.n),
            Kind::Cigar => {
                let c = cigar_conf(x, t, 2, 2);
                Array2::from_diag(&ndarray::arr1(&[c.w, c.w]))
            }
            Kind::CigarLine => {
                let c = cigar_conf(x, t, 3, 2);
                Array2::from_diag(&ndarray::arr1(&[c.w, c.w, 1.0]))
            }
            Kind::ShrinkingSphere => {
                let c = self.sphere_conf(x, t);
                let mut g = Array2::eye(self.n);
                for a in 0..self.n {
                    g[[a, a]] = c.w;
                }
                g
            }
        }
    }

    fn sphere_conf(&self, x: &[f64], t: f64) -> ConfJet {
        let n = self.n;
        let tau = -t;
        let r2cap = 2.0 * (n as f64 - 1.0) * tau;
        let s = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
        let mut dw = Array1::<f64>::zeros(n);
        let mut d2w = Array2::<f64>::zeros((n, n));
        let mut d3w = Array3::<f64>::zeros((n, n, n));
        for c in 0..n {
            dw[c] = -16.0 * r2cap * x[c] / s.powi(3);
            for d in 0..n {
                d2w[[d, c]] = -16.0 * r2cap * kron(c, d) / s.powi(3)
                    + 96.0 * r2cap * x[c] * x[d] / s.powi(4);
                for e in 0..n {
                    d3w[[e, d, c]] = 96.0
                        * r2cap
                        * (kron(c, d) * x[e] + kron(c, e) * x[d] + kron(d, e) * x[c])
                        / s.powi(4)
                        - 768.0 * r2cap * x[c] * x[d] * x[e] / s.powi(5);
                }
            }
        }
        ConfJet {
            w: 4.0 * r2cap / (s * s),
            dw,
            d2w,
            d3w,
            dtw: -8.0 * (n as f64 - 1.0) / (s * s),
        }
    }

    /// Closed-form metric jet at a chart point.
    pub fn raw_jet(&self, x: &[f64], t: f64) -> RawJet {
        match &self.kind {
            Kind::Flat | Kind::Gaussian | Kind::Translating { .. } => flat_raw(self.n),
            Kind::Cigar => conformal_raw(2, 2, &cigar_conf(x, t, 2, 2)),
            Kind::CigarLine => conformal_raw(3, 2, &cigar_conf(x, t, 3, 2)),
            Kind::ShrinkingSphere => conformal_raw(self.n, self.n, &self.sphere_conf(x, t)),
        }
    }

    pub fn metric_jet(&self, x: &[f64], t: f64) -> Result<MetricJet> {
        self.check_point(x, t)?;
        MetricJet::from_raw(self.raw_jet(x, t))
    }

    pub fn bundle(&self, x: &[f64], t: f64) -> Result<CurvatureBundle> {
        Ok(CurvatureBundle::from_jet(&self.metric_jet(x, t)?))
    }

    /// Jet of the soliton potential.
    pub fn potential(&self, x: &[f64], t: f64) -> ScalarJet {
        let n = self.n;
        match &self.kind {
            Kind::Flat | Kind::ShrinkingSphere => ScalarJet::zero(n),
            Kind::Gaussian => {
                let tau = -t;
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mut d1 = Array1::<f64>::zeros(n);
                let mut d2 = Array2::<f64>::zeros((n, n));
                for a in 0..n {
                    d1[a] = x[a] / (2.0 * tau);
                    d2[[a, a]] = 1.0 / (2.0 * tau);
                }
                ScalarJet {
                    value: r2 / (4.0 * tau),
                    d1,
                    d2,
                    dt: r2 / (4.0 * tau * tau),
                }
            }
            Kind::Translating { vel } => {
                let vv: f64 = vel.iter().map(|v| v * v).sum();
                let dot: f64 = vel.iter().zip(x).map(|(a, b)| a * b).sum();
                ScalarJet {
                    value: dot + t * vv,
                    d1: Array1::from_vec(vel.clone()),
                    d2: Array2::zeros((n, n)),
                    dt: vv,
                }
            }
            Kind::Cigar | Kind::CigarLine => {
                let a = (-4.0 * t).exp();
                let r2 = x[0] * x[0] + x[1] * x[1];
                let s = 1.0 + a * r2;
                let mut d1 = Array1::<f64>::zeros(n);
                let mut d2 = Array2::<f64>::zeros((n, n));
                for c in 0..2 {
                    d1[c] = -2.0 * a * x[c] / s;
                    for d in 0..2 {
                        d2[[c, d]] =
                            -2.0 * a * kron(c, d) / s + 4.0 * a * a * x[c] * x[d] / (s * s);
                    }
                }
                ScalarJet {
                    value: -s.ln(),
                    d1,
                    d2,
                    dt: 4.0 * a * r2 / s,
                }
            }
        }
    }

    /// Exact scalar curvature, for cross-checking the curvature pipeline.
    pub fn exact_scalar(&self, x: &[f64], t: f64) -> f64 {
        match &self.kind {
            Kind::Flat | Kind::Gaussian | Kind::Translating { .. } => 0.0,
            Kind::Cigar | Kind::CigarLine => {
                let a = (-4.0 * t).exp();
                let s = 1.0 + a * (x[0] * x[0] + x[1] * x[1]);
                4.0 / s
            }
            Kind::ShrinkingSphere => {
                let nf = self.n as f64;
                let r2cap = 2.0 * (nf - 1.0) * (-t);
                nf * (nf - 1.0) / r2cap
            }
        }
    }

    /// For steady backgrounds: the chart point whose frozen initial metric
    /// is isometric to `(x, t)` under the soliton diffeomorphism flow.
    /// Returns `None` for shrinking entries.
    pub fn to_static_frame(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Flat => Some(x.to_vec()),
            Kind::Translating { vel } => {
                Some(x.iter().zip(vel).map(|(xi, vi)| xi + t * vi).collect())
            }
            Kind::Cigar => {
                let sc = (-2.0 * t).exp();
                Some(vec![sc * x[0], sc * x[1]])
            }
            Kind::CigarLine => {
                let sc = (-2.0 * t).exp();
                Some(vec![sc * x[0], sc * x[1], x[2]])
            }
            Kind::Gaussian | Kind::ShrinkingSphere => None,
        }
    }

    /// Worst-case structural residuals over seeded sample points: Ricci flow
    /// equation, soliton identity, potential equation, and the gap between
    /// the pipeline's scalar curvature and the closed form.
    pub fn self_check(&self, rng: &mut impl Rng, n_points: usize) -> Result<SelfCheck> {
        let mut worst = SelfCheck::default();
        for _ in 0..n_points {
            let x: Vec<f64> = (0..self.n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let t = match self.class() {
                SolitonClass::Shrinking => -rng.gen_range(0.2..2.0),
                _ => rng.gen_range(-1.0..1.0),
            };
            let bundle = self.bundle(&x, t)?;
            let f = self.potential(&x, t);
            let (tensor, feqn) =
                crate::tensor::soliton_residuals(&bundle, &f, self.class(), t)?;
            worst.ricci_flow = worst.ricci_flow.max(bundle.ricci_flow_residual());
            worst.soliton_tensor = worst.soliton_tensor.max(tensor);
            worst.potential_eqn = worst.potential_eqn.max(feqn);
            worst.scalar_gap = worst
                .scalar_gap
                .max((bundle.scalar - self.exact_scalar(&x, t)).abs());
        }
        Ok(worst)
    }
}

/// Worst residuals found by [`Background::self_check`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SelfCheck {
    pub ricci_flow: f64,
    pub soliton_tensor: f64,
    pub potential_eqn: f64,
    pub scalar_gap: f64,
}

impl SelfCheck {
    pub fn worst(&self) -> f64 {
        self.ricci_flow
            .max(self.soliton_tensor)
            .max(self.potential_eqn)
            .max(self.scalar_gap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::fd::{fd_jet, FdOrder};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cigar_metric_at_unit_point() {
        let bg = Background::new("cigar-steady", 2, None).unwrap();
        let g = bg.metric(&[1.0, 0.0], 0.0);
        assert_abs_diff_eq!(g[[0, 0]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g[[1, 1]], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g[[0, 1]], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_potential_on_unit_sphere_of_radius_two() {
        let bg = Background::new("gaussian-shrinker", 3, None).unwrap();
        let f = bg.potential(&[2.0, 0.0, 0.0], -1.0);
        assert_abs_diff_eq!(f.value, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn catalog_self_checks_are_tiny() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for bg in Background::catalog() {
            let chk = bg.self_check(&mut rng, 100).unwrap();
            assert!(
                chk.worst() < 1e-9,
                "{} n={} residual {:?}",
                bg.name(),
                bg.n(),
                chk
            );
        }
    }

    #[test]
    fn analytic_jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for bg in Background::catalog() {
            for _ in 0..5 {
                let x: Vec<f64> = (0..bg.n()).map(|_| rng.gen_range(-1.2..1.2)).collect();
                let t = match bg.class() {
                    SolitonClass::Shrinking => -rng.gen_range(0.3..1.5),
                    _ => rng.gen_range(-0.5..0.5),
                };
                let ana = bg.raw_jet(&x, t);
                let eval = |y: &[f64], s: f64| bg.metric(y, s);
                let num = fd_jet(&eval, &x, t, FdOrder::Four, 1e-3);
                let d_g = max_gap(ana.g.iter(), num.g.iter());
                let d1 = max_gap(ana.dg.iter(), num.dg.iter());
                let d2 = max_gap(ana.d2g.iter(), num.d2g.iter());
                let d3 = max_gap(ana.d3g.iter(), num.d3g.iter());
                let dt = max_gap(ana.dtg.iter(), num.dtg.iter());
                let worst = d_g.max(d1).max(d2).max(dt);
                assert!(
                    worst < 1e-7 && d3 < 5e-5,
                    "{} n={} jet gap {worst:.2e} / third order {d3:.2e}",
                    bg.name(),
                    bg.n()
                );
            }
        }
    }

    fn max_gap<'a>(
        a: impl Iterator<Item = &'a f64>,
        b: impl Iterator<Item = &'a f64>,
    ) -> f64 {
        a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn shrinking_sphere_has_constant_positive_ricci() {
        for n in [2usize, 3] {
            let bg = Background::new("round-shrinking-sphere", n, None).unwrap();
            let t = -0.7;
            let b = bg.bundle(&[0.3, -0.4, 0.2][..n].to_vec().as_slice(), t).unwrap();
            let lam = -1.0 / (2.0 * t);
            for a in 0..n {
                for c in 0..n {
                    assert_abs_diff_eq!(b.ric[[a, c]], lam * b.g[[a, c]], epsilon = 1e-10);
                }
            }
            assert_abs_diff_eq!(b.scalar, bg.exact_scalar(&vec![0.0; n], t), epsilon = 1e-9);
        }
    }

    #[test]
    fn domain_violations_are_reported() {
        let bg = Background::new("gaussian-shrinker", 2, None).unwrap();
        assert!(bg.metric_jet(&[0.0, 0.0], 0.5).is_err());
        let sph = Background::new("round-shrinking-sphere", 2, None).unwrap();
        assert!(sph.metric_jet(&[200.0, 0.0], -1.0).is_err());
        assert!(Background::new("nope", 2, None).is_err());
        assert!(Background::new("cigar-steady", 3, None).is_err());
    }

    #[test]
    fn static_frame_map_is_isometric_for_steady_entries() {
        // Pulling the evolving metric back through the frame map must land on
        // the frozen initial metric: g_t(x) = J^T g_0(phi(x)) J.
        let bg = Background::new("cigar-steady", 2, None).unwrap();
        let (x, t) = ([0.8, -0.5], 0.3);
        let y = bg.to_static_frame(&x, t).unwrap();
        let sc = (-2.0 * t as f64).exp();
        let g_t = bg.metric(&x, t);
        let g_0 = bg.metric(&y, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                assert_abs_diff_eq!(g_t[[a, b]], sc * sc * g_0[[a, b]], epsilon = 1e-14);
            }
        }
    }
}
