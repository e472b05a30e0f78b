//! Potential profiles `h` and the quadrature grids used to discretize them.

use std::f64::consts::{PI, SQRT_2};
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// Characteristic function of `(0, 1)`.
    Indicator01,
    /// Gaussian bump normalized to unit mass on `[center - cutoff*width, center + cutoff*width]`.
    TruncatedGaussian {
        center: f64,
        width: f64,
        cutoff: f64,
    },
    /// Linear interpolation of samples, zero outside the sampled range.
    Table { xs: Vec<f64>, hs: Vec<f64> },
}

/// A real potential profile `h` with compact support, scaled by `amplitude`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    kind: ProfileKind,
    amplitude: f64,
    support: (f64, f64),
    integral_c: f64,
    l1_norm: f64,
    sign_changing: bool,
}

impl PotentialProfile {
    pub fn indicator() -> Self {
        Self::build(ProfileKind::Indicator01, 1.0).expect("indicator profile is valid")
    }

    pub fn truncated_gaussian(center: f64, width: f64, cutoff: f64) -> Result<Self> {
        if !(width > 0.0 && cutoff > 0.0 && center.is_finite() && width.is_finite()) {
            return Err(Error::InvalidProfile {
                reason: format!("gaussian needs width > 0 and cutoff > 0 (got {width}, {cutoff})"),
            });
        }
        Self::build(
            ProfileKind::TruncatedGaussian {
                center,
                width,
                cutoff,
            },
            1.0,
        )
    }

    pub fn table(xs: Vec<f64>, hs: Vec<f64>) -> Result<Self> {
        if xs.len() != hs.len() || xs.len() < 2 {
            return Err(Error::InvalidProfile {
                reason: format!(
                    "table needs >= 2 (x, h) pairs, got {} / {}",
                    xs.len(),
                    hs.len()
                ),
            });
        }
        if xs.iter().chain(hs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile {
                reason: "table contains NaN or infinite values".into(),
            });
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile {
                reason: "table abscissae must be strictly increasing".into(),
            });
        }
        Self::build(ProfileKind::Table { xs, hs }, 1.0)
    }

    /// Reads a two-column `x,h` CSV (no header required; a non-numeric first
    /// row is skipped).
    pub fn table_from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut xs = Vec::new();
        let mut hs = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidProfile {
                reason: format!("csv row {}: {e}", row + 1),
            })?;
            if record.len() != 2 {
                return Err(Error::InvalidProfile {
                    reason: format!(
                        "csv row {} has {} columns, expected 2",
                        row + 1,
                        record.len()
                    ),
                });
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => {
                    xs.push(v[0]);
                    hs.push(v[1]);
                }
                Err(_) if row == 0 => continue,
                Err(e) => {
                    return Err(Error::InvalidProfile {
                        reason: format!("csv row {}: {e}", row + 1),
                    })
                }
            }
        }
        Self::table(xs, hs)
    }

    pub fn table_from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::InvalidProfile {
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::table_from_csv(file)
    }

    /// The same shape multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::build(self.kind.clone(), self.amplitude * factor).expect("scaling keeps validity")
    }

    fn build(kind: ProfileKind, amplitude: f64) -> Result<Self> {
        let (support, unit_integral, unit_l1, sign_changing) = match &kind {
            ProfileKind::Indicator01 => ((0.0, 1.0), 1.0, 1.0, false),
            ProfileKind::TruncatedGaussian {
                center,
                width,
                cutoff,
            } => (
                (center - cutoff * width, center + cutoff * width),
                1.0,
                1.0,
                false,
            ),
            ProfileKind::Table { xs, hs } => {
                let (integral, l1) = table_integrals(xs, hs);
                let pos = hs.iter().any(|&h| h > 0.0);
                let neg = hs.iter().any(|&h| h < 0.0);
                ((xs[0], xs[xs.len() - 1]), integral, l1, pos && neg)
            }
        };
        if !amplitude.is_finite() {
            return Err(Error::InvalidProfile {
                reason: "non-finite amplitude".into(),
            });
        }
        Ok(Self {
            kind,
            amplitude,
            support,
            integral_c: amplitude * unit_integral,
            l1_norm: amplitude.abs() * unit_l1,
            sign_changing,
        })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `int h`.
    pub fn integral(&self) -> f64 {
        self.integral_c
    }

    /// `int |h|`.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn sign_changing(&self) -> bool {
        self.sign_changing
    }

    pub fn h(&self, x: f64) -> f64 {
        self.amplitude * self.unit_h(x)
    }

    fn unit_h(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Indicator01 => {
                if x > 0.0 && x < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileKind::TruncatedGaussian {
                center,
                width,
                cutoff,
            } => {
                let s = (x - center) / width;
                if s.abs() > *cutoff {
                    0.0
                } else {
                    (-0.5 * s * s).exp() / gaussian_mass(*width, *cutoff)
                }
            }
            ProfileKind::Table { xs, hs } => interpolate(xs, hs, x),
        }
    }

    /// `u = sqrt|h|`.
    pub fn u(&self, x: f64) -> f64 {
        self.h(x).abs().sqrt()
    }

    /// `v = sgn(h) sqrt|h|`.
    pub fn v(&self, x: f64) -> f64 {
        let h = self.h(x);
        if h == 0.0 {
            0.0
        } else {
            h.signum() * h.abs().sqrt()
        }
    }

    /// `h_eps(x) = h(x/eps)/eps`.
    pub fn h_eps(&self, eps: f64, x: f64) -> f64 {
        self.h(x / eps) / eps
    }

    /// Cumulative mass `Theta(x) = int_{-inf}^x h`.
    pub fn theta(&self, x: f64) -> f64 {
        let (lo, hi) = self.support;
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return self.integral_c;
        }
        let unit = match &self.kind {
            ProfileKind::Indicator01 => x,
            ProfileKind::TruncatedGaussian {
                center,
                width,
                cutoff,
            } => {
                let s = (x - center) / width;
                let a = libm::erf(cutoff / SQRT_2);
                0.5 * (libm::erf(s / SQRT_2) + a) / a
            }
            ProfileKind::Table { xs, hs } => table_cumulative(xs, hs, x),
        };
        self.amplitude * unit
    }

    /// `int h` by composite Simpson quadrature on the profile's own pieces,
    /// independent of the closed-form value.
    pub fn quadrature_integral(&self) -> f64 {
        let pieces: Vec<f64> = match &self.kind {
            ProfileKind::Table { xs, .. } => xs.clone(),
            _ => vec![self.support.0, self.support.1],
        };
        pieces
            .windows(2)
            .map(|w| simpson(|x| self.h(x), w[0], w[1], 4000))
            .sum()
    }

    /// Uniform midpoint grid with `n` cells over the support.
    pub fn midpoint_grid(&self, n: usize) -> QuadratureGrid {
        QuadratureGrid::midpoint(self.support.0, self.support.1, n)
    }
}

fn gaussian_mass(width: f64, cutoff: f64) -> f64 {
    width * (2.0 * PI).sqrt() * libm::erf(cutoff / SQRT_2)
}

fn interpolate(xs: &[f64], hs: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let k = match xs.partition_point(|&t| t <= x) {
        0 => 0,
        k if k >= xs.len() => xs.len() - 2,
        k => k - 1,
    };
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    hs[k] + t * (hs[k + 1] - hs[k])
}

/// Exact `int h` and `int |h|` of a piecewise linear table.
fn table_integrals(xs: &[f64], hs: &[f64]) -> (f64, f64) {
    let mut integral = 0.0;
    let mut l1 = 0.0;
    for k in 0..xs.len() - 1 {
        let dx = xs[k + 1] - xs[k];
        let (a, b) = (hs[k], hs[k + 1]);
        integral += 0.5 * dx * (a + b);
        if a * b >= 0.0 {
            l1 += 0.5 * dx * (a.abs() + b.abs());
        } else {
            // split at the root
            let root = a / (a - b);
            l1 += 0.5 * dx * (root * a.abs() + (1.0 - root) * b.abs());
        }
    }
    (integral, l1)
}

fn table_cumulative(xs: &[f64], hs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..xs.len() - 1 {
        let (x0, x1) = (xs[k], xs[k + 1]);
        if x >= x1 {
            acc += 0.5 * (x1 - x0) * (hs[k] + hs[k + 1]);
            continue;
        }
        let hx = interpolate(xs, hs, x);
        acc += 0.5 * (x - x0) * (hs[k] + hx);
        break;
    }
    acc
}

/// Composite Simpson rule; the end points are sampled as one-sided limits so
/// that jumps at the support boundary do not leak in.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let nudge = 1e-12 * (b - a);
    let mut sum = f(a + nudge) + f(b - nudge);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Midpoint,
    Trapezoid,
}

/// Nodes and positive weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    rule: QuadratureRule,
    lo: f64,
    hi: f64,
}

impl QuadratureGrid {
    /// Composite midpoint rule with `n` equal cells.
    pub fn midpoint(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n > 0 && hi > lo, "midpoint grid needs n > 0 and hi > lo");
        let w = (hi - lo) / n as f64;
        Self {
            nodes: (0..n).map(|j| lo + (j as f64 + 0.5) * w).collect(),
            weights: vec![w; n],
            rule: QuadratureRule::Midpoint,
            lo,
            hi,
        }
    }

    /// Midpoint rule on consecutive pieces `[breaks[k], breaks[k+1]]` with
    /// `cells[k]` equal cells each.
    pub fn composite_midpoint(breaks: &[f64], cells: &[usize]) -> Result<Self> {
        if breaks.len() != cells.len() + 1
            || cells.contains(&0)
            || breaks.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::InvalidArgument {
                reason:
                    "composite grid needs increasing breaks and one positive cell count per piece"
                        .into(),
            });
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (k, &n) in cells.iter().enumerate() {
            let piece = Self::midpoint(breaks[k], breaks[k + 1], n);
            nodes.extend_from_slice(piece.nodes());
            weights.extend_from_slice(piece.weights());
        }
        Ok(Self {
            nodes,
            weights,
            rule: QuadratureRule::Midpoint,
            lo: breaks[0],
            hi: breaks[breaks.len() - 1],
        })
    }

    /// Composite trapezoid rule with `n` nodes including both end points.
    pub fn trapezoid(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n > 1 && hi > lo, "trapezoid grid needs n > 1 and hi > lo");
        let w = (hi - lo) / (n - 1) as f64;
        let mut weights = vec![w; n];
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Self {
            nodes: (0..n).map(|j| lo + j as f64 * w).collect(),
            weights,
            rule: QuadratureRule::Trapezoid,
            lo,
            hi,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn covers(&self, support: (f64, f64)) -> bool {
        let slack = 1e-12 * (self.hi - self.lo).abs().max(1.0);
        self.lo <= support.0 + slack && self.hi >= support.1 - slack
    }

    pub(crate) fn check_covers(&self, support: (f64, f64)) -> Result<()> {
        if self.covers(support) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                grid_lo: self.lo,
                grid_hi: self.hi,
                lo: support.0,
                hi: support.1,
            })
        }
    }
}

/// Sign-changing test profile: two triangles of mass 3/2 and -1/2 on `[0, 2]`,
/// so `int h = 1` and `int |h| = 2`.
pub fn two_triangle_profile() -> PotentialProfile {
    PotentialProfile::table(
        vec![0.0, 0.5, 1.0, 1.5, 2.0],
        vec![0.0, 3.0, 0.0, -1.0, 0.0],
    )
    .expect("static table is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_integrals_match_own_quadrature() {
        let ind = PotentialProfile::indicator();
        assert!((ind.quadrature_integral() - ind.integral()).abs() < 1e-10);
        let g = PotentialProfile::truncated_gaussian(0.5, 0.1, 6.0).unwrap();
        assert!((g.quadrature_integral() - 1.0).abs() < 1e-10);
        let t = two_triangle_profile();
        assert!((t.quadrature_integral() - 1.0).abs() < 1e-10);
        assert_eq!(t.integral(), 1.0);
        assert_eq!(t.l1_norm(), 2.0);
        assert!(t.sign_changing());
    }

    #[test]
    fn u_v_factor_h() {
        let t = two_triangle_profile();
        for x in t.midpoint_grid(64).nodes() {
            let h = t.h(*x);
            assert!((t.u(*x) * t.v(*x) - h).abs() < 1e-15);
            assert!((t.u(*x).powi(2) - h.abs()).abs() < 1e-15);
        }
        assert_eq!(t.v(3.0), 0.0);
    }

    #[test]
    fn theta_runs_from_zero_to_mass() {
        for p in [
            PotentialProfile::indicator().scaled(2.0),
            PotentialProfile::truncated_gaussian(0.0, 1.0, 5.0).unwrap(),
            two_triangle_profile(),
        ] {
            let (lo, hi) = p.support();
            assert_eq!(p.theta(lo), 0.0);
            assert!((p.theta(hi) - p.integral()).abs() < 1e-14);
            let mid = 0.5 * (lo + hi);
            let direct = simpson(|x| p.h(x), lo, mid, 20000);
            assert!((p.theta(mid) - direct).abs() < 1e-9, "{:?}", p.kind());
        }
    }

    #[test]
    fn h_eps_keeps_mass() {
        let p = PotentialProfile::indicator();
        assert_eq!(p.h_eps(0.25, 0.1), 4.0);
        assert_eq!(p.h_eps(0.25, 0.3), 0.0);
    }

    #[test]
    fn table_rejections() {
        assert!(PotentialProfile::table(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(PotentialProfile::table(vec![0.0, 1.0], vec![f64::NAN, 1.0]).is_err());
        let csv = "x,h\n0,0\n1,nan\n";
        assert!(PotentialProfile::table_from_csv(csv.as_bytes()).is_err());
        let csv = "x,h\n0,0\n0.5,2\n1,0\n";
        let p = PotentialProfile::table_from_csv(csv.as_bytes()).unwrap();
        assert!((p.integral() - 1.0).abs() < 1e-15);
        assert!((p.h(0.25) - 1.0).abs() < 1e-15);
        assert_eq!(p.h(1.5), 0.0);
    }

    #[test]
    fn grids_sum_to_length() {
        let g = QuadratureGrid::midpoint(-1.0, 2.0, 333);
        assert!((g.weights().iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        let t = QuadratureGrid::trapezoid(0.0, 1.0, 101);
        assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(!g.covers((-2.0, 0.0)));
    }
}
