//! Globally adaptive Gauss–Kronrod (7/15) quadrature over vector-valued
//! integrands.
//!
//! All components share the same panels. A run stops once every component
//! meets `error ≤ max(rel_tol · ∫|f|, abs_floor)`. Measuring the relative
//! error against `∫|f|` keeps sign-changing components (whose integral may
//! pass through zero) well posed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Number of Kronrod nodes per panel.
pub const NODES: usize = 15;

/// Kronrod abscissae on `[-1, 1]` in ascending order.
pub fn std_nodes() -> [f64; NODES] {
    std::array::from_fn(|i| match i.cmp(&7) {
        Ordering::Less => -XGK[i],
        Ordering::Equal => 0.0,
        Ordering::Greater => XGK[14 - i],
    })
}

const WEIGHTS: ([f64; NODES], [f64; NODES]) = (
    [
        WGK[0], WGK[1], WGK[2], WGK[3], WGK[4], WGK[5], WGK[6], WGK[7], WGK[6], WGK[5], WGK[4], WGK[3], WGK[2],
        WGK[1], WGK[0],
    ],
    [
        0.0, WG[0], 0.0, WG[1], 0.0, WG[2], 0.0, WG[3], 0.0, WG[2], 0.0, WG[1], 0.0, WG[0], 0.0,
    ],
);

/// Kronrod and embedded Gauss weights matching [`std_nodes`]. Gauss weights
/// are zero on the Kronrod-only nodes.
pub fn std_weights() -> ([f64; NODES], [f64; NODES]) {
    WEIGHTS
}

/// Nodes of `[a, b]`.
pub fn panel_nodes(a: f64, b: f64) -> [f64; NODES] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    std_nodes().map(|x| c + h * x)
}

/// One panel's estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    /// `∫|f|` per component.
    pub abs: [f64; N],
}

impl<const N: usize> Estimate<N> {
    pub fn zero() -> Self {
        Self {
            value: [0.0; N],
            error: [0.0; N],
            abs: [0.0; N],
        }
    }

    fn add(&mut self, other: &Self) {
        for i in 0..N {
            self.value[i] += other.value[i];
            self.error[i] += other.error[i];
            self.abs[i] += other.abs[i];
        }
    }
}

/// Combine integrand samples at [`panel_nodes`] of a panel with half-width
/// `half` into a value and a QUADPACK-style error estimate.
pub fn combine<const N: usize>(samples: &[[f64; N]; NODES], half: f64) -> Estimate<N> {
    let columns: [[f64; NODES]; N] = std::array::from_fn(|i| std::array::from_fn(|j| samples[j][i]));
    combine_columns(&columns, half)
}

/// [`combine`] with samples stored per component.
pub fn combine_columns<const N: usize>(columns: &[[f64; NODES]; N], half: f64) -> Estimate<N> {
    let (wk, wg) = WEIGHTS;
    let mut out = Estimate::zero();
    for (i, f) in columns.iter().enumerate() {
        let mut resk = 0.0;
        let mut resg = 0.0;
        let mut resabs = 0.0;
        for j in 0..NODES {
            resk += wk[j] * f[j];
            resg += wg[j] * f[j];
            resabs += wk[j] * f[j].abs();
        }
        let mean = 0.5 * resk;
        let mut resasc = 0.0;
        for j in 0..NODES {
            resasc += wk[j] * (f[j] - mean).abs();
        }
        let h = half.abs();
        let (resk, resg, resabs, resasc) = (resk * half, resg * half, resabs * h, resasc * h);
        let mut err = (resk - resg).abs();
        if resasc != 0.0 && err != 0.0 {
            let r = 200.0 * err / resasc;
            err = resasc * (r * r.sqrt()).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        out.value[i] = resk;
        out.error[i] = err;
        out.abs[i] = resabs;
    }
    out
}

/// Evaluate `f` on one panel.
pub fn gk15<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Estimate<N> {
    let nodes = panel_nodes(a, b);
    let samples = nodes.map(&mut *f);
    combine(&samples, 0.5 * (b - a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rel_tol: f64,
    /// Absolute error accepted regardless of `∫|f|`.
    pub abs_floor: f64,
    pub max_panels: usize,
}

impl Options {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_floor: 1e-300,
            max_panels: 200_000,
        }
    }
}

struct Queued<const N: usize> {
    priority: f64,
    a: f64,
    b: f64,
    est: Estimate<N>,
}

impl<const N: usize> PartialEq for Queued<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority.total_cmp(&other.priority) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Queued<N> {}
impl<const N: usize> PartialOrd for Queued<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Queued<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn converged<const N: usize>(total: &Estimate<N>, opts: &Options) -> bool {
    (0..N).all(|i| total.error[i] <= (opts.rel_tol * total.abs[i]).max(opts.abs_floor))
}

/// Worst `error / target` ratio across components.
fn worst_ratio<const N: usize>(total: &Estimate<N>, opts: &Options) -> f64 {
    (0..N)
        .map(|i| total.error[i] / (opts.rel_tol * total.abs[i]).max(opts.abs_floor))
        .fold(0.0, f64::max)
}

/// Integrate over consecutive intervals `breaks[0..]`, bisecting the panel
/// with the largest scaled error until all components converge.
///
/// Fails with [`Error::Numerical`] when the panel budget runs out or no
/// panel can be split further; the reported `achieved` value is the worst
/// relative error estimate.
pub fn integrate<const N: usize, F: FnMut(f64) -> [f64; N]>(
    mut f: F,
    breaks: &[f64],
    opts: &Options,
) -> Result<Estimate<N>> {
    if breaks.len() < 2 {
        return Ok(Estimate::zero());
    }
    let mut panels: Vec<(f64, f64, Estimate<N>)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1], gk15(&mut f, w[0], w[1])))
        .collect();
    let mut total = Estimate::zero();
    for p in &panels {
        total.add(&p.2);
    }
    if converged(&total, opts) {
        return Ok(total);
    }
    let scale: [f64; N] = std::array::from_fn(|i| (total.abs[i] * opts.rel_tol).max(opts.abs_floor));
    let priority = |e: &Estimate<N>| (0..N).map(|i| e.error[i] / scale[i]).fold(0.0, f64::max);
    let mut heap: BinaryHeap<Queued<N>> = panels
        .drain(..)
        .map(|(a, b, est)| Queued {
            priority: priority(&est),
            a,
            b,
            est,
        })
        .collect();
    let mut parked = Estimate::zero();
    let mut count = heap.len();
    loop {
        let Some(top) = heap.pop() else {
            return Err(Error::Numerical {
                message: "no panel can be subdivided further".into(),
                achieved: worst_ratio(&total, opts) * opts.rel_tol,
            });
        };
        let mid = 0.5 * (top.a + top.b);
        if !(mid > top.a && mid < top.b) || (top.b - top.a) <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
            parked.add(&top.est);
            continue;
        }
        if count >= opts.max_panels {
            return Err(Error::Numerical {
                message: format!("panel budget of {} exhausted", opts.max_panels),
                achieved: worst_ratio(&total, opts) * opts.rel_tol,
            });
        }
        let left = gk15(&mut f, top.a, mid);
        let right = gk15(&mut f, mid, top.b);
        count += 1;
        for i in 0..N {
            let d_val = left.value[i] + right.value[i] - top.est.value[i];
            let d_err = left.error[i] + right.error[i] - top.est.error[i];
            let d_abs = left.abs[i] + right.abs[i] - top.est.abs[i];
            total.value[i] += d_val;
            total.error[i] += d_err;
            total.abs[i] += d_abs;
        }
        heap.push(Queued {
            priority: priority(&left),
            a: top.a,
            b: mid,
            est: left,
        });
        heap.push(Queued {
            priority: priority(&right),
            a: mid,
            b: top.b,
            est: right,
        });
        if converged(&total, opts) {
            // Re-sum from the panels to shed accumulated update round-off.
            let mut exact = parked;
            for q in heap.iter() {
                exact.add(&q.est);
            }
            return Ok(exact);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_integrate_polynomials() {
        let (wk, wg) = std_weights();
        assert!((wk.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert!((wg.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        let x = std_nodes();
        // Kronrod exact to degree 22, Gauss to degree 13
        let mk: f64 = (0..NODES).map(|j| wk[j] * x[j].powi(22)).sum();
        let mg: f64 = (0..NODES).map(|j| wg[j] * x[j].powi(12)).sum();
        assert!((mk - 2.0 / 23.0).abs() < 1e-15);
        assert!((mg - 2.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrals() {
        let r = integrate(|x: f64| [x.exp(), x.sin()], &[0.0, 1.0], &Options::new(1e-12)).unwrap();
        assert!((r.value[0] - (1f64.exp() - 1.0)).abs() < 1e-14);
        assert!((r.value[1] - (1.0 - 1f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_with_vanishing_integral() {
        let omega = 50.0;
        let r = integrate(
            |x: f64| [(omega * x).sin() * (-x).exp()],
            &[0.0, 2.0 * PI],
            &Options::new(1e-10),
        )
        .unwrap();
        let exact = omega * (1.0 - (-2.0 * PI).exp()) / (1.0 + omega * omega);
        assert!((r.value[0] - exact).abs() < 1e-10 * r.abs[0]);
        assert!(r.error[0] <= 1e-10 * r.abs[0]);
    }

    #[test]
    fn integrable_singularity() {
        let r = integrate(|x: f64| [1.0 / x.sqrt()], &[0.0, 1.0], &Options::new(1e-6)).unwrap();
        assert!((r.value[0] - 2.0).abs() < 2e-6);
    }

    #[test]
    fn budget_failure_reports_achieved_error() {
        let opts = Options {
            rel_tol: 1e-14,
            abs_floor: 0.0,
            max_panels: 3,
        };
        let err = integrate(|x: f64| [(1.0 / (x + 1e-3)).sin()], &[0.0, 1.0], &opts).unwrap_err();
        match err {
            Error::Numerical { achieved, .. } => assert!(achieved > 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }
}
