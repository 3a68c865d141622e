//! Derivative-free numeric kernel: bracketed root finding, 1-D and 2-D
//! minimization, adaptive Simpson quadrature.
//!
//! The objectives handled here have kinks wherever a cap or floor becomes
//! active, so nothing in this module uses derivatives. Ties are always broken
//! towards the leftmost (lexicographically smallest) point.

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "bracket requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub const ROOT_MAX_ITER: usize = 500;

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootReport {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Hybrid bisection / secant / inverse-quadratic root search (Brent).
///
/// Stops when `|f(x)| <= tol` or the bracket is narrower than
/// `tol * max(1, |x|)`.
pub fn root_bracketed<F: FnMut(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    root_bracketed_report(f, bracket, tol, ROOT_MAX_ITER).map(|r| r.root)
}

pub fn root_bracketed_report<F: FnMut(f64) -> f64>(
    mut f: F,
    bracket: Bracket,
    tol: f64,
    max_iter: usize,
) -> Result<RootReport> {
    let (mut xpre, mut xcur) = (bracket.lo, bracket.hi);
    let (mut fpre, mut fcur) = (f(xpre), f(xcur));
    let same_sign = (fpre > 0.0 && fcur > 0.0) || (fpre < 0.0 && fcur < 0.0);
    if fpre.is_nan() || fcur.is_nan() || same_sign {
        return Err(Error::NoBracket {
            lo: bracket.lo,
            hi: bracket.hi,
            f_lo: fpre,
            f_hi: fcur,
        });
    }
    if fpre == 0.0 {
        return Ok(RootReport { root: xpre, residual: 0.0, iterations: 0 });
    }
    if fcur == 0.0 {
        return Ok(RootReport { root: xcur, residual: 0.0, iterations: 0 });
    }

    let (mut xblk, mut fblk) = (0.0, 0.0);
    let (mut spre, mut scur) = (0.0_f64, 0.0_f64);
    for iter in 1..=max_iter {
        if fpre != 0.0 && fcur != 0.0 && (fpre < 0.0) != (fcur < 0.0) {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }

        let delta = 0.5 * tol * xcur.abs().max(1.0);
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || fcur.abs() <= tol || sbis.abs() < delta {
            return Ok(RootReport { root: xcur, residual: fcur.abs(), iterations: iter });
        }

        let interpolate = spre.abs() > delta
            && fcur.abs() < fpre.abs()
            && fpre.is_finite()
            && fblk.is_finite();
        if interpolate {
            let stry = if xpre == xblk {
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if stry.is_finite() && 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }

        xpre = xcur;
        fpre = fcur;
        xcur += if scur.abs() > delta { scur } else if sbis > 0.0 { delta } else { -delta };
        fcur = f(xcur);
        if fcur.is_nan() {
            return Err(Error::NonConvergence {
                context: "root_bracketed: objective returned NaN".into(),
                iterations: iter,
                residual: f64::NAN,
            });
        }
    }
    Err(Error::NonConvergence {
        context: "root_bracketed".into(),
        iterations: max_iter,
        residual: fcur.abs(),
    })
}

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Min1d {
    pub x: f64,
    pub value: f64,
    /// The golden-section basin and the pre-scan grid minimum disagreed.
    pub multimodal: bool,
    pub evaluations: usize,
}

pub const PRESCAN_POINTS: usize = 129;

/// Golden-section minimization on `[lo, hi]` guarded by a 129-point pre-scan.
///
/// When the golden-section result does not lie in the basin of the best grid
/// point, the grid basin wins and is refined instead. Exact ties resolve to
/// the leftmost point, so a constant function returns `lo`.
pub fn minimize_1d<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Min1d {
    if hi <= lo {
        let value = f(lo);
        return Min1d { x: lo, value, multimodal: false, evaluations: 1 };
    }
    let n = PRESCAN_POINTS;
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = if i == n - 1 { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect();
    let mut evaluations = n;

    let best = grid
        .iter()
        .enumerate()
        .fold(0, |acc, (i, p)| if p.1 < grid[acc].1 { i } else { acc });

    let (xg, fg, eg) = golden_section(&mut f, lo, hi, tol);
    evaluations += eg;
    let basin_lo = grid[best.saturating_sub(1)].0;
    let basin_hi = grid[(best + 1).min(n - 1)].0;
    let in_basin = xg >= basin_lo && xg <= basin_hi;

    let mut candidates: Vec<(f64, f64)> = vec![grid[best]];
    if in_basin {
        candidates.push((xg, fg));
    } else {
        let (xb, fb, eb) = golden_section(&mut f, basin_lo, basin_hi, tol);
        evaluations += eb;
        candidates.push((xb, fb));
        if fg < fb {
            candidates.push((xg, fg));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (x, value) = candidates
        .iter()
        .copied()
        .fold(candidates[0], |acc, c| if c.1 < acc.1 { c } else { acc });
    Min1d { x, value, multimodal: !in_basin, evaluations }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_section<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64, tol: f64) -> (f64, f64, usize) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut evals = 2;
    while (b - a) > tol && evals < 10_000 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    if fc <= fd {
        (c, fc, evals)
    } else {
        (d, fd, evals)
    }
}

/// The closed parameter domain `{(x, y) : 0 <= x <= split <= y <= 1}`.
///
/// Points on the two inner edges (`x == split` or `y == split`) all describe
/// the same claim, so they are mapped to the corner `(split, split)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDomain {
    pub split: f64,
}

impl SplitDomain {
    pub fn new(split: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&split) {
            return Err(Error::InvalidParameter(format!("split {split} outside [0, 1]")));
        }
        Ok(Self { split })
    }

    pub fn canonical(&self, x: f64, y: f64) -> (f64, f64) {
        let z = self.split;
        let x = x.clamp(0.0, z);
        let y = y.clamp(z, 1.0);
        if x >= z || y <= z {
            (z, z)
        } else {
            (x, y)
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.split).contains(&x) && (self.split..=1.0).contains(&y)
    }
}

/// Result of [`minimize_2d`].
#[derive(Debug, Clone, PartialEq)]
pub struct Min2d {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    /// Range of the objective over the coarse grid was below [`FLAT_TOL`].
    pub flat: bool,
    /// Canonical grid points within [`NEAR_TOL`] of the minimum (truncated).
    pub near_minimizers: Vec<(f64, f64)>,
    pub near_minimizer_count: usize,
    pub evaluations: usize,
}

pub const FLAT_TOL: f64 = 1e-9;
pub const NEAR_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;
const MAX_REPORTED: usize = 32;
const REFINE_POINTS: usize = 9;

fn lex_less(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Coarse grid + nested refinement over a [`SplitDomain`], with the edge
/// families `x = 0` and `y = 1` searched separately.
pub fn minimize_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    domain: &SplitDomain,
    coarse_n: usize,
    rounds: usize,
) -> Min2d {
    let z = domain.split;
    let n = coarse_n.max(2);
    let mut evaluations = 0usize;
    fn eval<F: FnMut(f64, f64) -> f64>(
        f: &mut F,
        domain: &SplitDomain,
        x: f64,
        y: f64,
        evaluations: &mut usize,
    ) -> ((f64, f64), f64) {
        let p = domain.canonical(x, y);
        *evaluations += 1;
        (p, f(p.0, p.1))
    }

    let axis = |lo: f64, hi: f64, i: usize| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    let mut grid = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = axis(0.0, z, i);
        for j in 0..n {
            let y = axis(z, 1.0, j);
            grid.push(eval(&mut f, domain, x, y, &mut evaluations));
        }
    }
    let (mut gmin, mut gmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, v) in &grid {
        gmin = gmin.min(v);
        gmax = gmax.max(v);
    }
    let flat = gmax - gmin < FLAT_TOL;

    let mut near: Vec<(f64, f64)> = grid
        .iter()
        .filter(|(_, v)| *v <= gmin + NEAR_TOL)
        .map(|(p, _)| *p)
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    near.dedup();
    let near_minimizer_count = near.len();

    let pick = |cands: &[((f64, f64), f64)]| -> ((f64, f64), f64) {
        let best = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let mut winner = None::<((f64, f64), f64)>;
        for c in cands.iter().filter(|c| c.1 <= best + TIE_TOL * best.abs()) {
            winner = match winner {
                Some(w) if !lex_less(c.0, w.0) => Some(w),
                _ => Some(*c),
            };
        }
        winner.expect("non-empty candidate set")
    };

    if flat {
        let (p, value) = pick(&grid);
        near.truncate(MAX_REPORTED);
        return Min2d {
            x: p.0,
            y: p.1,
            value,
            flat,
            near_minimizers: near,
            near_minimizer_count,
            evaluations,
        };
    }

    let (start, start_val) = pick(&grid);
    let mut candidates = vec![(start, start_val)];

    // Nested refinement around the best grid point.
    let (mut cx, mut cy) = start;
    let mut cval = start_val;
    let mut hx = z / (n - 1) as f64;
    let mut hy = (1.0 - z) / (n - 1) as f64;
    for _ in 0..rounds {
        let (x0, x1) = ((cx - hx).max(0.0), (cx + hx).min(z));
        let (y0, y1) = ((cy - hy).max(z), (cy + hy).min(1.0));
        let mut local = vec![((cx, cy), cval)];
        for i in 0..REFINE_POINTS {
            let x = x0 + (x1 - x0) * i as f64 / (REFINE_POINTS - 1) as f64;
            for j in 0..REFINE_POINTS {
                let y = y0 + (y1 - y0) * j as f64 / (REFINE_POINTS - 1) as f64;
                local.push(eval(&mut f, domain, x, y, &mut evaluations));
            }
        }
        let (p, v) = pick(&local);
        cx = p.0;
        cy = p.1;
        cval = v;
        hx *= 0.5;
        hy *= 0.5;
    }
    candidates.push(((cx, cy), cval));

    // Edge families x = 0 and y = 1, plus the corner.
    let tol = 1e-12;
    let left = minimize_1d(|y| f_at(&mut f, domain, 0.0, y), z, 1.0, tol);
    evaluations += left.evaluations;
    candidates.push((domain.canonical(0.0, left.x), left.value));
    let top = minimize_1d(|x| f_at(&mut f, domain, x, 1.0), 0.0, z, tol);
    evaluations += top.evaluations;
    candidates.push((domain.canonical(top.x, 1.0), top.value));
    candidates.push(eval(&mut f, domain, z, z, &mut evaluations));

    let (p, value) = pick(&candidates);
    near.truncate(MAX_REPORTED);
    Min2d {
        x: p.0,
        y: p.1,
        value,
        flat,
        near_minimizers: near,
        near_minimizer_count,
        evaluations,
    }
}

fn f_at<F: FnMut(f64, f64) -> f64>(f: &mut F, domain: &SplitDomain, x: f64, y: f64) -> f64 {
    let p = domain.canonical(x, y);
    f(p.0, p.1)
}

pub const QUAD_MAX_SUBDIVISIONS: usize = 1_000_000;
const QUAD_MIN_DEPTH: u32 = 2;
const QUAD_MAX_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature of `f` over `[lo, hi]` to absolute error `tol`,
/// splitting first at every breakpoint strictly inside the interval.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut total = 0.0;
    let mut subdivisions = 0usize;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let share = tol * (b - a) / (hi - lo);
        total += simpson_segment(&mut f, a, b, share, &mut subdivisions)?;
    }
    Ok(total)
}

fn simpson_segment<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    subdivisions: &mut usize,
) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    struct Task {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }
    let mut stack = vec![Task { a, b, fa, fm, fb, whole, tol, depth: 0 }];
    let mut sum = 0.0;
    while let Some(t) = stack.pop() {
        let m = 0.5 * (t.a + t.b);
        let lm = 0.5 * (t.a + m);
        let rm = 0.5 * (m + t.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - t.a) / 6.0 * (t.fa + 4.0 * flm + t.fm);
        let right = (t.b - m) / 6.0 * (t.fm + 4.0 * frm + t.fb);
        let delta = left + right - t.whole;
        *subdivisions += 1;
        if *subdivisions > QUAD_MAX_SUBDIVISIONS {
            return Err(Error::NonConvergence {
                context: "integrate_adaptive".into(),
                iterations: *subdivisions,
                residual: delta.abs(),
            });
        }
        let accept = (t.depth >= QUAD_MIN_DEPTH && delta.abs() <= 15.0 * t.tol)
            || t.depth >= QUAD_MAX_DEPTH
            || m <= t.a
            || m >= t.b;
        if accept {
            sum += left + right + delta / 15.0;
        } else {
            stack.push(Task { a: t.a, b: m, fa: t.fa, fm: flm, fb: t.fm, whole: left, tol: 0.5 * t.tol, depth: t.depth + 1 });
            stack.push(Task { a: m, b: t.b, fa: t.fm, fm: frm, fb: t.fb, whole: right, tol: 0.5 * t.tol, depth: t.depth + 1 });
        }
    }
    Ok(sum)
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn root_resubstitution(a in 0.1f64..3.0, shift in -0.9f64..0.9) {
            let tol = 1e-12;
            let f = |x: f64| a * (x - shift) + (x - shift).powi(3);
            let r = root_bracketed(f, Bracket::new(-1.0, 1.0).unwrap(), tol).unwrap();
            prop_assert!(f(r).abs() <= 10.0 * tol * a.max(1.0) * 4.0);
        }

        #[test]
        fn simpson_exact_on_piecewise_linear(
            knots in proptest::collection::vec((0.0f64..1.0, -3.0f64..3.0), 1..6)
        ) {
            let mut ks: Vec<(f64, f64)> = knots;
            ks.sort_by(|a, b| a.0.total_cmp(&b.0));
            ks.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
            let mut pts = vec![(0.0, 0.5)];
            pts.extend(ks.iter().copied().filter(|k| k.0 > 1e-6 && k.0 < 1.0 - 1e-6));
            pts.push((1.0, -0.5));
            let f = |t: f64| {
                let i = pts.partition_point(|p| p.0 <= t).clamp(1, pts.len() - 1);
                let (a, b) = (pts[i - 1], pts[i]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            };
            let exact: f64 = pts.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
            let bps: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let v = integrate_adaptive(f, 0.0, 1.0, 1e-12, &bps).unwrap();
            prop_assert!((v - exact).abs() <= 1e-14);
        }
    }
}
