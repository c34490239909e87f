//! The adaptive gauge (Henstock-Kurzweil) integrator.
//!
//! Every value returned is a Riemann sum `sum f(tag) nu(cell)` over a
//! delta-fine tagged partition; the integrator's job is to search for a
//! gauge fine enough that successive sums agree.
//!
//! Within a cell the sum is taken over five sub-cells cut at the cumulative
//! Gauss-Legendre weights and tagged at the nodes, so for Lebesgue measure a
//! cell contributes exactly its Gauss rule.
//!
//! Each bounded segment starts from a uniform mesh. At level `k` a cell is
//! bisected when the discrepancy between its own sum and the sum over its two
//! halves exceeds its length share of a threshold `eps_k` that shrinks by 4
//! per level down to the segment tolerance. The level-`k` value is the
//! halves' sum over the level-`k` mesh. Iteration stops once two successive levels
//! differ by at most half the segment tolerance and the signed sum of
//! per-cell discrepancies is below the same bound. The stop test is global,
//! which is what lets oscillatory, conditionally convergent integrands
//! terminate: their local errors cancel.
//!
//! Cells touching an exempt point are tagged at that point (where the
//! integrand reads as `0`) and shrunk geometrically until the peeled pieces
//! stop contributing. Unbounded sets end in a tail cell tagged `+inf`.

use crate::domain::{product_term, Interval, MeasurableSet, TaggedPartition};
use crate::error::{Error, Result};
use crate::integrand::{sort_dedup, Integrand};
use crate::measure::{Density, PiecewisePoly, ScalarMeasure};
use crate::scalar::Real;

/// Tuning knobs for [`hk_integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HkOptions<T = f64> {
    /// Target absolute accuracy.
    pub tol: T,
    /// Cap on refinement levels per segment.
    pub max_levels: usize,
    /// Cap on cells visited per segment.
    pub max_cells: usize,
    /// Uniform cells per segment at level 0.
    pub initial_cells: usize,
    /// Cap on geometric shrink steps next to an exempt point.
    pub max_peel_steps: usize,
    /// Cap on doublings of `b_inf` for unbounded sets.
    pub max_doublings: usize,
}

impl<T: Real> HkOptions<T> {
    pub fn new(tol: T) -> Self {
        Self { tol, max_levels: 48, max_cells: 1 << 27, initial_cells: 8, max_peel_steps: 80, max_doublings: 80 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) || !self.tol.is_finite() {
            return Err(Error::InvalidTolerance(self.tol.to_f64_lossy()));
        }
        if self.initial_cells == 0 {
            return Err(Error::InvalidArgument("initial_cells must be positive".into()));
        }
        Ok(())
    }
}

/// Value of a gauge integral with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HkResult<T = f64> {
    pub value: T,
    /// Discrepancy between the last two accepted levels (`<= tol/2` on success).
    pub error_estimate: T,
    pub levels_used: usize,
}

/// `(HK) int_A f dm` to within `opts.tol`.
///
/// Unbounded parts of `A` are integrated as in [`hk_integrate_unbounded`]
/// without an envelope.
pub fn hk_integrate<T: Real>(
    f: &Integrand<T>,
    a: &MeasurableSet<T>,
    m: &ScalarMeasure<T>,
    opts: &HkOptions<T>,
) -> Result<HkResult<T>> {
    Ok(run(f, a, m, opts, None, false)?.0)
}

/// `(HK) int_A f dm` for `A` reaching `+inf`.
///
/// `f` must declare `f(+inf) = 0`. When `envelope(b)` bounds
/// `|int_(b,+inf) f dm|`, the cutoff `b_inf` grows until the envelope is
/// below `tol/4`; otherwise it doubles until two consecutive doubling pieces
/// are negligible, failing with `TailNotControlled`.
pub fn hk_integrate_unbounded<T: Real>(
    f: &Integrand<T>,
    a: &MeasurableSet<T>,
    m: &ScalarMeasure<T>,
    opts: &HkOptions<T>,
    envelope: Option<&dyn Fn(T) -> T>,
) -> Result<HkResult<T>> {
    Ok(run(f, a, m, opts, envelope, false)?.0)
}

/// Like [`hk_integrate`], also returning the tagged partition whose Riemann sum is the value.
pub fn hk_integrate_with_partition<T: Real>(
    f: &Integrand<T>,
    a: &MeasurableSet<T>,
    m: &ScalarMeasure<T>,
    opts: &HkOptions<T>,
) -> Result<(HkResult<T>, TaggedPartition<T>)> {
    let (r, items) = run(f, a, m, opts, None, true)?;
    Ok((r, TaggedPartition::from_sorted_unchecked(items)))
}

type Cells<T> = Vec<(Interval<T>, T)>;

struct Acc<T> {
    value: T,
    err: T,
    levels: usize,
    cells: Cells<T>,
}

impl<T: Real> Acc<T> {
    fn add(&mut self, r: SegResult<T>) {
        self.value = self.value + r.value;
        self.err = self.err + r.err;
        self.levels = self.levels.max(r.levels);
        self.cells.extend(r.cells);
    }
}

fn run<T: Real>(
    f: &Integrand<T>,
    a: &MeasurableSet<T>,
    m: &ScalarMeasure<T>,
    opts: &HkOptions<T>,
    envelope: Option<&dyn Fn(T) -> T>,
    collect: bool,
) -> Result<(HkResult<T>, Cells<T>)> {
    opts.validate()?;
    let has_tail = a.parts().iter().any(|p| p.hi == T::infinity());
    if a.parts().iter().any(|p| p.lo == T::neg_infinity()) {
        return Err(Error::InvalidArgument("sets must be bounded below".into()));
    }
    if has_tail && f.value_at_infinity() != Some(T::zero()) {
        return Err(Error::MissingValueAtInfinity);
    }
    let bounded_tol = if has_tail { opts.tol / T::lit(2.0) } else { opts.tol };
    let bounded_len: T = a.parts().iter().filter(|p| p.is_bounded()).map(Interval::width).fold(T::zero(), |x, y| x + y);
    let mut acc = Acc { value: T::zero(), err: T::zero(), levels: 0, cells: Vec::new() };
    let ctx = Ctx { f, m, opts, collect };
    for part in a.parts() {
        if part.is_bounded() {
            let share = if bounded_len > T::zero() { bounded_tol * part.width() / bounded_len } else { bounded_tol };
            integrate_part(&ctx, part, share, &mut acc)?;
        } else {
            integrate_tail_part(&ctx, part, opts.tol / T::lit(2.0), envelope, &mut acc)?;
        }
    }
    let Acc { value, err, levels, cells, .. } = acc;
    Ok((HkResult { value, error_estimate: err, levels_used: levels }, cells))
}

struct Ctx<'a, T: Real> {
    f: &'a Integrand<T>,
    m: &'a ScalarMeasure<T>,
    opts: &'a HkOptions<T>,
    collect: bool,
}

struct SegResult<T> {
    value: T,
    err: T,
    levels: usize,
    cells: Cells<T>,
}

impl<T: Real> SegResult<T> {
    fn exact(value: T, cells: Cells<T>) -> Self {
        Self { value, err: T::zero(), levels: 0, cells }
    }
}

/// Open segment `(lo, hi)` plus which ends it owns and which are exempt.
#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    lo: T,
    hi: T,
    closed_lo: bool,
    closed_hi: bool,
    exempt_lo: bool,
    exempt_hi: bool,
}

fn integrate_part<T: Real>(ctx: &Ctx<'_, T>, part: &Interval<T>, share: T, acc: &mut Acc<T>) -> Result<()> {
    if part.is_degenerate() {
        let x = part.lo;
        let v = ctx.f.eval(x);
        let mass = ctx.m.measure_of_interval(part);
        let term = product_term(v, mass, x)?;
        acc.add(SegResult::exact(term, if ctx.collect { vec![(*part, x)] } else { Vec::new() }));
        return Ok(());
    }
    let atoms: Vec<T> = ctx.m.atoms().iter().map(|a| a.0).filter(|&x| part.contains(x)).collect();
    let mut cuts: Vec<T> = ctx
        .f
        .breakpoints()
        .iter()
        .chain(ctx.f.exempt())
        .chain(ctx.m.breakpoints().iter())
        .copied()
        .filter(|&x| x > part.lo && x < part.hi)
        .collect();
    cuts.extend(atoms.iter().copied());
    cuts.extend([part.lo, part.hi]);
    sort_dedup(&mut cuts);
    let is_atom = |x: T| atoms.contains(&x);
    let len = part.width();
    for (i, w) in cuts.windows(2).enumerate() {
        let (u, v) = (w[0], w[1]);
        if i == 0 && part.contains(u) && is_atom(u) {
            atom_cell(ctx, u, acc)?;
        }
        let seg = Segment {
            lo: u,
            hi: v,
            closed_lo: i == 0 && part.closed_lo && !is_atom(u),
            closed_hi: !is_atom(v) && (v < part.hi || part.closed_hi),
            exempt_lo: ctx.f.is_exempt(u),
            exempt_hi: ctx.f.is_exempt(v),
        };
        let seg_share = share * (v - u) / len;
        acc.add(integrate_segment(ctx, seg, seg_share)?);
        if is_atom(v) && part.contains(v) {
            atom_cell(ctx, v, acc)?;
        }
    }
    Ok(())
}

fn atom_cell<T: Real>(ctx: &Ctx<'_, T>, x: T, acc: &mut Acc<T>) -> Result<()> {
    let cell = Interval::point(x);
    let term = product_term(ctx.f.eval(x), ctx.m.measure_of_interval(&cell), x)?;
    acc.add(SegResult::exact(term, if ctx.collect { vec![(cell, x)] } else { Vec::new() }));
    Ok(())
}

fn integrate_segment<T: Real>(ctx: &Ctx<'_, T>, seg: Segment<T>, share: T) -> Result<SegResult<T>> {
    match (seg.exempt_lo, seg.exempt_hi) {
        (false, false) => adaptive(ctx, seg, share, 0),
        (true, true) => {
            let mid = seg.lo + (seg.hi - seg.lo) / T::lit(2.0);
            let left = Segment { hi: mid, closed_hi: true, exempt_hi: false, ..seg };
            let right = Segment { lo: mid, closed_lo: false, exempt_lo: false, ..seg };
            let half = share / T::lit(2.0);
            let mut a = peel(ctx, left, half)?;
            let b = peel(ctx, right, half)?;
            a.value = a.value + b.value;
            a.err = a.err + b.err;
            a.levels = a.levels.max(b.levels);
            a.cells.extend(b.cells);
            Ok(a)
        }
        _ => peel(ctx, seg, share),
    }
}

/// One exempt end: the cell touching it is tagged there (value `0`) and shrunk
/// by halves until two consecutive peeled pieces are below `share/8`.
fn peel<T: Real>(ctx: &Ctx<'_, T>, seg: Segment<T>, share: T) -> Result<SegResult<T>> {
    let two = T::lit(2.0);
    let from_lo = seg.exempt_lo;
    let (e, z) = if from_lo { (seg.lo, seg.hi) } else { (seg.hi, seg.lo) };
    let dir = if from_lo { T::one() } else { -T::one() };
    let mut w = (z - e).abs() / two;
    let at = |w: T| e + dir * w;
    // body between e + w0 and z
    let body = if from_lo {
        Segment { lo: at(w), closed_lo: false, exempt_lo: false, ..seg }
    } else {
        Segment { hi: at(w), closed_hi: true, exempt_hi: false, ..seg }
    };
    let mut out = adaptive(ctx, body, share / two, 0)?;
    let mut pieces: Vec<SegResult<T>> = Vec::new();
    // stop on a piece below share/8 that follows one within the share
    let (small, settling) = (share / T::lit(8.0), share);
    let mut prev = T::infinity();
    let mut done = false;
    let mut depth_hint = out.levels;
    for j in 0..ctx.opts.max_peel_steps {
        // shares sum to share/4 over any number of pieces
        let piece_share = share / T::lit(4.0) / T::from_usize_lossy((j + 1) * (j + 2));
        let inner = w / two;
        let (plo, phi) = if from_lo { (at(inner), at(w)) } else { (at(w), at(inner)) };
        let piece = Segment {
            lo: plo,
            hi: phi,
            closed_lo: !from_lo,
            closed_hi: from_lo,
            exempt_lo: false,
            exempt_hi: false,
        };
        if !(plo < phi) {
            break;
        }
        let r = adaptive(ctx, piece, piece_share, depth_hint + 1)?;
        let v = r.value.abs();
        depth_hint = r.levels;
        pieces.push(r);
        w = inner;
        if v <= small && prev <= settling {
            done = true;
            break;
        }
        prev = v;
    }
    if !done {
        return Err(Error::NoConvergence { levels: ctx.opts.max_peel_steps, discrepancy: w.to_f64_lossy() });
    }
    // exempt cell: tag at e, f(e) reads as 0
    let cell = if from_lo {
        Interval { lo: e, hi: at(w), closed_lo: seg.closed_lo, closed_hi: true }
    } else {
        Interval { lo: at(w), hi: e, closed_lo: false, closed_hi: seg.closed_hi }
    };
    let exempt_cells: Cells<T> = if ctx.collect { vec![(cell, e)] } else { Vec::new() };
    // assemble left to right
    let mut ordered: Vec<SegResult<T>> = Vec::new();
    if from_lo {
        ordered.push(SegResult::exact(T::zero(), exempt_cells));
        ordered.extend(pieces.into_iter().rev());
        let body = std::mem::replace(&mut out, SegResult::exact(T::zero(), Vec::new()));
        ordered.push(body);
    } else {
        let body = std::mem::replace(&mut out, SegResult::exact(T::zero(), Vec::new()));
        ordered.push(body);
        ordered.extend(pieces);
        ordered.push(SegResult::exact(T::zero(), exempt_cells));
    }
    let mut total = SegResult::exact(T::zero(), Vec::new());
    for r in ordered {
        total.value = total.value + r.value;
        total.err = total.err + r.err;
        total.levels = total.levels.max(r.levels);
        total.cells.extend(r.cells);
    }
    Ok(total)
}

// 5-point Gauss-Legendre on [0, 1]: nodes, and the cumulative weights that
// separate them. Cells cut there and tagged at the nodes form a tagged
// partition whose Riemann sum against Lebesgue measure is the Gauss rule.
const GAUSS_NODES: [f64; 5] = [
    0.046_910_077_030_668_004,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
const GAUSS_CUTS: [f64; 4] = [
    0.118_463_442_528_094_54,
    0.357_777_777_777_777_8,
    0.642_222_222_222_222_2,
    0.881_536_557_471_905_5,
];

/// Interior cuts `c_1 < ... < c_4` of `[lo, hi]` with `int_{c_i}^{c_{i+1}} rho = w_i h rho(x_i)`,
/// or `None` when `rho` is not one signed polynomial there or a node would leave its sub-cell.
fn weighted_cuts<T: Real>(pp: &PiecewisePoly<T>, lo: T, hi: T) -> Option<[T; 4]> {
    let h = hi - lo;
    let p = pp.piece_at(lo + h / T::lit(2.0))?;
    if p.degree()? == 0 {
        return None;
    }
    let nodes: [T; 5] = std::array::from_fn(|i| lo + h * T::lit(GAUSS_NODES[i]));
    let rho: [T; 5] = std::array::from_fn(|i| p.eval(nodes[i]));
    let positive = rho[0] > T::zero();
    if rho.iter().any(|r| (*r > T::zero()) != positive || *r == T::zero()) {
        return None;
    }
    let mut target = T::zero();
    let mut prev = 0.0;
    let mut out = [lo; 4];
    for k in 0..4 {
        let w = GAUSS_CUTS[k] - prev;
        prev = GAUSS_CUTS[k];
        target = target + T::lit(w) * h * rho[k];
        let (left, right) = (nodes[k], nodes[k + 1]);
        let mut c = lo + h * T::lit(GAUSS_CUTS[k]);
        for _ in 0..8 {
            let g = p.integral(lo, c) - target;
            let d = p.eval(c);
            if d == T::zero() {
                return None;
            }
            let next = c - g / d;
            if !(next > left && next < right) {
                return None;
            }
            let done = (next - c).abs() <= T::epsilon() * T::lit(4.0) * (hi.abs() + h);
            c = next;
            if done {
                break;
            }
        }
        out[k] = c;
    }
    Some(out)
}

/// Compensated accumulator.
#[derive(Clone, Copy)]
struct Kahan<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Kahan<T> {
    fn zero() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    fn add(&mut self, v: T) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

struct Levels<T> {
    // level-k value is the prefix sum of `diff[0..=k]`
    diff: Vec<Kahan<T>>,
    est_diff: Vec<Kahan<T>>,
    splits: Vec<usize>,
}

struct Dfs<'a, 'c, T: Real> {
    ctx: &'a Ctx<'c, T>,
    seg: Segment<T>,
    thresholds: Vec<T>,
    kmax: usize,
    levels: Levels<T>,
    visited: usize,
    collect_at: Option<usize>,
    cells: Cells<T>,
}

impl<T: Real> Dfs<'_, '_, T> {
    /// Sub-cells of `[lo, hi]` tagged at the Gauss nodes. They are cut at the
    /// cumulative Gauss weights, or for a polynomial density where its mass
    /// matches the weights, so the sum is the Gauss rule for `f rho`.
    fn subcells(&self, lo: T, hi: T) -> [(Interval<T>, T); 5] {
        let h = hi - lo;
        let mut cuts = [lo; 6];
        for (i, c) in GAUSS_CUTS.iter().enumerate() {
            cuts[i + 1] = lo + h * T::lit(*c);
        }
        cuts[5] = hi;
        if let Density::Poly(pp) = &self.ctx.m.density {
            if let Some(inner) = weighted_cuts(pp, lo, hi) {
                cuts[1..5].copy_from_slice(&inner);
            }
        }
        std::array::from_fn(|i| {
            let cell = Interval {
                lo: cuts[i],
                hi: cuts[i + 1],
                closed_lo: i == 0 && lo == self.seg.lo && self.seg.closed_lo,
                closed_hi: i < 4 || hi < self.seg.hi || self.seg.closed_hi,
            };
            (cell, lo + h * T::lit(GAUSS_NODES[i]))
        })
    }

    /// Riemann sum over [`Self::subcells`].
    fn term(&self, lo: T, hi: T) -> Result<T> {
        let mut s = T::zero();
        for (cell, tag) in self.subcells(lo, hi) {
            let mass = self.ctx.m.measure_of_interval(&cell);
            s = s + product_term(self.ctx.f.eval_raw(tag), mass, tag)?;
        }
        Ok(s)
    }

    fn visit(&mut self, lo: T, hi: T, coarse: T, level: usize) -> Result<()> {
        self.visited += 1;
        if self.visited > self.ctx.opts.max_cells {
            return Err(Error::NoConvergence { levels: level, discrepancy: f64::NAN });
        }
        let mid = lo + (hi - lo) / T::lit(2.0);
        let (left, right) = (self.term(lo, mid)?, self.term(mid, hi)?);
        let fine = left + right;
        let disc = (fine - coarse).abs();
        let weight = (hi - lo) / (self.seg.hi - self.seg.lo);
        let split_at = (level..=self.kmax).find(|&k| disc > self.thresholds[k] * weight);
        let last = split_at.unwrap_or(self.kmax);
        self.levels.diff[level].add(fine);
        self.levels.est_diff[level].add(fine - coarse);
        if last < self.kmax {
            self.levels.diff[last + 1].add(-fine);
            self.levels.est_diff[last + 1].add(coarse - fine);
        }
        if let Some(k) = self.collect_at {
            if level <= k && k <= last {
                self.cells.extend(self.subcells(lo, mid));
                self.cells.extend(self.subcells(mid, hi));
                return Ok(());
            }
        }
        if let Some(k) = split_at {
            self.levels.splits[k] += 1;
            if k < self.kmax && mid > lo && mid < hi {
                self.visit(lo, mid, left, k + 1)?;
                self.visit(mid, hi, right, k + 1)?;
            }
        }
        Ok(())
    }
}

/// `depth_hint` is the expected accepted level, used to size the first pass.
fn adaptive<T: Real>(ctx: &Ctx<'_, T>, seg: Segment<T>, share: T, depth_hint: usize) -> Result<SegResult<T>> {
    if !(seg.lo < seg.hi) {
        return Ok(SegResult::exact(T::zero(), Vec::new()));
    }
    let n = ctx.opts.initial_cells;
    let h = (seg.hi - seg.lo) / T::from_usize_lossy(n);
    let edges: Vec<T> = (0..=n)
        .map(|k| if k == n { seg.hi } else { seg.lo + h * T::from_usize_lossy(k) })
        .collect();
    let probe = Dfs {
        ctx,
        seg,
        thresholds: Vec::new(),
        kmax: 0,
        levels: Levels { diff: Vec::new(), est_diff: Vec::new(), splits: Vec::new() },
        visited: 0,
        collect_at: None,
        cells: Vec::new(),
    };
    let mut coarse = Vec::with_capacity(n);
    let mut scale = T::zero();
    for w in edges.windows(2) {
        let c = probe.term(w[0], w[1])?;
        coarse.push(c);
        scale = scale + c.abs();
    }
    let eps0 = scale.max(share);
    let half = share / T::lit(2.0);
    // the schedule must reach the floor `share`, or unsplit cells are never checked against it
    let mut floor_level = 0;
    while floor_level < ctx.opts.max_levels && eps0 / T::lit(4.0).powi(floor_level as i32) > share {
        floor_level += 1;
    }
    let mut kmax = (depth_hint + 2).max(10).max(floor_level + 1).min(ctx.opts.max_levels);
    loop {
        let thresholds: Vec<T> = (0..=kmax)
            .map(|k| (eps0 / T::lit(4.0).powi(k as i32)).max(share))
            .collect();
        let mut dfs = Dfs {
            ctx,
            seg,
            thresholds,
            kmax,
            levels: Levels {
                diff: vec![Kahan::zero(); kmax + 1],
                est_diff: vec![Kahan::zero(); kmax + 1],
                splits: vec![0; kmax + 1],
            },
            visited: 0,
            collect_at: None,
            cells: Vec::new(),
        };
        for (i, w) in edges.windows(2).enumerate() {
            dfs.visit(w[0], w[1], coarse[i], 0)?;
        }
        let mut sums = Vec::with_capacity(kmax + 1);
        let mut ests = Vec::with_capacity(kmax + 1);
        let (mut s, mut e) = (Kahan::zero(), Kahan::zero());
        for k in 0..=kmax {
            s.add(dfs.levels.diff[k].sum);
            s.add(-dfs.levels.diff[k].comp);
            e.add(dfs.levels.est_diff[k].sum);
            e.add(-dfs.levels.est_diff[k].comp);
            sums.push(s.sum);
            ests.push(e.sum);
        }
        let floored = dfs.thresholds[kmax] <= share;
        let mut last_disc = T::nan();
        let mut accepted = None;
        for k in 1..=kmax {
            let changed = dfs.levels.splits[k - 1] > 0;
            let settled = floored && dfs.levels.splits[k..].iter().all(|&c| c == 0);
            if !changed && !settled {
                continue;
            }
            let disc = (sums[k] - sums[k - 1]).abs();
            last_disc = disc;
            let est_ok = ests[k].abs() <= T::lit(1.5) * share || settled;
            if disc <= half && est_ok {
                accepted = Some((k, disc));
                break;
            }
        }
        if let Some((k, disc)) = accepted {
            let cells = if ctx.collect {
                let mut replay = Dfs { collect_at: Some(k), cells: Vec::new(), visited: 0, ..dfs };
                replay.levels = Levels {
                    diff: vec![Kahan::zero(); kmax + 1],
                    est_diff: vec![Kahan::zero(); kmax + 1],
                    splits: vec![0; kmax + 1],
                };
                for (i, w) in edges.windows(2).enumerate() {
                    replay.visit(w[0], w[1], coarse[i], 0)?;
                }
                replay.cells
            } else {
                Vec::new()
            };
            return Ok(SegResult { value: sums[k], err: disc, levels: k, cells });
        }
        if kmax >= ctx.opts.max_levels {
            return Err(Error::NoConvergence { levels: kmax, discrepancy: last_disc.to_f64_lossy() });
        }
        kmax = (kmax + 8).min(ctx.opts.max_levels);
    }
}

fn integrate_tail_part<T: Real>(
    ctx: &Ctx<'_, T>,
    part: &Interval<T>,
    share: T,
    envelope: Option<&dyn Fn(T) -> T>,
    acc: &mut Acc<T>,
) -> Result<()> {
    let two = T::lit(2.0);
    let a = part.lo;
    let start = a + T::one().max(a.abs());
    let mut pieces = vec![Interval { lo: a, hi: start, closed_lo: part.closed_lo, closed_hi: true }];
    let mut b = start;
    let quarter = share / T::lit(4.0);
    let tail_cell = |b: T| Interval { lo: b, hi: T::infinity(), closed_lo: false, closed_hi: part.closed_hi };
    let finish = |pieces: &[Interval<T>], b: T, acc: &mut Acc<T>| -> Result<()> {
        for (j, p) in pieces.iter().enumerate() {
            let s = if j == 0 { share / two } else { share / T::lit(4.0) / T::from_usize_lossy(j * (j + 1)) };
            integrate_part(ctx, p, s, acc)?;
        }
        let cell = tail_cell(b);
        let mass = ctx.m.measure_of_interval(&cell);
        let term = product_term(T::zero(), mass, T::infinity())?;
        acc.add(SegResult::exact(term, if ctx.collect { vec![(cell, T::infinity())] } else { Vec::new() }));
        Ok(())
    };
    if let Some(env) = envelope {
        for _ in 0..ctx.opts.max_doublings {
            if env(b).abs() <= quarter {
                return finish(&pieces, b, acc);
            }
            let nb = a + (b - a) * two;
            pieces.push(Interval { lo: b, hi: nb, closed_lo: false, closed_hi: true });
            b = nb;
        }
        return Err(Error::TailNotControlled { b_inf: b.to_f64_lossy() });
    }
    // no envelope: integrate doubling pieces until two in a row are negligible
    let mut scratch = Acc { value: T::zero(), err: T::zero(), levels: 0, cells: Vec::new() };
    integrate_part(ctx, &pieces[0], share / two, &mut scratch)?;
    let mut quiet = 0;
    let small = share / T::lit(8.0);
    for j in 0..ctx.opts.max_doublings {
        let s = share / T::lit(4.0) / T::from_usize_lossy((j + 1) * (j + 2));
        let nb = a + (b - a) * two;
        let piece = Interval { lo: b, hi: nb, closed_lo: false, closed_hi: true };
        let before = scratch.value;
        integrate_part(ctx, &piece, s, &mut scratch)?;
        let v = scratch.value - before;
        b = nb;
        quiet = if v.abs() <= small { quiet + 1 } else { 0 };
        if quiet >= 2 {
            let cell = tail_cell(b);
            let mass = ctx.m.measure_of_interval(&cell);
            let term = product_term(T::zero(), mass, T::infinity())?;
            scratch.add(SegResult::exact(term, if ctx.collect { vec![(cell, T::infinity())] } else { Vec::new() }));
            let Acc { value, err, levels, cells, .. } = scratch;
            acc.add(SegResult { value, err, levels, cells });
            return Ok(());
        }
    }
    Err(Error::TailNotControlled { b_inf: b.to_f64_lossy() })
}
