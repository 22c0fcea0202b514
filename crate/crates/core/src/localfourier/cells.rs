//! Coset cells: the support of `psi` split by residue class modulo `p^k`.
//!
//! For a class `c mod p^k` with `p^k | disc(c)`, Taylor expansion gives
//! `disc(c + p^k b) = disc(c) + p^k <D, b>  (mod p^{2k})`, so the lifts in the
//! support are the solutions of `<D, b> = -t (mod p^k)` with
//! `t = disc(c) / p^k`. With `w = min(v_p(D_i), k)` there are
//! `p^{k(n-1)+w}` of them when `p^w | t` and none otherwise, and the cell's
//! contribution to the transform at `u` is `|K| e(<base, u> / p^{2k})` when
//! `u = alpha D (mod p^k)` for some `alpha`, and zero otherwise.
//!
//! [`CellTable`] produces the exact count histogram (the same one direct
//! enumeration gives); [`CellIndex`] only visits the responding cells and
//! produces a different histogram with the same value.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{residue_valuation, Zmod};
use crate::error::{Error, Result};
use crate::polycore::disc::discriminant_mod_with;
use crate::polycore::LocalGradient;
use crate::sampling::map_chunks;
use crate::Limits;

use super::direct::DirectSupport;
use super::{FourierSource, FourierValue, ResidueParams};

/// A class `c mod p^k` whose discriminant is divisible by `p^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetCell {
    /// Representative in `[0, p^k)^n`.
    pub rep: Vec<u64>,
    /// `disc(rep) mod p^{2k}`.
    pub disc: u64,
    /// `grad disc (rep) mod p^k`.
    pub grad: Vec<u64>,
    /// `min(v_p(D_i), k)`.
    pub w: u32,
    /// Whether `<D, b> = -t (mod p^k)` has solutions.
    pub solvable: bool,
    /// Index achieving `w` (0 when the gradient vanishes).
    pub pivot: usize,
    /// Inverse of `D_pivot / p^w` modulo `p^{k-w}`.
    pub pivot_unit_inv: u64,
    /// `rep + p^k b_0 mod p^{2k}` for a particular solution `b_0`.
    pub base: Vec<u64>,
}

impl CosetCell {
    /// `p^{k(n-1)+w}` if solvable, else 0.
    pub fn lift_count(&self, rp: &ResidueParams) -> u64 {
        if self.solvable {
            rp.p.pow(rp.k * (rp.n as u32 - 1) + self.w)
        } else {
            0
        }
    }

    /// `<base, u> mod p^{2k}`.
    pub fn phase_index(&self, rp: &ResidueParams, u: &[u64]) -> usize {
        let m = rp.modulus() as u128;
        self.base
            .iter()
            .zip(u)
            .fold(0u128, |acc, (&b, &x)| (acc + b as u128 * x as u128) % m) as usize
    }

    /// Adds the exact distribution of `<c, u> mod p^{2k}` over the lifts `c`
    /// of this cell lying in the support. On the kernel `K` the map
    /// `b -> <b, u> mod p^k` is a homomorphism onto a subgroup of order
    /// `p^s`, hit uniformly; `p^s` is `|image of b -> (<b,D>, <b,u>)|`
    /// divided by `|image of b -> <b,D>| = p^{k-w}`.
    pub fn add_distribution(&self, rp: &ResidueParams, u: &[u64], hist: &mut [u64]) {
        if !self.solvable {
            return;
        }
        let q = rp.cell_modulus();
        let ubar = reduce(u, q);
        let pair = pair_image_log(rp.p, rp.k, &self.grad, &ubar);
        let s = pair - (rp.k - self.w);
        let per_value = self.lift_count(rp) / rp.p.pow(s);
        let step = q * rp.p.pow(rp.k - s);
        let m = rp.modulus() as usize;
        let start = self.phase_index(rp, u);
        for r in 0..rp.p.pow(s) as usize {
            hist[(start + r * step as usize) % m] += per_value;
        }
    }

    /// `alpha mod p^{k-w}` with `u = alpha D (mod p^k)`, if one exists.
    pub fn dual_multiplier(&self, rp: &ResidueParams, ubar: &[u64]) -> Option<u64> {
        let q = rp.cell_modulus();
        if self.w == rp.k {
            return ubar.iter().all(|&x| x == 0).then_some(0);
        }
        let pw = rp.p.pow(self.w);
        let head = ubar[self.pivot];
        if head % pw != 0 {
            return None;
        }
        let small = rp.p.pow(rp.k - self.w);
        let alpha = Zmod::new(small).mul((head / pw) % small, self.pivot_unit_inv);
        let ring = Zmod::new(q);
        self.grad
            .iter()
            .zip(ubar)
            .all(|(&d, &x)| ring.mul(alpha, d) == x)
            .then_some(alpha)
    }
}

/// All cells for one `(n, p, k)`.
#[derive(Debug)]
pub struct CellTable {
    pub params: ResidueParams,
    /// Number of classes mod `p^k` examined, `p^{kn}`.
    pub classes: u64,
    pub cells: Vec<CosetCell>,
}

const BUILD_CHUNK: u64 = 1 << 12;

fn decode(mut idx: u64, radix: u64, out: &mut [u64]) {
    for x in out.iter_mut() {
        *x = idx % radix;
        idx /= radix;
    }
}

fn key(ubar: &[u64], radix: u64) -> u64 {
    ubar.iter().rev().fold(0u64, |acc, &x| acc * radix + x)
}

impl CellTable {
    pub fn build(rp: ResidueParams, limits: &Limits) -> Result<CellTable> {
        Limits::check("coset cells p^(kn)", rp.log2_cells(), limits.coset_bits.min(62))?;
        let q = rp.cell_modulus();
        let big = rp.modulus();
        let classes = q.pow(rp.n as u32);
        let grad = if rp.n > 1 {
            Some(LocalGradient::new(rp.n, rp.p, rp.k)?)
        } else {
            None
        };
        let wide = Zmod::new(big);
        let narrow = Zmod::new(q);
        let chunks = map_chunks(classes, BUILD_CHUNK, |_, start, len| {
            let mut rep = vec![0u64; rp.n];
            let mut scratch = Vec::new();
            let mut gscratch = Vec::new();
            let mut found = Vec::new();
            for idx in start..start + len {
                decode(idx, q, &mut rep);
                let disc = discriminant_mod_with(&rep, &wide, rp.p, 2 * rp.k, &mut scratch);
                if disc % q != 0 {
                    continue;
                }
                let d = grad
                    .as_ref()
                    .expect("n = 1 never has p^k | disc")
                    .gradient(&rep, &mut gscratch);
                found.push(make_cell(&rp, &narrow, rep.clone(), disc, d));
            }
            found
        });
        Ok(CellTable {
            params: rp,
            classes,
            cells: chunks.into_iter().flatten().collect(),
        })
    }

    /// Tables are memoized per `(n, p, k)`.
    pub fn shared(rp: ResidueParams, limits: &Limits) -> Result<Arc<CellTable>> {
        static TABLES: OnceLock<Mutex<HashMap<ResidueParams, Arc<CellTable>>>> = OnceLock::new();
        let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = tables.lock().unwrap().get(&rp) {
            return Ok(t.clone());
        }
        let table = Arc::new(CellTable::build(rp, limits)?);
        tables.lock().unwrap().insert(rp, table.clone());
        Ok(table)
    }

    /// `#{c mod p^{2k} : p^{2k} | disc(c)}`.
    pub fn support_count(&self) -> u128 {
        self.cells
            .iter()
            .map(|c| c.lift_count(&self.params) as u128)
            .sum()
    }

    pub fn solvable(&self) -> impl Iterator<Item = &CosetCell> {
        self.cells.iter().filter(|c| c.solvable)
    }

    /// Adds the value-only contribution: `|K|` at `<base, u>` when the cell
    /// responds to `u`, nothing otherwise.
    fn add_cell(&self, cell: &CosetCell, u: &[u64], hist: &mut [u64]) {
        hist[cell.phase_index(&self.params, u)] += cell.lift_count(&self.params);
    }

    /// Enumerates every lift of every cell and checks the closed-form count,
    /// the particular solution and the per-cell transform at `u`.
    pub fn verify_lifts(&self, u: &[u64], limits: &Limits) -> Result<()> {
        let rp = self.params;
        Limits::check("cell lifts p^(2kn)", rp.log2_space(), limits.direct_bits)?;
        let q = rp.cell_modulus();
        let big = rp.modulus();
        let wide = Zmod::new(big);
        let lifts = q.pow(rp.n as u32);
        let mut scratch = Vec::new();
        let mut point = vec![0u64; rp.n];
        let mut b = vec![0u64; rp.n];
        for cell in &self.cells {
            let mut direct = vec![0u64; big as usize];
            for idx in 0..lifts {
                decode(idx, q, &mut b);
                for i in 0..rp.n {
                    point[i] = cell.rep[i] + q * b[i];
                }
                if discriminant_mod_with(&point, &wide, rp.p, 2 * rp.k, &mut scratch) == 0 {
                    let j = point
                        .iter()
                        .zip(u)
                        .fold(0u128, |acc, (&c, &x)| (acc + c as u128 * x as u128) % big as u128);
                    direct[j as usize] += 1;
                }
            }
            let count: u64 = direct.iter().sum();
            if count != cell.lift_count(&rp) {
                return Err(Error::Consistency(format!(
                    "cell {:?}: {count} lifts, closed form {}",
                    cell.rep,
                    cell.lift_count(&rp)
                )));
            }
            let mut closed = vec![0u64; big as usize];
            cell.add_distribution(&rp, u, &mut closed);
            if closed != direct {
                return Err(Error::Consistency(format!(
                    "cell {:?}: distribution at {u:?} differs from lift enumeration",
                    cell.rep
                )));
            }
            let mut value = vec![0u64; big as usize];
            if cell.solvable && cell.dual_multiplier(&rp, &reduce(u, q)).is_some() {
                self.add_cell(cell, u, &mut value);
            }
            if !super::histogram_is_zero(&diff(&direct, &value), rp.p) {
                return Err(Error::Consistency(format!(
                    "cell {:?}: closed-form value at {u:?} differs from lift enumeration",
                    cell.rep
                )));
            }
        }
        Ok(())
    }

    /// Compares the closed form with direct enumeration of the whole space at
    /// each phase, and compares support counts.
    pub fn verify_direct(&self, phases: &[Vec<u64>], limits: &Limits) -> Result<()> {
        let direct = DirectSupport::build(self.params, limits)?;
        if direct.count() as u128 != self.support_count() {
            return Err(Error::Consistency(format!(
                "support count {} by cells, {} by enumeration",
                self.support_count(),
                direct.count()
            )));
        }
        for u in phases {
            let a = self.transform(u);
            let b = direct.transform(u);
            if a.histogram != b.histogram {
                return Err(Error::Consistency(format!(
                    "transform at {u:?} differs between cells and enumeration"
                )));
            }
        }
        Ok(())
    }
}

fn reduce(u: &[u64], q: u64) -> Vec<u64> {
    u.iter().map(|&x| x % q).collect()
}

/// `log_p` of the size of the subgroup of `(Z/p^k)^2` spanned by the
/// columns `(a_i, b_i)`, from the Smith form of the `2 x n` matrix.
fn pair_image_log(p: u64, k: u32, a: &[u64], b: &[u64]) -> u32 {
    let q = p.pow(k);
    let ring = Zmod::new(q);
    let val = |x: u64| residue_valuation(x, p, k);
    let mut rows = [a.to_vec(), b.to_vec()];
    let n = a.len();
    let (mut best, mut at) = (k, (0usize, 0usize));
    for (r, row) in rows.iter().enumerate() {
        for (c, &x) in row.iter().enumerate() {
            if val(x) < best {
                best = val(x);
                at = (r, c);
            }
        }
    }
    if best == k {
        return 0;
    }
    let (r, c) = at;
    let o = 1 - r;
    let pw = p.pow(best);
    // clear the other row's entry in the pivot column by a row operation
    let inv = ring.inv((rows[r][c] / pw) % q).expect("unit part");
    let factor = ring.mul(rows[o][c] / pw, inv);
    let pivot_row = rows[r].clone();
    for j in 0..n {
        rows[o][j] = ring.sub(rows[o][j], ring.mul(factor, pivot_row[j]));
    }
    debug_assert_eq!(rows[o][c], 0);
    // column operations on the pivot row leave the other row unchanged in
    // the columns that matter, since its pivot-column entry is now zero
    let second = (0..n).filter(|&j| j != c).map(|j| val(rows[o][j])).min().unwrap_or(k);
    (k - best) + (k - second)
}

/// Histogram of the difference, shifted to stay nonnegative: equal values of
/// `sum h_j zeta^j` iff this is a zero sum.
fn diff(a: &[u64], b: &[u64]) -> Vec<u64> {
    let shift = b.iter().copied().max().unwrap_or(0);
    a.iter().zip(b).map(|(&x, &y)| x + shift - y).collect()
}

fn make_cell(rp: &ResidueParams, narrow: &Zmod, rep: Vec<u64>, disc: u64, grad: Vec<u64>) -> CosetCell {
    let q = rp.cell_modulus();
    let big = rp.modulus();
    let t = disc / q;
    let (pivot, w) = grad
        .iter()
        .enumerate()
        .map(|(i, &d)| (i, residue_valuation(d, rp.p, rp.k)))
        .min_by_key(|&(i, v)| (v, i))
        .unwrap_or((0, rp.k));
    let solvable = residue_valuation(t, rp.p, rp.k) >= w;
    let mut pivot_unit_inv = 0;
    let mut base = rep.clone();
    if w < rp.k {
        let pw = rp.p.pow(w);
        let small = Zmod::new(rp.p.pow(rp.k - w));
        let unit = (grad[pivot] / pw) % small.modulus();
        pivot_unit_inv = small.inv(unit).expect("pivot unit");
        if solvable {
            let rhs = (narrow.neg(t) / pw) % small.modulus();
            let b0 = small.mul(rhs, pivot_unit_inv);
            base[pivot] = (rep[pivot] + q * b0) % big;
        }
    }
    CosetCell {
        rep,
        disc,
        grad,
        w,
        solvable,
        pivot,
        pivot_unit_inv,
        base,
    }
}

impl FourierSource for CellTable {
    fn params(&self) -> ResidueParams {
        self.params
    }

    fn histogram_into(&self, u: &[u64], hist: &mut [u64]) {
        hist.fill(0);
        for cell in self.solvable() {
            cell.add_distribution(&self.params, u, hist);
        }
    }
}

/// Solvable cells bucketed by the residues `alpha D mod p^k` of the phases
/// they respond to. A phase whose reduction is in no bucket has zero
/// transform.
#[derive(Debug)]
pub struct CellIndex {
    pub table: Arc<CellTable>,
    buckets: HashMap<u64, Vec<u32>>,
}

impl CellIndex {
    pub fn new(table: Arc<CellTable>) -> CellIndex {
        let rp = table.params;
        let q = rp.cell_modulus();
        let ring = Zmod::new(q);
        let mut buckets: HashMap<u64, Vec<u32>> = HashMap::new();
        let mut v = vec![0u64; rp.n];
        for (ci, cell) in table.cells.iter().enumerate() {
            if !cell.solvable {
                continue;
            }
            let span = rp.p.pow(rp.k - cell.w);
            for alpha in 0..span {
                for (x, &d) in v.iter_mut().zip(&cell.grad) {
                    *x = ring.mul(alpha, d);
                }
                buckets.entry(key(&v, q)).or_default().push(ci as u32);
            }
        }
        CellIndex { table, buckets }
    }

    pub fn build(rp: ResidueParams, limits: &Limits) -> Result<CellIndex> {
        Ok(CellIndex::new(CellTable::shared(rp, limits)?))
    }

    /// Reductions `u mod p^k` at which some cell responds.
    pub fn active_residues(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let rp = self.table.params;
        let q = rp.cell_modulus();
        self.buckets.keys().map(move |&k| {
            let mut v = vec![0u64; rp.n];
            decode(k, q, &mut v);
            v
        })
    }

    pub fn responds(&self, u: &[u64]) -> bool {
        let q = self.table.params.cell_modulus();
        self.buckets.contains_key(&key(&reduce(u, q), q))
    }
}

impl FourierSource for CellIndex {
    fn params(&self) -> ResidueParams {
        self.table.params
    }

    fn histogram_into(&self, u: &[u64], hist: &mut [u64]) {
        hist.fill(0);
        let q = self.table.params.cell_modulus();
        if let Some(list) = self.buckets.get(&key(&reduce(u, q), q)) {
            for &ci in list {
                self.table.add_cell(&self.table.cells[ci as usize], u, hist);
            }
        }
    }
}

/// Exact transform histogram through the coset cells; with `verify` every
/// cell's closed form is also checked against enumeration of its lifts.
pub fn fourier_fast(rp: ResidueParams, u: &[u64], limits: &Limits, verify: bool) -> Result<FourierValue> {
    if u.len() != rp.n {
        return Err(Error::Precondition(format!("phase length {} != {}", u.len(), rp.n)));
    }
    let table = CellTable::shared(rp, limits)?;
    let m = rp.modulus();
    let u: Vec<u64> = u.iter().map(|&x| x % m).collect();
    if verify {
        table.verify_lifts(&u, limits)?;
    }
    Ok(table.transform(&u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_match_direct_small() {
        let limits = Limits::default();
        for (n, p, k) in [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 2, 2), (3, 3, 1), (3, 2, 2)] {
            let rp = ResidueParams::new(n, p, k).unwrap();
            let table = CellTable::build(rp, &limits).unwrap();
            let m = rp.modulus();
            let phases: Vec<Vec<u64>> = (0..20u64)
                .map(|s| (0..n as u64).map(|i| (s * 7 + i * 13 + s * s * i) % m).collect())
                .collect();
            table.verify_direct(&phases, &limits).unwrap();
            table.verify_lifts(&phases[3], &limits).unwrap();
        }
    }

    #[test]
    fn index_matches_linear_scan() {
        let rp = ResidueParams::new(4, 2, 2).unwrap();
        let limits = Limits::default();
        let table = CellTable::shared(rp, &limits).unwrap();
        let index = CellIndex::new(table.clone());
        let m = rp.modulus();
        for s in 0..200u64 {
            let u: Vec<u64> = (0..4).map(|i| (s * 31 + i * 5 + s / 3 * i) % m).collect();
            let a = index.transform(&u).histogram;
            let b = table.transform(&u).histogram;
            assert!(super::super::histogram_is_zero(&diff(&a, &b), 2), "{u:?}");
        }
    }

    #[test]
    fn degree_one_has_no_support() {
        let rp = ResidueParams::new(1, 5, 1).unwrap();
        let table = CellTable::build(rp, &Limits::default()).unwrap();
        assert_eq!(table.support_count(), 0);
    }
}
