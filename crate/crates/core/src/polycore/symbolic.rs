//! Symbolic discriminants and resultants with `SparsePoly` entries.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;

use super::matrix::{bareiss_det, sylvester};
use super::sparse::SparsePoly;
use crate::error::{Error, Result};

pub const SYM_DISC_MAX_DEGREE: usize = 6;

/// Environment variable naming the directory for cached symbolic
/// discriminants.
pub const CACHE_DIR_ENV: &str = "DISCLAB_CACHE_DIR";

fn memo() -> &'static Mutex<HashMap<usize, Arc<SparsePoly>>> {
    static MEMO: OnceLock<Mutex<HashMap<usize, Arc<SparsePoly>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("degree must be positive".into()));
    }
    if n > SYM_DISC_MAX_DEGREE {
        return Err(Error::Capacity {
            what: "symbolic discriminant degree",
            needed_log2: (n as f64).log2(),
            limit_log2: 2,
        });
    }
    Ok(())
}

/// Computes the generic discriminant of `x^n + c_1 x^{n-1} + ... + c_n`
/// from scratch (no caching).
pub fn compute_sym_disc(n: usize) -> Result<SparsePoly> {
    check_degree(n)?;
    let vars = SparsePoly::coefficient_vars(n);
    if n == 1 {
        return Ok(SparsePoly::constant(vars, 1));
    }
    let mut a = vec![SparsePoly::constant(vars.clone(), 1)];
    for i in 0..n {
        a.push(SparsePoly::var(vars.clone(), i));
    }
    let b: Vec<SparsePoly> = (0..n)
        .map(|j| a[j].scale(&BigInt::from(n - j)))
        .collect();
    let det = bareiss_det(sylvester(&a, &b));
    Ok(if (n * (n - 1) / 2) % 2 == 1 { det.neg() } else { det })
}

/// The generic discriminant, memoized in memory and cached on disk in the
/// directory named by `DISCLAB_CACHE_DIR` (default: a `disclab` directory
/// under the system temp dir).
pub fn sym_disc(n: usize) -> Result<Arc<SparsePoly>> {
    let dir = std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("disclab"));
    sym_disc_cached(n, &dir)
}

pub fn cache_file(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("sym_disc_{n}.txt"))
}

/// Like [`sym_disc`] with an explicit cache directory. A cache file that
/// fails to parse, or parses to the wrong variable set, is recomputed and
/// overwritten.
pub fn sym_disc_cached(n: usize, dir: &Path) -> Result<Arc<SparsePoly>> {
    check_degree(n)?;
    if let Some(p) = memo().lock().unwrap().get(&n) {
        return Ok(p.clone());
    }
    let path = cache_file(dir, n);
    let from_disk = fs::read_to_string(&path)
        .ok()
        .and_then(|text| SparsePoly::parse_canonical(&text).ok())
        .filter(|p| **p.vars() == *SparsePoly::coefficient_vars(n));
    let poly = match from_disk {
        Some(p) => p,
        None => {
            let p = compute_sym_disc(n)?;
            if let Err(e) = write_atomic(dir, &path, &p.to_canonical_string()) {
                log::warn!("could not write {}: {e}", path.display());
            }
            p
        }
    };
    let poly = Arc::new(poly);
    memo().lock().unwrap().insert(n, poly.clone());
    Ok(poly)
}

fn write_atomic(dir: &Path, path: &Path, text: &str) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)
}

/// Partial derivatives of the generic discriminant in `c_1, ..., c_n`.
pub fn symbolic_gradient(n: usize) -> Result<Vec<SparsePoly>> {
    let d = sym_disc(n)?;
    Ok((0..n).map(|i| d.derivative(i)).collect())
}

/// Resultant in the variable `var`, via Bareiss elimination on the Sylvester
/// matrix with the rows of `a` first.
pub fn resultant(a: &SparsePoly, b: &SparsePoly, var: &str) -> Result<SparsePoly> {
    let idx = a
        .var_index(var)
        .ok_or_else(|| Error::Precondition(format!("unknown variable {var}")))?;
    if a.vars() != b.vars() {
        return Err(Error::Precondition("operands use different variable lists".into()));
    }
    let da = a.degree_in(idx).unwrap_or(0);
    let db = b.degree_in(idx).unwrap_or(0);
    if da == 0 || db == 0 {
        return Err(Error::Degenerate(format!(
            "resultant needs positive degree in {var} (got {da} and {db})"
        )));
    }
    let mut ca = a.as_univariate(idx);
    let mut cb = b.as_univariate(idx);
    ca.reverse();
    cb.reverse();
    Ok(bareiss_det(sylvester(&ca, &cb)))
}
