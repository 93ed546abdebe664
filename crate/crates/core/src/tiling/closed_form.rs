use num_integer::Integer;

use crate::error::{Error, Result};
use crate::masks::Mask;

/// Points a block covers on a strided pattern when anchored on the pattern:
/// the number of `(i, j) ∈ Z_n × Z_m` with `κ | (j − i)`, `κ = X / gcd(s, X)`.
pub fn predicted_cover_count(m: usize, n: usize, stride: usize, s: usize) -> usize {
    let kappa = (stride / stride.gcd(&s)) as i64;
    let mut count = 0;
    for i in 0..n as i64 {
        for j in 0..m as i64 {
            if (j - i).rem_euclid(kappa) == 0 {
                count += 1;
            }
        }
    }
    count
}

/// The three-part closed form for the cover count:
///
/// `⌈(m−n+1)/κ⌉·n + Σ_{k=⌈(m−n+1)/κ⌉}^{⌈(m−1)/κ⌉} (m−kκ) + Σ_{k=1}^{⌈(n−1)/κ⌉} (n−kκ)`.
///
/// Returns `None` when any multiplier or summand is negative, where the
/// expression no longer counts anything.
pub fn cover_count_closed_form(m: usize, n: usize, kappa: usize) -> Option<i64> {
    if m == 0 || n == 0 || kappa == 0 {
        return None;
    }
    let (m, n, k) = (m as i64, n as i64, kappa as i64);
    let lead = Integer::div_ceil(&(m - n + 1), &k);
    if lead < 0 {
        return None;
    }
    let mut total = lead * n;
    for t in lead..=Integer::div_ceil(&(m - 1), &k) {
        let term = m - t * k;
        if term < 0 {
            return None;
        }
        total += term;
    }
    for t in 1..=Integer::div_ceil(&(n - 1), &k) {
        let term = n - t * k;
        if term < 0 {
            return None;
        }
        total += term;
    }
    Some(total)
}

/// A structured dense polygon: `r` slabs of `h` rows each, every row holding `l`
/// consecutive points, each slab shifted `l_shift` columns right of the previous.
/// The mask is `r·h` rows by `(r−1)·l_shift + l` columns.
pub fn structured_polygon(r: usize, l: usize, h: usize, l_shift: usize) -> Result<Mask> {
    if r == 0 || l == 0 || h == 0 {
        return Err(Error::InvalidSpec(
            "slab count, width and height must be positive".into(),
        ));
    }
    let cols = (r - 1) * l_shift + l;
    Mask::from_fn(r * h, cols, |y, x| {
        let start = (y / h) * l_shift;
        x >= start && x < start + l
    })
}

/// Block count of the row-patch baseline on a structured dense polygon, from its
/// parameters alone.
///
/// With `κ = gcd(m, h)`, `τm = m/κ`, `τh = h/κ` and `τm = α·τh + β`:
/// `β = 0` gives `(r/τm)·τh·⌈(l + (α−1)l')/n⌉`, otherwise
/// `(r/τm)·((β−1)·⌈(l + (α+1)l')/n⌉ + (τh−β+1)·⌈(l + αl')/n⌉)`.
/// Requires `τm | r` so the rows split into whole repeating cross-sections.
pub fn predicted_naive_lambda(
    r: usize,
    l: usize,
    h: usize,
    l_shift: usize,
    m: usize,
    n: usize,
) -> Result<usize> {
    if [r, l, h, l_shift, m, n].contains(&0) {
        return Err(Error::InvalidSpec(
            "all polygon and block parameters must be positive".into(),
        ));
    }
    let kappa = m.gcd(&h);
    let (tau_m, tau_h) = (m / kappa, h / kappa);
    if !r.is_multiple_of(tau_m) {
        return Err(Error::InvalidSpec(format!(
            "slab count {r} is not a multiple of {tau_m}"
        )));
    }
    let (alpha, beta) = (tau_m / tau_h, tau_m % tau_h);
    let sections = r / tau_m;
    let blocks = |width: usize| width.div_ceil(n);
    Ok(if beta == 0 {
        sections * tau_h * blocks(l + (alpha - 1) * l_shift)
    } else {
        sections
            * ((beta - 1) * blocks(l + (alpha + 1) * l_shift)
                + (tau_h - beta + 1) * blocks(l + alpha * l_shift))
    })
}
