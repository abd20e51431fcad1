use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Largest supported base dimension. Exponent vectors are packed four bits
/// per variable into a `u64`, which bounds the variable count at 16.
pub const MAX_DIM: usize = 8;
/// Largest supported total truncation degree (four-bit exponents).
pub const MAX_TOTAL_ORDER: u8 = 15;

/// Truncation orders of a jet computation: derivatives up to `max_x` in the
/// base coordinates, `max_y` in the fiber coordinates and `max_total` overall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Orders {
    pub max_x: u8,
    pub max_y: u8,
    pub max_total: u8,
}

impl Orders {
    pub const fn new(max_x: u8, max_y: u8, max_total: u8) -> Self {
        Self {
            max_x,
            max_y,
            max_total,
        }
    }

    /// True when every derivative allowed by `other` is also allowed here.
    pub fn covers(&self, other: &Orders) -> bool {
        self.max_x >= other.max_x && self.max_y >= other.max_y && self.max_total >= other.max_total
    }
}

impl Default for Orders {
    fn default() -> Self {
        Orders::new(2, 5, 6)
    }
}

/// Region of exponents on which a jet's coefficients are exact. Components
/// may go negative after repeated differentiation, in which case nothing is
/// known about the jet any more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Limits {
    pub x: i16,
    pub y: i16,
    pub total: i16,
}

impl Limits {
    pub fn from_orders(o: Orders) -> Self {
        Limits {
            x: o.max_x as i16,
            y: o.max_y as i16,
            total: o.max_total as i16,
        }
    }

    pub fn meet(self, other: Limits) -> Limits {
        Limits {
            x: self.x.min(other.x),
            y: self.y.min(other.y),
            total: self.total.min(other.total),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x < 0 || self.y < 0 || self.total < 0
    }

    #[inline]
    pub fn admits(&self, xdeg: u8, ydeg: u8) -> bool {
        (xdeg as i16) <= self.x && (ydeg as i16) <= self.y && (xdeg as i16 + ydeg as i16) <= self.total
    }
}

/// Multiplication table for one set of limits: for every left index `i`
/// with an admissible exponent, the pairs `(j, k)` with `e_i + e_j = e_k`.
pub(crate) type ProductTable = Vec<(u32, Vec<(u32, u32)>)>;

/// Monomial bookkeeping shared by all jets of one dimension and order budget.
///
/// Variables are numbered `0..n` for the base coordinates `x` and `n..2n`
/// for the fiber coordinates `y`. Monomials are stored in graded order, so
/// index 0 is always the constant term.
pub struct Layout {
    n: usize,
    orders: Orders,
    exps: Vec<u8>,
    xdeg: Vec<u8>,
    ydeg: Vec<u8>,
    codes: HashMap<u64, u32>,
    /// Per variable: `(source, target, factor)` for differentiation.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    products: RwLock<HashMap<Limits, Arc<ProductTable>>>,
}

impl std::fmt::Debug for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Layout")
            .field("n", &self.n)
            .field("orders", &self.orders)
            .field("monomials", &self.len())
            .finish()
    }
}

fn encode(exp: &[u8]) -> u64 {
    exp.iter()
        .enumerate()
        .fold(0u64, |acc, (v, &e)| acc | ((e as u64) << (4 * v)))
}

impl Layout {
    /// Shared layout for `(n, orders)`; layouts are built once per process.
    pub fn shared(n: usize, orders: Orders) -> Result<Arc<Layout>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, Orders), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(l) = cache.lock().expect("layout cache poisoned").get(&(n, orders)) {
            return Ok(l.clone());
        }
        let layout = Arc::new(Layout::build(n, orders)?);
        let mut guard = cache.lock().expect("layout cache poisoned");
        Ok(guard.entry((n, orders)).or_insert(layout).clone())
    }

    fn build(n: usize, orders: Orders) -> Result<Layout> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Capability(format!(
                "dimension {n} outside supported range 1..={MAX_DIM}"
            )));
        }
        if orders.max_total > MAX_TOTAL_ORDER {
            return Err(Error::Capability(format!(
                "total order {} exceeds engine maximum {MAX_TOTAL_ORDER}",
                orders.max_total
            )));
        }
        let nv = 2 * n;
        let limits = Limits::from_orders(orders);
        let mut exps = Vec::new();
        let mut xdeg = Vec::new();
        let mut ydeg = Vec::new();
        let mut cur = vec![0u8; nv];
        for degree in 0..=orders.max_total {
            enumerate_degree(&mut cur, 0, degree, &mut |e: &[u8]| {
                let dx: u8 = e[..n].iter().sum();
                let dy: u8 = e[n..].iter().sum();
                if limits.admits(dx, dy) {
                    exps.extend_from_slice(e);
                    xdeg.push(dx);
                    ydeg.push(dy);
                }
            });
        }
        let count = xdeg.len();
        let codes: HashMap<u64, u32> = (0..count)
            .map(|i| (encode(&exps[i * nv..(i + 1) * nv]), i as u32))
            .collect();
        let mut deriv = vec![Vec::new(); nv];
        for (v, table) in deriv.iter_mut().enumerate() {
            for i in 0..count {
                let e = &exps[i * nv..(i + 1) * nv];
                if e[v] == 0 {
                    continue;
                }
                let mut lower = e.to_vec();
                lower[v] -= 1;
                let j = codes[&encode(&lower)];
                table.push((i as u32, j, e[v] as f64));
            }
        }
        Ok(Layout {
            n,
            orders,
            exps,
            xdeg,
            ydeg,
            codes,
            deriv,
            products: RwLock::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn orders(&self) -> Orders {
        self.orders
    }

    /// Number of stored monomials.
    pub fn len(&self) -> usize {
        self.xdeg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xdeg.is_empty()
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        let nv = 2 * self.n;
        &self.exps[i * nv..(i + 1) * nv]
    }

    pub(crate) fn index_of(&self, exp: &[u8]) -> Option<usize> {
        if exp.len() != 2 * self.n || exp.iter().any(|&e| e > MAX_TOTAL_ORDER) {
            return None;
        }
        self.codes.get(&encode(exp)).map(|&i| i as usize)
    }

    /// Index of the linear monomial of variable `v`.
    pub(crate) fn var_index(&self, v: usize) -> Option<usize> {
        let mut e = vec![0u8; 2 * self.n];
        e[v] = 1;
        self.index_of(&e)
    }

    #[inline]
    pub(crate) fn admitted(&self, i: usize, limits: &Limits) -> bool {
        limits.admits(self.xdeg[i], self.ydeg[i])
    }

    pub(crate) fn deriv_table(&self, v: usize) -> &[(u32, u32, f64)] {
        &self.deriv[v]
    }

    pub(crate) fn product_table(&self, limits: Limits) -> Arc<ProductTable> {
        if let Some(t) = self.products.read().expect("product cache poisoned").get(&limits) {
            return t.clone();
        }
        let table = Arc::new(self.build_products(limits));
        let mut guard = self.products.write().expect("product cache poisoned");
        guard.entry(limits).or_insert(table).clone()
    }

    fn build_products(&self, limits: Limits) -> ProductTable {
        if limits.is_empty() {
            return Vec::new();
        }
        let nv = 2 * self.n;
        let admitted: Vec<usize> = (0..self.len()).filter(|&i| self.admitted(i, &limits)).collect();
        let codes: Vec<u64> = (0..self.len())
            .map(|i| encode(&self.exps[i * nv..(i + 1) * nv]))
            .collect();
        admitted
            .iter()
            .map(|&i| {
                let pairs: Vec<(u32, u32)> = admitted
                    .iter()
                    .filter(|&&j| {
                        limits.admits(self.xdeg[i] + self.xdeg[j], self.ydeg[i] + self.ydeg[j])
                    })
                    .map(|&j| (j as u32, self.codes[&(codes[i] + codes[j])]))
                    .collect();
                (i as u32, pairs)
            })
            .collect()
    }
}

fn enumerate_degree(cur: &mut [u8], pos: usize, remaining: u8, visit: &mut impl FnMut(&[u8])) {
    if pos == cur.len() - 1 {
        cur[pos] = remaining;
        visit(cur);
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        enumerate_degree(cur, pos + 1, remaining - e, visit);
    }
    cur[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn monomial_count_matches_combinatorics() {
        // Only the total-degree bound is active here.
        let l = Layout::shared(2, Orders::new(6, 6, 6)).unwrap();
        assert_eq!(l.len(), binom(4 + 6, 6));
        // x ≤ 1, y ≤ 5, total ≤ 5 in dimension 3: 56 + 3 * 35.
        let l = Layout::shared(3, Orders::new(1, 5, 5)).unwrap();
        assert_eq!(l.len(), 56 + 3 * 35);
    }

    #[test]
    fn constant_term_comes_first() {
        let l = Layout::shared(2, Orders::default()).unwrap();
        assert!(l.exponents(0).iter().all(|&e| e == 0));
    }

    #[test]
    fn rejects_oversized_requests() {
        assert!(matches!(Layout::shared(9, Orders::default()), Err(Error::Capability(_))));
        assert!(matches!(Layout::shared(2, Orders::new(2, 5, 16)), Err(Error::Capability(_))));
    }
}
