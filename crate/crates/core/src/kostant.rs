//! Kostant's partition function `p(uα₁ + vα₂)`.

use std::sync::{Arc, RwLock};

use crate::lie::{Algebra, RootSystemData};

pub type RootCoords = [i64; 2];

struct Table {
    nu: usize,
    nv: usize,
    data: Vec<u64>,
}

impl Table {
    fn build(roots: &[[i64; 2]], nu: usize, nv: usize) -> Table {
        let mut data = vec![0u64; nu * nv];
        data[0] = 1;
        for r in roots {
            let (ru, rv) = (r[0] as usize, r[1] as usize);
            for u in ru..nu {
                for v in rv..nv {
                    let add = data[(u - ru) * nv + (v - rv)];
                    data[u * nv + v] += add;
                }
            }
        }
        Table { nu, nv, data }
    }

    fn get(&self, u: usize, v: usize) -> Option<u64> {
        (u < self.nu && v < self.nv).then(|| self.data[u * self.nv + v])
    }
}

static TABLES: [RwLock<Option<Arc<Table>>>; 4] = [RwLock::new(None), RwLock::new(None), RwLock::new(None), RwLock::new(None)];

/// Coin-change evaluation over the positive roots, memoized per algebra.
pub fn kostant_dp(rs: &RootSystemData, alpha: RootCoords) -> u64 {
    if alpha[0] < 0 || alpha[1] < 0 {
        return 0;
    }
    let (u, v) = (alpha[0] as usize, alpha[1] as usize);
    let slot = &TABLES[rs.algebra as usize];
    if let Some(t) = slot.read().unwrap().as_ref() {
        if let Some(x) = t.get(u, v) {
            return x;
        }
    }
    let mut guard = slot.write().unwrap();
    let (nu, nv) = match guard.as_ref() {
        Some(t) => ((u + 1).max(2 * t.nu), (v + 1).max(2 * t.nv)),
        None => ((u + 1).max(64), (v + 1).max(64)),
    };
    let t = Arc::new(Table::build(&rs.positive_roots_rc, nu, nv));
    let x = t.get(u, v).unwrap();
    *guard = Some(t);
    x
}

/// Uncached evaluation, useful as an oracle independent of the memo table.
pub fn kostant_dp_fresh(rs: &RootSystemData, alpha: RootCoords) -> u64 {
    if alpha[0] < 0 || alpha[1] < 0 {
        return 0;
    }
    let mut roots = rs.positive_roots_rc.clone();
    roots.reverse();
    Table::build(&roots, alpha[0] as usize + 1, alpha[1] as usize + 1).get(alpha[0] as usize, alpha[1] as usize).unwrap()
}

pub fn kostant_closed_a2(alpha: RootCoords) -> u64 {
    let [u, v] = alpha;
    if u < 0 || v < 0 {
        return 0;
    }
    1 + u.min(v) as u64
}

fn b2_b(n: i64) -> i64 {
    if n % 2 == 0 {
        (n + 2) * (n + 2) / 4
    } else {
        (n + 1) * (n + 3) / 4
    }
}

/// Piecewise formula over the three chambers `u ≥ v`, `u ≤ v ≤ 2u`, `v ≥ 2u`.
pub fn kostant_closed_b2(alpha: RootCoords) -> u64 {
    let [u, v] = alpha;
    if u < 0 || v < 0 {
        return 0;
    }
    let p = if u >= v {
        b2_b(v)
    } else if v <= 2 * u {
        b2_b(v) - (v - u) * (v - u + 1) / 2
    } else {
        (u + 1) * (u + 2) / 2
    };
    p as u64
}

fn exact(num: i128, den: i128) -> i128 {
    assert_eq!(num % den, 0, "non-integral partition count");
    num / den
}

fn g2_g(n: i64) -> i128 {
    let n = n as i128;
    let num = match n.rem_euclid(6) {
        0 => (n + 6) * (n * n * n + 14 * n * n + 54 * n + 72),
        1 => (n + 5) * (n + 5) * (n * n + 10 * n + 13),
        2 => (n + 4) * (n * n * n + 16 * n * n + 74 * n + 68),
        3 => (n + 3) * (n + 3) * (n + 5) * (n + 9),
        4 => (n + 2) * (n + 8) * (n * n + 10 * n + 22),
        _ => (n + 1) * (n + 5) * (n + 7) * (n + 7),
    };
    exact(num, 432)
}

fn g2_h(n: i64) -> i128 {
    let n = n as i128;
    let num = if n.rem_euclid(2) == 0 {
        (n + 2) * (n + 4) * (n * n + 6 * n + 6)
    } else {
        (n + 1) * (n + 3) * (n + 3) * (n + 5)
    };
    exact(num, 48)
}

/// Piecewise formula over the five chambers cut out by `u = v`, `2u = 3v`,
/// `u = 2v` and `u = 3v`.
pub fn kostant_closed_g2(alpha: RootCoords) -> u64 {
    let [u, v] = alpha;
    if u < 0 || v < 0 {
        return 0;
    }
    let p = if u <= v {
        g2_g(u)
    } else if 2 * u <= 3 * v {
        g2_g(u) - g2_h(u - v - 1)
    } else if u <= 2 * v {
        g2_h(v) - g2_g(3 * v - u - 1) + g2_h(2 * v - u - 2)
    } else if u <= 3 * v {
        g2_h(v) - g2_g(3 * v - u - 1)
    } else {
        g2_h(v)
    };
    assert!(p >= 0, "negative partition count at ({},{})", u, v);
    p as u64
}

pub fn kostant_closed(alg: Algebra, alpha: RootCoords) -> Option<u64> {
    match alg {
        Algebra::A2 => Some(kostant_closed_a2(alpha)),
        Algebra::B2 => Some(kostant_closed_b2(alpha)),
        Algebra::G2 => Some(kostant_closed_g2(alpha)),
        Algebra::A1 => None,
    }
}

/// Fast evaluation used by the multiplicity code.
pub fn partition(rs: &RootSystemData, alpha: RootCoords) -> u64 {
    if alpha[0] < 0 || alpha[1] < 0 {
        return 0;
    }
    match rs.algebra {
        Algebra::A1 => u64::from(alpha[1] == 0),
        alg => kostant_closed(alg, alpha).unwrap(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dp_examples() {
        for alg in Algebra::ALL {
            assert_eq!(kostant_dp(alg.data(), [0, 0]), 1);
        }
        assert_eq!(kostant_dp(Algebra::A2.data(), [2, 3]), 3);
        assert_eq!(kostant_dp(Algebra::B2.data(), [5, 2]), 4);
        assert_eq!(kostant_dp(Algebra::B2.data(), [-1, 2]), 0);
    }

    #[test]
    fn closed_examples() {
        assert_eq!(kostant_closed_a2([4, 1]), 2);
        assert_eq!(kostant_closed_a2([0, 7]), 1);
        assert_eq!(kostant_closed_a2([-1, 3]), 0);
        assert_eq!(kostant_closed_b2([2, 2]), 4);
        assert_eq!(kostant_closed_b2([1, 2]), 3);
        assert_eq!(kostant_closed_b2([1, 3]), 3);
        assert_eq!(kostant_closed_g2([0, 0]), 1);
        let g2 = Algebra::G2.data();
        assert_eq!(kostant_closed_g2([3, 2]), kostant_dp_fresh(g2, [3, 2]));
        assert_eq!(kostant_closed_g2([7, 2]), g2_h(2) as u64);
        assert_eq!(kostant_closed_g2([7, 2]), kostant_dp_fresh(g2, [7, 2]));
    }

    #[test]
    fn closed_forms_match_dp_on_grid() {
        for alg in Algebra::RANK2 {
            let rs = alg.data();
            for u in 0..=40 {
                for v in 0..=40 {
                    assert_eq!(kostant_closed(alg, [u, v]).unwrap(), kostant_dp(rs, [u, v]), "{} ({},{})", alg, u, v);
                }
            }
        }
    }

    #[test]
    fn dp_is_order_independent() {
        for alg in Algebra::ALL {
            let rs = alg.data();
            for u in 0..15 {
                for v in 0..15 {
                    assert_eq!(kostant_dp(rs, [u, v]), kostant_dp_fresh(rs, [u, v]));
                }
            }
        }
    }

    #[test]
    fn monotone_along_simple_roots() {
        for alg in Algebra::RANK2 {
            let rs = alg.data();
            for u in 0..25 {
                for v in 0..25 {
                    let p = kostant_dp(rs, [u, v]);
                    assert!(p <= kostant_dp(rs, [u + 1, v]));
                    assert!(p <= kostant_dp(rs, [u, v + 1]));
                }
            }
        }
    }

    #[test]
    fn support_is_positive_quadrant() {
        for alg in Algebra::RANK2 {
            let rs = alg.data();
            for u in -5..10 {
                for v in -5..10 {
                    let p = kostant_dp(rs, [u, v]);
                    assert_eq!(p == 0, u < 0 || v < 0);
                }
            }
        }
    }
}
