//! Root systems of rank at most two: A1, A2, B2 and G2.
//!
//! Weights live in fundamental-weight coordinates `m₁λ₁ + m₂λ₂`. For A1 the
//! second coordinate is carried along and is always zero.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::Q64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algebra {
    A1,
    A2,
    B2,
    G2,
}

impl Algebra {
    pub const ALL: [Algebra; 4] = [Algebra::A1, Algebra::A2, Algebra::B2, Algebra::G2];
    pub const RANK2: [Algebra; 3] = [Algebra::A2, Algebra::B2, Algebra::G2];

    pub fn rank(self) -> usize {
        match self {
            Algebra::A1 => 1,
            _ => 2,
        }
    }

    pub fn data(self) -> &'static RootSystemData {
        root_system(self)
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algebra::A1 => "A1",
            Algebra::A2 => "A2",
            Algebra::B2 => "B2",
            Algebra::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl FromStr for Algebra {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(Algebra::A1),
            "A2" => Ok(Algebra::A2),
            "B2" => Ok(Algebra::B2),
            "G2" => Ok(Algebra::G2),
            other => Err(Error::UnsupportedAlgebra(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight(pub [i64; 2]);

/// A Gram matrix of the fundamental weights, as integer numerators over a
/// common denominator.
pub type Gram = ([[i64; 2]; 2], i64);

impl Weight {
    pub const ZERO: Weight = Weight([0, 0]);

    pub fn new(m1: i64, m2: i64) -> Self {
        Weight([m1, m2])
    }

    pub fn is_dominant(&self) -> bool {
        self.0[0] >= 0 && self.0[1] >= 0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0]
    }

    /// Divides every coordinate by `a` when possible.
    pub fn div_exact(&self, a: i64) -> Option<Weight> {
        if self.0[0] % a == 0 && self.0[1] % a == 0 {
            Some(Weight([self.0[0] / a, self.0[1] / a]))
        } else {
            None
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0[0], self.0[1])
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, o: Weight) -> Weight {
        Weight([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for Weight {
    type Output = Weight;
    fn sub(self, o: Weight) -> Weight {
        Weight([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight([-self.0[0], -self.0[1]])
    }
}

impl Mul<Weight> for i64 {
    type Output = Weight;
    fn mul(self, w: Weight) -> Weight {
        Weight([self * w.0[0], self * w.0[1]])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub mat: [[i64; 2]; 2],
    pub sign: i64,
}

impl WeylElement {
    pub fn apply(&self, w: Weight) -> Weight {
        let m = &self.mat;
        Weight([m[0][0] * w.0[0] + m[0][1] * w.0[1], m[1][0] * w.0[0] + m[1][1] * w.0[1]])
    }

    fn compose(&self, o: &WeylElement) -> WeylElement {
        let (a, b) = (&self.mat, &o.mat);
        let mut m = [[0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        WeylElement { mat: m, sign: self.sign * o.sign }
    }
}

#[derive(Clone, Debug)]
pub struct RootSystemData {
    pub algebra: Algebra,
    pub simple_roots: Vec<Weight>,
    /// Positive roots in weight coordinates.
    pub positive_roots: Vec<Weight>,
    /// Positive roots in simple-root coordinates, in the same order.
    pub positive_roots_rc: Vec<[i64; 2]>,
    gram_num: [[i64; 2]; 2],
    gram_den: i64,
    pub rho: Weight,
    pub weyl: Vec<WeylElement>,
    pub fundamental_group_order: i64,
    orbit: Vec<(Weight, i64)>,
    cartan_cols: [[i64; 2]; 2],
}

pub fn root_system(alg: Algebra) -> &'static RootSystemData {
    static CELLS: [OnceLock<RootSystemData>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let i = alg as usize;
    CELLS[i].get_or_init(|| RootSystemData::build(alg))
}

impl RootSystemData {
    pub fn build(alg: Algebra) -> Self {
        Self::build_with_gram(alg, None)
    }

    /// Builds the data with an explicit Gram matrix `num / den` replacing the
    /// standard one. Used to inject faults in self-tests.
    pub fn build_with_gram(alg: Algebra, gram: Option<Gram>) -> Self {
        let (simple, pos_rc, std_gram, d): (Vec<Weight>, Vec<[i64; 2]>, Gram, i64) = match alg {
            Algebra::A1 => (vec![Weight([2, 0])], vec![[1, 0]], ([[1, 0], [0, 0]], 2), 2),
            Algebra::A2 => (
                vec![Weight([2, -1]), Weight([-1, 2])],
                vec![[1, 0], [0, 1], [1, 1]],
                ([[2, 1], [1, 2]], 3),
                3,
            ),
            Algebra::B2 => (
                vec![Weight([2, -2]), Weight([-1, 2])],
                vec![[1, 0], [0, 1], [1, 1], [1, 2]],
                ([[2, 1], [1, 1]], 2),
                2,
            ),
            Algebra::G2 => (
                vec![Weight([2, -1]), Weight([-3, 2])],
                vec![[1, 0], [0, 1], [1, 1], [2, 1], [3, 1], [3, 2]],
                ([[2, 3], [3, 6]], 1),
                1,
            ),
        };
        let (gram_num, gram_den) = gram.unwrap_or(std_gram);
        let cartan_cols = if alg == Algebra::A1 {
            [[2, 0], [0, 1]]
        } else {
            [[simple[0].0[0], simple[1].0[0]], [simple[0].0[1], simple[1].0[1]]]
        };
        let from_rc = |rc: [i64; 2]| -> Weight {
            let mut w = rc[0] * simple[0];
            if simple.len() > 1 {
                w = w + rc[1] * simple[1];
            }
            w
        };
        let positive_roots: Vec<Weight> = pos_rc.iter().map(|&rc| from_rc(rc)).collect();
        let rho = if alg == Algebra::A1 { Weight([1, 0]) } else { Weight([1, 1]) };

        let reflections: Vec<WeylElement> = simple
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut mat = [[1, 0], [0, 1]];
                mat[0][i] -= a.0[0];
                mat[1][i] -= a.0[1];
                WeylElement { mat, sign: -1 }
            })
            .collect();
        let id = WeylElement { mat: [[1, 0], [0, 1]], sign: 1 };
        let mut weyl = vec![id];
        let mut queue = VecDeque::from([id]);
        while let Some(g) = queue.pop_front() {
            for r in &reflections {
                let h = r.compose(&g);
                if !weyl.iter().any(|x| x.mat == h.mat) {
                    weyl.push(h);
                    queue.push_back(h);
                }
            }
        }
        let mut orbit: Vec<(Weight, i64)> = weyl.iter().map(|s| (rho - s.apply(rho), s.sign)).collect();
        orbit.sort();

        RootSystemData {
            algebra: alg,
            simple_roots: simple,
            positive_roots,
            positive_roots_rc: pos_rc,
            gram_num,
            gram_den,
            rho,
            weyl,
            fundamental_group_order: d,
            orbit,
            cartan_cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.algebra.rank()
    }

    /// Gram matrix of the fundamental weights as `(numerators, denominator)`.
    pub fn gram(&self) -> ([[i64; 2]; 2], i64) {
        (self.gram_num, self.gram_den)
    }

    /// `(μ,ν)` scaled by the Gram denominator.
    pub fn inner_num(&self, m: Weight, n: Weight) -> i64 {
        let g = &self.gram_num;
        m.0[0] * (g[0][0] * n.0[0] + g[0][1] * n.0[1]) + m.0[1] * (g[1][0] * n.0[0] + g[1][1] * n.0[1])
    }

    pub fn gram_den(&self) -> i64 {
        self.gram_den
    }

    pub fn inner(&self, m: Weight, n: Weight) -> Q64 {
        Q64::new(self.inner_num(m, n), self.gram_den)
    }

    pub fn inner_big(&self, m: Weight, n: Weight) -> BigRational {
        BigRational::new(BigInt::from(self.inner_num(m, n)), BigInt::from(self.gram_den))
    }

    pub fn check_weight(&self, w: Weight) -> Result<()> {
        if self.algebra == Algebra::A1 && w.0[1] != 0 {
            return Err(Error::AlgebraMismatch(format!("weight {}", w), self.algebra.to_string()));
        }
        Ok(())
    }

    pub fn is_dominant(&self, w: Weight) -> bool {
        w.is_dominant()
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl.len()
    }

    pub fn orbit_table(&self) -> &[(Weight, i64)] {
        &self.orbit
    }

    /// Determinant of the Cartan change of basis; root coordinates of any weight
    /// are integers divided by this.
    pub fn cartan_det(&self) -> i64 {
        let c = &self.cartan_cols;
        c[0][0] * c[1][1] - c[0][1] * c[1][0]
    }

    /// Root coordinates multiplied by [`Self::cartan_det`].
    pub fn root_coords_scaled(&self, w: Weight) -> [i64; 2] {
        let c = &self.cartan_cols;
        [c[1][1] * w.0[0] - c[0][1] * w.0[1], -c[1][0] * w.0[0] + c[0][0] * w.0[1]]
    }

    pub fn to_root_coords(&self, w: Weight) -> Option<[i64; 2]> {
        let det = self.cartan_det();
        let s = self.root_coords_scaled(w);
        if s[0] % det == 0 && s[1] % det == 0 {
            Some([s[0] / det, s[1] / det])
        } else {
            None
        }
    }

    pub fn from_root_coords(&self, rc: [i64; 2]) -> Weight {
        let c = &self.cartan_cols;
        Weight([c[0][0] * rc[0] + c[0][1] * rc[1], c[1][0] * rc[0] + c[1][1] * rc[1]])
    }

    pub fn in_root_lattice(&self, w: Weight) -> bool {
        self.to_root_coords(w).is_some()
    }

    pub fn simple_reflection(&self, i: usize, w: Weight) -> Weight {
        w - w.0[i] * self.simple_roots[i]
    }

    pub fn dominant_conjugate(&self, mut w: Weight) -> Weight {
        loop {
            match (0..self.rank()).find(|&i| w.0[i] < 0) {
                Some(i) => w = self.simple_reflection(i, w),
                None => return w,
            }
        }
    }

    pub fn orbit_of(&self, w: Weight) -> BTreeSet<Weight> {
        self.weyl.iter().map(|s| s.apply(w)).collect()
    }

    /// `ν ⪯ λ`: `λ - ν` is a nonnegative integer combination of simple roots.
    pub fn preceq(&self, nu: Weight, lambda: Weight) -> bool {
        match self.to_root_coords(lambda - nu) {
            Some(rc) => rc[0] >= 0 && rc[1] >= 0,
            None => false,
        }
    }

    /// Dominant weights `ν ⪯ λ`, i.e. the dominant part of `Π_λ`.
    pub fn dominant_weights_below(&self, lambda: Weight) -> Vec<Weight> {
        let det = self.cartan_det();
        let s = self.root_coords_scaled(lambda);
        let (xmax, ymax) = (s[0].div_euclid(det), s[1].div_euclid(det));
        let mut out = Vec::new();
        for x in 0..=xmax.max(0) {
            for y in 0..=ymax.max(0) {
                if self.rank() == 1 && y > 0 {
                    break;
                }
                let nu = lambda - self.from_root_coords([x, y]);
                if nu.is_dominant() {
                    out.push(nu);
                }
            }
        }
        out.sort();
        out
    }

    /// The Weyl dimension formula.
    pub fn weyl_dimension(&self, lambda: Weight) -> BigInt {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for a in &self.positive_roots {
            num *= BigInt::from(self.inner_num(lambda + self.rho, *a));
            den *= BigInt::from(self.inner_num(self.rho, *a));
        }
        let (q, r) = (&num / &den, &num % &den);
        assert!(r.is_zero(), "Weyl dimension not integral");
        q
    }

    /// Largest `(μ,ρ)`-height first; a linear order refining dominance.
    pub fn height_num(&self, w: Weight) -> i64 {
        self.inner_num(w, self.rho)
    }
}

pub fn inner(rs: &RootSystemData, m: Weight, n: Weight) -> Result<Q64> {
    rs.check_weight(m)?;
    rs.check_weight(n)?;
    Ok(rs.inner(m, n))
}

pub fn weyl_orbit_table(rs: &RootSystemData) -> Vec<(Weight, i64)> {
    rs.orbit_table().to_vec()
}

/// `Π_λ`: every weight of the irreducible representation `V_λ`.
pub fn weights_of_irrep(rs: &RootSystemData, lambda: Weight) -> Result<BTreeSet<Weight>> {
    rs.check_weight(lambda)?;
    if !lambda.is_dominant() {
        return Err(Error::NotDominant(lambda.to_string()));
    }
    let mut out = BTreeSet::new();
    for nu in rs.dominant_weights_below(lambda) {
        out.extend(rs.orbit_of(nu));
    }
    Ok(out)
}

pub fn in_root_lattice(rs: &RootSystemData, w: Weight) -> bool {
    rs.in_root_lattice(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(a: i64, b: i64) -> Weight {
        Weight([a, b])
    }

    #[test]
    fn weyl_orders_and_fundamental_groups() {
        let want = [(Algebra::A1, 2, 2), (Algebra::A2, 6, 3), (Algebra::B2, 8, 2), (Algebra::G2, 12, 1)];
        for (alg, order, d) in want {
            let rs = alg.data();
            assert_eq!(rs.weyl_order(), order, "{}", alg);
            assert_eq!(rs.fundamental_group_order, d, "{}", alg);
            assert_eq!(rs.cartan_det().abs(), d, "{}", alg);
        }
    }

    #[test]
    fn positive_roots_sum_to_two_rho() {
        for alg in Algebra::ALL {
            let rs = alg.data();
            let s = rs.positive_roots.iter().fold(Weight::ZERO, |acc, a| acc + *a);
            assert_eq!(s, 2 * rs.rho, "{}", alg);
        }
    }

    #[test]
    fn gram_reproduces_quadratic_forms() {
        for m1 in -4..=6i64 {
            for m2 in -4..=6i64 {
                let l = w(m1, m2);
                let a2 = Q64::new(2 * (m1 * m1 + m1 * m2 + m2 * m2), 3);
                assert_eq!(Algebra::A2.data().inner(l, l), a2);
                let b2 = Q64::new(2 * m1 * m1 + 2 * m1 * m2 + m2 * m2, 2);
                assert_eq!(Algebra::B2.data().inner(l, l), b2);
                let g2 = Q64::from_integer(2 * m1 * m1 + 6 * m1 * m2 + 6 * m2 * m2);
                assert_eq!(Algebra::G2.data().inner(l, l), g2);
            }
        }
    }

    #[test]
    fn inner_examples() {
        let a2 = Algebra::A2.data();
        assert_eq!(inner(a2, w(1, 0), w(1, 0)).unwrap(), Q64::new(2, 3));
        let b2 = Algebra::B2.data();
        assert_eq!(inner(b2, b2.rho, b2.rho).unwrap(), Q64::new(5, 2));
        for alg in Algebra::RANK2 {
            assert_eq!(inner(alg.data(), Weight::ZERO, w(3, -7)).unwrap(), Q64::from_integer(0));
        }
        let a1 = Algebra::A1.data();
        assert!(matches!(inner(a1, w(1, 1), w(1, 0)), Err(Error::AlgebraMismatch(..))));
    }

    #[test]
    fn simple_roots_pair_with_fundamental_weights() {
        for alg in Algebra::RANK2 {
            let rs = alg.data();
            for (i, a) in rs.simple_roots.iter().enumerate() {
                let aa = rs.inner(*a, *a);
                for j in 0..2 {
                    let e = if j == 0 { w(1, 0) } else { w(0, 1) };
                    let want = if i == j { aa / 2 } else { Q64::from_integer(0) };
                    assert_eq!(rs.inner(*a, e), want, "{} {} {}", alg, i, j);
                }
            }
        }
    }

    #[test]
    fn orbit_tables() {
        let a2: BTreeSet<(Weight, i64)> = Algebra::A2.data().orbit_table().iter().copied().collect();
        let want: BTreeSet<(Weight, i64)> =
            [(w(0, 0), 1), (w(2, -1), -1), (w(-1, 2), -1), (w(0, 3), 1), (w(3, 0), 1), (w(2, 2), -1)]
                .into_iter()
                .collect();
        assert_eq!(a2, want);
        let b2: BTreeSet<(Weight, i64)> = Algebra::B2.data().orbit_table().iter().copied().collect();
        let want: BTreeSet<(Weight, i64)> = [
            (w(0, 0), 1),
            (w(2, -2), -1),
            (w(-1, 2), -1),
            (w(-1, 4), 1),
            (w(3, -2), 1),
            (w(3, 0), -1),
            (w(0, 4), -1),
            (w(2, 2), 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(b2, want);
        for alg in Algebra::ALL {
            assert!(alg.data().orbit_table().contains(&(Weight::ZERO, 1)));
        }
    }

    #[test]
    fn orbit_entries_are_sums_of_distinct_positive_roots() {
        for alg in Algebra::ALL {
            let rs = alg.data();
            let n = rs.positive_roots.len();
            for (v, _) in rs.orbit_table() {
                let found = (0u32..(1 << n)).any(|mask| {
                    let s = (0..n).filter(|i| mask & (1 << i) != 0).fold(Weight::ZERO, |acc, i| acc + rs.positive_roots[i]);
                    s == *v
                });
                assert!(found, "{} {}", alg, v);
            }
        }
    }

    #[test]
    fn irrep_weights() {
        let a2 = Algebra::A2.data();
        assert_eq!(weights_of_irrep(a2, Weight::ZERO).unwrap(), BTreeSet::from([Weight::ZERO]));
        let l1 = weights_of_irrep(a2, w(1, 0)).unwrap();
        let want = BTreeSet::from([w(1, 0), w(1, 0) - w(2, -1), w(1, 0) - w(2, -1) - w(-1, 2)]);
        assert_eq!(l1, want);
        assert!(matches!(weights_of_irrep(a2, w(-1, 2)), Err(Error::NotDominant(_))));
    }

    #[test]
    fn root_lattice_membership() {
        assert!(in_root_lattice(Algebra::A2.data(), w(1, 1)));
        assert!(!in_root_lattice(Algebra::A2.data(), w(1, 0)));
        assert!(!in_root_lattice(Algebra::B2.data(), w(0, 1)));
        assert!(in_root_lattice(Algebra::B2.data(), w(1, 0)));
        for m1 in -3..4 {
            for m2 in -3..4 {
                assert!(in_root_lattice(Algebra::G2.data(), w(m1, m2)));
                assert_eq!(in_root_lattice(Algebra::A2.data(), w(m1, m2)), (m1 - m2).rem_euclid(3) == 0);
                assert_eq!(in_root_lattice(Algebra::B2.data(), w(m1, m2)), m2.rem_euclid(2) == 0);
            }
        }
    }

    #[test]
    fn weyl_dimensions() {
        assert_eq!(Algebra::A2.data().weyl_dimension(w(1, 1)), BigInt::from(8));
        assert_eq!(Algebra::B2.data().weyl_dimension(w(1, 0)), BigInt::from(5));
        assert_eq!(Algebra::B2.data().weyl_dimension(w(0, 1)), BigInt::from(4));
        assert_eq!(Algebra::G2.data().weyl_dimension(w(1, 0)), BigInt::from(7));
        assert_eq!(Algebra::G2.data().weyl_dimension(w(0, 1)), BigInt::from(14));
        assert_eq!(Algebra::A1.data().weyl_dimension(w(4, 0)), BigInt::from(5));
    }

    proptest! {
        #[test]
        fn weyl_preserves_inner(m1 in -6i64..7, m2 in -6i64..7, n1 in -6i64..7, n2 in -6i64..7, k in 0usize..3) {
            let rs = Algebra::RANK2[k].data();
            let (m, n) = (w(m1, m2), w(n1, n2));
            for s in &rs.weyl {
                prop_assert_eq!(rs.inner(s.apply(m), s.apply(n)), rs.inner(m, n));
            }
        }

        #[test]
        fn root_coords_roundtrip(x in -9i64..10, y in -9i64..10, k in 0usize..3) {
            let rs = Algebra::RANK2[k].data();
            let wt = rs.from_root_coords([x, y]);
            prop_assert_eq!(rs.to_root_coords(wt), Some([x, y]));
        }

        #[test]
        fn dominant_conjugate_in_orbit(m1 in -8i64..9, m2 in -8i64..9, k in 0usize..3) {
            let rs = Algebra::RANK2[k].data();
            let d = rs.dominant_conjugate(w(m1, m2));
            prop_assert!(d.is_dominant());
            prop_assert!(rs.orbit_of(w(m1, m2)).contains(&d));
        }
    }
}
