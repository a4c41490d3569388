//! Permutations of `{1..n}` stored as dense image tables.
//!
//! Products follow the right-to-left convention: `p * q` applies `q` first,
//! then `p`. Points are 1-based at every external boundary (parsing,
//! formatting, [`Permutation::apply`]) and 0-based inside the image table.

use std::fmt;
use std::ops::Mul;

use serde::{Serialize, Serializer};

use thiserror::Error;

/// Errors raised by permutation construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("image table is not a bijection on 1..={0}")]
    NotABijection(usize),
    #[error("malformed cycle notation at byte {pos}: {reason}")]
    Syntax { pos: usize, reason: &'static str },
    #[error("point {point} repeated within one cycle")]
    RepeatedPoint { point: usize },
    #[error("point {point} out of range 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },
}

/// A bijection on `{1..n}`.
///
/// The derived ordering is lexicographic on the image table, which makes the
/// identity the least permutation of any degree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Box<[u32]>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Self {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from 1-based images: `images[i]` is the image of
    /// point `i + 1`.
    pub fn from_images(images: &[usize]) -> Result<Self, PermError> {
        let n = images.len();
        if n == 0 {
            return Err(PermError::ZeroDegree);
        }
        let mut seen = vec![false; n];
        let mut table = Vec::with_capacity(n);
        for &img in images {
            if img == 0 || img > n || seen[img - 1] {
                return Err(PermError::NotABijection(n));
            }
            seen[img - 1] = true;
            table.push((img - 1) as u32);
        }
        Ok(Self {
            images: table.into_boxed_slice(),
        })
    }

    /// Builds a permutation from 0-based images without validation beyond a
    /// debug assertion.
    pub(crate) fn from_raw(images: Vec<u32>) -> Self {
        debug_assert!({
            let mut seen = vec![false; images.len()];
            images.iter().all(|&i| {
                let fresh = !seen[i as usize];
                seen[i as usize] = true;
                fresh
            })
        });
        Self {
            images: images.into_boxed_slice(),
        }
    }

    /// Parses cycle notation; see [`parse_cycles`].
    pub fn parse(text: &str, degree: usize) -> Result<Self, PermError> {
        parse_cycles(text, degree)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 1-based point `point`.
    pub fn apply(&self, point: usize) -> usize {
        self.images[point - 1] as usize + 1
    }

    /// 1-based image table.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &img)| i as u32 == img)
    }

    /// `self * other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermError> {
        if self.degree() != other.degree() {
            return Err(PermError::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(self.compose_unchecked(other))
    }

    fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        let images = other
            .images
            .iter()
            .map(|&x| self.images[x as usize])
            .collect();
        Permutation { images }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.degree()];
        for (i, &img) in self.images.iter().enumerate() {
            inv[img as usize] = i as u32;
        }
        Permutation {
            images: inv.into_boxed_slice(),
        }
    }

    /// `h * self * h⁻¹`.
    pub fn conjugate_by(&self, h: &Permutation) -> Result<Permutation, PermError> {
        Ok(h.compose(self)?.compose_unchecked(&h.inverse()))
    }

    pub fn pow(&self, mut exp: u64) -> Permutation {
        let mut base = self.clone();
        let mut acc = Permutation::identity(self.degree());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    /// Disjoint cycles of length at least two, each starting at its least
    /// point, sorted by that point. Points are 1-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start + 1];
            seen[start] = true;
            let mut x = self.images[start] as usize;
            while x != start {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x] as usize;
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// Smallest `k >= 1` with `self^k = e`: the lcm of the cycle lengths.
    pub fn order(&self) -> u64 {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut order = 1u64;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.images[x] as usize;
            }
            order = lcm(order, len);
        }
        order
    }

    pub fn commutes_with(&self, other: &Permutation) -> bool {
        self.images
            .iter()
            .zip(other.images.iter())
            .all(|(&s, &o)| other.images[s as usize] == self.images[o as usize])
    }
}

impl<'a> Mul<&'a Permutation> for &'a Permutation {
    type Output = Permutation;

    /// Right-to-left product. Panics on a degree mismatch; use
    /// [`Permutation::compose`] when degrees are not known to agree.
    fn mul(self, rhs: &'a Permutation) -> Permutation {
        assert_eq!(self.degree(), rhs.degree(), "degree mismatch in product");
        self.compose_unchecked(rhs)
    }
}

/// `compose(p, q)` maps `x` to `p(q(x))`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation, PermError> {
    p.compose(q)
}

pub fn inverse(p: &Permutation) -> Permutation {
    p.inverse()
}

pub fn element_order(p: &Permutation) -> u64 {
    p.order()
}

/// `h * g * h⁻¹`.
pub fn conjugate(g: &Permutation, h: &Permutation) -> Result<Permutation, PermError> {
    g.conjugate_by(h)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl fmt::Display for Permutation {
    /// Canonical cycle notation: `e` for the identity, otherwise disjoint
    /// cycles with space-separated points, e.g. `(1 3)(2 4)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("e");
        }
        for cycle in cycles {
            f.write_str("(")?;
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses a product of cycles, e.g. `(1 3)(2 4)`, `(12)(123)` or `e`.
///
/// The cycles are multiplied right to left, so `(12)(123)` is `(2 3)`.
/// Points are separated by whitespace or commas. When `degree <= 9` a run of
/// digits is read one point per digit, which admits the compact `(123)` form;
/// for larger degrees a run of digits is a single point.
pub fn parse_cycles(text: &str, degree: usize) -> Result<Permutation, PermError> {
    if degree == 0 {
        return Err(PermError::ZeroDegree);
    }
    let trimmed = text.trim();
    if trimmed == "e" {
        return Ok(Permutation::identity(degree));
    }
    let bytes = text.as_bytes();
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(&mut pos);
    if pos == bytes.len() {
        return Err(PermError::Syntax {
            pos,
            reason: "empty input",
        });
    }
    while pos < bytes.len() {
        if bytes[pos] != b'(' {
            return Err(PermError::Syntax {
                pos,
                reason: "expected '('",
            });
        }
        pos += 1;
        let mut cycle = Vec::new();
        loop {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b',') {
                pos += 1;
            }
            if pos == bytes.len() {
                return Err(PermError::Syntax {
                    pos,
                    reason: "unclosed cycle",
                });
            }
            match bytes[pos] {
                b')' => {
                    pos += 1;
                    break;
                }
                b'0'..=b'9' => {
                    let start = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let run = &text[start..pos];
                    if degree <= 9 {
                        cycle.extend(run.bytes().map(|d| (d - b'0') as usize));
                    } else {
                        let point = run.parse::<usize>().map_err(|_| PermError::Syntax {
                            pos: start,
                            reason: "point too large",
                        })?;
                        cycle.push(point);
                    }
                }
                _ => {
                    return Err(PermError::Syntax {
                        pos,
                        reason: "unexpected character",
                    })
                }
            }
        }
        for (i, &p) in cycle.iter().enumerate() {
            if p == 0 || p > degree {
                return Err(PermError::PointOutOfRange { point: p, degree });
            }
            if cycle[..i].contains(&p) {
                return Err(PermError::RepeatedPoint { point: p });
            }
        }
        cycles.push(cycle);
        skip_ws(&mut pos);
    }

    let mut result = Permutation::identity(degree);
    for cycle in cycles.iter().rev() {
        result = &cycle_perm(cycle, degree) * &result;
    }
    Ok(result)
}

fn cycle_perm(cycle: &[usize], degree: usize) -> Permutation {
    let mut images: Vec<u32> = (0..degree as u32).collect();
    for (i, &p) in cycle.iter().enumerate() {
        let next = cycle[(i + 1) % cycle.len()];
        images[p - 1] = (next - 1) as u32;
    }
    Permutation::from_raw(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str, n: usize) -> Permutation {
        parse_cycles(s, n).unwrap()
    }

    #[test]
    fn parse_identity_tokens() {
        assert_eq!(p("e", 4), Permutation::identity(4));
        assert_eq!(p("()", 4), Permutation::identity(4));
        assert_eq!(p("  e ", 2), Permutation::identity(2));
    }

    #[test]
    fn parse_disjoint_transpositions() {
        let q = p("(1 3)(2 4)", 4);
        assert_eq!(q.images(), vec![3, 4, 1, 2]);
        assert_eq!(p("(2 4)(1 3)", 4), q);
        assert_eq!(p("(1,3) (2,4)", 4), q);
    }

    #[test]
    fn right_to_left_convention() {
        let lhs = p("(12)(123)", 3);
        assert_eq!(lhs, p("(23)", 3));
        assert_eq!(compose(&p("(12)", 3), &p("(123)", 3)).unwrap(), lhs);
        // a left-to-right reading would produce (1 3)
        assert_ne!(lhs, p("(13)", 3));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(
            compose(&p("(12)", 4), &p("(13)(24)", 4)).unwrap(),
            p("(1324)", 4)
        );
        let q = p("(1 2 3)", 3);
        assert_eq!(compose(&Permutation::identity(3), &q).unwrap(), q);
        assert_eq!(
            compose(&p("(12)", 3), &p("(12)", 4)),
            Err(PermError::DegreeMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&p("(123)", 3)), p("(132)", 3));
        assert_eq!(inverse(&p("(12)", 3)), p("(12)", 3));
        assert_eq!(inverse(&Permutation::identity(5)), Permutation::identity(5));
    }

    #[test]
    fn order_examples() {
        assert_eq!(element_order(&p("(123)", 3)), 3);
        assert_eq!(element_order(&p("(1324)", 4)), 4);
        assert_eq!(element_order(&Permutation::identity(3)), 1);
        assert_eq!(element_order(&p("(12)(345)", 5)), 6);
    }

    #[test]
    fn conjugate_examples() {
        let t = p("(12)", 6);
        assert_eq!(conjugate(&t, &Permutation::identity(6)).unwrap(), t);
        assert_eq!(
            conjugate(&p("(12)", 3), &p("(13)", 3)).unwrap(),
            p("(23)", 3)
        );
        let v = p("(13)(24)", 6);
        assert_eq!(conjugate(&v, &p("(56)", 6)).unwrap(), v);
    }

    #[test]
    fn conjugate_matches_pointwise_evaluation() {
        // h g h^-1 sends h(x) to h(g(x))
        let g = p("(1 2 4)", 5);
        let h = p("(1 5 3)(2 4)", 5);
        let c = conjugate(&g, &h).unwrap();
        for x in 1..=5 {
            assert_eq!(c.apply(h.apply(x)), h.apply(g.apply(x)));
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_cycles("(1 2", 3),
            Err(PermError::Syntax { .. })
        ));
        assert!(matches!(
            parse_cycles("1 2)", 3),
            Err(PermError::Syntax { .. })
        ));
        assert!(matches!(
            parse_cycles("(1 x)", 3),
            Err(PermError::Syntax { .. })
        ));
        assert!(matches!(parse_cycles("", 3), Err(PermError::Syntax { .. })));
        assert_eq!(
            parse_cycles("(1 2 1)", 3),
            Err(PermError::RepeatedPoint { point: 1 })
        );
        assert_eq!(
            parse_cycles("(1 4)", 3),
            Err(PermError::PointOutOfRange {
                point: 4,
                degree: 3
            })
        );
        assert_eq!(
            parse_cycles("(0 1)", 3),
            Err(PermError::PointOutOfRange {
                point: 0,
                degree: 3
            })
        );
        assert_eq!(parse_cycles("e", 0), Err(PermError::ZeroDegree));
    }

    #[test]
    fn multi_digit_points_need_separators() {
        let q = p("(1 12)", 12);
        assert_eq!(q.apply(1), 12);
        assert_eq!(q.apply(12), 1);
        assert_eq!(q.to_string(), "(1 12)");
        // at degree 9 a digit run splits into points
        assert_eq!(p("(12)", 9), p("(1 2)", 9));
        // at degree 12 "(12)" is a one-point cycle on 12
        assert_eq!(p("(12)", 12), Permutation::identity(12));
    }

    #[test]
    fn canonical_format() {
        assert_eq!(p("(4 2)(3 1)", 4).to_string(), "(1 3)(2 4)");
        assert_eq!(p("(3 1 2)", 3).to_string(), "(1 2 3)");
        assert_eq!(Permutation::identity(3).to_string(), "e");
    }

    #[test]
    fn from_images_rejects_non_bijections() {
        assert!(Permutation::from_images(&[1, 1, 2]).is_err());
        assert!(Permutation::from_images(&[]).is_err());
        assert!(Permutation::from_images(&[2, 3, 1]).is_ok());
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
        Just((1..=n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(&v).unwrap())
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(n in 1usize..=8, seed in any::<u64>()) {
            let mut v: Vec<usize> = (1..=n).collect();
            // deterministic Fisher-Yates from the seed
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                v.swap(i, (s >> 33) as usize % (i + 1));
            }
            let q = Permutation::from_images(&v).unwrap();
            prop_assert_eq!(parse_cycles(&q.to_string(), n).unwrap(), q);
        }

        #[test]
        fn group_axioms(a in arb_perm(6), b in arb_perm(6), c in arb_perm(6)) {
            let e = Permutation::identity(6);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &e, a.clone());
            prop_assert_eq!(&e * &a, a.clone());
            prop_assert!((&a * &a.inverse()).is_identity());
            prop_assert!((&a.inverse() * &a).is_identity());
        }

        #[test]
        fn order_is_conjugation_invariant(g in arb_perm(7), h in arb_perm(7)) {
            let c = conjugate(&g, &h).unwrap();
            prop_assert_eq!(element_order(&c), element_order(&g));
            prop_assert!(g.pow(element_order(&g)).is_identity());
        }
    }
}
