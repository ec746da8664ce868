//! Shapes of k-sums and productions on powers of an idempotent word.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;

use crate::algebra::Word;
use crate::combin::{binomial, for_each_composition};
use crate::poly::{rational, RationalPoly};
use crate::Natural;

use super::production::{prod_multicontext, Multicontext};
use super::{MachineError, NestedMachine};

/// A k-sum in which every maximal block of zeros has length one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape(pub Vec<usize>);

impl Shape {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn zeros(&self) -> usize {
        self.0.iter().filter(|&&x| x == 0).count()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Collapses each maximal run of zeros into a single zero.
pub fn shape_of(tuple: &[usize]) -> Shape {
    let mut out: Vec<usize> = Vec::with_capacity(tuple.len());
    for &x in tuple {
        if x == 0 && out.last() == Some(&0) {
            continue;
        }
        out.push(x);
    }
    Shape(out)
}

/// Shapes of the `r`-sums of length at least `2r+1`: sequences summing to
/// `r` with at least one zero and no two consecutive zeros.
pub fn shapes_enum(r: usize) -> BTreeSet<Shape> {
    fn go(rest: usize, buf: &mut Vec<usize>, out: &mut BTreeSet<Shape>) {
        if rest == 0 && buf.contains(&0) {
            out.insert(Shape(buf.clone()));
        }
        let lo = if buf.last() == Some(&0) { 1 } else { 0 };
        for v in lo..=rest {
            buf.push(v);
            go(rest - v, buf, out);
            buf.pop();
        }
    }
    let mut out = BTreeSet::new();
    go(r, &mut Vec::new(), &mut out);
    out
}

/// `P_s(X)`: the number of tuples of length `X` whose shape is `s`. Each
/// zero of `s` stands for a nonempty block of zeros, so this counts the
/// ways to split the `X − (|s| − z)` zero slots into `z` nonempty blocks.
pub fn shape_count_poly(s: &Shape, x: usize) -> Natural {
    let z = s.zeros() as i128;
    let nonzero = (s.0.len() as i128) - z;
    if z == 0 {
        return Natural::from(x as i128 == nonzero);
    }
    binomial(x as i128 - nonzero - 1, z - 1)
}

/// Brute-force count of the `r`-sums of length `x` with shape `s`.
pub fn shape_count_brute(s: &Shape, x: usize) -> Natural {
    let mut count = 0;
    for_each_composition(s.total(), x, &mut |t| {
        if shape_of(t) == *s {
            count += 1;
        }
    });
    count
}

fn power(u: &[usize], x: usize) -> Word {
    u.repeat(x)
}

/// Both sides of
/// `prod(L⟦u^X⟧_r R) = Σ_{s ∈ Shapes_r} P_s(X)·prod(L⟦u⟧_{s₁}⋯⟦u⟧_{s_Y}R)`.
pub fn shape_sum_identity(
    machine: &NestedMachine,
    left: &Multicontext,
    u: &Word,
    r: usize,
    right: &Multicontext,
    x: usize,
) -> Result<(Natural, Natural), MachineError> {
    let monoid = machine.morphism().monoid();
    let lhs_ctx = left.concat(monoid, &Multicontext::hole(monoid, power(u, x), r)).concat(monoid, right);
    let lhs = prod_multicontext(machine, &lhs_ctx)?;
    let mut rhs = 0;
    for s in shapes_enum(r) {
        let coeff = shape_count_poly(&s, x);
        if coeff == 0 {
            continue;
        }
        let mut mid = Multicontext::constant(monoid.identity());
        for &si in &s.0 {
            mid = mid.then_hole(monoid, u.clone(), si);
        }
        let ctx = left.concat(monoid, &mid).concat(monoid, right);
        rhs += coeff * prod_multicontext(machine, &ctx)?;
    }
    Ok((lhs, rhs))
}

/// Result of [`prod_power_poly`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerPolynomial {
    pub poly: RationalPoly,
    pub samples: Vec<(usize, Natural)>,
    /// For `r = 1`: the coefficient of `X` and `prod(L e⟦u⟧e R)`.
    pub slope: Option<(BigRational, Natural)>,
}

impl PowerPolynomial {
    pub fn slope_matches(&self) -> bool {
        self.slope.as_ref().is_none_or(|(c, v)| *c == rational(*v))
    }
}

/// Interpolates `X ↦ prod(L⟦u^X⟧_r R)` over the sample points `xs`
/// (at least `r + 2` of them, all `≥ 2r+1`): the first `r + 1` points fix
/// the polynomial and the remaining ones must agree with it.
pub fn prod_power_poly(
    machine: &NestedMachine,
    left: &Multicontext,
    u: &Word,
    r: usize,
    right: &Multicontext,
    xs: &[usize],
) -> Result<PowerPolynomial, MachineError> {
    let mu = machine.morphism();
    let monoid = mu.monoid();
    let e = mu.eval(u);
    if !monoid.is_idempotent(e) {
        return Err(MachineError::NotIdempotent(mu.format_word(u)));
    }
    if xs.len() < r + 2 || xs.iter().any(|&x| x < 2 * r + 1) {
        return Err(MachineError::SampleRange { points: r + 2, min: 2 * r + 1 });
    }
    let mut samples = Vec::with_capacity(xs.len());
    for &x in xs {
        let ctx = left.concat(monoid, &Multicontext::hole(monoid, power(u, x), r)).concat(monoid, right);
        samples.push((x, prod_multicontext(machine, &ctx)?));
    }
    let points: Vec<(i64, BigRational)> = samples.iter().map(|&(x, v)| (x as i64, rational(v))).collect();
    let poly = RationalPoly::interpolate(&points[..r + 1]);
    if points[r + 1..].iter().any(|(x, v)| poly.eval(*x) != *v) {
        let full = RationalPoly::interpolate(&points);
        return Err(MachineError::DegreeExceeded { bound: r, found: full.degree().unwrap_or(0) });
    }
    let slope = if r == 1 {
        let mid = Multicontext::constant(e).then_hole(monoid, u.clone(), 1).then_elem(monoid, e);
        let ctx = left.concat(monoid, &mid).concat(monoid, right);
        Some((poly.coefficient(1), prod_multicontext(machine, &ctx)?))
    } else {
        None
    };
    Ok(PowerPolynomial { poly, samples, slope })
}
