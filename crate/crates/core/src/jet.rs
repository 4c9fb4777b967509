//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function
//! of `nvars` variables around a base point, for every multi-index with
//! `|α| ≤ order`. Arithmetic on jets is exact up to the truncation order, so
//! evaluating any expression on seeded variable jets yields every mixed
//! partial derivative up to that order in a single pass.
//!
//! Constants are jets without a space: they carry only a value and are valid
//! to every order, so `2.0 * x` never truncates `x`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};

const CONST_ORDER: u8 = u8::MAX;

/// Monomial bookkeeping shared by every jet over the same variables and order.
pub struct JetSpace {
    nvars: usize,
    max_order: usize,
    exponents: Vec<Vec<u8>>,
    degree: Vec<u8>,
    len_by_order: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `i, j ≥ 1` and monomial `k = i + j`, sorted by `k`.
    products: Vec<(u32, u32, u32)>,
    /// `product_end[r]` = number of products whose target has degree ≤ r.
    product_end: Vec<usize>,
    /// `raise[idx * nvars + v]` = index of `α + e_v`, or `u32::MAX`.
    raise: Vec<u32>,
    factorial: Vec<f64>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("max_order", &self.max_order)
            .field("len", &self.exponents.len())
            .finish()
    }
}

fn push_exponents(nvars: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == nvars {
        let mut e = prefix.clone();
        e.push(degree as u8);
        out.push(e);
        return;
    }
    for d in (0..=degree).rev() {
        prefix.push(d as u8);
        push_exponents(nvars, degree - d, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    fn build(nvars: usize, max_order: usize) -> JetSpace {
        assert!(nvars > 0, "jet space needs at least one variable");
        assert!(max_order < CONST_ORDER as usize);
        let mut exponents = Vec::new();
        let mut len_by_order = Vec::with_capacity(max_order + 1);
        for d in 0..=max_order {
            push_exponents(nvars, d, &mut Vec::with_capacity(nvars), &mut exponents);
            len_by_order.push(exponents.len());
        }
        let degree: Vec<u8> = exponents.iter().map(|e| e.iter().sum()).collect();
        let index: HashMap<Vec<u8>, usize> =
            exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let mut raise = vec![u32::MAX; exponents.len() * nvars];
        for (i, e) in exponents.iter().enumerate() {
            for v in 0..nvars {
                let mut r = e.clone();
                r[v] += 1;
                if let Some(&k) = index.get(&r) {
                    raise[i * nvars + v] = k as u32;
                }
            }
        }

        let mut products = Vec::new();
        let len = exponents.len();
        let mut sum = vec![0u8; nvars];
        for i in 1..len {
            for j in 1..len {
                if (degree[i] + degree[j]) as usize > max_order {
                    continue;
                }
                for v in 0..nvars {
                    sum[v] = exponents[i][v] + exponents[j][v];
                }
                let k = index[&sum];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        products.sort_by_key(|&(i, j, k)| (k, i, j));
        let product_end = len_by_order
            .iter()
            .map(|&l| products.partition_point(|&(_, _, k)| (k as usize) < l))
            .collect();

        let factorial = exponents
            .iter()
            .map(|e| e.iter().map(|&p| (1..=p as u32).product::<u32>() as f64).product())
            .collect();

        JetSpace {
            nvars,
            max_order,
            exponents,
            degree,
            len_by_order,
            index,
            products,
            product_end,
            raise,
            factorial,
        }
    }

    /// Shared space for `nvars` variables truncated at `max_order`.
    pub fn get(nvars: usize, max_order: usize) -> &'static JetSpace {
        static SPACES: OnceLock<Mutex<HashMap<(usize, usize), &'static JetSpace>>> =
            OnceLock::new();
        let cache = SPACES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, max_order))
            .or_insert_with(|| Box::leak(Box::new(JetSpace::build(nvars, max_order))))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of monomials of degree at most `order`.
    pub fn len(&self, order: usize) -> usize {
        self.len_by_order[order.min(self.max_order)]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exponents[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.degree[idx] as usize
    }

    pub fn factorial(&self, idx: usize) -> f64 {
        self.factorial[idx]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    /// Seeded variable jets `p_i + t_i`, truncated at the space order.
    pub fn variables(&'static self, point: &[f64]) -> Vec<Jet> {
        assert_eq!(point.len(), self.nvars, "point dimension does not match jet space");
        point
            .iter()
            .enumerate()
            .map(|(v, &p)| {
                let mut tail = vec![0.0; self.len(self.max_order) - 1];
                tail[v] = 1.0;
                Jet {
                    space: Some(self),
                    order: self.max_order as u8,
                    value: p,
                    tail,
                }
            })
            .collect()
    }
}

/// A truncated multivariate Taylor expansion.
#[derive(Clone)]
pub struct Jet {
    space: Option<&'static JetSpace>,
    order: u8,
    value: f64,
    /// Coefficients of monomials `1..len(order)`.
    tail: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.space.is_none() {
            write!(f, "Jet({})", self.value)
        } else {
            f.debug_struct("Jet")
                .field("order", &self.order)
                .field("value", &self.value)
                .field("tail", &self.tail)
                .finish()
        }
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Jet {
        Jet::constant(v)
    }
}

impl Jet {
    pub fn constant(value: f64) -> Jet {
        Jet {
            space: None,
            order: CONST_ORDER,
            value,
            tail: Vec::new(),
        }
    }

    /// Builds a jet from its full coefficient vector (index 0 is the value).
    pub fn from_coefficients(space: &'static JetSpace, order: usize, coeffs: &[f64]) -> Jet {
        let order = order.min(space.max_order);
        let len = space.len(order);
        assert_eq!(coeffs.len(), len, "coefficient count does not match order");
        Jet {
            space: Some(space),
            order: order as u8,
            value: coeffs[0],
            tail: coeffs[1..].to_vec(),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_constant(&self) -> bool {
        self.space.is_none()
    }

    pub fn space(&self) -> Option<&'static JetSpace> {
        self.space
    }

    /// Truncation order, or `None` for exact constants.
    pub fn order(&self) -> Option<usize> {
        if self.is_constant() {
            None
        } else {
            Some(self.order as usize)
        }
    }

    /// Taylor coefficient of monomial `idx` (index 0 is the value).
    pub fn coefficient(&self, idx: usize) -> f64 {
        if idx == 0 {
            self.value
        } else {
            self.tail.get(idx - 1).copied().unwrap_or(0.0)
        }
    }

    /// Mixed partial derivative `∂^k f / ∂v_1 … ∂v_k` for the listed variables.
    pub fn partial(&self, vars: &[usize]) -> f64 {
        if vars.is_empty() {
            return self.value;
        }
        let Some(space) = self.space else {
            return 0.0;
        };
        assert!(
            vars.len() <= self.order as usize,
            "requested derivative of order {} from a jet of order {}",
            vars.len(),
            self.order
        );
        let mut e = vec![0u8; space.nvars];
        for &v in vars {
            e[v] += 1;
        }
        let idx = space.index[&e];
        self.coefficient(idx) * space.factorial[idx]
    }

    pub fn gradient(&self, nvars: usize) -> Vec<f64> {
        (0..nvars).map(|v| self.partial(&[v])).collect()
    }

    /// Partial derivative with respect to variable `var`, one order lower.
    pub fn differentiate(&self, var: usize) -> Jet {
        let Some(space) = self.space else {
            return Jet::constant(0.0);
        };
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order as usize - 1;
        let len = space.len(order);
        let n = space.nvars;
        let mut coeffs = Vec::with_capacity(len);
        for idx in 0..len {
            let up = space.raise[idx * n + var];
            let c = if up == u32::MAX {
                0.0
            } else {
                (space.exponents[idx][var] as f64 + 1.0) * self.coefficient(up as usize)
            };
            coeffs.push(c);
        }
        Jet {
            space: Some(space),
            order: order as u8,
            value: coeffs[0],
            tail: coeffs[1..].to_vec(),
        }
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        match self.space {
            None => self.clone(),
            Some(space) if order < self.order as usize => {
                let len = space.len(order);
                Jet {
                    space: Some(space),
                    order: order as u8,
                    value: self.value,
                    tail: self.tail[..len - 1].to_vec(),
                }
            }
            Some(_) => self.clone(),
        }
    }

    fn joint(&self, other: &Jet) -> (Option<&'static JetSpace>, u8) {
        match (self.space, other.space) {
            (None, None) => (None, CONST_ORDER),
            (Some(s), None) => (Some(s), self.order),
            (None, Some(s)) => (Some(s), other.order),
            (Some(a), Some(b)) => {
                assert!(std::ptr::eq(a, b), "jets from different spaces mixed");
                (Some(a), self.order.min(other.order))
            }
        }
    }

    fn scale(&self, k: f64) -> Jet {
        Jet {
            space: self.space,
            order: self.order,
            value: self.value * k,
            tail: self.tail.iter().map(|c| c * k).collect(),
        }
    }

    fn add_impl(&self, other: &Jet, sign: f64) -> Jet {
        let (space, order) = self.joint(other);
        let Some(space) = space else {
            return Jet::constant(self.value + sign * other.value);
        };
        let len = space.len(order as usize) - 1;
        let mut tail = vec![0.0; len];
        for (t, c) in tail.iter_mut().zip(&self.tail) {
            *t = *c;
        }
        for (t, c) in tail.iter_mut().zip(&other.tail) {
            *t += sign * c;
        }
        Jet {
            space: Some(space),
            order,
            value: self.value + sign * other.value,
            tail,
        }
    }

    fn mul_impl(&self, other: &Jet) -> Jet {
        if other.is_constant() {
            return self.scale(other.value);
        }
        if self.is_constant() {
            return other.scale(self.value);
        }
        let (space, order) = self.joint(other);
        let space = space.expect("non-constant jets carry a space");
        let len = space.len(order as usize);
        let (a0, b0) = (self.value, other.value);
        let mut tail = Vec::with_capacity(len - 1);
        for k in 0..len - 1 {
            tail.push(a0 * other.tail[k] + b0 * self.tail[k]);
        }
        let (a, b) = (&self.tail, &other.tail);
        for &(i, j, k) in &space.products[..space.product_end[order as usize]] {
            tail[k as usize - 1] += a[i as usize - 1] * b[j as usize - 1];
        }
        Jet {
            space: Some(space),
            order,
            value: a0 * b0,
            tail,
        }
    }

    /// Applies a univariate function given its Taylor coefficients
    /// `d_k = g^{(k)}(value) / k!` for `k = 0..=order`.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        if self.is_constant() {
            return Jet::constant(taylor[0]);
        }
        let r = (self.order as usize).min(taylor.len() - 1);
        let mut h = self.clone();
        h.value = 0.0;
        let mut acc = Jet::constant(taylor[r]);
        for k in (0..r).rev() {
            acc = acc.mul_impl(&h);
            acc.value += taylor[k];
        }
        if acc.is_constant() {
            // r == 0: only the value survives.
            let space = self.space.unwrap();
            return Jet {
                space: Some(space),
                order: self.order,
                value: acc.value,
                tail: vec![0.0; space.len(self.order as usize) - 1],
            };
        }
        acc
    }

    fn taylor_order(&self) -> usize {
        if self.is_constant() {
            0
        } else {
            self.order as usize
        }
    }

    pub fn recip(&self) -> Jet {
        let a = self.value;
        let n = self.taylor_order();
        let mut d = Vec::with_capacity(n + 1);
        let inv = 1.0 / a;
        let mut p = inv;
        for _ in 0..=n {
            d.push(p);
            p *= -inv;
        }
        self.compose(&d)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value;
        let n = self.taylor_order();
        let mut d = Vec::with_capacity(n + 1);
        let mut binom = 1.0;
        for k in 0..=n {
            d.push(binom * a.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&d)
    }

    pub fn powi(&self, p: i32) -> Jet {
        if p >= 0 {
            let mut acc = Jet::constant(1.0);
            for _ in 0..p {
                acc = acc.mul_impl(self);
            }
            acc
        } else {
            self.powi(-p).recip()
        }
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn square(&self) -> Jet {
        self.mul_impl(self)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value;
        let n = self.taylor_order();
        let mut d = vec![a.ln()];
        for k in 1..=n {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign / (k as f64 * a.powi(k as i32)));
        }
        self.compose(&d)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        let n = self.taylor_order();
        let mut d = Vec::with_capacity(n + 1);
        let mut f = 1.0;
        for k in 0..=n {
            if k > 0 {
                f *= k as f64;
            }
            d.push(e / f);
        }
        self.compose(&d)
    }

    fn trig(&self, phase: f64) -> Jet {
        let a = self.value;
        let n = self.taylor_order();
        let mut d = Vec::with_capacity(n + 1);
        let mut f = 1.0;
        for k in 0..=n {
            if k > 0 {
                f *= k as f64;
            }
            d.push((a + phase + k as f64 * std::f64::consts::FRAC_PI_2).sin() / f);
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Jet {
        self.trig(0.0)
    }

    pub fn cos(&self) -> Jet {
        self.trig(std::f64::consts::FRAC_PI_2)
    }

    pub fn atan(&self) -> Jet {
        let a = self.value;
        let n = self.taylor_order();
        // 1 / (1 + (a + h)^2) as a power series in h.
        let c0 = 1.0 + a * a;
        let mut q = Vec::with_capacity(n);
        for k in 0..n {
            let prev1 = if k >= 1 { q[k - 1] } else { 0.0 };
            let prev2 = if k >= 2 { q[k - 2] } else { 0.0 };
            let qk = if k == 0 {
                1.0 / c0
            } else {
                -(2.0 * a * prev1 + prev2) / c0
            };
            q.push(qk);
        }
        let mut d = vec![a.atan()];
        for k in 1..=n {
            d.push(q[k - 1] / k as f64);
        }
        self.compose(&d)
    }

    /// `|f|`, differentiable away from zero.
    pub fn abs(&self) -> Jet {
        if self.value < 0.0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn signum(&self) -> f64 {
        self.value.signum()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $trait::$method(self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $trait::$method(&self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $trait::$method(self, &Jet::constant(rhs))
            }
        }
        impl $trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $trait::$method(&self, &Jet::constant(rhs))
            }
        }
        impl $trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $trait::$method(&Jet::constant(self), rhs)
            }
        }
        impl $trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $trait::$method(&Jet::constant(self), &rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.add_impl(b, 1.0));
jet_binop!(Sub, sub, |a, b| a.add_impl(b, -1.0));
jet_binop!(Mul, mul, |a, b| a.mul_impl(b));
jet_binop!(Div, div, |a, b| if b.is_constant() {
    a.scale(1.0 / b.value)
} else {
    a.mul_impl(&b.recip())
});

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = self.add_impl(rhs, 1.0);
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = self.add_impl(&rhs, 1.0);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = self.add_impl(rhs, -1.0);
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = self.add_impl(&rhs, -1.0);
    }
}

impl MulAssign<&Jet> for Jet {
    fn mul_assign(&mut self, rhs: &Jet) {
        *self = self.mul_impl(rhs);
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        *self = self.scale(rhs);
    }
}

/// Dot product of two jet vectors.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = Jet::constant(0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Constant jets from plain values.
pub fn constants(values: &[f64]) -> Vec<Jet> {
    values.iter().map(|&v| Jet::constant(v)).collect()
}

pub fn values(jets: &[Jet]) -> Vec<f64> {
    jets.iter().map(Jet::value).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        let s = JetSpace::get(3, 4);
        // C(3 + 4, 4) = 35
        assert_eq!(s.len(4), 35);
        assert_eq!(s.len(1), 4);
        assert_eq!(s.exponents(0), &[0, 0, 0]);
    }

    #[test]
    fn polynomial_partials_are_exact() {
        let s = JetSpace::get(2, 4);
        let v = s.variables(&[1.5, -2.0]);
        // f = x^3 y^2 + 4 x y
        let f = v[0].powi(3) * v[1].square() + 4.0 * &v[0] * &v[1];
        let (x, y) = (1.5f64, -2.0f64);
        assert!((f.value() - (x.powi(3) * y * y + 4.0 * x * y)).abs() < 1e-12);
        assert!((f.partial(&[0]) - (3.0 * x * x * y * y + 4.0 * y)).abs() < 1e-12);
        assert!((f.partial(&[0, 1]) - (6.0 * x * x * y + 4.0)).abs() < 1e-12);
        assert!((f.partial(&[0, 0, 1, 1]) - 12.0 * x).abs() < 1e-12);
        assert!((f.partial(&[0, 0, 0, 1]) - 12.0 * y).abs() < 1e-12);
    }

    #[test]
    fn elementary_functions_match_closed_form_derivatives() {
        let s = JetSpace::get(1, 4);
        let x = &s.variables(&[0.7])[0];
        let a = 0.7f64;
        let at = x.atan();
        assert!((at.partial(&[0]) - 1.0 / (1.0 + a * a)).abs() < 1e-14);
        assert!((at.partial(&[0, 0]) + 2.0 * a / (1.0 + a * a).powi(2)).abs() < 1e-14);
        let third = (6.0 * a * a - 2.0) / (1.0 + a * a).powi(3);
        assert!((at.partial(&[0, 0, 0]) - third).abs() < 1e-13);
        let sq = x.sqrt();
        assert!((sq.partial(&[0, 0]) + 0.25 * a.powf(-1.5)).abs() < 1e-13);
        let l = x.ln();
        assert!((l.partial(&[0, 0, 0]) - 2.0 / a.powi(3)).abs() < 1e-12);
        let e = x.exp();
        assert!((e.partial(&[0, 0, 0, 0]) - a.exp()).abs() < 1e-12);
        let c = x.cos();
        assert!((c.partial(&[0, 0, 0]) - a.sin()).abs() < 1e-13);
    }

    #[test]
    fn differentiate_lowers_order() {
        let s = JetSpace::get(2, 3);
        let v = s.variables(&[0.3, 0.4]);
        let f = (&v[0] * &v[1]).sin();
        let fx = f.differentiate(0);
        assert_eq!(fx.order(), Some(2));
        assert!((fx.value() - f.partial(&[0])).abs() < 1e-15);
        assert!((fx.partial(&[1, 1]) - f.partial(&[0, 1, 1])).abs() < 1e-13);
    }

    #[test]
    fn constants_do_not_truncate() {
        let s = JetSpace::get(1, 3);
        let x = &s.variables(&[2.0])[0];
        let f = 3.0 * x.square() + 1.0;
        assert_eq!(f.order(), Some(3));
        assert!((f.partial(&[0, 0]) - 6.0).abs() < 1e-14);
        let g = Jet::constant(5.0) / 2.0;
        assert!(g.is_constant());
        assert_eq!(g.value(), 2.5);
    }
}
