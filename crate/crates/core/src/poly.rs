//! Sparse multivariate polynomials with analytic partial derivatives.
//!
//! Builtin and user-defined models are expressed through these, which keeps
//! every derivative the solver needs exact.

use serde::{Deserialize, Serialize};

/// One term `coef * prod_k x_k^exps[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub exps: Vec<u32>,
}

impl Monomial {
    pub fn new(coef: f64, exps: Vec<u32>) -> Self {
        Self { coef, exps }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.exps
            .iter()
            .zip(x)
            .fold(self.coef, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }

    /// Partial derivative with respect to variable `k`, evaluated at `x`.
    fn eval_partial(&self, x: &[f64], k: usize) -> f64 {
        let ek = self.exps[k];
        if ek == 0 {
            return 0.0;
        }
        let mut acc = self.coef * f64::from(ek);
        for (j, (&e, &xj)) in self.exps.iter().zip(x).enumerate() {
            let e = if j == k { e - 1 } else { e };
            acc *= xj.powi(e as i32);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.push(c, vec![0; nvars]);
        p
    }

    /// Builds a polynomial from `(coef, exponents)` pairs. Every exponent
    /// vector must have length `nvars`.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (f64, Vec<u32>)>) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            p.push(c, e);
        }
        p
    }

    pub fn push(&mut self, coef: f64, exps: Vec<u32>) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length mismatch");
        if coef != 0.0 {
            self.terms.push(Monomial::new(coef, exps));
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms.iter().map(|m| m.eval(x)).sum()
    }

    pub fn partial(&self, x: &[f64], k: usize) -> f64 {
        self.terms.iter().map(|m| m.eval_partial(x, k)).sum()
    }

    /// Writes the partials with respect to variables `range` into `out`.
    pub fn gradient_range(&self, x: &[f64], range: std::ops::Range<usize>, out: &mut [f64]) {
        for (o, k) in out.iter_mut().zip(range) {
            *o = self.partial(x, k);
        }
    }

    /// True when no term depends on any variable.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|m| m.exps.iter().all(|&e| e == 0))
    }

    /// Total degree of each term restricted to the variables in `range`.
    pub fn degrees_in(&self, range: std::ops::Range<usize>) -> impl Iterator<Item = u32> + '_ {
        self.terms
            .iter()
            .map(move |m| m.exps[range.clone()].iter().sum())
    }

    /// Scales each term by a factor depending on its exponents.
    pub fn map_terms(&self, f: impl Fn(&Monomial) -> f64) -> Self {
        let mut p = Self::zero(self.nvars);
        for m in &self.terms {
            p.push(m.coef * f(m), m.exps.clone());
        }
        p
    }

    /// Embeds a polynomial in `self.nvars` variables into `nvars` variables,
    /// placing the original variables at `offset..offset+self.nvars`.
    pub fn embed(&self, nvars: usize, offset: usize) -> Self {
        assert!(offset + self.nvars <= nvars);
        let mut p = Self::zero(nvars);
        for m in &self.terms {
            let mut e = vec![0; nvars];
            e[offset..offset + self.nvars].copy_from_slice(&m.exps);
            p.push(m.coef, e);
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut p = self.clone();
        for m in &other.terms {
            p.push(m.coef, m.exps.clone());
        }
        p
    }
}
