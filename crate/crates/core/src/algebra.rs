//! Lie–Poisson bracket tables.
//!
//! Every bracket in this crate is linear in the phase variables, so a table
//! stores, for each ordered pair `(i, j)`, the exact integer structure
//! coefficients of `{x_i, x_j} = Σ_k c_ij^k x_k`. All coefficients come from the
//! Levi-Civita symbol and are ±1.
//!
//! Equations of motion follow the convention `ẋ = {x, H}`, i.e.
//! `ẋ_i = Σ_j {x_i, x_j} ∂H/∂x_j`. This contraction is the normative definition
//! of the dynamics; the closed cross-product forms in [`crate::model`] are
//! checked against it.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Levi-Civita symbol on `{0, 1, 2}`.
pub fn levi_civita(a: usize, b: usize, c: usize) -> i32 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// A linear combination `Σ c_k x_k` with integer coefficients, sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearForm {
    terms: Vec<(usize, i32)>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, i32)>) -> Self {
        let mut acc: BTreeMap<usize, i32> = BTreeMap::new();
        for (k, c) in terms {
            *acc.entry(k).or_insert(0) += c;
        }
        Self {
            terms: acc.into_iter().filter(|&(_, c)| c != 0).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(usize, i32)] {
        &self.terms
    }

    pub fn coefficient(&self, k: usize) -> i32 {
        self.terms
            .iter()
            .find(|&&(i, _)| i == k)
            .map_or(0, |&(_, c)| c)
    }

    pub fn negated(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|&(k, c)| (k, -c)).collect(),
        }
    }

    pub fn eval(&self, state: &[f64]) -> f64 {
        self.terms.iter().map(|&(k, c)| c as f64 * state[k]).sum()
    }

    /// Render using the variable names of a table, e.g. `+m_z` or `-l_x +m_y`.
    pub fn display_with<'a>(&'a self, names: &'a [&'static str]) -> impl fmt::Display + 'a {
        DisplayForm { form: self, names }
    }
}

struct DisplayForm<'a> {
    form: &'a LinearForm,
    names: &'a [&'static str],
}

impl fmt::Display for DisplayForm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.form.is_zero() {
            return write!(f, "0");
        }
        for (n, &(k, c)) in self.form.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            let sign = if c > 0 { '+' } else { '-' };
            if c.abs() == 1 {
                write!(f, "{sign}{}", self.names[k])?;
            } else {
                write!(f, "{sign}{}{}", c.abs(), self.names[k])?;
            }
        }
        Ok(())
    }
}

/// Sparse table of linear structure coefficients for a Lie–Poisson bracket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketTable {
    names: Vec<&'static str>,
    entries: BTreeMap<(usize, usize), LinearForm>,
}

impl BracketTable {
    fn new(names: Vec<&'static str>) -> Self {
        Self {
            names,
            entries: BTreeMap::new(),
        }
    }

    /// Adds `form` to `{x_i, x_j}`. The table itself stays lopsided until
    /// [`BracketTable::antisymmetrize`] is called.
    fn add(&mut self, i: usize, j: usize, form: LinearForm) {
        let slot = self.entries.entry((i, j)).or_default();
        *slot = LinearForm::from_terms(slot.terms.iter().copied().chain(form.terms));
    }

    /// Fills `{x_j, x_i} = -{x_i, x_j}` from the upper triangle.
    fn antisymmetrize(mut self) -> Self {
        let upper: Vec<_> = self
            .entries
            .iter()
            .filter(|((i, j), _)| i < j)
            .map(|(&(i, j), f)| ((j, i), f.negated()))
            .collect();
        self.entries.retain(|(i, j), f| i < j && !f.is_zero());
        for (k, f) in upper {
            if !f.is_zero() {
                self.entries.insert(k, f);
            }
        }
        self
    }

    /// Adds the angular-momentum block `{a_α, b_β} = ε_αβγ c_γ` for three
    /// variables starting at offsets `a`, `b`, `c`. Only the `a < b` (or
    /// `a == b`, α < β) half is written.
    fn epsilon_block(&mut self, a: usize, b: usize, c: usize) {
        for alpha in 0..3 {
            for beta in 0..3 {
                let (i, j) = (a + alpha, b + beta);
                if i >= j {
                    continue;
                }
                let form =
                    LinearForm::from_terms((0..3).map(|g| (c + g, levi_civita(alpha, beta, g))));
                self.add(i, j, form);
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[&'static str] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|&n| n == name)
    }

    /// Structure coefficients of `{x_i, x_j}`.
    pub fn bracket(&self, i: usize, j: usize) -> LinearForm {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn bracket_by_name(&self, a: &str, b: &str) -> Option<LinearForm> {
        Some(self.bracket(self.index_of(a)?, self.index_of(b)?))
    }

    /// Value of `{x_i, x_j}` at a state.
    pub fn eval(&self, i: usize, j: usize, state: &[f64]) -> f64 {
        self.entries.get(&(i, j)).map_or(0.0, |f| f.eval(state))
    }

    /// First pair `(i, j)` violating `{x_i, x_j} = -{x_j, x_i}`, if any.
    pub fn antisymmetry_violation(&self) -> Option<(usize, usize)> {
        let n = self.dimension();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| self.bracket(i, j) != self.bracket(j, i).negated())
    }

    /// Exact Jacobi check over all index triples. Returns the first triple
    /// whose cyclic sum `{{x_i,x_j},x_k} + {{x_j,x_k},x_i} + {{x_k,x_i},x_j}`
    /// is not the zero form.
    pub fn jacobi_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.dimension();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if !self.jacobiator(i, j, k).is_zero() {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// `{{x_i,x_j},x_k} + cyclic`, contracted symbolically.
    pub fn jacobiator(&self, i: usize, j: usize, k: usize) -> LinearForm {
        let mut terms = Vec::new();
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            // {{x_a, x_b}, x_c} = Σ_l c_ab^l {x_l, x_c}
            for &(l, coef) in self.bracket(a, b).terms() {
                for &(m, c2) in self.bracket(l, c).terms() {
                    terms.push((m, coef * c2));
                }
            }
        }
        LinearForm::from_terms(terms)
    }

    /// Poisson matrix `J_ij = {x_i, x_j}` evaluated at a state.
    pub fn poisson_matrix(&self, state: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_dim(state.len())?;
        let n = self.dimension();
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.eval(i, j, state)).collect())
            .collect())
    }

    /// `ẋ_i = Σ_j {x_i, x_j}(state) · g_j` for a given covector `g = ∇H(state)`.
    pub fn contract(&self, state: &[f64], gradient: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(state.len())?;
        self.check_dim(gradient.len())?;
        let mut out = vec![0.0; self.dimension()];
        for (&(i, j), form) in &self.entries {
            out[i] += form.eval(state) * gradient[j];
        }
        Ok(out)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got,
            });
        }
        Ok(())
    }
}

/// Hamiltonian vector field `ẋ = {x, H}` through bracket contraction.
pub fn bracket_vector_field<F>(table: &BracketTable, gradient: F, state: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let g = gradient(state);
    table.contract(state, &g)
}

/// 6-D table over `(m_x, m_y, m_z, l_x, l_y, l_z)`:
/// `{m_α,m_β} = ε m_γ`, `{m_α,l_β} = ε l_γ`, `{l_α,l_β} = ε m_γ`.
pub fn ml_bracket_table() -> BracketTable {
    let mut t = BracketTable::new(vec!["m_x", "m_y", "m_z", "l_x", "l_y", "l_z"]);
    t.epsilon_block(0, 0, 0);
    t.epsilon_block(0, 3, 3);
    t.epsilon_block(3, 3, 0);
    t.antisymmetrize()
}

/// 6-D table over `(g, h)` components: two commuting angular momenta.
pub fn gh_bracket_table() -> BracketTable {
    let mut t = BracketTable::new(vec!["g_x", "g_y", "g_z", "h_x", "h_y", "h_z"]);
    t.epsilon_block(0, 0, 0);
    t.epsilon_block(3, 3, 3);
    t.antisymmetrize()
}

/// 12-D table for four independent sublattice spins `s_1 .. s_4`.
pub fn sublattice_bracket_table() -> BracketTable {
    let mut t = BracketTable::new(vec![
        "s1_x", "s1_y", "s1_z", "s2_x", "s2_y", "s2_z", "s3_x", "s3_y", "s3_z", "s4_x", "s4_y",
        "s4_z",
    ]);
    for s in 0..4 {
        t.epsilon_block(3 * s, 3 * s, 3 * s);
    }
    t.antisymmetrize()
}
