//! Deflation with smoothing parameters.
//!
//! Starting from a square system `F(x)` and an approximate singular root,
//! each step picks the column set `C` and row set `K` at the current corank
//! `d`, subtracts `X_s·b_s` from the perturbed system `F̃`, rebuilds the
//! augmented system from `F̃`, and appends the directional-derivative rows
//! `G_y·v_{s+1}`. Equation and variable counts both double per step.
//!
//! Variables are laid out as `x | λ1 | b0 | λ2 | b1 | …`. Every polynomial in
//! the state is expressed over the full current layout.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{self, LinalgError, SelectionRule, SelectionSets};
use crate::poly::{DirectionEntry, PolyError, PolySystem, Polynomial};
use crate::scalar::{inverse_factorial, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeflationError {
    #[error("system has {eqs} equations in {vars} unknowns; a square system is required")]
    NotSquare { eqs: usize, vars: usize },
    #[error("start point has {found} coordinates, expected {expected}")]
    StartLength { expected: usize, found: usize },
    #[error("start point has non-finite coordinates")]
    NonFiniteStart,
    #[error("corank increased from {from} to {to}; the threshold is probably mis-set")]
    CorankIncreased { from: usize, to: usize },
    #[error("the current system is already regular at the approximate root")]
    AlreadyRegular,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Kind of a block of unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// The original unknowns.
    X,
    /// Free entries `λ_j` of the direction vector `v_j`, `j >= 1`.
    Multiplier(usize),
    /// Smoothing parameters `b_j`, `j >= 0`.
    Smoothing(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableBlock {
    pub kind: BlockKind,
    pub start: usize,
    pub names: Vec<String>,
}

impl VariableBlock {
    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.width()
    }
}

/// Ordered blocks of unknowns of the augmented system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableLayout {
    blocks: Vec<VariableBlock>,
    total: usize,
    lambda_count: usize,
    b_count: usize,
}

impl VariableLayout {
    pub fn new(x_names: Vec<String>) -> Self {
        let total = x_names.len();
        VariableLayout {
            blocks: vec![VariableBlock {
                kind: BlockKind::X,
                start: 0,
                names: x_names,
            }],
            total,
            lambda_count: 0,
            b_count: 0,
        }
    }

    pub fn blocks(&self) -> &[VariableBlock] {
        &self.blocks
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn n(&self) -> usize {
        self.blocks[0].width()
    }

    pub fn names(&self) -> Vec<String> {
        self.blocks.iter().flat_map(|b| b.names.iter().cloned()).collect()
    }

    fn indices_where(&self, f: impl Fn(BlockKind) -> bool) -> Vec<usize> {
        self.blocks
            .iter()
            .filter(|b| f(b.kind))
            .flat_map(VariableBlock::indices)
            .collect()
    }

    pub fn x_indices(&self) -> Vec<usize> {
        (0..self.n()).collect()
    }

    pub fn lambda_indices(&self) -> Vec<usize> {
        self.indices_where(|k| matches!(k, BlockKind::Multiplier(_)))
    }

    pub fn b_indices(&self) -> Vec<usize> {
        self.indices_where(|k| matches!(k, BlockKind::Smoothing(_)))
    }

    pub fn block(&self, kind: BlockKind) -> Option<&VariableBlock> {
        self.blocks.iter().find(|b| b.kind == kind)
    }

    fn fresh_name(&self, stem: &str, k: usize) -> String {
        let taken = self.names();
        let mut name = format!("{stem}{k}");
        while taken.contains(&name) {
            name.push('_');
        }
        name
    }

    /// Appends `λ_order` (width `lambdas`) and `b_{order-1}` (width `bs`).
    fn push_step(&mut self, order: usize, lambdas: usize, bs: usize) {
        let mut names = Vec::with_capacity(lambdas);
        for _ in 0..lambdas {
            self.lambda_count += 1;
            let name = self.fresh_name("lam", self.lambda_count);
            names.push(name);
        }
        self.blocks.push(VariableBlock {
            kind: BlockKind::Multiplier(order),
            start: self.total,
            names,
        });
        self.total += lambdas;
        let mut names = Vec::with_capacity(bs);
        for _ in 0..bs {
            self.b_count += 1;
            let name = self.fresh_name("b", self.b_count);
            names.push(name);
        }
        self.blocks.push(VariableBlock {
            kind: BlockKind::Smoothing(order - 1),
            start: self.total,
            names,
        });
        self.total += bs;
    }
}

/// The perturbation columns `X_s`: column `i` is `(1/s!)·x_{C(i)}^s` in
/// equation `K(i)`. Returned as `(row, monomial)` pairs over `nvars`
/// variables with `x` occupying the first indices.
pub fn build_perturbation_columns<T: Scalar>(
    s: usize,
    columns: &[usize],
    rows: &[usize],
    nvars: usize,
) -> Result<Vec<(usize, Polynomial<T>)>, PolyError> {
    if columns.len() != rows.len() {
        return Err(PolyError::DimensionMismatch {
            expected: columns.len(),
            found: rows.len(),
        });
    }
    let coef = T::from_real(inverse_factorial(s as u32));
    columns
        .iter()
        .zip(rows)
        .map(|(&c, &k)| {
            if c >= nvars {
                return Err(PolyError::VariableOutOfRange { var: c, nvars });
            }
            let mut e = vec![0u32; nvars];
            e[c] = s as u32;
            Ok((k, Polynomial::from_terms(nvars, [(e, coef)])?))
        })
        .collect()
}

/// Output of [`DeflationState::perturb`]: the perturbed system and the
/// augmented system rebuilt from it, over a layout that already contains the
/// next `λ` and `b` blocks.
#[derive(Debug, Clone)]
pub struct PerturbedChain<T> {
    pub f_tilde: PolySystem<T>,
    pub system: PolySystem<T>,
    pub layout: VariableLayout,
    /// Indices of the new `b_s` unknowns.
    pub b_vars: Vec<usize>,
    /// Indices of the new `λ_{s+1}` unknowns.
    pub lambda_vars: Vec<usize>,
}

/// Snapshot of the deflation process after `s` completed steps.
#[derive(Debug, Clone)]
pub struct DeflationState<T> {
    original: PolySystem<T>,
    f_tilde: PolySystem<T>,
    system: PolySystem<T>,
    layout: VariableLayout,
    y_tilde: Vec<T>,
    selections: Vec<SelectionSets>,
    templates: Vec<Vec<DirectionEntry>>,
    lambda_hats: Vec<Vec<T>>,
    coranks: Vec<usize>,
    sigma_min: Vec<f64>,
    eps: f64,
    rule: SelectionRule,
}

impl<T: Scalar> DeflationState<T> {
    /// Starts from `F` at `x̃` and records the initial corank of `JF(x̃)`.
    pub fn new(f: &PolySystem<T>, x_tilde: &[T], eps: f64, rule: SelectionRule) -> Result<Self, DeflationError> {
        if !f.is_square() {
            return Err(DeflationError::NotSquare {
                eqs: f.len(),
                vars: f.nvars(),
            });
        }
        if x_tilde.len() != f.nvars() {
            return Err(DeflationError::StartLength {
                expected: f.nvars(),
                found: x_tilde.len(),
            });
        }
        if !x_tilde.iter().all(Scalar::is_finite_value) {
            return Err(DeflationError::NonFiniteStart);
        }
        let jac = f.jacobian_at(x_tilde)?;
        let info = linalg::numerical_rank(&jac, eps)?;
        Ok(DeflationState {
            original: f.clone(),
            f_tilde: f.clone(),
            system: f.clone(),
            layout: VariableLayout::new(f.var_names().to_vec()),
            y_tilde: x_tilde.to_vec(),
            selections: Vec::new(),
            templates: Vec::new(),
            lambda_hats: Vec::new(),
            coranks: vec![f.nvars() - info.rank],
            sigma_min: vec![info.sigma_min().unwrap_or(0.0)],
            eps,
            rule,
        })
    }

    pub fn original(&self) -> &PolySystem<T> {
        &self.original
    }

    /// The perturbed system `F̃`, over the full current layout.
    pub fn f_tilde(&self) -> &PolySystem<T> {
        &self.f_tilde
    }

    /// The perturbed system in the unknowns `x` and `b` only.
    pub fn f_tilde_xb(&self) -> Result<PolySystem<T>, PolyError> {
        let mut kept = self.layout.x_indices();
        kept.extend(self.layout.b_indices());
        let names = kept.iter().map(|&i| self.layout.names()[i].clone()).collect();
        let polys = self
            .f_tilde
            .polys()
            .iter()
            .map(|p| p.select_vars(&kept))
            .collect::<Result<Vec<_>, _>>()?;
        PolySystem::new(polys, names)
    }

    /// The current augmented system `G`.
    pub fn system(&self) -> &PolySystem<T> {
        &self.system
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    pub fn y_tilde(&self) -> &[T] {
        &self.y_tilde
    }

    pub fn selections(&self) -> &[SelectionSets] {
        &self.selections
    }

    /// Direction templates `v_1, v_2, …`.
    pub fn templates(&self) -> &[Vec<DirectionEntry>] {
        &self.templates
    }

    /// Least-squares values of `λ_1, λ_2, …` computed at each step.
    pub fn lambda_hats(&self) -> &[Vec<T>] {
        &self.lambda_hats
    }

    pub fn coranks(&self) -> &[usize] {
        &self.coranks
    }

    /// Smallest singular value of the Jacobian each time the corank was taken.
    pub fn sigma_min_history(&self) -> &[f64] {
        &self.sigma_min
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rule(&self) -> SelectionRule {
        self.rule
    }

    /// Number of completed deflation steps.
    pub fn order(&self) -> usize {
        self.selections.len()
    }

    pub fn n(&self) -> usize {
        self.original.nvars()
    }

    /// Current corank, as recorded by the last step.
    pub fn current_corank(&self) -> usize {
        *self.coranks.last().expect("at least one corank")
    }

    /// `m - rank(G_y(ỹ), eps)` for the current system.
    pub fn corank(&self, eps: f64) -> Result<usize, DeflationError> {
        let jac = self.system.jacobian_at(&self.y_tilde)?;
        Ok(self.system.len() - linalg::numerical_rank(&jac, eps)?.rank)
    }

    /// Chooses `C` and `K` for the next step inside the previous sets.
    pub fn select(&self) -> Result<SelectionSets, DeflationError> {
        let d = self.current_corank();
        if d == 0 {
            return Err(DeflationError::AlreadyRegular);
        }
        let n = self.n();
        let m = self.system.len();
        let jac = self.system.jacobian_at(&self.y_tilde)?;
        let (col_pool, row_pool): (Vec<usize>, Vec<usize>) = match self.selections.last() {
            Some(prev) => (prev.columns.clone(), prev.rows.clone()),
            None => ((0..n).collect(), (0..n).collect()),
        };
        let columns = linalg::select_columns(&jac, d, &col_pool, self.eps, self.rule)?;
        let reduced = linalg::delete_columns(&jac, &columns);
        let offset = m - n;
        let abs_pool: Vec<usize> = row_pool.iter().map(|k| offset + k).collect();
        let rows_abs = linalg::select_rows(&reduced, d, &abs_pool, self.eps, self.rule)?;
        Ok(SelectionSets {
            order: self.order(),
            columns,
            rows: rows_abs.iter().map(|k| k - offset).collect(),
        })
    }

    /// Subtracts `X_s·b_s` from `F̃` for the given sets and rebuilds the
    /// augmented system from the new `F̃`.
    pub fn perturb(&self, sets: &SelectionSets) -> Result<PerturbedChain<T>, DeflationError> {
        let s = self.order();
        let d = sets.columns.len();
        let m = self.layout.total();
        let mut layout = self.layout.clone();
        layout.push_step(s + 1, m - d, d);
        let total = layout.total();
        let lambda_vars: Vec<usize> = (m..m + (m - d)).collect();
        let b_vars: Vec<usize> = (m + (m - d)..total).collect();

        let mut f_polys: Vec<Polynomial<T>> = self
            .f_tilde
            .polys()
            .iter()
            .map(|p| p.extend_vars(total))
            .collect::<Result<_, _>>()?;
        let cols = build_perturbation_columns::<T>(s, &sets.columns, &sets.rows, total)?;
        for ((k, mono), &b) in cols.into_iter().zip(&b_vars) {
            let term = &mono * &Polynomial::var(total, b)?;
            f_polys[k] = &f_polys[k] - &term;
        }
        let f_tilde = PolySystem::new(f_polys, layout.names())?;
        let system = build_chain(&f_tilde, &self.templates, self.n())?;
        Ok(PerturbedChain {
            f_tilde,
            system,
            layout,
            b_vars,
            lambda_vars,
        })
    }

    /// One full deflation step: select, perturb, extend with `G_y·v_{s+1}`,
    /// initialize `λ_{s+1}` by least squares and `b_s = 0`, and record the
    /// corank of the enlarged system.
    pub fn deflate_step(&self) -> Result<DeflationState<T>, DeflationError> {
        let d = self.current_corank();
        let sets = self.select()?;
        let chain = self.perturb(&sets)?;
        let m = self.layout.total();

        let mut template = Vec::with_capacity(m);
        let mut lam = chain.lambda_vars.iter();
        for p in 0..m {
            if sets.columns.contains(&p) {
                template.push(DirectionEntry::One);
            } else {
                template.push(DirectionEntry::Var(*lam.next().expect("λ count matches template")));
            }
        }

        let mut point = self.y_tilde.clone();
        point.resize(chain.layout.total(), T::zero());
        let jac = chain.system.jacobian_at(&point)?;
        let free: Vec<usize> = (0..m).filter(|p| !sets.columns.contains(p)).collect();
        let a = jac.select_columns(&free);
        let mut rhs = DVector::<T>::zeros(jac.nrows());
        for &c in &sets.columns {
            rhs -= jac.column(c);
        }
        let lambda = linalg::least_squares(&a, &rhs)?;

        let diff_vars: Vec<usize> = (0..m).collect();
        let new_rows = chain.system.jacobian_apply(&diff_vars, &template)?;
        let mut polys = chain.system.clone().into_polys();
        polys.extend(new_rows.into_polys());
        let system = PolySystem::new(polys, chain.layout.names())?;

        let mut y = self.y_tilde.clone();
        y.extend(lambda.iter().copied());
        y.extend(std::iter::repeat_n(T::zero(), d));

        let jac = system.jacobian_at(&y)?;
        let info = linalg::numerical_rank(&jac, self.eps)?;
        let new_d = system.len() - info.rank;
        if new_d > d {
            return Err(DeflationError::CorankIncreased { from: d, to: new_d });
        }

        let mut next = self.clone();
        next.f_tilde = chain.f_tilde;
        next.system = system;
        next.layout = chain.layout;
        next.y_tilde = y;
        next.selections.push(sets);
        next.templates.push(template);
        next.lambda_hats.push(lambda.iter().copied().collect());
        next.coranks.push(new_d);
        next.sigma_min.push(info.sigma_min().unwrap_or(0.0));
        Ok(next)
    }

    /// The deflation chain built from the unperturbed `F` with the same
    /// direction templates (no smoothing parameters), over the current layout.
    pub fn unsmoothed_chain(&self) -> Result<PolySystem<T>, DeflationError> {
        let total = self.layout.total();
        let polys = self
            .original
            .polys()
            .iter()
            .map(|p| p.extend_vars(total))
            .collect::<Result<Vec<_>, _>>()?;
        let f = PolySystem::new(polys, self.layout.names())?;
        Ok(build_chain(&f, &self.templates, self.n())?)
    }

    /// Numerical Jacobian of the current system at `ỹ`.
    pub fn jacobian_at_y(&self) -> Result<DMatrix<T>, DeflationError> {
        Ok(self.system.jacobian_at(&self.y_tilde)?)
    }
}

/// `G = F̃`, then `G ← (G, G_y·v_j)` for each template in order, where the
/// derivative for `v_j` is taken with respect to the first `2^{j-1}·n`
/// unknowns.
fn build_chain<T: Scalar>(
    f_tilde: &PolySystem<T>,
    templates: &[Vec<DirectionEntry>],
    n: usize,
) -> Result<PolySystem<T>, PolyError> {
    let mut g = f_tilde.clone();
    for (j, v) in templates.iter().enumerate() {
        let width = n << j;
        let diff_vars: Vec<usize> = (0..width).collect();
        let rows = g.jacobian_apply(&diff_vars, v)?;
        let mut polys = g.into_polys();
        polys.extend(rows.into_polys());
        g = PolySystem::new(polys, f_tilde.var_names().to_vec())?;
    }
    Ok(g)
}
