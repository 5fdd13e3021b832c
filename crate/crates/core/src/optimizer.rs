//! Nelder–Mead simplex minimization.
//!
//! Objectives may return `+∞` to reject a proposal (constraint penalty);
//! `NaN` values encountered after the start are treated the same way.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("objective is not finite at the starting point (value {0})")]
    NonFiniteStart(f64),
    #[error("starting point must have at least one coordinate")]
    EmptyStart,
    #[error("invalid simplex configuration: {0}")]
    InvalidConfig(String),
}

/// Coefficients and stopping rules of the simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexConfig<T> {
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
    pub max_evals: usize,
    pub x_tol: T,
    pub f_tol: T,
    /// Per-coordinate edge lengths of the initial simplex. `None` uses
    /// `max(0.25 * |x_i|, 0.1)`.
    pub initial_steps: Option<Vec<T>>,
}

impl<T: Real> Default for SimplexConfig<T> {
    fn default() -> Self {
        Self {
            reflection: T::one(),
            expansion: T::lit(2.0),
            contraction: T::lit(0.5),
            shrink: T::lit(0.5),
            max_evals: 5000,
            x_tol: T::lit(1e-6),
            f_tol: T::lit(1e-8),
            initial_steps: None,
        }
    }
}

impl<T: Real> SimplexConfig<T> {
    fn validate(&self, dim: usize) -> Result<(), OptimizeError> {
        let bad = |msg: &str| Err(OptimizeError::InvalidConfig(msg.to_string()));
        if !(self.reflection > T::zero()) {
            return bad("reflection must be positive");
        }
        if !(self.contraction > T::zero() && self.contraction < T::one() && self.expansion > T::one()) {
            return bad("require 0 < contraction < 1 < expansion");
        }
        if !(self.shrink > T::zero() && self.shrink < T::one()) {
            return bad("shrink must lie in (0, 1)");
        }
        if self.max_evals < dim + 1 {
            return bad("max_evals must be at least dim + 1");
        }
        if !(self.x_tol >= T::zero() && self.f_tol >= T::zero()) {
            return bad("tolerances must be nonnegative");
        }
        if let Some(steps) = &self.initial_steps {
            if steps.len() != dim {
                return bad("initial_steps length must equal the dimension");
            }
            if steps.iter().any(|s| !s.is_finite() || *s == T::zero()) {
                return bad("initial steps must be finite and nonzero");
            }
        }
        Ok(())
    }

    fn steps_for(&self, start: &[T]) -> Vec<T> {
        match &self.initial_steps {
            Some(steps) => steps.clone(),
            None => start
                .iter()
                .map(|x| (T::lit(0.25) * x.abs()).max(T::lit(0.1)))
                .collect(),
        }
    }
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub argmin: Vec<T>,
    pub value: T,
    pub evals: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub trace: Vec<T>,
}

struct Vertex<T> {
    x: Vec<T>,
    f: T,
}

/// Minimizes `objective` from `start` with the Nelder–Mead simplex method.
///
/// Stops when the simplex diameter (max-norm distance of every vertex from
/// the best one) drops below `x_tol`, when the spread of objective values
/// drops below `f_tol`, or when `max_evals` evaluations have been spent.
pub fn minimize<T, F>(mut objective: F, start: &[T], config: &SimplexConfig<T>) -> Result<Minimum<T>, OptimizeError>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    let dim = start.len();
    if dim == 0 {
        return Err(OptimizeError::EmptyStart);
    }
    config.validate(dim)?;

    let f_start = objective(start);
    if !f_start.is_finite() {
        return Err(OptimizeError::NonFiniteStart(f_start.as_f64()));
    }
    let mut evals = 1usize;
    let mut eval = |x: &[T], evals: &mut usize| {
        *evals += 1;
        let v = objective(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };

    let steps = config.steps_for(start);
    let mut simplex = Vec::with_capacity(dim + 1);
    simplex.push(Vertex { x: start.to_vec(), f: f_start });
    for (i, step) in steps.iter().enumerate() {
        let mut x = start.to_vec();
        x[i] = x[i] + *step;
        let f = eval(&x, &mut evals);
        simplex.push(Vertex { x, f });
    }

    let mut trace = Vec::new();
    let mut converged = false;
    let n = T::from_count(dim);
    loop {
        // stable sort keeps the earlier vertex first on ties
        simplex.sort_by(|a, b| a.f.partial_cmp(&b.f).unwrap_or(std::cmp::Ordering::Equal));
        trace.push(simplex[0].f);

        let best = &simplex[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.x.iter().zip(&best.x).map(|(a, b)| (*a - *b).abs()))
            .fold(T::zero(), T::max);
        let spread = simplex[dim].f - best.f;
        if diameter <= config.x_tol || spread <= config.f_tol {
            converged = true;
            break;
        }
        if evals >= config.max_evals {
            break;
        }

        let mut centroid = vec![T::zero(); dim];
        for v in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(&v.x) {
                *c = *c + *x;
            }
        }
        for c in centroid.iter_mut() {
            *c = *c / n;
        }
        let towards = |coef: T, from: &[T]| -> Vec<T> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| *c + coef * (*c - *x))
                .collect()
        };

        let worst = simplex[dim].x.clone();
        let f_worst = simplex[dim].f;
        let f_second = simplex[dim - 1].f;
        let f_best = simplex[0].f;

        let reflected = towards(config.reflection, &worst);
        let f_reflected = eval(&reflected, &mut evals);

        if f_reflected < f_best {
            let expanded = towards(config.reflection * config.expansion, &worst);
            let f_expanded = eval(&expanded, &mut evals);
            simplex[dim] = if f_expanded < f_reflected {
                Vertex { x: expanded, f: f_expanded }
            } else {
                Vertex { x: reflected, f: f_reflected }
            };
            continue;
        }
        if f_reflected < f_second {
            simplex[dim] = Vertex { x: reflected, f: f_reflected };
            continue;
        }

        let (candidate, f_candidate, accept) = if f_reflected < f_worst {
            let outside = towards(config.reflection * config.contraction, &worst);
            let f = eval(&outside, &mut evals);
            let ok = f <= f_reflected;
            (outside, f, ok)
        } else {
            let inside = towards(-config.contraction, &worst);
            let f = eval(&inside, &mut evals);
            let ok = f < f_worst;
            (inside, f, ok)
        };
        if accept {
            simplex[dim] = Vertex { x: candidate, f: f_candidate };
            continue;
        }

        let anchor = simplex[0].x.clone();
        for v in simplex.iter_mut().skip(1) {
            for (x, a) in v.x.iter_mut().zip(&anchor) {
                *x = *a + config.shrink * (*x - *a);
            }
            v.f = eval(&v.x, &mut evals);
        }
    }

    let best = simplex.swap_remove(0);
    Ok(Minimum {
        argmin: best.x,
        value: best.f,
        evals,
        converged,
        trace,
    })
}
