use std::fmt;

/// One column of a polynomial model. Variable indices refer to columns of
/// the input matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Intercept,
    Main(usize),
    Interaction(usize, usize),
    Quadratic(usize),
}

impl Term {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Term::Intercept => 1.0,
            Term::Main(i) => x[i],
            Term::Interaction(i, j) => x[i] * x[j],
            Term::Quadratic(i) => x[i] * x[i],
        }
    }

    /// Whether `self` is a lower-order component of `other` (the main effect
    /// of a variable is contained in its interactions and its square).
    pub fn is_contained_in(&self, other: &Term) -> bool {
        match (*self, *other) {
            (Term::Main(i), Term::Interaction(a, b)) => i == a || i == b,
            (Term::Main(i), Term::Quadratic(a)) => i == a,
            _ => false,
        }
    }

    pub fn variables(&self) -> Vec<usize> {
        match *self {
            Term::Intercept => vec![],
            Term::Main(i) | Term::Quadratic(i) => vec![i],
            Term::Interaction(i, j) => vec![i, j],
        }
    }

    pub fn label(&self, names: &[String]) -> String {
        let name = |i: usize| names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
        match *self {
            Term::Intercept => "(Intercept)".into(),
            Term::Main(i) => name(i),
            Term::Interaction(i, j) => format!("{}:{}", name(i), name(j)),
            Term::Quadratic(i) => format!("I({}^2)", name(i)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label(&[]))
    }
}

/// Intercept plus the listed main effects.
pub fn first_order(vars: &[usize]) -> Vec<Term> {
    std::iter::once(Term::Intercept)
        .chain(vars.iter().map(|&i| Term::Main(i)))
        .collect()
}

/// `base` plus every pairwise interaction among `vars`.
pub fn with_interactions(base: &[Term], vars: &[usize]) -> Vec<Term> {
    let mut terms = base.to_vec();
    for (a, &i) in vars.iter().enumerate() {
        for &j in &vars[a + 1..] {
            terms.push(Term::Interaction(i.min(j), i.max(j)));
        }
    }
    terms
}

/// Full quadratic model in `vars`.
pub fn second_order(vars: &[usize]) -> Vec<Term> {
    let mut terms = with_interactions(&first_order(vars), vars);
    terms.extend(vars.iter().map(|&i| Term::Quadratic(i)));
    terms
}
