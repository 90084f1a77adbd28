//! Finitely presented semi-measures.
//!
//! A [`SemiMeasureStage`] is a weighted mixture of components. Each component
//! carries an explicit table of values on every string of length at most its
//! frontier depth `D`, and a [`TailRule`] that extends it below the frontier:
//! `ρ(σb) = β_b · ρ(σ)` for `|σ| ≥ D`. A component may also be tilted along
//! the `1`-spine, multiplying `ρ(σ)` by `2^{-t·j}` where `j` is the number of
//! leading ones of `σ`.

mod constructions;

pub use constructions::{
    check_domination, default_weights, dirac_on_ones, dirac_on_spine, enumerate_limsup,
    everything_mlr_builder, from_infimum_sequence, mixture, tails_sup, tilt_by_ones,
    MixtureError, SequenceError,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::strings::{BinString, PrefixFreeStringSet};

/// How a component continues below its frontier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailRule<S> {
    Vanish,
    UniformSplit,
    Geometric { beta: S },
    /// Child `b` receives `β_b` of the parent mass.
    Split { zero: S, one: S },
}

impl<S: Scalar> TailRule<S> {
    pub fn geometric(beta: S) -> Self {
        TailRule::Geometric { beta }
    }

    pub fn spine(bit: bool) -> Self {
        let (zero, one) = if bit {
            (S::zero(), S::one())
        } else {
            (S::one(), S::zero())
        };
        TailRule::Split { zero, one }
    }

    /// The pair `(β_0, β_1)`.
    pub fn factors(&self) -> (S, S) {
        match self {
            TailRule::Vanish => (S::zero(), S::zero()),
            TailRule::UniformSplit => (S::pow2_neg(1), S::pow2_neg(1)),
            TailRule::Geometric { beta } => (beta.clone(), beta.clone()),
            TailRule::Split { zero, one } => (zero.clone(), one.clone()),
        }
    }

    /// Fraction of mass passed from a node to its two children together.
    pub fn retention(&self) -> S {
        let (a, b) = self.factors();
        a + b
    }

    pub fn is_valid(&self) -> bool {
        match self {
            TailRule::Geometric { beta } => *beta >= S::zero() && *beta <= S::pow2_neg(1),
            TailRule::Split { zero, one } => {
                *zero >= S::zero() && *one >= S::zero() && zero.clone() + one.clone() <= S::one()
            }
            _ => true,
        }
    }

    fn map<T>(&self, f: impl Fn(&S) -> T) -> TailRule<T> {
        match self {
            TailRule::Vanish => TailRule::Vanish,
            TailRule::UniformSplit => TailRule::UniformSplit,
            TailRule::Geometric { beta } => TailRule::Geometric { beta: f(beta) },
            TailRule::Split { zero, one } => TailRule::Split {
                zero: f(zero),
                one: f(one),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresentationError {
    #[error("component {component}: table has {found} entries, depth {depth} needs {expected}")]
    TableLength {
        component: usize,
        depth: u32,
        expected: usize,
        found: usize,
    },
    #[error("component {component}: depth {depth} exceeds the supported maximum of 24")]
    DepthTooLarge { component: usize, depth: u32 },
}

const MAX_TABLE_DEPTH: u32 = 24;

fn table_len(depth: u32) -> usize {
    (1usize << (depth + 1)) - 1
}

/// One table-plus-tail component of a presentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentRepr<S>", into = "ComponentRepr<S>")]
#[serde(bound(
    serialize = "S: Serialize + Clone",
    deserialize = "S: Deserialize<'de>"
))]
pub struct Component<S> {
    weight: S,
    depth: u32,
    table: Vec<S>,
    tail: TailRule<S>,
    ones_tilt: u32,
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr<S> {
    weight: S,
    depth: u32,
    table: Vec<S>,
    tail: TailRule<S>,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    ones_tilt: u32,
}

fn is_zero_u32(x: &u32) -> bool {
    *x == 0
}

impl<S> TryFrom<ComponentRepr<S>> for Component<S> {
    type Error = PresentationError;

    fn try_from(r: ComponentRepr<S>) -> Result<Self, Self::Error> {
        if r.depth > MAX_TABLE_DEPTH {
            return Err(PresentationError::DepthTooLarge {
                component: 0,
                depth: r.depth,
            });
        }
        if r.table.len() != table_len(r.depth) {
            return Err(PresentationError::TableLength {
                component: 0,
                depth: r.depth,
                expected: table_len(r.depth),
                found: r.table.len(),
            });
        }
        Ok(Component {
            weight: r.weight,
            depth: r.depth,
            table: r.table,
            tail: r.tail,
            ones_tilt: r.ones_tilt,
        })
    }
}

impl<S> From<Component<S>> for ComponentRepr<S> {
    fn from(c: Component<S>) -> Self {
        ComponentRepr {
            weight: c.weight,
            depth: c.depth,
            table: c.table,
            tail: c.tail,
            ones_tilt: c.ones_tilt,
        }
    }
}

impl<S: Scalar> Component<S> {
    /// `table` lists the values on all strings of length `≤ depth` in
    /// breadth-first order `ε, 0, 1, 00, 01, …`.
    pub fn new(weight: S, depth: u32, table: Vec<S>, tail: TailRule<S>) -> Result<Self, PresentationError> {
        Component::try_from(ComponentRepr {
            weight,
            depth,
            table,
            tail,
            ones_tilt: 0,
        })
    }

    /// A depth-0 component with root mass `root`.
    pub fn root(weight: S, root: S, tail: TailRule<S>) -> Self {
        Component {
            weight,
            depth: 0,
            table: vec![root],
            tail,
            ones_tilt: 0,
        }
    }

    /// A component whose table is filled by `f` on every string of length `≤ depth`.
    pub fn tabulate(weight: S, depth: u32, tail: TailRule<S>, f: impl Fn(&BinString) -> S) -> Self {
        assert!(depth <= MAX_TABLE_DEPTH, "table depth {depth} too large");
        let table = BinString::all_up_to(depth as usize).map(|s| f(&s)).collect();
        Component {
            weight,
            depth,
            table,
            tail,
            ones_tilt: 0,
        }
    }

    pub fn weight(&self) -> &S {
        &self.weight
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn table(&self) -> &[S] {
        &self.table
    }

    pub fn tail(&self) -> &TailRule<S> {
        &self.tail
    }

    pub fn ones_tilt(&self) -> u32 {
        self.ones_tilt
    }

    pub fn with_weight(mut self, weight: S) -> Self {
        self.weight = weight;
        self
    }

    pub(crate) fn tilted(mut self, extra: u32) -> Self {
        self.ones_tilt += extra;
        self
    }

    /// The unweighted component value at `σ`.
    pub fn raw(&self, sigma: &BinString) -> S {
        let d = self.depth as usize;
        let mut v = if sigma.len() <= d {
            self.table[sigma.table_index()].clone()
        } else {
            let base = self.table[sigma.prefix(d).table_index()].clone();
            let (b0, b1) = self.tail.factors();
            let ones = sigma.bits()[d..].iter().filter(|&&b| b).count() as u32;
            let zeros = (sigma.len() - d) as u32 - ones;
            base * Scalar::pow(&b0, zeros) * Scalar::pow(&b1, ones)
        };
        if self.ones_tilt > 0 {
            let j = sigma.leading_ones() as u32;
            if j > 0 {
                v = v * S::pow2_neg(j * self.ones_tilt);
            }
        }
        v
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Component<T> {
        Component {
            weight: f(&self.weight),
            depth: self.depth,
            table: self.table.iter().map(&f).collect(),
            tail: self.tail.map(&f),
            ones_tilt: self.ones_tilt,
        }
    }
}

/// A finitely presented semi-measure: a weighted sum of components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize + Clone",
    deserialize = "S: Deserialize<'de>"
))]
pub struct SemiMeasureStage<S> {
    pub strict: bool,
    pub components: Vec<Component<S>>,
}

/// Why a presentation fails the semi-measure axioms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation<S: std::fmt::Debug> {
    #[error("super-additivity fails at {node:?}: {mass:?} < {left:?} + {right:?}")]
    SuperAdditivity {
        node: BinString,
        mass: S,
        left: S,
        right: S,
    },
    #[error("root mass {mass:?} violates {}", if *.strict { "ρ(ε) = 1" } else { "ρ(ε) ≤ 1" })]
    RootMass { mass: S, strict: bool },
    #[error("component {component}: tail rule {tail:?} loses super-additivity or is negative")]
    InvalidTail { component: usize, tail: TailRule<S> },
    #[error("component {component}: negative weight or table value")]
    Negative { component: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompletionError<S: std::fmt::Debug> {
    #[error("completion needs a strict semi-measure (ρ(ε) = 1)")]
    NotStrict,
    #[error(transparent)]
    Invalid(#[from] Violation<S>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NotAdditive<S: std::fmt::Debug> {
    #[error("additivity fails at {node:?}: {mass:?} ≠ {left:?} + {right:?}")]
    Node {
        node: BinString,
        mass: S,
        left: S,
        right: S,
    },
    #[error("component {component} leaks mass below its frontier")]
    LeakyTail { component: usize },
}

impl<S: Scalar> SemiMeasureStage<S> {
    pub fn new(components: Vec<Component<S>>, strict: bool) -> Self {
        SemiMeasureStage { strict, components }
    }

    /// The semi-measure that is zero everywhere (non-strict).
    pub fn zero() -> Self {
        SemiMeasureStage {
            strict: false,
            components: Vec::new(),
        }
    }

    /// Lebesgue measure `λ(σ) = 2^{-|σ|}`.
    pub fn lebesgue() -> Self {
        SemiMeasureStage::new(
            vec![Component::root(S::one(), S::one(), TailRule::UniformSplit)],
            true,
        )
    }

    /// `ρ(σ) = β^{|σ|}`.
    pub fn geometric(beta: S) -> Self {
        SemiMeasureStage::new(
            vec![Component::root(S::one(), S::one(), TailRule::geometric(beta))],
            true,
        )
    }

    pub fn single(component: Component<S>, strict: bool) -> Self {
        SemiMeasureStage::new(vec![component], strict)
    }

    pub fn components(&self) -> &[Component<S>] {
        &self.components
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Deepest frontier among the components.
    pub fn frontier_depth(&self) -> u32 {
        self.components.iter().map(|c| c.depth).max().unwrap_or(0)
    }

    pub fn eval(&self, sigma: &BinString) -> S {
        self.components
            .iter()
            .fold(S::zero(), |acc, c| acc + c.weight.clone() * c.raw(sigma))
    }

    /// `ρ(E) = Σ_{σ ∈ E} ρ(σ)` over a prefix-free set.
    pub fn set_mass(&self, set: &PrefixFreeStringSet) -> S {
        set.iter().fold(S::zero(), |acc, s| acc + self.eval(s))
    }

    /// Mass of an arbitrary finite set, after prefix-free normalization.
    pub fn mass_of<I>(&self, strings: I) -> S
    where
        I: IntoIterator,
        I::Item: std::borrow::Borrow<BinString>,
    {
        self.set_mass(&PrefixFreeStringSet::normalize(strings))
    }

    /// Values on every string of length `≤ depth`, in table order.
    pub fn table(&self, depth: u32) -> Vec<S> {
        BinString::all_up_to(depth as usize)
            .map(|s| self.eval(&s))
            .collect()
    }

    /// Multiply every component weight by `factor`.
    pub fn scaled(&self, factor: &S) -> Self {
        SemiMeasureStage {
            strict: self.strict && factor.is_one(),
            components: self
                .components
                .iter()
                .map(|c| c.clone().with_weight(factor.clone() * c.weight.clone()))
                .collect(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SemiMeasureStage<T> {
        SemiMeasureStage {
            strict: self.strict,
            components: self.components.iter().map(|c| c.map_scalar(&f)).collect(),
        }
    }

    /// Check the semi-measure axioms; the report names the first failing node
    /// in breadth-first order.
    pub fn validate(&self) -> Result<(), Violation<S>> {
        for (i, c) in self.components.iter().enumerate() {
            if c.weight < S::zero() || c.table.iter().any(|v| *v < S::zero()) {
                return Err(Violation::Negative { component: i });
            }
            if !c.tail.is_valid() {
                return Err(Violation::InvalidTail {
                    component: i,
                    tail: c.tail.clone(),
                });
            }
        }
        let root = self.eval(&BinString::empty());
        let root_ok = if self.strict {
            root.is_one()
        } else {
            root <= S::one()
        };
        if !root_ok {
            return Err(Violation::RootMass {
                mass: root,
                strict: self.strict,
            });
        }
        // below every frontier the valid tails keep super-additivity, so only
        // nodes above the deepest frontier need checking
        let depth = self.frontier_depth();
        let values = self.table(depth);
        for idx in 0..table_len(depth.saturating_sub(1)) {
            if depth == 0 {
                break;
            }
            let left = &values[2 * idx + 1];
            let right = &values[2 * idx + 2];
            if values[idx] < left.clone() + right.clone() {
                return Err(Violation::SuperAdditivity {
                    node: BinString::from_table_index(idx),
                    mass: values[idx].clone(),
                    left: left.clone(),
                    right: right.clone(),
                });
            }
        }
        Ok(())
    }

    /// Check `ρ(σ) = ρ(σ0) + ρ(σ1)` everywhere.
    pub fn check_additive(&self) -> Result<(), NotAdditive<S>> {
        for (i, c) in self.components.iter().enumerate() {
            if c.weight == S::zero() {
                continue;
            }
            let frontier_zero = || {
                let start = table_len(c.depth) - (1usize << c.depth);
                c.table[start..].iter().all(|v| *v == S::zero())
            };
            let tail_keeps_mass = c.tail.retention().is_one();
            let spine_zero = || c.raw(&BinString::ones(c.depth as usize)) == S::zero();
            if !(tail_keeps_mass || frontier_zero()) || (c.ones_tilt > 0 && !spine_zero()) {
                return Err(NotAdditive::LeakyTail { component: i });
            }
        }
        let depth = self.frontier_depth();
        if depth == 0 {
            return Ok(());
        }
        let values = self.table(depth);
        for idx in 0..table_len(depth - 1) {
            let left = &values[2 * idx + 1];
            let right = &values[2 * idx + 2];
            if values[idx] != left.clone() + right.clone() {
                return Err(NotAdditive::Node {
                    node: BinString::from_table_index(idx),
                    mass: values[idx].clone(),
                    left: left.clone(),
                    right: right.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A semi-measure presentation that is additive at every node.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Serialize + Clone"))]
#[serde(transparent)]
pub struct Measure<S>(SemiMeasureStage<S>);

impl<S: Scalar> Measure<S> {
    pub fn new(stage: SemiMeasureStage<S>) -> Result<Self, NotAdditive<S>> {
        stage.check_additive()?;
        Ok(Measure(stage))
    }

    pub fn lebesgue() -> Self {
        Measure(SemiMeasureStage::lebesgue())
    }

    pub fn stage(&self) -> &SemiMeasureStage<S> {
        &self.0
    }

    pub fn into_stage(self) -> SemiMeasureStage<S> {
        self.0
    }

    pub fn eval(&self, sigma: &BinString) -> S {
        self.0.eval(sigma)
    }
}

/// Spread every node's leaked mass `g(σ) = ρ(σ) − ρ(σ0) − ρ(σ1)` evenly
/// over its subtree, giving a measure `μ ≥ ρ` with `μ(ε) = 1`.
///
/// The completed table covers every string of length `≤ depth`; below that
/// the measure splits uniformly.
pub fn complete_to_measure<S: Scalar>(
    rho: &SemiMeasureStage<S>,
    depth: u32,
) -> Result<Measure<S>, CompletionError<S>> {
    if !rho.strict {
        return Err(CompletionError::NotStrict);
    }
    rho.validate()?;
    let rho_table = rho.table(depth + 1);
    let mut mu: Vec<S> = Vec::with_capacity(table_len(depth));
    mu.push(S::one());
    for idx in 1..table_len(depth) {
        let parent = (idx - 1) / 2;
        let leaked_share = (mu[parent].clone()
            - rho_table[2 * parent + 1].clone()
            - rho_table[2 * parent + 2].clone())
        .half();
        mu.push(rho_table[idx].clone() + leaked_share);
    }
    let component = Component {
        weight: S::one(),
        depth,
        table: mu,
        tail: TailRule::UniformSplit,
        ones_tilt: 0,
    };
    Ok(Measure(SemiMeasureStage::single(component, true)))
}

/// The completion's value at any string, following the same recursion as
/// [`complete_to_measure`] along the path to `σ` without truncation.
pub fn completion_value<S: Scalar>(rho: &SemiMeasureStage<S>, sigma: &BinString) -> S {
    let mut mu = S::one();
    for k in 0..sigma.len() {
        let node = sigma.prefix(k);
        let children = rho.eval(&node.child(false)) + rho.eval(&node.child(true));
        mu = rho.eval(&sigma.prefix(k + 1)) + (mu - children).half();
    }
    mu
}
