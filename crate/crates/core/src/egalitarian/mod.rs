//! Egalitarian rate allocations: minimizers of `Σ r_i² / w_i` over the core,
//! either on the `1/K` grid (steepest descent) or over the whole core
//! (Frank–Wolfe).

mod continuous;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::omniscience::{GameContext, Subgame};
use crate::rate::RateVector;
use crate::setfn::{sfm_min, FnSetFunction, SetFunction};
use crate::source_model::UserSet;
use crate::subset::Subset;
use crate::value::{denominator_lcm, Rational, Value};

pub use continuous::{egalitarian_continuous, ContinuousOutcome, ContinuousOptions};

/// Upper bound on steepest-descent iterations.
pub const MAX_SDA_ITERATIONS: usize = 1_000_000;

/// Positive per-user weights, indexed by user position.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    values: Vec<T>,
}

impl<T: Value> WeightVector<T> {
    pub fn uniform(n: usize) -> Self {
        WeightVector {
            values: vec![T::one(); n],
        }
    }

    /// Weights in user-position order.
    pub fn new(users: &UserSet, values: Vec<T>) -> Result<Self> {
        if values.len() != users.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} users",
                values.len(),
                users.len()
            )));
        }
        if let Some(k) = values.iter().position(|w| !w.is_positive()) {
            return Err(Error::NonPositiveWeight { user: users.id(k) });
        }
        Ok(WeightVector { values })
    }

    /// Weights given as `(user id, weight)` pairs; every user needs one.
    pub fn from_ids(users: &UserSet, pairs: &[(u32, T)]) -> Result<Self> {
        let mut values: Vec<Option<T>> = vec![None; users.len()];
        for (id, w) in pairs {
            values[users.position(*id)?] = Some(w.clone());
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(k, w)| {
                w.ok_or_else(|| {
                    Error::InvalidArgument(format!("no weight for user {}", users.id(k)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(users, values)
    }

    pub fn get(&self, i: usize) -> &T {
        &self.values[i]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// `g(r) = Σ r_i² / w_i` over the support of `r`.
pub fn objective_g<T: Value>(r: &RateVector<T>, w: &WeightVector<T>) -> Result<T> {
    if w.values.len() != r.dimension() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for a vector of dimension {}",
            w.values.len(),
            r.dimension()
        )));
    }
    Ok(r.iter()
        .map(|(i, v)| v.clone() * v.clone() / w.values[i].clone())
        .sum())
}

/// `dep(r, i)`: the smallest minimizer of `f_{R_CO}(X) − r(X)` over
/// `i ∈ X ⊆ G`, i.e. the users whose rates `i` can take over.
pub fn dep<T: Value>(game: &Subgame<'_, T>, r: &RateVector<T>, i: usize) -> Result<Subset> {
    let ctx = game.context();
    let ground = game.ground();
    if !ground.contains(i) {
        return Err(Error::InvalidArgument(format!(
            "position {i} is outside {ground:?}"
        )));
    }
    // On a ground set that is tight for f_{R_CO} the smallest tight sets of
    // f_{R_CO} and f̂ coincide; otherwise only f̂ describes the subgame.
    let tight = ctx.f(ground).tol_eq(&game.sum_cost());
    let h = FnSetFunction::new(ground, |x: Subset| {
        let cost = if tight { ctx.f(x) } else { game.eval(x) };
        cost - r.sum(x)
    });
    Ok(sfm_min(&h, Subset::singleton(i), Subset::EMPTY, ctx.options().sfm)?.minimal)
}

/// One accepted step `r ← r + (χ_i − χ_j)/K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdaStep<T> {
    pub increase: usize,
    pub decrease: usize,
    /// Objective after the step.
    pub objective: T,
}

/// Iterates of a steepest-descent run; `iterates[0]` is the start point.
#[derive(Clone, Debug, PartialEq)]
pub struct SdaTrace<T> {
    pub k: u64,
    pub iterates: Vec<RateVector<T>>,
    pub steps: Vec<SdaStep<T>>,
    pub initial_objective: T,
}

impl<T> SdaTrace<T> {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// Checks attached to a run, relevant when `K ≠ |P*| − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdaDiagnostics {
    /// `K = |P*| − 1`, for which the output is the grid optimum.
    pub default_k: bool,
    /// No single exchange of `1/K` between two users improves the output
    /// while staying in the core.
    pub locally_optimal: bool,
    /// Some iterate was outside the core.
    pub left_core: bool,
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdaOutcome<T> {
    pub rates: RateVector<T>,
    pub trace: SdaTrace<T>,
    pub diagnostics: SdaDiagnostics,
}

/// `|P*| − 1`, the grid on which the steepest descent is exact.
pub fn default_k<T: Value>(ctx: &GameContext<T>) -> u64 {
    (ctx.partition().len() as u64).saturating_sub(1).max(1)
}

fn shifted<T: Value>(r: &RateVector<T>, i: usize, j: usize, step: &T) -> RateVector<T> {
    let mut out = r.clone();
    out.set(i, r.get(i).clone() + step.clone());
    out.set(j, r.get(j).clone() - step.clone());
    out
}

fn check_grid<T: Value>(game: &Subgame<'_, T>, r: &RateVector<T>, k: u64) -> Result<()> {
    let scale = T::from_int(k as i64);
    for (i, v) in r.iter() {
        if !(v.clone() * scale.clone()).is_integral() {
            return Err(Error::OffGrid {
                user: game.context().users().id(i),
                k,
            });
        }
    }
    Ok(())
}

/// Steepest descent on the `1/K` grid of the core of `game`, from `r0`.
///
/// Each round computes `dep(r, i)` for every user, then takes the exchange
/// `(i, j)` with `j ∈ dep(r, i) ∖ {i}` that lowers `g` the most; ties go to
/// the smallest `(i, j)`. The run stops when no exchange lowers `g`.
pub fn sda<T: Value>(
    game: &Subgame<'_, T>,
    r0: &RateVector<T>,
    k: u64,
    w: &WeightVector<T>,
) -> Result<SdaOutcome<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let check = game.core_membership(r0)?;
    if !check.member {
        return Err(Error::NotInCore(format!("{:?}", check.violation)));
    }
    check_grid(game, r0, k)?;

    let ctx = game.context();
    let step = T::from_frac(1, k as i64);
    let users: Vec<usize> = game.ground().iter().collect();
    let mut r = r0.clone();
    let mut current = objective_g(&r, w)?;
    let mut trace = SdaTrace {
        k,
        iterates: vec![r.clone()],
        steps: Vec::new(),
        initial_objective: current.clone(),
    };
    let mut left_core = false;

    loop {
        if trace.steps.len() >= MAX_SDA_ITERATIONS {
            return Err(Error::NonConvergence {
                iterations: MAX_SDA_ITERATIONS,
                gap: f64::NAN,
            });
        }
        let deps = users
            .par_iter()
            .map(|&i| dep(game, &r, i).map(|d| (i, d)))
            .collect::<Result<Vec<_>>>()?;
        let mut best: Option<(T, usize, usize)> = None;
        for (i, d) in deps {
            for j in d.without(i).iter() {
                let value = objective_g(&shifted(&r, i, j, &step), w)?;
                if best.as_ref().is_none_or(|(b, _, _)| value.tol_lt(b)) {
                    best = Some((value, i, j));
                }
            }
        }
        match best {
            Some((value, i, j)) if value.tol_lt(&current) => {
                r = shifted(&r, i, j, &step);
                if !game.core_membership(&r)?.member {
                    left_core = true;
                }
                trace.steps.push(SdaStep {
                    increase: i,
                    decrease: j,
                    objective: value.clone(),
                });
                trace.iterates.push(r.clone());
                current = value;
            }
            _ => break,
        }
    }

    let default_k = k == default_k(ctx);
    let locally_optimal = locally_optimal(game, &r, k, w)?;
    let warning = (!default_k).then(|| {
        format!(
            "K = {k} differs from |P*| - 1 = {}; the result may not be the grid optimum",
            self::default_k(ctx)
        )
    });
    Ok(SdaOutcome {
        rates: r,
        trace,
        diagnostics: SdaDiagnostics {
            default_k,
            locally_optimal,
            left_core,
            warning,
        },
    })
}

/// Whether no exchange `r + (χ_i − χ_j)/K` that stays in the core lowers `g`.
pub fn locally_optimal<T: Value>(
    game: &Subgame<'_, T>,
    r: &RateVector<T>,
    k: u64,
    w: &WeightVector<T>,
) -> Result<bool> {
    let step = T::from_frac(1, k as i64);
    let here = objective_g(r, w)?;
    for i in game.ground().iter() {
        for j in game.ground().without(i).iter() {
            let moved = shifted(r, i, j, &step);
            if game.core_membership(&moved)?.member && objective_g(&moved, w)?.tol_lt(&here) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Per-block solver for [`egalitarian_decomposed`].
#[derive(Clone, Debug, PartialEq)]
pub enum EgalitarianMode<T> {
    /// Steepest descent on the `1/K` grid; each block starts from the
    /// restriction of `start` (default: the context's core vertex).
    Fractional {
        k: u64,
        start: Option<RateVector<T>>,
    },
    Continuous(ContinuousOptions),
}

/// Result of [`egalitarian_decomposed`].
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedOutcome<T> {
    pub rates: RateVector<f64>,
    /// Exact fused rates in fractional mode.
    pub exact: Option<RateVector<T>>,
    /// Per-block steepest-descent runs in fractional mode.
    pub blocks: Vec<SdaOutcome<T>>,
}

/// Solves each block of the fundamental partition separately (in parallel)
/// and fuses the results.
pub fn egalitarian_decomposed<T: Value>(
    ctx: &GameContext<T>,
    w: &WeightVector<T>,
    mode: &EgalitarianMode<T>,
) -> Result<DecomposedOutcome<T>> {
    let games = ctx.decompose()?;
    match mode {
        EgalitarianMode::Fractional { k, start } => {
            let start = start.as_ref().unwrap_or(ctx.vertex());
            let blocks = games
                .par_iter()
                .map(|g| sda(g, &start.restrict(g.ground()), *k, w))
                .collect::<Result<Vec<_>>>()?;
            let mut fused = RateVector::zeros(ctx.n(), Subset::EMPTY);
            for b in &blocks {
                fused = fused.direct_sum(&b.rates)?;
            }
            Ok(DecomposedOutcome {
                rates: fused.to_f64(),
                exact: Some(fused),
                blocks,
            })
        }
        EgalitarianMode::Continuous(options) => {
            let parts = games
                .par_iter()
                .map(|g| egalitarian_continuous(g, w, options))
                .collect::<Result<Vec<_>>>()?;
            let mut fused = RateVector::zeros(ctx.n(), Subset::EMPTY);
            for p in &parts {
                fused = fused.direct_sum(&p.rates)?;
            }
            Ok(DecomposedOutcome {
                rates: fused,
                exact: None,
                blocks: Vec::new(),
            })
        }
    }
}

/// Chunk rates for `K`-packet splitting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPlan {
    /// Chunks per packet.
    pub k: u64,
    /// `(user id, K · r_i)` in user order.
    pub chunks: Vec<(u32, i128)>,
}

/// Smallest `K` for which `K · r` is integral.
pub fn minimal_split(r: &RateVector<Rational>) -> u64 {
    let values = r.support_values();
    denominator_lcm(values.iter()) as u64
}

/// Splits each packet into `K` chunks so that user `i` sends `K · r_i`
/// chunks.
pub fn packet_split_plan(users: &UserSet, r: &RateVector<Rational>, k: u64) -> Result<SplitPlan> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let scale = Rational::from_integer(k as i128);
    let mut chunks = Vec::new();
    for (i, v) in r.iter() {
        let scaled = v * scale;
        if !scaled.is_integer() {
            return Err(Error::NonIntegralSplit {
                user: users.id(i),
                k,
                minimal_k: minimal_split(r),
            });
        }
        chunks.push((users.id(i), scaled.to_integer()));
    }
    Ok(SplitPlan { k, chunks })
}
