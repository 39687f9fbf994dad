use crate::model::{Arena, Mechanism, Player, VertexId};
use crate::scalar::Scalar;

/// Successors attaining the maximum and minimum of a function at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OperatorInputs {
    pub v_plus: VertexId,
    pub v_minus: VertexId,
}

/// Finds `v+` and `v-` over the successors of `v`; ties go to the lowest
/// vertex index.
pub fn operator_inputs<S: Scalar>(f: &[S], arena: &Arena, v: VertexId) -> OperatorInputs {
    let succ = arena.successors(v);
    let mut v_plus = succ[0];
    let mut v_minus = succ[0];
    for &u in &succ[1..] {
        let (fu, fp, fm) = (&f[u.0], &f[v_plus.0], &f[v_minus.0]);
        if fu > fp || (fu == fp && u < v_plus) {
            v_plus = u;
        }
        if fu < fm || (fu == fm && u < v_minus) {
            v_minus = u;
        }
    }
    OperatorInputs { v_plus, v_minus }
}

/// Charges and tax rate converted once into the working scalar.
#[derive(Clone, Debug)]
pub(crate) struct Context<S> {
    pub tau: S,
    pub total: Vec<S>,
    pub r1: Vec<S>,
    pub r2: Vec<S>,
}

impl<S: Scalar> Context<S> {
    pub fn new(arena: &Arena, mechanism: &Mechanism) -> Self {
        Context {
            tau: S::from_rational(&mechanism.tau()),
            total: arena.vertices().map(|v| S::from_rational(&arena.charge_total(v))).collect(),
            r1: arena.vertices().map(|v| S::from_rational(arena.charge(v, Player::One))).collect(),
            r2: arena.vertices().map(|v| S::from_rational(arena.charge(v, Player::Two))).collect(),
        }
    }

    pub fn own(&self, player: Player, v: VertexId) -> &S {
        match player {
            Player::One => &self.r1[v.0],
            Player::Two => &self.r2[v.0],
        }
    }

    pub fn value_at(&self, f: &[S], arena: &Arena, player: Player, v: VertexId) -> S {
        let inputs = operator_inputs(f, arena, v);
        let hi = f[inputs.v_plus.0].clone();
        let lo = f[inputs.v_minus.0].clone();
        let one = S::one();
        let two = one.clone() + one.clone();
        let num = (one.clone() - self.tau.clone()) * lo.clone() + hi.clone();
        let den = (hi - lo - one) * self.tau.clone() + two;
        (num / den * self.total[v.0].clone() - self.own(player, v).clone()).clamp_unit()
    }
}

/// The bid that keeps a player above `f`: `(f(v+) - f(v-)) / ((f(v+) - f(v-) - 1) tau + 2)`.
pub fn threshold_bid<S: Scalar>(f: &[S], arena: &Arena, mechanism: &Mechanism, v: VertexId) -> (S, OperatorInputs) {
    let inputs = operator_inputs(f, arena, v);
    let tau = S::from_rational(&mechanism.tau());
    let diff = f[inputs.v_plus.0].clone() - f[inputs.v_minus.0].clone();
    let one = S::one();
    let den = (diff.clone() - one.clone()) * tau + one.clone() + one;
    (diff / den, inputs)
}

/// One threshold update at a single vertex.
pub fn operator_value<S: Scalar>(f: &[S], arena: &Arena, mechanism: &Mechanism, player: Player, v: VertexId) -> S {
    Context::new(arena, mechanism).value_at(f, arena, player, v)
}
