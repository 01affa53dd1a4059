// SPDX-License-Identifier: Apache-2.0

//! Input sampling: seeded random inputs that satisfy a precondition, and
//! exhaustive enumeration of a small input domain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baseline::draw_inputs;
use crate::interp::{Inputs, Interpreter, Outcome, Value};
use crate::lang::{Decl, Type};
use crate::vcgen::InputBounds;

/// Up to `count` seeded random inputs accepted by the precondition of the
/// interpreter's routine. Gives up after `count * 200` draws.
pub fn valid_inputs(interp: &Interpreter, seed: u64, count: usize) -> Vec<Inputs> {
    let params = &interp.routine().params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count.saturating_mul(200) {
        if out.len() == count {
            break;
        }
        let inputs = draw_inputs(&mut rng, params);
        match interp.run(&inputs) {
            Ok(x) if !matches!(x.outcome, Outcome::PreconditionViolation(_)) => out.push(inputs),
            _ => {}
        }
    }
    out
}

fn values(ty: Type, b: &InputBounds) -> Vec<Value> {
    match ty {
        Type::Int => (b.scalar.0..=b.scalar.1).map(Value::Int).collect(),
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::IntArray => {
            let elems: Vec<i64> = (b.element.0..=b.element.1).collect();
            let mut out = vec![Vec::new()];
            let mut layer = vec![Vec::new()];
            for _ in 0..b.len_max {
                layer = layer
                    .iter()
                    .flat_map(|prefix: &Vec<i64>| {
                        elems.iter().map(move |&e| {
                            let mut v = prefix.clone();
                            v.push(e);
                            v
                        })
                    })
                    .collect();
                out.extend(layer.iter().cloned());
            }
            out.into_iter().map(Value::Array).collect()
        }
    }
}

/// Every input assignment within `bounds`, in lexicographic order.
pub fn small_domain(params: &[Decl], bounds: &InputBounds) -> Vec<Inputs> {
    let mut out = vec![Inputs::new()];
    for d in params {
        let vals = values(d.ty, bounds);
        out = out
            .iter()
            .flat_map(|partial| {
                vals.iter().map(move |v| {
                    let mut m = partial.clone();
                    m.insert(d.name.clone(), v.clone());
                    m
                })
            })
            .collect();
    }
    out
}
