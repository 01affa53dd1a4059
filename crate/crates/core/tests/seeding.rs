// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seedcov::blocks::{enumerate_blocks, normalize, BlockId, BLOCK_NUMBER};
use seedcov::interp::{reached_seed, Inputs, Interpreter, Value};
use seedcov::sampling::valid_inputs;
use seedcov::seeder::{erase, seed_msp, seed_rssp};

fn with_bn(v: &Inputs, i: u32) -> Inputs {
    let mut v = v.clone();
    v.insert(BLOCK_NUMBER.to_string(), Value::Int(i as i64));
    v
}

#[test]
fn block_number_zero_behaves_as_the_original() {
    for e in common::corpus() {
        let r = normalize(&e.routine);
        let s = seed_rssp(&r, &enumerate_blocks(&r));
        let original = Interpreter::new(&r);
        let seeded = Interpreter::for_seeded(&s);
        let inputs = valid_inputs(&original, 21, 200);
        assert_eq!(inputs.len(), 200);
        for v in &inputs {
            let a = original.run(v).unwrap();
            let b = seeded.run(&with_bn(v, 0)).unwrap();
            assert_eq!(common::observable(&a), common::observable(&b), "{} on {v:?}", e.name());
        }
    }
}

#[test]
fn reaching_a_seed_means_covering_its_block() {
    // 500 random (v, i) pairs per routine.
    for e in common::corpus() {
        let r = normalize(&e.routine);
        let map = enumerate_blocks(&r);
        let s = seed_rssp(&r, &map);
        let seeded = Interpreter::for_seeded(&s);
        let erased = Interpreter::new(&erase(&s));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut reached = 0;
        for v in valid_inputs(&erased, 22, 500) {
            let i = rng.gen_range(1..=map.count());
            let x = seeded.run(&with_bn(&v, i)).unwrap();
            if reached_seed(&s, &x) == Some(BlockId(i)) {
                reached += 1;
                assert!(erased.run(&v).unwrap().covers(BlockId(i)), "{} block {i}", e.name());
            }
        }
        assert!(reached > 0, "{}: no pair reached its seed", e.name());
    }
}

#[test]
fn covering_a_block_means_reaching_its_seed() {
    // 500 (v, i) pairs with i in the trace of v.
    for e in common::corpus() {
        let r = normalize(&e.routine);
        let map = enumerate_blocks(&r);
        let rssp = seed_rssp(&r, &map);
        let seeded = Interpreter::for_seeded(&rssp);
        let msp: Vec<_> = map.ids().map(|i| seed_msp(&r, &map, i).unwrap()).collect();
        let original = Interpreter::new(&r);
        let mut pairs = 0;
        'outer: for v in valid_inputs(&original, 23, 500) {
            let mut trace = original.run(&v).unwrap().trace;
            trace.sort();
            trace.dedup();
            for i in trace {
                let x = seeded.run(&with_bn(&v, i.0)).unwrap();
                assert_eq!(reached_seed(&rssp, &x), Some(i), "{} block {i} (rssp)", e.name());
                let m = &msp[i.0 as usize - 1];
                let y = Interpreter::for_seeded(m).run(&v).unwrap();
                assert_eq!(reached_seed(m, &y), Some(i), "{} block {i} (msp)", e.name());
                pairs += 1;
                if pairs == 500 {
                    break 'outer;
                }
            }
        }
        assert!(pairs >= 200, "{}: only {pairs} pairs", e.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn execution_is_deterministic(entry in 0usize..14, seed in any::<u64>()) {
        let corpus = common::corpus();
        let e = &corpus[entry % corpus.len()];
        let interp = Interpreter::new(&e.routine);
        for v in valid_inputs(&interp, seed, 5) {
            prop_assert_eq!(interp.run(&v).unwrap(), interp.run(&v).unwrap());
        }
    }
}
