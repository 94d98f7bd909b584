//! Relabeling processes permutes every per-process quantity and leaves the
//! aggregate ones alone.

use partagree_core::adversary::random_partition_topology;
use partagree_core::sim::{check_trace_lemmas, Inputs, ProtocolSpec};
use partagree_core::{run, Adversary, RoundTopology, ScenarioParams, Value};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn schedule(n: usize, p: usize, rounds: usize, seed: u64) -> Vec<RoundTopology> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rounds)
        .map(|_| random_partition_topology(n, p, 2, &mut rng).unwrap())
        .collect()
}

proptest! {
    #[test]
    fn permuting_processes_permutes_the_run(
        n in 1usize..12,
        p in 1usize..4,
        seed in any::<u64>(),
        inputs in proptest::collection::vec(1i64..8, 12),
    ) {
        let inputs: Vec<Value> = inputs[..n].to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let sched = schedule(n, p, 40, seed);

        let mut base = ScenarioParams::new(n, p, ProtocolSpec::PAgreement, Adversary::Scripted(sched.clone()));
        base.inputs = Inputs::Explicit(inputs.clone());
        let a = run(&base.clone().resolve().unwrap());

        let mut permuted_inputs = vec![0; n];
        for (&to, &v) in perm.iter().zip(&inputs) {
            permuted_inputs[to] = v;
        }
        let mut moved = base;
        moved.adversary = Adversary::Scripted(sched.iter().map(|t| t.permuted(&perm).unwrap()).collect());
        moved.inputs = Inputs::Explicit(permuted_inputs);
        let b = run(&moved.resolve().unwrap());

        prop_assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            for (i, &j) in perm.iter().enumerate() {
                prop_assert_eq!(ra.mins[i], rb.mins[j]);
                prop_assert_eq!(ra.decided[i], rb.decided[j]);
            }
            prop_assert_eq!(&ra.distinct, &rb.distinct);
            prop_assert_eq!(ra.phi, rb.phi);
            prop_assert_eq!(ra.components, rb.components);
            prop_assert_eq!(ra.quotient_bound, rb.quotient_bound);
        }
        prop_assert_eq!(&a.verdict, &b.verdict);
        prop_assert!(a.verdict.solves(p));
        prop_assert!(check_trace_lemmas(&a.records, p, p).is_ok());
    }
}
