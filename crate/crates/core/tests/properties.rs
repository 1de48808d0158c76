use proptest::prelude::*;
use ulam_core::adversary::{Honest, Responder, TieBreak, WeightAdversary};
use ulam_core::bounds::{pelc_q1, theorem2_bound, Bounds};
use ulam_core::game::ELIMINATED;
use ulam_core::harness::simulate_adversary;
use ulam_core::num::ceil_log2;
use ulam_core::strategy::run_with_budget;
use ulam_core::{Answer, GameState, Oracle, Question, StrategyPlan, Transcript, Verdict};

fn question_strategy(max_id: u64, bits: u32) -> impl Strategy<Value = Question> {
    prop_oneof![
        (0..bits.max(1)).prop_map(Question::Bit),
        (1..=max_id)
            .prop_flat_map(move |lo| (Just(lo), lo..=max_id))
            .prop_map(|(lo, hi)| Question::Range { lo, hi }),
        proptest::collection::vec(1..=max_id, 0..12).prop_map(Question::set),
    ]
}

/// A game on 1..=n (padded to a power of two) with a few answered questions.
fn game_strategy() -> impl Strategy<Value = (GameState, Vec<(Question, Answer)>)> {
    (2u64..200, any::<bool>(), 0u64..6).prop_flat_map(|(n, pad, virtuals)| {
        let padded = if pad { n.next_power_of_two() } else { n };
        let bits = ceil_log2(padded);
        let steps =
            proptest::collection::vec((question_strategy(padded, bits), any::<bool>()), 0..8);
        steps.prop_map(move |steps| {
            let mut state = GameState::padded(n, padded, 12).unwrap();
            state.add_virtual_pennies(virtuals, None);
            let steps: Vec<_> = steps
                .into_iter()
                .map(|(q, yes)| (q, Answer::from_bool(yes)))
                .collect();
            for (q, a) in &steps {
                state.apply_answer(q, *a).unwrap();
            }
            (state, steps)
        })
    })
}

fn question_from_seed(state: &GameState, seed: u64) -> Question {
    let bits = ceil_log2(state.padded_size());
    let max = state.max_id();
    match seed % 3 {
        0 if bits > 0 => Question::Bit((seed / 3 % u64::from(bits)) as u32),
        1 => Question::Range {
            lo: 1 + seed % max,
            hi: max,
        },
        _ => Question::set((1..=max).filter(|id| (seed >> (id % 61)) & 1 == 1)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn weight_is_conserved((state, _) in game_strategy(), seed in any::<u64>()) {
        let question = question_from_seed(&state, seed);
        let (yes, no) = state.preview(&question).unwrap();
        prop_assert_eq!(state.weight().unwrap(), yes.summary.weight().unwrap() + no.summary.weight().unwrap());
    }

    #[test]
    fn counts_never_decrease((state, _) in game_strategy(), seed in any::<u64>(), yes in any::<bool>()) {
        let question = question_from_seed(&state, seed);
        let before: Vec<_> = (1..=state.max_id()).map(|id| state.contradictions(id).unwrap()).collect();
        let mut after = state.clone();
        after.apply_answer(&question, Answer::from_bool(yes)).unwrap();
        for (i, old) in before.iter().enumerate() {
            let new = after.contradictions(i as u64 + 1).unwrap();
            prop_assert!(new >= *old);
            if *old == ELIMINATED {
                prop_assert_eq!(new, ELIMINATED);
            }
        }
        let s = after.summary();
        prop_assert_eq!(s.a as usize, after.consistent().len());
        prop_assert_eq!(s.b as usize, after.pennies().len());
    }

    #[test]
    fn replay_is_deterministic((state, _) in game_strategy()) {
        let text = state.transcript().to_string();
        let parsed: Transcript = text.parse().unwrap();
        let replayed = parsed.replay().unwrap();
        prop_assert_eq!(replayed.summary(), state.summary());
        prop_assert_eq!(replayed.transcript().to_string(), text);
    }

    #[test]
    fn honest_secret_keeps_at_most_one_lie(n in 1u64..500, x_seed in any::<u64>(), lie in 0u32..=12) {
        let x = 1 + x_seed % n;
        let plan = StrategyPlan::new(n).unwrap();
        let lie_at = (lie > 0 && lie <= plan.q).then_some(lie);
        let mut honest = Honest { x, lie_at };
        let mut state = plan.initial_state();
        let mut plan = plan;
        while let Some((q, _)) = plan.next_question(&mut state).unwrap() {
            let a = honest.respond(&state, &q).unwrap();
            state.apply_answer(&q, a).unwrap();
            prop_assert!(state.contradictions(x).unwrap() <= 1);
            plan.on_answer(&state, a).unwrap();
        }
        prop_assert_eq!(state.identified().unwrap(), Some(x));
    }
}

#[test]
fn bounds_minimal_and_monotone() {
    let mut prev = (0, 0);
    for n in 1..=5000u64 {
        let q = pelc_q1(n).unwrap();
        assert_eq!(Bounds::<u64>::pelc_holds(&n, q), Some(true));
        if q > 0 {
            assert_eq!(Bounds::<u64>::pelc_holds(&n, q - 1), Some(false), "n={n}");
        }
        let t = theorem2_bound(n).unwrap();
        let padded = 1u64 << t.ell;
        assert!(n <= padded && padded * (u64::from(t.q) + 1) <= 1 << t.q);
        if t.q > t.ell {
            assert!(
                padded * u64::from(t.q) > 1 << (t.q - 1),
                "n={n} not minimal"
            );
        }
        // ell <= q - ceil(log2(q + 1))
        assert!(t.ell + ceil_log2(u64::from(t.q) + 1) <= t.q);
        assert!(q >= prev.0 && t.q >= prev.1);
        prev = (q, t.q);
        if n % 2 == 0 {
            assert_eq!(Some(q), Bounds::<u64>::volume_lower(&n).ok().map(|b| b.q));
        }
    }
}

#[test]
fn oracle_monotone_and_volume_bounded() {
    let oracle = Oracle::default();
    for j in 0..=7u32 {
        for a in 0..=10u64 {
            for b in 0..=20u64 {
                let w = oracle.winnable(a, b, j).unwrap();
                if w {
                    assert!(oracle.winnable(a, b, j + 1).unwrap());
                    assert!((u64::from(j) + 1) * a + b <= 1 << j || a + b <= 1);
                    if a > 0 {
                        assert!(oracle.winnable(a - 1, b, j).unwrap());
                    }
                    if b > 0 {
                        assert!(oracle.winnable(a, b - 1, j).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn strategy_never_beats_oracle() {
    let oracle = Oracle::default();
    for n in 1..=64 {
        assert!(StrategyPlan::new(n).unwrap().q >= oracle.q1(n).unwrap());
    }
}

#[test]
fn post_bit_search_summary_is_one_and_ell() {
    for n in [3u64, 8, 100, 1000] {
        let plan = StrategyPlan::new(n).unwrap();
        for pattern in [0u64, 1, 0b1010, u64::MAX] {
            let mut state = plan.initial_state();
            for i in 0..plan.ell {
                state
                    .apply_answer(&Question::Bit(i), Answer::from_bool(pattern >> i & 1 == 1))
                    .unwrap();
            }
            let s = state.summary();
            assert_eq!((s.a, s.b), (1, u64::from(plan.ell)));
        }
    }
}

#[test]
fn adversary_keeps_half_the_weight() {
    for n in 1..=64u64 {
        for q in 0..=pelc_q1(n).unwrap() + 1 {
            let run = simulate_adversary(n, q).unwrap();
            assert!(run.half_weight_held, "{run}");
        }
    }
}

/// Random questioners cannot beat the adversary when the volume test fails.
#[test]
fn adversary_beats_random_questioners() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for n in 2..=40u64 {
        let mut q = 0;
        while (n * (q + 1)) > 1 << q {
            for _ in 0..20 {
                let mut state = GameState::new(n, q as u32).unwrap();
                let mut adversary = WeightAdversary {
                    tie_break: TieBreak::default(),
                };
                while state.remaining() > 0 {
                    let density = rng.gen_range(0.1..0.9);
                    let question = Question::set((1..=n).filter(|_| rng.gen_bool(density)));
                    let answer = adversary.respond(&state, &question).unwrap();
                    state.apply_answer(&question, answer).unwrap();
                }
                let s = state.summary();
                assert!(s.survivors() >= 2, "n={n} q={q}: {s}");
            }
            q += 1;
        }
    }
}

#[test]
fn truncated_strategy_is_undecided_against_adversary() {
    let out = run_with_budget(1_000_000, 24, &mut WeightAdversary::default()).unwrap();
    assert_eq!(out.verdict, Verdict::Undecided);
    assert!(out.summary.survivors() >= 2);
}
