use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use v2v_offload::candidate::{
    predict_lambda, CandidateFeatures, Outcome, Suitability, SuitabilityModel, TrainingRecord,
};
use v2v_offload::comms::{multihop_rate, tran_delay, ChannelParams};
use v2v_offload::cost::{evaluate, CostTimeMatrix, Problem};
use v2v_offload::error::SolveError;
use v2v_offload::mobility::ConnectivityGraph;
use v2v_offload::model::{Position, TaskKind};
use v2v_offload::solvers::{brute_force, solve, SolverKind, SolverOptions};

fn channel() -> impl Strategy<Value = ChannelParams> {
    (1e5..1e7f64, 0.1..5.0f64, 0.5..8.0f64, 1e-14..1e-10f64).prop_map(|(b, p, h, n)| ChannelParams {
        bandwidth: b,
        tx_power: p,
        channel_gain: h,
        noise_power: n,
    })
}

fn features() -> impl Strategy<Value = CandidateFeatures> {
    (0.0..600.0f64, 0.0..300.0f64, 0.0..=1.0f64).prop_map(|(s, c, r)| CandidateFeatures {
        stay_time: s,
        completion_time: c,
        history_success_rate: r,
    })
}

fn trained_model(seed: u64) -> SuitabilityModel {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = SuitabilityModel::default();
    for t in 0..100 {
        let f = CandidateFeatures {
            stay_time: rng.random_range(0.0..400.0),
            completion_time: rng.random_range(0.0..200.0),
            history_success_rate: rng.random_range(0.0..1.0),
        };
        let ok = f.completion_time < f.stay_time && rng.random_bool(f.history_success_rate);
        model.observe(&TrainingRecord {
            task_id: t,
            features: f,
            outcome: if ok { Outcome::Success } else { Outcome::Failure },
        });
    }
    model
}

/// Instances with tasks, categories, non-candidates, stays, deadlines and queued work.
fn problem() -> impl Strategy<Value = Problem> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::collection::vec(prop::option::weighted(0.85, 0.5..10.0f64), n), m),
            prop::collection::vec(0usize..4, m),
            prop::collection::vec(0usize..2, m),
            prop::collection::vec(prop::option::weighted(0.6, 3.0..40.0f64), 2),
            prop::collection::vec(prop::option::weighted(0.5, 1.0..25.0f64), n),
            prop::collection::vec(0.0..4.0f64, n),
        )
            .prop_map(move |(costs, cats, task_of, deadlines, stays, load)| {
                let rows: Vec<Vec<f64>> = costs
                    .into_iter()
                    .map(|r| {
                        r.into_iter()
                            .enumerate()
                            .map(|(j, c)| {
                                if j == 0 {
                                    c.unwrap_or(5.0)
                                } else {
                                    c.unwrap_or(f64::INFINITY)
                                }
                            })
                            .collect()
                    })
                    .collect();
                let mut p = Problem::from_costs(CostTimeMatrix::from_rows(&rows));
                p.categories = cats.into_iter().map(|c| TaskKind::ALL[c]).collect();
                p.task_of = task_of;
                p.deadlines = deadlines.into_iter().map(|d| d.unwrap_or(f64::INFINITY)).collect();
                p.stays = stays
                    .into_iter()
                    .enumerate()
                    .map(|(j, s)| {
                        if j == 0 {
                            f64::INFINITY
                        } else {
                            s.unwrap_or(f64::INFINITY)
                        }
                    })
                    .collect();
                p.initial_load = load;
                p
            })
    })
}

fn monotone<M: Suitability>(model: &M, f: CandidateFeatures, d: f64, dr: f64) -> Result<(), TestCaseError> {
    let lam = |x: CandidateFeatures| predict_lambda(model, &x);
    let base = lam(f);
    let more_stay = lam(CandidateFeatures {
        stay_time: f.stay_time + d,
        ..f
    });
    let never_leaves = lam(CandidateFeatures {
        stay_time: f64::INFINITY,
        ..f
    });
    let more_work = lam(CandidateFeatures {
        completion_time: f.completion_time + d,
        ..f
    });
    let rate = (f.history_success_rate + dr).min(1.0);
    let better = lam(CandidateFeatures {
        history_success_rate: rate,
        ..f
    });
    prop_assert!(more_stay >= base);
    prop_assert!(never_leaves >= base);
    prop_assert!(more_work <= base);
    prop_assert!(better >= base);
    Ok(())
}

proptest! {
    #[test]
    fn rate_falls_with_hops_and_sharing(ch in channel(), m in 1usize..500, mu in 1u32..8) {
        let r = multihop_rate(&ch, m, mu).unwrap();
        prop_assert!(r > 0.0);
        prop_assert!(multihop_rate(&ch, m, mu + 1).unwrap() < r);
        prop_assert!(multihop_rate(&ch, m + 1, mu).unwrap() <= r);
    }

    #[test]
    fn delay_grows_with_hops_sharing_and_size(ch in channel(), m in 1usize..500, mu in 1u32..8, e in 1.0..1e7f64) {
        let d = tran_delay(e, &ch, m, mu).unwrap();
        prop_assert!(tran_delay(e, &ch, m, mu + 1).unwrap() > d);
        prop_assert!(tran_delay(e, &ch, m + 1, mu).unwrap() >= d);
        prop_assert!(tran_delay(2.0 * e, &ch, m, mu).unwrap() > d);
        let rel = (tran_delay(e, &ch, m, mu).unwrap() * multihop_rate(&ch, m, mu).unwrap() - e).abs() / e;
        prop_assert!(rel < 1e-12);
    }

    #[test]
    fn lambda_monotone_untrained(f in features(), d in 0.0..100.0f64, dr in 0.0..1.0f64) {
        let model = SuitabilityModel::default();
        prop_assert!((0.0..=1.0).contains(&predict_lambda(&model, &f)));
        monotone(&model, f, d, dr)?;
    }

    #[test]
    fn lambda_monotone_trained(seed in 0u64..20, f in features(), d in 0.0..100.0f64, dr in 0.0..1.0f64) {
        monotone(&trained_model(seed), f, d, dr)?;
    }

    #[test]
    fn connectivity_is_symmetric(
        pts in prop::collection::vec(prop::option::weighted(0.9, (0.0..800.0f64, 0.0..12.0f64)), 1..15),
        range in 10.0..300.0f64,
    ) {
        let nodes: Vec<(u32, Option<Position>)> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (i as u32 + 1, p.map(|(x, y)| Position::new(x, y))))
            .collect();
        let g = ConnectivityGraph::from_positions(&nodes, range);
        for &(a, pa) in &nodes {
            let from_a = g.hops_from(a).unwrap();
            for (bi, &(b, pb)) in nodes.iter().enumerate() {
                prop_assert_eq!(g.has_edge(a, b), g.has_edge(b, a));
                if a != b {
                    let near = matches!((pa, pb), (Some(p), Some(q)) if p.distance(&q) <= range);
                    prop_assert_eq!(g.has_edge(a, b), near);
                }
                let ai = nodes.iter().position(|n| n.0 == a).unwrap();
                prop_assert_eq!(from_a[bi], g.hops_from(b).unwrap()[ai]);
            }
        }
    }

    #[test]
    fn solvers_satisfy_constraints_or_refuse(p in problem(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let exact = brute_force(&p, 1 << 16);
        for kind in SolverKind::ALL {
            match solve(kind, &p, &SolverOptions::default(), &mut rng) {
                Ok(out) => {
                    let ev = evaluate(&out.x, &p).unwrap();
                    prop_assert!(ev.feasible(), "{kind}: {:?}", ev.violations);
                    prop_assert!((ev.makespan - out.makespan).abs() < 1e-9);
                    let best = exact.as_ref().map(|e| e.makespan).unwrap_or(f64::INFINITY);
                    prop_assert!(out.makespan >= best - 1e-9, "{kind} beat the exhaustive search");
                }
                Err(SolveError::Infeasible { .. } | SolveError::NoFeasibleAssignment) => {}
                Err(e) => prop_assert!(false, "{kind}: {e}"),
            }
        }
    }
}
