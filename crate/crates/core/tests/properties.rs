mod common;

use proptest::prelude::*;

use qresb::coordination::{critical_tax, delta, welfare, WelfareMode};
use qresb::metagame::{abstract_reform, check_blocking, unanimity_rule, Costs, MetaGame, Rule, APPROVE};
use qresb::qre::{
    comparative_statics, find_all_fixed_points, fixed_point_residual, logit_response, select_equilibrium,
    solve_binary, solve_qre, BinaryCoordParams, BinaryOptions, QreConfig, Selection,
};
use qresb::transform::{apply_sequence, PayoffAdjustment, Transformation};
use qresb::{Game, MixedProfile};

use common::{brute_force_nash_2p, oracle_p, Coord};

fn labels(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

/// Game with 1..=max_players players and 1..=3 actions each.
fn game_strategy(max_players: usize) -> impl Strategy<Value = Game> {
    prop::collection::vec(1usize..=3, 1..=max_players).prop_flat_map(|sizes| {
        let m = sizes.len();
        let cells: usize = sizes.iter().product::<usize>() * m;
        prop::collection::vec(-10.0f64..10.0, cells).prop_map(move |vals| {
            let players = labels(m, "p");
            let actions: Vec<Vec<String>> = sizes.iter().map(|&n| labels(n, "a")).collect();
            let mut k = 0;
            Game::from_fn(players, actions, |_| {
                let row = vals[k..k + m].to_vec();
                k += m;
                row
            })
            .unwrap()
        })
    })
}

fn mix_strategy(game: &Game) -> impl Strategy<Value = MixedProfile> {
    let sizes: Vec<usize> = (0..game.num_players()).map(|i| game.num_actions(i)).collect();
    sizes
        .into_iter()
        .map(|n| prop::collection::vec(0.01f64..1.0, n))
        .collect::<Vec<_>>()
        .prop_map(|raw| {
            let probs = raw
                .into_iter()
                .map(|v| {
                    let s: f64 = v.iter().sum();
                    v.into_iter().map(|x| x / s).collect()
                })
                .collect();
            normalized(probs)
        })
}

/// Pushes rounding into the last entry so the sum check passes.
fn normalized(mut probs: Vec<Vec<f64>>) -> MixedProfile {
    for v in &mut probs {
        let last = v.len() - 1;
        let head: f64 = v[..last].iter().sum();
        v[last] = (1.0 - head).max(0.0);
    }
    MixedProfile::new(probs).unwrap()
}

fn coord_strategy(lo: f64, hi: f64) -> impl Strategy<Value = Coord> {
    (0.0f64..3.0, 0.0f64..3.0, 0.5f64..5.0, 0.1f64..3.0, 0.0f64..3.0, 0.0f64..2.0, lo..hi).prop_map(
        |(c, d, da, db, kappa, tax, load)| {
            let a = c.max(d) + da;
            let b = a + db;
            let beta = load / ((b - c) + (a - d));
            Coord { a, b, c, d, kappa, beta, tax }
        },
    )
}

fn params(k: &Coord) -> BinaryCoordParams {
    BinaryCoordParams::new(k.a, k.b, k.c, k.d, k.kappa, k.beta, k.tax).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expected_payoff_is_linear_in_each_opponent(
        (game, q1, q2) in game_strategy(3).prop_flat_map(|g| {
            let a = mix_strategy(&g);
            let b = mix_strategy(&g);
            (Just(g), a, b)
        }),
        lambda in 0.0f64..1.0,
    ) {
        let m = game.num_players();
        for i in 0..m {
            for j in (0..m).filter(|&j| j != i) {
                // Mix only player j's strategy; others follow q1.
                let mut blend = q1.all().to_vec();
                blend[j] = q1.probs(j).iter().zip(q2.probs(j)).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
                let mut alt = q1.all().to_vec();
                alt[j] = q2.probs(j).to_vec();
                let blend = normalized(blend);
                let alt = normalized(alt);
                for a in 0..game.num_actions(i) {
                    let lhs = game.expected_payoff_at(i, a, &blend).unwrap();
                    let rhs = lambda * game.expected_payoff_at(i, a, &q1).unwrap()
                        + (1.0 - lambda) * game.expected_payoff_at(i, a, &alt).unwrap();
                    prop_assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn pure_nash_is_affine_invariant(
        game in game_strategy(3),
        scale in prop::collection::vec(0.1f64..5.0, 3),
        shift in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let m = game.num_players();
        let actions = game.all_actions().to_vec();
        let moved = Game::from_fn(game.players().to_vec(), actions, |p| {
            (0..m).map(|i| scale[i] * game.payoff(p, i) + shift[i]).collect()
        }).unwrap();
        prop_assert_eq!(game.pure_nash(), moved.pure_nash());
    }

    #[test]
    fn pure_nash_matches_brute_force(game in game_strategy(2).prop_filter("two players", |g| g.num_players() == 2)) {
        let mut got = game.pure_nash();
        let mut want = brute_force_nash_2p(&game);
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn qre_has_full_support_and_small_residual(
        game in game_strategy(3),
        beta in 0.0f64..3.0,
        kappa in 0.0f64..3.0,
    ) {
        let cfg = QreConfig::symmetric(&game, beta, kappa);
        let mut sel = Selection::new(cfg.clone());
        sel.max_iter = 5_000;
        let res = select_equilibrium(&game, &sel).unwrap();
        prop_assert!(res.profile.min_probability() > 0.0);
        if res.converged {
            prop_assert!(res.residual <= sel.tol);
            prop_assert!(fixed_point_residual(&game, &cfg, &res.profile).unwrap() <= sel.tol);
        }
    }

    #[test]
    fn equal_effective_payoffs_give_uniform_response(
        n in 1usize..=4,
        value in -10.0f64..10.0,
        beta in 0.0f64..50.0,
    ) {
        let game = Game::from_fn(vec!["solo".into(), "other".into()], vec![labels(n, "a"), labels(2, "b")], |_| vec![value, value]).unwrap();
        let cfg = QreConfig::symmetric(&game, beta, 0.0);
        let r = logit_response(&game, &cfg, &MixedProfile::uniform(&game), 0).unwrap();
        for x in r {
            prop_assert!((x - 1.0 / n as f64).abs() <= 1e-15);
        }
    }

    #[test]
    fn contraction_implies_unique_root(k in coord_strategy(0.05, 3.99)) {
        let p = params(&k);
        let roots = find_all_fixed_points(&p, 10_001).unwrap();
        prop_assert_eq!(roots.len(), 1);
        for s in 0..=10 {
            let res = solve_binary(&p, s as f64 / 10.0, &BinaryOptions::default()).unwrap();
            prop_assert!(res.converged && res.residual <= 1e-12);
            prop_assert!((res.p - roots[0]).abs() <= 1e-10);
        }
        prop_assert!((roots[0] - oracle_p(&k)).abs() <= 1e-10);
    }

    #[test]
    fn equilibrium_is_monotone_in_tax_and_kappa(k in coord_strategy(0.05, 3.99)) {
        let p = params(&k);
        let opts = BinaryOptions::default();
        let mut last = f64::INFINITY;
        for s in 0..20 {
            let cur = solve_binary(&p.with_tax(s as f64 * 0.25), 0.5, &opts).unwrap().p;
            prop_assert!(cur < last);
            last = cur;
        }
        let mut last = f64::NEG_INFINITY;
        for s in 0..20 {
            let cur = solve_binary(&p.with_kappa(s as f64 * 0.25), 0.5, &opts).unwrap().p;
            prop_assert!(cur > last);
            last = cur;
        }
        let s = comparative_statics(&p).unwrap();
        let fd = common::oracle_derivatives(&k, 1e-4);
        for (analytic, oracle) in s.as_array().iter().zip(fd) {
            prop_assert_eq!(*analytic > 0.0, oracle > 0.0);
        }
    }

    #[test]
    fn general_solver_agrees_with_binary_solver(k in coord_strategy(0.05, 3.9), start in 0.0f64..1.0) {
        let game = Game::symmetric_2x2(k.a, k.b, k.c, k.d).unwrap();
        let mut cfg = QreConfig::symmetric(&game, k.beta, k.kappa);
        let taxed = Transformation::tax_all(&game, "X", k.tax).apply(&game).unwrap();
        cfg.default_action = vec!["X".into(), "X".into()];
        let init = MixedProfile::new(vec![vec![start, 1.0 - start], vec![start, 1.0 - start]]).unwrap();
        let res = solve_qre(&taxed, &cfg, &init, 1.0, 1e-13, 100_000).unwrap();
        prop_assert!(res.converged);
        prop_assert_eq!(res.profile.probs(0), res.profile.probs(1));
        let p = solve_binary(&params(&k), 0.5, &BinaryOptions::default()).unwrap().p;
        prop_assert!((res.profile.probs(0)[0] - p).abs() <= 1e-9);
    }

    #[test]
    fn critical_tax_gives_half(k in coord_strategy(0.05, 3.99)) {
        let p = params(&k);
        let t = critical_tax(&p);
        prop_assume!(t >= 0.0);
        let res = solve_binary(&p.with_tax(t), 0.5, &BinaryOptions::default()).unwrap();
        prop_assert!((res.p - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn delta_is_affine(k in coord_strategy(0.05, 3.99), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let p = params(&k);
        let slope = -(k.alpha() + k.gamma());
        let dx = delta(&p, x).unwrap();
        let dy = delta(&p, y).unwrap();
        prop_assert!((dy - dx - slope * (y - x)).abs() <= 1e-12 * (1.0 + dx.abs() + dy.abs()));
    }

    #[test]
    fn welfare_endpoints(k in coord_strategy(0.05, 3.99)) {
        let p = params(&k);
        prop_assert_eq!(welfare(&p, 0.0, WelfareMode::ExpectedGame).unwrap(), k.b);
        prop_assert_eq!(welfare(&p, 1.0, WelfareMode::ExpectedGame).unwrap(), k.a);
    }

    #[test]
    fn transformations_change_action_sets_as_declared(game in game_strategy(3), amount in -3.0f64..3.0) {
        let player = game.player_label(0).to_string();
        let action = game.actions(0)[0].clone();
        let price = Transformation::tax(&player, &action, amount);
        let priced = price.apply(&game).unwrap();
        prop_assert_eq!(priced.all_actions(), game.all_actions());
        prop_assert_eq!(&priced, &price.apply(&game).unwrap());

        // Exact commutation needs exactly representable sums: use dyadic
        // payoffs and amounts.
        let m = game.num_players();
        let dyadic = Game::from_fn(game.players().to_vec(), game.all_actions().to_vec(), |p| {
            (0..m).map(|i| (game.payoff(p, i) * 64.0).round() / 64.0).collect()
        }).unwrap();
        let t1 = Transformation::tax(&player, &action, (amount * 8.0).round() / 8.0);
        let t2 = Transformation::tax(&player, game.actions(0).last().unwrap(), (amount * 4.0).round() / 8.0);
        let ab = apply_sequence(&[t1.clone(), t2.clone()], &dyadic).unwrap();
        let ba = apply_sequence(&[t2, t1], &dyadic).unwrap();
        prop_assert_eq!(ab, ba);

        let del = Transformation::Delete { player: player.clone(), action: action.clone() };
        match del.apply(&game) {
            Ok(g) => {
                prop_assert_eq!(g.num_actions(0), game.num_actions(0) - 1);
                prop_assert!(!g.actions(0).contains(&action));
                for i in 1..game.num_players() {
                    prop_assert_eq!(g.actions(i), game.actions(i));
                }
                let cfg = QreConfig::symmetric(&game, 1.0, 0.5).rebased(&g);
                let res = select_equilibrium(&g, &Selection::new(cfg)).unwrap();
                prop_assert_eq!(res.profile.probs(0).len(), g.num_actions(0));
            }
            Err(e) => prop_assert!(game.num_actions(0) == 1, "{e}"),
        }

        let payoffs = (0..game.num_profiles())
            .map(|k| game.profile_at(k))
            .filter(|p| p[0] == 0)
            .map(|p| {
                let mut profile = std::collections::BTreeMap::new();
                for (i, &a) in p.iter().enumerate() {
                    let label = if i == 0 { "new".to_string() } else { game.actions(i)[a].clone() };
                    profile.insert(game.player_label(i).to_string(), label);
                }
                let values = game.players().iter().map(|pl| (pl.clone(), 1.0)).collect();
                qresb::game::PayoffEntry { profile, values }
            })
            .collect();
        let added = Transformation::Add { player: player.clone(), action: "new".into(), payoffs }.apply(&game).unwrap();
        prop_assert_eq!(added.num_actions(0), game.num_actions(0) + 1);
    }
}

fn reform_game(gains: &[f64], weights: Vec<Vec<f64>>, costs: Costs) -> MetaGame {
    let sq = vec![0.0; gains.len()];
    let (game, reform) = abstract_reform(&sq, gains).unwrap();
    let sel = Selection::new(QreConfig::symmetric(&game, 1.0, 0.0));
    MetaGame::vote(game, unanimity_rule(reform), sel)
        .unwrap()
        .with_weights(weights)
        .unwrap()
        .with_costs(costs)
        .unwrap()
}

fn weights_strategy(m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..1.0, m), m).prop_map(move |mut w| {
        for (i, row) in w.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        w
    })
}

fn table_meta_game() -> impl Strategy<Value = MetaGame> {
    (
        prop::collection::vec(-5.0f64..5.0, 8),
        prop::collection::vec(prop::option::of(prop::collection::vec(-2.0f64..2.0, 2)), 4),
        prop::collection::vec(0.0f64..1.0, 4),
        0.0f64..0.15,
    )
        .prop_map(|(payoffs, images, costs, beta)| {
            let game = Game::from_fn(
                vec!["1".into(), "2".into()],
                vec![vec!["X".into(), "Y".into()], vec!["X".into(), "Y".into()]],
                |p| {
                    let k = 2 * (2 * p[0] + p[1]);
                    payoffs[k..k + 2].to_vec()
                },
            )
            .unwrap();
            let rule = Rule::Table(
                images
                    .into_iter()
                    .map(|img| match img {
                        None => Vec::new(),
                        Some(v) => vec![Transformation::PriceOnly {
                            adjustments: vec![
                                PayoffAdjustment { player: "1".into(), action: "X".into(), amount: v[0] },
                                PayoffAdjustment { player: "2".into(), action: "Y".into(), amount: v[1] },
                            ],
                        }],
                    })
                    .collect(),
            );
            let sel = Selection::new(QreConfig::symmetric(&game, beta, 0.5));
            let meta = vec![vec!["m0".into(), "m1".into()], vec!["m0".into(), "m1".into()]];
            MetaGame::new(game, meta, rule, sel)
                .unwrap()
                .with_costs(Costs::PerAction(vec![costs[..2].to_vec(), costs[2..].to_vec()]))
                .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zero_weights_make_hyper_equal_meta(mg in table_meta_game()) {
        let an = mg.analyze().unwrap();
        prop_assert_eq!(an.meta_nash, an.hyper_meta_nash);
    }

    #[test]
    fn meta_nash_matches_direct_deviation_checks(mg in table_meta_game()) {
        let an = mg.analyze().unwrap();
        for (k, o) in an.outcomes.iter().enumerate() {
            let mut gains = false;
            for i in 0..2 {
                for alt in 0..2 {
                    let mut dev = o.profile.clone();
                    dev.actions[i] = alt;
                    let d = mg.evaluate(&dev).unwrap();
                    gains |= d.v[i] > o.v[i];
                }
            }
            prop_assert_eq!(an.meta_nash.contains(&k), !gains);
        }
    }

    #[test]
    fn evaluation_is_deterministic(mg in table_meta_game(), k in 0usize..4) {
        let y = mg.profile_at(k);
        prop_assert_eq!(mg.evaluate(&y).unwrap(), mg.evaluate(&y).unwrap());
    }

    #[test]
    fn constant_cost_shift_keeps_equilibria(
        mg in table_meta_game(),
        shift in prop::collection::vec(0.0f64..5.0, 2),
    ) {
        let an = mg.analyze().unwrap();
        let base: Vec<Vec<f64>> = (0..2)
            .map(|i| (0..2).map(|a| mg.cost(i, &qresb::metagame::MetaProfile { actions: vec![a, a], env: 0 })).collect())
            .collect();
        let shifted: Vec<Vec<f64>> = base.iter().enumerate().map(|(i, row)| row.iter().map(|c| c + shift[i]).collect()).collect();
        let moved = mg.clone().with_costs(Costs::PerAction(shifted)).unwrap().analyze().unwrap();
        prop_assert_eq!(an.meta_nash, moved.meta_nash);
        prop_assert_eq!(an.hyper_meta_nash, moved.hyper_meta_nash);
    }

    #[test]
    fn blocking_verdict_matches_hyper_membership(
        (gains, weights) in (2usize..=4).prop_flat_map(|m| (prop::collection::vec(0.1f64..3.0, m), weights_strategy(m))),
    ) {
        let mg = reform_game(&gains, weights.clone(), Costs::Zero);
        let flags = check_blocking(&gains, &weights).unwrap();
        let all = mg.uniform_profile(APPROVE).unwrap();
        let in_hyper = mg.hyper_meta_nash().unwrap().contains(&all);
        prop_assert_eq!(in_hyper, flags.iter().all(|f| !f));
    }
}
