//! Independent oracles and instance generators shared by the integration
//! tests. Nothing here calls the solvers under test.

#![allow(dead_code)]

use qresb::Game;
use rand::Rng;

/// Every pure profile of `game` at which no player has a strictly better
/// unilateral deviation, by direct enumeration over nested index loops.
pub fn brute_force_nash_2p(game: &Game) -> Vec<Vec<usize>> {
    assert_eq!(game.num_players(), 2);
    let (n0, n1) = (game.num_actions(0), game.num_actions(1));
    let mut out = Vec::new();
    for r in 0..n0 {
        for c in 0..n1 {
            let row_ok = (0..n0).all(|r2| game.payoff(&[r2, c], 0) <= game.payoff(&[r, c], 0));
            let col_ok = (0..n1).all(|c2| game.payoff(&[r, c2], 1) <= game.payoff(&[r, c], 1));
            if row_ok && col_ok {
                out.push(vec![r, c]);
            }
        }
    }
    out
}

/// Random two-player game with 1 to 3 actions per player and small
/// integer payoffs, so that ties occur.
pub fn random_2p_game<R: Rng>(rng: &mut R) -> Game {
    let n0 = rng.gen_range(1..=3);
    let n1 = rng.gen_range(1..=3);
    let table: Vec<Vec<[f64; 2]>> = (0..n0)
        .map(|_| (0..n1).map(|_| [rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64]).collect())
        .collect();
    let labels = |n: usize, prefix: &str| (0..n).map(|k| format!("{prefix}{k}")).collect::<Vec<_>>();
    Game::from_fn(
        vec!["row".into(), "col".into()],
        vec![labels(n0, "r"), labels(n1, "c")],
        |p| table[p[0]][p[1]].to_vec(),
    )
    .unwrap()
}

/// Parameters of the binary coordination model drawn so that
/// `beta * (alpha + gamma)` lies in `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct Coord {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub kappa: f64,
    pub beta: f64,
    pub tax: f64,
}

impl Coord {
    pub fn alpha(&self) -> f64 {
        self.b - self.c
    }

    pub fn gamma(&self) -> f64 {
        self.a - self.d
    }
}

pub fn random_coord<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Coord {
    let c: f64 = rng.gen_range(0.0..3.0);
    let d: f64 = rng.gen_range(0.0..3.0);
    let a = c.max(d) + rng.gen_range(0.5..5.0);
    let b = a + rng.gen_range(0.1..3.0);
    let kappa = rng.gen_range(0.0..3.0);
    let tax = rng.gen_range(0.0..2.0);
    let sum = (b - c) + (a - d);
    let beta = rng.gen_range(lo..hi) / sum;
    Coord { a, b, c, d, kappa, beta, tax }
}

/// Status-quo probability of the symmetric equilibrium, found by bisection
/// on the monotone residual. When the root lies above 1/2 the complement is
/// solved instead, so both tails keep full relative precision.
pub fn oracle_p(k: &Coord) -> f64 {
    let (alpha, gamma) = (k.alpha(), k.gamma());
    let delta = |p: f64| alpha - k.kappa - p * (alpha + gamma) + k.tax;
    // p = 1 / (1 + exp(beta * delta(p)))
    let f = |p: f64| p - 1.0 / (1.0 + (k.beta * delta(p)).exp());
    if f(0.5) >= 0.0 {
        bisect(f, 0.0, 0.5)
    } else {
        // q = 1 - p = 1 / (1 + exp(-beta * delta(1 - q)))
        let g = |q: f64| q - 1.0 / (1.0 + (-k.beta * delta(1.0 - q)).exp());
        1.0 - bisect(g, 0.0, 0.5)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) <= 0.0 && f(hi) >= 0.0);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central finite differences of [`oracle_p`] in kappa, tax, alpha (via b)
/// and gamma (via a).
pub fn oracle_derivatives(k: &Coord, h: f64) -> [f64; 4] {
    let diff = |up: Coord, down: Coord| (oracle_p(&up) - oracle_p(&down)) / (2.0 * h);
    [
        diff(Coord { kappa: k.kappa + h, ..*k }, Coord { kappa: k.kappa - h, ..*k }),
        diff(Coord { tax: k.tax + h, ..*k }, Coord { tax: k.tax - h, ..*k }),
        diff(Coord { b: k.b + h, ..*k }, Coord { b: k.b - h, ..*k }),
        diff(Coord { a: k.a + h, ..*k }, Coord { a: k.a - h, ..*k }),
    ]
}

pub fn rel_err(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}
