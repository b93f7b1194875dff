//! End-to-end acceptance checks for the estimator, the allocator, and the
//! closed simulation loop. Each test prints one `[acceptance] ... PASS` line
//! (visible with `cargo test --test acceptance -- --nocapture`) and enforces
//! its own wall-clock budget. Reference values come from the brute-force
//! oracle in `common`, never from the code under test.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trustalloc::{
    allocate, batch_fit, episode_bounds_csv, episode_log_csv, expected_total_reward, run_episode,
    update_belief, AgentKind, Allocator, CapabilityBelief, CapabilitySpace, CapabilityVector,
    EpisodeLog, GroundTruthAgent, Observation, Outcome, PerAgent, RequirementDistribution,
    RewardParams, Scenario, SuccessModel, Task, TaskStreamSpec, TrustEstimate,
};

use common::{RefModel, RefObservation};

fn assert_budget(name: &str, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "{name} took {elapsed:?}, budget {budget:?}"
    );
}

fn test_reward_params() -> RewardParams {
    RewardParams::new(
        vec![5.0, 5.0],
        1.0,
        0.0,
        PerAgent::new(2.0, 0.5),
        PerAgent::new(vec![1.0, 1.0], vec![0.5, 0.5]),
    )
    .unwrap()
}

/// Expected total reward matches the defining arithmetic, including the
/// zero-failure-value simplification, to 1e-12 on 1000 random tuples.
#[test]
fn criterion_1_expected_reward_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for _ in 0..1000 {
        let tau = rng.random::<f64>();
        let r_s = rng.random::<f64>() * 20.0;
        let r_f = -rng.random::<f64>() * 5.0;
        let c = rng.random::<f64>() * 5.0;
        let t = TrustEstimate::new(tau).unwrap();

        let got = expected_total_reward(t, r_s, r_f, c);
        let want = tau * (r_s - c) + (1.0 - tau) * (r_f - c);
        assert!(
            (got - want).abs() < 1e-12,
            "tau={tau} r_s={r_s} r_f={r_f} c={c}"
        );

        let got_zero = expected_total_reward(t, r_s, 0.0, c);
        let want_zero = tau * r_s - c;
        assert!((got_zero - want_zero).abs() < 1e-12);
    }
    let elapsed = start.elapsed();
    assert_budget("criterion 1", elapsed, Duration::from_secs(1));
    println!("[acceptance] criterion 1 (expected-reward identity): PASS ({elapsed:?})");
}

/// Fitting 800 threshold observations from a known capability pair recovers
/// it: final credible bounds land within 0.05 of the truth and interval
/// widths shrink in expectation along the trace.
#[test]
fn criterion_2_batch_fit_recovers_truth() {
    let start = Instant::now();
    let space = CapabilitySpace::new(2, 101).unwrap();
    let truth = [0.6, 0.4];
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let observations: Vec<Observation> = (0..800)
        .map(|_| {
            let req: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
            let success = truth.iter().zip(&req).all(|(t, r)| t >= r);
            Observation::new(
                CapabilityVector::new(req, &space).unwrap(),
                if success {
                    Outcome::Success
                } else {
                    Outcome::Failure
                },
            )
        })
        .collect();

    let (_, trace) = batch_fit(&space, &observations, &SuccessModel::Step, 1e-3, 50).unwrap();
    assert!(trace.converged, "fit did not converge");

    for (dim, &planted) in truth.iter().enumerate() {
        let (lo, hi) = trace.final_bounds(dim);
        assert!(
            (lo - planted).abs() < 0.05 && (hi - planted).abs() < 0.05,
            "dim {dim}: bounds ({lo:.4}, {hi:.4}) not within 0.05 of {planted}"
        );

        // Width trend: consecutive window means over the trace must not rise.
        let widths = trace.widths(dim);
        let window = widths.len().div_ceil(8).max(1);
        let means: Vec<f64> = widths
            .chunks(window)
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        for pair in means.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "dim {dim}: width window mean rose from {} to {}",
                pair[0],
                pair[1]
            );
        }
        assert!(*widths.last().unwrap() < widths[0]);
    }
    let elapsed = start.elapsed();
    assert_budget("criterion 2", elapsed, Duration::from_secs(10));
    println!("[acceptance] criterion 2 (batch fit recovers truth): PASS ({elapsed:?})");
}

/// Twenty sequential smooth-model updates agree elementwise with the
/// single-pass brute-force posterior to 1e-10.
#[test]
fn criterion_3_sequential_updates_match_oracle() {
    let start = Instant::now();
    let space = CapabilitySpace::new(2, 11).unwrap();
    let model = SuccessModel::sigmoid(0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3003);

    let observations: Vec<Observation> = (0..20)
        .map(|_| {
            Observation::new(
                CapabilityVector::new((0..2).map(|_| rng.random::<f64>()).collect(), &space)
                    .unwrap(),
                if rng.random::<f64>() < 0.5 {
                    Outcome::Success
                } else {
                    Outcome::Failure
                },
            )
        })
        .collect();

    let mut belief = CapabilityBelief::uniform(&space);
    for obs in &observations {
        belief = update_belief(&belief, obs, &model).unwrap();
    }
    let got = belief.joint_weights().unwrap();

    let ref_obs: Vec<RefObservation> = observations
        .iter()
        .map(|o| RefObservation {
            requirements: o.requirements.values().to_vec(),
            success: o.outcome == Outcome::Success,
        })
        .collect();
    let want = common::posterior(&space, &ref_obs, &RefModel::Sigmoid { beta: 0.2 });

    assert_eq!(got.len(), want.len());
    for (i, (g, w)) in got.iter().zip(&want).enumerate() {
        assert!((g - w).abs() < 1e-10, "cell {i}: {g} vs oracle {w}");
    }
    let elapsed = start.elapsed();
    assert_budget("criterion 3", elapsed, Duration::from_secs(1));
    println!("[acceptance] criterion 3 (sequential updates match oracle): PASS ({elapsed:?})");
}

/// Under a uniform belief and the threshold model, predicted trust matches
/// the analytic value prod_i (1 - req_i) to within grid error 0.02.
#[test]
fn criterion_4_uniform_trust_analytic() {
    let start = Instant::now();
    let space = CapabilitySpace::new(2, 101).unwrap();
    let belief = CapabilityBelief::uniform(&space);
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    for _ in 0..1000 {
        let req: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
        let tau = belief
            .predict_trust(&req, &SuccessModel::Step)
            .unwrap()
            .value();
        let analytic: f64 = req.iter().map(|r| 1.0 - r).product();
        assert!(
            (tau - analytic).abs() < 0.02,
            "req {req:?}: trust {tau} vs analytic {analytic}"
        );
    }
    let elapsed = start.elapsed();
    assert_budget("criterion 4", elapsed, Duration::from_secs(5));
    println!("[acceptance] criterion 4 (uniform trust vs analytic): PASS ({elapsed:?})");
}

/// When failure pays nothing, success pays the same for both agents, the
/// robot is at least as trusted, and the robot is strictly cheaper, the
/// robot wins every one of 10000 random instances.
#[test]
fn criterion_5_allocation_dominance() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let space = CapabilitySpace::new(2, 11).unwrap();
    for case in 0..10_000 {
        let tau_h = rng.random::<f64>();
        let tau_r = tau_h + (1.0 - tau_h) * rng.random::<f64>();
        let r_s_base = rng.random::<f64>() * 10.0;
        let cost_r = rng.random::<f64>() * 3.0;
        let cost_h = cost_r + 1e-6 + rng.random::<f64>() * 3.0;

        let params = RewardParams::new(
            vec![0.0, 0.0],
            r_s_base,
            0.0,
            PerAgent::new(cost_h, cost_r),
            PerAgent::new(vec![0.0, 0.0], vec![0.0, 0.0]),
        )
        .unwrap();
        let task = Task::new(
            format!("d{case}"),
            CapabilityVector::new(vec![0.3, 0.7], &space).unwrap(),
        );
        let trust = HashMap::from([
            (AgentKind::Human, TrustEstimate::new(tau_h).unwrap()),
            (AgentKind::Robot, TrustEstimate::new(tau_r).unwrap()),
        ]);
        let counts = HashMap::new();
        let decision = allocate(&task, &trust, &params, &counts).unwrap();
        assert_eq!(
            decision.chosen,
            AgentKind::Robot,
            "case {case}: tau_h={tau_h} tau_r={tau_r} cost_h={cost_h} cost_r={cost_r}"
        );
    }
    let elapsed = start.elapsed();
    assert_budget("criterion 5", elapsed, Duration::from_secs(5));
    println!("[acceptance] criterion 5 (cheaper trusted robot dominates): PASS ({elapsed:?})");
}

/// A success never lowers any marginal mean and a failure never raises one,
/// across 1000 random product-form beliefs in both storage modes.
#[test]
fn criterion_6_marginal_mean_shift() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    for case in 0..1000 {
        let factored = case % 4 == 3;
        let n = if factored { 4 } else { 2 };
        let g = [11, 21, 41][case % 3];
        let space = CapabilitySpace::new(n, g).unwrap();

        // Dense product-form prior so both outcomes stay possible.
        let per_dim: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..g).map(|_| 0.01 + rng.random::<f64>()).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / s).collect()
            })
            .collect();
        let belief = if factored {
            CapabilityBelief::from_factored_weights(&space, per_dim.clone()).unwrap()
        } else {
            let mut joint = Vec::with_capacity(g * g);
            for a in &per_dim[0] {
                for b in &per_dim[1] {
                    joint.push(a * b);
                }
            }
            CapabilityBelief::from_joint_weights(&space, joint).unwrap()
        };

        let model = if case % 2 == 0 {
            SuccessModel::Step
        } else {
            SuccessModel::sigmoid(0.05 + rng.random::<f64>() * 0.45).unwrap()
        };
        let obs = Observation::new(
            CapabilityVector::new(
                (0..n).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect(),
                &space,
            )
            .unwrap(),
            if rng.random::<f64>() < 0.5 {
                Outcome::Success
            } else {
                Outcome::Failure
            },
        );

        let before: Vec<f64> = (0..n).map(|d| belief.marginal_mean(d).unwrap()).collect();
        let after_belief = update_belief(&belief, &obs, &model).unwrap();
        for (d, &was) in before.iter().enumerate() {
            let after = after_belief.marginal_mean(d).unwrap();
            match obs.outcome {
                Outcome::Success => assert!(
                    after >= was - 1e-9,
                    "case {case} dim {d}: success dropped mean {was} -> {after}"
                ),
                Outcome::Failure => assert!(
                    after <= was + 1e-9,
                    "case {case} dim {d}: failure raised mean {was} -> {after}"
                ),
            }
        }
    }
    let elapsed = start.elapsed();
    assert_budget("criterion 6", elapsed, Duration::from_secs(10));
    println!("[acceptance] criterion 6 (outcome shifts marginal means): PASS ({elapsed:?})");
}

fn learning_scenario(allocator: Allocator, seed: u64) -> Scenario {
    let space = CapabilitySpace::new(2, 41).unwrap();
    let agents = vec![
        GroundTruthAgent::new(
            AgentKind::Human,
            CapabilityVector::new(vec![0.9, 0.2], &space).unwrap(),
        ),
        GroundTruthAgent::new(
            AgentKind::Robot,
            CapabilityVector::new(vec![0.2, 0.9], &space).unwrap(),
        ),
    ];
    let stream = TaskStreamSpec {
        count: 500,
        distribution: RequirementDistribution::Uniform,
        seed: seed ^ 0x5bd1_e995,
    };
    Scenario::new(
        space,
        agents,
        stream,
        SuccessModel::Step,
        SuccessModel::sigmoid(0.05).unwrap(),
        test_reward_params(),
        allocator,
        seed,
    )
    .unwrap()
}

/// Trust-based allocation out-earns random allocation on 50-seed means, and
/// its regret against the omniscient allocator shrinks from the first 100
/// tasks to the last 100.
#[test]
fn criterion_7_learning_beats_random() {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..50).map(|i| 7000 + i).collect();

    let mut trust_total = 0.0;
    let mut random_total = 0.0;
    let mut early_regret = 0.0;
    let mut late_regret = 0.0;

    for &seed in &seeds {
        let trust_log = run_episode(&learning_scenario(Allocator::TrustBased, seed)).unwrap();
        let random_log = run_episode(&learning_scenario(Allocator::Random, seed)).unwrap();
        let oracle_log = run_episode(&learning_scenario(Allocator::Omniscient, seed)).unwrap();

        trust_total += trust_log.total_reward();
        random_total += random_log.total_reward();

        let window = |log: &EpisodeLog, range: std::ops::Range<usize>| -> f64 {
            log.records[range].iter().map(|r| r.realized_reward).sum()
        };
        early_regret += window(&oracle_log, 0..100) - window(&trust_log, 0..100);
        late_regret += window(&oracle_log, 400..500) - window(&trust_log, 400..500);
    }

    let n = seeds.len() as f64;
    let trust_mean = trust_total / n;
    let random_mean = random_total / n;
    let early_mean = early_regret / n;
    let late_mean = late_regret / n;

    assert!(
        trust_mean > random_mean,
        "trust-based mean {trust_mean} not above random mean {random_mean}"
    );
    assert!(
        late_mean < early_mean,
        "regret did not shrink: first-100 mean {early_mean}, last-100 mean {late_mean}"
    );
    let elapsed = start.elapsed();
    assert_budget("criterion 7", elapsed, Duration::from_secs(60));
    println!(
        "[acceptance] criterion 7 (learning beats random; regret shrinks): PASS \
         (trust {trust_mean:.2} vs random {random_mean:.2}; regret {early_mean:.2} -> {late_mean:.2}; {elapsed:?})"
    );
}

/// Repeating a scenario run produces byte-identical output tables.
#[test]
fn criterion_8_repeat_runs_byte_identical() {
    let start = Instant::now();
    let scenario = learning_scenario(Allocator::TrustBased, 8008);

    let render = || {
        let log = run_episode(&scenario).unwrap();
        (episode_log_csv(&log), episode_bounds_csv(&scenario, &log))
    };
    let (episode_a, bounds_a) = render();
    let (episode_b, bounds_b) = render();
    assert_eq!(episode_a.into_bytes(), episode_b.into_bytes());
    assert_eq!(bounds_a.into_bytes(), bounds_b.into_bytes());

    let elapsed = start.elapsed();
    assert_budget("criterion 8", elapsed, Duration::from_secs(10));
    println!("[acceptance] criterion 8 (repeat runs byte-identical): PASS ({elapsed:?})");
}
