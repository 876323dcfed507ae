use bayesel::applications::normal_toy_model;
use bayesel::estimating::ThetaSplit;
use bayesel::sampler::{two_step_mh, Proposal1, Proposal2, RunConfig, Scan};

const XS: [f64; 10] = [0.6, -1.3, 0.5, 1.9, -0.3, 0.8, 1.2, -0.7, 0.2, 1.4];

fn run(seed: u64, chain: u64) -> bayesel::sampler::Trace {
    let toy = normal_toy_model(&XS).unwrap();
    let q1 = Proposal1::random_walk(vec![0.4]);
    let q2 = Proposal2::TruncatedNormalAtMcele { scales: vec![0.4], lower_bounds: vec![0.0] };
    let init = ThetaSplit::new(vec![toy.mean()], vec![toy.variance()]).unwrap();
    let config = RunConfig { length: 3000, burn_in: 500, seed, chain, scan: Scan::default() };
    two_step_mh(&toy, init, &q1, &q2, &config).unwrap()
}

#[test]
fn rejected_steps_repeat_the_state() {
    let t = run(3, 0);
    assert_eq!(t.len(), 3000);
    assert!(t.log_posts.iter().all(|v| v.is_finite()));
    for k in 1..t.len() {
        if !t.accepted[k] {
            assert_eq!(t.states[k], t.states[k - 1]);
        }
    }
    let rate = t.acceptance_rate();
    assert!(rate > 0.05 && rate < 0.95, "{rate}");
}

#[test]
fn seed_and_stream_determine_the_chain() {
    assert_eq!(run(8, 0), run(8, 0));
    assert_ne!(run(8, 0).states, run(8, 1).states);
}

#[test]
fn states_stay_inside_the_feasible_region() {
    let toy = normal_toy_model(&XS).unwrap();
    for s in &run(5, 0).states {
        let (lo, hi) = toy.feasible_sigma2(s.theta1[0]).unwrap();
        assert!(s.theta2[0] > lo && s.theta2[0] < hi);
    }
}
