//! Acceptance suite: ten end-to-end criteria, one test each. Every test
//! prints a `criterion N (<name>): PASS` line (visible with
//! `cargo test --test acceptance -- --nocapture`) and fails loudly otherwise.

use cloudtrack::association::{associate, hungarian, AssociationConfig, TrackFeatures};
use cloudtrack::classification::{ClassBelief, ClassId, NoisyOracleConfig};
use cloudtrack::config::{ClassifierConfig, PipelineConfig};
use cloudtrack::evaluation::energy_ratio;
use cloudtrack::fusion::fuse;
use cloudtrack::geometry::{bev_iou, OrientedBox};
use cloudtrack::lifecycle::{
    step_accurate, step_efficient, AccurateInput, EfficientInput, LifecycleState, Mode,
    ACCURATE_INPUTS, ACCURATE_STATES, EFFICIENT_INPUTS, EFFICIENT_STATES,
};
use cloudtrack::pipeline::{run, SequenceData};
use cloudtrack::scene_io::{ObjectSpec, SyntheticScenario};
use cloudtrack::segmentation::Proposal;
use cloudtrack::tracking::{
    initialize, min_eigenvalue, motion_jacobian, predict, update, NoiseConfig, Observation,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn pass(n: u32, name: &str) {
    println!("criterion {n} ({name}): PASS");
}

// ---------------------------------------------------------------------------
// 1. Efficiency law: beta = 1/L exactly for objects alive exactly L frames.
// ---------------------------------------------------------------------------

fn ring_scenario(duration: usize, seed: u64) -> SyntheticScenario {
    let objects = (0..8)
        .map(|k| {
            let angle = k as f64 * std::f64::consts::TAU / 8.0;
            ObjectSpec {
                class: ClassId::Car,
                size: [4.2, 1.8, 1.5],
                spawn: 0,
                despawn: duration,
                velocity: [0.0, 0.0],
                initial_pose: [12.0 * angle.cos(), 12.0 * angle.sin(), angle + 2.0],
            }
        })
        .collect();
    SyntheticScenario {
        duration_frames: duration,
        ground_extent: 30.0,
        ground_spacing: 1.0,
        sensor_range: 60.0,
        noise_std: 0.02,
        frame_dt: 0.1,
        surface_density: 40.0,
        seed,
        objects,
    }
}

#[test]
fn criterion_1_efficiency_law() {
    let t0 = Instant::now();
    for lifespan in [10usize, 30, 50] {
        let data = SequenceData::from_scenario(&ring_scenario(lifespan, 100 + lifespan as u64))
            .unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.mode = Mode::Efficient;
        cfg.ideal_detector = true;
        cfg.ideal_tracker = true;
        let out = run(&cfg, &data).unwrap();
        let calls = out.report.classifier_calls;
        let baseline = out.report.baseline_classifier_calls;
        assert_eq!(baseline, 8 * lifespan as u64, "L={lifespan}");
        // beta = 1/L exactly, as an integer identity
        assert_eq!(
            calls * lifespan as u64,
            baseline,
            "L={lifespan}: calls={calls}, baseline={baseline}"
        );
    }
    assert!(t0.elapsed().as_secs_f64() < 10.0, "runtime budget exceeded");
    pass(1, "efficiency law beta = 1/L");
}

// ---------------------------------------------------------------------------
// 2. Energy model.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_energy_model() {
    // a = 100, N_obj + N_bg = 20, N_go = 10 -> 2001/201
    let gamma = energy_ratio(1.0, 100.0, 1, 20, 10).unwrap();
    assert!((gamma - 2001.0 / 201.0).abs() < 1e-12, "gamma = {gamma}");

    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..1000 {
        let n_go = rng.gen_range(1u64..40);
        let gamma = energy_ratio(
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.0..500.0),
            rng.gen_range(1u64..200),
            rng.gen_range(0u64..100),
            n_go,
        )
        .unwrap();
        assert!(gamma >= 1.0 - 1e-12 && gamma <= n_go as f64 + 1e-12, "gamma = {gamma}");
    }
    // asymptote: classification dominating -> gamma within 5% of N_go
    for _ in 0..200 {
        let n_go = rng.gen_range(1u64..30);
        let e_seg = rng.gen_range(0.5..2.0);
        let regions = rng.gen_range(1u64..50);
        // choose e_class so that regions * a >= 100 * n_go
        let a_min = 100.0 * n_go as f64 / regions as f64;
        let e_class = e_seg * a_min * rng.gen_range(1.0..5.0);
        let gamma = energy_ratio(e_seg, e_class, rng.gen_range(1u64..100), regions, n_go).unwrap();
        let rel = (gamma - n_go as f64).abs() / n_go as f64;
        assert!(rel < 0.05, "gamma={gamma}, n_go={n_go}, rel={rel}");
    }
    pass(2, "energy model gamma");
}

// ---------------------------------------------------------------------------
// 3. Hungarian optimality against the permutation oracle.
// ---------------------------------------------------------------------------

fn brute_force_min_cost(costs: &[Vec<f64>]) -> f64 {
    let rows = costs.len();
    let cols = costs[0].len();
    if rows > cols {
        let t: Vec<Vec<f64>> = (0..cols)
            .map(|j| (0..rows).map(|i| costs[i][j]).collect())
            .collect();
        return brute_force_min_cost(&t);
    }
    fn rec(costs: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == costs.len() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        for col in 0..costs[0].len() {
            if !used[col] {
                used[col] = true;
                rec(costs, row + 1, used, acc + costs[row][col], best);
                used[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(costs, 0, &mut vec![false; cols], 0.0, &mut best);
    best
}

#[test]
fn criterion_3_hungarian_optimality() {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    for case in 0..1000 {
        let rows = rng.gen_range(1..=7);
        let cols = rng.gen_range(1..=7);
        let costs: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let pairs = hungarian(&costs);
        let got: f64 = pairs.iter().map(|&(r, c)| costs[r][c]).sum();
        let want = brute_force_min_cost(&costs);
        assert!(
            (got - want).abs() < 1e-9,
            "case {case}: {rows}x{cols} got {got}, want {want}"
        );
    }
    assert!(t0.elapsed().as_secs_f64() < 5.0, "runtime budget exceeded");
    pass(3, "hungarian matches permutation oracle");
}

// ---------------------------------------------------------------------------
// 4. Oriented BEV IoU against a Monte-Carlo oracle.
// ---------------------------------------------------------------------------

fn mc_iou(a: &OrientedBox, b: &OrientedBox, samples: usize, rng: &mut StdRng) -> f64 {
    let ca = a.bev_corners();
    let cb = b.bev_corners();
    let xs = ca.iter().chain(cb.iter()).map(|p| p[0]);
    let ys = ca.iter().chain(cb.iter()).map(|p| p[1]);
    let (xmin, xmax) = (
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let (ymin, ymax) = (
        ys.clone().fold(f64::INFINITY, f64::min),
        ys.fold(f64::NEG_INFINITY, f64::max),
    );
    let mut inter = 0usize;
    let mut union = 0usize;
    for _ in 0..samples {
        let x = rng.gen_range(xmin..xmax);
        let y = rng.gen_range(ymin..ymax);
        let ia = a.contains_bev(x, y);
        let ib = b.contains_bev(x, y);
        if ia && ib {
            inter += 1;
        }
        if ia || ib {
            union += 1;
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[test]
fn criterion_4_bev_iou() {
    let mut rng = StdRng::seed_from_u64(4);
    for case in 0..100 {
        let mk = |rng: &mut StdRng| OrientedBox {
            x: rng.gen_range(-2.0..2.0),
            y: rng.gen_range(-2.0..2.0),
            z: 0.5,
            l: rng.gen_range(0.5..3.0),
            w: rng.gen_range(0.5..3.0),
            h: 1.0,
            yaw: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        let exact = bev_iou(&a, &b);
        let mc = mc_iou(&a, &b, 1_000_000, &mut rng);
        assert!(
            (exact - mc).abs() < 1e-2,
            "case {case}: exact {exact} vs MC {mc}"
        );
    }
    let unit = OrientedBox {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        l: 1.0,
        w: 1.0,
        h: 1.0,
        yaw: 0.0,
    };
    assert!((bev_iou(&unit, &unit) - 1.0).abs() < 1e-9);
    let shifted = OrientedBox { x: 0.5, ..unit };
    assert!((bev_iou(&unit, &shifted) - 1.0 / 3.0).abs() < 1e-9);
    pass(4, "oriented BEV IoU");
}

// ---------------------------------------------------------------------------
// 5. Fusion convergence and invariants.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_fusion_convergence() {
    let like = ClassBelief::new([0.15, 0.55, 0.15, 0.15]);
    let mut posterior = ClassBelief::uniform();
    for _ in 0..10 {
        let (next, degenerate) = fuse(&posterior, &like);
        assert!(!degenerate);
        posterior = next;
    }
    let p = posterior.prob(ClassId::Car);
    assert!(p > 0.999, "p = {p}");
    assert!(1.0 - p < 1e-5, "residual = {}", 1.0 - p);

    let mut rng = StdRng::seed_from_u64(5);
    let random_belief = |rng: &mut StdRng| {
        let mut v = [0.0f64; 4];
        let mut sum = 0.0;
        for x in v.iter_mut() {
            *x = rng.gen_range(0.01..1.0);
            sum += *x;
        }
        for x in v.iter_mut() {
            *x /= sum;
        }
        ClassBelief::new(v)
    };
    for _ in 0..10_000 {
        let a = random_belief(&mut rng);
        let b = random_belief(&mut rng);
        let c = random_belief(&mut rng);
        let prior = ClassBelief::uniform();
        let (ab, _) = fuse(&fuse(&prior, &a).0, &b);
        let (abc1, _) = fuse(&ab, &c);
        let (ac, _) = fuse(&fuse(&prior, &c).0, &a);
        let (abc2, _) = fuse(&ac, &b);
        let mut max_diff = 0.0f64;
        let mut sum = 0.0;
        for i in 0..4 {
            max_diff = max_diff.max((abc1.probs[i] - abc2.probs[i]).abs());
            sum += abc1.probs[i];
        }
        assert!(max_diff < 1e-9, "order variance {max_diff}");
        assert!((sum - 1.0).abs() < 1e-9, "not normalized: {sum}");
    }
    pass(5, "fusion convergence and invariants");
}

// ---------------------------------------------------------------------------
// Benchmark scenario shared by criteria 6 and 9: objects approach from far
// away so the distance-decayed oracle starts near-uniform and sharpens.
// ---------------------------------------------------------------------------

fn benchmark_scenario(seed: u64) -> SyntheticScenario {
    let toward_origin = |x: f64, y: f64, speed: f64| {
        let d = x.hypot(y);
        [-x / d * speed, -y / d * speed]
    };
    let objects = vec![
        ObjectSpec {
            class: ClassId::Car,
            size: [4.2, 1.8, 1.5],
            spawn: 0,
            despawn: 100,
            velocity: toward_origin(42.0, 5.0, 3.0),
            initial_pose: [42.0, 5.0, 0.7],
        },
        ObjectSpec {
            class: ClassId::Car,
            size: [4.5, 1.9, 1.4],
            spawn: 0,
            despawn: 100,
            velocity: toward_origin(-40.0, -10.0, 3.0),
            initial_pose: [-40.0, -10.0, 2.2],
        },
        ObjectSpec {
            class: ClassId::Pedestrian,
            size: [0.6, 0.6, 1.75],
            spawn: 0,
            despawn: 100,
            velocity: toward_origin(28.0, 20.0, 2.0),
            initial_pose: [28.0, 20.0, 0.9],
        },
        ObjectSpec {
            class: ClassId::Pedestrian,
            size: [0.6, 0.6, 1.7],
            spawn: 0,
            despawn: 100,
            velocity: toward_origin(-26.0, 22.0, 2.0),
            initial_pose: [-26.0, 22.0, 2.4],
        },
        ObjectSpec {
            class: ClassId::Cyclist,
            size: [1.8, 0.6, 1.6],
            spawn: 0,
            despawn: 100,
            velocity: toward_origin(2.0, 40.0, 2.5),
            initial_pose: [2.0, 40.0, -1.1],
        },
        ObjectSpec {
            class: ClassId::Cyclist,
            size: [1.7, 0.6, 1.7],
            spawn: 0,
            despawn: 100,
            velocity: toward_origin(-25.0, -28.0, 2.5),
            initial_pose: [-25.0, -28.0, 0.6],
        },
    ];
    SyntheticScenario {
        duration_frames: 100,
        ground_extent: 45.0,
        ground_spacing: 1.0,
        sensor_range: 60.0,
        noise_std: 0.02,
        frame_dt: 0.1,
        surface_density: 40.0,
        seed,
        objects,
    }
}

/// Pedestrian gets the weakest confusion row, mirroring the hardest class.
fn benchmark_oracle() -> NoisyOracleConfig {
    NoisyOracleConfig {
        confusion: [
            [0.85, 0.05, 0.05, 0.05],
            [0.05, 0.85, 0.05, 0.05],
            [0.15, 0.15, 0.55, 0.15],
            [0.07, 0.08, 0.10, 0.75],
        ],
        peak_confidence: 0.60,
        distance_decay: 0.03,
        reference_range: 10.0,
        seed: 1234,
    }
}

fn benchmark_config(mode: Mode) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.mode = mode;
    cfg.ideal_detector = true;
    cfg.ideal_tracker = true;
    cfg.roi_range = 55.0;
    cfg.classifier = ClassifierConfig::Noisy(benchmark_oracle());
    cfg
}

// ---------------------------------------------------------------------------
// 6. Accuracy improvement direction: accurate >= det_only per class.
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_accuracy_direction() {
    let t0 = Instant::now();
    let data = SequenceData::from_scenario(&benchmark_scenario(6)).unwrap();
    let det = run(&benchmark_config(Mode::DetOnly), &data).unwrap();
    let acc = run(&benchmark_config(Mode::Accurate), &data).unwrap();
    for class in ["car", "pedestrian", "cyclist"] {
        let d = det.report.per_class_ap.get(class).copied().unwrap_or(0.0);
        let a = acc.report.per_class_ap.get(class).copied().unwrap_or(0.0);
        assert!(
            a >= d - 1e-9,
            "{class}: accurate {a} < det_only {d}"
        );
    }
    // strict improvement for the weakest confusion row (pedestrian)
    let d = det.report.per_class_ap["pedestrian"];
    let a = acc.report.per_class_ap["pedestrian"];
    assert!(a > d + 0.01, "pedestrian: accurate {a} not above det_only {d}");
    assert!(t0.elapsed().as_secs_f64() < 60.0, "runtime budget exceeded");
    pass(6, "accuracy improvement direction");
}

// ---------------------------------------------------------------------------
// 7. EKF: Jacobian, zero-noise tracking, covariance PSD.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_ekf() {
    let mut rng = StdRng::seed_from_u64(7);
    // analytic Jacobian vs central finite differences
    for _ in 0..1000 {
        let noise = NoiseConfig::default();
        let mut st = initialize(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), &noise);
        st.theta = rng.gen_range(-3.0..3.0);
        st.v = rng.gen_range(0.0..20.0);
        let dt = rng.gen_range(0.01..0.5);
        let jac = motion_jacobian(&st, dt);
        let f = |s: &cloudtrack::tracking::TrackState| {
            [
                s.x + dt * s.theta.cos() * s.v,
                s.y + dt * s.theta.sin() * s.v,
                s.theta,
                s.v,
            ]
        };
        let eps = 1e-6;
        for col in 0..4 {
            let mut plus = st.clone();
            let mut minus = st.clone();
            match col {
                0 => {
                    plus.x += eps;
                    minus.x -= eps;
                }
                1 => {
                    plus.y += eps;
                    minus.y -= eps;
                }
                2 => {
                    plus.theta += eps;
                    minus.theta -= eps;
                }
                _ => {
                    plus.v += eps;
                    minus.v -= eps;
                }
            }
            let fp = f(&plus);
            let fm = f(&minus);
            for row in 0..4 {
                let fd = (fp[row] - fm[row]) / (2.0 * eps);
                let an = jac[(row, col)];
                let scale = an.abs().max(1.0);
                assert!(
                    (fd - an).abs() / scale < 1e-6,
                    "jacobian ({row},{col}): fd {fd} vs analytic {an}"
                );
            }
        }
    }

    // zero-noise limit: constant-velocity target to < 1e-6 m
    let noise = NoiseConfig {
        q: [1e-10; 4],
        r: [1e-16; 2],
        p0: [0.25, 0.25, 2.4, 4.0],
        dt: 0.1,
    };
    let (speed, heading) = (2.0, 0.3);
    let truth = |k: usize| {
        let t = k as f64 * 0.1;
        (5.0 + t * speed * f64::cos(heading), 1.0 + t * speed * f64::sin(heading))
    };
    let (x0, y0) = truth(0);
    let mut st = initialize(x0, y0, &noise);
    for k in 1..=100 {
        st = predict(&st, 0.1, &noise);
        let (tx, ty) = truth(k);
        st = update(&st, &Observation { x: tx, y: ty }, &noise).unwrap();
    }
    let (tx, ty) = truth(100);
    let err = (st.x - tx).hypot(st.y - ty);
    assert!(err < 1e-6, "tracking error {err}");

    // covariance stays PSD through 1000 cycles
    let noise = NoiseConfig::default();
    let mut st = initialize(0.0, 0.0, &noise);
    for k in 0..1000 {
        st = predict(&st, 0.1, &noise);
        let obs = Observation {
            x: st.x + rng.gen_range(-0.5..0.5),
            y: st.y + rng.gen_range(-0.5..0.5),
        };
        st = update(&st, &obs, &noise).unwrap();
        assert!(
            min_eigenvalue(&st.cov) > -1e-9,
            "covariance lost PSD at cycle {k}"
        );
    }
    pass(7, "EKF jacobian, convergence, PSD");
}

// ---------------------------------------------------------------------------
// 8. FSM conformance: full transition tables and scripted traces.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_fsm_conformance() {
    use AccurateInput as A;
    use EfficientInput as E;
    use LifecycleState as S;

    let efficient_table: &[(S, E, S)] = &[
        (S::NewProposal, E::A1, S::MatchedProposal),
        (S::NewProposal, E::A2, S::UnmatchedProposal),
        (S::UnmatchedProposal, E::A3, S::Tracked),
        (S::MatchedProposal, E::A4, S::Tracked),
        (S::MatchedProposal, E::A5, S::Tracked),
        (S::Tracked, E::A4, S::Tracked),
        (S::Tracked, E::A5, S::Tracked),
        (S::Tracked, E::A6, S::Lost),
        (S::Lost, E::A7, S::Tracked),
        (S::Lost, E::A8, S::Lost),
        (S::Lost, E::A9, S::Deleted),
    ];
    for s in EFFICIENT_STATES {
        for i in EFFICIENT_INPUTS {
            let expected = efficient_table
                .iter()
                .find(|(fs, fi, _)| *fs == s && *fi == i)
                .map(|(_, _, t)| *t);
            assert_eq!(
                step_efficient(s, i).ok(),
                expected,
                "efficient ({s:?}, {i:?})"
            );
        }
    }

    let accurate_table: &[(S, A, S)] = &[
        (S::NewProposal, A::A1, S::MatchedProposal),
        (S::NewProposal, A::A2, S::UnmatchedProposal),
        (S::UnmatchedProposal, A::A3, S::TrackedUnclassified),
        (S::UnmatchedProposal, A::A4, S::TrackedClassified),
        (S::MatchedProposal, A::A5, S::TrackedUnclassified),
        (S::MatchedProposal, A::A6, S::TrackedClassified),
        (S::TrackedClassified, A::A7, S::TrackedClassified),
        (S::TrackedUnclassified, A::A8, S::TrackedClassified),
        (S::TrackedUnclassified, A::A9, S::TrackedUnclassified),
        (S::TrackedClassified, A::A10, S::LostClassified),
        (S::LostClassified, A::A10, S::LostClassified),
        (S::LostClassified, A::A11, S::TrackedClassified),
        (S::TrackedUnclassified, A::A12, S::LostUnclassified),
        (S::LostUnclassified, A::A12, S::LostUnclassified),
        (S::LostUnclassified, A::A13, S::TrackedUnclassified),
        (S::LostClassified, A::A14, S::Deleted),
        (S::LostUnclassified, A::A14, S::Deleted),
    ];
    for s in ACCURATE_STATES {
        for i in ACCURATE_INPUTS {
            let expected = accurate_table
                .iter()
                .find(|(fs, fi, _)| *fs == s && *fi == i)
                .map(|(_, _, t)| *t);
            assert_eq!(step_accurate(s, i).ok(), expected, "accurate ({s:?}, {i:?})");
        }
    }

    // Deleted absorbing
    for i in EFFICIENT_INPUTS {
        assert!(step_efficient(S::Deleted, i).is_err());
    }
    for i in ACCURATE_INPUTS {
        assert!(step_accurate(S::Deleted, i).is_err());
    }

    // scripted traces, N = 3
    let walk = |inputs: &[E]| -> Vec<S> {
        let mut s = S::NewProposal;
        let mut out = vec![s];
        for &i in inputs {
            s = step_efficient(s, i).unwrap();
            out.push(s);
        }
        out
    };
    // cold start
    assert_eq!(
        walk(&[E::A2, E::A3]),
        vec![S::NewProposal, S::UnmatchedProposal, S::Tracked]
    );
    // occlusion of N-1 frames then recovery
    assert_eq!(
        walk(&[E::A2, E::A3, E::A6, E::A8, E::A7]),
        vec![
            S::NewProposal,
            S::UnmatchedProposal,
            S::Tracked,
            S::Lost,
            S::Lost,
            S::Tracked
        ]
    );
    // occlusion of N frames then deletion
    assert_eq!(
        walk(&[E::A2, E::A3, E::A6, E::A8, E::A8, E::A9]),
        vec![
            S::NewProposal,
            S::UnmatchedProposal,
            S::Tracked,
            S::Lost,
            S::Lost,
            S::Lost,
            S::Deleted
        ]
    );
    pass(8, "FSM conformance");
}

// ---------------------------------------------------------------------------
// 9. Classifier-call accounting across modes.
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_classifier_call_accounting() {
    let data = SequenceData::from_scenario(&benchmark_scenario(9)).unwrap();

    // efficient with ideal association: births-only
    let eff = run(&benchmark_config(Mode::Efficient), &data).unwrap();
    assert_eq!(
        eff.report.classifier_calls, eff.report.tracks_born as u64,
        "efficient mode must classify exactly once per birth"
    );

    // det_only: sum of proposal counts
    let det = run(&benchmark_config(Mode::DetOnly), &data).unwrap();
    assert_eq!(
        det.report.classifier_calls, det.report.baseline_classifier_calls,
        "det_only must classify every proposal"
    );

    // accurate: births + keyframes
    let acc = run(&benchmark_config(Mode::Accurate), &data).unwrap();
    let births = acc.report.tracks_born as u64;
    let keyframes: u64 = acc
        .world
        .all_tracks()
        .map(|t| t.fusion.as_ref().map(|f| f.keyframes.len() as u64).unwrap_or(0))
        .sum();
    assert_eq!(
        acc.report.classifier_calls,
        births + keyframes,
        "accurate-mode calls must be births + keyframes"
    );

    // mean keyframes per long-lived track ~ 10 +/- 5
    let long_lived: Vec<u64> = acc
        .world
        .all_tracks()
        .filter(|t| t.lifespan_frames() >= 50)
        .map(|t| t.fusion.as_ref().map(|f| f.keyframes.len() as u64).unwrap_or(0))
        .collect();
    assert!(!long_lived.is_empty(), "benchmark produced no long-lived tracks");
    let mean = long_lived.iter().sum::<u64>() as f64 / long_lived.len() as f64;
    assert!(
        (5.0..=15.0).contains(&mean),
        "mean keyframes per long-lived track = {mean}, want 10 +/- 5"
    );
    pass(9, "classifier-call accounting");
}

// ---------------------------------------------------------------------------
// 10. Optional, data-gated KITTI checks.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_kitti_optional() {
    let dir = match std::env::var("KITTI_SEQ_DIR") {
        Ok(d) if std::path::Path::new(&d).is_dir() => std::path::PathBuf::from(d),
        _ => {
            println!("criterion 10 (KITTI data-gated): SKIP (data not present)");
            return;
        }
    };
    let data = SequenceData::from_directory(&dir, 0.1).unwrap();
    assert!(!data.ground_truth.is_empty(), "KITTI labels missing");

    // ground-truth lifespan N_go = 32.4 +/- 0.1
    let mut spans: std::collections::BTreeMap<i64, (usize, usize)> = std::collections::BTreeMap::new();
    for gt in &data.ground_truth {
        let e = spans
            .entry(gt.track_id)
            .or_insert((gt.frame_index, gt.frame_index));
        e.0 = e.0.min(gt.frame_index);
        e.1 = e.1.max(gt.frame_index);
    }
    let mean = spans
        .values()
        .map(|(a, b)| (b - a + 1) as f64)
        .sum::<f64>()
        / spans.len() as f64;
    assert!((mean - 32.4).abs() <= 0.1, "N_go = {mean}");

    // ideal-detector/ideal-tracker beta at 70 m
    let mut cfg = PipelineConfig::default();
    cfg.mode = Mode::Efficient;
    cfg.ideal_detector = true;
    cfg.ideal_tracker = true;
    cfg.roi_range = 70.0;
    let out = run(&cfg, &data).unwrap();
    let beta = out.report.efficiency_ratio.expect("beta undefined");
    assert!((0.01..=0.05).contains(&beta), "beta = {beta}");
    pass(10, "KITTI data-gated checks");
}

// ---------------------------------------------------------------------------
// Association sanity used by several criteria paths: the gate demotes bad
// pairs (kept here so the acceptance target exercises the public API).
// ---------------------------------------------------------------------------

#[test]
fn association_gate_demotes_expensive_pairs() {
    let far_box = OrientedBox {
        x: 100.0,
        y: 100.0,
        z: 0.5,
        l: 4.0,
        w: 2.0,
        h: 1.5,
        yaw: 0.0,
    };
    let prop = Proposal {
        bbox: OrientedBox {
            x: 0.0,
            y: 0.0,
            z: 0.5,
            l: 4.0,
            w: 2.0,
            h: 1.5,
            yaw: 0.0,
        },
        centroid: [0.0, 0.0, 0.5],
        point_count: 50,
        points: vec![],
    };
    let track = TrackFeatures {
        bbox: far_box,
        point_count: 50,
    };
    let res = associate(&[prop], &[track], &AssociationConfig::default());
    assert!(res.matches.is_empty());
    assert_eq!(res.unmatched_proposals, vec![0]);
    assert_eq!(res.unmatched_tracks, vec![0]);
}
