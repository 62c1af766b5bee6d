mod common;

use capflp::mechanisms::{Mechanism, MechanismId, MechanismSpec};
use capflp::model::{social_cost, validate_placement, AgentProfile, Objective, ProblemClass};
use capflp::ratios::{bound, RatioValue};
use capflp::solvers::optimal;
use capflp::Rational;
use common::*;
use proptest::prelude::*;

type Setting = (MechanismId, ProblemClass, usize);

fn equicap_setting() -> impl Strategy<Value = Setting> {
    (2..=4usize, 1..=3usize, any::<bool>()).prop_map(|(m, k, odd)| {
        let id = if odd { MechanismId::Pmm } else { MechanismId::Pipm };
        (id, ProblemClass::equicap(m, k).unwrap(), m * k)
    })
}

fn two_setting() -> impl Strategy<Value = Setting> {
    prop_oneof![
        (3..=9usize, 0..100usize, 0..100usize).prop_filter_map("capacities", |(n, a, b)| {
            let (c1, c2) = (n / 2 + a % (n - n / 2), n / 2 + b % (n - n / 2));
            let class = ProblemClass::two(c1, c2).ok()?;
            class.check_n(n).ok()?;
            Some((MechanismId::Eig, class, n))
        }),
        (1..=4usize).prop_map(|k| (MechanismId::Ic, ProblemClass::two(k + 1, k).unwrap(), 2 * k + 1)),
        (3..=9usize, 0..100usize).prop_map(|(n, a)| {
            let c = n.div_ceil(2) + a % (n - n.div_ceil(2));
            (MechanismId::Ig, ProblemClass::two(c, c).unwrap(), n)
        }),
        (1..=4usize).prop_map(|k| (MechanismId::Im, ProblemClass::two(k, k).unwrap(), 2 * k)),
    ]
}

fn setting() -> impl Strategy<Value = Setting> {
    prop_oneof![equicap_setting(), two_setting()]
}

/// Reports on a grid of eighths, so ties are common.
fn reports(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((-40i128..=40).prop_map(|v| Rational::new(v, 8)), n)
}

fn with_reports(settings: impl Strategy<Value = Setting>) -> impl Strategy<Value = (Setting, Vec<Rational>)> {
    settings.prop_flat_map(|s| {
        let n = s.2;
        (Just(s), reports(n))
    })
}

fn case() -> impl Strategy<Value = (Setting, Vec<Rational>)> {
    with_reports(setting())
}

fn spec(setting: &Setting) -> MechanismSpec {
    MechanismSpec::new(setting.0.clone(), setting.1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn placements_are_feasible_and_ordered((setting, xs) in case()) {
        let profile = AgentProfile::from_unsorted(&xs).unwrap();
        let placement = spec(&setting).run(&profile).unwrap();
        prop_assert!(validate_placement(&setting.1, &profile, &placement).is_empty());
        prop_assert!(placement.y.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(placement.mu.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn affine_equivariance((setting, xs) in case(), a in 1i128..=6, d in 1i128..=3, b in -10i128..=10) {
        let s = spec(&setting);
        let profile = AgentProfile::from_unsorted(&xs).unwrap();
        let (scale, shift) = (Rational::new(a, d), int(b));
        let moved = s.run(&profile.affine(&scale, &shift)).unwrap();
        let base = s.run(&profile).unwrap();
        let expected: Vec<_> = base.y.iter().map(|y| scale * *y + shift).collect();
        prop_assert_eq!(moved.y, expected);
        prop_assert_eq!(moved.mu, base.mu);
        prop_assert_eq!(moved.pi, base.pi);
    }

    #[test]
    fn anonymity((setting, xs) in case(), seed in any::<u64>()) {
        let s = spec(&setting);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut rng = Sampler::new(seed);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.below(i + 1));
        }
        let shuffled: Vec<_> = order.iter().map(|&i| xs[i]).collect();
        let base = agent_costs(&s, &xs);
        let costs = agent_costs(&s, &shuffled);
        for (slot, &i) in order.iter().enumerate() {
            prop_assert_eq!(costs[slot], base[i]);
        }
    }

    #[test]
    fn two_facility_agents_use_a_closest_facility((setting, xs) in with_reports(two_setting())) {
        let profile = AgentProfile::from_unsorted(&xs).unwrap();
        let placement = spec(&setting).run(&profile).unwrap();
        for (x, &j) in profile.positions().iter().zip(&placement.mu) {
            prop_assert!((*x - placement.y[j]).abs() <= (*x - placement.y[1 - j]).abs());
        }
    }

    #[test]
    fn structured_optimum_matches_assignments((setting, xs) in case().prop_filter("small", |(s, _)| s.2 <= 8)) {
        let profile = AgentProfile::from_unsorted(&xs).unwrap();
        for objective in [Objective::Sc, Objective::Mc] {
            let opt = optimal(&profile, &setting.1, objective).unwrap();
            prop_assert_eq!(opt.cost, assignment_opt(&xs, &setting.1.capacities(), objective));
            prop_assert_eq!(opt.cost, contiguous_opt(&xs, &setting.1, objective));
        }
    }

    #[test]
    fn ratios_respect_bounds((setting, xs) in case()) {
        let s = spec(&setting);
        let profile = AgentProfile::from_unsorted(&xs).unwrap();
        let costs = social_cost(&profile, &s.run(&profile).unwrap()).unwrap();
        for objective in [Objective::Sc, Objective::Mc] {
            let limit = bound(&setting.0, &setting.1, setting.2, objective).unwrap().value;
            let ratio = RatioValue::of(objective.pick(&costs), contiguous_opt(&xs, &setting.1, objective));
            prop_assert!(!ratio.exceeds(limit), "{} {objective}: {ratio} > {limit}", s);
        }
    }

    #[test]
    fn float_path_agrees((setting, xs) in case()) {
        let s = spec(&setting);
        let profile = AgentProfile::from_unsorted(&xs).unwrap();
        let exact = s.run(&profile).unwrap();
        let float = s.run(&profile.to_f64()).unwrap();
        prop_assert_eq!(&exact.mu, &float.mu);
        for (a, b) in exact.y.iter().zip(&float.y) {
            prop_assert!((a.to_f64() - b).abs() < 1e-9);
        }
    }

    #[test]
    fn special_cases_coincide_with_eig(k in 1usize..=5, extra in 0usize..=1, xs in reports(12)) {
        let ic_n = 2 * k + 1;
        let eig = MechanismSpec::new(MechanismId::Eig, ProblemClass::two(k + 1, k).unwrap()).unwrap();
        let ic = MechanismSpec::new(MechanismId::Ic, ProblemClass::two(k + 1, k).unwrap()).unwrap();
        prop_assert_eq!(agent_costs(&eig, &xs[..ic_n]), agent_costs(&ic, &xs[..ic_n]));

        let equal = ProblemClass::two(k + 1, k + 1).unwrap();
        let n = 2 * k + 1 + extra;
        let eig = MechanismSpec::new(MechanismId::Eig, equal).unwrap();
        let ig = MechanismSpec::new(MechanismId::Ig, equal).unwrap();
        prop_assert_eq!(agent_costs(&eig, &xs[..n]), agent_costs(&ig, &xs[..n]));

        let im = MechanismSpec::new(MechanismId::Im, equal).unwrap();
        let n = 2 * (k + 1);
        prop_assert_eq!(agent_costs(&ig, &xs[..n]), im.agent_costs(&xs[..n], &xs[..n]).unwrap());
    }
}
