mod common;

use lfo_core::kinematics::Interval;
use lfo_core::laban::{self, ConstraintStrength, LabanDirection, LabanError, LabanPose};
use lfo_core::taxonomy::{self, ContactModel, DisplacementType};
use lfo_core::taskir::TaskKind;
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::Rng;

use common::*;

/// Index of the canonical vector with the largest cosine, lowest index on ties.
fn argmax_oracle(v: &Vector3<f64>) -> usize {
    let u = v.normalize();
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..26 {
        let c = LabanDirection::from_index(i).unwrap().unit_vector().dot(&u);
        if c > best.0 {
            best = (c, i);
        }
    }
    best.1
}

#[test]
fn quantize_examples() {
    assert_eq!(LabanDirection::quantize(&Vector3::z()).unwrap().name(), "place_high");
    assert_eq!(LabanDirection::quantize(&Vector3::x()).unwrap().name(), "forward_middle");
    let v = Vector3::new(0.7, 0.65, 0.05).normalize();
    assert_eq!(LabanDirection::quantize(&v).unwrap().index(), argmax_oracle(&v));
    assert!(matches!(LabanDirection::quantize(&Vector3::zeros()), Err(LabanError::ZeroVector)));
}

#[test]
fn quantize_agrees_with_exhaustive_argmax() {
    let mut rng = rng(26);
    for _ in 0..10_000 {
        let v = random_unit(&mut rng);
        assert_eq!(LabanDirection::quantize(&v).unwrap().index(), argmax_oracle(&v));
    }
}

#[test]
fn canonical_vectors_are_fixed_points() {
    for d in LabanDirection::all() {
        assert_eq!(LabanDirection::quantize(&d.unit_vector()).unwrap(), d);
    }
}

fn pose(upper: &str, lower: &str) -> LabanPose {
    LabanPose { upper_arm: upper.parse().unwrap(), lower_arm: lower.parse().unwrap() }
}

#[test]
fn joint_range_examples() {
    let p = pose("forward_high", "right_middle");
    for m in bundled_models() {
        assert_eq!(laban::joint_ranges(&m, &p, ConstraintStrength::None).unwrap(), m.hard_limits());
    }

    let f = fetch();
    let hard = f.hard_limits();
    let mut rng = rng(4);
    let calibrated: Vec<LabanPose> = (0..200)
        .map(|_| LabanPose {
            upper_arm: LabanDirection::from_index(rng.gen_range(0..26)).unwrap(),
            lower_arm: LabanDirection::from_index(rng.gen_range(0..26)).unwrap(),
        })
        .filter(|p| laban::joint_ranges(&f, p, ConstraintStrength::Full).is_ok())
        .collect();
    assert!(calibrated.len() > 100);
    for p in calibrated {
        let r = laban::joint_ranges(&f, &p, ConstraintStrength::Full).unwrap();
        let narrowed = r.iter().zip(&hard).filter(|(a, b)| a != b).count();
        assert_eq!(narrowed, 4, "{p:?}");
    }

    let n = nextage();
    let r = laban::joint_ranges(&n, &p, ConstraintStrength::Elbow).unwrap();
    let e = n.elbow_index().unwrap();
    let hard = n.hard_limits();
    assert_eq!(r[e], Interval::new(0.0, hard[e].hi));
    assert!((0..n.dof()).filter(|&i| i != e).all(|i| r[i] == hard[i]));
}

#[test]
fn missing_entry_names_the_pair() {
    let n = nextage();
    let missing = LabanDirection::all()
        .find(|d| n.laban_table().get(laban::Limb::LowerArm, *d).is_none())
        .unwrap();
    let p = LabanPose { upper_arm: "forward_high".parse().unwrap(), lower_arm: missing };
    match laban::joint_ranges(&n, &p, ConstraintStrength::Full) {
        Err(LabanError::MissingTableEntry { limb, direction }) => {
            assert_eq!(limb, laban::Limb::LowerArm);
            assert_eq!(direction, missing);
        }
        other => panic!("expected MissingTableEntry, got {other:?}"),
    }
}

#[test]
fn default_strength_follows_degrees_of_freedom() {
    assert_eq!(ConstraintStrength::default_for(&nextage()), ConstraintStrength::Elbow);
    assert_eq!(ConstraintStrength::default_for(&fetch()), ConstraintStrength::Full);
}

#[test]
fn classification_examples_match_the_sampling_oracle() {
    let mut rng = rng(8);
    let x = Vector3::x();
    let z = Vector3::z();
    for (normals, want) in [
        (vec![], DisplacementType::FullSpace),
        (vec![z], DisplacementType::HalfSpace),
        (vec![z, -z, Vector3::y(), -Vector3::y()], DisplacementType::Line),
        (vec![z, -z, x, -x], DisplacementType::Line),
    ] {
        let got = taxonomy::classify_contacts(&ContactModel::physical(normals.clone()));
        assert_eq!(got, want);
        assert_eq!(oracle_dims(&normals, ORACLE_SAMPLES, &mut rng), got.dims());
    }
}

#[test]
fn transition_examples() {
    use DisplacementType::*;
    assert_eq!(taxonomy::transition_task(HalfSpace, FullSpace, false), Some(TaskKind::Ptg11));
    assert_eq!(taxonomy::transition_task(FullSpace, HalfSpace, false), Some(TaskKind::Ptg13));
    assert_eq!(taxonomy::transition_task(FullSpace, FullSpace, true), Some(TaskKind::Stg12));
    assert_eq!(taxonomy::transition_task(Line, Line, false), Some(TaskKind::Ptg3));
    assert_eq!(taxonomy::transition_task(PlanarCone, Plane, false), None);
}

fn arb_normals() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 0usize..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn quantize_ignores_positive_scaling(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let v = random_unit(&mut rng(seed));
        prop_assert_eq!(LabanDirection::quantize(&v).unwrap(), LabanDirection::quantize(&(v * scale)).unwrap());
    }

    #[test]
    fn joint_ranges_stay_inside_hard_limits(u in 0usize..26, l in 0usize..26, which in 0usize..2, s in 0usize..3) {
        let m = &bundled_models()[which];
        let p = LabanPose {
            upper_arm: LabanDirection::from_index(u).unwrap(),
            lower_arm: LabanDirection::from_index(l).unwrap(),
        };
        let strength = [ConstraintStrength::None, ConstraintStrength::Elbow, ConstraintStrength::Full][s];
        if let Ok(r) = laban::joint_ranges(m, &p, strength) {
            prop_assert!(r.iter().zip(m.hard_limits()).all(|(a, b)| b.contains_interval(a) && a.lo <= a.hi));
        }
    }

    #[test]
    fn classification_is_rotation_invariant((seed, pick) in arb_normals()) {
        let mut rng = rng(seed);
        let sets = generated_normal_sets(pick + 1, &mut rng);
        let normals = sets[pick].clone();
        let r = random_rotation(&mut rng);
        let rotated: Vec<_> = normals.iter().map(|n| r * n).collect();
        prop_assert_eq!(
            taxonomy::classify_contacts(&ContactModel::physical(normals)),
            taxonomy::classify_contacts(&ContactModel::physical(rotated))
        );
    }

    #[test]
    fn implied_normals_never_change_the_class((seed, pick) in arb_normals()) {
        let mut rng = rng(seed);
        let sets = generated_normal_sets(pick + 1, &mut rng);
        let normals = sets[pick].clone();
        prop_assume!(!normals.is_empty());
        let combo: Vector3<f64> = normals.iter().map(|n| n * rng.gen_range(0.0..1.0)).sum();
        prop_assume!(combo.norm() > 1e-3);
        let mut extended = normals.clone();
        extended.push(combo.normalize());
        prop_assert_eq!(
            taxonomy::classify_contacts(&ContactModel::physical(normals)),
            taxonomy::classify_contacts(&ContactModel::physical(extended))
        );
    }
}
