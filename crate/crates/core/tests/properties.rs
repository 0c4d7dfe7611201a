mod common;

use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use rydberg_source::dsl;
use rydberg_source::emission::{self, AtomCloud};
use rydberg_source::pulse::{self, lv, CoinMode, Instruction};
use rydberg_source::state::EnsembleState;
use rydberg_source::verify::{self, stabilizer_expectations, BasisMap, GraphSpec, PhotonicState};
use rydberg_source::{Configuration, Letter};

fn arb_state(levels: usize, modes: usize) -> impl Strategy<Value = EnsembleState<f64>> {
    let config = (
        prop::collection::vec(any::<bool>(), levels),
        prop::collection::vec(0usize..3, modes),
        -1.0f64..1.0,
        -1.0f64..1.0,
    );
    prop::collection::vec(config, 1..8).prop_filter_map("zero state", move |entries| {
        let s = EnsembleState::from_amplitudes(
            levels,
            modes,
            entries.into_iter().map(|(occ, letters, re, im)| {
                let letters = letters.into_iter().map(|i| Letter::ALL[i]).collect();
                (Configuration::new(&occ, letters).unwrap(), Complex::new(re, im))
            }),
        )
        .ok()?;
        (s.norm() > 1e-6).then(|| s.normalized())
    })
}

fn close(a: &EnsembleState<f64>, b: &EnsembleState<f64>) -> bool {
    let keys: std::collections::BTreeSet<_> = a.configurations().chain(b.configurations()).cloned().collect();
    keys.iter().all(|c| (a.amplitude(c) - b.amplitude(c)).norm() < 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gate_sequences_preserve_norm(state in arb_state(5, 1), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let mut s = state;
        for _ in 0..12 {
            let ins = common::random_gate(&mut r, 5);
            if let Ok(next) = ins.apply(&s) {
                s = next;
            }
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_emit_branches_preserve_norm(state in arb_state(3, 1)) {
        let ens = pulse::random_emit(&state, CoinMode::Branch);
        let total: f64 = ens.branches().iter().map(|(w, s)| w * s.norm()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_feed_and_cphase_commute(state in arb_state(6, 0)) {
        let f = Instruction::Feed { target: lv(1), control: lv(2) };
        let c = Instruction::CPhase { first: lv(4), second: lv(5) };
        if let (Ok(fc), Ok(cf)) = (
            f.apply(&state).and_then(|s| c.apply(&s)),
            c.apply(&state).and_then(|s| f.apply(&s)),
        ) {
            prop_assert!(close(&fc, &cf));
        }
    }

    #[test]
    fn raman_commutes_with_outside_feed(state in arb_state(6, 0), theta in -PI..PI) {
        let r = Instruction::Raman { first: lv(2), second: lv(3), theta, phi: 0.0 };
        let f = Instruction::Feed { target: lv(5), control: lv(6) };
        if let (Ok(rf), Ok(fr)) = (
            r.apply(&state).and_then(|s| f.apply(&s)),
            f.apply(&state).and_then(|s| r.apply(&s)),
        ) {
            prop_assert!(close(&rf, &fr));
        }
    }

    #[test]
    fn emit_never_loses_photons(state in arb_state(4, 1), seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let ins = loop {
            let i = common::random_gate(&mut r, 4);
            if matches!(i, Instruction::Emit { .. }) { break i; }
        };
        if let Ok(out) = ins.apply(&state) {
            prop_assert_eq!(out.mode_count(), state.mode_count() + 1);
            let before = state.configurations().map(|c| c.photon_count()).min().unwrap();
            let after = out.configurations().map(|c| c.photon_count()).min().unwrap();
            prop_assert!(after >= before);
        }
    }

    #[test]
    fn measurement_is_idempotent(state in arb_state(2, 2), seed in any::<u64>()) {
        let mut r = pulse::seeded_rng(seed);
        let first = pulse::measure(&state, 0, pulse::OutcomeChoice::Sample(&mut r)).unwrap();
        let again = pulse::measure(&first.state, 0, pulse::OutcomeChoice::Sample(&mut r)).unwrap();
        prop_assert_eq!(first.outcome, again.outcome);
        prop_assert!((again.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_phase_blind(a in arb_state(1, 2), b in arb_state(1, 2), t in 0.0..std::f64::consts::TAU) {
        // photonic-only states: clear the register
        let strip = |s: &EnsembleState<f64>| {
            let mut amps = std::collections::BTreeMap::new();
            for (c, x) in s.iter() {
                if !c.atomic_vacuum() { continue; }
                *amps.entry(c.letters().to_vec()).or_insert(Complex::new(0.0, 0.0)) += *x;
            }
            let n: f64 = amps.values().map(|x: &Complex<f64>| x.norm_sqr()).sum();
            if n < 1e-6 { return None; }
            let k = 1.0 / n.sqrt();
            let p = PhotonicState::new(2, amps.into_iter().map(|(l, x)| (l, x * k)).collect()).ok()?;
            let st = EnsembleState::from_amplitudes(1, 2, p.amplitudes().iter().map(|(l, x)| {
                (Configuration::new(&[false], l.clone()).unwrap(), *x)
            })).ok()?;
            Some((p, st))
        };
        if let (Some((pa, sa)), Some((pb, sb))) = (strip(&a), strip(&b)) {
            let ab = verify::fidelity(&[(1.0, &sa)], &pb).unwrap();
            let ba = verify::fidelity(&[(1.0, &sb)], &pa).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            let rotated = sa.scaled(Complex::from_polar(1.0, t));
            let ab2 = verify::fidelity(&[(1.0, &rotated)], &pb).unwrap();
            prop_assert!((ab - ab2).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_flip_signs_follow_degree(
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        edges in prop::collection::vec((0usize..4, 0usize..4), 0..6),
    ) {
        let mut es: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            let e = (a.min(b), a.max(b));
            if a != b && !es.contains(&e) { es.push(e); }
        }
        let g = GraphSpec::new(4, es).unwrap();
        let n: f64 = amps.iter().map(|(r, i)| r * r + i * i).sum();
        prop_assume!(n > 1e-6);
        let state = EnsembleState::from_amplitudes(1, 4, amps.iter().enumerate().map(|(idx, (r, i))| {
            let letters = (0..4).map(|m| if idx >> (3 - m) & 1 == 0 { Letter::R } else { Letter::L }).collect();
            (Configuration::new(&[false], letters).unwrap(), Complex::new(*r, *i) / n.sqrt())
        })).unwrap();
        let id = vec![verify::clifford::identity(); 4];
        let plain = stabilizer_expectations(&state, &[0, 1, 2, 3], &g, &id).unwrap();
        let flipped_graph = g.clone().with_basis(BasisMap::LZero);
        let flipped = stabilizer_expectations(&state, &[0, 1, 2, 3], &flipped_graph, &id).unwrap();
        for v in 0..4 {
            let sign = if g.neighbors(v).len().is_multiple_of(2) { 1.0 } else { -1.0 };
            prop_assert!((flipped[v] - sign * plain[v]).abs() < 1e-12);
        }
    }

    #[test]
    fn dsl_roundtrip(seed in any::<u64>()) {
        let s = common::random_schedule(&mut common::rng(seed));
        prop_assert_eq!(dsl::parse(&dsl::serialize(&s)).unwrap(), s);
    }

    #[test]
    fn angles_roundtrip(x in -100.0f64..100.0, p in 1u64..20, q in 1u64..17) {
        prop_assert_eq!(dsl::parse_angle(&dsl::format_angle(x)), Some(x));
        let y = p as f64 * PI / q as f64;
        prop_assert_eq!(dsl::parse_angle(&dsl::format_angle(y)), Some(y));
    }

    #[test]
    fn emission_is_translation_invariant(
        pos in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), 1..10),
        shift in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
        dir in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        let pts: Vec<[f64; 3]> = pos.iter().map(|&(x, y, z)| [x, y, z]).collect();
        let moved: Vec<[f64; 3]> = pts.iter().map(|p| [p[0] + shift.0, p[1] + shift.1, p[2] + shift.2]).collect();
        let a = AtomCloud::new(pts.clone(), 20.0).unwrap();
        let b = AtomCloud::new(moved, 40.0).unwrap();
        let km = [0.0, 0.0, 8.0];
        let k = [dir.0 * 8.0, dir.1 * 8.0, dir.2 * 8.0];
        let pa = emission::emission_probability(&a, &km, &k);
        let pb = emission::emission_probability(&b, &km, &k);
        prop_assert!(pa >= 0.0);
        prop_assert!((pa - pb).abs() < 1e-9 * pts.len() as f64);
        prop_assert_eq!(emission::emission_probability(&a, &km, &km), pts.len() as f64);
    }
}
