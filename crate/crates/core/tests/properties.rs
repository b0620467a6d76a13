use std::f64::consts::PI;

use hartree::diagnostics::format_float;
use hartree::evolution::HartreeSystem;
use hartree::field::{decode_snapshot, encode_snapshot, product_coefficients, wiener2};
use hartree::{CorrelationMethod, PotentialModel, SpectralState, TorusLattice};
use num_complex::Complex64;
use proptest::prelude::*;

fn lattice() -> impl Strategy<Value = TorusLattice> {
    (1usize..=2, 1.0f64..8.0).prop_map(|(m, l)| TorusLattice::new(l, m).unwrap())
}

fn state() -> impl Strategy<Value = SpectralState> {
    (lattice(), 0.1f64..1e3, 0.0f64..3.0).prop_flat_map(|(lat, rho, decay)| {
        prop::collection::vec((0.0f64..1.0, 0.0f64..(2.0 * PI)), lat.len()).prop_map(move |raw| {
            let coeffs = raw
                .iter()
                .enumerate()
                .map(|(i, &(a, phi))| {
                    let n = lat.mode(i);
                    let r = ((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64).sqrt();
                    Complex64::from_polar(a * (1.0 + r).powf(-decay) + 1e-3, phi)
                })
                .collect();
            SpectralState::normalized(lat, rho, coeffs).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn autocorrelation_invariants(s in state()) {
        let beta = s.autocorrelation(CorrelationMethod::Fft);
        prop_assert!((beta.get([0, 0, 0]) - 1.0).norm() < 1e-12);
        for k in beta.lattice().modes() {
            let v = beta.get(k);
            prop_assert!((beta.get([-k[0], -k[1], -k[2]]) - v.conj()).norm() < 1e-12);
            prop_assert!(v.norm() <= 1.0 + 1e-12);
        }
        let volume = s.lattice().length().powi(3);
        let fourth = s.to_physical(2).unwrap().integral_abs_pow(4) / (s.rho() * volume);
        prop_assert!((s.rho() * beta.sum_sq() - fourth).abs() <= 1e-10 * fourth);
    }

    #[test]
    fn sums_and_norms(s in state()) {
        prop_assert_eq!(s.wiener_norm(0).unwrap(), s.s_sum());
        prop_assert!(s.s_sum() >= 1.0 - 1e-9);
        // ‖ΔΨ‖_{𝔄⁰} ≤ ‖Ψ‖_{𝔄²}.
        prop_assert!(s.t_sum() <= s.wiener_norm(2).unwrap());
        let field = s.to_physical(1).unwrap();
        prop_assert!(field.sup_norm() <= s.rho().sqrt() * s.s_sum() + 1e-9);
        let mean = field.integral_abs_pow(2) / s.lattice().length().powi(3);
        prop_assert!((mean - s.rho()).abs() <= 1e-9 * s.rho());
    }

    #[test]
    fn physical_round_trip(s in state(), factor in 1usize..=2) {
        let back = SpectralState::to_spectral(&s.to_physical(factor).unwrap(), *s.lattice(), s.rho()).unwrap();
        prop_assert!(back.l2_distance(&s) < 1e-12);
    }

    #[test]
    fn reductions_are_bit_reproducible(s in state()) {
        let copy = SpectralState::new(*s.lattice(), s.rho(), s.coeffs().to_vec()).unwrap();
        prop_assert_eq!(s.s_sum().to_bits(), copy.s_sum().to_bits());
        prop_assert_eq!(s.t_sum().to_bits(), copy.t_sum().to_bits());
        prop_assert_eq!(s.wiener_norm(2).unwrap().to_bits(), copy.wiener_norm(2).unwrap().to_bits());
    }

    #[test]
    fn banach_algebra(f in state(), seed in any::<u64>()) {
        let lat = *f.lattice();
        // A second field on the same lattice: f with rotated phases.
        let g: Vec<Complex64> = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, (seed.wrapping_mul(i as u64 + 1) % 1000) as f64))
            .collect();
        let fg = product_coefficients(&lat, f.coeffs(), &g).unwrap();
        let lhs = wiener2(&lat.difference(), &fg);
        prop_assert!(lhs <= 4.0 / 3.0 * wiener2(&lat, f.coeffs()) * wiener2(&lat, &g) + 1e-9);
    }

    #[test]
    fn split_step_is_unitary_and_reversible(s in state(), dt in 1e-4f64..5e-3) {
        let sys = HartreeSystem::new(&PotentialModel::gaussian(1.0, 1.0).unwrap(), *s.lattice(), true).unwrap();
        let fwd = sys.step_split(&s, dt).unwrap();
        prop_assert!((fwd.mass() - 1.0).abs() < 1e-12);
        let back = sys.step_split(&fwd, -dt).unwrap();
        prop_assert!(back.l2_distance(&s) < 1e-11);
        let mirrored = sys.step_split(&fwd.conjugate_reflect(), dt).unwrap().conjugate_reflect();
        prop_assert!(mirrored.l2_distance(&s) < 1e-11);
    }

    #[test]
    fn conjugate_reflect_is_an_involution(s in state()) {
        prop_assert_eq!(s.conjugate_reflect().conjugate_reflect(), s);
    }

    #[test]
    fn snapshot_round_trip(s in state(), seed in any::<Option<u64>>()) {
        let (back, header) = decode_snapshot(&encode_snapshot(&s, "perturbed_condensate", seed)).unwrap();
        prop_assert_eq!(back, s);
        prop_assert_eq!(header.seed, seed);
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
