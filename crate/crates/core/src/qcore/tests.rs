use super::*;
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ci(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Operator {
    let mut m: Operator = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            m[[i, j]] = ci(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    hermitize(&m)
}

fn random_density(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let m = random_hermitian(d, rng);
    nearest_density(&m).unwrap().state
}

fn pauli_z() -> Operator {
    let mut m: Operator = Array2::zeros((2, 2));
    m[[0, 0]] = c(1.0);
    m[[1, 1]] = c(-1.0);
    m
}

fn pauli_x() -> Operator {
    let mut m: Operator = Array2::zeros((2, 2));
    m[[0, 1]] = c(1.0);
    m[[1, 0]] = c(1.0);
    m
}

#[test]
fn tensor_identity_case() {
    let i2 = identity(2);
    let i4 = tensor_product(&i2, &i2).unwrap();
    assert_eq!(i4, identity(4));
}

#[test]
fn tensor_diagonal_case() {
    let zz = tensor_product(&pauli_z(), &pauli_z()).unwrap();
    let expected = [1.0, -1.0, -1.0, 1.0];
    for (i, &e) in expected.iter().enumerate() {
        assert!((zz[[i, i]] - c(e)).norm() < 1e-15);
    }
}

#[test]
fn tensor_dimension_arithmetic() {
    let a = identity(3);
    let b = identity(4);
    assert_eq!(tensor_product(&a, &b).unwrap().nrows(), 12);
}

#[test]
fn tensor_associativity_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let d = random_hermitian(2, &mut rng);
        let left = kron(&kron(&a, &b), &d);
        let right = kron(&a, &kron(&b, &d));
        assert!(frobenius_distance(&left, &right) < 1e-10);
    }
}

#[test]
fn partial_trace_bell_state_is_maximally_mixed() {
    let s = c(1.0 / 2f64.sqrt());
    let psi = PureState::new(vec![c(0.0), s, s, c(0.0)]).unwrap();
    let rho = psi.projector();
    let reduced = partial_trace(&rho, &[2, 2], &[0]).unwrap();
    assert!((reduced[[0, 0]] - c(0.5)).norm() < 1e-12);
    assert!((reduced[[1, 1]] - c(0.5)).norm() < 1e-12);
    assert!(reduced[[0, 1]].norm() < 1e-12);
}

#[test]
fn partial_trace_recovers_product_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let a = random_density(2, &mut rng);
        let b = random_density(3, &mut rng);
        let joint = kron(a.matrix(), b.matrix());
        let ra = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        let rb = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(frobenius_distance(&ra, a.matrix()) < 1e-10);
        assert!(frobenius_distance(&rb, b.matrix()) < 1e-10);
    }
}

#[test]
fn partial_trace_preserves_trace_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let rho = random_density(8, &mut rng);
        let reduced = partial_trace(rho.matrix(), &[2, 2, 2], &[1]).unwrap();
        assert!((trace(&reduced).re - rho.trace()).abs() < 1e-10);
        assert!(is_hermitian(&reduced, 1e-10));
    }
}

#[test]
fn partial_trace_rejects_bad_index() {
    let rho = identity(4);
    assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
}

#[test]
fn fidelity_pure_match_and_orthogonal() {
    let s = c(1.0 / 2f64.sqrt());
    let psi = PureState::new(vec![c(0.0), s, s, c(0.0)]).unwrap();
    let rho = DensityMatrix::new(psi.projector()).unwrap();
    assert!((state_fidelity(&rho, &psi).unwrap() - 1.0).abs() < 1e-12);

    let zero_one = PureState::basis(4, 1);
    let one_zero = PureState::basis(4, 2);
    let rho01 = DensityMatrix::new(zero_one.projector()).unwrap();
    assert!(state_fidelity(&rho01, &one_zero).unwrap() < 1e-12);
}

#[test]
fn fidelity_respects_bounds_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let rho = random_density(4, &mut rng);
        let raw: Vec<C64> = (0..4)
            .map(|_| ci(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let psi = PureState::normalized(raw).unwrap();
        let f = state_fidelity(&rho, &psi).unwrap();
        assert!((0.0..=1.0).contains(&f));
    }
}

#[test]
fn fidelity_dimension_mismatch_errors() {
    let rho = DensityMatrix::new(identity(2) * c(0.5)).unwrap();
    let psi = PureState::basis(4, 0);
    assert!(state_fidelity(&rho, &psi).is_err());
}

#[test]
fn nearest_density_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let rho = random_density(4, &mut rng);
    let projected = nearest_density(rho.matrix()).unwrap();
    assert!(!projected.degenerate_input);
    assert!(frobenius_distance(projected.state.matrix(), rho.matrix()) < 1e-9);
}

#[test]
fn nearest_density_clips_one_negative_eigenvalue() {
    let mut m: Operator = Array2::zeros((2, 2));
    m[[0, 0]] = c(1.1);
    m[[1, 1]] = c(-0.1);
    let out = nearest_density(&m).unwrap().state;
    assert!((out.matrix()[[0, 0]] - c(1.0)).norm() < 1e-12);
    assert!(out.matrix()[[1, 1]].norm() < 1e-12);
}

#[test]
fn nearest_density_all_negative_returns_maximally_mixed() {
    let m = identity(3) * c(-1.0);
    let out = nearest_density(&m).unwrap();
    assert!(out.degenerate_input);
    for i in 0..3 {
        assert!((out.state.matrix()[[i, i]] - c(1.0 / 3.0)).norm() < 1e-12);
    }
}

/// Independent simplex-projection oracle: sorted-prefix search for the
/// shift theta with sum max(lambda - theta, 0) = 1.
fn simplex_project_oracle(vals: &[f64]) -> Vec<f64> {
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        prefix += v;
        let candidate = (prefix - 1.0) / (k + 1) as f64;
        let next = sorted.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if candidate >= next {
            theta = candidate;
            break;
        }
    }
    vals.iter().map(|&v| (v - theta).max(0.0)).collect()
}

#[test]
fn nearest_density_matches_simplex_projection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let m = random_hermitian(5, &mut rng);
        let out = nearest_density(&m).unwrap();
        if out.degenerate_input {
            continue;
        }
        let (vals, vecs) = eigh(&m).unwrap();
        let clipped = simplex_project_oracle(&vals);
        let mut oracle: Operator = Array2::zeros((5, 5));
        for (k, &w) in clipped.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..5 {
                for j in 0..5 {
                    oracle[[i, j]] += vecs[[i, k]] * vecs[[j, k]].conj() * c(w);
                }
            }
        }
        assert!(
            frobenius_distance(out.state.matrix(), &oracle) < 1e-8,
            "projection differs from the simplex oracle"
        );
    }
}

#[test]
fn expectation_parity_examples() {
    let s = c(1.0 / 2f64.sqrt());
    let xx = kron(&pauli_x(), &pauli_x());
    let plus = PureState::new(vec![c(0.0), s, s, c(0.0)]).unwrap();
    let minus = PureState::new(vec![c(0.0), s, -s, c(0.0)]).unwrap();
    assert!((expectation(&plus.projector(), &xx).unwrap() - 1.0).abs() < 1e-12);
    assert!((expectation(&minus.projector(), &xx).unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn zz_parity_is_phase_independent() {
    let zz = kron(&pauli_z(), &pauli_z());
    for phi in [0.0, 0.7, 2.1, 4.9] {
        let s = 1.0 / 2f64.sqrt();
        let psi = PureState::new(vec![
            c(0.0),
            c(s),
            C64::from_polar(s, phi),
            c(0.0),
        ])
        .unwrap();
        assert!((expectation(&psi.projector(), &zz).unwrap() + 1.0).abs() < 1e-12);
    }
}

#[test]
fn eigh_reconstructs_random_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for d in [2usize, 5, 9] {
        let m = random_hermitian(d, &mut rng);
        let (vals, vecs) = eigh(&m).unwrap();
        let mut rebuilt: Operator = Array2::zeros((d, d));
        for (k, &v) in vals.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    rebuilt[[i, j]] += vecs[[i, k]] * vecs[[j, k]].conj() * c(v);
                }
            }
        }
        assert!(frobenius_distance(&m, &rebuilt) < 1e-10);
    }
}

#[test]
fn expm_matches_diagonal_and_rotation() {
    let mut m: Operator = Array2::zeros((2, 2));
    m[[0, 0]] = ci(0.0, -1.3);
    m[[1, 1]] = ci(-0.4, 0.9);
    let e = expm(&m);
    assert!((e[[0, 0]] - ci(0.0, -1.3).exp()).norm() < 1e-12);
    assert!((e[[1, 1]] - ci(-0.4, 0.9).exp()).norm() < 1e-12);

    // exp(-i theta X / 2) rotation identity.
    let theta = 1.234;
    let gen = pauli_x() * ci(0.0, -0.5 * theta);
    let u = expm(&gen);
    assert!((u[[0, 0]] - c((0.5 * theta).cos())).norm() < 1e-12);
    assert!((u[[0, 1]] - ci(0.0, -(0.5 * theta).sin())).norm() < 1e-12);
}

#[test]
fn expm_inverse_property_large_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let h = random_hermitian(6, &mut rng) * c(40.0);
    let forward = expm(&(&h * ci(0.0, -1.0)));
    let backward = expm(&(&h * ci(0.0, 1.0)));
    let product = forward.dot(&backward);
    assert!(frobenius_distance(&product, &identity(6)) < 1e-8);
}

#[test]
fn density_matrix_invariants_enforced() {
    let mut bad: Operator = Array2::zeros((2, 2));
    bad[[0, 0]] = c(1.2);
    bad[[1, 1]] = c(-0.2);
    assert!(DensityMatrix::new(bad).is_err());

    let mut nonherm: Operator = identity(2) * c(0.5);
    nonherm[[0, 1]] = c(1e-3);
    assert!(DensityMatrix::new(nonherm).is_err());
}

#[test]
fn hilbert_layout_checks() {
    use Level::*;
    let layout = HilbertLayout::uniform(2, &[Zero, One, E, OneE]).unwrap();
    assert_eq!(layout.dim(), 16);
    assert_eq!(layout.level_index(0, E), Some(2));
    assert_eq!(layout.flat_index(&[1, 2]), 6);
    assert!(HilbertLayout::new(vec![vec![Zero, Zero]]).is_err());
    assert!(HilbertLayout::new(vec![vec![One, Zero]]).is_err());
}
