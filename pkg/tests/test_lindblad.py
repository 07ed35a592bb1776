import json

import numpy as np
import pytest

from conftest import (
    rand_lme_spec,
    rand_pure_rho,
    rand_rho,
    sigma_minus,
    sigma_minus_spec,
    unique_steady_spec,
)
from lgw.errors import (
    NormalizationError,
    ValidationError,
)
from lgw.lindblad import (
    DensityMatrix,
    JumpChannel,
    LmeSpec,
    build_ldl,
    build_liouvillian,
    devectorize,
    evolve,
    evolve_vector,
    exchange_conjugate,
    exchange_matrix,
    exchange_symmetry_defect,
    lme_from_json_dict,
    lme_to_json_dict,
    runtime_bound,
    spectral_diagnostics,
    steady_state,
    step_halving_delta,
    trace_norm,
    vec_overlap,
    vectorize,
    verify_ldl_properties,
)
from lgw.pauli import PauliSum, to_matrix


def lme_rhs(spec, rho):
    """Direct dense evaluation of the master equation right-hand side."""
    h = to_matrix(spec.hamiltonian)
    out = -1j * (h @ rho - rho @ h)
    for ch in spec.jumps:
        f = to_matrix(ch.op)
        fdf = f.conj().T @ f
        out += ch.rate * (f @ rho @ f.conj().T - 0.5 * (fdf @ rho + rho @ fdf))
    return out


def test_sigma_minus_spectrum():
    liouv = build_liouvillian(sigma_minus_spec())
    evals = sorted(np.linalg.eigvals(liouv.matrix).real)
    assert np.allclose(evals, [-1.0, -0.5, -0.5, 0.0], atol=1e-12)


def test_closed_system_spectrum_imaginary():
    rng = np.random.default_rng(2)
    from conftest import rand_hermitian_sum

    spec = LmeSpec(2, rand_hermitian_sum(2, rng, 4), ())
    evals = np.linalg.eigvals(build_liouvillian(spec).matrix)
    assert np.abs(evals.real).max() < 1e-12


def test_depolarizing_steady_is_maximally_mixed():
    jumps = tuple(
        JumpChannel(0.25, PauliSum.from_letter_terms([(1.0, p)])) for p in "XYZ"
    )
    liouv = build_liouvillian(LmeSpec(1, PauliSum.zero(1), jumps))
    states = steady_state(liouv)
    assert len(states) == 1
    assert np.abs(states[0].matrix - np.eye(2) / 2).max() < 1e-10


def test_generator_matches_master_equation_rhs():
    rng = np.random.default_rng(8)
    for n in (1, 2):
        spec = rand_lme_spec(n, rng)
        liouv = build_liouvillian(spec)
        rho = rand_rho(n, rng)
        lhs = (liouv.matrix @ rho.matrix.reshape(-1)).reshape(rho.matrix.shape)
        assert np.abs(lhs - lme_rhs(spec, rho.matrix)).max() < 1e-11


def test_trace_preservation_left_null_vector():
    rng = np.random.default_rng(9)
    for n in (1, 2):
        spec = rand_lme_spec(n, rng)
        liouv = build_liouvillian(spec)
        vec_id = np.eye(2 ** n, dtype=complex).reshape(-1)
        assert np.abs(vec_id @ liouv.matrix).max() < 1e-10


def test_spectrum_in_left_half_plane():
    rng = np.random.default_rng(10)
    for n in (1, 2):
        evals = np.linalg.eigvals(build_liouvillian(rand_lme_spec(n, rng)).matrix)
        assert evals.real.max() <= 1e-9


def test_hermiticity_preservation_exchange_relation():
    # S conj(L) S = L, the operator form of "evolution keeps rho Hermitian"
    rng = np.random.default_rng(12)
    for n in (1, 2):
        lmat = build_liouvillian(rand_lme_spec(n, rng)).matrix
        s = exchange_matrix(n)
        assert np.abs(s @ lmat.conj() @ s - lmat).max() < 1e-10


def test_negative_rate_rejected():
    with pytest.raises(ValidationError):
        JumpChannel(-0.1, sigma_minus())


def test_non_hermitian_hamiltonian_rejected():
    with pytest.raises(ValidationError):
        LmeSpec(1, PauliSum.from_letter_terms([(1j, "X")]), ())


def test_ldl_sigma_minus_eigenvalues():
    # dense eigendecomposition oracle: singular values of L are
    # {0, 1/2, 1/2, sqrt(2)}, so L^dag L has {0, 1/4, 1/4, 2}
    ldl, _ = build_ldl(sigma_minus_spec())
    evals = np.linalg.eigvalsh((ldl.matrix + ldl.matrix.conj().T) / 2)
    assert np.allclose(evals, [0.0, 0.25, 0.25, 2.0], atol=1e-12)


def test_ldl_zero_for_trivial_spec():
    ldl, sym = build_ldl(LmeSpec(1, PauliSum.zero(1), ()))
    assert np.abs(ldl.matrix).max() == 0.0 and len(sym) == 0


def test_ldl_dual_path_random():
    rng = np.random.default_rng(14)
    for _ in range(5):
        spec = rand_lme_spec(2, rng)
        ldl, sym = build_ldl(spec)  # raises if the two paths disagree
        from lgw.pauli import pauli_decompose

        assert sym.max_coeff_diff(pauli_decompose(ldl.matrix)) < 1e-10


def test_exchange_conjugate_matches_dense_map():
    rng = np.random.default_rng(15)
    from conftest import rand_pauli_sum

    p = rand_pauli_sum(4, rng, terms=6)  # doubled register of n=2
    s = exchange_matrix(2)
    lhs = to_matrix(exchange_conjugate(p))
    rhs = s @ to_matrix(p).conj() @ s
    assert np.abs(lhs - rhs).max() < 1e-12
    symmetrized = (p + exchange_conjugate(p)) * 0.5
    assert exchange_symmetry_defect(symmetrized) < 1e-12


def test_vectorize_bell_example():
    rho = DensityMatrix.maximally_mixed(1)
    v = vectorize(rho)
    assert abs(v.norm_factor - 1 / np.sqrt(2)) < 1e-14
    assert np.abs(v.amplitudes - np.array([1, 0, 0, 1]) / np.sqrt(2)).max() < 1e-14


def test_vectorize_pure_state():
    rho = DensityMatrix.pure(np.array([1.0, 0.0]))
    v = vectorize(rho)
    assert abs(v.norm_factor - 1.0) < 1e-14
    assert np.abs(v.amplitudes - np.array([1, 0, 0, 0])).max() < 1e-14


def test_vectorize_inner_product_is_trace():
    rng = np.random.default_rng(16)
    for _ in range(10):
        r1, r2 = rand_rho(2, rng), rand_rho(2, rng)
        lhs = vec_overlap(vectorize(r1), vectorize(r2))
        expect = np.trace(r1.matrix.conj().T @ r2.matrix) / (
            np.linalg.norm(r1.matrix) * np.linalg.norm(r2.matrix)
        )
        assert abs(lhs - expect) < 1e-12


def test_devectorize_roundtrip():
    rng = np.random.default_rng(18)
    rho = rand_rho(2, rng)
    assert np.abs(devectorize(vectorize(rho)) - rho.matrix).max() < 1e-13


def test_vectorize_zero_matrix_rejected():
    zero = DensityMatrix(1, np.zeros((2, 2)), validate=False)
    with pytest.raises(NormalizationError):
        vectorize(zero)


def test_steady_state_sigma_minus():
    states = steady_state(build_liouvillian(sigma_minus_spec()))
    assert len(states) == 1
    assert np.abs(states[0].matrix - np.diag([1.0, 0.0])).max() < 1e-10


def test_steady_state_degenerate_commutant():
    spec = LmeSpec(1, PauliSum.from_letter_terms([(1.0, "Z")]), ())
    liouv = build_liouvillian(spec)
    states = steady_state(liouv)
    assert len(states) >= 2
    for s in states:
        # stationary states of a bare Z Hamiltonian are diagonal
        off = s.matrix - np.diag(np.diag(s.matrix))
        assert np.abs(off).max() < 1e-10


def test_steady_state_unrepairable_basis_warns():
    # with a zero generator everything is steady; the null basis holds
    # traceless directions that cannot be trace-normalized
    spec = LmeSpec(1, PauliSum.zero(1), ())
    liouv = build_liouvillian(spec)
    with pytest.warns(UserWarning, match="degenerate"):
        states = steady_state(liouv)
    assert len(states) == 4


def test_steady_residual_small():
    rng = np.random.default_rng(20)
    spec, liouv = unique_steady_spec(2, rng)
    rho = steady_state(liouv)[0]
    assert np.linalg.norm(liouv.matrix @ rho.matrix.reshape(-1)) < 1e-9


def test_evolve_amplitude_damping_analytic():
    liouv = build_liouvillian(sigma_minus_spec())
    rho0 = DensityMatrix.pure(np.array([0.0, 1.0]))
    for t in (0.3, np.log(2.0), 2.0):
        out = evolve(liouv, rho0, t, 400)
        assert abs(out.matrix[1, 1].real - np.exp(-t)) < 1e-9


def test_evolve_zero_time_identity():
    rng = np.random.default_rng(22)
    spec, liouv = unique_steady_spec(1, rng)
    rho0 = rand_rho(1, rng)
    out = evolve(liouv, rho0, 0.0, 1)
    assert np.abs(out.matrix - rho0.matrix).max() < 1e-14


def test_evolve_reaches_steady_state():
    rng = np.random.default_rng(24)
    spec, liouv = unique_steady_spec(1, rng)
    report = spectral_diagnostics(liouv, mixing_probes=0)
    t = 20.0 / report.gap
    rho0 = rand_rho(1, rng)
    out = evolve(liouv, rho0, t, max(400, int(40 * t)))
    target = steady_state(liouv)[0]
    assert trace_norm(out.matrix - target.matrix) < 1e-6


def test_evolve_consistency_composition():
    rng = np.random.default_rng(26)
    spec, liouv = unique_steady_spec(1, rng)
    rho0 = rand_rho(1, rng)
    one_shot = evolve(liouv, rho0, 1.5, 600)
    two_step = evolve(liouv, evolve(liouv, rho0, 0.9, 360), 0.6, 240)
    assert np.abs(one_shot.matrix - two_step.matrix).max() < 1e-8


def test_evolve_drift_and_convergence():
    liouv = build_liouvillian(sigma_minus_spec())
    rho0 = DensityMatrix.pure(np.array([0.0, 1.0]))
    v = evolve_vector(liouv.matrix, rho0.matrix.reshape(-1), 2.0, 200)
    mat = v.reshape(2, 2)
    assert abs(np.trace(mat).real - 1.0) < 1e-8
    assert np.abs(mat - mat.conj().T).max() < 1e-8
    assert step_halving_delta(liouv, rho0, 2.0, 200) < 1e-8


def test_purity_ratio_lower_bound():
    # sqrt(Tr rho_ss^2 / Tr rho_0^2) >= 2^(-n/2) for pure rho_0
    rng = np.random.default_rng(28)
    for n in (1, 2):
        spec, liouv = unique_steady_spec(n, rng)
        rho_ss = steady_state(liouv)[0]
        rho0 = rand_pure_rho(n, rng)
        zeta = np.sqrt(rho_ss.purity() / rho0.purity())
        assert zeta >= 2 ** (-n / 2) - 1e-12


def test_spectral_diagnostics_gaps():
    assert abs(spectral_diagnostics(
        build_liouvillian(sigma_minus_spec()), mixing_probes=0).gap - 0.5) < 1e-12
    jumps = tuple(
        JumpChannel(0.25, PauliSum.from_letter_terms([(1.0, p)])) for p in "XYZ"
    )
    dep = build_liouvillian(LmeSpec(1, PauliSum.zero(1), jumps))
    assert abs(spectral_diagnostics(dep, mixing_probes=0).gap - 1.0) < 1e-12
    closed = build_liouvillian(
        LmeSpec(1, PauliSum.from_letter_terms([(1.0, "Z")]), ())
    )
    report = spectral_diagnostics(closed, mixing_probes=2, seed=0)
    assert report.gap is None and report.mixing_time_estimate is None


def test_spectral_report_json_keys():
    report = spectral_diagnostics(build_liouvillian(sigma_minus_spec()),
                                  mixing_probes=2, seed=1)
    data = report.to_json_dict()
    for key in ("gap", "steady_dim", "diagonalizable", "mixing_time_estimate"):
        assert key in data
    json.dumps(data)


def test_mixing_estimate_halves_trace_distance():
    rng = np.random.default_rng(30)
    spec, liouv = unique_steady_spec(1, rng)
    report = spectral_diagnostics(liouv, mixing_probes=4, seed=5)
    t = report.mixing_time_estimate
    assert t is not None and t > 0
    d1, d2 = rand_rho(1, rng), rand_rho(1, rng)
    delta = (d1.matrix - d2.matrix).reshape(-1)
    import scipy.linalg

    prop = scipy.linalg.expm(liouv.matrix * t)
    assert trace_norm((prop @ delta).reshape(2, 2)) <= trace_norm(
        delta.reshape(2, 2)
    ) / 2 + 1e-9


def test_runtime_bound_values():
    assert abs(runtime_bound("hermitian", 1.0, 2, np.exp(-2.0))
               - (np.log(2.0) + 1.0)) < 1e-12
    assert abs(runtime_bound("mixing", 1.0, 4, 1.0) - 2.0) < 1e-12
    with pytest.raises(ValidationError):
        runtime_bound("hermitian", 0.0, 2, 0.5)
    with pytest.raises(ValidationError):
        runtime_bound("hermitian", 1.0, 2, 1.5)
    with pytest.raises(ValidationError):
        runtime_bound("sideways", 1.0, 2, 0.5)


def test_runtime_bound_monotonicity():
    base = runtime_bound("hermitian", 1.0, 4, 0.1)
    assert runtime_bound("hermitian", 2.0, 4, 0.1) < base
    assert runtime_bound("hermitian", 1.0, 6, 0.1) > base
    assert runtime_bound("hermitian", 1.0, 4, 0.01) > base
    mix = runtime_bound("mixing", 1.0, 4, 0.1)
    assert runtime_bound("mixing", 1.0, 8, 0.1) > mix


def test_runtime_bound_suffices_for_sigma_minus():
    liouv = build_liouvillian(sigma_minus_spec())
    gap = spectral_diagnostics(liouv, mixing_probes=0).gap
    t = runtime_bound("hermitian", gap, 1, 0.01)
    rho0 = DensityMatrix.pure(np.array([0.0, 1.0]))
    out = evolve(liouv, rho0, t, max(400, int(40 * t)))
    target = steady_state(liouv)[0]
    overlap = abs(vec_overlap(vectorize(out), vectorize(target)))
    assert overlap >= 0.99


def test_verify_ldl_properties_sigma_minus():
    liouv = build_liouvillian(sigma_minus_spec())
    ldl, _ = build_ldl(sigma_minus_spec())
    report = verify_ldl_properties(ldl, liouv)
    assert report.all_passed
    data = report.to_json_dict()
    assert "ground_energy" in data and "st_commutator_norm" in data


def test_verify_ldl_degenerate_commutant():
    spec = LmeSpec(1, PauliSum.from_letter_terms([(1.0, "Z")]), ())
    liouv = build_liouvillian(spec)
    ldl, _ = build_ldl(spec)
    report = verify_ldl_properties(ldl, liouv)
    assert report.ground_energy < 1e-8
    assert report.ground_dim == 2
    assert report.ground_matches_steady


def test_st_commutator_random_specs():
    rng = np.random.default_rng(32)
    for _ in range(3):
        spec = rand_lme_spec(2, rng)
        ldl, _ = build_ldl(spec)
        assert verify_ldl_properties(ldl).st_commutator_norm < 1e-9


def test_steady_space_equals_ldl_ground_space():
    rng = np.random.default_rng(34)
    spec, liouv = unique_steady_spec(2, rng)
    ldl, _ = build_ldl(spec)
    rho_ss = steady_state(liouv)[0]
    v = vectorize(rho_ss).amplitudes
    evals, vecs = np.linalg.eigh((ldl.matrix + ldl.matrix.conj().T) / 2)
    ground = vecs[:, 0]
    # subspace angle below 1e-7
    assert 1.0 - abs(np.vdot(ground, v)) < 1e-7


def test_lme_json_roundtrip(tmp_path):
    rng = np.random.default_rng(36)
    spec = rand_lme_spec(2, rng)
    data = lme_to_json_dict(spec, clock_dim=3)
    back, extras = lme_from_json_dict(json.loads(json.dumps(data)))
    assert extras == {"clock_dim": 3}
    assert back.hamiltonian.max_coeff_diff(spec.hamiltonian) < 1e-15
    assert len(back.jumps) == len(spec.jumps)
    for a, b in zip(back.jumps, spec.jumps):
        assert a.rate == b.rate and a.op.max_coeff_diff(b.op) < 1e-15
