import json

import numpy as np
import pytest

from conftest import random_unitary, sigma_minus_spec
from lgw.encodings import (
    CircuitSpec,
    block_hamiltonian,
    circuit_to_lme,
    clifford_conjugate_observable,
    clock_qubit_count,
    exchange_operator,
    feynman_steady_state,
    final_qubit_one_observable,
    p1_from_steady,
)
from lgw.errors import DimensionError, ValidationError
from lgw.lindblad import (
    build_ldl,
    build_liouvillian,
    steady_state,
    trace_norm,
    vectorize,
    verify_ldl_properties,
)
from lgw.measure import exact_expectation
from lgw.pauli import PauliSum, to_matrix

X = np.array([[0, 1], [1, 0]], dtype=complex)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def test_circuit_spec_validation():
    with pytest.raises(ValidationError):
        CircuitSpec(1, (np.array([[1, 1], [0, 1]], dtype=complex),))
    with pytest.raises(ValidationError):
        CircuitSpec(1, ())
    with pytest.raises(DimensionError):
        CircuitSpec(2, (X,))


def test_circuit_json_roundtrip():
    rng = np.random.default_rng(1)
    circuit = CircuitSpec(1, (random_unitary(2, rng), random_unitary(2, rng)))
    back = CircuitSpec.from_json_dict(
        json.loads(json.dumps(circuit.to_json_dict()))
    )
    for a, b in zip(circuit.layers, back.layers):
        assert np.abs(a - b).max() < 1e-15


def test_clock_lme_t1_x_steady_state():
    clock = circuit_to_lme(CircuitSpec(1, (X,)))
    liouv = build_liouvillian(clock.spec)
    states = steady_state(liouv)
    assert len(states) == 1
    expect = np.zeros((4, 4), dtype=complex)
    expect[0, 0] = 0.5   # |0>|0>_clock
    expect[3, 3] = 0.5   # |1>|1>_clock
    assert np.abs(states[0].matrix - expect).max() < 1e-9


def test_clock_lme_identity_circuit():
    circuit = CircuitSpec(1, (np.eye(2, dtype=complex),))
    rho = feynman_steady_state(circuit)
    expect = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
    assert np.abs(rho.matrix - expect).max() < 1e-12


def test_history_state_is_exactly_steady_and_unique():
    rng = np.random.default_rng(2)
    cases = [
        CircuitSpec(1, (X,)),
        CircuitSpec(1, (HAD,)),
        CircuitSpec(1, tuple(random_unitary(2, rng) for _ in range(2))),
        CircuitSpec(2, tuple(random_unitary(4, rng) for _ in range(3))),
    ]
    for circuit in cases:
        clock = circuit_to_lme(circuit)
        liouv = build_liouvillian(clock.spec)
        rho = feynman_steady_state(circuit)
        assert np.linalg.norm(liouv.matrix @ rho.matrix.reshape(-1)) < 1e-9
        states = steady_state(liouv)
        assert len(states) == 1
        assert trace_norm(states[0].matrix - rho.matrix) < 1e-8
        padding = 2 ** clock.clock_qubits - clock.clock_dim
        assert len(clock.spec.jumps) == circuit.n + (circuit.depth + 1) + padding


def test_hadamard_then_cnot_encoding():
    cnot = np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    )
    circuit = CircuitSpec(2, (np.kron(HAD, np.eye(2)), cnot))
    rho = feynman_steady_state(circuit)
    assert abs(rho.purity() - 1.0 / 3.0) < 1e-12
    clock = circuit_to_lme(circuit)
    liouv = build_liouvillian(clock.spec)
    assert len(steady_state(liouv)) == 1
    assert np.linalg.norm(liouv.matrix @ rho.matrix.reshape(-1)) < 1e-9


def test_history_state_purity():
    rng = np.random.default_rng(3)
    for depth in (1, 2, 3):
        circuit = CircuitSpec(1, tuple(random_unitary(2, rng) for _ in range(depth)))
        rho = feynman_steady_state(circuit)
        assert abs(rho.purity() - 1.0 / (depth + 1)) < 1e-12


def test_clock_ldl_properties():
    clock = circuit_to_lme(CircuitSpec(1, (X,)))
    liouv = build_liouvillian(clock.spec)
    ldl, _ = build_ldl(clock.spec)
    assert verify_ldl_properties(ldl, liouv).all_passed


def test_output_observable_expectation():
    rho = feynman_steady_state(CircuitSpec(1, (X,)))
    obs = final_qubit_one_observable(1, 1)
    assert abs(exact_expectation(obs, rho) - (-0.5)) < 1e-12


def test_p1_exact_values():
    assert abs(p1_from_steady(feynman_steady_state(CircuitSpec(1, (X,))), 1)
               - 1.0) < 1e-10
    ident = CircuitSpec(1, (np.eye(2, dtype=complex),))
    assert abs(p1_from_steady(feynman_steady_state(ident), 1)) < 1e-10
    had = CircuitSpec(1, (HAD,))
    assert abs(p1_from_steady(feynman_steady_state(had), 1) - 0.5) < 1e-10


def test_p1_matches_statevector():
    rng = np.random.default_rng(4)
    for n, depth in ((1, 2), (2, 3)):
        circuit = CircuitSpec(
            n, tuple(random_unitary(2 ** n, rng) for _ in range(depth))
        )
        psi = circuit.statevectors()[-1]
        # first qubit is the most significant index bit
        p1_true = (np.abs(psi) ** 2).reshape(2, -1)[1].sum()
        rho = feynman_steady_state(circuit)
        assert abs(p1_from_steady(rho, depth) - p1_true) < 1e-10


def test_p1_sampled_within_noise():
    circuit = CircuitSpec(1, (HAD,))
    rho = feynman_steady_state(circuit)
    vals = [p1_from_steady(rho, 1, shots=20000, seed=s) for s in range(30)]
    vals = np.asarray(vals)
    scatter = vals.std(ddof=1) / np.sqrt(len(vals))
    assert abs(vals.mean() - 0.5) < 4 * scatter


def test_p1_budget_from_accuracy_target():
    circuit = CircuitSpec(1, (HAD,))
    rho = feynman_steady_state(circuit)
    vals = np.asarray(
        [p1_from_steady(rho, 1, eps=0.04, seed=s) for s in range(40)]
    )
    # the budget targets the doubled-register expectation at eps, which
    # enters p1 scaled by (T+1)/2
    assert np.sqrt(np.mean((vals - 0.5) ** 2)) <= 0.04


def test_block_hamiltonian_structure():
    liouv = build_liouvillian(sigma_minus_spec())
    block = block_hamiltonian(liouv)
    assert np.abs(block - block.conj().T).max() < 1e-12
    svals = np.linalg.svd(liouv.matrix, compute_uv=False)
    evals = np.linalg.eigvalsh(block)
    assert np.allclose(sorted(evals), sorted(np.concatenate([svals, -svals])),
                       atol=1e-10)
    rho_ss = steady_state(liouv)[0]
    v = vectorize(rho_ss).amplitudes
    doubled = np.concatenate([np.zeros_like(v), v])
    assert np.linalg.norm(block @ doubled) < 1e-9


def test_block_hamiltonian_zero_generator():
    from lgw.lindblad import SuperOp

    zero = SuperOp(1, np.zeros((4, 4), dtype=complex))
    assert np.abs(block_hamiltonian(zero)).max() == 0.0


def test_exchange_operator_basics():
    s1 = exchange_operator(1).matrix
    ket01 = np.zeros(4)
    ket01[1] = 1.0   # vec(|0><1|)
    ket10 = np.zeros(4)
    ket10[2] = 1.0   # vec(|1><0|)
    assert np.array_equal(s1 @ ket01, ket10)
    assert np.array_equal(s1 @ s1, np.eye(4))
    rng = np.random.default_rng(5)
    s2 = exchange_operator(2).matrix
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(s2 @ m.reshape(-1), m.T.reshape(-1))


def test_clifford_conjugation():
    a = PauliSum.from_letter_terms([(1.0, "ZI")])
    assert clifford_conjugate_observable(a, np.eye(4)).max_coeff_diff(a) == 0.0
    flip = np.kron(X, np.eye(2))
    conj = clifford_conjugate_observable(a, flip)
    assert conj.max_coeff_diff(PauliSum.from_letter_terms([(-1.0, "ZI")])) < 1e-12
    with pytest.raises(ValidationError):
        clifford_conjugate_observable(a, np.diag([1.0, 2.0, 1.0, 1.0]))


def test_clifford_conjugation_dual_path():
    rng = np.random.default_rng(6)
    from conftest import rand_hermitian_sum, rand_rho

    n = 1  # doubled register of a single system qubit
    a = rand_hermitian_sum(2 * n, rng, 4)
    u = random_unitary(4, rng)
    rho = rand_rho(n, rng)
    conj = clifford_conjugate_observable(a, u)
    lhs = exact_expectation(conj, rho)
    v = vectorize(rho).amplitudes
    rotated = u @ v
    rhs = float(np.vdot(rotated, to_matrix(a) @ rotated).real)
    assert abs(lhs - rhs) < 1e-10


def test_clock_export_carries_dimension():
    clock = circuit_to_lme(CircuitSpec(1, (X, X)))
    data = clock.to_json_dict()
    assert data["clock_dim"] == 3
    assert clock_qubit_count(2) == 2
