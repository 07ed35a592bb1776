"""Vectorized Lindblad generators and their squared (Hermitian) form.

Density matrices are flattened row-major, so the generator acts on
vectors of length 4^n with the row register in the most significant
qubits.  The squared generator L^dag L is Hermitian and positive
semi-definite; its zero eigenspace coincides with the vectorized
steady-state space of L.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    CapacityError,
    DimensionError,
    InstabilityError,
    NormalizationError,
    NoSteadyStateError,
    ValidationError,
    WorkbenchError,
)
from .pauli import PauliString, PauliSum, dense_qubit_cap, pauli_decompose, to_matrix

NULL_SPACE_RTOL = 1e-10       # singular values below rtol*s_max span the null space
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_SLACK = 1e-9


@dataclass(frozen=True)
class JumpChannel:
    """One dissipative channel: a non-negative rate and its operator."""

    rate: float
    op: PauliSum

    def __post_init__(self):
        if self.rate < 0:
            raise ValidationError(f"jump rate {self.rate} is negative")


@dataclass(frozen=True)
class LmeSpec:
    """A Lindblad problem: qubit count, Hermitian Hamiltonian, jumps."""

    n: int
    hamiltonian: PauliSum
    jumps: tuple[JumpChannel, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        if self.hamiltonian.n != self.n:
            raise DimensionError("Hamiltonian qubit count differs from spec")
        if not self.hamiltonian.is_hermitian(1e-12):
            raise ValidationError("Hamiltonian must be Hermitian (within 1e-12)")
        for ch in self.jumps:
            if ch.op.n != self.n:
                raise DimensionError("jump operator qubit count differs from spec")


@dataclass(frozen=True)
class SuperOp:
    """A dense operator on vectorized density matrices (dim 4^n)."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        dim = 4 ** self.n
        if self.matrix.shape != (dim, dim):
            raise DimensionError(
                f"superoperator for n={self.n} must be {dim}x{dim}, "
                f"got {self.matrix.shape}"
            )


class DensityMatrix:
    """A Hermitian, unit-trace, PSD matrix on n qubits."""

    __slots__ = ("n", "matrix")

    def __init__(self, n: int, matrix: np.ndarray, validate: bool = True):
        matrix = np.asarray(matrix, dtype=complex)
        dim = 2 ** n
        if matrix.shape != (dim, dim):
            raise DimensionError(f"expected {dim}x{dim} matrix for n={n}")
        if validate:
            if np.abs(matrix - matrix.conj().T).max() > HERMITICITY_TOL:
                raise ValidationError("density matrix is not Hermitian")
            if abs(np.trace(matrix).real - 1.0) > TRACE_TOL or abs(
                np.trace(matrix).imag
            ) > TRACE_TOL:
                raise ValidationError("density matrix trace differs from 1")
            evals = np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)
            if evals.min() < -PSD_SLACK:
                raise ValidationError(
                    f"density matrix has eigenvalue {evals.min():.3e} < -{PSD_SLACK}"
                )
        self.n = n
        self.matrix = matrix

    @classmethod
    def pure(cls, state: np.ndarray) -> "DensityMatrix":
        state = np.asarray(state, dtype=complex).ravel()
        nrm = np.linalg.norm(state)
        if nrm == 0:
            raise NormalizationError("zero state vector")
        state = state / nrm
        n = state.size.bit_length() - 1
        if 2 ** n != state.size:
            raise DimensionError("state vector length is not a power of two")
        return cls(n, np.outer(state, state.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        dim = 2 ** n
        return cls(n, np.eye(dim, dtype=complex) / dim)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def __repr__(self) -> str:
        return f"DensityMatrix(n={self.n}, purity={self.purity():.6g})"


@dataclass(frozen=True)
class DmVector:
    """Normalized vectorization of a density matrix with its norm factor."""

    n: int
    amplitudes: np.ndarray
    norm_factor: float


def vectorize(rho: DensityMatrix) -> DmVector:
    """Flatten rho row-major and normalize; the norm factor is ||rho||_F."""
    vec = rho.matrix.reshape(-1)
    norm = float(np.linalg.norm(vec))
    if norm < 1e-300:
        raise NormalizationError("cannot vectorize the zero matrix")
    return DmVector(rho.n, vec / norm, norm)


def devectorize(v: DmVector) -> np.ndarray:
    """Reconstruct the (rescaled) matrix whose vectorization is v."""
    dim = 2 ** v.n
    return (v.amplitudes * v.norm_factor).reshape(dim, dim)


def vec_overlap(a: DmVector, b: DmVector) -> complex:
    """<a|b> on normalized vectorizations, i.e. Tr(rho_a^dag rho_b)/(Ca*Cb)."""
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# -- generator construction ---------------------------------------------


def _check_super_cap(n: int) -> None:
    if 2 * n > dense_qubit_cap():
        raise CapacityError(
            f"superoperator for n={n} needs {2 * n} dense qubits, "
            f"cap is {dense_qubit_cap()}"
        )


def build_liouvillian(spec: LmeSpec) -> SuperOp:
    """Dense generator of the master equation on vectorized matrices.

    L = -i(H(x)I - I(x)H^T) + sum_i rate_i (F(x)F* - (F^dag F)(x)I/2
    - I(x)(F^T F^*)/2); the vectorized identity is always a left null
    vector (trace preservation).
    """
    _check_super_cap(spec.n)
    dim = 2 ** spec.n
    eye = np.eye(dim, dtype=complex)
    h = to_matrix(spec.hamiltonian)
    lmat = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for ch in spec.jumps:
        f = to_matrix(ch.op)
        fdf = f.conj().T @ f
        lmat += ch.rate * (
            np.kron(f, f.conj())
            - 0.5 * np.kron(fdf, eye)
            - 0.5 * np.kron(eye, fdf.T)
        )
    return SuperOp(spec.n, lmat)


def symbolic_ldl(hamiltonian, jumps, identity_op):
    """Term-by-term symbolic expansion of the squared generator.

    Works on any operator family supporting +, -, scalar *, @,
    ``dagger``/``transpose``/``conj`` and ``tensor`` (the numeric Pauli
    sums here, or polynomial-weighted sums in the inverse solver).
    ``hamiltonian`` must be Hermitian or None; ``jumps`` is a list of
    (rate, operator) pairs whose rates multiply like scalars.
    """
    iden = identity_op
    total = None

    def acc(x):
        nonlocal total
        total = x if total is None else total + x

    if hamiltonian is not None:
        h = hamiltonian
        ht = h.transpose()
        ad = h.tensor(iden) - iden.tensor(ht)
        acc(ad @ ad)
        for rate, f in jumps:
            fd = f.dagger()
            ft = f.transpose()
            fc = f.conj()
            fdf = fd @ f
            ftfc = ft @ fc
            cross = (
                (h @ f).tensor(fc)
                - (fd @ h).tensor(ft)
                + fd.tensor(ft @ ht)
                - f.tensor(ht @ fc)
                + (fdf @ h - h @ fdf).tensor(iden) * 0.5
                + iden.tensor(ht @ ftfc - ftfc @ ht) * 0.5
            )
            acc((cross * 1j) * rate)
    for ra, fa in jumps:
        fad = fa.dagger()
        fat = fa.transpose()
        fac = fa.conj()
        fadfa = fad @ fa
        fatfac = fat @ fac
        for rb, fb in jumps:
            fbd = fb.dagger()
            fbt = fb.transpose()
            fbc = fb.conj()
            fbdfb = fbd @ fb
            fbtfbc = fbt @ fbc
            quad = (
                (fad @ fb).tensor(fat @ fbc)
                - fad.tensor(fat @ fbtfbc) * 0.5
                - fb.tensor(fatfac @ fbc) * 0.5
                - (fad @ fbd @ fb).tensor(fat) * 0.5
                - (fadfa @ fb).tensor(fbc) * 0.5
                + fadfa.tensor(fbtfbc) * 0.25
                + fbdfb.tensor(fatfac) * 0.25
                + iden.tensor(fatfac @ fbtfbc) * 0.25
                + (fadfa @ fbdfb).tensor(iden) * 0.25
            )
            acc(quad * (ra * rb))
    if total is None:
        total = iden.tensor(iden) * 0.0
    return total


def exchange_conjugate(doubled: PauliSum) -> PauliSum:
    """Image of a doubled-register sum under simultaneous row/column
    exchange and complex conjugation (the matrix map M -> S M^* S)."""
    if doubled.n % 2:
        raise DimensionError("doubled-register sum must have even qubit count")
    half = doubled.n // 2
    mask = (1 << half) - 1
    terms: dict[PauliString, complex] = {}
    for word, coeff in doubled.terms.items():
        swapped = PauliString(
            word.n,
            (word.x >> half) | ((word.x & mask) << half),
            (word.z >> half) | ((word.z & mask) << half),
        )
        terms[swapped] = coeff.conjugate() * word.transpose_sign
    return PauliSum(doubled.n, terms)


def exchange_symmetry_defect(doubled: PauliSum) -> float:
    """Max coefficient violation of M = S M^* S (zero for any squared
    generator); this is the Pauli-basis form of the g_ij pairing rule."""
    return doubled.max_coeff_diff(exchange_conjugate(doubled))


def build_ldl(spec: LmeSpec) -> tuple[SuperOp, PauliSum]:
    """Dense and symbolic forms of the squared generator.

    The symbolic form is expanded term by term from (H, jumps) and then
    cross-checked against the Pauli decomposition of the dense product
    L^dag L; disagreement beyond 1e-10 means a construction bug and
    raises.
    """
    liouv = build_liouvillian(spec)
    dense = liouv.matrix.conj().T @ liouv.matrix
    sym = symbolic_ldl(
        spec.hamiltonian if spec.hamiltonian.terms else None,
        [(ch.rate, ch.op) for ch in spec.jumps],
        PauliSum.identity(spec.n),
    )
    decomposed = pauli_decompose(dense)
    gap = sym.max_coeff_diff(decomposed)
    if gap > 1e-10:
        raise WorkbenchError(
            f"symbolic and dense squared generators disagree by {gap:.3e}"
        )
    defect = exchange_symmetry_defect(sym)
    if defect > 1e-10:
        raise WorkbenchError(
            f"squared generator violates exchange-conjugation pairing by {defect:.3e}"
        )
    return SuperOp(spec.n, dense), sym


def exchange_matrix(n: int) -> np.ndarray:
    """Permutation S with S vec(M) = vec(M^T); swaps the row and column
    registers qubit by qubit, and S^2 = I."""
    dim = 2 ** n
    s = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            s[i * dim + j, j * dim + i] = 1.0
    return s


def apply_exchange_conj(vec: np.ndarray, n: int) -> np.ndarray:
    """The antilinear map v -> S conj(v) without forming S."""
    dim = 2 ** n
    return np.conj(vec).reshape(dim, dim).T.reshape(-1)


# -- steady states -------------------------------------------------------


def _null_space(matrix: np.ndarray, rtol: float = NULL_SPACE_RTOL) -> np.ndarray:
    """Orthonormal right null-space basis (columns) by SVD."""
    _, svals, vh = np.linalg.svd(matrix)
    smax = svals[0] if svals.size else 0.0
    if smax == 0.0:
        return np.eye(matrix.shape[1], dtype=complex)
    rank = int(np.sum(svals > rtol * smax))
    return vh[rank:].conj().T


def steady_state(liouv: SuperOp) -> list[DensityMatrix]:
    """Steady density matrices spanning the null space of the generator.

    Each null vector is devectorized, Hermitized, eigenvalue-clipped to
    PSD and trace-normalized.  If any basis element resists that repair
    (a traceless direction, or large clipped mass — both symptoms of a
    degenerate steady space) a warning is emitted and the raw Hermitized,
    Frobenius-normalized basis is returned unvalidated.
    """
    basis = _null_space(liouv.matrix)
    if basis.shape[1] == 0:
        raise NoSteadyStateError("generator has no numerical null space")
    dim = 2 ** liouv.n
    repaired = []
    degenerate = False
    for k in range(basis.shape[1]):
        mat = basis[:, k].reshape(dim, dim)
        herm = (mat + mat.conj().T) / 2
        tr = np.trace(herm).real
        if abs(tr) < 1e-8:
            degenerate = True
            break
        herm = herm / tr
        evals, evecs = np.linalg.eigh(herm)
        clipped = np.clip(evals, 0.0, None)
        repair_mass = float(np.sum(np.abs(evals - clipped)))
        if repair_mass > 0.25:
            degenerate = True
            break
        fixed = (evecs * clipped) @ evecs.conj().T
        fixed = fixed / np.trace(fixed).real
        repaired.append(DensityMatrix(liouv.n, fixed))
    if degenerate:
        warnings.warn(
            "degenerate steady space: PSD repair failed on a basis element; "
            "returning the raw Hermitized null-space basis",
            stacklevel=2,
        )
        out = []
        for k in range(basis.shape[1]):
            mat = basis[:, k].reshape(dim, dim)
            herm = (mat + mat.conj().T) / 2
            herm = herm / np.linalg.norm(herm)
            out.append(DensityMatrix(liouv.n, herm, validate=False))
        return out
    return repaired


# -- time evolution --------------------------------------------------------


def evolve_vector(lmat: np.ndarray, v0: np.ndarray, t: float, steps: int) -> np.ndarray:
    """Classical fixed-step 4th-order integration of dv/dt = L v."""
    if t < 0:
        raise ValidationError("evolution time must be non-negative")
    if steps < 1:
        raise ValidationError("need at least one integration step")
    v = np.array(v0, dtype=complex)
    h = t / steps
    for _ in range(steps):
        k1 = lmat @ v
        k2 = lmat @ (v + 0.5 * h * k1)
        k3 = lmat @ (v + 0.5 * h * k2)
        k4 = lmat @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(v)):
            raise InstabilityError(
                f"integration diverged at step size {h:.3e}; increase steps"
            )
    return v


def evolve(liouv: SuperOp, rho0: DensityMatrix, t: float, steps: int) -> DensityMatrix:
    """Propagate rho0 for time t with ``steps`` fixed substeps."""
    if rho0.n != liouv.n:
        raise DimensionError("state and generator qubit counts differ")
    v = evolve_vector(liouv.matrix, rho0.matrix.reshape(-1), t, steps)
    dim = 2 ** liouv.n
    mat = v.reshape(dim, dim)
    mat = (mat + mat.conj().T) / 2
    tr = np.trace(mat).real
    if abs(tr - 1.0) > 1e-6:
        raise InstabilityError(
            f"trace drifted to {tr:.6f}; increase steps for t={t:.3g}"
        )
    return DensityMatrix(liouv.n, mat / tr, validate=False)


def step_halving_delta(
    liouv: SuperOp, rho0: DensityMatrix, t: float, steps: int
) -> float:
    """Max-abs change of the evolved vector when the step size is halved;
    the convergence check behind the fixed-step contract."""
    v0 = rho0.matrix.reshape(-1)
    coarse = evolve_vector(liouv.matrix, v0, t, steps)
    fine = evolve_vector(liouv.matrix, v0, t, 2 * steps)
    return float(np.abs(coarse - fine).max())


# -- spectra and runtime bounds -------------------------------------------


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    gap: float | None
    steady_dim: int
    diagonalizable: bool
    mixing_time_estimate: float | None
    eigvec_condition: float = field(default=np.nan)

    def to_json_dict(self) -> dict:
        return {
            "gap": self.gap,
            "steady_dim": self.steady_dim,
            "diagonalizable": self.diagonalizable,
            "mixing_time_estimate": self.mixing_time_estimate,
            "eigenvalues": [[float(e.real), float(e.imag)] for e in self.eigenvalues],
        }


def random_density_matrix(n: int, rng: np.random.Generator) -> DensityMatrix:
    """Ginibre-distributed full-rank random density matrix."""
    dim = 2 ** n
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    mat = g @ g.conj().T
    return DensityMatrix(n, mat / np.trace(mat).real)


def trace_norm(mat: np.ndarray) -> float:
    return float(np.linalg.svd(mat, compute_uv=False).sum())


DIAGONALIZABLE_COND_MAX = 1e8


def spectral_diagnostics(
    liouv: SuperOp, mixing_probes: int = 6, seed: int = 0
) -> SpectralReport:
    """Eigen-spectrum, decay gap, diagonalizability and a probe-based
    mixing-time estimate (a lower bound: the true mixing time quantifies
    over all state pairs, the probes sample a few)."""
    evals, evecs = np.linalg.eig(liouv.matrix)
    nonzero_re = np.abs(evals.real)[np.abs(evals.real) > 1e-9]
    gap = float(nonzero_re.min()) if nonzero_re.size else None
    cond = float(np.linalg.cond(evecs))
    diagonalizable = bool(cond < DIAGONALIZABLE_COND_MAX)
    steady_dim = _null_space(liouv.matrix).shape[1]
    mixing = _mixing_time_estimate(liouv, gap, diagonalizable, mixing_probes, seed)
    return SpectralReport(
        eigenvalues=evals,
        gap=gap,
        steady_dim=steady_dim,
        diagonalizable=diagonalizable,
        mixing_time_estimate=mixing,
        eigvec_condition=cond,
    )


def _mixing_time_estimate(
    liouv: SuperOp,
    gap: float | None,
    diagonalizable: bool,
    probes: int,
    seed: int,
) -> float | None:
    if gap is None or probes < 1:
        return None
    dim = 2 ** liouv.n
    if diagonalizable:
        evals, evecs = np.linalg.eig(liouv.matrix)
        inv = np.linalg.inv(evecs)

        def propagate(vec, t):
            return evecs @ (np.exp(evals * t) * (inv @ vec))

    else:

        def propagate(vec, t):
            return scipy.linalg.expm(liouv.matrix * t) @ vec

    rng = np.random.default_rng(seed)

    def random_pure(n):
        vec = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        vec /= np.linalg.norm(vec)
        return np.outer(vec, vec.conj())

    estimate = 0.0
    for probe in range(probes):
        # alternate full-rank and pure pairs; the slowest contracting
        # directions sit at extreme points of the state set, which
        # full-rank probes systematically miss
        if probe % 2:
            delta = (
                random_density_matrix(liouv.n, rng).matrix
                - random_density_matrix(liouv.n, rng).matrix
            )
        else:
            delta = random_pure(liouv.n) - random_pure(liouv.n)
        v0 = delta.reshape(-1)
        target = trace_norm(delta) / 2.0

        def distance(t):
            return trace_norm(propagate(v0, t).reshape(dim, dim))

        t_hi = 1.0 / gap
        doublings = 0
        while distance(t_hi) > target:
            t_hi *= 2.0
            doublings += 1
            if doublings > 80:
                return None
        t_lo = 0.0 if doublings == 0 else t_hi / 2.0
        for _ in range(60):
            mid = 0.5 * (t_lo + t_hi)
            if distance(mid) <= target:
                t_hi = mid
            else:
                t_lo = mid
        estimate = max(estimate, t_hi)
    return estimate


def runtime_bound(kind: str, value: float, n: int, eps: float) -> float:
    """Sufficient evolution time to reach vectorized overlap 1 - eps.

    kind="hermitian" uses the decay gap: t = (n ln2 / 2 + ln(1/sqrt(eps)))/gap.
    kind="mixing" uses the mixing time: t = t_mix (n + log2(1/eps)) / 2.
    """
    if value <= 0:
        raise ValidationError("gap / mixing time must be positive")
    if not 0 < eps <= 1:
        raise ValidationError("eps must lie in (0, 1]")
    if n < 1:
        raise ValidationError("qubit count must be positive")
    if kind == "hermitian":
        return (0.5 * np.log(2.0) * n + 0.5 * np.log(1.0 / eps)) / value
    if kind == "mixing":
        return value * (n + np.log2(1.0 / eps)) / 2.0
    raise ValidationError(f"unknown bound kind {kind!r}")


# -- squared-generator property checks --------------------------------------


@dataclass
class LdlPropertyReport:
    min_eigenvalue: float
    ground_energy: float
    ground_dim: int
    st_commutator_norm: float
    steady_dim: int | None
    spectrum_nonnegative: bool
    ground_energy_zero: bool
    st_symmetric: bool
    ground_matches_steady: bool | None

    @property
    def all_passed(self) -> bool:
        checks = [
            self.spectrum_nonnegative,
            self.ground_energy_zero,
            self.st_symmetric,
        ]
        if self.ground_matches_steady is not None:
            checks.append(self.ground_matches_steady)
        return all(checks)

    def to_json_dict(self) -> dict:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "ground_energy": self.ground_energy,
            "ground_dim": self.ground_dim,
            "st_commutator_norm": self.st_commutator_norm,
            "steady_dim": self.steady_dim,
            "spectrum_nonnegative": self.spectrum_nonnegative,
            "ground_energy_zero": self.ground_energy_zero,
            "st_symmetric": self.st_symmetric,
            "ground_matches_steady": self.ground_matches_steady,
            "all_passed": self.all_passed,
        }


def verify_ldl_properties(
    ldl: SuperOp, liouvillian: SuperOp | None = None
) -> LdlPropertyReport:
    """Check the structural properties every squared generator carries:
    non-negative spectrum with zero ground energy, commutation with the
    exchange/conjugation map, and (when the generator is supplied)
    agreement between ground-space and steady-space dimensions."""
    mat = (ldl.matrix + ldl.matrix.conj().T) / 2
    evals = np.linalg.eigvalsh(mat)
    scale = max(float(evals[-1]), 1.0)
    ground_dim = int(np.sum(evals < 1e-9 * scale))
    s = exchange_matrix(ldl.n)
    st_norm = float(np.linalg.norm(mat @ s - s @ mat.conj()))
    steady_dim = None
    if liouvillian is not None:
        steady_dim = _null_space(liouvillian.matrix).shape[1]
    return LdlPropertyReport(
        min_eigenvalue=float(evals[0]),
        ground_energy=float(abs(evals[0])),
        ground_dim=ground_dim,
        st_commutator_norm=st_norm,
        steady_dim=steady_dim,
        spectrum_nonnegative=bool(evals[0] >= -1e-9),
        ground_energy_zero=bool(abs(evals[0]) < 1e-8),
        st_symmetric=bool(st_norm < 1e-9),
        ground_matches_steady=None if steady_dim is None else ground_dim == steady_dim,
    )


# -- JSON interchange --------------------------------------------------------


def _sum_to_triples(s: PauliSum) -> list:
    return [[c.real, c.imag, w.letters] for w, c in s.sorted_terms()]


def _sum_from_triples(triples, n: int | None = None) -> PauliSum:
    entries = [(complex(re, im), letters) for re, im, letters in triples]
    if not entries:
        if n is None:
            raise ValidationError("empty term list needs an explicit qubit count")
        return PauliSum.zero(n)
    return PauliSum.from_letter_terms(entries)


def lme_to_json_dict(spec: LmeSpec, **extra) -> dict:
    out = {
        "n": spec.n,
        "hamiltonian": _sum_to_triples(spec.hamiltonian),
        "jumps": [
            {"rate": ch.rate, "op": _sum_to_triples(ch.op)} for ch in spec.jumps
        ],
    }
    out.update(extra)
    return out


def lme_from_json_dict(data: dict) -> tuple[LmeSpec, dict]:
    """Parse an LmeSpec; unknown keys are returned as a side dict."""
    try:
        n = int(data["n"])
        ham = _sum_from_triples(data["hamiltonian"], n)
        jumps = tuple(
            JumpChannel(float(j["rate"]), _sum_from_triples(j["op"], n))
            for j in data["jumps"]
        )
    except KeyError as exc:
        raise ValidationError(f"LME spec is missing key {exc}") from exc
    extras = {k: v for k, v in data.items() if k not in ("n", "hamiltonian", "jumps")}
    return LmeSpec(n, ham, jumps), extras


def load_lme(path) -> tuple[LmeSpec, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return lme_from_json_dict(json.load(fh))
