"""Exact symbolic algebra over n-qubit Pauli words with complex weights.

Conventions fixed once for the whole package:

* qubit 0 is the most significant bit of matrix indices,
* product phases are folded into coefficients immediately, so stored
  words are always phase-free,
* coefficients with magnitude below ``COEFF_PRUNE_TOL`` are dropped by
  every arithmetic operation.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import CapacityError, DimensionError, ValidationError

LETTERS = "IXYZ"

COEFF_PRUNE_TOL = 1e-14

# Dense realizations are refused above this many qubits (4096x4096);
# LG_DENSE_CAP overrides at runtime.
DEFAULT_DENSE_CAP = 12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

# (x bit, z bit) <-> letter, with Y = i*X*Z carrying its usual phase.
_BITS_TO_LETTER = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_LETTER_TO_BITS = {v: k for k, v in _BITS_TO_LETTER.items()}

_I4 = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def dense_qubit_cap() -> int:
    """Current dense-matrix qubit cap (env var LG_DENSE_CAP overrides)."""
    raw = os.environ.get("LG_DENSE_CAP")
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValidationError(f"LG_DENSE_CAP={raw!r} is not an integer") from exc
    if cap < 1:
        raise ValidationError("LG_DENSE_CAP must be positive")
    return cap


def _check_dense(n: int) -> None:
    cap = dense_qubit_cap()
    if n > cap:
        raise CapacityError(
            f"dense realization of {n} qubits exceeds the cap of {cap} "
            f"(dim {2 ** n}); raise LG_DENSE_CAP only if you have the memory"
        )


class PauliString:
    """An n-qubit Pauli word, stored as X/Z bitmasks (bit k = qubit k)."""

    __slots__ = ("n", "x", "z")

    def __init__(self, n: int, x: int = 0, z: int = 0):
        if n < 0:
            raise ValidationError("qubit count must be non-negative")
        self.n = n
        self.x = x
        self.z = z

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        x = z = 0
        for k, letter in enumerate(letters):
            if letter not in _LETTER_TO_BITS:
                raise ValidationError(f"invalid Pauli letter {letter!r}")
            xb, zb = _LETTER_TO_BITS[letter]
            x |= xb << k
            z |= zb << k
        return cls(len(letters), x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_TO_LETTER[((self.x >> k) & 1, (self.z >> k) & 1)]
            for k in range(self.n)
        )

    def letter(self, k: int) -> str:
        return _BITS_TO_LETTER[((self.x >> k) & 1, (self.z >> k) & 1)]

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def y_count(self) -> int:
        return (self.x & self.z).bit_count()

    @property
    def transpose_sign(self) -> int:
        """Sign picked up under transposition (equally, conjugation)."""
        return -1 if self.y_count & 1 else 1

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def mul(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        """Product self*other as (phase, word); phase is a fourth root of 1."""
        if self.n != other.n:
            raise DimensionError(
                f"cannot multiply words on {self.n} and {other.n} qubits"
            )
        a, b, c, d = self.x, self.z, other.x, other.z
        expo = (
            (a & b).bit_count()
            + (c & d).bit_count()
            + 2 * (b & c).bit_count()
            - ((a ^ c) & (b ^ d)).bit_count()
        ) & 3
        return _I4[expo], PauliString(self.n, a ^ c, b ^ d)

    def tensor(self, other: "PauliString") -> "PauliString":
        return PauliString(
            self.n + other.n,
            self.x | (other.x << self.n),
            self.z | (other.z << self.n),
        )

    def to_matrix(self) -> np.ndarray:
        _check_dense(self.n)
        out = np.ones((1, 1), dtype=complex)
        for letter in self.letters:
            out = np.kron(out, PAULI_MATRICES[letter])
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.n == other.n
            and self.x == other.x
            and self.z == other.z
        )

    def __hash__(self) -> int:
        return hash((self.n, self.x, self.z))

    def __lt__(self, other: "PauliString") -> bool:
        return self.letters < other.letters

    def __repr__(self) -> str:
        return f"PauliString({self.letters!r})"


def pauli_mul(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Exact product of two Pauli words: a*b = phase * word."""
    return a.mul(b)


class PauliSum:
    """A complex-weighted sum of Pauli words on a fixed qubit count.

    Instances are treated as immutable; arithmetic returns new sums and
    prunes coefficients below ``COEFF_PRUNE_TOL``.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        pruned = {}
        for word, coeff in (terms or {}).items():
            if word.n != n:
                raise DimensionError(
                    f"term on {word.n} qubits in a {n}-qubit sum"
                )
            c = complex(coeff)
            if abs(c) >= COEFF_PRUNE_TOL:
                pruned[word] = c
        self.terms = pruned

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "PauliSum":
        return cls(n, {})

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, {PauliString.identity(n): coeff})

    @classmethod
    def from_term(cls, word: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(word.n, {word: coeff})

    @classmethod
    def from_letter_terms(cls, entries) -> "PauliSum":
        """Build from an iterable of (coeff, letters) pairs."""
        entries = list(entries)
        if not entries:
            raise ValidationError("need at least one (coeff, letters) entry")
        n = len(entries[0][1])
        terms: dict[PauliString, complex] = {}
        for coeff, letters in entries:
            word = PauliString.from_letters(letters)
            if word.n != n:
                raise DimensionError("mixed word lengths in term list")
            terms[word] = terms.get(word, 0.0) + complex(coeff)
        return cls(n, terms)

    # -- bookkeeping ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def coeff(self, word) -> complex:
        if isinstance(word, str):
            word = PauliString.from_letters(word)
        return self.terms.get(word, 0.0 + 0.0j)

    def sorted_terms(self) -> list[tuple[PauliString, complex]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].letters)

    def max_weight(self) -> int:
        return max((w.weight for w in self.terms), default=0)

    # -- linear structure ----------------------------------------------

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n != other.n:
            raise DimensionError("qubit counts differ in sum")
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            terms[word] = terms.get(word, 0.0) + coeff
        return PauliSum(self.n, terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __neg__(self) -> "PauliSum":
        return PauliSum(self.n, {w: -c for w, c in self.terms.items()})

    def __mul__(self, scalar) -> "PauliSum":
        return PauliSum(self.n, {w: c * scalar for w, c in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        if self.n != other.n:
            raise DimensionError("qubit counts differ in product")
        terms: dict[PauliString, complex] = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                phase, word = wa.mul(wb)
                terms[word] = terms.get(word, 0.0) + ca * cb * phase
        return PauliSum(self.n, terms)

    # -- involutions ----------------------------------------------------

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n, {w: c.conjugate() for w, c in self.terms.items()})

    def transpose(self) -> "PauliSum":
        return PauliSum(
            self.n, {w: c * w.transpose_sign for w, c in self.terms.items()}
        )

    def conj(self) -> "PauliSum":
        return PauliSum(
            self.n,
            {w: c.conjugate() * w.transpose_sign for w, c in self.terms.items()},
        )

    def tensor(self, other: "PauliSum") -> "PauliSum":
        terms: dict[PauliString, complex] = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                terms[wa.tensor(wb)] = ca * cb
        return PauliSum(self.n + other.n, terms)

    # -- queries ---------------------------------------------------------

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def hermiticity_defect(self) -> float:
        return max((abs(c.imag) for c in self.terms.values()), default=0.0)

    def trace(self) -> complex:
        return self.terms.get(PauliString.identity(self.n), 0.0) * (2 ** self.n)

    def frobenius_norm_sq(self) -> float:
        """||.||_F^2 = 2^n * sum |c|^2 (Pauli words are F-orthogonal)."""
        return (2 ** self.n) * sum(abs(c) ** 2 for c in self.terms.values())

    def max_coeff_diff(self, other: "PauliSum") -> float:
        if self.n != other.n:
            raise DimensionError("qubit counts differ in comparison")
        words = set(self.terms) | set(other.terms)
        return max(
            (abs(self.terms.get(w, 0.0) - other.terms.get(w, 0.0)) for w in words),
            default=0.0,
        )

    def to_matrix(self) -> np.ndarray:
        return to_matrix(self)

    def __repr__(self) -> str:
        if not self.terms:
            return f"PauliSum(0 on {self.n} qubits)"
        parts = [f"({c:.6g})*{w.letters}" for w, c in self.sorted_terms()[:6]]
        if len(self.terms) > 6:
            parts.append(f"... [{len(self.terms)} terms]")
        return "PauliSum(" + " + ".join(parts) + ")"


def tensor(a: PauliSum, b: PauliSum) -> PauliSum:
    """Tensor product; a's qubits come first (most significant)."""
    return a.tensor(b)


def to_matrix(s: PauliSum) -> np.ndarray:
    """Dense complex matrix of a Pauli sum, qubit 0 most significant."""
    _check_dense(s.n)
    dim = 2 ** s.n
    out = np.zeros((dim, dim), dtype=complex)
    for word, coeff in s.terms.items():
        out += coeff * word.to_matrix()
    return out


def pauli_decompose(m: np.ndarray) -> PauliSum:
    """Expand a square matrix in the Pauli basis.

    The coefficient of word P is Tr(P m) / 2^n; round-tripping through
    ``to_matrix`` reproduces m to working precision.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    if dim < 1 or (dim & (dim - 1)) != 0:
        raise DimensionError(f"matrix dimension {dim} is not a power of two")
    n = dim.bit_length() - 1

    terms: dict[PauliString, complex] = {}

    def descend(block: np.ndarray, x: int, z: int, k: int) -> None:
        if k == n:
            terms[PauliString(n, x, z)] = block[0, 0]
            return
        h = block.shape[0] // 2
        a = block[:h, :h]
        b = block[:h, h:]
        c = block[h:, :h]
        d = block[h:, h:]
        # split off qubit k: M = I(x)MI + X(x)MX + Y(x)MY + Z(x)MZ
        descend((a + d) / 2, x, z, k + 1)
        descend((b + c) / 2, x | (1 << k), z, k + 1)
        descend(1j * (b - c) / 2, x | (1 << k), z | (1 << k), k + 1)
        descend((a - d) / 2, x, z | (1 << k), k + 1)

    descend(m, 0, 0, 0)
    return PauliSum(n, terms)


# -- text format -------------------------------------------------------
#
# One term per line: "<re> <im> <letters>"; '#' starts a comment.


def format_pauli_sum(s: PauliSum) -> str:
    lines = [f"# {s.n} qubits, {len(s)} terms"]
    for word, coeff in s.sorted_terms():
        lines.append(f"{coeff.real!r} {coeff.imag!r} {word.letters}")
    return "\n".join(lines) + "\n"


def parse_pauli_sum(text: str) -> PauliSum:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValidationError(
                f"line {lineno}: expected '<re> <im> <letters>', got {raw!r}"
            )
        re_s, im_s, letters = parts
        try:
            coeff = complex(float(re_s), float(im_s))
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: bad coefficient") from exc
        for letter in letters:
            if letter not in LETTERS:
                raise ValidationError(
                    f"line {lineno}: letter {letter!r} is not one of I,X,Y,Z"
                )
        entries.append((coeff, letters))
    if not entries:
        raise ValidationError("no terms found in Pauli sum text")
    lengths = {len(letters) for _, letters in entries}
    if len(lengths) != 1:
        raise ValidationError(f"inconsistent word lengths {sorted(lengths)}")
    return PauliSum.from_letter_terms(entries)
