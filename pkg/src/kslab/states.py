"""State models and the expectation engine Tr[psi * word].

Four state families are supported: dense density matrices, product states
given by per-site Bloch vectors, the two-amplitude superposition
alpha|+...+> + beta|-...->, and the two-qubit Werner family
lambda*|pi><pi| + (1-lambda)/4 * I with |pi> = (|+-> + |-+>)/sqrt(2).
|+> and |-> are the sigma_z eigenstates throughout.

Every analytic fast path is validated exhaustively against the dense path
at small n by the test suite before being trusted at larger n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import VerificationError
from .pauli import (
    DENSE_CHECK_LIMIT,
    DENSE_STATE_LIMIT,
    LambdaIndex,
    PauliString,
    half_zmasks,
    lambda_element,
)

ATOL_SCALAR = 1e-10

# Summing the half-group term by term materializes 2^{n-1} masks once per n.
F_VALUE_LIMIT = 24


@dataclass(frozen=True, eq=False)
class DenseState:
    """Explicit density matrix on n <= 10 sites."""

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        dim = rho.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"dimension {dim} is not a power of two")
        if dim > 1 << DENSE_STATE_LIMIT:
            raise ValueError(f"dense states limited to n <= {DENSE_STATE_LIMIT}")
        if np.max(np.abs(rho - rho.conj().T)) > ATOL_SCALAR:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > ATOL_SCALAR:
            raise ValueError("density matrix trace is not 1")
        if np.linalg.eigvalsh(rho).min() < -ATOL_SCALAR:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return int(self.rho.shape[0]).bit_length() - 1


@dataclass(frozen=True)
class ProductState:
    """Uncorrelated state given by one Bloch vector per site."""

    bloch: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        vecs = tuple(tuple(float(c) for c in r) for r in self.bloch)
        if not vecs:
            raise ValueError("need at least one site")
        for r in vecs:
            if len(r) != 3:
                raise ValueError("each Bloch vector needs three components")
            if sum(c * c for c in r) > 1 + 1e-12:
                raise ValueError(f"Bloch vector {r} has norm > 1")
        object.__setattr__(self, "bloch", vecs)

    @classmethod
    def from_pattern(cls, pattern: str) -> "ProductState":
        """Z-aligned product state from a +/- character per site."""
        if not pattern or set(pattern) - {"+", "-"}:
            raise ValueError(f"pattern must be nonempty over +/-, got {pattern!r}")
        return cls(tuple((0.0, 0.0, 1.0 if c == "+" else -1.0) for c in pattern))

    @property
    def n(self) -> int:
        return len(self.bloch)


@dataclass(frozen=True)
class GhzSuperposition:
    """alpha|+...+> + beta|-...-> on n sites."""

    n: int
    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one site")
        alpha, beta = complex(self.alpha), complex(self.beta)
        if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-12:
            raise ValueError("amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


@dataclass(frozen=True)
class WernerState:
    """lambda*|pi><pi| + (1-lambda)/4 * I on two sites."""

    lam: float

    def __post_init__(self) -> None:
        if not 0 <= self.lam <= 1:
            raise ValueError(f"mixing weight must lie in [0, 1], got {self.lam}")

    @property
    def n(self) -> int:
        return 2


StateModel = Union[DenseState, ProductState, GhzSuperposition, WernerState]


@dataclass(frozen=True)
class HnObservable:
    """The rank-two observable 2^{n-1}(|+...+><+...+| + |-...-><-...-|)."""

    n: int

    def matrix(self) -> np.ndarray:
        if self.n > DENSE_STATE_LIMIT:
            raise ValueError(f"dense form limited to n <= {DENSE_STATE_LIMIT}")
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=complex)
        out[0, 0] = out[dim - 1, dim - 1] = 1 << (self.n - 1)
        return out

    def half_group_sum(self) -> np.ndarray:
        """The same operator assembled word by word (dense-check sizes only)."""
        if self.n > DENSE_CHECK_LIMIT:
            raise ValueError(f"word-sum form limited to n <= {DENSE_CHECK_LIMIT}")
        return sum(
            lambda_element(LambdaIndex(self.n, p)).to_matrix()
            for p in range(1 << (self.n - 1))
        )


def pi_vector() -> np.ndarray:
    """The Bell state (|+-> + |-+>)/sqrt(2) in the z basis."""
    return np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)


def maximally_mixed(n: int) -> DenseState:
    dim = 1 << n
    return DenseState(np.eye(dim, dtype=complex) / dim)


def random_density(n: int, rng: np.random.Generator) -> DenseState:
    """Ginibre-sampled density matrix."""
    dim = 1 << n
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return DenseState(rho / np.trace(rho))


def to_density_matrix(state: StateModel) -> np.ndarray:
    if isinstance(state, DenseState):
        return state.rho.copy()
    if state.n > DENSE_STATE_LIMIT:
        raise ValueError(f"dense form limited to n <= {DENSE_STATE_LIMIT}")
    if isinstance(state, ProductState):
        out = np.array([[1.0]], dtype=complex)
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
        for rx, ry, rz in state.bloch:
            site = (np.eye(2) + rx * sx + ry * sy + rz * sz) / 2
            out = np.kron(out, site)
        return out
    if isinstance(state, GhzSuperposition):
        dim = 1 << state.n
        vec = np.zeros(dim, dtype=complex)
        vec[0] = state.alpha
        vec[dim - 1] = state.beta
        return np.outer(vec, vec.conj())
    if isinstance(state, WernerState):
        pi = pi_vector()
        return state.lam * np.outer(pi, pi.conj()) + (1 - state.lam) * np.eye(4) / 4
    raise TypeError(f"not a state model: {type(state).__name__}")


# <pi| A tensor B |pi> is nonzero only for matching letters.
_PI_LETTER_TABLE = {"II": 1.0, "XX": 1.0, "YY": 1.0, "ZZ": -1.0}


def expectation(state: StateModel, word: PauliString) -> complex:
    """Tr[psi * word], via the fastest applicable route."""
    if word.n != state.n:
        raise ValueError(f"site counts differ: state {state.n}, word {word.n}")
    phase = 1j**word.phase_exp

    if isinstance(state, DenseState):
        return complex(np.einsum("ij,ji->", state.rho, word.to_matrix()))

    if isinstance(state, ProductState):
        value = 1.0
        site_values = {"I": lambda r: 1.0, "X": lambda r: r[0],
                       "Y": lambda r: r[1], "Z": lambda r: r[2]}
        for letter, r in zip(word.letters, state.bloch):
            value *= site_values[letter](r)
        return 1j**word.sign_exp * value

    if isinstance(state, GhzSuperposition):
        a, b = state.alpha, state.beta
        z_sign = -1 if word.z_mask.bit_count() % 2 else 1
        if word.x_mask == 0:
            return phase * (abs(a) ** 2 + z_sign * abs(b) ** 2)
        if word.x_mask == (1 << word.n) - 1:
            return phase * (a.conjugate() * b + z_sign * a * b.conjugate())
        return 0j

    if isinstance(state, WernerState):
        pure = _PI_LETTER_TABLE.get(word.letters, 0.0) * 1j**word.sign_exp
        mixed = phase if word.is_identity_word else 0.0
        return state.lam * pure + (1 - state.lam) * mixed

    raise TypeError(f"not a state model: {type(state).__name__}")


@lru_cache(maxsize=None)
def _half_group_structure(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Z-masks of the lower index half and their bit parities."""
    z = half_zmasks(n)
    parity = (np.bitwise_count(z.astype(np.uint64)).astype(np.int64) & 1).astype(bool)
    return z, parity


def f_value(state: StateModel) -> float:
    """Sum of the 2^{n-1} lower-half expectations, F^psi.

    Analytic states sum their closed forms term by term (vectorized over
    the index); dense states additionally cross-check against the rank-two
    observable route.
    """
    n = state.n
    if n < 1:
        raise ValueError("need at least one site")

    if isinstance(state, GhzSuperposition):
        if n > F_VALUE_LIMIT:
            raise ValueError(f"term sum limited to n <= {F_VALUE_LIMIT}")
        _, parity = _half_group_structure(n)
        a2, b2 = abs(state.alpha) ** 2, abs(state.beta) ** 2
        terms = a2 + np.where(parity, -b2, b2)
        return float(terms.sum())

    if isinstance(state, ProductState):
        if n > F_VALUE_LIMIT:
            raise ValueError(f"term sum limited to n <= {F_VALUE_LIMIT}")
        z, _ = _half_group_structure(n)
        terms = np.ones(len(z))
        for j, (_, _, rz) in enumerate(state.bloch):
            terms *= np.where(((z >> j) & 1).astype(bool), rz, 1.0)
        return float(terms.sum())

    if isinstance(state, WernerState):
        total = sum(
            expectation(state, lambda_element(LambdaIndex(2, p))).real
            for p in range(2)
        )
        return float(total)

    if isinstance(state, DenseState):
        diag = np.diag(state.rho).real
        z, _ = _half_group_structure(n)
        ks = np.arange(1 << n, dtype=np.uint64)
        term_sum = 0.0
        for zp in z:
            signs = 1 - 2 * (np.bitwise_count(ks & np.uint64(zp)).astype(np.int64) & 1)
            term_sum += float(diag @ signs)
        direct = (1 << (n - 1)) * float(diag[0] + diag[-1])
        if abs(term_sum - direct) > ATOL_SCALAR * max(1.0, abs(direct)):
            raise VerificationError(
                f"term sum {term_sum!r} disagrees with rank-two route {direct!r}"
            )
        return term_sum

    raise TypeError(f"not a state model: {type(state).__name__}")


def bell_fidelity(state: StateModel) -> float:
    """Overlap with |pi>, computed two ways and cross-checked."""
    if state.n != 2:
        raise ValueError("defined for two sites only")
    corr = (
        1.0
        + expectation(state, PauliString.from_text("+XX")).real
        + expectation(state, PauliString.from_text("+YY")).real
        - expectation(state, PauliString.from_text("+ZZ")).real
    ) / 4
    pi = pi_vector()
    direct = float(np.real(pi.conj() @ to_density_matrix(state) @ pi))
    if abs(corr - direct) > ATOL_SCALAR:
        raise VerificationError(
            f"correlator route {corr!r} disagrees with overlap route {direct!r}"
        )
    return corr


def parse_state_spec(spec: str) -> StateModel:
    """Parse the CLI mini-language.

    Forms: ``ghz:n=5,alpha=0.6,beta=0.8``, ``product:+++++``,
    ``werner:lambda=0.5``, ``dense:@file``.
    """
    kind, sep, rest = spec.strip().partition(":")
    if not sep:
        raise ValueError(f"state spec needs a kind prefix, got {spec!r}")
    kind = kind.lower()
    if kind == "product":
        return ProductState.from_pattern(rest)
    if kind == "dense":
        if not rest.startswith("@"):
            raise ValueError("dense spec must reference a file: dense:@path")
        return read_dense_state(rest[1:])
    fields = {}
    for item in rest.split(","):
        key, eq, value = item.partition("=")
        if not eq or not key or not value:
            raise ValueError(f"malformed field {item!r} in state spec {spec!r}")
        fields[key.strip()] = value.strip()
    try:
        if kind == "ghz":
            return GhzSuperposition(
                int(fields.pop("n")),
                complex(fields.pop("alpha")),
                complex(fields.pop("beta")),
            )
        if kind == "werner":
            return WernerState(float(fields.pop("lambda")))
    except KeyError as exc:
        raise ValueError(f"state spec {spec!r} is missing field {exc}") from None
    raise ValueError(f"unknown state kind {kind!r}")


def read_dense_state(path: str) -> DenseState:
    """Load the documented text format: first line n, then 2^n rows of
    2^n whitespace-separated "re,im" pairs."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh]
    lines = [line for line in lines if line]
    if not lines:
        raise ValueError(f"{path}: empty state file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the site count") from None
    dim = 1 << n
    if len(lines) != dim + 1:
        raise ValueError(f"{path}: expected {dim} matrix rows, found {len(lines) - 1}")
    rows = np.zeros((dim, dim), dtype=complex)
    for i, line in enumerate(lines[1:]):
        pairs = line.split()
        if len(pairs) != dim:
            raise ValueError(f"{path}: row {i} has {len(pairs)} entries, expected {dim}")
        for j, pair in enumerate(pairs):
            re_part, sep, im_part = pair.partition(",")
            if not sep:
                raise ValueError(f"{path}: row {i} entry {j} is not a re,im pair")
            try:
                rows[i, j] = complex(float(re_part), float(im_part))
            except ValueError:
                raise ValueError(f"{path}: row {i} entry {j} is not numeric") from None
    return DenseState(rows)


def write_dense_state(path: str, state: StateModel) -> None:
    rho = to_density_matrix(state)
    n = rho.shape[0].bit_length() - 1
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n}\n")
        for row in rho:
            fh.write(" ".join(f"{c.real:.17g},{c.imag:.17g}" for c in row) + "\n")
