"""Finite classical models for commuting observable families.

A pairwise-commuting family shares an eigenbasis; its vectors serve as
the sample points omega.  The state supplies the weight mu(omega), and
each registered operator contributes the vector of its eigenvalues
f_A(omega).  The check_* functions compare the classical probability
rules (distribution, joint distribution, composition, products) against
dense quantum traces computed through independent eigendecompositions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import VerificationError
from .pauli import LambdaIndex, PauliString, commutes, lambda_element
from .states import (
    DenseState,
    GhzSuperposition,
    StateModel,
    expectation,
    maximally_mixed,
    pi_vector,
    random_density,
    to_density_matrix,
)

Operator = Union[PauliString, np.ndarray]

DIM_LIMIT = 64

# "almost everywhere" on a finite space: every point of positive weight
SUPPORT_ATOL = 1e-14

ATOL_TRACE = 1e-9
ATOL_DIAGONAL = 1e-8
ATOL_COMMUTATOR = 1e-10
ATOL_PULLBACK = 1e-10

# eigenvalues closer than this belong to one spectral point
_CLUSTER_GAP = 1e-6

_BASIS_SEED = 53


def _as_matrix(operator: Operator) -> np.ndarray:
    if isinstance(operator, PauliString):
        return operator.to_matrix()
    m = np.array(operator, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("operators must be square matrices")
    return m


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _cluster(values: np.ndarray) -> np.ndarray:
    """Snap near-equal reals to one representative per spectral point."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values)
    ordered = values[order]
    out = np.empty_like(values)
    start = 0
    for i in range(1, len(ordered) + 1):
        if i == len(ordered) or ordered[i] - ordered[i - 1] > _CLUSTER_GAP:
            rep = float(ordered[start:i].mean())
            if abs(rep - round(rep)) < 1e-9:
                rep = float(round(rep))
            out[order[start:i]] = rep
            start = i
    return out


def _member_mask(values: np.ndarray, delta: Iterable[float]) -> np.ndarray:
    targets = list(delta)
    mask = np.zeros(len(values), dtype=bool)
    for d in targets:
        mask |= np.abs(values - d) < _CLUSTER_GAP
    return mask


def _spectral_pairs(matrix: np.ndarray) -> list[tuple[float, np.ndarray]]:
    """(eigenvalue, projector) pairs from a fresh eigendecomposition."""
    eigvals, eigvecs = np.linalg.eigh(_hermitize(matrix))
    snapped = _cluster(eigvals)
    pairs = []
    for value in sorted(set(snapped.tolist())):
        cols = eigvecs[:, snapped == value]
        pairs.append((value, cols @ cols.conj().T))
    return pairs


def _projector(matrix: np.ndarray, delta: Iterable[float]) -> np.ndarray:
    out = np.zeros(matrix.shape, dtype=complex)
    targets = list(delta)
    for value, proj in _spectral_pairs(matrix):
        if any(abs(value - d) < _CLUSTER_GAP for d in targets):
            out += proj
    return out


def _g_at(g: Mapping[float, float] | Callable[[float], float], x: float) -> float:
    if callable(g):
        return float(g(x))
    best = min(g, key=lambda key: abs(key - x))
    if abs(best - x) >= _CLUSTER_GAP:
        raise ValueError(f"function table does not cover spectrum value {x}")
    return float(g[best])


def apply_spectrally(
    operator: Operator, g: Mapping[float, float] | Callable[[float], float]
) -> np.ndarray:
    """g(A) assembled from A's spectral decomposition."""
    matrix = _as_matrix(operator)
    out = np.zeros(matrix.shape, dtype=complex)
    for value, proj in _spectral_pairs(matrix):
        out += _g_at(g, value) * proj
    return _hermitize(out)


def indicator_matrix(operator: Operator, delta: Iterable[float]) -> np.ndarray:
    """The spectral projector onto eigenvalues in delta (an event indicator)."""
    return _projector(_as_matrix(operator), delta)


@dataclass
class FiniteHVModel:
    """Sample points, weights, and per-operator value vectors."""

    basis: np.ndarray
    weights: np.ndarray
    rho: np.ndarray
    value_table: dict[str, np.ndarray] = field(default_factory=dict)
    spectra: dict[str, tuple[float, ...]] = field(default_factory=dict)
    matrices: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def omega_size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > SUPPORT_ATOL)

    def fresh_name(self, base: str) -> str:
        if base not in self.value_table:
            return base
        for k in itertools.count(2):
            if f"{base}~{k}" not in self.value_table:
                return f"{base}~{k}"
        raise AssertionError("unreachable")

    def register(self, name: str, operator: Operator) -> np.ndarray:
        """Add an operator that is diagonal in the model basis; returns its
        value vector and enforces the trace identity Tr[rho A] = sum mu f_A."""
        if name in self.value_table:
            raise ValueError(f"operator name {name!r} already registered")
        matrix = _as_matrix(operator)
        if matrix.shape != self.rho.shape:
            raise ValueError(f"operator {name!r} has wrong dimension")
        if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10:
            raise ValueError(f"operator {name!r} is not Hermitian")
        in_basis = self.basis.conj().T @ matrix @ self.basis
        off = in_basis - np.diag(np.diag(in_basis))
        residual = float(np.max(np.abs(off)))
        if residual > ATOL_DIAGONAL:
            raise VerificationError(
                f"operator {name!r} is not diagonal in the model basis "
                f"(residual {residual:.3e}); degeneracy resolution failed"
            )
        values = _cluster(np.real(np.diag(in_basis)))
        quantum = float(np.real(np.trace(self.rho @ matrix)))
        classical = float(self.weights @ values)
        if abs(quantum - classical) > ATOL_TRACE:
            raise VerificationError(
                f"operator {name!r}: trace {quantum!r} differs from the "
                f"weighted value sum {classical!r}"
            )
        self.value_table[name] = values
        self.spectra[name] = tuple(sorted(set(values.tolist())))
        self.matrices[name] = matrix
        return values

    def to_json_dict(self) -> dict:
        return {
            "omega": self.omega_size,
            "weights": [float(w) for w in self.weights],
            "operators": [
                {
                    "name": name,
                    "spectrum": list(self.spectra[name]),
                    "values": [float(v) for v in values],
                }
                for name, values in self.value_table.items()
            ],
        }


def _require_commuting(family: Sequence[Operator], matrices: Sequence[np.ndarray]) -> None:
    for i, j in itertools.combinations(range(len(family)), 2):
        a, b = family[i], family[j]
        if isinstance(a, PauliString) and isinstance(b, PauliString):
            if not commutes(a, b):
                raise ValueError(
                    f"family members {i} and {j} do not commute: "
                    f"{a.to_text()} vs {b.to_text()}"
                )
            continue
        ma, mb = matrices[i], matrices[j]
        if np.max(np.abs(ma @ mb - mb @ ma)) > ATOL_COMMUTATOR:
            raise ValueError(f"family members {i} and {j} do not commute")


def _default_names(family: Sequence[Operator]) -> list[str]:
    return [
        op.to_text() if isinstance(op, PauliString) else f"A{i}"
        for i, op in enumerate(family)
    ]


def build_model(
    state: StateModel,
    family: Sequence[Operator],
    names: Sequence[str] | None = None,
    seed: int = _BASIS_SEED,
) -> FiniteHVModel:
    """Common-eigenbasis model for a pairwise-commuting family.

    The basis comes from one random-coefficient combination of the family
    (fixed seed), with degenerate blocks refined operator by operator; the
    register step then certifies diagonality and the trace identity.
    """
    if not family:
        raise ValueError("family must not be empty")
    matrices = [_as_matrix(op) for op in family]
    dim = matrices[0].shape[0]
    if any(m.shape != (dim, dim) for m in matrices):
        raise ValueError("family members differ in dimension")
    if dim > DIM_LIMIT:
        raise ValueError(f"dimension {dim} exceeds the model limit {DIM_LIMIT}")
    rho = to_density_matrix(state)
    if rho.shape[0] != dim:
        raise ValueError(
            f"state dimension {rho.shape[0]} does not match the family ({dim})"
        )
    _require_commuting(family, matrices)
    if names is None:
        names = _default_names(family)
    if len(names) != len(family) or len(set(names)) != len(names):
        raise ValueError("names must be distinct, one per family member")

    rng = np.random.default_rng(seed)
    combo = _hermitize(
        sum(c * m for c, m in zip(rng.standard_normal(len(matrices)), matrices))
    )
    eigvals, basis = np.linalg.eigh(combo)
    blocks = _blocks_from(_cluster(eigvals))
    for matrix in matrices:
        new_blocks: list[np.ndarray] = []
        for idx in blocks:
            if len(idx) == 1:
                new_blocks.append(idx)
                continue
            sub = basis[:, idx]
            block = _hermitize(sub.conj().T @ matrix @ sub)
            block_vals, rotation = np.linalg.eigh(block)
            basis[:, idx] = sub @ rotation
            for piece in _blocks_from(_cluster(block_vals)):
                new_blocks.append(idx[piece])
        blocks = new_blocks

    weights = np.maximum(np.real(np.diag(basis.conj().T @ rho @ basis)), 0.0)
    if abs(float(weights.sum()) - 1.0) > 1e-12:
        raise VerificationError(f"weights sum to {weights.sum()!r}, not 1")

    model = FiniteHVModel(basis=basis, weights=weights, rho=rho)
    for name, matrix in zip(names, matrices):
        model.register(name, matrix)
    return model


def _blocks_from(snapped: np.ndarray) -> list[np.ndarray]:
    """Consecutive index runs sharing a snapped value (input is sorted)."""
    out = []
    start = 0
    for i in range(1, len(snapped) + 1):
        if i == len(snapped) or snapped[i] != snapped[start]:
            out.append(np.arange(start, i))
            start = i
    return out


def check_D(model: FiniteHVModel, a: str, delta: Iterable[float]) -> bool:
    """mu(f_A in delta) against the projector trace."""
    delta = list(delta)
    classical = float(model.weights[_member_mask(model.value_table[a], delta)].sum())
    quantum = float(np.real(np.trace(model.rho @ _projector(model.matrices[a], delta))))
    return abs(classical - quantum) <= ATOL_TRACE


def check_JD(
    model: FiniteHVModel,
    a: str,
    b: str,
    delta_a: Iterable[float],
    delta_b: Iterable[float],
) -> bool:
    """Joint membership measure against the product-projector trace."""
    delta_a, delta_b = list(delta_a), list(delta_b)
    mask = _member_mask(model.value_table[a], delta_a) & _member_mask(
        model.value_table[b], delta_b
    )
    classical = float(model.weights[mask].sum())
    quantum = float(
        np.real(
            np.trace(
                model.rho
                @ _projector(model.matrices[a], delta_a)
                @ _projector(model.matrices[b], delta_b)
            )
        )
    )
    return abs(classical - quantum) <= ATOL_TRACE


def check_FUNC(
    model: FiniteHVModel,
    a: str,
    g: Mapping[float, float] | Callable[[float], float],
) -> bool:
    """f_{g(A)} = g(f_A) on every positive-weight point, with g(A) formed
    spectrally and registered like any other family member."""
    g_matrix = apply_spectrally(model.matrices[a], g)
    g_values = model.register(model.fresh_name(f"g({a})"), g_matrix)
    expected = np.array([_g_at(g, v) for v in model.value_table[a]])
    support = model.support
    return bool(np.all(np.abs(g_values[support] - expected[support]) <= ATOL_TRACE))


def check_PROD(model: FiniteHVModel, a: str, b: str) -> bool:
    """f_{AB} = f_A * f_B on every positive-weight point."""
    product = model.matrices[a] @ model.matrices[b]
    values = model.register(model.fresh_name(f"{a}*{b}"), product)
    support = model.support
    direct = model.value_table[a][support] * model.value_table[b][support]
    return bool(np.all(np.abs(values[support] - direct) <= ATOL_TRACE))


def _as_mask(subset, size: int) -> np.ndarray:
    mask = np.asarray(subset)
    if mask.dtype == bool:
        if mask.shape != (size,):
            raise ValueError("mask length does not match the measure space")
        return mask
    out = np.zeros(size, dtype=bool)
    for idx in np.asarray(subset, dtype=int):
        if not 0 <= idx < size:
            raise ValueError(f"point {idx} outside the measure space")
        out[idx] = True
    return out


def check_measure_lemma(weights, s, s_alt, t, t_alt) -> bool:
    """If s/s_alt and t/t_alt differ only on zero-weight points, their
    intersections carry exactly equal measure."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and nonnegative")
    s, s_alt, t, t_alt = (_as_mask(x, len(w)) for x in (s, s_alt, t, t_alt))
    for left, right in ((s, s_alt), (s_alt, s), (t, t_alt), (t_alt, t)):
        # nonnegative weights: a zero sum means every term is zero
        if float(w[~left & right].sum()) != 0.0:
            raise ValueError("hypothesis failed: the swap sets carry measure")
    return float(w[s & t].sum()) == float(w[s_alt & t_alt].sum())


def random_measure_space(rng: np.random.Generator):
    """A finite measure with null points, plus set pairs differing only on
    those null points; input material for check_measure_lemma."""
    size = int(rng.integers(6, 13))
    weights = rng.random(size)
    weights[rng.random(size) < 0.5] = 0.0

    def pair():
        base = rng.random(size) < 0.5
        alt = base.copy()
        flips = (weights == 0.0) & (rng.random(size) < 0.5)
        alt[flips] = ~alt[flips]
        return base, alt

    s, s_alt = pair()
    t, t_alt = pair()
    return weights, s, s_alt, t, t_alt


def check_indicator_pullback(
    operator: Operator,
    g: Mapping[float, float] | Callable[[float], float],
    delta: Iterable[float],
    state: StateModel | None = None,
) -> bool:
    """Tr[rho chi_delta(g(A))] = Tr[rho chi_{g^{-1}(delta)}(A)]: selecting
    outcomes of g(A) is the same event as selecting their preimages on A."""
    matrix = _as_matrix(operator)
    n = matrix.shape[0].bit_length() - 1
    rho = to_density_matrix(state if state is not None else maximally_mixed(n))
    if rho.shape != matrix.shape:
        raise ValueError("state dimension does not match the operator")
    delta = list(delta)

    direct = float(np.real(np.trace(rho @ _projector(apply_spectrally(matrix, g), delta))))
    pullback_proj = np.zeros(matrix.shape, dtype=complex)
    for value, proj in _spectral_pairs(matrix):
        if any(abs(_g_at(g, value) - d) < _CLUSTER_GAP for d in delta):
            pullback_proj += proj
    pulled = float(np.real(np.trace(rho @ pullback_proj)))
    return abs(direct - pulled) <= ATOL_PULLBACK


def spectrum_subsets(
    spectrum: Sequence[float], rng: np.random.Generator | None = None
) -> list[tuple[float, ...]]:
    """Every subset when the spectrum is small; otherwise singletons,
    complements, and 32 seeded random subsets."""
    values = tuple(spectrum)
    if len(values) <= 8:
        return [
            subset
            for r in range(len(values) + 1)
            for subset in itertools.combinations(values, r)
        ]
    rng = rng or np.random.default_rng(_BASIS_SEED)
    out: list[tuple[float, ...]] = [()]
    for v in values:
        out.append((v,))
        out.append(tuple(u for u in values if u != v))
    for _ in range(32):
        mask = rng.random(len(values)) < 0.5
        out.append(tuple(v for v, keep in zip(values, mask) if keep))
    return out


def random_commuting_family(
    rng: np.random.Generator, n: int, count: int = 2
) -> list[np.ndarray]:
    """Hermitian matrices with small-integer spectra sharing one random
    eigenbasis, so they commute by construction."""
    if not 1 <= n <= 6:
        raise ValueError("family generator covers 1 to 6 sites")
    dim = 1 << n
    ginibre = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    unitary, upper = np.linalg.qr(ginibre)
    unitary = unitary * (np.diag(upper) / np.abs(np.diag(upper)))
    family = []
    for _ in range(count):
        diagonal = rng.integers(-2, 3, size=dim).astype(float)
        family.append(_hermitize((unitary * diagonal) @ unitary.conj().T))
    return family


def run_fine_suite(seed: int = 0) -> dict:
    """Fixed battery of model constructions and rule checks; the returned
    counts feed the command-line verifier."""
    rng = np.random.default_rng(seed)
    checks = 0
    failures = 0

    def note(ok: bool) -> None:
        nonlocal checks, failures
        checks += 1
        failures += not ok

    models = 0

    pi = pi_vector()
    pi_state = DenseState(np.outer(pi, pi.conj()))
    model = build_model(
        pi_state, [PauliString.from_text("+ZI"), PauliString.from_text("+IZ")]
    )
    models += 1
    note(check_D(model, "+ZI", (1.0,)))
    note(check_JD(model, "+ZI", "+IZ", (1.0,), (-1.0,)))
    note(check_FUNC(model, "+ZI", {-1.0: 1.0, 1.0: 1.0}))
    note(check_PROD(model, "+ZI", "+IZ"))

    ghz = GhzSuperposition(3, 2**-0.5, 2**-0.5)
    family = [lambda_element(LambdaIndex(3, p)) for p in range(8)]
    model = build_model(ghz, family)
    models += 1
    for word in family:
        classical = float(model.weights @ model.value_table[word.to_text()])
        note(abs(classical - expectation(ghz, word).real) <= ATOL_TRACE)
    note(check_PROD(model, family[4].to_text(), family[5].to_text()))

    for _ in range(4):
        n = int(rng.integers(1, 4))
        pair = random_commuting_family(rng, n)
        state = random_density(n, rng)
        model = build_model(state, pair, names=("A", "B"))
        models += 1
        for delta in spectrum_subsets(model.spectra["A"]):
            note(check_D(model, "A", delta))
        for delta_a in ((), model.spectra["A"][:1], model.spectra["A"]):
            for delta_b in ((), model.spectra["B"][:1], model.spectra["B"]):
                note(check_JD(model, "A", "B", delta_a, delta_b))
        note(check_FUNC(model, "A", lambda x: x * x))
        note(check_PROD(model, "A", "B"))
        note(
            check_indicator_pullback(
                pair[0], lambda x: abs(x), model.spectra["A"][:2], state
            )
        )

    for _ in range(100):
        note(check_measure_lemma(*random_measure_space(rng)))

    return {
        "suite": "fine",
        "models": models,
        "checks": checks,
        "failures": failures,
        "ok": failures == 0,
    }
