"""Exhaustive search over classical site-value assignments.

An assignment gives each site a pair of signs (vx_j, vy_j), the
pre-assigned outcomes of the two transverse single-site measurements.
Compound-word values are always derived by the product rule, carrying
each word's intrinsic sign.  This module recovers the classical bound by
brute force, produces enumeration certificates for the two standard
contradiction scenarios, and verifies the assignment identity behind the
bound in exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import VerificationError
from .inequalities import multipartite_bound
from .pauli import LambdaIndex, PauliString, commutes, lambda_element, pauli_mul, r_element, RIndex

# 2^28 assignments; a Gray-order sweep stays in the one-minute range.
ENUMERATION_CAP = 14

# Chunks below this size are not worth a separate process.
_MIN_CHUNK = 1 << 14

# Exhaustive product-rule cross-check up to 2^20 assignments.
_CROSS_CHECK_EXHAUSTIVE_LIMIT = 10

_SAMPLE_SEED = 104729
_CROSS_CHECK_SAMPLES = 512


@dataclass(frozen=True)
class Assignment:
    """Signs (vx_j, vy_j) in {-1, +1} for each of n sites."""

    n: int
    vx: tuple[int, ...]
    vy: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one site")
        for name, values in (("vx", self.vx), ("vy", self.vy)):
            if len(values) != self.n:
                raise ValueError(f"{name} must hold {self.n} entries")
            if any(v not in (-1, 1) for v in values):
                raise ValueError(f"{name} entries must be -1 or +1, got {values}")

    @classmethod
    def from_bits(cls, n: int, bits: int) -> "Assignment":
        """Decode a 2n-bit integer; set bits mean -1 (vx in the low half)."""
        if not 0 <= bits < 1 << (2 * n):
            raise ValueError(f"bits {bits} out of range for n = {n}")
        return cls(
            n,
            tuple(1 - 2 * ((bits >> j) & 1) for j in range(n)),
            tuple(1 - 2 * ((bits >> (n + j)) & 1) for j in range(n)),
        )

    def to_bits(self) -> int:
        bits = 0
        for j, v in enumerate(self.vx):
            bits |= (v < 0) << j
        for j, v in enumerate(self.vy):
            bits |= (v < 0) << (self.n + j)
        return bits


def g_value(a: Assignment) -> int:
    """Re(prod_j (vx_j + i*vy_j)) * prod_j vx_j as an exact integer."""
    re, im = 1, 0
    for vx, vy in zip(a.vx, a.vy):
        re, im = re * vx - im * vy, re * vy + im * vx
    return re * math.prod(a.vx)


def _scan_range(n: int, begin: int, end: int) -> tuple[int, int, int]:
    """Gray-order sweep of assignment counters [begin, end); returns
    (max g, counter attaining it first, min g).

    Counter k encodes the assignment gray(k) = k ^ (k >> 1); consecutive
    counters differ in one site value, so the Gaussian-integer product
    only rotates by +/-i per step.
    """
    bits = begin ^ (begin >> 1)
    vals = [1 - 2 * ((bits >> j) & 1) for j in range(2 * n)]
    re, im = 1, 0
    p_sign = 1
    for j in range(n):
        vx, vy = vals[j], vals[n + j]
        re, im = re * vx - im * vy, re * vy + im * vx
        if vx < 0:
            p_sign = -p_sign
    g = re * p_sign
    best_g, best_counter, min_g = g, begin, g
    for k in range(begin + 1, end):
        t = (k & -k).bit_length() - 1
        if t < n:
            s = vals[t] * vals[n + t]
            vals[t] = -vals[t]
            p_sign = -p_sign
        else:
            s = -vals[t - n] * vals[t]
            vals[t] = -vals[t]
        if s > 0:
            re, im = -im, re
        else:
            re, im = im, -re
        g = re * p_sign
        if g > best_g:
            best_g, best_counter = g, k
        elif g < min_g:
            min_g = g
    return best_g, best_counter, min_g


def _resolve_workers(requested: int | None, total_steps: int) -> int:
    workers = requested if requested is not None else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    env = os.environ.get("KS_LAB_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"KS_LAB_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ValueError("KS_LAB_THREADS must be >= 1")
        workers = min(workers, cap)
    return max(1, min(workers, total_steps // _MIN_CHUNK or 1))


@dataclass
class BoundReport:
    """Brute-force bound recovery with its witness and cross-check mode."""

    n: int
    bound_formula: float
    bound_bruteforce: int
    witness: Assignment
    g_min: int
    elapsed: float
    workers: int
    cross_check: str

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "bound_formula": self.bound_formula,
            "bound_bruteforce": self.bound_bruteforce,
            "witness_assignment": {"vx": list(self.witness.vx), "vy": list(self.witness.vy)},
            "g_min": self.g_min,
            "elapsed": self.elapsed,
            "workers": self.workers,
            "cross_check": self.cross_check,
        }


@lru_cache(maxsize=None)
def _word_tables(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(z-masks, signs) of the non-diagonal family halves, per canonical phase."""
    h = 1 << (n - 1)
    z_even = np.empty(h, dtype=np.int64)
    s_even = np.empty(h, dtype=np.int64)
    z_odd = np.empty(h, dtype=np.int64)
    s_odd = np.empty(h, dtype=np.int64)
    for q in range(h):
        word = lambda_element(LambdaIndex(n, h + q))
        z_even[q] = word.z_mask
        s_even[q] = {0: 1, 2: -1}[word.sign_exp]
        skew = r_element(RIndex(n, h + q))
        z_odd[q] = skew.z_mask
        s_odd[q] = {1: 1, 3: -1}[skew.sign_exp]
    return z_even, s_even, z_odd, s_odd


def _assignment_arrays(n: int, ints: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    shifts = np.arange(n, dtype=np.int64)
    vx = 1 - 2 * ((ints[:, None] >> shifts) & 1)
    vy = 1 - 2 * ((ints[:, None] >> (n + shifts)) & 1)
    return vx, vy


def _parity_dot(masks: np.ndarray, z_masks: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """For each mask m: sum_q signs[q] * (-1)^popcount(m & z_masks[q])."""
    out = np.empty(masks.shape[0], dtype=np.int64)
    step = max(1, (1 << 22) // max(1, z_masks.shape[0]))
    for lo in range(0, masks.shape[0], step):
        block = np.bitwise_count(masks[lo : lo + step, None] & z_masks[None, :])
        values = 1 - 2 * (block & np.uint8(1)).astype(np.int64)
        out[lo : lo + step] = values @ signs
    return out


def halfgroup_sums(n: int, ints: np.ndarray) -> np.ndarray:
    """Half-group sums for the encoded assignments, every diagonal-word
    value derived by the product rule from the non-diagonal half.

    f(O_p) = f(O_{p xor h}) * f(O_h) for p < h, so the all-x factor
    enters squared and drops out.
    """
    vx, vy = _assignment_arrays(n, ints)
    z_even, s_even, _, _ = _word_tables(n)
    neg_w = ((vx * vy) < 0).astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
    return _parity_dot(neg_w, z_even, s_even)


def _cross_check_bound(n: int, best_g: int, min_g: int, witness: Assignment) -> str:
    """Recompute the extrema through the product-rule word sums."""
    witness_sum = int(halfgroup_sums(n, np.array([witness.to_bits()], dtype=np.int64))[0])
    if witness_sum != best_g:
        raise VerificationError(
            f"witness word-sum {witness_sum} differs from enumerated maximum {best_g}"
        )
    if n <= _CROSS_CHECK_EXHAUSTIVE_LIMIT:
        sums = halfgroup_sums(n, np.arange(1 << (2 * n), dtype=np.int64))
        if int(sums.max()) != best_g or int(sums.min()) != min_g:
            raise VerificationError(
                f"word-sum extrema ({sums.min()}, {sums.max()}) differ from "
                f"enumerated ({min_g}, {best_g})"
            )
        return "exhaustive"
    rng = np.random.default_rng(_SAMPLE_SEED)
    ints = rng.integers(0, 1 << (2 * n), size=_CROSS_CHECK_SAMPLES, dtype=np.int64)
    sums = halfgroup_sums(n, ints)
    for value, encoded in zip(sums, ints):
        if not min_g <= value <= best_g:
            raise VerificationError(f"sampled word-sum {value} escapes the enumerated range")
        if int(value) != g_value(Assignment.from_bits(n, int(encoded))):
            raise VerificationError("sampled word-sum disagrees with the direct product")
    return "witness+sample"


def bruteforce_report(
    n: int,
    workers: int | None = None,
    cross_check: bool = True,
    cap: int = ENUMERATION_CAP,
) -> BoundReport:
    """Sweep all 2^{2n} assignments and reduce to the maximum of g_value.

    The counter space is split into contiguous ranges, one per worker;
    each range reduces locally and the partial results merge, keeping the
    earliest witness on ties.
    """
    if not 2 <= n <= cap:
        raise ValueError(f"enumeration needs 2 <= n <= {cap}, got {n}")
    total = 1 << (2 * n)
    started = time.perf_counter()
    worker_count = _resolve_workers(workers, total)
    if worker_count == 1:
        parts = [_scan_range(n, 0, total)]
    else:
        edges = [total * k // worker_count for k in range(worker_count + 1)]
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            parts = list(
                pool.map(_scan_range, itertools.repeat(n), edges[:-1], edges[1:])
            )
    best_g, best_counter, min_g = parts[0]
    for g, counter, low in parts[1:]:
        if g > best_g or (g == best_g and counter < best_counter):
            best_g, best_counter = g, counter
        if low < min_g:
            min_g = low
    elapsed = time.perf_counter() - started

    witness = Assignment.from_bits(n, best_counter ^ (best_counter >> 1))
    if g_value(witness) != best_g:
        raise VerificationError("witness does not attain the enumerated maximum")
    formula = multipartite_bound(n)
    if float(best_g) != formula:
        raise VerificationError(
            f"enumerated maximum {best_g} differs from the closed form {formula}"
        )
    mode = _cross_check_bound(n, best_g, min_g, witness) if cross_check else "off"
    return BoundReport(
        n=n,
        bound_formula=formula,
        bound_bruteforce=best_g,
        witness=witness,
        g_min=min_g,
        elapsed=elapsed,
        workers=worker_count,
        cross_check=mode,
    )


def bruteforce_bound(
    n: int,
    workers: int | None = None,
    cross_check: bool = True,
    cap: int = ENUMERATION_CAP,
) -> float:
    """Maximum of g_value over all assignments, as a float for comparison
    with the closed-form bound."""
    return float(bruteforce_report(n, workers, cross_check, cap).bound_bruteforce)


@dataclass(frozen=True)
class ContradictionCertificate:
    """Outcome of enumerating every candidate value assignment against a
    set of forced operator products."""

    scenario: str
    constraints: tuple[tuple[tuple[str, ...], int], ...]
    satisfying_count: int
    total_count: int
    conclusion: str
    dropped: int | None = None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "constraints": [
                {"words": list(words), "forced": forced}
                for words, forced in self.constraints
            ],
            "satisfying_count": self.satisfying_count,
            "total_count": self.total_count,
            "conclusion": self.conclusion,
            "dropped": self.dropped,
        }

    def to_table(self) -> str:
        lines = [f"scenario: {self.scenario}"]
        for idx, (words, forced) in enumerate(self.constraints):
            tag = "  (dropped)" if idx == self.dropped else ""
            lines.append(
                "  " + " * ".join(f"f({w})" for w in words) + f" = {forced:+d}{tag}"
            )
        lines.append(f"satisfying assignments: {self.satisfying_count} of {self.total_count}")
        lines.append(self.conclusion)
        return "\n".join(lines)


def _forced_value(words: tuple[str, ...]) -> int:
    """Sign of the operator product, which any value assignment must match."""
    parsed = [PauliString.from_text("+" + w) for w in words]
    for a, b in itertools.combinations(parsed, 2):
        if not commutes(a, b):
            raise VerificationError(f"constraint words {words} do not all commute")
    acc = parsed[0]
    for word in parsed[1:]:
        acc = pauli_mul(acc, word)
    if not acc.is_identity_word or acc.sign_exp not in (0, 2):
        raise VerificationError(f"product of {words} is not +/-identity: {acc.to_text()}")
    return {0: 1, 2: -1}[acc.sign_exp]


def _certificate(
    scenario: str,
    constraint_words: tuple[tuple[str, ...], ...],
    free_words: tuple[str, ...],
    drop: int | None,
) -> ContradictionCertificate:
    constraints = tuple((words, _forced_value(words)) for words in constraint_words)
    if drop is not None and not 0 <= drop < len(constraints):
        raise ValueError(f"drop index {drop} out of range")
    active = [c for i, c in enumerate(constraints) if i != drop]

    n_sites = len(constraint_words[0][0])
    count = 0
    for site_values in itertools.product((1, -1), repeat=2 * n_sites):
        x = site_values[:n_sites]
        y = site_values[n_sites:]
        for free_values in itertools.product((1, -1), repeat=len(free_words)):
            free = dict(zip(free_words, free_values))

            def value(word: str) -> int:
                if word in free:
                    return free[word]
                return math.prod(
                    x[j] if c == "X" else y[j] for j, c in enumerate(word)
                )

            if all(
                math.prod(value(w) for w in words) == forced
                for words, forced in active
            ):
                count += 1
    total = 1 << (2 * n_sites + len(free_words))

    if drop is None:
        conclusion = (
            f"no assignment satisfies all forced products ({count} of {total}); "
            "the site values admit no noncontextual completion"
        )
    else:
        conclusion = (
            f"{count} of {total} assignments satisfy the remaining constraints; "
            "every constraint is needed for the contradiction"
        )
    return ContradictionCertificate(
        scenario=scenario,
        constraints=constraints,
        satisfying_count=count,
        total_count=total,
        conclusion=conclusion,
        dropped=drop,
    )


def peres_mermin_certificate(drop: int | None = None) -> ContradictionCertificate:
    """Two-site square: the joint ZZ value is a free sign, the four
    transverse words factorize into site values."""
    return _certificate(
        scenario="peres-mermin",
        constraint_words=(("XX", "YY", "ZZ"), ("XY", "YX", "ZZ")),
        free_words=("ZZ",),
        drop=drop,
    )


def ghz_certificate(drop: int | None = None) -> ContradictionCertificate:
    """Three-site scenario: all four words factorize, and their factorized
    product telescopes to +1 for every one of the 64 assignments."""
    return _certificate(
        scenario="ghz",
        constraint_words=(("XYY", "YXY", "YYX", "XXX"),),
        free_words=(),
        drop=drop,
    )


@dataclass
class HvknReport:
    """Assignment-identity verification across tested assignments."""

    n: int
    mode: str
    checked: int
    failures: int
    first_failure: Assignment | None
    seed: int | None

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        failure = None
        if self.first_failure is not None:
            failure = {
                "vx": list(self.first_failure.vx),
                "vy": list(self.first_failure.vy),
            }
        return {
            "n": self.n,
            "mode": self.mode,
            "checked": self.checked,
            "failures": self.failures,
            "first_failure": failure,
            "seed": self.seed,
        }


def verify_hvkn(n: int, sample_budget: int = 100_000) -> HvknReport:
    """Check that the real and imaginary parts of prod_j (vx_j + i*vy_j)
    equal the signed word sums over the non-diagonal family halves.

    Exhaustive when 2^{2n} fits the budget, otherwise a fixed-seed
    uniform sample of that size.  All arithmetic is exact.
    """
    if n < 2:
        raise ValueError("identity check needs n >= 2")
    if sample_budget < 1:
        raise ValueError("sample budget must be positive")
    total = 1 << (2 * n)
    if total <= sample_budget:
        mode, seed = "exhaustive", None
        ints = np.arange(total, dtype=np.int64)
    else:
        mode, seed = "sampled", _SAMPLE_SEED
        rng = np.random.default_rng(seed)
        ints = rng.integers(0, total, size=sample_budget, dtype=np.int64)

    vx, vy = _assignment_arrays(n, ints)
    re = np.ones(ints.shape[0], dtype=np.int64)
    im = np.zeros(ints.shape[0], dtype=np.int64)
    for j in range(n):
        re, im = re * vx[:, j] - im * vy[:, j], re * vy[:, j] + im * vx[:, j]

    z_even, s_even, z_odd, s_odd = _word_tables(n)
    p_sign = vx.prod(axis=1)
    neg_w = ((vx * vy) < 0).astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
    word_re = p_sign * _parity_dot(neg_w, z_even, s_even)
    word_im = p_sign * _parity_dot(neg_w, z_odd, s_odd)

    bad = (re != word_re) | (im != word_im)
    failures = int(bad.sum())
    first = None
    if failures:
        first = Assignment.from_bits(n, int(ints[int(np.argmax(bad))]))
    return HvknReport(
        n=n,
        mode=mode,
        checked=int(ints.shape[0]),
        failures=failures,
        first_failure=first,
        seed=seed,
    )
