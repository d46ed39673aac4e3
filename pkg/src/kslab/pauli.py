"""Exact Pauli-word algebra over n sites.

A word is stored in symplectic-with-phase form: two n-bit masks plus a
power of i,

    i**phase_exp * (product of sigma_z factors) * (product of sigma_x factors),

with every sigma_z factor standing to the left of every sigma_x factor.
Bit j of ``z_mask`` / ``x_mask`` refers to site j; site 0 is the leftmost
letter in text form and the leftmost factor in tensor products.  A site
carrying both bits is the letter Y up to a phase, sigma_z sigma_x = i sigma_y,
which is why a word's displayed sign differs from ``phase_exp`` by the
number of Y sites.

All products and phases are computed in integer arithmetic; numpy enters
only through the dense-matrix oracle ``PauliString.to_matrix``.
"""

from __future__ import annotations

from dataclasses import dataclass
import re

import numpy as np

# Dense limits: state-sized objects up to 2^10, operator-identity checks up
# to 2^6 (every identity is also checked symbolically at any n).
DENSE_STATE_LIMIT = 10
DENSE_CHECK_LIMIT = 6

_SIGN_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_EXP = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_WORD_RE = re.compile(r"^([+-]?i?)([IXYZ]+)$")

# Single-site factors in the (z, x) encoding; (1, 1) is sigma_z sigma_x.
_SITE_MATRIX = {
    (0, 0): np.array([[1, 0], [0, 1]], dtype=complex),
    (0, 1): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 0): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, 1], [-1, 0]], dtype=complex),
}


def full_mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class PauliString:
    """An n-site Pauli word i**phase_exp * Z(z_mask) * X(x_mask)."""

    n: int
    z_mask: int
    x_mask: int
    phase_exp: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one site, got n={self.n}")
        m = full_mask(self.n)
        if not 0 <= self.z_mask <= m or not 0 <= self.x_mask <= m:
            raise ValueError("mask out of range for site count")
        if not 0 <= self.phase_exp <= 3:
            raise ValueError(f"phase exponent must be in 0..3, got {self.phase_exp}")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse a word like ``-YY`` or ``+XZIX`` (optionally ``+i``/``-i``)."""
        match = _WORD_RE.match(text.strip())
        if match is None:
            raise ValueError(f"not a Pauli word: {text!r}")
        prefix, letters = match.groups()
        z = x = 0
        for j, letter in enumerate(letters):
            if letter in "ZY":
                z |= 1 << j
            if letter in "XY":
                x |= 1 << j
        overlap = (z & x).bit_count()
        phase = (_PREFIX_EXP[prefix] - overlap) % 4
        return cls(len(letters), z, x, phase)

    @property
    def letters(self) -> str:
        out = []
        for j in range(self.n):
            z = (self.z_mask >> j) & 1
            x = (self.x_mask >> j) & 1
            out.append("IXZY"[x + 2 * z])
        return "".join(out)

    @property
    def sign_exp(self) -> int:
        """Exponent of i in front of the plain letter form."""
        return (self.phase_exp + (self.z_mask & self.x_mask).bit_count()) % 4

    def to_text(self) -> str:
        return _SIGN_PREFIX[self.sign_exp] + self.letters

    def __str__(self) -> str:
        return self.to_text()

    @property
    def is_hermitian(self) -> bool:
        return self.sign_exp % 2 == 0

    @property
    def is_identity_word(self) -> bool:
        return self.z_mask == 0 and self.x_mask == 0

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; the oracle for everything symbolic."""
        if self.n > DENSE_STATE_LIMIT:
            raise ValueError(f"dense form limited to n <= {DENSE_STATE_LIMIT}")
        out = np.array([[1j**self.phase_exp]])
        for j in range(self.n):
            z = (self.z_mask >> j) & 1
            x = (self.x_mask >> j) & 1
            out = np.kron(out, _SITE_MATRIX[(z, x)])
        return out


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Exact product a*b in canonical form.

    Moving b's Z factors through a's X factors picks up (-1) per
    overlapping site; the masks then combine by XOR.
    """
    if a.n != b.n:
        raise ValueError(f"site counts differ: {a.n} != {b.n}")
    phase = (a.phase_exp + b.phase_exp + 2 * (a.x_mask & b.z_mask).bit_count()) % 4
    return PauliString(a.n, a.z_mask ^ b.z_mask, a.x_mask ^ b.x_mask, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True when the words commute (symplectic product is even)."""
    if a.n != b.n:
        raise ValueError(f"site counts differ: {a.n} != {b.n}")
    anti = (a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()
    return anti % 2 == 0


def _index_bits(n: int, p: int) -> list[int]:
    """Bits b_0..b_{n-1} of p, most significant first."""
    return [(p >> (n - 1 - j)) & 1 for j in range(n)]


@dataclass(frozen=True)
class LambdaIndex:
    """Index p of a group element; the trailing site bit has even closure."""

    n: int
    p: int

    def __post_init__(self) -> None:
        if self.n < 1 or not 0 <= self.p < (1 << self.n):
            raise ValueError(f"index {self.p} out of range for n={self.n}")

    @property
    def bits(self) -> list[int]:
        return _index_bits(self.n, self.p)

    @property
    def closure_bit(self) -> int:
        return sum(self.bits[1:]) % 2


@dataclass(frozen=True)
class RIndex:
    """Index p of an odd-closure companion element."""

    n: int
    p: int

    def __post_init__(self) -> None:
        if self.n < 1 or not 0 <= self.p < (1 << self.n):
            raise ValueError(f"index {self.p} out of range for n={self.n}")

    @property
    def bits(self) -> list[int]:
        return _index_bits(self.n, self.p)

    @property
    def closure_bit(self) -> int:
        return (sum(self.bits[1:]) + 1) % 2


def _element_from_bits(n: int, bits: list[int], closure: int) -> PauliString:
    z = 0
    for j in range(1, n):
        if bits[j]:
            z |= 1 << (j - 1)
    if closure:
        z |= 1 << (n - 1)
    x = full_mask(n) if bits[0] else 0
    return PauliString(n, z, x, 0)


def lambda_element(idx: LambdaIndex) -> PauliString:
    """Word for index p; z bits are the index bits plus an even-parity closer."""
    word = _element_from_bits(idx.n, idx.bits, idx.closure_bit)
    assert word.is_hermitian
    return word


def r_element(idx: RIndex) -> PauliString:
    """Odd-closure companion word; anti-Hermitian in the upper index half."""
    word = _element_from_bits(idx.n, idx.bits, idx.closure_bit)
    assert word.is_hermitian == (idx.p < (1 << (idx.n - 1)))
    return word


def group_product(a: LambdaIndex, b: LambdaIndex) -> LambdaIndex:
    """Group law: indices combine by XOR, with no phase left over."""
    if a.n != b.n:
        raise ValueError(f"site counts differ: {a.n} != {b.n}")
    out = LambdaIndex(a.n, a.p ^ b.p)
    assert pauli_mul(lambda_element(a), lambda_element(b)) == lambda_element(out)
    return out


def half_zmasks(n: int, odd: bool = False) -> np.ndarray:
    """Z-masks of the lower index half, vectorized over p = 0 .. 2^{n-1}-1.

    With ``odd=True`` the closure bit is complemented, giving the
    odd-parity companion family.  The upper index half reuses the same
    z-masks (the leading index bit only toggles the X part).
    """
    ps = np.arange(1 << (n - 1), dtype=np.int64)
    z = np.zeros_like(ps)
    parity = np.zeros_like(ps)
    for j in range(1, n):
        bit = (ps >> (n - 1 - j)) & 1
        z |= bit << (j - 1)
        parity ^= bit
    if odd:
        parity ^= 1
    z |= parity << (n - 1)
    return z


@dataclass
class IdentityReport:
    """Outcome of the four sum-identity checks at a given site count."""

    n: int
    mode: str
    ok: bool
    first_mismatch: str | None = None
    max_residual: float | None = None


def _projector_expansion(n: int, x_part: bool, odd: bool) -> dict[tuple[int, int], complex]:
    """Expand half the sum/difference of the two 2^n-term products.

    The z-side products multiply out (I +/- sigma_z) per site; the x-side
    products choose sigma_x or +/- sigma_z sigma_x per site.  Averaging the
    two branch signs keeps exactly the even-subset (or odd-subset) terms
    with unit coefficients.
    """
    x = full_mask(n) if x_part else 0
    keep = 1 if odd else 0
    return {
        (m, x): complex(1)
        for m in range(1 << n)
        if m.bit_count() % 2 == keep
    }


def _family_expansion(words: list[PauliString]) -> dict[tuple[int, int], complex]:
    out: dict[tuple[int, int], complex] = {}
    for w in words:
        key = (w.z_mask, w.x_mask)
        out[key] = out.get(key, 0) + 1j**w.phase_exp
    return out


def _dense_residual(n: int, x_part: bool, odd: bool, words: list[PauliString]) -> float:
    site_plus = _SITE_MATRIX[(0, 0)] + _SITE_MATRIX[(1, 0)]
    site_minus = _SITE_MATRIX[(0, 0)] - _SITE_MATRIX[(1, 0)]
    if x_part:
        # sigma_x +/- i sigma_y, written without leaving the (z, x) basis
        site_plus = _SITE_MATRIX[(0, 1)] + _SITE_MATRIX[(1, 1)]
        site_minus = _SITE_MATRIX[(0, 1)] - _SITE_MATRIX[(1, 1)]
    branch_a = np.array([[1.0]], dtype=complex)
    branch_b = np.array([[1.0]], dtype=complex)
    for _ in range(n):
        branch_a = np.kron(branch_a, site_plus)
        branch_b = np.kron(branch_b, site_minus)
    lhs = (branch_a - branch_b) / 2 if odd else (branch_a + branch_b) / 2
    rhs = sum(w.to_matrix() for w in words)
    return float(np.max(np.abs(lhs - rhs)))


def verify_sum_identities(n: int, mode: str = "auto") -> IdentityReport:
    """Check the four projector-sum identities at n sites.

    Symbolic mode expands both sides into exact (mask, phase) multisets;
    dense mode compares 2^n x 2^n matrices (n <= DENSE_CHECK_LIMIT).
    ``auto`` runs symbolic always and dense when small enough.
    """
    if n < 2:
        raise ValueError("identities need n >= 2")
    if mode not in ("auto", "symbolic", "dense"):
        raise ValueError(f"unknown mode {mode!r}")
    half = 1 << (n - 1)
    cases = [
        ("z-even", False, False, [lambda_element(LambdaIndex(n, p)) for p in range(half)]),
        ("z-odd", False, True, [r_element(RIndex(n, p)) for p in range(half)]),
        ("x-even", True, False, [lambda_element(LambdaIndex(n, p)) for p in range(half, 2 * half)]),
        ("x-odd", True, True, [r_element(RIndex(n, p)) for p in range(half, 2 * half)]),
    ]

    report = IdentityReport(n=n, mode=mode, ok=True)
    do_symbolic = mode in ("auto", "symbolic")
    do_dense = mode == "dense" or (mode == "auto" and n <= DENSE_CHECK_LIMIT)
    if mode == "dense" and n > DENSE_CHECK_LIMIT:
        raise ValueError(f"dense mode limited to n <= {DENSE_CHECK_LIMIT}")

    for label, x_part, odd, words in cases:
        if do_symbolic:
            lhs = _projector_expansion(n, x_part, odd)
            rhs = _family_expansion(words)
            if lhs != rhs:
                bad = sorted(set(lhs) ^ set(rhs)) or sorted(
                    k for k in lhs if lhs[k] != rhs[k]
                )
                z, x = bad[0]
                report.ok = False
                report.first_mismatch = f"{label}: {PauliString(n, z, x, 0).to_text()}"
                return report
        if do_dense:
            residual = _dense_residual(n, x_part, odd, words)
            if report.max_residual is None or residual > report.max_residual:
                report.max_residual = residual
            if residual > 1e-12:
                report.ok = False
                report.first_mismatch = f"{label}: dense residual {residual:.3e}"
                return report
    return report
