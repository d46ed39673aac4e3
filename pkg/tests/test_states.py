"""State models and expectation engine against the dense oracle."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from oracle import LETTER, dense, oracle_matrix, random_word

from kslab.errors import VerificationError
from kslab.pauli import LambdaIndex, PauliString, RIndex, lambda_element, r_element
from kslab.states import (
    DenseState,
    GhzSuperposition,
    HnObservable,
    ProductState,
    WernerState,
    bell_fidelity,
    expectation,
    f_value,
    maximally_mixed,
    parse_state_spec,
    pi_vector,
    random_density,
    read_dense_state,
    to_density_matrix,
    write_dense_state,
)


def oracle_expectation(state, word: PauliString) -> complex:
    rho = to_density_matrix(state)
    return complex(np.trace(rho @ dense(word)))


def ghz_pair(rng) -> tuple[complex, complex]:
    a = rng.standard_normal() + 1j * rng.standard_normal()
    b = rng.standard_normal() + 1j * rng.standard_normal()
    norm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return a / norm, b / norm


def oracle_pi_vector() -> np.ndarray:
    # (|+-> + |-+>)/sqrt(2) with |+> = z-up: indices 1 and 2, site 0 major
    v = np.zeros(4, dtype=complex)
    v[0b01] = v[0b10] = 1 / np.sqrt(2)
    return v


class TestAnalyticVsDense:
    @pytest.mark.parametrize("n", range(2, 7))
    def test_ghz_on_all_family_words(self, n):
        rng = np.random.default_rng(10 + n)
        for _ in range(3):
            state = GhzSuperposition(n, *ghz_pair(rng))
            for p in range(1 << n):
                for word in (
                    lambda_element(LambdaIndex(n, p)),
                    r_element(RIndex(n, p)),
                ):
                    fast = expectation(state, word)
                    slow = oracle_expectation(state, word)
                    assert abs(fast - slow) < 1e-10

    @pytest.mark.parametrize("n", range(2, 7))
    def test_product_on_all_family_words(self, n):
        rng = np.random.default_rng(20 + n)
        vecs = rng.standard_normal((n, 3))
        vecs /= np.maximum(1.0, np.linalg.norm(vecs, axis=1))[:, None]
        state = ProductState(tuple(map(tuple, vecs)))
        for p in range(1 << n):
            for word in (lambda_element(LambdaIndex(n, p)), r_element(RIndex(n, p))):
                assert abs(expectation(state, word) - oracle_expectation(state, word)) < 1e-10

    def test_random_words_all_models(self):
        rng = np.random.default_rng(31)
        states = [
            GhzSuperposition(3, *ghz_pair(rng)),
            ProductState(((0.3, -0.4, 0.5), (0.0, 0.0, 1.0), (-0.6, 0.0, 0.6))),
        ]
        for state in states:
            for _ in range(120):
                word = random_word(rng, 3)
                assert abs(expectation(state, word) - oracle_expectation(state, word)) < 1e-10
        werner = WernerState(0.7)
        for _ in range(120):
            word = random_word(rng, 2)
            assert abs(expectation(werner, word) - oracle_expectation(werner, word)) < 1e-10

    def test_dense_state_route(self):
        rng = np.random.default_rng(5)
        state = random_density(2, rng)
        for _ in range(60):
            word = random_word(rng, 2)
            assert abs(expectation(state, word) - oracle_expectation(state, word)) < 1e-12


class TestFrozenExpectations:
    def test_werner_half_correlators(self):
        w = WernerState(0.5)
        assert expectation(w, PauliString.from_text("+XX")) == pytest.approx(0.5)
        assert expectation(w, PauliString.from_text("+YY")) == pytest.approx(0.5)
        assert expectation(w, PauliString.from_text("+ZZ")) == pytest.approx(-0.5)

    def test_pi_letter_table_against_oracle(self):
        v = oracle_pi_vector()
        nonzero = {"II": 1.0, "XX": 1.0, "YY": 1.0, "ZZ": -1.0}
        for a, b in itertools.product("IXYZ", repeat=2):
            val = v.conj() @ np.kron(LETTER[a], LETTER[b]) @ v
            assert val == pytest.approx(nonzero.get(a + b, 0.0), abs=1e-12)

    def test_ghz_three_site_all_x(self):
        state = GhzSuperposition(3, 1 / np.sqrt(2), 1 / np.sqrt(2))
        word = lambda_element(LambdaIndex(3, 4))
        assert word.to_text() == "+XXX"
        assert expectation(state, word) == pytest.approx(1.0)

    def test_maximally_mixed_nonidentity_vanishes(self):
        state = maximally_mixed(3)
        rng = np.random.default_rng(9)
        for _ in range(40):
            word = random_word(rng, 3)
            if word.is_identity_word:
                continue
            assert abs(expectation(state, word)) < 1e-12

    def test_mismatched_sites_rejected(self):
        with pytest.raises(ValueError):
            expectation(WernerState(0.5), PauliString.from_text("+XXX"))


class TestFValue:
    @pytest.mark.parametrize("n", range(2, 13))
    def test_ghz_constant(self, n):
        rng = np.random.default_rng(40 + n)
        for _ in range(10):
            state = GhzSuperposition(n, *ghz_pair(rng))
            assert f_value(state) == pytest.approx(2 ** (n - 1), abs=1e-9)

    @pytest.mark.parametrize("n", range(2, 13))
    def test_all_up_product(self, n):
        state = ProductState.from_pattern("+" * n)
        assert f_value(state) == pytest.approx(2 ** (n - 1), abs=1e-9)

    def test_hundred_random_pairs_invariant(self):
        rng = np.random.default_rng(77)
        values = [f_value(GhzSuperposition(5, *ghz_pair(rng))) for _ in range(120)]
        assert max(abs(v - 16.0) for v in values) < 1e-9

    @pytest.mark.parametrize("n", range(2, 6))
    def test_maximally_mixed_is_one(self, n):
        assert f_value(maximally_mixed(n)) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_dense_matches_analytic_for_ghz(self, n):
        rng = np.random.default_rng(50 + n)
        state = GhzSuperposition(n, *ghz_pair(rng))
        dense_state = DenseState(to_density_matrix(state))
        assert f_value(dense_state) == pytest.approx(f_value(state), abs=1e-9)

    def test_werner(self):
        for lam in (0.0, 0.3, 1.0):
            state = WernerState(lam)
            assert f_value(state) == pytest.approx(1 - lam, abs=1e-12)
            assert f_value(DenseState(to_density_matrix(state))) == pytest.approx(
                1 - lam, abs=1e-10
            )

    def test_random_dense_states_match_observable_route(self):
        rng = np.random.default_rng(8)
        for n in (2, 3, 4):
            state = random_density(n, rng)
            h = HnObservable(n).matrix()
            via_h = float(np.real(np.trace(state.rho @ h)))
            assert f_value(state) == pytest.approx(via_h, abs=1e-10)


class TestHnObservable:
    @pytest.mark.parametrize("n", range(2, 7))
    def test_equals_word_sum(self, n):
        h = HnObservable(n)
        np.testing.assert_allclose(h.matrix(), h.half_group_sum(), atol=1e-12)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_equals_oracle_word_sum(self, n):
        total = sum(
            dense(lambda_element(LambdaIndex(n, p))) for p in range(1 << (n - 1))
        )
        np.testing.assert_allclose(HnObservable(n).matrix(), total, atol=1e-12)


class TestBellFidelity:
    @pytest.mark.parametrize("lam,expected", [(0.0, 0.25), (0.5, 0.625), (1.0, 1.0)])
    def test_werner_affine(self, lam, expected):
        assert bell_fidelity(WernerState(lam)) == pytest.approx(expected, abs=1e-10)
        dense_w = DenseState(to_density_matrix(WernerState(lam)))
        assert bell_fidelity(dense_w) == pytest.approx(expected, abs=1e-10)

    def test_pure_pi_self_fidelity(self):
        pi = pi_vector()
        state = DenseState(np.outer(pi, pi.conj()))
        assert bell_fidelity(state) == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed(self):
        assert bell_fidelity(maximally_mixed(2)) == pytest.approx(0.25, abs=1e-12)

    def test_wrong_site_count(self):
        with pytest.raises(ValueError):
            bell_fidelity(maximally_mixed(3))

    def test_pi_vector_matches_oracle(self):
        np.testing.assert_allclose(pi_vector(), oracle_pi_vector(), atol=1e-15)


class TestValidation:
    def test_dense_rejects_bad_matrices(self):
        with pytest.raises(ValueError):
            DenseState(np.eye(3) / 3)  # not a power of two
        with pytest.raises(ValueError):
            DenseState(np.eye(4))  # trace 4
        bad = np.eye(4, dtype=complex) / 4
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            DenseState(bad)  # not Hermitian
        flipped = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
        with pytest.raises(ValueError):
            DenseState(flipped)  # negative eigenvalue

    def test_product_rejects_long_bloch(self):
        with pytest.raises(ValueError):
            ProductState(((0.9, 0.9, 0.9),))
        with pytest.raises(ValueError):
            ProductState(())
        with pytest.raises(ValueError):
            ProductState.from_pattern("+0-")

    def test_ghz_normalization(self):
        with pytest.raises(ValueError):
            GhzSuperposition(3, 1.0, 1.0)
        GhzSuperposition(3, 0.6, 0.8j)

    def test_werner_range(self):
        with pytest.raises(ValueError):
            WernerState(-0.1)
        with pytest.raises(ValueError):
            WernerState(1.1)


class TestStateSpecLanguage:
    def test_ghz_spec(self):
        state = parse_state_spec("ghz:n=5,alpha=0.6,beta=0.8")
        assert state == GhzSuperposition(5, 0.6, 0.8)

    def test_complex_amplitudes(self):
        state = parse_state_spec("ghz:n=2,alpha=0.6,beta=0.8j")
        assert state.beta == 0.8j

    def test_product_spec(self):
        state = parse_state_spec("product:++-")
        assert state == ProductState(((0, 0, 1.0), (0, 0, 1.0), (0, 0, -1.0)))

    def test_werner_spec(self):
        assert parse_state_spec("werner:lambda=0.5") == WernerState(0.5)

    def test_dense_spec_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        state = random_density(2, rng)
        path = tmp_path / "state.txt"
        write_dense_state(str(path), state)
        loaded = parse_state_spec(f"dense:@{path}")
        np.testing.assert_allclose(loaded.rho, state.rho, atol=1e-12)

    @pytest.mark.parametrize(
        "bad",
        [
            "ghz",
            "ghz:n=3",
            "ghz:n=3,alpha=x,beta=0",
            "product:",
            "werner:lam=0.5",
            "squeezed:r=1",
            "dense:/no/at/prefix",
        ],
    )
    def test_rejects_malformed_specs(self, bad):
        with pytest.raises(ValueError):
            parse_state_spec(bad)

    def test_dense_file_errors(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("")
        with pytest.raises(ValueError):
            read_dense_state(str(p))
        p.write_text("x\n")
        with pytest.raises(ValueError):
            read_dense_state(str(p))
        p.write_text("1\n1,0 0,0\n")
        with pytest.raises(ValueError):
            read_dense_state(str(p))  # missing a row
        p.write_text("1\n1,0\n0,0 0,0\n")
        with pytest.raises(ValueError):
            read_dense_state(str(p))  # short row
        p.write_text("1\n0.5,0 0,0\n0,0 0.5,q\n")
        with pytest.raises(ValueError):
            read_dense_state(str(p))  # non-numeric entry


def test_ghz_dense_form_is_projector():
    state = GhzSuperposition(4, 0.6, 0.8j)
    rho = to_density_matrix(state)
    np.testing.assert_allclose(rho @ rho, rho, atol=1e-12)
    assert np.trace(rho) == pytest.approx(1.0)
