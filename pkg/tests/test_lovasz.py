import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subsaddle import (
    DomainError,
    brute_min_sets,
    charvec,
    decompose,
    expected_rounded_value,
    extension_min_on_grid,
    lovasz_subgradient,
    lovasz_value,
    make_example_b1,
    make_example_b2,
    modular_instance,
    random_submodular_instance,
    round_threshold,
    value_and_subgradient,
)
from conftest import cut_toy

unit_coords = st.floats(min_value=0.0, max_value=1.0)


class TestDecompose:
    def test_sorted_input(self):
        d = decompose([0.7, 0.3])
        assert d.perm.tolist() == [0, 1]
        assert d.level_masks() == [0, 0b01, 0b11]
        assert np.allclose(d.weights, [0.3, 0.4, 0.3])

    def test_tie_break_ascending_index(self):
        d = decompose([0.5, 0.5])
        assert d.perm.tolist() == [0, 1]

    def test_tie_value_is_order_independent(self):
        toy = cut_toy()
        y = np.array([0.0])
        v = lovasz_value(toy, [0.5, 0.5], y)
        # both orderings of the tied pair give the same extension value
        d_swapped = decompose([0.5, 0.5])
        masks = [0, 0b10, 0b11]
        v_other = sum(
            w * toy.evaluate_mask(mask, y) for w, mask in zip(d_swapped.weights, masks)
        )
        assert v == pytest.approx(v_other, abs=1e-15)

    def test_vertex(self):
        d = decompose([0.0, 1.0])
        assert d.perm.tolist() == [1, 0]
        assert d.level_masks() == [0, 0b10, 0b11]
        assert np.allclose(d.weights, [0.0, 1.0, 0.0])

    def test_out_of_box(self):
        with pytest.raises(DomainError):
            decompose([1.2, 0.0])

    @given(st.lists(unit_coords, min_size=1, max_size=6))
    @settings(max_examples=300, deadline=None)
    def test_reconstruction(self, coords):
        d = decompose(coords)
        assert d.weights.min() >= -1e-15
        assert d.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(d.reconstruct(), coords, atol=1e-12)

    @given(st.lists(unit_coords, min_size=1, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_idempotent_under_resorting(self, coords):
        d1 = decompose(coords)
        d2 = decompose(np.asarray(coords, float))
        assert d1.perm.tolist() == d2.perm.tolist()


class TestLovaszValue:
    def test_b1_closed_form_grid(self):
        b1 = make_example_b1()
        for x in np.linspace(0, 1, 20):
            for y in np.linspace(0, 1, 20):
                expected = 2 * x * y - x - y + 1
                assert lovasz_value(b1, [x], [y]) == pytest.approx(expected, abs=1e-12)

    def test_b2_closed_form_grid(self):
        b2 = make_example_b2()
        for x in np.linspace(0, 1, 20):
            for y in np.linspace(0, 1, 20):
                expected = 0.4 + 0.6 * x + (x - 1) * (y - 0.5) ** 2
                assert lovasz_value(b2, [x], [y]) == pytest.approx(expected, abs=1e-12)

    def test_vertex_agreement_exact(self, stream):
        fn = random_submodular_instance(stream.substream("vertex"), n=4, m=1)
        y = np.array([0.37])
        for mask in range(16):
            x = charvec(mask, 4).astype(float)
            assert lovasz_value(fn, x, y) == fn.evaluate_mask(mask, y)

    def test_cut_toy_hand_value(self):
        assert lovasz_value(cut_toy(), [0.7, 0.3], [0.0]) == pytest.approx(0.4, abs=1e-15)

    def test_query_count_is_n_plus_one(self):
        toy = cut_toy()
        before = toy.counter.count
        lovasz_value(toy, [0.7, 0.3], [0.0])
        assert toy.counter.count == before + 3


class TestExpectedRoundedValue:
    def test_b1_center(self):
        b1 = make_example_b1()
        assert expected_rounded_value(b1, [0.5], [0.5]) == pytest.approx(0.5, abs=1e-15)

    def test_vertex_is_set_value(self, stream):
        fn = random_submodular_instance(stream.substream("erv"), n=3, m=1)
        y = np.array([0.2])
        for mask in range(8):
            x = charvec(mask, 3).astype(float)
            assert expected_rounded_value(fn, x, y) == pytest.approx(
                fn.evaluate_mask(mask, y), abs=1e-15
            )

    def test_cut_toy(self):
        assert expected_rounded_value(cut_toy(), [0.7, 0.3], [0.0]) == pytest.approx(
            0.4, abs=1e-15
        )

    def test_matches_lovasz_value_randomly(self, stream):
        for i in range(100):
            sub = stream.substream("consistency", i)
            fn = random_submodular_instance(sub, n=1 + sub.randrange(5), m=1)
            x = sub.uniforms(fn.n)
            y = sub.uniforms(1)
            assert abs(
                lovasz_value(fn, x, y, check_domain=False)
                - expected_rounded_value(fn, x, y, check_domain=False)
            ) <= 1e-12

    def test_handles_ties_and_zeros(self, stream):
        fn = random_submodular_instance(stream.substream("ties"), n=4, m=1)
        y = np.array([0.4])
        for x in ([0.5, 0.5, 0.0, 1.0], [0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0]):
            assert abs(
                lovasz_value(fn, x, y) - expected_rounded_value(fn, x, y)
            ) <= 1e-12


class TestSubgradient:
    def test_b1_formula(self):
        b1 = make_example_b1()
        for x in (0.1, 0.5, 0.9):
            for y in (0.0, 0.3, 1.0):
                g = lovasz_subgradient(b1, [x], [y])
                assert g[0] == pytest.approx(2 * y - 1, abs=1e-15)

    def test_cut_toy_hand_value(self):
        g = lovasz_subgradient(cut_toy(), [0.7, 0.3], [0.0])
        assert g.tolist() == [1.0, -1.0]

    def test_modular_returns_weights(self):
        w = [0.3, -1.2, 0.8]
        fn = modular_instance(w)
        for x in ([0.2, 0.9, 0.5], [0.5, 0.5, 0.5], [1.0, 0.0, 1.0]):
            g = lovasz_subgradient(fn, x, [0.0])
            assert np.allclose(g, w, atol=1e-12)

    def test_subgradient_inequality(self, stream):
        for i in range(200):
            sub = stream.substream("ineq", i)
            fn = random_submodular_instance(sub, n=1 + sub.randrange(5), m=1)
            y = sub.uniforms(1)
            x = sub.uniforms(fn.n)
            x2 = sub.uniforms(fn.n)
            v, g, _, _ = value_and_subgradient(fn, x, y, check_domain=False)
            v2 = lovasz_value(fn, x2, y, check_domain=False)
            assert v2 - v - float(g @ (x2 - x)) >= -1e-9

    def test_norm_bound(self, stream):
        for i in range(100):
            sub = stream.substream("norm", i)
            fn = random_submodular_instance(sub, n=1 + sub.randrange(5), m=1)
            x = sub.uniforms(fn.n)
            y = sub.uniforms(1)
            g = lovasz_subgradient(fn, x, y, check_domain=False)
            assert np.linalg.norm(g) <= 4.0 * fn.constants.value_bound + 1e-9

    def test_combined_call_costs_n_plus_one(self):
        toy = cut_toy()
        before = toy.counter.count
        value_and_subgradient(toy, [0.6, 0.2], [0.0])
        assert toy.counter.count == before + 3


class TestRoundThreshold:
    def test_strict_superlevel(self):
        assert round_threshold([0.7, 0.3], 0.5) == 0b01
        assert round_threshold([0.7, 0.3], 0.9) == 0
        assert round_threshold([0.7, 0.3], 0.7) == 0  # strict

    def test_vertex_recovery(self):
        assert round_threshold([1.0, 0.0, 1.0], 0.5) == 0b101

    def test_rejects_bad_tau(self):
        with pytest.raises(ValueError):
            round_threshold([0.5], 1.5)


class TestMinimizerEquivalence:
    def test_grid_min_equals_set_min(self, stream):
        for i in range(10):
            sub = stream.substream("minequiv", i)
            fn = random_submodular_instance(sub, n=1 + sub.randrange(5), m=1)
            y = sub.uniforms(1)
            _, set_min = brute_min_sets(fn, y)
            _, grid_min = extension_min_on_grid(fn, y, points_per_axis=5)
            assert grid_min == pytest.approx(set_min, abs=1e-9)
