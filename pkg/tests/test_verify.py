import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subsaddle import (
    EnumerationCapError,
    brute_min_sets,
    brute_saddle_check,
    dtau_gap,
    duality_gap,
    duality_gap_L,
    inner_max_y,
    make_example_b1,
    make_example_b2,
    make_segmentation,
    make_shifted_b1,
    modular_instance,
    online_gaps,
    path_length,
    random_submodular_instance,
    restricted_gap,
    separable_instance,
    synth_image,
)
from subsaddle.verify import NoInnerMethodError, best_rounding
from subsaddle import Stream


class TestBruteMinSets:
    def test_b1_prefers_empty_at_high_y(self):
        mask, val = brute_min_sets(make_example_b1(), [0.8])
        assert mask == 0 and val == pytest.approx(0.2)

    def test_b1_prefers_singleton_at_low_y(self):
        mask, val = brute_min_sets(make_example_b1(), [0.2])
        assert mask == 1 and val == pytest.approx(0.2)

    def test_modular_nonnegative_gives_empty(self):
        fn = modular_instance([0.5, 0.1, 0.9])
        mask, val = brute_min_sets(fn, [0.0])
        assert mask == 0 and val == 0.0

    def test_tie_breaks_to_smallest_mask(self):
        fn = modular_instance([0.0, 0.3])
        mask, _ = brute_min_sets(fn, [0.0])
        assert mask == 0

    def test_cap(self):
        fn = modular_instance(np.ones(21))
        with pytest.raises(EnumerationCapError):
            brute_min_sets(fn, [0.0])


class TestInnerMax:
    def test_b1_empty_set(self):
        y, val = inner_max_y(make_example_b1(), S=0)
        assert val == pytest.approx(1.0)
        assert y[0] == pytest.approx(0.0)

    def test_constant_in_y(self):
        fn = modular_instance([1.0, 2.0])
        _, val = inner_max_y(fn, S=0b11)
        assert val == pytest.approx(3.0)

    def test_greedy_budget_matches_grid(self, stream):
        snap = synth_image(4, 4, noise=6.0, seeds_per_class=(1, 1), seed=5)
        fn = make_segmentation(snap.image, snap.seeds, snap.labels, lam=2.0, rho=1.5)
        for i in range(3):
            mask = stream.substream("greedy", i).randrange(1 << 8)
            yg, vg = inner_max_y(fn, S=mask, method="greedy-budget")
            yd, vd = inner_max_y(fn, S=mask, method="grid", grid_step=2e-2)
            assert vg >= vd - 4e-2
            assert fn.constraint.contains(yg, 1e-9)

    def test_no_method_error(self):
        fn = random_submodular_instance(Stream.from_seed(3), n=3, m=4)
        fn.mixture_argmax_y = None
        fn.inner_max_candidates = None
        with pytest.raises(NoInnerMethodError):
            inner_max_y(fn, S=0)

    def test_candidates_method(self):
        b2 = make_example_b2()
        y, val = inner_max_y(b2, S=0, method="candidates")
        assert y[0] == pytest.approx(0.5)
        assert val == pytest.approx(0.4)


class TestGaps:
    def test_b1_extension_saddle_gap_zero(self):
        b1 = make_example_b1()
        assert duality_gap_L(b1, [0.5], [0.5]) == pytest.approx(0.0, abs=1e-12)

    def test_b2_saddle_gap_zero(self):
        b2 = make_example_b2()
        assert duality_gap(b2, 0, [0.5]) == pytest.approx(0.0, abs=1e-12)

    def test_b1_far_point(self):
        b1 = make_example_b1()
        assert duality_gap(b1, 0b1, [0.0]) == pytest.approx(1.0, abs=1e-12)

    def test_dtau_at_vertex_reduces_to_duality(self, stream):
        fn = random_submodular_instance(stream.substream("dtv"), n=3, m=1)
        y = np.array([0.3])
        for mask in range(8):
            x = np.array([(mask >> i) & 1 for i in range(3)], dtype=float)
            assert dtau_gap(fn, y, x=x) == pytest.approx(
                dtau_gap(fn, y, S=mask), abs=1e-12
            )

    def test_dtau_b1_values(self):
        b1 = make_example_b1()
        assert dtau_gap(b1, [0.5], x=[0.5]) == pytest.approx(0.0, abs=1e-12)
        assert dtau_gap(b1, [0.0], x=[0.5]) == pytest.approx(0.5, abs=1e-12)

    def test_restricted_not_applicable_without_saddle(self):
        b1 = make_example_b1()
        assert restricted_gap(b1, 0, [0.3]) is None

    def test_sandwich_on_saddled_instances(self, stream):
        for i in range(100):
            sub = stream.substream("sandwich", i)
            fn = separable_instance(sub, n=3, m=2)
            y = sub.uniforms(2)
            S = sub.randrange(8)
            d = duality_gap(fn, S, y)
            r = restricted_gap(fn, S, y)
            assert r is not None
            assert -1e-9 <= r <= d + 1e-9

    def test_b2_restricted_between_zero_and_duality(self, stream):
        b2 = make_example_b2()
        for i in range(50):
            sub = stream.substream("b2r", i)
            y = sub.uniforms(1)
            S = sub.randrange(2)
            d = duality_gap(b2, S, y)
            r = restricted_gap(b2, S, y)
            assert -1e-12 <= r <= d + 1e-12


class TestPathLength:
    def test_constant(self):
        assert path_length([np.zeros(2)] * 5 ) == 0.0

    def test_two_points(self):
        assert path_length([[0.0, 0.0], [3.0, 4.0]]) == pytest.approx(5.0)

    def test_telescoping_segments(self):
        pts = [np.array([t, 0.0]) for t in np.linspace(0, 2.5, 11)]
        assert path_length(pts) == pytest.approx(2.5, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            path_length([])

    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=2, max_size=8))
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, pts):
        pts = [np.array(p) for p in pts]
        direct = float(np.linalg.norm(pts[-1] - pts[0]))
        assert path_length(pts) >= direct - 1e-9


class TestSaddleCheck:
    def test_b1_has_no_saddle(self):
        rep = brute_saddle_check(make_example_b1(), grid_step=1e-3)
        assert rep.max_min == pytest.approx(0.5, abs=1e-3)
        assert rep.min_max == pytest.approx(1.0, abs=1e-3)
        assert not rep.saddle_exists
        assert rep.vertex_minimizer is False

    def test_b2_has_saddle(self):
        rep = brute_saddle_check(make_example_b2(), grid_step=1e-3)
        assert rep.max_min == pytest.approx(0.4, abs=1e-3)
        assert rep.min_max == pytest.approx(0.4, abs=1e-3)
        assert rep.saddle_exists
        assert rep.vertex_minimizer is True
        assert rep.argmin_set == frozenset()

    def test_constant_in_y_trivially_saddles(self):
        fn = modular_instance([0.5, -0.2])
        rep = brute_saddle_check(fn, grid_step=0.1)
        assert rep.max_min == pytest.approx(rep.min_max, abs=1e-12)

    def test_weak_duality_on_random_instances(self, stream):
        for i in range(10):
            fn = random_submodular_instance(stream.substream("weak", i), n=3, m=1)
            rep = brute_saddle_check(fn, grid_step=1e-2, vertex_scan=False)
            assert rep.max_min <= rep.min_max + 1e-9


class TestOnlineGaps:
    def test_constant_stream_at_saddle_is_zero(self):
        fns = [make_example_b2() for _ in range(4)]
        xs = [np.array([0.0])] * 4
        ys = [np.array([0.5])] * 4
        rep = online_gaps(fns, xs, ys, sets_hat=[0] * 4)
        assert rep.dual_gap_L_total == pytest.approx(0.0, abs=1e-12)
        assert rep.dual_gap_total == pytest.approx(0.0, abs=1e-12)
        assert rep.rd_gap_total == pytest.approx(0.0, abs=1e-12)
        assert rep.path_length_saddles == pytest.approx(0.0, abs=1e-12)

    def test_single_step_equals_offline_gap(self):
        b1 = make_example_b1()
        x, y = np.array([0.3]), np.array([0.7])
        rep = online_gaps([b1], [x], [y])
        assert rep.dual_gap_L_total == pytest.approx(duality_gap_L(b1, x, y), abs=1e-12)

    def test_drifting_stream_matches_closed_form(self):
        offsets = [0.0, 0.1, -0.05, 0.2]
        fns = [make_shifted_b1(o) for o in offsets]
        xs = [np.array([0.4]), np.array([0.6]), np.array([0.5]), np.array([0.45])]
        ys = [np.array([0.5]), np.array([0.55]), np.array([0.5]), np.array([0.7])]
        rep = online_gaps(fns, xs, ys)
        for o, x, y, got in zip(offsets, xs, ys, rep.dual_gap_L_steps):
            # ext(x, y) = (y - o)(2x - 1) + 1 - x; the adversary max sits at a
            # corner of [0, 1] and the set minimum is the cheaper of the two
            # subsets at the queried y.
            ext = lambda xv, yv: (yv - o) * (2 * xv - 1) + 1 - xv
            want = max(ext(x[0], 0.0), ext(x[0], 1.0)) - min(
                1 - (y[0] - o), y[0] - o
            )
            assert got == pytest.approx(want, abs=1e-9)


class TestBestRounding:
    def test_never_worse_than_extension(self, stream):
        from subsaddle import lovasz_value

        for i in range(50):
            sub = stream.substream("round", i)
            fn = random_submodular_instance(sub, n=4, m=1)
            x = sub.uniforms(4)
            y = sub.uniforms(1)
            _, val = best_rounding(fn, x, y)
            assert val <= lovasz_value(fn, x, y, check_domain=False) + 1e-12
