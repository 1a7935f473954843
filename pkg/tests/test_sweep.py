import numpy as np
import pytest

from subsaddle import (
    OracleConfig,
    SolverConfig,
    make_example_b1,
    make_example_b2,
    make_gap_oracle,
    solve_offline,
)
from subsaddle.sweep import seed_sweep


def short_config(seed=0, horizon=250):
    return SolverConfig(h1=0.05, h2=0.04, oracle=OracleConfig(mu=0.01, samples=2),
                        horizon=horizon, record_every=1, seed=seed)


class TestSweepAgreesWithSolver:
    @pytest.mark.parametrize("make_fn,seed", [(make_example_b1, 11), (make_example_b2, 4)])
    def test_trajectories_match(self, make_fn, seed):
        cfg = short_config(seed=seed)
        z0 = np.array([0.9, 0.8])
        ref = solve_offline(make_fn(), cfg, z0=z0, gap_fn=make_gap_oracle(make_fn()))
        sw = seed_sweep(make_fn(), cfg, seeds=[seed], z0=z0)
        assert sw.final_x[0] == pytest.approx(ref.trace.z_final[0], abs=1e-9)
        assert sw.final_y[0] == pytest.approx(ref.trace.z_final[1], abs=1e-9)
        gaps = np.array([r.gap_Dtau for r in ref.trace.records])
        assert sw.avg_gap[0] == pytest.approx(gaps.mean(), abs=1e-9)
        assert sw.best_gap[0] == pytest.approx(gaps.min(), abs=1e-9)

    def test_per_seed_columns_are_independent(self):
        cfg = short_config(horizon=60)
        joint = seed_sweep(make_example_b1(), cfg, seeds=[3, 9], z0=np.array([0.9, 0.8]))
        solo = seed_sweep(make_example_b1(), cfg, seeds=[9], z0=np.array([0.9, 0.8]))
        assert joint.final_x[1] == solo.final_x[0]
        assert joint.avg_gap[1] == solo.avg_gap[0]


class TestSweepBookkeeping:
    def test_query_accounting(self):
        fn = make_example_b1()
        before = fn.counter.count
        cfg = short_config(horizon=40)
        res = seed_sweep(fn, cfg, seeds=range(5))
        iters = cfg.horizon + 1
        per_seed_solver = 2 * iters * (cfg.oracle.samples + 1) * 2
        assert res.queries_per_seed == per_seed_solver + 2 * iters
        counted = fn.counter.count - before
        assert counted == 5 * res.queries_per_seed + 2 * len(fn.inner_max_candidates)

    def test_requires_vectorized_instance(self):
        from subsaddle import random_submodular_instance, Stream

        fn = random_submodular_instance(Stream.from_seed(0), n=2, m=1)
        with pytest.raises(ValueError):
            seed_sweep(fn, short_config(), seeds=[0])

    def test_ergodic_mean_tracks_probes(self):
        cfg = short_config(horizon=100)
        res = seed_sweep(make_example_b2(), cfg, seeds=[0])
        assert 0.0 <= res.ergodic_x[0] <= 1.0
        assert 0.0 <= res.ergodic_y[0] <= 1.0
