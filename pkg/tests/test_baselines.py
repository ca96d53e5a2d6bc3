import math

import numpy as np
import pytest

from clusterpm import (
    AngularGrid,
    ArrayGeometry,
    PartitionCapError,
    emm_synthesize,
    epm_enumerate,
    pmm_synthesize,
    set_partitions,
    stirling2,
    subarray_average,
)
from clusterpm.synthesis import PmmConfig
from clusterpm.tapers import dolph_chebyshev


def stirling_inclusion_exclusion(n, q):
    """Independent oracle: S(n,q) = (1/q!) sum_i (-1)^i C(q,i) (q-i)^n."""
    total = sum((-1) ** i * math.comb(q, i) * (q - i) ** n for i in range(q + 1))
    return total // math.factorial(q)


class TestStirling:
    def test_small_values(self):
        assert stirling2(3, 3) == 1
        assert stirling2(3, 2) == 3
        assert stirling2(4, 2) == 7

    def test_against_inclusion_exclusion(self):
        for n in range(0, 15):
            for q in range(0, n + 1):
                assert stirling2(n, q) == stirling_inclusion_exclusion(n, q), (n, q)

    def test_reported_case(self):
        assert stirling2(12, 8) == 159027

    def test_out_of_range(self):
        assert stirling2(3, 5) == 0
        with pytest.raises(ValueError):
            stirling2(-1, 2)


class TestSetPartitions:
    def test_counts_match_stirling(self):
        for n in range(1, 9):
            for q in range(1, n + 1):
                got = sum(1 for _ in set_partitions(n, q))
                assert got == stirling2(n, q), (n, q)

    def test_strings_are_valid_and_unique(self):
        seen = set()
        for rgs in set_partitions(6, 3):
            assert rgs[0] == 0
            running_max = 0
            for i in range(1, 6):
                assert rgs[i] <= running_max + 1
                running_max = max(running_max, rgs[i])
            assert running_max == 2  # exactly 3 blocks
            seen.add(rgs)
        assert len(seen) == stirling2(6, 3)

    def test_lexicographic_order(self):
        strings = list(set_partitions(5, 2))
        assert strings == sorted(strings)

    def test_invalid_q(self):
        with pytest.raises(ValueError):
            list(set_partitions(3, 0))
        with pytest.raises(ValueError):
            list(set_partitions(3, 4))


class TestEmm:
    def test_identity_q(self):
        rng = np.random.default_rng(4)
        exc = rng.normal(size=5) + 1j * rng.normal(size=5)
        res = emm_synthesize(ArrayGeometry(5), exc, 5, AngularGrid(101), restarts=4)
        assert res.gamma <= 1e-10
        np.testing.assert_allclose(res.weights, exc)

    def test_two_cluster_example(self):
        # {1, 1.1} vs {-1, -1.1}: the SSE-optimal 2-partition
        exc = np.array([1.0, 1.1, -1.0, -1.1], dtype=complex)
        res = emm_synthesize(ArrayGeometry(4), exc, 2, AngularGrid(101), restarts=8)
        labels = res.clustering.assignments
        assert labels[0] == labels[1] and labels[2] == labels[3] and labels[0] != labels[2]
        np.testing.assert_allclose(sorted(res.weights.real), [-1.05, 1.05])
        np.testing.assert_allclose(res.weights.imag, 0, atol=1e-15)

    def test_weights_are_cluster_means_of_reference(self):
        exc = dolph_chebyshev(12, -20.0, theta0_deg=10.0)
        res = emm_synthesize(ArrayGeometry(12), exc, 6, AngularGrid(201), restarts=10)
        np.testing.assert_allclose(
            res.weights, subarray_average(exc, res.clustering), atol=1e-15
        )

    def test_method_tag(self):
        exc = np.ones(4, dtype=complex)
        res = emm_synthesize(ArrayGeometry(4), exc, 2, AngularGrid(33), restarts=2)
        assert res.method == "emm"
        assert res.per_sample == []


class TestEpm:
    def test_single_partition(self):
        res = epm_enumerate(ArrayGeometry(3), np.ones(3), 3, AngularGrid(9))
        assert res.partition_count == 1
        np.testing.assert_array_equal(res.clustering.assignments, [1, 2, 3])
        assert res.gamma <= 1e-10

    def test_three_partitions(self):
        res = epm_enumerate(ArrayGeometry(3), np.array([1, 1, 1j]), 2, AngularGrid(9))
        assert res.partition_count == 3

    def test_cap_refusal_reports_count(self):
        with pytest.raises(PartitionCapError) as err:
            epm_enumerate(ArrayGeometry(12), np.ones(12), 8, AngularGrid(9), cap=1000)
        assert err.value.count == 159027
        assert "159027" in str(err.value)

    def test_progress_checkpoints(self):
        calls = []
        epm_enumerate(
            ArrayGeometry(6),
            dolph_chebyshev(6, -20.0, 10.0),
            3,
            AngularGrid(9),
            progress=lambda done, total, g, rgs: calls.append((done, total)),
            progress_every=20,
        )
        assert calls, "expected at least one progress report"
        assert calls[-1][0] == calls[-1][1] == stirling2(6, 3)

    def test_threaded_matches_serial(self):
        exc = dolph_chebyshev(7, -20.0, 10.0)
        grid = AngularGrid(17)
        a = epm_enumerate(ArrayGeometry(7), exc, 4, grid, threads=1)
        b = epm_enumerate(ArrayGeometry(7), exc, 4, grid, threads=2)
        assert a.gamma == b.gamma
        np.testing.assert_array_equal(a.clustering.assignments, b.clustering.assignments)

    def test_oracle_lower_bounds_pmm(self):
        exc = dolph_chebyshev(8, -20.0, 10.0)
        grid_m = 17
        enum = epm_enumerate(ArrayGeometry(8), exc, 5, AngularGrid(grid_m))
        cfg = PmmConfig(q_count=5, grid_m=grid_m, restarts=30, base_seed=0)
        pmm = pmm_synthesize(ArrayGeometry(8), exc, cfg)
        assert pmm.gamma >= enum.gamma - 1e-12
        assert pmm.gamma <= enum.gamma * 1.05
