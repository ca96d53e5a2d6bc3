import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clusterpm import (
    AngularGrid,
    ArrayGeometry,
    ClusteringVector,
    PowerPattern,
    UnsupportedGeometryError,
    cpa_power_pattern,
    fpa_array_factor,
    fpa_power_pattern,
    invert_af_to_excitations,
    ipm_weighting,
    pm_metric,
    project_onto_reference,
    subarray_average,
)


def naive_ipm(labels, q, excitations, d, m_samples, max_iter, tol):
    """Independent re-implementation with plain loops, no shared code paths."""
    n = len(excitations)
    u = [-1.0 + 2.0 * i / (m_samples - 1) for i in range(m_samples)]
    w_quad = [2.0 / (m_samples - 1)] * m_samples
    w_quad[0] = w_quad[-1] = 1.0 / (m_samples - 1)

    def field(weights_q):
        vals = []
        for ul in u:
            acc = 0j
            for i in range(n):
                acc += weights_q[labels[i] - 1] * np.exp(1j * 2 * np.pi * d * i * ul)
            vals.append(acc)
        return vals

    ref = []
    for ul in u:
        acc = 0j
        for i in range(n):
            acc += excitations[i] * np.exp(1j * 2 * np.pi * d * i * ul)
        ref.append(abs(acc) ** 2)
    energy = sum(w * r for w, r in zip(w_quad, ref))

    aux = list(excitations)
    gammas = []
    for t in range(max_iter + 1):
        weights = []
        for qi in range(1, q + 1):
            members = [aux[i] for i in range(n) if labels[i] == qi]
            weights.append(sum(members) / len(members))
        f = field(weights)
        gamma = sum(w * abs(r - abs(fv) ** 2) for w, r, fv in zip(w_quad, ref, f)) / energy
        gammas.append(gamma)
        if t > 0 and abs(gamma - gammas[-2]) <= tol * gammas[-2]:
            break
        if gamma <= 1e-14:
            break
        if t == max_iter:
            break
        proj = []
        for fv, r in zip(f, ref):
            mag = abs(fv)
            if abs(mag**2 - r) <= 1e-12 * max(mag**2, r):
                proj.append(fv)
            elif mag > 0:
                proj.append(fv / mag * np.sqrt(r))
            else:
                proj.append(complex(np.sqrt(r)))
        aux = []
        for i in range(n):
            acc = 0j
            for l in range(m_samples):
                acc += w_quad[l] * proj[l] * np.exp(-1j * 2 * np.pi * d * i * u[l])
            aux.append(0.5 * acc)
    return gammas


class TestSubarrayAverage:
    def test_singletons_pass_through(self):
        exc = np.array([1 + 2j, 3, -1j], dtype=complex)
        c = ClusteringVector([1, 2, 3], 3)
        np.testing.assert_array_equal(subarray_average(exc, c), exc)

    def test_pair_mean(self):
        c = ClusteringVector([1, 1], 1)
        got = subarray_average(np.array([1 + 0j, 0 + 1j]), c)
        np.testing.assert_allclose(got, [0.5 + 0.5j])

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_matches_group_by_mean(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 20))
        q = int(rng.integers(1, n + 1))
        labels = np.concatenate([np.arange(1, q + 1), rng.integers(1, q + 1, size=n - q)])
        rng.shuffle(labels)
        c = ClusteringVector(labels, q)
        exc = rng.normal(size=n) + 1j * rng.normal(size=n)
        got = subarray_average(exc, c)
        want = np.array([exc[labels == qi].mean() for qi in range(1, q + 1)])
        assert np.max(np.abs(got - want)) <= 1e-15 * max(1.0, np.abs(want).max())


class TestProjection:
    def grid3(self, values):
        return PowerPattern(AngularGrid(3), np.asarray(values, dtype=float))

    def test_shrinks_magnitude(self):
        out = project_onto_reference([2 + 0j, 1, 1], self.grid3([1.0, 1.0, 1.0]))
        assert out[0] == pytest.approx(1 + 0j)

    def test_grows_magnitude_keeps_phase(self):
        out = project_onto_reference([1 + 1j, 1, 1], self.grid3([8.0, 1.0, 1.0]))
        assert out[0] == pytest.approx(2 + 2j)

    def test_equal_power_passes_through(self):
        af = np.array([1 + 1j, 0.5, -2j])
        ref = self.grid3(np.abs(af) ** 2)
        np.testing.assert_array_equal(project_onto_reference(af, ref), af)

    def test_zero_magnitude_gets_zero_phase(self):
        out = project_onto_reference([0j, 1, 1], self.grid3([9.0, 1.0, 1.0]))
        assert out[0] == pytest.approx(3 + 0j)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(3, 40))
        af = rng.normal(size=m) + 1j * rng.normal(size=m)
        ref = PowerPattern(AngularGrid(m), rng.uniform(0, 4, size=m))
        once = project_onto_reference(af, ref)
        twice = project_onto_reference(once, ref)
        assert np.max(np.abs(twice - once)) <= 1e-13 * max(1.0, np.abs(once).max())


class TestInversion:
    def test_constant_spectrum_is_single_element(self):
        grid = AngularGrid(101)
        got = invert_af_to_excitations(np.ones(101, dtype=complex), ArrayGeometry(6), grid)
        want = np.zeros(6, dtype=complex)
        want[0] = 1.0
        assert np.max(np.abs(got - want)) <= 1e-12

    def test_round_trip_two_elements(self):
        geometry = ArrayGeometry(2)
        grid = AngularGrid(1001)
        exc = np.array([1.0, 1j])
        af = fpa_array_factor(geometry, exc, grid)
        got = invert_af_to_excitations(af, geometry, grid)
        assert np.max(np.abs(got - exc)) <= 1e-10

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_random(self, seed):
        rng = np.random.default_rng(seed)
        geometry = ArrayGeometry(8)
        grid = AngularGrid(1001)
        exc = rng.normal(size=8) + 1j * rng.normal(size=8)
        af = fpa_array_factor(geometry, exc, grid)
        got = invert_af_to_excitations(af, geometry, grid)
        assert np.max(np.abs(got - exc)) <= 1e-10

    def test_rejects_other_spacings(self):
        with pytest.raises(UnsupportedGeometryError, match="0.5"):
            invert_af_to_excitations(np.ones(11), ArrayGeometry(4, spacing=0.7), AngularGrid(11))

    def test_rejects_too_few_samples(self):
        with pytest.raises(ValueError, match="M >= N"):
            invert_af_to_excitations(np.ones(8), ArrayGeometry(8), AngularGrid(8))


class TestIpmWeighting:
    def test_identity_clustering_is_exact_at_start(self):
        rng = np.random.default_rng(31)
        exc = rng.normal(size=6) + 1j * rng.normal(size=6)
        geometry = ArrayGeometry(6)
        grid = AngularGrid(101)
        ref = fpa_power_pattern(geometry, exc, grid)
        c = ClusteringVector(np.arange(1, 7), 6)
        trace = ipm_weighting(geometry, c, exc, ref)
        assert trace.gamma_history[0] <= 1e-10
        assert trace.best_gamma <= 1e-10

    def test_matches_straight_line_reimplementation(self):
        geometry = ArrayGeometry(4)
        exc = np.ones(4, dtype=complex)
        grid = AngularGrid(33)
        ref = fpa_power_pattern(geometry, exc, grid)
        c = ClusteringVector([1, 1, 2, 2], 2)
        trace = ipm_weighting(geometry, c, exc, ref, max_iter=60, tol=1e-6)
        want = naive_ipm([1, 1, 2, 2], 2, list(exc), 0.5, 33, 60, 1e-6)
        assert len(trace.gamma_history) == len(want)
        for got, expected in zip(trace.gamma_history, want):
            assert got == pytest.approx(expected, rel=1e-12, abs=1e-14)

    def test_matches_oracle_on_steered_taper(self):
        from clusterpm.tapers import dolph_chebyshev

        geometry = ArrayGeometry(8)
        exc = dolph_chebyshev(8, -22.0, theta0_deg=7.0)
        grid = AngularGrid(33)
        ref = fpa_power_pattern(geometry, exc, grid)
        labels = [1, 1, 2, 3, 3, 4, 5, 5]
        c = ClusteringVector(labels, 5)
        trace = ipm_weighting(geometry, c, exc, ref, max_iter=40, tol=1e-6)
        want = naive_ipm(labels, 5, list(exc), 0.5, 33, 40, 1e-6)
        for got, expected in zip(trace.gamma_history, want):
            assert got == pytest.approx(expected, rel=1e-12, abs=1e-14)

    def test_reported_gamma_recomputable(self):
        rng = np.random.default_rng(5)
        exc = rng.normal(size=10) + 1j * rng.normal(size=10)
        geometry = ArrayGeometry(10)
        grid = AngularGrid(101)
        ref = fpa_power_pattern(geometry, exc, grid)
        c = ClusteringVector([1, 1, 2, 2, 3, 3, 4, 4, 5, 5], 5)
        trace = ipm_weighting(geometry, c, exc, ref)
        recomputed = pm_metric(ref, cpa_power_pattern(geometry, c, trace.final_weights, grid))
        assert recomputed == pytest.approx(trace.best_gamma, rel=1e-12)

    def test_never_worse_than_plain_cluster_means(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            exc = rng.normal(size=9) + 1j * rng.normal(size=9)
            labels = np.concatenate([np.arange(1, 4), rng.integers(1, 4, size=6)])
            rng.shuffle(labels)
            c = ClusteringVector(labels, 3)
            geometry = ArrayGeometry(9)
            ref = fpa_power_pattern(geometry, exc, AngularGrid(65))
            trace = ipm_weighting(geometry, c, exc, ref)
            assert trace.best_gamma <= trace.gamma_history[0] + 1e-15

    def test_trace_csv(self):
        geometry = ArrayGeometry(4)
        exc = np.ones(4, dtype=complex)
        ref = fpa_power_pattern(geometry, exc, AngularGrid(17))
        c = ClusteringVector([1, 1, 2, 2], 2)
        trace = ipm_weighting(geometry, c, exc, ref, max_iter=5)
        lines = trace.to_csv().strip().splitlines()
        assert lines[0] == "t,gamma"
        assert lines[1].startswith("0,")

    def test_spacing_restriction_propagates(self):
        geometry = ArrayGeometry(4, spacing=0.6)
        exc = np.ones(4, dtype=complex)
        ref = fpa_power_pattern(geometry, exc, AngularGrid(17))
        c = ClusteringVector([1, 1, 2, 2], 2)
        with pytest.raises(UnsupportedGeometryError):
            ipm_weighting(geometry, c, exc, ref)
