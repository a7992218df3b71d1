import math

import numpy as np
import pytest

from aligned_clocks.basin import (
    AttractorHit,
    cell_centers,
    convergence_rate,
    iterate_batch,
    iterate_to_attractor,
    rasterize_basin,
)
from aligned_clocks.core import TWO_PI, Window, apply_line_map
from aligned_clocks.errors import NotConverging

A = 0.1


class TestIterateToAttractor:
    def test_s2_point(self):
        hit = iterate_to_attractor((math.pi, math.pi / 2), A)
        assert isinstance(hit, AttractorHit)
        assert (hit.l, hit.k) == (0, 0)
        assert hit.location == pytest.approx((math.pi, math.pi))
        assert hit.iterations > 0

    def test_translated_point(self):
        base = iterate_to_attractor((math.pi, math.pi / 2), A)
        hit = iterate_to_attractor((3 * math.pi, math.pi / 2 + TWO_PI), A)
        assert (hit.l, hit.k) == (base.l + 1, base.k + 1)
        assert hit.iterations == base.iterations

    def test_saddle_is_undecided(self):
        assert iterate_to_attractor((math.pi, 0.0), A) is None
        assert iterate_to_attractor((0.0, 0.0), A) is None

    def test_sink_needs_no_steps(self):
        assert iterate_to_attractor((math.pi, math.pi), A).iterations == 0

    def test_budget_exhausted(self):
        assert iterate_to_attractor((0.5, 1.0), A, n_max=3) is None

    def test_result_is_near_sink(self):
        p = np.array([1.0, 2.5])
        hit = iterate_to_attractor(p, A, eps=1e-6)
        z = p
        for _ in range(hit.iterations):
            z = apply_line_map(z, A)
        assert np.hypot(*(z - hit.location)) < 1e-6

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            iterate_batch([[0.0, 1.0]], A, eps=0.0)
        with pytest.raises(ValueError):
            iterate_batch([[0.0, 1.0]], A, n_max=0)


class TestRaster:
    @pytest.fixture(scope="class")
    @staticmethod
    def raster():
        return rasterize_basin(Window(0, TWO_PI, 0, TWO_PI), 64, 64, A)

    def test_all_decided_to_phase_opposition(self, raster):
        assert raster.decided.all()
        assert set(raster.catalog) <= {(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)}
        share = np.mean(np.all(raster.labels == 0, axis=-1))
        assert share > 0.5

    def test_every_cell_reaches_its_label(self, raster):
        pts = raster.cell_centers().reshape(-1, 2)
        z = pts.copy()
        for _ in range(int(raster.iterations.max())):
            z = apply_line_map(z, A)
        target = np.array([math.pi, math.pi]) + TWO_PI * raster.labels.reshape(-1, 2)
        assert np.hypot(*(z - target).T).max() < 1e-6

    def test_shifted_window(self, raster):
        other = rasterize_basin(Window(TWO_PI, 2 * TWO_PI, 0, TWO_PI), 64, 64, A)
        assert np.array_equal(other.relative_labels(), raster.relative_labels())
        assert np.array_equal(other.iterations, raster.iterations)

    def test_workers_are_bit_identical(self, raster):
        par = rasterize_basin(Window(0, TWO_PI, 0, TWO_PI), 64, 64, A, workers=4)
        assert np.array_equal(par.labels, raster.labels)
        assert np.array_equal(par.iterations, raster.iterations)
        assert np.array_equal(par.decided, raster.decided)

    def test_cell_centres(self):
        c = cell_centers(Window(0, 1, 0, 2), 2, 4)
        assert c.shape == (4, 2, 2)
        assert tuple(c[0, 0]) == (0.25, 0.25)
        assert tuple(c[3, 1]) == (0.75, 1.75)

    def test_too_small(self):
        with pytest.raises(ValueError):
            rasterize_basin(Window(0, 1, 0, 1), 1, 5, A)


class TestConvergenceRate:
    @pytest.mark.parametrize("a, n", [(0.1, 100), (0.05, 200)])
    def test_generic(self, a, n):
        assert convergence_rate((math.pi + 0.3, math.pi / 2), a, n) == pytest.approx(1 - a, abs=0.01)

    @pytest.mark.parametrize("a, n", [(0.1, 30), (0.05, 60)])
    def test_diagonal(self, a, n):
        assert convergence_rate((2.0, 2.0), a, n) == pytest.approx(1 - 3 * a, abs=0.01)

    def test_not_near_sink(self):
        with pytest.raises(NotConverging):
            convergence_rate((math.pi, 0.0), A, 10)
        with pytest.raises(NotConverging):
            convergence_rate((0.3, 2.0), A, 2)
