import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import oracles
from conftest import make_series, random_walk
from gaf_transfer.errors import (
    DimensionMismatch,
    InvalidCombination,
    InvalidParameter,
    LengthMismatch,
    NegativeParameter,
    TooFewSamples,
    ZeroVariance,
)
from gaf_transfer.similarity import (
    ALL_SPECS,
    BASELINE_SPECS,
    GAF_SPECS,
    Direction,
    Function,
    Mode,
    SimilaritySpec,
    adapted_rand_error,
    align,
    cmd,
    coral,
    dtw,
    euclidean,
    evaluate,
    mmd,
    pearson,
    psnr,
    ssim,
    twed,
    wasserstein,
)


class TestSpecs:
    def test_grid_sizes(self):
        assert len(BASELINE_SPECS) == 8
        assert len(GAF_SPECS) == 7
        assert len({s.id for s in ALL_SPECS}) == 15

    @pytest.mark.parametrize("fn", ["mmd", "pearson", "dtw", "twed"])
    def test_excluded_from_gaf(self, fn):
        with pytest.raises(InvalidCombination):
            SimilaritySpec.of(fn, gaf=True)

    @pytest.mark.parametrize("fn", ["are", "psnr", "ssim"])
    def test_image_only(self, fn):
        with pytest.raises(InvalidCombination):
            SimilaritySpec(Function(fn), Mode.RAW)
        assert SimilaritySpec.of(fn, gaf=True).mode is Mode.GAF_IMAGE

    def test_directions(self):
        up = {s.function for s in ALL_SPECS if s.direction is Direction.MAXIMIZE}
        assert up == {Function.PEARSON, Function.PSNR, Function.SSIM}

    def test_parse_round_trip(self):
        for s in ALL_SPECS:
            assert SimilaritySpec.parse(s.id) == s


class TestPointwise:
    def test_euclidean(self):
        assert euclidean([0, 0], [3, 4]) == 5.0
        assert euclidean([1, 2, 3], [2, 2, 2]) == pytest.approx(math.sqrt(2), abs=1e-15)
        with pytest.raises(LengthMismatch):
            euclidean([1, 2], [1, 2, 3])

    def test_pearson(self):
        a = np.array([1.0, 2.0, 3.0])
        assert pearson(a, a) == pytest.approx(1.0, abs=1e-15)
        assert pearson(a, -a) == pytest.approx(-1.0, abs=1e-15)
        # cov 3 over sqrt(2 * 42/9)
        assert pearson(a, [1, 2, 4]) == pytest.approx(3 / math.sqrt(2 * 42 / 9), abs=1e-14)
        assert pearson(a, [1, 2, 4]) == pytest.approx(stats.pearsonr(a, [1, 2, 4])[0], abs=1e-14)
        with pytest.raises(ZeroVariance):
            pearson([1, 1, 1], a)

    def test_align_keeps_recent(self):
        p = align([1, 2, 3, 4, 5], [9, 8, 7])
        assert p.a.tolist() == [3, 4, 5] and p.b.tolist() == [9, 8, 7]


class TestDistributional:
    def test_mmd_identity_and_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 10))
        assert mmd(x, x) == pytest.approx(0.0, abs=1e-7)
        assert mmd(x[:1], x[:1]) == 0.0
        z, o = np.zeros((3, 10)), np.ones((3, 10))
        assert mmd(z, o) == pytest.approx(oracles.mmd_double_sum(z.tolist(), o.tolist()), abs=1e-12)
        y = rng.normal(0.5, 1.2, size=(7, 10))
        assert mmd(x, y) == pytest.approx(oracles.mmd_double_sum(x.tolist(), y.tolist()), abs=1e-12)
        with pytest.raises(DimensionMismatch):
            mmd(x, y[:, :3])

    def test_cmd_hand_values(self):
        assert cmd([-1, -1], [1, 1]) == pytest.approx(1.0, abs=1e-15)
        assert cmd([-1, 1], [0, 0]) == pytest.approx(0.3125, abs=1e-15)
        assert cmd([0.2, 0.5], [0.2, 0.5]) == 0.0

    def test_coral(self):
        xs = [[1.0, 2.0], [2.0, 1.0], [4.0, 5.0]]
        xt = [[0.0, 1.0], [1.0, 3.0], [3.0, 2.0]]
        assert coral(xs, xt) == pytest.approx(oracles.coral_direct(xs, xt), abs=1e-14)
        assert coral(xs, xs) == 0.0
        assert coral(xs[::-1], xt) == pytest.approx(coral(xs, xt), abs=1e-14)
        with pytest.raises(TooFewSamples):
            coral(xs[:1], xt)

    def test_wasserstein(self):
        assert wasserstein([0, 1], [0, 3]) == 1.0
        assert wasserstein([0, 1, 2], [0, 1, 2]) == 0.0
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=13), rng.normal(size=29)
        assert wasserstein(a, b) == pytest.approx(stats.wasserstein_distance(a, b), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=30), st.floats(-50, 50))
    def test_wasserstein_translation(self, a, c):
        a = np.asarray(a)
        assert wasserstein(a, a + c) == pytest.approx(abs(c), abs=1e-9)


class TestElastic:
    def test_dtw(self):
        assert dtw([1, 2, 3], [1, 2, 2, 3]) == 0.0
        assert dtw([0], [5]) == 5.0
        assert dtw([1, 2, 3], [1, 2, 3]) == 0.0

    def test_twed(self):
        assert twed([0], [0], lam=3.0, nu=0.5) == 0.0
        assert twed([1, 5, 2], [1, 5, 2]) == 0.0
        with pytest.raises(NegativeParameter):
            twed([1], [1], lam=-1)

    def test_against_oracles(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            a = rng.normal(size=rng.integers(1, 5)).tolist()
            b = rng.normal(size=rng.integers(1, 5)).tolist()
            assert dtw(a, b) == pytest.approx(oracles.dtw_paths(a, b), abs=1e-9)
            assert twed(a, b) == pytest.approx(oracles.twed_recursive(a, b), abs=1e-9)


class TestImage:
    def test_are(self):
        t = np.array([[0, 0], [1, 1]], float)
        u = np.array([[0, 1], [0, 1]], float)
        assert adapted_rand_error(t, t) == 0.0
        assert adapted_rand_error(t, u) == pytest.approx(
            oracles.are_pair_counting([0, 0, 1, 1], [0, 1, 0, 1]), abs=1e-15
        )
        with pytest.raises(InvalidParameter):
            adapted_rand_error(t, u, alpha=1.5)

    def test_psnr(self):
        assert psnr([[3.0]], [[3.0]]) == math.inf
        assert psnr([[0.0]], [[255.0]]) == pytest.approx(0.0, abs=1e-12)
        assert psnr([[0.0]], [[25.5]]) == pytest.approx(20.0, abs=1e-12)

    def test_ssim(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(0, 255, (5, 5))
        assert ssim(x, x) == pytest.approx(1.0, abs=1e-15)
        c1 = (0.01 * 255) ** 2
        assert ssim(np.zeros((3, 3)), np.full((3, 3), 255.0)) == pytest.approx(
            c1 / (255**2 + c1), rel=1e-12
        )
        with pytest.raises(DimensionMismatch):
            ssim(np.zeros((2, 2)), np.zeros((3, 3)))


class TestEvaluate:
    @pytest.fixture
    def pair(self):
        rng = np.random.default_rng(9)
        t = random_walk(rng, 80, 50.0)
        return make_series("T", t), make_series("C", 3.0 * t + 11.0)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.id)
    def test_affine_copy_is_optimal(self, spec, pair):
        target, copy = pair
        score = evaluate(spec, copy, target)
        if spec.function is Function.PSNR:
            assert score == math.inf or score > 150
        elif spec.direction is Direction.MAXIMIZE:
            assert score == pytest.approx(1.0, abs=1e-9)
        else:
            assert score == pytest.approx(0.0, abs=1e-6)

    def test_invalid_combination(self, pair):
        with pytest.raises(InvalidCombination):
            evaluate("mmd@gaf_matrix", *pair)
