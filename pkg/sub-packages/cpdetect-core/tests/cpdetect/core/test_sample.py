# SPDX-FileCopyrightText: Copyright (c) 2024 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: LicenseRef-Apache2
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np
import pytest

from cpdetect.core.sample import (
    DivisorMode,
    MultivariateSample,
    PseudoObservations,
    SubsampleWindow,
    empirical_copula_eval,
    iter_splits,
    maximal_ranks,
    negate_sample,
    pseudo_observations,
    rank_block,
)


def test_sample_rejects_one_dimensional_input():
    with pytest.raises(ValueError, match="2-D matrix"):
        MultivariateSample(np.arange(5.0))


def test_sample_rejects_single_observation():
    with pytest.raises(ValueError, match="at least two observations"):
        MultivariateSample(np.ones((1, 3)))


def test_sample_rejects_single_component():
    with pytest.raises(ValueError, match="at least two components"):
        MultivariateSample(np.ones((5, 1)))


def test_sample_rejects_non_finite_values_with_location():
    data = np.ones((4, 2))
    data[1, 0] = np.nan
    with pytest.raises(ValueError, match="row 2, column 1"):
        MultivariateSample(data)


def test_sample_rejects_mismatched_column_names():
    with pytest.raises(ValueError, match="column names"):
        MultivariateSample(np.ones((3, 2)), column_names=("a", "b", "c"))


def test_sample_holds_a_read_only_copy():
    data = np.arange(6.0).reshape(3, 2)
    sample = MultivariateSample(data)
    data[0, 0] = 100.0
    assert sample.data[0, 0] == 0.0
    assert not sample.data.flags.writeable
    assert (sample.n, sample.d) == (3, 2)


def test_maximal_ranks_give_ties_the_largest_rank():
    sample = MultivariateSample(np.array([[1.0, 4.0], [2.0, 3.0], [2.0, 2.0], [3.0, 1.0]]))
    ranks = maximal_ranks(sample, SubsampleWindow(1, 4))
    np.testing.assert_array_equal(ranks[:, 0], [1, 3, 3, 4])
    np.testing.assert_array_equal(ranks[:, 1], [4, 3, 2, 1])
    assert ranks.dtype == np.int64


def test_maximal_ranks_are_relative_to_the_window():
    sample = MultivariateSample(np.array([[5.0, 1.0], [1.0, 2.0], [3.0, 3.0], [2.0, 4.0]]))
    ranks = maximal_ranks(sample, SubsampleWindow(2, 4))
    np.testing.assert_array_equal(ranks, [[1, 1], [3, 2], [2, 3]])


def test_window_past_the_end_raises_index_error(small_sample):
    with pytest.raises(IndexError, match="out of bounds"):
        maximal_ranks(small_sample, SubsampleWindow(5, small_sample.n + 1))


@pytest.mark.parametrize("k, l", [(0, 3), (4, 3)])
def test_invalid_window_raises(k, l):
    with pytest.raises(ValueError, match="Invalid window"):
        SubsampleWindow(k, l)


def test_simulation_divisor_keeps_values_inside_the_unit_interval(small_sample):
    pobs = pseudo_observations(small_sample)
    assert pobs.divisor_mode is DivisorMode.SIMULATION
    assert pobs.values.min() == pytest.approx(1 / 11)
    assert pobs.values.max() == pytest.approx(10 / 11)


def test_theory_divisor_reaches_one(small_sample):
    pobs = pseudo_observations(small_sample, mode=DivisorMode.THEORY)
    assert pobs.values.max() == 1.0
    assert pobs.values.min() == pytest.approx(0.1)


def test_rank_block_matches_windowed_pseudo_observations(small_sample):
    window = SubsampleWindow(3, 8)
    expected = pseudo_observations(small_sample, window).values
    np.testing.assert_allclose(rank_block(small_sample.data[2:8]), expected)


def test_empirical_copula_at_corners(small_sample):
    pobs = pseudo_observations(small_sample)
    assert empirical_copula_eval(pobs, [1.0, 1.0]) == 1.0
    assert empirical_copula_eval(pobs, [0.0, 0.0]) == 0.0
    assert empirical_copula_eval(pobs, [1.0, 0.0]) == 0.0


def test_empirical_copula_counts_rows_below_the_point():
    pobs = PseudoObservations(np.array([[0.25, 0.5], [0.5, 0.25], [0.75, 0.75]]))
    assert empirical_copula_eval(pobs, [0.5, 0.5]) == pytest.approx(2 / 3)
    assert empirical_copula_eval(pobs, [0.3, 0.6]) == pytest.approx(1 / 3)


def test_empirical_copula_rejects_points_outside_the_cube(small_sample):
    pobs = pseudo_observations(small_sample)
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        empirical_copula_eval(pobs, [0.5, 1.5])


def test_negated_sample_reverses_ranks(small_sample):
    window = SubsampleWindow(1, small_sample.n)
    ranks = maximal_ranks(small_sample, window)
    negated = maximal_ranks(negate_sample(small_sample), window)
    np.testing.assert_array_equal(negated, small_sample.n + 1 - ranks)


def test_iter_splits_covers_every_split_point(small_sample):
    splits = list(iter_splits(small_sample))
    assert [split.k for split in splits] == list(range(1, small_sample.n))
    for split in splits:
        assert split.prefix.shape == (split.k, 2)
        assert split.suffix.shape == (small_sample.n - split.k, 2)
        np.testing.assert_allclose(split.prefix, rank_block(small_sample.data[: split.k]))


@pytest.mark.parametrize("mode", list(DivisorMode))
def test_pseudo_observations_ignore_increasing_transforms(small_sample, mode):
    data = small_sample.data
    transformed = MultivariateSample(np.column_stack([np.exp(data[:, 0]), data[:, 1] ** 3 - 4.0]))
    window = SubsampleWindow(3, 9)
    np.testing.assert_array_equal(
        pseudo_observations(transformed, window, mode).values, pseudo_observations(small_sample, window, mode).values
    )


def test_permuting_rows_permutes_pseudo_observations(small_sample, rng):
    order = rng.permutation(small_sample.n)
    permuted = MultivariateSample(small_sample.data[order])
    expected = pseudo_observations(small_sample).values[order]
    np.testing.assert_array_equal(pseudo_observations(permuted).values, expected)


def test_permuting_rows_inside_a_window_permutes_its_pseudo_observations(small_sample, rng):
    window = SubsampleWindow(4, 8)
    order = rng.permutation(window.m)
    data = small_sample.data.copy()
    data[3:8] = data[3:8][order]
    permuted = MultivariateSample(data)
    np.testing.assert_array_equal(
        pseudo_observations(permuted, window).values, pseudo_observations(small_sample, window).values[order]
    )
