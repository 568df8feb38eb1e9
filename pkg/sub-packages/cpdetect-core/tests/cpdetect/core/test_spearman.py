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
    negate_sample,
    pseudo_observations,
)
from cpdetect.core.spearman import (
    LinearStatistic,
    builtin_f,
    phi_A,
    phi_vector,
    rho1,
    rho2,
    rho3,
    statistic,
    subset_index,
    subset_label,
    subset_products,
    subset_sizes,
    t_process,
    trajectory_from_process,
)


def test_subset_index_uses_one_based_bits():
    assert subset_index([1]) == 1
    assert subset_index({1, 3}) == 5
    assert subset_index(range(1, 4)) == 7
    assert subset_label(5) == "{1,3}"


@pytest.mark.parametrize("components", [[], [0, 1]])
def test_subset_index_rejects_empty_or_zero_based(components):
    with pytest.raises(ValueError):
        subset_index(components)


def test_subset_sizes_in_canonical_order():
    np.testing.assert_array_equal(subset_sizes(3), [1, 1, 2, 1, 2, 2, 3])


def test_subset_products_match_explicit_products(rng):
    values = rng.uniform(size=(6, 3))
    products = subset_products(values)
    assert products.shape == (6, 8)
    np.testing.assert_array_equal(products[:, 0], 1.0)
    np.testing.assert_allclose(products[:, 0b011], (1 - values[:, 0]) * (1 - values[:, 1]))
    np.testing.assert_allclose(products[:, 0b110], (1 - values[:, 1]) * (1 - values[:, 2]))
    np.testing.assert_allclose(products[:, 0b111], np.prod(1 - values, axis=1))


def test_phi_A_closed_form_matches_grid_integration(rng, make_normals):
    pobs = pseudo_observations(MultivariateSample(make_normals(30, 2, 0.6, rng)))
    grid = (np.arange(200) + 0.5) / 200
    u1, u2 = np.meshgrid(grid, grid, indexing="ij")
    below = (pobs.values[:, 0, None, None] <= u1) & (pobs.values[:, 1, None, None] <= u2)
    integral = below.mean(axis=0).mean()
    assert phi_A(pobs, 0b11) == pytest.approx(integral, abs=1e-2)


def test_phi_A_singletons_do_not_depend_on_the_data(small_sample):
    pobs = pseudo_observations(small_sample)
    # the mean of 1 - i / (n + 1) over i = 1..n
    assert phi_A(pobs, 0b01) == pytest.approx(0.5)
    assert phi_A(pobs, 0b10) == pytest.approx(0.5)


def test_phi_A_rejects_masks_outside_the_dimension(small_sample):
    pobs = pseudo_observations(small_sample)
    with pytest.raises(ValueError, match="bitmask"):
        phi_A(pobs, 0b100)


def test_phi_vector_agrees_with_phi_A(trivariate_sample):
    pobs = pseudo_observations(trivariate_sample)
    expected = [phi_A(pobs, mask) for mask in range(1, 8)]
    np.testing.assert_allclose(phi_vector(pobs.values), expected)


def test_rho_is_near_one_for_comonotone_data():
    x = np.arange(1.0, 1001.0)
    pobs = pseudo_observations(MultivariateSample(np.column_stack([x, x])))
    assert rho1(pobs) > 0.99
    assert rho2(pobs) > 0.99


def test_rho3_equals_rho1_in_two_dimensions(small_sample):
    pobs = pseudo_observations(small_sample)
    assert rho3(pobs) == pytest.approx(rho1(pobs))


def test_rho_requires_two_components():
    with pytest.raises(ValueError, match="at least two components"):
        rho1(PseudoObservations(np.array([[0.5], [0.25]])))


def test_builtin_f_matches_the_rho_functionals(trivariate_sample):
    pobs = pseudo_observations(trivariate_sample)
    phi = phi_vector(pobs.values)
    d = trivariate_sample.d
    scale = (d + 1) / (2**d - d - 1)
    assert builtin_f("rho1", d)(phi) == pytest.approx(rho1(pobs) + scale)
    assert builtin_f("f3", d)(phi) == pytest.approx(rho3(pobs) + 3.0)
    # sum_A (-1)^|A| phi_A = mean(prod U) - 1
    assert builtin_f("rho2", d)(phi) == pytest.approx(rho2(pobs) + scale - scale * 2**d)


def test_builtin_f_names_and_errors():
    assert builtin_f("f2", 2).name == "rho2"
    with pytest.raises(ValueError, match="Unknown statistic"):
        builtin_f("rho4", 2)


def test_linear_statistic_validates_length():
    with pytest.raises(ValueError, match="length 2\\^d - 1"):
        LinearStatistic(np.ones(4))
    with pytest.raises(ValueError, match="length 2\\^d - 1"):
        LinearStatistic(np.ones(1))


def test_linear_statistic_scaling():
    f = builtin_f("rho1", 2)
    g = f.scaled(-2.0)
    assert g.d == 2
    np.testing.assert_allclose(g.coefficients, -2.0 * f.coefficients)


def test_t_process_shape_and_endpoints(small_sample):
    process = t_process(small_sample)
    assert process.shape == (small_sample.n - 1, 3)
    # singleton phi_A are data free, so their differences vanish
    np.testing.assert_allclose(process[:, :2], 0.0, atol=1e-12)


def test_trajectories_of_f1_and_f3_coincide_in_two_dimensions(small_sample):
    s1 = statistic(small_sample, builtin_f("rho1", 2))
    s3 = statistic(small_sample, builtin_f("rho3", 2))
    np.testing.assert_allclose(s1.values, s3.values, rtol=1e-12)
    assert s1.argmax_k == s3.argmax_k


def test_f2_on_the_sample_equals_f1_on_the_negated_sample(trivariate_sample):
    s2 = statistic(trivariate_sample, builtin_f("rho2", 3))
    s1 = statistic(negate_sample(trivariate_sample), builtin_f("rho1", 3))
    np.testing.assert_allclose(s2.values, s1.values, rtol=1e-12, atol=1e-14)


def test_argmax_is_the_smallest_maximizing_split():
    process = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -3.0], [0.0, 0.0, 3.0]])
    trajectory = trajectory_from_process(process, builtin_f("rho1", 2))
    assert trajectory.argmax_k == 2
    assert trajectory.max_value == pytest.approx(36.0)


def test_nonlinear_function_is_applied_row_by_row(small_sample):
    process = t_process(small_sample)
    f = builtin_f("rho1", 2)
    linear = trajectory_from_process(process, f)
    wrapped = trajectory_from_process(process, lambda x: float(f(x)))
    np.testing.assert_allclose(wrapped.values, linear.values)


def test_statistic_checks_dimension(small_sample):
    with pytest.raises(ValueError, match="d=3"):
        statistic(small_sample, builtin_f("rho1", 3))


def test_statistic_detects_a_dependence_change(change_sample, null_sample):
    f = builtin_f("rho1", 2)
    changed = statistic(change_sample, f)
    assert 40 <= changed.argmax_k <= 80
    assert changed.max_value > statistic(null_sample, f).max_value


@pytest.fixture
def comonotone_three() -> MultivariateSample:
    x = np.array([1.0, 2.0, 3.0])
    return MultivariateSample(np.column_stack([x, 10.0 * x]))


def test_singleton_phi_A_with_the_theory_divisor():
    sample = MultivariateSample(np.array([[0.3, 2.0], [0.1, 4.0], [0.9, 1.0], [0.5, 3.0]]))
    pobs = pseudo_observations(sample, mode=DivisorMode.THEORY)
    assert phi_A(pobs, subset_index([1])) == pytest.approx(0.375)
    assert phi_A(pobs, subset_index([2])) == pytest.approx(0.375)


def test_comonotone_sample_of_three(comonotone_three):
    pobs = pseudo_observations(comonotone_three)
    assert phi_A(pobs, subset_index([1, 2])) == pytest.approx(14 / 48)
    assert rho1(pobs) == pytest.approx(0.5)
    assert rho2(pobs) == pytest.approx(0.5)


@pytest.mark.parametrize("d, expected", [(2, 12.0), (3, 8.0), (4, 80 / 11)])
def test_f1_coefficient_on_the_full_subset(d, expected):
    f = builtin_f("f1", d)
    assert f.coefficients[-1] == pytest.approx(expected)
    np.testing.assert_array_equal(f.coefficients[:-1], 0.0)


def test_f3_coefficients_in_two_dimensions():
    np.testing.assert_allclose(builtin_f("f3", 2).coefficients, [0.0, 0.0, 12.0])


def test_rho2_equals_rho1_in_two_dimensions(rng, make_normals):
    for _ in range(5):
        pobs = pseudo_observations(MultivariateSample(make_normals(6, 2, 0.3, rng)))
        assert rho2(pobs) == pytest.approx(rho1(pobs), abs=1e-12)


def test_rho2_of_the_sample_is_rho1_of_the_negated_sample(trivariate_sample):
    rho2_value = rho2(pseudo_observations(trivariate_sample))
    assert rho2_value == pytest.approx(rho1(pseudo_observations(negate_sample(trivariate_sample))), abs=1e-12)


def test_rho3_is_the_mean_of_pairwise_spearman_rho(rng, make_normals):
    data = make_normals(8, 4, 0.4, rng)
    m = data.shape[0]
    u = (np.argsort(np.argsort(data, axis=0), axis=0) + 1) / (m + 1)
    pairwise = [
        12.0 * np.mean((1.0 - u[:, i]) * (1.0 - u[:, j])) - 3.0 for i in range(4) for j in range(i + 1, 4)
    ]
    assert len(pairwise) == 6
    assert rho3(pseudo_observations(MultivariateSample(data))) == pytest.approx(np.mean(pairwise), abs=1e-12)


def test_statistic_ignores_increasing_transforms(change_sample):
    data = change_sample.data
    transformed = MultivariateSample(np.column_stack([np.arctan(data[:, 0]), np.exp(2.0 * data[:, 1]) + 1.0]))
    for which in ("rho1", "rho2"):
        f = builtin_f(which, 2)
        original, mapped = statistic(change_sample, f), statistic(transformed, f)
        np.testing.assert_allclose(mapped.values, original.values, rtol=1e-12, atol=1e-14)
        assert mapped.argmax_k == original.argmax_k
