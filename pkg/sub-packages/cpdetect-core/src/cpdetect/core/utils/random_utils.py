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

from typing import Iterator, Sequence

import numpy as np


__all__: Sequence[str] = (
    "rng_stream",
    "iter_rng_streams",
)


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """A generator for the stream identified by (seed, *keys).

    Distinct key tuples of the same length give statistically independent streams, and the same tuple always
    reproduces the same draws. Callers keep the number of keys fixed for a given purpose: a trailing zero key is
    not guaranteed to differ from omitting it.

    Example:
        >>> from cpdetect.core.utils.random_utils import rng_stream
        >>> a = rng_stream(42, 3, 1).standard_normal(5)
        >>> b = rng_stream(42, 3, 1).standard_normal(5)
        >>> assert (a == b).all()
    """
    if seed < 0 or any(key < 0 for key in keys):
        raise ValueError(f"Seeds and stream keys must be non-negative, got {seed=} and {keys=}.")
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def iter_rng_streams(seed: int, prefix: Sequence[int], count: int) -> Iterator[np.random.Generator]:
    """Generators for streams (seed, *prefix, 1), ..., (seed, *prefix, count)."""
    for m in range(count):
        yield rng_stream(seed, *prefix, m + 1)
