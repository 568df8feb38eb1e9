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

import logging
from typing import Sequence

import click

from cpdetect.cli import detect, simulate


__all__: Sequence[str] = ("cli",)

LOG_FORMAT = "%(asctime)s %(levelname)s [%(filename)s:%(lineno)d] - %(message)s"


@click.group(help="Change-point tests for the cross-sectional dependence of multivariate time series.")
@click.option("--verbose", "-v", is_flag=True, help="Log at DEBUG instead of INFO.")
def cli(verbose: bool) -> None:  # noqa: D103
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT)


cli.add_command(detect.entrypoint, name="test")
cli.add_command(simulate.entrypoint, name="simulate")


if __name__ == "__main__":
    cli()  # pragma: no cover
