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

import concurrent.futures
import threading
import time

import pytest

from cpdetect.cli.util.async_worker_queue import AsyncWorkQueue


def add(x: int, y: int) -> int:
    return x + y


def fail(message: str):
    raise ValueError(message)


def sleep_then_return(duration: float, value: int) -> int:
    time.sleep(duration)
    return value


def test_submitted_task_returns_its_result():
    queue = AsyncWorkQueue(max_workers=2)
    assert queue.submit_task(add, 1, 2).result() == 3
    assert len(queue.get_completed_tasks()) == 1
    assert len(queue.get_pending_tasks()) == 0


def test_process_workers_return_results():
    with AsyncWorkQueue(max_workers=2, use_processes=True) as queue:
        queue.submit_task(add, 1, 2)
        queue.submit_task(add, 3, 4)
        assert queue.wait() == [3, 7]


def test_results_keep_submission_order():
    with AsyncWorkQueue(max_workers=3) as queue:
        queue.submit_task(sleep_then_return, 0.3, 1)
        queue.submit_task(sleep_then_return, 0.1, 2)
        queue.submit_task(sleep_then_return, 0.0, 3)
        assert queue.wait() == [1, 2, 3]


def test_iter_completed_yields_every_task():
    with AsyncWorkQueue(max_workers=4) as queue:
        for i in range(10):
            queue.submit_task(add, i, i)
        finished = list(queue.iter_completed())
    assert len(finished) == 10
    assert sorted(future.result() for future in finished) == [2 * i for i in range(10)]


def test_wait_raises_the_first_failure():
    queue = AsyncWorkQueue(max_workers=2)
    queue.submit_task(add, 1, 2)
    queue.submit_task(fail, "first")
    queue.submit_task(fail, "second")
    with pytest.raises(ValueError, match="first"):
        queue.wait()


def test_shutdown_stops_new_tasks():
    queue = AsyncWorkQueue(max_workers=2)
    queue.submit_task(add, 1, 2)
    queue.shutdown()
    with pytest.raises(RuntimeError, match=r"cannot schedule new futures after shutdown"):
        queue.submit_task(add, 3, 4)


def test_failed_block_cancels_pending_tasks():
    release = threading.Event()
    with pytest.raises(KeyError):
        with AsyncWorkQueue(max_workers=1) as queue:
            queue.submit_task(release.wait, 5)
            pending = queue.submit_task(add, 1, 1)
            raise KeyError("stop")
    release.set()
    assert pending.cancelled()


def test_at_least_one_worker():
    with pytest.raises(ValueError, match="at least one worker"):
        AsyncWorkQueue(max_workers=0)


def test_completed_and_pending_partition_the_tasks():
    release = threading.Event()
    with AsyncWorkQueue(max_workers=1) as queue:
        queue.submit_task(add, 1, 1).result()
        queue.submit_task(release.wait, 5)
        assert len(queue.get_completed_tasks()) == 1
        assert len(queue.get_pending_tasks()) == 1
        release.set()
    assert all(isinstance(task, concurrent.futures.Future) for task in queue.tasks)
    assert len(queue.get_completed_tasks()) == 2
