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
from typing import Any, Callable, Iterator, List, Sequence, Union


__all__: Sequence[str] = ("AsyncWorkQueue",)

Executor = Union[concurrent.futures.ThreadPoolExecutor, concurrent.futures.ProcessPoolExecutor]


class AsyncWorkQueue:
    """A pool of workers whose results come back in submission order.

    Monte Carlo repetitions are independent tasks that each own their random stream, so the order in which they
    finish never changes the collected results.
    """

    def __init__(self, max_workers: int = 1, use_processes: bool = False) -> None:
        """Start the pool.

        Args:
            max_workers: number of worker threads or processes.
            use_processes: use a ProcessPoolExecutor; tasks and their arguments must then be picklable.
        """
        if max_workers < 1:
            raise ValueError(f"Need at least one worker, got {max_workers=}.")
        self.use_processes = use_processes
        self.executor: Executor = (
            concurrent.futures.ProcessPoolExecutor(max_workers=max_workers)
            if use_processes
            else concurrent.futures.ThreadPoolExecutor(max_workers=max_workers)
        )
        self.lock = threading.Lock()
        self.tasks: List[concurrent.futures.Future] = []

    def __enter__(self) -> "AsyncWorkQueue":  # noqa: D105
        return self

    def __exit__(self, exc_type, exc, tb) -> None:  # noqa: D105
        # pending tasks are dropped when the block failed
        self.shutdown(wait=exc_type is None, cancel_pending=exc_type is not None)

    def submit_task(self, func: Callable[..., Any], *args: Any, **kwargs: Any) -> concurrent.futures.Future:
        """Schedule ``func(*args, **kwargs)``; its result takes the next position in wait()."""
        with self.lock:
            future = self.executor.submit(func, *args, **kwargs)
            self.tasks.append(future)
            return future

    def shutdown(self, wait: bool = True, cancel_pending: bool = False) -> None:
        """Stop accepting tasks, optionally cancelling the ones that have not started."""
        self.executor.shutdown(wait=wait, cancel_futures=cancel_pending)

    def get_completed_tasks(self) -> List[concurrent.futures.Future]:
        """Tasks that have finished, successfully or not."""
        with self.lock:
            return [task for task in self.tasks if task.done()]

    def get_pending_tasks(self) -> List[concurrent.futures.Future]:
        """Tasks that are queued or running."""
        with self.lock:
            return [task for task in self.tasks if not task.done()]

    def iter_completed(self) -> Iterator[concurrent.futures.Future]:
        """Yield the submitted tasks as they finish, e.g. to advance a progress bar."""
        with self.lock:
            tasks = list(self.tasks)
        yield from concurrent.futures.as_completed(tasks)

    def wait(self) -> List[Any]:
        """Wait for every task and return the results in submission order.

        Raises:
            Exception: the exception of the first failed task, in submission order.
        """
        with self.lock:
            tasks = list(self.tasks)
        concurrent.futures.wait(tasks)
        return [task.result() for task in tasks]
