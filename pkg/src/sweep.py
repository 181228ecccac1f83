import logging
import queue
import threading
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


class SweepTask:

    def __init__(self, key: str, work: Callable[[Optional[Path]], Any], directory: Optional[Path] = None):
        self.key = key
        self.work = work
        self.directory = directory

    def __repr__(self) -> str:
        return f"SweepTask({self.key}, directory={self.directory})"


class SweepManager:
    """Runs independent tasks on a pool of worker threads.

    Every task gets its own run directory and shares nothing mutable with the
    others; results come back in the order the tasks were added.
    """

    def __init__(self, max_workers: int = 4):
        if max_workers < 1:
            raise ValueError(f"Need at least one worker, got {max_workers}")
        self.max_workers = max_workers

        self._tasks: List[SweepTask] = []
        self._results: Dict[str, Any] = {}
        self._errors: Dict[str, Exception] = {}
        self._lock = threading.Lock()

        self._on_result: Optional[Callable[[str, Any], None]] = None
        self._on_error: Optional[Callable[[str, Exception], None]] = None

    @property
    def errors(self) -> Dict[str, Exception]:
        return dict(self._errors)

    def set_result_callback(self, callback: Callable[[str, Any], None]) -> None:
        self._on_result = callback

    def set_error_callback(self, callback: Callable[[str, Exception], None]) -> None:
        self._on_error = callback

    def add_task(self, key: str, work: Callable[[Optional[Path]], Any], directory: Optional[Path] = None) -> None:
        if any(task.key == key for task in self._tasks):
            raise ValueError(f"Duplicate sweep task: {key}")
        self._tasks.append(SweepTask(key, work, directory))

    def run(self) -> Dict[str, Any]:
        pending: 'queue.Queue[SweepTask]' = queue.Queue()
        for task in self._tasks:
            pending.put(task)

        workers = []
        for index in range(min(self.max_workers, len(self._tasks))):
            worker = threading.Thread(
                target=self._worker_loop,
                args=(pending,),
                name=f"sweep-{index}",
                daemon=True
            )
            worker.start()
            workers.append(worker)

        for worker in workers:
            worker.join()

        logger.info(f"Sweep finished: {len(self._results)} done, {len(self._errors)} failed")
        return {task.key: self._results[task.key] for task in self._tasks if task.key in self._results}

    def _worker_loop(self, pending: 'queue.Queue[SweepTask]') -> None:
        while True:
            try:
                task = pending.get_nowait()
            except queue.Empty:
                return
            self._execute(task)

    def _execute(self, task: SweepTask) -> None:
        logger.debug(f"Starting {task.key} on {threading.current_thread().name}")
        try:
            if task.directory is not None:
                task.directory.mkdir(parents=True, exist_ok=True)
            result = task.work(task.directory)
        except Exception as e:
            logger.error(f"Sweep task {task.key} failed: {e}")
            with self._lock:
                self._errors[task.key] = e
            if self._on_error:
                self._on_error(task.key, e)
            return

        with self._lock:
            self._results[task.key] = result
        if self._on_result:
            self._on_result(task.key, result)
