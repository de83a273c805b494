"""In-process task queue: dedup by delivery id, per-term ordering, retries.

Webhook processing, dispatch sending, and notification delivery all run
through this contract.  Execution is at-least-once: failed handlers are
retried with exponential backoff (2s base, factor 4) up to 5 attempts,
then parked as dead.  Tasks that share a term run one at a time, in
enqueue order; a 60s visibility lease reclaims tasks whose worker died.
"""

from __future__ import annotations

import itertools
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

BACKOFF_BASE = 2.0
BACKOFF_FACTOR = 4.0
MAX_ATTEMPTS = 5
LEASE_SECONDS = 60.0

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
DEAD = "dead"


class ManualClock:
    """Deterministic clock for tests; run_until_idle can jump it forward."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def advance_to(self, t: float) -> None:
        self._now = max(self._now, t)


class WallClock:
    def now(self) -> float:
        return time.monotonic()


@dataclass
class Task:
    task_id: int
    kind: str
    payload: dict
    dedup_key: str
    term: str | None = None
    attempts: int = 0
    state: str = QUEUED
    not_before: float = 0.0
    lease_expires: float | None = None
    last_error: str | None = None


class TaskQueue:
    def __init__(self, clock=None):
        self.clock = clock or WallClock()
        self._tasks: list[Task] = []
        self._handlers: dict[str, Callable[[dict], None]] = {}
        self._ids = itertools.count(1)
        self._lock = threading.RLock()

    def register(self, kind: str, handler: Callable[[dict], None]) -> None:
        self._handlers[kind] = handler

    def enqueue(self, kind: str, payload: dict, dedup_key: str, term: str | None = None) -> Task:
        with self._lock:
            for task in self._tasks:
                if task.dedup_key == dedup_key and task.state != DEAD:
                    return task
            task = Task(
                task_id=next(self._ids),
                kind=kind,
                payload=payload,
                dedup_key=dedup_key,
                term=term,
            )
            self._tasks.append(task)
            return task

    def tasks(self) -> list[Task]:
        with self._lock:
            return list(self._tasks)

    def _reclaim_expired(self, now: float) -> None:
        for task in self._tasks:
            if task.state == RUNNING and task.lease_expires is not None and task.lease_expires <= now:
                task.state = QUEUED
                task.lease_expires = None

    def _next_eligible(self, now: float) -> Task | None:
        self._reclaim_expired(now)
        terms_running = {t.term for t in self._tasks if t.state == RUNNING and t.term}
        terms_seen: set[str] = set()
        for task in self._tasks:
            if task.state != QUEUED:
                continue
            if task.term:
                if task.term in terms_running or task.term in terms_seen:
                    terms_seen.add(task.term)
                    continue
                terms_seen.add(task.term)
            if task.not_before > now:
                continue
            return task
        return None

    def process_next(self) -> Task | None:
        """Run one eligible task; returns it, or None when nothing is runnable."""
        with self._lock:
            now = self.clock.now()
            task = self._next_eligible(now)
            if task is None:
                return None
            task.state = RUNNING
            task.lease_expires = now + LEASE_SECONDS
            handler = self._handlers[task.kind]
        try:
            handler(task.payload)
        except Exception as exc:  # noqa: BLE001 - retries handle everything
            with self._lock:
                task.attempts += 1
                task.last_error = repr(exc)
                task.lease_expires = None
                if task.attempts >= MAX_ATTEMPTS:
                    task.state = DEAD
                else:
                    task.state = QUEUED
                    task.not_before = self.clock.now() + BACKOFF_BASE * (
                        BACKOFF_FACTOR ** (task.attempts - 1)
                    )
        else:
            with self._lock:
                task.attempts += 1
                task.state = DONE
                task.lease_expires = None
        return task

    def run_until_idle(self, max_steps: int = 10_000) -> int:
        """Drain the queue; with a ManualClock, backoff waits are skipped."""
        steps = 0
        for _ in range(max_steps):
            if self.process_next() is not None:
                steps += 1
                continue
            with self._lock:
                now = self.clock.now()
                waits = [
                    t.not_before
                    for t in self._tasks
                    if t.state == QUEUED and t.not_before > now
                ]
            if not waits or not isinstance(self.clock, ManualClock):
                break
            self.clock.advance_to(min(waits))
        return steps
