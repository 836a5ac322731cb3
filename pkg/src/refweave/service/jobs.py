"""Discovery jobs: queueing, state machine, journaling, recovery.

One manuscript runs one job at a time; jobs for different manuscripts run
concurrently.  Every state change is journaled, so a restart reconstructs
the table and fails whatever was in flight.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any, Callable

from .journal import Journal
from .pipeline import PipelineOutcome

QUEUED = "queued"
ROUTING = "routing"
SEARCHING = "searching"
VERIFYING = "verifying"
MATCHING = "matching"
DONE = "done"
FAILED = "failed"

RUNNING_STATES = (ROUTING, SEARCHING, VERIFYING, MATCHING)
TERMINAL_STATES = (DONE, FAILED)

_ORDER = (QUEUED, *RUNNING_STATES, DONE)

# Hard errors surface with their type name so clients can distinguish an
# unreachable provider from a policy denial without parsing prose.


@dataclass
class DiscoveryJob:
    job_id: str
    manuscript_id: str
    start_offset: int
    end_offset: int
    selection_text: str
    revision: int
    state: str = QUEUED
    error: str | None = None
    error_kind: str | None = None
    outcome: PipelineOutcome | None = None
    timings: dict[str, float] = field(default_factory=dict)
    events: list[dict[str, Any]] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)


def valid_transition(current: str, new: str) -> bool:
    if new == FAILED:
        return current not in TERMINAL_STATES
    if current in TERMINAL_STATES:
        return False
    try:
        return _ORDER.index(new) == _ORDER.index(current) + 1
    except ValueError:
        return False


class JobManager:
    def __init__(self, journal: Journal, clock: Callable[[], float] = time.monotonic):
        self.journal = journal
        self.clock = clock
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._jobs: dict[str, DiscoveryJob] = {}
        # Per-manuscript FIFO of (job id, its run callable) plus the set of
        # manuscripts whose worker thread is currently alive.
        self._queues: dict[str, list[tuple[str, Callable]]] = {}
        self._active: set[str] = set()
        self._threads: list[threading.Thread] = []

    # -- journal plumbing ---------------------------------------------------

    def _journal_state(self, job: DiscoveryJob) -> None:
        self.journal.append(
            "job_state",
            {
                "job_id": job.job_id,
                "manuscript_id": job.manuscript_id,
                "state": job.state,
                "error": job.error,
                "start_offset": job.start_offset,
                "end_offset": job.end_offset,
                "revision": job.revision,
            },
        )

    def recover(self) -> None:
        """Rebuild the table from the journal; in-flight work is failed."""
        states: dict[str, DiscoveryJob] = {}
        for entry in self.journal.entries():
            if entry.get("kind") != "job_state":
                continue
            payload = entry["payload"]
            job_id = payload["job_id"]
            job = states.get(job_id)
            if job is None:
                job = DiscoveryJob(
                    job_id=job_id,
                    manuscript_id=payload.get("manuscript_id", ""),
                    start_offset=payload.get("start_offset", 0),
                    end_offset=payload.get("end_offset", 0),
                    selection_text="",
                    revision=payload.get("revision", 0),
                )
                states[job_id] = job
            job.state = payload["state"]
            job.error = payload.get("error")
        interrupted = []
        for job in states.values():
            if job.state not in TERMINAL_STATES:
                job.state = FAILED
                job.error = "interrupted by service restart"
                job.error_kind = "Interrupted"
                interrupted.append(job)
            job.events.append({"state": job.state, "ts": self.clock()})
        with self._lock:
            self._jobs.update(states)
        for job in interrupted:
            self._journal_state(job)

    def compact_journal(self) -> None:
        with self._lock:
            snapshot = [
                (
                    "job_state",
                    {
                        "job_id": job.job_id,
                        "manuscript_id": job.manuscript_id,
                        "state": job.state,
                        "error": job.error,
                        "start_offset": job.start_offset,
                        "end_offset": job.end_offset,
                        "revision": job.revision,
                    },
                )
                for job in self._jobs.values()
            ]
        self.journal.compact(snapshot)

    # -- state machine ------------------------------------------------------

    def _set_state(self, job: DiscoveryJob, new_state: str, error: str | None = None,
                   error_kind: str | None = None) -> None:
        with self._cond:
            if not valid_transition(job.state, new_state):
                raise ValueError(f"illegal transition {job.state} -> {new_state}")
            now = self.clock()
            if job.state in RUNNING_STATES:
                started = job.timings.get(f"_start_{job.state}")
                if started is not None:
                    job.timings[job.state] = now - started
                    del job.timings[f"_start_{job.state}"]
            if new_state in RUNNING_STATES:
                job.timings[f"_start_{new_state}"] = now
            job.state = new_state
            job.error = error
            job.error_kind = error_kind
            job.events.append({"state": new_state, "ts": now, "error": error})
            self._cond.notify_all()
        self._journal_state(job)

    # -- submission and execution -------------------------------------------

    def submit(
        self,
        manuscript_id: str,
        *,
        start_offset: int,
        end_offset: int,
        selection_text: str,
        revision: int,
        run: Callable[[DiscoveryJob, Callable[[str], None]], PipelineOutcome],
    ) -> str:
        job = DiscoveryJob(
            job_id=uuid.uuid4().hex[:12],
            manuscript_id=manuscript_id,
            start_offset=start_offset,
            end_offset=end_offset,
            selection_text=selection_text,
            revision=revision,
        )
        job.events.append({"state": QUEUED, "ts": self.clock()})
        with self._lock:
            self._jobs[job.job_id] = job
            self._queues.setdefault(manuscript_id, []).append((job.job_id, run))
            starts_worker = manuscript_id not in self._active
            if starts_worker:
                self._active.add(manuscript_id)
        self._journal_state(job)
        if starts_worker:
            thread = threading.Thread(target=self._drain, args=(manuscript_id,), daemon=True)
            self._threads.append(thread)
            thread.start()
        return job.job_id

    def _drain(self, manuscript_id: str) -> None:
        while True:
            with self._lock:
                queue = self._queues.get(manuscript_id, [])
                if not queue:
                    self._active.discard(manuscript_id)
                    self._queues.pop(manuscript_id, None)
                    return
                job_id, run = queue.pop(0)
                job = self._jobs[job_id]
            self._execute(job, run)

    def _execute(self, job: DiscoveryJob, run) -> None:
        stage_map = {
            "routing": ROUTING,
            "searching": SEARCHING,
            "verifying": VERIFYING,
            "matching": MATCHING,
        }

        def observer(stage: str) -> None:
            self._set_state(job, stage_map[stage])

        try:
            outcome = run(job, observer)
        except Exception as exc:  # noqa: BLE001 - jobs absorb their failures
            self._set_state(job, FAILED, error=str(exc), error_kind=type(exc).__name__)
            return
        job.outcome = outcome
        self._set_state(job, DONE)

    # -- queries --------------------------------------------------------------

    def get(self, job_id: str) -> DiscoveryJob | None:
        with self._lock:
            return self._jobs.get(job_id)

    def wait(self, job_id: str, timeout: float = 30.0) -> DiscoveryJob:
        deadline = time.monotonic() + timeout
        with self._cond:
            while True:
                job = self._jobs[job_id]
                if job.state in TERMINAL_STATES:
                    return job
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise TimeoutError(f"job {job_id} still {job.state}")
                self._cond.wait(remaining)

    def events_since(self, job_id: str, index: int) -> tuple[list[dict[str, Any]], bool]:
        """Events from position `index` on, plus whether the job is terminal."""
        with self._cond:
            job = self._jobs[job_id]
            events = list(job.events[index:])
            return events, job.state in TERMINAL_STATES

    def wait_for_event(self, job_id: str, index: int, timeout: float = 10.0) -> None:
        with self._cond:
            job = self._jobs[job_id]
            if len(job.events) > index or job.state in TERMINAL_STATES:
                return
            self._cond.wait(timeout)
