"""Deterministic event-driven simulator for delay-coupled pulse oscillators.

The network is all-to-all: n oscillators with phase in (0, 1] rising at unit
rate and state x = f(phase) given by a curves.CurveSpec.  An oscillator
reaching phase 1 fires: its phase resets to exactly 0.0 and one pulse is
delivered to every other oscillator after a fixed delay tau.  A pulse
arriving when the receiver sits at phase theta advances it to
jump(theta, 1); pulses arriving together combine their increments before
the inversion, and a receiver pushed to threshold fires in the same event.
An oscillator never receives its own pulse, so when m oscillators fire
together each firer later absorbs m - 1 pulses and every bystander m.

Execution is event-driven.  The only events are pulse arrivals and threshold
crossings; they are processed in time order, with events closer than
tol_time merged into one instant.  Times are absolute float64, and arrivals
are scheduled at exactly fire_time + tau, so the delayed copies of one
firing share one bit pattern.  Runs are deterministic: identical params,
initial phases and injected pulses give bit-identical trajectories, which
the command-line layer turns into byte-identical output files.

The per-event work lives in a kernel selected at import time (_kernel):
a compiled extension when available, a numpy fallback otherwise.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernel
from .curves import CouplingParams, CurveSpec

__all__ = ["ModelParams", "PendingSpike", "StepReport", "NetworkState"]


@dataclass(frozen=True)
class ModelParams:
    """Everything that defines one network: curve, coupling, tolerances.

    tol_time groups events into one instant and must stay well under the
    delay (enforced: < tau / 100) so grouped arrivals can never straddle a
    delay period.  tol_phase is the firing-detection band below 1; phases
    are compared against 1 - tol_phase, never against 1 exactly.
    """

    curve: CurveSpec
    coupling: CouplingParams
    tol_time: float = 1e-9
    tol_phase: float = 1e-12

    def __post_init__(self) -> None:
        if not (0.0 < self.tol_time < self.coupling.tau / 100.0):
            raise ValueError(
                f"tol_time must lie in (0, tau/100) = (0, {self.coupling.tau / 100.0}), "
                f"got {self.tol_time}"
            )
        if not (0.0 <= self.tol_phase < 1e-3):
            raise ValueError(f"tol_phase must lie in [0, 1e-3), got {self.tol_phase}")


class PendingSpike(NamedTuple):
    """One pulse in flight; delivered to every oscillator except its source."""

    arrival_time: float
    source: int


@dataclass(frozen=True)
class StepReport:
    """What one event did.

    arrival_sources lists the source of every pulse consumed at this event
    (duplicates possible only if duplicates were injected); fired lists the
    oscillators that reached threshold, in index order; spikes_scheduled are
    their outgoing pulses, due at exactly event_time + tau.
    """

    event_time: float
    arrival_sources: tuple[int, ...]
    fired: tuple[int, ...]
    spikes_scheduled: tuple[PendingSpike, ...]
    n_oscillators: int

    def arrivals_per_receiver(self) -> dict[int, int]:
        """Pulse count per receiving oscillator, omitting zero counts."""
        k = len(self.arrival_sources)
        if k == 0:
            return {}
        own = Counter(self.arrival_sources)
        return {
            j: k - own.get(j, 0)
            for j in range(self.n_oscillators)
            if k - own.get(j, 0) > 0
        }


class NetworkState:
    """Mutable simulation state: clock, phases, pending pulses, firing log.

    Construct with phases in (0, 1]; exactly 1.0 is legal and fires at t=0,
    exactly 0 is not (a freshly reset oscillator implies a pulse already in
    flight, which a fresh state does not have; use inject_pending to build
    such configurations).

    Args:
        params: model definition.
        initial_phases: length-n sequence, each in (0, 1].
        fire_log_limit: when given, keep only the most recent limit firing
            times per oscillator (bounded memory for long runs); default
            keeps everything.
    """

    def __init__(
        self,
        params: ModelParams,
        initial_phases: Sequence[float],
        fire_log_limit: int | None = None,
    ) -> None:
        n = params.coupling.n
        phases = np.array(initial_phases, dtype=np.float64).reshape(-1)
        if phases.shape[0] != n:
            raise ValueError(
                f"expected {n} initial phases, got {phases.shape[0]}"
            )
        if not np.all(np.isfinite(phases)):
            raise ValueError("initial phases must be finite")
        if phases.min() <= 0.0 or phases.max() > 1.0:
            raise ValueError(
                "initial phases must lie in (0, 1]; 0 is reserved for "
                "oscillators that just fired (see inject_pending)"
            )
        self.params = params
        self._now = 0.0
        self._phases = phases
        cap = max(2 * n + 16, 64)
        self._pipe_t = np.empty(cap, dtype=np.float64)
        self._pipe_src = np.empty(cap, dtype=np.int64)
        self._head = 0
        self._tail = 0
        self._scratch = np.zeros(n, dtype=np.int64)
        self._big_i = params.curve.i
        self._log_ratio = math.log1p(-1.0 / self._big_i)
        self._fire_log_limit = fire_log_limit
        if fire_log_limit is None:
            self._fire_log: list = [[] for _ in range(n)]
        else:
            self._fire_log = [deque(maxlen=fire_log_limit) for _ in range(n)]

    # ------------------------------------------------------------------
    # views

    @property
    def n(self) -> int:
        return self.params.coupling.n

    @property
    def now(self) -> float:
        return self._now

    @property
    def phases(self) -> np.ndarray:
        """Read-only view of the current phases."""
        view = self._phases.view()
        view.flags.writeable = False
        return view

    @property
    def pipeline(self) -> tuple[PendingSpike, ...]:
        """Pending pulses in arrival order."""
        return tuple(
            PendingSpike(float(self._pipe_t[i]), int(self._pipe_src[i]))
            for i in range(self._head, self._tail)
        )

    @property
    def fire_log(self) -> tuple[tuple[float, ...], ...]:
        """Per-oscillator firing times (possibly truncated to the last K)."""
        return tuple(tuple(times) for times in self._fire_log)

    def _pipeline_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        # Zero-copy pending view for the analysis layer: (times, sources).
        return (
            self._pipe_t[self._head:self._tail],
            self._pipe_src[self._head:self._tail],
        )

    def __repr__(self) -> str:
        return (
            f"NetworkState(n={self.n}, now={self._now!r}, "
            f"pending={self._tail - self._head})"
        )

    def copy(self) -> "NetworkState":
        """Independent deep copy; stepping one state never affects the other."""
        dup = object.__new__(NetworkState)
        dup.params = self.params
        dup._now = self._now
        dup._phases = self._phases.copy()
        dup._pipe_t = self._pipe_t.copy()
        dup._pipe_src = self._pipe_src.copy()
        dup._head = self._head
        dup._tail = self._tail
        dup._scratch = self._scratch.copy()
        dup._big_i = self._big_i
        dup._log_ratio = self._log_ratio
        dup._fire_log_limit = self._fire_log_limit
        if self._fire_log_limit is None:
            dup._fire_log = [list(times) for times in self._fire_log]
        else:
            dup._fire_log = [
                deque(times, maxlen=self._fire_log_limit) for times in self._fire_log
            ]
        return dup

    # ------------------------------------------------------------------
    # stepping

    def next_event_time(self) -> float:
        """Time of the next pulse arrival or threshold crossing."""
        t = self._now + (1.0 - float(self._phases.max()))
        if self._head < self._tail:
            t = min(t, float(self._pipe_t[self._head]))
        return t

    def step(self) -> StepReport:
        """Advance to the next event and process it."""
        self._ensure_capacity()
        head0 = self._head
        coupling = self.params.coupling
        t_event, new_head, new_tail, fired = _kernel.step_once(
            self._phases, self._pipe_t, self._pipe_src, self._scratch,
            self._head, self._tail, self._now,
            self._big_i, self._log_ratio,
            coupling.epsilon, coupling.tau,
            self.params.tol_time, self.params.tol_phase,
        )
        arrival_sources = tuple(int(s) for s in self._pipe_src[head0:new_head])
        fired_ix = tuple(int(i) for i in fired)
        self._head = new_head
        self._tail = new_tail
        self._now = t_event
        scheduled = tuple(
            PendingSpike(t_event + coupling.tau, i) for i in fired_ix
        )
        for i in fired_ix:
            self._fire_log[i].append(t_event)
        return StepReport(
            event_time=t_event,
            arrival_sources=arrival_sources,
            fired=fired_ix,
            spikes_scheduled=scheduled,
            n_oscillators=self.n,
        )

    def drift_to(self, t: float) -> None:
        """Advance the clock to t with no intervening event.

        Raises if an event falls in (now, t); callers step() past events
        first.  Drifting exactly onto an event time is allowed; the event
        then runs with zero drift on the next step().
        """
        if t < self._now:
            raise ValueError(f"cannot drift backwards: now={self._now}, t={t}")
        if t > self.next_event_time():
            raise ValueError(
                f"an event occurs at {self.next_event_time()} before t={t}; "
                "step() past it first"
            )
        dt = t - self._now
        if dt > 0.0:
            self._phases += dt
            np.minimum(self._phases, 1.0, out=self._phases)
            self._now = t

    def run_until_time(self, horizon: float) -> list[StepReport]:
        """Process every event with time <= horizon, then drift to horizon."""
        if horizon < self._now:
            raise ValueError(f"horizon {horizon} precedes current time {self._now}")
        reports: list[StepReport] = []
        while self.next_event_time() <= horizon:
            reports.append(self.step())
        self.drift_to(horizon)
        return reports

    def run_until_ref_fires(self, ref: int) -> list[StepReport]:
        """Step until oscillator ref fires; the last report contains it.

        Always terminates: excitatory coupling only shortens the wait, so
        ref fires within one unit of time.
        """
        if not 0 <= ref < self.n:
            raise ValueError(f"ref must be in [0, {self.n}), got {ref}")
        reports: list[StepReport] = []
        while True:
            report = self.step()
            reports.append(report)
            if ref in report.fired:
                return reports

    # ------------------------------------------------------------------
    # pipeline editing

    def inject_pending(
        self,
        spikes: Iterable[PendingSpike | tuple[float, int]],
        enforce_phase_offset: bool = False,
    ) -> None:
        """Load pulses already in flight (start a run mid-history).

        Every arrival time must lie in (now, now + tau]: a pulse cannot be
        older than one full delay.  With enforce_phase_offset=True each
        source must additionally sit at the phase an actual firing history
        would imply, tau minus the remaining flight time (within tol_phase);
        that is the configuration reachable from a real past, assuming the
        source absorbed nothing since it fired.
        """
        tau = self.params.coupling.tau
        incoming = []
        for item in spikes:
            spike = PendingSpike(*item)
            if not 0 <= spike.source < self.n:
                raise ValueError(f"source {spike.source} out of range")
            if not self._now < spike.arrival_time <= self._now + tau:
                raise ValueError(
                    f"arrival {spike.arrival_time} outside "
                    f"({self._now}, {self._now + tau}]"
                )
            if enforce_phase_offset:
                remaining = spike.arrival_time - self._now
                implied = tau - remaining
                actual = float(self._phases[spike.source])
                if abs(actual - implied) > self.params.tol_phase:
                    raise ValueError(
                        f"source {spike.source} at phase {actual}, but a pulse "
                        f"arriving in {remaining} implies phase {implied}"
                    )
            incoming.append(spike)
        if not incoming:
            return
        live = [
            PendingSpike(float(self._pipe_t[i]), int(self._pipe_src[i]))
            for i in range(self._head, self._tail)
        ]
        merged = sorted(live + incoming)
        need = len(merged)
        if need > self._pipe_t.shape[0]:
            cap = max(2 * self._pipe_t.shape[0], need + 2 * self.n)
            self._pipe_t = np.empty(cap, dtype=np.float64)
            self._pipe_src = np.empty(cap, dtype=np.int64)
        self._pipe_t[:need] = [s.arrival_time for s in merged]
        self._pipe_src[:need] = [s.source for s in merged]
        self._head = 0
        self._tail = need

    def _ensure_capacity(self) -> None:
        # The kernel may append up to n entries; compact or grow beforehand.
        cap = self._pipe_t.shape[0]
        n = self.n
        if self._tail + n <= cap:
            return
        live = self._tail - self._head
        if live + n <= cap:
            self._pipe_t[:live] = self._pipe_t[self._head:self._tail].copy()
            self._pipe_src[:live] = self._pipe_src[self._head:self._tail].copy()
        else:
            new_cap = max(2 * cap, live + n + 16)
            new_t = np.empty(new_cap, dtype=np.float64)
            new_src = np.empty(new_cap, dtype=np.int64)
            new_t[:live] = self._pipe_t[self._head:self._tail]
            new_src[:live] = self._pipe_src[self._head:self._tail]
            self._pipe_t = new_t
            self._pipe_src = new_src
        self._head = 0
        self._tail = live
