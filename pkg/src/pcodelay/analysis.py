"""Analysis of simulated trajectories: synchrony, clusters, audits, maps.

Complete synchronization is more than equal phases: the network state
includes the pulses in flight, so two oscillators with matching phases but
different pending pulses will be driven apart when those pulses land.  The
detector here therefore compares phases AND per-source pending-pulse
multisets; `matched_phase_pair` constructs the two-oscillator configuration
that makes the distinction visible (equal phases for a whole delay-length
window, yet never synchronized).

For a network split into two internally synchronized cliques, one full
firing cycle reduces to a one-dimensional return map on the phase gap
(`two_clique_map`), with clique sizes swapping whenever the gap reaches the
delay.  `two_clique_oracle_step` recomputes one cycle with the full event
engine and is the ground truth the closed form is tested against.
"""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .curves import CouplingParams, CurveSpec, f_eval, f_inv, jump, validate_assumptions
from .engine import ModelParams, NetworkState, PendingSpike, StepReport

__all__ = [
    "StructuralError",
    "InfeasibleScenarioError",
    "SyncVerdict",
    "ClusterPartition",
    "StroboscopicFrame",
    "AuditReport",
    "TwoCliqueState",
    "DesyncSummary",
    "phase_spread",
    "is_completely_synchronized",
    "cluster_partition",
    "stroboscopic_run",
    "audit_run",
    "small_gap_branch",
    "large_gap_branch",
    "two_clique_map",
    "two_clique_oracle_step",
    "iterate_return_map",
    "matched_phase_pair",
    "desync_trial",
    "stable_cluster_count",
]


class StructuralError(RuntimeError):
    """A trajectory broke an assumption the caller declared structural."""


class InfeasibleScenarioError(ValueError):
    """Requested scenario cannot be built with the given parameters."""


# ----------------------------------------------------------------------
# synchrony


@dataclass(frozen=True)
class SyncVerdict:
    """Outcome of the complete-synchronization test at one instant."""

    synchronized: bool
    phase_spread: float
    pipeline_mismatch: bool


def phase_spread(state: NetworkState) -> float:
    """Largest minus smallest phase."""
    ph = state.phases
    return float(ph.max() - ph.min())


def _per_source_counts(state: NetworkState) -> np.ndarray:
    _, srcs = state._pipeline_arrays()
    return np.bincount(srcs, minlength=state.n)


def is_completely_synchronized(
    state: NetworkState,
    tol_phase: float | None = None,
    tol_time: float | None = None,
) -> SyncVerdict:
    """Test for complete synchronization at the current instant.

    Synchronized means every phase agrees within tol_phase AND every
    oscillator sources the same multiset of pending arrival times within
    tol_time.  The second condition is equivalent to every oscillator
    *receiving* the same pending multiset, since each pulse reaches everyone
    but its own source; it is what makes equal-phase states with asymmetric
    traffic (see matched_phase_pair) correctly test as unsynchronized.
    """
    if tol_phase is None:
        tol_phase = state.params.tol_phase
    if tol_time is None:
        tol_time = state.params.tol_time
    spread = phase_spread(state)
    phases_equal = spread <= tol_phase

    times, srcs = state._pipeline_arrays()
    if times.shape[0] == 0:
        mismatch = False
    else:
        counts = np.bincount(srcs, minlength=state.n)
        if counts.min() != counts.max():
            mismatch = True
        else:
            per = int(counts[0])
            order = np.lexsort((times, srcs))
            mat = times[order].reshape(state.n, per)
            col_spread = mat.max(axis=0) - mat.min(axis=0)
            mismatch = bool((col_spread > tol_time).any())
    return SyncVerdict(
        synchronized=phases_equal and not mismatch,
        phase_spread=spread,
        pipeline_mismatch=mismatch,
    )


# ----------------------------------------------------------------------
# clusters


@dataclass(frozen=True)
class ClusterPartition:
    """Finest grouping by equal phase and equal pending-pulse multiset.

    clusters are tuples of oscillator indices (ascending), ordered by each
    cluster's smallest member; representative_phases[i] is the phase of
    clusters[i]'s smallest member.  Equality within a cluster is chained:
    members are linked when adjacent (in sorted order) within tolerance.
    """

    clusters: tuple[tuple[int, ...], ...]
    representative_phases: tuple[float, ...]

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.clusters)


def cluster_partition(
    state: NetworkState,
    tol_phase: float | None = None,
    tol_time: float | None = None,
) -> ClusterPartition:
    """Partition oscillators into co-moving clusters.

    Two oscillators belong together only if their phases match within
    tol_phase and the arrival-time multisets of their own pending pulses
    match within tol_time.  Defaults are the tight engine tolerances;
    pass tol_phase=1e-6 for the loose grouping used when eyeballing plots.
    """
    if tol_phase is None:
        tol_phase = state.params.tol_phase
    if tol_time is None:
        tol_time = state.params.tol_time
    n = state.n
    phases = state.phases
    times, srcs = state._pipeline_arrays()
    signatures: list[list[float]] = [[] for _ in range(n)]
    for t, s in zip(times.tolist(), srcs.tolist()):
        signatures[int(s)].append(float(t))
    for sig in signatures:
        sig.sort()

    order = np.argsort(phases, kind="stable")
    phase_groups: list[list[int]] = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if float(phases[cur]) - float(phases[prev]) > tol_phase:
            phase_groups.append([])
        phase_groups[-1].append(int(cur))

    clusters: list[tuple[int, ...]] = []
    for group in phase_groups:
        by_len: dict[int, list[int]] = {}
        for i in group:
            by_len.setdefault(len(signatures[i]), []).append(i)
        for length, members in by_len.items():
            if length == 0:
                clusters.append(tuple(sorted(members)))
                continue
            members.sort(key=lambda i: signatures[i])
            current = [members[0]]
            for prev, cur in zip(members[:-1], members[1:]):
                linked = all(
                    abs(a - b) <= tol_time
                    for a, b in zip(signatures[prev], signatures[cur])
                )
                if linked:
                    current.append(cur)
                else:
                    clusters.append(tuple(sorted(current)))
                    current = [cur]
            clusters.append(tuple(sorted(current)))

    clusters.sort(key=lambda c: c[0])
    reps = tuple(float(phases[c[0]]) for c in clusters)
    return ClusterPartition(clusters=tuple(clusters), representative_phases=reps)


def stable_cluster_count(counts: Sequence[int], window: int = 50) -> int | None:
    """Cluster count if constant over the trailing window, else None."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if len(counts) < window:
        return None
    tail = counts[-window:]
    return tail[0] if all(c == tail[0] for c in tail) else None


# ----------------------------------------------------------------------
# stroboscopic sampling


@dataclass(frozen=True, eq=False)
class StroboscopicFrame:
    """Phases sampled at the k-th firing of the reference oscillator.

    phases holds the post-event values with every oscillator that fired in
    that event pinned at exactly 1.0 (its pre-reset value up to tol_phase),
    so phases[ref] == 1.0 in every frame and co-firing clusters appear as
    exactly equal entries.
    """

    k: int
    t: float
    phases: np.ndarray


def stroboscopic_run(
    state: NetworkState, ref: int = 0, frames: int = 1
) -> Iterator[StroboscopicFrame]:
    """Yield one frame per firing of oscillator ref, advancing the state.

    Lazy: the state moves as frames are consumed, so a caller can inspect
    the live state (clusters, synchrony) between frames.
    """
    if frames < 0:
        raise ValueError("frames must be >= 0")
    for k in range(1, frames + 1):
        reports = state.run_until_ref_fires(ref)
        last = reports[-1]
        snapshot = state.phases.copy()
        snapshot[list(last.fired)] = 1.0
        yield StroboscopicFrame(k=k, t=last.event_time, phases=snapshot)


# ----------------------------------------------------------------------
# audits


@dataclass(frozen=True)
class AuditReport:
    """Structural guarantees checked over a recorded run.

    gap_bound_ok: every oscillator's consecutive firings are separated by
        strictly more than twice the delay (min_interfire_gap is +inf when
        nothing fired twice).
    pending_ok: no oscillator ever had more than one pulse in flight, and
        none fired while its own pulse was still pending (including the
        boundary case of firing in the very event its pulse arrived).
    """

    min_interfire_gap: float
    gap_bound_ok: bool
    max_pending_per_source: int
    pending_ok: bool
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.gap_bound_ok and self.pending_ok


def audit_run(
    reports: Sequence[StepReport],
    fire_log: Sequence[Sequence[float]],
    params: ModelParams,
    initial_pipeline: Iterable[PendingSpike | tuple[float, int]] = (),
) -> AuditReport:
    """Replay a run's reports and check the delay-coupling guarantees.

    reports must be the complete event sequence from the state the audit
    describes; pass initial_pipeline when the run started with injected
    pulses.  fire_log may be ring-buffer truncated; gaps are then checked
    within the retained window.
    """
    tau = params.coupling.tau
    n = params.coupling.n
    pend = [0] * n
    for item in initial_pipeline:
        spike = PendingSpike(*item)
        pend[spike.source] += 1
    max_pend = max(pend) if pend else 0
    violations: list[str] = []

    for rep in reports:
        for s in rep.arrival_sources:
            pend[s] -= 1
            if pend[s] < 0:
                violations.append(
                    f"pulse from {s} consumed at t={rep.event_time} was never scheduled"
                )
                pend[s] = 0
        for i in rep.fired:
            if pend[i] > 0:
                violations.append(
                    f"oscillator {i} fired at t={rep.event_time} with its own pulse pending"
                )
            if i in rep.arrival_sources:
                violations.append(
                    f"oscillator {i} fired at t={rep.event_time} in the same event "
                    "its own pulse arrived"
                )
        for spike in rep.spikes_scheduled:
            pend[spike.source] += 1
            if pend[spike.source] > max_pend:
                max_pend = pend[spike.source]

    min_gap = float("inf")
    for times in fire_log:
        for a, b in zip(times, times[1:]):
            gap = b - a
            if gap < min_gap:
                min_gap = gap

    gap_ok = min_gap > 2.0 * tau
    pending_ok = max_pend <= 1 and not violations
    return AuditReport(
        min_interfire_gap=min_gap,
        gap_bound_ok=gap_ok,
        max_pending_per_source=max_pend,
        pending_ok=pending_ok,
        violations=tuple(violations),
    )


# ----------------------------------------------------------------------
# two-clique return map


@dataclass(frozen=True)
class TwoCliqueState:
    """Gap coordinates for a network of two internally synchronized cliques.

    q oscillators sit at phase 1 (about to fire), p at phase 1 - theta
    (firing second).  theta lives in [0, 1); theta == 0 is the fully merged
    network.
    """

    theta: float
    p: int
    q: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta < 1.0:
            raise ValueError(f"theta must lie in [0, 1), got {self.theta}")
        if self.p < 1 or self.q < 1:
            raise ValueError(f"clique sizes must be >= 1, got ({self.p}, {self.q})")


def small_gap_branch(
    curve: CurveSpec, coupling: CouplingParams, theta: float, p: int, q: int
) -> float:
    """New gap after one cycle when the gap is below the delay.

    Valid for 0 <= theta < tau (assuming the saturation check holds): both
    cliques fire before either volley lands, the volleys land in firing
    order, and the clique sizes keep their roles.
    """
    eps = coupling.epsilon
    tau = coupling.tau
    ahead = jump(curve, eps, jump(curve, eps, tau, q - 1) + theta, p)
    behind = jump(curve, eps, jump(curve, eps, tau - theta, q) + theta, p - 1)
    return ahead - behind


def large_gap_branch(
    curve: CurveSpec, coupling: CouplingParams, theta: float, q: int
) -> float:
    """New gap after one cycle when the gap is at least the delay.

    Valid for tau <= theta < 1: the leading clique's volley lands before the
    trailing clique fires, so the volley (size q) sets the new gap and the
    cliques swap roles.  The outer jump may cap at threshold; the trailing
    clique then fires the instant the volley arrives, which is exactly what
    the event engine produces.
    """
    eps = coupling.epsilon
    tau = coupling.tau
    return jump(curve, eps, 1.0 - theta + tau, q) - jump(curve, eps, tau, q - 1)


def two_clique_map(
    state: TwoCliqueState, curve: CurveSpec, coupling: CouplingParams
) -> TwoCliqueState:
    """One cycle of the two-clique gap dynamics in closed form.

    Requires the saturation check (validate_assumptions) to hold; the branch
    compositions are only meaningful below saturation.  theta == 0 is a
    fixed point (a merged network stays merged).  Gaps below the delay keep
    the clique sizes; gaps at or above it swap them.
    """
    if state.p + state.q != coupling.n:
        raise ValueError(
            f"clique sizes {state.p}+{state.q} != network size {coupling.n}"
        )
    if not validate_assumptions(curve, coupling).a2_holds:
        raise InfeasibleScenarioError(
            "saturation check fails; the closed-form cycle is not valid"
        )
    theta = state.theta
    if theta == 0.0:
        return TwoCliqueState(0.0, state.p, state.q)
    if theta < coupling.tau:
        new_theta = small_gap_branch(curve, coupling, theta, state.p, state.q)
        return TwoCliqueState(max(0.0, new_theta), state.p, state.q)
    new_theta = large_gap_branch(curve, coupling, theta, state.q)
    return TwoCliqueState(new_theta, state.q, state.p)


def iterate_return_map(
    initial: TwoCliqueState, steps: int, curve: CurveSpec, coupling: CouplingParams
) -> list[TwoCliqueState]:
    """Orbit [initial, map(initial), ...] with steps applications.

    initial.theta == 0 is allowed and produces the constant merged orbit.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    orbit = [initial]
    for _ in range(steps):
        orbit.append(two_clique_map(orbit[-1], curve, coupling))
    return orbit


def two_clique_oracle_step(state: TwoCliqueState, params: ModelParams) -> TwoCliqueState:
    """One two-clique cycle computed by the full event engine.

    Builds the network (oscillators [0, p) trailing, [p, n) at threshold),
    steps until exactly one complete clique fires with nothing in flight but
    that event's own pulses, and reads the new gap off the other clique's
    phases.  Raises StructuralError if a firing ever splits a clique or no
    such return happens within the event budget.
    """
    coupling = params.coupling
    n = coupling.n
    if state.p + state.q != n:
        raise ValueError(f"clique sizes {state.p}+{state.q} != network size {n}")
    if not 0.0 < state.theta < 1.0:
        raise ValueError(
            "oracle needs 0 < theta < 1; theta == 0 is the merged fixed point"
        )
    if not validate_assumptions(params.curve, coupling).a2_holds:
        raise InfeasibleScenarioError(
            "saturation check fails; two-clique cycling is not guaranteed"
        )
    behind = frozenset(range(state.p))
    ahead = frozenset(range(state.p, n))
    phases = [1.0 - state.theta] * state.p + [1.0] * state.q
    net = NetworkState(params, phases)

    for _ in range(4 * n + 64):
        rep = net.step()
        if not rep.fired:
            continue
        fired = frozenset(rep.fired)
        if fired != ahead and fired != behind:
            raise StructuralError(
                f"firing at t={rep.event_time} split the cliques: {sorted(fired)}"
            )
        if net.now <= 0.0:
            continue  # the opening volley, not a return
        _, srcs = net._pipeline_arrays()
        fresh_only = srcs.shape[0] == len(rep.fired) and all(
            int(s) in fired for s in srcs
        )
        if not fresh_only:
            continue
        others = sorted(behind if fired == ahead else ahead)
        other_phases = net.phases[others]
        if float(other_phases.max() - other_phases.min()) > 1e-9:
            raise StructuralError("waiting clique lost internal alignment")
        new_theta = 1.0 - float(other_phases.max())
        return TwoCliqueState(theta=new_theta, p=len(others), q=len(fired))
    raise StructuralError("no two-clique return within the event budget")


# ----------------------------------------------------------------------
# constructions and campaigns


def matched_phase_pair(params: ModelParams) -> tuple[NetworkState, float]:
    """Two-oscillator start with equal phases ahead but no synchronization.

    Oscillator 1 fires at t=0; oscillator 0 trails by phi chosen so that
    the arriving pulse lifts it exactly onto oscillator 1's phase at t=tau.
    The phases then agree for the whole window [tau, tau + phi) while a
    pulse is still in flight toward oscillator 1 only, so the synchrony
    verdict stays negative and the phases split again at tau + phi.

    Returns (state, phi).  Requires n == 2 and 0 < epsilon < f(tau).
    """
    coupling = params.coupling
    if coupling.n != 2:
        raise InfeasibleScenarioError(
            f"construction needs exactly 2 oscillators, got {coupling.n}"
        )
    f_tau = f_eval(params.curve, coupling.tau)
    if not 0.0 < coupling.epsilon < f_tau:
        raise InfeasibleScenarioError(
            f"pulse increment must lie in (0, f(tau)) = (0, {f_tau}) "
            f"for the matched-phase window to exist; got {coupling.epsilon}"
        )
    phi = coupling.tau - f_inv(params.curve, f_tau - coupling.epsilon)
    return NetworkState(params, [1.0 - phi, 1.0]), phi


@dataclass(frozen=True)
class DesyncSummary:
    """Aggregate outcome of repeated randomized runs."""

    trials: int
    sync_detected_count: int
    min_final_spread: float
    median_final_spread: float
    cluster_count_histogram: dict[int, int]


def desync_trial(
    params: ModelParams,
    init_sampler: Callable[[int], Sequence[float]],
    horizon: float,
    trials: int,
    cluster_tol: float | None = None,
) -> DesyncSummary:
    """Run `trials` independent simulations and test for synchronization.

    init_sampler(trial_index) supplies each trial's initial phases.  The
    synchrony verdict is evaluated at t=0 and after every event (it cannot
    appear between events: phases drift rigidly and nothing lands), and a
    synchronized network stays synchronized, so a trial stops early once
    detected.  Spreads and cluster counts are taken at the horizon.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    detected = 0
    spreads: list[float] = []
    histogram: Counter[int] = Counter()
    for index in range(trials):
        net = NetworkState(params, init_sampler(index), fire_log_limit=4)
        synced = is_completely_synchronized(net).synchronized
        while not synced and net.next_event_time() <= horizon:
            net.step()
            synced = is_completely_synchronized(net).synchronized
        if synced:
            detected += 1
        else:
            net.drift_to(horizon)
        spreads.append(phase_spread(net))
        histogram[cluster_partition(net, tol_phase=cluster_tol).n_clusters] += 1
    return DesyncSummary(
        trials=trials,
        sync_detected_count=detected,
        min_final_spread=min(spreads),
        median_final_spread=statistics.median(spreads),
        cluster_count_histogram=dict(histogram),
    )
