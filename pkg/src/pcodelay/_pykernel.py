"""Pure-Python (numpy) event-step kernel.

Fallback implementation of the hot loop; the compiled twin lives in
_speedups.pyx with the identical contract.  One call advances the network to
the next grouped event: drift every phase to the event instant, apply all
pulse arrivals within tol_time of it, detect threshold crossings, reset the
firers and append their delayed pulses to the queue.

The queue is a pair of parallel arrays (pipe_t, pipe_src) used as a FIFO
window [head, tail).  It stays time-sorted without explicit sorting: every
new arrival is scheduled at event_time + tau, which is no earlier than any
pending entry because pending arrivals all lie within tau of the current
time.  The caller guarantees capacity for n appends before each call.

Contract notes shared by both kernels:
  - phases are mutated in place and stay in [0, 1];
  - an oscillator never receives its own pulse (m_i = arrivals from others);
  - a receiver pushed to or past threshold is set to exactly 1.0 so the
    firing scan picks it up in the same event;
  - scratch is an all-zeros int64 work array of length n, returned all-zero
    (only the compiled kernel uses it; it is part of the shared signature).
"""

from __future__ import annotations

import numpy as np


def step_once(phases, pipe_t, pipe_src, scratch, head, tail, now,
              big_i, log_ratio, eps, tau, tol_time, tol_phase):
    """Advance to the next event; return (t_event, new_head, new_tail, fired)."""
    n = phases.shape[0]
    t_event = now + (1.0 - float(phases.max()))
    if head < tail and pipe_t[head] < t_event:
        t_event = float(pipe_t[head])
    dt = t_event - now
    if dt < 0.0:
        raise RuntimeError("event time moved backwards; queue state is corrupt")
    if dt > 0.0:
        phases += dt
        np.minimum(phases, 1.0, out=phases)

    limit = t_event + tol_time
    new_head = head
    while new_head < tail and pipe_t[new_head] <= limit:
        new_head += 1
    k = new_head - head
    if k > 0:
        own = np.bincount(pipe_src[head:new_head], minlength=n)
        m = k - own
        y = big_i * -np.expm1(log_ratio * phases) + m * eps
        saturated = y >= 1.0
        np.minimum(y, 1.0, out=y)
        jumped = np.where(saturated, 1.0, np.log1p(-y / big_i) / log_ratio)
        np.copyto(phases, jumped, where=m > 0)

    fired = np.nonzero(phases >= 1.0 - tol_phase)[0]
    nf = fired.shape[0]
    if nf > 0:
        phases[fired] = 0.0
        pipe_t[tail:tail + nf] = t_event + tau
        pipe_src[tail:tail + nf] = fired
        tail += nf
    return t_event, new_head, tail, fired
