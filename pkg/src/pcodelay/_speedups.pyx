# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event-step kernel; contract documented in _pykernel.py."""

from libc.math cimport expm1, log1p
from libc.stdint cimport int64_t


def step_once(double[::1] phases, double[::1] pipe_t, int64_t[::1] pipe_src,
              int64_t[::1] scratch, Py_ssize_t head, Py_ssize_t tail,
              double now, double big_i, double log_ratio, double eps,
              double tau, double tol_time, double tol_phase):
    """Advance to the next event; return (t_event, new_head, new_tail, fired)."""
    cdef Py_ssize_t n = phases.shape[0]
    cdef Py_ssize_t i, j, new_head, k, nf
    cdef double pmax = phases[0]
    for i in range(1, n):
        if phases[i] > pmax:
            pmax = phases[i]
    cdef double t_event = now + (1.0 - pmax)
    if head < tail and pipe_t[head] < t_event:
        t_event = pipe_t[head]
    cdef double dt = t_event - now
    if dt < 0.0:
        raise RuntimeError("event time moved backwards; queue state is corrupt")
    if dt > 0.0:
        for i in range(n):
            phases[i] += dt
            if phases[i] > 1.0:
                phases[i] = 1.0

    cdef double limit = t_event + tol_time
    new_head = head
    while new_head < tail and pipe_t[new_head] <= limit:
        new_head += 1
    k = new_head - head
    cdef double y
    cdef int64_t m
    if k > 0:
        # scratch is all zeros between calls; build own-pulse counts, use,
        # then zero only the touched entries.
        for j in range(head, new_head):
            scratch[pipe_src[j]] += 1
        for i in range(n):
            m = k - scratch[i]
            if m > 0:
                y = big_i * (-expm1(log_ratio * phases[i])) + m * eps
                if y >= 1.0:
                    phases[i] = 1.0
                else:
                    phases[i] = log1p(-y / big_i) / log_ratio
        for j in range(head, new_head):
            scratch[pipe_src[j]] = 0

    fired = []
    nf = 0
    for i in range(n):
        if phases[i] >= 1.0 - tol_phase:
            fired.append(i)
            phases[i] = 0.0
            pipe_t[tail + nf] = t_event + tau
            pipe_src[tail + nf] = i
            nf += 1
    return t_event, new_head, tail + nf, fired
