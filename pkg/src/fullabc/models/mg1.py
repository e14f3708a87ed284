"""M/G/1 queue with uniform service times and exponential inter-arrivals.

Observations are the inter-departure times of ``n_customers`` customers
arriving at an initially empty queue.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

N_CUSTOMERS = 51


@dataclass(frozen=True)
class Mg1Params:
    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self):
        if not (0 <= self.theta1 <= self.theta2):
            raise ValueError("service bounds need 0 <= theta1 <= theta2")
        if not self.theta3 > 0:
            raise ValueError("arrival rate must be positive")

    @classmethod
    def from_vector(cls, theta) -> "Mg1Params":
        return cls(*(float(v) for v in np.asarray(getattr(theta, "values", theta))))


def mg1_draws(n_customers: int, theta: Mg1Params, rng: np.random.Generator, size=None):
    """Raw inter-arrival gaps and service times, drawn in a fixed order."""
    shape = (n_customers,) if size is None else (size, n_customers)
    gaps = rng.exponential(1.0 / theta.theta3, size=shape)
    service = theta.theta1 + (theta.theta2 - theta.theta1) * rng.random(shape)
    return gaps, service


def lindley_departures(gaps, service):
    """Departure times via d_i = max(v_i, d_{i-1}) + s_i (vectorised over rows)."""
    arrivals = np.cumsum(gaps, axis=-1)
    dep = np.empty_like(arrivals)
    prev = np.zeros(arrivals.shape[:-1])
    for i in range(arrivals.shape[-1]):
        prev = np.maximum(arrivals[..., i], prev) + service[..., i]
        dep[..., i] = prev
    return dep


def mg1_simulate(theta, rng: np.random.Generator, n_customers: int = N_CUSTOMERS, size=None):
    """Inter-departure times (n_customers - 1 of them; one row per dataset if ``size``)."""
    if not isinstance(theta, Mg1Params):
        theta = Mg1Params.from_vector(theta)
    gaps, service = mg1_draws(n_customers, theta, rng, size)
    return np.diff(lindley_departures(gaps, service), axis=-1)


def event_list_departures(gaps, service):
    """Independent discrete-event simulation of a FIFO single-server queue.

    Used as an oracle for :func:`lindley_departures`: it tracks a queue and
    a server and processes arrival/departure events from a heap.
    """
    events = []
    t = 0.0
    for i, g in enumerate(gaps):
        t += g
        heapq.heappush(events, (t, 1, i))  # arrivals sort after departures at equal times
    queue = []
    busy = False
    departures = np.empty(len(gaps))
    while events:
        now, kind, i = heapq.heappop(events)
        if kind == 1:
            if busy:
                queue.append(i)
            else:
                busy = True
                heapq.heappush(events, (now + service[i], 0, i))
        else:
            departures[i] = now
            if queue:
                j = queue.pop(0)
                heapq.heappush(events, (now + service[j], 0, j))
            else:
                busy = False
    return departures
