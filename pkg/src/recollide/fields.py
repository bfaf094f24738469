"""Driving laser field: monochromatic and two-color forms.

The field is linearly polarized along x with the time origin at a field
crest.  Two-color fields are the equal-amplitude sum of two frequencies
``omega +- delta_omega/2``, which factors into a carrier times a slow beat
envelope.  For the half-cycle resolved strong-field machinery the envelope
is frozen at the crest of the enclosing half cycle, so per half cycle the
field is a pure cosine and the vector potential a pure sine.
"""

from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np


class FieldMode(Enum):
    MONOCHROMATIC = "monochromatic"
    TWO_COLOR = "two_color"


@dataclass(frozen=True)
class LaserField:
    """Flat-top pulse of ``n_cycles`` carrier cycles, polarized along x.

    Parameters are in atomic units: ``e0`` peak field, ``omega`` carrier
    angular frequency, ``delta_omega`` beat frequency (0 for monochromatic),
    ``rel_phase`` relative phase of the two colors (shifts the beat
    envelope), ``n_cycles`` number of carrier cycles.
    """

    e0: float
    omega: float
    delta_omega: float = 0.0
    rel_phase: float = 0.0
    n_cycles: int = 1
    mode: FieldMode = FieldMode.MONOCHROMATIC

    def __post_init__(self):
        if self.e0 <= 0.0:
            raise ValueError("e0 must be positive")
        if self.omega <= 0.0:
            raise ValueError("omega must be positive")
        if self.delta_omega < 0.0:
            raise ValueError("delta_omega must be non-negative")
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be at least 1")
        if self.mode is FieldMode.TWO_COLOR and self.delta_omega >= self.omega:
            raise ValueError("two-color beat must be slower than the carrier")

    @property
    def period(self):
        return 2.0 * np.pi / self.omega

    @property
    def duration(self):
        return self.n_cycles * self.period

    @property
    def n_events(self):
        return 2 * self.n_cycles

    def envelope(self, t):
        """Slow beat envelope multiplying the carrier (1 for monochromatic)."""
        if self.mode is FieldMode.MONOCHROMATIC or self.delta_omega == 0.0:
            return np.ones_like(np.asarray(t, dtype=float))
        return np.cos(0.5 * self.delta_omega * np.asarray(t, dtype=float)
                      - 0.5 * self.rel_phase)


@dataclass(frozen=True)
class HalfCycleEvent:
    """One half-cycle ionization event at the field crest ``t_peak``.

    ``effective_e0`` is the carrier amplitude scaled by the beat envelope at
    the crest (signed through the envelope).  The crest field itself is
    ``effective_e0 * (-1)**index``.
    """

    index: int
    t_peak: float
    effective_e0: float

    @property
    def local_amplitude(self):
        """Signed amplitude of the crest-centered pure cosine for this event."""
        return self.effective_e0 * (-1.0) ** self.index


def electric_field(field, t):
    """Instantaneous electric field vector E(t), zero outside the pulse."""
    t = np.asarray(t, dtype=float)
    inside = (t >= 0.0) & (t <= field.duration)
    ex = field.e0 * field.envelope(t) * np.cos(field.omega * t) * inside
    out = np.zeros(t.shape + (3,))
    out[..., 0] = ex
    return out


def half_cycle_events(field):
    """All half-cycle ionization events of the pulse, ordered in time."""
    n = np.arange(field.n_events)
    t_peak = n * np.pi / field.omega
    env = field.envelope(t_peak)
    return [HalfCycleEvent(int(i), float(tp), float(field.e0 * e))
            for i, tp, e in zip(n, t_peak, env)]


def ponderomotive(field):
    """Cycle-averaged quiver energy (e0/omega)^2 / 4 of the carrier."""
    return (field.e0 / field.omega) ** 2 / 4.0


def window_index(field, t):
    """Index of the half-cycle window enclosing t (nearest crest)."""
    n = np.rint(np.asarray(t, dtype=float) * field.omega / np.pi).astype(int)
    return np.clip(n, 0, field.n_events - 1)


def frozen_amplitude(field, n):
    """Per-window carrier amplitude e0 * envelope(T_n) (signed)."""
    t_peak = np.asarray(n) * np.pi / field.omega
    return field.e0 * field.envelope(t_peak)


def vector_potential(field, t):
    """Vector potential A(t) with the beat envelope frozen per half cycle.

    Monochromatic pulses get the exact -(e0/omega) sin(omega t) form; the
    two-color form uses the envelope value at the enclosing half-cycle crest,
    so E = -dA/dt holds per half cycle within the frozen approximation.
    Zero outside the pulse (A vanishes exactly at both pulse edges).
    """
    t = np.asarray(t, dtype=float)
    inside = (t >= 0.0) & (t <= field.duration)
    amp = frozen_amplitude(field, window_index(field, t))
    ax = -(amp / field.omega) * np.sin(field.omega * t) * inside
    out = np.zeros(t.shape + (3,))
    out[..., 0] = ax
    return out


class FieldIntegrals:
    """Cumulative integrals of the piecewise-frozen vector potential.

    Provides ``ia(t) = int_0^t A_x`` and ``ia2(t) = int_0^t A_x^2`` with the
    per-half-cycle frozen envelope, evaluated in closed form per window and
    accumulated across window boundaries.  Both accept arrays.
    """

    def __init__(self, field):
        self.field = field
        w = field.omega
        n_ev = field.n_events
        bounds = (np.arange(n_ev - 1) + 0.5) * np.pi / w  # inner window boundaries
        starts = np.concatenate(([0.0], bounds))
        amps = frozen_amplitude(field, np.arange(n_ev))
        self._bounds = bounds
        self._starts = starts
        self._amps = amps
        # cumulative values at window starts
        cum_ia = np.zeros(n_ev)
        cum_ia2 = np.zeros(n_ev)
        for n in range(1, n_ev):
            t0, t1 = starts[n - 1], starts[n]
            cum_ia[n] = cum_ia[n - 1] + self._seg_ia(amps[n - 1], t0, t1)
            cum_ia2[n] = cum_ia2[n - 1] + self._seg_ia2(amps[n - 1], t0, t1)
        self._cum_ia = cum_ia
        self._cum_ia2 = cum_ia2

    def _seg_ia(self, b, t0, t1):
        w = self.field.omega
        return (b / w**2) * (np.cos(w * t1) - np.cos(w * t0))

    def _seg_ia2(self, b, t0, t1):
        w = self.field.omega
        return (b**2 / w**2) * (0.5 * (t1 - t0)
                                - (np.sin(2 * w * t1) - np.sin(2 * w * t0)) / (4 * w))

    def ia(self, t):
        t = np.asarray(t, dtype=float)
        n = window_index(self.field, t)
        return self._cum_ia[n] + self._seg_ia(self._amps[n], self._starts[n], t)

    def ia2(self, t):
        t = np.asarray(t, dtype=float)
        n = window_index(self.field, t)
        return self._cum_ia2[n] + self._seg_ia2(self._amps[n], self._starts[n], t)
