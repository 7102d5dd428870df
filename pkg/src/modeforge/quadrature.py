"""Composite Gauss-Legendre panels for oscillatory integrals over a gate.

Panels are uniform, so every panel shares the same in-panel node offsets
and weights; the kernels exploit this.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class PanelGrid:
    starts: np.ndarray      # (P,) panel left edges
    off_out: np.ndarray     # (n,) node offsets inside a panel
    w_out: np.ndarray       # (n,)
    off_in: np.ndarray      # (n, n) rule on [panel start, node q]
    w_in: np.ndarray        # (n, n)

    @property
    def n_panels(self):
        return len(self.starts)

    @property
    def nodes(self):
        return self.starts[:, None] + self.off_out

    @property
    def inner_nodes(self):
        return self.starts[:, None, None] + self.off_in

    def first(self, n_panels):
        """Grid restricted to the first ``n_panels`` panels."""
        return PanelGrid(self.starts[:n_panels], self.off_out, self.w_out,
                         self.off_in, self.w_in)


def panel_grid(tau, max_omega, panels_per_period=8, order=10) -> PanelGrid:
    """Panels covering ``[0, tau]`` with at least ``panels_per_period`` panels
    per period of ``max_omega``.

    The panel count is even so ``tau/2`` is always a panel edge (the pulse
    may have a cusp there).
    """
    periods = max_omega * tau / (2 * np.pi)
    n_panels = max(2, int(np.ceil(panels_per_period * periods)))
    n_panels += n_panels % 2
    h = tau / n_panels
    starts = np.arange(n_panels) * h
    starts[n_panels // 2] = tau / 2
    xi, wi = np.polynomial.legendre.leggauss(order)
    off_out = h / 2 * (xi + 1)
    w_out = h / 2 * wi
    off_in = off_out[:, None] / 2 * (xi + 1)
    w_in = off_out[:, None] / 2 * wi
    return PanelGrid(starts, off_out, w_out, off_in, w_in)


def phase_integrals(g, grid: PanelGrid, omega, phase=None, backend=None):
    """``int g(t) exp(i (omega_p t + phase_p)) dt`` over the grid, per mode."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    phase = np.zeros_like(omega) if phase is None else np.broadcast_to(phase, omega.shape)
    wg = grid.w_out * g(grid.nodes)
    return kernels.phase_integrals(grid.starts, grid.off_out, wg, omega, phase, backend)


def ordered_double_integrals(g, grid: PanelGrid, omega, backend=None):
    """``int_0^T dt2 int_0^t2 dt1 g(t2) g(t1) sin(omega_p (t2 - t1))`` per mode."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    wg_out = grid.w_out * g(grid.nodes)
    wg_in = grid.w_in * g(grid.inner_nodes)
    return kernels.ordered_double_integrals(grid.starts, grid.off_out, grid.off_in,
                                            wg_out, wg_in, omega, backend)
