"""NumPy implementation of the quadrature kernels.

Used when the compiled extension is unavailable and as the reference the
extension is tested against. Signatures must match ``_ckernels.pyx``.

Panels are uniform: node ``q`` of panel ``a`` sits at
``starts[a] + off_out[q]`` and the rule for ``[starts[a], that node]`` at
``starts[a] + off_in[q, r]``. Weights are premultiplied by the pulse.
"""
import numpy as np


def phase_integrals(starts, off_out, wg_out, omega, phase):
    """``sum wg * exp(1j * (omega[p] * t + phase[p]))`` over all nodes, per mode."""
    t = starts[:, None] + off_out[None, :]
    out = np.empty(len(omega), dtype=complex)
    for p, (w, ph) in enumerate(zip(omega, phase)):
        arg = w * t + ph
        out[p] = np.sum(wg_out * np.cos(arg)) + 1j * np.sum(wg_out * np.sin(arg))
    return out


def ordered_double_integrals(starts, off_out, off_in, wg_out, wg_in, omega):
    """Time-ordered integral of ``g(t2) g(t1) sin(omega (t2 - t1))`` per mode."""
    t_out = starts[:, None] + off_out[None, :]
    t_in = starts[:, None, None] + off_in[None, :, :]
    out = np.empty(len(omega))
    for p, w in enumerate(omega):
        c_in = np.einsum("pqr,pqr->pq", wg_in, np.cos(w * t_in))
        s_in = np.einsum("pqr,pqr->pq", wg_in, np.sin(w * t_in))
        cos_out = np.cos(w * t_out)
        sin_out = np.sin(w * t_out)
        c_panel = np.einsum("pq,pq->p", wg_out, cos_out)
        s_panel = np.einsum("pq,pq->p", wg_out, sin_out)
        c_run = np.concatenate(([0.0], np.cumsum(c_panel)[:-1]))[:, None] + c_in
        s_run = np.concatenate(([0.0], np.cumsum(s_panel)[:-1]))[:, None] + s_in
        out[p] = np.sum(wg_out * (sin_out * c_run - cos_out * s_run))
    return out
