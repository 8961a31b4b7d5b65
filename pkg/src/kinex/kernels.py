"""Hot trajectory loop, JIT-compiled when numba is available.

Both implementations advance the same recurrence and must stay in lockstep:
per step, either a noisy Euler-Maruyama update (consuming one pre-generated
noise row) or, while any component sits at or below the positivity
threshold, a noise-free Euler step of the kinetic system.  A noisy or
deterministic step whose drift part would turn a component negative (only
possible for oversized dt) is redone as ten noise-free substeps of dt/10.

Status codes: 0 ok, 1 recovery budget exhausted, 2 dt too large even for
the substep fallback.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay runnable
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True, nogil=True)
def _trajectory_kernel(c, mloss, a, x0, noise, dt, sqrt_gdt, income_mode, eps, max_det, states):
    n = x0.shape[0]
    steps = noise.shape[0]
    x = x0.copy()
    xnew = np.empty(n)
    dx = np.empty(n)
    eta = np.empty(n)
    etab = np.empty(n)
    for i in range(n):
        states[0, i] = x[i]
    consumed = 0
    recoveries = 0
    retries = 0
    det_run = 0
    in_recovery = False
    for step in range(steps):
        allpos = True
        for i in range(n):
            if x[i] <= eps:
                allpos = False
                break
        # drift: gain_i = sum_hk c[i,h,k] x_h x_k, loss_i = x_i sum_k mloss[i,k] x_k
        for i in range(n):
            g = 0.0
            for h in range(n):
                s = 0.0
                for k in range(n):
                    s += c[i, h, k] * x[k]
                g += x[h] * s
            l = 0.0
            for k in range(n):
                l += mloss[i, k] * x[k]
            dx[i] = g - x[i] * l
        if not allpos:
            if not in_recovery:
                recoveries += 1
                in_recovery = True
                det_run = 0
            det_run += 1
            if det_run > max_det:
                return consumed, recoveries, retries, 1
            ok = True
            for i in range(n):
                xnew[i] = x[i] + dt * dx[i]
                if xnew[i] < 0.0:
                    ok = False
            if ok:
                for i in range(n):
                    x[i] = xnew[i]
            else:
                retries += 1
                if not _substep_drift(c, mloss, x, dt, xnew, dx):
                    return consumed, recoveries, retries, 2
        else:
            in_recovery = False
            det_run = 0
            if income_mode:
                om = 1.0
                for i in range(1, n):
                    up = x[i] / x[i - 1]
                    if up > om:
                        om = up
                    down = x[i - 1] / x[i]
                    if down > om:
                        om = down
                sc = 0.75 / om
                for i in range(n):
                    eta[i] = sc * x[i] * noise[consumed, i]
                for i in range(n):
                    s = 0.0
                    for j in range(n):
                        s += a[i, j] * eta[j]
                    etab[i] = eta[i] + s
            else:
                dot = 0.0
                for i in range(n):
                    dot += x[i] * noise[consumed, i]
                for i in range(n):
                    etab[i] = x[i] * noise[consumed, i] - x[i] * dot
            consumed += 1
            ok = True
            for i in range(n):
                xnew[i] = x[i] + dt * dx[i] + sqrt_gdt * etab[i]
                if xnew[i] < 0.0:
                    ok = False
            if ok:
                for i in range(n):
                    x[i] = xnew[i]
            else:
                retries += 1
                if not _substep_drift(c, mloss, x, dt, xnew, dx):
                    return consumed, recoveries, retries, 2
        for i in range(n):
            states[step + 1, i] = x[i]
    return consumed, recoveries, retries, 0


@njit(cache=True, nogil=True)
def _substep_drift(c, mloss, x, dt, xnew, dx):
    """Advance x by dt with ten noise-free Euler substeps; False if even
    those would cross zero."""
    n = x.shape[0]
    h = dt / 10.0
    for _ in range(10):
        for i in range(n):
            g = 0.0
            for hh in range(n):
                s = 0.0
                for k in range(n):
                    s += c[i, hh, k] * x[k]
                g += x[hh] * s
            l = 0.0
            for k in range(n):
                l += mloss[i, k] * x[k]
            dx[i] = g - x[i] * l
        for i in range(n):
            xnew[i] = x[i] + h * dx[i]
            if xnew[i] < 0.0:
                return False
        for i in range(n):
            x[i] = xnew[i]
    return True


def _trajectory_python(c, mloss, a, x0, noise, dt, sqrt_gdt, income_mode, eps, max_det, states):
    """Pure-numpy twin of the jitted kernel (same stepping, same counters)."""
    steps = noise.shape[0]
    x = x0.copy()
    states[0] = x
    consumed = 0
    recoveries = 0
    retries = 0
    det_run = 0
    in_recovery = False

    def drift_of(y):
        return (c @ y) @ y - y * (mloss @ y)

    def substep(y):
        h = dt / 10.0
        for _ in range(10):
            ynew = y + h * drift_of(y)
            if np.any(ynew < 0.0):
                return None
            y = ynew
        return y

    for step in range(steps):
        dx = drift_of(x)
        if np.any(x <= eps):
            if not in_recovery:
                recoveries += 1
                in_recovery = True
                det_run = 0
            det_run += 1
            if det_run > max_det:
                return consumed, recoveries, retries, 1
            xnew = x + dt * dx
            if np.any(xnew < 0.0):
                retries += 1
                xnew = substep(x)
                if xnew is None:
                    return consumed, recoveries, retries, 2
            x = xnew
        else:
            in_recovery = False
            det_run = 0
            xi = noise[consumed]
            consumed += 1
            if income_mode:
                ratios = x[1:] / x[:-1]
                om = max(1.0, ratios.max(), (1.0 / ratios).max())
                eta = (0.75 / om) * x * xi
                etab = eta + a @ eta
            else:
                etab = x * xi - x * float(x @ xi)
            xnew = x + dt * dx + sqrt_gdt * etab
            if np.any(xnew < 0.0):
                retries += 1
                xnew = substep(x)
                if xnew is None:
                    return consumed, recoveries, retries, 2
            x = xnew
        states[step + 1] = x
    return consumed, recoveries, retries, 0


def run_kernel(c, mloss, a, x0, noise, dt, sqrt_gdt, income_mode, eps, max_det, states):
    fn = _trajectory_kernel if HAVE_NUMBA else _trajectory_python
    return fn(c, mloss, a, x0, noise, dt, sqrt_gdt, income_mode, eps, max_det, states)
