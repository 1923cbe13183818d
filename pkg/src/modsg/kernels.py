"""Hot loops: q-products, polynomial evaluation, sech convolution.

Each kernel exists twice: a numba ``@njit`` version and a plain numpy
version.  Set ``MODSG_DISABLE_NUMBA=1`` (or run without numba installed)
to force the numpy path.  Both paths agree to rounding.
"""
import os

import numpy as np

TAIL_TOL = 1e-18
MAX_TERMS = 20000


def _numba_requested():
    flag = os.environ.get("MODSG_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by MODSG_DISABLE_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# numpy implementations

def _np_log_qpoch(z, nome, tol=TAIL_TOL):
    """sum_k Log(1 - z nome^k), principal branch per term."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros_like(z)
    w = z.copy()
    an = abs(nome)
    if z.size == 0:
        return out
    for _ in range(MAX_TERMS):
        out += np.log1p(-w)
        w = w * nome
        if np.max(np.abs(w)) / (1.0 - an) < tol:
            return out
    raise RuntimeError("q-product did not reach tail bound")


def _np_qpoch(z, nome, tol=TAIL_TOL):
    z = np.asarray(z, dtype=np.complex128)
    out = np.ones_like(z)
    w = z.copy()
    an = abs(nome)
    if z.size == 0:
        return out
    for _ in range(MAX_TERMS):
        out *= 1.0 - w
        w = w * nome
        if np.max(np.abs(w)) / (1.0 - an) < tol:
            return out
    raise RuntimeError("q-product did not reach tail bound")


def _np_polyval(c, u):
    """Horner evaluation of sum c[k] u^k."""
    u = np.asarray(u, dtype=np.complex128)
    out = np.zeros_like(u)
    for ck in c[::-1]:
        out = out * u + ck
    return out


def _np_sech_convolve(x, x0, w, eta):
    """sum_j w_j / (4 eta cosh(pi (x_i - x0_j) / 2 eta))."""
    d = np.subtract.outer(np.asarray(x, dtype=np.float64), x0) * (np.pi / (2 * eta))
    # 1/cosh(d) = 2 e^{-|d|} / (1 + e^{-2|d|}), overflow-free
    e = np.exp(-np.abs(d))
    return (2 * e / (1 + e * e)) @ np.asarray(w, dtype=np.float64) / (4 * eta)


if HAVE_NUMBA:
    @njit(cache=True)
    def _nb_log_qpoch(z, nome, tol):
        out = np.zeros(z.size, dtype=np.complex128)
        an = abs(nome)
        for i in range(z.size):
            w = z[i]
            acc = 0j
            for _ in range(MAX_TERMS):
                acc += np.log(1.0 - w)
                w = w * nome
                if abs(w) / (1.0 - an) < tol:
                    break
            out[i] = acc
        return out

    @njit(cache=True)
    def _nb_qpoch(z, nome, tol):
        out = np.ones(z.size, dtype=np.complex128)
        an = abs(nome)
        for i in range(z.size):
            w = z[i]
            acc = 1.0 + 0j
            for _ in range(MAX_TERMS):
                acc *= 1.0 - w
                w = w * nome
                if abs(w) / (1.0 - an) < tol:
                    break
            out[i] = acc
        return out

    @njit(cache=True)
    def _nb_polyval(c, u):
        out = np.zeros(u.size, dtype=np.complex128)
        for i in range(u.size):
            acc = 0j
            for k in range(c.size - 1, -1, -1):
                acc = acc * u[i] + c[k]
            out[i] = acc
        return out

    @njit(cache=True)
    def _nb_sech_convolve(x, x0, w, eta):
        out = np.zeros(x.size)
        s = np.pi / (2 * eta)
        for i in range(x.size):
            acc = 0.0
            for j in range(x0.size):
                e = np.exp(-abs((x[i] - x0[j]) * s))
                acc += w[j] * 2 * e / (1 + e * e)
            out[i] = acc / (4 * eta)
        return out


def _flat(a, dtype):
    a = np.asarray(a, dtype=dtype)
    return a.ravel(), a.shape


def log_qpoch(z, nome, tol=TAIL_TOL, backend=None):
    """Termwise-principal log of (z; nome)_inf, vectorised over z."""
    if abs(nome) >= 1:
        raise ValueError("|nome| must be < 1")
    zf, shape = _flat(z, np.complex128)
    if _use_numba(backend):
        return _nb_log_qpoch(zf, complex(nome), tol).reshape(shape)
    return _np_log_qpoch(zf, complex(nome), tol).reshape(shape)


def qpoch_inf(z, nome, tol=TAIL_TOL, backend=None):
    if abs(nome) >= 1:
        raise ValueError("|nome| must be < 1")
    zf, shape = _flat(z, np.complex128)
    if _use_numba(backend):
        return _nb_qpoch(zf, complex(nome), tol).reshape(shape)
    return _np_qpoch(zf, complex(nome), tol).reshape(shape)


def polyval(c, u, backend=None):
    c = np.ascontiguousarray(c, dtype=np.complex128)
    uf, shape = _flat(u, np.complex128)
    if _use_numba(backend):
        return _nb_polyval(c, uf).reshape(shape)
    return _np_polyval(c, uf).reshape(shape)


def sech_convolve(x, x0, w, eta, backend=None):
    xf, shape = _flat(x, np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if _use_numba(backend):
        return _nb_sech_convolve(xf, x0, w, float(eta)).reshape(shape)
    return _np_sech_convolve(xf, x0, w, float(eta)).reshape(shape)


def _use_numba(backend):
    if backend is None:
        return HAVE_NUMBA
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend unavailable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"
