"""The three-point combination shared by curve operators and the ``sd(...)`` expression node.

Both call sites must round identically, so the arithmetic lives in one place.
"""

import numpy as np


def deltas(f_minus, f_0, f_plus, eps):
    """Return the right and left quantum difference quotients."""
    d_plus = (f_plus - f_0) / eps
    d_minus = -(f_minus - f_0) / eps
    return d_plus, d_minus


def combine(f_minus, f_0, f_plus, eps):
    """Scale derivative of a real-valued function from its values at x-eps, x, x+eps."""
    d_plus, d_minus = deltas(f_minus, f_0, f_plus, eps)
    return 0.5 * (d_plus + d_minus) - 0.5j * (d_plus - d_minus)


def combine_complex(f_minus, f_0, f_plus, eps):
    """Scale derivative of a complex-valued function, applied to real and imaginary parts."""
    f_minus, f_0, f_plus = (np.asarray(a, dtype=complex) for a in (f_minus, f_0, f_plus))
    re = combine(f_minus.real, f_0.real, f_plus.real, eps)
    im = combine(f_minus.imag, f_0.imag, f_plus.imag, eps)
    return re + 1j * im
