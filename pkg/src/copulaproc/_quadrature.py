"""Composite Gauss-Legendre rules with dyadic boundary layers on (0, 1)."""

import numpy as np


def dyadic_breaks(lo=0.0, hi=1.0, depth=40):
    """Panel breakpoints accumulating geometrically towards both ends of ``[lo, hi]``."""
    width = hi - lo
    k = np.arange(1, depth + 1)
    left = lo + width * 2.0 ** (-k)
    right = hi - width * 2.0 ** (-k)
    return np.unique(np.concatenate([left, right, [lo + width / 2]]))


def panel_rule(breaks, order):
    """Nodes and weights of a composite rule on consecutive breakpoints."""
    x, w = np.polynomial.legendre.leggauss(order)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    nodes = (a + b) / 2 + (b - a) / 2 * x[None, :]
    weights = (b - a) / 2 * w[None, :]
    return nodes.ravel(), weights.ravel()


def dyadic_rule(order=8, depth=40, lo=0.0, hi=1.0):
    return panel_rule(dyadic_breaks(lo, hi, depth), order)
