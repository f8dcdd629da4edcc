"""Comparison tolerance used by every inequality check."""

TOL = 1e-9


def slack(*values):
    """Absolute 1e-9 for magnitudes up to 1, relative 1e-9 above that."""
    scale = 1.0
    for v in values:
        v = abs(v)
        if v > scale:
            scale = v
    return TOL * scale
