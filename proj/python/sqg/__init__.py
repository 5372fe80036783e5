"""Pseudo-spectral simulation and verification toolkit for the stochastic
surface quasi-geostrophic equation on the 2-torus."""

try:
    from ._sqg import *  # noqa: F401,F403  (installed package layout)
    from ._sqg import __version__  # noqa: F401
except ImportError:  # in-tree build: the extension sits on sys.path
    from _sqg import *  # noqa: F401,F403
    from _sqg import __version__  # noqa: F401
