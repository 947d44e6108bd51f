"""Diffusion-based wind-field downscaling with terrain conditioning and
sparse-observation data assimilation."""

try:
    from ._windsr import *  # noqa: F401,F403
    from ._windsr import __version__  # noqa: F401
except ImportError:  # in-tree builds put the extension directly on sys.path
    from _windsr import *  # noqa: F401,F403
    from _windsr import __version__  # noqa: F401
