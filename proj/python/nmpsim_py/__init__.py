"""Python package for the nmpsim simulator core."""

from nmpsim_py._nmpsim import *  # noqa: F401,F403
