# SPDX-License-Identifier: Apache-2.0
"""Behavior-tree generation, validation, execution and benchmarking."""

try:
    from ._btforge import *  # noqa: F401,F403
    from ._btforge import __version__  # noqa: F401
except ImportError:  # running against a plain CMake build tree
    from _btforge import *  # noqa: F401,F403
    from _btforge import __version__  # noqa: F401
