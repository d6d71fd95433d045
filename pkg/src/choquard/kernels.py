"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``CHOQUARD_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used.  ``BACKEND`` names the choice.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("CHOQUARD_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

sphere_area = _impl.sphere_area
bump = _kernels_py.bump
bump_mass = _impl.bump_mass
radial_profile = _impl.radial_profile
profile_table = _impl.profile_table
family_potential = _impl.family_potential
family_source = _impl.family_source
ray_nodes = _impl.ray_nodes
ball_nodes = _impl.ball_nodes

__all__ = [
    "BACKEND", "sphere_area", "bump", "bump_mass", "radial_profile", "profile_table",
    "family_potential", "family_source", "ray_nodes", "ball_nodes",
]
