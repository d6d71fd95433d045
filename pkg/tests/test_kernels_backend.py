import os
import subprocess
import sys

import numpy as np
import pytest

from choquard import _kernels_py, kernels
from choquard.quadrature import _gauss, directions

compiled = pytest.importorskip("choquard._kernels", reason="compiled extension not built")


@pytest.fixture(scope="module")
def workload():
    rng = np.random.default_rng(1)
    n = 3
    centers = np.array([[0.5 * 5.0 ** -j, 0, 0] for j in range(1, 5)])
    radii = np.abs(centers[:, 0]) / 8
    amps = 10.0 ** np.arange(4)
    pts = rng.uniform(-0.2, 0.2, size=(5000, n))
    return n, centers, radii, amps, pts


def _close(a, b, rtol=1e-11):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    for u, v in zip(a, b):
        np.testing.assert_allclose(np.asarray(u, float), np.asarray(v, float), rtol=rtol, atol=0)


def test_scalars_agree():
    for n in (3, 4, 5):
        assert compiled.sphere_area(n) == pytest.approx(_kernels_py.sphere_area(n), rel=1e-15)
        assert compiled.bump_mass(n) == pytest.approx(_kernels_py.bump_mass(n), rel=1e-12)


def test_radial_profile_agrees():
    t = np.concatenate([[0.0], np.geomspace(1e-5, 1e4, 400)])
    _close(compiled.radial_profile(t, 3), _kernels_py.radial_profile(t, 3))


def test_family_potential_and_source_agree(workload):
    n, centers, radii, amps, pts = workload
    _close(compiled.family_potential(pts, centers, radii, amps, n),
           _kernels_py.family_potential(pts, centers, radii, amps, n))
    _close(compiled.family_source(pts, centers, radii, amps),
           _kernels_py.family_source(pts, centers, radii, amps))


def test_quadrature_nodes_agree(workload):
    n, centers, radii, _, _ = workload
    dirs, dw = directions(n, 1)
    glx, glw = _gauss(8)
    x = np.array([0.3, 0.1, -0.2])
    zero = np.zeros(n)
    _close(compiled.ray_nodes(x, dirs, dw, zero, 1.0, centers, radii * 4, 1e-3, 2.0, glx, glw,
                              n - 1.0),
           _kernels_py.ray_nodes(x, dirs, dw, zero, 1.0, centers, radii * 4, 1e-3, 2.0, glx, glw,
                                 n - 1.0), rtol=1e-10)
    _close(compiled.ball_nodes(centers[0], radii[0] * 4, radii[0] * 0.01, dirs, dw, 2.0, glx, glw,
                               x, 1.0, n),
           _kernels_py.ball_nodes(centers[0], radii[0] * 4, radii[0] * 0.01, dirs, dw, 2.0, glx,
                                  glw, x, 1.0, n), rtol=1e-10)


def test_default_backend_is_compiled():
    if os.environ.get("CHOQUARD_PURE_PYTHON", "") in ("", "0"):
        assert kernels.BACKEND == "cython"


def test_environment_switch_selects_fallback():
    env = dict(os.environ, CHOQUARD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import choquard; print(choquard.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
