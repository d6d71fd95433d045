import json
import math

import numpy as np
import pytest

from choquard.construction import (BumpFamily, GrowthTarget, RegimeTag, balance_exponent,
                                   blowup_certificate, build_source, choose_sequences,
                                   dumps_family, evaluate_solution, family_from_json,
                                   family_hash, membership_mass, regime_tag, u_lower_bound)
from choquard.errors import InfeasibleError, ParameterError, RegimeError
from choquard.potential import newton_constant, radial_newtonian_potential, SMOOTH
from choquard.regions import Params
from oracles import bump, bump_potential_3d


def _geometry_ok(fam):
    x = fam.norms
    assert np.all(x < 0.5) and np.all(4 * x[1:] < x[:-1])
    assert np.all(fam.radii < x / 4)
    assert np.all(fam.eps > 0) and np.all(np.isfinite(fam.amplitudes))


@pytest.mark.parametrize("fixture, tag", [("sublow_family", RegimeTag.SubLow),
                                          ("midtop_family", RegimeTag.MidTop),
                                          ("high_family", RegimeTag.High)])
def test_three_families_build(fixture, tag, request):
    fam = request.getfixturevalue(fixture)
    assert fam.tag is tag and fam.J == 5
    _geometry_ok(fam)
    assert np.all(np.diff(fam.radii) < 0)


def test_midtop_delta_rule(midtop_family):
    fam = midtop_family
    assert np.allclose(fam.deltas, (-np.log(fam.radii)) ** (1 / 3))


def test_high_amplitude_rule(high_family):
    fam = high_family
    expected = fam.eps / fam.radii ** (2 + 3 / 4)
    assert np.allclose(np.log(fam.amplitudes), np.log(expected), rtol=1e-12)


def test_regime_tags():
    assert regime_tag(Params(3, 1, 1, 4)) is RegimeTag.SubLow
    assert regime_tag(Params(3, 1, 2, 4)) is RegimeTag.MidCritLow
    assert regime_tag(Params(3, 1, 2.5, 4)) is RegimeTag.MidSloped
    assert regime_tag(Params(3, 1, 3, 3)) is RegimeTag.MidTop
    assert regime_tag(Params(3, 1, 4, 3)) is RegimeTag.High


def test_balance_exponents_positive_in_blowup_region():
    for p in (Params(3, 1, 1, 4), Params(3, 1, 3, 3), Params(3, 2.5, 4, 1),
              Params(3, 1, 2.5, 3)):
        assert balance_exponent(p, regime_tag(p)) > 0


@pytest.mark.parametrize("p", [Params(3, 1, 1, 2), Params(3, 2, 4, 0.5)])
def test_bounded_regimes_refuse(p):
    with pytest.raises(RegimeError):
        choose_sequences(p, J=2)


def test_tag_mismatch_refused():
    with pytest.raises(RegimeError):
        choose_sequences(Params(3, 1, 1, 4), tag=RegimeTag.High, J=2)


def test_mid_crit_low_on_threshold_is_infeasible():
    # sigma = n/(n-2) leaves only the logarithm in the balance constraint
    with pytest.raises(InfeasibleError):
        choose_sequences(Params(3, 1, 2, 3), J=3)


def test_zero_bumps_rejected():
    with pytest.raises(ParameterError):
        choose_sequences(Params(3, 1, 1, 4), J=0)


def test_build_source_values(sublow3_family):
    fam = sublow3_family
    f = build_source(fam)
    assert f(fam.centers[0])[0] == pytest.approx(fam.amplitudes[0], rel=1e-14)
    off = fam.centers[1] + 0.5 * fam.radii[1] * np.array([0.0, 0.0, 1.0])
    assert f(off)[0] == pytest.approx(fam.amplitudes[1] * bump(0.5), rel=1e-12)
    assert f(np.array([0.3, 0.3, 0.3]))[0] == 0.0


def test_solution_formula_at_a_center(sublow3_family):
    fam = sublow3_family
    c = newton_constant(3)
    own = c * fam.amplitudes[0] * fam.radii[0] ** 2 * bump_potential_3d(0.0)
    rest = sum(c * m * r * r * bump_potential_3d(float(np.linalg.norm(fam.centers[0] - x)) / r)
               for x, r, m in zip(fam.centers[1:], fam.radii[1:], fam.amplitudes[1:]))
    assert evaluate_solution(fam, fam.centers[0]) == pytest.approx(own + rest, rel=1e-9)


def test_lower_bound_below_solution(sublow_family):
    fam = sublow_family
    for j in range(fam.J):
        assert evaluate_solution(fam, fam.centers[j]) > u_lower_bound(fam, j)


def test_descriptor_roundtrip(midtop_family):
    text = dumps_family(midtop_family)
    back = family_from_json(json.loads(text))
    assert dumps_family(back) == text
    assert family_hash(back) == family_hash(midtop_family)
    assert np.array_equal(back.radii, midtop_family.radii)


def test_malformed_descriptor():
    with pytest.raises(ParameterError):
        family_from_json({"params": {"n": 3}})


def test_constraint_violations_detected():
    good = choose_sequences(Params(3, 1, 1, 4), J=2)
    with pytest.raises(ParameterError):
        BumpFamily(good.params, good.tag, good.centers[::-1], good.radii, good.eps,
                   good.amplitudes, good.deltas, good.constants)
    with pytest.raises(ParameterError):
        BumpFamily(good.params, good.tag, good.centers, good.norms / 2, good.eps,
                   good.amplitudes, good.deltas, good.constants)


@pytest.mark.parametrize("J", [3, 5, 8])
def test_unbounded_along_centers(J):
    fam = choose_sequences(Params(3, 1, 1, 4), J=J)
    u = evaluate_solution(fam, fam.centers)
    assert np.all(np.diff(u) > 0)
    report = blowup_certificate(fam)
    assert report.passed
    assert all(e.margin > 0 for e in report.entries)
    # ratio u / log(1/|x|) grows at least linearly in j
    ratio = u / np.log(1 / fam.norms)
    assert np.all(ratio > np.arange(1, J + 1))


def test_blowup_certificate_rejects_stronger_target(sublow3_family):
    report = blowup_certificate(sublow3_family, GrowthTarget.power(20.0))
    assert not report.passed and report.first_violation == 1


def test_power_target_construction():
    fam = choose_sequences(Params(3, 1, 1, 4), phi=GrowthTarget.power(1.0), J=3)
    assert blowup_certificate(fam).passed


def test_growth_target_json_and_table():
    t = GrowthTarget.tabulated([(1e-4, 100.0), (1e-1, 2.0)])
    assert GrowthTarget.from_json(t.to_json()) == t
    assert t(1e-4) == pytest.approx(100.0)
    with pytest.raises(ParameterError):
        GrowthTarget.power(-1.0)
    with pytest.raises(ParameterError):
        GrowthTarget.log()(1.5)


def test_local_view_matches_global_coordinates(sublow3_family):
    fam = sublow3_family
    view = fam.local(0)
    xi = np.array([[0.3, 0.2, -0.1], [0.0, 0.0, 0.0], [1.5, 0.0, 0.0]])
    glob = evaluate_solution(fam, fam.centers[0] + fam.radii[0] * xi)
    assert np.allclose(view(xi), glob, rtol=1e-6)
    assert np.allclose(view.source(xi), fam.source(fam.centers[0] + fam.radii[0] * xi),
                       rtol=1e-8)
    with pytest.raises(ParameterError):
        fam.local(7)


def test_membership_mass_bounded(sublow_family):
    ratios = membership_mass(sublow_family)
    # int u_j^lam <= C eps_j^lam with one C for every bump
    assert np.all(np.isfinite(ratios)) and np.all(ratios > 0)
    assert np.all(ratios <= ratios[0] * (1 + 1e-12))


def test_with_radii_recomputes_amplitudes(sublow3_family):
    fam = sublow3_family
    radii = fam.radii.copy()
    radii[2] *= 2
    new = fam.with_radii(radii)
    assert new.amplitudes[2] == pytest.approx(fam.amplitudes[2] / 8, rel=1e-12)
