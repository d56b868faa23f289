import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zfcert.classes import (
    LtiUncertainty,
    SignalTrace,
    StaticNonlinearity,
    apply,
    falsify_nonmonotone,
    falsify_noneven_odd,
    homotopy_sweep,
    iqc_inner_product,
    load_nonlinearity,
    loop_transform,
    lti_membership_test,
    membership_test_static,
    random_candidate,
    transformed_relation_is_monotone,
)
from zfcert.errors import LengthMismatch, NoDecreasingPair, PreconditionViolation
from zfcert.lti import FrequencyGrid, RationalTF
from zfcert.multiplier import KernelBasis, MultiplierCandidate, SlopeBand

SAT = StaticNonlinearity.saturation()
NEG = StaticNonlinearity.linear(-1.0)
ASYM = StaticNonlinearity([-1.0, 0.0, 1.0], [-2.0, 0.0, 1.0])


def random_monotone(rng, n=None, signed_slopes=False):
    n = n or int(rng.integers(2, 7))
    bp = np.sort(rng.uniform(-3, 3, n))
    bp = np.unique(np.append(bp, 0.0))
    lo, hi = (-1.0, 2.0) if signed_slopes else (0.0, 2.0)
    slopes = rng.uniform(lo, hi, bp.size + 1)
    vals = np.zeros(bp.size)
    k0 = int(np.flatnonzero(bp == 0.0)[0])
    for i in range(k0 + 1, bp.size):
        vals[i] = vals[i - 1] + slopes[i] * (bp[i] - bp[i - 1])
    for i in range(k0 - 1, -1, -1):
        vals[i] = vals[i + 1] - slopes[i + 1] * (bp[i + 1] - bp[i])
    return StaticNonlinearity(bp, vals, slopes[0], slopes[-1])


def smooth_trace(rng, n=600, dt=1e-2, amp=3.0):
    raw = np.convolve(rng.normal(size=n), np.ones(15) / 15, mode="same")
    raw[0] = raw[-1] = 0.0
    return SignalTrace(dt, amp * raw / np.max(np.abs(raw)))


def test_nonlinearity_invariants():
    with pytest.raises(ValueError):
        StaticNonlinearity([-1.0, 1.0], [0.0, 2.0])  # Delta(0) = 1
    with pytest.raises(ValueError):
        StaticNonlinearity([1.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        StaticNonlinearity([0.0], [0.0], claims_monotone=False)
    with pytest.raises(ValueError):
        StaticNonlinearity([-1.0, 0.0, 1.0], [-2.0, 0.0, 1.0], claims_odd=True)
    assert SAT.is_monotone and SAT.is_odd()
    assert ASYM.is_monotone and not ASYM.is_odd()
    assert not NEG.is_monotone


def test_apply_examples():
    x = SignalTrace(0.1, [-2.0, 0.5, 3.0])
    assert np.allclose(apply(SAT, x).samples, [-1.0, 0.5, 1.0])
    assert np.array_equal(apply(StaticNonlinearity.identity(), x).samples, x.samples)


def test_apply_preserves_order_for_monotone():
    rng = np.random.default_rng(0)
    for _ in range(20):
        nl = random_monotone(rng)
        x = rng.uniform(-5, 5, 200)
        y = nl(x)
        dx, dy = np.subtract.outer(x, x), np.subtract.outer(y, y)
        assert np.all(dx * dy >= -1e-12)


def test_iqc_examples():
    rng = np.random.default_rng(1)
    x = smooth_trace(rng)
    zero = SignalTrace(x.dt, np.zeros(len(x)))
    cand = random_candidate(rng)
    assert iqc_inner_product(x, zero, cand) == 0.0
    assert iqc_inner_product(x, x, MultiplierCandidate.zero()) == pytest.approx(x.norm() ** 2)
    with pytest.raises(LengthMismatch):
        iqc_inner_product(x, SignalTrace(x.dt, np.zeros(3)), cand)


def test_iqc_saturation_random():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = smooth_trace(rng)
        y = apply(SAT, x)
        cand = random_candidate(rng, budget=1.0)
        assert iqc_inner_product(x, y, cand) >= -1e-6 * x.norm() * y.norm()


def test_iqc_sufficiency_sweep():
    rng = np.random.default_rng(3)
    for _ in range(100):
        nl = random_monotone(rng)
        x = smooth_trace(rng, amp=rng.uniform(0.5, 5.0))
        y = apply(nl, x)
        cand = random_candidate(rng, KernelBasis.default(20), budget=rng.uniform(0, 1))
        assert iqc_inner_product(x, y, cand) >= -1e-4 * x.norm() * y.norm()


def test_iqc_kernel_filter_is_exact_for_linear_interpolant():
    # causal kernel e^{-t} applied to a unit ramp-up/down triangle, compared with
    # a fine quadrature of the continuous convolution
    dt = 0.1
    q = SignalTrace(dt, [0.0, 1.0, 0.0, 0.0, 0.0])
    cand = MultiplierCandidate(KernelBasis(("causal",), (1.0,)), [1.0])
    from zfcert.classes import apply_kernel

    out = apply_kernel(q, cand).samples
    t = np.arange(len(q)) * dt
    s = np.linspace(0, 0.2, 200001)
    tri = np.interp(s, [0, 0.1, 0.2], [0, 1, 0])
    for ti, oi in zip(t, out):
        mask = s <= ti
        ref = np.trapezoid(np.exp(-(ti - s[mask])) * tri[mask], s[mask]) if mask.sum() > 1 else 0.0
        assert oi == pytest.approx(ref, abs=1e-9)


def test_membership_examples():
    assert membership_test_static(SAT, SlopeBand(0.0, 1.0)).member
    assert not membership_test_static(NEG, SlopeBand()).member
    rep = membership_test_static(StaticNonlinearity.deadzone(1.0, 1.0), SlopeBand(0.5, 2.0))
    assert not rep.member
    assert rep.witness["side"] == "below a"


def test_membership_spot_checks_nonnegative_for_members():
    rep = membership_test_static(SAT, SlopeBand(0.0, 1.0), trials=20, seed=4)
    assert rep.details["worst_normalized_iqc"] >= -1e-4


def test_membership_deterministic():
    a = membership_test_static(ASYM, SlopeBand(), trials=10, seed=7).to_dict()
    b = membership_test_static(ASYM, SlopeBand(), trials=10, seed=7).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_falsify_neg_identity():
    w = falsify_nonmonotone(NEG, 50, x1=1.0, x2=2.0)
    trace, shifted, unshifted = w
    # 2L + 2 blocks plus one zero tail block so the shift stays inside the window
    assert len(trace) == 103 * 100
    # closed form: (L + 1) D - x2 Delta(x1) with D = (x2 - x1)(Delta(x1) - Delta(x2)) = 1
    assert w.excess == pytest.approx(51 * 1.0 - 2.0 * (-1.0), abs=1e-9)
    assert w.excess > 0
    assert w.min_L == 0


def test_falsify_threshold_reported():
    # Delta(x) = -x, pair (1, 2): threshold q = x2 Delta(x1) / D = -2 < 1, so L = 0 works;
    # a map with a shallow dip needs more blocks
    dip = StaticNonlinearity([0.0, 1.0, 2.0], [0.0, 1.0, 0.9], 1.0, 1.0)
    w0 = falsify_nonmonotone(dip, 0)
    assert w0.min_L > 0
    assert w0.excess <= 0
    w = falsify_nonmonotone(dip, w0.min_L + 1, w0.x1, w0.x2)
    assert w.excess > 0


def test_falsify_monotone_raises():
    with pytest.raises(NoDecreasingPair):
        falsify_nonmonotone(SAT, 10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nonmonotone_always_falsified(seed):
    rng = np.random.default_rng(seed)
    nl = random_monotone(rng, signed_slopes=True)
    if nl.is_monotone:
        return
    w = falsify_nonmonotone(nl, 0)
    # the threshold is exact: positive excess at min_L, none just below it
    at = falsify_nonmonotone(nl, w.min_L, w.x1, w.x2, dt=0.05)
    assert at.excess > 0
    if w.min_L > 0:
        assert falsify_nonmonotone(nl, w.min_L - 1, w.x1, w.x2, dt=0.05).excess <= 1e-9 * abs(at.unshifted)


def test_block_threshold_is_not_bounded_by_ten_thousand():
    # A shallow, narrow dip far from the origin: every decreasing pair has
    # D = (x2 - x1)(Delta(x1) - Delta(x2)) tiny next to the boundary term, so
    # no pair and no block order reaches positive excess with L <= 10^4.
    nl = StaticNonlinearity([-2.13504232, -1.12901129, 0.0, 2.69189668, 2.70278218],
                            [-1.7490125, -0.25696004, 0.0, 1.74645159, 1.73646608],
                            0.26997934691772696, 1.2605393260244195)
    w = falsify_nonmonotone(nl, 0)
    assert w.min_L > 10_000
    assert falsify_nonmonotone(nl, w.min_L, w.x1, w.x2, dt=0.05).excess > 0
    # brute force over all point pairs on a fine grid around the dip
    x = np.linspace(2.5, 2.9, 2001)
    d = nl(x)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    d1, d2 = np.meshgrid(d, d, indexing="ij")
    dec = (x1 < x2) & (d1 > d2)
    D = (x2 - x1) * (d1 - d2)
    q = np.minimum(x2 * d1, x1 * d2)[dec] / D[dec]
    assert q.min() > 10_000


def test_odd_test():
    rep = falsify_noneven_odd(ASYM, 50)
    assert not rep.member
    assert rep.margin < 0
    assert rep.witness["construction"] in ("x1/-x2", "x2/-x1")
    assert falsify_noneven_odd(StaticNonlinearity.identity(), 50).member
    assert falsify_noneven_odd(SAT, 50).member
    with pytest.raises(PreconditionViolation):
        falsify_noneven_odd(NEG, 5)


def test_lti_examples():
    grid = FrequencyGrid.logspace(300)
    assert lti_membership_test(LtiUncertainty(RationalTF.constant(2.0)), grid).member
    rep = lti_membership_test(LtiUncertainty(RationalTF.constant(-1.0)), grid)
    assert not rep.member
    w = rep.witness
    assert w["case"] == "beta=0, alpha<0"
    assert w["omega"] * w["tau"] == pytest.approx(math.pi / 2)
    assert w["value"] < 0


def test_lti_lag_witness():
    rep = lti_membership_test(LtiUncertainty(RationalTF([1.0], [1.0, 1.0])))
    assert not rep.member
    w = rep.witness
    assert w["case"] == "alpha!=0, beta!=0"
    a, b = w["alpha"], w["beta"]
    assert math.tan(w["omega"] * w["tau"] / 2) == pytest.approx((a + 1) / b, abs=1e-6)
    # direct re-evaluation of the condition at the witness
    d = 1 / (1 + 1j * w["omega"])
    val = (d * (1 + np.exp(1j * w["omega"] * w["tau"]))).real
    assert val == pytest.approx(w["value"], abs=1e-12)
    assert val < 0


def test_lti_battery():
    grid = FrequencyGrid.logspace(300)
    members = [RationalTF.constant(c) for c in (0.0, 0.5, 3.0)]
    nonmembers = [RationalTF.constant(c) for c in (-0.1, -2.0)]
    nonmembers += [RationalTF([k], [1.0, p]) for k, p in ((1.0, 1.0), (2.0, 0.3), (0.5, 4.0))]
    nonmembers += [RationalTF([1.0, z], [1.0, p]) for z, p in ((1.0, 5.0), (0.2, 2.0))]
    for tf in members:
        assert lti_membership_test(LtiUncertainty(tf), grid).member
    for tf in nonmembers:
        rep = lti_membership_test(LtiUncertainty(tf), grid)
        assert not rep.member
        assert rep.witness is not None


def test_homotopy():
    rep = homotopy_sweep(SAT, SlopeBand(0.0, 1.0))
    assert rep.member
    steps = rep.details["steps"]
    assert steps[0]["theta"] == 0.0 and steps[-1]["theta"] == 1.0
    zero_map = SAT.blend(0.0, 0.0)
    assert np.all(zero_map(np.linspace(-3, 3, 13)) == 0)
    assert membership_test_static(SAT.blend(1.0, 0.0), SlopeBand(0.0, 1.0)).member
    with pytest.raises(PreconditionViolation):
        homotopy_sweep(NEG, SlopeBand())


def test_homotopy_never_fails_on_members():
    rng = np.random.default_rng(5)
    for _ in range(20):
        nl = random_monotone(rng)
        lo, hi = nl.slope_range
        band = SlopeBand(max(0.0, lo - 0.1) if lo > 0.1 else 0.0, hi + 0.5)
        assert homotopy_sweep(nl, band, 7).member


def test_loop_transform_consistency():
    rng = np.random.default_rng(6)
    for _ in range(50):
        nl = random_monotone(rng)
        a = float(rng.uniform(0, 1.0))
        b = float(a + rng.uniform(0.2, 3.0))
        band = SlopeBand(a, b)
        member = membership_test_static(nl, band, trials=0).member
        assert transformed_relation_is_monotone(nl, band) == member
        if nl.slope_range[1] < b:
            mapped = loop_transform(nl, band)
            assert membership_test_static(mapped, SlopeBand(), trials=0).member == member


def test_load_nonlinearity(tmp_path):
    p = tmp_path / "nl.json"
    p.write_text(json.dumps({"breakpoints": [-1, 1], "values": [-1, 1]}))
    nl = load_nonlinearity(p)
    assert nl(0.5) == 0.5
    p.write_text("[1, 2")
    with pytest.raises(ValueError):
        load_nonlinearity(p)
