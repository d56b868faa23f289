"""Which uncertainties satisfy the Zames-Falb IQC, and how the others are caught."""

from zfcert import (
    LtiUncertainty,
    RationalTF,
    SlopeBand,
    StaticNonlinearity,
    falsify_nonmonotone,
    falsify_noneven_odd,
    lti_membership_test,
    membership_test_static,
)

sat = StaticNonlinearity.saturation()
print("saturation in [0, 1]:", membership_test_static(sat, SlopeBand(0.0, 1.0)).verdict)

# A decreasing map is exposed by a square wave: shifting it by one block
# increases its correlation with the output, which no member allows.
w = falsify_nonmonotone(StaticNonlinearity.linear(-1.0), L=50)
print(f"Delta(x) = -x: shifted {w.shifted:.1f} vs unshifted {w.unshifted:.1f} (excess {w.excess:.1f})")

# Monotone but not odd: the odd class (signed kernels) rejects it.
asym = StaticNonlinearity([-1.0, 0.0, 1.0], [-2.0, 0.0, 1.0])
rep = falsify_noneven_odd(asym, L=50)
print("x / 2x map, odd class:", rep.verdict, rep.witness["construction"])

# Among LTI maps only nonnegative constants pass.
for name, tf in [("2", RationalTF.constant(2.0)), ("-1", RationalTF.constant(-1.0)),
                 ("1/(s+1)", RationalTF([1.0], [1.0, 1.0]))]:
    r = lti_membership_test(LtiUncertainty(tf))
    extra = "" if r.member else f" (omega={r.witness['omega']:.4f}, tau={r.witness['tau']:.4f})"
    print(f"LTI {name}: {r.verdict}{extra}")
