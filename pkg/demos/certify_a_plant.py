"""Certify a stable plant against every monotone nonlinearity.

The plant G(s) = -(s+2)/(s+1) has Re{-G(jw)} = (2 + w^2)/(1 + w^2) >= 1, so
even the trivial multiplier M = 1 works.  The LP confirms this, the dense
grid re-verifies it, and the margin turns into a uniform gain bound.
"""

from zfcert import KernelBasis, RationalTF, SearchProblem, synthesize

g = RationalTF([-1.0, -2.0], [1.0, 1.0])
cert = synthesize(SearchProblem(g, basis=KernelBasis.default(20)))

print("status           ", cert.status)
print("LP margin        ", cert.epsilon)
print("verified margin  ", cert.verified_epsilon, "at omega =", cert.provenance["verified_argmin_omega"])
print("gain bound       ", cert.gain_bound)
print("L1 budget used   ", cert.provenance["l1_budget"])
for line in cert.caveats:
    print(" -", line)
