# Reference values frozen in tests/unit/stats_test.cc.
import numpy as np
from scipy import special

p, q = np.array([0.9, 0.1]), np.array([0.5, 0.5])
m = 0.5 * (p + q)
kl = lambda a, b: float(np.sum(a * np.log2(a / b)))
print("kl_bits", repr(kl(p, q)))
print("jsd_bits", repr(0.5 * kl(p, m) + 0.5 * kl(q, m)))
# scipy argument order: betainc(a, b, x)
print("I_0.2(0.5, 5)", repr(float(special.betainc(0.5, 5, 0.2))))
print("I_0.3(2.5, 3.5)", repr(float(special.betainc(2.5, 3.5, 0.3))))
