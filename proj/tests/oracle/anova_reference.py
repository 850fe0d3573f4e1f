# Regenerates tests/fixtures/anova_fixtures.inc:
#   python3 tests/oracle/anova_reference.py > tests/fixtures/anova_fixtures.inc.body
import numpy as np
from scipy import stats
rng = np.random.default_rng(20261015)
out = []
# Two hand-picked cases, then random groups.
fixtures = [
  [[1,2,3],[2,3,4],[4,5,6]],
  [[1,2,3],[1,2,3]],
]
while len(fixtures) < 20:
    k = int(rng.integers(2, 6))
    groups = []
    for g in range(k):
        n = int(rng.integers(2, 12))
        shift = float(rng.normal(0, 1.0)) * (len(fixtures) % 3)
        vals = np.round(rng.normal(shift, 1.0 + g*0.3, size=n), 3)
        groups.append([float(v) for v in vals])
    fixtures.append(groups)
for g in fixtures:
    f, p = stats.f_oneway(*[np.array(x) for x in g])
    if np.isnan(f): f, p = 0.0, 1.0
    out.append((g, f, p))

for g, f, p in out:
    gs = ", ".join("{" + ", ".join(repr(v) for v in grp) + "}" for grp in g)
    print(f"    {{{{{gs}}}, {float(f)!r}, {float(p)!r}}},")
