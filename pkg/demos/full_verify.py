"""Run the whole identity battery on every bundled scenario.

Library-level equivalent of `branchwalk verify <name>` without the file
outputs: build each bundle, run the six checks, print the one-line
summaries.  Exact scenarios report literal zeros.
"""

import time

from branchwalk import BUNDLED, build_bundle, load_scenario, verify_bundle

grand = True
for name in BUNDLED:
    bundle = build_bundle(load_scenario(name))
    t0 = time.perf_counter()
    reports = verify_bundle(bundle)
    dt = time.perf_counter() - t0
    ok = all(r.passed for r in reports)
    grand = grand and ok
    print(f"{name}  [{dt:.2f}s]")
    for r in reports:
        print("   " + r.summary())

print("\nall scenarios pass" if grand else "\nFAILURES above")
