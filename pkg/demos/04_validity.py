"""
Checking conformal validity by simulation
=========================================

On exchangeable data the true label falls outside the prediction region
with probability at most epsilon.  A shifted test distribution breaks
exchangeability and the check fails, as it should.
"""

from pqa_reject.synth import validity_table

for shift in (0.0, 0.2):
    print(f"shift={shift}")
    for row in validity_table(seed=0, shift=shift):
        status = "PASS" if row.passed else "FAIL"
        print(f"  eps={row.epsilon:.2f} miscoverage={row.miscoverage:.4f} bound={row.bound:.4f} {status}")
