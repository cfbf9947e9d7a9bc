"""Growth-condition profiles at a finite horizon.

The conditions themselves are asymptotic statements about cocycle blocks;
what the library reports is the finite-horizon profile plus a verdict at
a tolerance.  Bounded-type data (the golden rotation) shows the cleanest
decay of the block ratios and a positive spectral gap both ways.
"""

from fractions import Fraction

from ietkz.combinatorics import CombinatorialData
from ietkz.diophantine import (
    KIND_A,
    KIND_A_PRIME,
    KIND_B,
    dual_roth_profiles,
    length_diagnostics,
    roth_profiles,
)
from ietkz.induction import Steps, make_state, run
from ietkz.numerics import Quadratic

rotation = CombinatorialData.from_rows(["A", "B"], ["B", "A"])
phi = Quadratic(Fraction(1, 2), Fraction(1, 2), 5)
one = Quadratic(1, 0, 5)

print("== forward profiles on the golden rotation ==")
traj = run(make_state(rotation, (phi, one)), "forward", Steps(30))
for kind in (KIND_A, KIND_A_PRIME, KIND_B):
    prof = roth_profiles(traj, kind, tol=0.2)
    tag = f"tail={prof.tail_ratio:.3f}" if prof.tail_ratio is not None else f"theta={prof.theta_estimate:.3f}"
    print(f"  kind {kind:7s}: passes={prof.passes} ({tag})")
prof_a = roth_profiles(traj, KIND_A)
print("  block ratios:", [f"{b.ratio:.3f}" for b in prof_a.blocks[1:]])

print("\n== length control ==")
rep = length_diagnostics(traj, tau_tol=0.3)
print("  partition identity exact at every level:", rep.partition_exact)
print("  sandwich inequality exact everywhere:", all(r["exact_first"] for r in rep.series["sandwich"]))
print("  tail-series ratios (first term controls the sum):",
      [f"{r['ratio']:.2f}" for r in rep.series["tail_over_first"][:6]])

print("\n== dual profile along the backward orbit ==")
susp = make_state(rotation, (phi, one), (one, one - phi))
back = run(susp, "backward", Steps(40))
dual = dual_roth_profiles(back, tol=0.2)
print(f"  passes={dual.passes} tail={dual.tail_ratio:.3f} theta={dual.theta_estimate:.3f}")
print("  block norms stay bounded (periodic backward orbit):",
      sorted({b.block_norm for b in dual.blocks}))
