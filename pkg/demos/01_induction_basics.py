"""A first tour: exact interval exchanges and the induction engine.

Builds the golden-ratio rotation with exact quadratic lengths, runs the
renormalization forward and backward, and shows the cocycle matrices,
Zorich times, and connection detection on rational data.
"""

from fractions import Fraction

from ietkz.combinatorics import CombinatorialData
from ietkz.errors import ConnectionHit
from ietkz.induction import Steps, detect_connection, h_profile, make_state, run, run_window
from ietkz.numerics import Quadratic

rotation = CombinatorialData.from_rows(["A", "B"], ["B", "A"])
phi = Quadratic(Fraction(1, 2), Fraction(1, 2), 5)  # (1 + sqrt 5)/2
one = Quadratic(1, 0, 5)

print("== forward induction on the golden rotation ==")
state = make_state(rotation, (phi, one))
traj = run(state, "forward", Steps(12))
for n in range(1, 13):
    a = traj.arrow_at(n)
    print(f"  step {n:2d}: {a.kind:6s} winner={a.winner} loser={a.loser}  Z={traj.zorich_time(n)}")
print("  B(0,12) =")
for row in traj.matrix(0, 12):
    print("   ", [int(x) for x in row])
print("  norm growth is Fibonacci:", [traj.norm(0, n) for n in range(1, 13)])

print("\n== rational lengths end at a connection ==")
try:
    run(make_state(rotation, (Fraction(5), Fraction(3))), "forward", Steps(100))
except ConnectionHit as exc:
    print(f"  halted after {exc.trajectory.n_max} steps: {exc}")
print("  detect_connection on lengths (5,3):", detect_connection(make_state(rotation, (Fraction(5), Fraction(3))), 20))
print("  detect_connection on golden lengths:", detect_connection(make_state(rotation, (phi, one)), 50))

print("\n== backward induction needs suspension data ==")
susp = make_state(rotation, (phi, one), (one, one - phi))
window = run_window(susp, back=10, fwd=4)
print("  window levels:", window.n_min, "..", window.n_max)
for n in (0, -3, -6, -9):
    ht, hb, H = h_profile(window.state(n))
    print(f"  level {n:3d}: H = {float(H):.6f} (strictly decreasing backwards)")
print("  heights q^(0):", [float(x) for x in window.state(0).heights()])
