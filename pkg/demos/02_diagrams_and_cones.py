"""Rauzy diagrams, singularity structure, and the absolute-homology cone.

Enumerates a small diagram, reads off genus and marked points from the
vertex permutation, and computes extremal rays plus interior witnesses of
the positive cone inside the antisymmetric matrix's column space.
"""

from ietkz.combinatorics import CombinatorialData, build_diagram, omega_matrix, singular_structure
from ietkz.cones import absolute_cone_rays, standard_witness

rev4 = CombinatorialData.from_rows(["A", "B", "C", "D"], ["D", "C", "B", "A"])
diag = build_diagram(rev4)
print(f"== diagram of {rev4} ==")
print(f"  {len(diag.vertices)} vertices, {len(diag.arrows)} arrows")
for v in diag.vertices:
    st = singular_structure(v)
    print(f"  {v}  g={st.g} s={st.s}")

print("\n== antisymmetric matrices ==")
for pi in (CombinatorialData.from_rows(["A", "B"], ["B", "A"]), rev4):
    print(f"  Omega({pi}):")
    for row in omega_matrix(pi):
        print("   ", [int(x) for x in row])

print("\n== cone rays and witnesses ==")
rev3 = CombinatorialData.from_rows(["A", "B", "C"], ["C", "B", "A"])
for pi in (rev3, rev4):
    cone = absolute_cone_rays(pi)
    print(f"  {pi}: rays {[ [int(x) for x in r] for r in cone.rays ]}")
    w = standard_witness(pi)
    print(f"      witness {[str(x) for x in w]} (strictly positive, inside the column space)")
# the witness of every vertex in a diagram comes from pushing the standard
# vertex's loop forward along the diagram
for v in diag.vertices[:3]:
    print(f"  witness at {v}: {[str(x) for x in standard_witness(v)]}")
