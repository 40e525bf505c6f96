"""lambda_1 / ell from the collar Sturm-Liouville model approaching c_top.

Two genus splits; the graph model sits exactly on c_top.
"""
from hypspec import reduced

ells = [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125]
for gp, gm in ((1, 1), (1, 2)):
    top = reduced.SplitTopology(gp, gm)
    c = reduced.c_top(top)
    print(f"genus split ({gp}, {gm}), c_top = {c:.7f}")
    for ell, lam, ratio, gratio in reduced.f_of_ell(top, ells):
        print(f"  ell={ell:<7g} lambda={lam:.6e}  lambda/ell={ratio:.6f}  rel err={abs(ratio - c) / c:.4f}")
