"""Maximum sum-rates of the informed-decoder models, side by side.

    python3 demos/capacity_tour.py
"""
import math

from elm.capacity import closed_form_max_sum_rate, compare_models, eip_du_bounds, optimize_sum_rate

print("EIA maximum sum-rate: closed form vs optimizer")
for t, ell in [(3, 1), (3, 2), (4, 2), (5, 3), (6, 2)]:
    cf = closed_form_max_sum_rate(t, ell)
    opt = optimize_sum_rate("EIA", t, ell)
    print(f"  t={t} ell={ell}  closed={cf.value:.6f}  optimizer={opt.rates.sum_rate:.6f}"
          f"  p1={float(cf.achiever_p):.4f} ~ {opt.profile.p[0][0]:.4f}")

print("\nknowing only cell states costs nothing at ell=2 but does at ell=3")
for t, ell in [(3, 2), (4, 2), (4, 3)]:
    rep = compare_models(t, ell)
    print(f"  t={t} ell={ell}  " + "  ".join(f"{name}={v:.6f}" for name, v, _ in rep.rows()))

# uninformed decoder: only bounds are known
print("\nEIP:DU bounds, ell=2")
for t in range(3, 11):
    lo, hi = eip_du_bounds(t, 2)
    print(f"  t={t:2d}  {lo:.4f} <= R <= {hi:.4f}   (log2(t+1) = {math.log2(t + 1):.4f})")
