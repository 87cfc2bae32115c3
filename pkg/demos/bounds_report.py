"""Closed-form design report for a handful of parameter points.

Classifies each configuration as immune (too sparse to percolate even
unprotected), at risk (percolating and under-protected), or safeguarded
(firewall intensity at or above the critical ceiling), and prints the full
bound set for one of them.
"""
from spatial_firewalls import LambdaC1, NetworkConfig, Window, evaluate_all

window = Window.square(100.0)
cases = [
    ("sparse devices",      dict(lambda_r=0.25, lambda_f=0.00)),
    ("under-protected",     dict(lambda_r=0.80, lambda_f=0.02)),
    ("densely firewalled",  dict(lambda_r=0.80, lambda_f=0.13)),
    ("long firewall range", dict(lambda_r=0.80, lambda_f=0.04, r_f=4.0)),
]

print(f"{'case':<20} {'lambda_r':>8} {'lambda_f':>8} {'r_f':>4} {'regime':>12}")
reports = {}
for name, params in cases:
    cfg = NetworkConfig(r_r=2.0, r_f=params.pop("r_f", 2.0), window=window,
                        master_seed=0, **params)
    rep = evaluate_all(cfg, LambdaC1.approximation())
    reports[name] = rep
    print(f"{name:<20} {cfg.lambda_r:8.2f} {cfg.lambda_f:8.2f} "
          f"{cfg.r_f:4.1f} {rep.regime:>12}")

print("\nfull report for the under-protected case:")
data = reports["under-protected"].to_dict()
width = max(len(k) for k in data)
for key in sorted(data):
    print(f"  {key:<{width}}  {data[key]}")

safe = reports["densely firewalled"]
lo, hi = safe.d2d_range_window
print(f"\nwith lambda_f=0.13 the D2D range may be tuned within "
      f"[{lo:.2f}, {hi:.2f}] m: connected but epidemic-free")
