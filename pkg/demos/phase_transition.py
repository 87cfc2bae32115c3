"""Phase transition of the infection-susceptible graph.

Sweeps the firewall intensity at fixed device intensity and watches the
spanning probability collapse from ~1 to 0. All grid points of a trial share
one thinned firewall pool, so each trial's spanning indicator is monotone
and the curve is exactly non-increasing for a fixed seed.
"""
import numpy as np

from spatial_firewalls import NetworkConfig, Window, sweep_lambda_f, write_sweep_csv

config = NetworkConfig(lambda_r=0.8, r_r=2.0, lambda_f=0.0, r_f=2.0,
                       window=Window.square(100.0), master_seed=7)
grid = np.round(np.arange(0.0, 0.1501, 0.005), 10)

print(f"device intensity {config.lambda_r}/m^2, D2D range {config.r_r} m, "
      f"window {config.window.width:g} m; {len(grid)} firewall intensities")
estimates = sweep_lambda_f(config, grid, trials=40)

print(f"{'lambda_f':>9}  {'theta_hat':>9}  {'std_err':>8}")
for est in estimates:
    bar = "#" * int(round(40 * est.theta_hat))
    print(f"{est.config.lambda_f:9.3f}  {est.theta_hat:9.3f}  "
          f"{est.std_err:8.3f}  {bar}")

first_dead = next((e.config.lambda_f for e in estimates if e.theta_hat <= 0.02),
                  None)
print(f"\nspanning probability drops to <=0.02 at lambda_f ~ {first_dead}")

write_sweep_csv(estimates, "phase_transition.csv")
print("wrote phase_transition.csv")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    thetas = [e.theta_hat for e in estimates]
    ses = [e.std_err for e in estimates]
    plt.errorbar(grid, thetas, yerr=ses, marker="o", capsize=3)
    plt.axhline(0.02, color="gray", ls=":")
    plt.xlabel("firewall intensity (per m$^2$)")
    plt.ylabel("spanning probability")
    plt.title("ISG phase transition")
    plt.tight_layout()
    plt.savefig("phase_transition.png", dpi=150)
    print("wrote phase_transition.png")
except ImportError:
    pass
