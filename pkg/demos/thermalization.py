"""Compare how each dynamics method thermalizes a hot oscillator.

A harmonic impurity coupled to a single metallic lead is started hot
(initial temperature 5x the lead temperature) and relaxed for 20,000
time units at moderate hybridization (Gamma = 0.01).  At equilibrium
the kinetic energy should settle at kT/2 = 0.025.

The mean-field method without noise (ed) overshoots: it drains energy
through the average force alone and keeps cooling below the thermal
value.  Every method that carries a fluctuating force (ef-ld, m-ed,
nm-ed) or stochastic surface switching (sh) lands near kT/2.

Run:  python3 demos/thermalization.py
"""

from __future__ import annotations

import time

from ahdyn import (
    BathSpec,
    EnsembleConfig,
    Lead,
    MethodConfig,
    ModelParams,
    run_ensemble,
)

OMEGA = 0.003
KT = 0.05
G = 0.02
GAMMA = 0.01

N_TRAJ = 800
T_FINAL = 2.0e4
SEED = 7

METHODS = ("ed", "ef-ld", "m-ed", "nm-ed", "sh")


def main() -> None:
    params = ModelParams(omega=OMEGA, g=G, e_d=G**2 / (2.0 * OMEGA))
    bath = BathSpec(leads=(Lead(gamma=GAMMA),), kT=KT)
    cfg = EnsembleConfig(
        n_traj=N_TRAJ,
        t_final=T_FINAL,
        init_temperature=5.0 * KT,
        seed=SEED,
    )

    print(f"target: kT/2 = {KT / 2:.4f}   (start: <KE> = {5.0 * KT / 2:.4f})")
    print(f"{'method':>7} | {'final <KE>':>11} | {'+/- sem':>8} | {'vs kT/2':>8} | {'wall':>6}")
    print("-" * 55)
    for method in METHODS:
        t0 = time.perf_counter()
        frames = run_ensemble(params, bath, MethodConfig(method=method), cfg)
        wall = time.perf_counter() - t0
        # Average the last third of the trajectory to smooth the residual
        # oscillation of the ensemble mean.
        tail = frames[len(frames) * 2 // 3 :]
        ke = sum(f.mean_ke for f in tail) / len(tail)
        sem = max(f.sem_ke for f in tail)
        ratio = ke / (KT / 2.0)
        print(
            f"{method:>7} | {ke:11.5f} | {sem:8.5f} | {ratio:7.2f}x | {wall:5.1f}s"
        )

    print()
    print("ed cools past the thermal point; the stochastic methods stop at kT/2.")


if __name__ == "__main__":
    main()
