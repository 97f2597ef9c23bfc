#!/usr/bin/env python3
"""Offline calibration of the pouring world's rim term.

Monte Carlo over the trial parameter distributions with the closed-form
spillage probability. Reports the spillage rate, marginal do-curves and an
oracle estimate of alternative coverage at threshold 0.1, treating the world
itself as the model. `--search` sweeps slope/width/threshold combinations;
`--sigma` checks how often the RC-S and RV-S dependencies survive the
log-scale Fisher z test for several packing-noise levels.

Needs numpy and scipy. Not part of the build.
"""

import argparse
import itertools

import numpy as np
from scipy.stats import norm, truncnorm


def logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def truncated(rng, mean, sd, lo, hi, n):
    return truncnorm.rvs((lo - mean) / sd, (hi - mean) / sd, loc=mean, scale=sd, size=n, random_state=rng)


def draw(rng, n, sigma_pack=0.03):
    rc = truncated(rng, 1.0, 0.25, 0.5, 2.0, n)
    fu = truncated(rng, 0.7, 0.2, 0.3, 1.0, n)
    rd = truncated(rng, 1.0, 0.25, 0.5, 1.5, n)
    eps = rng.normal(0.0, sigma_pack, n)
    return rc, fu, rd, eps


def spill_fn(a, b, c, overflow_width=0.04):
    def p(fu, rd, rv):
        return 1 - (1 - logistic((rv - 1) / overflow_width)) * (1 - logistic((fu - (a * rd + b)) / c))
    return p


def metrics(a, b, c, n=40000, seed=0, coverage_trials=1500, threshold=0.1):
    rng = np.random.default_rng(seed)
    rc, fu, rd, eps = draw(rng, n)
    p = spill_fn(a, b, c)
    rv = fu / rc * (1 + eps)
    pp = p(fu, rd, rv)

    out = {"spill": pp.mean()}
    out["doRC"] = [p(fu, rd, fu / r * (1 + eps)).mean() for r in np.linspace(0.5, 2.0, 7)]
    out["doRD"] = [p(fu, r, rv).mean() for r in (0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.5)]
    out["doFU"] = [p(f, rd, f / rc * (1 + eps)).mean() for f in np.linspace(0.3, 1.0, 8)]
    out["doRV15"] = p(fu, rd, 1.5).mean()

    spilled = np.where(rng.random(n) < pp)[0][:coverage_trials]
    noise = eps[:300]
    grid_rd = np.linspace(0.5, 1.5, 101)
    grid_fu = np.linspace(0.3, 1.0, 101)
    grid_rc = np.linspace(0.5, 2.0, 101)
    cov = {"RD": 0, "FU": 0, "RC": 0}
    for i in spilled:
        f, d, r, v = fu[i], rd[i], rc[i], rv[i]
        observed = p(f, d, v)
        # RD acts directly on S with RV held at its observed value.
        rhs = p(f, grid_rd, v)
        cov["RD"] += bool(((rhs < observed) & (rhs < threshold)).any())
        # FU and RC act through RV; compare against both mediator subsets.
        free = p(f, d, f / r * (1 + noise)).mean()
        rhs = p(grid_fu[:, None], d, grid_fu[:, None] / r * (1 + noise[None, :])).mean(1)
        cov["FU"] += bool(((rhs < min(observed, free)) & (rhs < threshold)).any())
        rhs = p(f, d, f / grid_rc[:, None] * (1 + noise[None, :])).mean(1)
        cov["RC"] += bool(((rhs < min(observed, free)) & (rhs < threshold)).any())
    out["coverage"] = {k: v / len(spilled) for k, v in cov.items()}
    return out


def show(a, b, c):
    m = metrics(a, b, c)
    for k, v in m.items():
        if isinstance(v, dict):
            print(k, {kk: round(vv, 3) for kk, vv in v.items()})
        else:
            print(k, np.round(v, 3))


def search():
    for a in (1.0, 1.5, 2.0, 3.0):
        for c in (0.02, 0.04, 0.06):
            for t95 in (0.5, 0.6, 0.7, 0.8, 0.9):  # rim threshold at rd = 0.95
                b = t95 - a * 0.95
                m = metrics(a, b, c)
                rd = m["doRD"]
                rd_ok = rd[2] >= 0.8 and rd[7] <= 0.25 and rd[9] <= 0.25
                print(a, round(b, 3), c, "spill", round(m["spill"], 3), "rc_max", round(max(m["doRC"][1:]), 3),
                      "rd_ok", rd_ok, {k: round(v, 3) for k, v in m["coverage"].items()}, flush=True)


def fisher_z_p(cov, n, i, j, given):
    idx = [i, j, *given]
    prec = np.linalg.inv(cov[np.ix_(idx, idx)])
    r = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
    z = np.arctanh(r) * np.sqrt(n - len(given) - 3)
    return 2 * norm.sf(abs(z))


def max_p(cov, n, i, j):
    others = [k for k in range(5) if k not in (i, j)]
    return max(fisher_z_p(cov, n, i, j, z) for r in range(4) for z in itertools.combinations(others, r))


def sigma_sweep(n=6000, seeds=8):
    p = spill_fn(1.0, -0.25, 0.04)
    for sp in (0.03, 0.05, 0.08, 0.1, 0.15):
        res = []
        for s in range(seeds):
            rng = np.random.default_rng(s)
            rc, fu, rd, eps = draw(rng, n, sp)
            rv = np.maximum(fu / rc * (1 + eps), 1e-6)
            spill = (rng.random(n) < p(fu, rd, rv)).astype(float)
            x = np.c_[np.log(rc), np.log(fu), np.log(rd), np.log(rv), spill]
            cov = np.cov(x.T)
            res.append((max_p(cov, n, 0, 4), max_p(cov, n, 3, 4)))
        res = np.array(res)
        print(sp, "RC-S max p", np.round(res[:, 0], 3), "RV-S max p", np.round(res[:, 1], 4))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("coefficients", nargs="*", type=float, help="a b c for threshold a*rd+b and width c")
    ap.add_argument("--search", action="store_true")
    ap.add_argument("--sigma", action="store_true")
    args = ap.parse_args()
    if args.search:
        search()
    elif args.sigma:
        sigma_sweep()
    else:
        a, b, c = args.coefficients if len(args.coefficients) == 3 else (1.0, -0.25, 0.04)
        show(a, b, c)


if __name__ == "__main__":
    main()
