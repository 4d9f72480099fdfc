"""Monte Carlo and exhaustive verification experiments.

Each ``verify_*``/``estimate_*`` function is a pure function of its
configuration and seed and returns a :class:`Report`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats

from . import _kernels as K
from .algebra import (
    MixerElement,
    SitePermutation,
    canonical_key,
    cycle_decomposition,
    evaluate_word,
)
from .bfs import SAFETY_RADIUS, bfs_ball_elements, bfs_distance
from .chain import (
    DEFAULT_RETURN_CAP,
    return_time_sample,
    simple_walk_local_time_table,
    trajectory_rng,
)
from .exact import mixer_visit_tails, srw_local_time_tails
from .report import COLUMNS, Check, Report
from .words import (
    cycle_word,
    cycle_word_bound,
    lower_bound,
    moves,
    transposition_word,
    upper_bound,
    upper_bound_word,
)

DEFAULT_GRID = tuple(2**k for k in range(8, 17))
FIT_MIN_T = 2**10
MIN_STABLE_TRIALS = 100
TEST_LEVEL = 1e-3
SIGMAS = 3.0
# slack constant in the conditional-variance band (k-1)/2 +- (C sqrt(k) + 9)
VARIANCE_SLACK_C = 1.0
MIN_BIN = 500


@dataclass
class ExperimentConfig:
    seed: int = 0
    trials: int = 2000
    t_grid: tuple[int, ...] = DEFAULT_GRID
    probe_sites: tuple[int, ...] = ()
    output_format: str = "json"
    output_path: str | None = None
    workers: int = 1
    radius: int = 8
    tolerances: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.t_grid = tuple(int(t) for t in self.t_grid)
        self.probe_sites = tuple(int(z) for z in self.probe_sites)
        if not self.t_grid:
            raise ValueError("t_grid must be non-empty")
        if any(b <= a for a, b in zip(self.t_grid, self.t_grid[1:])) or self.t_grid[0] < 0:
            raise ValueError("t_grid must be strictly increasing and non-negative")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output_format must be csv or json")

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("output_path")
        d["t_grid"] = list(self.t_grid)
        d["probe_sites"] = list(self.probe_sites)
        return d


# -- batch simulation --------------------------------------------------------


def _chunks(n: int, size: int) -> list[range]:
    return [range(i, min(i + size, n)) for i in range(0, n, size)]


def _fan_out(fn: Callable[[range], Any], n: int, workers: int, chunk: int = 64) -> list[Any]:
    parts = _chunks(n, chunk)
    if workers == 1 or len(parts) == 1:
        return [fn(p) for p in parts]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, parts))


def mixer_batch(
    t_max: int,
    checkpoints: Sequence[int],
    probes: Sequence[int],
    seed: int,
    n: int,
    *,
    first_index: int = 0,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run trajectories ``first_index .. first_index + n - 1``.

    Returns ``(ckpt, visits, disp)`` stacked along a leading trajectory axis,
    ordered by trajectory index.
    """
    ck = np.asarray(sorted(set(checkpoints)), dtype=np.int64)
    pr = np.asarray(probes, dtype=np.int64)

    def work(idx: range):
        out = [K.run_mixer(trajectory_rng(seed, first_index + i), t_max, ck, pr, 0) for i in idx]
        return (
            np.stack([o[0] for o in out]),
            np.stack([o[1] for o in out]),
            np.stack([o[2] for o in out]),
        )

    parts = _fan_out(work, n, workers)
    return tuple(np.concatenate([p[j] for p in parts]) for j in range(3))


def srw_batch(
    t_max: int, checkpoints: Sequence[int], probes: Sequence[int], seed: int, n: int, *, workers: int = 1
) -> np.ndarray:
    def work(idx: range):
        return np.stack(
            [simple_walk_local_time_table(t_max, probes, checkpoints, seed, i) for i in idx]
        )

    return np.concatenate(_fan_out(work, n, workers))


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    m = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return m, se


def _finite(x: float) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


# -- escape exponent ---------------------------------------------------------


def fit_power_law(t: Sequence[float], y: Sequence[float]) -> dict[str, Any]:
    """Least squares of ``log y`` on ``log t``."""
    lt, ly = np.log(np.asarray(t, float)), np.log(np.asarray(y, float))
    if len(lt) < 2:
        return {"slope": None, "intercept": None, "slope_se": None, "prefactor": None, "residuals": []}
    res = stats.linregress(lt, ly)
    resid = ly - (res.intercept + res.slope * lt)
    return {
        "slope": float(res.slope),
        "intercept": float(res.intercept),
        "slope_se": _finite(res.stderr) if len(lt) > 2 else None,
        "prefactor": float(math.exp(res.intercept)),
        "r_squared": float(res.rvalue**2),
        "residuals": [float(r) for r in resid],
    }


SLOPE_BANDS = {
    "X": (0.70, 0.80),
    "d_lower": (0.70, 0.80),
    "d_upper": (0.70, 0.80),
    "cov": (0.45, 0.55),
}


def estimate_exponent(cfg: ExperimentConfig, fit_min_t: int = FIT_MIN_T) -> Report:
    """Grow ``E[X_t]``, the distance sandwich and ``E[Cov]`` along ``cfg.t_grid``
    and fit their log-log slopes.

    ``d_lower = ceil(X_t / 2)`` and ``d_upper = 2 Cov(S_t, sigma_t) + 5 X_t``
    bracket the word distance of the state, so their slopes pin its growth.
    """
    grid = list(cfg.t_grid)
    ckpt, _, _ = mixer_batch(grid[-1], grid, [], cfg.seed, cfg.trials, workers=cfg.workers)
    rows = []
    means: dict[str, list[float]] = {k: [] for k in SLOPE_BANDS}
    names = {"X": K.C_X, "d_lower": K.C_DLO, "d_upper": K.C_DHI, "cov": K.C_COV}
    in_fit = [t >= fit_min_t for t in grid]
    warnings = []
    if sum(in_fit) < 2:
        warnings.append(f"fewer than two grid times >= {fit_min_t}; fitting over the whole grid")
        in_fit = [True] * len(grid)
    for i, t in enumerate(grid):
        row: dict[str, Any] = {"t": t, "trials": cfg.trials, "in_fit": in_fit[i]}
        for key, col in names.items():
            m, se = _mean_se(ckpt[:, i, col].astype(float))
            row[f"mean_{key}"] = m
            row[f"se_{key}"] = _finite(se)
            means[key].append(m)
        rows.append(row)

    fits = {}
    for key in SLOPE_BANDS:
        ts = [t for t, f in zip(grid, in_fit) if f]
        ys = [y for y, f in zip(means[key], in_fit) if f]
        if min(ys, default=0) <= 0:
            fits[key] = fit_power_law([], [])
            warnings.append(f"mean {key} not positive on the fit range; no fit")
        else:
            fits[key] = fit_power_law(ts, ys)

    unstable = cfg.trials < MIN_STABLE_TRIALS
    if unstable:
        warnings.append(
            f"unstable fit: {cfg.trials} trials < {MIN_STABLE_TRIALS}; slope checks are inconclusive"
        )
    checks = []
    bad = [r["t"] for r in rows if not r["mean_d_lower"] <= r["mean_d_upper"]]
    checks.append(Check("sandwich_coherence", "fail" if bad else "pass",
                        f"mean d_lower > mean d_upper at t={bad}" if bad else "mean d_lower <= mean d_upper at every t"))
    bad = [r["t"] for r in rows if not r["mean_X"] / 2 <= r["mean_d_upper"]]
    checks.append(Check("half_X_below_upper", "fail" if bad else "pass",
                        f"violated at t={bad}" if bad else "mean X/2 <= mean d_upper at every t"))
    for key, (lo, hi) in SLOPE_BANDS.items():
        lo, hi = cfg.tol(f"slope_{key}_low", lo), cfg.tol(f"slope_{key}_high", hi)
        s = fits[key]["slope"]
        if s is None:
            status = "inconclusive"
        elif unstable:
            status = "inconclusive"
        else:
            status = "pass" if lo <= s <= hi else "fail"
        checks.append(Check(f"slope_{key}", status, f"slope={s} band=[{lo}, {hi}]"))

    params = {"fits": fits, "fit_min_t": fit_min_t, "unstable": unstable}
    return Report("exponent", cfg.echo(), rows, COLUMNS["exponent"], params, checks, warnings)


# -- exhaustive sandwich -----------------------------------------------------


def verify_sandwich(radius: int, *, safety_radius: int = SAFETY_RADIUS, budget: int | None = None) -> Report:
    """Check ``lower_bound <= exact distance <= constructive word length`` on a whole ball.

    For ``(g, sigma)`` the constructive word is ``upper_bound_word(0, sigma)``
    followed by ``|g|`` moves, bounded by ``2 Cov(0, sigma) + 5 X + |g|``.
    """
    elems = bfs_ball_elements(radius, safety_radius=safety_radius, budget=budget)
    per_d: dict[int, dict[str, Any]] = {}
    violations = []
    for e, d in elems:
        sigma = e.perm
        lo = lower_bound(sigma)
        bound = upper_bound(0, sigma) + abs(e.position)
        word = upper_bound_word(0, sigma) + moves(0, e.position)
        ok_word = len(word) <= bound and evaluate_word(word) == e
        r = per_d.setdefault(d, {"distance": d, "count": 0, "lo": [], "hi": [], "violations": 0})
        r["count"] += 1
        r["lo"].append(d - lo)
        r["hi"].append(len(word) - d)
        if lo > d or len(word) < d or not ok_word:
            r["violations"] += 1
            violations.append(canonical_key(e).hex())
    rows = []
    for d in sorted(per_d):
        r = per_d[d]
        rows.append({
            "distance": d,
            "count": r["count"],
            "min_lower_slack": min(r["lo"]),
            "max_lower_slack": max(r["lo"]),
            "min_upper_slack": min(r["hi"]),
            "max_upper_slack": max(r["hi"]),
            "violations": r["violations"],
        })
    checks = [
        Check("sandwich", "fail" if violations else "pass",
              f"{len(violations)} violations; first keys {violations[:5]}" if violations
              else f"{len(elems)} elements, zero violations"),
    ]
    if radius >= 1:
        n1 = per_d.get(1, {"count": 0})["count"]
        checks.append(Check("generators_at_distance_1", "pass" if n1 == 4 else "fail", f"{n1} elements at distance 1"))
    params: dict[str, Any] = {"ball_size": len(elems), "radius": radius}
    if radius >= 5:
        target = MixerElement(0, SitePermutation.transposition(0, 2))
        d = bfs_distance(target, radius, safety_radius=safety_radius, budget=budget)
        params["spot"] = {
            "element": "(0,<0,2>)",
            "lower": lower_bound(target.perm),
            "exact": d,
            "upper": upper_bound(0, target.perm),
        }
        checks.append(Check("spot_transposition_0_2", "pass" if d == 5 else "fail", f"exact distance {d}, expected 5"))
    return Report("sandwich", {"radius": radius}, rows, COLUMNS["sandwich"], params, checks, [])


# -- word synthesis ----------------------------------------------------------


def random_permutation(rng: np.random.Generator, max_support: int) -> SitePermutation:
    """Random permutation of a random subset of ``[-max_support, max_support]``."""
    sites = np.arange(-max_support, max_support + 1)
    k = int(rng.integers(0, len(sites) + 1))
    chosen = rng.choice(sites, size=k, replace=False)
    return SitePermutation(zip(chosen.tolist(), rng.permutation(chosen).tolist()))


def verify_words(n_random: int, max_support: int, seed: int = 0) -> Report:
    rows = []
    failures = []
    tw = {"kind": "transposition", "size": max_support, "samples": 0, "max_length": 0,
          "max_bound": 0, "max_length_over_bound": 0.0, "failures": 0}
    for h in [h for h in range(-max_support, max_support + 1) if h != 0]:
        w = transposition_word(h)
        bound = 4 * abs(h) - 3
        tw["samples"] += 1
        tw["max_length"] = max(tw["max_length"], len(w))
        tw["max_bound"] = max(tw["max_bound"], bound)
        tw["max_length_over_bound"] = max(tw["max_length_over_bound"], len(w) / bound)
        if len(w) != bound or evaluate_word(w) != MixerElement(0, SitePermutation.transposition(0, h)):
            tw["failures"] += 1
            failures.append(f"transposition h={h}")
    rows.append(tw)

    by_size: dict[int, dict[str, Any]] = {}
    cyc = {"kind": "cycle", "size": max_support, "samples": 0, "max_length": 0,
           "max_bound": 0, "max_length_over_bound": 0.0, "failures": 0}
    for i in range(n_random):
        rng = trajectory_rng(seed, i, stream=4)
        sigma = random_permutation(rng, max_support)
        g = int(rng.integers(-max_support, max_support + 1))
        start = MixerElement(g)
        w = upper_bound_word(g, sigma)
        bound = upper_bound(g, sigma)
        ok = len(w) <= bound and evaluate_word(w, start) == MixerElement(g, sigma)
        r = by_size.setdefault(len(sigma), {"kind": "upper_bound", "size": len(sigma), "samples": 0,
                                            "max_length": 0, "max_bound": 0,
                                            "max_length_over_bound": 0.0, "failures": 0})
        r["samples"] += 1
        r["max_length"] = max(r["max_length"], len(w))
        r["max_bound"] = max(r["max_bound"], bound)
        if bound:
            r["max_length_over_bound"] = max(r["max_length_over_bound"], len(w) / bound)
        if not ok:
            r["failures"] += 1
            failures.append(f"upper_bound seed={seed} index={i}")
        for c in cycle_decomposition(sigma):
            for anchor in (c.orbit[0], c.orbit[-1]):
                cw = cycle_word(anchor, c)
                cb = cycle_word_bound(c)
                cyc["samples"] += 1
                cyc["max_length"] = max(cyc["max_length"], len(cw))
                cyc["max_bound"] = max(cyc["max_bound"], cb)
                cyc["max_length_over_bound"] = max(cyc["max_length_over_bound"], len(cw) / cb)
                if len(cw) > cb or evaluate_word(cw, MixerElement(anchor)) != MixerElement(anchor, c.as_permutation()):
                    cyc["failures"] += 1
                    failures.append(f"cycle seed={seed} index={i} anchor={anchor}")
    rows.append(cyc)
    rows.extend(by_size[k] for k in sorted(by_size))
    checks = [Check("words", "fail" if failures else "pass",
                    f"{len(failures)} failures; first {failures[:5]}" if failures else "all words valid within bounds")]
    cfg = {"n_random": n_random, "max_support": max_support, "seed": seed}
    return Report("words", cfg, rows, COLUMNS["words"], {}, checks, [])


# -- first-return claim ------------------------------------------------------


CLAIM_TARGET = {-1: 0.25, 0: 0.5, 1: 0.25}
CLAIM_MIN_SAMPLES = 10**4


def _cp_interval(k: int, n: int) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=1 - TEST_LEVEL, method="exact")
    return float(ci.low), float(ci.high)


def _claim_samples(n: int, seed: int, step_cap: int, workers: int) -> tuple[np.ndarray, np.ndarray]:
    def work(idx: range):
        out = [return_time_sample(0, seed, i, step_cap) for i in idx]
        return np.array([o[0] for o in out], np.int64), np.array([o[1] for o in out], np.int64)

    parts = _fan_out(work, n, workers, chunk=1024)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def verify_claim(
    n_samples: int,
    seed: int = 0,
    *,
    step_cap: int = DEFAULT_RETURN_CAP,
    tolerance: float = 0.01,
    workers: int = 1,
) -> Report:
    """Displacement of tile 0 at the mixer's first return, against (1/4, 1/2, 1/4)."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    times, disp = _claim_samples(n_samples, seed, step_cap, workers)
    done = times >= 0
    n = int(done.sum())
    censored = n_samples - n
    warnings = []
    if censored / n_samples > 1e-3:
        warnings.append(f"censored fraction {censored / n_samples:.2e} exceeds 1e-3")
    rows = []
    counts = {v: int(np.sum(disp[done] == v)) for v in (-1, 0, 1)}
    for v, p in CLAIM_TARGET.items():
        lo, hi = _cp_interval(counts[v], n)
        rows.append({"cell": f"disp={v:+d}" if v else "disp=0", "count": counts[v], "total": n,
                     "frequency": counts[v] / n if n else None, "ci_low": lo, "ci_high": hi, "expected": p})
    other = n - sum(counts.values())
    # conditional law given T = l, for small l
    for ell in (2, 3, 4, 5):
        sel = done & (times == ell)
        m = int(sel.sum())
        for v, p in CLAIM_TARGET.items():
            c = int(np.sum(disp[sel] == v))
            lo, hi = _cp_interval(c, m)
            rows.append({"cell": f"T={ell},disp={v:+d}" if v else f"T={ell},disp=0", "count": c, "total": m,
                         "frequency": c / m if m else None, "ci_low": lo, "ci_high": hi, "expected": p})

    checks = [Check("support", "fail" if other else "pass",
                    f"{other} returns with displacement outside {{-1,0,1}}")]
    decisive = n >= CLAIM_MIN_SAMPLES
    freq = {v: counts[v] / n if n else math.nan for v in counts}
    for v, p in CLAIM_TARGET.items():
        ok = abs(freq[v] - p) <= tolerance
        status = ("pass" if ok else "fail") if decisive else "inconclusive"
        checks.append(Check(f"frequency_{v:+d}" if v else "frequency_0", status,
                            f"{freq[v]:.5f} vs {p} +- {tolerance} (n={n})"))
    ok = abs(freq[1] - freq[-1]) <= tolerance
    checks.append(Check("plus_minus_symmetry", ("pass" if ok else "fail") if decisive else "inconclusive",
                        f"|f(+1) - f(-1)| = {abs(freq[1] - freq[-1]):.5f}"))
    if n:
        chi = stats.chisquare([counts[-1], counts[0], counts[1]], [n / 4, n / 2, n / 4])
        pval = float(chi.pvalue)
        status = ("pass" if pval >= TEST_LEVEL else "fail") if decisive else "inconclusive"
        checks.append(Check("goodness_of_fit", status, f"chi2={chi.statistic:.3f} p={pval:.4g}"))
    else:
        chi, pval = None, None
    params = {"samples": n_samples, "censored": censored, "step_cap": step_cap,
              "chi2": float(chi.statistic) if chi is not None else None, "p_value": pval,
              "frequencies": {str(k): _finite(v) for k, v in freq.items()}}
    cfg = {"n_samples": n_samples, "seed": seed, "step_cap": step_cap, "tolerance": tolerance}
    return Report("claim", cfg, rows, COLUMNS["claim"], params, checks, warnings)


# -- visit-count domination ----------------------------------------------------


DOMINATION_PROBES = (0, 1, 4, 16)
DOMINATION_TIMES = (2**10, 2**12)


def verify_domination(
    cfg: ExperimentConfig, *, times: Sequence[int] | None = None, exact: bool = True
) -> Report:
    """Tail comparison ``P[L_2t(2z) >= k] <= P[V_t(z) >= k]`` up to 3 standard errors.

    ``cfg.trials`` runs of each process; ``k`` ranges over ``1 ..`` the 99th
    percentile of ``V_t(z)``.  With ``exact``, the report parameters also carry
    the exact tail laws' largest gap ``P[L >= k] - P[V >= k]`` on that range and
    its size in Monte Carlo standard errors at ``cfg.trials`` runs.
    """
    probes = cfg.probe_sites or DOMINATION_PROBES
    times = tuple(times or DOMINATION_TIMES)
    n = cfg.trials
    _, visits, _ = mixer_batch(max(times), times, probes, cfg.seed, n, workers=cfg.workers)
    local = srw_batch(2 * max(times), [2 * t for t in times], [2 * z for z in probes], cfg.seed, n,
                      workers=cfg.workers)
    ck = sorted(set(times))
    rows, checks, params = [], [], {"sqrt_means": []}
    sig = cfg.tol("sigmas", SIGMAS)
    for ti, t in enumerate(ck):
        for zi, z in enumerate(probes):
            V = visits[:, ti, zi]
            L = local[:, ti, zi]
            k_max = max(1, int(math.ceil(np.percentile(V, 99))))
            bad = []
            for k in range(1, k_max + 1):
                pv, pl = float(np.mean(V >= k)), float(np.mean(L >= k))
                se = math.sqrt(pv * (1 - pv) / n + pl * (1 - pl) / n)
                margin = pv + sig * se - pl
                ok = margin >= 0
                if not ok:
                    bad.append(k)
                rows.append({"z": z, "t": t, "k": k, "p_srw": pl, "p_mixer": pv, "margin": margin, "ok": ok})
            checks.append(Check(f"tail_z{z}_t{t}", "fail" if bad else "pass",
                                f"k in 1..{k_max}; violations at k={bad}" if bad else f"k in 1..{k_max}"))
            if exact:
                pv_ex = mixer_visit_tails(z, t, k_max)
                pl_ex = srw_local_time_tails(2 * z, 2 * t, k_max)
                gap = pl_ex - pv_ex
                se_ex = np.sqrt(pv_ex * (1 - pv_ex) / n + pl_ex * (1 - pl_ex) / n)
                zs = np.where(se_ex > 0, gap / np.where(se_ex > 0, se_ex, 1), 0.0)
                i = int(np.argmax(gap))
                j = int(np.argmax(zs))
                params.setdefault("exact", []).append({
                    "z": z, "t": t, "k_max": k_max,
                    "max_gap": float(gap[i]), "k_at_max_gap": i + 1,
                    "max_gap_in_se": float(zs[j]), "k_at_max_gap_in_se": j + 1,
                })
            sl, sv = np.sqrt(L), np.sqrt(V)
            ml, sel = _mean_se(sl)
            mv, sev = _mean_se(sv)
            se = math.sqrt((sel if math.isfinite(sel) else 0) ** 2 + (sev if math.isfinite(sev) else 0) ** 2)
            ok = ml <= mv + sig * se
            params["sqrt_means"].append({"z": z, "t": t, "E_sqrt_L2t_2z": ml, "E_sqrt_Vt_z": mv, "se": se})
            checks.append(Check(f"sqrt_mean_z{z}_t{t}", "pass" if ok else "fail",
                                f"E sqrt L={ml:.4f} <= E sqrt V={mv:.4f} + {sig}*{se:.4f}"))
    echo = cfg.echo() | {"probe_sites": list(probes), "times": list(ck)}
    return Report("domination", echo, rows, COLUMNS["domination"], params, checks, [])


# -- conditional law given the visit count -------------------------------------


CONDITIONAL_PROBES = (0, 1, 4)
CONDITIONAL_TIMES = (2**6, 2**8)


def variance_band(k: int, c: float = VARIANCE_SLACK_C) -> tuple[float, float]:
    centre = (k - 1) / 2
    slack = c * math.sqrt(k) + 9
    return centre - slack, centre + slack


def verify_conditional_law(cfg: ExperimentConfig, *, times: Sequence[int] | None = None) -> Report:
    """Bin ``sigma_t(z) - z`` by ``V_t(z) = k`` and compare with a lazy walk of ``k - 1`` steps.

    Bins with at least 500 samples must have ``|mean| <= 2`` and variance in
    :func:`variance_band`.  The ``k = 1`` bin must satisfy ``|disp| <= 2``
    outright, and unvisited tiles must not have moved.
    """
    probes = cfg.probe_sites or CONDITIONAL_PROBES
    times = sorted(set(times or CONDITIONAL_TIMES))
    min_bin = int(cfg.tol("min_bin", MIN_BIN))
    c = cfg.tol("variance_slack_c", VARIANCE_SLACK_C)
    _, visits, disp = mixer_batch(max(times), times, probes, cfg.seed, cfg.trials, workers=cfg.workers)
    rows, checks = [], []
    bounds = []
    for ti, t in enumerate(times):
        for zi, z in enumerate(probes):
            V, Dz = visits[:, ti, zi], disp[:, ti, zi]
            moved_unvisited = int(np.sum((V == 0) & (Dz != 0)))
            checks.append(Check(f"unvisited_fixed_z{z}_t{t}", "fail" if moved_unvisited else "pass",
                                f"{moved_unvisited} unvisited tiles displaced"))
            k1 = Dz[V == 1]
            big = int(np.sum(np.abs(k1) > 2))
            checks.append(Check(f"k1_bounded_z{z}_t{t}", "fail" if big else "pass",
                                f"{big} of {len(k1)} samples with |disp| > 2 in the k=1 bin"))
            bad = []
            for k in np.unique(V[V >= 1]):
                k = int(k)
                sample = Dz[V == k].astype(float)
                m = float(sample.mean())
                var = float(sample.var(ddof=1)) if len(sample) > 1 else math.nan
                lo, hi = variance_band(k, c)
                checked = len(sample) >= min_bin
                ok = abs(m) <= 2 and lo <= var <= hi if checked else True
                if not ok:
                    bad.append(k)
                rows.append({"z": z, "t": t, "k": k, "samples": len(sample), "mean": m, "variance": _finite(var),
                             "band_low": lo, "band_high": hi, "checked": checked, "ok": ok})
            populated = sum(1 for r in rows if r["z"] == z and r["t"] == t and r["checked"])
            checks.append(Check(f"bins_z{z}_t{t}", "fail" if bad else ("pass" if populated else "inconclusive"),
                                f"{populated} populated bins; violations at k={bad}"))
            # c E[sqrt V] - 2 P[V >= 1] <= E|disp| <= C E[sqrt V] + 2 P[V >= 1]: report the c, C that make it hold
            ex = float(np.mean(np.abs(Dz)))
            esv = float(np.mean(np.sqrt(V)))
            p1 = float(np.mean(V >= 1))
            bounds.append({
                "z": z, "t": t, "E_X_t_z": ex, "E_sqrt_V": esv, "P_V_ge_1": p1,
                "ratio": ex / esv if esv else None,
                "c_max": (ex + 2 * p1) / esv if esv else None,
                "C_min": (ex - 2 * p1) / esv if esv else None,
            })
    c_lo = [r["c_max"] for r in bounds if r["c_max"] is not None]
    c_hi = [r["C_min"] for r in bounds if r["C_min"] is not None]
    params = {
        "sqrt_visit_bounds": bounds,
        "sqrt_visit_c": min(c_lo) if c_lo else None,
        "sqrt_visit_C": max(c_hi) if c_hi else None,
        "variance_slack_c": c,
        "min_bin": min_bin,
    }
    if c_lo:
        ok = min(c_lo) > 0
        checks.append(Check("sqrt_visit_constants", "pass" if ok else "fail",
                            f"holds with c={min(c_lo):.4f}, C={max(c_hi):.4f}"))
    echo = cfg.echo() | {"probe_sites": list(probes), "times": list(times)}
    return Report("conditional", echo, rows, COLUMNS["conditional"], params, checks, [])


# -- mirror symmetry ------------------------------------------------------------


def two_sample_chi2(a: np.ndarray, b: np.ndarray, min_count: int = 20) -> tuple[float, int, float, int]:
    """Binned two-sample chi-square test on integer samples.

    Adjacent values are merged until each bin holds ``min_count`` pooled
    observations.  Returns ``(chi2, dof, p_value, bins)``.
    """
    values = np.union1d(a, b)
    ca = np.array([np.sum(a == v) for v in values])
    cb = np.array([np.sum(b == v) for v in values])
    bins_a, bins_b = [], []
    acc_a = acc_b = 0
    for x, y in zip(ca, cb):
        acc_a += x
        acc_b += y
        if acc_a + acc_b >= min_count:
            bins_a.append(acc_a)
            bins_b.append(acc_b)
            acc_a = acc_b = 0
    if acc_a + acc_b:
        if bins_a:
            bins_a[-1] += acc_a
            bins_b[-1] += acc_b
        else:
            bins_a.append(acc_a)
            bins_b.append(acc_b)
    if len(bins_a) < 2:
        return 0.0, 0, 1.0, len(bins_a)
    chi2, p, dof, _ = stats.chi2_contingency(np.array([bins_a, bins_b]), correction=False)
    return float(chi2), int(dof), float(p), len(bins_a)


def verify_mirror(cfg: ExperimentConfig, t: int = 256) -> Report:
    """Compare the chain with its mirror image using two independent batches.

    Batch A (indices ``0..N-1``) supplies ``S_t`` and ``sigma_t(1) - 1``;
    batch B (indices ``N..2N-1``) supplies ``-S_t`` and ``-(sigma_t(-1) + 1)``.
    """
    n = cfg.trials
    probes = (1, -1)
    ca, _, da = mixer_batch(t, [t], probes, cfg.seed, n, workers=cfg.workers)
    cb, _, db = mixer_batch(t, [t], probes, cfg.seed, n, first_index=n, workers=cfg.workers)
    level = cfg.tol("level", TEST_LEVEL)
    pairs = {
        "S_t": (ca[:, 0, K.C_S], -cb[:, 0, K.C_S]),
        "tile_1_vs_mirror_tile_-1": (da[:, 0, 0], -db[:, 0, 1]),
    }
    rows, checks = [], []
    for name, (x, y) in pairs.items():
        chi2, dof, p, bins = two_sample_chi2(x, y)
        ok = p >= level
        rows.append({"statistic": name, "t": t, "bins": bins, "chi2": chi2, "dof": dof, "p_value": p, "ok": ok})
        checks.append(Check(f"mirror_{name}", "pass" if ok else "fail", f"chi2={chi2:.2f} dof={dof} p={p:.4g}"))
    echo = cfg.echo() | {"t": t}
    return Report("mirror", echo, rows, COLUMNS["mirror"], {"level": level}, checks, [])
