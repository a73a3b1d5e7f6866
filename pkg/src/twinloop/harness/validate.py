"""Self-contained invariant suite behind the `validate` subcommand."""

from __future__ import annotations

import numpy as np

from ..config import RunConfig
from ..management.embedding import cosine_similarity
from ..management.library import IntentEmbedding, PolicyEmbedding, PolicyLibrary, match_policy
from ..simcore.mobility import gauss_markov_step
from ..simcore.scenarios import load_catalog
from ..simcore.topology import build_topology
from ..simcore.world import World
from ..twin.gru import gru_gradients, init_gru_params


def _check_topology_determinism() -> tuple[bool, str]:
    a = build_topology(seed=42, bs_count=12, ue_count=120, area_m2=4e6)
    b = build_topology(seed=42, bs_count=12, ue_count=120, area_m2=4e6)
    same = all(
        sa.position == sb.position and sa.capacity == sb.capacity
        for sa, sb in zip(a[0].base_stations, b[0].base_stations)
    ) and all(ua.position == ub.position for ua, ub in zip(a[1], b[1]))
    covered = all(a[0].covering_cells(ue.position) for ue in a[1])
    return same and covered, f"identical={same} covered={covered}"


def _check_gauss_markov_mean() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    alpha, mean, sigma = 0.85, 1.5, 0.4
    s = 0.0
    total = 0.0
    n = 100_000
    noise = rng.standard_normal(n)
    for i in range(n):
        s = gauss_markov_step(s, alpha, mean, sigma, noise[i])
        total += s
    emp = total / n
    ok = abs(emp - mean) / mean < 0.05
    return ok, f"empirical={emp:.4f} target={mean}"


def _check_conservation() -> tuple[bool, str]:
    from ..simcore.scenarios import scenario_by_id

    config = RunConfig(scenarios=(3,), controllers=("static",), seed=5, horizon=40)
    spec = scenario_by_id(3)
    topo, ues = build_topology(seed=5, ue_count=150)
    world = World(topo, ues, spec, config.sim, seed=5)
    worst = 0.0
    for t in range(40):
        frame = world.step(t)
        worst = max(worst, abs(frame.offered_load.sum() - frame.demand.sum()))
    return worst < 1e-9, f"max imbalance {worst:.2e}"


def _check_matcher_oracle() -> tuple[bool, str]:
    rng = np.random.default_rng(99)
    bad = 0
    for trial in range(200):
        m = int(rng.integers(1, 16))
        lib = PolicyLibrary([
            PolicyEmbedding(i, f"p{i}", rng.standard_normal(64), {}) for i in range(m)
        ])
        intent = IntentEmbedding("x", rng.standard_normal(64))
        got = match_policy(intent, lib)
        scores = [cosine_similarity(intent.vector, p.vector) for p in lib.policies]
        want = max(range(m), key=lambda i: (scores[i], -i))
        if got.policy_id != want:
            bad += 1
    return bad == 0, f"{bad} mismatches / 200"


def _check_gradients() -> tuple[bool, str]:
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        d, h, k = 3, 3, 4
        params = init_gru_params(d, h, d, seed)
        xs = rng.standard_normal((2, k, d))
        ys = rng.standard_normal((2, d))
        _, grads = gru_gradients(xs, ys, params)
        eps = 1e-5
        for name in ("wz", "uh", "wo"):
            arr = getattr(params, name)
            idx = tuple(rng.integers(0, s) for s in arr.shape)
            orig = arr[idx]
            arr[idx] = orig + eps
            lp, _ = gru_gradients(xs, ys, params)
            arr[idx] = orig - eps
            lm, _ = gru_gradients(xs, ys, params)
            arr[idx] = orig
            num = (lp - lm) / (2 * eps)
            ana = grads[name][idx]
            rel = abs(num - ana) / max(abs(num) + abs(ana), 1e-10)
            worst = max(worst, rel)
    return worst < 1e-4, f"worst relative error {worst:.2e}"


def _check_catalog() -> tuple[bool, str]:
    catalog = load_catalog()
    ok = sorted(catalog) == list(range(1, 11))
    quiet = not catalog[1].events and not catalog[1].anomaly_marks
    return ok and quiet, f"ids={sorted(catalog)} scenario1_quiet={quiet}"


def _check_run_determinism() -> tuple[bool, str]:
    from .runner import run_single
    from .training import ModelBundle

    config = RunConfig(scenarios=(1,), controllers=("static",), seed=3, horizon=120)
    a = run_single(config, 1, "static", ModelBundle(None, None, None), write_artifacts=False)
    b = run_single(config, 1, "static", ModelBundle(None, None, None), write_artifacts=False)
    return a == b, "reports equal" if a == b else "reports differ"


CHECKS = [
    ("topology determinism and coverage", _check_topology_determinism),
    ("gauss-markov stationary mean", _check_gauss_markov_mean),
    ("offered-load conservation", _check_conservation),
    ("matcher equals brute force", _check_matcher_oracle),
    ("gru analytic gradients", _check_gradients),
    ("scenario catalog shape", _check_catalog),
    ("run determinism", _check_run_determinism),
]


def run_validation() -> list[dict]:
    results = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"name": name, "passed": bool(passed), "detail": detail})
    return results
