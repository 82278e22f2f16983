"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (verdicts are listed in the
terminal summary) or standalone with ``python3 -m tests.test_acceptance``.
"""
import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
from sklearn.metrics import adjusted_rand_score

from consclust import (BasicPartitionSet, GenerationConfig, Partition, base_kmeans,
                       build_coassociation, constrained_fuse, cor_fuse, encode_binary,
                       ensemble_agreement, generate_rps, iec_fuse, io, kcc_fuse, nmi, sec_fuse_dense,
                       sec_fuse_sparse, weighted_kmeans)
from consclust.cli import main as cli_main
from consclust.cor import augment_flip, flip_kl_objective, holoentropy
from consclust.generate import kmeans_fit, standardize
from consclust.iec import augmented, marginalized_map, marginalized_representation
from consclust.kcc import categorical_utility, kcc_distance, kcc_objective, mu, utility
from consclust.sec import trace_value, weighted_objective

from ._helpers import all_partitions, identical_bps, random_bps, three_gaussians

RESULTS = []


def verdict(number, title, ok, detail, elapsed=None, budget=None):
    if budget is not None:
        ok = ok and elapsed < budget
        detail = f"{detail}; {elapsed:.1f}s (budget {budget}s)"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def warm_up():
    # keep one-off JIT compilation out of the timed sections
    rng = np.random.default_rng(0)
    bps = random_bps(rng, 12, 3)
    kcc_fuse(bps, 2, restarts=1)
    sec_fuse_sparse(bps, 2, restarts=1)
    build_coassociation(bps)
    cor_fuse(bps, 2, restarts=1)
    base_kmeans(rng.normal(size=(10, 2)), 2, restarts=1)


warm_up()


def test_criterion_01_factorization():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    bad = 0
    for i in range(200):
        n, r = int(rng.integers(2, 51)), int(rng.integers(1, 11))
        bps = random_bps(rng, n, r, kmax=6, missing=0.3 if i % 2 else 0.0, cover_all=False)
        B = encode_binary(bps).toarray().astype(np.int64)
        bad += not np.array_equal(build_coassociation(bps), B @ B.T)
    ok = verdict(1, "S == B B' exactly", bad == 0, f"{200 - bad}/200 ensembles equal",
                 time.perf_counter() - t0, 5)
    assert ok


KINDS = ["uc", "uh", "ucos", "ulp:3"]


def test_criterion_02_kcc_equivalence():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    parts = list(all_partitions(6, 2))
    mismatched = 0
    spread = 0.0
    for _ in range(50):
        bps = random_bps(rng, 6, 3, kmax=3)
        for kind in KINDS:
            objs = np.array([kcc_objective(bps, p, kind, smooth=False) for p in parts])
            utils = np.array([ensemble_agreement(Partition(p), bps, kind) for p in parts])
            argmin = set(np.flatnonzero(objs <= objs.min() + 1e-9))
            argmax = set(np.flatnonzero(utils >= utils.max() - 1e-9))
            mismatched += argmin != argmax
            if kind == "uc":
                spread = max(spread, float(np.ptp(objs + 6 * utils)))
    ok = verdict(2, "argmax utility == argmin K-means objective", mismatched == 0 and spread <= 1e-9,
                 f"{mismatched} set mismatches over 200 (instance, utility) pairs; Uc constant spread {spread:.2e}",
                 time.perf_counter() - t0, 30)
    assert ok


def test_criterion_03_utility_table():
    rng = np.random.default_rng(3)
    worst_lp, worst_uh, worst_uc = 0.0, 0.0, 0.0
    for _ in range(100):
        bps = random_bps(rng, 20, 4, kmax=4)
        pi = Partition(rng.integers(0, 3, size=20))
        for pi_i in bps.partitions:
            worst_lp = max(worst_lp, abs(utility(pi, pi_i, "ulp:2") - utility(pi, pi_i, "ucos")))
            worst_uc = max(worst_uc, abs(utility(pi, pi_i, "uc") - categorical_utility(pi, pi_i)))
        coding = encode_binary(bps)
        widths = coding.widths
        B = coding.toarray()
        m = np.concatenate([rng.dirichlet(np.ones(w)) for w in widths])
        for b in B[:5]:
            worst_lp = max(worst_lp, abs(kcc_distance(b, m, widths, "ulp:2") - kcc_distance(b, m, widths, "ucos")))
            exact = -np.log(m[b == 1]).sum()
            worst_uh = max(worst_uh, abs(kcc_distance(b, m, widths, "uh", smooth=False) - exact))
        v = rng.dirichlet(np.ones(4))
        worst_lp = max(worst_lp, abs(mu(v, "ulp:2") - mu(v, "ucos")))
    ok = worst_lp <= 1e-12 and worst_uh <= 1e-12 and worst_uc <= 1e-12
    verdict(3, "utility table consistency", ok,
            f"|ULp(2)-Ucos| {worst_lp:.1e}, |UH - (-sum log m)| {worst_uh:.1e}, |Uc - category utility| {worst_uc:.1e}")
    assert ok


def test_criterion_04_sec():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    spread = 0.0
    for i in range(50):
        n = int(rng.integers(3, 8))
        bps = random_bps(rng, n, int(rng.integers(1, 5)), kmax=3, missing=0.15 if i % 2 else 0.0)
        S = build_coassociation(bps)
        totals = [weighted_objective(bps, p) + trace_value(S, p) for p in all_partitions(n)]
        spread = max(spread, float(np.ptp(totals)))
    X, truth = three_gaussians(np.random.default_rng(41))
    bps = generate_rps(X, GenerationConfig(r=100, seed=41))
    S = build_coassociation(bps)
    dense = sec_fuse_dense(bps, 3, seed=0)
    sparse = sec_fuse_sparse(bps, 3, seed=0)
    td, ts = trace_value(S, dense.labels), trace_value(S, sparse.labels)
    gap = abs(td - ts) / max(td, ts)
    nd, ns = nmi(dense.partition, truth), nmi(sparse.partition, truth)
    ok = spread <= 1e-9 and gap <= 0.02 and nd >= 0.9 and ns >= 0.9
    ok = verdict(4, "spectral/weighted K-means complementarity", ok,
                 f"constant spread {spread:.1e}; trace gap {100 * gap:.2f}%; NMI dense {nd:.3f} sparse {ns:.3f}",
                 time.perf_counter() - t0, 60)
    assert ok


def test_criterion_05_iec():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    rel = 0.0
    for _ in range(20):
        coding = encode_binary(random_bps(rng, 50, 6))
        B_aug = augmented(coding)
        Q = marginalized_representation(coding, s=0.0, ridge=1e-5)
        rel = max(rel, np.linalg.norm(Q - B_aug) / np.linalg.norm(B_aug))
    coding = encode_binary(BasicPartitionSet(rng.integers(0, 3, size=(30, 4)), (3, 3, 3, 3)))
    B_aug = augmented(coding)
    W = marginalized_map(coding, s=0.2, ridge=1e-5).W
    mc = np.random.default_rng(55)
    d = B_aug.shape[1]
    U, V = np.zeros((d, d)), np.zeros((d, d))
    draws = 10_000
    for _ in range(draws):
        keep = mc.random(B_aug.shape) >= 0.2
        keep[:, -1] = True
        Bt = B_aug * keep
        U += B_aug.T @ Bt
        V += Bt.T @ Bt
    W_mc = (U / draws) @ np.linalg.inv(V / draws + 1e-5 * np.eye(d))
    dist = float(np.linalg.norm(W_mc - W))
    ok = verdict(5, "marginalised denoising closed form", rel <= 1e-3 and dist <= 0.05,
                 f"s=0 relative error {rel:.1e}; Monte-Carlo Frobenius distance {dist:.4f} ({coding.n}x{coding.d} coding)",
                 time.perf_counter() - t0, 60)
    assert ok


def planted_outliers(seed):
    rng = np.random.default_rng(seed)
    truth = np.repeat(np.arange(3), 20)[:58]
    base = identical_bps(truth, 50, rng, relabel=True)
    noise = rng.integers(0, 3, size=(2, 50))
    return BasicPartitionSet(np.vstack([base.labels, noise]), base.ks), truth


def test_criterion_06_cor():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    gap = 0.0
    for _ in range(100):
        bps = random_bps(rng, int(rng.integers(5, 40)), int(rng.integers(1, 8)), kmax=4)
        labels = rng.integers(0, int(rng.integers(1, 5)), size=bps.n)
        B = encode_binary(bps).toarray()
        rhs = sum((labels == k).sum() * holoentropy(B[labels == k]) for k in np.unique(labels))
        gap = max(gap, abs(flip_kl_objective(augment_flip(bps), labels) - rhs))
    hits = 0
    for trial in range(20):
        bps, truth = planted_outliers(1000 + trial)
        out = cor_fuse(bps, 3, seed=trial)
        inl = np.setdiff1d(np.arange(58), out.outliers)
        hits += set(out.outliers) >= {58, 59} and nmi(Partition(out.labels[inl]), Partition(truth[inl])) == 1.0
    ok = verdict(6, "flip bridge and planted outliers", gap <= 1e-9 and hits >= 19,
                 f"max |KL - sum n_k HL| {gap:.1e}; planted outliers recovered in {hits}/20 trials",
                 time.perf_counter() - t0, 60)
    assert ok


def test_criterion_07_constrained():
    same = 0
    perfect = 0
    for seed in range(10):
        rng = np.random.default_rng(70 + seed)
        X, truth = three_gaussians(rng, n_per=50, sep=10.0)
        labelled = rng.random(150) < 0.3
        side = np.where(labelled, truth.labels, -1)
        base = base_kmeans(standardize(X), 3, seed=seed, restarts=10)
        free = constrained_fuse(X, Partition(side, 3), 3, 0.0, seed=seed)
        same += np.array_equal(free.labels, base.labels)
        out = constrained_fuse(X, Partition(side, 3), 3, 1e3, seed=seed)
        perfect += adjusted_rand_score(truth.labels[labelled], out.labels[labelled]) == 1.0
    ok = verdict(7, "partition-level constraints", same == 10 and perfect == 10,
                 f"lambda=0 bitwise equal in {same}/10; lambda=1e3 ARI=1 on labelled points in {perfect}/10")
    assert ok


def test_criterion_08_more_partitions_help():
    means = {5: [], 20: [], 100: []}
    bp_nmi = []
    for s in range(10):
        X, truth = three_gaussians(np.random.default_rng(100 + s), n_per=100, sep=4.0)
        full = generate_rps(X, GenerationConfig(r=100, seed=s))
        bp_nmi.append(np.mean([nmi(p, truth) for p in full.partitions]))
        for r in means:
            bps = BasicPartitionSet(full.labels[:, :r], full.ks[:r])
            means[r].append(nmi(kcc_fuse(bps, 3, "uc", seed=s).partition, truth))
    m = {r: float(np.mean(v)) for r, v in means.items()}
    bp = float(np.mean(bp_nmi))
    ok = m[20] >= m[5] - 0.02 and m[100] >= m[20] - 0.02 and m[100] > bp
    verdict(8, "consensus improves with r", ok,
            f"mean NMI r=5 {m[5]:.3f}, r=20 {m[20]:.3f}, r=100 {m[100]:.3f}; mean basic-partition NMI {bp:.3f}")
    assert ok


def _violations(trace, rel=1e-9):
    tr = np.asarray(trace, dtype=np.float64)
    if tr.size < 2:
        return 0
    return int((np.diff(tr) > rel * max(1.0, abs(tr[0]))).sum())


def test_criterion_09_monotone_traces():
    rng = np.random.default_rng(9)
    t0 = time.perf_counter()
    bad = {}
    runs = 0
    for i in range(1000):
        n, r = int(rng.integers(8, 40)), int(rng.integers(2, 8))
        bps = random_bps(rng, n, r, kmax=5, missing=0.2 if i % 3 == 0 else 0.0)
        K = int(rng.integers(2, 5))
        seed = int(rng.integers(1 << 30))
        X = rng.normal(size=(n, 3))
        side = np.where(rng.random(n) < 0.3, rng.integers(0, K, size=n), -1)
        side[0] = 0
        kind = KINDS[i % len(KINDS)]
        traces = {
            f"kcc-{kind}": kcc_fuse(bps, K, kind, seed=seed, restarts=1).objective_trace,
            "sec-sparse": sec_fuse_sparse(bps, K, seed=seed, restarts=1).objective_trace,
            "iec": iec_fuse(bps, K, seed=seed, restarts=1).objective_trace,
            "cor": cor_fuse(bps, K, seed=seed, restarts=1).objective_trace,
            "kmeans": kmeans_fit(X, K, seed=seed, restarts=1).trace,
            "weighted": weighted_kmeans(X, rng.random(n) + 0.1, K, seed=seed, restarts=1).objective_trace,
            "constrained": constrained_fuse(X, Partition(side), K, 5.0, seed=seed, restarts=1).objective_trace,
        }
        if i % 10 == 0:
            traces["sec-dense"] = sec_fuse_dense(bps, K, seed=seed, restarts=1).objective_trace
        for name, tr in traces.items():
            runs += 1
            v = _violations(tr)
            if v:
                bad[name] = bad.get(name, 0) + v
    total = sum(bad.values())
    ok = verdict(9, "monotone objective traces", total == 0,
                 f"{total} violations over {runs} solver runs on 1000 instances {bad or ''}".rstrip(),
                 time.perf_counter() - t0, None)
    assert ok


def _write_gaussians(path, seed):
    X, truth = three_gaussians(np.random.default_rng(seed), n_per=50)
    with open(path, "w") as fh:
        fh.write("x,y,label\n")
        for row, t in zip(X, truth.labels):
            fh.write(f"{float(row[0])!r},{float(row[1])!r},{t}\n")


def _bytes(path):
    return Path(path).read_bytes()


def test_criterion_10_cli_determinism():
    failures = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        data = tmp / "data.csv"
        _write_gaussians(data, 10)
        common = ["--seed", "5", "--r", "40", "--label-column", "label"]
        for method in ("kcc", "sec-sparse", "sec-dense", "iec", "hac", "cor"):
            outs = {}
            for threads in ("1", "8"):
                out, bp = tmp / f"{method}-{threads}.csv", tmp / f"{method}-{threads}-bp.csv"
                code = cli_main(["pipeline", *common, "--method", method, "--k", "3", "--threads", threads,
                                 "--bp-out", str(bp), str(data), str(out)])
                if code:
                    failures.append(f"{method} pipeline exit {code}")
                    continue
                outs[threads] = (_bytes(bp), _bytes(out))
            bp2, out2 = tmp / f"{method}-gen.csv", tmp / f"{method}-fused.csv"
            cli_main(["generate", *common, str(data), str(bp2)])
            cli_main(["fuse", "--seed", "5", "--method", method, "--k", "3", str(bp2), str(out2)])
            if outs.get("1") != outs.get("8"):
                failures.append(f"{method}: threads 1 != 8")
            if outs.get("1") != (_bytes(bp2), _bytes(out2)):
                failures.append(f"{method}: pipeline != generate + fuse")
            rep_a = json.loads((tmp / f"{method}-1.csv.json").read_text())
            rep_b = json.loads((tmp / f"{method}-fused.csv.json").read_text())
            for rep in (rep_a, rep_b):
                rep.pop("wall_time_s")
                rep.pop("metrics", None)
            if rep_a != rep_b:
                failures.append(f"{method}: reports differ")
        bps, _ = planted_outliers(3)
        bp = tmp / "planted.csv"
        io.write_bps(bp, bps)
        runs = []
        for threads in ("1", "8"):
            out = tmp / f"planted-{threads}.csv"
            cli_main(["fuse", "--method", "cor", "--k", "3", "--threads", threads, str(bp), str(out)])
            runs.append(_bytes(out))
        if runs[0] != runs[1]:
            failures.append("planted cor: threads 1 != 8")
    ok = verdict(10, "CLI determinism and composition", not failures,
                 "; ".join(failures) or "pipeline == generate + fuse and threads 1 == 8 for all six methods")
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
