"""One test per acceptance criterion; each records a PASS/FAIL line."""
from __future__ import annotations

import random
import time

from coarse_ends.coarsemaps import geodesic_interpolate, interpolation_gap
from coarse_ends.cones import FiniteComplex, planted_complex, points_complex, verify_cone_bijection
from coarse_ends.ends import ends_profile, same_end, stabilized_end_count
from coarse_ends.obstruction import (
    ADVERSARIAL,
    Letter,
    NoRefutation,
    candidate_family,
    crossing_word,
    reduce_word,
    reduce_word_randomly,
    refute_properness,
    stability_scan,
)
from coarse_ends.space import StaircaseSpace, build_space
from coarse_ends.trees import (
    TreeOracle,
    deep_leaves,
    homotopy_witness,
    pi0_equivalent,
    random_ray,
    random_tree,
    six_point_gap,
    tree_geodesic,
)

from conftest import nx_unbounded_count, record


def _timed(f):
    t0 = time.perf_counter()
    out = f()
    return out, time.perf_counter() - t0


def test_criterion_01_line_two_ends():
    line = build_space("line")
    prof, dt = _timed(lambda: ends_profile(line, 0, 50, 120))
    count = stabilized_end_count(prof)
    ok = set(prof.counts) == {2} and count.count == 2 and dt < 1.0
    record(1, ok, f"line: counts {set(prof.counts)} at R=1..50, stabilized {count.count}, {dt:.2f}s (< 1s)")
    assert ok


def test_criterion_02_grid_one_end():
    grid = build_space("grid-2")
    prof, dt = _timed(lambda: ends_profile(grid, (0, 0), 20, 60))
    ok = set(prof.counts) == {1} and len(prof.counts) == 20 and dt < 10.0
    record(2, ok, f"grid-2: counts {set(prof.counts)} at R=1..20, {dt:.2f}s (< 10s)")
    assert ok


def test_criterion_03_staircase_one_end():
    s = StaircaseSpace(n_max=200)

    def run():
        prof = ends_profile(s, s.basepoint, 50, s.default_horizon(50))
        return prof, stabilized_end_count(prof)

    (prof, count), dt = _timed(run)
    ok = count.count == 1 and dt < 30.0
    record(3, ok, f"staircase n_max=200: stabilized count {count.count} from R={count.stable_from}, "
                  f"horizon {prof.horizon}, {dt:.2f}s (< 30s)")
    assert ok


def test_criterion_04_free_group_growth():
    tree = build_space("regular-tree-4")
    prof = ends_profile(tree, (), 4, 6)
    count = stabilized_end_count(prof, min_radii=1)
    oracle = tuple(nx_unbounded_count(tree, (), R, 6) for R in range(1, 5))
    ok = prof.counts == (4, 12, 36, 108) == oracle and not count.stabilized
    record(4, ok, f"regular-tree-4: counts {prof.counts}, networkx oracle {oracle}, growth flag {not count.stabilized}")
    assert ok


def test_criterion_05_tree_decision_soundness():
    rng = random.Random(505)
    agree = conclusive = total = 0
    for _ in range(100):
        tree = TreeOracle(random_tree(rng, max_vertices=500, max_degree=4))
        leaves = deep_leaves(tree)
        for _ in range(10):
            a = random_ray(tree, rng, rng.choice(leaves))
            b = random_ray(tree, rng, rng.choice(leaves))
            v = pi0_equivalent(tree, a, b)
            total += 1
            if v.window_depth < 2:
                continue
            s1 = geodesic_interpolate(a, tree.space, root=tree.root)
            s2 = geodesic_interpolate(b, tree.space, root=tree.root)
            check = same_end(tree.space, s1, s2, v.window_depth - 1, paths=False)
            if check.relation == "inconclusive":
                continue
            conclusive += 1
            agree += check.relation == ("same" if v.equivalent else "different")
    ok = conclusive > 0 and agree == conclusive
    record(5, ok, f"random trees: {agree}/{conclusive} conclusive pairs agree ({total} pairs tested)")
    assert ok


def test_criterion_06_homotopy_witnesses():
    rng = random.Random(606)
    passed = 0
    for _ in range(50):
        tree = TreeOracle(random_tree(rng))
        w = homotopy_witness(tree, random_ray(tree, rng))
        cert = w.certificate
        finite = all(isinstance(x, int) for x in list(cert.U.values()) + list(cert.V.values()))
        passed += finite and cert.passes and cert.u_within(w.A)
    ok = passed == 50
    record(6, ok, f"homotopy witnesses: {passed}/50 certificates pass (U_R <= (A+1)R, balls confined)")
    assert ok


def test_criterion_07_staircase_refutation():
    s = StaircaseSpace(n_max=80)
    results = []
    for name in ADVERSARIAL:
        phi = candidate_family(s, name, 70)
        for A in (1, 2, 3):
            scan = stability_scan(s, phi, A, (20, 70))
            ok = bool(scan.stable) and scan.facts_hold() and not scan.violations
            if ok:
                w = refute_properness(s, phi, scan)
                ok = w.image_radius <= w.bound and w.lattice_spread == 70 - scan.threshold
            results.append(ok)
    flat = StaircaseSpace(n_max=80, steps="constant")
    control = candidate_family(flat, "top-crosser", 70)
    refuted = False
    for A in (1, 2, 3):
        try:
            refute_properness(flat, control, stability_scan(flat, control, A, (20, 70)))
            refuted = True
        except (NoRefutation, ValueError):
            pass
    ok = all(results) and len(ADVERSARIAL) >= 5 and not refuted
    record(7, ok, f"staircase: {sum(results)}/{len(results)} (family, A) runs refuted over rows 20-70 "
                  f"with {len(ADVERSARIAL)} generators; negative control refuted: {refuted}")
    assert ok


def test_criterion_08_cone_bijection():
    cases = {
        1: FiniteComplex(((0,), (1,)), ((0, 1),)),
        2: points_complex([0, 1]),
        3: planted_complex(3),
        5: planted_complex(5, edges=False),
    }
    lines = []
    ok = True
    for k, X in cases.items():
        rep, dt = _timed(lambda X=X: verify_cone_bijection(X))
        good = rep.components == k and rep.ends == k and rep.separated and dt < 60
        ok &= good
        lines.append(f"k={k}: ends {rep.ends} ({dt:.1f}s)")
    record(8, ok, "cones: " + ", ".join(lines))
    assert ok


def _six_point_instance(tree, verts, rng, R):
    """Draw points until the five hypotheses hold; y2 is chosen among the valid spots."""
    d = tree.distance
    while True:
        x1, x3 = rng.choice(verts), rng.choice(verts)
        near1 = [v for v in verts if d(v, x1) < R]
        near3 = [v for v in verts if d(v, x3) < R]
        y1, y3 = rng.choice(near1), rng.choice(near3)
        x2 = rng.choice(tree_geodesic(tree, x1, x3))
        spots = [
            y2 for y2 in tree_geodesic(tree, y1, y3)
            if six_point_gap(tree, x1, x2, x3, y1, y2, y3, R)[0]
        ]
        if spots:
            return x1, x2, x3, y1, rng.choice(spots), y3


def test_criterion_09_tree_lemmas():
    rng = random.Random(909)
    trees = []
    for _ in range(20):
        t = TreeOracle(random_tree(rng, max_vertices=120, branch_depth=15))
        trees.append((t, list(t.space.vertices())))
    concat_bad = concat_n = 0
    while concat_n < 10**4:
        t, verts = rng.choice(trees)
        x1, x2, x3 = (rng.choice(verts) for _ in range(3))
        if set(tree_geodesic(t, x1, x2)) & set(tree_geodesic(t, x2, x3)) != {x2}:
            continue
        concat_n += 1
        concat_bad += t.distance(x1, x3) != t.distance(x1, x2) + t.distance(x2, x3)
    cover_bad = 0
    for _ in range(10**4):
        t, verts = rng.choice(trees)
        xs = [rng.choice(verts) for _ in range(rng.randint(2, 6))]
        covered = set()
        for a, b in zip(xs, xs[1:]):
            covered.update(tree_geodesic(t, a, b))
        cover_bad += not set(tree_geodesic(t, xs[0], xs[-1])) <= covered
    gap_bad = 0
    for n in range(10**4):
        t, verts = trees[n % len(trees)]
        R = rng.randint(1, 4)
        pts = _six_point_instance(t, verts, rng, R)
        holds, gap = six_point_gap(t, *pts, R)
        assert holds
        gap_bad += gap >= 2 * R
    ok = concat_bad == cover_bad == gap_bad == 0
    record(9, ok, f"tree lemmas: concatenation {concat_bad} violations / {concat_n}, "
                  f"geodesic cover {cover_bad} / 10000, six-point gap {gap_bad} / 10000")
    assert ok


def test_criterion_10_interpolation_contract():
    rng = random.Random(1010)
    bad = 0
    for n in range(100):
        tree = TreeOracle(random_tree(rng))
        ray = random_ray(tree, rng, subsample=3)
        star = geodesic_interpolate(ray, tree.space)
        A = ray.max_step(tree.space)
        A_star = star.max_step(tree.space)
        unit = A_star <= 1
        matched = all(star.samples[a] == s for a, s in zip(star.anchors, ray.samples))
        close = interpolation_gap(ray, star, tree.space) <= A + A_star
        bad += not (unit and matched and close)
    ok = bad == 0
    record(10, ok, f"interpolation: {100 - bad}/100 rays unit-step, anchored and within A + A'")
    assert ok


def test_criterion_11_word_algebra():
    rng = random.Random(1111)
    word_bad = 0
    for _ in range(10**3):
        w = tuple(Letter(rng.choice("fb"), rng.randint(1, 4)) for _ in range(rng.randint(0, 30)))
        r = reduce_word(w)
        word_bad += reduce_word(r) != r
        word_bad += any(reduce_word_randomly(w, random.Random(rng.random())) != r for _ in range(3))
    s = StaircaseSpace(n_max=80)
    rows = []
    for name in ADVERSARIAL:
        A = rng.choice((1, 2, 3))
        scan = stability_scan(s, candidate_family(s, name, 70), A, (20, 70))
        rows += [(row, A) for row in scan.rows.values()]
    sample = rng.sample(rows, 100)
    split_bad = 0
    for row, A in sample:
        cuts = [p for p, v in enumerate(row.path) if v.region != "step"]
        pts = sorted(rng.sample(cuts, min(5, len(cuts))))
        pieces = [row.path[a:b + 1] for a, b in zip([0] + pts, pts + [len(row.path) - 1])]
        glued = sum((crossing_word(s, p, A, check=False).letters for p in pieces), ())
        whole = crossing_word(s, row.path, A, check=False).letters
        split_bad += reduce_word(glued) != reduce_word(whole)
    ok = word_bad == split_bad == 0
    record(11, ok, f"word algebra: {word_bad} idempotence/confluence failures on 1000 words, "
                   f"{split_bad} subdivision failures on {len(sample)} rows")
    assert ok
