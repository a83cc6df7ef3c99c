import csv
import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pkdnet.analysis import (
    GoAnnotation,
    bh_adjust,
    enrich,
    feature_label_correlation,
    hypergeom_tail,
    point_biserial,
    read_annotations,
    read_gene_set,
    write_enrichment,
)
from pkdnet.dataset import Dataset
from pkdnet.errors import DegenerateClass, EmptySet, InvalidCounts, InvalidP, IoError, ParseError, TargetNotSubset


# -- oracles ----------------------------------------------------------------

def exact_tail(k, K, n, N):
    return Fraction(sum(comb(K, i) * comb(N - K, n - i) for i in range(k, min(K, n) + 1)), comb(N, n))


def bh_reference(p):
    """Quadratic textbook form: q_i = min over ranks j >= rank(i) of p_(j) m / j."""
    m = len(p)
    ranked = sorted(range(m), key=lambda i: (p[i], i))
    rank = {i: r + 1 for r, i in enumerate(ranked)}
    return [min(1.0, min(p[ranked[j - 1]] * m / j for j in range(rank[i], m + 1))) for i in range(m)]


def pearson_reference(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    vx = sum((a - mx) ** 2 for a in x) / n
    vy = sum((b - my) ** 2 for b in y) / n
    return cov / (vx * vy) ** 0.5


# -- correlation ------------------------------------------------------------

def frame(cols, y, names=None):
    x = np.column_stack(cols).astype(float)
    names = names or [f"c{j}" for j in range(x.shape[1])]
    return Dataset([f"r{i}" for i in range(len(y))], names, x, y)


def test_correlation_examples():
    y = [0, 0, 1, 1]
    recs = feature_label_correlation(frame([[1, 2, 3, 4], [0, 0, 1, 1], [7, 7, 7, 7]], y,
                                           ["ramp", "self", "flat"]))
    assert [r.feature_name for r in recs] == ["self", "ramp", "flat"]
    assert recs[0].r == pytest.approx(1.0, abs=1e-12)
    assert recs[1].r == pytest.approx(0.894427, abs=1e-6)
    assert recs[2].r == 0.0


def test_correlation_tie_by_name():
    y = [0, 1, 0, 1]
    recs = feature_label_correlation(frame([[0, 1, 0, 1], [1, 0, 1, 0]], y, ["zeta", "alpha"]))
    assert [r.feature_name for r in recs] == ["alpha", "zeta"]
    assert recs[0].r == pytest.approx(-1.0)


def test_correlation_needs_both_classes():
    with pytest.raises(DegenerateClass):
        feature_label_correlation(frame([[1, 2, 3]], [1, 1, 1]))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(4, 40), elements=st.floats(-10, 10, width=64)),
       st.integers(0, 2 ** 32 - 1), st.floats(0.01, 100), st.floats(-100, 100))
def test_correlation_affine_and_sign(col, seed, a, b):
    assume(col.std() > 0.1)
    y = np.random.default_rng(seed).integers(0, 2, col.size)
    assume(0 < y.sum() < y.size)
    r = point_biserial(col[:, None], y)[0]
    assert r == pytest.approx(pearson_reference(col.tolist(), y.tolist()), abs=1e-12)
    assert abs(point_biserial((a * col + b)[:, None], y)[0] - r) <= 1e-12
    assert point_biserial(-col[:, None], y)[0] == pytest.approx(-r, abs=1e-15)
    assert abs(r) <= 1


# -- hypergeometric tail ----------------------------------------------------

def test_tail_examples():
    assert hypergeom_tail(3, 4, 5, 10) == pytest.approx(66 / 252, rel=1e-14)
    assert float(exact_tail(3, 4, 5, 10)) == pytest.approx(0.261905, abs=1e-6)
    assert hypergeom_tail(0, 3, 4, 9) == 1.0
    with pytest.raises(InvalidCounts):
        hypergeom_tail(6, 4, 5, 10)
    with pytest.raises(InvalidCounts):
        hypergeom_tail(1, 11, 5, 10)
    with pytest.raises(InvalidCounts):
        hypergeom_tail(1.5, 4, 5, 10)


def test_tail_matches_exact_rationals_small_universes():
    worst = 0.0
    for N in range(26):
        for K, n in itertools.product(range(N + 1), repeat=2):
            for k in range(min(K, n) + 1):
                exact = float(exact_tail(k, K, n, N))
                worst = max(worst, abs(hypergeom_tail(k, K, n, N) - exact) / exact)
    assert worst <= 1e-12


def test_tail_large_universe_close():
    # log-factorial rounding limits accuracy at this size; see hypergeom_tail docstring
    for k, K, n, N in [(12, 300, 150, 5000), (40, 900, 120, 10000), (3, 20, 30, 10000)]:
        exact = float(exact_tail(k, K, n, N))
        assert hypergeom_tail(k, K, n, N) == pytest.approx(exact, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 400).flatmap(lambda N: st.tuples(
    st.just(N), st.integers(0, N), st.integers(0, N))))
def test_tail_non_increasing(args):
    N, K, n = args
    tails = [hypergeom_tail(k, K, n, N) for k in range(min(K, n) + 1)]
    assert all(b <= a for a, b in zip(tails, tails[1:]))
    assert all(0 < t <= 1 for t in tails)


# -- BH ---------------------------------------------------------------------

def test_bh_examples():
    assert bh_adjust([0.01, 0.02, 0.03]) == pytest.approx([0.03, 0.03, 0.03])
    assert bh_adjust([0.2]) == [0.2]
    assert bh_adjust([0.05, 0.05]) == pytest.approx([0.05, 0.05])
    assert bh_adjust([]) == []


@pytest.mark.parametrize("bad", [[0.0], [1.2], [float("nan")], [-0.1, 0.5]])
def test_bh_rejects(bad):
    with pytest.raises(InvalidP):
        bh_adjust(bad)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(1e-300, 1.0, exclude_min=False), min_size=1, max_size=30),
       st.randoms(use_true_random=False))
def test_bh_properties(p, rnd):
    q = bh_adjust(p)
    assert q == pytest.approx(bh_reference(p), rel=1e-12)
    m = len(p)
    assert all(0 < qi <= 1 and qi >= pi / m for pi, qi in zip(p, q))
    order = sorted(range(m), key=lambda i: p[i])
    assert all(q[a] <= q[b] for a, b in zip(order, order[1:]))
    perm = list(range(m))
    rnd.shuffle(perm)
    q_perm = bh_adjust([p[i] for i in perm])
    assert q_perm == pytest.approx([q[i] for i in perm], rel=1e-15)


# -- enrichment -------------------------------------------------------------

UNIVERSE = {f"g{i}" for i in range(10)}


def annotations():
    return [
        GoAnnotation("GO:0000001", "lipidation", "process", {"g0", "g1", "g2", "g3"}),
        GoAnnotation("GO:0000002", "binding", "function", {"g0", "g9"}),
        GoAnnotation("GO:0000003", "orphan", "process", {"elsewhere"}),
    ]


def test_enrich_hand_example():
    target = {"g0", "g1", "g2", "g7", "g8"}
    recs = enrich(target, UNIVERSE, annotations())
    by_id = {r.term_id: r for r in recs}
    assert "GO:0000003" not in by_id                     # no background genes
    t = by_id["GO:0000001"]
    assert (t.k, t.n, t.K, t.N) == (3, 5, 4, 10)
    assert t.p_value == pytest.approx(0.261905, abs=1e-6)
    # two retained terms enter BH
    q = bh_adjust([r.p_value for r in recs])
    assert [r.q_value for r in recs] == pytest.approx(q)
    assert [r.p_value for r in recs] == sorted(r.p_value for r in recs)


def test_enrich_target_is_background():
    recs = enrich(UNIVERSE, UNIVERSE, annotations())
    assert recs and all(r.p_value == 1.0 and r.k == r.K for r in recs)


def test_enrich_namespace_filter():
    recs = enrich({"g0"}, UNIVERSE, annotations(), namespace="function")
    assert [r.namespace for r in recs] == ["function"]


def test_enrich_ties_by_term_id():
    anns = [GoAnnotation(t, t, "process", {"g0"}) for t in ("GO:9", "GO:1", "GO:5")]
    assert [r.term_id for r in enrich({"g0"}, UNIVERSE, anns)] == ["GO:1", "GO:5", "GO:9"]


def test_enrich_errors():
    with pytest.raises(TargetNotSubset):
        enrich({"zz"}, UNIVERSE, annotations())
    with pytest.raises(EmptySet):
        enrich(set(), UNIVERSE, annotations())
    with pytest.raises(EmptySet):
        enrich({"g1"}, set(), annotations())


def test_record_invariants():
    rng = np.random.default_rng(0)
    genes = [f"g{i}" for i in range(200)]
    anns = [GoAnnotation(f"GO:{t:07d}", f"t{t}", ["process", "function"][t % 2],
                         set(rng.choice(genes, rng.integers(1, 40), replace=False)))
            for t in range(60)]
    target = set(rng.choice(genes, 30, replace=False))
    recs = enrich(target, set(genes), anns)
    m = len(recs)
    for r in recs:
        assert r.k <= min(r.K, r.n) and r.n <= r.N and r.K <= r.N
        assert 0 < r.p_value <= 1 and r.p_value / m <= r.q_value <= 1


# -- files ------------------------------------------------------------------

def test_annotation_tsv(tmp_path):
    p = tmp_path / "go.tsv"
    p.write_text("term_id\tterm_name\tnamespace\tgene_id\n"
                 "GO:1\tapoptosis\tprocess\tg1\n"
                 "GO:1\tapoptosis\tprocess\tg2\n"
                 "\n"
                 "GO:2\tBH3 binding\tfunction\tg3\n")
    anns = {a.term_id: a for a in read_annotations(p)}
    assert anns["GO:1"].genes == {"g1", "g2"}
    assert anns["GO:2"].namespace == "function"


@pytest.mark.parametrize("body", ["GO:1\tx\tcomponent\tg1\n", "GO:1\tx\n",
                                  "GO:1\tx\tprocess\tg1\nGO:1\tx\tfunction\tg2\n"])
def test_annotation_tsv_errors(tmp_path, body):
    p = tmp_path / "go.tsv"
    p.write_text("term_id\tterm_name\tnamespace\tgene_id\n" + body)
    with pytest.raises(ParseError):
        read_annotations(p)


def test_missing_files(tmp_path):
    with pytest.raises(IoError):
        read_annotations(tmp_path / "nope.tsv")
    with pytest.raises(IoError):
        read_gene_set(tmp_path / "nope.txt")


def test_gene_set_and_output(tmp_path):
    (tmp_path / "t.txt").write_text("g0\n\n g1 \ng0\n")
    assert read_gene_set(tmp_path / "t.txt") == {"g0", "g1"}
    recs = enrich({"g0", "g1"}, UNIVERSE, annotations())
    write_enrichment(recs, tmp_path / "e.csv")
    rows = list(csv.reader((tmp_path / "e.csv").open()))
    assert rows[0] == ["term_id", "term_name", "namespace", "k", "K", "n", "N", "p_value", "q_value"]
    assert float(rows[1][7]) == recs[0].p_value
