"""Filtered link prediction and triple classification.

Link prediction answers, for every evaluation triple, the two queries
"which head?" and "which tail?" over all entities, removing candidates
that would form a different known triple. Ties get the average of the
positions they jointly occupy, so a constant scorer lands mid-field
instead of faking rank 1.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ProtocolError
from .model import all_visual_embeddings, full_view
from .sampling import sample_normal
from .scoring import L1, score_triple


@dataclass(frozen=True)
class LinkPredMetrics:
    mr: float
    mrr: float
    hits1: float
    hits3: float
    hits10: float
    n_queries: int


@dataclass(frozen=True)
class ClassifMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    thresholds: dict = field(default_factory=dict)
    global_threshold: float = 0.0


def rank_of(target, scores, excluded=()):
    """Mid-rank of ``target`` among the non-excluded candidates.

    rank = 1 + (# strictly better) + (# equal others) / 2, which may be
    fractional.
    """
    scores = np.asarray(scores, dtype=np.float64)
    excluded = set(excluded)
    if target in excluded:
        raise ProtocolError(f"target {target} is in the excluded set")
    keep = np.ones(len(scores), dtype=bool)
    if excluded:
        keep[list(excluded)] = False
    target_score = scores[target]
    kept = scores[keep]
    greater = int(np.count_nonzero(kept > target_score))
    equal_others = int(np.count_nonzero(kept == target_score)) - 1
    return 1.0 + greater + equal_others / 2.0


def _row_norms(U, norm):
    if norm == L1:
        return np.sum(np.abs(U), axis=1)
    return np.sqrt(np.sum(U * U, axis=1))


def _candidate_scores(E_s64, E_v64, rv, triple, side, norm):
    """Four-term totals for every candidate entity substituted on ``side``.

    Elementwise order mirrors the scalar scorer so tied scores tie exactly.
    """
    h, _, t = triple
    if side == "tail":
        base_s = E_s64[h] + rv
        base_v = E_v64[h] + rv
        f_ss = -_row_norms(base_s[None, :] - E_s64, norm)
        f_vv = -_row_norms(base_v[None, :] - E_v64, norm)
        f_sv = -_row_norms(base_s[None, :] - E_v64, norm)
        f_vs = -_row_norms(base_v[None, :] - E_s64, norm)
    else:
        t_s = E_s64[t]
        t_v = E_v64[t]
        f_ss = -_row_norms((E_s64 + rv[None, :]) - t_s[None, :], norm)
        f_vv = -_row_norms((E_v64 + rv[None, :]) - t_v[None, :], norm)
        f_sv = -_row_norms((E_s64 + rv[None, :]) - t_v[None, :], norm)
        f_vs = -_row_norms((E_v64 + rv[None, :]) - t_s[None, :], norm)
    return (f_ss + f_vv) + (f_sv + f_vs)


def _eval_threads():
    raw = os.environ.get("MANS_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def link_prediction(params, table, store, split="valid", norm=L1,
                    n_threads=None, return_ranks=False):
    """Filtered ranks over both query directions for one split.

    Candidates are always whole entities (matching structural and visual
    ids); the excluded set per query is every entity completing a known
    triple, minus the query's own answer. ``n_threads`` defaults to the
    ``MANS_THREADS`` environment variable.
    """
    triples = store.splits[split]
    E_s64 = params.E_s.astype(np.float64)
    E_v64 = all_visual_embeddings(params, table)
    R64 = params.R.astype(np.float64)

    known_tails = {}
    known_heads = {}
    for h, r, t in store.filter_index:
        known_tails.setdefault((h, r), set()).add(t)
        known_heads.setdefault((r, t), set()).add(h)

    def query_rank(triple, side):
        h, r, t = triple
        scores = _candidate_scores(E_s64, E_v64, R64[r], triple, side, norm)
        if side == "head":
            excluded = known_heads.get((r, t), set()) - {h}
            return rank_of(h, scores, excluded)
        excluded = known_tails.get((h, r), set()) - {t}
        return rank_of(t, scores, excluded)

    queries = [(triple, side) for triple in triples for side in ("head", "tail")]
    if n_threads is None:
        n_threads = _eval_threads()
    if n_threads > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            ranks = list(pool.map(lambda q: query_rank(*q), queries))
    else:
        ranks = [query_rank(triple, side) for triple, side in queries]

    ranks_arr = np.array(ranks, dtype=np.float64)
    metrics = LinkPredMetrics(
        mr=float(np.mean(ranks_arr)),
        mrr=float(np.mean(1.0 / ranks_arr)),
        hits1=float(np.mean(ranks_arr <= 1)),
        hits3=float(np.mean(ranks_arr <= 3)),
        hits10=float(np.mean(ranks_arr <= 10)),
        n_queries=len(queries),
    )
    if return_ranks:
        records = [
            (triple.head, triple.rel, triple.tail, side, rank)
            for (triple, side), rank in zip(queries, ranks)
        ]
        return metrics, records
    return metrics


def confusion_metrics(tp, fp, fn, tn, thresholds=None, global_threshold=0.0):
    """Accuracy, precision, recall, and F1 from confusion counts."""
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClassifMetrics(accuracy, precision, recall, f1,
                          thresholds=thresholds or {}, global_threshold=global_threshold)


def _best_threshold(pairs):
    """Score cutoff maximizing accuracy; ties resolved to the lowest cutoff.

    A triple is classified positive when its score is >= the cutoff.
    """
    best_acc, best_theta = -1.0, 0.0
    for theta in sorted({score for score, _ in pairs}):
        acc = sum((score >= theta) == positive for score, positive in pairs) / len(pairs)
        if acc > best_acc:
            best_acc, best_theta = acc, theta
    return best_theta


def triple_classification(params, table, store, norm=L1, seed=0):
    """Balanced classification over valid/test with per-relation cutoffs.

    Each valid and test triple is paired with one entity-level corruption
    from a generator seeded with ``seed`` (valid first, then test, in split
    order). Cutoffs maximize validation accuracy per relation; relations
    missing from validation fall back to the cutoff fitted on all
    validation pairs pooled.
    """
    if not store.valid:
        raise ProtocolError("triple classification needs a nonempty valid split")
    rng = np.random.default_rng(seed)
    n = params.n_entities

    def labeled_pairs(split):
        pairs = []
        for pos in split:
            neg = sample_normal(pos, n, rng)
            pos_score = score_triple(params, table,
                                     full_view(pos.head), pos.rel, full_view(pos.tail), norm).total
            neg_score = score_triple(params, table,
                                     neg.head, neg.rel, neg.tail, norm).total
            pairs.append((pos.rel, pos_score, True))
            pairs.append((neg.rel, neg_score, False))
        return pairs

    valid_pairs = labeled_pairs(store.valid)
    test_pairs = labeled_pairs(store.test)

    by_rel = {}
    for rel, score, positive in valid_pairs:
        by_rel.setdefault(rel, []).append((score, positive))
    thresholds = {rel: _best_threshold(pairs) for rel, pairs in by_rel.items()}
    global_threshold = _best_threshold([(s, p) for _, s, p in valid_pairs])

    tp = fp = fn = tn = 0
    for rel, score, positive in test_pairs:
        predicted = score >= thresholds.get(rel, global_threshold)
        if positive and predicted:
            tp += 1
        elif positive:
            fn += 1
        elif predicted:
            fp += 1
        else:
            tn += 1
    return confusion_metrics(tp, fp, fn, tn, thresholds=thresholds,
                             global_threshold=global_threshold)


def write_lp_metrics(metrics, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("metric\tvalue\n")
        fh.write(f"MR\t{metrics.mr:.6f}\n")
        fh.write(f"MRR\t{metrics.mrr:.6f}\n")
        fh.write(f"Hits@1\t{metrics.hits1:.6f}\n")
        fh.write(f"Hits@3\t{metrics.hits3:.6f}\n")
        fh.write(f"Hits@10\t{metrics.hits10:.6f}\n")
        fh.write(f"n_queries\t{metrics.n_queries}\n")


def write_tc_metrics(metrics, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("metric\tvalue\n")
        fh.write(f"Accuracy\t{metrics.accuracy:.6f}\n")
        fh.write(f"Precision\t{metrics.precision:.6f}\n")
        fh.write(f"Recall\t{metrics.recall:.6f}\n")
        fh.write(f"F1\t{metrics.f1:.6f}\n")


def write_rank_dump(records, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h, r, t, side, rank in records:
            fh.write(f"{h}\t{r}\t{t}\t{side}\t{rank:g}\n")
