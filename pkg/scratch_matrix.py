"""Criterion 6/7 robustness matrix (scratch)."""
import sys
import time

import numpy as np

from eqir.complexity import aggregate_scores
from eqir.corpus import Qrels, make_batches
from eqir.encoder import build_vocab
from eqir.evaluation import aggregate, bucket_curve, score_run
from eqir.retrieval import dense_search
from eqir.synthetic import SyntheticSpec, generate_synthetic_biased
from eqir.training import (
    BIAS_STRATEGIES,
    DebiasConfig,
    TrainConfig,
    make_biased_learner,
    train_debiased,
    train_plain,
)


def experiment(seed, epochs, n_sets, filler, k=4):
    data = generate_synthetic_biased(seed, 300, SyntheticSpec(filler_doc_factor=filler))
    qsby = {q.id: q for q in data.queries}
    train_q = [qsby[qid] for qid in data.split.train_query_ids]
    test_q = [qsby[qid] for qid in data.split.test_query_ids]
    vocab = build_vocab(data.corpus, data.queries, 1)
    test_ids = set(data.split.test_query_ids)
    tq = Qrels({kk: v for kk, v in data.qrels.judgments.items() if kk[0] in test_ids})
    profs = aggregate_scores([q.id for q in data.queries], [q.text for q in data.queries])
    batches = []
    for s in range(n_sets):
        bs, _ = make_batches(train_q, data.qrels, data.corpus, 7, seed=1000 + s)
        batches.extend(bs)
    cfg = TrainConfig(seed=seed, epochs=epochs)

    def ev(params):
        run = dense_search(params, vocab, data.corpus, test_q, top_k=100)
        sc = score_run(run, tq)
        prof = [p for p in profs if p.query_id in sc.values]
        return aggregate(sc), bucket_curve(sc, prof, k)

    plain = train_plain(batches, vocab, cfg)
    stp, cvp = ev(plain.params)
    fbs = {}
    for strat in BIAS_STRATEGIES:
        fb = make_biased_learner(strat, batches, vocab, cfg, DebiasConfig(bias_strategy=strat))
        fbs[strat] = (fb, ev(fb.params))
    deb = train_debiased(batches, fbs["less_data"][0].params, vocab, cfg, DebiasConfig(alpha=0.1))
    std, cvd = ev(deb.params)
    red = (stp.cv - std.cv) / stp.cv * 100
    gap_ok = cvd.gap() < cvp.gap()
    mu_ok = std.mu >= stp.mu - 0.02
    c7 = {s: f[1][1].gap() > cvd.gap() for s, f in fbs.items()}
    print(
        f"seed={seed} ep={epochs} sets={n_sets} fil={filler}: "
        f"red={red:5.1f}% gap {cvp.gap():.3f}->{cvd.gap():.3f} ({'OK' if gap_ok else 'X'}) "
        f"mu {stp.mu:.3f}->{std.mu:.3f} ({'OK' if mu_ok else 'X'}) "
        f"c7={' '.join(s[:4] + ('Y' if ok else 'N') for s, ok in c7.items())} "
        f"fbgaps={' '.join(f'{f[1][1].gap():.2f}' for f in fbs.values())}"
    )


if __name__ == "__main__":
    args = sys.argv[1:]
    epochs = int(args[0]) if args else 20
    n_sets = int(args[1]) if len(args) > 1 else 3
    filler = float(args[2]) if len(args) > 2 else 0.5
    seeds = [int(s) for s in args[3:]] or [1, 2, 3]
    for seed in seeds:
        t0 = time.time()
        experiment(seed, epochs, n_sets, filler)
        print(f"  ({time.time()-t0:.0f}s)")
