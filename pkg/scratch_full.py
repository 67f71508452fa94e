"""Full criterion-6/7 style assessment across seeds (scratch)."""
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

N_SETS = 3
FILLER = 0.5
EPOCHS = 20


def experiment(seed):
    t0 = time.time()
    data = generate_synthetic_biased(seed, 300, SyntheticSpec(filler_doc_factor=FILLER))
    qsby = {q.id: q for q in data.queries}
    train_q = [qsby[qid] for qid in data.split.train_query_ids]
    test_q = [qsby[qid] for qid in data.split.test_query_ids]
    vocab = build_vocab(data.corpus, data.queries, 1)
    test_ids = set(data.split.test_query_ids)
    tq = Qrels({k: v for k, v in data.qrels.judgments.items() if k[0] in test_ids})
    profs = aggregate_scores([q.id for q in data.queries], [q.text for q in data.queries])
    batches = []
    for s in range(N_SETS):
        bs, _ = make_batches(train_q, data.qrels, data.corpus, 7, seed=1000 + s)
        batches.extend(bs)
    cfg = TrainConfig(seed=seed, epochs=EPOCHS)

    def ev(params):
        run = dense_search(params, vocab, data.corpus, test_q, top_k=100)
        sc = score_run(run, tq)
        st = aggregate(sc)
        prof = [p for p in profs if p.query_id in sc.values]
        curves = {k: bucket_curve(sc, prof, k) for k in (4, 5, 10)}
        return st, curves

    plain = train_plain(batches, vocab, cfg)
    stp, cvp = ev(plain.params)
    fb_results = {}
    for strat in BIAS_STRATEGIES:
        fb = make_biased_learner(strat, batches, vocab, cfg, DebiasConfig(bias_strategy=strat))
        fb_results[strat] = (fb, ev(fb.params))
    fb_less = fb_results["less_data"][0]
    deb = train_debiased(batches, fb_less.params, vocab, cfg, DebiasConfig(alpha=0.1))
    std, cvd = ev(deb.params)

    red = (stp.cv - std.cv) / stp.cv * 100
    print(f"seed={seed} ({time.time()-t0:.0f}s)")
    print(f"  plain: mu={stp.mu:.4f} cv={stp.cv:.4f} gaps k4/k5/k10 = "
          f"{cvp[4].gap():.3f}/{cvp[5].gap():.3f}/{cvp[10].gap():.3f}")
    print(f"  deb:   mu={std.mu:.4f} cv={std.cv:.4f} gaps k4/k5/k10 = "
          f"{cvd[4].gap():.3f}/{cvd[5].gap():.3f}/{cvd[10].gap():.3f}  red={red:.1f}% "
          f"mu_drop={stp.mu-std.mu:+.4f}")
    for strat, (fb, (stf, cvf)) in fb_results.items():
        ok4 = all(cvf[4].gap() > cvd[4].gap() for _ in [0])
        print(f"  fB[{strat:20s}]: mu={stf.mu:.4f} gaps={cvf[4].gap():.3f}/{cvf[5].gap():.3f}/{cvf[10].gap():.3f}")


for seed in [int(x) for x in (sys.argv[1:] or ["1", "2", "3"])]:
    experiment(seed)
