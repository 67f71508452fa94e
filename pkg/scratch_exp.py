"""Scratch experiment driver (not part of the package)."""
import sys
import time

import numpy as np

from eqir.complexity import aggregate_scores
from eqir.corpus import Qrels, make_batches
from eqir.encoder import build_vocab
from eqir.evaluation import aggregate, bucket_curve, score_run
from eqir.retrieval import dense_search
from eqir.synthetic import generate_synthetic_biased
from eqir.training import (
    DebiasConfig,
    TrainConfig,
    make_biased_learner,
    train_debiased,
    train_plain,
)

t0 = time.time()
seed = int(sys.argv[1]) if len(sys.argv) > 1 else 1
data = generate_synthetic_biased(seed, 300)
qsby = {q.id: q for q in data.queries}
train_q = [qsby[qid] for qid in data.split.train_query_ids]
test_q = [qsby[qid] for qid in data.split.test_query_ids]
profs = aggregate_scores([q.id for q in data.queries], [q.text for q in data.queries])
simple = set(data.split.simple_query_ids)
cplx = set(data.split.complex_query_ids)
ms = np.mean([p.score for p in profs if p.query_id in simple])
mc = np.mean([p.score for p in profs if p.query_id in cplx])
print(f"mean complexity simple={ms:.4f} complex={mc:.4f}")

vocab = build_vocab(data.corpus, data.queries, 1)
batches, _ = make_batches(train_q, data.qrels, data.corpus, 7, seed)
cfg = TrainConfig(seed=seed)
plain = train_plain(batches, vocab, cfg)
fb = make_biased_learner("less_data", batches, vocab, cfg, DebiasConfig(bias_strategy="less_data"))
deb = train_debiased(batches, fb.params, vocab, cfg, DebiasConfig(alpha=0.1))

test_ids = set(data.split.test_query_ids)
train_ids = set(data.split.train_query_ids)
tq = Qrels({k: v for k, v in data.qrels.judgments.items() if k[0] in test_ids})
trq = Qrels({k: v for k, v in data.qrels.judgments.items() if k[0] in train_ids})


def eval_model(params, name, queries=test_q, qrels=tq):
    run = dense_search(params, vocab, data.corpus, queries, top_k=100, tag=name)
    scores = score_run(run, qrels)
    st = aggregate(scores)
    prof = [p for p in profs if p.query_id in scores.values]
    curve = bucket_curve(scores, prof, 5)
    svals = [v for q, v in scores.values.items() if q in simple]
    cvals = [v for q, v in scores.values.items() if q in cplx]
    print(
        f"{name}: mu={st.mu:.4f} sigma={st.sigma:.4f} cv={st.cv:.4f} "
        f"gap={curve.gap():.4f} simple={np.mean(svals):.4f} complex={np.mean(cvals):.4f}"
    )
    print("   curve:", [f"{r.mean_ndcg:.3f}" for r in curve.rows])
    return st, curve


st_tr, _ = eval_model(plain.params, "plain-TRAIN", train_q, trq)
stp, cp_ = eval_model(plain.params, "plain")
std, cd_ = eval_model(deb.params, "debiased")
stf, cf_ = eval_model(fb.params, "f_B(less_data)")
print(
    f"cv reduction: {(stp.cv - std.cv) / stp.cv * 100:.1f}%  "
    f"mu drop: {stp.mu - std.mu:+.4f}  gap: {cp_.gap():.4f} -> {cd_.gap():.4f}"
)
print(f"total {time.time() - t0:.1f}s")
