"""
Anchor-conditioned grasp prediction
===================================

Cross-validate mean predictors with and without anchor information, then
hold out whole surgery types and surgeon groups.
"""
from anchorlab.evalproto import group_holdout, group_surgeons, stratified_kfold
from anchorlab.predictor import PredictorKind, evaluate, evaluate_runs
from anchorlab.stats import t_test_welch_unpaired
from anchorlab.synth import SynthConfig, generate_balanced

samples = generate_balanced(SynthConfig(seed=2024), per_case=500)

# five runs of 5-fold stratified CV, one split seed per run
plans = [stratified_kfold(samples, 5, seed) for seed in range(5)]
results = {kind: evaluate_runs(kind, samples, plans) for kind in PredictorKind}
for kind, (prec, rmse) in results.items():
    print(f"{kind.value:22s} precision@6% {100 * prec.mean:5.1f} +- {100 * prec.std:.1f}   "
          f"rmse {rmse.mean:5.2f}%")

base = results[PredictorKind.ABSOLUTE_MEAN][0]
for kind in (PredictorKind.ANCHOR_CANONICAL_MEAN, PredictorKind.ANCHOR_RADIAL):
    p = t_test_welch_unpaired(results[kind][0].values, base.values).p
    print(f"{kind.value} vs absolute-mean: Welch p = {p:.1e}")

# unseen surgery types, then unseen surgeon groups
surgeons = group_surgeons(samples)
print("surgeon groups:", [",".join(m) for m in surgeons.members])
for key, plans in (("surgery_type", group_holdout(samples, "surgery_type")),
                   ("surgeon_id", group_holdout(samples, "surgeon_id", surgeons.groups))):
    for plan in plans:
        scores = {k.value: evaluate(k, samples, plan).precision.mean for k in PredictorKind}
        row = "  ".join(f"{name}={100 * v:5.1f}" for name, v in scores.items())
        print(f"{key}={plan.held_out[0]:22s} {row}")
