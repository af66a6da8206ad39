"""A look-alike appears while the target is hidden; follow the prompt gate.

Run: python3 demos/distractor_prompts.py
"""
from __future__ import annotations

from prototrack import RunConfig, ScenarioProvider, get_scenario, run_sequence
from prototrack.metrics import ious

spec = get_scenario("distractor-occlusion", seed=0)
d = spec.distractors[0]
print(f"target hidden {spec.occlusions[0].start}-{spec.occlusions[0].end}, "
      f"look-alike (cosine {d.similarity}) on screen {d.visible[0]}-{d.visible[1]}")

provider = ScenarioProvider(spec)
gt = [t.gt_box for t in provider.truths()]

configs = {
    "samite": RunConfig(),
    "sam2_default": RunConfig(strategy="sam2_default"),
    "samite, no prompt": RunConfig(use_prompt=False),
}
runs = {k: run_sequence(provider, gt[0], c) for k, c in configs.items()}
for k, rep in runs.items():
    print(f"{k:18s} mean IoU {ious(rep.boxes, gt).mean():.4f}")

# gate verdicts around the look-alike's entrance
print("\nframe  gate(samite)            box(samite)         box(sam2_default)   gt")
for t in range(d.visible[0] - 1, d.visible[0] + 6):
    g = runs["samite"].traces[t - 1]["gate"]
    verdict = f"{'accept' if g['accepted'] else 'reject'} {g['mean_iou']:.3f}"
    print(f"{t:5d}  {verdict:22s}  {str(tuple(runs['samite'].boxes[t - 1])):18s}  "
          f"{str(tuple(runs['sam2_default'].boxes[t - 1])):18s}  {tuple(gt[t - 1])}")

# sam2_default still reads frames from the occlusion: their stored masks are
# empty, every reverse prompt scores IoU 0 against them and the gate refuses
# the prompt, so the unprompted mask (target plus look-alike) enters memory
g = runs["sam2_default"].traces[d.visible[0] - 1]
print(f"\nsam2_default at frame {d.visible[0]} reads {g['selected']}")
print("  per-memory IoU", g["gate"]["per_memory_iou"], "accepted:", g["gate"]["accepted"])

# the mean-prototype conditioning cannot tell a 0.9 look-alike from the target
spec = get_scenario("distractor-cross", seed=0)
provider = ScenarioProvider(spec)
gt = [t.gt_box for t in provider.truths()]
for rule in ("attention", "prototype"):
    rep = run_sequence(provider, gt[0], RunConfig(conditioner=rule))
    print(f"\ndistractor-cross with {rule:9s} read-out: mean IoU {ious(rep.boxes, gt).mean():.4f}, "
          f"last box {tuple(rep.boxes[-1])} vs gt {tuple(gt[-1])}")
