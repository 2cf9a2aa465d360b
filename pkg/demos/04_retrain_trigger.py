"""
A retraining trigger that sleeps through stationary stretches
=============================================================

Retraining on every iteration wastes compute when nothing changed.
The coverage-change index compares the density profile of the current
memory against a reference frozen at the last retrain: the positive
part of the density shift, normalized by current coverage.  It spikes
when new structure arrives and stays near zero while the stream only
repeats itself.

The incremental workload makes this visible.  Three classes appear in
disjoint phases of five iterations each, so the memory's composition
lurches twice, at the phase boundaries, and is static in between.
"""
from covmem.harness import RunConfig, run

reports = run(RunConfig(
    strategy="memento",
    scenario="incremental",
    capacity=600,
    batch_size=64,
    iterations=15,
    samples_per_iteration=1_500,
    feature_dim=8,
    predictor="centroid",
    retrain="strategy",
    threshold=0.15,
    eval_per_class=200,
    seed=1,
))

print("iter  phase   rci      retrained")
for r in reports:
    phase = r.iteration // 5
    mark = "  <-- retrain" if r.retrained else ""
    print(f"{r.iteration:4d} {phase:6d}  {r.rci:7.4f}{mark}")

fired = [r.iteration for r in reports if r.retrained]
print(f"\nretrained at iterations {fired}: a warm-up, then a burst at "
      "each phase boundary while the new class displaces the old one, "
      "and silence through the stationary middle of every phase.")
