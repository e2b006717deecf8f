import math
import random

import pytest

import sdbc

TINY = """
task: resource_sharing
method: ns-sd+
seed: 3
trials: 2
ga:
  population: 8
  generations: 3
  hidden: 4
novelty:
  k: 3
tasks:
  resource_sharing:
    max_steps: 40
log:
  checkpoint_every: 2
"""


def test_fitness_examples():
    assert sdbc.gate_fitness(2, 250, 500, 4) == pytest.approx(0.5, abs=1e-12)
    assert sdbc.sharing_fitness(3, 50.0, 100.0, 4) == pytest.approx(0.7, abs=1e-12)
    assert sdbc.pursuit_fitness(True, 300, 600, 1.0, 0.0, 8.0) == pytest.approx(1.5, abs=1e-12)


def test_characterisation_lengths():
    lengths = {}
    for task in sdbc.task_names():
        lengths[task] = len(sdbc.characterisation_names(f"task: {task}\n"))
    assert lengths == {"gate_escape": 21, "resource_sharing": 21, "predator_prey": 27}
    names = sdbc.characterisation_names("task: resource_sharing\n")
    assert "agent energy level (M)" in names
    assert names[-1] == "simulation length"


def test_standardise_and_weights():
    rng = random.Random(4)
    pop = [[rng.gauss(0, 2), rng.gauss(5, 1), 1.0] for _ in range(30)]
    rows, mu, sigma = sdbc.standardise(pop)
    for k in range(2):
        col = [r[k] for r in rows]
        mean = sum(col) / len(col)
        sd = math.sqrt(sum((x - mean) ** 2 for x in col) / len(col))
        assert abs(mean) < 1e-9 and abs(sd - 1) < 1e-9
    fitness = [r[0] for r in pop]
    w = sdbc.compute_weights(pop, fitness)
    assert w["weights"][2] == pytest.approx(0.25)
    assert all(x >= 0.25 for x in w["weights"])
    assert w["weights"][0] == pytest.approx(0.25 + w["mi"][0])
    assert sdbc.mutual_information(fitness, fitness) > 1.0


def test_novelty_and_ranking():
    pts = [[0.0], [1.0], [3.0]]
    assert sdbc.novelty(pts, k=1) == pytest.approx([1.0, 1.0, 2.0])
    assert sdbc.behaviour_distance([0, 0], [3, 4]) == pytest.approx(5.0)
    fronts = sdbc.non_dominated_sort([(1, 1), (0, 0), (2, 0), (0, 2)])
    assert sorted(fronts[0]) == [0, 2, 3] and fronts[1] == [1]
    cd = sdbc.crowding_distance([(0, 2), (1, 1), (2, 0)])
    assert math.isinf(cd[0]) and cd[1] == pytest.approx(2.0)


def test_mann_whitney():
    r = sdbc.mann_whitney_u([1, 2, 3], [4, 5, 6])
    assert r["u"] == 0 and r["p"] == pytest.approx(0.1) and r["exact"]
    assert sdbc.mann_whitney_u([4, 5, 6], [1, 2, 3], "greater")["p"] == pytest.approx(0.05)
    with pytest.raises(ValueError):
        sdbc.mann_whitney_u([1], [2], "sideways")


def test_trial_is_deterministic():
    n = sdbc.genome_length(TINY)
    rng = random.Random(9)
    genome = [rng.uniform(-1, 1) for _ in range(n)]
    a = sdbc.run_trial(genome, 17, TINY)
    b = sdbc.run_trial(genome, 17, TINY)
    assert a == b
    assert len(a["sdbc"]) == 21 and 0.0 <= a["fitness"] <= 1.0
    with pytest.raises(ValueError):
        sdbc.run_trial(genome[:-1], 17, TINY)


def test_run_and_analyze(tmp_path):
    run_dir = tmp_path / "run"
    r = sdbc.run(TINY, str(run_dir))
    assert r["generations"] == 3 and (run_dir / "generations.csv").exists()
    again = sdbc.run(TINY, str(run_dir))
    assert again["best_fitness"] == r["best_fitness"]
    tasks, _ = sdbc.analyze([str(run_dir)], str(tmp_path / "analysis"))
    assert tasks[0]["task"] == "resource_sharing"
    assert tasks[0]["best_per_run"]["ns-sd+"] == [pytest.approx(r["best_fitness"])]
    assert len(tasks[0]["mi"]["ns-sd+"]) == 21
