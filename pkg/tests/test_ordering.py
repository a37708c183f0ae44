from collections import deque

import numpy as np
import pytest

from gnnio.ordering import (
    form_batches,
    generate_bfs_sequences,
    load_schedule,
    proximity_schedule,
    random_shift,
    random_shuffle_schedule,
    save_schedule,
    select_num_sequences,
    shuffling_error,
    shuffling_error_threshold,
)

from conftest import make_graph, planted_graph


# -- BFS sequences --------------------------------------------------------------


def _bfs_emit_order(g, root):
    """Reference deque BFS over the full graph, emitting training nodes in
    first-visit order."""
    visited = np.zeros(g.num_nodes, dtype=bool)
    visited[root] = True
    out = []
    q = deque([root])
    while q:
        u = q.popleft()
        if g.train_mask[u]:
            out.append(u)
        for v in g.neighbors(u):
            if not visited[v]:
                visited[v] = True
                q.append(int(v))
    return out


def test_path_bfs_from_end(path5):
    found = False
    for seed in range(30):
        (seq,) = generate_bfs_sequences(path5, 1, seed=seed)
        if seq[0] == 0:
            assert seq.tolist() == [0, 1, 2, 3, 4]
            found = True
            break
    assert found


def test_star_center_first(star6):
    for seed in range(30):
        (seq,) = generate_bfs_sequences(star6, 1, seed=seed)
        if seq[0] == 0:
            assert seq.tolist() == [0, 1, 2, 3, 4, 5]
            return
    pytest.fail("no seed rooted the BFS at the center")


def test_sequences_match_deque_oracle():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    for seed in range(5):
        (seq,) = generate_bfs_sequences(g, 1, seed=seed)
        assert seq.tolist() == _bfs_emit_order(g, int(seq[0]))


def test_sequences_partition_training_set():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    for S in (1, 3, 7):
        seqs = generate_bfs_sequences(g, S, seed=1)
        assert len(seqs) == S
        union = np.sort(np.concatenate(seqs))
        assert np.array_equal(union, g.train_nodes())


def test_sequences_errors(path5):
    with pytest.raises(ValueError):
        generate_bfs_sequences(path5, 0)
    with pytest.raises(ValueError):
        generate_bfs_sequences(path5, 6)
    empty = make_graph([(0, 1)], 2, train=[])
    with pytest.raises(ValueError, match="empty"):
        generate_bfs_sequences(empty, 1)


# -- random shift ------------------------------------------------------------------


def test_shift_is_rotation():
    seq = np.array([1, 2, 3])
    rotations = {(1, 2, 3), (2, 3, 1), (3, 1, 2)}
    seen = set()
    for seed in range(30):
        out = tuple(random_shift(seq, seed=seed).tolist())
        assert out in rotations
        seen.add(out)
    assert seen == rotations  # all offsets reachable, incl. r=0 identity


def test_shift_deterministic_and_errors():
    seq = np.arange(10)
    assert np.array_equal(random_shift(seq, seed=5), random_shift(seq, seed=5))
    with pytest.raises(ValueError):
        random_shift(np.empty(0, dtype=np.int64))


# -- batch formation ------------------------------------------------------------------


def test_form_batches_single_sequence_slices():
    seq = np.arange(7)
    sched = form_batches([seq], 3)
    assert [b.tolist() for b in sched.batches] == [[0, 1, 2], [3, 4, 5], [6]]


def test_form_batches_round_robin_by_hand():
    sched = form_batches([np.array([1, 2]), np.array([3, 4])], 2)
    assert [b.tolist() for b in sched.batches] == [[1, 3], [2, 4]]


def test_form_batches_uneven_lengths():
    sched = form_batches([np.array([1, 2, 5]), np.array([3])], 2)
    assert sched.num_nodes() == 4
    assert sched.batches[0].tolist() == [1, 3]
    assert np.array_equal(np.sort(sched.all_nodes()), [1, 2, 3, 5])


def test_form_batches_rejects_bad_b():
    with pytest.raises(ValueError):
        form_batches([np.array([1])], 0)


# -- shuffling error -------------------------------------------------------------------


def test_epsilon_zero_single_label():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=1)
    sched = proximity_schedule(g, 2, 50, seed=0)
    rep = shuffling_error(sched, g.labels)
    assert rep.epsilon == 0.0
    assert rep.max_tv == 0.0


def test_tv_half_for_pure_batch():
    # 4 training nodes, labels A,A,B,B; batches [A,A] and [B,B]
    g = make_graph([(0, 1), (1, 2), (2, 3)], 4, train=range(4), labels=[0, 0, 1, 1])
    sched = form_batches([np.array([0, 1]), np.array([2, 3])], 2)
    sched.batches = [np.array([0, 1]), np.array([2, 3])]
    rep = shuffling_error(sched, g.labels)
    assert np.allclose(rep.per_batch_tv, [0.5, 0.5])
    assert rep.epsilon == 0.5


def test_epsilon_zero_single_batch():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    sched = random_shuffle_schedule(g, g.num_train(), seed=0)
    assert shuffling_error(sched, g.labels).epsilon == pytest.approx(0.0)


def test_missing_label_errors():
    g = make_graph([(0, 1)], 2, train=[0, 1], labels=[0, -1])
    sched = random_shuffle_schedule(g, 1, seed=0)
    with pytest.raises(ValueError, match="label"):
        shuffling_error(sched, g.labels)


def test_epsilon_in_unit_interval():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    for S in (1, 4):
        rep = shuffling_error(proximity_schedule(g, S, 25, seed=1), g.labels)
        assert 0.0 <= rep.epsilon <= 1.0
        assert np.all(rep.per_batch_tv >= 0) and np.all(rep.per_batch_tv <= 1)


def test_threshold_arithmetic():
    assert shuffling_error_threshold(1000, 4, 1_200_000) == pytest.approx(5.27e-5, rel=1e-2)


# -- policies and selection -------------------------------------------------------------


def test_epoch_coverage_both_policies():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    for sched in (proximity_schedule(g, 4, 64, seed=2), random_shuffle_schedule(g, 64, seed=2)):
        assert np.array_equal(np.sort(sched.all_nodes()), g.train_nodes())


def test_shift_changes_batches_not_coverage():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    a = proximity_schedule(g, 4, 64, seed=3)
    b = proximity_schedule(g, 4, 64, seed=4)
    assert np.array_equal(np.sort(a.all_nodes()), np.sort(b.all_nodes()))


def test_schedule_determinism():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    a = proximity_schedule(g, 3, 50, seed=9)
    b = proximity_schedule(g, 3, 50, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a.batches, b.batches))
    r1 = random_shuffle_schedule(g, 50, seed=9)
    r2 = random_shuffle_schedule(g, 50, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(r1.batches, r2.batches))


def test_random_beats_single_bfs_sequence():
    g = planted_graph(n=20000, avg_degree=10, seed=1, num_labels=32)
    eps_rand = shuffling_error(random_shuffle_schedule(g, 200, seed=0), g.labels).epsilon
    eps_bfs = shuffling_error(proximity_schedule(g, 1, 200, seed=0), g.labels).epsilon
    assert eps_rand <= eps_bfs


def test_select_single_label_returns_one():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=1)
    S, rep = select_num_sequences(g, 50, 4, 8, seed=0)
    assert S == 1
    assert rep.epsilon == 0.0
    assert rep.threshold_met


def test_select_returns_minimal_s():
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    S, rep = select_num_sequences(g, 50, 4, 10, seed=1)
    threshold = shuffling_error_threshold(50, 4, g.num_train())
    if rep.threshold_met:
        assert rep.epsilon <= threshold
        for smaller in range(1, S):
            sched = proximity_schedule(g, smaller, 50, seed=1)
            assert shuffling_error(sched, g.labels).epsilon > threshold
    else:
        assert S == 10


def test_select_flags_unreachable_threshold():
    # 2 labels perfectly split by ID; S_max=1 cannot mix them
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=2)
    S, rep = select_num_sequences(g, 10, 1, 1, seed=0)
    assert S == 1
    assert not rep.threshold_met


# -- serialization -------------------------------------------------------------------------


def test_schedule_roundtrip(tmp_path):
    g = planted_graph(n=2000, avg_degree=8, seed=4, num_labels=8)
    sched = proximity_schedule(g, 3, 50, seed=2)
    path = tmp_path / "s.txt"
    save_schedule(sched, path)
    loaded = load_schedule(path)
    assert loaded.policy == sched.policy
    assert loaded.batch_size == sched.batch_size
    assert all(np.array_equal(x, y) for x, y in zip(sched.batches, loaded.batches))
