import pytest
from hypothesis import given
from hypothesis import strategies as st

from coopex.errors import CyclicGraph, DanglingEdge, NotAssigned, UnknownGraph
from coopex.task_graph import (
    TaskState,
    TaskStatus,
    build_graph,
    builtin_graph,
    get_independent_tasks,
    parse_edge_list,
    random_complex_flags,
    random_graph,
    random_rewards,
    topological_order,
    update_dependencies,
    write_edge_list,
)
from oracles import kahn_order, respects


def test_g18_shape():
    g = builtin_graph("g18")
    assert g.m == 18 and g.edge_count == 36
    assert g.deps(0) == frozenset()
    assert all(g.deps(k) == {0} for k in range(1, 9))
    assert g.deps(9) == {1, 2} and g.deps(12) == {7, 8}
    assert all(g.deps(k) == {9, 10, 11, 12} for k in range(13, 17))
    assert g.deps(17) == {13, 14, 15, 16}


def test_g40_shape():
    g = builtin_graph("G40")
    assert g.m == 40 and g.edge_count == 93
    roots = [t.id for t in g.tasks if not t.deps]
    sinks = [i for i, s in enumerate(g.successors) if not s]
    assert roots == [0, 1]
    assert sinks == [38, 39]
    assert g.deps(38) == {29, 31, 33}
    assert g.deps(39) == {30, 32, 34, 35, 36, 37}


def test_unknown_builtin():
    with pytest.raises(UnknownGraph):
        builtin_graph("g99")


def test_cycle_and_dangling_rejected():
    with pytest.raises(CyclicGraph):
        build_graph([(0, 1), (1, 2), (2, 0)], [1, 1, 1])
    with pytest.raises(CyclicGraph):
        build_graph([(1, 1)], [1, 1])
    with pytest.raises(DanglingEdge):
        build_graph([(0, 3)], [1, 1, 1])
    with pytest.raises(DanglingEdge):
        build_graph([], [1, 1], complex_flags=[5])


def test_topological_order_matches_oracle_on_builtins():
    for name in ("g18", "g40"):
        g = builtin_graph(name)
        order = topological_order(g)
        assert sorted(order) == list(range(g.m))
        assert respects(order, g.edges())
        assert kahn_order(g.m, g.edges()) is not None


def test_ready_set_and_dependency_release():
    g = builtin_graph("g18", rewards=list(range(18)))
    status = TaskStatus.initial(g)
    ready, rewards = get_independent_tasks(g, status)
    assert ready == [0] and rewards == [0.0]

    status.mark_assigned(0)
    assert get_independent_tasks(g, status)[0] == []
    update_dependencies(status, 0, 1.5)
    assert status[0] is TaskState.ACCOMPLISHED and status.completion_time[0] == 1.5
    assert get_independent_tasks(g, status)[0] == list(range(1, 9))
    # joins need both parents
    for t in (1, 2, 3):
        status.mark_assigned(t)
        update_dependencies(status, t)
    assert status[9] is TaskState.READY
    assert status[10] is TaskState.PENDING


def test_update_is_idempotent_and_requires_dispatch():
    g = builtin_graph("g18")
    status = TaskStatus.initial(g)
    with pytest.raises(NotAssigned):
        update_dependencies(status, 0)
    status.mark_assigned(0)
    update_dependencies(status, 0, 2.0)
    snapshot = status.copy()
    update_dependencies(status, 0, 9.0)
    assert status.state == snapshot.state
    assert status.completion_time == snapshot.completion_time


def test_remaining_counts_open_work():
    g = builtin_graph("g18")
    status = TaskStatus.initial(g)
    assert status.remaining() == 18
    status.mark_assigned(0)
    update_dependencies(status, 0)
    status.mark_failed(1, 3.0)
    assert status.remaining() == 16


def test_edge_list_round_trip(tmp_path):
    g = builtin_graph("g40", rewards=[float(i % 7 + 1) for i in range(40)]).with_attributes(
        complex_flags={3, 17}
    )
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    back = parse_edge_list(path.read_text())
    assert back == g


def test_seeded_draws_are_stable():
    assert random_rewards(5, 0) == random_rewards(5, 0)
    assert all(1 <= r <= 100 for r in random_rewards(50, 3))
    assert random_complex_flags(40, 0.0, 1) == set()
    assert random_complex_flags(40, 1.0, 1) == set(range(40))


def test_random_graph_band_structure():
    g = random_graph(200, 10, seed=4)
    assert g.m == 200
    # layers of 20; every non-root node has at least one parent in the previous layer
    for t in g.tasks[20:]:
        layer = t.id // 20
        assert t.deps and all(u // 20 == layer - 1 for u in t.deps)
    assert all(not t.deps for t in g.tasks[:20])


def test_random_graph_clamps_bad_parameters(caplog):
    g = random_graph(5, 9, density=2.0, seed=0)
    assert g.m == 5
    assert "clamped" in caplog.text


@given(
    m=st.integers(1, 60),
    layers=st.integers(1, 12),
    density=st.floats(0, 1),
    seed=st.integers(0, 10_000),
)
def test_random_graph_is_acyclic_and_deterministic(m, layers, density, seed):
    g = random_graph(m, layers, density, seed)
    assert kahn_order(g.m, g.edges()) is not None
    assert respects(topological_order(g), g.edges())
    assert random_graph(m, layers, density, seed) == g
