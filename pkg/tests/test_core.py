import math

import numpy as np
import pytest

from edgeqos.core import (CLOUD, ConfigurationError, Task, Topology,
                          build_topology, generate_task, service_ticks)


class TestGenerateTask:
    def test_characteristics_in_unit_interval(self):
        rng = np.random.default_rng(0)
        for tick in range(50):
            t = generate_task(rng, tick, task_id=tick)
            assert 0.0 <= t.dd <= 1.0
            assert 0.0 <= t.l <= 1.0
            assert 0.0 <= t.dl <= 1.0
            assert t.arrival_time == tick

    def test_same_stream_same_tasks(self):
        rng1 = np.random.default_rng(123)
        rng2 = np.random.default_rng(123)
        for tick in range(10):
            t1 = generate_task(rng1, tick)
            t2 = generate_task(rng2, tick)
            assert (t1.dd, t1.l, t1.dl) == (t2.dd, t2.l, t2.dl)

    def test_uniform_mean(self):
        # law of large numbers on the dd characteristic
        rng = np.random.default_rng(2024)
        mean = np.mean([generate_task(rng, 0).dd for _ in range(100_000)])
        assert abs(mean - 0.5) < 0.01

    def test_rejects_out_of_range(self):
        with pytest.raises(ConfigurationError):
            Task(id=1, dd=1.5, l=0.5, dl=0.5, arrival_time=0, origin_node=0)
        with pytest.raises(ConfigurationError):
            Task(id=1, dd=0.5, l=0.5, dl=0.5, arrival_time=-1, origin_node=0)


class TestBuildTopology:
    def test_complete_edge_count(self):
        topo = build_topology(5, "complete", np.random.default_rng(1))
        assert len(topo.edges) == 10  # C(5,2)
        assert all(0.0 < cc <= 1.0 for cc in topo.edges.values())

    def test_random_graph_connected(self):
        topo = build_topology(100, "random:0.1", np.random.default_rng(2))
        assert topo.is_connected()

    def test_two_node_symmetry(self):
        topo = build_topology(2, "complete", np.random.default_rng(3))
        assert len(topo.edges) == 1
        assert topo.cc(0, 1) == topo.cc(1, 0)

    def test_too_few_nodes_rejected(self):
        with pytest.raises(ConfigurationError):
            build_topology(1, "complete", np.random.default_rng(0))

    def test_bad_kind_rejected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ConfigurationError):
            build_topology(3, "ring", rng)
        with pytest.raises(ConfigurationError):
            build_topology(3, "random:0", rng)
        with pytest.raises(ConfigurationError):
            build_topology(3, "random:x", rng)

    def test_random_graphs_always_connected_and_symmetric(self):
        for seed in range(20):
            topo = build_topology(30, "random:0.05", np.random.default_rng(seed))
            assert topo.is_connected()
            for (i, k), cc in topo.edges.items():
                assert cc > 0.0
                assert topo.cc(i, k) == topo.cc(k, i)

    def test_positive_cost_enforced(self):
        topo = Topology([0, 1], {(0, 1): 0.5})
        with pytest.raises(ConfigurationError):
            topo.add_edge(0, 1, 0.0)


class TestServiceTicks:
    @pytest.mark.parametrize("load,scale,expected", [
        (0.5, 5.0, 3),   # ceil(2.5)
        (1.0, 5.0, 5),
        (0.01, 5.0, 1),
        (0.0, 5.0, 1),   # floor of one tick even for zero load
        (0.2, 5.0, 1),
    ])
    def test_ceiling_with_floor_of_one(self, load, scale, expected):
        assert service_ticks(load, scale) == expected
