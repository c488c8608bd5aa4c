import pytest

from mapf_dp import WarehouseParams, generate_random_instance, \
    generate_warehouse_instance, resample_delays
from mapf_dp.generate import GenerationError, warehouse_graph
from mapf_dp.model import shortest_path_distances


class TestRandomInstance:
    def test_table1_style_parameters(self):
        inst = generate_random_instance(30, 30, 0.10, 35, (0, 0.5), 42)
        assert inst.n_agents == 35
        assert all(0 < a.delay_prob < 0.5 for a in inst.agents)
        assert inst.graph.n_vertices == 900 - 90

    def test_single_agent_open_grid(self):
        inst = generate_random_instance(5, 5, 0.0, 1, (0, 0.5), 1)
        assert inst.n_agents == 1
        inst.check_connectivity()

    def test_deterministic_under_seed(self):
        a = generate_random_instance(12, 12, 0.2, 5, (0, 0.5), 9)
        b = generate_random_instance(12, 12, 0.2, 5, (0, 0.5), 9)
        assert a.graph.adjacency == b.graph.adjacency
        assert [(x.start, x.goal, x.delay_prob) for x in a.agents] \
            == [(x.start, x.goal, x.delay_prob) for x in b.agents]

    def test_starts_goals_distinct_and_reachable(self):
        inst = generate_random_instance(15, 15, 0.25, 8, (0, 0.5), 3)
        starts = [a.start for a in inst.agents]
        goals = [a.goal for a in inst.agents]
        assert len(set(starts)) == len(starts)
        assert len(set(goals)) == len(goals)
        inst.check_connectivity()
        # all 2m endpoints live in one component
        dist = shortest_path_distances(inst.graph, starts[0])
        assert all(dist[v] < float("inf") for v in starts + goals)

    def test_infeasible_parameters_rejected(self):
        with pytest.raises(GenerationError):
            generate_random_instance(3, 3, 0.0, 50, (0, 0.5), 0)

    def test_delay_sampling_through_move_duration(self):
        # p = 1 - 1/t with t uniform on (1, t_max); check the implied support
        inst = generate_random_instance(20, 20, 0.0, 30, (0, 0.8), 11)
        t_hats = [1.0 / (1.0 - a.delay_prob) for a in inst.agents]
        assert all(1.0 < t < 5.0 for t in t_hats)


class TestWarehouseInstance:
    def test_default_layout(self):
        inst = generate_warehouse_instance(WarehouseParams(), 10, (0, 0.5), 2)
        assert inst.n_agents == 10
        inst.check_connectivity()
        meta = inst.graph.grid
        side = WarehouseParams().side_width
        for a in inst.agents:
            sx, _ = meta.cell_of(a.start)
            gx, _ = meta.cell_of(a.goal)
            # one endpoint per side corridor
            assert (sx < side) != (gx < side)
            assert sx < side or sx >= meta.width - side
            assert gx < side or gx >= meta.width - side

    def test_zero_shelves_is_open_rectangle(self):
        params = WarehouseParams(shelf_rows=0, shelf_cols=0)
        g = warehouse_graph(params)
        assert g.n_vertices == params.grid_width * params.grid_height

    def test_deterministic_under_seed(self):
        a = generate_warehouse_instance(WarehouseParams(), 6, (0, 0.5), 5)
        b = generate_warehouse_instance(WarehouseParams(), 6, (0, 0.5), 5)
        assert [(x.start, x.goal, x.delay_prob) for x in a.agents] \
            == [(x.start, x.goal, x.delay_prob) for x in b.agents]

    def test_too_many_agents_rejected(self):
        with pytest.raises(GenerationError):
            generate_warehouse_instance(WarehouseParams(side_width=1), 500,
                                        (0, 0.5), 0)


class TestResampleDelays:
    def test_layout_preserved(self):
        base = generate_random_instance(10, 10, 0.1, 5, (0, 0.5), 7)
        swept = resample_delays(base, 1.0 - 1.0 / 8, 99)
        assert swept.graph is base.graph
        assert [(a.start, a.goal) for a in swept.agents] \
            == [(a.start, a.goal) for a in base.agents]
        assert all(0 < a.delay_prob < 1.0 - 1.0 / 8 for a in swept.agents)
        assert [a.delay_prob for a in swept.agents] \
            != [a.delay_prob for a in base.agents]
