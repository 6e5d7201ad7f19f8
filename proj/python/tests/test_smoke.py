import pytest

import cascade_trace as ct


def u(i):
    return "00000000-0000-4000-8000-%012x" % i


def test_inject_extract_round_trip():
    ctx = (u(3), [u(2), u(1)])
    ann = ct.inject({"app": "web"}, ctx)
    assert ann[ct.CPID_ANNOTATION] == u(3)
    assert ann[ct.ANCESTORS_ANNOTATION] == u(2) + "," + u(1)
    assert ann["app"] == "web"
    assert ct.extract(ann) == ctx
    assert ct.extract({"app": "web"}) is None


def test_extract_rejects_bad_cpid():
    with pytest.raises(ct.MalformedContext):
        ct.extract({ct.CPID_ANNOTATION: "nope"})


def test_merge_two_roots_and_replacement():
    ctx, log = ct.merge([(u(1), []), (u(2), [])])
    assert log is not None
    assert log[1] == [u(1), u(2)]
    assert ctx[0] == log[0] and ctx[1] == [u(1), u(2)]
    assert ct.is_uuid_v4(ctx[0])

    ctx, log = ct.merge([(u(3), [u(2), u(1)]), (u(1), [])])
    assert log is None
    assert ctx == (u(3), [u(2), u(1)])
    with pytest.raises(ct.EmptyInput):
        ct.merge([])


def test_reference_graph_related():
    g = ct.MergeGraph()
    for i in (1, 2, 4, 6, 8):
        g.apply(u(i))
    g.apply(u(3), [u(1), u(2)])
    g.apply(u(5), [u(3), u(4)])
    g.apply(u(7), [u(2), u(4), u(6)])
    assert len(g) == 8 and g.edge_count() == 7
    assert g.related(u(2)) == [u(2), u(3), u(7), u(5)]
    assert not g.apply(u(3), [u(1), u(2)])
    with pytest.raises(ct.CycleRejected):
        g.apply(u(1), [u(5)])
    with pytest.raises(ct.NotFound):
        g.related(u(99))


def test_scenario_report():
    assert "fig5-service" in ct.builtin_scenarios()
    r = ct.run_scenario("fig5-service")
    assert r["mergelog_count"] == 3
    assert len(r["root_cpids"]) == 2
    assert r["audit_violations"] == []
