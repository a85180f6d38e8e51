"""Smoke test for the fpop extension module."""

import fpop


def main():
    assert fpop.check(fpop.GRAPH_DISTANCE) == []
    errors = fpop.check("type V\nrelation r: V\nrule: r x --> r y\n")
    assert len(errors) == 1 and "unbound head variable `y`" in errors[0], errors

    s = fpop.Solver(fpop.GRAPH_DISTANCE)
    for a, b, w in [("a", "b", 1), ("b", "c", 2), ("a", "c", 5)]:
        assert s.insert("edge", [a, b, w])
    assert not s.insert("edge", ["a", "c", 7])
    s.insert("startVertex", ["a"])
    stats = s.solve(workers=1)
    assert stats["strict_updates"]["distTo"] == 3, stats
    assert s.query("distTo") == [("a", 0), ("b", 1), ("c", 3)]
    assert s.query("distTo", ["c"]) == [("c", 3)]
    assert s.audit() == 0

    c = fpop.Solver(fpop.GRAPH_DISTANCE_CONST, {"start": "b"})
    c.insert("edge", ("b", "c", 4))
    c.solve(schedule="random", seed=3)
    assert c.query("distTo") == [("b", 0), ("c", 4)]

    t = fpop.Solver(fpop.TREE_AUTOMATA)
    t.insert("hyperEdge", ["x", "leaf", []])
    t.insert("hyperEdge", ["y", "pair", {"x", "z"}])
    t.insert("accepts", ["x"])
    t.solve()
    assert t.query("notRejectsAll") == [("x",)]

    naive = fpop.Solver(fpop.GRAPH_DISTANCE)
    naive.insert("edge", ["a", "b", 1])
    naive.insert("startVertex", ["a"])
    naive.solve_naive()
    assert naive.dump().splitlines()[-1] == '{"relation":"startVertex","args":["a"]}'

    try:
        fpop.Solver(fpop.GRAPH_DISTANCE).insert("edge", ["a"])
    except ValueError as e:
        assert "edge" in str(e)
    else:
        raise AssertionError("arity error not raised")
    print("python smoke test: ok")


if __name__ == "__main__":
    main()
