import itertools
import json

import pytest

from bruteforce import closure, maximal_chains, witness_holds
from stitlab.generate import (BoundsTooLarge, ModelBounds, choice_options, count_models,
                              enumerate_models, label_tree, random_model, rooted_trees,
                              set_partitions)
from stitlab.model import (AgentSetEmpty, ImaginationModel, ModelError, Point, TreeOrder,
                           build_sigma_model, compute_histories, dump_model, load_model,
                           model_from_dict, model_to_dict, undivided_classes, validate)
from stitlab.formula import parse


def fork(choice=None, agents=("a",), **kw):
    order = TreeOrder(("m0", "m1", "m2"), {("m0", "m1"), ("m0", "m2")})
    return ImaginationModel(order, agents, choice, **kw)


# --- histories ---------------------------------------------------------------

def test_histories_of_a_fork():
    order = TreeOrder(("m0", "m1", "m2"), {("m0", "m1"), ("m0", "m2")})
    assert compute_histories(order) == [("m0", "m1"), ("m0", "m2")]


def test_histories_of_a_chain_and_single_moment():
    assert compute_histories(TreeOrder(("m0",))) == [("m0",)]
    order = TreeOrder(("m0", "m1", "m2"), {("m0", "m1"), ("m1", "m2")})
    assert compute_histories(order) == [("m0", "m1", "m2")]


@pytest.mark.parametrize("n", range(1, 7))
def test_histories_match_brute_force_on_all_trees(n):
    for shape in rooted_trees(n):
        order = label_tree(shape)
        assert compute_histories(order) == maximal_chains(order.moments, order.covers)


def test_histories_through_and_points():
    m = fork()
    assert m.histories_through("m0") == (0, 1)
    assert m.histories_through("m2") == (1,)
    assert m.points == (Point("m0", 0), Point("m0", 1), Point("m1", 0), Point("m2", 1))
    assert str(Point("m0", 1)) == "m0/h1"


def test_cyclic_order_has_no_histories():
    with pytest.raises(ModelError):
        compute_histories(TreeOrder(("m0", "m1"), {("m0", "m1"), ("m1", "m0")}))


def test_undivided_classes():
    order = TreeOrder(("m0", "m1", "m2", "m3"), {("m0", "m1"), ("m1", "m2"), ("m1", "m3")})
    hist = compute_histories(order)
    assert undivided_classes(order, hist, "m0") == [frozenset({0, 1})]
    assert undivided_classes(order, hist, "m1") == [frozenset({0}), frozenset({1})]


def test_rooted_tree_counts():
    # rooted unlabeled trees: 1, 1, 2, 4, 9, 20
    assert [len(rooted_trees(n)) for n in range(1, 7)] == [1, 1, 2, 4, 9, 20]


def test_set_partitions_bell_numbers():
    assert [sum(1 for _ in set_partitions(range(n))) for n in range(6)] == [1, 1, 2, 5, 15, 52]
    assert next(iter(set_partitions("abc"))) == [["a", "b", "c"]]


# --- validator ---------------------------------------------------------------

def test_sigma_model_validates():
    m = build_sigma_model(["p"], ["a"])
    assert validate(m).ok
    assert m.points == (Point("m0", 0),)
    assert m.is_vacuous("m0", "a")


def test_sigma_model_needs_agents():
    with pytest.raises(AgentSetEmpty):
        build_sigma_model(["p"], [])


def test_independence_violation_witness(models_dir):
    m = load_model(models_dir / "independence_violation.json")
    report = validate(m)
    assert report.conditions() == ["independence of agents"]
    v = report.violations[0]
    assert v.witness == {"moment": "m0", "selector": {"a": [0], "b": [1]}}
    assert witness_holds(m, v)


@pytest.mark.parametrize("name,condition", [
    ("cyclic.json", "not a partial order"),
    ("two_roots.json", "downward directedness"),
    ("diamond.json", "backward linearity"),
    ("ncuh_violation.json", "no choice between undivided histories"),
    ("independence_violation.json", "independence of agents"),
])
def test_fixture_witnesses_are_real(models_dir, name, condition):
    m = load_model(models_dir / name)
    report = validate(m)
    assert condition in report.conditions()
    for v in report:
        assert witness_holds(m, v), v


def test_partition_errors():
    assert "choice partition" in validate(fork({("m0", "a"): [[0]]})).conditions()
    assert "choice partition" in validate(fork({("m0", "a"): [[0, 1], [1]]})).conditions()
    assert "choice partition" in validate(fork({("m0", "a"): [[0], [1], []]})).conditions()


def test_dangling_references():
    m = fork(valuation={"p": [("m1", 1)]})
    assert validate(m).conditions() == ["dangling reference"]
    m = fork(neighborhoods={(("m0", 0), "z"): [[("m0", 0)]]})
    assert validate(m).conditions() == ["dangling reference"]


def test_empty_tree():
    assert validate(ImaginationModel(TreeOrder(()), ["a"])).conditions() == ["nonempty tree"]


def test_bad_cover_reference():
    with pytest.raises(ModelError):
        TreeOrder(("m0",), {("m0", "m9")})


# --- generators --------------------------------------------------------------

def test_enumeration_example_count():
    # single moment or two-moment chain, one agent, one variable, no neighborhoods
    b = ModelBounds(max_moments=2, max_agents=1, variables=("p",), max_family=0)
    models = list(enumerate_models(b))
    assert len(models) == 2 + 4
    assert all(validate(m).ok for m in models)


def test_enumeration_is_valid_distinct_and_deterministic():
    pool = tuple(parse(t) for t in ("p", "[i a]p"))
    b = ModelBounds(max_moments=3, max_agents=2, variables=("p",), max_family=1,
                    props="definable", pool=pool)
    first = list(enumerate_models(b))
    assert len(first) == len(set(first))
    assert all(validate(m).ok for m in first)
    assert [m.key() for m in first[:50]] == [m.key() for m in itertools.islice(enumerate_models(b), 50)]
    assert len(first) <= count_models(b)


def test_enumeration_all_policy_covers_every_family():
    b = ModelBounds(max_moments=1, max_agents=1, variables=(), max_family=2, props="all")
    # MH = {m0/h0}: subsets {}, {pt}; families of size <= 2 over 2 candidates: 4
    assert len(list(enumerate_models(b))) == 4 == count_models(b)


def test_choice_options_are_independent_and_respect_ncuh():
    order = label_tree(rooted_trees(4)[-1])   # root with three children
    hist = compute_histories(order)
    opts = choice_options(order, hist, ("a", "b"))
    assert opts
    for choice in opts:
        m = ImaginationModel(order, ("a", "b"), choice)
        assert validate(m).ok


def test_bounds_are_capped():
    with pytest.raises(BoundsTooLarge):
        ModelBounds(max_moments=7)
    with pytest.raises(BoundsTooLarge):
        ModelBounds(max_agents=3, max_family=4)
    ModelBounds(max_moments=7, unsafe=True)


def test_enumeration_refuses_oversized_streams():
    b = ModelBounds(max_moments=3, max_agents=2, variables=("p", "q"), max_family=2,
                    props="auto")
    with pytest.raises(BoundsTooLarge) as e:
        enumerate_models(b)
    assert e.value.size > b.cap


@pytest.mark.parametrize("seed", range(200))
def test_random_models_validate(seed):
    from stitlab.soundness import FUZZ_BOUNDS
    m = random_model(seed, FUZZ_BOUNDS)
    assert validate(m).ok
    assert m == random_model(seed, FUZZ_BOUNDS)


def test_random_models_exercise_branching_and_choice():
    from stitlab.soundness import FUZZ_BOUNDS
    ms = [random_model(s, FUZZ_BOUNDS) for s in range(300)]
    assert any(len(m.histories) >= 3 for m in ms)
    assert any(len(m.agents) == 2 and any(not m.is_vacuous(x, "a") and not m.is_vacuous(x, "b")
                                          for x in m.moments) for m in ms)
    assert any(m.neighborhoods for m in ms)


# --- mutations the validator must catch -------------------------------------

def _mutants(model):
    """Break one frame condition at a time, yielding (condition, mutant)."""
    order = model.order
    for m in model.moments:
        hm = model.histories_through(m)
        for a in model.agents:
            # split a history pair that shares a later moment
            for h1, h2 in itertools.combinations(hm, 2):
                shared = [x for x in model.histories[h1]
                          if order.lt(m, x) and x in model.histories[h2]]
                if shared:
                    rest = [h for h in hm if h not in (h1, h2)]
                    cells = [[h1], [h2] + rest]
                    choice = dict(model.choice)
                    choice[(m, a)] = cells
                    yield "no choice between undivided histories", ImaginationModel(
                        order, model.agents, choice, model.neighborhoods, model.valuation)
                    break
    if len(model.agents) >= 2:
        for m in model.moments:
            hm = model.histories_through(m)
            if len(hm) >= 2:
                choice = dict(model.choice)
                choice[(m, model.agents[0])] = [[hm[0]], list(hm[1:])]
                choice[(m, model.agents[1])] = [[hm[1]], [hm[0]] + list(hm[2:])]
                yield "independence of agents", ImaginationModel(
                    order, model.agents, choice, model.neighborhoods, model.valuation)
                break
    if len(order.moments) >= 2:
        a, b = sorted(order.covers)[0] if order.covers else (order.moments[0], order.moments[1])
        yield "not a partial order", ImaginationModel(
            TreeOrder(order.moments, order.covers | {(b, a)}), model.agents)


@pytest.mark.parametrize("seed", range(60))
def test_validator_catches_mutations(seed):
    from stitlab.soundness import FUZZ_BOUNDS
    model = random_model(seed, FUZZ_BOUNDS)
    for condition, mutant in _mutants(model):
        report = validate(mutant)
        assert condition in report.conditions(), (condition, report.conditions())
        for v in report:
            if v.condition in ("not a partial order", "no choice between undivided histories",
                               "independence of agents"):
                assert witness_holds(mutant, v)


# --- JSON --------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(40))
def test_json_round_trip(seed, tmp_path):
    from stitlab.soundness import FUZZ_BOUNDS
    m = random_model(seed, FUZZ_BOUNDS)
    assert model_from_dict(model_to_dict(m)) == m
    path = tmp_path / "m.json"
    dump_model(m, path)
    assert load_model(path) == m
    assert json.loads(path.read_text())["agents"] == list(m.agents)


def test_malformed_json_is_a_model_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"moments": ["m0"]}')
    with pytest.raises(ModelError):
        load_model(path)
    path.write_text("not json")
    with pytest.raises(ModelError):
        load_model(path)
