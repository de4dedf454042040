import random

import pytest

from hri_sim.catalog import ApiCatalog, ApiParam, ApiSignature, default_catalog
from hri_sim.clock import VirtualClock
from hri_sim.dsl import ExecBudget, execute, parse, validate
from hri_sim.robot import SimAdapter

from conftest import make_record
from fuzz_programs import gen_program

COUNT_PROGRAM = ('let n = count(input.objects, "box")\n'
                 'activity.talker(format("There are {} boxes", n))')


def _adapter():
    return SimAdapter(VirtualClock(), session_id="t")


def _objects(n_boxes, extra=0):
    objs = [("box", (1.0 * i, 0.0, 0.0)) for i in range(n_boxes)]
    objs += [("tool", (0.0, 1.0 * i, 0.0)) for i in range(extra)]
    return objs


# --- validation ---

def test_unknown_function_is_a_violation():
    violations = validate(parse("activity.fly()"), default_catalog())
    assert len(violations) == 1
    assert "unknown function" in violations[0].message


def test_talker_arity_violation():
    violations = validate(parse("activity.talker()"), default_catalog())
    assert any("argument" in v.message for v in violations)


def test_optional_argument_arity_accepted():
    assert validate(parse('activity.executor("nod")'), default_catalog()) == []
    assert validate(parse('activity.executor("point", "box_front")'),
                    default_catalog()) == []
    assert validate(parse('activity.executor("point", "a", "b")'),
                    default_catalog()) != []


def test_counting_program_validates_clean():
    assert validate(parse(COUNT_PROGRAM), default_catalog()) == []


def test_assignment_to_input_is_a_violation():
    violations = validate(parse("let input = 3"), default_catalog())
    assert any("input" in v.message for v in violations)
    violations = validate(parse("for input in input.objects {\nactivity.nod()\n}"),
                          default_catalog())
    assert any("input" in v.message for v in violations)


def test_unknown_builtin_is_a_violation():
    violations = validate(parse("let x = mystery(1)"), default_catalog())
    assert any("unknown function" in v.message for v in violations)


# --- execution ---

def test_counting_program_speaks_the_oracle_count():
    for n in (0, 1, 3, 17):
        record = make_record(objects=_objects(n, extra=2))
        oracle = sum(1 for cat, _ in record.objects if cat == "box")
        adapter = _adapter()
        trace = execute(parse(COUNT_PROGRAM), record, adapter)
        assert trace.ok
        assert adapter.events[-1].body["text"] == f"There are {oracle} boxes"


def test_empty_program_is_a_clean_noop():
    trace = execute(parse(""), make_record(), _adapter())
    assert trace.ok
    assert trace.statements_executed == 0
    assert trace.events == []


def test_for_each_hits_the_robot_call_budget():
    record = make_record(objects=_objects(20))
    src = 'for o in input.objects {\n    activity.talker(format("{}", o))\n}'
    trace = execute(parse(src), record, _adapter(), ExecBudget(max_robot_calls=16))
    assert trace.status == "budget_exceeded"
    assert len(trace.events) == 16


def test_statement_budget_halts_execution():
    record = make_record(objects=_objects(50))
    src = ("for a in input.objects {\n"
           "    for b in input.objects {\n        let x = 1\n    }\n}")
    trace = execute(parse(src), record, _adapter(), ExecBudget(max_statements=100))
    assert trace.status == "budget_exceeded"
    assert trace.statements_executed == 101


def test_division_by_zero_is_a_runtime_error():
    trace = execute(parse("let x = 1 / 0"), make_record(), _adapter())
    assert trace.status == "runtime_error"
    assert "division by zero" in trace.error


def test_type_mismatch_is_a_runtime_error():
    trace = execute(parse('let x = 1 + "two"'), make_record(), _adapter())
    assert trace.status == "runtime_error"


def test_undefined_name_is_a_runtime_error():
    trace = execute(parse("activity.talker(format(\"{}\", ghost))"),
                    make_record(), _adapter())
    assert trace.status == "runtime_error"
    assert "undefined name" in trace.error


def test_think_step_by_step_records_without_events():
    trace = execute(parse('activity.think_step_by_step("consider the boxes")'),
                    make_record(), _adapter())
    assert trace.ok
    assert trace.events == []
    assert trace.cot_notes == ["consider the boxes"]


def test_execution_never_mutates_the_record():
    record = make_record(objects=_objects(4))
    snapshot = (record.objects, record.utterance, record.user_position)
    src = ('for o in input.objects {\n    let x = len(input.objects)\n}\n'
           'activity.talker("done")')
    execute(parse(src), record, _adapter())
    assert (record.objects, record.utterance, record.user_position) == snapshot


def test_gazed_object_field_access():
    from hri_sim.fusion import GazedObject
    record = make_record(gazed=GazedObject("box_front", "box", (1.0, 2.0, 0.8), 500))
    src = 'activity.talker(format("you look at the {}", input.gazed_object.category))'
    adapter = _adapter()
    trace = execute(parse(src), record, adapter)
    assert trace.ok
    assert adapter.events[0].body["text"] == "you look at the box"


def test_missing_gaze_access_is_a_runtime_error():
    src = "let c = input.gazed_object.category"
    trace = execute(parse(src), make_record(), _adapter())
    assert trace.status == "runtime_error"


def test_adapter_errors_become_runtime_errors():
    trace = execute(parse('activity.executor("backflip")'), make_record(), _adapter())
    assert trace.status == "runtime_error"
    assert "backflip" in trace.error


def test_count_matches_oracle_on_random_records():
    rng = random.Random(99)
    categories = ["box", "tool", "cube", "tin can"]
    for _ in range(200):
        objs = [(rng.choice(categories), (0.0, 0.0, 0.0))
                for _ in range(rng.randint(0, 30))]
        wanted = rng.choice(categories)
        record = make_record(objects=objs)
        adapter = _adapter()
        src = (f'let n = count(input.objects, "{wanted}")\n'
               f'activity.talker(format("{{}}", n))')
        trace = execute(parse(src), record, adapter)
        assert trace.ok
        oracle = len([c for c, _ in objs if c == wanted])
        assert adapter.events[0].body["text"] == str(oracle)


def test_fuzzed_programs_always_terminate_in_a_trace():
    record = make_record(objects=_objects(5, extra=3))
    for seed in range(500):
        src = gen_program(seed)
        program = parse(src)
        assert validate(program, default_catalog()) == [], f"seed {seed}"
        trace = execute(program, record, _adapter())
        assert trace.status in ("ok", "budget_exceeded", "runtime_error"), f"seed {seed}"


def test_catalog_rejects_duplicate_names():
    sig = ApiSignature("activity.x", (ApiParam("a", "text"),), "doc")
    with pytest.raises(ValueError):
        ApiCatalog((sig, sig))
