"""The auditor against solver outputs, perturbed menus, and edge cases."""

import random

import pytest

from clpcontracts.benchmarks import solve_ctwt
from clpcontracts.cic import solve_cic
from clpcontracts.feasibility import (
    audit,
    check_bf,
    check_ic,
    check_ir,
    check_monotonicity,
    menu_regime,
)
from clpcontracts.iic import solve_iic
from clpcontracts.market import (
    ContractItem,
    ContractMenu,
    InfoCase,
    Mechanism,
    Regime,
    TimeFrame,
    load_menu,
    save_menu,
)

from conftest import random_config, small_config, table2_config


def _replace_item(menu, k, **changes):
    items = list(menu.items)
    old = items[k - 1]
    fields = {f: getattr(old, f) for f in ("type_index", "effort", "join_round", "salary", "bonus", "reward")}
    fields.update(changes)
    items[k - 1] = ContractItem(**fields)
    return ContractMenu(tuple(items), menu.info_case, menu.mechanism)


def test_cic_output_passes_ir(table2):
    assert check_ir(solve_cic(table2), table2) == []


def test_iic_output_passes_ir(table2):
    assert check_ir(solve_iic(table2), table2) == []


def test_raised_bottom_salary_fails_ir(table2):
    menu = solve_iic(table2)
    bumped = _replace_item(menu, 1, salary=menu.item(1).salary + 0.5,
                           reward=menu.item(1).reward + 0.5)
    deficits = check_ir(bumped, table2)
    assert any(k == 1 for k, _ in deficits)


def test_iic_output_passes_ic(table2):
    assert check_ic(solve_iic(table2), table2) == []


def test_cic_menu_is_not_ic_when_types_hidden(table2):
    # personalized zero-surplus contracts invite every higher type downward
    menu = solve_cic(table2)
    assert check_ic(menu, table2) != []


def test_ctwt_cic_menu_is_not_ic_when_types_hidden(table2):
    menu = solve_ctwt(table2, InfoCase.CIC)
    assert check_ic(menu, table2) != []


def test_single_type_menu_trivially_ic():
    cfg = small_config((1.5,), TimeFrame(4, 1, 2), budget=60.0)
    assert check_ic(solve_iic(cfg), cfg) == []


def test_bf_solver_output_within_budget(table2):
    assert check_bf(solve_iic(table2), table2) <= 1e-9


def test_bf_empty_menu_is_minus_budget(table2):
    empty = ContractMenu((), InfoCase.IIC, Mechanism.R3T)
    assert check_bf(empty, table2) == pytest.approx(-table2.budget)


def test_bf_positive_when_budget_tiny(table2):
    menu = solve_iic(table2)
    squeezed = table2_config(budget=1.0)  # not solved against; audit only
    assert check_bf(menu, squeezed) > 0


def test_monotonicity_passes_on_iic_menu(table2):
    menu = solve_iic(table2)
    assert check_monotonicity(menu, table2, Regime.CLP) == []


def test_nonclp_menu_unequal_salaries_flagged():
    cfg = small_config((1.0, 1.5, 2.0), TimeFrame(5), budget=60.0)
    menu = solve_iic(cfg)
    bumped = _replace_item(menu, 2, salary=menu.item(2).salary + 0.1,
                           reward=menu.item(2).reward + 0.1)
    failures = check_monotonicity(bumped, cfg, Regime.NON_CLP)
    assert ("r", 2) in failures


def test_swapped_efforts_flagged(table2):
    menu = solve_iic(table2)
    e1, e2 = menu.item(1).effort, menu.item(2).effort
    swapped = _replace_item(_replace_item(menu, 1, effort=e2), 2, effort=e1)
    failures = check_monotonicity(swapped, table2, Regime.CLP)
    assert any(field == "e" for field, _ in failures)


def test_audit_passes_solver_outputs_random():
    rng = random.Random(55)
    for _ in range(40):
        cfg = random_config(rng)
        assert audit(solve_cic(cfg), cfg).passed
        assert audit(solve_iic(cfg), cfg).passed


def test_audit_fails_on_salary_perturbation(table2):
    menu = solve_iic(table2)
    for k in (1, table2.K):
        item = menu.item(k)
        bumped = _replace_item(menu, k, salary=item.salary * 1.1,
                               reward=item.reward + item.salary * 0.1)
        assert not audit(bumped, table2).passed


def test_audit_fails_on_effort_perturbation(table2):
    menu = solve_iic(table2)
    item = menu.item(3)
    bumped = _replace_item(menu, 3, effort=item.effort * 1.1)
    assert not audit(bumped, table2).passed


def test_menu_regime_classification(table2):
    assert menu_regime(solve_iic(table2), table2) is Regime.CLP
    assert menu_regime(solve_ctwt(table2, InfoCase.IIC), table2) is Regime.NON_CLP
    empty_cfg = small_config((1.0, 2.0), TimeFrame(4), budget=60.0)
    assert menu_regime(solve_iic(empty_cfg), empty_cfg) is Regime.NON_CLP


def test_audit_accepts_serialized_menu(tmp_path, table2):
    # the external-document path: same serialization the CLI emits
    menu = solve_iic(table2)
    path = tmp_path / "menu.json"
    save_menu(menu, path)
    report = audit(load_menu(path), table2)
    assert report.passed


def test_report_dict_shape(table2):
    report = audit(solve_iic(table2), table2)
    doc = report.to_dict()
    assert doc["pass"] is True
    assert doc["ir_violations"] == [] and doc["ic_violations"] == []
    assert doc["bf_excess"] <= 1e-9
