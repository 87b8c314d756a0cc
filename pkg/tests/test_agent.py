import numpy as np
import pytest
from scipy import stats

from lobstates.agent import ACTIONS, LearningParams, N_ACTIONS, \
    PortfolioState, QTable, build_action_set, execute, grow, \
    learning_rate, q_update, reward, select_action


def table(n_states=3):
    q = QTable()
    grow(q, n_states)
    return q


def test_action_set_layout():
    actions = build_action_set()
    assert len(actions) == N_ACTIONS == 21
    assert actions[0] == ("buy", 0.0)[0:0] or actions[0].kind == "buy"
    assert actions[0].fraction == 0.0
    assert actions[10].kind == "buy" and actions[10].fraction == 1.0
    assert actions[11].kind == "sell" and actions[11].fraction == 0.1
    assert actions[20].kind == "sell" and actions[20].fraction == 1.0


def test_select_action_greedy_tiebreak():
    q = table()
    rng = np.random.default_rng(0)
    params = LearningParams(epsilon=0.0)
    assert select_action(q, 0, params, rng) == 0


def test_select_action_greedy_unique_max():
    q = table()
    q.values[1, 7] = 3.0
    rng = np.random.default_rng(0)
    assert select_action(q, 1, LearningParams(epsilon=0.0), rng) == 7


def test_select_action_uniform_when_epsilon_one():
    q = table(1)
    rng = np.random.default_rng(123)
    params = LearningParams(epsilon=1.0)
    draws = np.array([select_action(q, 0, params, rng)
                      for _ in range(10_000)])
    counts = np.bincount(draws, minlength=N_ACTIONS)
    chi2 = ((counts - 10_000 / N_ACTIONS) ** 2 / (10_000 / N_ACTIONS)).sum()
    # df = 20; the 99.9th percentile is ~45.3
    assert chi2 < stats.chi2.ppf(0.999, N_ACTIONS - 1)


def test_execute_buy():
    p = PortfolioState(cash=100_000.0, inventory=0)
    shares, price = execute(p, ACTIONS[1], bid=249.0, ask=250.0)  # buy 0.1
    assert (shares, price) == (40, 250.0)
    assert p.cash == 90_000.0 and p.inventory == 40


def test_execute_sell():
    p = PortfolioState(cash=0.0, inventory=800)
    shares, price = execute(p, ACTIONS[15], bid=249.0, ask=250.0)  # sell 0.5
    assert (shares, price) == (400, 249.0)
    assert p.inventory == 400 and p.cash == 400 * 249.0


def test_execute_floor_to_zero_is_noop():
    p = PortfolioState(cash=100.0, inventory=0)
    shares, _ = execute(p, ACTIONS[1], bid=249.0, ask=250.0)
    assert shares == 0
    assert p.cash == 100.0 and p.inventory == 0


def test_reward_modes():
    p = PortfolioState(cash=90_000.0, inventory=840, initial_value=300_000.0)
    r, value = reward(p, mid=249.5, prev_value=0.0, mode="cumulative")
    assert value == pytest.approx(299_580.0)
    assert r == pytest.approx(-420.0)
    p2 = PortfolioState(cash=50.0, inventory=0, initial_value=50.0)
    assert reward(p2, 10.0, 0.0, "cumulative")[0] == 0.0
    assert reward(p2, 10.0, 50.0, "incremental")[0] == 0.0


def test_learning_rate_schedule():
    assert learning_rate(0, 0.5) == 0.5
    assert learning_rate(4, 0.5) == pytest.approx(0.1)
    rates = [learning_rate(v, 0.5) for v in range(100)]
    assert all(b < a for a, b in zip(rates, rates[1:]))
    assert rates[-1] < 0.01


def test_q_update_hand_value():
    q = table(2)
    q.values[1, :] = 4.0
    params = LearningParams(gamma=0.9, alpha0=0.5)
    q_update(q, 0, 3, r=10.0, next_state=1, params=params)
    assert q.values[0, 3] == pytest.approx(6.8)
    assert q.visit_counts[0, 3] == 1


def test_q_update_fixed_point_when_alpha_zero():
    q = table(1)
    q.values[0, 2] = 5.0
    # huge visit count forces alpha ~ 0
    q.visit_counts[0, 2] = 10 ** 12
    q_update(q, 0, 2, r=100.0, next_state=0,
             params=LearningParams(gamma=0.9, alpha0=0.5))
    assert q.values[0, 2] == pytest.approx(5.0, abs=1e-6)


def test_q_update_contraction_and_locality():
    q = table(2)
    q.values[:] = 1.0
    before = q.values.copy()
    q_update(q, 0, 5, r=0.0, next_state=1,
             params=LearningParams(gamma=0.0, alpha0=0.5))
    assert q.values[0, 5] == pytest.approx(0.5)  # moved toward 0 by 1-alpha
    mask = np.ones_like(before, dtype=bool)
    mask[0, 5] = False
    assert np.array_equal(q.values[mask], before[mask])


def test_grow_rules():
    q = table(2)
    q.values[1, 1] = 3.0
    grow(q, 3)
    assert q.n_states == 3
    assert np.all(q.values[2] == 0.0)
    assert q.values[1, 1] == 3.0
    grow(q, 3)  # idempotent
    assert q.n_states == 3
    with pytest.raises(ValueError):
        grow(q, 2)


def test_greedy_choice_invariant_to_positive_scaling():
    rng = np.random.default_rng(5)
    params = LearningParams(epsilon=0.0)
    for _ in range(50):
        q = table(1)
        q.values[0] = rng.normal(0, 3, N_ACTIONS)
        pick = select_action(q, 0, params, np.random.default_rng(0))
        q.values[0] *= 7.5
        assert select_action(q, 0, params, np.random.default_rng(0)) == pick


def test_long_only_and_conservation_random_walk():
    # prices on a 0.25 grid keep every cash update exact in binary floats;
    # periodic resets stop buy-low/sell-high compounding from pushing cash
    # beyond the grid's exact range
    rng = np.random.default_rng(11)
    p = PortfolioState(cash=100_000.0, inventory=800)
    for step in range(20_000):
        if step % 250 == 0:
            p = PortfolioState(cash=100_000.0, inventory=800)
        bid = float(rng.integers(400, 440)) * 0.25
        ask = bid + float(rng.integers(1, 8)) * 0.25
        action = ACTIONS[int(rng.integers(0, N_ACTIONS))]
        cash_before, inv_before = p.cash, p.inventory
        shares, price = execute(p, action, bid, ask)
        assert p.cash >= 0.0 and p.inventory >= 0
        delta_cash = p.cash - cash_before
        delta_shares = p.inventory - inv_before
        assert delta_cash + delta_shares * price == 0.0
        assert abs(delta_shares) == shares
